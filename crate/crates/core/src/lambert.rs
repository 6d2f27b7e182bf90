//! Complex Lambert W on an arbitrary branch.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use core::f64::consts::PI;

/// `W_k(z)`: the solution of `w e^w = z` on branch `k`.
///
/// Uses the asymptotic expansion as a starting point followed by Halley
/// iteration. Returns `None` if the iteration stalls. Accurate away from the
/// branch point `z = -1/e`, which is all the spectral code needs.
pub fn lambert_w(k: i32, z: Complex64) -> Option<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return if k == 0 { Some(z) } else { None };
    }
    let two_pi_ik = Complex64::new(0.0, 2.0 * PI * k as f64);
    let mut w = if k == 0 && z.norm() < 1.0 {
        // series around 0 is a better start than the log expansion here
        z - z * z
    } else {
        let l1 = z.ln() + two_pi_ik;
        if l1.norm() < 1e-300 {
            l1
        } else {
            l1 - l1.ln()
        }
    };

    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        w -= step;
        if step.norm() <= 1e-15 * (1.0 + w.norm()) {
            return Some(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(w: Complex64, z: Complex64) -> f64 {
        (w * w.exp() - z).norm() / z.norm()
    }

    #[test]
    fn principal_branch_known_values() {
        // omega constant, W(1)
        let w = lambert_w(0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((w.re - 0.567_143_290_409_783_8).abs() < 1e-14);
        assert!(w.im.abs() < 1e-14);
        let w = lambert_w(0, Complex64::new(core::f64::consts::E, 0.0)).unwrap();
        assert!((w.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn branches_solve_the_defining_equation() {
        for k in [-3, -1, 0, 1, 2, 5] {
            for z in [
                Complex64::new(0.01, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(150.0, 0.0),
                Complex64::new(-0.2, 3.0),
                Complex64::new(1e6, -2.0),
            ] {
                let w = lambert_w(k, z).unwrap();
                assert!(residual(w, z) < 1e-12, "k={k} z={z} w={w}");
            }
        }
    }

    #[test]
    fn branch_one_imaginary_part_in_band() {
        // W_1 of a positive real lies in the strip pi < Im w < 2 pi
        for x in [1e-3, 0.5, 7.0, 1e4] {
            let w = lambert_w(1, Complex64::new(x, 0.0)).unwrap();
            assert!(w.im > PI && w.im < 2.0 * PI, "{x} -> {w}");
        }
    }
}
