use delayflux_core::fd::{simulate, simulate_with, FluxLaw, Grid, SimOptions};
use delayflux_core::greens::*;
use delayflux_core::{Error, InitialData, ModelParams, Profile, SteadyState};

fn doubled_steady(alpha: f64, m: f64) -> (ModelParams, InitialData) {
    let ss = SteadyState::new(alpha, m).unwrap();
    let f = Profile::Exponential {
        amplitude: 2.0 * ss.c,
        rate: 1.0,
    };
    (
        ModelParams::new(alpha, m, 0.0).unwrap(),
        InitialData::with_constant_history(f).unwrap(),
    )
}

#[test]
fn homogeneous_term_matches_zero_flux_fd_run() {
    let ss = SteadyState::new(1.5, 4.0).unwrap();
    let f = Profile::Exponential {
        amplitude: ss.c,
        rate: 1.0,
    };
    let data = InitialData::with_constant_history(f.clone()).unwrap();
    let p = ModelParams::new(1.5, 4.0, 0.0).unwrap();
    let fd = simulate_with(
        &p,
        &data,
        &Grid::default_for(0.0, 2.0),
        &SimOptions {
            flux: FluxLaw::Constant(0.0),
            ..Default::default()
        },
    )
    .unwrap();
    for t in [0.25, 0.5, 1.0, 2.0] {
        let h = homogeneous_term(&f, 0.0, t, &KernelConfig::default());
        assert!((h - fd.value_at(t)).abs() < 1e-3, "t={t}: {h} vs {}", fd.value_at(t));
    }
}

#[test]
fn cross_validation_selects_default_convention() {
    let (p, data) = doubled_steady(0.4, 4.0);
    let g = -0.4;
    let reference = simulate_with(
        &p,
        &data,
        &Grid::default_for(0.0, 3.0),
        &SimOptions {
            flux: FluxLaw::Constant(g),
            ..Default::default()
        },
    )
    .unwrap();
    let ranked = rank_conventions(&data.f, g, &reference, &[0.5, 1.0, 2.0, 3.0]);
    assert_eq!(ranked[0].0, KernelConfig::default());
    assert!(ranked[0].1 < 1e-3);
    assert!(ranked[1].1 > 10.0 * ranked[0].1);
}

#[test]
fn envelope_constant_transfers_to_finer_grid() {
    let xs = [0.0, 0.25, 1.0, 3.0];
    let coarse: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
    let fine: Vec<f64> = (0..=990).map(|i| 0.1 + i as f64 * 0.01).collect();
    let fit = envelope_fit(&coarse, &xs);
    assert!(fit.c1.is_finite() && fit.c1 > 0.0);
    assert!(envelope_holds(fit.c1, &fine, &xs));
    assert!(!envelope_holds(0.9 * fit.c1, &fine, &xs));
}

#[test]
fn iterates_stay_ordered_and_flux_stays_bounded() {
    let (p, data) = doubled_steady(1.5, 4.0);
    let st = monotone_iterate(&p, &data, &Lattice::default(), &IterateOptions::default()).unwrap();
    assert!(st.converged && st.k <= 30);
    assert!(st.history.iter().all(|r| r.min_ordering_slack >= -1e-8));
    assert!(st.history.windows(2).all(|w| w[1].sup_gap <= w[0].sup_gap));
    for q in st.lower_boundary().q0.iter().chain(&st.upper_boundary().q0) {
        let g = p.flux(*q);
        assert!(*q >= 0.0 && (-p.alpha..0.0).contains(&g));
    }
    assert!(st.gamma.is_finite() && st.gamma > 0.0);
}

#[test]
fn limits_agree_with_fd_solution() {
    let (p, data) = doubled_steady(0.4, 4.0);
    let lat = Lattice {
        t_end: 3.0,
        ..Lattice::default()
    };
    let st = monotone_iterate(
        &p,
        &data,
        &lat,
        &IterateOptions {
            tol: 1e-9,
            k_max: 60,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(st.converged);
    let fd = simulate(&p, &data, &Grid::default_for(0.0, 3.0)).unwrap();
    assert!(st.lower_boundary().sup_distance(&fd, 0.0, 3.0) < 1e-2);
    assert!(st.upper_boundary().sup_distance(&fd, 0.0, 3.0) < 1e-2);
}

#[test]
fn seeds_must_bracket_initial_data() {
    let (p, data) = doubled_steady(1.5, 4.0);
    let opts = IterateOptions {
        seeds: Seeds::Custom {
            lower: Profile::Constant(0.0),
            upper: Profile::Constant(0.1),
        },
        ..Default::default()
    };
    assert!(matches!(
        monotone_iterate(&p, &data, &Lattice::default(), &opts),
        Err(Error::SeedOrdering { .. })
    ));
}

#[test]
fn uncoupled_iteration_from_profile_seeds_loses_order() {
    // the constant upper seed carries zero flux, weaker than the influx it must dominate
    let (p, data) = doubled_steady(1.5, 4.0);
    let opts = IterateOptions {
        seeds: Seeds::LowerSolutionAndSup,
        coupling: Coupling::Own,
        ..Default::default()
    };
    let err = monotone_iterate(&p, &data, &Lattice::default(), &opts).unwrap_err();
    assert!(matches!(err, Error::OrderingViolation { k: 1, .. }), "{err:?}");
}

#[test]
fn ladder_three_rungs_matches_fd() {
    let (p0, data) = doubled_steady(0.4, 4.0);
    let p = ModelParams { tau: 5.0, ..p0 };
    let lad = ladder_solve(&p, &data, &LadderOptions::default()).unwrap();
    let fd = simulate(&p, &data, &Grid::default_for(5.0, 15.0)).unwrap();
    assert!(lad.sup_distance(&fd, 0.0, 15.0) < 1e-2);
    assert!((lad.value_at(15.0) - fd.value_at(15.0)).abs() < 1e-2);
}
