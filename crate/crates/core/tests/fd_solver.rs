use delayflux_core::diagnostics::{analyze, AnalyzeOptions, Verdict};
use delayflux_core::fd::{convergence_study, simulate, simulate_with, FluxLaw, Grid, SimOptions};
use delayflux_core::greens::{ladder_solve, LadderOptions};
use delayflux_core::model::LowerSolution;
use delayflux_core::{InitialData, ModelParams, Profile, SteadyState};

fn doubled_steady(alpha: f64, m: f64) -> (SteadyState, InitialData) {
    let ss = SteadyState::new(alpha, m).unwrap();
    let f = Profile::Exponential {
        amplitude: 2.0 * ss.c,
        rate: 1.0,
    };
    (ss, InitialData::with_constant_history(f).unwrap())
}

#[test]
fn frozen_flux_orders() {
    // f'(0) = -alpha matches the frozen flux, so the data are compatible
    let (a, b) = (1.5, 0.7);
    let f = Profile::custom(move |x| a * (-x).exp() + b * x * x * (-2.0 * x).exp(), 2.0);
    let data = InitialData::with_constant_history(f).unwrap();
    let p = ModelParams::new(a, 4.0, 0.0).unwrap();
    let opts = SimOptions {
        flux: FluxLaw::Constant(-a),
        ..Default::default()
    };
    let tab = convergence_study(&p, &data, &Grid::new(15.0, 100, 1e-3, 1.0).unwrap(), &opts).unwrap();
    assert!(tab.space.order >= 1.8, "{:?}", tab.space);
    assert!(tab.time.order >= 0.9, "{:?}", tab.time);
}

#[test]
fn truncation_length_is_immaterial() {
    let (_, data) = doubled_steady(1.5, 4.0);
    let p = ModelParams::new(1.5, 4.0, 1.5).unwrap();
    let short = simulate(&p, &data, &Grid::new(10.0, 400, 1e-3, 20.0).unwrap()).unwrap();
    let long = simulate(&p, &data, &Grid::new(20.0, 800, 1e-3, 20.0).unwrap()).unwrap();
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    assert!((sup(&short.q0) - sup(&long.q0)).abs() < 1e-4);
    assert!(short.sup_distance(&long, 0.0, 20.0) < 1e-4);
}

#[test]
fn interpolated_delay_matches_aligned() {
    let (_, data) = doubled_steady(1.5, 4.0);
    let p = ModelParams::new(1.5, 4.0, 1.5).unwrap();
    let aligned = simulate(&p, &data, &Grid::new(15.0, 600, 1e-3, 20.0).unwrap()).unwrap();
    // tau / dt = 1370.3...
    let skew = simulate(&p, &data, &Grid::new(15.0, 600, 1.5 / 1370.3, 20.0).unwrap()).unwrap();
    // skip the incompatibility layer at t = 0, where backward Euler is only O(1) accurate
    assert!(aligned.sup_distance(&skew, 0.1, 20.0) < 1e-3);
}

#[test]
fn first_delay_window_matches_greens_solution() {
    let (_, data) = doubled_steady(1.5, 4.0);
    let p = ModelParams::new(1.5, 4.0, 1.5).unwrap();
    let fd = simulate(&p, &data, &Grid::default_for(1.5, 1.5)).unwrap();
    let rung = ladder_solve(
        &p,
        &data,
        &LadderOptions {
            rungs: 1,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(rung.sup_distance(&fd, 0.0, 1.5) < 1e-2);
}

#[test]
fn example_one_settles_on_steady_value() {
    let p = ModelParams::new(0.4, 4.0, 5.0).unwrap();
    let (ss, data) = doubled_steady(0.4, 4.0);
    LowerSolution::with_defaults(0.4, 4.0)
        .unwrap()
        .check_below(&data.f, &(0..200).map(|i| i as f64 * 0.05).collect::<Vec<_>>())
        .unwrap();
    let tr = simulate_with(
        &p,
        &data,
        &Grid::default_for(5.0, 100.0),
        &SimOptions {
            record_stride: 10,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((tr.last_value().unwrap() - 0.3909).abs() < 1e-4);
    let rep = analyze(
        &tr,
        ss.c,
        &AnalyzeOptions {
            transient_frac: 0.0,
            ..Default::default()
        },
    );
    assert!(rep.amp_ratio.unwrap() < 0.95);
}

#[test]
fn example_three_keeps_oscillating() {
    let p = ModelParams::new(1.5, 4.0, 1.5).unwrap();
    let (ss, data) = doubled_steady(1.5, 4.0);
    let tr = simulate(&p, &data, &Grid::default_for(1.5, 120.0)).unwrap();
    let rep = analyze(&tr, ss.c, &AnalyzeOptions::default());
    assert_eq!(rep.verdict, Verdict::Sustained);
    let mean = tr.q0[tr.len() / 2..].iter().sum::<f64>() / (tr.len() - tr.len() / 2) as f64;
    assert!((mean - 0.9022).abs() < 0.1, "{mean}");
}

#[test]
fn boundary_value_stays_bounded() {
    for (alpha, m, tau) in [(0.4, 4.0, 5.0), (1.6, 2.0, 5.0), (1.5, 4.0, 1.5), (5.0, 6.0, 0.2)] {
        let p = ModelParams::new(alpha, m, tau).unwrap();
        let (_, data) = doubled_steady(alpha, m);
        let tr = simulate_with(
            &p,
            &data,
            &Grid::default_for(tau, 40.0),
            &SimOptions {
                record_stride: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let bound = data.sup_f().max(alpha) + 1.0;
        assert!(tr.q0.iter().all(|v| v.abs() <= bound), "({alpha}, {m}, {tau})");
    }
}
