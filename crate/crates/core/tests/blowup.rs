use potwell_core::dynamics::cfl_limit;
use potwell_core::symbols::preset;
use potwell_core::*;

fn setup() -> (ThresholdResult, Functionals) {
    let model = preset(Preset::DoubleDispersion { gamma1: 1.0, gamma2: 1.0 }, 3.0).unwrap();
    let grid = GridSpec::new(30.0, 1024).unwrap();
    let th = minimize_embedding_constant(&model, grid, 0.0, &MinimizeOptions::default()).unwrap();
    (th, Functionals::new(&model, grid))
}

fn odd_bump(grid: GridSpec, a: f64) -> StateUW {
    let u = RealField::from_fn(grid, |x| -2.0 * a * x * (-x * x).exp()).unwrap();
    StateUW::new(u, RealField::zeros(grid)).unwrap()
}

#[test]
fn unstable_mean_free_data_blows_up() {
    let (th, fns) = setup();
    let state = odd_bump(th.grid, 5.0);
    let mut times = Vec::new();
    for dt in [cfl_limit(&fns), 0.5 * cfl_limit(&fns)] {
        let cfg = SolverConfig {
            dt,
            t_end: 50.0,
            output_stride: 2,
            levine_tracking: true,
            ..Default::default()
        };
        let rec = integrate(&state, &cfg, &th).unwrap();
        assert_eq!(rec.initial.label, Label::SigmaMinus);
        assert!(rec.blowup.delta_bound > 0.0);
        assert!(rec.blowup.detected);
        let lev = levine_check(&rec).unwrap();
        assert!(lev.applicable && lev.passed, "{}", lev.note);
        assert!(lev.samples_checked > 10);
        let inv = invariance_monitor(&rec);
        assert!(inv.passed, "{}", inv.note);
        let bound = rec.blowup.levine_upper_bound.unwrap();
        assert!(rec.blowup.t_detect.unwrap() <= bound);
        times.push(rec.blowup.t_detect.unwrap());
    }
    assert!((times[0] - times[1]).abs() <= 0.05 * times[1]);
}

#[test]
fn stable_data_stays_bounded() {
    let (th, fns) = setup();
    let state = StateUW::new(th.ground_state().scaled(0.5), RealField::zeros(th.grid)).unwrap();
    let cfg = SolverConfig { dt: cfl_limit(&fns), t_end: 20.0, output_stride: 50, ..Default::default() };
    let rec = integrate(&state, &cfg, &th).unwrap();
    assert_eq!(rec.initial.label, Label::SigmaPlus);
    assert!(!rec.blowup.detected);
    let inv = invariance_monitor(&rec);
    assert!(inv.passed && inv.min_bound_margin > 0.0, "{}", inv.note);
    assert!(rec.drifts().0 < 1e-8);
}
