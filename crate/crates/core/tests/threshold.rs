use potwell_core::symbols::preset;
use potwell_core::*;

#[test]
fn depth_converges_under_refinement_and_domain_doubling() {
    let model = preset(Preset::DoubleDispersion { gamma1: 2.0, gamma2: 1.0 }, 3.0).unwrap();
    let opts = MinimizeOptions::default();
    let g = GridSpec::new(20.0, 256).unwrap();
    let coarse = minimize_embedding_constant(&model, g, 0.0, &opts).unwrap();
    let fine = minimize_embedding_constant(&model, g.refined(), 0.0, &opts).unwrap();
    let wide = minimize_embedding_constant(&model, g.doubled_domain(), 0.0, &opts).unwrap();
    assert!((coarse.d_value - fine.d_value).abs() < 1e-3 * fine.d_value);
    assert!((wide.d_value - fine.d_value).abs() < 1e-3 * fine.d_value);
}

#[test]
fn m_gamma_even_and_non_increasing() {
    let model = preset(Preset::DoubleDispersion { gamma1: 1.0, gamma2: 3.0 }, 3.0).unwrap();
    let grid = GridSpec::new(30.0, 512).unwrap();
    let c1 = model.c1();
    let opts = MinimizeOptions::default();
    let m = |g: f64| minimize_embedding_constant(&model, grid, g * c1, &opts).unwrap().m_value;
    let fracs = [0.0, 0.2, 0.4, 0.6, 0.8];
    let vals: Vec<f64> = fracs.iter().map(|&f| m(f)).collect();
    for (f, v) in fracs.iter().zip(&vals) {
        assert!((m(-f) - v).abs() <= 1e-9 * v);
    }
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
}

#[test]
fn good_boussinesq_threshold() {
    // l = 1 + ξ², b = 1: the ground state solves φ - φ'' = φ³ again
    let model = preset(Preset::GoodBoussinesq { gamma2: 1.0 }, 3.0).unwrap();
    let grid = GridSpec::new(30.0, 1024).unwrap();
    let th = minimize_embedding_constant(&model, grid, 0.0, &MinimizeOptions::default()).unwrap();
    assert!((th.d_value - 4.0 / 3.0).abs() < 1e-8);
}
