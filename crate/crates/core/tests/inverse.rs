use bcwave::inverse::{
    data_controls, data_projection, gauge_image, projection_ladder, recover_potential, recover_values,
    ProjectionLadder, ReconstructionConfig,
};
use bcwave::spectral::{wave_image, SpectralImage, SpectralMeasure};
use bcwave::wave::{forward_fd, Control};
use bcwave::{BcError, Potential};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn closed_form() -> &'static SpectralMeasure {
    static MU: OnceLock<SpectralMeasure> = OnceLock::new();
    MU.get_or_init(|| SpectralMeasure::constant(1.0, 10.0, 4e4).unwrap())
}

fn default_ladder() -> &'static ProjectionLadder {
    static L: OnceLock<ProjectionLadder> = OnceLock::new();
    L.get_or_init(|| {
        let cfg = ReconstructionConfig::default();
        projection_ladder(closed_form(), cfg.n_controls, cfg.ladder_step(), cfg.bump_radius, cfg.reg_eps).unwrap()
    })
}

/// 40 rungs well inside the band of the measure, so the Gram matrix has full rank.
fn small() -> (SpectralMeasure, ProjectionLadder) {
    let mu = SpectralMeasure::constant(1.0, 10.0, 4e4).unwrap();
    let ladder = projection_ladder(&mu, 40, 0.025, 0.03, 1e-8).unwrap();
    (mu, ladder)
}

fn trusted_grid() -> Vec<f64> {
    (4..=30).map(|i| i as f64 * 0.05).collect()
}

#[test]
fn zero_control_gives_zero_values() {
    let mu = closed_form();
    let f = Control::zero(1e-3, 3.0).unwrap();
    let u = wave_image(&f, 3.0, mu);
    let vals = recover_values(default_ladder(), &u, &gauge_image(mu), &trusted_grid(), &[0.1]).unwrap();
    assert!(vals.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
}

fn physical_values(h: f64) -> (Control, Vec<f64>) {
    let t = 3.0;
    let f = Control::from_fn(|s| bcwave::inverse::smoothstep(s, 0.2, 1.2) * (t - s) / t, h, t).unwrap();
    let q = Potential::constant(1.0, h, t).unwrap();
    let u = forward_fd(&q, &f, t).unwrap();
    let vals = trusted_grid()
        .iter()
        .map(|&x| {
            let i = (x / h).round() as usize;
            u.last()[i] * x.exp()
        })
        .collect();
    (f, vals)
}

fn value_error(windows: &[f64]) -> f64 {
    let mu = closed_form();
    let (f, exact) = physical_values(1e-3);
    let u = wave_image(&f, 3.0, mu);
    let vals = recover_values(default_ladder(), &u, &gauge_image(mu), &trusted_grid(), windows).unwrap();
    let peak = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    vals.iter().zip(&exact).map(|(v, e)| (v - e).norm()).fold(0.0, f64::max) / peak
}

#[test]
fn values_match_physical_wave() {
    let err = value_error(&[0.1]);
    assert!(err <= 5e-2, "relative sup error {err}");
}

#[test]
fn window_halving_shrinks_residual() {
    let mu = closed_form();
    let f = &data_controls(3.0, 1).unwrap()[0];
    let (u, e) = (wave_image(f, 3.0, mu), gauge_image(mu));
    let vals: Vec<Vec<Complex64>> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&t| recover_values(default_ladder(), &u, &e, &trusted_grid(), &[t]).unwrap())
        .collect();
    let resid: Vec<f64> =
        vals.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)).collect();
    for r in resid.windows(2) {
        assert!(r[1] <= 0.5 * r[0], "residuals {resid:?}");
    }
}

#[test]
fn gauge_scaling_rescales_values() {
    let mu = closed_form();
    let f = &data_controls(3.0, 2).unwrap()[1];
    let u = wave_image(f, 3.0, mu);
    let e = gauge_image(mu);
    let grid = trusted_grid();
    let base = recover_values(default_ladder(), &u, &e, &grid, &[0.1]).unwrap();
    for c in [2.0, -0.5, 1e3] {
        let scaled = recover_values(default_ladder(), &u, &e.scale(Complex64::new(c, 0.0)), &grid, &[0.1]).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            assert!((a - b * c).norm() <= 1e-10 * a.norm().max(1e-12), "c = {c}");
        }
    }
}

#[test]
fn weight_scaling_leaves_reconstruction_invariant() {
    let mu = closed_form();
    let cfg = ReconstructionConfig::default();
    let a = recover_potential(mu, &cfg).unwrap();
    let b = recover_potential(&mu.with_scaled_weights(2.0), &cfg).unwrap();
    for i in a.trusted_indices() {
        let (x, y) = (a.model.q_rec[i], b.model.q_rec[i]);
        assert!((x - y).abs() <= 1e-8 * x.abs(), "tau {}: {x} vs {y}", a.model.tau[i]);
    }
}

#[test]
fn roundtrip_closed_form_measure() {
    let rec = recover_potential(closed_form(), &ReconstructionConfig::default()).unwrap();
    let err = rec.trusted_indices().iter().map(|&i| (rec.model.q_rec[i] - 1.0).abs()).fold(0.0, f64::max);
    assert!(err <= 0.05, "sup error {err}");
    assert_eq!(rec.diagnostics.trusted, (0.2, 1.5));
    assert!(rec.diagnostics.gram.rank >= rec.diagnostics.band_rank / 2);
}

#[test]
fn coarse_measure_collapses_rank() {
    // 31 nodes cannot carry the ~120 independent ladder directions a band of 4e4 allows
    let mu = SpectralMeasure::constant(1.0, 0.5, 4e4).unwrap();
    let r = projection_ladder(&mu, 300, 0.00625, 0.03, 1e-8).err();
    assert!(matches!(r, Some(BcError::RankCollapse { .. })), "{r:?}");
    let basis: Vec<Control> = (0..80).map(|k| Control::bump(0.2 + 0.02 * k as f64, 0.1, 0.01, 2.0).unwrap()).collect();
    let r = data_projection(&mu, 2.0, &basis, 1e-8);
    assert!(matches!(r, Err(BcError::RankCollapse { .. })));
}

#[test]
fn projection_is_idempotent() {
    let (mu, ladder) = small();
    let f = Control::bump(0.6, 0.3, 1e-3, 1.0).unwrap();
    let v = wave_image(&f, 1.0, &mu);
    let p = ladder.projection.project(&v);
    let pp = ladder.projection.project(&p);
    assert!(mu.norm(&p.sub(&pp)) <= 1e-6 * mu.norm(&p));
}

fn project_norm(mu: &SpectralMeasure, ladder: &ProjectionLadder, v: &SpectralImage, s: f64) -> f64 {
    mu.norm(&ladder.project_at(v, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projections_grow_with_time(s in 0.05f64..0.9, ds in 0.0f64..0.1, c in 0.2f64..0.8) {
        let (mu, ladder) = small();
        let v = wave_image(&Control::bump(c, 0.15, 1e-3, 1.0).unwrap(), 1.0, &mu);
        let n = mu.norm(&v);
        let lo = project_norm(&mu, &ladder, &v, s);
        let hi = project_norm(&mu, &ladder, &v, s + ds);
        prop_assert!(lo <= hi + 1e-6 * n);
        // range of P_s sits inside range of P_{s + ds}
        let ps = ladder.project_at(&v, s);
        let nested = ladder.project_at(&ps, s + ds);
        prop_assert!(mu.norm(&ps.sub(&nested)) <= 1e-5 * n);
    }
}

#[test]
fn error_shrinks_as_band_grows() {
    let cfg = ReconstructionConfig::default();
    let errs: Vec<f64> = [1e4, 4e4]
        .iter()
        .map(|&lmax| {
            let mu = SpectralMeasure::constant(1.0, 10.0, lmax).unwrap();
            let rec = recover_potential(&mu, &cfg).unwrap();
            rec.trusted_indices().iter().map(|&i| (rec.model.q_rec[i] - 1.0).abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[1] < errs[0], "{errs:?}");
}
