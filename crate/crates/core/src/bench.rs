//! Runnable acceptance benchmarks. Each bench checks one criterion and
//! returns a [`BenchReport`] instead of panicking.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::inverse::{recover_potential, smoothstep, Reconstruction, ReconstructionConfig};
use crate::model::{
    atom_metric, ball_measure, eikonal_apply, eikonal_riemann_sum, model_coefficients, recover_q_from_pq, Atom,
    DEFAULT_COND_TOL,
};
use crate::potential::Potential;
use crate::sets::{
    isotony_apply, neighborhood, point_neighborhood, sym_diff_measure, ElementarySet, SubspaceDescriptor,
};
use crate::sl;
use crate::spectral::{control_second_derivative, phi_transform, truncated_measure, wave_image, SpectralMeasure};
use crate::wave::{
    dual_backward, dual_forward, forward_fd, forward_kernel, goursat_kernel, inner, l2_norm, rel_l2, smooth_bump,
    solve_control, space_time_inner, Control, WaveField,
};

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub name: String,
    pub criterion: u8,
    pub passed: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, f64>,
}

impl BenchReport {
    fn new(name: &str, criterion: u8) -> Self {
        Self { name: name.into(), criterion, passed: true, summary: String::new(), metrics: BTreeMap::new() }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// Records `v` and fails the report when `!ok`.
    fn check(&mut self, key: &str, v: f64, ok: bool) {
        self.metric(key, v);
        if !ok {
            self.passed = false;
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} criterion {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.summary
        )
    }
}

/// Names accepted by [`run`], in criterion order.
pub const BENCHES: &[(&str, u8)] = &[
    ("solver-xval", 1),
    ("controllability", 2),
    ("duality", 3),
    ("lattice", 4),
    ("eikonal", 5),
    ("spectral", 6),
    ("model-coeffs", 7),
    ("roundtrip", 8),
    ("roundtrip-const", 8),
    ("roundtrip-bump", 8),
    ("firewall", 9),
];

/// Runs one bench by name; `all` runs one bench per criterion.
pub fn run(name: &str) -> Result<Vec<BenchReport>> {
    let one = |r: Result<BenchReport>| r.map(|r| vec![r]);
    match name {
        "solver-xval" => one(solver_xval()),
        "controllability" => one(controllability()),
        "duality" => one(duality()),
        "lattice" => one(lattice()),
        "eikonal" => one(eikonal()),
        "spectral" => one(spectral()),
        "model-coeffs" => one(model_coeffs()),
        "roundtrip" => one(roundtrip(&[RoundtripCase::CONST, RoundtripCase::BUMP])),
        "roundtrip-const" => one(roundtrip(&[RoundtripCase::CONST])),
        "roundtrip-bump" => one(roundtrip(&[RoundtripCase::BUMP])),
        "firewall" => one(firewall()),
        "all" => {
            let mut out = Vec::new();
            for n in ["solver-xval", "controllability", "duality", "lattice", "eikonal", "spectral", "model-coeffs"] {
                out.extend(run(n)?);
            }
            out.extend(run("roundtrip")?);
            out.extend(run("firewall")?);
            Ok(out)
        }
        _ => Err(invalid(format!(
            "unknown bench `{name}` (expected all or one of {})",
            BENCHES.iter().map(|b| b.0).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn field_rel_l2(a: &WaveField, b: &WaveField) -> f64 {
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.values.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Sum of three bumps with random centers, radii and amplitudes inside `(lo, hi)`.
fn random_pulse(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let parts: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let r = rng.random_range(0.2..0.6f64).min(0.45 * (hi - lo));
            let c = rng.random_range(lo + r..hi - r);
            let a = rng.random_range(0.3..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            (c, r, a)
        })
        .collect();
    move |t| parts.iter().map(|&(c, r, a)| a * smooth_bump((t - c) / r)).sum()
}

fn solver_xval() -> Result<BenchReport> {
    let mut rep = BenchReport::new("solver-xval", 1);
    let (h, t) = (1.0 / 200.0, 4.0);
    let start = Instant::now();
    let q = Potential::constant(1.0, h, t)?;
    let w = goursat_kernel(&q, t)?;
    let mut rng = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let f = Control::from_fn(random_pulse(&mut rng, 0.0, t), h, t)?;
        let a = forward_fd(&q, &f, t)?;
        let b = forward_kernel(&w, &f, t)?;
        worst = worst.max(field_rel_l2(&a, &b));
    }
    let secs = start.elapsed().as_secs_f64();
    rep.check("max_rel_l2", worst, worst <= 1e-3);
    rep.check("seconds", secs, secs <= 10.0);
    rep.summary = format!("fd vs kernel rel L2 {worst:.2e} (<= 1e-3), {secs:.2} s (<= 10 s)");
    Ok(rep)
}

fn controllability() -> Result<BenchReport> {
    let mut rep = BenchReport::new("controllability", 2);
    let t = 2.0;
    let mut rng = rng(2);
    let targets: Vec<Box<dyn Fn(f64) -> f64>> =
        (0..10).map(|_| Box::new(random_pulse(&mut rng, 0.05, t - 0.05)) as Box<dyn Fn(f64) -> f64>).collect();
    let errors = |h: f64| -> Result<Vec<f64>> {
        let q = Potential::bump(1.0, 0.5, 1.0, 0.08, h, t)?;
        let w = goursat_kernel(&q, t)?;
        targets
            .iter()
            .map(|y| {
                let ys: Vec<f64> = (0..=w.m).map(|i| y(i as f64 * h)).collect();
                let f = solve_control(&w, &ys, t)?;
                let u = forward_fd(&q, &f, t)?;
                Ok(rel_l2(u.last(), &ys, h))
            })
            .collect()
    };
    let coarse = errors(1.0 / 100.0)?;
    let fine = errors(1.0 / 200.0)?;
    let worst = fine.iter().cloned().fold(0.0, f64::max);
    let min_ratio = coarse.iter().zip(&fine).map(|(c, f)| c / f).fold(f64::INFINITY, f64::min);
    rep.check("max_rel_error", worst, worst <= 1e-3);
    rep.check("min_halving_ratio", min_ratio, min_ratio >= 3.0);
    rep.summary =
        format!("10 targets, max error {worst:.2e} (<= 1e-3), h-halving ratio >= {min_ratio:.2} (O(h^2): >= 3)");
    Ok(rep)
}

fn duality() -> Result<BenchReport> {
    let mut rep = BenchReport::new("duality", 3);
    let (h, t, nx) = (0.01, 1.0, 401);
    let q = Potential::bump(1.0, 0.5, 1.0, 0.08, h, 4.0)?;
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (gc, gr) = (rng.random_range(1.6..2.4), rng.random_range(0.2..0.5));
        let (om, ph) = (rng.random_range(1.0..6.0), rng.random_range(0.0..6.0));
        let (yc, yr) = (rng.random_range(1.2..2.4), rng.random_range(0.3..0.6));
        let g = WaveField::from_fn(nx, 101, h, |x, s| smooth_bump((x - gc) / gr) * (om * s + ph).sin());
        let y: Vec<f64> = (0..nx).map(|i| smooth_bump((i as f64 * h - yc) / yr)).collect();
        let v = dual_forward(&q, &g, t)?;
        let wy = dual_backward(&q, &y, t)?;
        let defect = (space_time_inner(&g, &wy) + inner(v.last(), &y, h)).abs();
        let scale = space_time_inner(&g, &g).sqrt() * l2_norm(&y, h);
        worst = worst.max(defect / scale);
    }
    rep.check("max_rel_defect", worst, worst <= 1e-3);
    rep.summary = format!("5 pairs, max |<g,w> + <v(T),y>| / norms {worst:.2e} (<= 1e-3)");
    Ok(rep)
}

const LATTICE_STEP: f64 = 1e-4;
const LATTICE_TOL: f64 = 2e-4;
const LATTICE_L: f64 = 12.0;

fn random_set(rng: &mut ChaCha8Rng) -> Result<ElementarySet> {
    let k = rng.random_range(1..=4);
    let mut pts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(0.0..10.0)).collect();
    pts.sort_by(f64::total_cmp);
    let mut pairs: Vec<(f64, f64)> = pts.chunks(2).filter(|c| c[1] - c[0] > 1e-3).map(|c| (c[0], c[1])).collect();
    if pairs.is_empty() {
        pairs.push((1.0, 2.0));
    }
    if rng.random_bool(0.1) {
        pairs.last_mut().unwrap().1 = f64::INFINITY;
    }
    ElementarySet::from_pairs(&pairs)
}

fn raw_dist(pairs: &[(f64, f64)], x: f64) -> f64 {
    pairs.iter().map(|&(a, b)| (a - x).max(x - b).max(0.0)).fold(f64::INFINITY, f64::min)
}

fn grid_runs(member: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
    let n = (LATTICE_L / LATTICE_STEP).round() as usize;
    let mut runs = Vec::new();
    let mut open: Option<f64> = None;
    for k in 0..=n {
        let x = k as f64 * LATTICE_STEP;
        match (member(x), open) {
            (true, None) => open = Some(x),
            (false, Some(a)) => {
                runs.push((a, x - LATTICE_STEP));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(a) = open {
        runs.push((a, LATTICE_L));
    }
    runs
}

fn grid_measure(member: impl Fn(f64) -> bool) -> f64 {
    let n = (LATTICE_L / LATTICE_STEP).round() as usize;
    (0..n).filter(|&k| member((k as f64 + 0.5) * LATTICE_STEP)).count() as f64 * LATTICE_STEP
}

fn pairs_of(e: &ElementarySet) -> Vec<(f64, f64)> {
    e.intervals().iter().map(|iv| (iv.a, iv.b)).collect()
}

fn lattice() -> Result<BenchReport> {
    let mut rep = BenchReport::new("lattice", 4);
    let mut rng = rng(4);
    let (mut nbhd_fail, mut iso_fail, mut sym_fail) = (0usize, 0usize, 0usize);
    let mut worst_endpoint = 0.0f64;
    let mut worst_sym = 0.0f64;
    for _ in 0..1000 {
        let e = random_set(&mut rng)?;
        let f = random_set(&mut rng)?;
        let r = rng.random_range(0.05..1.0);
        let raw = pairs_of(&e);

        let brute = grid_runs(|x| raw_dist(&raw, x) < r);
        let exact: Vec<(f64, f64)> = pairs_of(&neighborhood(&e, r))
            .into_iter()
            .filter(|&(a, _)| a < LATTICE_L)
            .map(|(a, b)| (a, b.min(LATTICE_L)))
            .collect();
        if brute.len() != exact.len() {
            nbhd_fail += 1;
        } else {
            for (x, y) in brute.iter().zip(&exact) {
                let d = (x.0 - y.0).abs().max((x.1 - y.1).abs());
                worst_endpoint = worst_endpoint.max(d);
                if d > LATTICE_TOL {
                    nbhd_fail += 1;
                }
            }
        }

        let d = SubspaceDescriptor::new(e.clone());
        let (s, t) = (0.5 * r, rng.random_range(0.05..1.0));
        let composed = isotony_apply(&isotony_apply(&d, s), t);
        let direct = isotony_apply(&d, s + t);
        if isotony_apply(&d, 0.0) != d || sym_diff_measure(&composed.set, &direct.set, LATTICE_L) > 1e-12 {
            iso_fail += 1;
        }

        let rf = pairs_of(&f);
        let brute_sym = grid_measure(|x| (raw_dist(&raw, x) == 0.0) != (raw_dist(&rf, x) == 0.0));
        let exact_sym = sym_diff_measure(&e, &f, LATTICE_L);
        let endpoints = 2 * (raw.len() + rf.len());
        let diff = (brute_sym - exact_sym).abs();
        worst_sym = worst_sym.max(diff);
        if diff > LATTICE_TOL * endpoints as f64 {
            sym_fail += 1;
        }
    }

    let mut ball_fail = 0usize;
    let mut metric_fail = 0usize;
    for _ in 0..1000 {
        let (x, y, z) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
        let r = rng.random_range(0.01..3.0);
        let (a, b, c) = (Atom::new(x)?, Atom::new(y)?, Atom::new(z)?);
        let brute = grid_measure(|s| (s - x).abs() < r);
        if ball_measure(a, r) != r + r.min(x)
            || (ball_measure(a, r) - brute).abs() > 2.0 * LATTICE_TOL
            || (point_neighborhood(x, r).measure() - ball_measure(a, r)).abs() > 1e-12
        {
            ball_fail += 1;
        }
        if atom_metric(a, b) != (x - y).abs()
            || atom_metric(a, b) != atom_metric(b, a)
            || atom_metric(a, c) > atom_metric(a, b) + atom_metric(b, c) + 1e-15
        {
            metric_fail += 1;
        }
    }
    rep.check("neighborhood_failures", nbhd_fail as f64, nbhd_fail == 0);
    rep.check("isotony_failures", iso_fail as f64, iso_fail == 0);
    rep.check("sym_diff_failures", sym_fail as f64, sym_fail == 0);
    rep.check("ball_failures", ball_fail as f64, ball_fail == 0);
    rep.check("metric_failures", metric_fail as f64, metric_fail == 0);
    rep.metric("worst_endpoint", worst_endpoint);
    rep.metric("worst_sym_diff", worst_sym);
    rep.summary = format!(
        "1000 sets: endpoint dev {worst_endpoint:.1e} (<= 2e-4), sym-diff dev {worst_sym:.1e}; failures nbhd {nbhd_fail} iso {iso_fail} sym {sym_fail} ball {ball_fail} metric {metric_fail}"
    );
    Ok(rep)
}

fn eikonal() -> Result<BenchReport> {
    let mut rep = BenchReport::new("eikonal", 5);
    let h = 1e-3;
    let n = 4001;
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 * h;
            smooth_bump((x - 1.5) / 1.2) * (1.0 + 0.3 * (4.0 * x).sin())
        })
        .collect();
    let ranks = [10usize, 20, 40, 80];
    let mut min_ratio = f64::INFINITY;
    let mut worst_fine = 0.0f64;
    for x in [0.0, 0.4, 1.0, 1.7, 2.5] {
        let omega = Atom::new(x)?;
        let exact = eikonal_apply(omega, &y, h);
        let errs: Vec<f64> = ranks
            .iter()
            .map(|&k| {
                let part: Vec<f64> = (0..=k).map(|j| 4.0 * j as f64 / k as f64).collect();
                rel_l2(&eikonal_riemann_sum(omega, &y, h, &part), &exact, h)
            })
            .collect();
        for w in errs.windows(2) {
            min_ratio = min_ratio.min(w[0] / w[1]);
        }
        worst_fine = worst_fine.max(errs[ranks.len() - 1]);
    }
    rep.check("min_ratio", min_ratio, min_ratio >= 1.6);
    rep.check("error_at_rank_80", worst_fine, worst_fine <= 4.0 / 80.0);
    rep.summary = format!(
        "5 atoms, partition ranks 10..80: error ratio per doubling >= {min_ratio:.2} (first order: >= 1.6), error at 80 {worst_fine:.2e}"
    );
    Ok(rep)
}

fn spectral() -> Result<BenchReport> {
    let mut rep = BenchReport::new("spectral", 6);
    let (h, xmax, lmax) = (0.005, 20.0, 400.0);
    let mut summary = Vec::new();
    for c in [1.0, 4.0] {
        let q = Potential::constant(c, h, xmax)?.certified()?;
        let mu = truncated_measure(&q, xmax, lmax)?;

        let y: Vec<f64> = (0..q.len())
            .map(|i| {
                let x = q.x(i);
                smooth_bump((x - 2.0) / 1.5) * (1.0 + 0.5 * (3.0 * x).sin())
            })
            .collect();
        let img = phi_transform(&y, &q, &mu)?;
        let planch = (mu.norm(&img) / l2_norm(&y, h)).powi(2);

        let g = sl::gauge(&q)?;
        let e = phi_transform(&g.phi, &q, &mu)?;
        let gauge_dev = mu
            .nodes
            .iter()
            .zip(&e.values)
            .filter(|(&l, _)| l <= lmax / 2.0)
            .map(|(&l, v)| (v.re * l - 1.0).abs())
            .fold(0.0, f64::max);

        let t = 3.0;
        let f = Control::bump(1.5, 0.8, h, t)?;
        let u = forward_fd(&q, &f, t)?;
        let physical = phi_transform(u.last(), &q, &mu)?;
        let wave_err = mu.norm(&wave_image(&f, t, &mu).sub(&physical)) / mu.norm(&physical);

        rep.check(&format!("c{c}_plancherel_dev"), (planch - 1.0).abs(), (planch - 1.0).abs() <= 1e-2);
        rep.check(&format!("c{c}_gauge_dev"), gauge_dev, gauge_dev <= 1e-2);
        rep.check(&format!("c{c}_wave_image_err"), wave_err, wave_err <= 2e-2);
        summary.push(format!(
            "c={c}: Plancherel {planch:.4}, max|e*lambda-1| {gauge_dev:.1e}, wave image err {wave_err:.1e}"
        ));
    }
    rep.summary = summary.join("; ") + " (tol 1%, 1%, 2%)";
    Ok(rep)
}

fn model_coeffs() -> Result<BenchReport> {
    let mut rep = BenchReport::new("model-coeffs", 7);
    let (h, t, xmax) = (0.005, 3.0, 20.0);
    let stride = 10;
    let tau: Vec<f64> = (1..=35).map(|i| (i * stride) as f64 * h).collect();
    let mut summary = Vec::new();
    for c in [1.0, 4.0] {
        let q = Potential::constant(c, h, xmax)?.certified()?;
        let phi = sl::gauge(&q)?.phi;
        let w = goursat_kernel(&q, t)?;
        let mut pairs = Vec::new();
        for k in 1..=4 {
            let f = Control::from_fn(|s| smoothstep(s, 0.2, 1.2) * ((t - s) / t).powi(k), h, t)?;
            let u = forward_kernel(&w, &f, t)?;
            let utt = forward_kernel(&w, &control_second_derivative(&f), t)?;
            let at = |v: &[f64], i: usize| v[i * stride] / phi[i * stride];
            let y: Vec<f64> = (1..=tau.len()).map(|i| at(u.last(), i)).collect();
            let g: Vec<f64> = (1..=tau.len()).map(|i| -at(utt.last(), i)).collect();
            pairs.push((y, g));
        }
        let mut mc = model_coefficients(&pairs, &tau, DEFAULT_COND_TOL)?;
        recover_q_from_pq(&mut mc)?;
        let trusted: Vec<usize> =
            (0..tau.len()).filter(|&i| tau[i] >= 0.2 - 1e-9 && tau[i] <= t / 2.0 + 1e-9).collect();
        let sup = |f: &dyn Fn(usize) -> f64| trusted.iter().map(|&i| f(i).abs()).fold(0.0, f64::max);
        let p_err = sup(&|i| mc.p[i] - 2.0 * c.sqrt());
        let q_err = sup(&|i| mc.q_coef[i]);
        let rec_err = sup(&|i| mc.q_rec[i] - c);
        rep.check(&format!("c{c}_p_err"), p_err, p_err <= 1e-2);
        rep.check(&format!("c{c}_Q_err"), q_err, q_err <= 1e-2);
        rep.check(&format!("c{c}_q_rec_err"), rec_err, rec_err <= 1e-2);
        summary.push(format!("c={c}: |p-2sqrt c| {p_err:.1e}, |Q| {q_err:.1e}, |q_rec-c| {rec_err:.1e}"));
    }
    rep.summary = summary.join("; ") + " on [0.2, 1.5] (tol 1e-2)";
    Ok(rep)
}

#[derive(Debug, Clone, Copy)]
struct RoundtripCase {
    label: &'static str,
    spec: &'static str,
    tol: f64,
}

impl RoundtripCase {
    const CONST: Self = Self { label: "const", spec: "const:1", tol: 0.05 };
    const BUMP: Self = Self { label: "bump", spec: "bump:1,0.5,1,0.08", tol: 0.07 };
}

/// Oracle measure grid for the round trip.
pub const ROUNDTRIP_H: f64 = 1e-3;
pub const ROUNDTRIP_X: f64 = 10.0;
pub const ROUNDTRIP_LAMBDA_MAX: f64 = 4e4;

/// `sup |q_rec − q| / sup |q|` over the trusted interval.
pub fn sup_rel_error(rec: &Reconstruction, q: impl Fn(f64) -> f64) -> f64 {
    let idx = rec.trusted_indices();
    let tau = &rec.model.tau;
    let qmax = idx.iter().map(|&i| q(tau[i]).abs()).fold(0.0, f64::max);
    idx.iter().map(|&i| (rec.model.q_rec[i] - q(tau[i])).abs()).fold(0.0, f64::max) / qmax
}

fn roundtrip(cases: &[RoundtripCase]) -> Result<BenchReport> {
    let name = match cases {
        [c] => format!("roundtrip-{}", c.label),
        _ => "roundtrip".to_string(),
    };
    let mut rep = BenchReport::new(&name, 8);
    let start = Instant::now();
    let cfg = ReconstructionConfig::default();
    let doubled = ReconstructionConfig { n_controls: 2 * cfg.n_controls, ..cfg.clone() };
    let mut summary = Vec::new();
    for case in cases {
        let q = Potential::load(case.spec, ROUNDTRIP_H, ROUNDTRIP_X)?.certified()?;
        let mu = truncated_measure(&q, ROUNDTRIP_X, ROUNDTRIP_LAMBDA_MAX)?;
        let base = sup_rel_error(&recover_potential(&mu, &cfg)?, |x| q.eval(x));
        let fine = sup_rel_error(&recover_potential(&mu, &doubled)?, |x| q.eval(x));
        rep.check(&format!("{}_sup_rel_err", case.label), base, base <= case.tol);
        rep.check(&format!("{}_sup_rel_err_doubled", case.label), fine, fine < base);
        summary.push(format!(
            "{}: sup err {:.2}% (<= {:.0}%), n_controls {} -> {}: {:.2}%",
            case.label,
            100.0 * base,
            100.0 * case.tol,
            cfg.n_controls,
            doubled.n_controls,
            100.0 * fine
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    rep.check("seconds", secs, secs <= 300.0);
    rep.summary = format!("{}; {secs:.1} s (<= 300 s)", summary.join("; "));
    Ok(rep)
}

const INVERSE_SOURCE: &str = include_str!("inverse.rs");

fn firewall() -> Result<BenchReport> {
    let mut rep = BenchReport::new("firewall", 9);
    let forbidden = ["Potential", "crate::sl", "crate::potential", "forward_fd", "goursat_kernel"];
    let hits: Vec<&str> = forbidden.iter().copied().filter(|w| INVERSE_SOURCE.contains(w)).collect();
    rep.check("forbidden_references", hits.len() as f64, hits.is_empty());

    let mu = SpectralMeasure::constant(1.0, ROUNDTRIP_X, ROUNDTRIP_LAMBDA_MAX)?;
    let mut csv = Vec::new();
    mu.write_csv(&mut csv)?;
    let cfg_text = ReconstructionConfig::default().to_string();
    let mu_back = SpectralMeasure::read_csv(csv.as_slice())?;
    let rec = recover_potential(&mu_back, &ReconstructionConfig::parse(&cfg_text)?)?;
    let err = sup_rel_error(&rec, |_| 1.0);
    rep.check("closed_form_sup_rel_err", err, err <= 0.05);
    rep.summary = format!(
        "inverse module references {:?}; run from measure CSV + config text only: sup err {:.2}%",
        hits,
        100.0 * err
    );
    Ok(rep)
}
