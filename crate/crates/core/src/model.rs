//! The coordinate wave model. Atoms of the wave spectrum are points `x_ω` of
//! the half-line; values of waves on atoms are limits of window ratios; the
//! map `y ↦ y / e` turns `-y'' + q y` into `-y'' + p y' + Q y`.

use num_complex::Complex64;

use crate::error::{invalid, BcError, Result};
use crate::sets::point_neighborhood;

/// Nodes with `|e| < GAUGE_ZERO_REL * max|e|` belong to the zero set of the
/// gauge and are excluded.
pub const GAUGE_ZERO_REL: f64 = 1e-8;
pub const DEFAULT_COND_TOL: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub x: f64,
}

impl Atom {
    pub fn new(x: f64) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(invalid(format!("atom coordinate must be finite and >= 0, got {x}")));
        }
        Ok(Self { x })
    }
}

/// `(τ_ω y)(x) = |x - x_ω| y(x)` on the grid `x_i = i h`.
pub fn eikonal_apply(omega: Atom, y: &[f64], h: f64) -> Vec<f64> {
    y.iter().enumerate().map(|(i, v)| (i as f64 * h - omega.x).abs() * v).collect()
}

/// Riemann sum `Σ t̃_k (P_{ω(t_k)} - P_{ω(t_{k-1})}) y` for the eikonal
/// `∫ t dP_{ω(t)}`, with midpoints `t̃_k` of an increasing partition starting
/// at 0. `P_{ω(t)}` is multiplication by the indicator of `{x_ω}^t`.
pub fn eikonal_riemann_sum(omega: Atom, y: &[f64], h: f64, partition: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    for k in 1..partition.len() {
        let mid = 0.5 * (partition[k - 1] + partition[k]);
        let outer = point_neighborhood(omega.x, partition[k]);
        for (i, o) in out.iter_mut().enumerate() {
            let x = i as f64 * h;
            let inner = partition[k - 1] > 0.0 && point_neighborhood(omega.x, partition[k - 1]).contains(x);
            if outer.contains(x) && !inner {
                *o += mid * y[i];
            }
        }
    }
    out
}

/// `τ(ω, ω') = |x_ω - x_ω'|`.
pub fn atom_metric(a: Atom, b: Atom) -> f64 {
    (a.x - b.x).abs()
}

/// `ν(B_r[ω]) = r + min(r, x_ω)`.
pub fn ball_measure(omega: Atom, r: f64) -> f64 {
    r + r.min(omega.x)
}

/// `∫_a^b` of the piecewise-linear interpolant of `v` on `x_i = i h`.
fn window_integral(v: &[Complex64], h: f64, a: f64, b: f64) -> Complex64 {
    let n = v.len();
    let b = b.min((n - 1) as f64 * h);
    let a = a.max(0.0);
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let at = |x: f64| {
        let s = x / h;
        let i = (s.floor() as usize).min(n - 2);
        let f = s - i as f64;
        v[i] * (1.0 - f) + v[i + 1] * f
    };
    let ia = (a / h).ceil() as usize;
    let ib = (b / h).floor() as usize;
    if ia > ib {
        return 0.5 * (at(a) + at(b)) * (b - a);
    }
    let mut acc = 0.5 * (at(a) + v[ia]) * (ia as f64 * h - a);
    for i in ia..ib {
        acc += 0.5 * (v[i] + v[i + 1]) * h;
    }
    acc + 0.5 * (v[ib] + at(b)) * (b - ib as f64 * h)
}

/// Neville extrapolation to `z = 0` of values sampled at `zs`.
pub fn extrapolate_to_zero(zs: &[f64], vals: &[Complex64]) -> Complex64 {
    let mut p = vals.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (zs[i + m] * p[i] - zs[i] * p[i + 1]) / (zs[i + m] - zs[i]);
        }
    }
    p[0]
}

/// Windows actually used at `x` and their Richardson variables.
///
/// For `x > 0` the ratio is only a smooth function of `t` on the symmetric
/// branch `t <= x`, so the list is scaled down to fit when needed; errors are
/// then even in `t`. At `x = 0` windows are one-sided and errors odd.
pub fn effective_windows(x: f64, windows: &[f64]) -> (Vec<f64>, Vec<f64>) {
    if x == 0.0 {
        return (windows.to_vec(), windows.to_vec());
    }
    let widest = windows.iter().fold(0.0f64, |a, &t| a.max(t));
    let scale = if widest > x { x / widest } else { 1.0 };
    let ts: Vec<f64> = windows.iter().map(|t| t * scale).collect();
    let zs = ts.iter().map(|t| t * t).collect();
    (ts, zs)
}

/// `u(x_ω) / e(x_ω)` from the window ratios `∫_{{x}^t} u ē / ∫_{{x}^t} |e|²`
/// extrapolated to `t → 0`.
pub fn value_on_atom(u: &[Complex64], e: &[Complex64], h: f64, omega: Atom, windows: &[f64]) -> Result<Complex64> {
    if u.len() != e.len() || u.len() < 2 {
        return Err(BcError::GridMismatch("u and e must share a grid of >= 2 nodes".into()));
    }
    if windows.is_empty() || windows.iter().any(|&t| !(t > 0.0)) {
        return Err(invalid("windows must be a non-empty list of positive widths"));
    }
    let peak = e.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let ex = {
        let s = (omega.x / h).min((e.len() - 1) as f64);
        let i = (s.floor() as usize).min(e.len() - 2);
        let f = s - i as f64;
        (e[i] * (1.0 - f) + e[i + 1] * f).norm()
    };
    if ex < GAUGE_ZERO_REL * peak || peak == 0.0 {
        return Err(BcError::GaugeZero { x: omega.x });
    }
    let num_integrand: Vec<Complex64> = u.iter().zip(e).map(|(a, b)| a * b.conj()).collect();
    let den_integrand: Vec<Complex64> = e.iter().map(|b| Complex64::new(b.norm_sqr(), 0.0)).collect();
    let (ts, zs) = effective_windows(omega.x, windows);
    let ratios: Vec<Complex64> = ts
        .iter()
        .map(|&t| {
            let (a, b) = (omega.x - t, omega.x + t);
            window_integral(&num_integrand, h, a, b) / window_integral(&den_integrand, h, a, b)
        })
        .collect();
    Ok(extrapolate_to_zero(&zs, &ratios))
}

/// `(Y y)(τ) = y(τ) / e(τ)` and the density `|e(τ)|²` of the model measure.
pub fn y_map(y: &[Complex64], e: &[Complex64]) -> Result<(Vec<Complex64>, Vec<f64>)> {
    if y.len() != e.len() {
        return Err(BcError::GridMismatch("y and e must share a grid".into()));
    }
    let peak = e.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let mut out = Vec::with_capacity(y.len());
    for (i, (a, b)) in y.iter().zip(e).enumerate() {
        if b.norm() < GAUGE_ZERO_REL * peak || peak == 0.0 {
            return Err(BcError::GaugeZero { x: i as f64 });
        }
        out.push(a / b);
    }
    Ok((out, e.iter().map(|b| b.norm_sqr()).collect()))
}

/// Coefficients of `-y'' + p y' + Q y` on a uniform `τ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCoefficients {
    pub tau: Vec<f64>,
    pub p: Vec<f64>,
    /// The zeroth-order coefficient `Q`.
    pub q_coef: Vec<f64>,
    pub e: Vec<f64>,
    pub q_rec: Vec<f64>,
    /// True where the local system was ill-conditioned and values were
    /// interpolated from neighbours.
    pub mask: Vec<bool>,
}

/// Fourth-order first derivative on a uniform grid (one-sided at the ends).
pub fn d1(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 5, "need at least 5 nodes for fourth-order differences");
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
    }
    let left = |f: &dyn Fn(usize) -> f64| {
        (
            (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * h),
            (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / (12.0 * h),
        )
    };
    let (a, b) = left(&|k| v[k]);
    d[0] = a;
    d[1] = b;
    let (a, b) = left(&|k| v[n - 1 - k]);
    d[n - 1] = -a;
    d[n - 2] = -b;
    d
}

/// Fourth-order second derivative on a uniform grid (one-sided at the ends).
pub fn d2(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 6, "need at least 6 nodes for fourth-order second differences");
    let h2 = 12.0 * h * h;
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / h2;
    }
    let left = |f: &dyn Fn(usize) -> f64| {
        (
            (45.0 * f(0) - 154.0 * f(1) + 214.0 * f(2) - 156.0 * f(3) + 61.0 * f(4) - 10.0 * f(5)) / h2,
            (10.0 * f(0) - 15.0 * f(1) - 4.0 * f(2) + 14.0 * f(3) - 6.0 * f(4) + f(5)) / h2,
        )
    };
    let (a, b) = left(&|k| v[k]);
    d[0] = a;
    d[1] = b;
    let (a, b) = left(&|k| v[n - 1 - k]);
    d[n - 1] = a;
    d[n - 2] = b;
    d
}

fn grid_step(tau: &[f64]) -> Result<f64> {
    if tau.len() < 6 {
        return Err(invalid("tau grid needs at least 6 nodes"));
    }
    let h = tau[1] - tau[0];
    if !(h > 0.0) || tau.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(invalid("tau grid must be uniform and increasing"));
    }
    Ok(h)
}

/// Fills masked entries by linear interpolation between unmasked neighbours
/// (constant beyond the outermost ones).
fn fill_masked(v: &mut [f64], mask: &[bool]) {
    let good: Vec<usize> = (0..v.len()).filter(|&i| !mask[i]).collect();
    if good.is_empty() {
        return;
    }
    for i in 0..v.len() {
        if !mask[i] {
            continue;
        }
        let right = good.partition_point(|&g| g < i);
        v[i] = match (right.checked_sub(1).map(|k| good[k]), good.get(right)) {
            (Some(a), Some(&b)) => v[a] + (v[b] - v[a]) * (i - a) as f64 / (b - a) as f64,
            (Some(a), None) => v[a],
            (None, Some(&b)) => v[b],
            (None, None) => unreachable!(),
        };
    }
}

/// Solves `p y_i' + Q y_i = g_i + y_i''` in least squares at every node.
///
/// Columns are equilibrated before the 2x2 normal system is formed; nodes
/// whose equilibrated condition number exceeds `cond_tol` are masked and
/// filled by interpolation. Only `tau`, `p`, `q_coef` and `mask` are set;
/// `e` and `q_rec` come from [`recover_q_from_pq`].
pub fn model_coefficients(pairs: &[(Vec<f64>, Vec<f64>)], tau: &[f64], cond_tol: f64) -> Result<ModelCoefficients> {
    let h = grid_step(tau)?;
    let n = tau.len();
    if pairs.is_empty() {
        return Err(invalid("model_coefficients needs at least one pair"));
    }
    if pairs.iter().any(|(y, g)| y.len() != n || g.len() != n) {
        return Err(BcError::GridMismatch("pairs must be sampled on the tau grid".into()));
    }
    let derivs: Vec<(Vec<f64>, Vec<f64>)> = pairs.iter().map(|(y, _)| (d1(y, h), d2(y, h))).collect();
    let mut p = vec![0.0; n];
    let mut qc = vec![0.0; n];
    let mut mask = vec![false; n];
    for k in 0..n {
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((y, g), (dy, ddy)) in pairs.iter().zip(&derivs) {
            let rhs = g[k] + ddy[k];
            a11 += dy[k] * dy[k];
            a12 += dy[k] * y[k];
            a22 += y[k] * y[k];
            b1 += dy[k] * rhs;
            b2 += y[k] * rhs;
        }
        let (s1, s2) = (a11.sqrt(), a22.sqrt());
        if s1 == 0.0 || s2 == 0.0 {
            mask[k] = true;
            continue;
        }
        // equilibrated normal matrix [[1, c], [c, 1]]
        let c = a12 / (s1 * s2);
        let cond = ((1.0 + c.abs()) / (1.0 - c.abs()).max(f64::MIN_POSITIVE)).sqrt();
        if !(cond <= cond_tol) {
            mask[k] = true;
            continue;
        }
        let (r1, r2) = (b1 / s1, b2 / s2);
        let det = 1.0 - c * c;
        p[k] = (r1 - c * r2) / det / s1;
        qc[k] = (r2 - c * r1) / det / s2;
    }
    if mask.iter().all(|&m| m) {
        return Err(BcError::IllConditioned(format!(
            "all {n} nodes exceed cond_tol = {cond_tol:e} (pairs lack independent (y', y))"
        )));
    }
    fill_masked(&mut p, &mask);
    fill_masked(&mut qc, &mask);
    Ok(ModelCoefficients { tau: tau.to_vec(), p, q_coef: qc, e: Vec::new(), q_rec: Vec::new(), mask })
}

/// `e = exp(-½ ∫ p)` normalized to 1 at the first node, and
/// `q = Q + e'' / e`. Fills `mc.e` and `mc.q_rec` and returns `q_rec`.
pub fn recover_q_from_pq(mc: &mut ModelCoefficients) -> Result<Vec<f64>> {
    let h = grid_step(&mc.tau)?;
    let n = mc.tau.len();
    let mut log_e = vec![0.0; n];
    for i in 1..n {
        log_e[i] = log_e[i - 1] - 0.25 * h * (mc.p[i - 1] + mc.p[i]);
    }
    let e: Vec<f64> = log_e.iter().map(|v| v.exp()).collect();
    let e2 = d2(&e, h);
    let q: Vec<f64> = (0..n).map(|i| mc.q_coef[i] + e2[i] / e[i]).collect();
    mc.e = e;
    mc.q_rec = q.clone();
    Ok(q)
}

/// Coordinate Green operators: `(-y(0), y'(0) / η'(0))`.
pub fn green_ops_coord(y0: Complex64, y0prime: Complex64, eta_prime0: f64) -> (Complex64, Complex64) {
    (-y0, y0prime / eta_prime0)
}
