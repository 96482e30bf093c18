//! Spectral data of `-y'' + q y`: discrete spectral measures, the eigenfunction
//! transform `Φ`, the `q`-independent images of boundary-controlled waves and
//! Gram matrices built from them.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, BcError, Result};
use crate::potential::Potential;
use crate::sl::solve_psi;
use crate::wave::Control;

/// Largest `2 k * step` inside one Prüfer RK4 substep.
const PRUFER_PHASE_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    ClosedForm,
    TruncatedDiscrete,
}

/// Point masses `ρ_n` at nodes `λ_n`, approximating the spectral function.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: MeasureKind,
}

impl SpectralMeasure {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, kind: MeasureKind) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(invalid("nodes and weights differ in length"));
        }
        if nodes.is_empty() {
            return Err(invalid("empty spectral measure"));
        }
        if nodes.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite node or weight"));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("nodes must be strictly increasing"));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(invalid("weights must be positive"));
        }
        Ok(Self { nodes, weights, kind })
    }

    /// Dirichlet data of `q ≡ c` on `[0, X]`: `λ_n = c + (nπ/X)²`,
    /// `ρ_n = 2 (λ_n - c) / X`.
    pub fn constant(c: f64, x: f64, lambda_max: f64) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for n in 1.. {
            let k = n as f64 * PI / x;
            let lam = c + k * k;
            if lam > lambda_max {
                break;
            }
            nodes.push(lam);
            weights.push(2.0 * k * k / x);
        }
        if nodes.is_empty() {
            return Err(BcError::NoEigenvalues { lambda_max });
        }
        Self::new(nodes, weights, MeasureKind::ClosedForm)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn with_scaled_weights(&self, factor: f64) -> Self {
        Self { weights: self.weights.iter().map(|w| w * factor).collect(), ..self.clone() }
    }

    /// `Σ a_n conj(b_n) ρ_n`.
    pub fn inner(&self, a: &SpectralImage, b: &SpectralImage) -> Complex64 {
        a.values.iter().zip(&b.values).zip(&self.weights).map(|((x, y), w)| x * y.conj() * *w).sum()
    }

    pub fn norm(&self, a: &SpectralImage) -> f64 {
        self.inner(a, a).re.max(0.0).sqrt()
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "lambda,rho")?;
        for (l, r) in self.nodes.iter().zip(&self.weights) {
            writeln!(out, "{l:.16e},{r:.16e}")?;
        }
        Ok(())
    }

    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let parsed = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some((l, r)) => {
                    nodes.push(l);
                    weights.push(r);
                }
                None if nodes.is_empty() && lineno == 0 => continue,
                None => return Err(BcError::Parse(format!("measure CSV line {}: expected lambda,rho", lineno + 1))),
            }
        }
        Self::new(nodes, weights, MeasureKind::TruncatedDiscrete)
    }
}

/// Values of a transform on the nodes of a [`SpectralMeasure`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralImage {
    pub values: Vec<Complex64>,
}

impl SpectralImage {
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_real(v: impl IntoIterator<Item = f64>) -> Self {
        Self { values: v.into_iter().map(|x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn axpy(&mut self, a: Complex64, x: &SpectralImage) {
        for (v, w) in self.values.iter_mut().zip(&x.values) {
            *v += a * w;
        }
    }

    pub fn sub(&self, other: &SpectralImage) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn write_csv(&self, mu: &SpectralMeasure, mut out: impl Write) -> Result<()> {
        writeln!(out, "lambda,re,im")?;
        for (l, v) in mu.nodes.iter().zip(&self.values) {
            writeln!(out, "{l:.16e},{:.16e},{:.16e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// `Σ_n (-λ)^n t^(2n+1+m) / (2n+1+m)!`: the `m`-th antiderivative (from 0)
/// of the entire kernel `s_λ(t) = λ^(-1/2) sin(λ^(1/2) t)`.
pub fn entire_kernel(lambda: f64, t: f64, m: u32) -> f64 {
    let z = lambda * t * t;
    if z.abs() < 1e-2 {
        let mut term = t.powi(m as i32 + 1);
        for j in 1..=m + 1 {
            term /= j as f64;
        }
        let mut acc = term;
        for n in 1..10u32 {
            let p = 2 * n + 1 + m;
            term *= -z / ((p - 1) as f64 * p as f64);
            acc += term;
        }
        return acc;
    }
    if lambda > 0.0 {
        let k = lambda.sqrt();
        let (s, c) = (k * t).sin_cos();
        match m {
            0 => s / k,
            1 => (1.0 - c) / lambda,
            _ => (t - s / k) / lambda,
        }
    } else {
        let k = (-lambda).sqrt();
        let (s, c) = ((k * t).sinh(), (k * t).cosh());
        match m {
            0 => s / k,
            1 => (c - 1.0) / -lambda,
            _ => (s / k - t) / -lambda,
        }
    }
}

/// `s_λ(t) = λ^(-1/2) sin(λ^(1/2) t)` continued to all real `λ`.
pub fn kernel_s(lambda: f64, t: f64) -> f64 {
    entire_kernel(lambda, t, 0)
}

/// Prüfer variables of `ψ(·, λ)` at `X`: `k ψ = r sin θ`, `ψ' = r cos θ`.
/// Returns `(θ(X), ∫_0^X ψ²)`.
fn prufer(q: &Potential, lambda: f64, x_end: f64) -> (f64, f64) {
    let k = (lambda - q.mean()).max(1.0).sqrt();
    let h = q.h();
    let cells = (x_end / h).round().max(1.0) as usize;
    let hc = x_end / cells as f64;
    let m = ((2.0 * k * hc / PRUFER_PHASE_STEP).ceil() as usize).max(1);
    let hs = hc / m as f64;
    let inv_k = 1.0 / k;
    // state: θ, ln r, I
    let rhs = |x: f64, th: f64, lr: f64| {
        let d = lambda - q.eval(x);
        let (s, c) = th.sin_cos();
        let dth = k * c * c + d * inv_k * s * s;
        let dlr = (k - d * inv_k) * s * c;
        let di = (2.0 * lr).exp() * s * s * inv_k * inv_k;
        (dth, dlr, di)
    };
    let (mut th, mut lr, mut integral) = (0.0f64, 0.0f64, 0.0f64);
    let mut x = 0.0;
    for _ in 0..cells * m {
        let (a1, b1, c1) = rhs(x, th, lr);
        let (a2, b2, c2) = rhs(x + 0.5 * hs, th + 0.5 * hs * a1, lr + 0.5 * hs * b1);
        let (a3, b3, c3) = rhs(x + 0.5 * hs, th + 0.5 * hs * a2, lr + 0.5 * hs * b2);
        let (a4, b4, c4) = rhs(x + hs, th + hs * a3, lr + hs * b3);
        th += hs / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        lr += hs / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        integral += hs / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
        x += hs;
    }
    (th, integral)
}

/// Dirichlet eigenvalues `λ_n <= Λ_max` of `-y'' + q y` on `[0, X]` with
/// weights `1 / ∫_0^X ψ(·, λ_n)²`.
///
/// The `n`-th eigenvalue is the root of `θ(X, λ) = nπ` for the Prüfer angle,
/// which is increasing in `λ`; Sturm comparison with `q ≡ min q` and
/// `q ≡ max q` brackets it.
pub fn truncated_measure(q: &Potential, x: f64, lambda_max: f64) -> Result<SpectralMeasure> {
    if !(x > 0.0) || x > q.x_max() + 1e-9 * q.h() {
        return Err(invalid(format!("X = {x} must lie in (0, {}]", q.x_max())));
    }
    let count = (prufer(q, lambda_max, x).0 / PI + 1e-12).floor();
    if count < 1.0 {
        return Err(BcError::NoEigenvalues { lambda_max });
    }
    let (qmin, qmax) = (q.min(), q.max());
    let pairs: Vec<(f64, f64)> = (1..=count as usize)
        .into_par_iter()
        .map(|n| {
            let target = n as f64 * PI;
            let base = (target / x).powi(2);
            let root = find_root(
                |lam| prufer(q, lam, x).0 - target,
                qmin + base,
                (qmax + base).min(lambda_max.max(qmin + base)),
            );
            (root, 1.0 / prufer(q, root, x).1)
        })
        .collect();
    let (nodes, weights) = pairs.into_iter().unzip();
    SpectralMeasure::new(nodes, weights, MeasureKind::TruncatedDiscrete)
}

/// Illinois-modified regula falsi for an increasing `f` on `[lo, hi]`.
fn find_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if hi - lo <= 1e-14 * hi.abs().max(1.0) {
        return 0.5 * (lo + hi);
    }
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo >= 0.0 {
        return lo;
    }
    if fhi <= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    for _ in 0..100 {
        let mid = (lo * fhi - hi * flo) / (fhi - flo);
        let fm = f(mid);
        if fm.abs() < 1e-13 || hi - lo <= 1e-14 * hi.abs().max(1.0) {
            return mid;
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (lo + hi)
}

/// `ǔ(λ_n) = ∫ y ψ(·, λ_n) dx` by trapezoid on the grid of `q` (truncated to
/// the length of `y`).
pub fn phi_transform(y: &[f64], q: &Potential, mu: &SpectralMeasure) -> Result<SpectralImage> {
    if y.len() > q.len() {
        return Err(BcError::GridMismatch(format!("function has {} nodes, potential only {}", y.len(), q.len())));
    }
    let h = q.h();
    let n = y.len();
    let values = mu
        .nodes
        .par_iter()
        .map(|&lam| {
            let (psi, _) = solve_psi(q, lam);
            let mut acc = 0.5 * (y[0] * psi[0] + y[n - 1] * psi[n - 1]);
            for i in 1..n - 1 {
                acc += y[i] * psi[i];
            }
            Complex64::new(acc * h, 0.0)
        })
        .collect();
    Ok(SpectralImage { values })
}

/// `ǔ^f(λ, T) = ∫_0^T s_λ(T - τ) f(τ) dτ` at one node, with `f` taken
/// piecewise linear between its samples and the product integrated exactly.
pub fn wave_image_at(f: &Control, t: f64, lambda: f64) -> f64 {
    let h = f.h;
    let last = f.samples.len() - 1;
    // Nodes τ_0 = 0 < ... <= T, plus T itself when off-grid.
    let full = ((t / h) * (1.0 + 1e-12)).floor() as usize;
    let mut taus: Vec<f64> = (0..=full.min(last)).map(|j| j as f64 * h).collect();
    let mut vals: Vec<f64> = f.samples[..=full.min(last)].to_vec();
    if full > last {
        // zero extension after the last sample
        taus.push((last + 1) as f64 * h);
        vals.push(0.0);
        if t > (last + 1) as f64 * h {
            taus.push(t);
            vals.push(0.0);
        }
    } else if t - full as f64 * h > 1e-12 * h {
        // linear, to match the element model
        let a = f.samples[full];
        let b = f.samples.get(full + 1).copied().unwrap_or(0.0);
        taus.push(t);
        vals.push(a + (b - a) * (t - full as f64 * h) / h);
    }
    // σ = T - τ; g(σ) = f(T - σ), linear on each element.
    let s1: Vec<f64> = taus.iter().map(|&tau| entire_kernel(lambda, (t - tau).max(0.0), 1)).collect();
    let s2: Vec<f64> = taus.iter().map(|&tau| entire_kernel(lambda, (t - tau).max(0.0), 2)).collect();
    let mut acc = 0.0;
    for e in 0..taus.len() - 1 {
        let (ta, tb) = (taus[e], taus[e + 1]);
        if tb - ta <= 0.0 {
            continue;
        }
        // in σ: element [σ_b, σ_a] with σ_b = T - tb < σ_a = T - ta
        let (ga, gb) = (vals[e], vals[e + 1]);
        let slope = (ga - gb) / (tb - ta); // dg/dσ
        acc += s1[e] * ga - s1[e + 1] * gb - slope * (s2[e] - s2[e + 1]);
    }
    acc
}

/// Images `ǔ^f(λ_n, T)` on all nodes of `mu`; independent of `q`.
pub fn wave_image(f: &Control, t: f64, mu: &SpectralMeasure) -> SpectralImage {
    SpectralImage::from_real(mu.nodes.iter().map(|&lam| wave_image_at(f, t, lam)))
}

/// Second derivative of a control by central differences, one-sided at the
/// ends of the sampled range.
pub fn control_second_derivative(f: &Control) -> Control {
    let v = &f.samples;
    let n = v.len();
    let h2 = f.h * f.h;
    let mut d = vec![0.0; n];
    if n >= 4 {
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        }
        d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    }
    Control { samples: d, h: f.h }
}

/// `-ǔ^{f''}(λ_n, T)`: the second member of the graph pair of `ǔ^f`.
pub fn wave_image_second(f: &Control, t: f64, mu: &SpectralMeasure) -> SpectralImage {
    let d2 = control_second_derivative(f);
    SpectralImage::from_real(mu.nodes.iter().map(|&lam| -wave_image_at(&d2, t, lam)))
}

/// `G_ij = Σ_n ǔ_i(λ_n) conj(ǔ_j(λ_n)) ρ_n`.
pub fn gram(images: &[SpectralImage], mu: &SpectralMeasure) -> DMatrix<Complex64> {
    let n = images.len();
    let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let v = mu.inner(&images[i], &images[j]);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::{forward_fd, smooth_bump};

    #[test]
    fn constant_measure_closed_form() {
        let q = Potential::constant(1.0, 0.01, 5.0).unwrap();
        let mu = truncated_measure(&q, 5.0, 60.0).unwrap();
        let exact = SpectralMeasure::constant(1.0, 5.0, 60.0).unwrap();
        assert_eq!(mu.len(), exact.len());
        for n in 0..mu.len() {
            assert!((mu.nodes[n] - exact.nodes[n]).abs() < 1e-10 * exact.nodes[n]);
            assert!((mu.weights[n] - exact.weights[n]).abs() < 1e-8 * exact.weights[n]);
        }
    }

    #[test]
    fn no_eigenvalues_below_first() {
        let q = Potential::constant(1.0, 0.01, 5.0).unwrap();
        assert!(matches!(truncated_measure(&q, 5.0, 1.2), Err(BcError::NoEigenvalues { .. })));
    }

    #[test]
    fn nodes_interlace_with_comparison_potentials() {
        let q = Potential::bump(1.0, 0.5, 1.0, 0.08, 0.01, 4.0).unwrap();
        let mu = truncated_measure(&q, 4.0, 200.0).unwrap();
        let lo = SpectralMeasure::constant(q.min(), 4.0, 1e9).unwrap();
        let hi = SpectralMeasure::constant(q.max(), 4.0, 1e9).unwrap();
        for (n, &l) in mu.nodes.iter().enumerate() {
            assert!(lo.nodes[n] <= l && l <= hi.nodes[n], "n = {n}");
        }
    }

    #[test]
    fn prufer_weights_match_direct_quadrature() {
        let q = Potential::bump(1.0, 0.5, 1.0, 0.08, 0.001, 3.0).unwrap();
        let mu = truncated_measure(&q, 3.0, 300.0).unwrap();
        for n in [0, 3, mu.len() - 1] {
            let (psi, _) = solve_psi(&q, mu.nodes[n]);
            let norm2: f64 = psi.windows(2).map(|w| 0.5 * (w[0] * w[0] + w[1] * w[1]) * q.h()).sum();
            assert!((1.0 / norm2 - mu.weights[n]).abs() < 1e-5 * mu.weights[n], "n = {n}");
            assert!(psi.last().unwrap().abs() < 1e-6 * psi.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        }
    }

    #[test]
    fn transform_of_eigenfunction_is_orthogonal() {
        let q = Potential::bump(1.0, 0.5, 1.0, 0.08, 0.002, 3.0).unwrap();
        let mu = truncated_measure(&q, 3.0, 150.0).unwrap();
        let m = 2;
        let (psi, _) = solve_psi(&q, mu.nodes[m]);
        let img = phi_transform(&psi, &q, &mu).unwrap();
        for (n, v) in img.values.iter().enumerate() {
            let expected = if n == m { 1.0 } else { 0.0 };
            assert!((v.re * mu.weights[n] - expected).abs() < 1e-4, "n = {n}: {}", v.re * mu.weights[n]);
        }
        let zero = phi_transform(&vec![0.0; q.len()], &q, &mu).unwrap();
        assert!(zero.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn entire_kernel_branches_agree() {
        for &lam in &[-3.0f64, -1e-3, 1e-6, 0.5, 40.0] {
            for &t in &[0.01, 0.3, 1.0, 2.5] {
                let closed = if lam > 0.0 {
                    (lam.sqrt() * t).sin() / lam.sqrt()
                } else {
                    ((-lam).sqrt() * t).sinh() / (-lam).sqrt()
                };
                assert!((kernel_s(lam, t) - closed).abs() < 1e-12 * (1.0 + closed.abs()));
                for m in 1..3 {
                    // compare with a fine midpoint antiderivative of s
                    let n = 4000;
                    let dt = t / n as f64;
                    let val = entire_kernel(lam, t, m);
                    let num: f64 = (0..n)
                        .map(|j| {
                            let tau = (j as f64 + 0.5) * dt;
                            let w = (t - tau).powi(m as i32 - 1);
                            w * kernel_s(lam, tau) * dt
                        })
                        .sum();
                    assert!((val - num).abs() < 1e-6 * (1.0 + num.abs()), "lam {lam} t {t} m {m}");
                }
            }
        }
        assert_eq!(kernel_s(0.0, 2.0), 2.0);
    }

    #[test]
    fn wave_image_zero_lambda_limit() {
        let h = 0.001;
        let f = Control::from_fn(|t| smooth_bump((t - 0.6) / 0.3) + 0.2 * t, h, 1.5).unwrap();
        let t = 1.2;
        let direct: f64 = {
            let n = 120_000;
            let dt = t / n as f64;
            (0..n)
                .map(|j| {
                    let s = (j as f64 + 0.5) * dt;
                    (t - s) * (smooth_bump((s - 0.6) / 0.3) + 0.2 * s) * dt
                })
                .sum()
        };
        assert!((wave_image_at(&f, t, 0.0) - direct).abs() < 1e-6);
        let z = Control::zero(h, 1.5).unwrap();
        assert_eq!(wave_image_at(&z, t, 7.0), 0.0);
    }

    #[test]
    fn wave_image_is_q_independent() {
        let f = Control::bump(0.7, 0.4, 0.01, 2.0).unwrap();
        let a = SpectralMeasure::constant(1.0, 10.0, 300.0).unwrap();
        let q = Potential::bump(1.0, 0.5, 1.0, 0.08, 0.01, 10.0).unwrap();
        let b = truncated_measure(&q, 10.0, 300.0).unwrap();
        // same nodes, different weights and different q behind them
        let shared = SpectralMeasure { weights: vec![1.0; b.len()], ..b.clone() };
        assert_eq!(wave_image(&f, 1.5, &b), wave_image(&f, 1.5, &shared));
        let ia = wave_image(&f, 1.5, &a);
        assert!(ia.values.iter().all(|v| v.im == 0.0 && v.re.is_finite()));
    }

    #[test]
    fn graph_pair_satisfies_wave_ode() {
        // ∂_tt ǔ + λ ǔ = f(T), checked by differences in T
        let h = 1e-3;
        let f = Control::from_fn(|t| smooth_bump((t - 0.9) / 0.6) * (1.0 + t), h, 2.5).unwrap();
        for &lam in &[2.0, 50.0, 400.0] {
            let t = 1.1;
            let d = 0.01;
            let u = |tt: f64| wave_image_at(&f, tt, lam);
            let utt = (u(t + d) - 2.0 * u(t) + u(t - d)) / (d * d);
            let res = utt + lam * u(t) - f.eval(t);
            assert!(res.abs() < 1e-3 * (1.0 + f.eval(t).abs()), "lam {lam}: residual {res}");
            let second = -wave_image_at(&control_second_derivative(&f), t, lam);
            let identity = lam * u(t) - f.eval(t);
            assert!((second - identity).abs() < 1e-4 * (1.0 + identity.abs()), "lam {lam}");
        }
    }

    #[test]
    fn wave_image_matches_physical_transform() {
        let h = 0.005;
        let x = 12.0;
        let t = 3.0;
        let q = Potential::constant(1.0, h, x).unwrap();
        let mu = truncated_measure(&q, x, 400.0).unwrap();
        let f = Control::bump(1.5, 0.8, h, t).unwrap();
        let u = forward_fd(&q, &f, t).unwrap();
        let physical = phi_transform(u.last(), &q, &mu).unwrap();
        let image = wave_image(&f, t, &mu);
        let err = mu.norm(&image.sub(&physical)) / mu.norm(&physical);
        assert!(err < 1e-2, "relative error {err}");
    }

    #[test]
    fn gram_examples() {
        let mu = SpectralMeasure::constant(1.0, 10.0, 400.0).unwrap();
        let g = gram(&[SpectralImage::zeros(mu.len())], &mu);
        assert_eq!(g[(0, 0)], Complex64::new(0.0, 0.0));
        let imgs: Vec<_> = (0..6)
            .map(|k| wave_image(&Control::bump(0.3 + 0.2 * k as f64, 0.3, 0.01, 2.0).unwrap(), 2.0, &mu))
            .collect();
        let g = gram(&imgs, &mu);
        let eig = nalgebra::SymmetricEigen::new(g.clone());
        let tr: f64 = (0..6).map(|i| g[(i, i)].re).sum();
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10 * tr));
    }

    #[test]
    fn measure_csv_round_trip() {
        let mu = SpectralMeasure::constant(4.0, 7.0, 90.0).unwrap();
        let mut buf = Vec::new();
        mu.write_csv(&mut buf).unwrap();
        let back = SpectralMeasure::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.nodes, mu.nodes);
        assert_eq!(back.weights, mu.weights);
    }
}
