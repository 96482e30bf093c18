//! Reconstruction of `q` from a spectral measure alone.
//!
//! Everything here works on spectral images: projections onto reachable sets
//! are built from images of boundary controls, whose Fourier images depend on
//! the measure only through its nodes.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, BcError, Result};
use crate::model::{extrapolate_to_zero, model_coefficients, recover_q_from_pq, ModelCoefficients};
use crate::spectral::{wave_image, wave_image_at, SpectralImage, SpectralMeasure};
use crate::wave::{smooth_bump, Control};

/// Kernel width relative to the window half-width.
pub const WINDOW_SIGMA_FRACTION: f64 = 0.2;

/// Sampling step of the basis bump, as a fraction of the ladder step.
const BUMP_SAMPLES_PER_STEP: usize = 20;

const DATA_CONTROL_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionConfig {
    pub t_data: f64,
    /// Number of basis controls in the projection ladder.
    pub n_controls: usize,
    pub n_tau: usize,
    pub windows: Vec<f64>,
    pub reg_eps: f64,
    pub cond_tol: f64,
    pub bump_radius: f64,
    /// Number of data controls whose graph pairs feed the coefficient fit.
    pub n_data: usize,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            t_data: 3.0,
            n_controls: 304,
            n_tau: 35,
            windows: vec![0.1],
            reg_eps: 1e-8,
            cond_tol: crate::model::DEFAULT_COND_TOL,
            bump_radius: 0.03,
            n_data: 4,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_data > 0.0) {
            return Err(invalid("T_data must be positive"));
        }
        if self.windows.is_empty() || self.windows.iter().any(|&t| !(t > 0.0 && t < self.t_data / 4.0)) {
            return Err(invalid("windows must be positive and below T_data/4"));
        }
        if self.windows.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("windows must be strictly decreasing"));
        }
        if !(self.reg_eps > 0.0) || !(self.cond_tol > 1.0) {
            return Err(invalid("reg_eps must be > 0 and cond_tol > 1"));
        }
        if self.n_controls < 8 || self.n_tau < 8 || self.n_data < 2 {
            return Err(invalid("need n_controls >= 8, n_tau >= 8 and n_data >= 2"));
        }
        if !(self.bump_radius > 0.0) {
            return Err(invalid("bump_radius must be positive"));
        }
        if self.s_max() > self.t_data {
            return Err(invalid("T_data too small for the coordinate grid"));
        }
        Ok(())
    }

    /// Right end of the coordinate grid.
    pub fn tau_end(&self) -> f64 {
        self.t_data / 2.0 + 0.25
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        let h = self.tau_end() / self.n_tau as f64;
        (1..=self.n_tau).map(|i| i as f64 * h).collect()
    }

    /// Interval on which recovered coefficients are claimed.
    pub fn trusted(&self) -> (f64, f64) {
        (0.2, self.t_data / 2.0)
    }

    /// Largest reachable time the ladder must cover.
    pub fn s_max(&self) -> f64 {
        self.tau_end() + self.windows[0] + 0.05
    }

    pub fn ladder_step(&self) -> f64 {
        self.s_max() / self.n_controls as f64
    }

    /// Parses flat `key = value` text; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl FromStr for ReconstructionConfig {
    type Err = BcError;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ReconstructionConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| BcError::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<f64>().map_err(|_| BcError::Parse(format!("line {}: bad number {v:?}", lineno + 1)))
            };
            let count = |v: &str| {
                v.parse::<usize>().map_err(|_| BcError::Parse(format!("line {}: bad count {v:?}", lineno + 1)))
            };
            match key {
                "T_data" => cfg.t_data = num(value)?,
                "n_controls" => cfg.n_controls = count(value)?,
                "n_tau" => cfg.n_tau = count(value)?,
                "windows" => {
                    cfg.windows = value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(num)
                        .collect::<Result<_>>()?
                }
                "reg_eps" => cfg.reg_eps = num(value)?,
                "cond_tol" => cfg.cond_tol = num(value)?,
                "bump_radius" => cfg.bump_radius = num(value)?,
                "n_data" => cfg.n_data = count(value)?,
                other => return Err(BcError::Parse(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for ReconstructionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let windows: Vec<String> = self.windows.iter().map(|w| w.to_string()).collect();
        writeln!(f, "T_data = {}", self.t_data)?;
        writeln!(f, "n_controls = {}", self.n_controls)?;
        writeln!(f, "n_tau = {}", self.n_tau)?;
        writeln!(f, "windows = {}", windows.join(","))?;
        writeln!(f, "reg_eps = {:e}", self.reg_eps)?;
        writeln!(f, "cond_tol = {:e}", self.cond_tol)?;
        writeln!(f, "bump_radius = {}", self.bump_radius)?;
        write!(f, "n_data = {}", self.n_data)
    }
}

/// `ě(λ) = 1/λ`, the image of the gauge `φ`.
pub fn gauge_image(mu: &SpectralMeasure) -> SpectralImage {
    SpectralImage::from_real(mu.nodes.iter().map(|&lam| 1.0 / lam))
}

/// Gram matrix `Σ ρ_n conj(a_i) a_j` of images stored as the columns of `m`.
fn weighted_gram(m: &DMatrix<Complex64>, mu: &SpectralMeasure) -> DMatrix<Complex64> {
    let mut w = m.clone();
    for (mut row, &rho) in w.row_iter_mut().zip(&mu.weights) {
        row *= Complex64::new(rho.sqrt(), 0.0);
    }
    w.adjoint() * &w
}

fn images_matrix(images: &[SpectralImage], n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, images.len(), |i, j| images[j].values[i])
}

/// Spectrum summary of a Gram matrix.
#[derive(Debug, Clone, Serialize)]
pub struct GramStats {
    pub size: usize,
    pub trace: f64,
    pub eps: f64,
    pub rank: usize,
    pub max_eig: f64,
    pub min_eig: f64,
    /// `λ_max / (λ_min + ε)`, the condition number actually factorized.
    pub cond_regularized: f64,
}

fn gram_stats(g: &DMatrix<Complex64>, reg_eps: f64) -> GramStats {
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let trace: f64 = (0..g.nrows()).map(|i| g[(i, i)].re).sum();
    let eps = reg_eps * trace;
    let max_eig = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min_eig = eig.iter().cloned().fold(f64::MAX, f64::min);
    GramStats {
        size: g.nrows(),
        trace,
        eps,
        rank: eig.iter().filter(|&&v| v > eps).count(),
        max_eig,
        min_eig,
        cond_regularized: max_eig / (min_eig.max(0.0) + eps),
    }
}

fn factor(g: &DMatrix<Complex64>, eps: f64) -> Result<DMatrix<Complex64>> {
    let n = g.nrows();
    let shifted = g + DMatrix::from_diagonal_element(n, n, Complex64::new(eps, 0.0));
    Cholesky::new(shifted)
        .map(|c| c.l())
        .ok_or_else(|| BcError::IllConditioned("regularized Gram is not positive definite".into()))
}

fn lower_solve(l: &DMatrix<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    l.solve_lower_triangular(b).expect("Cholesky factor has a nonzero diagonal")
}

/// Projection onto the span of control images at a common time `T`.
#[derive(Debug, Clone)]
pub struct DataProjection {
    pub t: f64,
    pub basis_images: Vec<SpectralImage>,
    pub gram: DMatrix<Complex64>,
    /// Lower Cholesky factor of `gram + ε I`.
    pub gram_factor: DMatrix<Complex64>,
    pub stats: GramStats,
    weights: Vec<f64>,
}

/// Builds the projector onto `span{ǔ^{f_i}(·, T)}`.
pub fn data_projection(mu: &SpectralMeasure, t: f64, basis: &[Control], reg_eps: f64) -> Result<DataProjection> {
    if basis.is_empty() {
        return Err(invalid("data_projection needs at least one control"));
    }
    if !(reg_eps > 0.0) {
        return Err(invalid("reg_eps must be positive"));
    }
    let images: Vec<SpectralImage> = basis.par_iter().map(|f| wave_image(f, t, mu)).collect();
    let m = images_matrix(&images, mu.len());
    let gram = weighted_gram(&m, mu);
    let stats = gram_stats(&gram, reg_eps);
    if 2 * stats.rank < basis.len() {
        return Err(BcError::RankCollapse { rank: stats.rank, n_controls: basis.len() });
    }
    let gram_factor = factor(&gram, stats.eps)?;
    Ok(DataProjection { t, basis_images: images, gram, gram_factor, stats, weights: mu.weights.clone() })
}

impl DataProjection {
    fn moments(&self, v: &SpectralImage) -> DVector<Complex64> {
        DVector::from_iterator(
            self.basis_images.len(),
            self.basis_images
                .iter()
                .map(|b| b.values.iter().zip(&v.values).zip(&self.weights).map(|((a, x), r)| a.conj() * x * *r).sum()),
        )
    }

    /// Expansion coefficients of the projection of `v` using the first `k`
    /// basis images.
    fn coefficients(&self, v: &SpectralImage, k: usize) -> DVector<Complex64> {
        if k == 0 {
            return DVector::zeros(0);
        }
        let l = self.gram_factor.view((0, 0), (k, k)).into_owned();
        let b = self.moments(v).rows(0, k).into_owned();
        let z = lower_solve(&l, &b);
        l.adjoint().solve_upper_triangular(&z).expect("Cholesky factor has a nonzero diagonal")
    }

    fn combine(&self, coef: &DVector<Complex64>) -> SpectralImage {
        let n = self.weights.len();
        let mut out = SpectralImage::zeros(n);
        for (c, img) in coef.iter().zip(&self.basis_images) {
            out.axpy(*c, img);
        }
        out
    }

    /// Regularized projection of `v` onto the span of the basis images.
    pub fn project(&self, v: &SpectralImage) -> SpectralImage {
        self.project_prefix(v, self.basis_images.len())
    }

    /// Projection onto the span of the first `k` basis images; prefixes of a
    /// nested basis share the leading block of the factor.
    pub fn project_prefix(&self, v: &SpectralImage, k: usize) -> SpectralImage {
        let k = k.min(self.basis_images.len());
        self.combine(&self.coefficients(v, k))
    }

    /// `‖v − P v‖ / ‖v‖` in `L_{2,σ}`.
    pub fn residual(&self, v: &SpectralImage, mu: &SpectralMeasure) -> f64 {
        let pv = self.project(v);
        let nv = mu.norm(v);
        if nv == 0.0 {
            0.0
        } else {
            mu.norm(&v.sub(&pv)) / nv
        }
    }
}

/// Nested projectors `P_{ω_0(s)}` for all `s` on a uniform ladder.
///
/// Basis element `j` is the wave at time `s_j = (j + ½) h` of a bump of
/// radius `r` centered at `r`, cut off at `s_j`. Shifting in time shows that
/// every element with `s_j <= s` lies in the reachable set at time `s`, so the
/// spans grow with `s` and one Cholesky factor serves all of them.
#[derive(Debug, Clone)]
pub struct ProjectionLadder {
    pub step: f64,
    pub radius: f64,
    pub projection: DataProjection,
    /// Upper bound on the rank a band-limited measure can support on `[0, s_max]`.
    pub band_rank: usize,
}

/// Builds the ladder with `n` basis controls of radius `radius` and step `step`.
pub fn projection_ladder(
    mu: &SpectralMeasure,
    n: usize,
    step: f64,
    radius: f64,
    reg_eps: f64,
) -> Result<ProjectionLadder> {
    if n == 0 || !(step > 0.0) || !(radius > 0.0) || !(reg_eps > 0.0) {
        return Err(invalid("ladder needs n > 0 and positive step, radius and reg_eps"));
    }
    let h = step / BUMP_SAMPLES_PER_STEP as f64;
    let n_samples = (2.0 * radius / h).ceil() as usize + 1;
    let samples: Vec<f64> = (0..n_samples).map(|i| smooth_bump((i as f64 * h - radius) / radius)).collect();
    let bump = Control::new(samples, h)?;
    let images: Vec<SpectralImage> = (0..n)
        .into_par_iter()
        .map(|j| {
            let s = (j as f64 + 0.5) * step;
            SpectralImage::from_real(mu.nodes.iter().map(|&lam| wave_image_at(&bump, s, lam)))
        })
        .collect();
    let m = images_matrix(&images, mu.len());
    let gram = weighted_gram(&m, mu);
    let stats = gram_stats(&gram, reg_eps);
    let s_max = n as f64 * step;
    let band_rank = (s_max * mu.lambda_max().sqrt() / std::f64::consts::PI).ceil() as usize;
    if 2 * stats.rank < n.min(band_rank) {
        return Err(BcError::RankCollapse { rank: stats.rank, n_controls: n });
    }
    let gram_factor = factor(&gram, stats.eps)?;
    Ok(ProjectionLadder {
        step,
        radius,
        projection: DataProjection {
            t: s_max,
            basis_images: images,
            gram,
            gram_factor,
            stats,
            weights: mu.weights.clone(),
        },
        band_rank,
    })
}

impl ProjectionLadder {
    pub fn len(&self) -> usize {
        self.projection.basis_images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of basis elements reachable by time `s`.
    pub fn count_at(&self, s: f64) -> usize {
        if s <= 0.0 {
            return 0;
        }
        (((s / self.step) - 0.5 + 1e-9).floor() as isize + 1).clamp(0, self.len() as isize) as usize
    }

    /// `P_{ω_0(s)} v`.
    pub fn project_at(&self, v: &SpectralImage, s: f64) -> SpectralImage {
        self.projection.project_prefix(v, self.count_at(s))
    }

    /// Whitened moments `L⁻¹ ⟨F_j, v⟩`; prefix sums of their products are
    /// the inner products of projections.
    pub fn whitened(&self, v: &SpectralImage) -> Vec<Complex64> {
        lower_solve(&self.projection.gram_factor, &self.projection.moments(v)).iter().cloned().collect()
    }

    /// Location attributed to the increment of basis element `j`.
    pub fn increment_position(&self, j: usize) -> f64 {
        j as f64 * self.step
    }
}

/// `P_{ω_x(t)} = P_{ω_0(x+t)} − P_{ω_0((x−t)_+)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomProjection {
    pub upper: usize,
    pub lower: usize,
}

pub fn atom_projection_pair(ladder: &ProjectionLadder, x: f64, t: f64) -> Result<AtomProjection> {
    if !(x >= 0.0) || !(t > 0.0) {
        return Err(invalid("atom projection needs x >= 0 and t > 0"));
    }
    if x + t > ladder.len() as f64 * ladder.step + 1e-12 {
        return Err(invalid(format!("x + t = {} exceeds the ladder", x + t)));
    }
    let lower = if t > x { 0 } else { ladder.count_at(x - t) };
    Ok(AtomProjection { upper: ladder.count_at(x + t), lower })
}

impl AtomProjection {
    pub fn apply(&self, ladder: &ProjectionLadder, v: &SpectralImage) -> SpectralImage {
        let hi = ladder.projection.project_prefix(v, self.upper);
        if self.lower == 0 {
            hi
        } else {
            hi.sub(&ladder.projection.project_prefix(v, self.lower))
        }
    }
}

/// Window-averaged values `u(x)/e(x)` from whitened moments.
///
/// The window at `x` weights the projector increments `dP_{ω_0(s)}` by a
/// Gaussian of width `σ = t/5` truncated to `|s − x| <= min(t, x)`; the
/// ratio `(P u, e) / (P e, e)` over it tends to `u(x)/e(x)` as `t → 0`.
fn ratio_values(
    ladder: &ProjectionLadder,
    zu: &[Complex64],
    ze: &[Complex64],
    x_grid: &[f64],
    windows: &[f64],
) -> Result<Vec<Complex64>> {
    let n = ladder.len();
    let de: Vec<f64> = ze.iter().map(|z| z.norm_sqr()).collect();
    let du: Vec<Complex64> = zu.iter().zip(ze).map(|(a, b)| a * b.conj()).collect();
    let peak = de.iter().cloned().fold(0.0, f64::max);
    x_grid
        .iter()
        .map(|&x| {
            let mut vals = Vec::with_capacity(windows.len());
            let mut zs = Vec::with_capacity(windows.len());
            for &t in windows {
                let half = t.min(x);
                let sigma = WINDOW_SIGMA_FRACTION * t;
                let lo = ((x - half) / ladder.step).ceil().max(0.0) as usize;
                let hi = (((x + half) / ladder.step).floor() as usize).min(n - 1);
                let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
                let mut mass = 0.0;
                for j in lo..=hi {
                    let z = (ladder.increment_position(j) - x) / sigma;
                    let w = (-0.5 * z * z).exp();
                    num += du[j] * w;
                    den += de[j] * w;
                    mass += w;
                }
                if !(den > crate::model::GAUGE_ZERO_REL * peak * mass) {
                    return Err(BcError::GaugeZero { x });
                }
                vals.push(num / den);
                zs.push(t * t);
            }
            Ok(if vals.len() == 1 { vals[0] } else { extrapolate_to_zero(&zs, &vals) })
        })
        .collect()
}

/// Coordinate values `u(x)/e(x)` of the wave with image `u` on `x_grid`,
/// computed from the measure alone.
pub fn recover_values(
    ladder: &ProjectionLadder,
    u: &SpectralImage,
    gauge: &SpectralImage,
    x_grid: &[f64],
    windows: &[f64],
) -> Result<Vec<Complex64>> {
    if windows.is_empty() || windows.iter().any(|&t| !(t > 0.0)) {
        return Err(invalid("windows must be positive"));
    }
    let reach = ladder.len() as f64 * ladder.step;
    if x_grid.iter().any(|&x| !(x > 0.0) || x + windows[0] > reach) {
        return Err(invalid("x grid must lie in (0, ladder reach - window)"));
    }
    ratio_values(ladder, &ladder.whitened(u), &ladder.whitened(gauge), x_grid, windows)
}

/// `C^∞` step from 0 at `a` to 1 at `b`.
pub fn smoothstep(t: f64, a: f64, b: f64) -> f64 {
    let s = ((t - a) / (b - a)).clamp(0.0, 1.0);
    let g = |z: f64| if z > 0.0 { (-1.0 / z).exp() } else { 0.0 };
    let (p, q) = (g(s), g(1.0 - s));
    p / (p + q)
}

/// Data controls `f_k(t) = smoothstep(t) ((T − t)/T)^k`, `k = 1..=n`.
pub fn data_controls(t_data: f64, n: usize) -> Result<Vec<Control>> {
    (1..=n)
        .map(|k| {
            Control::from_fn(
                |t| smoothstep(t, 0.2, 1.2) * ((t_data - t) / t_data).powi(k as i32),
                DATA_CONTROL_STEP,
                t_data,
            )
        })
        .collect()
}

/// `(ǔ^f, −ǔ^{f''})` at time `T`, using `−ǔ^{f''} = λ ǔ^f − f(T)` for controls
/// with `f(0) = f'(0) = 0`.
pub fn graph_pair(f: &Control, t: f64, mu: &SpectralMeasure) -> (SpectralImage, SpectralImage) {
    let u = wave_image(f, t, mu);
    let ft = f.eval(t);
    let g = SpectralImage { values: u.values.iter().zip(&mu.nodes).map(|(v, &lam)| v * lam - ft).collect() };
    (u, g)
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub gram: GramStats,
    pub band_rank: usize,
    pub ladder_step: f64,
    /// `‖ě − P ě‖² / ‖ě‖²` at the top of the ladder.
    pub gauge_residual: f64,
    /// Same for each data wave.
    pub data_residuals: Vec<f64>,
    /// Largest imaginary part among the recovered values, relative to the largest value.
    pub max_imag_rel: f64,
    pub masked_nodes: usize,
    pub trusted: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub model: ModelCoefficients,
    pub diagnostics: Diagnostics,
}

impl Reconstruction {
    /// Indices of `tau` inside the trusted interval.
    pub fn trusted_indices(&self) -> Vec<usize> {
        let (a, b) = self.diagnostics.trusted;
        (0..self.model.tau.len()).filter(|&i| self.model.tau[i] >= a - 1e-9 && self.model.tau[i] <= b + 1e-9).collect()
    }
}

fn residual_fraction(z: &[Complex64], norm2: f64) -> f64 {
    let captured: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    if norm2 > 0.0 {
        ((norm2 - captured) / norm2).max(0.0)
    } else {
        0.0
    }
}

/// Recovers `p`, `Q` and `q` on the coordinate grid from `mu` and `cfg`.
pub fn recover_potential(mu: &SpectralMeasure, cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    cfg.validate()?;
    if mu.nodes.iter().any(|&l| !(l > 0.0)) {
        return Err(invalid("measure nodes must be positive"));
    }
    let ladder = projection_ladder(mu, cfg.n_controls, cfg.ladder_step(), cfg.bump_radius, cfg.reg_eps)?;
    log::info!(
        "ladder: {} controls, rank {}, cond {:.3e}",
        ladder.len(),
        ladder.projection.stats.rank,
        ladder.projection.stats.cond_regularized
    );
    let gauge = gauge_image(mu);
    let ze = ladder.whitened(&gauge);
    let tau = cfg.tau_grid();
    let controls = data_controls(cfg.t_data, cfg.n_data)?;
    let pairs_images: Vec<(SpectralImage, SpectralImage)> =
        controls.par_iter().map(|f| graph_pair(f, cfg.t_data, mu)).collect();

    let mut pairs = Vec::with_capacity(pairs_images.len());
    let mut data_residuals = Vec::with_capacity(pairs_images.len());
    let mut max_imag: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for (u, g) in &pairs_images {
        let zu = ladder.whitened(u);
        let zg = ladder.whitened(g);
        data_residuals.push(residual_fraction(&zu, mu.norm(u).powi(2)));
        let yu = ratio_values(&ladder, &zu, &ze, &tau, &cfg.windows)?;
        let yg = ratio_values(&ladder, &zg, &ze, &tau, &cfg.windows)?;
        for v in yu.iter().chain(&yg) {
            max_imag = max_imag.max(v.im.abs());
            max_abs = max_abs.max(v.norm());
        }
        pairs.push((yu.iter().map(|v| v.re).collect(), yg.iter().map(|v| v.re).collect()));
    }
    let mut model = model_coefficients(&pairs, &tau, cfg.cond_tol)?;
    recover_q_from_pq(&mut model)?;
    let diagnostics = Diagnostics {
        gram: ladder.projection.stats.clone(),
        band_rank: ladder.band_rank,
        ladder_step: ladder.step,
        gauge_residual: residual_fraction(&ze, mu.norm(&gauge).powi(2)),
        data_residuals,
        max_imag_rel: if max_abs > 0.0 { max_imag / max_abs } else { 0.0 },
        masked_nodes: model.mask.iter().filter(|&&m| m).count(),
        trusted: cfg.trusted(),
    };
    Ok(Reconstruction { model, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip_and_errors() {
        let cfg = ReconstructionConfig::default();
        let back: ReconstructionConfig = cfg.to_string().parse().unwrap();
        assert_eq!(back, cfg);
        let cfg = ReconstructionConfig::parse("T_data = 3\n# c\nwindows = 0.2, 0.1\nn_controls=100\n").unwrap();
        assert_eq!(cfg.windows, vec![0.2, 0.1]);
        assert_eq!(cfg.n_controls, 100);
        assert!(matches!(ReconstructionConfig::parse("foo = 1"), Err(BcError::Parse(_))));
        assert!(matches!(ReconstructionConfig::parse("reg_eps = x"), Err(BcError::Parse(_))));
        assert!(ReconstructionConfig::parse("windows = 0.1, 0.2").is_err());
        assert!(ReconstructionConfig::parse("windows = 0.9").is_err());
        assert!(ReconstructionConfig::parse("reg_eps = 0").is_err());
    }

    #[test]
    fn tau_grid_layout() {
        let cfg = ReconstructionConfig::default();
        let tau = cfg.tau_grid();
        assert_eq!(tau.len(), 35);
        assert!((tau[0] - 0.05).abs() < 1e-12);
        assert!((tau[34] - 1.75).abs() < 1e-12);
        assert!((cfg.ladder_step() - 0.00625).abs() < 1e-12);
    }

    #[test]
    fn smoothstep_shape() {
        assert_eq!(smoothstep(0.1, 0.2, 1.2), 0.0);
        assert_eq!(smoothstep(1.3, 0.2, 1.2), 1.0);
        assert!((smoothstep(0.7, 0.2, 1.2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ladder_counts() {
        let mu = SpectralMeasure::constant(1.0, 10.0, 2000.0).unwrap();
        let ladder = projection_ladder(&mu, 40, 0.025, 0.03, 1e-8).unwrap();
        assert_eq!(ladder.count_at(0.0), 0);
        assert_eq!(ladder.count_at(0.0125), 1);
        assert_eq!(ladder.count_at(0.0124), 0);
        assert_eq!(ladder.count_at(0.1), 4);
        assert_eq!(ladder.count_at(10.0), 40);
        let pair = atom_projection_pair(&ladder, 0.5, 0.1).unwrap();
        assert_eq!(pair, AtomProjection { upper: ladder.count_at(0.6), lower: ladder.count_at(0.4) });
        let pair0 = atom_projection_pair(&ladder, 0.0, 0.1).unwrap();
        assert_eq!(pair0.lower, 0);
        assert!(atom_projection_pair(&ladder, 0.95, 0.1).is_err());
    }

    #[test]
    fn graph_pair_matches_second_derivative_image() {
        let mu = SpectralMeasure::constant(1.0, 10.0, 400.0).unwrap();
        let f = &data_controls(3.0, 2).unwrap()[1];
        let (_, g) = graph_pair(f, 3.0, &mu);
        let g2 = crate::spectral::wave_image_second(f, 3.0, &mu);
        let err = mu.norm(&g.sub(&g2)) / mu.norm(&g);
        assert!(err < 1e-3, "{err}");
    }
}
