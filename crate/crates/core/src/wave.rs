//! The boundary-control wave system
//!
//! ```text
//! u_tt - u_xx + q u = 0,  u(x, 0) = u_t(x, 0) = 0,  u(0, t) = f(t)
//! ```
//!
//! solved either by leapfrog on the characteristic grid (CFL = 1) or through
//! the transmutation representation
//! `u(x, t) = f(t - x) + ∫_x^t w(x, s) f(t - s) ds`.

use crate::error::{invalid, BcError, Result};
use crate::potential::{cubic_interp, grid_count, Potential};

/// Iteration cap for the characteristic fixed point.
pub const GOURSAT_MAX_SWEEPS: usize = 200;
const GOURSAT_TOL: f64 = 1e-14;

/// Boundary control sampled on `t_j = j h`. Extended by zero past its last
/// sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Control {
    pub samples: Vec<f64>,
    pub h: f64,
}

impl Control {
    pub fn new(samples: Vec<f64>, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("control step must be positive, got {h}")));
        }
        if samples.is_empty() || samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid("control samples must be non-empty and finite"));
        }
        Ok(Self { samples, h })
    }

    pub fn from_fn(f: impl Fn(f64) -> f64, h: f64, t_max: f64) -> Result<Self> {
        let m = grid_count(t_max, h);
        Self::new((0..=m).map(|j| f(j as f64 * h)).collect(), h)
    }

    pub fn zero(h: f64, t_max: f64) -> Result<Self> {
        Self::from_fn(|_| 0.0, h, t_max)
    }

    /// The C^∞ bump `exp(1 - 1/(1 - r²))`, `r = (t - center)/radius`.
    pub fn bump(center: f64, radius: f64, h: f64, t_max: f64) -> Result<Self> {
        Self::from_fn(|t| smooth_bump((t - center) / radius), h, t_max)
    }

    /// `f(j h)`, zero outside the sampled range.
    pub fn at(&self, j: isize) -> f64 {
        if j < 0 {
            0.0
        } else {
            self.samples.get(j as usize).copied().unwrap_or(0.0)
        }
    }

    /// Cubic interpolation, zero outside `[0, t_last]`.
    pub fn eval(&self, t: f64) -> f64 {
        let t_last = (self.samples.len() - 1) as f64 * self.h;
        if t < 0.0 || t > t_last {
            0.0
        } else {
            cubic_interp(&self.samples, self.h, t)
        }
    }
}

/// `exp(1 - 1/(1 - r²))` for `|r| < 1`, zero elsewhere; equals 1 at `r = 0`.
pub fn smooth_bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// Space-time array stored time-major: `values[n * nx + i] = u(x_i, t_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub h: f64,
    pub nx: usize,
    pub nt: usize,
    pub values: Vec<f64>,
}

impl WaveField {
    pub fn zeros(nx: usize, nt: usize, h: f64) -> Self {
        Self { h, nx, nt, values: vec![0.0; nx * nt] }
    }

    pub fn from_fn(nx: usize, nt: usize, h: f64, g: impl Fn(f64, f64) -> f64) -> Self {
        let mut w = Self::zeros(nx, nt, h);
        for n in 0..nt {
            for i in 0..nx {
                w.values[n * nx + i] = g(i as f64 * h, n as f64 * h);
            }
        }
        w
    }

    pub fn at(&self, i: usize, n: usize) -> f64 {
        self.values[n * self.nx + i]
    }

    pub fn time_slice(&self, n: usize) -> &[f64] {
        &self.values[n * self.nx..(n + 1) * self.nx]
    }

    fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.nx..(n + 1) * self.nx]
    }

    pub fn last(&self) -> &[f64] {
        self.time_slice(self.nt - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Transmutation kernel on the triangle `0 <= x_i <= s_j <= T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoursatKernel {
    pub h: f64,
    /// Grid index of `T`.
    pub m: usize,
    data: Vec<f64>,
    /// Sweeps used by the fixed-point iteration.
    pub sweeps: usize,
}

impl GoursatKernel {
    /// Zero kernel, i.e. the representation of `q ≡ 0`.
    pub fn zero(h: f64, m: usize) -> Self {
        Self { h, m, data: vec![0.0; (m + 1) * (m + 1)], sweeps: 0 }
    }

    /// `w(x_i, s_j)` for `i <= j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j && j <= self.m);
        self.data[i * (self.m + 1) + j]
    }

    pub fn t(&self) -> f64 {
        self.m as f64 * self.h
    }
}

fn check_step(what: &str, h: f64, reference: f64) -> Result<()> {
    if (h - reference).abs() > 1e-12 * reference {
        return Err(BcError::GridMismatch(format!("{what} step {h} differs from space step {reference}")));
    }
    Ok(())
}

fn time_steps(t: f64, h: f64, x_max: f64) -> Result<usize> {
    if !(t > 0.0) {
        return Err(invalid(format!("T must be positive, got {t}")));
    }
    if t > x_max + 1e-9 * h {
        return Err(invalid(format!("T = {t} exceeds X_max = {x_max}")));
    }
    Ok(grid_count(t, h))
}

/// Leapfrog solution on `[0, T] x [0, T]`. Since `u = 0` for `x > t` the
/// space interval `[0, T]` holds the whole wave.
pub fn forward_fd(q: &Potential, f: &Control, t: f64) -> Result<WaveField> {
    let h = q.h();
    check_step("control", f.h, h)?;
    let m = time_steps(t, h, q.x_max())?;
    let nx = m + 1;
    let qs = &q.samples()[..nx];
    let mut u = WaveField::zeros(nx, m + 1, h);
    u.slice_mut(0)[0] = f.at(0);
    if m >= 1 {
        u.slice_mut(1)[0] = f.at(1);
    }
    let h2 = h * h;
    for n in 1..m {
        let (past, rest) = u.values.split_at_mut(n * nx);
        let (cur, next) = rest.split_at_mut(nx);
        let prev = &past[(n - 1) * nx..];
        let next = &mut next[..nx];
        next[0] = f.at(n as isize + 1);
        for i in 1..nx {
            let right = if i + 1 < nx { cur[i + 1] } else { 0.0 };
            next[i] = right + cur[i - 1] - prev[i] - h2 * qs[i] * cur[i];
        }
    }
    Ok(u)
}

/// Successive approximation of the Goursat problem
///
/// ```text
/// w_ss - w_xx + q(x) w = 0,  w(0, s) = 0,  w(x, x) = -½ ∫_0^x q
/// ```
///
/// in characteristic coordinates `ξ = s + x`, `η = s - x`, where it reads
/// `W = -½ ∫_{η/2}^{ξ/2} q - ¼ ∫_η^ξ ∫_0^η q((ξ'-η')/2) W dη' dξ'`.
pub fn goursat_kernel(q: &Potential, t: f64) -> Result<GoursatKernel> {
    let h = q.h();
    let m = time_steps(t, h, q.x_max())?;
    let na = 2 * m + 1;
    // ξ_a = a h, η_b = b h, 0 <= b <= a, a + b <= 2m; x = (a - b) h / 2.
    let q_half: Vec<f64> = (0..=2 * m).map(|k| q.eval(k as f64 * 0.5 * h)).collect();
    let mut q_cum = vec![0.0; 2 * m + 1];
    for k in 1..=2 * m {
        q_cum[k] = q_cum[k - 1] + 0.25 * h * (q_half[k - 1] + q_half[k]);
    }
    let rows: Vec<usize> = (0..=m).map(|b| 2 * m - b + 1).collect();
    let idx = |a: usize, b: usize| b * na + a;

    let mut base = vec![0.0; na * (m + 1)];
    for b in 0..=m {
        for a in b..rows[b] {
            base[idx(a, b)] = -0.5 * (q_cum[a] - q_cum[b]);
        }
    }

    let mut w = base.clone();
    let mut inner = vec![0.0; na * (m + 1)];
    let mut sweeps = 0;
    let scale = base.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    loop {
        sweeps += 1;
        // inner(a, b) = ∫_0^{η_b} qW(ξ_a, η') dη'
        for a in 0..na {
            let mut acc = 0.0;
            let mut prev = q_half[a] * w[idx(a, 0)];
            inner[idx(a, 0)] = 0.0;
            for b in 1..=m.min(a).min(2 * m - a) {
                let cur = q_half[a - b] * w[idx(a, b)];
                acc += 0.5 * h * (prev + cur);
                inner[idx(a, b)] = acc;
                prev = cur;
            }
        }
        let mut change = 0.0f64;
        for b in 0..=m {
            let mut outer = 0.0;
            let mut prev = inner[idx(b, b)];
            for a in b + 1..rows[b] {
                let cur = inner[idx(a, b)];
                outer += 0.5 * h * (prev + cur);
                prev = cur;
                let k = idx(a, b);
                let new = base[k] - 0.25 * outer;
                change = change.max((new - w[k]).abs());
                w[k] = new;
            }
        }
        if !change.is_finite() {
            return Err(BcError::NonConvergence { iterations: sweeps, last_update: change });
        }
        if change <= GOURSAT_TOL * scale {
            break;
        }
        if sweeps >= GOURSAT_MAX_SWEEPS {
            return Err(BcError::NonConvergence { iterations: sweeps, last_update: change });
        }
    }

    let mut k = GoursatKernel::zero(h, m);
    k.sweeps = sweeps;
    for i in 0..=m {
        for j in i..=m {
            k.data[i * (m + 1) + j] = w[idx(j + i, j - i)];
        }
    }
    Ok(k)
}

/// Evaluates the transmutation representation with trapezoid quadrature.
pub fn forward_kernel(w: &GoursatKernel, f: &Control, t: f64) -> Result<WaveField> {
    let h = w.h;
    check_step("control", f.h, h)?;
    let m = time_steps(t, h, w.t())?;
    let nx = m + 1;
    let mut u = WaveField::zeros(nx, m + 1, h);
    for n in 0..=m {
        let row = u.slice_mut(n);
        for i in 0..=n {
            let mut acc = 0.0;
            for j in i..=n {
                let weight = if j == i || j == n { 0.5 } else { 1.0 };
                acc += weight * w.get(i, j) * f.at((n - j) as isize);
            }
            row[i] = f.at((n - i) as isize) + h * acc;
        }
    }
    Ok(u)
}

/// Boundary control steering the system to `u(·, T) = y`.
///
/// With `g(x) = f(T - x)` the trapezoid-discretized Volterra equation
/// `g(x) + ∫_x^T w(x, s) g(s) ds = y(x)` is solved from `x = T` down to 0.
/// `y` is sampled on `x_i = i h`; missing samples up to `T` count as zero.
pub fn solve_control(w: &GoursatKernel, y: &[f64], t: f64) -> Result<Control> {
    let h = w.h;
    let m = time_steps(t, h, w.t())?;
    let target = |i: usize| y.get(i).copied().unwrap_or(0.0);
    let mut g = vec![0.0; m + 1];
    g[m] = target(m);
    for i in (0..m).rev() {
        let mut acc = 0.5 * w.get(i, m) * g[m];
        for j in i + 1..m {
            acc += w.get(i, j) * g[j];
        }
        g[i] = (target(i) - h * acc) / (1.0 + 0.5 * h * w.get(i, i));
    }
    g.reverse();
    Control::new(g, h)
}

/// `v_tt - v_xx + q v = g`, zero initial data, `v = 0` at `x = 0` and at the
/// right end of the array. `g` carries the space-time grid; make it wide
/// enough that the wave never reaches its right end.
pub fn dual_forward(q: &Potential, g: &WaveField, t: f64) -> Result<WaveField> {
    let h = q.h();
    check_step("source", g.h, h)?;
    let m = time_steps(t, h, f64::INFINITY)?;
    let nx = g.nx;
    if nx > q.len() {
        return Err(BcError::GridMismatch(format!("source spans {nx} nodes but potential only {}", q.len())));
    }
    if g.nt < m + 1 {
        return Err(BcError::GridMismatch(format!("source has {} time levels, need {}", g.nt, m + 1)));
    }
    let qs = &q.samples()[..nx];
    let h2 = h * h;
    let mut v = WaveField::zeros(nx, m + 1, h);
    if m >= 1 {
        let g0 = g.time_slice(0);
        let v1 = v.slice_mut(1);
        for i in 1..nx - 1 {
            v1[i] = 0.5 * h2 * g0[i];
        }
    }
    for n in 1..m {
        let src = g.time_slice(n);
        leapfrog_step(&mut v, n, n + 1, n - 1, qs, h2, Some(src));
    }
    Ok(v)
}

/// `w_tt - w_xx + q w = 0` backward from `w(T) = 0`, `w_t(T) = y`, with
/// Dirichlet conditions at `x = 0` and at the end of `y`.
pub fn dual_backward(q: &Potential, y: &[f64], t: f64) -> Result<WaveField> {
    let h = q.h();
    let m = time_steps(t, h, f64::INFINITY)?;
    let nx = y.len();
    if nx > q.len() {
        return Err(BcError::GridMismatch(format!("final data spans {nx} nodes but potential only {}", q.len())));
    }
    if nx < 3 {
        return Err(invalid("final data needs at least 3 nodes"));
    }
    let qs = &q.samples()[..nx];
    let h2 = h * h;
    let mut w = WaveField::zeros(nx, m + 1, h);
    if m >= 1 {
        // Taylor step: w_tt(T) = 0 and w_ttt(T) = y'' - q y.
        let row = w.slice_mut(m - 1);
        for i in 1..nx - 1 {
            let d2 = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2;
            row[i] = -h * y[i] - h * h2 / 6.0 * (d2 - qs[i] * y[i]);
        }
    }
    for n in (1..m).rev() {
        leapfrog_step(&mut w, n, n - 1, n + 1, qs, h2, None);
    }
    Ok(w)
}

fn leapfrog_step(v: &mut WaveField, cur: usize, next: usize, prev: usize, qs: &[f64], h2: f64, src: Option<&[f64]>) {
    let nx = v.nx;
    let c = v.time_slice(cur).to_vec();
    let p = v.time_slice(prev).to_vec();
    let out = v.slice_mut(next);
    for i in 1..nx - 1 {
        let s = src.map_or(0.0, |g| g[i]);
        out[i] = c[i + 1] + c[i - 1] - p[i] + h2 * (s - qs[i] * c[i]);
    }
}

/// Trapezoid `∫∫ a b dx dt` over two fields on the same grid.
pub fn space_time_inner(a: &WaveField, b: &WaveField) -> f64 {
    let weight = |k: usize, len: usize| if k == 0 || k + 1 == len { 0.5 } else { 1.0 };
    let mut acc = 0.0;
    for n in 0..a.nt.min(b.nt) {
        let wn = weight(n, a.nt.min(b.nt));
        for i in 0..a.nx.min(b.nx) {
            acc += wn * weight(i, a.nx.min(b.nx)) * a.at(i, n) * b.at(i, n);
        }
    }
    acc * a.h * a.h
}

/// Trapezoid `∫ a b dx` over the common prefix of two grids.
pub fn inner(a: &[f64], b: &[f64], h: f64) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
    for i in 1..n - 1 {
        acc += a[i] * b[i];
    }
    acc * h
}

pub fn l2_norm(a: &[f64], h: f64) -> f64 {
    inner(a, a, h).sqrt()
}

/// `‖a - b‖ / ‖b‖` on the common prefix.
pub fn rel_l2(a: &[f64], b: &[f64], h: f64) -> f64 {
    let n = a.len().min(b.len());
    let d: Vec<f64> = (0..n).map(|i| a[i] - b[i]).collect();
    l2_norm(&d, h) / l2_norm(&b[..n], h)
}
