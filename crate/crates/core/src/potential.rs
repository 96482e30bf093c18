//! Sampled potentials `q(x)` on a uniform grid `x_i = i h`.

use std::io::BufRead;
use std::path::Path;

use crate::error::{invalid, BcError, Result};

/// A smooth potential sampled on `x_i = i h, i = 0..=N`.
///
/// Values between nodes come from 4-point cubic Lagrange interpolation.
/// Solvers that need the operator to be positive definite (the gauge
/// solution, the inverse pipeline oracles) refuse to run until
/// [`Potential::certify`] has succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    samples: Vec<f64>,
    h: f64,
    kappa: Option<f64>,
}

impl Potential {
    pub fn from_samples(samples: Vec<f64>, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("grid step must be positive, got {h}")));
        }
        if samples.len() < 4 {
            return Err(invalid("a potential needs at least 4 samples"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite potential sample at index {i}")));
        }
        Ok(Self { samples, h, kappa: None })
    }

    /// Samples `q` on `[0, x_max]` with step `h`. The last node is the first
    /// grid point at or beyond `x_max`.
    pub fn from_fn(q: impl Fn(f64) -> f64, h: f64, x_max: f64) -> Result<Self> {
        if !(x_max > 0.0) {
            return Err(invalid("x_max must be positive"));
        }
        let n = grid_count(x_max, h);
        Self::from_samples((0..=n).map(|i| q(i as f64 * h)).collect(), h)
    }

    pub fn constant(c: f64, h: f64, x_max: f64) -> Result<Self> {
        Self::from_fn(|_| c, h, x_max)
    }

    /// `q(x) = c + amp * exp(-(x - center)^2 / width)`.
    pub fn bump(c: f64, amp: f64, center: f64, width: f64, h: f64, x_max: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("bump width must be positive"));
        }
        Self::from_fn(|x| c + amp * (-(x - center) * (x - center) / width).exp(), h, x_max)
    }

    /// Parses a named built-in: `const:c` or `bump:c,amp,center,width`.
    pub fn builtin(spec: &str, h: f64, x_max: f64) -> Result<Self> {
        let (kind, args) =
            spec.split_once(':').ok_or_else(|| BcError::Parse(format!("expected `kind:args`, got `{spec}`")))?;
        let nums = args
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| BcError::Parse(format!("bad number `{s}` in `{spec}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        match (kind.trim(), nums.as_slice()) {
            ("const", [c]) => Self::constant(*c, h, x_max),
            ("bump", [c, amp, center, width]) => Self::bump(*c, *amp, *center, *width, h, x_max),
            _ => {
                Err(BcError::Parse(format!("unknown potential `{spec}` (expected const:c or bump:c,amp,center,width)")))
            }
        }
    }

    /// Reads a two-column CSV `x, q(x)` (optional header line) on a uniform
    /// grid starting at 0.
    pub fn from_csv_reader(reader: impl BufRead) -> Result<Self> {
        let mut xs = Vec::new();
        let mut qs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(BcError::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(q)) => {
                    xs.push(x);
                    qs.push(q);
                }
                _ if xs.is_empty() => continue, // header
                _ => return Err(BcError::Parse(format!("line {}: bad numbers", lineno + 1))),
            }
        }
        if xs.len() < 4 {
            return Err(BcError::Parse("potential CSV needs at least 4 rows".into()));
        }
        let h = xs[1] - xs[0];
        for (i, x) in xs.iter().enumerate() {
            if (x - i as f64 * h).abs() > 1e-9 * h.max(1.0) * (i as f64 + 1.0) {
                return Err(BcError::Parse(format!(
                    "potential grid must be uniform and start at 0 (row {i}: x = {x})"
                )));
            }
        }
        Self::from_samples(qs, h)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(f))
    }

    /// Loads either a built-in (`const:`/`bump:`) or a CSV path.
    pub fn load(spec: &str, h: f64, x_max: f64) -> Result<Self> {
        if spec.starts_with("const:") || spec.starts_with("bump:") {
            Self::builtin(spec, h, x_max)
        } else {
            Self::from_csv(Path::new(spec))
        }
    }

    /// Sets the positivity certificate: accepted when `min q > 0` or when the
    /// caller vouches for a lower bound `kappa > 0`.
    pub fn certify(&mut self, kappa: Option<f64>) -> Result<()> {
        match kappa {
            Some(k) if k > 0.0 && k.is_finite() => {
                self.kappa = Some(k);
                Ok(())
            }
            Some(k) => Err(invalid(format!("kappa must be positive, got {k}"))),
            None => {
                let m = self.min();
                if m > 0.0 {
                    self.kappa = Some(m);
                    Ok(())
                } else {
                    Err(BcError::Uncertified)
                }
            }
        }
    }

    pub fn certified(mut self) -> Result<Self> {
        self.certify(None)?;
        Ok(self)
    }

    pub fn kappa(&self) -> Option<f64> {
        self.kappa
    }

    pub fn is_certified(&self) -> bool {
        self.kappa.is_some()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.h
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Cubic interpolation; clamps to the end values outside `[0, x_max]`.
    pub fn eval(&self, x: f64) -> f64 {
        cubic_interp(&self.samples, self.h, x)
    }

    /// Integral of `q` over `[0, x]` on the grid (trapezoid, cubic-interpolated
    /// partial cell).
    pub fn integral_to(&self, x: f64) -> f64 {
        let s = (x / self.h).clamp(0.0, (self.samples.len() - 1) as f64);
        let n = s.floor() as usize;
        let mut acc = 0.0;
        for i in 0..n {
            acc += 0.5 * (self.samples[i] + self.samples[i + 1]) * self.h;
        }
        let frac = s - n as f64;
        if frac > 0.0 {
            let xa = n as f64 * self.h;
            let xb = x;
            acc += 0.5 * (self.eval(xa) + self.eval(xb)) * (xb - xa);
        }
        acc
    }

    /// Resamples onto another uniform step, keeping the same `x_max` (the
    /// last node may shrink onto the new grid).
    pub fn resample(&self, h: f64) -> Result<Self> {
        let n = ((self.x_max() / h) + 1e-9).floor() as usize;
        let mut out = Self::from_samples((0..=n).map(|i| self.eval(i as f64 * h)).collect(), h)?;
        out.kappa = self.kappa;
        Ok(out)
    }
}

/// Number of steps so that `n * h >= x_max` (up to rounding noise).
pub(crate) fn grid_count(x_max: f64, h: f64) -> usize {
    let r = x_max / h;
    let n = r.round();
    if (r - n).abs() < 1e-9 * r.max(1.0) {
        n as usize
    } else {
        r.ceil() as usize
    }
}

/// 4-point Lagrange interpolation of uniformly sampled data.
pub(crate) fn cubic_interp(v: &[f64], h: f64, x: f64) -> f64 {
    let n = v.len();
    let s = x / h;
    if s <= 0.0 {
        return v[0];
    }
    if s >= (n - 1) as f64 {
        return v[n - 1];
    }
    let i = s.floor() as usize;
    let frac = s - i as f64;
    if frac == 0.0 {
        return v[i];
    }
    if n < 4 {
        return v[i] * (1.0 - frac) + v[i + 1] * frac;
    }
    let start = i.saturating_sub(1).min(n - 4);
    let t = s - start as f64;
    let (y0, y1, y2, y3) = (v[start], v[start + 1], v[start + 2], v[start + 3]);
    let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3
}
