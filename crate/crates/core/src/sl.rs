//! Sturm–Liouville fundamentals for `-y'' + q y`: the decaying gauge
//! solution `φ`, the auxiliary `η = L⁻¹φ`, the Dirichlet-normalized solution
//! `ψ(·, λ)` and the boundary operators of the Vishik decomposition.

use num_complex::Complex64;

use crate::error::{BcError, Result};
use crate::potential::{cubic_interp, Potential};

/// `|φ(X_max)|` must fall below this fraction of `max |φ|`.
pub const DECAY_TOL: f64 = 1e-3;
/// Smallest admissible `|η'(0)|`.
pub const ETA_TOL: f64 = 1e-12;
/// Largest `sqrt|λ - q| * step` allowed inside one RK4 substep.
const MAX_PHASE_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeSolution {
    pub h: f64,
    pub phi: Vec<f64>,
    pub phi_prime0: f64,
    pub eta: Vec<f64>,
    pub eta_prime0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub gamma1_coeff: Complex64,
    pub gamma2_coeff: Complex64,
}

/// Integrates `y'' = (q - λ) y - src` across the grid of `q` with classical
/// RK4, substepping when the local frequency is high. Returns `(y, y')` on
/// every node. With `rescale`, the homogeneous solution is periodically
/// renormalized to keep it finite (only meaningful when `src` is `None`).
fn integrate(
    q: &Potential,
    lambda: f64,
    src: Option<&[f64]>,
    backward: bool,
    init: (f64, f64),
    rescale: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = q.len() - 1;
    let h = q.h();
    let spread = (lambda - q.min()).abs().max((lambda - q.max()).abs());
    let m = ((spread.sqrt() * h / MAX_PHASE_STEP).ceil() as usize).max(1);
    let hs = if backward { -h / m as f64 } else { h / m as f64 };
    let rhs = |x: f64, y: f64| {
        let s = src.map_or(0.0, |v| cubic_interp(v, h, x));
        (q.eval(x) - lambda) * y - s
    };

    let mut ys = vec![0.0; n + 1];
    let mut ps = vec![0.0; n + 1];
    let start = if backward { n } else { 0 };
    let (mut y, mut p) = init;
    ys[start] = y;
    ps[start] = p;
    for step in 0..n {
        let i0 = if backward { n - step } else { step };
        let mut x = i0 as f64 * h;
        for _ in 0..m {
            let k1y = p;
            let k1p = rhs(x, y);
            let k2y = p + 0.5 * hs * k1p;
            let k2p = rhs(x + 0.5 * hs, y + 0.5 * hs * k1y);
            let k3y = p + 0.5 * hs * k2p;
            let k3p = rhs(x + 0.5 * hs, y + 0.5 * hs * k2y);
            let k4y = p + hs * k3p;
            let k4p = rhs(x + hs, y + hs * k3y);
            y += hs / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            p += hs / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            x += hs;
        }
        let i1 = if backward { i0 - 1 } else { i0 + 1 };
        ys[i1] = y;
        ps[i1] = p;
        if rescale && y.abs().max(p.abs()) > 1e150 {
            let range = if backward { i1..n + 1 } else { 0..i1 + 1 };
            for k in range {
                ys[k] *= 1e-150;
                ps[k] *= 1e-150;
            }
            y *= 1e-150;
            p *= 1e-150;
        }
    }
    (ys, ps)
}

/// The decaying solution of `-φ'' + qφ = 0` with `φ(0) = 1`, on the whole
/// grid of `q`. Returns `(φ, φ'(0))`.
///
/// Values in the last fifth of the grid carry the seed error and should not
/// be relied upon.
pub fn solve_phi(q: &Potential) -> Result<(Vec<f64>, f64)> {
    let kappa = q.kappa().ok_or(BcError::Uncertified)?;
    let n = q.len() - 1;
    let decay = q.samples()[n].max(kappa).sqrt();
    let (mut phi, dphi) = integrate(q, 0.0, None, true, (1.0, -decay), true);
    let p0 = phi[0];
    let peak = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !p0.is_finite() || p0.abs() <= 1e-12 * peak {
        return Err(BcError::NoDecayingSolution(format!("phi(0) = {p0:e} relative to max |phi| = {peak:e}")));
    }
    for v in phi.iter_mut() {
        *v /= p0;
    }
    phi[0] = 1.0;
    let tail = phi[n].abs();
    let peak = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if tail >= DECAY_TOL * peak {
        return Err(BcError::NoDecayingSolution(format!(
            "|phi(X_max)| = {tail:e} is not small against max |phi| = {peak:e}; increase X_max"
        )));
    }
    Ok((phi, dphi[0] / p0))
}

/// `η` with `-η'' + qη = φ`, `η(0) = 0`, decaying at `X_max`. Returns
/// `(η, η'(0))`.
///
/// A particular solution is integrated backward from zero data at `X_max`;
/// the `φ`-component it picks up is removed by subtracting `η_b(0) φ`.
pub fn solve_eta(q: &Potential, phi: &[f64], phi_prime0: f64) -> Result<(Vec<f64>, f64)> {
    if phi.len() != q.len() {
        return Err(BcError::GridMismatch(format!("phi has {} nodes, potential has {}", phi.len(), q.len())));
    }
    let (eb, deb) = integrate(q, 0.0, Some(phi), true, (0.0, 0.0), false);
    let c = eb[0];
    let mut eta: Vec<f64> = eb.iter().zip(phi).map(|(e, p)| e - c * p).collect();
    eta[0] = 0.0;
    let d0 = deb[0] - c * phi_prime0;
    if !(d0.abs() >= ETA_TOL) {
        return Err(BcError::DegenerateEta(d0.abs()));
    }
    Ok((eta, d0))
}

pub fn gauge(q: &Potential) -> Result<GaugeSolution> {
    let (phi, phi_prime0) = solve_phi(q)?;
    let (eta, eta_prime0) = solve_eta(q, &phi, phi_prime0)?;
    Ok(GaugeSolution { h: q.h(), phi, phi_prime0, eta, eta_prime0 })
}

/// `Γ1 y = -y(0) φ`, `Γ2 y = [(y'(0) - y(0) φ'(0)) / η'(0)] φ`.
pub fn boundary_operators(y0: Complex64, y0prime: Complex64, g: &GaugeSolution) -> BoundaryData {
    BoundaryData { gamma1_coeff: -y0, gamma2_coeff: (y0prime - y0 * g.phi_prime0) / g.eta_prime0 }
}

/// Splits `y` as `y_0 + c η + y(0) φ` with `y_0` in the minimal domain.
/// Returns `(y_0, c η, y(0) φ)`.
pub fn vishik_parts(y: &[f64], y0prime: f64, g: &GaugeSolution) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let y0 = y[0];
    let c = (y0prime - y0 * g.phi_prime0) / g.eta_prime0;
    let eta_part: Vec<f64> = g.eta.iter().map(|e| c * e).collect();
    let phi_part: Vec<f64> = g.phi.iter().map(|p| y0 * p).collect();
    let rest = y.iter().zip(eta_part.iter().zip(&phi_part)).map(|(v, (a, b))| v - a - b).collect();
    (rest, eta_part, phi_part)
}

/// `ψ(·, λ)` with `ψ(0) = 0, ψ'(0) = 1` and its derivative on the grid of `q`.
pub fn solve_psi(q: &Potential, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    integrate(q, lambda, None, false, (0.0, 1.0), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn certified_const(c: f64, h: f64, x: f64) -> Potential {
        Potential::constant(c, h, x).unwrap().certified().unwrap()
    }

    #[test]
    fn phi_matches_exponential() {
        for c in [1.0f64, 4.0] {
            let q = certified_const(c, 0.01, 20.0);
            let (phi, d0) = solve_phi(&q).unwrap();
            assert_eq!(phi[0], 1.0);
            assert!((d0 + c.sqrt()).abs() < 1e-8, "phi'(0) = {d0}");
            for i in (0..1600).step_by(37) {
                let exact = (-c.sqrt() * q.x(i)).exp();
                assert!((phi[i] - exact).abs() < 1e-8, "c={c} i={i}");
            }
        }
    }

    #[test]
    fn phi_requires_certificate_and_room() {
        let q = Potential::constant(1.0, 0.01, 20.0).unwrap();
        assert!(matches!(solve_phi(&q), Err(BcError::Uncertified)));
        let short = certified_const(1.0, 0.01, 2.0);
        assert!(matches!(solve_phi(&short), Err(BcError::NoDecayingSolution(_))));
    }

    #[test]
    fn eta_matches_closed_form() {
        for c in [1.0f64, 4.0] {
            let a = c.sqrt();
            let q = certified_const(c, 0.01, 20.0);
            let g = gauge(&q).unwrap();
            assert_eq!(g.eta[0], 0.0);
            assert!((g.eta_prime0 - 1.0 / (2.0 * a)).abs() < 1e-8);
            for i in (0..1600).step_by(41) {
                let x = q.x(i);
                let exact = x * (-a * x).exp() / (2.0 * a);
                assert!((g.eta[i] - exact).abs() < 1e-8, "c={c} x={x}");
            }
        }
    }

    #[test]
    fn eta_prime0_is_norm_of_phi() {
        let q = Potential::bump(1.0, 0.5, 1.0, 0.08, 0.005, 20.0).unwrap().certified().unwrap();
        let g = gauge(&q).unwrap();
        let h = q.h();
        let norm2: f64 = g.phi.windows(2).map(|w| 0.5 * (w[0] * w[0] + w[1] * w[1]) * h).sum();
        assert!((g.eta_prime0 - norm2).abs() < 5e-5 * norm2, "{} vs {norm2}", g.eta_prime0);
    }

    #[test]
    fn phi_residual_is_second_order() {
        let residual = |h: f64| {
            let q = Potential::bump(1.0, 0.5, 1.0, 0.08, h, 12.0).unwrap().certified().unwrap();
            let (phi, _) = solve_phi(&q).unwrap();
            let upto = (8.0 / h) as usize;
            (1..upto)
                .map(|i| {
                    let d2 = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (h * h);
                    (-d2 + q.samples()[i] * phi[i]).abs()
                })
                .fold(0.0, f64::max)
        };
        let (r1, r2) = (residual(0.02), residual(0.01));
        assert!(r1 < 0.1 && r2 < r1 / 3.0, "r1 = {r1}, r2 = {r2}");
    }

    #[test]
    fn boundary_operator_examples() {
        let q = certified_const(1.0, 0.01, 20.0);
        let g = gauge(&q).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let bd = boundary_operators(one, zero, &g);
        assert_eq!(bd.gamma1_coeff, -one);
        assert!((bd.gamma2_coeff - Complex64::new(2.0, 0.0)).norm() < 1e-7);
        let on_phi = boundary_operators(one, Complex64::new(g.phi_prime0, 0.0), &g);
        assert_eq!(on_phi.gamma2_coeff, zero);
        let dom = boundary_operators(zero, zero, &g);
        assert_eq!((dom.gamma1_coeff, dom.gamma2_coeff), (-zero, zero));
    }

    #[test]
    fn vishik_parts_recombine() {
        let q = Potential::bump(1.0, 0.5, 1.0, 0.08, 0.01, 20.0).unwrap().certified().unwrap();
        let g = gauge(&q).unwrap();
        let y: Vec<f64> = (0..q.len()).map(|i| (q.x(i) * 1.3).cos() * (-q.x(i)).exp()).collect();
        let (rest, a, b) = vishik_parts(&y, -1.0, &g);
        for i in 0..y.len() {
            assert!((rest[i] + a[i] + b[i] - y[i]).abs() <= 4.0 * f64::EPSILON * (1.0 + y[i].abs()));
        }
        assert!(rest[0].abs() < 1e-15);
        let h = q.h();
        let d0 = (-3.0 * rest[0] + 4.0 * rest[1] - rest[2]) / (2.0 * h);
        assert!(d0.abs() < 1e-3, "y_0'(0) = {d0}");
    }

    #[test]
    fn psi_constant_closed_forms() {
        let q = Potential::constant(1.0, 0.01, 10.0).unwrap();
        let (psi, dpsi) = solve_psi(&q, 5.0);
        let k = 2.0f64;
        for i in (0..q.len()).step_by(53) {
            let x = q.x(i);
            assert!((psi[i] - (k * x).sin() / k).abs() < 1e-7);
            assert!((dpsi[i] - (k * x).cos()).abs() < 1e-7);
        }
        let (lin, _) = solve_psi(&q, 1.0);
        for i in 0..q.len() {
            assert!((lin[i] - q.x(i)).abs() < 1e-12);
        }
        assert!((psi[1] / q.x(1) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn psi_high_frequency_is_substepped() {
        let q = Potential::constant(0.0, 0.01, 10.0).unwrap();
        let lam = 40000.0f64;
        let (psi, _) = solve_psi(&q, lam);
        let k = lam.sqrt();
        let n = q.len() - 1;
        assert!((psi[n] - (k * q.x(n)).sin() / k).abs() < 1e-3 / k);
    }

    #[test]
    fn lagrange_identity() {
        let q = Potential::bump(1.0, 0.5, 1.0, 0.08, 0.005, 6.0).unwrap();
        let (lam, mu) = (7.0, 19.0);
        let (y, dy) = solve_psi(&q, lam);
        let (v, dv) = solve_psi(&q, mu);
        let h = q.h();
        let n = y.len() - 1;
        let integral: f64 = (0..n).map(|i| 0.5 * (y[i] * v[i] + y[i + 1] * v[i + 1]) * h).sum();
        let lhs = (lam - mu) * integral;
        let rhs = y[n] * dv[n] - dy[n] * v[n];
        assert!((lhs - rhs).abs() < 1e-4 * (1.0 + rhs.abs()), "lhs {lhs} rhs {rhs}");
    }
}
