//! C ABI over `bcwave`.
//!
//! Objects cross the boundary as opaque handles created by `bcw_*_new`-style
//! constructors and released with the matching `bcw_*_free`. Every fallible
//! call returns a [`BcwStatus`]; the message of the last failure on the
//! calling thread is available from [`bcw_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use bcwave::inverse::{recover_potential, Reconstruction, ReconstructionConfig};
use bcwave::spectral::{truncated_measure, MeasureKind, SpectralMeasure};
use bcwave::wave::{forward_fd, Control};
use bcwave::{sl, BcError, Potential};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcwStatus {
    Ok = 0,
    NoDecayingSolution = 1,
    DegenerateEta = 2,
    GridMismatch = 3,
    NonConvergence = 4,
    NoEigenvalues = 5,
    GaugeZero = 6,
    IllConditioned = 7,
    RankCollapse = 8,
    Uncertified = 9,
    InvalidArgument = 10,
    Parse = 11,
    Io = 12,
    NullPointer = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

/// A sampled potential `q` on `x_i = i h`.
pub struct BcwPotential(Potential);

/// A discrete spectral measure `(λ_n, ρ_n)`.
pub struct BcwMeasure(SpectralMeasure);

/// Output of the inverse pipeline.
pub struct BcwReconstruction(Reconstruction);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &BcError) -> BcwStatus {
    match e {
        BcError::NoDecayingSolution(_) => BcwStatus::NoDecayingSolution,
        BcError::DegenerateEta(_) => BcwStatus::DegenerateEta,
        BcError::GridMismatch(_) => BcwStatus::GridMismatch,
        BcError::NonConvergence { .. } => BcwStatus::NonConvergence,
        BcError::NoEigenvalues { .. } => BcwStatus::NoEigenvalues,
        BcError::GaugeZero { .. } => BcwStatus::GaugeZero,
        BcError::IllConditioned(_) => BcwStatus::IllConditioned,
        BcError::RankCollapse { .. } => BcwStatus::RankCollapse,
        BcError::Uncertified => BcwStatus::Uncertified,
        BcError::InvalidArgument(_) => BcwStatus::InvalidArgument,
        BcError::Parse(_) => BcwStatus::Parse,
        BcError::Io(_) => BcwStatus::Io,
    }
}

enum Fail {
    Domain(BcError),
    Null(&'static str),
    Buffer(usize),
}

impl From<BcError> for Fail {
    fn from(e: BcError) -> Self {
        Fail::Domain(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BcwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BcwStatus::Ok,
        Ok(Err(Fail::Domain(e))) => {
            set_error(format!("{}: {e}", e.name()));
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("NullPointer: {what} is null"));
            BcwStatus::NullPointer
        }
        Ok(Err(Fail::Buffer(need))) => {
            set_error(format!("BufferTooSmall: need {need} elements"));
            BcwStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("Panic: internal error".into());
            BcwStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail::Domain(BcError::Parse(format!("{what} is not UTF-8: {e}"))))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn out_slice<'a>(p: *mut f64, cap: usize, need: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    if cap < need {
        return Err(Fail::Buffer(need));
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bcw_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Loads `const:c`, `bump:c,amp,center,width` or a CSV path and certifies
/// positivity.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcw_potential_load(
    spec: *const c_char,
    h: f64,
    x_max: f64,
    out: *mut *mut BcwPotential,
) -> BcwStatus {
    guard(|| {
        let q = Potential::load(str_arg(spec, "spec")?, h, x_max)?.certified()?;
        put(out, BcwPotential(q))
    })
}

/// Builds a certified potential from samples on `x_i = i h`.
///
/// # Safety
/// `q` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcw_potential_from_samples(
    q: *const f64,
    n: usize,
    h: f64,
    out: *mut *mut BcwPotential,
) -> BcwStatus {
    guard(|| {
        let p = Potential::from_samples(slice_arg(q, n, "q")?.to_vec(), h)?.certified()?;
        put(out, BcwPotential(p))
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bcw_potential_free(p: *mut BcwPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `φ'(0)` and `η'(0)` of the gauge pair.
///
/// # Safety
/// `p` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcw_gauge(p: *const BcwPotential, phi_prime0: *mut f64, eta_prime0: *mut f64) -> BcwStatus {
    guard(|| {
        let g = sl::gauge(&borrow(p, "potential")?.0)?;
        if phi_prime0.is_null() || eta_prime0.is_null() {
            return Err(Fail::Null("output"));
        }
        *phi_prime0 = g.phi_prime0;
        *eta_prime0 = g.eta_prime0;
        Ok(())
    })
}

/// `u^f(·, T)` on `x_i = i h`, `i = 0..=T/h`, by finite differences. The
/// control is sampled on the potential's grid.
///
/// # Safety
/// `f` must point to `nf` doubles and `u` to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bcw_forward_final(
    p: *const BcwPotential,
    f: *const f64,
    nf: usize,
    t: f64,
    u: *mut f64,
    cap: usize,
    written: *mut usize,
) -> BcwStatus {
    guard(|| {
        let q = &borrow(p, "potential")?.0;
        let control = Control::new(slice_arg(f, nf, "f")?.to_vec(), q.h())?;
        let w = forward_fd(q, &control, t)?;
        let last = w.last();
        out_slice(u, cap, last.len(), "u")?.copy_from_slice(last);
        if !written.is_null() {
            *written = last.len();
        }
        Ok(())
    })
}

/// Dirichlet spectral measure of `q` on `[0, x]` truncated at `lambda_max`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcw_measure_truncated(
    p: *const BcwPotential,
    x: f64,
    lambda_max: f64,
    out: *mut *mut BcwMeasure,
) -> BcwStatus {
    guard(|| {
        let mu = truncated_measure(&borrow(p, "potential")?.0, x, lambda_max)?;
        put(out, BcwMeasure(mu))
    })
}

/// # Safety
/// `nodes` and `weights` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcw_measure_from_arrays(
    nodes: *const f64,
    weights: *const f64,
    n: usize,
    out: *mut *mut BcwMeasure,
) -> BcwStatus {
    guard(|| {
        let mu = SpectralMeasure::new(
            slice_arg(nodes, n, "nodes")?.to_vec(),
            slice_arg(weights, n, "weights")?.to_vec(),
            MeasureKind::TruncatedDiscrete,
        )?;
        put(out, BcwMeasure(mu))
    })
}

/// Reads a `lambda,rho` CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcw_measure_read_csv(path: *const c_char, out: *mut *mut BcwMeasure) -> BcwStatus {
    guard(|| {
        let file = File::open(str_arg(path, "path")?).map_err(BcError::from)?;
        put(out, BcwMeasure(SpectralMeasure::read_csv(BufReader::new(file))?))
    })
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bcw_measure_len(m: *const BcwMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `nodes` and `weights` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bcw_measure_copy(
    m: *const BcwMeasure,
    nodes: *mut f64,
    weights: *mut f64,
    cap: usize,
) -> BcwStatus {
    guard(|| {
        let mu = &borrow(m, "measure")?.0;
        out_slice(nodes, cap, mu.len(), "nodes")?.copy_from_slice(&mu.nodes);
        out_slice(weights, cap, mu.len(), "weights")?.copy_from_slice(&mu.weights);
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bcw_measure_free(m: *mut BcwMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Reconstructs `q` from the measure alone. `config` is `key = value` text;
/// null selects the defaults.
///
/// # Safety
/// `m` must be a live handle, `config` null or NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bcw_invert(
    m: *const BcwMeasure,
    config: *const c_char,
    out: *mut *mut BcwReconstruction,
) -> BcwStatus {
    guard(|| {
        let mu = &borrow(m, "measure")?.0;
        let cfg = if config.is_null() {
            ReconstructionConfig::default()
        } else {
            ReconstructionConfig::parse(str_arg(config, "config")?)?
        };
        put(out, BcwReconstruction(recover_potential(mu, &cfg)?))
    })
}

/// Length of the coordinate grid, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bcw_reconstruction_len(r: *const BcwReconstruction) -> usize {
    r.as_ref().map_or(0, |r| r.0.model.tau.len())
}

/// Copies `tau`, `p`, `Q`, `e` and `q_rec`; any output may be null to skip it.
///
/// # Safety
/// Non-null outputs must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bcw_reconstruction_copy(
    r: *const BcwReconstruction,
    tau: *mut f64,
    p: *mut f64,
    q_coef: *mut f64,
    e: *mut f64,
    q_rec: *mut f64,
    cap: usize,
) -> BcwStatus {
    guard(|| {
        let m = &borrow(r, "reconstruction")?.0.model;
        for (dst, src) in [(tau, &m.tau), (p, &m.p), (q_coef, &m.q_coef), (e, &m.e), (q_rec, &m.q_rec)] {
            if !dst.is_null() {
                out_slice(dst, cap, src.len(), "output")?.copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Endpoints of the trusted `τ`-interval.
///
/// # Safety
/// `r` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcw_reconstruction_trusted(
    r: *const BcwReconstruction,
    a: *mut f64,
    b: *mut f64,
) -> BcwStatus {
    guard(|| {
        let (lo, hi) = borrow(r, "reconstruction")?.0.diagnostics.trusted;
        if a.is_null() || b.is_null() {
            return Err(Fail::Null("output"));
        }
        *a = lo;
        *b = hi;
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bcw_reconstruction_free(r: *mut BcwReconstruction) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
