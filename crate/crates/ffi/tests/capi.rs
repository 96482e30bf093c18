use std::ffi::{c_char, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bcwave_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { bcw_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn gauge_of_constant_potential() {
    let spec = CString::new("const:4").unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(bcw_potential_load(spec.as_ptr(), 0.005, 15.0, &mut p), BcwStatus::Ok);
        let (mut d_phi, mut d_eta) = (0.0, 0.0);
        assert_eq!(bcw_gauge(p, &mut d_phi, &mut d_eta), BcwStatus::Ok);
        assert!((d_phi + 2.0).abs() < 1e-6, "{d_phi}");
        // η'(0) = ‖φ‖² = 1/(2√c)
        assert!((d_eta - 0.25).abs() < 1e-5, "{d_eta}");
        bcw_potential_free(p);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut p = ptr::null_mut();
    unsafe {
        let bad = CString::new("const:-1").unwrap();
        assert_eq!(bcw_potential_load(bad.as_ptr(), 0.01, 5.0, &mut p), BcwStatus::Uncertified);
        assert!(p.is_null());
        assert!(last_error().starts_with("Uncertified"));
        let junk = CString::new("wobble:1").unwrap();
        assert_eq!(bcw_potential_load(junk.as_ptr(), 0.01, 5.0, &mut p), BcwStatus::Io);
        assert_eq!(bcw_potential_load(ptr::null(), 0.01, 5.0, &mut p), BcwStatus::NullPointer);
        assert_eq!(bcw_measure_len(ptr::null()), 0);
        bcw_measure_free(ptr::null_mut());
    }
}

#[test]
fn forward_reports_short_buffers() {
    let q = vec![1.0; 201];
    let f: Vec<f64> = (0..=100).map(|j| bcwave::wave::smooth_bump((j as f64 * 0.01 - 0.5) / 0.3)).collect();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(bcw_potential_from_samples(q.as_ptr(), q.len(), 0.01, &mut p), BcwStatus::Ok);
        let mut u = vec![0.0; 10];
        let mut n = 0;
        assert_eq!(
            bcw_forward_final(p, f.as_ptr(), f.len(), 1.0, u.as_mut_ptr(), u.len(), &mut n),
            BcwStatus::BufferTooSmall
        );
        let mut u = vec![0.0; 101];
        assert_eq!(bcw_forward_final(p, f.as_ptr(), f.len(), 1.0, u.as_mut_ptr(), u.len(), &mut n), BcwStatus::Ok);
        assert_eq!(n, 101);
        assert!(u.iter().any(|v| v.abs() > 0.1));
        bcw_potential_free(p);
    }
}

#[test]
fn invert_closed_form_measure() {
    let mu = bcwave::spectral::SpectralMeasure::constant(1.0, 10.0, 4e4).unwrap();
    let mut m = ptr::null_mut();
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(bcw_measure_from_arrays(mu.nodes.as_ptr(), mu.weights.as_ptr(), mu.len(), &mut m), BcwStatus::Ok);
        assert_eq!(bcw_measure_len(m), mu.len());
        let bad = CString::new("n_controls = x").unwrap();
        assert_eq!(bcw_invert(m, bad.as_ptr(), &mut r), BcwStatus::Parse);
        assert_eq!(bcw_invert(m, ptr::null(), &mut r), BcwStatus::Ok);
        let n = bcw_reconstruction_len(r);
        let (mut tau, mut q) = (vec![0.0; n], vec![0.0; n]);
        let null = ptr::null_mut();
        assert_eq!(bcw_reconstruction_copy(r, tau.as_mut_ptr(), null, null, null, q.as_mut_ptr(), n), BcwStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(bcw_reconstruction_trusted(r, &mut a, &mut b), BcwStatus::Ok);
        let err =
            tau.iter().zip(&q).filter(|(t, _)| **t >= a && **t <= b).map(|(_, v)| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err <= 0.05, "{err}");
        bcw_reconstruction_free(r);
        bcw_measure_free(m);
    }
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/bcwave.h");
    for name in [
        "bcw_last_error",
        "bcw_potential_load",
        "bcw_potential_free",
        "bcw_measure_truncated",
        "bcw_measure_read_csv",
        "bcw_invert",
        "bcw_reconstruction_copy",
        "typedef struct BcwPotential BcwPotential",
        "BCW_STATUS_RANK_COLLAPSE = 8",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles a small C program against the header and the static library.
#[test]
fn c_program_links() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let lib_dir = target.parent().unwrap().join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let lib = lib_dir.join("libbcwave_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let src = target.join("capi_smoke.c");
    std::fs::write(
        &src,
        r#"#include "bcwave.h"
#include <stdio.h>
int main(void) {
    BcwPotential *p = NULL;
    BcwMeasure *m = NULL;
    if (bcw_potential_load("const:1", 0.01, 6.0, &p) != BCW_STATUS_OK) return 1;
    if (bcw_measure_truncated(p, 6.0, 100.0, &m) != BCW_STATUS_OK) return 2;
    size_t n = bcw_measure_len(m);
    double nodes[64], weights[64];
    if (n == 0 || n > 64 || bcw_measure_copy(m, nodes, weights, 64) != BCW_STATUS_OK) return 3;
    if (bcw_potential_load("const:-1", 0.01, 6.0, &p) != BCW_STATUS_UNCERTIFIED) return 4;
    char msg[128];
    bcw_last_error(msg, sizeof msg);
    printf("%zu %.6f %s\n", n, nodes[0], msg);
    bcw_measure_free(m);
    bcw_potential_free(p);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = target.join("capi_smoke");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Uncertified"), "{text}");
}
