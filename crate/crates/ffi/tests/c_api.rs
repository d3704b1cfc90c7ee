use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use fdrd_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        fdrd_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn prabhakar_matches_exponential() {
    let mut v = 0.0;
    let s = unsafe { fdrd_prabhakar(1.0, 1.0, 1.0, 0.7, &mut v) };
    assert_eq!(s, FdrdStatus::Ok);
    assert!((v - 0.7_f64.exp()).abs() < 1e-14);
}

#[test]
fn null_out_pointer_is_reported() {
    let s = unsafe { fdrd_prabhakar(1.0, 1.0, 1.0, 0.7, ptr::null_mut()) };
    assert_eq!(s, FdrdStatus::NullPointer);
    assert!(last_error().contains("out"));
}

#[test]
fn problem_round_trip() {
    // alpha = 1, delta = 0: A(t) = e^{lambda t} A(0) + c0 (e^{lambda t} - 1) / lambda.
    let (taus, deltas, hist) = ([1.0], [0.0], [2.0]);
    let mut p = ptr::null_mut();
    let s = unsafe {
        fdrd_problem_new(1.0, -0.5, 0.25, taus.as_ptr(), deltas.as_ptr(), 1, hist.as_ptr(), 1, &mut p)
    };
    assert_eq!(s, FdrdStatus::Ok);
    for t in [-0.5, 0.3, 1.7] {
        let mut v = 0.0;
        assert_eq!(unsafe { fdrd_problem_eval(p, t, &mut v) }, FdrdStatus::Ok);
        let want = if t <= 0.0 {
            2.0
        } else {
            let e = (-0.5 * t).exp();
            2.0 * e + 0.25 * (e - 1.0) / -0.5
        };
        assert!((v - want).abs() < 1e-12, "t = {t}: {v} vs {want}");
    }
    unsafe { fdrd_problem_free(p) };
}

#[test]
fn bad_problem_is_invalid_argument() {
    let (taus, deltas, hist) = ([-1.0], [0.1], [1.0]);
    let mut p = ptr::null_mut();
    let s = unsafe {
        fdrd_problem_new(0.5, -1.0, 0.0, taus.as_ptr(), deltas.as_ptr(), 1, hist.as_ptr(), 1, &mut p)
    };
    assert_eq!(s, FdrdStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn solution_handle() {
    let name = CString::new("trig3d_H1").unwrap();
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { fdrd_solution_new(name.as_ptr(), ptr::null(), &mut sol) }, FdrdStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { fdrd_solution_dim(sol, &mut dim) }, FdrdStatus::Ok);
    assert_eq!(dim, 3);

    let mut needed = 0;
    let mut small = [0.0; 2];
    let s = unsafe { fdrd_solution_coefficients(sol, 0.5, small.as_mut_ptr(), 2, &mut needed) };
    assert_eq!(s, FdrdStatus::BufferTooSmall);
    assert_eq!(needed, 3);

    let mut a = [0.0; 3];
    let s = unsafe { fdrd_solution_coefficients(sol, 0.5, a.as_mut_ptr(), 3, ptr::null_mut()) };
    assert_eq!(s, FdrdStatus::Ok);
    let mut u = 0.0;
    assert_eq!(unsafe { fdrd_solution_eval(sol, 0.4, 0.5, &mut u) }, FdrdStatus::Ok);
    // Basis {1, cos x, sin x}.
    let want = a[0] + a[1] * 0.4_f64.cos() + a[2] * 0.4_f64.sin();
    assert!((u - want).abs() < 1e-12);
    unsafe { fdrd_solution_free(sol) };
}

#[test]
fn solution_errors() {
    let name = CString::new("no_such").unwrap();
    let mut sol = ptr::null_mut();
    let s = unsafe { fdrd_solution_new(name.as_ptr(), ptr::null(), &mut sol) };
    assert_eq!(s, FdrdStatus::InvalidArgument);

    let name = CString::new("exp1d_H1").unwrap();
    let params = CString::new(
        r#"{"alpha":1.5,"a":1,"b":[0.5],"c1":-1,"c0":0,"delays":[{"tau":1,"delta":0.2}],"histories":[{"polynomial":[1]}]}"#,
    )
    .unwrap();
    let s = unsafe { fdrd_solution_new(name.as_ptr(), params.as_ptr(), &mut sol) };
    assert_eq!(s, FdrdStatus::InvalidArgument);
    assert!(last_error().contains("alpha"));
    unsafe { fdrd_solution_free(ptr::null_mut()) };
}

#[test]
fn run_config_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CString::new(r#"{"schema_version":1,"command":"invariance","invariance":{"trials":10,"tol":1e-9,"entries":["H1/poly-3d"],"interval":[0.1,2.1],"points_per_dim":8}}"#).unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fdrd_run_config(cfg.as_ptr(), out.as_ptr()) }, FdrdStatus::Ok);
    let csv = std::fs::read_to_string(dir.path().join("invariance.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.ends_with(",invariant\n"));

    let bad = CString::new(r#"{"schema_version":2,"command":"invariance"}"#).unwrap();
    assert_eq!(unsafe { fdrd_run_config(bad.as_ptr(), out.as_ptr()) }, FdrdStatus::InvalidArgument);
    assert!(last_error().contains("schema_version"));
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "fdrd.h"

int main(void) {
    double v = 0.0;
    if (fdrd_prabhakar(1.0, 1.0, 1.0, 1.0, &v) != FDRD_STATUS_OK) return 1;
    if (fabs(v - exp(1.0)) > 1e-14) return 2;
    FdrdSolution *s = NULL;
    if (fdrd_solution_new("exp1d_H2", NULL, &s) != FDRD_STATUS_OK) return 3;
    double u = 0.0;
    if (fdrd_solution_eval(s, 0.5, 1.0, &u) != FDRD_STATUS_OK) return 4;
    fdrd_solution_free(s);
    if (fdrd_solution_new("bogus", NULL, &s) != FDRD_STATUS_INVALID_ARGUMENT) return 5;
    char msg[128];
    if (fdrd_last_error(msg, sizeof msg) == 0) return 6;
    printf("%.17g\n", u);
    return 0;
}
"#;

/// Compile and run a small C client against the static library, when a C
/// compiler is available.
#[test]
fn c_client_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let target = exe.parent().unwrap().parent().unwrap();
    let lib = target.join("libfdrd_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.path().join("client");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C client failed to build");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C client exited with {:?}", out.status.code());
    let u: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(u.is_finite());
}
