use std::f64::consts::PI;
use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use robin_spectra_ffi::*;

const D: RsBoundary = RsBoundary { kind: RsBoundaryKind::Dirichlet, beta: 0.0 };
const N: RsBoundary = RsBoundary { kind: RsBoundaryKind::Neumann, beta: 0.0 };

fn robin(beta: f64) -> RsBoundary {
    RsBoundary { kind: RsBoundaryKind::Robin, beta }
}

fn sigma(est: *const RsEstimate) -> f64 {
    let mut v = f64::NAN;
    assert_eq!(unsafe { rs_estimate_sigma(est, &mut v) }, RsStatus::Ok);
    v
}

#[test]
fn interval_round_trip() {
    let mut est = ptr::null_mut();
    assert_eq!(unsafe { rs_exact1d(1.0, D, N, &mut est) }, RsStatus::Ok);
    assert!((sigma(est) - PI * PI / 4.0).abs() < 1e-12);
    let mut v = 0.0;
    assert_eq!(unsafe { rs_estimate_eval(est, 1.0, &mut v) }, RsStatus::Ok);
    assert!((v - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { rs_estimate_eval(est, 2.0, &mut v) }, RsStatus::SolverFailure);
    assert_eq!(unsafe { rs_estimate_eval_xy(est, 0.0, 0.0, &mut v) }, RsStatus::SolverFailure);
    unsafe { rs_estimate_free(est) };

    assert_eq!(unsafe { rs_exact1d(3.0, robin(2.0), robin(-2.0), &mut est) }, RsStatus::Ok);
    assert_eq!(sigma(est), -4.0);
    unsafe { rs_estimate_free(est) };
}

#[test]
fn meshes_and_fem() {
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { rs_mesh_disk(1.0, 32, &mut mesh) }, RsStatus::Ok);
    let (mut nv, mut nt) = (0usize, 0usize);
    assert_eq!(unsafe { rs_mesh_size(mesh, &mut nv, &mut nt) }, RsStatus::Ok);
    assert!(nv > 100 && nt > nv);

    let mut fem = ptr::null_mut();
    let b = robin(1.0);
    assert_eq!(unsafe { rs_fem(mesh, &b, &mut fem) }, RsStatus::Ok);
    let mut ball = ptr::null_mut();
    assert_eq!(unsafe { rs_ball(2, 1.0, b, &mut ball) }, RsStatus::Ok);
    assert!((sigma(fem) - sigma(ball)).abs() < 1e-2 * sigma(ball));
    let mut centre = 0.0;
    assert_eq!(unsafe { rs_estimate_eval_xy(fem, 0.0, 0.0, &mut centre) }, RsStatus::Ok);
    assert!(centre > 0.9);

    // Neumann tags from the generator give σ = 0
    let mut free = ptr::null_mut();
    assert_eq!(unsafe { rs_fem(mesh, ptr::null(), &mut free) }, RsStatus::Ok);
    assert!(sigma(free).abs() < 1e-8);
    unsafe {
        rs_estimate_free(fem);
        rs_estimate_free(ball);
        rs_estimate_free(free);
        rs_mesh_free(mesh);
    }
}

#[test]
fn parsed_mesh_with_tags() {
    let text = c"VERTICES\n0 0\n1 0\n1 1\n0 1\nTRIANGLES\n0 1 2\n0 2 3\nBOUNDARY\n0 1 D\n1 2 D\n2 3 D\n3 0 D\n";
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { rs_mesh_parse(text.as_ptr(), &mut mesh) }, RsStatus::Ok);
    let mut est = ptr::null_mut();
    // every vertex is on a Dirichlet edge: nothing left to solve for
    assert_eq!(unsafe { rs_fem(mesh, ptr::null(), &mut est) }, RsStatus::InvalidArgument);
    assert!(est.is_null());
    unsafe { rs_mesh_free(mesh) };
}

#[test]
fn failures_set_the_message() {
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { rs_mesh_parse(c"VERTICES\n0 0\nTRIANGLES\n0 1 7\n".as_ptr(), &mut mesh) }, RsStatus::ParseError);
    let msg = unsafe { CStr::from_ptr(rs_last_error()) }.to_str().unwrap().to_owned();
    assert!(msg.contains("line"), "{msg}");
    assert_eq!(unsafe { rs_mesh_size(ptr::null(), ptr::null_mut(), ptr::null_mut()) }, RsStatus::NullPointer);
    unsafe {
        rs_mesh_free(ptr::null_mut());
        rs_estimate_free(ptr::null_mut());
    }
    let mut est = ptr::null_mut();
    assert_eq!(unsafe { rs_exact1d(1.0, D, D, &mut est) }, RsStatus::Ok);
    assert!(unsafe { CStr::from_ptr(rs_last_error()) }.to_bytes().is_empty());
    unsafe { rs_estimate_free(est) };
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(rs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

// Compiles a small C program against the generated header and the static
// library, checking that the header matches the exported symbols.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("librobin_spectra_ffi.a");
    if !lib.exists() {
        let status = Command::new(env!("CARGO")).args(["build", "-p", "robin-spectra-ffi", "--lib"]).status().unwrap();
        assert!(status.success());
    }
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include "robin_spectra.h"
int main(void) {
    RsBoundary d = { RS_BOUNDARY_KIND_DIRICHLET, 0.0 };
    RsEstimate *est = NULL;
    if (rs_exact1d(1.0, d, d, &est) != RS_STATUS_OK) return 2;
    double s = 0.0;
    rs_estimate_sigma(est, &s);
    rs_estimate_free(est);
    if (rs_exact1d(-1.0, d, d, &est) != RS_STATUS_INVALID_ARGUMENT) return 3;
    printf("%.15f %s\n", s, rs_last_error());
    return fabs(s - 9.869604401089358) < 1e-12 ? 0 : 1;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let compile = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .expect("C compiler");
    assert!(compile.status.success(), "{}", String::from_utf8_lossy(&compile.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status, String::from_utf8_lossy(&run.stdout));
    assert!(String::from_utf8_lossy(&run.stdout).contains("length must be positive"));
}
