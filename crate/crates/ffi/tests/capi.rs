use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use wvtorus_ffi::*;

fn identity(c: WvContinuity) -> *mut WvMeasure {
    let mut m = ptr::null_mut();
    let st = unsafe { wv_measure_new(c, [0.0].as_ptr(), [1.0].as_ptr(), 1, ptr::null(), ptr::null(), 0, &mut m) };
    assert_eq!(st, WvStatus::WvOk);
    m
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { wv_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn measure_round_trip_and_atom_sides() {
    let mut w = ptr::null_mut();
    let st = unsafe {
        wv_measure_new(WvContinuity::WvCadlag, [0.0, 0.25].as_ptr(), [0.5, 2.0].as_ptr(), 2, [0.25].as_ptr(), [1.375].as_ptr(), 1, &mut w)
    };
    assert_eq!(st, WvStatus::WvOk);
    let (mut l, mut r) = (0.0, 0.0);
    unsafe {
        assert_eq!(wv_measure_eval(w, 0.25, WvSide::WvLeft, &mut l), WvStatus::WvOk);
        assert_eq!(wv_measure_eval(w, 0.25, WvSide::WvRight, &mut r), WvStatus::WvOk);
        wv_measure_free(w);
    }
    assert_eq!(l, 0.125);
    assert_eq!(r, 1.5);
}

#[test]
fn flat_segment_is_rejected_with_message() {
    let mut m = ptr::null_mut();
    let st = unsafe { wv_measure_new(WvContinuity::WvCadlag, [0.0].as_ptr(), [0.0].as_ptr(), 1, ptr::null(), ptr::null(), 0, &mut m) };
    assert_eq!(st, WvStatus::WvInvalidMeasure);
    assert!(m.is_null());
    assert!(last_error().contains("strict monotonicity"));
}

#[test]
fn null_and_short_buffers() {
    let st = unsafe { wv_measure_total(ptr::null(), ptr::null_mut()) };
    assert_eq!(st, WvStatus::WvNullPointer);
    let w = identity(WvContinuity::WvCadlag);
    let v = identity(WvContinuity::WvCaglad);
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { wv_mesh_new(w, v, 8, &mut mesh) }, WvStatus::WvOk);
    let mut pts = [0.0; 4];
    assert_eq!(unsafe { wv_mesh_points(mesh, pts.as_mut_ptr(), pts.len()) }, WvStatus::WvBufferTooSmall);
    unsafe {
        wv_mesh_free(mesh);
        wv_measure_free(w);
        wv_measure_free(v);
    }
}

#[test]
fn classical_spectrum_and_paths() {
    let w = identity(WvContinuity::WvCadlag);
    let v = identity(WvContinuity::WvCaglad);
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { wv_mesh_new(w, v, 128, &mut mesh) }, WvStatus::WvOk);
    let mut n = 0;
    unsafe { wv_mesh_cells(mesh, &mut n) };
    assert_eq!(n, 128);

    let mut vals = [0.0; 5];
    let mut count = 0;
    let st = unsafe { wv_eigenvalues(mesh, 1.0, 0.0, false, false, 5, vals.as_mut_ptr(), vals.len(), &mut count) };
    assert_eq!(st, WvStatus::WvOk);
    assert_eq!(count, 5);
    let four_pi2 = 4.0 * std::f64::consts::PI.powi(2);
    assert!(vals[0].abs() < 1e-8);
    for (got, want) in vals[1..].iter().zip([1.0, 1.0, 4.0, 4.0]) {
        assert!((got / (want * four_pi2) - 1.0).abs() < 1e-2);
    }

    let mut shot = [0.0; 8];
    let st = unsafe { wv_shooting_eigenvalues(w, v, 170.0, 2000, shot.as_mut_ptr(), shot.len(), &mut count) };
    assert_eq!(st, WvStatus::WvOk);
    assert_eq!(count, 4);
    assert!((shot[0] / four_pi2 - 1.0).abs() < 1e-8);

    let mut right = vec![0.0; n + 1];
    let mut left = vec![0.0; n + 1];
    let st = unsafe { wv_sample_path(mesh, 3, 0, true, right.as_mut_ptr(), left.as_mut_ptr(), n + 1) };
    assert_eq!(st, WvStatus::WvOk);
    assert_eq!(right[0], 0.0);
    assert_eq!(right[n], 0.0);
    assert_eq!(right, left);

    let mut u = vec![1.0; n];
    let st = unsafe { wv_spde_solve(mesh, 1.0, 1.0, 3, 0, u.as_mut_ptr(), n) };
    assert_eq!(st, WvStatus::WvOk);
    assert_eq!(u[0], 0.0);
    assert!(u.iter().any(|&x| x != 0.0));

    let st = unsafe { wv_spde_solve(mesh, 0.0, 1.0, 3, 0, u.as_mut_ptr(), n) };
    assert_eq!(st, WvStatus::WvCoefficientBounds);

    let mut c = 0.0;
    unsafe { wv_covariance(w, 0.4, 0.4, true, &mut c) };
    assert!((c - 0.24).abs() < 1e-15);
    unsafe {
        wv_mesh_free(mesh);
        wv_measure_free(w);
        wv_measure_free(v);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(wv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/wvtorus.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).expect("build script writes the header");
    for name in [
        "wv_version", "wv_last_error", "wv_measure_new", "wv_measure_free", "wv_measure_eval", "wv_measure_total",
        "wv_covariance", "wv_mesh_new", "wv_mesh_free", "wv_mesh_cells", "wv_mesh_points", "wv_eigenvalues",
        "wv_shooting_eigenvalues", "wv_sample_path", "wv_spde_solve", "wv_status_code",
        "typedef struct WvMeasure WvMeasure", "typedef struct WvMesh WvMesh",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

/// Compiles a C client against the header and links it to the static library.
#[test]
fn c_client_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libwvtorus_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("client.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "wvtorus.h"
int main(void) {
    WvMeasure *w = NULL, *v = NULL;
    WvMesh *mesh = NULL;
    double bp[1] = {0.0}, slope[1] = {1.0}, ax[1] = {0.5}, am[1] = {0.25};
    if (wv_measure_new(WV_CADLAG, bp, slope, 1, ax, am, 1, &w) != WV_OK) return 1;
    if (wv_measure_new(WV_CAGLAD, bp, slope, 1, NULL, NULL, 0, &v) != WV_OK) return 2;
    if (wv_mesh_new(w, v, 16, &mesh) != WV_OK) return 3;
    double vals[3];
    size_t count = 0;
    if (wv_eigenvalues(mesh, 1.0, 0.0, false, false, 3, vals, 3, &count) != WV_OK || count != 3) return 4;
    double bad[1] = {0.0};
    WvMeasure *flat = NULL;
    if (wv_measure_new(WV_CADLAG, bp, bad, 1, NULL, NULL, 0, &flat) != WV_INVALID_MEASURE) return 5;
    char msg[128];
    wv_last_error(msg, sizeof msg);
    printf("%.6f %.6f %s\n", vals[1], vals[2], msg);
    wv_mesh_free(mesh);
    wv_measure_free(w);
    wv_measure_free(v);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = tmp.path().join("client");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("strict monotonicity"), "{text}");
}
