use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use wldos_ffi::*;

fn last_error() -> String {
    let p = wldos_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn params(method: WldosMethod) -> WldosParams {
    WldosParams {
        eta_inv: 5.0,
        kappa: 2.0,
        method,
        order: 14,
        alpha: 0.2,
    }
}

#[test]
fn dimer_spectrum_and_wldos() {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { wldos_model_periodic(1, 2.15, 2.85, false, &mut m) },
        WldosStatus::Ok
    );
    let mut n = 0;
    assert_eq!(unsafe { wldos_model_n_orbitals(m, &mut n) }, WldosStatus::Ok);
    assert_eq!(n, 2);

    let mut buf = [0.0; 2];
    let mut written = 0;
    assert_eq!(
        unsafe { wldos_spectrum(m, buf.as_mut_ptr(), 2, &mut written) },
        WldosStatus::Ok
    );
    assert_eq!(written, 2);
    assert!((buf[0] + 2.15).abs() < 1e-14 && (buf[1] - 2.15).abs() < 1e-14);

    // W_0(E) = f(-2.15 - E) + f(2.15 - E) for a window covering both orbitals
    let mut v = WldosValue::default();
    let p = params(WldosMethod::Dense);
    assert_eq!(unsafe { wldos_evaluate(m, &p, 0.0, 2.15, &mut v) }, WldosStatus::Ok);
    let expect = 1.0 + (-(5.0f64 * 4.3).powi(2)).exp();
    assert!((v.value - expect).abs() < 1e-12, "{}", v.value);
    assert_eq!(v.budget_polynomial, 0.0);
    unsafe { wldos_model_free(m) };
}

#[test]
fn errors_set_status_and_message() {
    let mut m = ptr::null_mut();
    let st = unsafe { wldos_model_fibonacci(0, 2.15, 3.04, 2.73, true, &mut m) };
    assert_eq!(st, WldosStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(last_error().contains("stage"), "{}", last_error());

    let st = unsafe { wldos_model_fibonacci(3, 2.15, 3.04, 2.73, true, ptr::null_mut()) };
    assert_eq!(st, WldosStatus::NullPointer);

    let mut v = WldosValue::default();
    let p = params(WldosMethod::Dense);
    assert_eq!(
        unsafe { wldos_evaluate(ptr::null(), &p, 0.0, 0.0, &mut v) },
        WldosStatus::NullPointer
    );
    assert!(last_error().contains("model"));

    // success clears the message
    assert_eq!(
        unsafe { wldos_model_fibonacci(3, 2.15, 3.04, 2.73, true, &mut m) },
        WldosStatus::Ok
    );
    assert!(wldos_last_error_message().is_null());

    let mut small = [0.0; 3];
    let mut need = 0;
    let st = unsafe { wldos_spectrum(m, small.as_mut_ptr(), 3, &mut need) };
    assert_eq!(st, WldosStatus::BufferTooSmall);
    assert_eq!(need, 18);

    let bad = WldosParams { kappa: -1.0, ..p };
    assert_eq!(
        unsafe { wldos_evaluate(m, &bad, 0.0, 0.0, &mut v) },
        WldosStatus::InvalidArgument
    );
    unsafe { wldos_model_free(m) };
    unsafe { wldos_model_free(ptr::null_mut()) };
}

#[test]
fn grid_matches_pointwise() {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { wldos_model_segment(2.15, 3.04, 2.73, WldosRegion::Bulk, 12.0, &mut m) },
        WldosStatus::Ok
    );
    let xs = [-1.0, 0.0, 2.5];
    let es = [-2.0, 0.0, 1.5, 4.0];
    for method in [WldosMethod::Dense, WldosMethod::Kpm, WldosMethod::Truncated] {
        let p = params(method);
        let mut grid = vec![WldosValue::default(); 12];
        assert_eq!(
            unsafe { wldos_grid(m, &p, xs.as_ptr(), 3, es.as_ptr(), 4, 1, grid.as_mut_ptr()) },
            WldosStatus::Ok
        );
        for (i, &x) in xs.iter().enumerate() {
            for (k, &e) in es.iter().enumerate() {
                let mut v = WldosValue::default();
                assert_eq!(unsafe { wldos_evaluate(m, &p, x, e, &mut v) }, WldosStatus::Ok);
                assert_eq!(v, grid[i * 4 + k]);
            }
        }
    }
    let mut idos = [0.0; 3];
    let es = [-100.0, 0.0, 100.0];
    assert_eq!(
        unsafe { wldos_idos(m, es.as_ptr(), 3, idos.as_mut_ptr()) },
        WldosStatus::Ok
    );
    assert_eq!(idos[0], 0.0);
    assert_eq!(idos[2], 1.0);
    unsafe { wldos_model_free(m) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(wldos_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wldos.h")
}

#[test]
fn header_declares_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "wldos_version",
        "wldos_last_error_message",
        "wldos_model_fibonacci",
        "wldos_model_periodic",
        "wldos_model_segment",
        "wldos_model_free",
        "wldos_model_n_orbitals",
        "wldos_model_positions",
        "wldos_spectrum",
        "wldos_idos",
        "wldos_evaluate",
        "wldos_grid",
        "typedef struct WldosModel WldosModel",
        "WLDOS_STATUS_OK = 0",
        "WLDOS_STATUS_CAP_EXCEEDED = 3",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

/// Compiles a small C program against the header and the static library.
/// Skipped when no C compiler or no built archive is around.
#[test]
fn c_program_links_and_runs() {
    let target = std::env::var_os("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target"));
    let profile_dir = std::env::current_exe()
        .ok()
        .and_then(|p| p.parent()?.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| target.join("debug"));
    let lib = profile_dir.join("libwldos_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no archive at {} or no cc", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "wldos.h"
int main(void) {
    WldosModel *m = NULL;
    if (wldos_model_fibonacci(0, 2.15, 3.04, 2.73, true, &m) != WLDOS_STATUS_INVALID_ARGUMENT) return 1;
    if (wldos_last_error_message() == NULL) return 2;
    if (wldos_model_fibonacci(6, 2.15, 3.04, 2.73, false, &m) != WLDOS_STATUS_OK) return 3;
    WldosParams p = { 5.0, 2.0, WLDOS_METHOD_KPM, 14, 0.2 };
    WldosValue v;
    if (wldos_evaluate(m, &p, 0.0, 0.0, &v) != WLDOS_STATUS_OK) return 4;
    printf("%.17g %.17g\n", v.value, v.budget_polynomial);
    wldos_model_free(m);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let nums: Vec<f64> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert!(nums[0].is_finite() && nums[0] >= -nums[1]);
}
