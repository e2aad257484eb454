use std::ffi::{c_char, c_void, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mob_ffi::*;

const EXPORTS: &[&str] = &[
    "mob_last_error",
    "mob_version",
    "mob_string_free",
    "mob_gamma",
    "mob_hyp2f1",
    "mob_integrand_parse",
    "mob_integrand_bind",
    "mob_integrand_evaluate",
    "mob_integrand_report_json",
    "mob_integrand_free",
    "mob_catalog_load",
    "mob_catalog_eval",
    "mob_catalog_crosscheck_json",
    "mob_catalog_free",
    "mob_quad_halfline",
];

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn last_error() -> String {
    let p = mob_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn c(re: f64) -> MobComplex {
    MobComplex { re, im: 0.0 }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/mob.h")).unwrap();
    for name in EXPORTS {
        let declared = header.contains(&format!(" {name}(")) || header.contains(&format!("*{name}("));
        assert!(declared, "{name} missing from mob.h");
    }
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exported = source.matches("#[no_mangle]").count();
    assert_eq!(exported, EXPORTS.len(), "export list out of date");
    assert!(header.contains("MOB_STATUS_NOT_CONVERGED = 7"));
}

#[test]
fn special_functions() {
    let mut out = c(0.0);
    assert_eq!(unsafe { mob_gamma(c(0.5), &mut out) }, MobStatus::Ok);
    assert!((out.re - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    assert!(mob_last_error().is_null());

    assert_eq!(unsafe { mob_gamma(c(-2.0), &mut out) }, MobStatus::Pole);
    assert!(last_error().contains("pole"));

    // 2F1(1, 1; 2; z) = -ln(1 - z)/z
    assert_eq!(unsafe { mob_hyp2f1(1.0, 1.0, 2.0, c(0.5), &mut out) }, MobStatus::Ok);
    assert!((out.re - 2.0 * 2f64.ln()).abs() < 1e-14);

    assert_eq!(unsafe { mob_gamma(c(1.0), ptr::null_mut()) }, MobStatus::NullPointer);
}

#[test]
fn integrand_lifecycle() {
    let text = CString::new("(a*x^2 + 2*b*x + c)^(-n)").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { mob_integrand_parse(text.as_ptr(), &mut h) }, MobStatus::Ok);
    let mut out = c(0.0);
    assert_eq!(unsafe { mob_integrand_evaluate(h, &mut out) }, MobStatus::Unbound);
    for (k, v) in [("a", 1.0), ("b", 0.5), ("c", 1.0), ("n", 1.0)] {
        let k = CString::new(k).unwrap();
        assert_eq!(unsafe { mob_integrand_bind(h, k.as_ptr(), c(v)) }, MobStatus::Ok);
    }
    assert_eq!(unsafe { mob_integrand_evaluate(h, &mut out) }, MobStatus::Ok);
    assert!((out.re - 1.20919957615615).abs() < 1e-12);

    let mut json: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { mob_integrand_report_json(h, &mut json) }, MobStatus::Ok);
    let s = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(s.contains("\"combined\""));
    unsafe { mob_string_free(json) };

    // boundary: no solution converges
    let b = CString::new("b").unwrap();
    unsafe { mob_integrand_bind(h, b.as_ptr(), c(1.0)) };
    let n = CString::new("n").unwrap();
    unsafe { mob_integrand_bind(h, n.as_ptr(), c(1.5)) };
    assert_eq!(unsafe { mob_integrand_evaluate(h, &mut out) }, MobStatus::Indeterminate);
    unsafe { mob_integrand_free(h) };

    let bad = CString::new("(x+").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { mob_integrand_parse(bad.as_ptr(), &mut h) }, MobStatus::Parse);
    assert!(h.is_null());
    assert!(last_error().contains("syntax error"));
}

#[test]
fn catalog_calls() {
    let mut cat = ptr::null_mut();
    assert_eq!(unsafe { mob_catalog_load(&mut cat) }, MobStatus::Ok);
    let names: Vec<CString> = ["a", "b", "c", "m"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const c_char> = names.iter().map(|s| s.as_ptr()).collect();
    let values = [1.0, 0.5, 1.0, 1.0];
    let id = CString::new("quartic").unwrap();
    let mut out = c(0.0);
    let st = unsafe { mob_catalog_eval(cat, id.as_ptr(), ptrs.as_ptr(), values.as_ptr(), 4, &mut out) };
    assert_eq!(st, MobStatus::Ok);
    assert!((out.re - 0.906899682117109).abs() < 1e-12);

    let mut json: *mut c_char = ptr::null_mut();
    let mut verdict = -1;
    let st = unsafe {
        mob_catalog_crosscheck_json(cat, id.as_ptr(), ptrs.as_ptr(), values.as_ptr(), 4, &mut json, &mut verdict)
    };
    assert_eq!(st, MobStatus::Ok);
    assert_eq!(verdict, 0);
    assert!(unsafe { CStr::from_ptr(json) }.to_str().unwrap().contains("\"verdict\": \"pass\""));
    unsafe { mob_string_free(json) };

    let bogus = CString::new("bogus").unwrap();
    let st = unsafe { mob_catalog_eval(cat, bogus.as_ptr(), ptrs.as_ptr(), values.as_ptr(), 4, &mut out) };
    assert_eq!(st, MobStatus::UnknownEntry);
    let st = unsafe { mob_catalog_eval(cat, id.as_ptr(), ptrs.as_ptr(), values.as_ptr(), 3, &mut out) };
    assert_eq!(st, MobStatus::Unbound);
    unsafe { mob_catalog_free(cat) };
}

extern "C" fn decay(x: f64, user: *mut c_void) -> f64 {
    let rate = unsafe { *(user as *const f64) };
    (-rate * x).exp()
}

extern "C" fn flat(_: f64, _: *mut c_void) -> f64 {
    1.0
}

#[test]
fn quadrature_callback() {
    let mut rate = 2.0f64;
    let mut q = MobQuadrature {
        value: 0.0,
        est_error: 0.0,
        evaluations: 0,
        converged: false,
    };
    let st = unsafe { mob_quad_halfline(Some(decay), (&mut rate as *mut f64).cast(), 1e-12, &mut q) };
    assert_eq!(st, MobStatus::Ok);
    assert!((q.value - 0.5).abs() < 1e-12 && q.converged);
    let st = unsafe { mob_quad_halfline(Some(flat), ptr::null_mut(), 1e-12, &mut q) };
    assert_eq!(st, MobStatus::NotConverged);
    assert!(!q.converged);
    let st = unsafe { mob_quad_halfline(None, ptr::null_mut(), 1e-12, &mut q) };
    assert_eq!(st, MobStatus::NullPointer);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mob_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles and runs a C program against the static library when a C
/// compiler is available.
#[test]
fn c_program_links() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let target = crate_dir().join("../../target/debug");
    let lib = target.join("libmob_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include "mob.h"
int main(void) {
    MobIntegrand *h = NULL;
    if (mob_integrand_parse("exp(-x^2)", &h) != MOB_STATUS_OK) return 1;
    MobComplex v;
    if (mob_integrand_evaluate(h, &v) != MOB_STATUS_OK) return 2;
    mob_integrand_free(h);
    if (fabs(v.re - 0.886226925452758) > 1e-12) return 3;
    printf("%.12f\n", v.re);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "0.886226925453");
}
