//! C ABI over the `mob` library.
//!
//! Every function returns a [`MobStatus`]; on failure the message is
//! available from [`mob_last_error`] on the same thread. Strings handed out
//! by the library are released with [`mob_string_free`], handles with their
//! matching `*_free` function.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mob::catalog::{Catalog, CatalogError, CheckOptions, Params};
use mob::engine::{run_engine, EngineOptions};
use mob::integrand::{parse_integrand, Integrand};
use mob::oracle::{integrate_halfline, OracleError};
use mob::report::to_json_pretty;
use mob::special::{gamma, hyp2f1, SpecialError, DEFAULT_HYP_TOL};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Unbound = 4,
    Domain = 5,
    Pole = 6,
    NotConverged = 7,
    Indeterminate = 8,
    UnknownEntry = 9,
    Catalog = 10,
    Internal = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for MobComplex {
    fn from(z: Complex64) -> Self {
        MobComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobQuadrature {
    pub value: f64,
    pub est_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// A parsed integrand plus its parameter bindings.
pub struct MobIntegrand {
    template: Integrand,
    bindings: BTreeMap<String, Complex64>,
}

/// A loaded catalog.
pub struct MobCatalog {
    catalog: Catalog,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(MobStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MobStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MobStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MobStatus::Internal
        }
    }
}

fn special_fail(e: SpecialError) -> Fail {
    let status = match e {
        SpecialError::GammaPole(_) | SpecialError::Pole(_) => MobStatus::Pole,
        SpecialError::Domain(_) => MobStatus::Domain,
    };
    Fail(status, e.to_string())
}

fn catalog_fail(e: CatalogError) -> Fail {
    let status = match e {
        CatalogError::UnknownId(_) | CatalogError::UnknownBranch { .. } => MobStatus::UnknownEntry,
        CatalogError::MissingParameter(_) | CatalogError::UnknownParameter { .. } => MobStatus::Unbound,
        CatalogError::Domain { .. } | CatalogError::Region { .. } | CatalogError::Validity { .. } => MobStatus::Domain,
        _ => MobStatus::Catalog,
    };
    Fail(status, e.to_string())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(MobStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(MobStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(MobStatus::NullPointer, format!("{what} is null")))
}

unsafe fn params(names: *const *const c_char, values: *const f64, len: usize) -> Result<Params, Fail> {
    if len == 0 {
        return Ok(Params::new());
    }
    if names.is_null() || values.is_null() {
        return Err(Fail(MobStatus::NullPointer, "parameter arrays are null".into()));
    }
    let names = std::slice::from_raw_parts(names, len);
    let values = std::slice::from_raw_parts(values, len);
    names
        .iter()
        .zip(values)
        .map(|(n, v)| Ok((text(*n, "parameter name")?.to_string(), *v)))
        .collect()
}

fn hand_out(s: String, dst: &mut *mut c_char) -> Result<(), Fail> {
    *dst = CString::new(s)
        .map_err(|_| Fail(MobStatus::Internal, "report contains a nul byte".into()))?
        .into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn mob_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mob_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed; null is allowed.
#[no_mangle]
pub unsafe extern "C" fn mob_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Complex gamma function.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mob_gamma(z: MobComplex, result: *mut MobComplex) -> MobStatus {
    guard(|| {
        let dst = out(result, "result")?;
        *dst = gamma(Complex64::new(z.re, z.im)).map_err(special_fail)?.into();
        Ok(())
    })
}

/// Gauss hypergeometric function 2F1(a, b; c; z) with real parameters.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mob_hyp2f1(a: f64, b: f64, c: f64, z: MobComplex, result: *mut MobComplex) -> MobStatus {
    guard(|| {
        let dst = out(result, "result")?;
        let r = hyp2f1(a, b, c, Complex64::new(z.re, z.im), DEFAULT_HYP_TOL).map_err(special_fail)?;
        *dst = r.value.into();
        Ok(())
    })
}

/// Parses an integrand such as `(a*x^2 + 2*b*x + c)^(-n)`.
///
/// # Safety
/// `source` must be a nul-terminated string and `handle` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mob_integrand_parse(source: *const c_char, handle: *mut *mut MobIntegrand) -> MobStatus {
    guard(|| {
        let dst = out(handle, "handle")?;
        *dst = ptr::null_mut();
        let template = parse_integrand(text(source, "source")?).map_err(|e| Fail(MobStatus::Parse, e.to_string()))?;
        *dst = Box::into_raw(Box::new(MobIntegrand {
            template,
            bindings: BTreeMap::new(),
        }));
        Ok(())
    })
}

/// Binds a parameter to a complex value, replacing any earlier binding.
///
/// # Safety
/// `handle` must come from [`mob_integrand_parse`]; `name` must be a
/// nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mob_integrand_bind(handle: *mut MobIntegrand, name: *const c_char, value: MobComplex) -> MobStatus {
    guard(|| {
        let h = out(handle, "handle")?;
        h.bindings
            .insert(text(name, "name")?.to_string(), Complex64::new(value.re, value.im));
        Ok(())
    })
}

fn bound(h: &MobIntegrand) -> Result<Integrand, Fail> {
    h.template
        .bind(&h.bindings)
        .map_err(|e| Fail(MobStatus::Unbound, e.to_string()))
}

/// Runs the bracket engine and writes the combined value. Returns
/// `MOB_STATUS_INDETERMINATE` when no solution converges or some could not be
/// classified, still writing the partial value when there is one.
///
/// # Safety
/// `handle` must come from [`mob_integrand_parse`]; `result` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn mob_integrand_evaluate(handle: *const MobIntegrand, result: *mut MobComplex) -> MobStatus {
    guard(|| {
        let h = handle
            .as_ref()
            .ok_or_else(|| Fail(MobStatus::NullPointer, "handle is null".into()))?;
        let dst = out(result, "result")?;
        let run = run_engine(&bound(h)?, &EngineOptions::default()).map_err(|e| Fail(MobStatus::Parse, e.to_string()))?;
        match (&run.combined, &run.error) {
            (Some(c), _) => {
                *dst = c.value.into();
                if c.converged && !c.inconclusive {
                    Ok(())
                } else {
                    Err(Fail(MobStatus::Indeterminate, "value not confirmed by the engine".into()))
                }
            }
            (None, Some(e)) => Err(Fail(MobStatus::Indeterminate, e.to_string())),
            (None, None) => Err(Fail(MobStatus::Internal, "engine produced no value".into())),
        }
    })
}

/// Full engine report as JSON. Free the string with [`mob_string_free`].
///
/// # Safety
/// `handle` must come from [`mob_integrand_parse`]; `json` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn mob_integrand_report_json(handle: *const MobIntegrand, json: *mut *mut c_char) -> MobStatus {
    guard(|| {
        let h = handle
            .as_ref()
            .ok_or_else(|| Fail(MobStatus::NullPointer, "handle is null".into()))?;
        let dst = out(json, "json")?;
        *dst = ptr::null_mut();
        let run = run_engine(&bound(h)?, &EngineOptions::default()).map_err(|e| Fail(MobStatus::Parse, e.to_string()))?;
        hand_out(to_json_pretty(&run), dst)
    })
}

/// # Safety
/// `handle` must come from [`mob_integrand_parse`] and not have been freed;
/// null is allowed.
#[no_mangle]
pub unsafe extern "C" fn mob_integrand_free(handle: *mut MobIntegrand) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Loads the catalog, honouring `MOB_CATALOG`.
///
/// # Safety
/// `handle` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mob_catalog_load(handle: *mut *mut MobCatalog) -> MobStatus {
    guard(|| {
        let dst = out(handle, "handle")?;
        *dst = ptr::null_mut();
        let catalog = Catalog::load().map_err(catalog_fail)?;
        *dst = Box::into_raw(Box::new(MobCatalog { catalog }));
        Ok(())
    })
}

/// Closed form of `id` (or `id/branch`) at the given parameters.
///
/// # Safety
/// `catalog` must come from [`mob_catalog_load`]; `names` and `values` must
/// each point to `len` elements; `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mob_catalog_eval(
    catalog: *const MobCatalog,
    id: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    len: usize,
    result: *mut MobComplex,
) -> MobStatus {
    guard(|| {
        let c = catalog
            .as_ref()
            .ok_or_else(|| Fail(MobStatus::NullPointer, "catalog is null".into()))?;
        let dst = out(result, "result")?;
        let p = params(names, values, len)?;
        *dst = c.catalog.eval_entry(text(id, "id")?, &p).map_err(catalog_fail)?.into();
        Ok(())
    })
}

/// Cross-check report as JSON; `verdict` receives the CLI exit code
/// (0 pass, 1 fail or error, 2 indeterminate).
///
/// # Safety
/// As [`mob_catalog_eval`]; `json` and `verdict` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mob_catalog_crosscheck_json(
    catalog: *const MobCatalog,
    id: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    len: usize,
    json: *mut *mut c_char,
    verdict: *mut i32,
) -> MobStatus {
    guard(|| {
        let c = catalog
            .as_ref()
            .ok_or_else(|| Fail(MobStatus::NullPointer, "catalog is null".into()))?;
        let dst = out(json, "json")?;
        *dst = ptr::null_mut();
        let code = out(verdict, "verdict")?;
        let p = params(names, values, len)?;
        let report = c.catalog.crosscheck(text(id, "id")?, &p, &CheckOptions::default());
        *code = report.verdict.exit_code();
        hand_out(to_json_pretty(&report), dst)
    })
}

/// # Safety
/// `catalog` must come from [`mob_catalog_load`] and not have been freed;
/// null is allowed.
#[no_mangle]
pub unsafe extern "C" fn mob_catalog_free(catalog: *mut MobCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// Integrates `f(x, user)` over `(0, inf)` to relative tolerance `tol`. On
/// `MOB_STATUS_NOT_CONVERGED` the last estimate is still written.
///
/// # Safety
/// `f` must be safe to call with `user` from this thread; `result` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mob_quad_halfline(
    f: Option<extern "C" fn(f64, *mut c_void) -> f64>,
    user: *mut c_void,
    tol: f64,
    result: *mut MobQuadrature,
) -> MobStatus {
    guard(|| {
        let f = f.ok_or_else(|| Fail(MobStatus::NullPointer, "callback is null".into()))?;
        let dst = out(result, "result")?;
        let put = |r: &mob::oracle::QuadratureResult| MobQuadrature {
            value: r.value,
            est_error: r.est_error,
            evaluations: r.evaluations,
            converged: r.converged,
        };
        match integrate_halfline(|x| f(x, user), tol) {
            Ok(r) => {
                *dst = put(&r);
                Ok(())
            }
            Err(e @ OracleError::NotConverged { .. }) => {
                if let OracleError::NotConverged { result } = &e {
                    *dst = put(result);
                }
                Err(Fail(MobStatus::NotConverged, e.to_string()))
            }
            Err(e) => Err(Fail(MobStatus::Domain, e.to_string())),
        }
    })
}
