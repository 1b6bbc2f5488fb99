//! C ABI over `gkz_euler`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free`. Every fallible call returns a [`GkzStatus`] whose
//! numeric values match the CLI exit codes, and stores a message retrievable
//! through [`gkz_last_error`].

#![allow(clippy::missing_safety_doc)]

use gkz_euler::cli::{intersection_class, resolve_config};
use gkz_euler::config::ConfigMatrix;
use gkz_euler::intersection::{verify_case, CaseSpec};
use gkz_euler::triangulation::{triangulate, Triangulation, TriangulationError};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GkzStatus {
    Ok = 0,
    ResidualFailure = 1,
    BadInput = 2,
    Degenerate = 3,
    Numeric = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Opaque configuration matrix.
pub struct GkzConfig(ConfigMatrix);

/// Opaque triangulation, tied to the configuration it was built from.
pub struct GkzTriangulation(Triangulation);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(code: i32) -> GkzStatus {
    match code {
        0 => GkzStatus::Ok,
        1 => GkzStatus::ResidualFailure,
        2 => GkzStatus::BadInput,
        3 => GkzStatus::Degenerate,
        _ => GkzStatus::Numeric,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (GkzStatus, String)>) -> GkzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GkzStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside gkz_euler");
            GkzStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, (GkzStatus, String)> {
    if p.is_null() {
        return Err((GkzStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (GkzStatus::BadInput, format!("string is not UTF-8: {e}")))
}

fn null(what: &str) -> (GkzStatus, String) {
    (GkzStatus::NullPointer, format!("null {what}"))
}

/// Message of the last failed call on this thread; valid until the next call.
#[no_mangle]
pub extern "C" fn gkz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Resolves a registry name or JSON document path into a configuration.
#[no_mangle]
pub unsafe extern "C" fn gkz_config_new(name: *const c_char, out: *mut *mut GkzConfig) -> GkzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let a = resolve_config(c_str(name)?).map_err(|e| (status_of(e.exit_code()), e.to_string()))?;
        *out = Box::into_raw(Box::new(GkzConfig(a)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gkz_config_free(cfg: *mut GkzConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Number of columns `N`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn gkz_config_num_cols(cfg: *const GkzConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.num_cols())
}

/// Row count `n + k`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn gkz_config_dim(cfg: *const GkzConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.dim())
}

/// Regular triangulation induced by the `len` integers at `omega`.
#[no_mangle]
pub unsafe extern "C" fn gkz_triangulate(
    cfg: *const GkzConfig,
    omega: *const i64,
    len: usize,
    out: *mut *mut GkzTriangulation,
) -> GkzStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("configuration"))?;
        if omega.is_null() || out.is_null() {
            return Err(null("pointer argument"));
        }
        let w = std::slice::from_raw_parts(omega, len);
        let t = triangulate(&cfg.0, w).map_err(|e| match e {
            TriangulationError::ExhaustedRetries(_) => (GkzStatus::Numeric, e.to_string()),
            _ => (GkzStatus::BadInput, e.to_string()),
        })?;
        *out = Box::into_raw(Box::new(GkzTriangulation(t)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gkz_triangulation_free(t: *mut GkzTriangulation) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gkz_triangulation_num_simplices(t: *const GkzTriangulation) -> usize {
    t.as_ref().map_or(0, |t| t.0.simplices().len())
}

/// Writes the convergent and unimodular flags.
#[no_mangle]
pub unsafe extern "C" fn gkz_triangulation_flags(
    t: *const GkzTriangulation,
    convergent: *mut bool,
    unimodular: *mut bool,
) -> GkzStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("triangulation"))?;
        if convergent.is_null() || unimodular.is_null() {
            return Err(null("flag pointer"));
        }
        *convergent = t.0.convergent();
        *unimodular = t.0.unimodular();
        Ok(())
    })
}

/// Copies the 1-based column labels of simplex `index` into `labels`
/// (capacity `cap`) and stores their count in `len`.
#[no_mangle]
pub unsafe extern "C" fn gkz_triangulation_simplex(
    t: *const GkzTriangulation,
    index: usize,
    labels: *mut usize,
    cap: usize,
    len: *mut usize,
) -> GkzStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("triangulation"))?;
        if labels.is_null() || len.is_null() {
            return Err(null("output pointer"));
        }
        let s = t.0.simplices().get(index).ok_or((GkzStatus::BadInput, format!("simplex index {index} out of range")))?;
        let l = s.labels();
        if l.len() > cap {
            return Err((GkzStatus::BadInput, format!("buffer holds {cap} labels, need {}", l.len())));
        }
        ptr::copy_nonoverlapping(l.as_ptr(), labels, l.len());
        *len = l.len();
        Ok(())
    })
}

/// Runs one named relation with default parameters drawn from `seed`;
/// `order == 0` selects the case default. The residual is written on success
/// and on residual failure.
#[no_mangle]
pub unsafe extern "C" fn gkz_verify(case: *const c_char, seed: u64, order: usize, residual: *mut f64) -> GkzStatus {
    guard(|| {
        if residual.is_null() {
            return Err(null("residual pointer"));
        }
        let mut spec = CaseSpec::named(c_str(case)?);
        spec.seed = seed;
        if order > 0 {
            spec.order = Some(order);
        }
        let r = verify_case(&spec).map_err(|e| (status_of(intersection_class(&e)), e.to_string()))?;
        *residual = r.residual;
        if !r.passed {
            return Err((GkzStatus::ResidualFailure, format!("residual {:e} above tolerance {:e}", r.residual, r.tolerance)));
        }
        Ok(())
    })
}

/// Runs a JSON case spec and returns the JSON report in `out`; free it with
/// [`gkz_string_free`]. The status reflects the verdict.
#[no_mangle]
pub unsafe extern "C" fn gkz_verify_json(spec: *const c_char, out: *mut *mut c_char) -> GkzStatus {
    let mut verdict = GkzStatus::Ok;
    let s = guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let spec: CaseSpec =
            serde_json::from_str(c_str(spec)?).map_err(|e| (GkzStatus::BadInput, format!("invalid JSON: {e}")))?;
        let r = verify_case(&spec).map_err(|e| (status_of(intersection_class(&e)), e.to_string()))?;
        if !r.passed {
            verdict = GkzStatus::ResidualFailure;
            set_error(format!("residual {:e} above tolerance {:e}", r.residual, r.tolerance));
        }
        let text = serde_json::to_string(&r).map_err(|e| (GkzStatus::Numeric, e.to_string()))?;
        *out = CString::new(text).map_err(|e| (GkzStatus::Numeric, e.to_string()))?.into_raw();
        Ok(())
    });
    if s == GkzStatus::Ok {
        verdict
    } else {
        s
    }
}

#[no_mangle]
pub unsafe extern "C" fn gkz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
