//! C interface to `reconf`.
//!
//! Families are opaque handles created by [`reconf_family_parse`] and
//! released with [`reconf_family_free`]. Every fallible call returns a
//! [`ReconfStatus`]; on failure [`reconf_last_error_message`] describes the
//! problem. Strings handed out by the library are owned by the caller and
//! must be released with [`reconf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use reconf::featexp::Configuration;
use reconf::lang::{parse_family, stmt_to_string, FamilyProgram};
use reconf::rewriter::{check_outcome_preservation_with, default_stores, rewrite_preserve, Verdict};
use reconf::semantics::{family_outcomes, project};
use reconf::Error;

/// A parsed program family.
pub struct ReconfFamily {
    program: FamilyProgram,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Malformed = 4,
    Capacity = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconfVerdict {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(ReconfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Syntax { .. } => ReconfStatus::Syntax,
            Error::Malformed(_) => ReconfStatus::Malformed,
            Error::Capacity(_) => ReconfStatus::Capacity,
            Error::Internal(_) => ReconfStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: Option<String>) {
    let msg = msg.map(|m| CString::new(m.replace('\0', " ")).unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> ReconfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            ReconfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(Some(msg));
            status
        }
        Err(_) => {
            set_last_error(Some("internal error: panic".into()));
            ReconfStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ReconfStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ReconfStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn family<'a>(h: *const ReconfFamily) -> Result<&'a ReconfFamily, Failure> {
    h.as_ref().ok_or_else(|| null("family"))
}

unsafe fn hand_out(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(ReconfStatus::Internal, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Parses a family from NUL-terminated `text` into `*out`.
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reconf_family_parse(text: *const c_char, out: *mut *mut ReconfFamily) -> ReconfStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let program = parse_family(c_str(text, "text")?)?;
        *out = Box::into_raw(Box::new(ReconfFamily { program }));
        Ok(())
    })
}

/// Releases a family. Null is ignored.
///
/// # Safety
/// `h` must come from [`reconf_family_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn reconf_family_free(h: *mut ReconfFamily) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// The reconfigured single program, as source text.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reconf_family_reconfigure(
    h: *const ReconfFamily,
    optimize: bool,
    out: *mut *mut c_char,
) -> ReconfStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let program = rewrite_preserve(&family(h)?.program, optimize)?;
        hand_out(stmt_to_string(&program), out)
    })
}

/// The variant for `config`, a comma-separated list of literals such as
/// `"A,!B"`.
///
/// # Safety
/// `h` must be a live handle, `config` a valid C string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn reconf_family_project(
    h: *const ReconfFamily,
    config: *const c_char,
    out: *mut *mut c_char,
) -> ReconfStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = &family(h)?.program;
        let k = Configuration::parse_literals(c_str(config, "config")?, &p.universe)?;
        if !p.config_space()?.contains(&k) {
            return Err(Error::malformed(format!("configuration `{k}` is not valid for this family")).into());
        }
        hand_out(stmt_to_string(&project(&p.body, &k)?), out)
    })
}

/// Union of the variants' outcomes from the all-zero store, as JSON.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reconf_family_outcomes(
    h: *const ReconfFamily,
    fuel: u64,
    out: *mut *mut c_char,
) -> ReconfStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = &family(h)?.program;
        let outcomes = family_outcomes(p, &default_stores(p), fuel)?;
        let json = serde_json::to_string(&outcomes).map_err(|e| Failure(ReconfStatus::Internal, e.to_string()))?;
        hand_out(json, out)
    })
}

/// Compares the reconfigured program with the variants from the all-zero
/// store.
///
/// # Safety
/// `h` must be a live handle and `verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reconf_family_check_equiv(
    h: *const ReconfFamily,
    optimize: bool,
    fuel: u64,
    verdict: *mut ReconfVerdict,
) -> ReconfStatus {
    guarded(|| {
        if verdict.is_null() {
            return Err(null("verdict"));
        }
        let p = &family(h)?.program;
        let report = check_outcome_preservation_with(p, &default_stores(p), fuel, optimize)?;
        *verdict = match report.verdict {
            Verdict::Pass => ReconfVerdict::Pass,
            Verdict::Fail => ReconfVerdict::Fail,
            Verdict::Inconclusive => ReconfVerdict::Inconclusive,
        };
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn reconf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn reconf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}
