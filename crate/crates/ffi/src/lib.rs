//! C ABI over the axiomlab engine.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free`. Every fallible function returns an [`AxlStatus`]; on anything
//! but `OK` or `FAIL` a message is available from
//! [`axl_last_error_message`] on the same thread. Strings returned through
//! out-parameters are UTF-8 JSON and must be released with
//! [`axl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use axiomlab::axioms::{check_axiom, AxiomId, CheckOptions};
use axiomlab::io::{parse_json, to_pretty, NamedInstance};
use axiomlab::model::Limits;
use axiomlab::preferences::Profile;
use axiomlab::rules::random_serial_dictatorship;
use axiomlab::theorems::verify_theorem1;
use axiomlab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxlStatus {
    /// Success, or the checked property holds.
    Ok = 0,
    /// The checked property does not hold; the report carries a witness.
    Fail = 1,
    NullPointer = 2,
    InvalidUtf8 = 3,
    /// Malformed JSON or an invalid instance, profile or rule.
    InvalidInput = 4,
    SizeOverflow = 5,
    NotApplicable = 6,
    PreconditionViolated = 7,
    Io = 8,
    /// A panic was caught at the boundary.
    Internal = 9,
}

/// An instance with its object names.
pub struct AxlInstance(NamedInstance);

/// A preference profile for one instance.
pub struct AxlProfile(Profile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> AxlStatus {
    match err {
        Error::SizeOverflow { .. } => AxlStatus::SizeOverflow,
        Error::AxiomNotApplicable { .. } => AxlStatus::NotApplicable,
        Error::PreconditionViolated(_) => AxlStatus::PreconditionViolated,
        Error::Io(_) => AxlStatus::Io,
        _ => AxlStatus::InvalidInput,
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<AxlStatus, (AxlStatus, String)>) -> AxlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error: panic caught at the C boundary".into());
            AxlStatus::Internal
        }
    }
}

fn engine(err: Error) -> (AxlStatus, String) {
    (status_of(&err), err.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (AxlStatus, String)> {
    if p.is_null() {
        return Err((AxlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (AxlStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (AxlStatus, String)> {
    p.as_ref()
        .ok_or_else(|| (AxlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: *mut T) -> Result<(), (AxlStatus, String)> {
    if out.is_null() {
        return Err((AxlStatus::NullPointer, "output pointer is null".into()));
    }
    *out = value;
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (AxlStatus, String)> {
    let c = CString::new(s).map_err(|_| (AxlStatus::Internal, "report contains NUL".to_string()))?;
    write_out(out, c.into_raw())
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn axl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn axl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn axl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn axl_instance_from_json(json: *const c_char, out: *mut *mut AxlInstance) -> AxlStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let named = NamedInstance::from_json(text).map_err(engine)?;
        write_out(out, Box::into_raw(Box::new(AxlInstance(named))))?;
        Ok(AxlStatus::Ok)
    })
}

/// # Safety
/// `inst` must come from [`axl_instance_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn axl_instance_free(inst: *mut AxlInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of agents, or 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn axl_instance_num_agents(inst: *const AxlInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.instance.n())
}

/// Number of objects including any null-object, or 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn axl_instance_num_objects(inst: *const AxlInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.instance.k())
}

/// Parses a profile (lists of object names) for `inst`.
///
/// # Safety
/// `inst` must be a live instance, `json` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn axl_profile_from_json(
    inst: *const AxlInstance,
    json: *const c_char,
    out: *mut *mut AxlProfile,
) -> AxlStatus {
    guard(|| {
        let inst = ref_arg(inst, "instance")?;
        let value = parse_json(str_arg(json, "json")?).map_err(engine)?;
        let profile = inst.0.profile_from_value(&value).map_err(engine)?;
        write_out(out, Box::into_raw(Box::new(AxlProfile(profile))))?;
        Ok(AxlStatus::Ok)
    })
}

/// # Safety
/// `profile` must come from [`axl_profile_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn axl_profile_free(profile: *mut AxlProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Exact random serial dictatorship lottery as JSON: a list of
/// `{"matching": [...], "weight": "p/q"}`.
///
/// # Safety
/// Handles must be live and belong together; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn axl_rsd_json(
    inst: *const AxlInstance,
    profile: *const AxlProfile,
    out: *mut *mut c_char,
) -> AxlStatus {
    guard(|| {
        let inst = ref_arg(inst, "instance")?;
        let profile = ref_arg(profile, "profile")?;
        let k = inst.0.instance.k();
        if profile.0.len() != inst.0.instance.n() || profile.0.prefs().iter().any(|p| p.ranking().len() != k) {
            return Err((AxlStatus::InvalidInput, "profile does not fit the instance".into()));
        }
        let lottery = random_serial_dictatorship(&inst.0.instance, &profile.0, &Limits::from_env()).map_err(engine)?;
        write_string(out, to_pretty(&inst.0.lottery_to_value(&lottery)))?;
        Ok(AxlStatus::Ok)
    })
}

/// Checks `rule` (`rsd`, `sd`, `sd:2,0,1`, `ttc`, ... or a rule-table path)
/// against `axiom` on every profile. Returns `OK` on pass and `FAIL` on
/// failure; the JSON report is written to `out` in both cases.
///
/// # Safety
/// `inst` must be live, strings NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn axl_check_rule(
    inst: *const AxlInstance,
    rule: *const c_char,
    axiom: *const c_char,
    out: *mut *mut c_char,
) -> AxlStatus {
    guard(|| {
        let inst = ref_arg(inst, "instance")?;
        let rule = inst.0.parse_rule_spec(str_arg(rule, "rule")?).map_err(engine)?;
        let axiom: AxiomId = str_arg(axiom, "axiom")?.parse().map_err(engine)?;
        let opts = CheckOptions {
            limits: Limits::from_env(),
            ..Default::default()
        };
        let report = check_axiom(&inst.0.instance, &rule, axiom, &opts).map_err(engine)?;
        write_string(out, to_pretty(&report))?;
        Ok(if report.passed() { AxlStatus::Ok } else { AxlStatus::Fail })
    })
}

/// Runs the lottery-rule theorem harness. `OK` when verified, `FAIL` when
/// refuted or when the hypotheses do not hold (see the report's status).
///
/// # Safety
/// `inst` must be live, `rule` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn axl_verify_theorem1(
    inst: *const AxlInstance,
    rule: *const c_char,
    out: *mut *mut c_char,
) -> AxlStatus {
    guard(|| {
        let inst = ref_arg(inst, "instance")?;
        let rule = inst.0.parse_rule_spec(str_arg(rule, "rule")?).map_err(engine)?;
        let opts = CheckOptions {
            limits: Limits::from_env(),
            ..Default::default()
        };
        let verdict = verify_theorem1(&inst.0.instance, &rule, &opts).map_err(engine)?;
        write_string(out, to_pretty(&verdict))?;
        Ok(if verdict.verified() { AxlStatus::Ok } else { AxlStatus::Fail })
    })
}
