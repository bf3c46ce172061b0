//! C interface to the `timedsess` checker.
//!
//! Specs and certificates are opaque handles owned by the caller and
//! released with their `_free` function. Every call returns an integer
//! status: the verdict codes of the command line tool (`TS_PASS`,
//! `TS_FAIL`, `TS_INCONCLUSIVE`, `TS_BAD_INPUT`) or a negative code for a
//! misuse of the interface. Text handed out through `out_*` pointers is
//! allocated here and must be released with `ts_string_free`.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid: strings NUL-terminated, handles
//! obtained from this library and not yet freed, and `out_*` pointers
//! writable. Null is accepted wherever the documentation says so and
//! reported as `TS_NULL_ARGUMENT` elsewhere.
#![allow(clippy::missing_safety_doc)]

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use timedsess::cli::{self, Report, RunOpts};
use timedsess::semantics::{CheckBudget, Mode};
use timedsess::syntax::{ct_from_json, ct_to_json, Aliases, ObjReader, SpecFile};
use timedsess::time::Time;
use timedsess::trajectory::Ct;

pub const TS_PASS: i32 = 0;
pub const TS_FAIL: i32 = 1;
pub const TS_INCONCLUSIVE: i32 = 2;
pub const TS_BAD_INPUT: i32 = 3;
/// A required pointer argument was null.
pub const TS_NULL_ARGUMENT: i32 = -1;
/// A string argument was not UTF-8.
pub const TS_INVALID_UTF8: i32 = -2;
/// The library panicked; the call had no effect.
pub const TS_INTERNAL: i32 = -3;

const DEFAULT_HORIZON: u64 = 50;

/// A parsed spec file.
pub struct TsSpec {
    src: String,
    aliases: Aliases,
}

/// A computable trajectory certificate.
pub struct TsCert {
    ct: Ct,
}

enum Error {
    Null,
    Utf8,
}

impl Error {
    fn code(&self) -> i32 {
        match self {
            Error::Null => TS_NULL_ARGUMENT,
            Error::Utf8 => TS_INVALID_UTF8,
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(Error::Null);
    }
    CStr::from_ptr(p).to_str().map_err(|_| Error::Utf8)
}

unsafe fn opt_text<'a>(p: *const c_char) -> Result<Option<&'a str>, Error> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Error> {
    p.as_ref().ok_or(Error::Null)
}

fn c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', "\\0")).expect("nul bytes replaced").into_raw()
}

/// Stores `s` in `out` when the caller asked for it.
unsafe fn give(out: *mut *mut c_char, s: &str) {
    if !out.is_null() {
        *out = c_string(s);
    }
}

fn budget(horizon: u64) -> CheckBudget {
    CheckBudget::with_horizon(if horizon == 0 { DEFAULT_HORIZON } else { horizon })
}

/// Runs `f`, turning argument errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<i32, Error>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => e.code(),
        Err(_) => TS_INTERNAL,
    }
}

unsafe fn report(r: Report, out: *mut *mut c_char) -> i32 {
    give(out, &r.out);
    r.code
}

/// Parses a spec file. On failure `*out_spec` is left null and the parse
/// error is written to `out_message`, which may be null.
#[no_mangle]
pub unsafe extern "C" fn ts_spec_parse(src: *const c_char, out_spec: *mut *mut TsSpec, out_message: *mut *mut c_char) -> i32 {
    guard(|| {
        if out_spec.is_null() {
            return Err(Error::Null);
        }
        *out_spec = ptr::null_mut();
        let src = text(src)?;
        match SpecFile::parse(src) {
            Ok(spec) => {
                *out_spec = Box::into_raw(Box::new(TsSpec { src: src.to_string(), aliases: spec.aliases() }));
                Ok(TS_PASS)
            }
            Err(e) => {
                give(out_message, &format!("parse error at {e}"));
                Ok(TS_BAD_INPUT)
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ts_spec_free(spec: *mut TsSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Type checks every process of the spec.
#[no_mangle]
pub unsafe extern "C" fn ts_check(spec: *const TsSpec, out_report: *mut *mut c_char) -> i32 {
    guard(|| Ok(report(cli::check(&handle(spec)?.src, false), out_report)))
}

/// Executes a run directive, picked by index or target name, or the only
/// one when `run` is null. A zero horizon uses the directive's own.
#[no_mangle]
pub unsafe extern "C" fn ts_run(spec: *const TsSpec, run: *const c_char, horizon: u64, out_report: *mut *mut c_char) -> i32 {
    guard(|| {
        let opts = RunOpts {
            run: opt_text(run)?.map(String::from),
            horizon: (horizon != 0).then_some(horizon),
            ..RunOpts::default()
        };
        Ok(report(cli::run(&handle(spec)?.src, &opts, DEFAULT_HORIZON), out_report))
    })
}

/// Builds the witness of a process, or of the only process when `proc_name`
/// is null, at the default valuation of its time variables.
#[no_mangle]
pub unsafe extern "C" fn ts_witness(
    spec: *const TsSpec,
    proc_name: *const c_char,
    horizon: u64,
    out_cert: *mut *mut TsCert,
    out_report: *mut *mut c_char,
) -> i32 {
    guard(|| {
        if out_cert.is_null() {
            return Err(Error::Null);
        }
        *out_cert = ptr::null_mut();
        let r = cli::witness(&handle(spec)?.src, opt_text(proc_name)?, None, &budget(horizon));
        if r.code != TS_PASS {
            return Ok(report(r, out_report));
        }
        match ct_from_json(&r.out, &ObjReader::default()) {
            Ok(ct) => {
                *out_cert = Box::into_raw(Box::new(TsCert { ct }));
                give(out_report, "witness built\n");
                Ok(TS_PASS)
            }
            Err(e) => {
                give(out_report, &format!("error: {e}\n"));
                Ok(TS_INTERNAL)
            }
        }
    })
}

/// Checks the witness of each process, or of one, against its type.
#[no_mangle]
pub unsafe extern "C" fn ts_semcheck(spec: *const TsSpec, proc_name: *const c_char, horizon: u64, out_report: *mut *mut c_char) -> i32 {
    guard(|| Ok(report(cli::semcheck_spec(&handle(spec)?.src, opt_text(proc_name)?, &budget(horizon)), out_report)))
}

/// Decides `A |> B @ T` or `A <| B @ T`. Types may use the aliases of
/// `spec`, which may be null.
#[no_mangle]
pub unsafe extern "C" fn ts_retype(spec: *const TsSpec, query: *const c_char, horizon: u64, out_report: *mut *mut c_char) -> i32 {
    guard(|| {
        let env = match spec.as_ref() {
            Some(s) => s.aliases.clone(),
            None => Aliases::new(),
        };
        Ok(report(cli::retype(text(query)?, &env, &budget(horizon)), out_report))
    })
}

/// Reads a certificate. Malformed JSON is `TS_BAD_INPUT`; well-formed JSON
/// that does not describe a certificate is `TS_FAIL`.
#[no_mangle]
pub unsafe extern "C" fn ts_cert_parse(json: *const c_char, out_cert: *mut *mut TsCert, out_message: *mut *mut c_char) -> i32 {
    guard(|| {
        if out_cert.is_null() {
            return Err(Error::Null);
        }
        *out_cert = ptr::null_mut();
        match ct_from_json(text(json)?, &ObjReader::default()) {
            Ok(ct) => {
                *out_cert = Box::into_raw(Box::new(TsCert { ct }));
                Ok(TS_PASS)
            }
            Err(e) => {
                give(out_message, &e.to_string());
                Ok(if matches!(e, timedsess::syntax::CertError::Json(_)) { TS_BAD_INPUT } else { TS_FAIL })
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ts_cert_free(cert: *mut TsCert) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ts_cert_to_json(cert: *const TsCert, out_json: *mut *mut c_char) -> i32 {
    guard(|| {
        if out_json.is_null() {
            return Err(Error::Null);
        }
        *out_json = c_string(&ct_to_json(&handle(cert)?.ct));
        Ok(TS_PASS)
    })
}

/// First instant of the certified trajectory.
#[no_mangle]
pub unsafe extern "C" fn ts_cert_lo(cert: *const TsCert, out_lo: *mut u64) -> i32 {
    guard(|| {
        let c = handle(cert)?;
        *out_lo.as_mut().ok_or(Error::Null)? = c.ct.lo;
        Ok(TS_PASS)
    })
}

/// End of the certified trajectory; `*out_infinite` is set when it has
/// none, and `*out_hi` is then 0.
#[no_mangle]
pub unsafe extern "C" fn ts_cert_hi(cert: *const TsCert, out_hi: *mut u64, out_infinite: *mut bool) -> i32 {
    guard(|| {
        let c = handle(cert)?;
        let (hi, inf) = match c.ct.hi {
            Time::Fin(h) => (h, false),
            Time::Inf => (0, true),
        };
        *out_hi.as_mut().ok_or(Error::Null)? = hi;
        *out_infinite.as_mut().ok_or(Error::Null)? = inf;
        Ok(TS_PASS)
    })
}

/// Re-checks a certificate at `probes` fresh channel names.
#[no_mangle]
pub unsafe extern "C" fn ts_cert_validate(cert: *const TsCert, probes: u64, out_report: *mut *mut c_char) -> i32 {
    guard(|| Ok(report(cli::validate(&ct_to_json(&handle(cert)?.ct), probes), out_report)))
}

/// Membership of a certificate in `ty` at `time`, as a provider, or as a
/// client when `client` is set. `spec` supplies aliases and may be null.
#[no_mangle]
pub unsafe extern "C" fn ts_cert_semcheck(
    cert: *const TsCert,
    spec: *const TsSpec,
    ty: *const c_char,
    time: u64,
    client: bool,
    horizon: u64,
    out_report: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let c = handle(cert)?;
        let env = match spec.as_ref() {
            Some(s) => s.aliases.clone(),
            None => Aliases::new(),
        };
        let mode = if client { Mode::Star } else { Mode::NoStar };
        let r = cli::semcheck(&ct_to_json(&c.ct), text(ty)?, &env, Some(time), mode, &budget(horizon));
        Ok(report(r, out_report))
    })
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ts_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
