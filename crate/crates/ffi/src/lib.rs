//! C interface to the verifier.
//!
//! Instances and verdicts are opaque handles created and released here.
//! Every fallible call returns a `CvStatus`; on failure the message is
//! available from `cv_last_error` on the same thread until the next call.
//! Strings handed out by the library are released with `cv_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crown_verifier::instance::{figure1_instance, Instance};
use crown_verifier::lists::PartialColoring;
use crown_verifier::solver::{self, Budget, SolveError};
use crown_verifier::structure::{self, StructureError};
use crown_verifier::verifiers::{self, Outcome, StatementId, Verdict, VerifyError};

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not UTF-8.
    Utf8 = 2,
    /// Malformed or invalid input: instance, verdict, coloring.
    Input = 3,
    Timeout = 4,
    UnknownStatement = 5,
    /// The library panicked; the handles passed in are still valid.
    Internal = 6,
}

/// Outcome of a verdict.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvOutcome {
    Holds = 0,
    Counterexample = 1,
    HypothesisNotMet = 2,
}

impl From<Outcome> for CvOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Holds => CvOutcome::Holds,
            Outcome::Counterexample => CvOutcome::Counterexample,
            Outcome::HypothesisNotMet => CvOutcome::HypothesisNotMet,
        }
    }
}

/// A plane graph with lists, a path and the optional gluing inputs.
pub struct CvInstance(Instance);

/// The result of `cv_verify`, or a verdict read back from JSON.
pub struct CvVerdict(Verdict);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(CvStatus, String);

impl From<VerifyError> for Fail {
    fn from(e: VerifyError) -> Self {
        let code = match e {
            VerifyError::Timeout(_) => CvStatus::Timeout,
            VerifyError::UnknownStatement(_) => CvStatus::UnknownStatement,
            VerifyError::Input(_) => CvStatus::Input,
        };
        Fail(code, e.to_string())
    }
}

impl From<SolveError> for Fail {
    fn from(e: SolveError) -> Self {
        let code = if matches!(e, SolveError::Timeout(_)) { CvStatus::Timeout } else { CvStatus::Input };
        Fail(code, e.to_string())
    }
}

impl From<StructureError> for Fail {
    fn from(e: StructureError) -> Self {
        let code = if matches!(e, StructureError::Timeout(_)) { CvStatus::Timeout } else { CvStatus::Input };
        Fail(code, e.to_string())
    }
}

fn input(msg: impl ToString) -> Fail {
    Fail(CvStatus::Input, msg.to_string())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, records its error, and turns panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CvStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CvStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal error");
            CvStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(CvStatus::NullArgument, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(CvStatus::Utf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(CvStatus::NullArgument, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(CvStatus::NullArgument, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn budget(timeout_ms: u64) -> Budget {
    Budget::from_millis((timeout_ms > 0).then_some(timeout_ms))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn cv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from its JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cv_instance_from_json(json: *const c_char, out: *mut *mut CvInstance) -> CvStatus {
    guard(|| {
        let inst = Instance::from_json(text(json)?).map_err(input)?;
        put(out, Box::into_raw(Box::new(CvInstance(inst))))
    })
}

/// The built-in Figure 1 instance.
#[no_mangle]
pub extern "C" fn cv_instance_figure1() -> *mut CvInstance {
    Box::into_raw(Box::new(CvInstance(figure1_instance())))
}

/// The instance as JSON.
///
/// # Safety
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cv_instance_to_json(inst: *const CvInstance, out: *mut *mut c_char) -> CvStatus {
    guard(|| put(out, owned(handle(inst)?.0.to_json())))
}

/// Number of vertices of the instance, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cv_instance_vertex_count(inst: *const CvInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.emb.vertex_count())
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cv_instance_free(inst: *mut CvInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Verifies statement `stmt` (for example `"THM_2_1_THOMASSEN"`) on `inst`.
/// A `timeout_ms` of 0 means no limit. With `conclusion_only` set the
/// hypotheses are not checked first, for statements that allow it.
///
/// # Safety
/// `stmt` must be a NUL-terminated string, `inst` a live handle and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cv_verify(
    stmt: *const c_char,
    inst: *const CvInstance,
    timeout_ms: u64,
    conclusion_only: bool,
    out: *mut *mut CvVerdict,
) -> CvStatus {
    guard(|| {
        let id: StatementId = text(stmt)?.parse()?;
        let checks = if conclusion_only { verifiers::Checks::ConclusionOnly } else { verifiers::Checks::Full };
        let v = verifiers::verify_with(id, &handle(inst)?.0, &mut budget(timeout_ms), checks)?;
        put(out, Box::into_raw(Box::new(CvVerdict(v))))
    })
}

/// Reads a verdict from its JSON line.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cv_verdict_from_json(json: *const c_char, out: *mut *mut CvVerdict) -> CvStatus {
    guard(|| {
        let v: Verdict = serde_json::from_str(text(json)?.trim()).map_err(input)?;
        put(out, Box::into_raw(Box::new(CvVerdict(v))))
    })
}

/// The outcome of a verdict.
///
/// # Safety
/// `v` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cv_verdict_outcome(v: *const CvVerdict, out: *mut CvOutcome) -> CvStatus {
    guard(|| put(out, handle(v)?.0.outcome.into()))
}

/// The verdict as one JSON line.
///
/// # Safety
/// `v` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cv_verdict_to_json(v: *const CvVerdict, out: *mut *mut c_char) -> CvStatus {
    guard(|| put(out, owned(handle(v)?.0.to_json_line())))
}

/// Releases a verdict. Null is ignored.
///
/// # Safety
/// `v` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cv_verdict_free(v: *mut CvVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Rechecks a verdict's certificate against `inst` independently of the
/// search that produced it. `conclusion_only` must match the setting the
/// verdict was produced with.
///
/// # Safety
/// `v` and `inst` must be live handles and `ok` writable.
#[no_mangle]
pub unsafe extern "C" fn cv_recheck(
    v: *const CvVerdict,
    inst: *const CvInstance,
    conclusion_only: bool,
    ok: *mut bool,
) -> CvStatus {
    guard(|| {
        let checks = if conclusion_only { verifiers::Checks::ConclusionOnly } else { verifiers::Checks::Full };
        let r = verifiers::recheck_with(&handle(v)?.0, &handle(inst)?.0, checks).map_err(input)?;
        put(ok, r)
    })
}

/// Extends a precoloring, given as a JSON object from vertex to color such
/// as `{"0": 1}` (null for none), to an L-coloring of the whole graph.
/// Writes `{"status":"SAT","coloring":[...]}` or `{"status":"UNSAT"}`.
///
/// # Safety
/// `inst` must be a live handle, `coloring` null or a NUL-terminated
/// string, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cv_solve(
    inst: *const CvInstance,
    coloring: *const c_char,
    timeout_ms: u64,
    out: *mut *mut c_char,
) -> CvStatus {
    guard(|| {
        let inst = &handle(inst)?.0;
        let n = inst.emb.vertex_count();
        let mut phi = PartialColoring::empty(n);
        if !coloring.is_null() {
            let map: std::collections::BTreeMap<String, u8> = serde_json::from_str(text(coloring)?).map_err(input)?;
            for (k, c) in map {
                match k.parse::<usize>() {
                    Ok(v) if v < n => phi.set(v, c),
                    _ => return Err(input(format!("bad vertex {k:?}"))),
                }
            }
        }
        let doc = match solver::extend(&inst.emb, &inst.lists, &phi, &mut budget(timeout_ms))? {
            Some(c) => serde_json::json!({ "status": "SAT", "coloring": c }),
            None => serde_json::json!({ "status": "UNSAT" }),
        };
        put(out, owned(doc.to_string()))
    })
}

/// Whether Crown_L(P, G) is empty for the instance's path. When it is not,
/// and `element` is non-null, the first element is written there as JSON
/// pairs `[[v, c], ...]`; otherwise null is written.
///
/// # Safety
/// `inst` must be a live handle, `empty` writable, and `element` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cv_crown_empty(
    inst: *const CvInstance,
    timeout_ms: u64,
    empty: *mut bool,
    element: *mut *mut c_char,
) -> CvStatus {
    guard(|| {
        let inst = &handle(inst)?.0;
        let first = structure::crown_nonempty(&inst.emb, &inst.lists, &inst.path, &mut budget(timeout_ms))?;
        put(empty, first.is_none())?;
        if !element.is_null() {
            let s = first
                .map_or(ptr::null_mut(), |phi| owned(serde_json::to_string(&phi.pairs()).expect("pairs serialize")));
            element.write(s);
        }
        Ok(())
    })
}
