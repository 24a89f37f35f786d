//! C ABI for the efx solver.
//!
//! Instances and allocations cross the boundary as opaque handles created
//! from the same JSON documents the CLI reads; every fallible call returns
//! an [`EfxStatus`] and leaves a human-readable message retrievable via
//! [`efx_last_error`]. Strings returned to the caller are NUL-terminated,
//! allocated by Rust, and must be released with [`efx_string_free`];
//! handles must be released with their matching `*_free` function.
//!
//! The generated header lives at `include/efx.h` (rebuilt by `build.rs` on
//! every change to this file).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use efx::checker::{self, ValueMode};
use efx::engine::{self, EngineError, SolveOptions};
use efx::model::allocation_valid;
use efx::{Allocation, Instance};

/// Outcome of a fallible FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfxStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input could not be decoded (malformed JSON or rational).
    ParseError = 3,
    /// The input decoded but violates a semantic invariant.
    ValidationError = 4,
    /// The allocation is not EFX; the witness is in the last error message.
    NotEfx = 5,
    /// The solver hit its iteration cap before completing.
    IterationCap = 6,
    /// An internal assertion or certification failed (a library bug).
    InternalError = 7,
}

/// Which value order a verification runs under.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfxValueMode {
    /// True (raw) values; ties between distinct bundles are possible.
    Raw = 0,
    /// The symbolic tie-broken order used inside the solver.
    Symbolic = 1,
}

/// Opaque handle to a problem instance.
pub struct EfxInstance(Instance);

/// Opaque handle to an allocation.
pub struct EfxAllocation(Allocation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl std::fmt::Display) {
    let text = message.to_string();
    let c = CString::new(text.replace('\0', " "))
        .expect("NUL bytes were just replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Returns the most recent error message on this thread as a fresh
/// NUL-terminated string, or NULL if the last call succeeded. The caller
/// owns the string and must release it with [`efx_string_free`].
#[no_mangle]
pub extern "C" fn efx_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |c| c.clone().into_raw())
    })
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
///
/// `s` must be NULL or a pointer previously returned by one of this
/// library's string-returning functions, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn efx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Returns the library version as a static NUL-terminated string. Do not
/// free it.
#[no_mangle]
pub extern "C" fn efx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn utf8_arg<'a>(s: *const c_char) -> Result<&'a str, EfxStatus> {
    if s.is_null() {
        set_last_error("required string argument is NULL");
        return Err(EfxStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_last_error("string argument is not valid UTF-8");
        EfxStatus::InvalidUtf8
    })
}

fn string_out(json: String) -> *mut c_char {
    CString::new(json)
        .expect("serialized JSON contains no NUL bytes")
        .into_raw()
}

/// Parses an instance from its JSON document into a new handle stored in
/// `*out`. On any error `*out` is NULL. The handle must be released with
/// [`efx_instance_free`].
///
/// # Safety
///
/// `json` must be NULL or a valid NUL-terminated string; `out` must be a
/// valid pointer to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn efx_instance_from_json(
    json: *const c_char,
    out: *mut *mut EfxInstance,
) -> EfxStatus {
    clear_last_error();
    if out.is_null() {
        set_last_error("output pointer is NULL");
        return EfxStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let text = match utf8_arg(json) {
        Ok(text) => text,
        Err(status) => return status,
    };
    match Instance::from_json(text) {
        Ok(instance) => {
            *out = Box::into_raw(Box::new(EfxInstance(instance)));
            EfxStatus::Ok
        }
        Err(e) => {
            set_last_error(e);
            EfxStatus::ParseError
        }
    }
}

/// Serializes an instance back to its JSON document. Returns NULL if
/// `instance` is NULL. The caller frees the string with
/// [`efx_string_free`].
///
/// # Safety
///
/// `instance` must be NULL or a live handle from
/// [`efx_instance_from_json`].
#[no_mangle]
pub unsafe extern "C" fn efx_instance_to_json(instance: *const EfxInstance) -> *mut c_char {
    match instance.as_ref() {
        Some(handle) => string_out(handle.0.to_json()),
        None => ptr::null_mut(),
    }
}

/// Number of agents in the instance; 0 if `instance` is NULL.
///
/// # Safety
///
/// `instance` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn efx_instance_agent_count(instance: *const EfxInstance) -> usize {
    instance.as_ref().map_or(0, |handle| handle.0.agent_count())
}

/// Number of items in the instance; 0 if `instance` is NULL.
///
/// # Safety
///
/// `instance` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn efx_instance_item_count(instance: *const EfxInstance) -> usize {
    instance.as_ref().map_or(0, |handle| handle.0.item_count())
}

/// Releases an instance handle. NULL is a no-op.
///
/// # Safety
///
/// `instance` must be NULL or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn efx_instance_free(instance: *mut EfxInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Parses an allocation from its JSON document into a new handle stored in
/// `*out`. On any error `*out` is NULL. The handle must be released with
/// [`efx_allocation_free`].
///
/// # Safety
///
/// `json` must be NULL or a valid NUL-terminated string; `out` must be a
/// valid pointer to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn efx_allocation_from_json(
    json: *const c_char,
    out: *mut *mut EfxAllocation,
) -> EfxStatus {
    clear_last_error();
    if out.is_null() {
        set_last_error("output pointer is NULL");
        return EfxStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let text = match utf8_arg(json) {
        Ok(text) => text,
        Err(status) => return status,
    };
    match Allocation::from_json(text) {
        Ok(allocation) => {
            *out = Box::into_raw(Box::new(EfxAllocation(allocation)));
            EfxStatus::Ok
        }
        Err(e) => {
            set_last_error(e);
            EfxStatus::ParseError
        }
    }
}

/// Serializes an allocation back to its JSON document. Returns NULL if
/// `allocation` is NULL. The caller frees the string with
/// [`efx_string_free`].
///
/// # Safety
///
/// `allocation` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn efx_allocation_to_json(allocation: *const EfxAllocation) -> *mut c_char {
    match allocation.as_ref() {
        Some(handle) => string_out(handle.0.to_json()),
        None => ptr::null_mut(),
    }
}

/// Releases an allocation handle. NULL is a no-op.
///
/// # Safety
///
/// `allocation` must be NULL or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn efx_allocation_free(allocation: *mut EfxAllocation) {
    if !allocation.is_null() {
        drop(Box::from_raw(allocation));
    }
}

/// Computes a complete EFX allocation for `instance`, storing a new handle
/// in `*out`. `max_steps` caps the improvement loop (pass 1000000 for the
/// default); `assert_lemmas` enables runtime checks of theorem-guaranteed
/// facts on every step. On any error `*out` is NULL and the message is
/// available via [`efx_last_error`].
///
/// # Safety
///
/// `instance` must be NULL or a live handle; `out` must be a valid pointer
/// to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn efx_solve(
    instance: *const EfxInstance,
    max_steps: u64,
    assert_lemmas: bool,
    out: *mut *mut EfxAllocation,
) -> EfxStatus {
    clear_last_error();
    if out.is_null() {
        set_last_error("output pointer is NULL");
        return EfxStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let Some(handle) = instance.as_ref() else {
        set_last_error("instance handle is NULL");
        return EfxStatus::NullArgument;
    };
    let options = SolveOptions {
        max_steps,
        assert_lemmas,
    };
    match engine::solve(&handle.0, &options) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(EfxAllocation(result.allocation)));
            EfxStatus::Ok
        }
        Err(e) => {
            let status = match &e {
                EngineError::InvalidInstance { .. } => EfxStatus::ValidationError,
                EngineError::IterationCap { .. } => EfxStatus::IterationCap,
                EngineError::Assertion { .. } | EngineError::Certification { .. } => {
                    EfxStatus::InternalError
                }
            };
            set_last_error(e);
            status
        }
    }
}

/// Checks that `allocation` is well-formed for `instance` and EFX under
/// `mode`. Returns `Ok`, `ValidationError`, or `NotEfx`; for the latter
/// two, [`efx_last_error`] describes the first violation or the envy
/// witness.
///
/// # Safety
///
/// `instance` and `allocation` must each be NULL or live handles.
#[no_mangle]
pub unsafe extern "C" fn efx_verify(
    instance: *const EfxInstance,
    allocation: *const EfxAllocation,
    mode: EfxValueMode,
) -> EfxStatus {
    clear_last_error();
    let (Some(instance), Some(allocation)) = (instance.as_ref(), allocation.as_ref()) else {
        set_last_error("instance or allocation handle is NULL");
        return EfxStatus::NullArgument;
    };
    let violations = instance.0.validate();
    if !violations.is_empty() {
        set_last_error(&violations[0]);
        return EfxStatus::ValidationError;
    }
    let violations = allocation_valid(&instance.0, &allocation.0);
    if !violations.is_empty() {
        set_last_error(&violations[0]);
        return EfxStatus::ValidationError;
    }
    let mode = match mode {
        EfxValueMode::Raw => ValueMode::Raw,
        EfxValueMode::Symbolic => ValueMode::Symbolic,
    };
    match checker::check_efx(&instance.0, &allocation.0, mode) {
        Ok(()) => EfxStatus::Ok,
        Err(witness) => {
            set_last_error(format!(
                "agent {} EFX-envies agent {} even after removing item {}",
                witness.envious, witness.envied, witness.removed
            ));
            EfxStatus::NotEfx
        }
    }
}
