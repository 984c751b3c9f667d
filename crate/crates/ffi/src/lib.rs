//! C ABI over `hblcert`.
//!
//! Objects cross the boundary as opaque handles created from JSON text and
//! released with the matching `*_free`. Every call returns an [`HblStatus`];
//! on anything but `HBL_STATUS_OK` (and `HBL_STATUS_INVALID`, which is a verdict), a
//! message is available from [`hbl_last_error`] until the next call on the
//! same thread. Panics are caught and reported as `HBL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hblcert::builder::{build_presentation, BuildOptions};
use hblcert::io;
use hblcert::presentation::bound_constant;

/// Opaque HBL datum.
pub struct HblDatum(hblcert::HblDatum);

/// Opaque presentation.
pub struct HblPresentation(hblcert::Presentation);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HblStatus {
    Ok = 0,
    /// The presentation failed verification, or the datum is infeasible.
    Invalid = 1,
    NullArgument = 2,
    /// Input is not UTF-8 or does not parse.
    Parse = 3,
    /// A build or serialization could not finish.
    Failed = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> HblStatus) -> HblStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            HblStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, HblStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(HblStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("input is not UTF-8");
        HblStatus::Parse
    })
}

/// Last error message on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn hbl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a datum file's JSON text.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hbl_datum_from_json(json: *const c_char, out: *mut *mut HblDatum) -> HblStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return HblStatus::NullArgument;
        }
        let s = match text(json) {
            Ok(s) => s,
            Err(e) => return e,
        };
        match io::parse_datum(s) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(HblDatum(d)));
                HblStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                HblStatus::Parse
            }
        }
    })
}

/// # Safety
/// `d` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hbl_datum_free(d: *mut HblDatum) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Parses a presentation file's JSON text.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hbl_presentation_from_json(json: *const c_char, out: *mut *mut HblPresentation) -> HblStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return HblStatus::NullArgument;
        }
        let s = match text(json) {
            Ok(s) => s,
            Err(e) => return e,
        };
        match io::parse_presentation(s) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(HblPresentation(p)));
                HblStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                HblStatus::Parse
            }
        }
    })
}

/// # Safety
/// `p` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hbl_presentation_free(p: *mut HblPresentation) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `HBL_STATUS_OK` if `p` is a valid presentation of `d`, `HBL_STATUS_INVALID` otherwise;
/// the failed conditions are in [`hbl_last_error`].
///
/// # Safety
/// Handles must be live objects from this library.
#[no_mangle]
pub unsafe extern "C" fn hbl_verify(d: *const HblDatum, p: *const HblPresentation) -> HblStatus {
    guard(|| {
        let (Some(d), Some(p)) = (d.as_ref(), p.as_ref()) else {
            set_error("null handle");
            return HblStatus::NullArgument;
        };
        let report = hblcert::verify_presentation(&d.0, &p.0);
        if report.valid() {
            HblStatus::Ok
        } else {
            let why: Vec<String> = report.failures.iter().map(ToString::to_string).collect();
            set_error(why.join("; "));
            HblStatus::Invalid
        }
    })
}

/// Writes the certified constant `C` to `value`.
///
/// # Safety
/// Handles must be live objects from this library and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hbl_bound(d: *const HblDatum, p: *const HblPresentation, value: *mut f64) -> HblStatus {
    guard(|| {
        let (Some(d), Some(p)) = (d.as_ref(), p.as_ref()) else {
            set_error("null handle");
            return HblStatus::NullArgument;
        };
        if value.is_null() {
            set_error("null output pointer");
            return HblStatus::NullArgument;
        }
        match bound_constant(&d.0, &p.0) {
            Ok(c) => {
                *value = c.value;
                HblStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                HblStatus::Invalid
            }
        }
    })
}

/// Builds a presentation from the kernel lattice of `d`, capped at `max_lattice` subspaces.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hbl_build(d: *const HblDatum, max_lattice: usize, out: *mut *mut HblPresentation) -> HblStatus {
    guard(|| {
        let Some(d) = d.as_ref() else {
            set_error("null handle");
            return HblStatus::NullArgument;
        };
        if out.is_null() {
            set_error("null output pointer");
            return HblStatus::NullArgument;
        }
        let lattice = match d.0.generate_lattice(&[], max_lattice) {
            Ok(l) => l,
            Err(e) => {
                set_error(e.to_string());
                return HblStatus::Failed;
            }
        };
        let options = BuildOptions {
            max_lattice,
            ..BuildOptions::default()
        };
        match build_presentation(&d.0, &lattice.subspaces, &options) {
            Ok(outcome) => {
                *out = Box::into_raw(Box::new(HblPresentation(outcome.presentation)));
                HblStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                HblStatus::Failed
            }
        }
    })
}

/// Canonical JSON text of a presentation; release with [`hbl_string_free`].
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hbl_presentation_to_json(p: *const HblPresentation, out: *mut *mut c_char) -> HblStatus {
    guard(|| {
        let Some(p) = p.as_ref() else {
            set_error("null handle");
            return HblStatus::NullArgument;
        };
        if out.is_null() {
            set_error("null output pointer");
            return HblStatus::NullArgument;
        }
        match CString::new(io::serialize_presentation(&p.0)) {
            Ok(s) => {
                *out = s.into_raw();
                HblStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                HblStatus::Failed
            }
        }
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hbl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
