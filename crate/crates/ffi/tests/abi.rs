use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use hblcert_ffi::*;

fn fixture(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    CString::new(std::fs::read_to_string(p).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = hbl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn datum(name: &str) -> *mut HblDatum {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hbl_datum_from_json(fixture(name).as_ptr(), &mut d) }, HblStatus::Ok);
    d
}

fn presentation(name: &str) -> *mut HblPresentation {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { hbl_presentation_from_json(fixture(name).as_ptr(), &mut p) }, HblStatus::Ok);
    p
}

#[test]
fn verify_and_bound_r6() {
    let d = datum("r6_data.json");
    let p = presentation("r6_presentation.json");
    unsafe {
        assert_eq!(hbl_verify(d, p), HblStatus::Ok);
        assert!(hbl_last_error().is_null());
        let mut c = 0.0;
        assert_eq!(hbl_bound(d, p, &mut c), HblStatus::Ok);
        assert!((c - 0.5f64.sqrt()).abs() < 1e-15);
        hbl_presentation_free(p);
        hbl_datum_free(d);
    }
}

#[test]
fn mismatch_is_invalid_with_reason() {
    let d = datum("lw2_violating_data.json");
    let p = presentation("lw2_presentation.json");
    unsafe {
        assert_eq!(hbl_verify(d, p), HblStatus::Invalid);
        assert!(last_error().contains("theta1 has mass 1/2 but tau1 = 3/4"), "{}", last_error());
        let mut c = 0.0;
        assert_eq!(hbl_bound(d, p, &mut c), HblStatus::Invalid);
        hbl_presentation_free(p);
        hbl_datum_free(d);
    }
}

#[test]
fn build_round_trips_through_json() {
    let d = datum("lw3_data.json");
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(hbl_build(d, 512, &mut p), HblStatus::Ok);
        assert_eq!(hbl_verify(d, p), HblStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(hbl_presentation_to_json(p, &mut s), HblStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(hbl_presentation_from_json(s, &mut q), HblStatus::Ok);
        assert_eq!(hbl_verify(d, q), HblStatus::Ok);
        hbl_string_free(s);
        hbl_presentation_free(q);
        hbl_presentation_free(p);
        hbl_datum_free(d);
    }
}

#[test]
fn build_reports_violation() {
    let d = datum("lw2_violating_data.json");
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(hbl_build(d, 512, &mut p), HblStatus::Failed);
        assert!(p.is_null());
        assert!(last_error().contains("span{e1}"), "{}", last_error());
        hbl_datum_free(d);
    }
}

#[test]
fn bad_arguments() {
    unsafe {
        let mut d = ptr::null_mut();
        let junk = CString::new("{\"dim\": ").unwrap();
        assert_eq!(hbl_datum_from_json(junk.as_ptr(), &mut d), HblStatus::Parse);
        assert!(d.is_null());
        assert!(last_error().contains("line 1"), "{}", last_error());
        assert_eq!(hbl_datum_from_json(ptr::null(), &mut d), HblStatus::NullArgument);
        assert_eq!(hbl_verify(ptr::null(), ptr::null()), HblStatus::NullArgument);
        hbl_datum_free(ptr::null_mut());
        hbl_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/hblcert.h")).unwrap();
    for name in [
        "hbl_last_error",
        "hbl_datum_from_json",
        "hbl_datum_free",
        "hbl_presentation_from_json",
        "hbl_presentation_free",
        "hbl_verify",
        "hbl_bound",
        "hbl_build",
        "hbl_presentation_to_json",
        "hbl_string_free",
        "typedef struct HblDatum HblDatum;",
        "HBL_STATUS_PANIC = 5",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
