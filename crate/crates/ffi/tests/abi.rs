use std::ffi::{c_char, CStr, CString};
use std::ptr;

use serde_json::Value;
use thetagraph_ffi::*;

const UNIT_THETA: &str = r#"{"vertices":["u","v"],"edges":[
    {"id":"e1","ends":["u","v"],"length":"1"},
    {"id":"e2","ends":["u","v"],"length":"1"},
    {"id":"e3","ends":["u","v"],"length":"1"}]}"#;

const C4: &str = r#"{"vertices":["a","b","c","d"],"edges":[
    {"id":"ab","ends":["a","b"],"length":"1"},
    {"id":"bc","ends":["b","c"],"length":"1"},
    {"id":"cd","ends":["c","d"],"length":"1"},
    {"id":"da","ends":["d","a"],"length":"1"}]}"#;

fn graph(json: &str) -> *mut TgGraph {
    let text = CString::new(json).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { tg_graph_from_json(text.as_ptr(), &mut g) }, TgStatus::Ok);
    assert!(!g.is_null());
    g
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { tg_string_free(s) };
    out
}

fn last_error() -> Option<String> {
    let p = tg_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn graph_round_trip_and_counts() {
    let g = graph(UNIT_THETA);
    let (mut v, mut e) = (0usize, 0usize);
    assert_eq!(unsafe { tg_graph_counts(g, &mut v, &mut e) }, TgStatus::Ok);
    assert_eq!((v, e), (2, 3));
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_graph_to_json(g, &mut s) }, TgStatus::Ok);
    let again = graph(&take(s));
    unsafe {
        tg_graph_free(again);
        tg_graph_free(g);
    }
}

#[test]
fn distance_is_exact() {
    let g = graph(UNIT_THETA);
    let p = CString::new(r#"{"edge":"e1","offset":"1/3"}"#).unwrap();
    let q = CString::new(r#"{"edge":"e2","offset":"1/4"}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_distance(g, p.as_ptr(), q.as_ptr(), &mut s) }, TgStatus::Ok);
    assert_eq!(take(s), "7/12");
    unsafe { tg_graph_free(g) };
}

#[test]
fn theta_queries() {
    let g = graph(UNIT_THETA);
    let c4 = graph(C4);
    let mut has = false;
    assert_eq!(unsafe { tg_contains_theta(g, &mut has) }, TgStatus::Ok);
    assert!(has);
    assert_eq!(unsafe { tg_contains_theta(c4, &mut has) }, TgStatus::Ok);
    assert!(!has);

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_minimal_theta_json(g, &mut s) }, TgStatus::Ok);
    let cert: Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(cert["kind"], "theta");
    assert_eq!(cert["theta"]["total"], "3");

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_witness_json(c4, &mut s) }, TgStatus::NoTheta);
    assert!(s.is_null());
    assert!(last_error().unwrap().contains("no theta"));
    unsafe {
        tg_graph_free(g);
        tg_graph_free(c4);
    }
}

#[test]
fn witness_refutes_negative_type_and_verifies() {
    let g = graph(UNIT_THETA);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_witness_json(g, &mut s) }, TgStatus::Ok);
    let witness = take(s);
    let cert: Value = serde_json::from_str(&witness).unwrap();
    assert_eq!(cert["gap"], "1/12");

    let w = CString::new(witness).unwrap();
    assert_eq!(unsafe { tg_verify_json(g, w.as_ptr()) }, TgStatus::Ok);

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_negtype_json(g, w.as_ptr(), &mut s) }, TgStatus::Refuted);
    let neg = CString::new(take(s)).unwrap();
    assert_eq!(unsafe { tg_verify_json(g, neg.as_ptr()) }, TgStatus::Ok);

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_negtype_json(g, ptr::null(), &mut s) }, TgStatus::Ok);
    take(s);
    unsafe { tg_graph_free(g) };
}

#[test]
fn tampered_certificate_is_refuted_with_reason() {
    let g = graph(UNIT_THETA);
    let mut s = ptr::null_mut();
    unsafe { tg_witness_json(g, &mut s) };
    let mut cert: Value = serde_json::from_str(&take(s)).unwrap();
    cert["gap"] = Value::String("1/5".into());
    let text = CString::new(cert.to_string()).unwrap();
    assert_eq!(unsafe { tg_verify_json(g, text.as_ptr()) }, TgStatus::Refuted);
    assert!(last_error().is_some());
    unsafe { tg_graph_free(g) };
}

#[test]
fn l1_decides_and_honours_bound() {
    let g = graph(C4);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_l1_json(g, ptr::null(), 0, &mut s) }, TgStatus::Ok);
    let cert: Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(cert["result"]["verdict"], "embeddable");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tg_l1_json(g, ptr::null(), 3, &mut s) }, TgStatus::SizeBound);
    assert!(s.is_null());
    unsafe { tg_graph_free(g) };
}

#[test]
fn bad_arguments_are_reported() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { tg_graph_from_json(ptr::null(), &mut g) }, TgStatus::NullPointer);
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { tg_graph_from_json(bad.as_ptr(), &mut g) }, TgStatus::InvalidInput);
    assert!(g.is_null());
    assert!(last_error().is_some());
    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { tg_graph_from_json(invalid.as_ptr() as *const c_char, &mut g) },
        TgStatus::InvalidUtf8
    );
    let mut has = false;
    assert_eq!(unsafe { tg_contains_theta(ptr::null(), &mut has) }, TgStatus::NullPointer);

    let real = graph(UNIT_THETA);
    assert_eq!(unsafe { tg_contains_theta(real, ptr::null_mut()) }, TgStatus::NullPointer);
    let unknown = CString::new(r#"{"vertex":"nope"}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { tg_distance(real, unknown.as_ptr(), unknown.as_ptr(), &mut s) },
        TgStatus::InvalidInput
    );
    assert_eq!(unsafe { tg_contains_theta(real, &mut has) }, TgStatus::Ok);
    assert!(last_error().is_none());
    unsafe {
        tg_graph_free(real);
        tg_graph_free(ptr::null_mut());
        tg_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/thetagraph.h")).unwrap();
    for name in [
        "typedef struct TgGraph TgGraph",
        "TG_STATUS_OK",
        "TG_STATUS_REFUTED",
        "tg_graph_from_json",
        "tg_graph_free",
        "tg_graph_counts",
        "tg_graph_to_json",
        "tg_distance",
        "tg_contains_theta",
        "tg_minimal_theta_json",
        "tg_witness_json",
        "tg_negtype_json",
        "tg_l1_json",
        "tg_verify_json",
        "tg_last_error",
        "tg_string_free",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
