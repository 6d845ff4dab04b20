use std::ffi::{CStr, CString};
use std::ptr;

use crown_verifier_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { cv_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cv_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn figure1_round_trip() {
    let fig = cv_instance_figure1();
    assert_eq!(unsafe { cv_instance_vertex_count(fig) }, 6);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { cv_instance_to_json(fig, &mut json) }, CvStatus::Ok);
    let text = CString::new(take(json)).unwrap();
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { cv_instance_from_json(text.as_ptr(), &mut copy) }, CvStatus::Ok);

    let mut empty = false;
    let mut element = ptr::null_mut();
    assert_eq!(unsafe { cv_crown_empty(copy, 0, &mut empty, &mut element) }, CvStatus::Ok);
    assert!(empty);
    assert!(element.is_null());

    let stmt = CString::new("FIG_1_COUNTEREX").unwrap();
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { cv_verify(stmt.as_ptr(), copy, 0, false, &mut v) }, CvStatus::Ok);
    let mut outcome = CvOutcome::Counterexample;
    assert_eq!(unsafe { cv_verdict_outcome(v, &mut outcome) }, CvStatus::Ok);
    assert_eq!(outcome, CvOutcome::Holds);
    let mut ok = false;
    assert_eq!(unsafe { cv_recheck(v, copy, false, &mut ok) }, CvStatus::Ok);
    assert!(ok);

    unsafe {
        cv_verdict_free(v);
        cv_instance_free(copy);
        cv_instance_free(fig);
    }
}

#[test]
fn verdicts_survive_json_and_reject_edits() {
    let fig = cv_instance_figure1();
    let stmt = CString::new("FIG_1_COUNTEREX").unwrap();
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { cv_verify(stmt.as_ptr(), fig, 0, false, &mut v) }, CvStatus::Ok);
    let mut line = ptr::null_mut();
    assert_eq!(unsafe { cv_verdict_to_json(v, &mut line) }, CvStatus::Ok);
    let line = take(line);

    // A verdict for another instance rechecks as false.
    let fp = line.find("\"fingerprint\":\"").unwrap() + 15;
    let flipped = if &line[fp..fp + 1] == "0" { "1" } else { "0" };
    let edited = CString::new(format!("{}{flipped}{}", &line[..fp], &line[fp + 1..])).unwrap();
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { cv_verdict_from_json(edited.as_ptr(), &mut w) }, CvStatus::Ok);
    let mut ok = true;
    assert_eq!(unsafe { cv_recheck(w, fig, false, &mut ok) }, CvStatus::Ok);
    assert!(!ok);

    // A certificate of the wrong shape is an input error.
    let reshaped = CString::new(line.replacen("\"holds\"", "\"counterexample\"", 1)).unwrap();
    let mut x = ptr::null_mut();
    assert_eq!(unsafe { cv_verdict_from_json(reshaped.as_ptr(), &mut x) }, CvStatus::Ok);
    assert_eq!(unsafe { cv_recheck(x, fig, false, &mut ok) }, CvStatus::Input);
    assert!(last_error().contains("malformed"), "{}", last_error());
    unsafe { cv_verdict_free(x) };
    unsafe {
        cv_verdict_free(w);
        cv_verdict_free(v);
        cv_instance_free(fig);
    }
}

#[test]
fn solve_with_and_without_a_precoloring() {
    let fig = cv_instance_figure1();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cv_solve(fig, ptr::null(), 0, &mut out) }, CvStatus::Ok);
    assert!(take(out).starts_with("{\"coloring\":"));

    // a b d c f along P leaves u1, which sees p0, q0 and q1, without a color.
    let phi = CString::new(r#"{"0":0,"3":1,"5":3,"4":2,"2":4}"#).unwrap();
    assert_eq!(unsafe { cv_solve(fig, phi.as_ptr(), 0, &mut out) }, CvStatus::Ok);
    assert_eq!(take(out), r#"{"status":"UNSAT"}"#);

    // Off-list colors are rejected.
    let phi = CString::new(r#"{"0":6}"#).unwrap();
    assert_eq!(unsafe { cv_solve(fig, phi.as_ptr(), 0, &mut out) }, CvStatus::Input);
    assert!(!last_error().is_empty());
    unsafe { cv_instance_free(fig) };
}

#[test]
fn errors_are_codes_with_messages() {
    let bad = CString::new("{not json").unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { cv_instance_from_json(bad.as_ptr(), &mut inst) }, CvStatus::Input);
    assert!(inst.is_null());
    assert!(last_error().contains("JSON"), "{}", last_error());

    assert_eq!(unsafe { cv_instance_from_json(ptr::null(), &mut inst) }, CvStatus::NullArgument);

    let fig = cv_instance_figure1();
    let stmt = CString::new("THM_9_9").unwrap();
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { cv_verify(stmt.as_ptr(), fig, 0, false, &mut v) }, CvStatus::UnknownStatement);
    assert_eq!(unsafe { cv_verify(stmt.as_ptr(), ptr::null(), 0, false, &mut v) }, CvStatus::UnknownStatement);
    let stmt = CString::new("FIG_1_COUNTEREX").unwrap();
    assert_eq!(unsafe { cv_verify(stmt.as_ptr(), ptr::null(), 0, false, &mut v) }, CvStatus::NullArgument);

    // A success clears the message.
    let mut n = ptr::null_mut();
    assert_eq!(unsafe { cv_instance_to_json(fig, &mut n) }, CvStatus::Ok);
    take(n);
    assert_eq!(last_error(), "");
    unsafe {
        cv_instance_free(fig);
        cv_instance_free(ptr::null_mut());
        cv_verdict_free(ptr::null_mut());
        cv_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/crown_verifier.h");
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/crown_verifier.h");
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(status) =
            std::process::Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header]).status()
        else {
            eprintln!("{cc} not found; skipping");
            continue;
        };
        assert!(status.success(), "{cc} rejected the header");
    }
}
