use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use axiomlab_ffi::*;

const N3K3: &str = r#"{"n": 3, "objects": [{"name": "a", "capacity": 1}, {"name": "b", "capacity": 1}, {"name": "c", "capacity": 1}]}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { axl_string_free(s) };
    out
}

fn last_error() -> String {
    let p = axl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn instance(json: &str) -> *mut AxlInstance {
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { axl_instance_from_json(c(json).as_ptr(), &mut inst) }, AxlStatus::Ok);
    inst
}

#[test]
fn rsd_round_trip() {
    let inst = instance(N3K3);
    assert_eq!(unsafe { axl_instance_num_agents(inst) }, 3);
    assert_eq!(unsafe { axl_instance_num_objects(inst) }, 3);
    let mut profile = ptr::null_mut();
    let p = c(r#"[["a","b","c"],["a","b","c"],["b","a","c"]]"#);
    assert_eq!(unsafe { axl_profile_from_json(inst, p.as_ptr(), &mut profile) }, AxlStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { axl_rsd_json(inst, profile, &mut out) }, AxlStatus::Ok);
    let lottery: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    let got: Vec<(String, String)> = lottery
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let m: Vec<&str> = e["matching"].as_array().unwrap().iter().map(|o| o.as_str().unwrap()).collect();
            (m.concat(), e["weight"].as_str().unwrap().to_string())
        })
        .collect();
    // the six orders: 012 abc, 021 acb, 102 bac, 120 cab, 201 acb, 210 cab
    let expected = [("abc", "1/6"), ("acb", "1/3"), ("bac", "1/6"), ("cab", "1/3")];
    assert_eq!(got, expected.map(|(m, w)| (m.to_string(), w.to_string())).to_vec());
    unsafe {
        axl_profile_free(profile);
        axl_instance_free(inst);
    }
}

#[test]
fn check_rule_reports_pass_and_fail() {
    let inst = instance(N3K3);
    let mut out = ptr::null_mut();
    let status = unsafe { axl_check_rule(inst, c("sd").as_ptr(), c("sp").as_ptr(), &mut out) };
    assert_eq!(status, AxlStatus::Ok);
    assert!(take(out).contains("\"verdict\": \"pass\""));
    let status = unsafe { axl_check_rule(inst, c("rsd").as_ptr(), c("ex-post-pareto").as_ptr(), &mut out) };
    assert_eq!(status, AxlStatus::Ok);
    take(out);
    let status = unsafe { axl_check_rule(inst, c("rsd").as_ptr(), c("sp").as_ptr(), &mut out) };
    assert_eq!(status, AxlStatus::NotApplicable);
    assert!(last_error().contains("not applicable"));
    unsafe { axl_instance_free(inst) };
}

#[test]
fn theorem_harness() {
    let inst = instance(N3K3);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { axl_verify_theorem1(inst, c("rsd").as_ptr(), &mut out) }, AxlStatus::Ok);
    assert!(take(out).contains("\"status\": \"verified\""));
    unsafe { axl_instance_free(inst) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { axl_instance_from_json(ptr::null(), &mut inst) }, AxlStatus::NullPointer);
    assert_eq!(unsafe { axl_instance_from_json(c("{\"n\": ").as_ptr(), &mut inst) }, AxlStatus::InvalidInput);
    assert!(last_error().contains("line 1"));
    assert_eq!(unsafe { axl_instance_from_json(c(N3K3).as_ptr(), ptr::null_mut()) }, AxlStatus::NullPointer);
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { axl_instance_from_json(bad.as_ptr().cast(), &mut inst) }, AxlStatus::InvalidUtf8);
    let ok = instance(N3K3);
    let mut out = ptr::null_mut();
    let status = unsafe { axl_check_rule(ok, c("sd").as_ptr(), c("no-such-axiom").as_ptr(), &mut out) };
    assert_eq!(status, AxlStatus::InvalidInput);
    unsafe { axl_instance_free(ok) };
    unsafe { axl_string_free(ptr::null_mut()) };
    assert_eq!(unsafe { axl_instance_num_agents(ptr::null()) }, 0);
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(axl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_generated_and_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/axiomlab.h")).unwrap();
    for name in [
        "axl_instance_from_json",
        "axl_profile_from_json",
        "axl_rsd_json",
        "axl_check_rule",
        "axl_verify_theorem1",
        "axl_string_free",
        "axl_last_error_message",
        "AXL_STATUS_FAIL = 1",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    // Syntax-check a C client against the header when a compiler is around.
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/smoke.c"))
        .status()
    else {
        return;
    };
    assert!(status.success());
}
