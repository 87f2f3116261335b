use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use loewner_ffi::*;

const E: f64 = std::f64::consts::E;

fn new_chain(json: &str) -> (LoewnerStatus, *mut LoewnerChain) {
    let cfg = CString::new(json).unwrap();
    let mut chain = ptr::null_mut();
    let status = unsafe { loewner_chain_new(cfg.as_ptr(), &mut chain) };
    (status, chain)
}

fn last_error() -> String {
    let p = loewner_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn constant_unit_chain_round_trip() {
    let (status, chain) = new_chain(r#"{"N": 8}"#);
    assert_eq!(status, LoewnerStatus::Ok);
    assert!(loewner_last_error_message().is_null());
    unsafe {
        assert_eq!(loewner_chain_evolve_to(chain, 1.0), LoewnerStatus::Ok);
        let (mut t, mut n) = (0.0, 0usize);
        assert_eq!(loewner_chain_info(chain, &mut t, &mut n), LoewnerStatus::Ok);
        assert_eq!((t, n), (1.0, 8));

        let mut buf = vec![0.0; 16];
        assert_eq!(loewner_chain_coefficients(chain, buf.as_mut_ptr(), buf.len()), LoewnerStatus::Ok);
        assert!((buf[0] - E).abs() < 1e-8);
        assert!(buf[1..].iter().all(|&x| x.abs() < 1e-14));
        assert_eq!(loewner_chain_coefficients(chain, buf.as_mut_ptr(), 15), LoewnerStatus::BufferTooSmall);

        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(loewner_chain_evaluate(chain, 0.5, 0.0, &mut re, &mut im), LoewnerStatus::Ok);
        assert!((re - 0.5 * E).abs() < 1e-8 && im == 0.0);

        let (mut d, mut s) = (0.0, 0.0);
        assert_eq!(loewner_chain_energies(chain, &mut d, &mut s), LoewnerStatus::Ok);
        assert!((s - 2.0 * std::f64::consts::PI).abs() < 1e-8);

        let (mut t1, mut t2, mut rhs) = (0.0, 0.0, 0.0);
        assert_eq!(loewner_chain_action_rate(chain, &mut t1, &mut t2, &mut rhs), LoewnerStatus::Ok);
        assert!((rhs - 2.0 * std::f64::consts::PI).abs() < 1e-10);
        loewner_chain_free(chain);
    }
}

#[test]
fn invalid_config_reports_code() {
    let (status, chain) = new_chain(r#"{"N": 4}"#);
    assert_eq!(status, LoewnerStatus::InvalidInput);
    assert!(chain.is_null());
    assert!(last_error().starts_with("config:"), "{}", last_error());

    let bad_density = r#"{"driver": {"kind": "smooth_density", "keyframes": [{"t": 0.0, "density": {"K": 0, "nu_hat": [[3.0, 0.0]]}}]}}"#;
    let (status, _) = new_chain(bad_density);
    assert_eq!(status, LoewnerStatus::InvalidInput);
    assert!(last_error().starts_with("invalid_density"));
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        let mut chain = ptr::null_mut();
        assert_eq!(loewner_chain_new(ptr::null(), &mut chain), LoewnerStatus::NullPointer);
        assert_eq!(loewner_chain_evolve_to(ptr::null_mut(), 1.0), LoewnerStatus::NullPointer);
        let (mut t, mut n) = (0.0, 0usize);
        assert_eq!(loewner_chain_info(ptr::null(), &mut t, &mut n), LoewnerStatus::NullPointer);
        loewner_chain_free(ptr::null_mut());
        loewner_string_free(ptr::null_mut());
    }
}

#[test]
fn slit_chain_has_no_action_rate_and_bad_time_keeps_state() {
    let (status, chain) = new_chain(r#"{"N": 8, "driver": {"kind": "slit_kernel", "u": [[0.0, 0.0]]}}"#);
    assert_eq!(status, LoewnerStatus::Ok);
    unsafe {
        assert_eq!(loewner_chain_evolve_to(chain, 0.2), LoewnerStatus::Ok);
        assert_eq!(loewner_chain_evolve_to(chain, f64::NAN), LoewnerStatus::InvalidArgument);
        let (mut t, mut n) = (0.0, 0usize);
        loewner_chain_info(chain, &mut t, &mut n);
        assert_eq!(t, 0.2);
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        assert_eq!(loewner_chain_action_rate(chain, &mut a, &mut b, &mut c), LoewnerStatus::InvalidInput);
        loewner_chain_free(chain);
    }
}

#[test]
fn json_outputs() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(loewner_neretin_table_json(3, 12.0, &mut out), LoewnerStatus::Ok);
        let table: serde_json::Value = serde_json::from_str(CStr::from_ptr(out).to_str().unwrap()).unwrap();
        loewner_string_free(out);
        assert_eq!(table.as_array().unwrap().len(), 2);
        assert_eq!(table[0]["k"], 2);

        let cfg = CString::new(r#"{"N": 8}"#).unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(loewner_verify_theorem1_json(cfg.as_ptr(), 0.5, &mut out), LoewnerStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(CStr::from_ptr(out).to_str().unwrap()).unwrap();
        loewner_string_free(out);
        let rhs = report["theorem1_rhs"].as_f64().unwrap();
        assert!((rhs - 2.0 * std::f64::consts::PI).abs() < 1e-10);

        assert_eq!(loewner_neretin_table_json(1, 1.0, &mut out), LoewnerStatus::InvalidArgument);
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/loewner.h")).unwrap();
    for name in [
        "typedef struct LoewnerChain LoewnerChain",
        "LOEWNER_STATUS_OK = 0",
        "loewner_chain_new",
        "loewner_chain_free",
        "loewner_chain_evolve_to",
        "loewner_chain_coefficients",
        "loewner_last_error_message",
        "loewner_string_free",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include/loewner.h"))
        .status()
    else {
        eprintln!("no C compiler found; header syntax check skipped");
        return;
    };
    assert!(status.success());
}
