use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use hccc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hccc_last_error()) }.to_string_lossy().into_owned()
}

fn default_config() -> *mut HcccConfig {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { hccc_config_default(&mut cfg) }, HcccStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

fn set(cfg: *mut HcccConfig, s: &str) -> HcccStatus {
    let s = CString::new(s).unwrap();
    unsafe { hccc_config_set(cfg, s.as_ptr()) }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(hccc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(hccc_config_default(ptr::null_mut()), HcccStatus::NullPointer);
        assert_eq!(hccc_config_validate(ptr::null()), HcccStatus::NullPointer);
        let mut out = ptr::null_mut();
        assert_eq!(hccc_run(ptr::null(), 1, &mut out), HcccStatus::NullPointer);
        assert!(out.is_null());
        hccc_config_free(ptr::null_mut());
        hccc_report_free(ptr::null_mut());
    }
    assert!(last_error().contains("null"));
}

#[test]
fn config_round_trips_through_text() {
    let cfg = default_config();
    assert_eq!(set(cfg, "traffic.offered_load=12.5"), HcccStatus::Ok);
    let mut needed = 0usize;
    let status = unsafe { hccc_config_to_string(cfg, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(status, HcccStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(
        unsafe { hccc_config_to_string(cfg, buf.as_mut_ptr(), buf.len(), &mut needed) },
        HcccStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) };
    let mut parsed = ptr::null_mut();
    assert_eq!(unsafe { hccc_config_parse(text.as_ptr(), &mut parsed) }, HcccStatus::Ok);
    let mut again = vec![0 as c_char; needed];
    unsafe { hccc_config_to_string(parsed, again.as_mut_ptr(), again.len(), ptr::null_mut()) };
    assert_eq!(buf, again);
    assert!(text.to_str().unwrap().contains("12.5"));
    unsafe {
        hccc_config_free(cfg);
        hccc_config_free(parsed);
    }
}

#[test]
fn bad_settings_surface_as_config_errors() {
    let cfg = default_config();
    assert_eq!(set(cfg, "nosuch.key=1"), HcccStatus::ConfigError);
    assert!(last_error().contains("unknown key"), "{}", last_error());
    assert_eq!(set(cfg, "hccc.B_max=1.5"), HcccStatus::Ok);
    assert_eq!(unsafe { hccc_config_validate(cfg) }, HcccStatus::ConfigError);
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { hccc_run(cfg, 1, &mut rep) }, HcccStatus::ConfigError);
    assert!(rep.is_null());
    let bad = [0xffu8 as c_char, 0];
    let mut parsed = ptr::null_mut();
    assert_eq!(unsafe { hccc_config_parse(bad.as_ptr(), &mut parsed) }, HcccStatus::InvalidUtf8);
    unsafe { hccc_config_free(cfg) };
}

#[test]
fn run_produces_consistent_summary() {
    let cfg = default_config();
    assert_eq!(set(cfg, "run.duration=20"), HcccStatus::Ok);
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { hccc_run(cfg, 4, &mut rep) }, HcccStatus::Ok);
    let mut s = HcccSummary::default();
    assert_eq!(unsafe { hccc_report_summary(rep, &mut s) }, HcccStatus::Ok);
    assert!(s.generated > 0);
    assert_eq!(
        s.generated,
        s.delivered + s.dropped_buffer_overflow + s.dropped_mac_retry + s.in_flight
    );
    assert_eq!(s.carrier_violations, 0);

    let mut needed = 0;
    unsafe { hccc_report_summary_csv(rep, ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(
        unsafe { hccc_report_summary_csv(rep, buf.as_mut_ptr(), needed, ptr::null_mut()) },
        HcccStatus::Ok
    );
    let csv = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_owned();
    assert!(csv.starts_with("scheme,seed,node_count"));
    assert_eq!(csv.lines().count(), 2);

    let mut rep2 = ptr::null_mut();
    unsafe { hccc_run(cfg, 4, &mut rep2) };
    let mut buf2 = vec![0 as c_char; needed];
    unsafe { hccc_report_summary_csv(rep2, buf2.as_mut_ptr(), needed, ptr::null_mut()) };
    assert_eq!(buf, buf2, "same seed, same bytes");
    unsafe {
        hccc_report_free(rep);
        hccc_report_free(rep2);
        hccc_config_free(cfg);
    }
}

#[test]
fn fairness_forms() {
    let rates = [1.0, 1.0, 1.0, 1.0];
    let mut f = 0.0;
    assert_eq!(unsafe { hccc_fairness(rates.as_ptr(), 4, 0, &mut f) }, HcccStatus::Ok);
    assert_eq!(f, 1.0);
    let skewed = [4.0, 0.0, 0.0, 0.0];
    unsafe { hccc_fairness(skewed.as_ptr(), 4, 0, &mut f) };
    assert_eq!(f, 0.25);
    unsafe { hccc_fairness(rates.as_ptr(), 4, 1, &mut f) };
    assert_eq!(f, 0.25);
    let zeros = [0.0; 3];
    assert_eq!(unsafe { hccc_fairness(zeros.as_ptr(), 3, 0, &mut f) }, HcccStatus::InvalidArgument);
    assert_eq!(unsafe { hccc_fairness(rates.as_ptr(), 0, 0, &mut f) }, HcccStatus::InvalidArgument);
}

#[test]
fn feedback_rule_and_malformed_input() {
    let cfg = default_config();
    let mut r = HcccFeedbackResult::default();
    let st = unsafe { hccc_process_feedback(cfg, 0.2, 0.3, 4.0, 40.0, 8.0, &mut r) };
    assert_eq!(st, HcccStatus::Ok);
    assert_eq!(r.case_number, 4);
    assert_eq!(r.rate_unclamped, 6.0);
    assert!((r.window_unclamped - 120.0).abs() < 1e-12);
    assert_eq!(r.window, 63.0);
    let st = unsafe { hccc_process_feedback(cfg, 0.2, 1.5, 4.0, 40.0, 8.0, &mut r) };
    assert_eq!(st, HcccStatus::MalformedFeedback);
    let st = unsafe { hccc_process_feedback(cfg, 0.2, f64::NAN, 4.0, 40.0, 8.0, &mut r) };
    assert_eq!(st, HcccStatus::MalformedFeedback);
    unsafe { hccc_config_free(cfg) };
}

#[test]
fn header_declares_every_export_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hccc.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build script");
    for name in [
        "hccc_version",
        "hccc_last_error",
        "hccc_config_default",
        "hccc_config_parse",
        "hccc_config_set",
        "hccc_config_validate",
        "hccc_config_to_string",
        "hccc_config_free",
        "hccc_run",
        "hccc_report_summary",
        "hccc_report_summary_csv",
        "hccc_report_free",
        "hccc_fairness",
        "hccc_process_feedback",
    ] {
        assert!(text.contains(&format!("{name}(")), "{name} missing");
    }
    assert!(text.contains("typedef struct HcccConfig HcccConfig;"));
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
