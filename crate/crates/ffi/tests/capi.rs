use std::ffi::{CStr, CString};
use std::ptr;
use weightlab_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn parse_eval_free_round_trip() {
    unsafe {
        let mut w: *mut WlWeight = ptr::null_mut();
        assert_eq!(wl_weight_parse(cstr("analytic:a=1").as_ptr(), &mut w), WlStatus::Ok);
        assert!(!w.is_null());
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(wl_weight_eval_disk(w, 0.5, 0.0, &mut re, &mut im), WlStatus::Ok);
        assert!((re - 0.5).abs() < 1e-15 && im.abs() < 1e-15);
        let mut s = ptr::null_mut();
        assert_eq!(wl_weight_to_string(w, &mut s), WlStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        wl_string_free(s);
        let mut w2: *mut WlWeight = ptr::null_mut();
        assert_eq!(wl_weight_parse(cstr(&text).as_ptr(), &mut w2), WlStatus::Ok);
        wl_weight_free(w2);
        wl_weight_free(w);
        wl_weight_free(ptr::null_mut());
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut w: *mut WlWeight = ptr::null_mut();
        assert_eq!(wl_weight_parse(cstr("nonsense").as_ptr(), &mut w), WlStatus::Parse);
        assert!(w.is_null());
        let msg = CStr::from_ptr(wl_last_error_message()).to_str().unwrap();
        assert!(msg.contains("nonsense"), "{msg}");
        assert_eq!(wl_weight_parse(ptr::null(), &mut w), WlStatus::NullPointer);
        let mut member = false;
        assert_eq!(wl_power_weight_oracle(0.0, 0.5, 0.0, 1, false, &mut member), WlStatus::InvalidParams);
        assert_eq!(wl_power_weight_oracle(0.5, 2.0, 0.0, 1, false, &mut member), WlStatus::Ok);
        assert!(member);
        assert!(wl_last_error_message().is_null());
    }
}

#[test]
fn berezin_of_power_weight_at_origin() {
    unsafe {
        let mut w: *mut WlWeight = ptr::null_mut();
        assert_eq!(wl_weight_parse(cstr("power:zeta=0.5").as_ptr(), &mut w), WlStatus::Ok);
        let mut v = 0.0;
        let mut conv = WlConvergence::Unresolved;
        assert_eq!(wl_berezin(w, 1.0, 0.0, 0.0, 6, &mut v, &mut conv), WlStatus::Ok);
        assert_eq!(conv, WlConvergence::Convergent);
        assert!((v - 2.0 / 2.5).abs() < 1e-7, "{v}");
        wl_weight_free(w);
    }
}

#[test]
fn job_json_reports_exit_code() {
    unsafe {
        let cfg = cstr(r#"{"command":"classify-power","zeta":2.5,"p":4,"gamma":0,"variant":"invariant"}"#);
        let mut report = ptr::null_mut();
        let mut exit = -1;
        assert_eq!(wl_run_job_json(cfg.as_ptr(), &mut report, &mut exit), WlStatus::Ok);
        assert_eq!(exit, 2);
        let text = CStr::from_ptr(report).to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(v["schema"], "weightlab.report/1");
        assert_eq!(v["result"]["member"], false);
        wl_string_free(report);

        let bad = cstr("{\"command\": 7}");
        assert_eq!(wl_run_job_json(bad.as_ptr(), &mut report, &mut exit), WlStatus::Ok);
        assert_eq!(exit, 1);
        wl_string_free(report);
    }
}

#[test]
fn header_declares_the_api_and_compiles_as_c() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/weightlab.h")).unwrap();
    for name in [
        "wl_weight_parse",
        "wl_weight_free",
        "wl_weight_eval_disk",
        "wl_power_weight_oracle",
        "wl_berezin",
        "wl_run_job_json",
        "wl_string_free",
        "wl_last_error_message",
        "typedef struct WlWeight WlWeight",
        "WL_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let tmp = std::env::temp_dir().join(format!("wl_header_{}.c", std::process::id()));
    std::fs::write(&tmp, "#include \"weightlab.h\"\nint main(void) { return wl_version() == 0; }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&tmp)
        .status()
        .unwrap();
    let _ = std::fs::remove_file(&tmp);
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "clang", "gcc"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}
