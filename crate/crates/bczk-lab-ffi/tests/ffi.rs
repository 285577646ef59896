//! Exercises the C ABI through the extern functions directly.

use std::ffi::CString;

use bczk_lab_ffi::*;

#[test]
fn version_is_nul_terminated() {
    let v = bczk_lab_version();
    let s = unsafe { std::ffi::CStr::from_ptr(v) };
    assert!(!s.to_str().unwrap().is_empty());
}

#[test]
fn params_handle_lifecycle() {
    unsafe {
        let mut handle: *mut BczkLabParams = std::ptr::null_mut();
        let st = bczk_lab_params_derive(1, 1, &mut handle);
        assert_eq!(st, BczkLabStatus::Ok);
        assert!(!handle.is_null());

        let key = CString::new("slots").unwrap();
        let mut v = 0u64;
        assert_eq!(
            bczk_lab_params_get(handle, key.as_ptr(), &mut v),
            BczkLabStatus::Ok
        );
        assert_eq!(v, 120);

        let bad = CString::new("nope").unwrap();
        assert_eq!(
            bczk_lab_params_get(handle, bad.as_ptr(), &mut v),
            BczkLabStatus::InvalidArgument
        );

        let mut need = 0usize;
        assert_eq!(
            bczk_lab_params_record(handle, std::ptr::null_mut(), 0, &mut need),
            BczkLabStatus::BufferTooSmall
        );
        let mut buf = vec![0i8; need];
        assert_eq!(
            bczk_lab_params_record(handle, buf.as_mut_ptr(), buf.len(), &mut need),
            BczkLabStatus::Ok
        );
        let text = std::ffi::CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(text.contains("threshold=61"));

        bczk_lab_params_free(handle);
    }
}

#[test]
fn invalid_params_set_error_message() {
    unsafe {
        let mut handle: *mut BczkLabParams = std::ptr::null_mut();
        let st = bczk_lab_params_desk(63, 16, 6, 2, &mut handle);
        assert_eq!(st, BczkLabStatus::InvalidArgument);
        let mut buf = vec![0i8; 256];
        let mut written = 0usize;
        bczk_lab_last_error(buf.as_mut_ptr(), buf.len(), &mut written);
        let msg = std::ffi::CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(msg.contains("even"), "message was '{msg}'");
    }
}

#[test]
fn overflow_maps_to_out_of_range() {
    unsafe {
        let mut handle: *mut BczkLabParams = std::ptr::null_mut();
        let st = bczk_lab_params_derive(1 << 13, 1 << 20, &mut handle);
        assert_eq!(st, BczkLabStatus::OutOfRange);
    }
}

#[test]
fn numeric_helpers() {
    unsafe {
        let mut holds = false;
        assert_eq!(bczk_lab_bound_check(2, 4, &mut holds), BczkLabStatus::Ok);
        assert!(holds);

        let mut tail = 0.0f64;
        assert_eq!(
            bczk_lab_binom_tail_log(4, 0.5, 2, &mut tail),
            BczkLabStatus::Ok
        );
        assert!((tail - (11.0f64 / 16.0).ln()).abs() < 1e-12);

        let mut delta = 0.0;
        let mut prod = 0.0;
        assert_eq!(
            bczk_lab_closed_form_delta(0.125, 3, &mut delta, &mut prod),
            BczkLabStatus::Ok
        );
        assert!((delta - 7.0 / 15.0).abs() < 1e-15);
        assert!((prod - 15.0 / 64.0).abs() < 1e-15);

        assert_eq!(
            bczk_lab_closed_form_delta(1.5, 3, &mut delta, &mut prod),
            BczkLabStatus::InvalidArgument
        );
    }
}

#[test]
fn run_experiment_through_the_abi() {
    let toml = r#"
experiment = "bound-check"
seed = 3
trials = 1

[bound_check]
q_max = 3
lambda_max = 4
"#;
    let dir = tempfile::tempdir().unwrap();
    let config = CString::new(toml).unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let st = unsafe { bczk_lab_run_experiment(config.as_ptr(), out.as_ptr(), 1) };
    assert_eq!(st, BczkLabStatus::Ok);
    assert!(dir.path().join("summary.csv").exists());

    let bad = CString::new("experiment = \"nope\"\nseed = 1\ntrials = 1\n").unwrap();
    let st = unsafe { bczk_lab_run_experiment(bad.as_ptr(), out.as_ptr(), 1) };
    assert_eq!(st, BczkLabStatus::ExecutionError);
}
