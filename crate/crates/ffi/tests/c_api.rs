use std::ffi::{CStr, CString};
use std::ptr;

use wideboost_ffi::*;

fn blobs() -> (Vec<f64>, Vec<f64>, usize) {
    let n = 60;
    let mut x = Vec::with_capacity(n * 2);
    let mut y = Vec::with_capacity(n * 3);
    for i in 0..n {
        let class = i % 3;
        x.push(class as f64 * 2.0 + (i as f64 * 0.37).sin() * 0.4);
        x.push((i as f64 * 0.11).cos());
        for k in 0..3 {
            y.push(if k == class { 1.0 } else { 0.0 });
        }
    }
    (x, y, n)
}

fn trained(q: usize) -> *mut WbModel {
    let (x, y, n) = blobs();
    let mut params = wb_params_default(WbTask::Multiclass, 3);
    params.q = q;
    params.beta_seed = 5;
    params.rounds = 8;
    params.max_depth = 2;
    let mut model = ptr::null_mut();
    let status = unsafe { wb_train(x.as_ptr(), n, 2, y.as_ptr(), 3, &params, &mut model) };
    assert_eq!(status, WbStatus::Ok);
    assert!(!model.is_null());
    model
}

fn last_error() -> String {
    let p = wb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn train_predict_and_dims() {
    let model = trained(5);
    let (x, _, n) = blobs();
    let (mut p, mut q, mut d, mut r) = (0, 0, 0, 0);
    assert_eq!(unsafe { wb_model_dims(model, &mut p, &mut q, &mut d, &mut r) }, WbStatus::Ok);
    assert_eq!((p, q, d, r), (2, 5, 3, 8));

    let mut labels = vec![0usize; n];
    let status = unsafe { wb_model_predict_labels(model, x.as_ptr(), n, 2, labels.as_mut_ptr(), n) };
    assert_eq!(status, WbStatus::Ok);
    let correct = labels.iter().enumerate().filter(|(i, &l)| l == i % 3).count();
    assert!(correct as f64 / n as f64 > 0.9);

    let mut scores = vec![0.0; n * 3];
    let status = unsafe { wb_model_predict(model, x.as_ptr(), n, 2, scores.as_mut_ptr(), scores.len()) };
    assert_eq!(status, WbStatus::Ok);
    assert!(scores.iter().all(|s| s.is_finite()));
    unsafe { wb_model_free(model) };
}

#[test]
fn save_load_and_json_preserve_predictions() {
    let model = trained(4);
    let (x, _, n) = blobs();
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.json").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { wb_model_save(model, path.as_ptr()) }, WbStatus::Ok);

    let mut loaded = ptr::null_mut();
    assert_eq!(unsafe { wb_model_load(path.as_ptr(), &mut loaded) }, WbStatus::Ok);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { wb_model_to_json(model, &mut json) }, WbStatus::Ok);
    let mut parsed = ptr::null_mut();
    assert_eq!(unsafe { wb_model_from_json(json, &mut parsed) }, WbStatus::Ok);
    unsafe { wb_string_free(json) };

    let predict = |m: *const WbModel| {
        let mut out = vec![0.0; n * 3];
        let s = unsafe { wb_model_predict(m, x.as_ptr(), n, 2, out.as_mut_ptr(), out.len()) };
        assert_eq!(s, WbStatus::Ok);
        out.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    };
    let original = predict(model);
    assert_eq!(predict(loaded), original);
    assert_eq!(predict(parsed), original);
    unsafe {
        wb_model_free(model);
        wb_model_free(loaded);
        wb_model_free(parsed);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut model = ptr::null_mut();
    let missing = CString::new("/nonexistent/model.json").unwrap();
    assert_eq!(unsafe { wb_model_load(missing.as_ptr(), &mut model) }, WbStatus::Io);
    assert!(last_error().contains("nonexistent"));
    assert!(model.is_null());

    assert_eq!(unsafe { wb_model_load(ptr::null(), &mut model) }, WbStatus::NullPointer);

    let bad = CString::new("{\"version\": 99}").unwrap();
    assert_eq!(unsafe { wb_model_from_json(bad.as_ptr(), &mut model) }, WbStatus::Model);
    assert!(last_error().contains("version"));

    let m = trained(3);
    let (x, _, n) = blobs();
    let mut small = vec![0.0; 2];
    let s = unsafe { wb_model_predict(m, x.as_ptr(), n, 2, small.as_mut_ptr(), small.len()) };
    assert_eq!(s, WbStatus::BufferTooSmall);
    let s = unsafe { wb_model_predict(m, x.as_ptr(), n / 2, 4, small.as_mut_ptr(), small.len()) };
    assert_eq!(s, WbStatus::Dimension);
    unsafe { wb_model_free(m) };
}

#[test]
fn invalid_training_params_are_rejected() {
    let (x, y, n) = blobs();
    let mut params = wb_params_default(WbTask::Multiclass, 3);
    params.q = 2;
    let mut model = ptr::null_mut();
    let s = unsafe { wb_train(x.as_ptr(), n, 2, y.as_ptr(), 3, &params, &mut model) };
    assert_eq!(s, WbStatus::InvalidArgument);
    assert!(last_error().contains("q >= d"));

    params.q = 3;
    params.learning_rate = 0.0;
    let s = unsafe { wb_train(x.as_ptr(), n, 2, y.as_ptr(), 3, &params, &mut model) };
    assert_eq!(s, WbStatus::InvalidArgument);
    assert!(model.is_null());
}

#[test]
fn beta_build_matches_kind() {
    let mut beta = vec![0.0; 4 * 2];
    assert_eq!(unsafe { wb_beta_build(WbBetaKind::I, 4, 2, 9, beta.as_mut_ptr(), beta.len()) }, WbStatus::Ok);
    assert_eq!(&beta[..4], &[1.0, 0.0, 0.0, 1.0]);
    assert!(beta[4..].iter().all(|v| (0.0..1.0).contains(v)));

    assert_eq!(unsafe { wb_beta_build(WbBetaKind::RN, 4, 2, 9, beta.as_mut_ptr(), beta.len()) }, WbStatus::Ok);
    for j in 0..2 {
        let s: f64 = (0..4).map(|i| beta[i * 2 + j]).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/wideboost.h")).unwrap();
    for name in [
        "wb_train",
        "wb_model_load",
        "wb_model_save",
        "wb_model_free",
        "wb_model_predict",
        "wb_model_dims",
        "wb_beta_build",
        "wb_last_error",
        "typedef struct WbModel WbModel",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
