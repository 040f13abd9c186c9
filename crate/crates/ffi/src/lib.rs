//! C ABI for the wideboost engine.
//!
//! Models cross the boundary as opaque `WbModel` handles. Every fallible call
//! returns a `WbStatus`; on failure the message is available from
//! `wb_last_error` until the next failing call on the same thread. Matrices
//! are dense, row-major `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use wideboost::beta::{BetaKind, BetaMatrix, BetaSpec};
use wideboost::booster::{self, BoostParams, Ensemble};
use wideboost::dataset::{Dataset, Task};
use wideboost::objective::LossKind;
use wideboost::tree::TreeParams;
use wideboost::Error;

/// Opaque trained model.
pub struct WbModel {
    inner: Ensemble,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    Dimension = 6,
    Model = 7,
    Training = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WbTask {
    Regression = 0,
    Binary = 1,
    Multiclass = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WbBetaKind {
    I = 0,
    IN = 1,
    R = 2,
    RN = 3,
}

/// Training settings. Start from `wb_params_default` and override fields.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WbParams {
    pub task: WbTask,
    pub beta_kind: WbBetaKind,
    /// Output width `q`.
    pub q: usize,
    pub beta_seed: u64,
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_samples_leaf: usize,
    pub base_score: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(WbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => WbStatus::Io,
            Error::Parse { .. } => WbStatus::Parse,
            Error::Dimension(_) => WbStatus::Dimension,
            Error::Version { .. } | Error::Schema(_) | Error::Checksum | Error::MalformedTree(_) => {
                WbStatus::Model
            }
            Error::NonFiniteLoss { .. } => WbStatus::Training,
            _ => WbStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(status: WbStatus, message: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, message.into()))
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> WbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WbStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside wideboost".into());
            WbStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> FfiResult<()> {
    if p.is_null() {
        fail(WbStatus::NullPointer, format!("{what} is null"))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(WbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn matrix_arg(p: *const f64, rows: usize, cols: usize, what: &str) -> FfiResult<ndarray::Array2<f64>> {
    non_null(p, what)?;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Failure(WbStatus::Dimension, format!("{what} size overflows")))?;
    let data = slice::from_raw_parts(p, len).to_vec();
    ndarray::Array2::from_shape_vec((rows, cols), data)
        .or_else(|e| fail(WbStatus::Dimension, format!("{what}: {e}")))
}

unsafe fn model_arg<'a>(model: *const WbModel) -> FfiResult<&'a Ensemble> {
    non_null(model, "model")?;
    Ok(&(*model).inner)
}

unsafe fn out_buffer<'a, T>(p: *mut T, len: usize, needed: usize, what: &str) -> FfiResult<&'a mut [T]> {
    non_null(p, what)?;
    if len < needed {
        return fail(
            WbStatus::BufferTooSmall,
            format!("{what} holds {len} values, {needed} needed"),
        );
    }
    Ok(slice::from_raw_parts_mut(p, needed))
}

fn task_of(t: WbTask) -> Task {
    match t {
        WbTask::Regression => Task::Regression,
        WbTask::Binary => Task::Binary,
        WbTask::Multiclass => Task::Multiclass,
    }
}

fn beta_kind_of(k: WbBetaKind) -> BetaKind {
    match k {
        WbBetaKind::I => BetaKind::I,
        WbBetaKind::IN => BetaKind::IN,
        WbBetaKind::R => BetaKind::R,
        WbBetaKind::RN => BetaKind::RN,
    }
}

fn boost_params(p: &WbParams, d: usize) -> BoostParams {
    BoostParams {
        rounds: p.rounds,
        learning_rate: p.learning_rate,
        tree: TreeParams {
            max_depth: p.max_depth,
            min_child_weight: p.min_child_weight,
            lambda: p.lambda,
            gamma: p.gamma,
            min_samples_leaf: p.min_samples_leaf,
        },
        beta: BetaSpec::new(beta_kind_of(p.beta_kind), p.q, d, p.beta_seed),
        loss: LossKind::for_task(task_of(p.task)),
        base_score: p.base_score,
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Standard boosting defaults for a task with label dimension `d`:
/// `q = d`, `β = I`, 100 rounds, η = 0.1, depth 6, λ = 1, γ = 0.
#[no_mangle]
pub extern "C" fn wb_params_default(task: WbTask, d: usize) -> WbParams {
    let b = BoostParams::standard(LossKind::for_task(task_of(task)), d);
    WbParams {
        task,
        beta_kind: WbBetaKind::I,
        q: d,
        beta_seed: 0,
        rounds: b.rounds,
        learning_rate: b.learning_rate,
        max_depth: b.tree.max_depth,
        min_child_weight: b.tree.min_child_weight,
        lambda: b.tree.lambda,
        gamma: b.tree.gamma,
        min_samples_leaf: b.tree.min_samples_leaf,
        base_score: b.base_score,
    }
}

/// Trains a model. `x` is `n_rows × n_features`; `y` is `n_rows × label_dim`
/// (one-hot rows for multiclass, 0/1 for binary). On success `*out` owns a new
/// model that must be released with `wb_model_free`.
///
/// # Safety
/// `x` and `y` must point to buffers of the stated sizes; `params` and `out`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wb_train(
    x: *const f64,
    n_rows: usize,
    n_features: usize,
    y: *const f64,
    label_dim: usize,
    params: *const WbParams,
    out: *mut *mut WbModel,
) -> WbStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        let p = *params;
        let features = matrix_arg(x, n_rows, n_features, "x")?;
        let labels = matrix_arg(y, n_rows, label_dim, "y")?;
        let data = Dataset::new(features, labels, task_of(p.task))?;
        let (model, _) = booster::train(&data, &boost_params(&p, label_dim), None)?;
        *out = Box::into_raw(Box::new(WbModel { inner: model }));
        Ok(())
    })
}

/// Loads a model file written by `wb_model_save` or the command-line tool.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wb_model_load(path: *const c_char, out: *mut *mut WbModel) -> WbStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        non_null(out, "out")?;
        let model = booster::load_model(path)?;
        *out = Box::into_raw(Box::new(WbModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn wb_model_save(model: *const WbModel, path: *const c_char) -> WbStatus {
    guard(|| {
        let model = model_arg(model)?;
        let path = str_arg(path, "path")?;
        booster::save_model(model, path)?;
        Ok(())
    })
}

/// Parses a model from its JSON text.
///
/// # Safety
/// `json` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wb_model_from_json(json: *const c_char, out: *mut *mut WbModel) -> WbStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        non_null(out, "out")?;
        let model = Ensemble::from_json(text)?;
        *out = Box::into_raw(Box::new(WbModel { inner: model }));
        Ok(())
    })
}

/// Serializes a model. `*out` receives a string to release with
/// `wb_string_free`.
///
/// # Safety
/// `model` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wb_model_to_json(model: *const WbModel, out: *mut *mut c_char) -> WbStatus {
    guard(|| {
        let model = model_arg(model)?;
        non_null(out, "out")?;
        let text = model.to_json()?;
        let c = CString::new(text).or_else(|_| fail(WbStatus::Model, "model JSON contains NUL"))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by `wb_model_to_json`.
#[no_mangle]
pub unsafe extern "C" fn wb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wb_model_free(model: *mut WbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Reports the feature count, width `q`, label dimension `d` and round
/// count. Any output pointer may be null.
///
/// # Safety
/// `model` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn wb_model_dims(
    model: *const WbModel,
    n_features: *mut usize,
    width: *mut usize,
    label_dim: *mut usize,
    rounds: *mut usize,
) -> WbStatus {
    guard(|| {
        let model = model_arg(model)?;
        for (p, v) in [
            (n_features, model.n_features()),
            (width, model.width()),
            (label_dim, model.label_dim()),
            (rounds, model.rounds()),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Writes the `n_rows × d` output scores `F·β` into `out`.
///
/// # Safety
/// `x` must hold `n_rows × n_features` values and `out` `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn wb_model_predict(
    model: *const WbModel,
    x: *const f64,
    n_rows: usize,
    n_features: usize,
    out: *mut f64,
    out_len: usize,
) -> WbStatus {
    guard(|| {
        let model = model_arg(model)?;
        let features = matrix_arg(x, n_rows, n_features, "x")?;
        let scores = model.predict(features.view())?;
        let dst = out_buffer(out, out_len, scores.len(), "out")?;
        for (d, s) in dst.iter_mut().zip(scores.iter()) {
            *d = *s;
        }
        Ok(())
    })
}

/// Writes one predicted class index per row (classification models only).
///
/// # Safety
/// `x` must hold `n_rows × n_features` values and `out` `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn wb_model_predict_labels(
    model: *const WbModel,
    x: *const f64,
    n_rows: usize,
    n_features: usize,
    out: *mut usize,
    out_len: usize,
) -> WbStatus {
    guard(|| {
        let model = model_arg(model)?;
        let features = matrix_arg(x, n_rows, n_features, "x")?;
        let labels = model.predict_labels(features.view())?;
        out_buffer(out, out_len, labels.len(), "out")?.copy_from_slice(&labels);
        Ok(())
    })
}

/// Writes the `q × d` matrix β for the given construction into `out`.
///
/// # Safety
/// `out` must hold `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn wb_beta_build(
    kind: WbBetaKind,
    q: usize,
    d: usize,
    seed: u64,
    out: *mut f64,
    out_len: usize,
) -> WbStatus {
    guard(|| {
        let beta = BetaMatrix::build(BetaSpec::new(beta_kind_of(kind), q, d, seed))?;
        let dst = out_buffer(out, out_len, q * d, "out")?;
        for (d, v) in dst.iter_mut().zip(beta.values().iter()) {
            *d = *v;
        }
        Ok(())
    })
}
