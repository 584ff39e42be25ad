//! C ABI over the trained anomaly model and the AUC metric.
//!
//! Every fallible call returns a [`BgStatus`]; on failure the message is
//! available from [`bg_last_error_message`] on the same thread. Models are
//! opaque handles created by `bg_model_load_*` and released with
//! [`bg_model_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use batguard::autoenc::AnomalyModel;
use batguard::metrics::roc_auc;
use batguard::{Error, Matrix};
use libc::{c_char, size_t};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Data = 4,
    Format = 5,
    Dimension = 6,
    Degenerate = 7,
    Config = 8,
    Fitness = 9,
    Panic = 10,
}

/// Opaque trained model.
pub struct BgModel {
    inner: AnomalyModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BgStatus, msg: impl Into<String>) -> BgStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> BgStatus {
    match e.category() {
        "io" => BgStatus::Io,
        "data" => BgStatus::Data,
        "format" => BgStatus::Format,
        "dimension" => BgStatus::Dimension,
        "degenerate" => BgStatus::Degenerate,
        "config" => BgStatus::Config,
        _ => BgStatus::Fitness,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BgStatus>) -> BgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(BgStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, BgStatus>;
}

impl<T> OrStatus<T> for batguard::Result<T> {
    fn or_status(self) -> Result<T, BgStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), BgStatus> {
    if p.is_null() {
        Err(fail(BgStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, BgStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn rows_matrix(
    rows: *const f64,
    n_rows: size_t,
    n_cols: size_t,
) -> Result<Matrix, BgStatus> {
    let len = n_rows
        .checked_mul(n_cols)
        .ok_or_else(|| fail(BgStatus::Dimension, "n_rows * n_cols overflows"))?;
    if len == 0 {
        return Ok(Matrix::zeros(n_rows, n_cols));
    }
    non_null(rows, "rows")?;
    let data = std::slice::from_raw_parts(rows, len).to_vec();
    Matrix::from_vec(n_rows, n_cols, data).or_status()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse a model bundle from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_model_load_json(
    json: *const c_char,
    out: *mut *mut BgModel,
) -> BgStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = c_str(json, "json")?;
        let inner = AnomalyModel::from_json(text).or_status()?;
        *out = Box::into_raw(Box::new(BgModel { inner }));
        Ok(())
    })
}

/// Read a model bundle from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_model_load_file(
    path: *const c_char,
    out: *mut *mut BgModel,
) -> BgStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = c_str(path, "path")?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| fail(BgStatus::Io, format!("cannot read {path}: {e}")))?;
        let inner = AnomalyModel::from_json(&text).or_status()?;
        *out = Box::into_raw(Box::new(BgModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from `bg_model_load_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bg_model_free(model: *mut BgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of raw columns each input row must have.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bg_model_input_dim(model: *const BgModel, out: *mut size_t) -> BgStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = (*model).inner.feature_mask.len();
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bg_model_threshold(model: *const BgModel, out: *mut f64) -> BgStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = (*model).inner.threshold;
        Ok(())
    })
}

/// Reconstruction error for each of `n_rows` row-major rows.
///
/// # Safety
/// `rows` must hold `n_rows * n_cols` doubles and `out_scores` room for
/// `n_rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn bg_model_score(
    model: *const BgModel,
    rows: *const f64,
    n_rows: size_t,
    n_cols: size_t,
    out_scores: *mut f64,
) -> BgStatus {
    guard(|| {
        non_null(model, "model")?;
        let m = rows_matrix(rows, n_rows, n_cols)?;
        let scores = (*model).inner.scores(&m).or_status()?;
        if n_rows > 0 {
            non_null(out_scores, "out_scores")?;
            ptr::copy_nonoverlapping(scores.as_ptr(), out_scores, n_rows);
        }
        Ok(())
    })
}

/// 1 for rows whose error exceeds the threshold, else 0.
///
/// # Safety
/// As [`bg_model_score`], with `out_labels` holding `n_rows` bytes.
#[no_mangle]
pub unsafe extern "C" fn bg_model_classify(
    model: *const BgModel,
    rows: *const f64,
    n_rows: size_t,
    n_cols: size_t,
    out_labels: *mut u8,
) -> BgStatus {
    guard(|| {
        non_null(model, "model")?;
        let m = rows_matrix(rows, n_rows, n_cols)?;
        let labels = batguard::autoenc::classify(&(*model).inner, &m).or_status()?;
        if n_rows > 0 {
            non_null(out_labels, "out_labels")?;
            ptr::copy_nonoverlapping(labels.as_ptr(), out_labels, n_rows);
        }
        Ok(())
    })
}

/// Area under the ROC curve with fraud (1) as the positive class.
///
/// # Safety
/// `labels` and `scores` must each hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_metrics_auc(
    labels: *const u8,
    scores: *const f64,
    n: size_t,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        non_null(out, "out")?;
        if n == 0 {
            return Err(fail(BgStatus::Degenerate, "no samples"));
        }
        non_null(labels, "labels")?;
        non_null(scores, "scores")?;
        let labels = std::slice::from_raw_parts(labels, n);
        let scores = std::slice::from_raw_parts(scores, n);
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(fail(BgStatus::Data, format!("label {bad} is not 0 or 1")));
        }
        *out = roc_auc(labels, scores).or_status()?;
        Ok(())
    })
}
