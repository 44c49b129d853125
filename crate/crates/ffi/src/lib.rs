//! C ABI over saved yieldnet models.
//!
//! Every function returns a [`YnStatus`]; on failure the message is kept per
//! thread and read back with [`yn_last_error_message`]. Models are opaque
//! [`YnModel`] handles released with [`yn_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use yieldnet::dataset::Dataset;
use yieldnet::grnn::{default_bandwidth_grid, GrnnModel};
use yieldnet::model::{ModelKind, TrainedModel};
use yieldnet::persistence::{load_model, save_model, ModelFile, Provenance};
use yieldnet::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Checksum = 5,
    UnsupportedVersion = 6,
    Dimension = 7,
    Training = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YnKind {
    Invalid = 0,
    Grnn = 1,
    Svr = 2,
    Mlfn = 3,
}

/// A trained model with its provenance.
pub struct YnModel {
    file: ModelFile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> YnStatus {
    match e {
        Error::Io { .. } => YnStatus::Io,
        Error::ChecksumMismatch { .. } => YnStatus::Checksum,
        Error::UnsupportedVersion(_) => YnStatus::UnsupportedVersion,
        Error::Format(_) => YnStatus::Format,
        Error::DimensionMismatch { .. } => YnStatus::Dimension,
        Error::Diverged { .. } | Error::ZeroVariance(_) | Error::TooFewSamples { .. } => {
            YnStatus::Training
        }
        _ => YnStatus::InvalidArgument,
    }
}

struct Fail(YnStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(YnStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> YnStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => YnStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            YnStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, Fail> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| Fail(YnStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn model_arg<'a>(model: *const YnModel) -> Result<&'a YnModel, Fail> {
    model.as_ref().ok_or_else(|| null("model"))
}

/// Loads a model file. On success `*out` owns a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn yn_model_load(path: *const c_char, out: *mut *mut YnModel) -> YnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let file = load_model(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(YnModel { file }));
        Ok(())
    })
}

/// Writes `model` to `path`.
///
/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn yn_model_save(model: *const YnModel, path: *const c_char) -> YnStatus {
    guard(|| {
        let m = model_arg(model)?;
        save_model(&m.file.model, &m.file.provenance, path_arg(path)?)?;
        Ok(())
    })
}

/// Predicts one sample of `len` raw feature values into `*out`.
///
/// # Safety
/// `x` must point to `len` doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn yn_model_predict(
    model: *const YnModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> YnStatus {
    guard(|| {
        let m = model_arg(model)?;
        if x.is_null() {
            return Err(null("x"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let xs = std::slice::from_raw_parts(x, len);
        *out = m.file.model.predict(xs)?;
        Ok(())
    })
}

/// Predicts `rows` samples stored row-major with `cols` values each.
///
/// # Safety
/// `x` must point to `rows * cols` doubles and `out` to `rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn yn_model_predict_batch(
    model: *const YnModel,
    x: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> YnStatus {
    guard(|| {
        let m = model_arg(model)?;
        if rows == 0 {
            return Ok(());
        }
        if x.is_null() {
            return Err(null("x"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let total = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail(YnStatus::InvalidArgument, "rows * cols overflows".into()))?;
        let xs = std::slice::from_raw_parts(x, total);
        let outs = std::slice::from_raw_parts_mut(out, rows);
        for (row, o) in xs.chunks(cols.max(1)).zip(outs.iter_mut()) {
            *o = m.file.model.predict(row)?;
        }
        Ok(())
    })
}

/// Number of input features, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn yn_model_dim(model: *const YnModel) -> usize {
    model.as_ref().map_or(0, |m| m.file.model.dim())
}

/// Model family, or `YN_KIND_INVALID` for a null handle.
///
/// # Safety
/// `model` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn yn_model_kind(model: *const YnModel) -> YnKind {
    match model.as_ref().map(|m| m.file.model.kind()) {
        Some(ModelKind::Grnn) => YnKind::Grnn,
        Some(ModelKind::Svr) => YnKind::Svr,
        Some(ModelKind::Mlfn) => YnKind::Mlfn,
        None => YnKind::Invalid,
    }
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn yn_model_free(model: *mut YnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Fits a GRNN on `rows` samples of `cols` features (row-major `x`) and
/// targets `y`. A `sigma` of zero or less selects the bandwidth by
/// leave-one-out error over the default grid.
///
/// # Safety
/// `x` must point to `rows * cols` doubles, `y` to `rows` doubles and `out`
/// to a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn yn_grnn_fit(
    x: *const f64,
    rows: usize,
    cols: usize,
    y: *const f64,
    sigma: f64,
    out: *mut *mut YnModel,
) -> YnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if x.is_null() {
            return Err(null("x"));
        }
        if y.is_null() {
            return Err(null("y"));
        }
        if rows == 0 || cols == 0 {
            return Err(Fail(YnStatus::InvalidArgument, "rows and cols must be positive".into()));
        }
        let total = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail(YnStatus::InvalidArgument, "rows * cols overflows".into()))?;
        let xs = std::slice::from_raw_parts(x, total);
        let ys = std::slice::from_raw_parts(y, rows).to_vec();
        let ds = Dataset::from_rows(xs.chunks(cols).map(<[f64]>::to_vec).collect(), ys)?;
        let model = if sigma > 0.0 {
            GrnnModel::fit(&ds, sigma)?
        } else {
            GrnnModel::fit_auto(&ds, &default_bandwidth_grid())?
        };
        let lo = ds.targets().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ds.targets().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let provenance = Provenance {
            source: "C API arrays".into(),
            config: format!("sigma={}", model.sigma()),
            target_range: Some((lo, hi)),
            ..Provenance::default()
        };
        let file = ModelFile {
            model: TrainedModel::Grnn(model),
            provenance,
        };
        *out = Box::into_raw(Box::new(YnModel { file }));
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn yn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn yn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
