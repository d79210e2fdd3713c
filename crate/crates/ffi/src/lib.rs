//! C ABI for vmifs.
//!
//! Objects cross the boundary as opaque handles created by `vmifs_*` calls
//! and released with the matching `*_free`. Fallible calls return a
//! [`VmifsStatus`]; on failure, [`vmifs_last_error_message`] describes the
//! most recent error on the calling thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vmifs::baselines::{baseline_select, BaselineKind};
use vmifs::data::{discretize, gen_tree_synthetic, load_csv, BinStrategy, LabelColumn, Schema};
use vmifs::estimators::{joint_mi_exact, mi_plugin};
use vmifs::{select, Dataset, Error, QDistKind, SelectionResult, VmiConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VmifsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    InvalidDataset = 6,
    ContinuousColumn = 7,
    CapExceeded = 8,
    Unsupported = 9,
    Estimation = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VmifsBinStrategy {
    EqualWidth = 0,
    EqualFrequency = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VmifsMethod {
    VmiNaive = 0,
    VmiPairwise = 1,
    Mim = 2,
    Mrmr = 3,
    Jmi = 4,
    Cmim = 5,
    Cife = 6,
    ExactGreedy = 7,
}

/// Opaque dataset handle.
pub struct VmifsDataset {
    inner: Dataset,
}

/// Opaque selection result handle.
pub struct VmifsSelection {
    inner: SelectionResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> VmifsStatus {
    match e {
        Error::Io { .. } => VmifsStatus::Io,
        Error::Parse { .. } | Error::NonFinite { .. } | Error::MissingLabel(_) => VmifsStatus::Parse,
        Error::InvalidArgument(_) | Error::AlreadySelected(_) | Error::NoCandidates => VmifsStatus::InvalidArgument,
        Error::InvalidDataset(_) | Error::ClassAbsentFromFold { .. } => VmifsStatus::InvalidDataset,
        Error::ContinuousColumn { .. } => VmifsStatus::ContinuousColumn,
        Error::CapExceeded { .. } => VmifsStatus::CapExceeded,
        Error::Unsupported(_) => VmifsStatus::Unsupported,
        _ => VmifsStatus::Estimation,
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (VmifsStatus, String)>) -> VmifsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VmifsStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            VmifsStatus::Panic
        }
    }
}

fn lift<T>(r: vmifs::Result<T>) -> Result<T, (VmifsStatus, String)> {
    r.map_err(|e| (status_of(&e), format!("{}: {e}", e.code())))
}

fn null(what: &str) -> (VmifsStatus, String) {
    (VmifsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (VmifsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (VmifsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn dataset_ref<'a>(ds: *const VmifsDataset) -> Result<&'a Dataset, (VmifsStatus, String)> {
    ds.as_ref().map(|d| &d.inner).ok_or_else(|| null("dataset"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vmifs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vmifs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a CSV file. `label` names the label column (header name or 0-based
/// index); NULL selects the last column.
///
/// # Safety
/// `path` and a non-null `label` must be NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn vmifs_dataset_from_csv(
    path: *const c_char,
    label: *const c_char,
    out: *mut *mut VmifsDataset,
) -> VmifsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let label = if label.is_null() { LabelColumn::Last } else { LabelColumn::parse(str_arg(label, "label")?) };
        let inner = lift(load_csv(path, &label, &Schema::Infer))?;
        put(out, VmifsDataset { inner });
        Ok(())
    })
}

/// Samples `n` rows of the nine-feature Gaussian tree model.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vmifs_dataset_gen_tree(n: usize, seed: u64, out: *mut *mut VmifsDataset) -> VmifsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = lift(gen_tree_synthetic(n, seed))?;
        put(out, VmifsDataset { inner });
        Ok(())
    })
}

/// Bins every continuous column into a new dataset.
///
/// # Safety
/// `ds` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vmifs_dataset_discretize(
    ds: *const VmifsDataset,
    bins: usize,
    strategy: VmifsBinStrategy,
    out: *mut *mut VmifsDataset,
) -> VmifsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let strategy = match strategy {
            VmifsBinStrategy::EqualWidth => BinStrategy::EqualWidth,
            VmifsBinStrategy::EqualFrequency => BinStrategy::EqualFrequency,
        };
        let inner = lift(discretize(dataset_ref(ds)?, bins, strategy))?;
        put(out, VmifsDataset { inner });
        Ok(())
    })
}

/// Row count, or 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vmifs_dataset_n_samples(ds: *const VmifsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_samples())
}

/// Feature count, or 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vmifs_dataset_n_features(ds: *const VmifsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_features())
}

/// # Safety
/// `ds` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vmifs_dataset_free(ds: *mut VmifsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Plug-in `I(x_feature; y)` in nats.
///
/// # Safety
/// `ds` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vmifs_mi_plugin(ds: *const VmifsDataset, feature: usize, alpha: f64, out: *mut f64) -> VmifsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(mi_plugin(dataset_ref(ds)?, feature, alpha))?;
        Ok(())
    })
}

/// Exact empirical `I(x_S; y)` for the `len` feature indices at `features`.
///
/// # Safety
/// `ds` must be a live handle; `features` must point to `len` values (or be
/// NULL when `len` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vmifs_joint_mi_exact(
    ds: *const VmifsDataset,
    features: *const usize,
    len: usize,
    out: *mut f64,
) -> VmifsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let set: &[usize] = if len == 0 {
            &[]
        } else if features.is_null() {
            return Err(null("features"));
        } else {
            std::slice::from_raw_parts(features, len)
        };
        *out = lift(joint_mi_exact(dataset_ref(ds)?, set))?;
        Ok(())
    })
}

/// Greedy selection of `n_select` features. `alpha` is the smoothing used by
/// the VMI methods and ignored by the others.
///
/// # Safety
/// `ds` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vmifs_select(
    ds: *const VmifsDataset,
    method: VmifsMethod,
    n_select: usize,
    alpha: f64,
    out: *mut *mut VmifsSelection,
) -> VmifsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ds = dataset_ref(ds)?;
        let config = VmiConfig { alpha };
        let result = match method {
            VmifsMethod::VmiNaive => select(ds, QDistKind::Naive, n_select, config),
            VmifsMethod::VmiPairwise => select(ds, QDistKind::Pairwise, n_select, config),
            VmifsMethod::Mim => baseline_select(BaselineKind::Mim, ds, n_select),
            VmifsMethod::Mrmr => baseline_select(BaselineKind::Mrmr, ds, n_select),
            VmifsMethod::Jmi => baseline_select(BaselineKind::Jmi, ds, n_select),
            VmifsMethod::Cmim => baseline_select(BaselineKind::Cmim, ds, n_select),
            VmifsMethod::Cife => baseline_select(BaselineKind::Cife, ds, n_select),
            VmifsMethod::ExactGreedy => baseline_select(BaselineKind::ExactGreedy, ds, n_select),
        };
        put(out, VmifsSelection { inner: lift(result)? });
        Ok(())
    })
}

/// Number of selected features, or 0 for NULL.
///
/// # Safety
/// `sel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vmifs_selection_len(sel: *const VmifsSelection) -> usize {
    sel.as_ref().map_or(0, |s| s.inner.ranked.len())
}

/// Feature index at `rank`, or `SIZE_MAX` when out of range.
///
/// # Safety
/// `sel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vmifs_selection_feature(sel: *const VmifsSelection, rank: usize) -> usize {
    sel.as_ref().and_then(|s| s.inner.ranked.get(rank).copied()).unwrap_or(usize::MAX)
}

/// Objective value after the selection at `rank`, or NaN when out of range.
///
/// # Safety
/// `sel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vmifs_selection_score(sel: *const VmifsSelection, rank: usize) -> f64 {
    sel.as_ref().and_then(|s| s.inner.scores.get(rank).copied()).unwrap_or(f64::NAN)
}

/// Number of restarts during the run, or 0 for NULL.
///
/// # Safety
/// `sel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vmifs_selection_restart_count(sel: *const VmifsSelection) -> usize {
    sel.as_ref().map_or(0, |s| s.inner.restarts.len())
}

/// # Safety
/// `sel` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vmifs_selection_free(sel: *mut VmifsSelection) {
    if !sel.is_null() {
        drop(Box::from_raw(sel));
    }
}
