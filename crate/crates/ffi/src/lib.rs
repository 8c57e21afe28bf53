//! C ABI over the `qhtree` streaming tree and cost models.
//!
//! Every function returns a [`QhtStatus`]; on failure the message is kept in
//! a thread-local slot readable with [`qht_last_error`]. Trees are opaque
//! handles created by [`qht_tree_new`] and released with [`qht_tree_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qhtree::cost::{self, DesignParams};
use qhtree::{DatasetSchema, Error, HoeffdingTree, HyperParams, ObserverMode, Sample};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QhtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Schema = 4,
    Contract = 5,
    Model = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QhtObserver {
    Quantile = 0,
    Gaussian = 1,
}

/// Learner settings; fill with [`qht_params_default`] then override.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QhtParams {
    /// A [`QhtObserver`] value.
    pub observer: u32,
    pub fixed_point: bool,
    pub n_min: u64,
    pub split_points: usize,
    pub tau: f64,
    pub delta: f64,
    pub lambda: f64,
    pub quantiles: usize,
    pub max_depth: usize,
    pub max_leaves: usize,
    pub elements: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QhtStats {
    pub samples: u64,
    pub trials: u64,
    pub splits: u64,
    pub splits_by_bound: u64,
    pub splits_by_tie: u64,
    pub pool_exhausted: u64,
    pub leaves: usize,
    pub depth: usize,
}

/// Accelerator design point for the cost models.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QhtDesign {
    pub labels: u64,
    pub numeric: u64,
    pub quantiles: u64,
    pub elements: u64,
    pub depth: u64,
    pub freq_mhz: f64,
    pub samples: u64,
    pub cold_start_cycles: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QhtCost {
    pub latency_cycles: u64,
    pub tp_fpga_bps: f64,
    pub tp_overall_bps: f64,
    pub exec_time_s: f64,
    pub dsp: u64,
    /// 18 Kb blocks.
    pub bram: u64,
    pub bram36: f64,
}

/// Opaque tree handle.
pub struct QhtTree {
    tree: HoeffdingTree,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> QhtStatus {
    match err {
        Error::Io { .. } => QhtStatus::Io,
        Error::Parse { .. } | Error::Json(_) => QhtStatus::Parse,
        Error::Schema(_) => QhtStatus::Schema,
        Error::Config(_) => QhtStatus::Config,
        Error::Contract(_) => QhtStatus::Contract,
        Error::Model(_) => QhtStatus::Model,
        Error::Stream { source, .. } => status_of(source),
    }
}

fn fail(err: Error) -> QhtStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> QhtStatus {
    set_error(format!("{what} is null"));
    QhtStatus::NullPointer
}

/// Run `f`, turning a panic into [`QhtStatus::Panic`].
fn guard(f: impl FnOnce() -> QhtStatus) -> QhtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            QhtStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or point to `len` readable elements.
unsafe fn slice<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

/// Copy `text` NUL-terminated into `buf`. `needed` (if non-null) receives
/// the required size including the terminator.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
unsafe fn write_str(text: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> QhtStatus {
    let bytes = text.as_bytes();
    if !needed.is_null() {
        *needed = bytes.len() + 1;
    }
    if buf.is_null() || cap < bytes.len() + 1 {
        return QhtStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
    *buf.add(bytes.len()) = 0;
    QhtStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qht_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf`.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes; `needed` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qht_last_error(buf: *mut c_char, cap: usize, needed: *mut usize) -> QhtStatus {
    LAST_ERROR.with(|e| write_str(&e.borrow(), buf, cap, needed))
}

/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qht_params_default(out: *mut QhtParams) -> QhtStatus {
    if out.is_null() {
        return null("out");
    }
    let hp = HyperParams::default();
    *out = QhtParams {
        observer: QhtObserver::Quantile as u32,
        fixed_point: false,
        n_min: hp.n_min,
        split_points: hp.split_points,
        tau: hp.tau,
        delta: hp.delta,
        lambda: hp.lambda,
        quantiles: hp.quantiles,
        max_depth: hp.max_depth,
        max_leaves: hp.max_leaves,
        elements: hp.elements,
    };
    QhtStatus::Ok
}

/// Build a tree from a JSON schema. `params` may be null for defaults.
///
/// # Safety
/// `schema_json` must be a NUL-terminated string; `params` null or valid;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qht_tree_new(
    schema_json: *const c_char,
    params: *const QhtParams,
    out: *mut *mut QhtTree,
) -> QhtStatus {
    guard(|| {
        if schema_json.is_null() {
            return null("schema_json");
        }
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(schema_json).to_str() else {
            set_error("schema_json is not valid UTF-8");
            return QhtStatus::InvalidUtf8;
        };
        let schema = match DatasetSchema::from_json(text) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let mut p = std::mem::MaybeUninit::<QhtParams>::uninit();
        let p = if params.is_null() {
            qht_params_default(p.as_mut_ptr());
            p.assume_init()
        } else {
            *params
        };
        let hp = HyperParams {
            n_min: p.n_min,
            split_points: p.split_points,
            tau: p.tau,
            delta: p.delta,
            lambda: p.lambda,
            quantiles: p.quantiles,
            max_depth: p.max_depth,
            max_leaves: p.max_leaves,
            elements: p.elements,
            ..HyperParams::default()
        };
        let mode = match p.observer {
            x if x == QhtObserver::Quantile as u32 => ObserverMode::Quantile,
            x if x == QhtObserver::Gaussian as u32 => ObserverMode::Gaussian,
            other => {
                set_error(format!("unknown observer {other}"));
                return QhtStatus::Config;
            }
        };
        match HoeffdingTree::new(schema, hp, mode, p.fixed_point) {
            Ok(tree) => {
                *out = Box::into_raw(Box::new(QhtTree { tree }));
                QhtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `tree` must be null or a handle from [`qht_tree_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qht_tree_free(tree: *mut QhtTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// # Safety
/// Pointers must cover the given lengths.
unsafe fn sample(numeric: *const f64, n_numeric: usize, categorical: *const u32, n_categorical: usize, label: u32) -> Result<Sample, QhtStatus> {
    let Some(num) = slice(numeric, n_numeric) else {
        return Err(null("numeric"));
    };
    let Some(cat) = slice(categorical, n_categorical) else {
        return Err(null("categorical"));
    };
    Ok(Sample::new(num.to_vec(), cat.to_vec(), label))
}

/// Learn one labelled sample. `split` (optional) is set when a leaf split.
///
/// # Safety
/// `tree` must be a live handle; arrays must hold the given counts; `split`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qht_tree_learn(
    tree: *mut QhtTree,
    numeric: *const f64,
    n_numeric: usize,
    categorical: *const u32,
    n_categorical: usize,
    label: u32,
    split: *mut bool,
) -> QhtStatus {
    guard(|| {
        let Some(t) = tree.as_mut() else { return null("tree") };
        let s = match sample(numeric, n_numeric, categorical, n_categorical, label) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match t.tree.learn_one(&s) {
            Ok(ev) => {
                if !split.is_null() {
                    *split = ev.is_some();
                }
                QhtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `tree` must be a live handle; arrays must hold the given counts; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qht_tree_predict(
    tree: *const QhtTree,
    numeric: *const f64,
    n_numeric: usize,
    categorical: *const u32,
    n_categorical: usize,
    out: *mut u32,
) -> QhtStatus {
    guard(|| {
        let Some(t) = tree.as_ref() else { return null("tree") };
        if out.is_null() {
            return null("out");
        }
        let s = match sample(numeric, n_numeric, categorical, n_categorical, 0) {
            Ok(s) => s,
            Err(st) => return st,
        };
        if let Err(e) = t.tree.schema().check(&s) {
            return fail(e);
        }
        *out = t.tree.predict(&s);
        QhtStatus::Ok
    })
}

/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qht_tree_stats(tree: *const QhtTree, out: *mut QhtStats) -> QhtStatus {
    let Some(t) = tree.as_ref() else { return null("tree") };
    if out.is_null() {
        return null("out");
    }
    let m = t.tree.metrics();
    *out = QhtStats {
        samples: m.samples,
        trials: m.trials,
        splits: m.splits,
        splits_by_bound: m.splits_by_bound,
        splits_by_tie: m.splits_by_tie,
        pool_exhausted: m.pool_exhausted,
        leaves: t.tree.leaf_count(),
        depth: t.tree.depth(),
    };
    QhtStatus::Ok
}

/// Text dump of the tree. Call with a null `buf` to learn the size.
///
/// # Safety
/// `tree` must be a live handle; `buf` null or `cap` writable bytes;
/// `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qht_tree_dump(tree: *const QhtTree, buf: *mut c_char, cap: usize, needed: *mut usize) -> QhtStatus {
    let Some(t) = tree.as_ref() else { return null("tree") };
    let st = write_str(&t.tree.dump(), buf, cap, needed);
    if st == QhtStatus::BufferTooSmall {
        set_error("dump buffer too small");
    }
    st
}

/// Evaluate the cost models. `values` holds `V_i` for each categorical
/// attribute (may be null when `n_values` is 0).
///
/// # Safety
/// `design` and `out` must be valid; `values` must hold `n_values` entries.
#[no_mangle]
pub unsafe extern "C" fn qht_cost_report(
    design: *const QhtDesign,
    values: *const u64,
    n_values: usize,
    out: *mut QhtCost,
) -> QhtStatus {
    guard(|| {
        let Some(d) = design.as_ref() else { return null("design") };
        if out.is_null() {
            return null("out");
        }
        let Some(values) = slice(values, n_values) else { return null("values") };
        let p = DesignParams {
            labels: d.labels,
            numeric: d.numeric,
            categorical: values.len() as u64,
            values: values.to_vec(),
            quantiles: d.quantiles,
            elements: d.elements,
            depth: d.depth,
            freq_mhz: d.freq_mhz,
            samples: d.samples,
            cold_start_cycles: d.cold_start_cycles,
            ..DesignParams::default()
        };
        match cost::report(&p) {
            Ok(r) => {
                *out = QhtCost {
                    latency_cycles: r.latency_cycles,
                    tp_fpga_bps: r.tp_fpga_bps,
                    tp_overall_bps: r.tp_overall_bps,
                    exec_time_s: r.exec_time_s,
                    dsp: r.dsp.overall,
                    bram: r.bram.overall,
                    bram36: r.bram36,
                };
                QhtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
