//! C ABI over the `nmfpool` library.
//!
//! Every fallible function returns an [`NmfpoolStatus`]. On failure a
//! human-readable message is kept per thread and can be read with
//! [`nmfpool_last_error_message`]. Matrices and datasets are opaque
//! handles created by this library and released with the matching
//! `*_free` function. Matrices are dense, row-major, `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nmfpool::dataset::{parse_tu_dataset, pool_sizes, DatasetBundle};
use nmfpool::graph::{adjacency, normalize_adjacency};
use nmfpool::layers::coarsen;
use nmfpool::linalg::DenseMatrix;
use nmfpool::nmf::{factorize, NmfConfig};
use nmfpool::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmfpoolStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    NotFound = 4,
    Parse = 5,
    Numerical = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque dense matrix.
pub struct NmfpoolMatrix(DenseMatrix);

/// Opaque parsed TU dataset.
pub struct NmfpoolDataset(DatasetBundle);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> NmfpoolStatus {
    match e {
        Error::ShapeMismatch { .. } | Error::InvalidShape { .. } => NmfpoolStatus::ShapeMismatch,
        Error::NonFinite { .. } | Error::Diverged { .. } => NmfpoolStatus::Numerical,
        Error::MissingFile(_) => NmfpoolStatus::NotFound,
        Error::Parse { .. } => NmfpoolStatus::Parse,
        Error::Io(_) => NmfpoolStatus::Io,
        _ => NmfpoolStatus::InvalidArgument,
    }
}

fn fail(status: NmfpoolStatus, message: impl Into<String>) -> NmfpoolStatus {
    set_error(message.into());
    status
}

/// Runs `body`, converting library errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), NmfpoolStatus>) -> NmfpoolStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NmfpoolStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(NmfpoolStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: nmfpool::Result<T>) -> Result<T, NmfpoolStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, NmfpoolStatus> {
    p.as_ref().ok_or_else(|| fail(NmfpoolStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NmfpoolStatus> {
    p.as_mut().ok_or_else(|| fail(NmfpoolStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, NmfpoolStatus> {
    if p.is_null() {
        return Err(fail(NmfpoolStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NmfpoolStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn boxed(m: DenseMatrix) -> *mut NmfpoolMatrix {
    Box::into_raw(Box::new(NmfpoolMatrix(m)))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nmfpool_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn nmfpool_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut NmfpoolMatrix,
) -> NmfpoolStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(NmfpoolStatus::InvalidArgument, "rows * cols overflows"))?;
        if data.is_null() && len > 0 {
            return Err(fail(NmfpoolStatus::NullPointer, "data is null"));
        }
        let values = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(data, len).to_vec()
        };
        let m = lift(DenseMatrix::new(rows, cols, values))?;
        *out = boxed(m);
        Ok(())
    })
}

/// Releases a matrix. NULL is ignored.
///
/// # Safety
/// `m` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_matrix_free(m: *mut NmfpoolMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of rows, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_matrix_rows(m: *const NmfpoolMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// Number of columns, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_matrix_cols(m: *const NmfpoolMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Copies the row-major values into `out`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_matrix_copy_data(
    m: *const NmfpoolMatrix,
    out: *mut f64,
    len: usize,
) -> NmfpoolStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        let data = m.0.data();
        if len < data.len() {
            return Err(fail(
                NmfpoolStatus::BufferTooSmall,
                format!("buffer holds {len} values, matrix has {}", data.len()),
            ));
        }
        if out.is_null() && !data.is_empty() {
            return Err(fail(NmfpoolStatus::NullPointer, "out is null"));
        }
        if !data.is_empty() {
            ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
        }
        Ok(())
    })
}

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` of a square adjacency matrix.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_normalize_adjacency(
    a: *const NmfpoolMatrix,
    out: *mut *mut NmfpoolMatrix,
) -> NmfpoolStatus {
    guard(|| {
        let a = deref(a, "a")?;
        let out = out_ptr(out, "out")?;
        if a.0.rows() != a.0.cols() {
            return Err(fail(NmfpoolStatus::ShapeMismatch, "adjacency must be square"));
        }
        *out = boxed(normalize_adjacency(&a.0));
        Ok(())
    })
}

/// Non-negative factorization `A ≈ W H` with inner dimension `k` (clamped
/// to `min(rows, cols) − 1`). Writes new handles to `out_w`, `out_h` and
/// the final residual norm to `out_residual` (which may be NULL).
///
/// # Safety
/// `a` must be a live handle; `out_w` and `out_h` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_factorize(
    a: *const NmfpoolMatrix,
    k: usize,
    seed: u64,
    max_iters: usize,
    rel_tol: f64,
    out_w: *mut *mut NmfpoolMatrix,
    out_h: *mut *mut NmfpoolMatrix,
    out_residual: *mut f64,
) -> NmfpoolStatus {
    guard(|| {
        let a = deref(a, "a")?;
        let out_w = out_ptr(out_w, "out_w")?;
        let out_h = out_ptr(out_h, "out_h")?;
        let cfg = NmfConfig {
            max_iters,
            rel_tol,
            ..NmfConfig::new(k, seed)
        };
        let f = lift(factorize(&a.0, &cfg))?;
        if let Some(r) = out_residual.as_mut() {
            *r = f.final_objective;
        }
        *out_w = boxed(f.w);
        *out_h = boxed(f.h);
        Ok(())
    })
}

/// One pooling step on a square non-negative matrix: the assignment
/// `S = Hᵀ` (`n × k'`) and the coarsened matrix `Sᵀ A S` (`k' × k'`).
///
/// # Safety
/// `a` must be a live handle; `out_s` and `out_a` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_coarsen(
    a: *const NmfpoolMatrix,
    k: usize,
    seed: u64,
    out_s: *mut *mut NmfpoolMatrix,
    out_a: *mut *mut NmfpoolMatrix,
) -> NmfpoolStatus {
    guard(|| {
        let a = deref(a, "a")?;
        let out_s = out_ptr(out_s, "out_s")?;
        let out_a = out_ptr(out_a, "out_a")?;
        let trace = lift(coarsen(&a.0, k, &NmfConfig::new(k, seed)))?;
        *out_s = boxed(trace.s);
        *out_a = boxed(trace.a_out);
        Ok(())
    })
}

/// Pool sizes `k₁ = ⌊avg · p⌋`, `k₂ = ⌊k₁ / 2⌋`; writes `depth` entries.
///
/// # Safety
/// `out_ks` must hold at least `depth` writable values.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_pool_sizes(
    avg_nodes: f64,
    fraction: f64,
    depth: usize,
    out_ks: *mut usize,
) -> NmfpoolStatus {
    guard(|| {
        if out_ks.is_null() {
            return Err(fail(NmfpoolStatus::NullPointer, "out_ks is null"));
        }
        let ks = lift(pool_sizes(avg_nodes, fraction, depth))?;
        ptr::copy_nonoverlapping(ks.as_ptr(), out_ks, ks.len());
        Ok(())
    })
}

/// Parses the TU dataset `name` found in `root/name/` or `root/`.
///
/// # Safety
/// `root` and `name` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_dataset_open(
    root: *const c_char,
    name: *const c_char,
    out: *mut *mut NmfpoolDataset,
) -> NmfpoolStatus {
    guard(|| {
        let root = c_str(root, "root")?;
        let name = c_str(name, "name")?;
        let out = out_ptr(out, "out")?;
        let bundle = lift(parse_tu_dataset(Path::new(root), name))?;
        *out = Box::into_raw(Box::new(NmfpoolDataset(bundle)));
        Ok(())
    })
}

/// Releases a dataset. NULL is ignored.
///
/// # Safety
/// `d` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_dataset_free(d: *mut NmfpoolDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Graph count, class count and mean node and edge counts. Any output
/// pointer may be NULL.
///
/// # Safety
/// `d` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_dataset_stats(
    d: *const NmfpoolDataset,
    out_graphs: *mut usize,
    out_classes: *mut usize,
    out_avg_nodes: *mut f64,
    out_avg_edges: *mut f64,
) -> NmfpoolStatus {
    guard(|| {
        let d = &deref(d, "dataset")?.0;
        if let Some(p) = out_graphs.as_mut() {
            *p = d.len();
        }
        if let Some(p) = out_classes.as_mut() {
            *p = d.num_classes;
        }
        if let Some(p) = out_avg_nodes.as_mut() {
            *p = d.stats.avg_nodes;
        }
        if let Some(p) = out_avg_edges.as_mut() {
            *p = d.stats.avg_edges;
        }
        Ok(())
    })
}

/// Dense 0/1 adjacency and the 0-based class of graph `index`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable; `out_class` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn nmfpool_dataset_graph(
    d: *const NmfpoolDataset,
    index: usize,
    out: *mut *mut NmfpoolMatrix,
    out_class: *mut usize,
) -> NmfpoolStatus {
    guard(|| {
        let d = &deref(d, "dataset")?.0;
        let out = out_ptr(out, "out")?;
        let g = d.graphs.get(index).ok_or_else(|| {
            fail(
                NmfpoolStatus::InvalidArgument,
                format!("graph {index} out of range for {} graphs", d.len()),
            )
        })?;
        if let Some(c) = out_class.as_mut() {
            *c = g.graph_label();
        }
        *out = boxed(adjacency(g));
        Ok(())
    })
}
