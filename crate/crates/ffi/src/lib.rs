//! C ABI over the `agc` clustering library.
//!
//! Objects cross the boundary as opaque handles that the caller owns and
//! releases with the matching `*_free` function. Every fallible call returns
//! an [`AgcStatus`]; on failure [`agc_last_error`] describes what went wrong
//! on the calling thread. Panics are caught and reported as
//! `AGC_STATUS_PANIC`, never unwound into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use agc::{AgcConfig, AgcError, ClusterPartition, FeatureMatrix, FilterOrder, SparseGraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Domain = 5,
    Io = 6,
    Aborted = 7,
    Panic = 8,
    Internal = 9,
}

/// Undirected, weighted graph.
pub struct AgcGraph {
    inner: SparseGraph,
}

/// Dense row-major node feature matrix.
pub struct AgcFeatures {
    inner: FeatureMatrix,
}

/// Outcome of [`agc_run`].
pub struct AgcClustering {
    labels: Vec<usize>,
    num_clusters: usize,
    k: usize,
    intra: f64,
}

/// Tuning knobs for [`agc_run`]. Start from [`agc_run_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AgcRunOptions {
    pub clusters: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub kmeans_restarts: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AgcMetrics {
    pub acc: f64,
    pub nmi: f64,
    pub macro_f1: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &AgcError) -> AgcStatus {
    match err {
        AgcError::Parse { .. } => AgcStatus::Parse,
        AgcError::Validation(_) => AgcStatus::Validation,
        AgcError::Domain(_) => AgcStatus::Domain,
        AgcError::Aborted { .. } => AgcStatus::Aborted,
        AgcError::Io(_) => AgcStatus::Io,
        AgcError::Input { source, .. } => status_of(source),
        _ => AgcStatus::Internal,
    }
}

struct Failure(AgcStatus, String);

impl From<AgcError> for Failure {
    fn from(e: AgcError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AgcStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(AgcStatus::InvalidArgument, msg.into())
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> AgcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AgcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            AgcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(Path::new(s))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn to_partition(labels: &[usize]) -> Result<ClusterPartition, Failure> {
    let m = labels.iter().max().map_or(0, |&l| l + 1);
    Ok(ClusterPartition::new(labels.to_vec(), m)?)
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn agc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn agc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph on `n` nodes from `num_edges` undirected edges
/// `(src[i], dst[i])`. `weights` may be null for unit weights.
///
/// # Safety
/// `src`, `dst` and non-null `weights` must point to `num_edges` readable
/// elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agc_graph_from_edges(
    n: usize,
    src: *const usize,
    dst: *const usize,
    weights: *const f64,
    num_edges: usize,
    out: *mut *mut AgcGraph,
) -> AgcStatus {
    guard(|| {
        let src = slice(src, num_edges, "src")?;
        let dst = slice(dst, num_edges, "dst")?;
        let w = if weights.is_null() {
            None
        } else {
            Some(slice(weights, num_edges, "weights")?)
        };
        let edges: Vec<_> = (0..num_edges)
            .map(|i| (src[i], dst[i], w.map_or(1.0, |w| w[i])))
            .collect();
        let inner = SparseGraph::from_edges(n, &edges)?;
        put(out, AgcGraph { inner })
    })
}

/// Reads a whitespace-separated edge list (`u v [w]`, `#` comments).
/// `n` is a minimum node count; pass 0 to infer it from the largest id.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agc_graph_load(
    path: *const c_char,
    n: usize,
    out: *mut *mut AgcGraph,
) -> AgcStatus {
    guard(|| {
        let path = path_arg(path)?;
        let inner = agc::io::read_graph(path, (n > 0).then_some(n))?;
        put(out, AgcGraph { inner })
    })
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agc_graph_num_nodes(g: *const AgcGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.n())
}

/// Undirected edge count (self-loops once), or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agc_graph_num_edges(g: *const AgcGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.num_edges())
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn agc_graph_free(g: *mut AgcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Copies an `n x d` row-major matrix.
///
/// # Safety
/// `data` must point to `n * d` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agc_features_from_rows(
    data: *const f64,
    n: usize,
    d: usize,
    out: *mut *mut AgcFeatures,
) -> AgcStatus {
    guard(|| {
        let len = n.checked_mul(d).ok_or_else(|| invalid("n * d overflows"))?;
        let values = slice(data, len, "data")?;
        let inner = FeatureMatrix::new(n, d, values.to_vec())?;
        put(out, AgcFeatures { inner })
    })
}

/// Reads a headerless comma-separated matrix.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agc_features_load(
    path: *const c_char,
    out: *mut *mut AgcFeatures,
) -> AgcStatus {
    guard(|| {
        let inner = agc::io::read_features(path_arg(path)?)?;
        put(out, AgcFeatures { inner })
    })
}

/// Writes the matrix shape to `n` and `d`.
///
/// # Safety
/// `x` must be a live handle; `n` and `d` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agc_features_shape(
    x: *const AgcFeatures,
    n: *mut usize,
    d: *mut usize,
) -> AgcStatus {
    guard(|| {
        let x = deref(x, "features")?;
        if n.is_null() || d.is_null() {
            return Err(null("shape output"));
        }
        *n = x.inner.nrows();
        *d = x.inner.ncols();
        Ok(())
    })
}

/// Copies the matrix, row-major, into `buf`, which must hold exactly `n * d`
/// doubles.
///
/// # Safety
/// `x` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn agc_features_copy(
    x: *const AgcFeatures,
    buf: *mut f64,
    len: usize,
) -> AgcStatus {
    guard(|| {
        let x = deref(x, "features")?;
        let data = x.inner.as_slice();
        if len != data.len() {
            return Err(invalid(format!(
                "buffer holds {len} values, matrix has {}",
                data.len()
            )));
        }
        if buf.is_null() && len > 0 {
            return Err(null("buf"));
        }
        if len > 0 {
            std::slice::from_raw_parts_mut(buf, len).copy_from_slice(data);
        }
        Ok(())
    })
}

/// # Safety
/// `x` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn agc_features_free(x: *mut AgcFeatures) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// Applies the low-pass filter `k` times and returns the smoothed features.
///
/// # Safety
/// `g` and `x` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agc_filter(
    g: *const AgcGraph,
    x: *const AgcFeatures,
    k: usize,
    out: *mut *mut AgcFeatures,
) -> AgcStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let x = deref(x, "features")?;
        let op = agc::PropagationOperator::new(&g.inner);
        let inner = agc::convolve_k(&op, &x.inner, FilterOrder(k))?;
        put(out, AgcFeatures { inner })
    })
}

#[no_mangle]
pub extern "C" fn agc_run_options_default() -> AgcRunOptions {
    let cfg = AgcConfig::new(2);
    AgcRunOptions {
        clusters: 2,
        max_iter: cfg.max_iter,
        seed: cfg.seed,
        kmeans_restarts: cfg.spectral.kmeans.restarts,
    }
}

/// Clusters the nodes, choosing the filter order adaptively.
///
/// # Safety
/// `g`, `x` and `opts` must be valid pointers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agc_run(
    g: *const AgcGraph,
    x: *const AgcFeatures,
    opts: *const AgcRunOptions,
    out: *mut *mut AgcClustering,
) -> AgcStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let x = deref(x, "features")?;
        let opts = deref(opts, "options")?;
        let mut cfg = AgcConfig::new(opts.clusters);
        cfg.max_iter = opts.max_iter;
        cfg.seed = opts.seed;
        cfg.spectral.kmeans.restarts = opts.kmeans_restarts;
        let r = agc::run_agc(&g.inner, &x.inner, &cfg)?;
        put(
            out,
            AgcClustering {
                labels: r.partition.labels().to_vec(),
                num_clusters: r.partition.num_clusters(),
                k: r.k,
                intra: r.intra,
            },
        )
    })
}

/// Selected filter order, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agc_clustering_k(r: *const AgcClustering) -> usize {
    r.as_ref().map_or(0, |r| r.k)
}

/// Intra-cluster distance at the selected order, NaN for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agc_clustering_intra(r: *const AgcClustering) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.intra)
}

/// Number of labelled nodes, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agc_clustering_num_nodes(r: *const AgcClustering) -> usize {
    r.as_ref().map_or(0, |r| r.labels.len())
}

/// Number of clusters, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agc_clustering_num_clusters(r: *const AgcClustering) -> usize {
    r.as_ref().map_or(0, |r| r.num_clusters)
}

/// Copies the cluster label of each node into `buf` (length must equal the
/// node count).
///
/// # Safety
/// `r` must be a live handle; `buf` must point to `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn agc_clustering_labels(
    r: *const AgcClustering,
    buf: *mut usize,
    len: usize,
) -> AgcStatus {
    guard(|| {
        let r = deref(r, "clustering")?;
        if len != r.labels.len() {
            return Err(invalid(format!(
                "buffer holds {len} labels, clustering has {}",
                r.labels.len()
            )));
        }
        if buf.is_null() && len > 0 {
            return Err(null("buf"));
        }
        if len > 0 {
            std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&r.labels);
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn agc_clustering_free(r: *mut AgcClustering) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Scores `pred` against `truth`, both dense labels of length `n`.
/// NMI uses geometric normalization.
///
/// # Safety
/// `pred` and `truth` must point to `n` readable elements; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn agc_evaluate(
    pred: *const usize,
    truth: *const usize,
    n: usize,
    out: *mut AgcMetrics,
) -> AgcStatus {
    guard(|| {
        let pred = to_partition(slice(pred, n, "pred")?)?;
        let truth = to_partition(slice(truth, n, "truth")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (acc, _) = agc::accuracy(&pred, &truth)?;
        *out = AgcMetrics {
            acc,
            nmi: agc::nmi(&pred, &truth, agc::NmiNormalization::Geometric)?,
            macro_f1: agc::macro_f1(&pred, &truth)?,
        };
        Ok(())
    })
}
