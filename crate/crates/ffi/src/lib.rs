//! C ABI over the `thetagraph` crate.
//!
//! Graphs live behind an opaque [`TgGraph`] handle. Every call returns a
//! [`TgStatus`]; results that are not plain scalars come back as
//! NUL-terminated JSON strings owned by the caller and released with
//! [`tg_string_free`]. The message for the most recent failure on the
//! calling thread is available from [`tg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use thetagraph::analysis::{self, NegTypeVerdict};
use thetagraph::certificate::{self, Certificate, WitnessCertificate};
use thetagraph::graph::{distance_matrix, Point};
use thetagraph::{l1cut, rational, theta, witness, Error, MetricGraph};

/// Status codes returned by every `tg_*` function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgStatus {
    /// The call succeeded and the property asked about holds.
    Ok = 0,
    /// The call succeeded and produced a refutation (a violating weighting,
    /// a Farkas certificate or an invalid certificate).
    Refuted = 1,
    /// A required pointer argument was null.
    NullPointer = 2,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 3,
    /// Malformed JSON or an ill-formed graph, point or certificate.
    InvalidInput = 4,
    /// The graph contains no theta subgraph.
    NoTheta = 5,
    /// The request exceeds a configured size bound.
    SizeBound = 6,
    /// An internal consistency check failed.
    Internal = 7,
    /// A panic was caught at the boundary.
    Panic = 8,
}

/// Opaque handle to a validated metric graph.
pub struct TgGraph {
    graph: MetricGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(TgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NoTheta => TgStatus::NoTheta,
            Error::SizeBound(_) => TgStatus::SizeBound,
            Error::Internal(_) => TgStatus::Internal,
            _ => TgStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail(TgStatus::InvalidInput, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<TgStatus, Fail>) -> TgStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            TgStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail(TgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(TgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn graph_ref<'a>(g: *const TgGraph) -> Result<&'a MetricGraph, Fail> {
    if g.is_null() {
        return Err(Fail(TgStatus::NullPointer, "graph is null".into()));
    }
    Ok(&(*g).graph)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(TgStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(TgStatus::NullPointer, "output pointer is null".into()));
    }
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(TgStatus::Internal, "interior NUL in output".into()))?;
    write_out(out, c.into_raw())
}

unsafe fn points_or_vertices(g: &MetricGraph, points_json: *const c_char) -> Result<Vec<Point>, Fail> {
    if points_json.is_null() {
        return Ok(g.vertex_points());
    }
    let text = read_str(points_json, "points")?;
    Ok(certificate::parse_points(text)?)
}

/// Parses a graph from its JSON description. On success `*out` receives a
/// handle to release with [`tg_graph_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_graph_from_json(json: *const c_char, out: *mut *mut TgGraph) -> TgStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(json, "json")?;
        let graph = MetricGraph::from_json(text)?;
        write_out(out, Box::into_raw(Box::new(TgGraph { graph })))?;
        Ok(TgStatus::Ok)
    })
}

/// Releases a graph handle. Null is ignored.
///
/// # Safety
/// `g` must come from [`tg_graph_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tg_graph_free(g: *mut TgGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Writes the vertex and edge counts.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tg_graph_counts(
    g: *const TgGraph,
    vertices: *mut usize,
    edges: *mut usize,
) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_out(vertices)?;
        check_out(edges)?;
        write_out(vertices, g.vertex_count())?;
        write_out(edges, g.edge_count())?;
        Ok(TgStatus::Ok)
    })
}

/// Serializes the graph back to JSON.
///
/// # Safety
/// `g` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tg_graph_to_json(g: *const TgGraph, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_out(out)?;
        write_string(out, g.to_json())?;
        Ok(TgStatus::Ok)
    })
}

/// Exact distance between two points given as JSON objects. The result is a
/// rational in `p/q` form.
///
/// # Safety
/// All pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tg_distance(
    g: *const TgGraph,
    p_json: *const c_char,
    q_json: *const c_char,
    out: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_out(out)?;
        let p: Point = serde_json::from_str(read_str(p_json, "p")?)?;
        let q: Point = serde_json::from_str(read_str(q_json, "q")?)?;
        let d = thetagraph::graph::distance(g, &p, &q)?;
        write_string(out, rational::format(&d))?;
        Ok(TgStatus::Ok)
    })
}

/// Sets `*out` to whether the graph contains a theta subgraph.
///
/// # Safety
/// `g` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tg_contains_theta(g: *const TgGraph, out: *mut bool) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_out(out)?;
        write_out(out, theta::contains_theta(g))?;
        Ok(TgStatus::Ok)
    })
}

/// A theta subgraph of minimum total length, as a theta certificate.
///
/// # Safety
/// `g` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tg_minimal_theta_json(g: *const TgGraph, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_out(out)?;
        let theta = theta::minimal_theta(g)?;
        write_string(out, serde_json::to_string(&Certificate::Theta { theta })?)?;
        Ok(TgStatus::Ok)
    })
}

/// The six-point witness certificate for a graph containing a theta.
///
/// # Safety
/// `g` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tg_witness_json(g: *const TgGraph, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_out(out)?;
        let w = witness::construct_witness(g)?;
        let cert = Certificate::Witness(WitnessCertificate::from_witness(&w));
        write_string(out, serde_json::to_string(&cert)?)?;
        Ok(TgStatus::Ok)
    })
}

/// Decides negative type of the metric on `points_json` (a JSON array of
/// points, or a certificate carrying points; null means all vertices).
/// Returns [`TgStatus::Ok`] or [`TgStatus::Refuted`] with the certificate
/// in `*out`.
///
/// # Safety
/// `g` and `out` must be valid; `points_json` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tg_negtype_json(
    g: *const TgGraph,
    points_json: *const c_char,
    out: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_out(out)?;
        let points = points_or_vertices(g, points_json)?;
        let m = distance_matrix(g, &points)?;
        let result = analysis::is_negative_type(&m)?;
        let status = match result {
            NegTypeVerdict::NegativeType { .. } => TgStatus::Ok,
            NegTypeVerdict::NotNegativeType { .. } => TgStatus::Refuted,
        };
        let cert = Certificate::NegativeType { points, result };
        write_string(out, serde_json::to_string(&cert)?)?;
        Ok(status)
    })
}

/// Decides ℓ1-embeddability of the metric on `points_json` (as for
/// [`tg_negtype_json`]). `max_points` of zero selects the default bound.
/// Returns [`TgStatus::Ok`] with a cut decomposition or
/// [`TgStatus::Refuted`] with a Farkas certificate.
///
/// # Safety
/// `g` and `out` must be valid; `points_json` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tg_l1_json(
    g: *const TgGraph,
    points_json: *const c_char,
    max_points: usize,
    out: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_out(out)?;
        let points = points_or_vertices(g, points_json)?;
        let m = distance_matrix(g, &points)?;
        let bound = if max_points == 0 {
            l1cut::DEFAULT_MAX_POINTS
        } else {
            max_points
        };
        let result = l1cut::is_l1_embeddable_with_bound(&m, bound)?;
        let status = if result.is_embeddable() {
            TgStatus::Ok
        } else {
            TgStatus::Refuted
        };
        let cert = Certificate::L1 { points, result };
        write_string(out, serde_json::to_string(&cert)?)?;
        Ok(status)
    })
}

/// Re-checks a certificate (bare, or embedded in a run report) against the
/// graph. Returns [`TgStatus::Ok`] if valid and [`TgStatus::Refuted`] if
/// not; the reason is then available from [`tg_last_error`].
///
/// # Safety
/// `g` must be valid and `certificate_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tg_verify_json(g: *const TgGraph, certificate_json: *const c_char) -> TgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let cert = certificate::parse_certificate(read_str(certificate_json, "certificate")?)?;
        let v = certificate::verify(&cert, g)?;
        if v.valid {
            Ok(TgStatus::Ok)
        } else {
            Err(Fail(TgStatus::Refuted, v.detail))
        }
    })
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next `tg_*` call on the same thread.
#[no_mangle]
pub extern "C" fn tg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from a `tg_*` output parameter and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
