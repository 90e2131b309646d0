//! C ABI over `vcop`.
//!
//! Every fallible function returns a [`VcopStatus`]; on failure the message
//! is available from [`vcop_last_error_message`] on the same thread. Handles
//! are opaque and must be released with their `_free` function. Strings
//! returned to the caller are released with [`vcop_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use vcop::dynamics::count_oscillations;
use vcop::ingest::{parse_archive, ArchiveFormat, ParsedArchive};
use vcop::mlm::{fit_lmm, icc_from, Criterion, ModelFit, ModelSpec};
use vcop::netgraph::{betweenness, group_betweenness, InteractionGraph};
use vcop::panel::{pearson, read_panel_csv, PanelRow};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcopStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    ParseError = 4,
    FitError = 5,
    /// The quantity is undefined for this input (e.g. fewer than 3 nodes).
    Undefined = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Maximum likelihood.
pub const VCOP_CRITERION_ML: i32 = 0;
/// Restricted maximum likelihood.
pub const VCOP_CRITERION_REML: i32 = 1;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: VcopStatus, msg: impl Into<String>) -> VcopStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> VcopStatus) -> VcopStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == VcopStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(VcopStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, VcopStatus> {
    if p.is_null() {
        return Err(fail(VcopStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(VcopStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn bytes_arg<'a>(p: *const u8, len: usize, name: &str) -> Result<&'a [u8], VcopStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(VcopStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, VcopStatus> {
    p.as_mut()
        .ok_or_else(|| fail(VcopStatus::NullPointer, format!("{name} is null")))
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn vcop_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn vcop_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// Graphs

/// Directed reply graph between authors.
pub struct VcopGraph(InteractionGraph);

#[no_mangle]
pub unsafe extern "C" fn vcop_graph_new(graph: *mut *mut VcopGraph) -> VcopStatus {
    guard(|| {
        let slot = try_ffi!(out(graph, "graph"));
        *slot = Box::into_raw(Box::new(VcopGraph(InteractionGraph::new())));
        VcopStatus::Ok
    })
}

/// Records a reply by `from` to a post of `to`. Self-replies are kept as
/// arcs but never affect betweenness.
#[no_mangle]
pub unsafe extern "C" fn vcop_graph_add_reply(
    graph: *mut VcopGraph,
    from: *const c_char,
    to: *const c_char,
) -> VcopStatus {
    guard(|| {
        let g = try_ffi!(out(graph, "graph"));
        let from = try_ffi!(str_arg(from, "from"));
        let to = try_ffi!(str_arg(to, "to"));
        g.0.add_reply(from, to);
        VcopStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_graph_node_count(graph: *const VcopGraph, count: *mut usize) -> VcopStatus {
    guard(|| {
        let g = try_ffi!(graph
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "graph is null")));
        *try_ffi!(out(count, "count")) = g.0.node_count();
        VcopStatus::Ok
    })
}

/// Raw betweenness per node in insertion order. `len` must be at least the
/// node count; otherwise `BufferTooSmall` is returned and nothing is written.
#[no_mangle]
pub unsafe extern "C" fn vcop_graph_betweenness(
    graph: *const VcopGraph,
    scores: *mut f64,
    len: usize,
) -> VcopStatus {
    guard(|| {
        let g = try_ffi!(graph
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "graph is null")));
        let n = g.0.node_count();
        if len < n {
            return fail(
                VcopStatus::BufferTooSmall,
                format!("buffer holds {len} values, graph has {n} nodes"),
            );
        }
        if n == 0 {
            return VcopStatus::Ok;
        }
        if scores.is_null() {
            return fail(VcopStatus::NullPointer, "scores is null");
        }
        let b = betweenness(&g.0);
        slice::from_raw_parts_mut(scores, n).copy_from_slice(&b.raw);
        VcopStatus::Ok
    })
}

/// Group betweenness centralization; `Undefined` below three nodes.
#[no_mangle]
pub unsafe extern "C" fn vcop_graph_group_betweenness(graph: *const VcopGraph, value: *mut f64) -> VcopStatus {
    guard(|| {
        let g = try_ffi!(graph
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "graph is null")));
        let v = try_ffi!(out(value, "value"));
        match group_betweenness(&g.0) {
            Some(x) => {
                *v = x;
                VcopStatus::Ok
            }
            None => fail(VcopStatus::Undefined, "centralization needs at least 3 nodes"),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_graph_free(graph: *mut VcopGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

// Archives

/// Parsed post archive with its ingest diagnostics.
pub struct VcopArchive(ParsedArchive);

/// Parses `len` bytes in `format` ("jsonl" or "csv").
#[no_mangle]
pub unsafe extern "C" fn vcop_archive_parse(
    data: *const u8,
    len: usize,
    format: *const c_char,
    archive: *mut *mut VcopArchive,
) -> VcopStatus {
    guard(|| {
        let slot = try_ffi!(out(archive, "archive"));
        let bytes = try_ffi!(bytes_arg(data, len, "data"));
        let format: ArchiveFormat = match try_ffi!(str_arg(format, "format")).parse() {
            Ok(f) => f,
            Err(e) => return fail(VcopStatus::InvalidArgument, e.to_string()),
        };
        match parse_archive(bytes, format) {
            Ok(p) => {
                *slot = Box::into_raw(Box::new(VcopArchive(p)));
                VcopStatus::Ok
            }
            Err(e) => fail(VcopStatus::ParseError, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_archive_post_count(archive: *const VcopArchive, count: *mut usize) -> VcopStatus {
    guard(|| {
        let a = try_ffi!(archive
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "archive is null")));
        *try_ffi!(out(count, "count")) = a.0.archive.len();
        VcopStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_archive_diagnostic_count(
    archive: *const VcopArchive,
    count: *mut usize,
) -> VcopStatus {
    guard(|| {
        let a = try_ffi!(archive
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "archive is null")));
        *try_ffi!(out(count, "count")) = a.0.diagnostics.len();
        VcopStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_archive_free(archive: *mut VcopArchive) {
    if !archive.is_null() {
        drop(Box::from_raw(archive));
    }
}

// Panels and model fits

/// Community-month panel read from CSV.
pub struct VcopPanel(Vec<PanelRow>);

/// Fitted random-intercept model.
pub struct VcopFit(ModelFit);

#[no_mangle]
pub unsafe extern "C" fn vcop_panel_read_csv(data: *const u8, len: usize, panel: *mut *mut VcopPanel) -> VcopStatus {
    guard(|| {
        let slot = try_ffi!(out(panel, "panel"));
        let bytes = try_ffi!(bytes_arg(data, len, "data"));
        match read_panel_csv(bytes) {
            Ok(rows) => {
                *slot = Box::into_raw(Box::new(VcopPanel(rows)));
                VcopStatus::Ok
            }
            Err(e) => fail(VcopStatus::ParseError, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_panel_row_count(panel: *const VcopPanel, count: *mut usize) -> VcopStatus {
    guard(|| {
        let p = try_ffi!(panel
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "panel is null")));
        *try_ffi!(out(count, "count")) = p.0.len();
        VcopStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_panel_free(panel: *mut VcopPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Fits `model` (a standard name such as "full", or "NAME=cov1+cov2") with
/// `criterion` [`VCOP_CRITERION_ML`] or [`VCOP_CRITERION_REML`].
#[no_mangle]
pub unsafe extern "C" fn vcop_fit(
    panel: *const VcopPanel,
    model: *const c_char,
    criterion: i32,
    fit: *mut *mut VcopFit,
) -> VcopStatus {
    guard(|| {
        let p = try_ffi!(panel
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "panel is null")));
        let slot = try_ffi!(out(fit, "fit"));
        let spec = match ModelSpec::parse(try_ffi!(str_arg(model, "model"))) {
            Ok(s) => s,
            Err(e) => return fail(VcopStatus::InvalidArgument, e),
        };
        let criterion = match criterion {
            VCOP_CRITERION_ML => Criterion::Ml,
            VCOP_CRITERION_REML => Criterion::Reml,
            other => return fail(VcopStatus::InvalidArgument, format!("unknown criterion {other}")),
        };
        match fit_lmm(&p.0, &spec, criterion) {
            Ok(f) => {
                *slot = Box::into_raw(Box::new(VcopFit(f)));
                VcopStatus::Ok
            }
            Err(e) => fail(VcopStatus::FitError, e.to_string()),
        }
    })
}

/// Number of fixed effects, intercept included.
#[no_mangle]
pub unsafe extern "C" fn vcop_fit_coefficient_count(fit: *const VcopFit, count: *mut usize) -> VcopStatus {
    guard(|| {
        let f = try_ffi!(fit
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "fit is null")));
        *try_ffi!(out(count, "count")) = f.0.coefficients.len();
        VcopStatus::Ok
    })
}

/// Estimate, standard error and p-value of fixed effect `index`
/// (0 = intercept). Null output pointers are skipped.
#[no_mangle]
pub unsafe extern "C" fn vcop_fit_coefficient(
    fit: *const VcopFit,
    index: usize,
    estimate: *mut f64,
    std_error: *mut f64,
    p_value: *mut f64,
) -> VcopStatus {
    guard(|| {
        let f = try_ffi!(fit
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "fit is null")));
        let Some(c) = f.0.coefficients.get(index) else {
            return fail(
                VcopStatus::InvalidArgument,
                format!("coefficient {index} out of range ({} coefficients)", f.0.coefficients.len()),
            );
        };
        if let Some(v) = estimate.as_mut() {
            *v = c.estimate;
        }
        if let Some(v) = std_error.as_mut() {
            *v = c.std_error;
        }
        if let Some(v) = p_value.as_mut() {
            *v = c.p_value;
        }
        VcopStatus::Ok
    })
}

/// Between-community and residual variance plus the ICC.
#[no_mangle]
pub unsafe extern "C" fn vcop_fit_variances(
    fit: *const VcopFit,
    level2: *mut f64,
    level1: *mut f64,
    icc: *mut f64,
) -> VcopStatus {
    guard(|| {
        let f = try_ffi!(fit
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "fit is null")));
        if let Some(v) = level2.as_mut() {
            *v = f.0.variance_level2;
        }
        if let Some(v) = level1.as_mut() {
            *v = f.0.variance_level1;
        }
        if let Some(v) = icc.as_mut() {
            *v = f.0.icc;
        }
        VcopStatus::Ok
    })
}

/// The fit as JSON; release with [`vcop_string_free`].
#[no_mangle]
pub unsafe extern "C" fn vcop_fit_to_json(fit: *const VcopFit, json: *mut *mut c_char) -> VcopStatus {
    guard(|| {
        let f = try_ffi!(fit
            .as_ref()
            .ok_or_else(|| fail(VcopStatus::NullPointer, "fit is null")));
        let slot = try_ffi!(out(json, "json"));
        *slot = ptr::null_mut();
        match serde_json::to_string(&f.0) {
            Ok(s) => {
                *slot = CString::new(s).unwrap_or_default().into_raw();
                VcopStatus::Ok
            }
            Err(e) => fail(VcopStatus::FitError, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_fit_free(fit: *mut VcopFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

// Plain functions

#[no_mangle]
pub unsafe extern "C" fn vcop_count_oscillations(values: *const f64, len: usize, count: *mut usize) -> VcopStatus {
    guard(|| {
        let c = try_ffi!(out(count, "count"));
        if len > 0 && values.is_null() {
            return fail(VcopStatus::NullPointer, "values is null");
        }
        let series = if len == 0 { &[][..] } else { slice::from_raw_parts(values, len) };
        *c = count_oscillations(series);
        VcopStatus::Ok
    })
}

/// Pearson r and two-sided p-value; `Undefined` for fewer than 3 pairs or
/// a constant series.
#[no_mangle]
pub unsafe extern "C" fn vcop_pearson(
    x: *const f64,
    y: *const f64,
    len: usize,
    r: *mut f64,
    p_value: *mut f64,
) -> VcopStatus {
    guard(|| {
        if len > 0 && (x.is_null() || y.is_null()) {
            return fail(VcopStatus::NullPointer, "x or y is null");
        }
        let (xs, ys) = if len == 0 {
            (&[][..], &[][..])
        } else {
            (slice::from_raw_parts(x, len), slice::from_raw_parts(y, len))
        };
        match pearson(xs, ys) {
            Ok(c) => {
                if let Some(v) = r.as_mut() {
                    *v = c.r;
                }
                if let Some(v) = p_value.as_mut() {
                    *v = c.p;
                }
                VcopStatus::Ok
            }
            Err(e) => fail(VcopStatus::Undefined, format!("{e:?}")),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcop_icc(level2: f64, level1: f64, icc: *mut f64) -> VcopStatus {
    guard(|| {
        if !(level2 >= 0.0 && level1 >= 0.0) {
            return fail(VcopStatus::InvalidArgument, "variances must be non-negative");
        }
        *try_ffi!(out(icc, "icc")) = icc_from(level2, level1);
        VcopStatus::Ok
    })
}
