//! C ABI over `fiam`.
//!
//! Every fallible call returns a [`FiamStatus`]; on failure the message is
//! available from [`fiam_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fiam::exact::{DensePinv, Objective};
use fiam::graph::{load_graph, Graph, Group, GroupAssignment, Hyperparams};
use fiam::greedy::EdgeSelection;
use fiam::harness::{run_algo, Algo};
use fiam::netgen::{generate_bah, BAhParams};
use fiam::sketch::SketchMode;
use fiam::Error;

/// Opaque undirected graph.
pub struct FiamGraph(Graph);

/// Opaque S/T/O split of the nodes.
pub struct FiamGroups(GroupAssignment);

/// Opaque result of an optimization run.
pub struct FiamSelection(EdgeSelection);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiamStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    InvalidPair = 6,
    EdgeExists = 7,
    EmptyGroup = 8,
    SingularMatrix = 9,
    GraphTooLarge = 10,
    BudgetTooLarge = 11,
    CombinatorialBlowup = 12,
    NoConvergence = 13,
    DegenerateInput = 14,
    NoNonEdge = 15,
    InsufficientCandidates = 16,
    InvalidParameter = 17,
    OutOfRange = 18,
    Panic = 19,
}

/// Group label of a node.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiamGroup {
    S = 0,
    T = 1,
    O = 2,
}

/// Metrics of one graph state. `i_o` is NaN when `O` is empty;
/// `kirchhoff` is NaN for per-iteration records.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiamMetrics {
    pub r: f64,
    pub i_s: f64,
    pub i_t: f64,
    pub i_o: f64,
    pub u: f64,
    pub kirchhoff: f64,
    pub f: f64,
    /// Non-zero when the values come from sketched estimates.
    pub approximate: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FiamStatus {
    match e {
        Error::Io { .. } => FiamStatus::Io,
        Error::Parse { .. } => FiamStatus::Parse,
        Error::Validation(_) => FiamStatus::Validation,
        Error::InvalidPair(..) => FiamStatus::InvalidPair,
        Error::EdgeExists(..) => FiamStatus::EdgeExists,
        Error::EmptyGroup => FiamStatus::EmptyGroup,
        Error::SingularMatrix => FiamStatus::SingularMatrix,
        Error::GraphTooLarge { .. } => FiamStatus::GraphTooLarge,
        Error::BudgetTooLarge { .. } => FiamStatus::BudgetTooLarge,
        Error::CombinatorialBlowup { .. } => FiamStatus::CombinatorialBlowup,
        Error::NoConvergence { .. } => FiamStatus::NoConvergence,
        Error::DegenerateInput(_) => FiamStatus::DegenerateInput,
        Error::NoNonEdge => FiamStatus::NoNonEdge,
        Error::InsufficientCandidates { .. } => FiamStatus::InsufficientCandidates,
        Error::InvalidParameter(_) => FiamStatus::InvalidParameter,
    }
}

struct Fail(FiamStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FiamStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FiamStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FiamStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            FiamStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(FiamStatus::Utf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn nan_or(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn fiam_status_name(status: FiamStatus) -> *const c_char {
    let s: &'static CStr = match status {
        FiamStatus::Ok => c"ok",
        FiamStatus::NullPointer => c"null pointer",
        FiamStatus::Utf8 => c"invalid utf-8",
        FiamStatus::Io => c"io error",
        FiamStatus::Parse => c"parse error",
        FiamStatus::Validation => c"validation error",
        FiamStatus::InvalidPair => c"invalid pair",
        FiamStatus::EdgeExists => c"edge exists",
        FiamStatus::EmptyGroup => c"empty group",
        FiamStatus::SingularMatrix => c"singular matrix",
        FiamStatus::GraphTooLarge => c"graph too large",
        FiamStatus::BudgetTooLarge => c"budget too large",
        FiamStatus::CombinatorialBlowup => c"combinatorial blowup",
        FiamStatus::NoConvergence => c"no convergence",
        FiamStatus::DegenerateInput => c"degenerate input",
        FiamStatus::NoNonEdge => c"no non-edge",
        FiamStatus::InsufficientCandidates => c"insufficient candidates",
        FiamStatus::InvalidParameter => c"invalid parameter",
        FiamStatus::OutOfRange => c"index out of range",
        FiamStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Message of the last failed call on this thread, or null.
/// Valid until the next `fiam_*` call on the same thread.
#[no_mangle]
pub extern "C" fn fiam_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a graph on nodes `0..n` from `m` edges `(us[i], vs[i])`.
///
/// # Safety
/// `us` and `vs` must point to `m` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fiam_graph_from_edges(
    n: usize,
    us: *const usize,
    vs: *const usize,
    m: usize,
    out: *mut *mut FiamGraph,
) -> FiamStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let us = slice_arg(us, m, "us")?;
        let vs = slice_arg(vs, m, "vs")?;
        let g = Graph::new(n, us.iter().copied().zip(vs.iter().copied()))?;
        put(out, FiamGraph(g));
        Ok(())
    })
}

/// Loads a whitespace separated edge list. Node ids are renumbered densely
/// in ascending order of the ids in the file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fiam_graph_load(
    path: *const c_char,
    out: *mut *mut FiamGraph,
) -> FiamStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = load_graph(str_arg(path, "path")?)?;
        put(out, FiamGraph(g));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fiam_graph_node_count(g: *const FiamGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n())
}

/// # Safety
/// `g` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fiam_graph_edge_count(g: *const FiamGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.m())
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fiam_graph_free(g: *mut FiamGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Builds a group split from one label per node.
///
/// # Safety
/// `labels` must point to `n` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fiam_groups_new(
    labels: *const FiamGroup,
    n: usize,
    out: *mut *mut FiamGroups,
) -> FiamStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let labels = slice_arg(labels, n, "labels")?
            .iter()
            .map(|l| match l {
                FiamGroup::S => Group::S,
                FiamGroup::T => Group::T,
                FiamGroup::O => Group::O,
            })
            .collect();
        put(out, FiamGroups(GroupAssignment::from_labels(labels)?));
        Ok(())
    })
}

/// # Safety
/// `ga` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fiam_groups_free(ga: *mut FiamGroups) {
    if !ga.is_null() {
        drop(Box::from_raw(ga));
    }
}

/// Exact metrics of `g` under split `ga` and fairness weight `lambda`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fiam_evaluate(
    g: *const FiamGraph,
    ga: *const FiamGroups,
    lambda: f64,
    out: *mut FiamMetrics,
) -> FiamStatus {
    guard(|| {
        let g = handle(g, "graph")?;
        let ga = handle(ga, "groups")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in [0, 1], got {lambda}"
            ))
            .into());
        }
        if ga.0.n() != g.0.n() {
            return Err(Error::Validation("group labels do not match the graph".into()).into());
        }
        let m = DensePinv::new(&g.0)?.metrics(&ga.0, &Objective::new(lambda));
        *out = FiamMetrics {
            r: m.r,
            i_s: m.i_s,
            i_t: m.i_t,
            i_o: nan_or(m.i_o),
            u: m.u,
            kirchhoff: m.kirchhoff,
            f: m.f,
            approximate: 0,
        };
        Ok(())
    })
}

/// Selects `k` new edges with `algo` (`exact`, `gradient`, `fast` or
/// `baseline:<kind>`).
///
/// # Safety
/// Handles must be live; `algo` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fiam_optimize(
    g: *const FiamGraph,
    ga: *const FiamGroups,
    algo: *const c_char,
    lambda: f64,
    k: usize,
    epsilon: f64,
    seed: u64,
    out: *mut *mut FiamSelection,
) -> FiamStatus {
    guard(|| {
        let g = handle(g, "graph")?;
        let ga = handle(ga, "groups")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let algo: Algo = str_arg(algo, "algo")?.parse()?;
        if ga.0.n() != g.0.n() {
            return Err(Error::Validation("group labels do not match the graph".into()).into());
        }
        let hp = Hyperparams::new(lambda, k)
            .with_epsilon(epsilon)
            .with_seed(seed);
        let (sel, _) = run_algo(&g.0, &ga.0, algo, &hp, SketchMode::Practical)?;
        put(out, FiamSelection(sel));
        Ok(())
    })
}

/// Number of selected edges.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fiam_selection_len(sel: *const FiamSelection) -> usize {
    sel.as_ref().map_or(0, |s| s.0.edges.len())
}

/// Endpoints of the `i`-th selected edge, `i < len`.
///
/// # Safety
/// `sel` must be live; `u` and `v` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fiam_selection_edge(
    sel: *const FiamSelection,
    i: usize,
    u: *mut usize,
    v: *mut usize,
) -> FiamStatus {
    guard(|| {
        let s = handle(sel, "selection")?;
        if u.is_null() || v.is_null() {
            return Err(null("u or v"));
        }
        let &(a, b) = s.0.edges.get(i).ok_or_else(|| {
            Fail(
                FiamStatus::OutOfRange,
                format!("edge {i} of {}", s.0.edges.len()),
            )
        })?;
        *u = a;
        *v = b;
        Ok(())
    })
}

/// Metrics after `i` additions: `0` is the input graph, `len` the final graph.
///
/// # Safety
/// `sel` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fiam_selection_metrics(
    sel: *const FiamSelection,
    i: usize,
    out: *mut FiamMetrics,
) -> FiamStatus {
    guard(|| {
        let s = handle(sel, "selection")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = if i == 0 {
            let m = &s.0.initial;
            FiamMetrics {
                r: m.r,
                i_s: m.i_s,
                i_t: m.i_t,
                i_o: nan_or(m.i_o),
                u: m.u,
                kirchhoff: m.kirchhoff,
                f: m.f,
                approximate: 0,
            }
        } else {
            let r = s.0.records.get(i - 1).ok_or_else(|| {
                Fail(
                    FiamStatus::OutOfRange,
                    format!("record {i} of {}", s.0.records.len()),
                )
            })?;
            FiamMetrics {
                r: r.r,
                i_s: r.i_s,
                i_t: r.i_t,
                i_o: nan_or(r.i_o),
                u: r.u,
                kirchhoff: f64::NAN,
                f: r.f,
                approximate: r.approximate as u8,
            }
        };
        Ok(())
    })
}

/// # Safety
/// `sel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fiam_selection_free(sel: *mut FiamSelection) {
    if !sel.is_null() {
        drop(Box::from_raw(sel));
    }
}

/// Homophilous preferential-attachment graph with its group split.
/// `m_attach = 0` keeps the default.
///
/// # Safety
/// `out_graph` and `out_groups` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fiam_generate_bah(
    n: usize,
    f_a: f64,
    h: f64,
    m_attach: usize,
    seed: u64,
    out_graph: *mut *mut FiamGraph,
    out_groups: *mut *mut FiamGroups,
) -> FiamStatus {
    guard(|| {
        if out_graph.is_null() || out_groups.is_null() {
            return Err(null("out_graph or out_groups"));
        }
        let mut p = BAhParams::new(n, f_a, h, seed);
        if m_attach > 0 {
            p = p.with_m_attach(m_attach);
        }
        let (g, ga) = generate_bah(&p)?;
        put(out_graph, FiamGraph(g));
        put(out_groups, FiamGroups(ga));
        Ok(())
    })
}
