//! Sketch-and-hull edge selection.
//!
//! Each round embeds the nodes so that squared distances approximate the
//! gradient surrogate, shrinks the point set to a farthest-point coreset and
//! scans coreset pairs for the most distant non-edge.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::exact::{DensePinv, ExactScorer, Metrics, Objective};
use crate::graph::{Graph, GroupAssignment, Hyperparams, Node};
use crate::greedy::{better, EdgeSelection, RunRecord};
use crate::hull::{approx_ch_with, DistanceMode, Distances, PointSet};
use crate::rng::{self, tag};
use crate::sketch::{app_diag_with, build_sketch_with, delta_tilde, SketchConfig, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimings {
    pub sketch: f64,
    pub hull: f64,
    pub scan: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.sketch + self.hull + self.scan
    }
}

/// Where the returned pair was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanScope {
    HullPairs,
    HullToAll,
    AllPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarthestResult {
    pub pair: (Node, Node),
    pub delta_tilde_value: f64,
    pub hull_size_c: usize,
    pub scope: ScanScope,
    pub timings: PhaseTimings,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FastConfig {
    pub sketch: SketchConfig,
    pub distances: DistanceMode,
}

pub fn farthest(
    g: &Graph,
    ga: &GroupAssignment,
    lambda: f64,
    eps: f64,
    seed: u64,
) -> Result<FarthestResult> {
    farthest_with(g, ga, lambda, eps, seed, &FastConfig::default())
}

pub fn farthest_with(
    g: &Graph,
    ga: &GroupAssignment,
    lambda: f64,
    eps: f64,
    seed: u64,
    cfg: &FastConfig,
) -> Result<FarthestResult> {
    if g.non_edge_count() == 0 {
        return Err(Error::NoNonEdge);
    }
    let t0 = Instant::now();
    let sketch = build_sketch_with(g, ga, lambda, eps, seed, &cfg.sketch)?;
    let points = sketch.coordinates();
    let t1 = Instant::now();
    let hull = approx_ch_with(&points, sketch.params().hull_eps, cfg.distances)?;
    let t2 = Instant::now();

    let mut members = hull.indices.clone();
    members.sort_unstable();
    let dist = Distances::new(&points, cfg.distances);
    let all: Vec<Node> = (0..g.n()).collect();
    let mut found = None;
    for (scope, outer, inner) in [
        (ScanScope::HullPairs, &members, &members),
        (ScanScope::HullToAll, &members, &all),
        (ScanScope::AllPairs, &all, &all),
    ] {
        if let Some(best) = scan(g, &points, &dist, outer, inner) {
            found = Some((scope, best));
            break;
        }
    }
    let (scope, (_, pair)) = found.ok_or(Error::NoNonEdge)?;
    if scope != ScanScope::HullPairs {
        log::info!("no non-edge among coreset pairs; fell back to {scope:?}");
    }
    let t3 = Instant::now();
    Ok(FarthestResult {
        pair,
        delta_tilde_value: delta_tilde(&sketch, pair.0, pair.1),
        hull_size_c: hull.len(),
        scope,
        timings: PhaseTimings {
            sketch: (t1 - t0).as_secs_f64(),
            hull: (t2 - t1).as_secs_f64(),
            scan: (t3 - t2).as_secs_f64(),
        },
    })
}

/// Best non-edge `(a, b)` with `a` in `outer`, `b` in `inner`, by squared
/// coordinate distance. Pairs are normalized so that `u < v`.
fn scan(
    g: &Graph,
    _points: &PointSet,
    dist: &Distances<'_>,
    outer: &[Node],
    inner: &[Node],
) -> Option<(f64, (Node, Node))> {
    outer
        .par_iter()
        .map(|&a| {
            let mut best: Option<(f64, (Node, Node))> = None;
            for &b in inner {
                if a == b || g.has_edge(a, b) {
                    continue;
                }
                let pair = (a.min(b), a.max(b));
                let d = dist.get(a, b);
                if best.is_none_or(|x| better((d, pair), x)) {
                    best = Some((d, pair));
                }
            }
            best
        })
        .reduce(
            || None,
            |x, y| match (x, y) {
                (Some(a), Some(b)) => Some(if better(b, a) { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            },
        )
}

/// Per-round details of a fast run.
#[derive(Debug, Clone, PartialEq)]
pub struct FastRound {
    pub hull_size_c: usize,
    pub delta_tilde_value: f64,
    pub scope: ScanScope,
    pub timings: PhaseTimings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FastSelection {
    pub selection: EdgeSelection,
    pub rounds: Vec<FastRound>,
}

/// `k` rounds of [`farthest`], each on the graph grown by the previous picks.
pub fn fast_greedy(g: &Graph, ga: &GroupAssignment, hp: &Hyperparams) -> Result<EdgeSelection> {
    Ok(fast_greedy_with(g, ga, hp, &FastConfig::default(), &Tolerances::default())?.selection)
}

pub fn fast_greedy_with(
    g: &Graph,
    ga: &GroupAssignment,
    hp: &Hyperparams,
    cfg: &FastConfig,
    tol: &Tolerances,
) -> Result<FastSelection> {
    hp.validate(g)?;
    ga.check_against(g)?;
    let obj = hp.objective();
    let cfg = FastConfig {
        sketch: SketchConfig {
            multi_group: hp.multi_group,
            ..cfg.sketch
        },
        ..*cfg
    };
    let mut tracker = if g.n() <= tol.dense_cap {
        let p = DensePinv::with_tolerances(g, tol)?;
        Tracker::Exact(Box::new(ExactScorer::new(&p, ga, &obj)?))
    } else {
        Tracker::Sketched
    };
    let initial = match &tracker {
        Tracker::Exact(s) => s.metrics(),
        Tracker::Sketched => sketched_metrics(g, ga, &obj, hp, &cfg, u64::MAX)?,
    };
    let mut graph = g.clone();
    let mut edges = Vec::with_capacity(hp.k);
    let mut records = Vec::with_capacity(hp.k);
    let mut rounds = Vec::with_capacity(hp.k);
    for it in 1..=hp.k {
        let t0 = Instant::now();
        let seed = rng::derive_seed(hp.seed, &[tag::FAST_ROUND, it as u64]);
        let res = farthest_with(&graph, ga, hp.lambda, hp.epsilon, seed, &cfg)?;
        let (u, v) = res.pair;
        graph = graph.with_edge(u, v)?;
        edges.push((u, v));
        let elapsed = t0.elapsed().as_secs_f64();
        let record = match &mut tracker {
            Tracker::Exact(s) => {
                s.add_edge(u, v);
                RunRecord::from_metrics(it, (u, v), &s.metrics(), elapsed)
            }
            Tracker::Sketched => {
                let m = sketched_metrics(&graph, ga, &obj, hp, &cfg, it as u64)?;
                RunRecord {
                    approximate: true,
                    ..RunRecord::from_metrics(it, (u, v), &m, elapsed)
                }
            }
        };
        log::debug!(
            "fast round {it}: ({u}, {v}) c={} F={}",
            res.hull_size_c,
            record.f
        );
        records.push(record);
        rounds.push(FastRound {
            hull_size_c: res.hull_size_c,
            delta_tilde_value: res.delta_tilde_value,
            scope: res.scope,
            timings: res.timings,
        });
    }
    Ok(FastSelection {
        selection: EdgeSelection {
            edges,
            records,
            initial,
        },
        rounds,
    })
}

enum Tracker {
    Exact(Box<ExactScorer>),
    Sketched,
}

/// Metrics from a diagonal estimate, for graphs above the dense cap.
fn sketched_metrics(
    g: &Graph,
    ga: &GroupAssignment,
    obj: &Objective,
    hp: &Hyperparams,
    cfg: &FastConfig,
    round: u64,
) -> Result<Metrics> {
    let solver = Solver::new(g, cfg.sketch.solver)?;
    let seed = rng::derive_seed(hp.seed, &[tag::APP_DIAG, round]);
    let q = crate::sketch::jl_rows(g.n(), hp.epsilon);
    let r = app_diag_with(g, &solver, q, seed)?;
    Ok(metrics_from_diag(&r, ga, obj))
}

/// All metrics computed from an estimate of `diag(L^+)`.
pub fn metrics_from_diag(r: &[f64], ga: &GroupAssignment, obj: &Objective) -> Metrics {
    let n = r.len() as f64;
    let tr: f64 = r.iter().sum();
    let access = |m: &[Node]| n / m.len() as f64 * m.iter().map(|&v| r[v]).sum::<f64>() + tr;
    let i_s = access(ga.s());
    let i_t = access(ga.t());
    let i_o = (!ga.o().is_empty()).then(|| access(ga.o()));
    let mut acc = vec![i_s, i_t];
    if obj.multi_group {
        acc.extend(i_o);
    }
    Metrics {
        r: tr,
        i_s,
        i_t,
        i_o,
        u: i_t - i_s,
        kirchhoff: n * tr,
        f: obj.value(tr, &acc),
    }
}
