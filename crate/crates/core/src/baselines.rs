//! Heuristic comparison strategies and the centralities they rank by.
//!
//! Heuristic kinds rank cross-group non-edges once on the input graph and take
//! the top `k`; ties go to the lexicographically smaller pair.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::DensePinv;
use crate::graph::{Graph, GroupAssignment, Hyperparams, Node};
use crate::greedy::{self, EdgeSelection, Target};
use crate::rng::{self, tag};
use crate::sketch::solver::{project_block, Solver, SolverConfig, BLOCK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Random,
    DegreeProduct,
    DegreeSum,
    BetweennessProduct,
    BetweennessSum,
    Fiedler,
    EffectiveResistance,
    OptimumR,
    OptimumU,
    KirchhoffGreedy,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 10] = [
        BaselineKind::Random,
        BaselineKind::DegreeProduct,
        BaselineKind::DegreeSum,
        BaselineKind::BetweennessProduct,
        BaselineKind::BetweennessSum,
        BaselineKind::Fiedler,
        BaselineKind::EffectiveResistance,
        BaselineKind::OptimumR,
        BaselineKind::OptimumU,
        BaselineKind::KirchhoffGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Random => "random",
            BaselineKind::DegreeProduct => "dp",
            BaselineKind::DegreeSum => "ds",
            BaselineKind::BetweennessProduct => "bp",
            BaselineKind::BetweennessSum => "bs",
            BaselineKind::Fiedler => "fiedler",
            BaselineKind::EffectiveResistance => "er",
            BaselineKind::OptimumR => "optimum-r",
            BaselineKind::OptimumU => "optimum-u",
            BaselineKind::KirchhoffGreedy => "kirchhoff",
        }
    }

    /// Whether candidates are restricted to pairs across `S` and `T`.
    pub fn cross_group(self) -> bool {
        !matches!(
            self,
            BaselineKind::OptimumR | BaselineKind::OptimumU | BaselineKind::KirchhoffGreedy
        )
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| {
                let names: Vec<&str> = BaselineKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown baseline '{s}', expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Non-edges `(u, v)`, `u < v`, with one endpoint in `S` and the other in `T`.
pub fn cross_group_non_edges(g: &Graph, ga: &GroupAssignment) -> Vec<(Node, Node)> {
    g.non_edges().filter(|&(u, v)| ga.is_cross(u, v)).collect()
}

/// Top `k` of `cands` by descending `score`, ties to the smaller pair.
fn top_k<F>(cands: &[(Node, Node)], k: usize, score: F) -> Vec<(Node, Node)>
where
    F: Fn(Node, Node) -> f64 + Sync,
{
    let mut scored: Vec<(f64, (Node, Node))> = cands
        .par_iter()
        .map(|&(u, v)| (score(u, v), (u, v)))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, e)| e).collect()
}

/// Runs baseline `kind` with budget `hp.k`. Records carry exact metrics under
/// `hp`'s objective.
pub fn select_baseline(
    g: &Graph,
    ga: &GroupAssignment,
    kind: BaselineKind,
    hp: &Hyperparams,
) -> Result<EdgeSelection> {
    hp.validate(g)?;
    ga.check_against(g)?;
    let k = hp.k;
    let edges = match kind {
        BaselineKind::OptimumR => return greedy::brute_force_optimum(g, ga, hp, Target::R),
        BaselineKind::OptimumU => return greedy::brute_force_optimum(g, ga, hp, Target::U),
        BaselineKind::KirchhoffGreedy => {
            let plain = Hyperparams { lambda: 0.0, ..*hp };
            greedy::exact_greedy(g, ga, &plain)?.edges
        }
        _ => {
            let cands = cross_group_non_edges(g, ga);
            if cands.len() < k {
                return Err(Error::InsufficientCandidates {
                    needed: k,
                    available: cands.len(),
                });
            }
            rank(g, kind, &cands, k, hp.seed)?
        }
    };
    greedy::replay(g, ga, &hp.objective(), &edges)
}

fn rank(
    g: &Graph,
    kind: BaselineKind,
    cands: &[(Node, Node)],
    k: usize,
    seed: u64,
) -> Result<Vec<(Node, Node)>> {
    let deg = |v: Node| g.degree(v) as f64;
    Ok(match kind {
        BaselineKind::Random => {
            let mut r = rng::stream(seed, &[tag::BASELINE_RANDOM]);
            rand::seq::index::sample(&mut r, cands.len(), k)
                .into_iter()
                .map(|i| cands[i])
                .collect()
        }
        BaselineKind::DegreeProduct => top_k(cands, k, |u, v| deg(u) * deg(v)),
        BaselineKind::DegreeSum => top_k(cands, k, |u, v| deg(u) + deg(v)),
        BaselineKind::BetweennessProduct => {
            let b = betweenness(g)?;
            top_k(cands, k, |u, v| b[u] * b[v])
        }
        BaselineKind::BetweennessSum => {
            let b = betweenness(g)?;
            top_k(cands, k, |u, v| b[u] + b[v])
        }
        BaselineKind::Fiedler => {
            let f = fiedler_vector(g)?;
            top_k(cands, k, |u, v| (f[u] - f[v]).abs())
        }
        BaselineKind::EffectiveResistance => {
            let p = DensePinv::new(g)?;
            let m = p.matrix();
            top_k(cands, k, |u, v| m[(u, u)] + m[(v, v)] - 2.0 * m[(u, v)])
        }
        BaselineKind::OptimumR | BaselineKind::OptimumU | BaselineKind::KirchhoffGreedy => {
            unreachable!("handled by select_baseline")
        }
    })
}

const BETWEENNESS_CHUNK: usize = 64;

/// Shortest-path betweenness of every node, counting each unordered pair once.
pub fn betweenness(g: &Graph) -> Result<Vec<f64>> {
    let n = g.n();
    if !g.is_connected() {
        return Err(Error::DegenerateInput(
            "betweenness needs a connected graph".into(),
        ));
    }
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(BETWEENNESS_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; n];
            let mut ws = Brandes::new(n);
            for s in c * BETWEENNESS_CHUNK..((c + 1) * BETWEENNESS_CHUNK).min(n) {
                ws.accumulate(g, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in chunks {
        for (t, x) in total.iter_mut().zip(part) {
            *t += x;
        }
    }
    for t in &mut total {
        *t *= 0.5;
    }
    Ok(total)
}

struct Brandes {
    dist: Vec<usize>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<Node>,
}

impl Brandes {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![usize::MAX; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
        }
    }

    fn accumulate(&mut self, g: &Graph, s: Node, acc: &mut [f64]) {
        self.dist.fill(usize::MAX);
        self.sigma.fill(0.0);
        self.delta.fill(0.0);
        self.order.clear();
        self.dist[s] = 0;
        self.sigma[s] = 1.0;
        self.order.push(s);
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            for &v in g.neighbors(u) {
                if self.dist[v] == usize::MAX {
                    self.dist[v] = self.dist[u] + 1;
                    self.order.push(v);
                }
                if self.dist[v] == self.dist[u] + 1 {
                    self.sigma[v] += self.sigma[u];
                }
            }
        }
        for &w in self.order.iter().rev() {
            for &v in g.neighbors(w) {
                if self.dist[v] + 1 == self.dist[w] {
                    self.delta[v] += self.sigma[v] / self.sigma[w] * (1.0 + self.delta[w]);
                }
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

const FIEDLER_DELTA: f64 = 1e-12;
const FIEDLER_TOL: f64 = 1e-10;
const FIEDLER_MAX_ITERS: usize = 2_000;

/// Unit eigenvector for the second-smallest Laplacian eigenvalue, with its
/// first entry of magnitude above `1e-12` made positive.
///
/// Block inverse iteration on `1^perp` through the Laplacian solver, with a
/// Rayleigh-Ritz step each round. Stops once `|L v - theta v|` falls below
/// `1e-10` times an upper bound on the spectrum.
pub fn fiedler_vector(g: &Graph) -> Result<Vec<f64>> {
    let n = g.n();
    if n < 2 {
        return Err(Error::DegenerateInput(
            "Fiedler vector needs at least 2 nodes".into(),
        ));
    }
    let solver = Solver::new(g, SolverConfig::with_delta(FIEDLER_DELTA))?;
    let lap = solver.laplacian();
    let tol = FIEDLER_TOL * lap.lambda_max_upper();
    let mut p = BLOCK.min(n - 1);

    let mut x = vec![0.0; n * p];
    crate::sketch::jl::fill_signs(0, &[tag::FIEDLER], 1.0, &mut x);
    let mut residual = f64::INFINITY;
    for it in 0..FIEDLER_MAX_ITERS {
        if it > 0 {
            x = solver.solve_block(&x, p)?;
        }
        project_block(&mut x, n, p);
        let q = orthonormal_columns(&x, n, p);
        let cols = q.ncols();
        if cols == 0 {
            return Err(Error::NoConvergence {
                iterations: it,
                residual,
            });
        }
        let node_major = to_node_major(&q);
        let mut lq = vec![0.0; n * cols];
        lap.apply_block(&node_major, &mut lq, cols);
        let lq = from_node_major(&lq, n, cols);
        let h = q.transpose() * &lq;
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut idx: Vec<usize> = (0..cols).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let basis = DMatrix::from_fn(cols, cols, |r, c| eig.eigenvectors[(r, idx[c])]);
        let ritz = &q * &basis;
        let lritz = &lq * &basis;
        let theta = eig.eigenvalues[idx[0]];
        let v = ritz.column(0);
        residual = (lritz.column(0) - v * theta).norm();
        if residual <= tol {
            let mut out: Vec<f64> = v.iter().copied().collect();
            let norm = out.iter().map(|a| a * a).sum::<f64>().sqrt();
            let sign = match out.iter().find(|a| a.abs() > 1e-12) {
                Some(&a) if a < 0.0 => -1.0,
                _ => 1.0,
            };
            for a in &mut out {
                *a *= sign / norm;
            }
            log::debug!("fiedler: {it} iterations, theta {theta}, residual {residual:e}");
            return Ok(out);
        }
        // A rank-deficient block keeps iterating at its reduced width.
        p = cols;
        x = to_node_major(&ritz);
    }
    Err(Error::NoConvergence {
        iterations: FIEDLER_MAX_ITERS,
        residual,
    })
}

/// Modified Gram-Schmidt on the columns of a node-major block; drops columns
/// that are numerically dependent.
fn orthonormal_columns(x: &[f64], n: usize, p: usize) -> DMatrix<f64> {
    let m = from_node_major(x, n, p);
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(p);
    for c in 0..p {
        let mut v = m.column(c).into_owned();
        let orig = v.norm();
        for _ in 0..2 {
            for q in &cols {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        let nv = v.norm();
        if orig > 0.0 && nv > 1e-10 * orig {
            cols.push(v / nv);
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn from_node_major(x: &[f64], n: usize, w: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, w, x)
}

fn to_node_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (n, w) = m.shape();
    let mut out = Vec::with_capacity(n * w);
    for r in 0..n {
        for c in 0..w {
            out.push(m[(r, c)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Group;

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for k in BaselineKind::ALL {
            assert_eq!(k.to_string().parse::<BaselineKind>().unwrap(), k);
        }
        assert!("closeness".parse::<BaselineKind>().is_err());
    }

    #[test]
    fn betweenness_small() {
        assert_eq!(betweenness(&path(3)).unwrap(), vec![0.0, 1.0, 0.0]);
        let star = Graph::new(5, (1..5).map(|i| (0, i))).unwrap();
        assert_eq!(betweenness(&star).unwrap(), vec![6.0, 0.0, 0.0, 0.0, 0.0]);
        let c5 = Graph::new(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
        let b = betweenness(&c5).unwrap();
        assert!(b.iter().all(|x| (x - b[0]).abs() < 1e-12));
        assert!((b[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fiedler_paths() {
        let v = fiedler_vector(&path(2)).unwrap();
        let h = 0.5f64.sqrt();
        assert!((v[0] - h).abs() < 1e-8 && (v[1] + h).abs() < 1e-8);
        let v = fiedler_vector(&path(3)).unwrap();
        assert!((v[0] - h).abs() < 1e-8 && v[1].abs() < 1e-8 && (v[2] + h).abs() < 1e-8);
    }

    #[test]
    fn fiedler_complete_graph_residual() {
        let n = 6;
        let mut e = vec![];
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        let g = Graph::new(n, e).unwrap();
        let v = fiedler_vector(&g).unwrap();
        let lv = g.laplacian_dense() * nalgebra::DVector::from_vec(v.clone());
        let res: f64 = lv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - n as f64 * b).powi(2))
            .sum::<f64>();
        assert!(res.sqrt() <= 1e-6);
    }

    #[test]
    fn star_has_no_cross_non_edge() {
        let star = Graph::new(5, (1..5).map(|i| (0, i))).unwrap();
        let ga = GroupAssignment::new(5, &[0], &[1, 2, 3, 4]).unwrap();
        let hp = Hyperparams::new(0.5, 1);
        assert!(matches!(
            select_baseline(&star, &ga, BaselineKind::DegreeProduct, &hp),
            Err(Error::InsufficientCandidates { .. })
        ));
    }

    #[test]
    fn er_on_path_picks_endpoints() {
        let g = path(4);
        let ga = GroupAssignment::new(4, &[0], &[3]).unwrap();
        let sel = select_baseline(
            &g,
            &ga,
            BaselineKind::EffectiveResistance,
            &Hyperparams::new(0.5, 1),
        )
        .unwrap();
        assert_eq!(sel.edges, vec![(0, 3)]);
    }

    #[test]
    fn random_is_seeded() {
        let g = path(8);
        let labels = (0..8)
            .map(|i| if i % 2 == 0 { Group::S } else { Group::T })
            .collect();
        let ga = GroupAssignment::from_labels(labels).unwrap();
        let hp = Hyperparams::new(0.5, 3).with_seed(9);
        let a = select_baseline(&g, &ga, BaselineKind::Random, &hp).unwrap();
        let b = select_baseline(&g, &ga, BaselineKind::Random, &hp).unwrap();
        assert_eq!(a.edges, b.edges);
        assert!(a
            .edges
            .iter()
            .all(|&(u, v)| ga.is_cross(u, v) && !g.has_edge(u, v)));
    }
}
