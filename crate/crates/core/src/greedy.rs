//! Greedy edge selection and the exhaustive optimum.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::exact::{DensePinv, ExactScorer, Metrics, Objective};
use crate::graph::{Graph, Group, GroupAssignment, Hyperparams, Node};
use crate::rng;

/// Metrics after one selection step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub iteration: usize,
    pub edge: (Node, Node),
    pub r: f64,
    pub i_s: f64,
    pub i_t: f64,
    /// Present when `O` is non-empty.
    pub i_o: Option<f64>,
    pub u: f64,
    pub f: f64,
    /// Seconds spent in this iteration.
    pub elapsed: f64,
    /// Metrics come from sketched estimates rather than a dense `L^+`.
    pub approximate: bool,
}

impl RunRecord {
    pub fn from_metrics(iteration: usize, edge: (Node, Node), m: &Metrics, elapsed: f64) -> Self {
        Self {
            iteration,
            edge,
            r: m.r,
            i_s: m.i_s,
            i_t: m.i_t,
            i_o: m.i_o,
            u: m.u,
            f: m.f,
            elapsed,
            approximate: false,
        }
    }

    /// Recomputes `F` from the logged fields.
    pub fn recompute_f(&self, obj: &Objective) -> f64 {
        let mut acc = vec![self.i_s, self.i_t];
        if obj.multi_group {
            acc.extend(self.i_o);
        }
        obj.value(self.r, &acc)
    }
}

/// Selected edges in order plus one record per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSelection {
    pub edges: Vec<(Node, Node)>,
    pub records: Vec<RunRecord>,
    /// Metrics of the input graph.
    pub initial: Metrics,
}

impl EdgeSelection {
    pub fn final_metrics(&self) -> Option<&RunRecord> {
        self.records.last()
    }
}

/// Which score a greedy iteration maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ranking {
    Exact,
    Gradient,
}

/// `(score, pair)` with larger score first, then lexicographically smaller pair.
#[inline]
pub(crate) fn better(a: (f64, (Node, Node)), b: (f64, (Node, Node))) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn pick(
    a: Option<(f64, (Node, Node))>,
    b: Option<(f64, (Node, Node))>,
) -> Option<(f64, (Node, Node))> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if better(y, x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Deterministic parallel argmax of `score` over the non-edges of `g`.
pub(crate) fn argmax_non_edge<F>(g: &Graph, score: F) -> Option<(f64, (Node, Node))>
where
    F: Fn(Node, Node) -> f64 + Sync,
{
    let n = g.n();
    (0..n)
        .into_par_iter()
        .map(|u| {
            let nbrs = g.neighbors(u);
            let mut best: Option<(f64, (Node, Node))> = None;
            let mut k = nbrs.partition_point(|&x| x <= u);
            for v in u + 1..n {
                if k < nbrs.len() && nbrs[k] == v {
                    k += 1;
                    continue;
                }
                let s = score(u, v);
                if best.is_none_or(|b| better((s, (u, v)), b)) {
                    best = Some((s, (u, v)));
                }
            }
            best
        })
        .reduce(|| None, pick)
}

fn greedy(
    g: &Graph,
    ga: &GroupAssignment,
    hp: &Hyperparams,
    ranking: Ranking,
) -> Result<EdgeSelection> {
    hp.validate(g)?;
    ga.check_against(g)?;
    let obj = hp.objective();
    let pinv = DensePinv::new(g)?;
    let mut scorer = ExactScorer::new(&pinv, ga, &obj)?;
    let initial = scorer.metrics();
    let mut graph = g.clone();
    let mut edges = Vec::with_capacity(hp.k);
    let mut records = Vec::with_capacity(hp.k);
    for it in 1..=hp.k {
        let t0 = Instant::now();
        let best = match ranking {
            Ranking::Exact => argmax_non_edge(&graph, |u, v| scorer.delta(u, v)),
            Ranking::Gradient => {
                let coefs = scorer.coefficients();
                argmax_non_edge(&graph, |u, v| scorer.delta_bar_with(&coefs, u, v))
            }
        };
        let (_, (u, v)) = best.ok_or(Error::NoNonEdge)?;
        scorer.add_edge(u, v);
        graph = graph.with_edge(u, v)?;
        edges.push((u, v));
        let m = scorer.metrics();
        records.push(RunRecord::from_metrics(
            it,
            (u, v),
            &m,
            t0.elapsed().as_secs_f64(),
        ));
        log::debug!("iteration {it}: ({u}, {v}) F={}", m.f);
    }
    Ok(EdgeSelection {
        edges,
        records,
        initial,
    })
}

/// Adds `k` edges, each maximizing the exact marginal decrease of `F`.
pub fn exact_greedy(g: &Graph, ga: &GroupAssignment, hp: &Hyperparams) -> Result<EdgeSelection> {
    greedy(g, ga, hp, Ranking::Exact)
}

/// Same loop as [`exact_greedy`] but ranked by the gradient surrogate.
/// Records still carry exact metrics.
pub fn gradient_greedy(g: &Graph, ga: &GroupAssignment, hp: &Hyperparams) -> Result<EdgeSelection> {
    greedy(g, ga, hp, Ranking::Gradient)
}

/// Quantity minimized by [`brute_force_optimum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    F,
    R,
    /// Minimizes `|U|`.
    U,
}

/// Records for adding `edges` in order, with exact metrics.
pub fn replay(
    g: &Graph,
    ga: &GroupAssignment,
    obj: &Objective,
    edges: &[(Node, Node)],
) -> Result<EdgeSelection> {
    let pinv = DensePinv::new(g)?;
    let mut scorer = ExactScorer::new(&pinv, ga, obj)?;
    let initial = scorer.metrics();
    let mut graph = g.clone();
    let mut records = Vec::with_capacity(edges.len());
    for (i, &(u, v)) in edges.iter().enumerate() {
        let t0 = Instant::now();
        graph = graph.with_edge(u, v)?;
        scorer.add_edge(u, v);
        records.push(RunRecord::from_metrics(
            i + 1,
            (u, v),
            &scorer.metrics(),
            t0.elapsed().as_secs_f64(),
        ));
    }
    Ok(EdgeSelection {
        edges: edges.to_vec(),
        records,
        initial,
    })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Rows larger than this many entries in total are computed per prefix
/// instead of being tabulated up front.
const PAIR_TABLE_LIMIT: usize = 40_000_000;

/// Exhaustive minimizer of `target` over all `k`-subsets of non-edges.
///
/// Every subset `H` is scored through the Woodbury identity: with `B_H` the
/// incidence columns and `K = I + B_H^T P B_H`, the diagonal mass of group `X`
/// drops by `tr(K^{-1} B_H^T M_X B_H)`. A depth-first walk in lexicographic
/// order grows `K^{-1}` one bordered row at a time; the last level scores all
/// remaining candidates in one vectorized sweep.
pub fn brute_force_optimum(
    g: &Graph,
    ga: &GroupAssignment,
    hp: &Hyperparams,
    target: Target,
) -> Result<EdgeSelection> {
    brute_force_optimum_with(g, ga, hp, target, &Tolerances::default())
}

pub fn brute_force_optimum_with(
    g: &Graph,
    ga: &GroupAssignment,
    hp: &Hyperparams,
    target: Target,
    tol: &Tolerances,
) -> Result<EdgeSelection> {
    hp.validate(g)?;
    ga.check_against(g)?;
    let k = hp.k;
    let subsets = binomial(g.non_edge_count(), k);
    if subsets > tol.brute_force_cap {
        return Err(Error::CombinatorialBlowup {
            subsets,
            cap: tol.brute_force_cap,
        });
    }
    let obj = hp.objective();
    let pinv = DensePinv::with_tolerances(g, tol)?;
    let n = g.n() as f64;

    let parts: Vec<(Group, Vec<Node>, DMatrix<f64>)> = [Group::S, Group::T, Group::O]
        .into_iter()
        .filter(|&x| !ga.members(x).is_empty())
        .map(|x| {
            let members = ga.members(x).to_vec();
            let px = pinv.matrix().select_columns(&members);
            let m = &px * px.transpose();
            (x, members, m)
        })
        .collect();
    let obj_groups = obj.groups(ga);
    let score = Score {
        target,
        lambda: obj.lambda,
        trace: pinv.trace(),
        parts: parts
            .iter()
            .map(|(x, members, _)| PartScore {
                group: *x,
                in_objective: obj_groups.contains(x),
                diag: pinv.diag_sum(members),
                scale: n / members.len() as f64,
            })
            .collect(),
    };

    let cands: Vec<(Node, Node)> = g.non_edges().collect();
    let mc = cands.len();
    let mut mats = vec![pinv.matrix()];
    mats.extend(parts.iter().map(|(_, _, m)| m));
    let nt = mats.len();
    let mut src = PairSource {
        cands: &cands,
        mats,
        table: None,
    };
    if mc.saturating_mul(mc).saturating_mul(nt) <= PAIR_TABLE_LIMIT {
        let table = (0..nt)
            .map(|t| {
                let mut v = vec![0.0; mc * mc];
                for i in 0..mc {
                    for j in i..mc {
                        let x = src.compute(t, i, j);
                        v[i * mc + j] = x;
                        v[j * mc + i] = x;
                    }
                }
                v
            })
            .collect();
        src.table = Some(table);
    }

    let t0 = Instant::now();
    let diag: Vec<Vec<f64>> = (0..nt)
        .map(|t| (0..mc).map(|i| src.compute(t, i, i)).collect())
        .collect();
    // Each worker owns the sets starting at one candidate; the merge keeps the
    // lowest value and, among equal values, the lexicographically first set.
    let best = (0..=mc - k)
        .into_par_iter()
        .map_init(
            || Dfs::new(k, &src, &score, &diag),
            |dfs, i0| {
                dfs.best = None;
                dfs.run_from(i0);
                dfs.best.take()
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) {
                    y
                } else {
                    x
                }),
                (x, None) => x,
                (None, y) => y,
            },
        );
    let (_, best) = best.ok_or(Error::NoNonEdge)?;
    let edges: Vec<(Node, Node)> = best.iter().map(|&i| cands[i]).collect();
    let elapsed = t0.elapsed().as_secs_f64();
    let mut sel = replay(g, ga, &obj, &edges)?;
    if let Some(first) = sel.records.first_mut() {
        first.elapsed += elapsed;
    }
    Ok(sel)
}

/// Products `b_i^T M b_j` between candidate incidence vectors, for
/// `M` in `[P, M_X...]`.
struct PairSource<'a> {
    cands: &'a [(Node, Node)],
    mats: Vec<&'a DMatrix<f64>>,
    table: Option<Vec<Vec<f64>>>,
}

impl PairSource<'_> {
    fn compute(&self, t: usize, i: usize, j: usize) -> f64 {
        let m = self.mats[t];
        let (a, b) = self.cands[i];
        let (c, d) = self.cands[j];
        m[(a, c)] - m[(a, d)] - m[(b, c)] + m[(b, d)]
    }

    fn fill_row(&self, t: usize, i: usize, out: &mut [f64]) {
        let mc = self.cands.len();
        match &self.table {
            Some(tab) => out.copy_from_slice(&tab[t][i * mc..(i + 1) * mc]),
            None => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = self.compute(t, i, j);
                }
            }
        }
    }
}

struct PartScore {
    group: Group,
    in_objective: bool,
    diag: f64,
    scale: f64,
}

struct Score {
    target: Target,
    lambda: f64,
    trace: f64,
    parts: Vec<PartScore>,
}

impl Score {
    #[inline(always)]
    fn value(&self, drops: &[f64]) -> f64 {
        let tr = self.trace - drops.iter().sum::<f64>();
        match self.target {
            Target::R => tr,
            Target::F => {
                let mut v = (1.0 - self.lambda) * tr;
                for (p, &d) in self.parts.iter().zip(drops) {
                    if p.in_objective {
                        let a = p.scale * (p.diag - d) + tr;
                        v += self.lambda * a * a;
                    }
                }
                v
            }
            Target::U => {
                let mut u = 0.0;
                for (p, &d) in self.parts.iter().zip(drops) {
                    match p.group {
                        Group::T => u += p.scale * (p.diag - d),
                        Group::S => u -= p.scale * (p.diag - d),
                        Group::O => {}
                    }
                }
                u.abs()
            }
        }
    }

    /// `out[i]` = target value for the drops `drops[x][i]`.
    fn evaluate(&self, drops: &[Vec<f64>], len: usize, tr: &mut [f64], out: &mut [f64]) {
        let tr = &mut tr[..len];
        let out = &mut out[..len];
        tr.fill(self.trace);
        for d in drops {
            for (t, &x) in tr.iter_mut().zip(&d[..len]) {
                *t -= x;
            }
        }
        match self.target {
            Target::R => out.copy_from_slice(tr),
            Target::F => {
                let l = self.lambda;
                for (o, &t) in out.iter_mut().zip(tr.iter()) {
                    *o = (1.0 - l) * t;
                }
                for (p, d) in self.parts.iter().zip(drops) {
                    if !p.in_objective {
                        continue;
                    }
                    for ((o, &t), &x) in out.iter_mut().zip(tr.iter()).zip(&d[..len]) {
                        let a = p.scale * (p.diag - x) + t;
                        *o += l * a * a;
                    }
                }
            }
            Target::U => {
                out.fill(0.0);
                for (p, d) in self.parts.iter().zip(drops) {
                    let sign = match p.group {
                        Group::T => 1.0,
                        Group::S => -1.0,
                        Group::O => continue,
                    };
                    for (o, &x) in out.iter_mut().zip(&d[..len]) {
                        *o += sign * p.scale * (p.diag - x);
                    }
                }
                // The trace terms of I_T and I_S cancel.
                for o in out.iter_mut() {
                    *o = o.abs();
                }
            }
        }
    }
}

struct Dfs<'a> {
    k: usize,
    mc: usize,
    nt: usize,
    src: &'a PairSource<'a>,
    score: &'a Score,
    /// `diag[t][i] = b_i^T M_t b_i`.
    diag: &'a [Vec<f64>],
    /// Computed rows when `src` has no table: `rowbuf[r][t][i]`.
    rowbuf: Vec<Vec<Vec<f64>>>,
    chosen: Vec<usize>,
    /// `K^{-1}` for each prefix length, row-major.
    kinv: Vec<Vec<f64>>,
    /// Per-group drop for each prefix length.
    acc: Vec<Vec<f64>>,
    best: Option<(f64, Vec<usize>)>,
    wbuf: Vec<Vec<f64>>,
    sbuf: Vec<f64>,
    dbuf: Vec<Vec<f64>>,
    trbuf: Vec<f64>,
    vbuf: Vec<f64>,
    wsmall: Vec<Vec<f64>>,
    dsmall: Vec<f64>,
}

/// `b_{h_r}^T M_t b_i` over all `i`, for the `r`-th chosen candidate.
#[inline]
fn prefix_row<'b>(
    src: &'b PairSource<'_>,
    rowbuf: &'b [Vec<Vec<f64>>],
    chosen: &[usize],
    r: usize,
    t: usize,
) -> &'b [f64] {
    match &src.table {
        Some(tab) => {
            let mc = src.cands.len();
            let h = chosen[r];
            &tab[t][h * mc..(h + 1) * mc]
        }
        None => &rowbuf[r][t],
    }
}

impl<'a> Dfs<'a> {
    fn new(k: usize, src: &'a PairSource<'a>, score: &'a Score, diag: &'a [Vec<f64>]) -> Self {
        let mc = src.cands.len();
        let nt = src.mats.len();
        let np = nt - 1;
        let rowbuf = if src.table.is_some() {
            Vec::new()
        } else {
            vec![vec![vec![0.0; mc]; nt]; k]
        };
        Self {
            k,
            mc,
            nt,
            src,
            score,
            diag,
            rowbuf,
            chosen: Vec::with_capacity(k),
            kinv: (0..=k).map(|j| vec![0.0; j * j]).collect(),
            acc: vec![vec![0.0; np]; k + 1],
            best: None,
            wbuf: vec![vec![0.0; mc]; k],
            sbuf: vec![0.0; mc],
            dbuf: vec![vec![0.0; mc]; np],
            trbuf: vec![0.0; mc],
            vbuf: vec![0.0; mc],
            wsmall: vec![vec![0.0; k]; k + 1],
            dsmall: vec![0.0; np],
        }
    }

    /// Explores every set whose first element is `i0`.
    fn run_from(&mut self, i0: usize) {
        if self.k == 1 {
            self.leaves(0, i0, i0 + 1);
        } else {
            self.push(0, i0);
            self.run(1, i0 + 1);
            self.chosen.pop();
        }
    }

    /// Appends candidate `i` to the prefix of length `j`.
    fn push(&mut self, j: usize, i: usize) {
        let np = self.nt - 1;
        let m = j + 1;
        let mut w = std::mem::take(&mut self.wsmall[j]);
        {
            let src = self.src;
            let rows = |r: usize, t: usize| prefix_row(src, &self.rowbuf, &self.chosen, r, t);
            let kinv = &self.kinv[j];
            let mut s = 1.0 + self.diag[0][i];
            for r in 0..j {
                let mut acc = 0.0;
                for c in 0..j {
                    acc += kinv[r * j + c] * rows(c, 0)[i];
                }
                w[r] = acc;
                s -= rows(r, 0)[i] * acc;
            }
            for x in 0..np {
                let t = x + 1;
                let mut quad = self.diag[t][i];
                for r in 0..j {
                    let row = rows(r, t);
                    quad -= 2.0 * w[r] * row[i];
                    let mut inner = 0.0;
                    for c in 0..j {
                        inner += row[self.chosen[c]] * w[c];
                    }
                    quad += w[r] * inner;
                }
                self.dsmall[x] = self.acc[j][x] + quad / s;
            }
            let (lo, hi) = self.kinv.split_at_mut(m);
            let kinv = &lo[j];
            let next = &mut hi[0];
            for r in 0..j {
                for c in 0..j {
                    next[r * m + c] = kinv[r * j + c] + w[r] * w[c] / s;
                }
                next[r * m + j] = -w[r] / s;
                next[j * m + r] = -w[r] / s;
            }
            next[j * m + j] = 1.0 / s;
        }
        self.wsmall[j] = w;
        let (lo, hi) = self.acc.split_at_mut(m);
        let _ = lo;
        hi[0].copy_from_slice(&self.dsmall);
        if self.src.table.is_none() {
            for t in 0..self.nt {
                let mut row = std::mem::take(&mut self.rowbuf[j][t]);
                self.src.fill_row(t, i, &mut row);
                self.rowbuf[j][t] = row;
            }
        }
        self.chosen.push(i);
    }

    fn run(&mut self, j: usize, start: usize) {
        if j + 1 == self.k {
            self.leaves(j, start, self.mc);
            return;
        }
        let last = self.mc - (self.k - j);
        for i in start..=last {
            self.push(j, i);
            self.run(j + 1, i + 1);
            self.chosen.pop();
        }
    }

    /// Scores every completion `prefix + {i}` for `i` in `start..end`.
    fn leaves(&mut self, j: usize, start: usize, end: usize) {
        match j {
            0 => self.leaves_np::<0>(start, end),
            1 => self.leaves_np::<1>(start, end),
            2 => self.leaves_np::<2>(start, end),
            3 => self.leaves_np::<3>(start, end),
            4 => self.leaves_np::<4>(start, end),
            _ => self.leaves_sweep(j, start, end),
        }
    }

    fn leaves_np<const J: usize>(&mut self, start: usize, end: usize) {
        match self.nt - 1 {
            1 => self.leaves_fixed::<J, 1>(start, end),
            2 => self.leaves_fixed::<J, 2>(start, end),
            _ => self.leaves_fixed::<J, 3>(start, end),
        }
    }

    /// Single pass over the candidates for a prefix of known length `J`.
    fn leaves_fixed<const J: usize, const NP: usize>(&mut self, start: usize, end: usize) {
        if end <= start {
            return;
        }

        let src = self.src;
        let rowbuf = &self.rowbuf;
        let chosen = &self.chosen;
        let full = |r: usize, t: usize| prefix_row(src, rowbuf, chosen, r, t);
        let a_rows: [&[f64]; J] = std::array::from_fn(|r| &full(r, 0)[start..end]);
        let mut kinv = [[0.0; J]; J];
        for (r, row) in kinv.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = self.kinv[J][r * J + c];
            }
        }
        let mut c_rows: [[&[f64]; J]; NP] = [[&[]; J]; NP];
        let mut chh = [[[0.0; J]; J]; NP];
        let mut dg: [&[f64]; NP] = [&[]; NP];
        let mut acc = [0.0; NP];
        for x in 0..NP {
            let t = x + 1;
            for r in 0..J {
                let row = full(r, t);
                c_rows[x][r] = &row[start..end];
                for c in 0..J {
                    chh[x][r][c] = row[chosen[c]];
                }
            }
            dg[x] = &self.diag[t][start..end];
            acc[x] = self.acc[J][x];
        }
        let d0 = &self.diag[0][start..end];
        let mut best_v = f64::INFINITY;
        let mut best_i = usize::MAX;
        let mut drops = [0.0; NP];
        for idx in 0..end - start {
            let a: [f64; J] = std::array::from_fn(|r| a_rows[r][idx]);
            let mut w = [0.0; J];
            let mut s = 1.0 + d0[idx];
            for r in 0..J {
                let mut sum = 0.0;
                for c in 0..J {
                    sum += kinv[r][c] * a[c];
                }
                w[r] = sum;
                s -= a[r] * sum;
            }
            let inv_s = 1.0 / s;
            for x in 0..NP {
                let mut quad = dg[x][idx];
                for r in 0..J {
                    let mut inner = 0.0;
                    for c in 0..J {
                        inner += chh[x][r][c] * w[c];
                    }
                    quad += w[r] * (inner - 2.0 * c_rows[x][r][idx]);
                }
                drops[x] = acc[x] + quad * inv_s;
            }
            let v = self.score.value(&drops);
            if v < best_v {
                best_v = v;
                best_i = idx;
            }
        }
        if best_i != usize::MAX && self.best.as_ref().is_none_or(|(b, _)| best_v < *b) {
            let mut set = self.chosen.clone();
            set.push(start + best_i);
            self.best = Some((best_v, set));
        }
    }

    /// Column-sweep variant for long prefixes.
    fn leaves_sweep(&mut self, j: usize, start: usize, end: usize) {
        let len = end.saturating_sub(start);
        if len == 0 {
            return;
        }
        let src = self.src;
        let rowbuf = &self.rowbuf;
        let chosen = &self.chosen;
        let rows = |r: usize, t: usize| &prefix_row(src, rowbuf, chosen, r, t)[start..end];
        let kinv = &self.kinv[j];
        for r in 0..j {
            let w = &mut self.wbuf[r][..len];
            w.fill(0.0);
            for c in 0..j {
                let kc = kinv[r * j + c];
                for (wi, &a) in w.iter_mut().zip(rows(c, 0)) {
                    *wi += kc * a;
                }
            }
        }
        let s = &mut self.sbuf[..len];
        for (si, &d) in s.iter_mut().zip(&self.diag[0][start..end]) {
            *si = 1.0 + d;
        }
        for r in 0..j {
            for ((si, &a), &w) in s.iter_mut().zip(rows(r, 0)).zip(&self.wbuf[r]) {
                *si -= a * w;
            }
        }
        for x in 0..self.nt - 1 {
            let t = x + 1;
            let d = &mut self.dbuf[x][..len];
            d.copy_from_slice(&self.diag[t][start..end]);
            for r in 0..j {
                let row = rows(r, t);
                let full = prefix_row(src, rowbuf, chosen, r, t);
                let wr = &self.wbuf[r][..len];
                for ((di, &cv), &w) in d.iter_mut().zip(row).zip(wr) {
                    *di -= 2.0 * w * cv;
                }
                for c in 0..j {
                    let chh = full[chosen[c]];
                    let wc = &self.wbuf[c][..len];
                    for ((di, &a), &b) in d.iter_mut().zip(wr).zip(wc) {
                        *di += chh * a * b;
                    }
                }
            }
            let base = self.acc[j][x];
            for (di, &si) in d.iter_mut().zip(s.iter()) {
                *di = base + *di / si;
            }
        }
        self.score
            .evaluate(&self.dbuf, len, &mut self.trbuf, &mut self.vbuf);
        let mut arg = 0;
        for (i, &v) in self.vbuf[..len].iter().enumerate() {
            if v < self.vbuf[arg] {
                arg = i;
            }
        }
        let v = self.vbuf[arg];
        if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
            let mut set = self.chosen.clone();
            set.push(start + arg);
            self.best = Some((v, set));
        }
    }
}

/// A witness that `F` is not supermodular:
/// `F(B) - F(B + e) < F(C) - F(C + e)` with `B` a subset of `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupermodularityWitness {
    pub graph: Graph,
    pub groups: GroupAssignment,
    pub lambda: f64,
    pub b: Vec<(Node, Node)>,
    pub c: Vec<(Node, Node)>,
    pub e: (Node, Node),
    pub f_b: f64,
    pub f_b_e: f64,
    pub f_c: f64,
    pub f_c_e: f64,
}

impl SupermodularityWitness {
    pub fn gain_b(&self) -> f64 {
        self.f_b - self.f_b_e
    }

    pub fn gain_c(&self) -> f64 {
        self.f_c - self.f_c_e
    }
}

pub const COUNTEREXAMPLE_ATTEMPTS: usize = 200_000;

/// Random search over small graphs for a non-supermodularity witness.
pub fn find_nonsupermodular_counterexample(seed: u64) -> Option<SupermodularityWitness> {
    find_nonsupermodular_counterexample_with(seed, COUNTEREXAMPLE_ATTEMPTS)
}

pub fn find_nonsupermodular_counterexample_with(
    seed: u64,
    attempts: usize,
) -> Option<SupermodularityWitness> {
    for attempt in 0..attempts {
        let mut r = rng::stream(seed, &[rng::tag::COUNTEREXAMPLE, attempt as u64]);
        if let Some(w) = try_witness(&mut r) {
            return Some(w);
        }
    }
    None
}

fn try_witness<R: Rng>(r: &mut R) -> Option<SupermodularityWitness> {
    let n = r.random_range(4..=10usize);
    // Random tree plus a few chords.
    let mut edges: Vec<(Node, Node)> = (1..n).map(|v| (r.random_range(0..v), v)).collect();
    let p_extra = r.random_range(0.0..0.3);
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(p_extra) {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::new(n, edges).ok()?;
    let mut labels: Vec<Group> = (0..n)
        .map(|_| *[Group::S, Group::T, Group::O].choose(r).expect("non-empty"))
        .collect();
    let s = r.random_range(0..n);
    let t = (s + r.random_range(1..n)) % n;
    labels[s] = Group::S;
    labels[t] = Group::T;
    let ga = GroupAssignment::from_labels(labels).ok()?;
    let lambda = *[0.0, 0.25, 0.5, 0.75, 1.0].choose(r).expect("non-empty");

    let mut pool: Vec<(Node, Node)> = g.non_edges().collect();
    if pool.len() < 2 {
        return None;
    }
    // Shuffle and carve e, B, and C \ B out of the pool.
    for i in (1..pool.len()).rev() {
        let j = r.random_range(0..=i);
        pool.swap(i, j);
    }
    let e = pool[0];
    let rest = &pool[1..];
    let nb = r.random_range(0..=rest.len().min(2));
    let nc = nb + r.random_range(1..=(rest.len() - nb).clamp(1, 3));
    if nc > rest.len() {
        return None;
    }
    let b = rest[..nb].to_vec();
    let c = rest[..nc].to_vec();

    let obj = Objective::new(lambda);
    let f_of = |set: &[(Node, Node)], extra: Option<(Node, Node)>| -> Option<f64> {
        let mut all = set.to_vec();
        all.extend(extra);
        let h = g.with_edges(&all).ok()?;
        Some(DensePinv::new(&h).ok()?.objective_with(&ga, &obj))
    };
    let f_b = f_of(&b, None)?;
    let f_b_e = f_of(&b, Some(e))?;
    let f_c = f_of(&c, None)?;
    let f_c_e = f_of(&c, Some(e))?;
    let (gb, gc) = (f_b - f_b_e, f_c - f_c_e);
    // Margin keeps rounding noise from producing a witness.
    if gc - gb > 1e-9 * gb.abs().max(1.0) {
        Some(SupermodularityWitness {
            graph: g,
            groups: ga,
            lambda,
            b,
            c,
            e,
            f_b,
            f_b_e,
            f_c,
            f_c_e,
        })
    } else {
        None
    }
}
