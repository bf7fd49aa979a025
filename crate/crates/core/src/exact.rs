//! Dense Laplacian pseudoinverse and the exact resistance / fairness metrics.
//!
//! `L^+` is formed as `(L + J/n)^{-1} - J/n` through a Cholesky factorization.
//! All metrics read `L^+` directly:
//!
//! * pairwise resistance `r(u, v) = b_uv^T L^+ b_uv`
//! * node resistance `R_v = n L^+_vv + tr L^+`
//! * Kirchhoff index `K = n tr L^+`
//! * group access `I_X = (n / |X|) sum_{v in X} L^+_vv + tr L^+`
//! * objective `F = (1 - lambda) tr L^+ + lambda (I_S^2 + I_T^2)`

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::graph::{Graph, Group, GroupAssignment, Node};

/// Which terms enter the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub lambda: f64,
    /// Adds `lambda * I_O^2` when the remainder group is non-empty.
    pub multi_group: bool,
}

impl Objective {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            multi_group: false,
        }
    }

    pub fn with_multi_group(mut self, on: bool) -> Self {
        self.multi_group = on;
        self
    }

    /// Groups whose squared access enters the objective.
    pub fn groups(&self, ga: &GroupAssignment) -> Vec<Group> {
        let mut groups = vec![Group::S, Group::T];
        if self.multi_group && !ga.o().is_empty() {
            groups.push(Group::O);
        }
        groups
    }

    /// `(1 - lambda) R + lambda * sum I_X^2` over `accesses`.
    pub fn value(&self, resistance: f64, accesses: &[f64]) -> f64 {
        let fair: f64 = accesses.iter().map(|i| i * i).sum();
        (1.0 - self.lambda) * resistance + self.lambda * fair
    }
}

/// Snapshot of every exact quantity for a graph and a group split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Graph resistance `tr L^+`.
    pub r: f64,
    pub i_s: f64,
    pub i_t: f64,
    /// `I_O`, when `O` is non-empty.
    pub i_o: Option<f64>,
    /// `I_T - I_S`.
    pub u: f64,
    pub kirchhoff: f64,
    pub f: f64,
}

/// Dense `L^+` of a connected graph. Immutable; [`DensePinv::with_edge`]
/// returns an updated copy.
#[derive(Debug, Clone)]
pub struct DensePinv {
    graph: Graph,
    p: DMatrix<f64>,
}

impl DensePinv {
    pub fn new(g: &Graph) -> Result<Self> {
        Self::with_tolerances(g, &Tolerances::default())
    }

    pub fn with_tolerances(g: &Graph, tol: &Tolerances) -> Result<Self> {
        let n = g.n();
        if n > tol.dense_cap {
            return Err(Error::GraphTooLarge {
                n,
                cap: tol.dense_cap,
            });
        }
        let shift = 1.0 / n as f64;
        let mut a = g.laplacian_dense();
        a.add_scalar_mut(shift);
        let chol = Cholesky::new(a).ok_or(Error::SingularMatrix)?;
        let mut p = chol.inverse();
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        p.add_scalar_mut(-shift);
        // The Cholesky inverse is symmetric only up to rounding.
        let pt = p.transpose();
        p += pt;
        p *= 0.5;
        Ok(Self {
            graph: g.clone(),
            p,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn trace(&self) -> f64 {
        self.p.trace()
    }

    /// `sum_{v in nodes} L^+_vv`.
    pub fn diag_sum(&self, nodes: &[Node]) -> f64 {
        nodes.iter().map(|&v| self.p[(v, v)]).sum()
    }

    pub fn pairwise_resistance(&self, u: Node, v: Node) -> Result<f64> {
        let n = self.n();
        if u == v || u >= n || v >= n {
            return Err(Error::InvalidPair(u, v));
        }
        Ok(self.p[(u, u)] + self.p[(v, v)] - 2.0 * self.p[(u, v)])
    }

    pub fn node_resistance(&self, v: Node) -> f64 {
        self.n() as f64 * self.p[(v, v)] + self.trace()
    }

    pub fn kirchhoff_index(&self) -> f64 {
        self.n() as f64 * self.trace()
    }

    pub fn group_access(&self, group: &[Node]) -> Result<f64> {
        if group.is_empty() {
            return Err(Error::EmptyGroup);
        }
        let n = self.n() as f64;
        Ok(n / group.len() as f64 * self.diag_sum(group) + self.trace())
    }

    pub fn unfairness(&self, ga: &GroupAssignment) -> f64 {
        let i_t = self.group_access(ga.t()).expect("T is non-empty");
        let i_s = self.group_access(ga.s()).expect("S is non-empty");
        i_t - i_s
    }

    pub fn objective(&self, ga: &GroupAssignment, lambda: f64) -> f64 {
        self.objective_with(ga, &Objective::new(lambda))
    }

    pub fn objective_with(&self, ga: &GroupAssignment, obj: &Objective) -> f64 {
        let accesses: Vec<f64> = obj
            .groups(ga)
            .into_iter()
            .map(|g| {
                self.group_access(ga.members(g))
                    .expect("objective groups are non-empty")
            })
            .collect();
        obj.value(self.trace(), &accesses)
    }

    pub fn metrics(&self, ga: &GroupAssignment, obj: &Objective) -> Metrics {
        let r = self.trace();
        let i_s = self.group_access(ga.s()).expect("S is non-empty");
        let i_t = self.group_access(ga.t()).expect("T is non-empty");
        let i_o = self.group_access(ga.o()).ok();
        Metrics {
            r,
            i_s,
            i_t,
            i_o,
            u: i_t - i_s,
            kirchhoff: self.n() as f64 * r,
            f: self.objective_with(ga, obj),
        }
    }

    /// `L^+ b_uv`, i.e. column `u` minus column `v`.
    pub fn apply_incidence(&self, u: Node, v: Node) -> DVector<f64> {
        self.p.column(u) - self.p.column(v)
    }

    /// `L^+` of the graph with `(u, v)` added, by the rank-one update
    /// `L^+ - L^+ b b^T L^+ / (1 + b^T L^+ b)`.
    pub fn with_edge(&self, u: Node, v: Node) -> Result<Self> {
        let graph = self.graph.with_edge(u, v)?;
        let w = self.apply_incidence(u, v);
        let c = 1.0 / (1.0 + w[u] - w[v]);
        let mut p = self.p.clone();
        p.ger(-c, &w, &w, 1.0);
        Ok(Self { graph, p })
    }

    /// `F(before) - F(after adding (u, v))`, by explicit update and
    /// re-evaluation.
    pub fn marginal_decrease(
        &self,
        ga: &GroupAssignment,
        obj: &Objective,
        u: Node,
        v: Node,
    ) -> Result<f64> {
        let after = self.with_edge(u, v)?;
        Ok(self.objective_with(ga, obj) - after.objective_with(ga, obj))
    }

    /// Checks symmetry and the zero row sums, returning the worst violations
    /// relative to `max|P|`.
    pub fn invariant_residuals(&self) -> (f64, f64) {
        let scale = self.p.amax().max(f64::MIN_POSITIVE);
        let n = self.n();
        let mut asym: f64 = 0.0;
        let mut rows: f64 = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                asym = asym.max((self.p[(i, j)] - self.p[(j, i)]).abs());
                s += self.p[(i, j)];
            }
            rows = rows.max(s.abs());
        }
        (asym / scale, rows / (n as f64 * scale))
    }
}

pub fn pseudoinverse(g: &Graph) -> Result<DensePinv> {
    DensePinv::new(g)
}

pub fn pairwise_resistance(p: &DensePinv, u: Node, v: Node) -> Result<f64> {
    p.pairwise_resistance(u, v)
}

pub fn node_resistance(p: &DensePinv, v: Node) -> f64 {
    p.node_resistance(v)
}

pub fn kirchhoff_index(p: &DensePinv) -> f64 {
    p.kirchhoff_index()
}

pub fn group_access(p: &DensePinv, group: &[Node]) -> Result<f64> {
    p.group_access(group)
}

pub fn unfairness(p: &DensePinv, ga: &GroupAssignment) -> f64 {
    p.unfairness(ga)
}

pub fn objective(p: &DensePinv, ga: &GroupAssignment, lambda: f64) -> f64 {
    p.objective(ga, lambda)
}

pub fn sherman_morrison_update(p: &DensePinv, u: Node, v: Node) -> Result<DensePinv> {
    p.with_edge(u, v)
}

pub fn marginal_decrease(
    p: &DensePinv,
    ga: &GroupAssignment,
    lambda: f64,
    u: Node,
    v: Node,
) -> Result<f64> {
    p.marginal_decrease(ga, &Objective::new(lambda), u, v)
}

/// Weights of the gradient surrogate
/// `alpha |L^+ b|^2 + sum_X coef_X |E^X L^+ b|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCoefficients {
    pub alpha: f64,
    /// `(group, coefficient)` for each group in the objective.
    pub groups: Vec<(Group, f64)>,
}

impl SurrogateCoefficients {
    /// Builds the coefficients from `tr L^+`, the diagonal sums over each
    /// objective group, and the group sizes.
    ///
    /// `alpha = 1 - lambda + 2 lambda sum_X I_X` and
    /// `coef_X = 2 lambda (n / |X|) I_X`.
    pub fn from_diag(
        n: usize,
        trace: f64,
        obj: &Objective,
        groups: &[(Group, f64, usize)],
    ) -> Self {
        let lambda = obj.lambda;
        let n = n as f64;
        let mut alpha = 1.0 - lambda;
        let mut coefs = Vec::with_capacity(groups.len());
        for &(group, diag, size) in groups {
            let scale = n / size as f64;
            let access = scale * diag + trace;
            alpha += 2.0 * lambda * access;
            coefs.push((group, 2.0 * lambda * scale * access));
        }
        Self {
            alpha,
            groups: coefs,
        }
    }

    pub fn coefficient(&self, group: Group) -> f64 {
        self.groups
            .iter()
            .find(|(g, _)| *g == group)
            .map_or(0.0, |&(_, c)| c)
    }
}

/// Exact surrogate coefficients at the current `L^+`.
pub fn surrogate_coefficients(
    p: &DensePinv,
    ga: &GroupAssignment,
    obj: &Objective,
) -> SurrogateCoefficients {
    let groups: Vec<_> = obj
        .groups(ga)
        .into_iter()
        .map(|g| (g, p.diag_sum(ga.members(g)), ga.members(g).len()))
        .collect();
    SurrogateCoefficients::from_diag(p.n(), p.trace(), obj, &groups)
}

/// Gradient surrogate of the marginal decrease, evaluated from explicit
/// vectors: `alpha |L^+ b|^2 + beta |E^S L^+ b|^2 + gamma |E^T L^+ b|^2`.
pub fn delta_bar(
    p: &DensePinv,
    ga: &GroupAssignment,
    obj: &Objective,
    u: Node,
    v: Node,
) -> Result<f64> {
    let n = p.n();
    if u == v || u >= n || v >= n {
        return Err(Error::InvalidPair(u, v));
    }
    let coefs = surrogate_coefficients(p, ga, obj);
    let w = p.apply_incidence(u, v);
    let mut value = coefs.alpha * w.norm_squared();
    for &(g, c) in &coefs.groups {
        let part: f64 = ga.members(g).iter().map(|&x| w[x] * w[x]).sum();
        value += c * part;
    }
    Ok(value)
}

/// Incrementally maintained tables for scoring every candidate edge in O(1).
///
/// Keeps `P = L^+` and, for every non-empty group `X` of the partition,
/// `M_X = P E^X P`. For `b = e_u - e_v`, `w = P b` and `c = 1 / (1 + b^T P b)`,
/// adding the edge lowers `sum_{x in X} P_xx` by `c * b^T M_X b` and `tr P`
/// by the sum of those over the partition. Each edge insertion updates the
/// tables with rank-two corrections in O(n^2).
#[derive(Debug, Clone)]
pub struct ExactScorer {
    n: usize,
    obj: Objective,
    p: DMatrix<f64>,
    parts: Vec<Part>,
    trace: f64,
}

#[derive(Debug, Clone)]
struct Part {
    group: Group,
    size: usize,
    members: Vec<Node>,
    in_objective: bool,
    m: DMatrix<f64>,
    diag: f64,
}

impl ExactScorer {
    pub fn new(pinv: &DensePinv, ga: &GroupAssignment, obj: &Objective) -> Result<Self> {
        ga.check_against(pinv.graph())?;
        let n = pinv.n();
        let p = pinv.matrix().clone();
        let in_obj = obj.groups(ga);
        let mut parts = Vec::new();
        for group in [Group::S, Group::T, Group::O] {
            let members = ga.members(group);
            if members.is_empty() {
                continue;
            }
            let px = p.select_columns(members);
            let m = &px * px.transpose();
            parts.push(Part {
                group,
                size: members.len(),
                members: members.to_vec(),
                in_objective: in_obj.contains(&group),
                m,
                diag: pinv.diag_sum(members),
            });
        }
        Ok(Self {
            n,
            obj: *obj,
            trace: pinv.trace(),
            p,
            parts,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    fn access(&self, part: &Part, diag: f64, trace: f64) -> f64 {
        self.n as f64 / part.size as f64 * diag + trace
    }

    /// Current objective value.
    pub fn objective(&self) -> f64 {
        let accesses: Vec<f64> = self
            .parts
            .iter()
            .filter(|p| p.in_objective)
            .map(|p| self.access(p, p.diag, self.trace))
            .collect();
        self.obj.value(self.trace, &accesses)
    }

    pub fn metrics(&self) -> Metrics {
        let mut i_s = 0.0;
        let mut i_t = 0.0;
        let mut i_o = None;
        for p in &self.parts {
            let a = self.access(p, p.diag, self.trace);
            match p.group {
                Group::S => i_s = a,
                Group::T => i_t = a,
                Group::O => i_o = Some(a),
            }
        }
        Metrics {
            r: self.trace,
            i_s,
            i_t,
            i_o,
            u: i_t - i_s,
            kirchhoff: self.n as f64 * self.trace,
            f: self.objective(),
        }
    }

    #[inline]
    fn quad(m: &DMatrix<f64>, u: Node, v: Node) -> f64 {
        m[(u, u)] + m[(v, v)] - 2.0 * m[(v, u)]
    }

    /// Exact marginal decrease of the objective for adding `(u, v)`.
    pub fn delta(&self, u: Node, v: Node) -> f64 {
        let c = 1.0 / (1.0 + Self::quad(&self.p, u, v));
        let mut drops = [0.0; 3];
        let mut total = 0.0;
        for (d, part) in drops.iter_mut().zip(&self.parts) {
            *d = c * Self::quad(&part.m, u, v);
            total += *d;
        }
        let trace_after = self.trace - total;
        let accesses_after: Vec<f64> = self
            .parts
            .iter()
            .zip(drops)
            .filter(|(p, _)| p.in_objective)
            .map(|(p, d)| self.access(p, p.diag - d, trace_after))
            .collect();
        self.objective() - self.obj.value(trace_after, &accesses_after)
    }

    /// Surrogate coefficients at the current state.
    pub fn coefficients(&self) -> SurrogateCoefficients {
        let groups: Vec<_> = self
            .parts
            .iter()
            .filter(|p| p.in_objective)
            .map(|p| (p.group, p.diag, p.size))
            .collect();
        SurrogateCoefficients::from_diag(self.n, self.trace, &self.obj, &groups)
    }

    /// Gradient surrogate for `(u, v)` given precomputed coefficients.
    pub fn delta_bar_with(&self, coefs: &SurrogateCoefficients, u: Node, v: Node) -> f64 {
        let mut norm_sq = 0.0;
        let mut value = 0.0;
        for part in &self.parts {
            let q = Self::quad(&part.m, u, v);
            norm_sq += q;
            value += coefs.coefficient(part.group) * q;
        }
        value + coefs.alpha * norm_sq
    }

    pub fn delta_bar(&self, u: Node, v: Node) -> f64 {
        self.delta_bar_with(&self.coefficients(), u, v)
    }

    /// Applies the insertion of `(u, v)` to every table.
    pub fn add_edge(&mut self, u: Node, v: Node) {
        let n = self.n;
        let w: Vec<f64> = (0..n).map(|i| self.p[(i, u)] - self.p[(i, v)]).collect();
        let c = 1.0 / (1.0 + w[u] - w[v]);
        for part in &mut self.parts {
            // y = M_X b, s = b^T M_X b
            let y: Vec<f64> = (0..n).map(|i| part.m[(i, u)] - part.m[(i, v)]).collect();
            let s = y[u] - y[v];
            let cc = c * c * s;
            for j in 0..n {
                let (wj, yj) = (w[j], y[j]);
                let col = part.m.column_mut(j);
                for (i, mij) in col.into_iter().enumerate() {
                    *mij += cc * w[i] * wj - c * (y[i] * wj + w[i] * yj);
                }
            }
        }
        for j in 0..n {
            let f = c * w[j];
            let col = self.p.column_mut(j);
            for (i, pij) in col.into_iter().enumerate() {
                *pij -= f * w[i];
            }
        }
        // Re-read the trace and diagonal sums from P to avoid drift.
        self.trace = self.p.trace();
        for part in &mut self.parts {
            part.diag = part.members.iter().map(|&x| self.p[(x, x)]).sum();
        }
    }

    pub fn pinv_matrix(&self) -> &DMatrix<f64> {
        &self.p
    }
}
