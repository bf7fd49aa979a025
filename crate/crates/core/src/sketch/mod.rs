//! Sketched node coordinates whose squared distances approximate the
//! gradient surrogate.
//!
//! For each term of the surrogate a sign matrix `Q_X` (restricted to the
//! columns of group `X`) is pushed through `L^+`, giving `Z_X = Q_X E^X L^+`.
//! Then `delta_tilde(u, v) = alpha |Z_V b_uv|^2 + sum_X coef_X |Z_X b_uv|^2`,
//! with the coefficients estimated from [`app_diag`].

pub mod diag;
pub mod jl;
pub mod solver;

pub use diag::{app_diag, app_diag_with};
pub use jl::{jl_matrix, jl_rows};
pub use solver::{solve, Laplacian, Preconditioner, Solver, SolverConfig};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exact::{Objective, SurrogateCoefficients};
use crate::graph::{Graph, Group, GroupAssignment, Node};
use crate::hull::PointSet;
use crate::rng::tag;

use jl::fill_signs;
use solver::{project_block, BLOCK};

/// Constant regime for the sketch sizes and tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SketchMode {
    /// `q = ceil(24 ln n / eps^2)`, solver delta `1e-8`, diagonal estimate at
    /// `eps`.
    #[default]
    Practical,
    /// Constants verbatim from the analysis. Only feasible for tiny graphs.
    Theory,
}

/// Resolved sizes and tolerances for one sketch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchParams {
    /// Rows per coordinate block.
    pub q: usize,
    /// Rows of the diagonal estimator.
    pub q_diag: usize,
    pub solver_delta: f64,
    /// Coverage parameter handed to the hull coreset.
    pub hull_eps: f64,
}

impl SketchParams {
    pub fn new(n: usize, eps: f64, mode: SketchMode, practical_delta: f64) -> Self {
        let ln = (n.max(2) as f64).ln();
        match mode {
            SketchMode::Practical => Self {
                q: jl_rows(n, eps),
                q_diag: jl_rows(n, eps),
                solver_delta: practical_delta,
                hull_eps: eps / 25.0,
            },
            SketchMode::Theory => {
                let e = 3.0 * eps / 125.0;
                let nf = n as f64;
                let delta1 = eps / 125.0 * (6.0 * (1.0 - e) / (nf.powi(5) * (1.0 + e))).sqrt();
                Self {
                    q: (24.0 * ln / (e * e)).ceil() as usize,
                    q_diag: jl_rows(n, eps / 20.0),
                    solver_delta: delta1,
                    hull_eps: eps / 25.0,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchConfig {
    pub mode: SketchMode,
    pub solver: SolverConfig,
    pub multi_group: bool,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self {
            mode: SketchMode::Practical,
            solver: SolverConfig::default(),
            multi_group: false,
        }
    }
}

/// One solved block `Z_X`, stored node-major (`n x q`) so that a node's
/// coordinates are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchBlock {
    /// `None` for the whole vertex set.
    pub group: Option<Group>,
    pub coef: f64,
    /// Empty when `coef == 0` and the block was skipped.
    pub z: Vec<f64>,
}

impl SketchBlock {
    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    fn row(&self, v: Node, q: usize) -> &[f64] {
        &self.z[v * q..(v + 1) * q]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchState {
    n: usize,
    q: usize,
    epsilon: f64,
    params: SketchParams,
    blocks: Vec<SketchBlock>,
    diag: Vec<f64>,
}

impl SketchState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn blocks(&self) -> &[SketchBlock] {
        &self.blocks
    }

    fn coef_of(&self, group: Option<Group>) -> f64 {
        self.blocks
            .iter()
            .find(|b| b.group == group)
            .map_or(0.0, |b| b.coef)
    }

    pub fn alpha(&self) -> f64 {
        self.coef_of(None)
    }

    pub fn beta(&self) -> f64 {
        self.coef_of(Some(Group::S))
    }

    pub fn gamma(&self) -> f64 {
        self.coef_of(Some(Group::T))
    }

    /// Estimated `diag(L^+)` the coefficients came from.
    pub fn diag_estimate(&self) -> &[f64] {
        &self.diag
    }

    /// `Z_X` as a `q x n` matrix; zeros for a skipped block.
    pub fn z_matrix(&self, group: Option<Group>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.q, self.n);
        if let Some(b) = self.blocks.iter().find(|b| b.group == group) {
            if !b.is_empty() {
                for v in 0..self.n {
                    for (i, &x) in b.row(v, self.q).iter().enumerate() {
                        m[(i, v)] = x;
                    }
                }
            }
        }
        m
    }

    /// Stacked coordinates `c_v = (sqrt(alpha) Z_V[:, v], sqrt(beta) Z_S[:, v], ...)`.
    pub fn coordinates(&self) -> PointSet {
        let live: Vec<&SketchBlock> = self.blocks.iter().filter(|b| !b.is_empty()).collect();
        let dim = live.len() * self.q;
        let mut data = Vec::with_capacity(self.n * dim);
        for v in 0..self.n {
            for b in &live {
                let s = b.coef.sqrt();
                data.extend(b.row(v, self.q).iter().map(|x| s * x));
            }
        }
        PointSet::new(dim, data).expect("consistent shape")
    }
}

/// Builds the sketch with default settings.
pub fn build_sketch(
    g: &Graph,
    ga: &GroupAssignment,
    lambda: f64,
    eps: f64,
    seed: u64,
) -> Result<SketchState> {
    build_sketch_with(g, ga, lambda, eps, seed, &SketchConfig::default())
}

pub fn build_sketch_with(
    g: &Graph,
    ga: &GroupAssignment,
    lambda: f64,
    eps: f64,
    seed: u64,
    cfg: &SketchConfig,
) -> Result<SketchState> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    ga.check_against(g)?;
    let n = g.n();
    let params = SketchParams::new(n, eps, cfg.mode, cfg.solver.delta);
    let solver = Solver::new(
        g,
        SolverConfig {
            delta: params.solver_delta,
            ..cfg.solver
        },
    )?;
    let diag = app_diag_with(g, &solver, params.q_diag, seed)?;

    let obj = Objective::new(lambda).with_multi_group(cfg.multi_group);
    let trace: f64 = diag.iter().sum();
    let groups: Vec<_> = obj
        .groups(ga)
        .into_iter()
        .map(|x| {
            let members = ga.members(x);
            (x, members.iter().map(|&v| diag[v]).sum(), members.len())
        })
        .collect();
    let coefs = SurrogateCoefficients::from_diag(n, trace, &obj, &groups);

    let mut specs = vec![(None, coefs.alpha, tag::JL_COORDS_ALL)];
    for &(x, c) in &coefs.groups {
        let t = match x {
            Group::S => tag::JL_COORDS_S,
            Group::T => tag::JL_COORDS_T,
            Group::O => tag::JL_COORDS_O,
        };
        specs.push((Some(x), c, t));
    }
    // The S and T blocks are always present, possibly skipped.
    for x in [Group::S, Group::T] {
        if !specs.iter().any(|s| s.0 == Some(x)) {
            specs.push((Some(x), 0.0, 0));
        }
    }

    let q = params.q;
    let mut blocks = Vec::with_capacity(specs.len());
    for (group, coef, t) in specs {
        let z = if coef > 0.0 {
            let members: &[Node] = match group {
                None => &[],
                Some(x) => ga.members(x),
            };
            solve_coordinates(&solver, n, q, seed, t, group.map(|_| members))?
        } else {
            Vec::new()
        };
        blocks.push(SketchBlock { group, coef, z });
    }
    Ok(SketchState {
        n,
        q,
        epsilon: eps,
        params,
        blocks,
        diag,
    })
}

/// Node-major `n x q` solutions of `L z_i = P (Q_i E^X)^T`, with `P` the
/// projection onto `1^perp`.
fn solve_coordinates(
    solver: &Solver,
    n: usize,
    q: usize,
    seed: u64,
    t: u64,
    members: Option<&[Node]>,
) -> Result<Vec<f64>> {
    let scale = 1.0 / (q as f64).sqrt();
    let blocks = q.div_ceil(BLOCK);
    let solved = solver.solve_many(blocks, |bi, rhs| {
        let mut signs = vec![0.0; n];
        for c in 0..BLOCK {
            let row = bi * BLOCK + c;
            if row >= q {
                break;
            }
            fill_signs(seed, &[t, row as u64], scale, &mut signs);
            match members {
                None => {
                    for v in 0..n {
                        rhs[v * BLOCK + c] = signs[v];
                    }
                }
                Some(m) => {
                    for &v in m {
                        rhs[v * BLOCK + c] = signs[v];
                    }
                }
            }
        }
        project_block(rhs, n, BLOCK);
    })?;
    let mut z = vec![0.0; n * q];
    for (bi, block) in solved.iter().enumerate() {
        for c in 0..BLOCK {
            let row = bi * BLOCK + c;
            if row >= q {
                break;
            }
            for v in 0..n {
                z[v * q + row] = block[v * BLOCK + c];
            }
        }
    }
    Ok(z)
}

/// Sketched surrogate `sum_X coef_X |Z_X (e_u - e_v)|^2`.
pub fn delta_tilde(s: &SketchState, u: Node, v: Node) -> f64 {
    let q = s.q;
    s.blocks
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| {
            let d: f64 = b
                .row(u, q)
                .iter()
                .zip(b.row(v, q))
                .map(|(a, c)| (a - c) * (a - c))
                .sum();
            b.coef * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Graph, GroupAssignment) {
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)]).unwrap();
        let ga = GroupAssignment::new(6, &[0, 1, 2], &[4, 5]).unwrap();
        (g, ga)
    }

    #[test]
    fn lambda_zero_coefficients() {
        let (g, ga) = toy();
        let s = build_sketch(&g, &ga, 0.0, 0.5, 1).unwrap();
        assert_eq!(s.alpha(), 1.0);
        assert_eq!(s.beta(), 0.0);
        assert_eq!(s.gamma(), 0.0);
        assert!(s
            .blocks()
            .iter()
            .filter(|b| b.group.is_some())
            .all(|b| b.is_empty()));
    }

    #[test]
    fn rows_orthogonal_to_ones_and_symmetric() {
        let (g, ga) = toy();
        let s = build_sketch(&g, &ga, 0.5, 0.5, 2).unwrap();
        assert!(s.alpha() > 0.0 && s.beta() > 0.0 && s.gamma() > 0.0);
        for group in [None, Some(Group::S), Some(Group::T)] {
            let z = s.z_matrix(group);
            for i in 0..s.q() {
                let row = z.row(i);
                assert!(row.sum().abs() <= 1e-6 * row.norm().max(1e-300));
            }
        }
        assert_eq!(delta_tilde(&s, 0, 3), delta_tilde(&s, 3, 0));
    }

    #[test]
    fn distances_match_coordinates() {
        let (g, ga) = toy();
        let s = build_sketch(&g, &ga, 0.7, 0.5, 3).unwrap();
        let p = s.coordinates();
        for (u, v) in g.non_edges() {
            let d = p.dist_sq(u, v);
            assert!((d - delta_tilde(&s, u, v)).abs() <= 1e-12 * d.max(1.0));
        }
    }

    #[test]
    fn theory_constants() {
        let p = SketchParams::new(10, 0.5, SketchMode::Theory, 1e-8);
        let e: f64 = 3.0 * 0.5 / 125.0;
        assert_eq!(p.q, (24.0 * 10f64.ln() / (e * e)).ceil() as usize);
        let d1 = 0.5 / 125.0 * (6.0 * (1.0 - e) / (1e5 * (1.0 + e))).sqrt();
        assert!((p.solver_delta - d1).abs() < 1e-18);
        assert!((p.hull_eps - 0.02).abs() < 1e-15);
    }
}
