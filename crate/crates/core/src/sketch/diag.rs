//! Randomized estimate of `diag(L^+)`.
//!
//! Uses `L^+_vv = |B L^+ e_v|^2`: with a `q x m` sign matrix `Q`, each row of
//! `Z = Q B L^+` is one Laplacian solve and `r_v = sum_i Z[i, v]^2`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::tag;

use super::jl::{fill_signs, jl_rows};
use super::solver::{Solver, SolverConfig, BLOCK};

pub fn app_diag(g: &Graph, eps: f64, seed: u64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let solver = Solver::new(g, SolverConfig::default())?;
    app_diag_with(g, &solver, jl_rows(g.n(), eps), seed)
}

/// Estimate with an explicit solver and row count `q`.
pub fn app_diag_with(g: &Graph, solver: &Solver, q: usize, seed: u64) -> Result<Vec<f64>> {
    let n = g.n();
    let edges = g.edges();
    let scale = 1.0 / (q as f64).sqrt();
    let blocks = q.div_ceil(BLOCK);
    let solved = solver.solve_many(blocks, |bi, rhs| {
        let mut signs = vec![0.0; edges.len()];
        for c in 0..BLOCK {
            let row = bi * BLOCK + c;
            if row >= q {
                break;
            }
            fill_signs(seed, &[tag::APP_DIAG, row as u64], scale, &mut signs);
            for (&(u, v), &s) in edges.iter().zip(&signs) {
                rhs[u * BLOCK + c] += s;
                rhs[v * BLOCK + c] -= s;
            }
        }
    })?;
    let mut r = vec![0.0; n];
    for z in &solved {
        for (rv, zv) in r.iter_mut().zip(z.chunks(BLOCK)) {
            *rv += zv.iter().map(|x| x * x).sum::<f64>();
        }
    }
    Ok(r)
}
