//! Numeric limits and tolerances shared across the crate.

/// Centralized tolerance and size limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest node count for which a dense `n x n` pseudoinverse is built.
    pub dense_cap: usize,
    /// Largest number of k-subsets the exhaustive optimum will enumerate.
    pub brute_force_cap: u128,
    /// Relative L-norm error target of the Laplacian solver in practical mode.
    pub solver_delta: f64,
    /// Iteration cap of the Laplacian solver.
    pub solver_max_iters: usize,
    /// Relative symmetry tolerance of a dense pseudoinverse.
    pub symmetry: f64,
    /// Row-sum tolerance of a dense pseudoinverse, scaled by `n * max|P|`.
    pub row_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            dense_cap: 20_000,
            brute_force_cap: 2_000_000,
            solver_delta: 1e-8,
            solver_max_iters: 20_000,
            symmetry: 1e-10,
            row_sum: 1e-8,
        }
    }
}
