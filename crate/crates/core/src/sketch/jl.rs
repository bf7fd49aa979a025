//! Random sign projections with entries `+-1/sqrt(q)`.

use nalgebra::DMatrix;
use rand::RngCore;

use crate::rng;

/// Fills `out` with `+-scale`, drawing 64 signs per generator word from the
/// stream at `path`.
pub(crate) fn fill_signs(root: u64, path: &[u64], scale: f64, out: &mut [f64]) {
    let mut r = rng::stream(root, path);
    for chunk in out.chunks_mut(64) {
        let bits = r.next_u64();
        for (j, x) in chunk.iter_mut().enumerate() {
            *x = if (bits >> j) & 1 == 1 { scale } else { -scale };
        }
    }
}

/// `q x n` matrix with independent `+-1/sqrt(q)` entries; row `i` comes from
/// the stream `[i]` under `seed`.
pub fn jl_matrix(q: usize, n: usize, seed: u64) -> DMatrix<f64> {
    assert!(q >= 1, "q must be positive");
    let scale = 1.0 / (q as f64).sqrt();
    let mut m = DMatrix::zeros(q, n);
    let mut row = vec![0.0; n];
    for i in 0..q {
        fill_signs(seed, &[i as u64], scale, &mut row);
        for (j, &x) in row.iter().enumerate() {
            m[(i, j)] = x;
        }
    }
    m
}

/// Rows needed for `(1 +- eps)` preservation of squared distances among `n`
/// points: `ceil(24 ln n / eps^2)`.
pub fn jl_rows(n: usize, eps: f64) -> usize {
    ((24.0 * (n.max(2) as f64).ln()) / (eps * eps)).ceil() as usize
}
