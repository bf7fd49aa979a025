//! Farthest-point coresets and exhaustive diameters of point sets.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// `n` points of dimension `dim`, row-major. Point `i` is graph node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 && !data.is_empty() {
            return Err(Error::Validation(
                "zero-dimensional points with data".into(),
            ));
        }
        if dim > 0 && !data.len().is_multiple_of(dim) {
            return Err(Error::Validation(format!(
                "{} coordinates do not split into points of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Validation("points differ in dimension".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dist_sq(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Indices of the coreset, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct HullSubset {
    pub indices: Vec<usize>,
    /// Largest distance from any point to its nearest subset member.
    pub covering_radius_estimate: f64,
}

impl HullSubset {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// How distance rows are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMode {
    /// Gram matrix when it fits in [`GRAM_LIMIT`] points, direct otherwise.
    #[default]
    Auto,
    Gram,
    Direct,
}

/// Largest point count for which the `n x n` Gram matrix is formed.
pub const GRAM_LIMIT: usize = 8_000;

pub(crate) enum Distances<'a> {
    Gram { g: DMatrix<f64> },
    Direct(&'a PointSet),
}

impl<'a> Distances<'a> {
    pub(crate) fn new(p: &'a PointSet, mode: DistanceMode) -> Self {
        let gram = match mode {
            DistanceMode::Auto => p.len() <= GRAM_LIMIT && p.dim() > 8,
            DistanceMode::Gram => true,
            DistanceMode::Direct => false,
        };
        if gram {
            // Row-major n x d data read as a column-major d x n matrix.
            let xt = DMatrix::from_column_slice(p.dim(), p.len(), &p.data);
            let x = xt.transpose();
            Distances::Gram { g: x * xt }
        } else {
            Distances::Direct(p)
        }
    }

    /// Squared distances from point `i` to every point.
    pub(crate) fn row(&self, i: usize, out: &mut [f64]) {
        match self {
            Distances::Gram { g } => {
                let gi = g[(i, i)];
                let col = g.column(i);
                out.par_iter_mut().enumerate().for_each(|(j, o)| {
                    *o = (gi + g[(j, j)] - 2.0 * col[j]).max(0.0);
                });
                out[i] = 0.0;
            }
            Distances::Direct(p) => {
                out.par_iter_mut()
                    .enumerate()
                    .for_each(|(j, o)| *o = p.dist_sq(i, j));
            }
        }
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Distances::Gram { g } => {
                if i == j {
                    0.0
                } else {
                    (g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)]).max(0.0)
                }
            }
            Distances::Direct(p) => p.dist_sq(i, j),
        }
    }
}

/// Index of the largest value; lowest index on ties.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub fn approx_ch(p: &PointSet, eps: f64) -> Result<HullSubset> {
    approx_ch_with(p, eps, DistanceMode::Auto)
}

/// Farthest-point coreset: starts from a double-sweep pair and keeps adding
/// the point farthest from the subset until every point lies within
/// `eps * D` of it, `D` being the subset's diameter.
pub fn approx_ch_with(p: &PointSet, eps: f64, mode: DistanceMode) -> Result<HullSubset> {
    let n = p.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 points, got {n}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let dist = Distances::new(p, mode);
    let mut row = vec![0.0; n];
    dist.row(0, &mut row);
    let a = argmax(&row);
    let mut mind = vec![0.0; n];
    dist.row(a, &mut mind);
    let b = argmax(&mind);
    let mut diam_sq = mind[b];
    if diam_sq == 0.0 {
        return Ok(HullSubset {
            indices: vec![a],
            covering_radius_estimate: 0.0,
        });
    }
    let mut indices = vec![a, b];
    dist.row(b, &mut row);
    for (m, &r) in mind.iter_mut().zip(&row) {
        *m = m.min(r);
    }
    let eps_sq = eps * eps;
    loop {
        let far = argmax(&mind);
        if mind[far] <= eps_sq * diam_sq {
            return Ok(HullSubset {
                indices,
                covering_radius_estimate: mind[far].sqrt(),
            });
        }
        dist.row(far, &mut row);
        for &s in &indices {
            diam_sq = diam_sq.max(row[s]);
        }
        indices.push(far);
        mind.par_iter_mut()
            .zip(&row)
            .for_each(|(m, &r)| *m = m.min(r));
    }
}

/// Exhaustive largest squared distance over `subset` (or all points).
/// Returns the lexicographically first maximizing pair of point indices.
pub fn diameter_sq(p: &PointSet, subset: Option<&[usize]>) -> Result<((usize, usize), f64)> {
    let all: Vec<usize>;
    let idx: &[usize] = match subset {
        Some(s) => s,
        None => {
            all = (0..p.len()).collect();
            &all
        }
    };
    if idx.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 points, got {}",
            idx.len()
        )));
    }
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let best = sorted
        .par_iter()
        .enumerate()
        .map(|(a, &i)| {
            let mut best: Option<(f64, (usize, usize))> = None;
            for &j in &sorted[a + 1..] {
                let d = p.dist_sq(i, j);
                if best.is_none_or(|(b, _)| d > b) {
                    best = Some((d, (i, j)));
                }
            }
            best
        })
        .reduce(
            || None,
            |x, y| match (x, y) {
                (Some(a), Some(b)) => Some(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }),
                (a, None) => a,
                (None, b) => b,
            },
        );
    let (d, pair) =
        best.ok_or_else(|| Error::DegenerateInput("need two distinct points".into()))?;
    Ok((pair, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> PointSet {
        PointSet::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_points() {
        let p = pts(&[&[0.0, 0.0], &[3.0, 0.0]]);
        assert_eq!(diameter_sq(&p, None).unwrap(), ((0, 1), 9.0));
    }

    #[test]
    fn colinear() {
        let p = pts(&[&[0.0], &[1.0], &[2.0]]);
        assert_eq!(diameter_sq(&p, None).unwrap(), ((0, 2), 4.0));
    }

    #[test]
    fn identical_points() {
        let p = pts(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let h = approx_ch(&p, 0.1).unwrap();
        assert_eq!(h.indices, vec![0]);
    }

    #[test]
    fn degenerate() {
        let p = pts(&[&[1.0]]);
        assert!(matches!(approx_ch(&p, 0.1), Err(Error::DegenerateInput(_))));
        assert!(matches!(
            diameter_sq(&p, None),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn square_with_center() {
        let p = pts(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[0.0, 1.0],
            &[1.0, 1.0],
            &[0.5, 0.5],
        ]);
        for mode in [DistanceMode::Gram, DistanceMode::Direct] {
            let h = approx_ch_with(&p, 0.1, mode).unwrap();
            for corner in 0..4 {
                assert!(h.indices.contains(&corner));
            }
            let (_, d) = diameter_sq(&p, Some(&h.indices)).unwrap();
            assert!((d - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_shape() {
        assert!(PointSet::new(3, vec![0.0; 4]).is_err());
        assert!(PointSet::from_rows(&[vec![0.0], vec![0.0, 1.0]]).is_err());
    }
}
