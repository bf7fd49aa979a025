//! Independent dense oracles and instance generators shared by the
//! integration tests.
#![allow(dead_code)]

use fiam::graph::{Graph, Group, GroupAssignment, Node};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        l[(u, u)] += 1.0;
        l[(v, v)] += 1.0;
        l[(u, v)] -= 1.0;
        l[(v, u)] -= 1.0;
    }
    l
}

/// `L^+` through an LU inverse of `L + J/n`.
pub fn pinv(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let j = DMatrix::from_element(n, n, 1.0 / n as f64);
    (laplacian(g) + &j)
        .lu()
        .try_inverse()
        .expect("connected graph")
        - j
}

/// Effective resistance by grounding `v` and inverting the reduced Laplacian.
pub fn grounded_resistance(g: &Graph, u: Node, v: Node) -> f64 {
    if u == v {
        return 0.0;
    }
    let l = laplacian(g);
    let keep: Vec<usize> = (0..g.n()).filter(|&x| x != v).collect();
    let red = DMatrix::from_fn(keep.len(), keep.len(), |a, b| l[(keep[a], keep[b])]);
    let inv = red.lu().try_inverse().expect("connected graph");
    let iu = keep.iter().position(|&x| x == u).unwrap();
    inv[(iu, iu)]
}

/// Group access `(n/|X|) sum_{v in X} L+_vv + tr L+` from a dense `L^+`.
pub fn access(p: &DMatrix<f64>, group: &[Node]) -> f64 {
    let n = p.nrows() as f64;
    let tr = p.trace();
    n / group.len() as f64 * group.iter().map(|&v| p[(v, v)]).sum::<f64>() + tr
}

pub fn objective(g: &Graph, ga: &GroupAssignment, lambda: f64) -> f64 {
    let p = pinv(g);
    let (s, t) = (access(&p, ga.s()), access(&p, ga.t()));
    (1.0 - lambda) * p.trace() + lambda * (s * s + t * t)
}

/// Connected graph: random tree plus each other pair with probability `p`.
pub fn random_connected(r: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut edges: Vec<(Node, Node)> = (1..n).map(|v| (r.random_range(0..v), v)).collect();
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random `S`/`T` split with both groups non-empty.
pub fn random_groups(r: &mut impl Rng, n: usize) -> GroupAssignment {
    let mut labels: Vec<Group> = (0..n)
        .map(|_| {
            if r.random_bool(0.4) {
                Group::T
            } else {
                Group::S
            }
        })
        .collect();
    labels[0] = Group::S;
    labels[n - 1] = Group::T;
    GroupAssignment::from_labels(labels).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let mut e = vec![];
    for u in 0..n {
        for v in u + 1..n {
            e.push((u, v));
        }
    }
    Graph::new(n, e).unwrap()
}

pub fn path(n: usize) -> Graph {
    Graph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
}
