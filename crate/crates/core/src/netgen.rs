//! Preferential attachment with homophily and a minority group.
//!
//! A newcomer `i` links to an existing node `j` with weight `h * d_j` if both
//! share a group and `(1 - h) * d_j` otherwise. The minority group is `T`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Group, GroupAssignment, Node};
use crate::rng::{self, tag};

pub const DEFAULT_M_ATTACH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BAhParams {
    pub n: usize,
    pub m_attach: usize,
    /// Probability that a node joins the minority.
    pub f_a: f64,
    pub h: f64,
    pub seed: u64,
}

impl BAhParams {
    pub fn new(n: usize, f_a: f64, h: f64, seed: u64) -> Self {
        Self {
            n,
            m_attach: DEFAULT_M_ATTACH,
            f_a,
            h,
            seed,
        }
    }

    pub fn with_m_attach(mut self, m: usize) -> Self {
        self.m_attach = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_attach == 0 {
            return Err(Error::Validation("m_attach must be at least 1".into()));
        }
        if self.n <= self.m_attach {
            return Err(Error::Validation(format!(
                "n = {} must exceed m_attach = {}",
                self.n, self.m_attach
            )));
        }
        if !(0.0..0.5).contains(&self.f_a) {
            return Err(Error::Validation(format!(
                "minority fraction must lie in [0, 0.5), got {}",
                self.f_a
            )));
        }
        if !(0.0..=1.0).contains(&self.h) {
            return Err(Error::Validation(format!(
                "homophily must lie in [0, 1], got {}",
                self.h
            )));
        }
        Ok(())
    }
}

/// Fenwick tree over integer weights.
struct Fenwick {
    tree: Vec<u64>,
    total: u64,
    count: usize,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
            total: 0,
            count: 0,
        }
    }

    fn add(&mut self, i: usize, w: u64) {
        self.total += w;
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] += w;
            k += k & k.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum exceeds `x`.
    fn find(&self, mut x: u64) -> usize {
        let mut pos = 0;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= x {
                pos = next;
                x -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }

    fn sample(&self, r: &mut ChaCha8Rng) -> usize {
        self.find(r.random_range(0..self.total))
    }
}

fn group_index(g: Group) -> usize {
    match g {
        Group::S => 0,
        _ => 1,
    }
}

/// Generates a connected simple graph with `S` (majority) and `T` (minority)
/// labels.
pub fn generate_bah(p: &BAhParams) -> Result<(Graph, GroupAssignment)> {
    p.validate()?;
    let mut r = rng::stream(p.seed, &[tag::NETGEN]);
    let m = p.m_attach;
    let mut labels = Vec::with_capacity(p.n);
    let draw = |r: &mut ChaCha8Rng| {
        if r.random_bool(p.f_a) {
            Group::T
        } else {
            Group::S
        }
    };

    // Clique core with both groups present.
    let core = m + 1;
    for _ in 0..core {
        labels.push(draw(&mut r));
    }
    if !labels.contains(&Group::T) {
        labels[core - 1] = Group::T;
    }
    if !labels.contains(&Group::S) {
        labels[0] = Group::S;
    }
    let mut edges: Vec<(Node, Node)> = Vec::with_capacity(core * m / 2 + (p.n - core) * m);
    for u in 0..core {
        for v in u + 1..core {
            edges.push((u, v));
        }
    }
    let mut trees = [Fenwick::new(p.n), Fenwick::new(p.n)];
    for (v, &l) in labels.iter().enumerate() {
        let t = &mut trees[group_index(l)];
        t.add(v, m as u64);
        t.count += 1;
    }

    let mut chosen: Vec<Node> = Vec::with_capacity(m);
    for i in core..p.n {
        let gi = draw(&mut r);
        let same = group_index(gi);
        let other = 1 - same;
        let w_same = p.h * trees[same].total as f64;
        let w_other = (1.0 - p.h) * trees[other].total as f64;
        let positive = if w_same > 0.0 { trees[same].count } else { 0 }
            + if w_other > 0.0 { trees[other].count } else { 0 };
        chosen.clear();
        if positive < m {
            // Too few reachable targets: take all of them, then fill by plain
            // degree preference from the rest.
            log::debug!("node {i}: only {positive} positive-weight targets, filling");
            for (v, &l) in labels.iter().enumerate() {
                let g = group_index(l);
                let w = if g == same { w_same } else { w_other };
                if w > 0.0 {
                    chosen.push(v);
                }
            }
            while chosen.len() < m {
                let t = if r.random_range(0..trees[0].total + trees[1].total) < trees[0].total {
                    0
                } else {
                    1
                };
                let v = trees[t].sample(&mut r);
                if !chosen.contains(&v) {
                    chosen.push(v);
                }
            }
        } else {
            let p_same = w_same / (w_same + w_other);
            while chosen.len() < m {
                let t = if r.random_bool(p_same) { same } else { other };
                let v = trees[t].sample(&mut r);
                if !chosen.contains(&v) {
                    chosen.push(v);
                }
            }
        }
        for &v in &chosen {
            edges.push((v, i));
            trees[group_index(labels[v])].add(v, 1);
        }
        labels.push(gi);
        let t = &mut trees[same];
        t.add(i, m as u64);
        t.count += 1;
    }
    let g = Graph::new(p.n, edges)?;
    let ga = GroupAssignment::from_labels(labels)?;
    Ok((g, ga))
}
