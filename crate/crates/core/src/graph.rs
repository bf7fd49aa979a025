//! Graph and group data model, file formats, and structural primitives.
//!
//! Edge-list files hold one `u v` pair per line, whitespace separated; `#`
//! starts a comment. Node ids may be arbitrary non-negative integers and are
//! remapped to dense `0..n` ids in ascending order of the original id. Group
//! files hold `node label` lines with label `S`, `T` or `O`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub type Node = usize;

/// Immutable simple, undirected, connected graph on dense ids `0..n`.
///
/// Edges are stored as `(u, v)` with `u < v`; the incidence view orients every
/// edge from `u` to `v`, i.e. `b_e = e_u - e_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Node, Node)>,
    adj: Vec<Vec<Node>>,
}

impl Graph {
    /// Builds and validates a graph. Duplicate and reversed-duplicate edges
    /// collapse to one edge.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Node, Node)>) -> Result<Self> {
        let g = Self::build(n, edges)?;
        if !g.is_connected() {
            return Err(Error::Validation(format!(
                "graph is disconnected ({} components)",
                g.components().len()
            )));
        }
        Ok(g)
    }

    /// Like [`Graph::new`] but keeps only the largest connected component,
    /// relabelled densely in ascending order of the old ids. Returns the graph
    /// and, for each new id, its old id.
    pub fn largest_component(
        n: usize,
        edges: impl IntoIterator<Item = (Node, Node)>,
    ) -> Result<(Self, Vec<Node>)> {
        let g = Self::build(n, edges)?;
        let mut comps = g.components();
        // Largest first; ties go to the component holding the smallest id.
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let keep = comps.swap_remove(0);
        if keep.len() < 2 {
            return Err(Error::Validation(
                "largest component has fewer than 2 nodes".into(),
            ));
        }
        let mut new_id = vec![usize::MAX; n];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i;
        }
        let edges = g
            .edges
            .iter()
            .filter(|&&(u, _)| new_id[u] != usize::MAX)
            .map(|&(u, v)| (new_id[u], new_id[v]));
        Ok((Self::new(keep.len(), edges)?, keep))
    }

    fn build(n: usize, edges: impl IntoIterator<Item = (Node, Node)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Validation(format!(
                "graph must have at least 2 nodes, got {n}"
            )));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop on node {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        if set.is_empty() {
            return Err(Error::Validation("graph has no edges".into()));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { n, edges, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(Node, Node)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Node) -> &[Node] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Node) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: Node, v: Node) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Number of unordered node pairs that are not edges.
    pub fn non_edge_count(&self) -> usize {
        self.n * (self.n - 1) / 2 - self.m()
    }

    /// All unordered pairs `(u, v)`, `u < v`, that are not edges, in
    /// lexicographic order.
    pub fn non_edges(&self) -> impl Iterator<Item = (Node, Node)> + '_ {
        (0..self.n).flat_map(move |u| {
            let nbrs = &self.adj[u];
            // Neighbours are sorted; walk them alongside the candidate range.
            let start = nbrs.partition_point(|&w| w <= u);
            let mut next = start;
            (u + 1..self.n).filter_map(move |v| {
                if next < nbrs.len() && nbrs[next] == v {
                    next += 1;
                    None
                } else {
                    Some((u, v))
                }
            })
        })
    }

    /// Returns a new graph with the edge `(u, v)` added.
    pub fn with_edge(&self, u: Node, v: Node) -> Result<Self> {
        if u == v || u >= self.n || v >= self.n {
            return Err(Error::InvalidPair(u, v));
        }
        if self.has_edge(u, v) {
            return Err(Error::EdgeExists(u, v));
        }
        let (a, b) = (u.min(v), u.max(v));
        let mut g = self.clone();
        let pos = g.edges.partition_point(|&e| e < (a, b));
        g.edges.insert(pos, (a, b));
        let pa = g.adj[a].partition_point(|&w| w < b);
        g.adj[a].insert(pa, b);
        let pb = g.adj[b].partition_point(|&w| w < a);
        g.adj[b].insert(pb, a);
        Ok(g)
    }

    /// Returns a new graph with all listed edges added.
    pub fn with_edges(&self, extra: &[(Node, Node)]) -> Result<Self> {
        let mut g = self.clone();
        for &(u, v) in extra {
            g = g.with_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(|&d| d != usize::MAX)
    }

    /// Hop distances from `src`; unreachable nodes get `usize::MAX`.
    pub fn bfs_distances(&self, src: Node) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted ascending.
    fn components(&self) -> Vec<Vec<Node>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Dense Laplacian `L = D - A`.
    pub fn laplacian_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut l = nalgebra::DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            l[(u, v)] -= 1.0;
            l[(v, u)] -= 1.0;
            l[(u, u)] += 1.0;
            l[(v, v)] += 1.0;
        }
        l
    }
}

/// `b_uv = e_u - e_v`, stored by its two nonzero positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncidenceVector {
    pub n: usize,
    pub plus: Node,
    pub minus: Node,
}

impl IncidenceVector {
    pub fn to_dense(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.n];
        b[self.plus] = 1.0;
        b[self.minus] = -1.0;
        b
    }

    /// Nonzero entries as `(index, value)`, ascending by index.
    pub fn entries(&self) -> [(Node, f64); 2] {
        if self.plus < self.minus {
            [(self.plus, 1.0), (self.minus, -1.0)]
        } else {
            [(self.minus, -1.0), (self.plus, 1.0)]
        }
    }
}

pub fn incidence_vector(g: &Graph, u: Node, v: Node) -> Result<IncidenceVector> {
    if u == v || u >= g.n() || v >= g.n() {
        return Err(Error::InvalidPair(u, v));
    }
    Ok(IncidenceVector {
        n: g.n(),
        plus: u,
        minus: v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    /// Advantaged.
    S,
    /// Disadvantaged.
    T,
    /// Remainder.
    O,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::S => "S",
            Group::T => "T",
            Group::O => "O",
        }
    }
}

/// Partition of the nodes into advantaged `S`, disadvantaged `T` and an
/// optional remainder `O`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    labels: Vec<Group>,
    s: Vec<Node>,
    t: Vec<Node>,
    o: Vec<Node>,
}

impl GroupAssignment {
    pub fn from_labels(labels: Vec<Group>) -> Result<Self> {
        let mut s = Vec::new();
        let mut t = Vec::new();
        let mut o = Vec::new();
        for (v, g) in labels.iter().enumerate() {
            match g {
                Group::S => s.push(v),
                Group::T => t.push(v),
                Group::O => o.push(v),
            }
        }
        if s.is_empty() {
            return Err(Error::Validation("group S is empty".into()));
        }
        if t.is_empty() {
            return Err(Error::Validation("group T is empty".into()));
        }
        Ok(Self { labels, s, t, o })
    }

    /// Builds an assignment on `n` nodes; nodes in neither set go to `O`.
    pub fn new(n: usize, s: &[Node], t: &[Node]) -> Result<Self> {
        let mut labels = vec![Group::O; n];
        for &v in s {
            if v >= n {
                return Err(Error::Validation(format!("node {v} out of range 0..{n}")));
            }
            labels[v] = Group::S;
        }
        for &v in t {
            if v >= n {
                return Err(Error::Validation(format!("node {v} out of range 0..{n}")));
            }
            if labels[v] == Group::S {
                return Err(Error::Validation(format!("node {v} is in both S and T")));
            }
            labels[v] = Group::T;
        }
        Self::from_labels(labels)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn s(&self) -> &[Node] {
        &self.s
    }

    pub fn t(&self) -> &[Node] {
        &self.t
    }

    pub fn o(&self) -> &[Node] {
        &self.o
    }

    pub fn members(&self, group: Group) -> &[Node] {
        match group {
            Group::S => &self.s,
            Group::T => &self.t,
            Group::O => &self.o,
        }
    }

    pub fn group_of(&self, v: Node) -> Group {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    /// True when `u` and `v` sit in `S` and `T` (either order).
    pub fn is_cross(&self, u: Node, v: Node) -> bool {
        matches!(
            (self.labels[u], self.labels[v]),
            (Group::S, Group::T) | (Group::T, Group::S)
        )
    }

    pub(crate) fn check_against(&self, g: &Graph) -> Result<()> {
        if self.n() != g.n() {
            return Err(Error::Validation(format!(
                "group assignment covers {} nodes, graph has {}",
                self.n(),
                g.n()
            )));
        }
        Ok(())
    }
}

/// Run-level parameters of the greedy algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    /// Fairness weight in `[0, 1]`.
    pub lambda: f64,
    /// Number of edges to add.
    pub k: usize,
    /// Approximation error in `(0, 1)`.
    pub epsilon: f64,
    pub seed: u64,
    /// Adds `lambda * I_O^2` to the objective when `O` is non-empty.
    pub multi_group: bool,
}

impl Hyperparams {
    pub fn new(lambda: f64, k: usize) -> Self {
        Self {
            lambda,
            k,
            epsilon: 0.3,
            seed: 0,
            multi_group: false,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_multi_group(mut self, on: bool) -> Self {
        self.multi_group = on;
        self
    }

    pub fn objective(&self) -> crate::exact::Objective {
        crate::exact::Objective::new(self.lambda).with_multi_group(self.multi_group)
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        let available = g.non_edge_count();
        if self.k > available {
            return Err(Error::BudgetTooLarge {
                k: self.k,
                available,
            });
        }
        Ok(())
    }
}

/// Maps dense ids back to the ids used in the source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    original: Vec<u64>,
    lookup: HashMap<u64, Node>,
}

impl IdMap {
    fn from_sorted(original: Vec<u64>) -> Self {
        let lookup = original
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        Self { original, lookup }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_sorted((0..n as u64).collect())
    }

    pub fn original(&self, v: Node) -> u64 {
        self.original[v]
    }

    pub fn dense(&self, original: u64) -> Option<Node> {
        self.lookup.get(&original).copied()
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    /// `original_id new_id` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, id) in self.original.iter().enumerate() {
            let _ = writeln!(out, "{id} {i}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: IdMap,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Keep only the largest connected component instead of rejecting
    /// disconnected input.
    pub largest_component: bool,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_id(tok: &str, line: usize) -> Result<u64> {
    tok.parse::<u64>().map_err(|_| {
        Error::parse(
            line,
            format!("expected a non-negative integer node id, got {tok:?}"),
        )
    })
}

pub fn parse_edge_list(text: &str, opts: LoadOptions) -> Result<LoadedGraph> {
    let mut raw = Vec::new();
    for (line, toks) in content_lines(text) {
        match toks.len() {
            2 => raw.push((parse_id(toks[0], line)?, parse_id(toks[1], line)?)),
            3 => {
                return Err(Error::Validation(format!(
                    "line {line}: weighted edges are not supported"
                )))
            }
            k => {
                return Err(Error::parse(
                    line,
                    format!("expected \"u v\", found {k} fields"),
                ))
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::Validation("edge list is empty".into()));
    }
    let ids: BTreeSet<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    let ids = IdMap::from_sorted(ids.into_iter().collect());
    let edges: Vec<_> = raw
        .iter()
        .map(|&(a, b)| (ids.lookup[&a], ids.lookup[&b]))
        .collect();
    if opts.largest_component {
        let (graph, kept) = Graph::largest_component(ids.len(), edges)?;
        let ids = IdMap::from_sorted(kept.iter().map(|&v| ids.original[v]).collect());
        Ok(LoadedGraph { graph, ids })
    } else {
        let graph = Graph::new(ids.len(), edges)?;
        Ok(LoadedGraph { graph, ids })
    }
}

pub fn load_graph_with_ids(path: impl AsRef<Path>, opts: LoadOptions) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, opts)
}

/// Loads and validates an edge-list file.
pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    Ok(load_graph_with_ids(path, LoadOptions::default())?.graph)
}

fn parse_label(tok: &str, line: usize) -> Result<Group> {
    match tok {
        "S" | "s" => Ok(Group::S),
        "T" | "t" => Ok(Group::T),
        "O" | "o" => Ok(Group::O),
        _ => Err(Error::parse(line, format!("unknown group label {tok:?}"))),
    }
}

/// Parses a group file; `resolve` maps a file id to a dense node id.
fn parse_groups_with(
    text: &str,
    n: usize,
    resolve: impl Fn(u64) -> Option<Node>,
) -> Result<GroupAssignment> {
    let mut labels = vec![None; n];
    for (line, toks) in content_lines(text) {
        if toks.len() != 2 {
            return Err(Error::parse(
                line,
                format!("expected \"node label\", found {} fields", toks.len()),
            ));
        }
        let id = parse_id(toks[0], line)?;
        let group = parse_label(toks[1], line)?;
        let v = resolve(id).ok_or_else(|| {
            Error::Validation(format!("line {line}: node id {id} is out of range"))
        })?;
        match labels[v] {
            Some(prev) if prev != group => {
                return Err(Error::Validation(format!(
                    "line {line}: node {id} labelled both {} and {}",
                    Group::label(prev),
                    group.label()
                )))
            }
            _ => labels[v] = Some(group),
        }
    }
    GroupAssignment::from_labels(labels.into_iter().map(|l| l.unwrap_or(Group::O)).collect())
}

/// Parses a group file whose ids are dense node ids of `g`.
pub fn parse_groups(text: &str, g: &Graph) -> Result<GroupAssignment> {
    let n = g.n();
    parse_groups_with(text, n, |id| (id < n as u64).then_some(id as Node))
}

/// Parses a group file whose ids are original file ids, translated by `ids`.
pub fn parse_groups_mapped(text: &str, g: &Graph, ids: &IdMap) -> Result<GroupAssignment> {
    parse_groups_with(text, g.n(), |id| ids.dense(id))
}

pub fn load_groups(path: impl AsRef<Path>, g: &Graph) -> Result<GroupAssignment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_groups(&text, g)
}

pub fn load_groups_mapped(
    path: impl AsRef<Path>,
    g: &Graph,
    ids: &IdMap,
) -> Result<GroupAssignment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_groups_mapped(&text, g, ids)
}

pub fn edge_list_text(g: &Graph) -> String {
    let mut out = String::with_capacity(g.m() * 12);
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn groups_text(ga: &GroupAssignment) -> String {
    let mut out = String::with_capacity(ga.n() * 6);
    for (v, g) in ga.labels().iter().enumerate() {
        let _ = writeln!(out, "{v} {}", g.label());
    }
    out
}

pub fn write_edge_list(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, edge_list_text(g)).map_err(|e| Error::io(path, e))
}

pub fn write_groups(path: impl AsRef<Path>, ga: &GroupAssignment) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, groups_text(ga)).map_err(|e| Error::io(path, e))
}

pub fn write_mapping(path: impl AsRef<Path>, ids: &IdMap) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, ids.to_text()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<Graph> {
        parse_edge_list(text, LoadOptions::default()).map(|l| l.graph)
    }

    #[test]
    fn path_graph_loads() {
        let g = load("0 1\n1 2").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn duplicates_collapse() {
        let g = load("0 1\n1 0\n0 1").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let g = load("# header\n\n0 1 # trailing\n  1 2\n").unwrap();
        assert_eq!(g.m(), 2);
    }

    #[test]
    fn disconnected_is_rejected() {
        assert!(matches!(load("0 1\n2 3"), Err(Error::Validation(_))));
    }

    #[test]
    fn largest_component_extraction() {
        let l = parse_edge_list(
            "10 11\n20 21\n21 22\n",
            LoadOptions {
                largest_component: true,
            },
        )
        .unwrap();
        assert_eq!((l.graph.n(), l.graph.m()), (3, 2));
        assert_eq!(l.ids.original(0), 20);
        assert_eq!(l.ids.dense(22), Some(2));
        assert_eq!(l.ids.dense(10), None);
    }

    #[test]
    fn bad_lines() {
        assert!(matches!(
            load("0 1\n1 x"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(load("0 1 2.5"), Err(Error::Validation(_))));
        assert!(matches!(load("0 1 2 3"), Err(Error::Parse { .. })));
        assert!(matches!(load("1 1"), Err(Error::Validation(_))));
        assert!(matches!(load("# nothing\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn sparse_ids_are_remapped_in_order() {
        let l = parse_edge_list("100 7\n7 42\n", LoadOptions::default()).unwrap();
        assert_eq!(l.graph.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(l.ids.to_text(), "7 0\n42 1\n100 2\n");
    }

    #[test]
    fn groups_from_file() {
        let g = load("0 1\n1 2").unwrap();
        let ga = parse_groups("0 S\n1 T", &g).unwrap();
        assert_eq!(ga.s(), &[0]);
        assert_eq!(ga.t(), &[1]);
        assert_eq!(ga.o(), &[2]);
        assert!(matches!(
            parse_groups("0 S\n1 S", &g),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse_groups("0 S\n1 T\n99 T", &g),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse_groups("0 S\n1 X", &g),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_groups("0 S\n0 T\n1 T", &g),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn mapped_groups_use_original_ids() {
        let l = parse_edge_list("100 7\n7 42\n", LoadOptions::default()).unwrap();
        let ga = parse_groups_mapped("100 S\n42 T\n", &l.graph, &l.ids).unwrap();
        assert_eq!(ga.s(), &[2]);
        assert_eq!(ga.t(), &[1]);
        assert!(parse_groups_mapped("0 S\n42 T\n", &l.graph, &l.ids).is_err());
    }

    #[test]
    fn non_edges_examples() {
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.non_edges().collect::<Vec<_>>(), vec![(0, 2)]);
        let k3 = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(k3.non_edges().count(), 0);
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(
            star.non_edges().collect::<Vec<_>>(),
            vec![(1, 2), (1, 3), (2, 3)]
        );
        assert_eq!(star.non_edge_count(), 3);
    }

    #[test]
    fn incidence_examples() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            incidence_vector(&g, 0, 1).unwrap().to_dense(),
            vec![1.0, -1.0, 0.0]
        );
        assert_eq!(
            incidence_vector(&g, 2, 0).unwrap().to_dense(),
            vec![-1.0, 0.0, 1.0]
        );
        assert!(matches!(
            incidence_vector(&g, 1, 1),
            Err(Error::InvalidPair(1, 1))
        ));
    }

    #[test]
    fn with_edge_keeps_order_and_rejects_duplicates() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let h = g.with_edge(3, 0).unwrap();
        assert_eq!(h.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert_eq!(h.neighbors(0), &[1, 3]);
        assert!(matches!(h.with_edge(0, 3), Err(Error::EdgeExists(0, 3))));
        assert!(matches!(h.with_edge(2, 2), Err(Error::InvalidPair(2, 2))));
    }

    #[test]
    fn hyperparams_validation() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(Hyperparams::new(0.5, 1).validate(&g).is_ok());
        assert!(matches!(
            Hyperparams::new(0.5, 2).validate(&g),
            Err(Error::BudgetTooLarge { k: 2, available: 1 })
        ));
        assert!(Hyperparams::new(1.5, 1).validate(&g).is_err());
        assert!(Hyperparams::new(0.5, 1)
            .with_epsilon(1.0)
            .validate(&g)
            .is_err());
    }
}
