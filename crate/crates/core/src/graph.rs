//! Finite directed graphs `E = (E⁰, E¹, r, s)`, paths and integer matrices.
//!
//! An edge `e` is drawn from `s(e)` to `r(e)`. Paths compose right to left:
//! `μ = μ₁μ₂…μₙ` requires `s(μᵢ) = r(μᵢ₊₁)`, with `r(μ) = r(μ₁)` and
//! `s(μ) = s(μₙ)`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` refers to unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("edges `{0}` and `{1}` are not composable")]
    NotComposable(String, String),
    #[error("empty edge list: use Path::vertex for length-zero paths")]
    EmptyPath,
    #[error("index {0} out of range")]
    OutOfRange(usize),
    #[error("graph has sinks: {0:?}")]
    HasSinks(Vec<String>),
    #[error("graph has sources: {0:?}")]
    HasSources(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
    range: Vec<VertexId>,
    source: Vec<VertexId>,
    vertex_index: BTreeMap<String, VertexId>,
    edge_index: BTreeMap<String, EdgeId>,
    // vE¹ and E¹v, in declared edge order
    incoming: Vec<Vec<EdgeId>>,
    outgoing: Vec<Vec<EdgeId>>,
}

impl Graph {
    /// Builds a graph from vertex ids and `(edge id, src, dst)` triples,
    /// where `src = s(e)` and `dst = r(e)`.
    pub fn new<V, E, S1, S2, S3>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = S1>,
        E: IntoIterator<Item = (S2, S3, S3)>,
        S1: Into<String>,
        S2: Into<String>,
        S3: AsRef<str>,
    {
        let mut g = Graph {
            vertex_names: Vec::new(),
            edge_names: Vec::new(),
            range: Vec::new(),
            source: Vec::new(),
            vertex_index: BTreeMap::new(),
            edge_index: BTreeMap::new(),
            incoming: Vec::new(),
            outgoing: Vec::new(),
        };
        for v in vertices {
            g.push_vertex(v.into())?;
        }
        for (id, src, dst) in edges {
            let id = id.into();
            let s = g.lookup_for_edge(&id, src.as_ref())?;
            let r = g.lookup_for_edge(&id, dst.as_ref())?;
            g.push_edge(id, s, r)?;
        }
        Ok(g)
    }

    pub(crate) fn empty() -> Self {
        Graph::new::<_, _, String, String, String>(Vec::new(), Vec::new()).unwrap()
    }

    pub(crate) fn push_vertex(&mut self, name: String) -> Result<VertexId, GraphError> {
        if self.vertex_index.contains_key(&name) {
            return Err(GraphError::DuplicateVertex(name));
        }
        let id = VertexId(self.vertex_names.len());
        self.vertex_index.insert(name.clone(), id);
        self.vertex_names.push(name);
        self.incoming.push(Vec::new());
        self.outgoing.push(Vec::new());
        Ok(id)
    }

    pub(crate) fn push_edge(
        &mut self,
        name: String,
        s: VertexId,
        r: VertexId,
    ) -> Result<EdgeId, GraphError> {
        if self.edge_index.contains_key(&name) {
            return Err(GraphError::DuplicateEdge(name));
        }
        let id = EdgeId(self.edge_names.len());
        self.edge_index.insert(name.clone(), id);
        self.edge_names.push(name);
        self.source.push(s);
        self.range.push(r);
        self.incoming[r.0].push(id);
        self.outgoing[s.0].push(id);
        Ok(id)
    }

    fn lookup_for_edge(&self, edge: &str, v: &str) -> Result<VertexId, GraphError> {
        self.vertex_index
            .get(v)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex {
                edge: edge.to_string(),
                vertex: v.to_string(),
            })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edge_count()).map(EdgeId)
    }

    pub fn r(&self, e: EdgeId) -> VertexId {
        self.range[e.0]
    }

    pub fn s(&self, e: EdgeId) -> VertexId {
        self.source[e.0]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edge_names[e.0]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    /// `vE¹`: edges with range `v`.
    pub fn edges_into(&self, v: VertexId) -> &[EdgeId] {
        &self.incoming[v.0]
    }

    /// `E¹v`: edges with source `v`.
    pub fn edges_from(&self, v: VertexId) -> &[EdgeId] {
        &self.outgoing[v.0]
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.outgoing[v.0].is_empty()
    }

    pub fn is_source(&self, v: VertexId) -> bool {
        self.incoming[v.0].is_empty()
    }

    pub fn sinks(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.is_sink(v)).collect()
    }

    pub fn sources(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.is_source(v)).collect()
    }

    pub fn require_no_sinks(&self) -> Result<(), GraphError> {
        let sinks = self.sinks();
        if sinks.is_empty() {
            Ok(())
        } else {
            Err(GraphError::HasSinks(
                sinks
                    .iter()
                    .map(|&v| self.vertex_name(v).to_string())
                    .collect(),
            ))
        }
    }

    pub fn require_no_sources(&self) -> Result<(), GraphError> {
        let sources = self.sources();
        if sources.is_empty() {
            Ok(())
        } else {
            Err(GraphError::HasSources(
                sources
                    .iter()
                    .map(|&v| self.vertex_name(v).to_string())
                    .collect(),
            ))
        }
    }

    /// `A(v, w) = |vE¹w|`.
    pub fn adjacency_matrix(&self) -> IntMatrix {
        let n = self.vertex_count();
        let mut a = IntMatrix::zeros(n, n);
        for e in self.edges() {
            let (r, s) = (self.r(e).0, self.s(e).0);
            let x = a.get(r, s) + BigInt::one();
            a.set(r, s, x);
        }
        a
    }

    /// All paths of length `n` in lexicographic order on edge indices.
    /// Length zero yields the vertices.
    pub fn enumerate_paths(&self, n: usize) -> Vec<Path> {
        let mut layer: Vec<Path> = self.vertices().map(Path::vertex).collect();
        if n == 0 {
            return layer;
        }
        layer = self.edges().map(|e| Path::edge(self, e)).collect();
        for _ in 1..n {
            let mut next = Vec::new();
            for p in &layer {
                for &e in self.edges_into(p.source(self)) {
                    let mut q = p.clone();
                    q.edges.push(e);
                    next.push(q);
                }
            }
            next.sort();
            layer = next;
        }
        layer
    }

    /// Paths of length at most `n`, ordered by length then lexicographically.
    pub fn paths_up_to(&self, n: usize) -> Vec<Path> {
        (0..=n).flat_map(|k| self.enumerate_paths(k)).collect()
    }

    /// Paths `μ` of length `n` with `s(μ) = v`, built by extending on the left.
    pub fn paths_with_source(&self, v: VertexId, n: usize) -> Vec<Path> {
        self.enumerate_paths(n)
            .into_iter()
            .filter(|p| p.source(self) == v)
            .collect()
    }

    fn reach_from(&self, v: VertexId) -> BTreeSet<VertexId> {
        // vertices w with a nonempty path from v to w, i.e. wE*v nonempty
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<VertexId> = VecDeque::new();
        for &e in self.edges_from(v) {
            if seen.insert(self.r(e)) {
                queue.push_back(self.r(e));
            }
        }
        while let Some(u) = queue.pop_front() {
            for &e in self.edges_from(u) {
                if seen.insert(self.r(e)) {
                    queue.push_back(self.r(e));
                }
            }
        }
        seen
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.vertex_count();
        n > 0 && self.vertices().all(|v| self.reach_from(v).len() == n)
    }

    /// gcd of cycle lengths; defined for strongly connected graphs.
    pub fn period(&self) -> Option<u64> {
        if !self.is_strongly_connected() {
            return None;
        }
        let n = self.vertex_count();
        let mut level: Vec<Option<i64>> = vec![None; n];
        level[0] = Some(0);
        let mut queue = VecDeque::from([VertexId(0)]);
        while let Some(u) = queue.pop_front() {
            let lu = level[u.0].unwrap();
            for &e in self.edges_from(u) {
                let w = self.r(e);
                if level[w.0].is_none() {
                    level[w.0] = Some(lu + 1);
                    queue.push_back(w);
                }
            }
        }
        let mut d: i64 = 0;
        for e in self.edges() {
            let diff = level[self.s(e).0].unwrap() + 1 - level[self.r(e).0].unwrap();
            d = d.gcd(&diff);
        }
        Some(d.unsigned_abs())
    }

    /// A single cycle through every vertex, each vertex meeting exactly one
    /// edge in and one edge out.
    pub fn is_simple_cycle(&self) -> bool {
        self.vertex_count() == self.edge_count()
            && self.is_strongly_connected()
            && self
                .vertices()
                .all(|v| self.edges_into(v).len() == 1 && self.edges_from(v).len() == 1)
    }

    /// A cycle `μ` has an entrance when `|r(μᵢ)E¹| ≥ 2` for some `i`.
    pub fn cycle_has_entrance(&self, mu: &Path) -> bool {
        mu.edges
            .iter()
            .any(|&e| self.edges_into(self.r(e)).len() >= 2)
    }

    /// Every cycle has an entrance.
    pub fn satisfies_condition_l(&self) -> bool {
        // A cycle without entrance is traced by following the unique
        // incoming edge from a vertex of in-degree one back to itself.
        for v in self.vertices() {
            let mut u = v;
            for _ in 0..self.vertex_count() {
                let into = self.edges_into(u);
                if into.len() != 1 {
                    break;
                }
                u = self.s(into[0]);
                if u == v {
                    return false;
                }
            }
        }
        true
    }

    /// Smallest hereditary set containing `seeds`: closed under `v ↦ s(e)`
    /// for `e ∈ vE¹`.
    pub fn hereditary_closure(&self, seeds: &[VertexId]) -> BTreeSet<VertexId> {
        let mut seen: BTreeSet<VertexId> = seeds.iter().copied().collect();
        let mut queue: VecDeque<VertexId> = seeds.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            for &e in self.edges_into(u) {
                if seen.insert(self.s(e)) {
                    queue.push_back(self.s(e));
                }
            }
        }
        seen
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            sinks: self.sinks(),
            sources: self.sources(),
            strongly_connected: self.is_strongly_connected(),
            period: self.period(),
            simple_cycle: self.is_simple_cycle(),
            condition_l: self.satisfies_condition_l(),
        }
    }

    pub fn path_from_names(&self, names: &[&str]) -> Result<Path, GraphError> {
        let edges = names
            .iter()
            .map(|n| {
                self.edge_by_name(n)
                    .ok_or_else(|| GraphError::UnknownEdge(n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Path::from_edges(self, edges)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics {
    pub sinks: Vec<VertexId>,
    pub sources: Vec<VertexId>,
    pub strongly_connected: bool,
    pub period: Option<u64>,
    pub simple_cycle: bool,
    pub condition_l: bool,
}

/// A finite path. Length-zero paths are vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    range: VertexId,
    edges: Vec<EdgeId>,
}

impl Path {
    pub fn vertex(v: VertexId) -> Self {
        Path {
            range: v,
            edges: Vec::new(),
        }
    }

    pub fn edge(g: &Graph, e: EdgeId) -> Self {
        Path {
            range: g.r(e),
            edges: vec![e],
        }
    }

    pub fn from_edges(g: &Graph, edges: Vec<EdgeId>) -> Result<Self, GraphError> {
        let first = *edges.first().ok_or(GraphError::EmptyPath)?;
        for &e in &edges {
            if e.0 >= g.edge_count() {
                return Err(GraphError::OutOfRange(e.0));
            }
        }
        for w in edges.windows(2) {
            if g.s(w[0]) != g.r(w[1]) {
                return Err(GraphError::NotComposable(
                    g.edge_name(w[0]).to_string(),
                    g.edge_name(w[1]).to_string(),
                ));
            }
        }
        Ok(Path {
            range: g.r(first),
            edges,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn range(&self) -> VertexId {
        self.range
    }

    pub fn source(&self, g: &Graph) -> VertexId {
        match self.edges.last() {
            Some(&e) => g.s(e),
            None => self.range,
        }
    }

    /// `μν`, defined when `s(μ) = r(ν)`.
    pub fn concat(&self, g: &Graph, other: &Path) -> Option<Path> {
        if self.source(g) != other.range {
            return None;
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Some(Path {
            range: self.range,
            edges,
        })
    }

    /// `μ(a, b) = μ_{a+1} … μ_b`; when `a = b` this is the vertex at
    /// position `a`.
    pub fn sub(&self, g: &Graph, a: usize, b: usize) -> Path {
        assert!(a <= b && b <= self.len(), "subpath bounds");
        if a == b {
            return Path::vertex(self.vertex_at(g, a));
        }
        Path {
            range: g.r(self.edges[a]),
            edges: self.edges[a..b].to_vec(),
        }
    }

    /// The vertex reached after `k` edges: `r(μ_{k+1})`, or `s(μ)` at the end.
    pub fn vertex_at(&self, g: &Graph, k: usize) -> VertexId {
        if k == 0 {
            self.range
        } else {
            g.s(self.edges[k - 1])
        }
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.range == prefix.range && self.edges.starts_with(&prefix.edges)
    }

    /// Is this a cycle, `r(μ) = s(μ)` with `|μ| ≥ 1`.
    pub fn is_cycle(&self, g: &Graph) -> bool {
        !self.is_empty() && self.range == self.source(g)
    }

    pub fn display<'a>(&'a self, g: &'a Graph) -> PathDisplay<'a> {
        PathDisplay {
            path: self,
            graph: g,
        }
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.edges.cmp(&other.edges))
            .then_with(|| self.range.cmp(&other.range))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Comma-separated edge ids, or the vertex id for a length-zero path.
pub struct PathDisplay<'a> {
    path: &'a Path,
    graph: &'a Graph,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return f.write_str(self.graph.vertex_name(self.path.range));
        }
        for (i, &e) in self.path.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(self.graph.edge_name(e))?;
        }
        Ok(())
    }
}

/// Dense integer matrix with arbitrary-precision entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let x = out.get(i, j) + a * b;
                        out.set(i, j, x);
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &IntMatrix) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "dimension mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> BigInt {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_default()
    }
}
