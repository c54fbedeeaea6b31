//! Graph transforms: opposite graph, delay graph `D_n(E)` and the higher
//! duals `E(p, q)`.
//!
//! Every output keeps a label per vertex and edge pointing back at the
//! input graph, and output ids are canonical strings built from input ids.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::{EdgeId, Graph, GraphError, Path, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum VertexLabel {
    Vertex(VertexId),
    Path(Path),
    /// `w_{e,j}` in a delay graph.
    Delay {
        edge: EdgeId,
        j: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeLabel {
    Edge(EdgeId),
    Opposite(EdgeId),
    Path(Path),
    /// `f_{e,j}` in a delay graph.
    Delay {
        edge: EdgeId,
        j: usize,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    Opposite,
    Delay(usize),
    Dual {
        p: usize,
        q: usize,
    },
    /// The loop graph modelling a fibre of `SG[0]E`.
    Loops {
        interior: bool,
    },
}

#[derive(Clone, Debug)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub construction: Construction,
    vertex_labels: Vec<VertexLabel>,
    edge_labels: Vec<EdgeLabel>,
    vertex_lookup: BTreeMap<VertexLabel, VertexId>,
    edge_lookup: BTreeMap<EdgeLabel, EdgeId>,
}

impl LabeledGraph {
    pub(crate) fn new(construction: Construction) -> Self {
        LabeledGraph {
            graph: Graph::empty(),
            construction,
            vertex_labels: Vec::new(),
            edge_labels: Vec::new(),
            vertex_lookup: BTreeMap::new(),
            edge_lookup: BTreeMap::new(),
        }
    }

    pub(crate) fn add_vertex(
        &mut self,
        name: String,
        label: VertexLabel,
    ) -> Result<VertexId, GraphError> {
        let id = self.graph.push_vertex(name)?;
        self.vertex_lookup.insert(label.clone(), id);
        self.vertex_labels.push(label);
        Ok(id)
    }

    pub(crate) fn add_edge(
        &mut self,
        name: String,
        label: EdgeLabel,
        s: &VertexLabel,
        r: &VertexLabel,
    ) -> Result<EdgeId, GraphError> {
        let s = self.vertex_lookup[s];
        let r = self.vertex_lookup[r];
        let id = self.graph.push_edge(name, s, r)?;
        self.edge_lookup.insert(label.clone(), id);
        self.edge_labels.push(label);
        Ok(id)
    }

    pub fn vertex_label(&self, v: VertexId) -> &VertexLabel {
        &self.vertex_labels[v.0]
    }

    pub fn edge_label(&self, e: EdgeId) -> &EdgeLabel {
        &self.edge_labels[e.0]
    }

    pub fn vertex_for(&self, label: &VertexLabel) -> Option<VertexId> {
        self.vertex_lookup.get(label).copied()
    }

    pub fn edge_for(&self, label: &EdgeLabel) -> Option<EdgeId> {
        self.edge_lookup.get(label).copied()
    }

    /// Drops provenance.
    pub fn into_graph(self) -> Graph {
        self.graph
    }
}

/// Canonical id of a path: `[e1,e2,…]`, or the vertex id at length zero.
pub fn path_id(g: &Graph, p: &Path) -> String {
    if p.is_empty() {
        return String::from(g.vertex_name(p.range()));
    }
    format!("[{}]", p.display(g))
}

/// `E^op`: same vertices, every edge reversed. Edge ids become `op(e)`.
pub fn opposite(g: &Graph) -> LabeledGraph {
    let mut out = LabeledGraph::new(Construction::Opposite);
    for v in g.vertices() {
        out.add_vertex(String::from(g.vertex_name(v)), VertexLabel::Vertex(v))
            .unwrap();
    }
    for e in g.edges() {
        out.add_edge(
            format!("op({})", g.edge_name(e)),
            EdgeLabel::Opposite(e),
            &VertexLabel::Vertex(g.r(e)),
            &VertexLabel::Vertex(g.s(e)),
        )
        .unwrap();
    }
    out
}

/// `μ^op` in the opposite graph `op`, which shares vertex and edge indices
/// with the graph of `μ`.
pub fn opposite_path(op: &Graph, mu: &Path) -> Path {
    if mu.is_empty() {
        return mu.clone();
    }
    let edges: Vec<EdgeId> = mu.edges().iter().rev().copied().collect();
    Path::from_edges(op, edges).expect("reversed path composes in the opposite graph")
}

/// The delay graph `D_n(E)`: each edge `e` is subdivided into
/// `f_{e,1} … f_{e,n}` through new vertices `w_{e,1} … w_{e,n-1}`.
pub fn delay(g: &Graph, n: usize) -> Result<LabeledGraph, TransformError> {
    if n == 0 {
        return Err(TransformError::InvalidParameter(String::from(
            "delay requires n >= 1",
        )));
    }
    let mut out = LabeledGraph::new(Construction::Delay(n));
    for v in g.vertices() {
        out.add_vertex(String::from(g.vertex_name(v)), VertexLabel::Vertex(v))?;
    }
    for e in g.edges() {
        for j in 1..n {
            out.add_vertex(
                format!("w({},{})", g.edge_name(e), j),
                VertexLabel::Delay { edge: e, j },
            )?;
        }
    }
    for e in g.edges() {
        for j in 1..=n {
            let r = if j >= 2 {
                VertexLabel::Delay { edge: e, j: j - 1 }
            } else {
                VertexLabel::Vertex(g.r(e))
            };
            let s = if j < n {
                VertexLabel::Delay { edge: e, j }
            } else {
                VertexLabel::Vertex(g.s(e))
            };
            out.add_edge(
                format!("f({},{})", g.edge_name(e), j),
                EdgeLabel::Delay { edge: e, j },
                &s,
                &r,
            )?;
        }
    }
    Ok(out)
}

/// `D_n^*(e₁…e_k) = f_{e₁,1} … f_{e₁,n} … f_{e_k,n}`; vertices map to
/// themselves.
pub fn delay_embed_path(g: &Graph, d: &LabeledGraph, mu: &Path) -> Path {
    let n = match d.construction {
        Construction::Delay(n) => n,
        _ => panic!("delay_embed_path needs a delay graph"),
    };
    if mu.is_empty() {
        return Path::vertex(
            d.vertex_for(&VertexLabel::Vertex(mu.range()))
                .expect("vertex kept"),
        );
    }
    let mut edges = Vec::with_capacity(n * mu.len());
    for &e in mu.edges() {
        for j in 1..=n {
            edges.push(
                d.edge_for(&EdgeLabel::Delay { edge: e, j })
                    .expect("delay edge"),
            );
        }
    }
    let _ = g;
    Path::from_edges(&d.graph, edges).expect("delayed path composes")
}

/// `E(p, q)` for `0 ≤ p < q`: vertices `E^p`, edges `E^q`, with `r(μ)` the
/// first `p` edges of `μ` and `s(μ)` the last `p`.
pub fn higher_dual(g: &Graph, p: usize, q: usize) -> Result<LabeledGraph, TransformError> {
    if p >= q {
        return Err(TransformError::InvalidParameter(format!(
            "higher dual needs p < q, got p={p}, q={q}"
        )));
    }
    let mut out = LabeledGraph::new(Construction::Dual { p, q });
    let vlabel = |mu: Path| {
        if p == 0 {
            VertexLabel::Vertex(mu.range())
        } else {
            VertexLabel::Path(mu)
        }
    };
    for mu in g.enumerate_paths(p) {
        let name = path_id(g, &mu);
        out.add_vertex(name, vlabel(mu))?;
    }
    for mu in g.enumerate_paths(q) {
        let r = vlabel(mu.sub(g, 0, p));
        let s = vlabel(mu.sub(g, q - p, q));
        out.add_edge(path_id(g, &mu), EdgeLabel::Path(mu), &s, &r)?;
    }
    Ok(out)
}

/// The higher power graph `E(0, m)`.
pub fn higher_power(g: &Graph, m: usize) -> Result<LabeledGraph, TransformError> {
    if m == 0 {
        return Err(TransformError::InvalidParameter(String::from(
            "higher power needs m >= 1",
        )));
    }
    higher_dual(g, 0, m)
}

/// Fibre graph of `SG[0]E`: one loop per edge at interior times, one loop
/// per vertex at lattice times.
pub(crate) fn loop_graph(g: &Graph, interior: bool) -> LabeledGraph {
    let mut out = LabeledGraph::new(Construction::Loops { interior });
    if interior {
        for e in g.edges() {
            let mu = Path::edge(g, e);
            let name = path_id(g, &mu);
            out.add_vertex(name.clone(), VertexLabel::Path(mu.clone()))
                .unwrap();
            let lbl = VertexLabel::Path(mu.clone());
            out.add_edge(format!("loop{name}"), EdgeLabel::Path(mu), &lbl, &lbl)
                .unwrap();
        }
    } else {
        for v in g.vertices() {
            let mu = Path::vertex(v);
            let lbl = VertexLabel::Vertex(v);
            out.add_vertex(String::from(g.vertex_name(v)), lbl.clone())
                .unwrap();
            out.add_edge(
                format!("loop({})", g.vertex_name(v)),
                EdgeLabel::Path(mu),
                &lbl,
                &lbl,
            )
            .unwrap();
        }
    }
    out
}

/// Label-preserving check that two graphs are equal up to renaming ids,
/// given explicit vertex and edge bijections.
pub fn is_isomorphism(a: &Graph, b: &Graph, vmap: &[VertexId], emap: &[EdgeId]) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    if vmap.len() != a.vertex_count() || emap.len() != a.edge_count() {
        return false;
    }
    let mut vs: Vec<VertexId> = vmap.to_vec();
    vs.sort();
    vs.dedup();
    let mut es: Vec<EdgeId> = emap.to_vec();
    es.sort();
    es.dedup();
    if vs.len() != vmap.len() || es.len() != emap.len() {
        return false;
    }
    a.edges().all(|e| {
        let f = emap[e.0];
        b.r(f) == vmap[a.r(e).0] && b.s(f) == vmap[a.s(e).0]
    })
}
