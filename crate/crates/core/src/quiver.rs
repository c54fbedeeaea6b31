//! The suspension quivers `SG[l]E`.
//!
//! A point of the vertex space `SG{E}⁰` is a base vertex or an interior point
//! `[e, t]` with `0 < t < 1`. An edge of `SG[l]E` is a class of pairs
//! `(μ, s)` with `0 ≤ s` and `s + l ≤ |μ|`, where two pairs agree when their
//! fractional times agree and their windows `μ(⌊s⌋, ⌈s + l⌉)` agree. The
//! canonical representative keeps only the window.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::graph::{EdgeId, Graph, GraphError, Path, VertexId};
use crate::scalar::{ceil, floor, frac, Rat};
use crate::transform::{
    delay, delay_embed_path, higher_dual, higher_power, loop_graph, opposite, opposite_path,
    EdgeLabel, LabeledGraph, TransformError, VertexLabel,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuiverError {
    #[error("time {0} outside [0, 1)")]
    TimeOutOfRange(Rat),
    #[error("window needs 0 <= s and s + l <= |mu| (s={s}, l={l}, |mu|={len})")]
    WindowOutOfRange { s: Rat, l: Rat, len: usize },
    #[error("parameter must be nonnegative here, got {0}")]
    NegativeParameter(Rat),
    #[error("quiver paths are not composable")]
    NotComposable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("word of length {got} does not fit a fibre path (expected {expected})")]
    BadWordLength { got: usize, expected: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// A time in `[0, 1)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(Rat);

impl Time {
    pub fn new(t: Rat) -> Result<Self, QuiverError> {
        if t < Rat::zero() || t >= Rat::one() {
            return Err(QuiverError::TimeOutOfRange(t));
        }
        Ok(Time(t))
    }

    pub fn zero() -> Self {
        Time(Rat::zero())
    }

    /// Fractional part of any rational.
    pub fn frac_of(t: Rat) -> Self {
        Time(frac(&t))
    }

    pub fn value(&self) -> Rat {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuspensionVertex {
    Base(VertexId),
    /// `[e, t]` with `0 < t < 1`.
    Interior(EdgeId, Time),
}

impl SuspensionVertex {
    /// The fibre coordinate `ϖ`.
    pub fn varpi(&self) -> Time {
        match self {
            SuspensionVertex::Base(_) => Time::zero(),
            SuspensionVertex::Interior(_, t) => *t,
        }
    }

    pub fn display(&self, g: &Graph) -> String {
        match self {
            SuspensionVertex::Base(v) => String::from(g.vertex_name(*v)),
            SuspensionVertex::Interior(e, t) => {
                format!("[{},{}]", g.edge_name(*e), crate::scalar::RatDisplay(&t.0))
            }
        }
    }
}

/// The class of `(e, t)` for `t ∈ [0, 1]`: `[e, 0] = r(e)` and `[e, 1] = s(e)`.
pub fn normalize_vertex(g: &Graph, e: EdgeId, t: Rat) -> Result<SuspensionVertex, QuiverError> {
    if t < Rat::zero() || t > Rat::one() {
        return Err(QuiverError::TimeOutOfRange(t));
    }
    Ok(if t.is_zero() {
        SuspensionVertex::Base(g.r(e))
    } else if t.is_one() {
        SuspensionVertex::Base(g.s(e))
    } else {
        SuspensionVertex::Interior(e, Time(t))
    })
}

/// The point at position `s ∈ [0, |μ|]` along `μ`.
pub fn point(g: &Graph, mu: &Path, s: Rat) -> Result<SuspensionVertex, QuiverError> {
    if s < Rat::zero() || s > Rat::from_integer(mu.len() as i64) {
        return Err(QuiverError::WindowOutOfRange {
            s,
            l: Rat::zero(),
            len: mu.len(),
        });
    }
    if s.is_integer() {
        return Ok(SuspensionVertex::Base(
            mu.vertex_at(g, s.to_integer() as usize),
        ));
    }
    let k = floor(&s) as usize;
    Ok(SuspensionVertex::Interior(
        mu.edges()[k],
        Time(s - Rat::from_integer(k as i64)),
    ))
}

/// Canonical edge of `SG[l]E` for `l ≥ 0`: the window word and a time in
/// `[0, 1)`. Lattice edges have time zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuiverEdge {
    param: Rat,
    word: Path,
    time: Time,
}

impl QuiverEdge {
    pub fn param(&self) -> Rat {
        self.param
    }

    pub fn word(&self) -> &Path {
        &self.word
    }

    pub fn time(&self) -> Time {
        self.time
    }

    pub fn is_lattice(&self) -> bool {
        self.time.is_zero()
    }

    pub fn display(&self, g: &Graph) -> String {
        format!(
            "[{};{}]",
            crate::transform::path_id(g, &self.word),
            crate::scalar::RatDisplay(&self.time.0)
        )
    }
}

fn check_window(mu: &Path, s: Rat, l: Rat) -> Result<(), QuiverError> {
    if l < Rat::zero() {
        return Err(QuiverError::NegativeParameter(l));
    }
    if s < Rat::zero() || s + l > Rat::from_integer(mu.len() as i64) {
        return Err(QuiverError::WindowOutOfRange {
            s,
            l,
            len: mu.len(),
        });
    }
    Ok(())
}

/// Normal form of the pair `(μ, s)` in `SG[l]E`.
pub fn normalize_pair(g: &Graph, mu: &Path, s: Rat, l: Rat) -> Result<QuiverEdge, QuiverError> {
    check_window(mu, s, l)?;
    let lo = floor(&s);
    let hi = ceil(&(s + l));
    let word = mu.sub(g, lo as usize, hi as usize);
    Ok(QuiverEdge {
        param: l,
        word,
        time: Time(s - Rat::from_integer(lo)),
    })
}

/// Normal form of `(μ, t)` in `SG[m]E` for integer `m ≥ 0`.
pub fn normalize_edge(g: &Graph, mu: &Path, t: Rat, m: u32) -> Result<QuiverEdge, QuiverError> {
    normalize_pair(g, mu, t, Rat::from_integer(m as i64))
}

/// Do two pairs define the same edge of `SG[l]E`.
pub fn equivalent(
    g: &Graph,
    a: (&Path, Rat),
    b: (&Path, Rat),
    l: Rat,
) -> Result<bool, QuiverError> {
    Ok(normalize_pair(g, a.0, a.1, l)? == normalize_pair(g, b.0, b.1, l)?)
}

/// `r_l([μ, t]) = [μ, t]`.
pub fn edge_range(_g: &Graph, a: &QuiverEdge) -> SuspensionVertex {
    if a.time.is_zero() {
        SuspensionVertex::Base(a.word.range())
    } else {
        SuspensionVertex::Interior(a.word.edges()[0], a.time)
    }
}

/// `s_l([μ, t]) = [μ, t + l]`.
pub fn edge_source(g: &Graph, a: &QuiverEdge) -> SuspensionVertex {
    let pos = a.time.0 + a.param;
    if pos.is_integer() {
        SuspensionVertex::Base(a.word.source(g))
    } else {
        let k = ceil(&pos) as usize;
        SuspensionVertex::Interior(a.word.edges()[k - 1], Time(frac(&pos)))
    }
}

/// A finite path in `SG[l]E`, composed right to left like graph paths.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuiverPath {
    range: SuspensionVertex,
    edges: Vec<QuiverEdge>,
}

impl QuiverPath {
    pub fn vertex(v: SuspensionVertex) -> Self {
        QuiverPath {
            range: v,
            edges: Vec::new(),
        }
    }

    pub fn edge(g: &Graph, a: QuiverEdge) -> Self {
        QuiverPath {
            range: edge_range(g, &a),
            edges: alloc::vec![a],
        }
    }

    pub fn from_edges(g: &Graph, edges: Vec<QuiverEdge>) -> Result<Self, QuiverError> {
        let first = edges.first().ok_or(QuiverError::NotComposable)?;
        for w in edges.windows(2) {
            if edge_source(g, &w[0]) != edge_range(g, &w[1]) {
                return Err(QuiverError::NotComposable);
            }
        }
        Ok(QuiverPath {
            range: edge_range(g, first),
            edges,
        })
    }

    /// `αβ`, defined when `s(α) = r(β)`.
    pub fn compose(&self, g: &Graph, other: &QuiverPath) -> Result<QuiverPath, QuiverError> {
        if self.source(g) != other.range {
            return Err(QuiverError::NotComposable);
        }
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().cloned());
        Ok(QuiverPath {
            range: self.range.clone(),
            edges,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[QuiverEdge] {
        &self.edges
    }

    pub fn range(&self) -> &SuspensionVertex {
        &self.range
    }

    pub fn source(&self, g: &Graph) -> SuspensionVertex {
        match self.edges.last() {
            Some(a) => edge_source(g, a),
            None => self.range.clone(),
        }
    }

    /// The underlying word for integer parameter `m`: length `nm + 1` at
    /// interior times and `nm` at lattice times. Edge words overlap in one
    /// edge at interior times.
    pub fn word(&self, g: &Graph) -> Path {
        let Some(first) = self.edges.first() else {
            return match &self.range {
                SuspensionVertex::Base(v) => Path::vertex(*v),
                SuspensionVertex::Interior(e, _) => Path::edge(g, *e),
            };
        };
        let overlap = usize::from(!first.time.is_zero());
        let mut edges: Vec<EdgeId> = first.word.edges().to_vec();
        for a in &self.edges[1..] {
            edges.extend_from_slice(&a.word.edges()[overlap.min(a.word.len())..]);
        }
        if edges.is_empty() {
            return first.word.clone();
        }
        Path::from_edges(g, edges).expect("fibre path word composes")
    }

    pub fn display(&self, g: &Graph) -> String {
        if self.edges.is_empty() {
            return self.range.display(g);
        }
        let parts: Vec<String> = self.edges.iter().map(|a| a.display(g)).collect();
        parts.join("")
    }
}

fn integer_param(m: u32) -> Rat {
    Rat::from_integer(m as i64)
}

/// Rebuilds the fibre path of `SG[m]E` at time `t` with `n` edges from its
/// underlying word.
pub fn path_from_word(
    g: &Graph,
    m: u32,
    t: Time,
    word: &Path,
    n: usize,
) -> Result<QuiverPath, QuiverError> {
    let m_us = m as usize;
    let interior = !t.is_zero();
    let expected = n * m_us + usize::from(interior);
    if word.len() != expected {
        return Err(QuiverError::BadWordLength {
            got: word.len(),
            expected,
        });
    }
    if n == 0 {
        return Ok(QuiverPath::vertex(if interior {
            SuspensionVertex::Interior(word.edges()[0], t)
        } else {
            SuspensionVertex::Base(word.range())
        }));
    }
    let width = m_us + usize::from(interior);
    let edges = (0..n)
        .map(|k| QuiverEdge {
            param: integer_param(m),
            word: word.sub(g, k * m_us, k * m_us + width),
            time: t,
        })
        .collect();
    QuiverPath::from_edges(g, edges)
}

/// All paths of length `n` in the fibre of `SG[m]E` over time `t`.
pub fn fibre_paths(g: &Graph, m: u32, t: Time, n: usize) -> Vec<QuiverPath> {
    let len = n * m as usize + usize::from(!t.is_zero());
    g.enumerate_paths(len)
        .iter()
        .map(|w| path_from_word(g, m, t, w, n).expect("enumerated word has fibre length"))
        .collect()
}

/// The graph whose path space models the fibre of `SG[m]E` at time `t`:
/// `E(1, m+1)` at interior times, `E(0, m)` at lattice times, and loop
/// graphs for `m = 0`.
pub fn fibre_graph(g: &Graph, m: u32, t: Time) -> Result<LabeledGraph, QuiverError> {
    let m = m as usize;
    Ok(match (m, t.is_zero()) {
        (0, interior) => loop_graph(g, !interior),
        (_, false) => higher_dual(g, 1, m + 1)?,
        (_, true) => higher_power(g, m)?,
    })
}

fn fibre_vertex_label(v: &SuspensionVertex, g: &Graph) -> VertexLabel {
    match v {
        SuspensionVertex::Base(v) => VertexLabel::Vertex(*v),
        SuspensionVertex::Interior(e, _) => VertexLabel::Path(Path::edge(g, *e)),
    }
}

/// The unitary `U_t` on basis vectors: a fibre path of `SG[m]E` becomes a
/// path of the fibre graph.
pub fn to_dual_word(fibre: &LabeledGraph, g: &Graph, a: &QuiverPath) -> Result<Path, QuiverError> {
    if a.is_empty() {
        let v = fibre
            .vertex_for(&fibre_vertex_label(&a.range, g))
            .ok_or_else(|| {
                QuiverError::InvalidParameter(String::from("vertex not in fibre graph"))
            })?;
        return Ok(Path::vertex(v));
    }
    let edges = a
        .edges
        .iter()
        .map(|x| {
            fibre
                .edge_for(&EdgeLabel::Path(x.word.clone()))
                .ok_or_else(|| {
                    QuiverError::InvalidParameter(String::from("edge not in fibre graph"))
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Path::from_edges(&fibre.graph, edges)?)
}

/// Inverse of [`to_dual_word`].
pub fn from_dual_word(
    fibre: &LabeledGraph,
    g: &Graph,
    m: u32,
    t: Time,
    w: &Path,
) -> Result<QuiverPath, QuiverError> {
    if w.is_empty() {
        let v = match fibre.vertex_label(w.range()) {
            VertexLabel::Vertex(v) => SuspensionVertex::Base(*v),
            VertexLabel::Path(p) => SuspensionVertex::Interior(p.edges()[0], t),
            VertexLabel::Delay { .. } => {
                return Err(QuiverError::InvalidParameter(String::from(
                    "not a fibre graph",
                )))
            }
        };
        return Ok(QuiverPath::vertex(v));
    }
    let edges = w
        .edges()
        .iter()
        .map(|&e| match fibre.edge_label(e) {
            EdgeLabel::Path(p) => Ok(QuiverEdge {
                param: integer_param(m),
                word: p.clone(),
                time: t,
            }),
            _ => Err(QuiverError::InvalidParameter(String::from(
                "not a fibre graph",
            ))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    QuiverPath::from_edges(g, edges)
}

/// Reduction of `SG[m/n]E` to `SG[|m|]D_n(F)`, where `F = E` for `m ≥ 0`
/// and `F = E^op` for `m < 0`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub m: i64,
    pub n: u32,
    /// `Some(E^op)` when `m < 0`.
    pub opposite: Option<LabeledGraph>,
    pub delay: LabeledGraph,
}

pub fn reduce_parameter(g: &Graph, m: i64, n: u32) -> Result<Reduction, QuiverError> {
    if n == 0 {
        return Err(QuiverError::InvalidParameter(String::from(
            "n must be positive",
        )));
    }
    if num_integer::gcd(m.unsigned_abs(), n as u64) != 1 {
        return Err(QuiverError::InvalidParameter(format!(
            "gcd({m}, {n}) must be 1"
        )));
    }
    let opposite = if m < 0 { Some(opposite(g)) } else { None };
    let base = opposite.as_ref().map_or(g, |o| &o.graph);
    let delay = delay(base, n as usize)?;
    Ok(Reduction {
        m,
        n,
        opposite,
        delay,
    })
}

impl Reduction {
    pub fn l(&self) -> Rat {
        Rat::new(self.m, self.n as i64)
    }

    /// The parameter `|m|` on the delay side.
    pub fn delay_param(&self) -> u32 {
        self.m.unsigned_abs() as u32
    }

    fn base<'a>(&'a self, g: &'a Graph) -> &'a Graph {
        self.opposite.as_ref().map_or(g, |o| &o.graph)
    }

    /// `SG{E}⁰ → SG{D_n(F)}⁰`, passing through the opposite graph when
    /// `m < 0`.
    pub fn map_vertex(&self, g: &Graph, v: &SuspensionVertex) -> SuspensionVertex {
        let v = match (v, &self.opposite) {
            (SuspensionVertex::Interior(e, t), Some(_)) => {
                SuspensionVertex::Interior(*e, Time(Rat::one() - t.0))
            }
            (other, _) => other.clone(),
        };
        let f = self.base(g);
        match v {
            SuspensionVertex::Base(v) => SuspensionVertex::Base(
                self.delay
                    .vertex_for(&VertexLabel::Vertex(v))
                    .expect("vertex kept"),
            ),
            SuspensionVertex::Interior(e, t) => {
                let img = delay_embed_path(f, &self.delay, &Path::edge(f, e));
                point(
                    &self.delay.graph,
                    &img,
                    t.0 * Rat::from_integer(self.n as i64),
                )
                .expect("point inside edge")
            }
        }
    }

    /// The edge `[μ, s]` of `SG[m/n]E` (a pair with `s, s + m/n ∈ [0, |μ|]`)
    /// as an edge of `SG[|m|]D_n(F)`.
    pub fn map_pair(&self, g: &Graph, mu: &Path, s: Rat) -> Result<QuiverEdge, QuiverError> {
        let l = self.l();
        let len = Rat::from_integer(mu.len() as i64);
        let lo = if l < Rat::zero() { s + l } else { s };
        let hi = if l < Rat::zero() { s } else { s + l };
        if lo < Rat::zero() || hi > len {
            return Err(QuiverError::WindowOutOfRange {
                s,
                l,
                len: mu.len(),
            });
        }
        let (word, s) = match &self.opposite {
            Some(op) => (opposite_path(&op.graph, mu), len - s),
            None => (mu.clone(), s),
        };
        let f = self.base(g);
        let img = delay_embed_path(f, &self.delay, &word);
        normalize_edge(
            &self.delay.graph,
            &img,
            s * Rat::from_integer(self.n as i64),
            self.delay_param(),
        )
    }

    /// Checks `r ∘ map = map ∘ r_l` and `s ∘ map = map ∘ s_l` on a pair.
    pub fn intertwines(&self, g: &Graph, mu: &Path, s: Rat) -> Result<bool, QuiverError> {
        let img = self.map_pair(g, mu, s)?;
        let d = &self.delay.graph;
        let r_ok = edge_range(d, &img) == self.map_vertex(g, &point(g, mu, s)?);
        let s_ok = edge_source(d, &img) == self.map_vertex(g, &point(g, mu, s + self.l())?);
        Ok(r_ok && s_ok)
    }

    /// For `m ≥ 0`: the edges of `SG[m/n]E` at time `t` map injectively onto
    /// the edges of `SG[m]D_n(E)` whose range lies over the image fibre.
    /// Returns the number of edges compared.
    pub fn fibre_bijection(&self, g: &Graph, t: Time) -> Result<(usize, bool), QuiverError> {
        if self.m < 0 {
            return Err(QuiverError::NegativeParameter(self.l()));
        }
        let l = self.l();
        let k = ceil(&(t.0 + l)) as usize;
        let mut image = BTreeSet::new();
        let mut count = 0;
        for w in g.enumerate_paths(k) {
            if t.0 + l > Rat::from_integer(w.len() as i64) {
                continue;
            }
            image.insert(self.map_pair(g, &w, t.0)?);
            count += 1;
        }
        let injective = image.len() == count;
        let ranges: BTreeSet<SuspensionVertex> = if t.is_zero() {
            g.vertices()
                .map(|v| self.map_vertex(g, &SuspensionVertex::Base(v)))
                .collect()
        } else {
            g.edges()
                .map(|e| self.map_vertex(g, &SuspensionVertex::Interior(e, t)))
                .collect()
        };
        let d = &self.delay.graph;
        let t_img = Time::frac_of(t.0 * Rat::from_integer(self.n as i64));
        let target: BTreeSet<QuiverEdge> = fibre_paths(d, self.delay_param(), t_img, 1)
            .into_iter()
            .map(|p| p.edges[0].clone())
            .filter(|a| ranges.contains(&edge_range(d, a)))
            .collect();
        Ok((count, injective && image == target))
    }
}

/// Openness of the range and source maps of `SG[0]E` at interior points of
/// each edge: `s` is open at `[e]` iff `|E¹s(e)| = 1`, `r` iff `|r(e)E¹| = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Openness {
    pub edge: EdgeId,
    pub source_open: bool,
    pub range_open: bool,
}

pub fn openness_report(g: &Graph) -> Vec<Openness> {
    g.edges()
        .map(|e| Openness {
            edge: e,
            source_open: g.edges_from(g.s(e)).len() == 1,
            range_open: g.edges_into(g.r(e)).len() == 1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{arb_essential_graph, arb_graph, single_loop, two_loop};
    use crate::scalar::rat;
    use alloc::collections::BTreeMap;
    use alloc::vec;
    use proptest::prelude::*;

    // Union-find closure of the elementary moves: drop the last edge while
    // the window fits, drop the first edge while s ≥ 1.
    struct Closure {
        keys: Vec<(Path, i64)>,
        parent: Vec<usize>,
    }

    impl Closure {
        fn find(&mut self, i: usize) -> usize {
            let p = self.parent[i];
            if p == i {
                return i;
            }
            let r = self.find(p);
            self.parent[i] = r;
            r
        }

        // parameter m, times in sixths, words up to `max_len`
        fn build(g: &Graph, m: i64, max_len: usize) -> Closure {
            let mut keys = Vec::new();
            for len in 0..=max_len {
                for mu in g.enumerate_paths(len) {
                    for k in 0..=(6 * len as i64) {
                        if k + 6 * m <= 6 * len as i64 {
                            keys.push((mu.clone(), k));
                        }
                    }
                }
            }
            let index: BTreeMap<(Path, i64), usize> = keys
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, k)| (k, i))
                .collect();
            let mut c = Closure {
                parent: (0..keys.len()).collect(),
                keys,
            };
            for i in 0..c.keys.len() {
                let (mu, k) = c.keys[i].clone();
                let len = mu.len() as i64;
                let mut moves = Vec::new();
                if len >= 1 && k + 6 * m <= 6 * (len - 1) {
                    moves.push((mu.sub(g, 0, len as usize - 1), k));
                }
                if k >= 6 {
                    moves.push((mu.sub(g, 1, len as usize), k - 6));
                }
                for key in moves {
                    let j = index[&key];
                    let (a, b) = (c.find(i), c.find(j));
                    c.parent[a] = b;
                }
            }
            c
        }
    }

    #[test]
    fn normal_form_matches_closure() {
        for g in [
            two_loop(),
            Graph::new(
                ["a", "b"],
                [("x", "a", "b"), ("y", "b", "a"), ("z", "b", "b")],
            )
            .unwrap(),
        ] {
            for m in 1..=2i64 {
                let mut c = Closure::build(&g, m, 4);
                let n = c.keys.len();
                let forms: Vec<QuiverEdge> = c
                    .keys
                    .iter()
                    .map(|(mu, k)| {
                        normalize_pair(&g, mu, rat(*k, 6), Rat::from_integer(m)).unwrap()
                    })
                    .collect();
                for i in 0..n {
                    for j in (i + 1)..n {
                        assert_eq!(
                            c.find(i) == c.find(j),
                            forms[i] == forms[j],
                            "{:?} vs {:?}",
                            c.keys[i],
                            c.keys[j]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn vertex_endpoints_glue() {
        let g = Graph::new(
            ["a", "b"],
            [("x", "a", "b"), ("y", "b", "a"), ("z", "b", "b")],
        )
        .unwrap();
        for e in g.edges() {
            for f in g.edges() {
                let glued = normalize_vertex(&g, e, Rat::one()).unwrap()
                    == normalize_vertex(&g, f, Rat::zero()).unwrap();
                assert_eq!(glued, g.s(e) == g.r(f));
            }
        }
        assert!(normalize_vertex(&g, EdgeId(0), rat(3, 2)).is_err());
    }

    #[test]
    fn lattice_edges_for_m_one() {
        let g = two_loop();
        let e = Path::edge(&g, EdgeId(0));
        let a = normalize_edge(&g, &e, Rat::zero(), 1).unwrap();
        assert!(a.is_lattice());
        assert_eq!(edge_range(&g, &a), SuspensionVertex::Base(VertexId(0)));
        assert_eq!(edge_source(&g, &a), SuspensionVertex::Base(VertexId(0)));
        let ef = g.path_from_names(&["e", "f"]).unwrap();
        let b = normalize_edge(&g, &ef, rat(1, 3), 1).unwrap();
        assert_eq!(
            edge_range(&g, &b),
            SuspensionVertex::Interior(EdgeId(0), Time(rat(1, 3)))
        );
        assert_eq!(
            edge_source(&g, &b),
            SuspensionVertex::Interior(EdgeId(1), Time(rat(1, 3)))
        );
    }

    #[test]
    fn zero_parameter_edges_are_vertices() {
        let g = two_loop();
        let a = normalize_edge(&g, &Path::vertex(VertexId(0)), Rat::zero(), 0).unwrap();
        assert!(a.word().is_empty());
        assert_eq!(edge_range(&g, &a), edge_source(&g, &a));
        let b = normalize_edge(&g, &Path::edge(&g, EdgeId(1)), rat(1, 2), 0).unwrap();
        assert_eq!(edge_range(&g, &b), edge_source(&g, &b));
    }

    #[test]
    fn composition_at_m_one() {
        // [ef,t][fg,t] = [efg,t]
        let g = Graph::new(["v"], [("e", "v", "v"), ("f", "v", "v"), ("g", "v", "v")]).unwrap();
        let t = rat(1, 4);
        let a = QuiverPath::edge(
            &g,
            normalize_edge(&g, &g.path_from_names(&["e", "f"]).unwrap(), t, 1).unwrap(),
        );
        let b = QuiverPath::edge(
            &g,
            normalize_edge(&g, &g.path_from_names(&["f", "g"]).unwrap(), t, 1).unwrap(),
        );
        let ab = a.compose(&g, &b).unwrap();
        assert_eq!(ab.word(&g), g.path_from_names(&["e", "f", "g"]).unwrap());
        let c = QuiverPath::edge(
            &g,
            normalize_edge(&g, &g.path_from_names(&["g", "e"]).unwrap(), t, 1).unwrap(),
        );
        assert!(a.compose(&g, &c).is_err());
    }

    #[test]
    fn window_errors() {
        let g = two_loop();
        let e = Path::edge(&g, EdgeId(0));
        assert!(matches!(
            normalize_edge(&g, &e, rat(1, 2), 1),
            Err(QuiverError::WindowOutOfRange { .. })
        ));
        assert!(matches!(
            normalize_pair(&g, &e, Rat::zero(), rat(-1, 2)),
            Err(QuiverError::NegativeParameter(_))
        ));
        assert!(matches!(
            reduce_parameter(&g, 2, 4),
            Err(QuiverError::InvalidParameter(_))
        ));
        assert!(matches!(
            reduce_parameter(&g, 1, 0),
            Err(QuiverError::InvalidParameter(_))
        ));
    }

    #[test]
    fn single_loop_half_reduces_to_two_cycle() {
        let g = single_loop();
        let red = reduce_parameter(&g, 1, 2).unwrap();
        assert!(red.delay.graph.is_simple_cycle());
        assert_eq!(red.delay.graph.vertex_count(), 2);
        let (count, ok) = red.fibre_bijection(&g, Time(rat(1, 3))).unwrap();
        assert!(ok);
        assert_eq!(count, 1);
    }

    #[test]
    fn openness_on_small_graphs() {
        let g = two_loop();
        assert!(openness_report(&g)
            .iter()
            .all(|o| !o.source_open && !o.range_open));
        let g = single_loop();
        assert!(openness_report(&g)
            .iter()
            .all(|o| o.source_open && o.range_open));
        // a: x into b; b has loop z and edge y back to a
        let g = Graph::new(
            ["a", "b"],
            [("x", "a", "b"), ("y", "b", "a"), ("z", "b", "b")],
        )
        .unwrap();
        let o = openness_report(&g);
        assert!(o[0].source_open && !o[0].range_open);
        assert!(!o[1].source_open && o[1].range_open);
    }

    fn times() -> Vec<Rat> {
        vec![Rat::zero(), rat(1, 5), rat(1, 2), rat(2, 3), rat(5, 6)]
    }

    proptest! {
        #[test]
        fn range_source_are_class_functions(g in arb_graph(3, 5), m in 0u32..3, k in 0usize..6) {
            // Every representative of a class has the same range and source.
            for len in (m as usize)..=(m as usize + 2) {
                for mu in g.enumerate_paths(len) {
                    for t in times() {
                        let s = t + Rat::from_integer(k as i64 % (len as i64 - m as i64 + 1).max(1));
                        let Ok(a) = normalize_edge(&g, &mu, s, m) else { continue };
                        prop_assert_eq!(edge_range(&g, &a), point(&g, &mu, s).unwrap());
                        prop_assert_eq!(edge_source(&g, &a), point(&g, &mu, s + Rat::from_integer(m as i64)).unwrap());
                    }
                }
            }
        }

        #[test]
        fn fibre_paths_compose_and_round_trip(g in arb_graph(3, 5), m in 0u32..3, n in 0usize..3) {
            for t in [Time::zero(), Time(rat(1, 3))] {
                let fibre = fibre_graph(&g, m, t).unwrap();
                let paths = fibre_paths(&g, m, t, n);
                let dual: BTreeSet<Path> = paths.iter().map(|a| to_dual_word(&fibre, &g, a).unwrap()).collect();
                prop_assert_eq!(dual.len(), paths.len());
                prop_assert_eq!(dual.len(), fibre.graph.enumerate_paths(n).len());
                for a in &paths {
                    let w = to_dual_word(&fibre, &g, a).unwrap();
                    prop_assert_eq!(&from_dual_word(&fibre, &g, m, t, &w).unwrap(), a);
                    prop_assert_eq!(path_from_word(&g, m, t, &a.word(&g), n).unwrap(), a.clone());
                    prop_assert_eq!(a.source(&g).varpi(), t);
                }
            }
        }

        #[test]
        fn reduction_intertwines(g in arb_essential_graph(3, 5), m in -3i64..4, n in 1u32..4) {
            prop_assume!(num_integer::gcd(m.unsigned_abs(), n as u64) == 1);
            let red = reduce_parameter(&g, m, n).unwrap();
            let l = red.l();
            let span = ceil(&num_traits::Signed::abs(&l)) as usize + 1;
            for mu in g.enumerate_paths(span) {
                for k in 0..(6 * n as i64) {
                    let s = rat(k, 6 * n as i64);
                    let s = if l < Rat::zero() { s - l } else { s };
                    if s + l < Rat::zero() || s + l > Rat::from_integer(mu.len() as i64) || s > Rat::from_integer(mu.len() as i64) {
                        continue;
                    }
                    prop_assert!(red.intertwines(&g, &mu, s).unwrap());
                }
            }
        }

        #[test]
        fn reduction_is_fibrewise_bijective(g in arb_graph(3, 5), m in 0i64..4, n in 1u32..4) {
            prop_assume!(num_integer::gcd(m.unsigned_abs(), n as u64) == 1);
            let red = reduce_parameter(&g, m, n).unwrap();
            for t in times() {
                let (_, ok) = red.fibre_bijection(&g, Time(t)).unwrap();
                prop_assert!(ok);
            }
        }
    }

    #[test]
    fn reduction_with_unit_denominator_is_identity_on_words() {
        let g = two_loop();
        let red = reduce_parameter(&g, 1, 1).unwrap();
        let ef = g.path_from_names(&["e", "f"]).unwrap();
        let a = red.map_pair(&g, &ef, rat(1, 2)).unwrap();
        assert_eq!(a.word().len(), 2);
        assert_eq!(a.time(), Time(rat(1, 2)));
    }

    #[test]
    fn opposite_reduction_reverses_words() {
        let g = Graph::new(
            ["a", "b"],
            [("x", "a", "b"), ("y", "b", "a"), ("z", "b", "b")],
        )
        .unwrap();
        let red = reduce_parameter(&g, -1, 1).unwrap();
        let xy = g.path_from_names(&["x", "y"]).unwrap();
        let a = red.map_pair(&g, &xy, rat(3, 2)).unwrap();
        // (xy, 3/2) with l = -1 goes to (y^op x^op, 1/2) in E^op
        let d = &red.delay.graph;
        assert_eq!(a.word().display(d).to_string(), "f(op(y),1),f(op(x),1)");
    }
}
