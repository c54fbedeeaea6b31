//! Truncated path-space representations and the operator identities checked
//! on them.
//!
//! `ℓ²(E*)` is cut off at paths of length `L`. A relation involving `k`
//! generator factors is exact on basis vectors `h_μ` with `|μ| ≤ L − k`
//! (interior depth `k`); comparisons are made on those columns only.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::graph::{EdgeId, Graph, GraphError, Path, VertexId};
use crate::quiver::{
    fibre_graph, fibre_paths, normalize_vertex, point, to_dual_word, QuiverEdge, QuiverError,
    QuiverPath, SuspensionVertex, Time,
};
use crate::report::Report;
use crate::scalar::{abs_f64, frac, int, one, scalar_string, to_c64, zero, Rat, Scalar};
use crate::transform::{
    delay, higher_dual, higher_power, EdgeLabel, LabeledGraph, TransformError, VertexLabel,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("truncated basis of dimension {0} exceeds the limit {1}")]
    TooLarge(usize, usize),
    #[error("function data fails to glue: {0}")]
    Gluing(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

/// Hard cap on truncated basis sizes.
pub const MAX_DIM: usize = 60_000;

/// Sparse matrix stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    cols: BTreeMap<usize, BTreeMap<usize, Scalar>>,
}

impl SparseOperator {
    pub fn zero(dim: usize) -> Self {
        SparseOperator {
            dim,
            cols: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = Self::zero(dim);
        for i in 0..dim {
            a.add_entry(i, i, one());
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.cols
            .get(&j)
            .and_then(|c| c.get(&i))
            .cloned()
            .unwrap_or_else(zero)
    }

    pub fn add_entry(&mut self, i: usize, j: usize, x: Scalar) {
        assert!(
            i < self.dim && j < self.dim,
            "entry outside the declared basis"
        );
        if x.is_zero() {
            return;
        }
        let col = self.cols.entry(j).or_default();
        let v = col.entry(i).or_insert_with(zero);
        *v += x;
        if v.is_zero() {
            col.remove(&i);
            if col.is_empty() {
                self.cols.remove(&j);
            }
        }
    }

    pub fn column(&self, j: usize) -> Option<&BTreeMap<usize, Scalar>> {
        self.cols.get(&j)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.cols
            .iter()
            .flat_map(|(&j, c)| c.iter().map(move |(&i, x)| (i, j, x)))
    }

    pub fn nnz(&self) -> usize {
        self.cols.values().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        self.combine(other, &one())
    }

    pub fn sub(&self, other: &SparseOperator) -> SparseOperator {
        self.combine(other, &int(-1))
    }

    /// `self + c · other`.
    pub fn combine(&self, other: &SparseOperator, c: &Scalar) -> SparseOperator {
        let mut out = self.clone();
        out.add_scaled(other, c);
        out
    }

    /// `self += c · other` in place.
    pub fn add_scaled(&mut self, other: &SparseOperator, c: &Scalar) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if c.is_zero() {
            return;
        }
        for (i, j, x) in other.entries() {
            self.add_entry(i, j, c * x);
        }
    }

    pub fn scale(&self, c: &Scalar) -> SparseOperator {
        SparseOperator::zero(self.dim).combine(self, c)
    }

    pub fn mul(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = SparseOperator::zero(self.dim);
        for (&j, col) in &other.cols {
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (&k, b) in col {
                if let Some(ac) = self.cols.get(&k) {
                    for (&i, a) in ac {
                        let v = acc.entry(i).or_insert_with(zero);
                        *v += a * b;
                    }
                }
            }
            acc.retain(|_, v| !v.is_zero());
            if !acc.is_empty() {
                out.cols.insert(j, acc);
            }
        }
        out
    }

    pub fn adjoint(&self) -> SparseOperator {
        let mut out = SparseOperator::zero(self.dim);
        for (i, j, x) in self.entries() {
            out.add_entry(j, i, x.conj());
        }
        out
    }

    /// Restriction to the columns selected by `mask`.
    pub fn restrict(&self, mask: &[bool]) -> SparseOperator {
        let cols = self
            .cols
            .iter()
            .filter(|(&j, _)| mask[j])
            .map(|(&j, c)| (j, c.clone()))
            .collect();
        SparseOperator {
            dim: self.dim,
            cols,
        }
    }

    pub fn eq_on(&self, other: &SparseOperator, mask: &[bool]) -> bool {
        self.restrict(mask) == other.restrict(mask)
    }

    /// Exact rank of the selected columns.
    pub fn rank_on(&self, mask: &[bool]) -> usize {
        let vecs: Vec<BTreeMap<usize, Scalar>> = self
            .cols
            .iter()
            .filter(|(&j, _)| mask[j])
            .map(|(_, c)| c.clone())
            .collect();
        rank_of(vecs)
    }

    /// Diagonal with entries in `{0, 1}` on the selected columns.
    pub fn is_diagonal_projection_on(&self, mask: &[bool]) -> bool {
        self.cols
            .iter()
            .filter(|(&j, _)| mask[j])
            .all(|(&j, c)| c.len() == 1 && c.get(&j).is_some_and(|x| x.is_one()))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries()
            .map(|(_, _, x)| abs_f64(x))
            .fold(0.0, f64::max)
    }

    /// `‖A‖ ≤ sqrt(‖A‖₁ ‖A‖_∞)`.
    pub fn norm_upper_bound(&self) -> f64 {
        let mut row_sums: BTreeMap<usize, f64> = BTreeMap::new();
        let mut col_max: f64 = 0.0;
        for c in self.cols.values() {
            let mut s = 0.0;
            for (&i, x) in c {
                let a = abs_f64(x);
                s += a;
                *row_sums.entry(i).or_insert(0.0) += a;
            }
            col_max = col_max.max(s);
        }
        let row_max = row_sums.values().copied().fold(0.0, f64::max);
        libm::sqrt(col_max * row_max)
    }

    /// `‖A‖` in floating point: exact when `A*A` is diagonal, otherwise a
    /// power-iteration lower estimate.
    pub fn norm_estimate(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Gram matrix G = A*A by columns: G[k][j] = Σ_i conj(A[i][k]) A[i][j]
        let cols: BTreeMap<usize, Vec<(usize, Complex64)>> = self
            .cols
            .iter()
            .map(|(&j, c)| (j, c.iter().map(|(&i, x)| (i, to_c64(x))).collect()))
            .collect();
        let mut rows: BTreeMap<usize, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (&j, c) in &cols {
            for &(i, a) in c {
                rows.entry(i).or_default().push((j, a));
            }
        }
        let mut gram: BTreeMap<usize, BTreeMap<usize, Complex64>> = BTreeMap::new();
        for (&j, c) in &cols {
            let col = gram.entry(j).or_default();
            for &(i, a) in c {
                for &(k, b) in &rows[&i] {
                    *col.entry(k).or_insert_with(Complex64::zero) += b.conj() * a;
                }
            }
        }
        let diagonal = gram
            .iter()
            .all(|(&j, c)| c.iter().all(|(&k, x)| k == j || x.norm_sqr() == 0.0));
        if diagonal {
            let top = gram
                .iter()
                .filter_map(|(j, c)| c.get(j))
                .map(|x| x.re)
                .fold(0.0, f64::max);
            return libm::sqrt(top);
        }
        let entries: Vec<(usize, usize, Complex64)> = gram
            .iter()
            .flat_map(|(&j, c)| c.iter().map(move |(&k, &x)| (k, j, x)))
            .collect();
        let apply = |v: &[Complex64]| -> Vec<Complex64> {
            let mut u = vec![Complex64::zero(); self.dim];
            for &(k, j, x) in &entries {
                u[k] += x * v[j];
            }
            u
        };
        let norm = |v: &[Complex64]| libm::sqrt(v.iter().map(|x| x.norm_sqr()).sum::<f64>());
        let mut best: f64 = 0.0;
        let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
        for restart in 0..3 {
            let mut v: Vec<Complex64> = (0..self.dim)
                .map(|_| {
                    seed ^= seed << 13;
                    seed ^= seed >> 7;
                    seed ^= seed << 17;
                    let x = (seed >> 11) as f64 / (1u64 << 53) as f64;
                    Complex64::new(x + 0.5, if restart % 2 == 1 { x - 0.5 } else { 0.0 })
                })
                .collect();
            let mut lambda = 0.0;
            for _ in 0..1000 {
                let n = norm(&v);
                if n == 0.0 {
                    break;
                }
                for x in v.iter_mut() {
                    *x /= n;
                }
                let u = apply(&v);
                let next = norm(&u);
                let done = next == 0.0 || (next - lambda).abs() <= 1e-14 * next;
                lambda = next;
                v = u;
                if done {
                    break;
                }
            }
            best = best.max(libm::sqrt(lambda));
        }
        best
    }
}

fn rank_of(vecs: Vec<BTreeMap<usize, Scalar>>) -> usize {
    // Row echelon form with unit pivots keyed by pivot index.
    let mut basis: BTreeMap<usize, BTreeMap<usize, Scalar>> = BTreeMap::new();
    for mut v in vecs {
        while let Some((&p, lead)) = v.iter().next() {
            if let Some(b) = basis.get(&p) {
                let c = lead.clone();
                for (&i, x) in b {
                    let e = v.entry(i).or_insert_with(zero);
                    *e -= &c * x;
                }
                v.retain(|_, x| !x.is_zero());
            } else {
                let inv = one() / lead.clone();
                for x in v.values_mut() {
                    *x = &*x * &inv;
                }
                basis.insert(p, v);
                break;
            }
        }
    }
    basis.len()
}

/// Coefficients `c` with `target = Σ cᵢ gensᵢ`, when they exist.
pub fn span_coefficients(target: &SparseOperator, gens: &[SparseOperator]) -> Option<Vec<Scalar>> {
    let mut keys: BTreeSet<(usize, usize)> = target.entries().map(|(i, j, _)| (i, j)).collect();
    for g in gens {
        keys.extend(g.entries().map(|(i, j, _)| (i, j)));
    }
    let k = gens.len();
    let mut rows: Vec<Vec<Scalar>> = keys
        .iter()
        .map(|&(i, j)| {
            let mut row: Vec<Scalar> = gens.iter().map(|g| g.get(i, j)).collect();
            row.push(target.get(i, j));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut out = vec![zero(); k];
    for (i, &c) in pivots.iter().enumerate() {
        out[c] = rows[i][k].clone();
    }
    Some(out)
}

/// The Toeplitz representation of `C*(E)` on paths of length at most `cap`:
/// `T_e h_μ = h_{eμ}`, `Q_v h_μ = δ_{v, r(μ)} h_μ`.
#[derive(Clone, Debug)]
pub struct TruncatedRep {
    graph: Graph,
    cap: usize,
    basis: Vec<Path>,
    index: BTreeMap<Path, usize>,
}

impl TruncatedRep {
    pub fn new(g: &Graph, cap: usize) -> Result<Self, OpError> {
        g.require_no_sources()?;
        let mut basis = Vec::new();
        let mut layer = g.enumerate_paths(0);
        for k in 0..=cap {
            if k > 0 {
                let mut next = Vec::new();
                for p in &layer {
                    for &e in g.edges_into(p.source(g)) {
                        let mut edges = p.edges().to_vec();
                        edges.push(e);
                        next.push(Path::from_edges(g, edges)?);
                    }
                }
                if k == 1 {
                    next = g.edges().map(|e| Path::edge(g, e)).collect();
                }
                next.sort();
                layer = next;
            }
            basis.extend(layer.iter().cloned());
            if basis.len() > MAX_DIM {
                return Err(OpError::TooLarge(basis.len(), MAX_DIM));
            }
        }
        let index = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        Ok(TruncatedRep {
            graph: g.clone(),
            cap,
            basis,
            index,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Path] {
        &self.basis
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// The block `ℓ²(E*v)` containing a basis vector: `v = s(μ)`.
    pub fn block_of(&self, i: usize) -> VertexId {
        self.basis[i].source(&self.graph)
    }

    pub fn interior(&self, depth: usize) -> Vec<bool> {
        self.basis
            .iter()
            .map(|p| p.len() + depth <= self.cap)
            .collect()
    }

    pub fn q(&self, v: VertexId) -> SparseOperator {
        let mut a = SparseOperator::zero(self.dim());
        for (i, p) in self.basis.iter().enumerate() {
            if p.range() == v {
                a.add_entry(i, i, one());
            }
        }
        a
    }

    pub fn t(&self, e: EdgeId) -> SparseOperator {
        self.t_path(&Path::edge(&self.graph, e))
    }

    /// `T_μ h_ν = h_{μν}` when composable (`T_v = Q_v`).
    pub fn t_path(&self, mu: &Path) -> SparseOperator {
        let mut a = SparseOperator::zero(self.dim());
        for (j, nu) in self.basis.iter().enumerate() {
            if let Some(mn) = mu.concat(&self.graph, nu) {
                if let Some(i) = self.index_of(&mn) {
                    a.add_entry(i, j, one());
                }
            }
        }
        a
    }

    /// `Δ_v = Q_v − Σ_{e ∈ vE¹} T_e T_e*`.
    pub fn delta(&self, v: VertexId) -> SparseOperator {
        let mut d = self.q(v);
        for &e in self.graph.edges_into(v) {
            let t = self.t(e);
            d.add_scaled(&t.mul(&t.adjoint()), &int(-1));
        }
        d
    }

    /// `θ_{μ,ν} = h_μ ⟨·, h_ν⟩`.
    pub fn theta(&self, mu: &Path, nu: &Path) -> Option<SparseOperator> {
        let mut a = SparseOperator::zero(self.dim());
        a.add_entry(self.index_of(mu)?, self.index_of(nu)?, one());
        Some(a)
    }

    /// `T_μ Δ_{s(μ)} T_ν*`.
    pub fn matrix_unit(&self, mu: &Path, nu: &Path) -> Result<SparseOperator, OpError> {
        let s = mu.source(&self.graph);
        if s != nu.source(&self.graph) {
            return Err(OpError::InvalidParameter(String::from(
                "matrix unit needs s(mu) = s(nu)",
            )));
        }
        Ok(self
            .t_path(mu)
            .mul(&self.delta(s))
            .mul(&self.t_path(nu).adjoint()))
    }

    /// Every column of `a` stays in the block of its basis vector.
    pub fn preserves_blocks(&self, a: &SparseOperator) -> bool {
        a.entries()
            .all(|(i, j, _)| self.block_of(i) == self.block_of(j))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Toeplitz,
    CuntzKrieger,
}

/// Toeplitz-Cuntz-Krieger relations on interior columns.
pub fn check_tck(rep: &TruncatedRep, mode: Mode) -> Report {
    let g = rep.graph();
    let mut report = Report::new();
    let d1 = rep.interior(1);
    let qs: Vec<SparseOperator> = g.vertices().map(|v| rep.q(v)).collect();
    let ts: Vec<SparseOperator> = g.edges().map(|e| rep.t(e)).collect();
    let adj: Vec<SparseOperator> = ts.iter().map(|t| t.adjoint()).collect();

    let mut bad = Vec::new();
    for (v, q) in qs.iter().enumerate() {
        if q.mul(q) != *q || q.adjoint() != *q {
            bad.push(format!("Q_{} not a projection", g.vertex_name(VertexId(v))));
        }
        for (w, p) in qs.iter().enumerate() {
            if v != w && !q.mul(p).is_zero() {
                bad.push(format!(
                    "Q_{} Q_{} != 0",
                    g.vertex_name(VertexId(v)),
                    g.vertex_name(VertexId(w))
                ));
            }
        }
    }
    report.push(
        "vertex_projections",
        bad.is_empty(),
        summary(&bad, qs.len()),
    );

    let mut bad = Vec::new();
    for e in g.edges() {
        for f in g.edges() {
            let lhs = adj[e.0].mul(&ts[f.0]);
            let rhs = if e == f {
                qs[g.s(e).0].clone()
            } else {
                SparseOperator::zero(rep.dim())
            };
            if !lhs.eq_on(&rhs, &d1) {
                bad.push(format!("T_{}*T_{}", g.edge_name(e), g.edge_name(f)));
            }
        }
    }
    report.push(
        "TCK1",
        bad.is_empty(),
        summary(&bad, g.edge_count() * g.edge_count()),
    );

    let deltas: Vec<SparseOperator> = g.vertices().map(|v| rep.delta(v)).collect();
    let bad: Vec<String> = g
        .vertices()
        .filter(|v| !deltas[v.0].is_diagonal_projection_on(&d1))
        .map(|v| format!("Delta_{}", g.vertex_name(v)))
        .collect();
    report.push("TCK2", bad.is_empty(), summary(&bad, g.vertex_count()));

    let mut bad = Vec::new();
    let mut ranks = Vec::new();
    for v in g.vertices() {
        let d = &deltas[v.0];
        let rank = d.rank_on(&d1);
        ranks.push(rank);
        let theta = rep
            .theta(&Path::vertex(v), &Path::vertex(v))
            .expect("vertex in basis");
        let ok = match mode {
            Mode::Toeplitz => rank == 1 && d.eq_on(&theta, &d1),
            Mode::CuntzKrieger => d.sub(&theta).restrict(&d1).is_zero(),
        };
        if !ok {
            bad.push(format!("Delta_{} rank {}", g.vertex_name(v), rank));
        }
    }
    let name = match mode {
        Mode::Toeplitz => "delta_rank_one",
        Mode::CuntzKrieger => "CK_modulo_rank_one",
    };
    report.push(
        name,
        bad.is_empty(),
        format!(
            "{}; interior ranks {:?}",
            summary(&bad, g.vertex_count()),
            ranks
        ),
    );
    report
}

fn summary(bad: &[String], total: usize) -> String {
    if bad.is_empty() {
        format!("{total} relations hold")
    } else {
        format!(
            "{} of {total} fail: {}",
            bad.len(),
            bad.iter().take(5).cloned().collect::<Vec<_>>().join(", ")
        )
    }
}

/// `T_μ T_ν* T_η T_ζ*` against the three-case product formula.
pub fn check_product_formula(rep: &TruncatedRep, samples: &[(Path, Path, Path, Path)]) -> Report {
    let g = rep.graph();
    let mut bad = Vec::new();
    let mut tested = 0;
    for (mu, nu, eta, zeta) in samples {
        if mu.source(g) != nu.source(g) || eta.source(g) != zeta.source(g) {
            continue;
        }
        tested += 1;
        let t = |p: &Path| rep.t_path(p);
        let lhs = t(mu)
            .mul(&t(nu).adjoint())
            .mul(&t(eta))
            .mul(&t(zeta).adjoint());
        let rhs = if nu.starts_with(eta) {
            let nu2 = nu.sub(g, eta.len(), nu.len());
            t(mu).mul(&t(&zeta.concat(g, &nu2).expect("ζν' composes")).adjoint())
        } else if eta.starts_with(nu) {
            let eta2 = eta.sub(g, nu.len(), eta.len());
            t(&mu.concat(g, &eta2).expect("μη' composes")).mul(&t(zeta).adjoint())
        } else {
            SparseOperator::zero(rep.dim())
        };
        let depth = mu.len() + nu.len() + eta.len() + zeta.len();
        if !lhs.eq_on(&rhs, &rep.interior(depth)) {
            bad.push(format!(
                "({},{},{},{})",
                mu.display(g),
                nu.display(g),
                eta.display(g),
                zeta.display(g)
            ));
        }
    }
    let mut r = Report::new();
    r.push(
        "product_formula",
        bad.is_empty() && tested > 0,
        summary(&bad, tested),
    );
    r
}

/// `T_μ Δ_{s(μ)} T_ν* = θ_{μ,ν}` for the given pairs.
pub fn check_matrix_units(rep: &TruncatedRep, pairs: &[(Path, Path)]) -> Report {
    let g = rep.graph();
    let mut bad = Vec::new();
    let mut tested = 0;
    for (mu, nu) in pairs {
        let Ok(unit) = rep.matrix_unit(mu, nu) else {
            continue;
        };
        let Some(theta) = rep.theta(mu, nu) else {
            continue;
        };
        tested += 1;
        if !unit.eq_on(&theta, &rep.interior(mu.len() + nu.len() + 1)) {
            bad.push(format!("({},{})", mu.display(g), nu.display(g)));
        }
    }
    let mut r = Report::new();
    r.push(
        "matrix_units",
        bad.is_empty() && tested > 0,
        summary(&bad, tested),
    );
    r
}

/// The map `ȷ_{p,q} : C*(E) → C*(E(p,q))` on generators, realised in the
/// truncated representation of `E(p,q)`.
#[derive(Clone, Debug)]
pub struct Jmath {
    pub dual: LabeledGraph,
    pub rep: TruncatedRep,
    /// `q_v = Σ_{μ ∈ vE^p} Q_μ`, indexed by vertices of `E`.
    pub q: Vec<SparseOperator>,
    /// `t_μ = Σ_{ν ∈ s(μ)E^p} T_{μν}` for `μ ∈ E^{q−p}`.
    pub t: BTreeMap<Path, SparseOperator>,
    pub report: Report,
}

fn dual_vertex(dual: &LabeledGraph, p: usize, mu: &Path) -> VertexId {
    let label = if p == 0 {
        VertexLabel::Vertex(mu.range())
    } else {
        VertexLabel::Path(mu.clone())
    };
    dual.vertex_for(&label).expect("dual vertex")
}

pub fn jmath(g: &Graph, p: usize, q: usize, cap: usize) -> Result<Jmath, OpError> {
    let dual = higher_dual(g, p, q)?;
    let rep = TruncatedRep::new(&dual.graph, cap)?;
    let dim = rep.dim();
    let ep = g.enumerate_paths(p);
    let qs: Vec<SparseOperator> = g
        .vertices()
        .map(|v| {
            ep.iter()
                .filter(|mu| mu.range() == v)
                .fold(SparseOperator::zero(dim), |mut acc, mu| {
                    acc.add_scaled(&rep.q(dual_vertex(&dual, p, mu)), &one());
                    acc
                })
        })
        .collect();
    let mut ts = BTreeMap::new();
    for mu in g.enumerate_paths(q - p) {
        let mut t = SparseOperator::zero(dim);
        for nu in ep.iter().filter(|nu| nu.range() == mu.source(g)) {
            let word = mu.concat(g, nu).expect("μν composes");
            let e = dual.edge_for(&EdgeLabel::Path(word)).expect("dual edge");
            t.add_scaled(&rep.t(e), &one());
        }
        ts.insert(mu, t);
    }

    let mut report = Report::new();
    let tag = format!("jmath({p},{q})");
    let d2 = rep.interior(2);
    let mut bad = Vec::new();
    for (v, a) in qs.iter().enumerate() {
        if a.mul(a) != *a || a.adjoint() != *a {
            bad.push(format!("q_{}", g.vertex_name(VertexId(v))));
        }
        for (w, b) in qs.iter().enumerate() {
            if v != w && !a.mul(b).is_zero() {
                bad.push(format!(
                    "q_{} q_{}",
                    g.vertex_name(VertexId(v)),
                    g.vertex_name(VertexId(w))
                ));
            }
        }
    }
    report.push(
        format!("{tag}.projections"),
        bad.is_empty(),
        summary(&bad, qs.len()),
    );

    let mut bad = Vec::new();
    for (mu, a) in &ts {
        let a_adj = a.adjoint();
        for (nu, b) in &ts {
            let lhs = a_adj.mul(b);
            let rhs = if mu == nu {
                qs[mu.source(g).0].clone()
            } else {
                SparseOperator::zero(dim)
            };
            if !lhs.eq_on(&rhs, &d2) {
                bad.push(format!("t_{}*t_{}", mu.display(g), nu.display(g)));
            }
        }
    }
    report.push(
        format!("{tag}.TCK1"),
        bad.is_empty(),
        summary(&bad, ts.len() * ts.len()),
    );

    let mut bad_tck2 = Vec::new();
    let mut bad_delta = Vec::new();
    let mut witness = false;
    for v in g.vertices() {
        let mut lhs = qs[v.0].clone();
        for (_, t) in ts.iter().filter(|(mu, _)| mu.range() == v) {
            lhs.add_scaled(&t.mul(&t.adjoint()), &int(-1));
        }
        let rhs = ep.iter().filter(|mu| mu.range() == v).fold(
            SparseOperator::zero(dim),
            |mut acc, mu| {
                acc.add_scaled(&rep.delta(dual_vertex(&dual, p, mu)), &one());
                acc
            },
        );
        witness |= !rhs.restrict(&d2).is_zero();
        if !lhs.is_diagonal_projection_on(&d2) {
            bad_tck2.push(format!("v={}", g.vertex_name(v)));
        }
        if !lhs.eq_on(&rhs, &d2) {
            bad_delta.push(format!("v={}", g.vertex_name(v)));
        }
    }
    report.push(
        format!("{tag}.TCK2"),
        bad_tck2.is_empty(),
        summary(&bad_tck2, g.vertex_count()),
    );
    report.push(
        format!("{tag}.delta"),
        bad_delta.is_empty() && witness,
        format!(
            "{}; nonzero witness {}",
            summary(&bad_delta, g.vertex_count()),
            witness
        ),
    );
    Ok(Jmath {
        dual,
        rep,
        q: qs,
        t: ts,
        report,
    })
}

/// Exact univariate evaluators on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Evaluator {
    /// `Σ cₖ tᵏ`.
    Poly(Vec<Scalar>),
    /// Zero outside `(a, c)`, linear up to `height` at `b` and back down.
    Hat {
        a: Rat,
        b: Rat,
        c: Rat,
        height: Scalar,
    },
    Sum(Vec<Evaluator>),
}

impl Evaluator {
    pub fn constant(c: Scalar) -> Self {
        Evaluator::Poly(vec![c])
    }

    /// The affine function with the given values at 0 and 1.
    pub fn linear(v0: Scalar, v1: Scalar) -> Self {
        let slope = &v1 - &v0;
        Evaluator::Poly(vec![v0, slope])
    }

    pub fn hat(a: Rat, b: Rat, c: Rat, height: Scalar) -> Result<Self, OpError> {
        if !(Rat::zero() <= a && a < b && b < c && c <= Rat::one()) {
            return Err(OpError::InvalidParameter(String::from(
                "hat needs 0 <= a < b < c <= 1",
            )));
        }
        Ok(Evaluator::Hat { a, b, c, height })
    }

    pub fn eval(&self, t: &Rat) -> Scalar {
        match self {
            Evaluator::Poly(cs) => {
                let x = crate::scalar::real(t);
                cs.iter().rev().fold(zero(), |acc, c| &acc * &x + c)
            }
            Evaluator::Hat { a, b, c, height } => {
                if t <= a || t >= c {
                    zero()
                } else if t <= b {
                    height * crate::scalar::real(&((t - a) / (b - a)))
                } else {
                    height * crate::scalar::real(&((c - t) / (c - b)))
                }
            }
            Evaluator::Sum(parts) => parts.iter().fold(zero(), |acc, p| acc + p.eval(t)),
        }
    }

    /// A Lipschitz constant on `[0, 1]`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Evaluator::Poly(cs) => cs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * abs_f64(c))
                .sum(),
            Evaluator::Hat { a, b, c, height } => {
                let f = |r: Rat| *r.numer() as f64 / *r.denom() as f64;
                abs_f64(height) * (1.0 / f(b - a)).max(1.0 / f(c - b))
            }
            Evaluator::Sum(parts) => parts.iter().map(|p| p.lipschitz()).sum(),
        }
    }
}

/// An element of `C(SG{E}⁰)` with finite support: one evaluator per edge,
/// agreeing at shared endpoints. Missing edges are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionOnVertices {
    per_edge: BTreeMap<EdgeId, Evaluator>,
    vertex_values: Vec<Scalar>,
}

impl FunctionOnVertices {
    pub fn new(g: &Graph, per_edge: BTreeMap<EdgeId, Evaluator>) -> Result<Self, OpError> {
        let value = |e: EdgeId, t: Rat| per_edge.get(&e).map_or_else(zero, |f| f.eval(&t));
        let mut vertex_values = Vec::with_capacity(g.vertex_count());
        for v in g.vertices() {
            let vals: Vec<Scalar> = g
                .edges_into(v)
                .iter()
                .map(|&e| value(e, Rat::zero()))
                .chain(g.edges_from(v).iter().map(|&e| value(e, Rat::one())))
                .collect();
            let first = vals.first().cloned().unwrap_or_else(zero);
            if vals.iter().any(|x| *x != first) {
                return Err(OpError::Gluing(format!(
                    "values disagree at vertex {}",
                    g.vertex_name(v)
                )));
            }
            vertex_values.push(first);
        }
        Ok(FunctionOnVertices {
            per_edge,
            vertex_values,
        })
    }

    /// `a_e(t) = (1 − t) a(r(e)) + t a(s(e)) + bump_e(t)`.
    pub fn from_vertex_values(
        g: &Graph,
        values: &[Scalar],
        bumps: &BTreeMap<EdgeId, Evaluator>,
    ) -> Result<Self, OpError> {
        let per_edge = g
            .edges()
            .map(|e| {
                let base = Evaluator::linear(values[g.r(e).0].clone(), values[g.s(e).0].clone());
                let f = match bumps.get(&e) {
                    Some(b) => Evaluator::Sum(vec![base, b.clone()]),
                    None => base,
                };
                (e, f)
            })
            .collect();
        Self::new(g, per_edge)
    }

    pub fn vertex_value(&self, v: VertexId) -> Scalar {
        self.vertex_values[v.0].clone()
    }

    pub fn edge_value(&self, e: EdgeId, t: &Rat) -> Scalar {
        self.per_edge.get(&e).map_or_else(zero, |f| f.eval(t))
    }

    pub fn eval(&self, w: &SuspensionVertex) -> Scalar {
        match w {
            SuspensionVertex::Base(v) => self.vertex_value(*v),
            SuspensionVertex::Interior(e, t) => self.edge_value(*e, &t.value()),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.per_edge
            .values()
            .map(|f| f.lipschitz())
            .fold(0.0, f64::max)
    }
}

/// An element of `C_c(SG[m]E¹)` for integer `m ≥ 0`: evaluators on words
/// `ν ∈ E^{m+1}` and values on lattice edges `μ ∈ E^m`, with
/// `ξ_ν(0) = λ(ν(0, m))` and `ξ_ν(1) = λ(ν(1, m+1))`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionOnEdges {
    m: u32,
    per_word: BTreeMap<Path, Evaluator>,
    lattice: BTreeMap<Path, Scalar>,
}

impl FunctionOnEdges {
    pub fn new(
        g: &Graph,
        m: u32,
        per_word: BTreeMap<Path, Evaluator>,
        lattice: BTreeMap<Path, Scalar>,
    ) -> Result<Self, OpError> {
        let m_us = m as usize;
        if per_word.keys().any(|w| w.len() != m_us + 1) || lattice.keys().any(|w| w.len() != m_us) {
            return Err(OpError::Gluing(String::from(
                "word lengths do not match the parameter",
            )));
        }
        let lam = |w: &Path| lattice.get(w).cloned().unwrap_or_else(zero);
        for nu in g.enumerate_paths(m_us + 1) {
            let (x0, x1) = per_word.get(&nu).map_or_else(
                || (zero(), zero()),
                |f| (f.eval(&Rat::zero()), f.eval(&Rat::one())),
            );
            if x0 != lam(&nu.sub(g, 0, m_us)) || x1 != lam(&nu.sub(g, 1, m_us + 1)) {
                return Err(OpError::Gluing(format!(
                    "word {} does not meet its lattice values",
                    nu.display(g)
                )));
            }
        }
        Ok(FunctionOnEdges {
            m,
            per_word,
            lattice,
        })
    }

    /// `ξ_ν(t) = (1 − t) λ(ν(0,m)) + t λ(ν(1,m+1)) + bump_ν(t)`.
    pub fn from_lattice_values(
        g: &Graph,
        m: u32,
        lattice: BTreeMap<Path, Scalar>,
        bumps: &BTreeMap<Path, Evaluator>,
    ) -> Result<Self, OpError> {
        let m_us = m as usize;
        let lam = |w: &Path| lattice.get(w).cloned().unwrap_or_else(zero);
        let per_word = g
            .enumerate_paths(m_us + 1)
            .into_iter()
            .map(|nu| {
                let base =
                    Evaluator::linear(lam(&nu.sub(g, 0, m_us)), lam(&nu.sub(g, 1, m_us + 1)));
                let f = match bumps.get(&nu) {
                    Some(b) => Evaluator::Sum(vec![base, b.clone()]),
                    None => base,
                };
                (nu, f)
            })
            .collect();
        Self::new(g, m, per_word, lattice)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn lattice_value(&self, mu: &Path) -> Scalar {
        self.lattice.get(mu).cloned().unwrap_or_else(zero)
    }

    pub fn word_value(&self, nu: &Path, t: &Rat) -> Scalar {
        self.per_word.get(nu).map_or_else(zero, |f| f.eval(t))
    }

    pub fn eval(&self, a: &QuiverEdge) -> Scalar {
        if a.is_lattice() {
            self.lattice_value(a.word())
        } else {
            self.word_value(a.word(), &a.time().value())
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.per_word
            .values()
            .map(|f| f.lipschitz())
            .fold(0.0, f64::max)
    }
}

/// A fibre of `SG[m]E` modelled on the truncated path space of its fibre
/// graph: `E(1, m+1)` at interior times, `E(0, m)` at the lattice.
#[derive(Clone, Debug)]
pub struct FibreRep {
    pub m: u32,
    pub interior: bool,
    pub fibre: LabeledGraph,
    pub rep: TruncatedRep,
}

impl FibreRep {
    pub fn new(g: &Graph, m: u32, interior: bool, cap: usize) -> Result<Self, OpError> {
        let probe = if interior {
            Time::new(Rat::new(1, 2))?
        } else {
            Time::zero()
        };
        let fibre = fibre_graph(g, m, probe)?;
        let rep = TruncatedRep::new(&fibre.graph, cap)?;
        Ok(FibreRep {
            m,
            interior,
            fibre,
            rep,
        })
    }

    fn vertex_of_edge(&self, g: &Graph, e: EdgeId) -> VertexId {
        self.fibre
            .vertex_for(&VertexLabel::Path(Path::edge(g, e)))
            .expect("fibre vertex")
    }

    fn edge_of_word(&self, w: &Path) -> EdgeId {
        self.fibre
            .edge_for(&EdgeLabel::Path(w.clone()))
            .expect("fibre edge")
    }

    fn check_time(&self, t: Time) -> Result<(), OpError> {
        if t.is_zero() == self.interior {
            return Err(OpError::InvalidParameter(String::from(
                "time does not match the fibre kind",
            )));
        }
        Ok(())
    }

    /// `ρ_t(a) = Σ_e a([e, t]) Q_e` (interior) or `Σ_v a(v) Q_v` (lattice).
    pub fn rho(
        &self,
        g: &Graph,
        t: Time,
        a: &FunctionOnVertices,
    ) -> Result<SparseOperator, OpError> {
        self.check_time(t)?;
        let mut out = SparseOperator::zero(self.rep.dim());
        if self.interior {
            for e in g.edges() {
                let c = a.edge_value(e, &t.value());
                out.add_scaled(&self.rep.q(self.vertex_of_edge(g, e)), &c);
            }
        } else {
            for v in g.vertices() {
                let q = self.rep.q(self
                    .fibre
                    .vertex_for(&VertexLabel::Vertex(v))
                    .expect("fibre vertex"));
                out.add_scaled(&q, &a.vertex_value(v));
            }
        }
        Ok(out)
    }

    /// `ψ_t(ξ) = Σ_ν ξ([ν, t]) T_ν` over `ν ∈ E^{m+1}` (interior) or
    /// `Σ_μ ξ([μ]) T_μ` over `μ ∈ E^m` (lattice).
    pub fn psi(&self, g: &Graph, t: Time, xi: &FunctionOnEdges) -> Result<SparseOperator, OpError> {
        self.check_time(t)?;
        let len = self.m as usize + usize::from(self.interior);
        let mut out = SparseOperator::zero(self.rep.dim());
        for w in g.enumerate_paths(len) {
            let c = if self.interior {
                xi.word_value(&w, &t.value())
            } else {
                xi.lattice_value(&w)
            };
            out.add_scaled(&self.rep.t(self.edge_of_word(&w)), &c);
        }
        Ok(out)
    }

    /// Basis index of each native fibre path under `U_t`.
    fn native_basis(&self, g: &Graph, t: Time) -> Result<Vec<(QuiverPath, usize)>, OpError> {
        let mut out = Vec::new();
        for n in 0..=self.rep.cap() {
            for a in fibre_paths(g, self.m, t, n) {
                let w = to_dual_word(&self.fibre, g, &a)?;
                let i = self
                    .rep
                    .index_of(&w)
                    .ok_or_else(|| OpError::InvalidParameter(String::from("path outside basis")))?;
                out.push((a, i));
            }
        }
        Ok(out)
    }

    /// `ρ(a) h_α = a(r(α)) h_α` and `ψ(ξ) h_α = Σ_β ξ(β) h_{βα}` on native
    /// fibre paths, transported to the fibre-graph basis.
    pub fn native(
        &self,
        g: &Graph,
        t: Time,
        a: &FunctionOnVertices,
        xi: &FunctionOnEdges,
    ) -> Result<(SparseOperator, SparseOperator), OpError> {
        self.check_time(t)?;
        let basis = self.native_basis(g, t)?;
        let index: BTreeMap<QuiverPath, usize> = basis.iter().cloned().collect();
        let edges: Vec<QuiverPath> = fibre_paths(g, self.m, t, 1);
        let mut rho = SparseOperator::zero(self.rep.dim());
        let mut psi = SparseOperator::zero(self.rep.dim());
        for (alpha, j) in &basis {
            rho.add_entry(*j, *j, a.eval(alpha.range()));
            for beta in &edges {
                if let Ok(ba) = beta.compose(g, alpha) {
                    if let Some(&i) = index.get(&ba) {
                        psi.add_entry(i, *j, xi.eval(&beta.edges()[0]));
                    }
                }
            }
        }
        Ok((rho, psi))
    }

    /// `Σ_{s(β) = r(α)} conj ξ(β) η(β)` as a diagonal operator, natively.
    pub fn native_inner(
        &self,
        g: &Graph,
        t: Time,
        xi: &FunctionOnEdges,
    ) -> Result<SparseOperator, OpError> {
        let basis = self.native_basis(g, t)?;
        let edges: Vec<QuiverPath> = fibre_paths(g, self.m, t, 1);
        let mut out = SparseOperator::zero(self.rep.dim());
        for (alpha, j) in &basis {
            let mut c = zero();
            for beta in edges.iter().filter(|b| b.source(g) == *alpha.range()) {
                let x = xi.eval(&beta.edges()[0]);
                c += x.conj() * &x;
            }
            out.add_entry(*j, *j, c);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct RhoPsi {
    pub fibre: FibreRep,
    pub rho: SparseOperator,
    pub psi: SparseOperator,
    pub report: Report,
}

/// The fibre operators `ρ_t(a)`, `ψ_t(ξ)` by closed form, checked against
/// the native construction and the correspondence relations.
pub fn rho_psi(
    g: &Graph,
    m: u32,
    t: Time,
    cap: usize,
    a: &FunctionOnVertices,
    xi: &FunctionOnEdges,
) -> Result<RhoPsi, OpError> {
    if xi.m() != m {
        return Err(OpError::InvalidParameter(String::from(
            "edge function has a different parameter",
        )));
    }
    let fibre = FibreRep::new(g, m, !t.is_zero(), cap)?;
    let rho = fibre.rho(g, t, a)?;
    let psi = fibre.psi(g, t, xi)?;
    let (n_rho, n_psi) = fibre.native(g, t, a, xi)?;
    let tag = format!("fibre(m={m},t={})", crate::scalar::RatDisplay(&t.value()));
    let mut report = Report::new();
    report.push(
        format!("{tag}.rho_transport"),
        rho == n_rho,
        format!("{} entries", rho.nnz()),
    );
    report.push(
        format!("{tag}.psi_transport"),
        psi == n_psi,
        format!("{} entries", psi.nnz()),
    );
    let blocks = fibre.rep.preserves_blocks(&rho) && fibre.rep.preserves_blocks(&psi);
    report.push(
        format!("{tag}.blocks"),
        blocks,
        String::from("rho and psi preserve l2(E*v)"),
    );
    let d1 = fibre.rep.interior(1);
    let inner = fibre.native_inner(g, t, xi)?;
    let ok = psi.adjoint().mul(&psi).eq_on(&inner, &d1);
    report.push(
        format!("{tag}.inner_product"),
        ok,
        String::from("psi(xi)* psi(xi) = rho(<xi,xi>)"),
    );
    let ok = rho.mul(&psi).eq_on(
        &{
            let mut left = SparseOperator::zero(fibre.rep.dim());
            // ρ(a)ψ(ξ) = ψ(a·ξ) with (a·ξ)(β) = a(r(β)) ξ(β)
            for (i, j, x) in psi.entries() {
                left.add_entry(i, j, x * rho.get(i, i));
            }
            left
        },
        &d1,
    );
    report.push(
        format!("{tag}.left_action"),
        ok,
        String::from("rho(a) psi(xi) = psi(a.xi)"),
    );
    Ok(RhoPsi {
        fibre,
        rho,
        psi,
        report,
    })
}

/// Paths of `SG[l]E` with a fixed source, for rational `l ≥ 0`.
#[derive(Clone, Debug)]
pub struct RationalPathRep {
    pub l: Rat,
    pub basis: Vec<QuiverPath>,
    index: BTreeMap<QuiverPath, usize>,
    cap: usize,
}

/// Edges `β` of `SG[l]E` with `s(β) = ω`.
pub fn edges_with_source(
    g: &Graph,
    omega: &SuspensionVertex,
    l: Rat,
) -> Result<Vec<QuiverEdge>, OpError> {
    let u = omega.varpi().value();
    let t0 = frac(&(u - l));
    let k = crate::scalar::ceil(&(t0 + l)) as usize;
    let mut out = Vec::new();
    for w in g.enumerate_paths(k) {
        if point(g, &w, t0 + l)? == *omega {
            out.push(crate::quiver::normalize_pair(g, &w, t0, l)?);
        }
    }
    Ok(out)
}

impl RationalPathRep {
    pub fn new(g: &Graph, l: Rat, source: SuspensionVertex, cap: usize) -> Result<Self, OpError> {
        if l < Rat::zero() {
            return Err(OpError::InvalidParameter(String::from(
                "l must be nonnegative",
            )));
        }
        let mut basis = vec![QuiverPath::vertex(source)];
        let mut layer = basis.clone();
        for _ in 0..cap {
            let mut next = Vec::new();
            for a in &layer {
                for b in edges_with_source(g, a.range(), l)? {
                    next.push(QuiverPath::edge(g, b).compose(g, a)?);
                }
            }
            basis.extend(next.iter().cloned());
            if basis.len() > MAX_DIM {
                return Err(OpError::TooLarge(basis.len(), MAX_DIM));
            }
            layer = next;
        }
        let index = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        Ok(RationalPathRep {
            l,
            basis,
            index,
            cap,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn interior(&self, depth: usize) -> Vec<bool> {
        self.basis
            .iter()
            .map(|p| p.len() + depth <= self.cap)
            .collect()
    }

    pub fn rho(&self, f: impl Fn(&SuspensionVertex) -> Scalar) -> SparseOperator {
        let mut out = SparseOperator::zero(self.dim());
        for (j, a) in self.basis.iter().enumerate() {
            out.add_entry(j, j, f(a.range()));
        }
        out
    }

    pub fn psi(
        &self,
        g: &Graph,
        f: impl Fn(&QuiverEdge) -> Scalar,
    ) -> Result<SparseOperator, OpError> {
        let mut out = SparseOperator::zero(self.dim());
        for (j, a) in self.basis.iter().enumerate() {
            for b in edges_with_source(g, a.range(), self.l)? {
                let ba = QuiverPath::edge(g, b.clone()).compose(g, a)?;
                if let Some(&i) = self.index.get(&ba) {
                    out.add_entry(i, j, f(&b));
                }
            }
        }
        Ok(out)
    }
}

/// On a single loop, `ψ(1) ρ(a) = ρ(a(· + l)) ψ(1)` where `· + l` is the
/// rotation of the circle `SG{E}⁰`.
pub fn covariance_single_loop(
    g: &Graph,
    l: Rat,
    source: Time,
    cap: usize,
    a: &FunctionOnVertices,
) -> Result<Report, OpError> {
    if !(g.vertex_count() == 1 && g.edge_count() == 1) {
        return Err(OpError::InvalidParameter(String::from(
            "covariance check needs the single loop graph",
        )));
    }
    let e = EdgeId(0);
    let omega = if source.is_zero() {
        SuspensionVertex::Base(VertexId(0))
    } else {
        SuspensionVertex::Interior(e, source)
    };
    let rep = RationalPathRep::new(g, l, omega, cap)?;
    let rotate = |w: &SuspensionVertex| -> SuspensionVertex {
        let u = w.varpi().value();
        normalize_vertex(g, e, frac(&(u + l))).expect("time in range")
    };
    let psi = rep.psi(g, |_| one())?;
    let rho = rep.rho(|w| a.eval(w));
    let rho_rot = rep.rho(|w| a.eval(&rotate(w)));
    let ok = psi.mul(&rho).eq_on(&rho_rot.mul(&psi), &rep.interior(1));
    let mut r = Report::new();
    r.push(
        format!("covariance(l={})", crate::scalar::RatDisplay(&l)),
        ok,
        format!("dimension {}", rep.dim()),
    );
    Ok(r)
}

/// The endpoint forms `ε₀`, `ε₁` of the fibre operators on the
/// `E(1, m+1)` basis.
#[derive(Clone, Debug)]
pub struct Endpoints {
    pub rho0: SparseOperator,
    pub rho1: SparseOperator,
    pub psi0: SparseOperator,
    pub psi1: SparseOperator,
}

pub fn endpoint_forms(
    g: &Graph,
    fibre: &FibreRep,
    a: &FunctionOnVertices,
    xi: &FunctionOnEdges,
) -> Result<Endpoints, OpError> {
    if !fibre.interior {
        return Err(OpError::InvalidParameter(String::from(
            "endpoint forms live on the interior fibre",
        )));
    }
    let dim = fibre.rep.dim();
    let mut rho0 = SparseOperator::zero(dim);
    let mut rho1 = SparseOperator::zero(dim);
    for e in g.edges() {
        let q = fibre.rep.q(fibre.vertex_of_edge(g, e));
        rho0.add_scaled(&q, &a.vertex_value(g.r(e)));
        rho1.add_scaled(&q, &a.vertex_value(g.s(e)));
    }
    let mut psi0 = SparseOperator::zero(dim);
    let mut psi1 = SparseOperator::zero(dim);
    for mu in g.enumerate_paths(fibre.m as usize) {
        let c = xi.lattice_value(&mu);
        for &e in g.edges_into(mu.source(g)) {
            let w = mu.concat(g, &Path::edge(g, e)).expect("μe composes");
            psi0.add_scaled(&fibre.rep.t(fibre.edge_of_word(&w)), &c);
        }
        for &e in g.edges_from(mu.range()) {
            let w = Path::edge(g, e).concat(g, &mu).expect("eμ composes");
            psi1.add_scaled(&fibre.rep.t(fibre.edge_of_word(&w)), &c);
        }
    }
    Ok(Endpoints {
        rho0,
        rho1,
        psi0,
        psi1,
    })
}

#[derive(Clone, Debug)]
pub struct LimitReport {
    /// `(k, ‖ρ_t − ε₀ρ‖, ‖ψ_t − ε₀ψ‖, ‖ρ_{1−t} − ε₁ρ‖, ‖ψ_{1−t} − ε₁ψ‖)` at
    /// `t = 2^{-k}`, power-iteration estimates.
    pub errors: Vec<(u32, [f64; 4])>,
    /// Certified upper bounds at the last `k`.
    pub final_upper: [f64; 4],
    pub report: Report,
}

/// Convergence of the fibre operators to the endpoint forms as `t → 0, 1`.
pub fn limit_formulas(
    g: &Graph,
    m: u32,
    cap: usize,
    a: &FunctionOnVertices,
    xi: &FunctionOnEdges,
    k_max: u32,
    tolerance: f64,
) -> Result<LimitReport, OpError> {
    let fibre = FibreRep::new(g, m, true, cap)?;
    let ends = endpoint_forms(g, &fibre, a, xi)?;
    let mut errors = Vec::new();
    let mut final_upper = [0.0; 4];
    for k in 1..=k_max {
        let t = Rat::new(1, 1i64 << k);
        let t0 = Time::new(t)?;
        let t1 = Time::new(Rat::one() - t)?;
        let diffs = [
            fibre.rho(g, t0, a)?.sub(&ends.rho0),
            fibre.psi(g, t0, xi)?.sub(&ends.psi0),
            fibre.rho(g, t1, a)?.sub(&ends.rho1),
            fibre.psi(g, t1, xi)?.sub(&ends.psi1),
        ];
        errors.push((k, [0, 1, 2, 3].map(|i| diffs[i].norm_estimate())));
        if k == k_max {
            final_upper = [0, 1, 2, 3].map(|i| diffs[i].norm_upper_bound());
        }
    }
    let names = ["rho_to_0", "psi_to_0", "rho_to_1", "psi_to_1"];
    let mut report = Report::new();
    let tag = format!("limits(m={m})");
    for (i, name) in names.iter().enumerate() {
        let monotone = errors
            .windows(2)
            .all(|w| w[1].1[i] <= w[0].1[i] * (1.0 + 1e-9) + 1e-15);
        let last = final_upper[i];
        report.push(
            format!("{tag}.{name}"),
            monotone && last < tolerance,
            format!("nonincreasing={monotone}; bound at k={k_max}: {last:.3e} < {tolerance:.0e}"),
        );
    }
    if m >= 1 {
        let j = jmath(g, 1, m as usize + 1, cap)?;
        let rho_j = g
            .vertices()
            .fold(SparseOperator::zero(j.rep.dim()), |mut acc, v| {
                acc.add_scaled(&j.q[v.0], &a.vertex_value(v));
                acc
            });
        let psi_j =
            j.t.iter()
                .fold(SparseOperator::zero(j.rep.dim()), |mut acc, (mu, t)| {
                    acc.add_scaled(t, &xi.lattice_value(mu));
                    acc
                });
        report.push(
            format!("{tag}.eps0_rho_is_j"),
            rho_j == ends.rho0,
            String::from("eps0(rho(a)) = sum a(v) j(Q_v)"),
        );
        report.push(
            format!("{tag}.eps0_psi_is_j"),
            psi_j == ends.psi0,
            String::from("eps0(psi(xi)) = sum xi[mu] j(T_mu)"),
        );
    }
    Ok(LimitReport {
        errors,
        final_upper,
        report,
    })
}

/// The operators `w_v, x_v, y_μ, z_μ` on the `E(1, m+1)` basis.
#[derive(Clone, Debug)]
pub struct Eta {
    pub w: Vec<SparseOperator>,
    pub x: Vec<SparseOperator>,
    pub y: BTreeMap<Path, SparseOperator>,
    pub z: BTreeMap<Path, SparseOperator>,
    pub report: Report,
}

pub fn eta_generators(g: &Graph, m: u32, cap: usize) -> Result<Eta, OpError> {
    if m == 0 {
        return Err(OpError::InvalidParameter(String::from(
            "eta generators need m >= 1",
        )));
    }
    let fibre = FibreRep::new(g, m, true, cap)?;
    let rep = &fibre.rep;
    let dim = rep.dim();
    let qe = |e: EdgeId| rep.q(fibre.vertex_of_edge(g, e));
    let sum = |ops: Vec<SparseOperator>| {
        ops.iter().fold(SparseOperator::zero(dim), |mut a, b| {
            a.add_scaled(b, &one());
            a
        })
    };
    let w: Vec<SparseOperator> = g
        .vertices()
        .map(|v| sum(g.edges_from(v).iter().map(|&e| qe(e)).collect()))
        .collect();
    let x: Vec<SparseOperator> = g
        .vertices()
        .map(|v| sum(g.edges_into(v).iter().map(|&e| qe(e)).collect()))
        .collect();
    let mut y = BTreeMap::new();
    let mut z = BTreeMap::new();
    for mu in g.enumerate_paths(m as usize) {
        let ys = g
            .edges_from(mu.range())
            .iter()
            .map(|&e| rep.t(fibre.edge_of_word(&Path::edge(g, e).concat(g, &mu).unwrap())))
            .collect();
        let zs = g
            .edges_into(mu.source(g))
            .iter()
            .map(|&f| rep.t(fibre.edge_of_word(&mu.concat(g, &Path::edge(g, f)).unwrap())))
            .collect();
        y.insert(mu.clone(), sum(ys));
        z.insert(mu, sum(zs));
    }
    let d2 = rep.interior(2);
    let tag = format!("eta(m={m})");
    let mut report = Report::new();
    let mut bad = Vec::new();
    for (mu, op) in &y {
        let last = *mu.edges().last().expect("m >= 1");
        let k = g.edges_from(mu.range()).len() as i64;
        if !op.adjoint().mul(op).eq_on(&qe(last).scale(&int(k)), &d2) {
            bad.push(format!("y_{}", mu.display(g)));
        }
    }
    report.push(
        format!("{tag}.y_star_y"),
        bad.is_empty(),
        summary(&bad, y.len()),
    );
    let mut bad = Vec::new();
    for (mu, op) in &z {
        if !op.adjoint().mul(op).eq_on(&x[mu.source(g).0], &d2) {
            bad.push(format!("z_{}", mu.display(g)));
        }
    }
    report.push(
        format!("{tag}.z_star_z"),
        bad.is_empty(),
        summary(&bad, z.len()),
    );
    let j = jmath(g, 1, m as usize + 1, cap)?;
    let x_ok = g.vertices().all(|v| j.q[v.0] == x[v.0]);
    let z_ok = z.iter().all(|(mu, op)| j.t.get(mu) == Some(op));
    report.push(format!("{tag}.x_is_j"), x_ok, String::from("x_v = j(Q_v)"));
    report.push(
        format!("{tag}.z_is_j"),
        z_ok,
        String::from("z_mu = j(T_mu)"),
    );
    Ok(Eta { w, x, y, z, report })
}

#[derive(Clone, Debug)]
pub struct Kappa {
    pub rho: SparseOperator,
    pub psi: SparseOperator,
    /// The hypothesis for exactness holds for this parameter.
    pub hypothesis: bool,
}

/// `κ_m(t)` on generators for `t ∈ [0, 1]`.
pub fn kappa_eval(
    g: &Graph,
    fibre: &FibreRep,
    a: &FunctionOnVertices,
    xi: &FunctionOnEdges,
    t: Rat,
) -> Result<Kappa, OpError> {
    let hypothesis = crate::ktheory::hypothesis_check(g, fibre.m.max(1))
        .map(|h| fibre.m >= 1 && h.all())
        .unwrap_or(false);
    if t < Rat::zero() || t > Rat::one() {
        return Err(OpError::InvalidParameter(String::from(
            "kappa needs t in [0, 1]",
        )));
    }
    let (rho, psi) = if t.is_zero() || t.is_one() {
        let ends = endpoint_forms(g, fibre, a, xi)?;
        if t.is_zero() {
            (ends.rho0, ends.psi0)
        } else {
            (ends.rho1, ends.psi1)
        }
    } else {
        let t = Time::new(t)?;
        (fibre.rho(g, t, a)?, fibre.psi(g, t, xi)?)
    };
    Ok(Kappa {
        rho,
        psi,
        hypothesis,
    })
}

/// Endpoint agreement, the span condition at `t = 0` and continuity of `κ`.
pub fn kappa_report(
    g: &Graph,
    m: u32,
    cap: usize,
    a: &FunctionOnVertices,
    xi: &FunctionOnEdges,
    samples: &[Rat],
) -> Result<Report, OpError> {
    if m == 0 {
        return Err(OpError::InvalidParameter(String::from(
            "kappa needs m >= 1",
        )));
    }
    let fibre = FibreRep::new(g, m, true, cap)?;
    let ends = endpoint_forms(g, &fibre, a, xi)?;
    let k0 = kappa_eval(g, &fibre, a, xi, Rat::zero())?;
    let k1 = kappa_eval(g, &fibre, a, xi, Rat::one())?;
    let tag = format!("kappa(m={m})");
    let mut report = Report::new();
    report.push(
        format!("{tag}.endpoints"),
        k0.rho == ends.rho0 && k0.psi == ends.psi0 && k1.rho == ends.rho1 && k1.psi == ends.psi1,
        String::from("kappa(0), kappa(1) equal the endpoint forms"),
    );
    let eta = eta_generators(g, m, cap)?;
    let zs: Vec<SparseOperator> = eta.z.values().cloned().collect();
    let rho_span = span_coefficients(&k0.rho, &eta.x);
    let psi_span = span_coefficients(&k0.psi, &zs);
    let detail = match (&rho_span, &psi_span) {
        (Some(c), Some(d)) => format!(
            "coefficients x: [{}], z: [{}]",
            c.iter().map(scalar_string).collect::<Vec<_>>().join(","),
            d.iter().map(scalar_string).collect::<Vec<_>>().join(",")
        ),
        _ => String::from("not in the span"),
    };
    report.push(
        format!("{tag}.zero_in_j_span"),
        rho_span.is_some() && psi_span.is_some(),
        detail,
    );
    let mut bad = Vec::new();
    let lip_rho = a.lipschitz();
    let lip_psi = xi.lipschitz();
    let mut pts: Vec<Rat> = samples
        .iter()
        .copied()
        .filter(|t| *t >= Rat::zero() && *t <= Rat::one())
        .collect();
    pts.sort();
    for w in pts.windows(2) {
        let (s, t) = (w[0], w[1]);
        let ks = kappa_eval(g, &fibre, a, xi, s)?;
        let kt = kappa_eval(g, &fibre, a, xi, t)?;
        let dt = (*(t - s).numer() as f64) / (*(t - s).denom() as f64);
        let (dr, dp) = (
            ks.rho.sub(&kt.rho).norm_estimate(),
            ks.psi.sub(&kt.psi).norm_estimate(),
        );
        // ψ sums over at most |E¹| words per column and row
        let width = libm::sqrt((g.edge_count().max(1) * g.edge_count().max(1)) as f64);
        if dr > lip_rho * dt * (1.0 + 1e-9) + 1e-12
            || dp > lip_psi * dt * width * (1.0 + 1e-9) + 1e-12
        {
            bad.push(format!("[{s},{t}]"));
        }
    }
    report.push(
        format!("{tag}.continuity"),
        bad.is_empty(),
        summary(&bad, pts.len().saturating_sub(1)),
    );
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct MoritaReport {
    pub report: Report,
}

/// Combinatorics of the layered delay graph and the Cuntz-Krieger family
/// `(P, S)` it induces in `D_n(E)(0, m)`.
pub fn morita_combinatorics(
    g: &Graph,
    m: u32,
    n: u32,
    cap: usize,
    path_len: usize,
) -> Result<MoritaReport, OpError> {
    if m == 0 || n == 0 {
        return Err(OpError::InvalidParameter(String::from(
            "need m >= 1 and n >= 1",
        )));
    }
    if num_integer::gcd(m, n) != 1 {
        return Err(OpError::InvalidParameter(format!(
            "gcd({m}, {n}) must be 1"
        )));
    }
    let d = delay(g, n as usize)?;
    let dg = &d.graph;
    let nn = n as usize;
    let layer = |u: VertexId| match d.vertex_label(u) {
        VertexLabel::Delay { j, .. } => *j,
        _ => 0,
    };
    let tag = format!("morita(m={m},n={n})");
    let mut report = Report::new();

    let mut count = 0;
    let mut bad = Vec::new();
    for len in 0..=path_len {
        for lam in dg.enumerate_paths(len) {
            count += 1;
            if layer(lam.source(dg)) != (layer(lam.range()) + len) % nn {
                bad.push(lam.display(dg).to_string());
            }
        }
    }
    report.push(
        format!("{tag}.partition"),
        bad.is_empty(),
        summary(&bad, count),
    );

    // constructive route: walk back k·m edges from u for km ≡ j (mod n)
    let power = higher_power(dg, m as usize)?;
    let pg = &power.graph;
    let mut bad = Vec::new();
    for u in dg.vertices() {
        let j = layer(u);
        let k = (0..nn)
            .find(|k| (k * m as usize) % nn == j)
            .expect("m invertible mod n");
        let mut cur = u;
        let mut ok = true;
        for _ in 0..k * m as usize {
            match dg.edges_from(cur).first() {
                Some(&f) => cur = dg.r(f),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let constructive = ok && layer(cur) == 0;
        // search route: reachability in D_n(E)(0, m) toward the range
        let reach = {
            let mut seen = BTreeSet::from([u]);
            let mut stack = vec![u];
            while let Some(x) = stack.pop() {
                for &e in pg.edges_from(x) {
                    if seen.insert(pg.r(e)) {
                        stack.push(pg.r(e));
                    }
                }
            }
            seen.iter().any(|&x| layer(x) == 0)
        };
        if !(constructive && reach) {
            bad.push(format!(
                "{} (constructive {constructive}, search {reach})",
                dg.vertex_name(u)
            ));
        }
    }
    report.push(
        format!("{tag}.fullness"),
        bad.is_empty(),
        summary(&bad, dg.vertex_count()),
    );

    let mut alphas: BTreeMap<Path, Path> = BTreeMap::new();
    let mut bad = Vec::new();
    for mu in g.enumerate_paths(m as usize) {
        let y = crate::transform::delay_embed_path(g, &d, &mu);
        let edges: Vec<EdgeId> = (0..nn)
            .map(|b| {
                let w = y.sub(dg, b * m as usize, (b + 1) * m as usize);
                power
                    .edge_for(&EdgeLabel::Path(w))
                    .expect("block is an edge")
            })
            .collect();
        let a = Path::from_edges(pg, edges)?;
        let ends_ok = power.vertex_label(a.range()) == &VertexLabel::Vertex(mu.range())
            && power.vertex_label(a.source(pg)) == &VertexLabel::Vertex(mu.source(g));
        if a.len() != nn || !ends_ok {
            bad.push(mu.display(g).to_string());
        }
        alphas.insert(mu, a);
    }
    report.push(
        format!("{tag}.alpha"),
        bad.is_empty(),
        summary(&bad, alphas.len()),
    );

    if cap < 3 * nn {
        return Err(OpError::InvalidParameter(format!(
            "Morita checks need L >= 3n = {}",
            3 * nn
        )));
    }
    let rep = TruncatedRep::new(pg, cap)?;
    let depth = 2 * nn;
    let mask = rep.interior(depth);
    // away from both ends: n <= |λ| <= L - 2n
    let far: Vec<bool> = mask
        .iter()
        .zip(rep.basis())
        .map(|(&m, p)| m && p.len() >= nn)
        .collect();
    let pv = |v: VertexId| {
        rep.q(power
            .vertex_for(&VertexLabel::Vertex(v))
            .expect("V0 vertex"))
    };
    let s_ops: BTreeMap<&Path, SparseOperator> =
        alphas.iter().map(|(mu, a)| (mu, rep.t_path(a))).collect();
    let mut bad = Vec::new();
    for (mu, s) in &s_ops {
        let s_adj = s.adjoint();
        for (nu, t) in &s_ops {
            let rhs = if mu == nu {
                pv(mu.source(g))
            } else {
                SparseOperator::zero(rep.dim())
            };
            if !s_adj.mul(t).eq_on(&rhs, &mask) {
                bad.push(format!("S_{}*S_{}", mu.display(g), nu.display(g)));
            }
        }
    }
    report.push(
        format!("{tag}.TCK1"),
        bad.is_empty(),
        summary(&bad, s_ops.len() * s_ops.len()),
    );

    let mut bad = Vec::new();
    let mut far_bad = Vec::new();
    let mut ranks = Vec::new();
    let short: Vec<Path> = (0..nn).flat_map(|k| pg.enumerate_paths(k)).collect();
    for v in g.vertices() {
        let vf = power
            .vertex_for(&VertexLabel::Vertex(v))
            .expect("V0 vertex");
        let mut defect = pv(v);
        for (_, s) in s_ops.iter().filter(|(mu, _)| mu.range() == v) {
            defect.add_scaled(&s.mul(&s.adjoint()), &int(-1));
        }
        ranks.push(defect.rank_on(&mask));
        let far_rank = defect.rank_on(&far);
        if far_rank != 0 {
            far_bad.push(format!("P_{} rank {far_rank}", g.vertex_name(v)));
        }
        let correction = short.iter().filter(|lam| lam.range() == vf).fold(
            SparseOperator::zero(rep.dim()),
            |mut acc, lam| {
                acc.add_scaled(
                    &rep.matrix_unit(lam, lam).expect("diagonal matrix unit"),
                    &one(),
                );
                acc
            },
        );
        if !defect.sub(&correction).restrict(&mask).is_zero() {
            bad.push(format!("P_{}", g.vertex_name(v)));
        }
    }
    report.push(
        format!("{tag}.CK_V0"),
        bad.is_empty(),
        format!(
            "{}; defect ranks {:?} lie in the ideal of matrix units",
            summary(&bad, g.vertex_count()),
            ranks
        ),
    );
    let far_count = far.iter().filter(|&&b| b).count();
    report.push(
        format!("{tag}.CK_V0_rank"),
        far_bad.is_empty() && far_count > 0,
        format!(
            "{}; defect rank 0 on {far_count} columns with n <= |lambda| <= L - 2n",
            summary(&far_bad, g.vertex_count())
        ),
    );
    Ok(MoritaReport { report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{arb_essential_graph, single_loop, two_loop};
    use crate::scalar::{rat, real};
    use proptest::prelude::*;

    fn three_vertex() -> Graph {
        Graph::new(
            ["a", "b", "c"],
            [
                ("x", "a", "b"),
                ("y", "b", "c"),
                ("z", "c", "a"),
                ("w", "b", "b"),
                ("u", "c", "b"),
            ],
        )
        .unwrap()
    }

    fn sample_functions(g: &Graph, m: u32) -> (FunctionOnVertices, FunctionOnEdges) {
        let values: Vec<Scalar> = g.vertices().map(|v| int(v.0 as i64 + 1)).collect();
        let mut bumps = BTreeMap::new();
        for e in g.edges() {
            // t(1 - t) scaled per edge
            let c = int(e.0 as i64 + 1);
            bumps.insert(e, Evaluator::Poly(vec![zero(), c.clone(), -c]));
        }
        let a = FunctionOnVertices::from_vertex_values(g, &values, &bumps).unwrap();
        let lattice: BTreeMap<Path, Scalar> = g
            .enumerate_paths(m as usize)
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                (
                    p,
                    Scalar::new(real(&rat(i as i64 + 1, 2)).re, real(&rat(1, 3)).re),
                )
            })
            .collect();
        let mut wb = BTreeMap::new();
        for (i, nu) in g.enumerate_paths(m as usize + 1).into_iter().enumerate() {
            if i % 2 == 0 {
                wb.insert(
                    nu,
                    Evaluator::hat(rat(1, 4), rat(1, 2), rat(3, 4), int(2)).unwrap(),
                );
            }
        }
        let xi = FunctionOnEdges::from_lattice_values(g, m, lattice, &wb).unwrap();
        (a, xi)
    }

    #[test]
    fn tck_on_small_graphs() {
        for g in [two_loop(), three_vertex()] {
            let rep = TruncatedRep::new(&g, 4).unwrap();
            let r = check_tck(&rep, Mode::Toeplitz);
            assert!(r.all_passed(), "{r}");
            let r = check_tck(&rep, Mode::CuntzKrieger);
            assert!(r.all_passed(), "{r}");
        }
    }

    #[test]
    fn sources_rejected() {
        let g = Graph::new(["a", "b"], [("x", "a", "b"), ("y", "b", "b")]).unwrap();
        assert!(matches!(
            TruncatedRep::new(&g, 3),
            Err(OpError::Graph(GraphError::HasSources(_)))
        ));
    }

    #[test]
    fn product_formula_and_units() {
        let g = three_vertex();
        let rep = TruncatedRep::new(&g, 5).unwrap();
        let short: Vec<Path> = g.paths_up_to(1);
        let mut samples = Vec::new();
        for (i, mu) in short.iter().enumerate() {
            for (j, nu) in short.iter().enumerate() {
                if (i + 2 * j) % 3 == 0 {
                    for eta in short.iter().step_by(2) {
                        for zeta in short.iter().step_by(3) {
                            samples.push((mu.clone(), nu.clone(), eta.clone(), zeta.clone()));
                        }
                    }
                }
            }
        }
        let r = check_product_formula(&rep, &samples);
        assert!(r.all_passed(), "{r}");
        let pairs: Vec<(Path, Path)> = short
            .iter()
            .flat_map(|a| short.iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        let r = check_matrix_units(&rep, &pairs);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn jmath_on_three_vertex() {
        for (p, q) in [(1, 2), (1, 3), (2, 3), (0, 2)] {
            let j = jmath(&three_vertex(), p, q, 3).unwrap();
            assert!(j.report.all_passed(), "{}", j.report);
        }
    }

    #[test]
    fn fibre_operators_transport() {
        let g = three_vertex();
        for m in 0..=2 {
            let (a, xi) = sample_functions(&g, m);
            for t in [Time::zero(), Time::new(rat(1, 3)).unwrap()] {
                let r = rho_psi(&g, m, t, 3, &a, &xi).unwrap();
                assert!(r.report.all_passed(), "{}", r.report);
            }
        }
    }

    #[test]
    fn gluing_validation() {
        let g = two_loop();
        let mut per_edge = BTreeMap::new();
        per_edge.insert(EdgeId(0), Evaluator::linear(int(1), int(2)));
        assert!(matches!(
            FunctionOnVertices::new(&g, per_edge),
            Err(OpError::Gluing(_))
        ));
        let mut lattice = BTreeMap::new();
        lattice.insert(Path::edge(&g, EdgeId(0)), int(1));
        assert!(matches!(
            FunctionOnEdges::new(&g, 1, BTreeMap::new(), lattice),
            Err(OpError::Gluing(_))
        ));
    }

    #[test]
    fn limits_converge() {
        let g = three_vertex();
        for m in 1..=2 {
            let (a, xi) = sample_functions(&g, m);
            let r = limit_formulas(&g, m, 3, &a, &xi, 10, 1e-2).unwrap();
            assert!(r.report.all_passed(), "{}", r.report);
        }
    }

    #[test]
    fn eta_and_kappa() {
        let g = three_vertex();
        for m in 1..=2 {
            let e = eta_generators(&g, m, 3).unwrap();
            assert!(e.report.all_passed(), "{}", e.report);
            let (a, xi) = sample_functions(&g, m);
            let r = kappa_report(
                &g,
                m,
                3,
                &a,
                &xi,
                &[Rat::zero(), rat(1, 4), rat(1, 2), rat(3, 4), Rat::one()],
            )
            .unwrap();
            assert!(r.all_passed(), "{r}");
        }
    }

    #[test]
    fn covariance_on_rotation() {
        let g = single_loop();
        let per_edge: BTreeMap<EdgeId, Evaluator> =
            [(EdgeId(0), Evaluator::Poly(vec![int(1), int(3), int(-3)]))].into();
        let a = FunctionOnVertices::new(&g, per_edge).unwrap();
        for l in [rat(1, 2), rat(2, 3), rat(3, 5), Rat::one()] {
            for s in [Time::zero(), Time::new(rat(1, 7)).unwrap()] {
                let r = covariance_single_loop(&g, l, s, 6, &a).unwrap();
                assert!(r.all_passed(), "{r}");
            }
        }
    }

    #[test]
    fn morita_small() {
        for (m, n) in [(1, 2), (2, 3), (3, 2)] {
            let r = morita_combinatorics(&two_loop(), m, n, 3 * n as usize, 6).unwrap();
            assert!(r.report.all_passed(), "{}", r.report);
        }
        assert!(morita_combinatorics(&two_loop(), 2, 4, 6, 4).is_err());
    }

    #[test]
    fn span_solver() {
        let mut a = SparseOperator::zero(3);
        a.add_entry(0, 0, int(1));
        let mut b = SparseOperator::zero(3);
        b.add_entry(1, 1, int(1));
        b.add_entry(2, 2, int(1));
        let target = a.scale(&int(3)).combine(&b, &int(-2));
        assert_eq!(
            span_coefficients(&target, &[a.clone(), b.clone()]),
            Some(vec![int(3), int(-2)])
        );
        let mut c = SparseOperator::zero(3);
        c.add_entry(1, 1, int(1));
        assert_eq!(span_coefficients(&c, &[a, b]), None);
    }

    #[test]
    fn norm_estimates_bracket() {
        // [[1, 2], [0, 1]] has norm 1 + sqrt 2
        let mut a = SparseOperator::zero(2);
        a.add_entry(0, 0, int(1));
        a.add_entry(0, 1, int(2));
        a.add_entry(1, 1, int(1));
        let exact = 1.0 + core::f64::consts::SQRT_2;
        assert!((a.norm_estimate() - exact).abs() < 1e-9);
        assert!(a.norm_upper_bound() >= exact - 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn tck_holds_on_random_graphs(g in arb_essential_graph(3, 5)) {
            let rep = TruncatedRep::new(&g, 3).unwrap();
            prop_assert!(check_tck(&rep, Mode::Toeplitz).all_passed());
        }

        #[test]
        fn jmath_holds_on_random_graphs(g in arb_essential_graph(3, 4)) {
            let j = jmath(&g, 1, 2, 3).unwrap();
            prop_assert!(j.report.all_passed(), "{}", j.report);
        }

        #[test]
        fn adjoint_reverses_products(g in arb_essential_graph(3, 4)) {
            let rep = TruncatedRep::new(&g, 3).unwrap();
            let a = rep.t(EdgeId(0));
            let b = rep.delta(g.r(EdgeId(0)));
            prop_assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
        }
    }
}
