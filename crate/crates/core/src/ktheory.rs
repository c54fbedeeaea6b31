//! Smith normal form over `ℤ`, finitely generated abelian groups, graph
//! K-theory and the suspension K-theory table.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::graph::{Graph, GraphError, IntMatrix, VertexId};
use crate::transform::{delay, higher_dual, higher_power, opposite, TransformError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse group `{0}`")]
    Parse(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// `U · M · V = S` with `U`, `V` unimodular and `S` diagonal,
/// `d₁ | d₂ | …`, all `dᵢ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snf {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl Snf {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s.get(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

fn swap_rows(m: &mut IntMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    for c in 0..m.cols() {
        let a = m.get(i, c).clone();
        let b = m.get(j, c).clone();
        m.set(i, c, b);
        m.set(j, c, a);
    }
}

fn swap_cols(m: &mut IntMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    for r in 0..m.rows() {
        let a = m.get(r, i).clone();
        let b = m.get(r, j).clone();
        m.set(r, i, b);
        m.set(r, j, a);
    }
}

// row_i += q * row_j
fn add_row(m: &mut IntMatrix, i: usize, j: usize, q: &BigInt) {
    for c in 0..m.cols() {
        let x = m.get(i, c) + q * m.get(j, c);
        m.set(i, c, x);
    }
}

// col_i += q * col_j
fn add_col(m: &mut IntMatrix, i: usize, j: usize, q: &BigInt) {
    for r in 0..m.rows() {
        let x = m.get(r, i) + q * m.get(r, j);
        m.set(r, i, x);
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = a.get(i, j);
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            swap_rows(&mut a, t, pi);
            swap_rows(&mut u, t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut v, t, pj);
            let p = a.get(t, t).clone();
            let mut dirty = false;
            for i in (t + 1)..rows {
                let q = a.get(i, t) / &p;
                if !q.is_zero() {
                    add_row(&mut a, i, t, &-q.clone());
                    add_row(&mut u, i, t, &-q);
                }
                dirty |= !a.get(i, t).is_zero();
            }
            for j in (t + 1)..cols {
                let q = a.get(t, j) / &p;
                if !q.is_zero() {
                    add_col(&mut a, j, t, &-q.clone());
                    add_col(&mut v, j, t, &-q);
                }
                dirty |= !a.get(t, j).is_zero();
            }
            if dirty {
                continue;
            }
            let mut bad_row = None;
            'search: for i in (t + 1)..rows {
                for j in (t + 1)..cols {
                    if !a.get(i, j).is_multiple_of(&p) {
                        bad_row = Some(i);
                        break 'search;
                    }
                }
            }
            match bad_row {
                Some(i) => {
                    add_row(&mut a, t, i, &BigInt::one());
                    add_row(&mut u, t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            for c in 0..cols {
                let x = -a.get(t, c);
                a.set(t, c, x);
            }
            for c in 0..rows {
                let x = -u.get(t, c);
                u.set(t, c, x);
            }
        }
    }
    Snf { u, s: a, v }
}

/// `ℤ^rank ⊕ ℤ/d₁ ⊕ …` with each `dᵢ ≥ 2` and `d₁ | d₂ | …`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AbelianGroup {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn zero() -> Self {
        AbelianGroup {
            rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            rank,
            torsion: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Direct sum, renormalised to invariant factors.
    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let ts: Vec<BigInt> = self.torsion.iter().chain(&other.torsion).cloned().collect();
        let k = ts.len();
        let mut d = IntMatrix::zeros(k, k);
        for (i, t) in ts.into_iter().enumerate() {
            d.set(i, i, t);
        }
        let torsion = smith_normal_form(&d)
            .diagonal()
            .into_iter()
            .filter(|x| !x.is_one())
            .collect();
        AbelianGroup {
            rank: self.rank + other.rank,
            torsion,
        }
    }

    pub fn parse(s: &str) -> Result<Self, KError> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let mut g = Self::zero();
        for part in s.split("(+)") {
            let part = part.trim();
            let bad = || KError::Parse(s.to_string());
            if part == "Z" {
                g.rank += 1;
            } else if let Some(r) = part.strip_prefix("Z^") {
                g.rank += r.parse::<usize>().map_err(|_| bad())?;
            } else if let Some(d) = part.strip_prefix("Z/") {
                let d: BigInt = d.parse().map_err(|_| bad())?;
                if d < BigInt::from(2) {
                    return Err(bad());
                }
                g = g.direct_sum(&AbelianGroup {
                    rank: 0,
                    torsion: alloc::vec![d],
                });
            } else {
                return Err(bad());
            }
        }
        Ok(g)
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push(String::from("Z")),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" (+) "))
        }
    }
}

/// Cokernel and kernel of `M : ℤ^cols → ℤ^rows`.
pub fn coker_ker(m: &IntMatrix) -> (AbelianGroup, AbelianGroup) {
    let snf = smith_normal_form(m);
    let rank = snf.rank();
    let torsion = snf
        .diagonal()
        .into_iter()
        .filter(|d| !d.is_zero() && !d.is_one())
        .collect();
    (
        AbelianGroup {
            rank: m.rows() - rank,
            torsion,
        },
        AbelianGroup::free(m.cols() - rank),
    )
}

/// `(K₀, K₁)` of the graph algebra of `E(0, m)`:
/// `coker` and `ker` of `1 − (Aᵀ)^m`.
pub fn graph_k(g: &Graph, m: u32) -> Result<(AbelianGroup, AbelianGroup), KError> {
    if m == 0 {
        return Err(KError::InvalidParameter(String::from(
            "graph K-theory needs m >= 1",
        )));
    }
    g.require_no_sinks()?;
    let n = g.vertex_count();
    Ok(coker_ker(
        &IntMatrix::identity(n).sub(&g.adjacency_matrix().transpose().pow(m)),
    ))
}

/// Simplicial homology `(H₀, H₁)` of the graph: kernel and cokernel of
/// `∂a(e) = a(r(e)) − a(s(e))`.
pub fn homology(g: &Graph) -> (AbelianGroup, AbelianGroup) {
    let mut d = IntMatrix::zeros(g.edge_count(), g.vertex_count());
    for e in g.edges() {
        let (r, s) = (g.r(e).0, g.s(e).0);
        let x = d.get(e.0, r) + BigInt::one();
        d.set(e.0, r, x);
        let y = d.get(e.0, s) - BigInt::one();
        d.set(e.0, s, y);
    }
    let (coker, ker) = coker_ker(&d);
    (ker, coker)
}

/// For each vertex `v`: is there `μ` with `|μ| ∈ mℤ₊`, `s(μ) = v` and
/// `|E¹r(μ)| ≥ 2`. The closure variant also allows `|μ| = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisReport {
    pub m: u32,
    pub per_vertex: Vec<bool>,
    pub closure: Vec<bool>,
}

impl HypothesisReport {
    pub fn all(&self) -> bool {
        self.per_vertex.iter().all(|&b| b)
    }

    pub fn failing(&self) -> Vec<VertexId> {
        self.per_vertex
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| VertexId(i))
            .collect()
    }
}

pub fn hypothesis_check(g: &Graph, m: u32) -> Result<HypothesisReport, KError> {
    let h = higher_power(g, m as usize)?.graph;
    let branching: Vec<bool> = g.vertices().map(|w| g.edges_from(w).len() >= 2).collect();
    let mut per_vertex = Vec::with_capacity(g.vertex_count());
    for v in g.vertices() {
        // at least one step of E(0, m), moving from source to range
        let mut seen = alloc::vec![false; h.vertex_count()];
        let mut stack: Vec<VertexId> = h.edges_from(v).iter().map(|&e| h.r(e)).collect();
        let mut found = false;
        while let Some(u) = stack.pop() {
            if seen[u.0] {
                continue;
            }
            seen[u.0] = true;
            if branching[u.0] {
                found = true;
                break;
            }
            stack.extend(h.edges_from(u).iter().map(|&e| h.r(e)));
        }
        per_vertex.push(found);
    }
    let seeds: Vec<VertexId> = g.vertices().filter(|w| branching[w.0]).collect();
    let closed = h.hereditary_closure(&seeds);
    let closure = g.vertices().map(|v| closed.contains(&v)).collect();
    Ok(HypothesisReport {
        m,
        per_vertex,
        closure,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Proven,
    HypothesesUnmet(String),
    /// Groups computed by a formula whose identification is not established
    /// for this graph.
    OutsideProvenScope(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuspensionK {
    pub m: i64,
    pub n: u64,
    pub groups: Option<(AbelianGroup, AbelianGroup)>,
    pub status: Status,
    pub route: String,
    pub hypothesis: Option<HypothesisReport>,
    /// The same hypothesis checked on `D_n` of the working graph; reported
    /// for information.
    pub delay_hypothesis: Option<bool>,
}

/// K-theory of the suspension at `l = m/n`.
pub fn suspension_k(g: &Graph, m: i64, n: u64) -> Result<SuspensionK, KError> {
    if n == 0 {
        return Err(KError::InvalidParameter(String::from(
            "denominator must be positive",
        )));
    }
    if m.unsigned_abs().gcd(&n) != 1 {
        return Err(KError::InvalidParameter(format!("gcd({m}, {n}) must be 1")));
    }
    let mut out = SuspensionK {
        m,
        n,
        groups: None,
        status: Status::Proven,
        route: String::new(),
        hypothesis: None,
        delay_hypothesis: None,
    };
    if m == 0 {
        let (h0, h1) = homology(g);
        let k = h0.direct_sum(&h1);
        out.groups = Some((k.clone(), k));
        out.route = String::from("l=0: K0 = K1 = H0 (+) H1");
        let d = g.diagnostics();
        if !(d.strongly_connected && !d.simple_cycle && d.period == Some(1)) {
            out.status = Status::OutsideProvenScope(String::from(
                "l=0 formula requires a strongly connected graph of period 1 that is not a simple cycle",
            ));
        }
        return Ok(out);
    }
    let mut problems = Vec::new();
    if !g.sinks().is_empty() {
        problems.push(String::from("graph has sinks"));
    }
    if !g.sources().is_empty() {
        problems.push(String::from("graph has sources"));
    }
    if !problems.is_empty() {
        out.status = Status::HypothesesUnmet(problems.join("; "));
        return Ok(out);
    }
    let k = m.unsigned_abs() as u32;
    let (work, route) = if m > 0 {
        (
            g.clone(),
            format!("l>0: K(C*(E(0,{k}))), coker/ker of 1 - (A^t)^{k}"),
        )
    } else {
        (
            opposite(g).into_graph(),
            format!("l<0: K(C*(E^op(0,{k}))), coker/ker of 1 - A^{k}"),
        )
    };
    out.route = route;
    let hyp = hypothesis_check(&work, k)?;
    let delayed = delay(&work, n as usize)?.into_graph();
    out.delay_hypothesis = Some(hypothesis_check(&delayed, k)?.all());
    if !hyp.all() {
        let names: Vec<&str> = hyp.failing().iter().map(|&v| work.vertex_name(v)).collect();
        out.status = Status::HypothesesUnmet(format!(
            "no path of length in {k}Z+ from each vertex to a branching vertex (fails at {})",
            names.join(",")
        ));
        out.hypothesis = Some(hyp);
        return Ok(out);
    }
    out.hypothesis = Some(hyp);
    out.groups = Some(graph_k(&work, k)?);
    Ok(out)
}

/// K-theory of the Toeplitz algebra of the suspension, `(ℤ^{|E⁰|}, 0)`,
/// when the hypothesis holds.
pub fn toeplitz_k(g: &Graph, m: i64) -> Result<Option<(AbelianGroup, AbelianGroup)>, KError> {
    if m == 0 {
        return Err(KError::InvalidParameter(String::from(
            "Toeplitz table needs m != 0",
        )));
    }
    let work = if m > 0 {
        g.clone()
    } else {
        opposite(g).into_graph()
    };
    let hyp = hypothesis_check(&work, m.unsigned_abs() as u32)?;
    Ok(hyp
        .all()
        .then(|| (AbelianGroup::free(g.vertex_count()), AbelianGroup::zero())))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatesReport {
    pub dual: (AbelianGroup, AbelianGroup),
    pub power: (AbelianGroup, AbelianGroup),
}

impl BatesReport {
    pub fn equal(&self) -> bool {
        self.dual == self.power
    }
}

/// `K(C*(E(p, q)))` against `K(C*(E(0, q − p)))`, each from its own
/// adjacency matrix.
pub fn bates_k_invariance(g: &Graph, p: usize, q: usize) -> Result<BatesReport, KError> {
    let dual = higher_dual(g, p, q)?.into_graph();
    let power = higher_power(g, q - p)?.into_graph();
    Ok(BatesReport {
        dual: graph_k(&dual, 1)?,
        power: graph_k(&power, 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{arb_essential_graph, single_loop, two_loop};
    use proptest::prelude::*;

    fn det(m: &[Vec<BigInt>]) -> BigInt {
        let n = m.len();
        if n == 0 {
            return BigInt::one();
        }
        let mut total = BigInt::zero();
        for j in 0..n {
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let term = &m[0][j] * det(&minor);
            if j % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return alloc::vec![Vec::new()];
        }
        (0..n)
            .flat_map(|last| {
                subsets(last, k - 1).into_iter().map(move |mut s| {
                    s.push(last);
                    s
                })
            })
            .collect()
    }

    // Independent oracle: d₁⋯d_k is the gcd of the k×k minors.
    fn determinantal_divisors(m: &IntMatrix) -> Vec<BigInt> {
        let mut out = Vec::new();
        for k in 1..=m.rows().min(m.cols()) {
            let mut g = BigInt::zero();
            for rs in subsets(m.rows(), k) {
                for cs in subsets(m.cols(), k) {
                    let sub: Vec<Vec<BigInt>> = rs
                        .iter()
                        .map(|&i| cs.iter().map(|&j| m.get(i, j).clone()).collect())
                        .collect();
                    g = g.gcd(&det(&sub));
                }
            }
            out.push(g);
        }
        out
    }

    fn to_matrix(rows: usize, cols: usize, xs: &[i64]) -> IntMatrix {
        let rs: Vec<Vec<i64>> = (0..rows)
            .map(|i| xs[i * cols..(i + 1) * cols].to_vec())
            .collect();
        IntMatrix::from_rows(&rs)
    }

    proptest! {
        #[test]
        fn snf_matches_minor_gcds(rows in 1usize..5, cols in 1usize..5, xs in proptest::collection::vec(-6i64..7, 16)) {
            let m = to_matrix(rows, cols, &xs);
            let snf = smith_normal_form(&m);
            prop_assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.s.clone());
            prop_assert!(det_abs_one(&snf.u) && det_abs_one(&snf.v));
            let d = snf.diagonal();
            for i in 0..rows {
                for j in 0..cols {
                    if i != j {
                        prop_assert!(snf.s.get(i, j).is_zero());
                    }
                }
            }
            for w in d.windows(2) {
                prop_assert!(w[0].is_zero() && w[1].is_zero() || w[1].is_multiple_of(&w[0]));
            }
            let mut prod = BigInt::one();
            for (k, dk) in determinantal_divisors(&m).into_iter().enumerate() {
                prod *= &d[k];
                prop_assert_eq!(prod.clone(), dk);
            }
        }

        #[test]
        fn hypothesis_matches_path_search(g in arb_essential_graph(4, 7), m in 1u32..4) {
            let rep = hypothesis_check(&g, m).unwrap();
            let n = g.vertex_count();
            for v in g.vertices() {
                let oracle = (1..=n + 1).any(|k| {
                    g.enumerate_paths(k * m as usize).iter().any(|mu| mu.source(&g) == v && g.edges_from(mu.range()).len() >= 2)
                });
                prop_assert_eq!(rep.per_vertex[v.0], oracle);
                let closure_oracle = g.edges_from(v).len() >= 2 || oracle;
                prop_assert_eq!(rep.closure[v.0], closure_oracle);
            }
        }

        #[test]
        fn primitive_graphs_meet_hypothesis(g in arb_essential_graph(4, 7), m in 1u32..4) {
            let d = g.diagnostics();
            prop_assume!(d.strongly_connected && !d.simple_cycle && d.period == Some(1));
            prop_assert!(hypothesis_check(&g, m).unwrap().all());
        }

        #[test]
        fn bates_invariance(g in arb_essential_graph(3, 5), p in 1usize..3, extra in 1usize..3) {
            let r = bates_k_invariance(&g, p, p + extra).unwrap();
            prop_assert!(r.equal(), "{:?}", r);
        }

        #[test]
        fn group_display_round_trips(rank in 0usize..4, ts in proptest::collection::vec(2i64..30, 0..4)) {
            let base = AbelianGroup::free(rank);
            let g = ts.iter().fold(base, |acc, &t| acc.direct_sum(&AbelianGroup { rank: 0, torsion: alloc::vec![BigInt::from(t)] }));
            prop_assert_eq!(AbelianGroup::parse(&g.to_string()).unwrap(), g);
        }
    }

    fn det_abs_one(m: &IntMatrix) -> bool {
        let rows: Vec<Vec<BigInt>> = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j).clone()).collect())
            .collect();
        det(&rows).abs().is_one()
    }

    #[test]
    fn two_loop_table() {
        let g = two_loop();
        let k = suspension_k(&g, 2, 3).unwrap();
        assert_eq!(k.status, Status::Proven);
        let (k0, k1) = k.groups.unwrap();
        assert_eq!((k0.to_string(), k1.to_string()), ("Z/3".into(), "0".into()));
        let k = suspension_k(&g, 1, 1).unwrap();
        let (k0, k1) = k.groups.unwrap();
        assert!(k0.is_zero() && k1.is_zero());
        let k = suspension_k(&g, 0, 1).unwrap();
        assert_eq!(k.status, Status::Proven);
        let (k0, k1) = k.groups.unwrap();
        assert_eq!(
            (k0.to_string(), k1.to_string()),
            ("Z^3".into(), "Z^3".into())
        );
        let k = suspension_k(&g, -2, 3).unwrap();
        assert_eq!(k.groups.unwrap().0.to_string(), "Z/3");
        assert!(suspension_k(&g, 2, 4).is_err());
        assert!(suspension_k(&g, 0, 2).is_err());
        assert_eq!(
            toeplitz_k(&g, 2).unwrap(),
            Some((AbelianGroup::free(1), AbelianGroup::zero()))
        );
    }

    #[test]
    fn single_loop_fractional_unmet() {
        let g = single_loop();
        for (m, n) in [(1, 2), (2, 3), (-1, 2), (1, 1)] {
            let k = suspension_k(&g, m, n).unwrap();
            assert!(matches!(k.status, Status::HypothesesUnmet(_)), "{m}/{n}");
            assert!(k.groups.is_none());
        }
        let k = suspension_k(&g, 0, 1).unwrap();
        assert!(matches!(k.status, Status::OutsideProvenScope(_)));
        assert_eq!(toeplitz_k(&g, 1).unwrap(), None);
    }

    #[test]
    fn homology_of_small_graphs() {
        let (h0, h1) = homology(&two_loop());
        assert_eq!((h0, h1), (AbelianGroup::free(1), AbelianGroup::free(2)));
        let g = Graph::new(
            ["a", "b"],
            [("x", "a", "b"), ("y", "b", "a"), ("z", "b", "b")],
        )
        .unwrap();
        let (h0, h1) = homology(&g);
        assert_eq!((h0, h1), (AbelianGroup::free(1), AbelianGroup::free(2)));
    }

    #[test]
    fn graph_k_known_values() {
        // Cuntz algebra O_3: K0 = Z/2, K1 = 0
        let g = Graph::new(["v"], [("a", "v", "v"), ("b", "v", "v"), ("c", "v", "v")]).unwrap();
        let (k0, k1) = graph_k(&g, 1).unwrap();
        assert_eq!((k0.to_string(), k1.to_string()), ("Z/2".into(), "0".into()));
        let sink = Graph::new(["a", "b"], [("x", "a", "b")]).unwrap();
        assert!(matches!(
            graph_k(&sink, 1),
            Err(KError::Graph(GraphError::HasSinks(_)))
        ));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(AbelianGroup::parse("Z^x").is_err());
        assert!(AbelianGroup::parse("Z/1").is_err());
        assert!(AbelianGroup::parse("Q").is_err());
        assert_eq!(
            AbelianGroup::parse("Z (+) Z/2 (+) Z/3")
                .unwrap()
                .to_string(),
            "Z (+) Z/6"
        );
    }
}
