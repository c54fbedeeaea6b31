//! Seeded sampling of graphs, function data and operator test cases.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use suspend_core::opalg::{Evaluator, FunctionOnEdges, FunctionOnVertices, OpError};
use suspend_core::scalar::{rat, real};
use suspend_core::{Graph, Path, Rat, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Number of paths of length at most `cap`.
pub fn path_count(g: &Graph, cap: usize) -> usize {
    let mut layer = vec![1usize; g.vertex_count()];
    let mut total = g.vertex_count();
    for _ in 0..cap {
        let mut next = vec![0usize; g.vertex_count()];
        // paths ending at each source vertex, extended by one edge
        for e in g.edges() {
            next[g.s(e).0] = next[g.s(e).0].saturating_add(layer[g.r(e).0]);
        }
        total = next.iter().fold(total, |a, &b| a.saturating_add(b));
        layer = next;
    }
    total
}

/// A graph with at most `max_v` vertices and `max_e` edges, no sinks and
/// no sources, whose truncated path space at `cap` has at most `max_dim`
/// elements.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    max_v: usize,
    max_e: usize,
    cap: usize,
    max_dim: usize,
) -> Graph {
    loop {
        let nv = rng.gen_range(1..=max_v);
        let ne = rng.gen_range(nv..=max_e.max(nv));
        let names: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
        let edges: Vec<(String, String, String)> = (0..ne)
            .map(|i| {
                let s = rng.gen_range(0..nv);
                let r = rng.gen_range(0..nv);
                (format!("e{i}"), names[s].clone(), names[r].clone())
            })
            .collect();
        let g = Graph::new(
            names.iter().map(String::as_str),
            edges
                .iter()
                .map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())),
        )
        .expect("sampled names are distinct");
        if g.sinks().is_empty() && g.sources().is_empty() && path_count(&g, cap) <= max_dim {
            return g;
        }
    }
}

/// The seeded corpus used by the acceptance criteria.
pub fn sampled_graphs(seed: u64, count: usize, cap: usize, max_dim: usize) -> Vec<Graph> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| random_graph(&mut r, 5, 10, cap, max_dim))
        .collect()
}

fn small(rng: &mut ChaCha8Rng, scale: i64) -> Rat {
    rat(rng.gen_range(0..=2), scale)
}

fn complex(re: Rat, im: Rat) -> Scalar {
    let (a, b) = (real(&re), real(&im));
    Scalar::new(a.re, b.re)
}

/// Vertex values `k/64` plus `c·t(1 − t)` bumps with `c ∈ {0, 1/64, 1/32}`,
/// so every edge function is Lipschitz with constant below `1/8`.
pub fn vertex_function(rng: &mut ChaCha8Rng, g: &Graph) -> Result<FunctionOnVertices, OpError> {
    let values: Vec<Scalar> = g
        .vertices()
        .map(|_| complex(small(rng, 64), small(rng, 64)))
        .collect();
    let mut bumps = BTreeMap::new();
    for e in g.edges() {
        let c = real(&small(rng, 64));
        if !c.is_zero() {
            bumps.insert(e, Evaluator::Poly(vec![Scalar::zero(), c.clone(), -c]));
        }
    }
    FunctionOnVertices::from_vertex_values(g, &values, &bumps)
}

/// Lattice values `k/64` and occasional hat bumps of height at most `1/128`
/// on `[1/4, 3/4]`, Lipschitz with constant below `1/8`.
pub fn edge_function(rng: &mut ChaCha8Rng, g: &Graph, m: u32) -> Result<FunctionOnEdges, OpError> {
    let lattice: BTreeMap<Path, Scalar> = g
        .enumerate_paths(m as usize)
        .into_iter()
        .map(|p| (p, complex(small(rng, 64), small(rng, 64))))
        .collect();
    let mut bumps = BTreeMap::new();
    for nu in g.enumerate_paths(m as usize + 1) {
        if rng.gen_bool(0.5) {
            let h = real(&small(rng, 256));
            bumps.insert(nu, Evaluator::hat(rat(1, 4), rat(1, 2), rat(3, 4), h)?);
        }
    }
    FunctionOnEdges::from_lattice_values(g, m, lattice, &bumps)
}

/// Quadruples `(μ, ν, η, ζ)` with `s(μ) = s(ν)`, `s(η) = s(ζ)` and all
/// lengths at most `max_len`.
pub fn product_samples(
    rng: &mut ChaCha8Rng,
    g: &Graph,
    max_len: usize,
    count: usize,
) -> Vec<(Path, Path, Path, Path)> {
    let paths = g.paths_up_to(max_len);
    let pick_pair = |rng: &mut ChaCha8Rng| {
        let a = paths.choose(rng).expect("nonempty").clone();
        let same: Vec<&Path> = paths
            .iter()
            .filter(|p| p.source(g) == a.source(g))
            .collect();
        let b = (*same.choose(rng).expect("contains a")).clone();
        (a, b)
    };
    (0..count)
        .map(|_| {
            let (mu, nu) = pick_pair(rng);
            // bias toward the nonzero cases of the product formula
            let (eta, zeta) = if rng.gen_bool(0.5) {
                let k = rng.gen_range(0..=nu.len());
                let eta = nu.sub(g, 0, k);
                let same: Vec<&Path> = paths
                    .iter()
                    .filter(|p| p.source(g) == eta.source(g))
                    .collect();
                (eta, (*same.choose(rng).expect("contains eta")).clone())
            } else {
                pick_pair(rng)
            };
            (mu, nu, eta, zeta)
        })
        .collect()
}

pub fn unit_pairs(
    rng: &mut ChaCha8Rng,
    g: &Graph,
    max_len: usize,
    count: usize,
) -> Vec<(Path, Path)> {
    let paths = g.paths_up_to(max_len);
    (0..count)
        .map(|_| {
            let a = paths.choose(rng).expect("nonempty").clone();
            let same: Vec<&Path> = paths
                .iter()
                .filter(|p| p.source(g) == a.source(g))
                .collect();
            (a.clone(), (*same.choose(rng).expect("contains a")).clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use suspend_core::opalg::TruncatedRep;

    #[test]
    fn sampler_is_deterministic() {
        let a = sampled_graphs(7, 5, 5, 4000);
        let b = sampled_graphs(7, 5, 5, 4000);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(crate::format::write_graph(x), crate::format::write_graph(y));
            assert!(x.sinks().is_empty() && x.sources().is_empty());
            assert!(x.vertex_count() <= 5 && x.edge_count() <= 10);
        }
    }

    #[test]
    fn path_count_matches_basis() {
        for g in sampled_graphs(3, 6, 4, 4000) {
            assert_eq!(path_count(&g, 4), TruncatedRep::new(&g, 4).unwrap().dim());
        }
    }

    #[test]
    fn sampled_functions_glue() {
        let mut r = rng(1);
        for g in sampled_graphs(1, 4, 3, 4000) {
            vertex_function(&mut r, &g).unwrap();
            for m in 0..3 {
                edge_function(&mut r, &g, m).unwrap();
            }
        }
    }
}
