//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use suspend::sample::{edge_function, rng, sampled_graphs, vertex_function};
use suspend_core::flow::lattice_decomposition_check;
use suspend_core::ktheory::{bates_k_invariance, suspension_k, AbelianGroup, Status};
use suspend_core::opalg::{
    check_tck, eta_generators, jmath, kappa_report, limit_formulas, morita_combinatorics, rho_psi,
    Mode, TruncatedRep,
};
use suspend_core::quiver::{normalize_pair, Time};
use suspend_core::scalar::rat;
use suspend_core::{Graph, Path, Rat};

const SEED: u64 = 20_240_601;
const GRAPHS: usize = 20;
/// Sampled graphs have at most this many paths of length at most 5.
const MAX_DIM: usize = 1500;
const LIMIT_TOLERANCE: f64 = 1e-3;
const LIMIT_K: u32 = 10;

type Criterion<'a> = Box<dyn Fn() -> Verdict + 'a>;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn two_loop() -> Graph {
    Graph::new(["v"], [("e", "v", "v"), ("f", "v", "v")]).unwrap()
}

fn single_loop() -> Graph {
    Graph::new(["v"], [("e", "v", "v")]).unwrap()
}

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

/// Walks `e₁…eₙ` with `r(e₁) = v`, `s(eᵢ) = r(eᵢ₊₁)`, ending at `s(eₙ)`,
/// counted by depth-first search over the raw edge list.
fn walk_counts(g: &Graph, n: usize) -> Vec<Vec<u64>> {
    let edges: Vec<(usize, usize)> = g.edges().map(|e| (g.r(e).0, g.s(e).0)).collect();
    let k = g.vertex_count();
    let mut out = vec![vec![0u64; k]; k];
    fn dfs(edges: &[(usize, usize)], at: usize, left: usize, row: &mut [u64]) {
        if left == 0 {
            row[at] += 1;
            return;
        }
        for &(r, s) in edges {
            if r == at {
                dfs(edges, s, left - 1, row);
            }
        }
    }
    for (v, row) in out.iter_mut().enumerate() {
        dfs(&edges, v, n, row);
    }
    out
}

fn criterion_1(graphs: &[Graph]) -> Verdict {
    let mut bad = 0;
    let mut entries = 0;
    for g in graphs {
        let a = g.adjacency_matrix();
        for n in 0..=6u32 {
            let oracle = walk_counts(g, n as usize);
            let power = a.pow(n);
            let paths = g.enumerate_paths(n as usize);
            for v in g.vertices() {
                for w in g.vertices() {
                    entries += 1;
                    let enumerated = paths
                        .iter()
                        .filter(|p| p.range() == v && p.source(g) == w)
                        .count() as u64;
                    let o = oracle[v.0][w.0];
                    if *power.get(v.0, w.0) != BigInt::from(o) || enumerated != o {
                        bad += 1;
                    }
                }
            }
        }
    }
    verdict(
        bad == 0,
        format!("{GRAPHS} graphs, n <= 6: {entries} entries, {bad} discrepancies"),
    )
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
}

/// Closure of the moves `(μ, s) ~ (μ₂…μₖ, s − 1)` and
/// `(μ, s) ~ (μ₁…μₖ₋₁, s)` on pairs with `|μ| ≤ 4`, `s ∈ ℤ/6`, against the
/// library's normal form.
fn normal_form_discrepancies(g: &Graph, m: i64) -> (usize, usize) {
    let l = Rat::from_integer(m);
    let mut nodes: Vec<(Path, Rat)> = Vec::new();
    let mut index: BTreeMap<(Path, Rat), usize> = BTreeMap::new();
    for len in 1..=4usize {
        for mu in g.enumerate_paths(len) {
            for k in 0..=6 * (len as i64 - m) {
                let s = rat(k, 6);
                index.insert((mu.clone(), s), nodes.len());
                nodes.push((mu.clone(), s));
            }
        }
    }
    let mut uf = UnionFind((0..nodes.len()).collect());
    for (i, (mu, s)) in nodes.iter().enumerate() {
        let edges = mu.edges();
        if *s >= Rat::from_integer(1) {
            let shorter = Path::from_edges(g, edges[1..].to_vec()).unwrap();
            uf.union(i, index[&(shorter, *s - Rat::from_integer(1))]);
        }
        if *s + l <= Rat::from_integer(edges.len() as i64 - 1) {
            let shorter = Path::from_edges(g, edges[..edges.len() - 1].to_vec()).unwrap();
            uf.union(i, index[&(shorter, *s)]);
        }
    }
    let mut class_to_nf = BTreeMap::new();
    let mut nf_to_class = BTreeMap::new();
    let mut bad = 0;
    for (i, (mu, s)) in nodes.iter().enumerate() {
        let root = uf.find(i);
        let nf = normalize_pair(g, mu, *s, l).unwrap();
        if *class_to_nf.entry(root).or_insert_with(|| nf.clone()) != nf {
            bad += 1;
        }
        if *nf_to_class.entry(nf).or_insert(root) != root {
            bad += 1;
        }
    }
    (nodes.len(), bad)
}

fn criterion_2(graphs: &[Graph]) -> Verdict {
    let mut total = 0;
    let mut bad = 0;
    let mut corpus = vec![single_loop(), two_loop(), three_vertex()];
    corpus.extend(graphs.iter().take(5).cloned());
    for g in &corpus {
        for m in [1, 2] {
            let (n, b) = normal_form_discrepancies(g, m);
            total += n;
            bad += b;
        }
    }
    verdict(
        bad == 0,
        format!(
            "{} graphs, m in {{1,2}}: {total} pairs, {bad} discrepancies",
            corpus.len()
        ),
    )
}

fn criterion_3(graphs: &[Graph]) -> Verdict {
    let mut failed = Vec::new();
    let mut dims = 0;
    for (i, g) in graphs.iter().enumerate() {
        let rep = TruncatedRep::new(g, 5).unwrap();
        dims += rep.dim();
        let r = check_tck(&rep, Mode::Toeplitz);
        for name in ["TCK1", "TCK2", "delta_rank_one"] {
            if !r.checks.iter().any(|c| c.name == name && c.passed) {
                failed.push(format!("graph {i} {name}"));
            }
        }
    }
    verdict(
        failed.is_empty(),
        format!("{GRAPHS} graphs at L = 5 ({dims} basis vectors); failures {failed:?}"),
    )
}

fn criterion_4(graphs: &[Graph]) -> Verdict {
    let mut failed = Vec::new();
    let mut checks = 0;
    for (i, g) in graphs.iter().enumerate() {
        for (p, q) in [(1, 2), (1, 3), (2, 3)] {
            let j = jmath(g, p, q, 3).unwrap();
            for c in &j.report.checks {
                checks += 1;
                if !c.passed {
                    failed.push(format!("graph {i} {}: {}", c.name, c.detail));
                }
            }
        }
    }
    verdict(
        failed.is_empty(),
        format!("{GRAPHS} graphs, L = 3, interior depth 2: {checks} checks; failures {failed:?}"),
    )
}

fn criterion_5(graphs: &[Graph]) -> Verdict {
    let mut bad = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        for (p, q) in [(1, 2), (1, 3), (2, 3)] {
            let r = bates_k_invariance(g, p, q).unwrap();
            if !r.equal() {
                bad.push(format!(
                    "graph {i} ({p},{q}): {:?} vs {:?}",
                    r.dual, r.power
                ));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("{GRAPHS} graphs x 3 parameter pairs; mismatches {bad:?}"),
    )
}

fn group(s: &str) -> AbelianGroup {
    AbelianGroup::parse(s).unwrap()
}

fn criterion_6() -> Verdict {
    let g = two_loop();
    let mut bad = Vec::new();
    // 1 x 1 oracle: A = [2], so coker(1 - 2^m) = Z/(2^m - 1) and ker = 0
    for (m, n) in [(2i64, 3u64), (1, 1)] {
        let d = 2i64.pow(m as u32) - 1;
        let expected = if d == 1 {
            group("0")
        } else {
            group(&format!("Z/{d}"))
        };
        let k = suspension_k(&g, m, n).unwrap();
        if k.status != Status::Proven || k.groups != Some((expected.clone(), group("0"))) {
            bad.push(format!("l={m}/{n}: {:?}", k.groups));
        }
    }
    // l = 0: Z (+) H1 with H1 free of rank |E| - |V| + 1 for a connected graph
    let h1 = g.edge_count() - g.vertex_count() + 1;
    let expected = AbelianGroup::free(1 + h1);
    let k = suspension_k(&g, 0, 1).unwrap();
    if k.groups != Some((expected.clone(), expected)) {
        bad.push(format!("l=0: {:?}", k.groups));
    }
    for (m, n) in [(1i64, 2u64), (2, 3), (3, 5), (-1, 2), (-2, 7)] {
        let k = suspension_k(&single_loop(), m, n).unwrap();
        if !matches!(k.status, Status::HypothesesUnmet(_)) || k.groups.is_some() {
            bad.push(format!("single loop l={m}/{n}: {:?}", k.status));
        }
    }
    verdict(
        bad.is_empty(),
        format!("2-loop at 2/3, 1/1, 0 and single loop at 5 fractional l; mismatches {bad:?}"),
    )
}

fn criterion_7(graphs: &[Graph]) -> Verdict {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    let mut corpus = vec![two_loop(), three_vertex()];
    corpus.extend(graphs.iter().take(3).cloned());
    let mut r = rng(SEED);
    let times: Vec<Rat> = (0..=8).map(|k| rat(k, 8)).collect();
    for (i, g) in corpus.iter().enumerate() {
        for m in [1u32, 2] {
            let a = vertex_function(&mut r, g).unwrap();
            let xi = edge_function(&mut r, g, m).unwrap();
            let lim = limit_formulas(g, m, 3, &a, &xi, LIMIT_K, LIMIT_TOLERANCE).unwrap();
            worst = lim.final_upper.iter().copied().fold(worst, f64::max);
            let kap = kappa_report(g, m, 3, &a, &xi, &times).unwrap();
            for k in 1..=3 {
                let t = Time::new(Rat::new(1, 1 << k)).unwrap();
                let rp = rho_psi(g, m, t, 3, &a, &xi).unwrap();
                bad.extend(
                    rp.report
                        .failures()
                        .map(|c| format!("graph {i} m={m} {}", c.name)),
                );
            }
            bad.extend(
                lim.report
                    .failures()
                    .map(|c| format!("graph {i} {}: {}", c.name, c.detail)),
            );
            bad.extend(
                kap.failures()
                    .map(|c| format!("graph {i} {}: {}", c.name, c.detail)),
            );
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} graphs, m in {{1,2}}, k = 1..{LIMIT_K}: worst bound {worst:.2e} < {LIMIT_TOLERANCE:.0e}; failures {bad:?}",
            corpus.len()
        ),
    )
}

fn criterion_8(graphs: &[Graph]) -> Verdict {
    let mut bad = Vec::new();
    let mut relations = 0;
    for (i, g) in graphs.iter().enumerate() {
        for m in [1u32, 2] {
            let eta = eta_generators(g, m, 3).unwrap();
            relations += eta.y.len();
            if !eta
                .report
                .checks
                .iter()
                .any(|c| c.name.ends_with("y_star_y") && c.passed)
            {
                bad.push(format!("graph {i} m={m}"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("{GRAPHS} graphs, m in {{1,2}}: {relations} relations; failures {bad:?}"),
    )
}

fn criterion_9() -> Verdict {
    let mut bad = Vec::new();
    let mut checks = 0;
    for g in [single_loop(), two_loop(), three_vertex()] {
        for (m, n) in [(1u32, 2u32), (2, 3), (3, 2)] {
            let r = morita_combinatorics(&g, m, n, 3 * n as usize, 6).unwrap();
            for c in &r.report.checks {
                checks += 1;
                if !c.passed {
                    bad.push(format!("{} {}: {}", g.vertex_count(), c.name, c.detail));
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("3 graphs x 3 coprime pairs: {checks} checks; failures {bad:?}"),
    )
}

fn criterion_10() -> Verdict {
    let mut bad = Vec::new();
    let mut points = 0;
    for (name, g) in [("single loop", single_loop()), ("2-loop", two_loop())] {
        for (m, n) in [(1u32, 2u32), (2, 3)] {
            let r = lattice_decomposition_check(&g, m, n, 8).unwrap();
            points += r.points;
            if !r.passed {
                bad.push(format!("{name} {m}/{n}: {:?}", r.first_mismatch));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("prefixes up to length 8: {points} lattice points; mismatches {bad:?}"),
    )
}

fn run_cli(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_suspend"))
        .args(args)
        .env_remove("SUSPEND_MAX_L")
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn criterion_11() -> Verdict {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");
    let file = |name: &str| format!("{data}/{name}");
    let (three, two, single, source, broken) = (
        file("three_vertex.json"),
        file("two_loop.json"),
        file("single_loop.json"),
        file("with_source.json"),
        file("malformed.json"),
    );
    let mut bad = Vec::new();
    let repeat: Vec<Vec<&str>> = vec![
        vec![
            "verify", "--suite", "all", "--L", "4", "--seed", "7", &three,
        ],
        vec![
            "verify", "--suite", "limits", "--L", "3", "--seed", "11", "--json", &two,
        ],
        vec!["ktheory", "--l", "2/3", &two],
        vec!["transform", "--op", "delay:3", &two],
        vec![
            "quiver", "--l", "2/3", "--t", "1/2", "--word", "e,f", "--s", "1/3", &two,
        ],
    ];
    for args in &repeat {
        let (a, ca) = run_cli(args);
        let (b, cb) = run_cli(args);
        if a != b || ca != cb || a.is_empty() {
            bad.push(format!("nondeterministic: {}", args.join(" ")));
        }
        if ca != 0 {
            bad.push(format!("exit {ca}: {}", args.join(" ")));
        }
    }
    let contract: Vec<(Vec<&str>, i32)> = vec![
        (vec!["verify", "--suite", "tck", "--L", "4", &two], 0),
        (vec!["ktheory", "--l", "1/2", &broken], 1),
        (vec!["ktheory", "--l", "one/2", &two], 1),
        (vec!["verify", "--suite", "nonesuch", &two], 1),
        (vec!["ktheory", "--l", "1/2", &single], 2),
        (
            vec!["verify", "--suite", "morita", "--m", "2", "--n", "4", &two],
            2,
        ),
        (vec!["verify", "--suite", "all", &source], 2),
        (vec!["transform", "--op", "dual:2,1", &two], 2),
    ];
    let mut codes = Vec::new();
    for (args, expected) in &contract {
        let (_, code) = run_cli(args);
        codes.push(code);
        if code != *expected {
            bad.push(format!(
                "expected exit {expected}, got {code}: {}",
                args.join(" ")
            ));
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} repeated commands byte-identical; exit codes {codes:?}; problems {bad:?}",
            repeat.len()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let graphs = sampled_graphs(SEED, GRAPHS, 5, MAX_DIM);
    assert!(graphs
        .iter()
        .all(|g| g.vertex_count() <= 5 && g.edge_count() <= 10));
    assert!(graphs
        .iter()
        .all(|g| g.sinks().is_empty() && g.sources().is_empty()));
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("path/adjacency oracle", Box::new(|| criterion_1(&graphs))),
        ("normal-form oracle", Box::new(|| criterion_2(&graphs))),
        ("TCK exactness", Box::new(|| criterion_3(&graphs))),
        ("dual-graph embedding", Box::new(|| criterion_4(&graphs))),
        (
            "K-invariance of dual graphs",
            Box::new(|| criterion_5(&graphs)),
        ),
        ("suspension K-theory", Box::new(criterion_6)),
        (
            "fibre and limit consistency",
            Box::new(|| criterion_7(&graphs)),
        ),
        ("eta-generator relations", Box::new(|| criterion_8(&graphs))),
        ("Morita combinatorics", Box::new(criterion_9)),
        ("flow decomposition", Box::new(criterion_10)),
        ("CLI determinism and exit codes", Box::new(criterion_11)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        if !v.passed {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1}s]",
            if v.passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} criteria pass in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
