use proptest::prelude::*;
use suspend_core::ktheory::{graph_k, suspension_k, Status};
use suspend_core::quiver::reduce_parameter;
use suspend_core::transform::{delay, higher_dual, higher_power};
use suspend_core::Graph;

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

#[test]
fn delay_counts() {
    let g = three_vertex();
    for n in 1..=4 {
        let d = delay(&g, n).unwrap();
        // each edge becomes n edges through n - 1 new vertices
        assert_eq!(d.graph.edge_count(), n * g.edge_count());
        assert_eq!(
            d.graph.vertex_count(),
            g.vertex_count() + (n - 1) * g.edge_count()
        );
    }
}

#[test]
fn dual_and_power_share_k_theory() {
    let g = three_vertex();
    for (p, q) in [(1, 2), (1, 3), (2, 3)] {
        let dual = higher_dual(&g, p, q).unwrap();
        let power = higher_power(&g, q - p).unwrap();
        assert_eq!(
            graph_k(&dual.graph, 1).unwrap(),
            graph_k(&power.graph, 1).unwrap()
        );
    }
}

#[test]
fn reduction_matches_k_theory_route() {
    let g = three_vertex();
    let r = reduce_parameter(&g, 2, 3).unwrap();
    assert_eq!(r.delay_param(), 2);
    assert_eq!(r.delay.graph.edge_count(), 3 * g.edge_count());
    let k = suspension_k(&g, 2, 3).unwrap();
    assert_eq!(k.status, Status::Proven);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delay_preserves_k_theory(n in 1usize..5, seed in proptest::collection::vec((0usize..3, 0usize..3), 0..4)) {
        let g = three_vertex();
        let names = ["a", "b", "c"];
        let mut edges: Vec<(String, &str, &str)> =
            g.edges().map(|e| (g.edge_name(e).to_string(), names[g.s(e).0], names[g.r(e).0])).collect();
        for (i, (s, r)) in seed.into_iter().enumerate() {
            edges.push((format!("extra{i}"), names[s], names[r]));
        }
        let h = Graph::new(names, edges.iter().map(|(id, s, r)| (id.as_str(), *s, *r))).unwrap();
        let d = delay(&h, n).unwrap();
        prop_assert_eq!(graph_k(&d.graph, 1).unwrap(), graph_k(&h, 1).unwrap());
    }
}
