use hccc_core::topology::{Adjacency, RouteTable, Topology};
use proptest::prelude::*;

/// Hop distances by repeated relaxation over an edge list.
fn relaxed_hops(n: usize, edges: &[(usize, usize)], sink: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; n];
    dist[sink] = Some(0u32);
    loop {
        let mut changed = false;
        for &(a, b) in edges {
            for (u, v) in [(a, b), (b, a)] {
                if let Some(du) = dist[u] {
                    if dist[v].map_or(true, |dv| du + 1 < dv) {
                        dist[v] = Some(du + 1);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..40).prop_flat_map(|n| {
        let edges = proptest::collection::vec((0..n, 0..n), 0..(3 * n));
        (Just(n), edges)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn routes_follow_shortest_hops((n, raw) in graph()) {
        let edges: Vec<_> = raw.into_iter().filter(|(a, b)| a != b).collect();
        let mut lists = vec![Vec::new(); n];
        for &(a, b) in &edges {
            lists[a].push(b);
            lists[b].push(a);
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        let adj = Adjacency::from_lists(lists);
        let routes = RouteTable::compute(&adj, 0);
        let want = relaxed_hops(n, &edges, 0);
        for v in 0..n {
            prop_assert_eq!(routes.hops(v), want[v]);
            match (routes.next_hop(v), want[v]) {
                (None, Some(0)) | (None, None) => {}
                (Some(next), Some(d)) => {
                    prop_assert!(adj.connected(v, next));
                    prop_assert_eq!(want[next], Some(d - 1));
                    // Lowest id among the equally short choices.
                    let best = adj.neighbors(v).iter().copied().filter(|&u| want[u] == Some(d - 1)).min();
                    prop_assert_eq!(Some(next), best);
                    prop_assert_eq!(routes.path(v).len() as u32, d);
                }
                other => prop_assert!(false, "node {}: {:?}", v, other),
            }
        }
    }

    #[test]
    fn unit_disk_edges_match_distances(pts in proptest::collection::vec((0.0..100.0f64, 0.0..100.0f64), 2..30),
                                       radius in 5.0..60.0f64) {
        let topo = Topology::from_positions(&pts, &[], radius);
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j { continue; }
                let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                if (d - radius).abs() > 1e-9 {
                    prop_assert_eq!(topo.adjacency.connected(i, j), d < radius);
                }
            }
        }
    }
}

#[test]
fn line_of_nodes_routes_hop_by_hop() {
    let pts: Vec<_> = (0..6).map(|i| (i as f64 * 20.0, 0.0)).collect();
    let topo = Topology::from_positions(&pts, &[5], 25.0);
    assert_eq!(topo.routes.path(5), vec![4, 3, 2, 1, 0]);
    assert_eq!(topo.routes.hops(5), Some(5));
    assert!(topo.unreachable_sources().is_empty());
}
