mod common;

use common::{one_region, small_scenario};
use kcharge::graph::{build_reachability, build_time_expanded, topological_order, ReachabilityGraph};
use kcharge::Point;

#[test]
fn single_requester_with_three_second_deadline() {
    // sitting on the depot: arrival 0 lands in the first bucket
    let sc = one_region(
        100.0,
        1,
        Point::new(50.0, 50.0),
        &[(1, 50.0, 50.0, 3.0, 1.0), (2, 10.0, 10.0, 9000.0, 0.2)],
    );
    assert_eq!(sc.demand.num_colors(), 1);
    let g = build_time_expanded(&sc).unwrap();
    assert_eq!(g.num_vertices(), 5);
    let times: Vec<f64> = g.vertices[1..].iter().map(|v| v.time).collect();
    assert_eq!(times, vec![0.0, 1.0, 2.0, 3.0]);
    assert_eq!(g.successors(0), &[1]);
    assert_eq!(g.num_edges(), 1);
}

#[test]
fn depot_arrival_on_a_bucket_boundary_stays_in_that_bucket() {
    // 10 m at 5 m/s arrives at exactly 2 s
    let sc = one_region(
        100.0,
        1,
        Point::new(0.0, 0.0),
        &[(1, 10.0, 0.0, 10.0, 1.0), (2, 90.0, 90.0, 9000.0, 0.2)],
    );
    let g = build_time_expanded(&sc).unwrap();
    let target = g.successors(0)[0] as usize;
    assert_eq!(g.vertices[target].time, 2.0);
    assert_eq!(g.vertices[target].k, 2);
}

#[test]
fn sensor_to_sensor_arrival_on_a_boundary() {
    // from bucket 0 of sensor 1: 300 s of charging plus 2 s of driving
    let sc = one_region(
        100.0,
        1,
        Point::new(0.0, 0.0),
        &[
            (1, 0.0, 0.0, 4800.0, 0.5),
            (2, 10.0, 0.0, 4000.0, 1.0),
            (3, 90.0, 90.0, 9000.0, 0.2),
        ],
    );
    let g = build_time_expanded(&sc).unwrap();
    let c1 = sc.demand.color_of(1).unwrap();
    let c2 = sc.demand.color_of(2).unwrap();
    let from = g.clique(c1).next().unwrap();
    assert_eq!(g.vertices[from].time, 0.0);
    let succ = g.successors(from);
    assert_eq!(succ.len(), 1);
    let to = &g.vertices[succ[0] as usize];
    assert_eq!(to.color, Some(c2));
    assert_eq!(to.time, 302.0);
}

#[test]
fn tight_deadlines_exclude_cross_edges() {
    // charging either sensor takes over 500 s, both deadlines are 400 s
    let sc = one_region(
        100.0,
        1,
        Point::new(0.0, 0.0),
        &[
            (1, 10.0, 0.0, 400.0, 1.0),
            (2, 20.0, 0.0, 400.0, 1.0),
            (3, 90.0, 90.0, 9000.0, 0.2),
        ],
    );
    let g = build_time_expanded(&sc).unwrap();
    let cross = g.edges().filter(|&(u, _)| u != 0).count();
    assert_eq!(cross, 0);
    assert_eq!(g.successors(0).len(), 2);
}

#[test]
fn reachability_edge_hand_values() {
    // full recharge of 7200 J at 20 W is 360 s, plus 700 m at 5 m/s
    let build = |residual_j: f64| {
        one_region(
            700.0,
            1,
            Point::new(350.0, 350.0),
            &[
                (1, 0.0, 0.0, 3600.0, 0.1),
                (2, 700.0, 0.0, residual_j, 2.0),
                (3, 350.0, 700.0, 9000.0, 0.2),
            ],
        )
    };
    let sc = build(1200.0); // D_2 = 600 s
    let reach = build_reachability(&sc);
    let n1 = ReachabilityGraph::node_of_color(sc.demand.color_of(1).unwrap());
    let n2 = ReachabilityGraph::node_of_color(sc.demand.color_of(2).unwrap());
    assert!(reach.has_edge(n1, n2));
    assert_eq!(reach.weight(n1, n2), 700.0);
    assert!(!reach.has_edge(n1, n1));

    let sc = build(800.0); // D_2 = 400 s
    let reach = build_reachability(&sc);
    let n1 = ReachabilityGraph::node_of_color(sc.demand.color_of(1).unwrap());
    let n2 = ReachabilityGraph::node_of_color(sc.demand.color_of(2).unwrap());
    assert!(!reach.has_edge(n1, n2));
}

#[test]
fn generated_graphs_are_acyclic() {
    for seed in 0..100u64 {
        let sc = small_scenario(12, 2, 0.45, seed);
        let g = build_time_expanded(&sc).unwrap();
        let order = topological_order(&g).unwrap();
        assert_eq!(order.len(), g.num_vertices());
        let mut rank = vec![0; order.len()];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        assert!(g.edges().all(|(u, v)| rank[u] < rank[v]));
    }
}
