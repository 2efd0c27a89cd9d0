mod common;

use common::small_scenario;
use kcharge::coverage::{apply_charge, RequirementTable};
use kcharge::graph::{build_reachability, build_time_expanded, topological_order, ReachabilityGraph};
use kcharge::kinematics::{self, advance, evaluate_path};
use kcharge::tour::TourContext;
use kcharge::{verify, ColorSet, Point, SensorNode, SimParams};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn scenario_args() -> impl Strategy<Value = (usize, u32, f64, u64)> {
    (10usize..16, 1u32..=2, 0.2f64..0.6, 0u64..10_000)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn time_expanded_graphs_sort_and_edges_move_forward((n, k, alpha, seed) in scenario_args()) {
        let sc = small_scenario(n, k, alpha, seed);
        let g = build_time_expanded(&sc).unwrap();
        let order = topological_order(&g).unwrap();
        prop_assert_eq!(order.len(), g.num_vertices());
        let params = &sc.instance.params;
        for (u, v) in g.edges() {
            let to = &g.vertices[v];
            let c = to.color.unwrap();
            let deadline = sc.deadline_of_color(c);
            let arrival = match g.vertices[u].color {
                None => kinematics::depart(sc.sensor_of_color(c), deadline, params),
                Some(cu) => advance(g.vertices[u].time, sc.sensor_of_color(cu), sc.sensor_of_color(c), deadline, params),
            };
            let arrival = arrival.expect("edges only go to reachable buckets");
            prop_assert!(arrival <= to.time);
            if to.k > 0 {
                let prev = g.vertices[v - 1].time;
                prop_assert!(prev < arrival, "edge {u}->{v} skips a bucket");
            }
            if u != 0 {
                prop_assert!(to.time > g.vertices[u].time);
            }
        }
    }

    #[test]
    fn reachability_over_approximates_the_time_grid((n, k, alpha, seed) in scenario_args()) {
        let sc = small_scenario(n, k, alpha, seed);
        let g = build_time_expanded(&sc).unwrap();
        let reach = build_reachability(&sc);
        for (u, v) in g.edges() {
            let from = g.vertices[u].color.map_or(ReachabilityGraph::DEPOT, ReachabilityGraph::node_of_color);
            let to = ReachabilityGraph::node_of_color(g.vertices[v].color.unwrap());
            prop_assert!(reach.has_edge(from, to));
        }
    }

    #[test]
    fn table_check_agrees_with_the_grid((n, k, alpha, seed) in scenario_args(), mask in any::<u32>()) {
        let sc = small_scenario(n, k, alpha, seed);
        let ids: Vec<u32> = sc.demand.colors.iter().enumerate()
            .filter(|(c, _)| mask >> (c % 32) & 1 == 1)
            .map(|(_, &id)| id)
            .collect();
        let by_table = sc.table_after(&ids).is_satisfied();
        prop_assert_eq!(by_table, sc.verify_coverage(&ids));
        let colors = sc.demand.color_set_of(&ids).unwrap();
        prop_assert_eq!(by_table, sc.demand.satisfied(colors));
    }

    #[test]
    fn coverage_is_monotone_in_the_charged_set((n, k, alpha, seed) in scenario_args(), mask in any::<u32>(), extra in any::<u32>()) {
        let sc = small_scenario(n, k, alpha, seed);
        let pick = |m: u32| -> Vec<u32> {
            sc.demand.colors.iter().enumerate()
                .filter(|(c, _)| m >> (c % 32) & 1 == 1)
                .map(|(_, &id)| id)
                .collect()
        };
        let small = pick(mask);
        let large = pick(mask | extra);
        if sc.verify_coverage(&small) {
            prop_assert!(sc.verify_coverage(&large));
        }
        let open = |ids: &[u32]| sc.demand.open_entries(sc.demand.color_set_of(ids).unwrap());
        prop_assert!(open(&large) <= open(&small));
    }

    #[test]
    fn charging_never_drives_entries_negative(t in prop::collection::vec(0u32..4, 1..12), picks in prop::collection::vec(0u32..5, 0..20)) {
        let sc = small_scenario(12, 2, 0.45, 1);
        let width = sc.table.len();
        let mut table = RequirementTable { t: t.iter().cycle().take(width).copied().collect() };
        let ids: Vec<u32> = sc.instance.sensors.iter().map(|s| s.id).collect();
        for p in picks {
            let id = ids[p as usize % ids.len()];
            let next = apply_charge(&table, id, &sc.signatures);
            for (before, after) in table.t.iter().zip(&next.t) {
                prop_assert!(after <= before);
                prop_assert!(*before - *after <= 1);
            }
            table = next;
        }
    }

    #[test]
    fn tour_context_matches_path_evaluation((n, k, alpha, seed) in scenario_args(), perm in any::<u64>()) {
        let sc = small_scenario(n, k, alpha, seed);
        let tour = TourContext::new(&sc);
        let m = tour.len();
        if m == 0 {
            return Ok(());
        }
        // a pseudo-random permutation prefix of the colors
        let mut colors: Vec<usize> = (0..m).collect();
        let mut state = perm;
        for i in (1..m).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            colors.swap(i, (state >> 33) as usize % (i + 1));
        }
        colors.truncate(1 + (perm as usize % m));
        let ids = tour.ids(&colors);
        let eval = evaluate_path(&ids, &sc.instance).unwrap();
        match tour.times(&colors) {
            Some(times) => {
                prop_assert!(eval.feasible);
                prop_assert_eq!(&times, &eval.charge_times);
                prop_assert_eq!(tour.distance(&colors), eval.travel_distance);
            }
            None => prop_assert!(!eval.feasible),
        }

        // insertion into the longest feasible prefix
        let mut prefix = colors.clone();
        while tour.times(&prefix).is_none() {
            prefix.pop();
        }
        let times = tour.times(&prefix).unwrap();
        let prefix_ids = tour.ids(&prefix);
        for cand in (0..m).filter(|c| !prefix.contains(c)) {
            let fast = tour.best_insertion(&prefix, &times, cand);
            let slow = kinematics::best_insertion(&prefix_ids, tour.nodes[cand].id, &sc.instance);
            prop_assert_eq!(fast, slow);
            if let Some(ins) = fast {
                let mut next = prefix.clone();
                next.insert(ins.position, cand);
                let delta = tour.distance(&next) - tour.distance(&prefix);
                prop_assert_eq!(delta, ins.delta_distance);
            }
        }
    }

    #[test]
    fn feasible_tours_have_feasible_prefixes((n, k, alpha, seed) in scenario_args()) {
        let sc = small_scenario(n, k, alpha, seed);
        let tour = TourContext::new(&sc);
        let order: Vec<usize> = (0..tour.len()).collect();
        let mut longest = order.clone();
        while tour.times(&longest).is_none() {
            longest.pop();
        }
        for len in 0..=longest.len() {
            let ids = tour.ids(&longest[..len]);
            prop_assert!(verify(&ids, &sc).unwrap().deadlines_ok);
        }
    }

    #[test]
    fn later_start_never_arrives_earlier(
        t in 0.0f64..2000.0,
        dt in 0.0f64..500.0,
        residual in 0.0f64..10_800.0,
        beta in 0.01f64..10.0,
        x in 0.0f64..500.0,
    ) {
        let params = SimParams::default();
        let a = SensorNode { id: 1, position: Point::new(0.0, 0.0), residual_at_t0: residual, consumption_rate: beta };
        let b = SensorNode { id: 2, position: Point::new(x, 0.0), residual_at_t0: 5000.0, consumption_rate: 0.5 };
        let early = advance(t, &a, &b, f64::INFINITY, &params).unwrap();
        let late = advance(t + dt, &a, &b, f64::INFINITY, &params).unwrap();
        prop_assert!(late >= early);
        prop_assert!(early >= t + x / params.charger_speed);
    }
}

#[test]
fn color_sets_round_trip_through_ids() {
    let sc = small_scenario(14, 2, 0.5, 2);
    let all: Vec<u32> = sc.demand.colors.clone();
    let set = sc.demand.color_set_of(&all).unwrap();
    assert_eq!(set.len(), all.len());
    assert_eq!(sc.demand.color_set_of(&[]).unwrap(), ColorSet::EMPTY);
}
