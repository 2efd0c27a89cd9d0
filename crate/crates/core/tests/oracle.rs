mod common;

use common::{one_region, trap};
use kcharge::oracle::{enumerate_charge_sets, solve_exact, OracleBudget, TimeMode};
use kcharge::Point;

fn sets_of(sc: &kcharge::Scenario) -> Vec<Vec<u32>> {
    enumerate_charge_sets(
        &sc.table,
        &sc.instance.requests,
        &sc.signatures,
        sc.instance.params.departure_time,
        &OracleBudget::default(),
    )
    .unwrap()
}

#[test]
fn picks_the_nearer_of_two_interchangeable_requesters() {
    // k = 2 with three sensors, two of them requesting: either requester
    // alone restores coverage
    let sc = one_region(
        200.0,
        2,
        Point::new(0.0, 0.0),
        &[
            (1, 100.0, 0.0, 3000.0, 0.2),
            (2, 0.0, 150.0, 3000.0, 0.2),
            (3, 200.0, 200.0, 10_000.0, 0.2),
        ],
    );
    assert_eq!(sc.table.t, vec![1]);
    assert_eq!(sets_of(&sc), vec![vec![1], vec![2]]);
    let sol = solve_exact(&sc, &OracleBudget::default(), TimeMode::Continuous)
        .unwrap()
        .unwrap();
    assert_eq!(sol.order, vec![1]);
    assert_eq!(sol.distance_m, 200.0);
}

#[test]
fn exactly_k_covered_region_forces_every_requester() {
    let sc = one_region(
        100.0,
        3,
        Point::new(50.0, 50.0),
        &[
            (1, 10.0, 10.0, 2000.0, 0.2),
            (2, 90.0, 10.0, 2000.0, 0.2),
            (3, 50.0, 90.0, 9000.0, 0.2),
        ],
    );
    assert_eq!(sc.table.t, vec![2]);
    assert_eq!(sets_of(&sc), vec![vec![1, 2]]);
}

#[test]
fn over_covered_region_yields_singletons() {
    let sc = one_region(
        100.0,
        3,
        Point::new(50.0, 50.0),
        &[
            (1, 10.0, 10.0, 2000.0, 0.2),
            (2, 90.0, 10.0, 2000.0, 0.2),
            (3, 50.0, 90.0, 2000.0, 0.2),
            (4, 20.0, 70.0, 9000.0, 0.2),
            (5, 70.0, 70.0, 9000.0, 0.2),
        ],
    );
    assert_eq!(sc.table.t, vec![1]);
    assert_eq!(sets_of(&sc), vec![vec![1], vec![2], vec![3]]);
}

#[test]
fn zero_table_gives_the_empty_tour() {
    let sc = one_region(
        100.0,
        1,
        Point::new(50.0, 50.0),
        &[(1, 10.0, 10.0, 2000.0, 0.2), (2, 90.0, 10.0, 9000.0, 0.2)],
    );
    assert!(sc.table.is_satisfied());
    assert_eq!(sets_of(&sc), vec![Vec::<u32>::new()]);
    let sol = solve_exact(&sc, &OracleBudget::default(), TimeMode::Continuous)
        .unwrap()
        .unwrap();
    assert!(sol.order.is_empty());
    assert_eq!(sol.distance_m, 0.0);
}

#[test]
fn trap_optimum_goes_far_first() {
    let sc = trap();
    for mode in [TimeMode::Continuous, TimeMode::Grid] {
        let sol = solve_exact(&sc, &OracleBudget::default(), mode).unwrap().unwrap();
        assert_eq!(sol.order, vec![2, 1]);
        assert!(sol.feasible);
        assert_eq!(sol.distance_m, 200.0);
    }
}

#[test]
fn budget_is_enforced() {
    let specs: Vec<common::Spec> = (1..=12)
        .map(|i| (i, 5.0 * i as f64, 10.0, 2000.0, 0.2))
        .collect();
    let sc = one_region(100.0, 1, Point::new(50.0, 50.0), &specs);
    let err = solve_exact(&sc, &OracleBudget::default(), TimeMode::Continuous).unwrap_err();
    assert!(matches!(err, kcharge::Error::BudgetExceeded(_)));
}
