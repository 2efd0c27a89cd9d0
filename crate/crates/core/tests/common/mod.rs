#![allow(dead_code)]

use kcharge::{GenerationParams, NetworkInstance, Point, Scenario, SensorNode, SimParams};

/// Field small enough that a handful of sensors k-cover it.
pub fn small_gen(n: usize, k: u32, alpha: f64) -> GenerationParams {
    GenerationParams {
        area_width: 250.0,
        area_height: 250.0,
        ..GenerationParams::new(n, k, alpha)
    }
}

pub fn small_scenario(n: usize, k: u32, alpha: f64, seed: u64) -> Scenario {
    let inst = kcharge::generate_instance(&small_gen(n, k, alpha), seed).expect("small field is coverable");
    Scenario::new(inst, 5.0).expect("generated instances are k-covered")
}

/// `(id, x, y, residual_j, beta_w)`.
pub type Spec = (u32, f64, f64, f64, f64);

/// Hand-built instance on a `side` x `side` field where every sensor's disk
/// covers the whole field, so the field is a single subregion.
pub fn one_region(side: f64, k: u32, depot: Point, sensors: &[Spec]) -> Scenario {
    let params = SimParams {
        area_width: side,
        area_height: side,
        sensing_range: 2.0 * side,
        coverage_k: k,
        depot,
        ..SimParams::default()
    };
    let sensors = sensors
        .iter()
        .map(|&(id, x, y, residual_at_t0, consumption_rate)| SensorNode {
            id,
            position: Point::new(x, y),
            residual_at_t0,
            consumption_rate,
        })
        .collect();
    let inst = NetworkInstance::new(params, sensors, 0).expect("valid hand instance");
    Scenario::new(inst, 5.0).expect("covered hand instance")
}

/// Two requesters must both be charged: a near one with a long deadline
/// and a far one whose deadline leaves no time to charge anything first.
/// Nearest-first gets stuck; going far first works.
pub fn trap() -> Scenario {
    one_region(
        200.0,
        3,
        Point::new(0.0, 0.0),
        &[
            (1, 10.0, 0.0, 4000.0, 0.5),
            (2, 100.0, 0.0, 540.0, 18.0),
            (3, 150.0, 150.0, 10_000.0, 0.5),
        ],
    )
}

/// Five requesters, any three of which restore coverage; three sit in a
/// tight cluster next to the depot.
pub fn toy() -> Scenario {
    one_region(
        200.0,
        4,
        Point::new(100.0, 100.0),
        &[
            (1, 120.0, 100.0, 3240.0, 0.2),
            (2, 120.0, 120.0, 3000.0, 0.25),
            (3, 100.0, 125.0, 3500.0, 0.3),
            (4, 180.0, 30.0, 2800.0, 0.2),
            (5, 20.0, 180.0, 3100.0, 0.2),
            (6, 50.0, 50.0, 10_000.0, 0.5),
        ],
    )
}
