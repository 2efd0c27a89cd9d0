//! Network data model, seeded instance generation and instance files.
//!
//! Times are absolute seconds on the charger clock; the charger departs the
//! depot at `departure_time` (0 by default) and a request deadline is the
//! moment the sensor's battery runs dry at its nominal consumption rate.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coverage;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance. Every distance in the crate goes through here so
    /// that tour lengths accumulated by different solvers agree bit for bit.
    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub area_width: f64,
    pub area_height: f64,
    pub sensing_range: f64,
    /// Charger speed in m/s.
    pub charger_speed: f64,
    /// Charger travel cost in J/m.
    pub move_cost: f64,
    pub battery_capacity: f64,
    /// Wireless energy transfer rate in W.
    pub transfer_rate: f64,
    /// Request threshold as a fraction of `battery_capacity`.
    pub threshold: f64,
    pub coverage_k: u32,
    pub depot: Point,
    pub departure_time: f64,
    pub time_step: f64,
    pub include_return: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            area_width: 500.0,
            area_height: 500.0,
            sensing_range: 135.0,
            charger_speed: 5.0,
            move_cost: 600.0,
            battery_capacity: 10_800.0,
            transfer_rate: 20.0,
            threshold: 0.45,
            coverage_k: 2,
            depot: Point::new(250.0, 250.0),
            departure_time: 0.0,
            time_step: 1.0,
            include_return: true,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("area_width", self.area_width),
            ("area_height", self.area_height),
            ("sensing_range", self.sensing_range),
            ("charger_speed", self.charger_speed),
            ("move_cost", self.move_cost),
            ("battery_capacity", self.battery_capacity),
            ("transfer_rate", self.transfer_rate),
            ("time_step", self.time_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "threshold must lie in (0, 1], got {}",
                self.threshold
            )));
        }
        if self.coverage_k == 0 {
            return Err(Error::InvalidParams("coverage_k must be at least 1".into()));
        }
        if !self.departure_time.is_finite() || self.departure_time < 0.0 {
            return Err(Error::InvalidParams("departure_time must be finite and >= 0".into()));
        }
        if !self.contains(&self.depot) {
            return Err(Error::InvalidParams("depot lies outside the area".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= 0.0 && p.x <= self.area_width && p.y >= 0.0 && p.y <= self.area_height
    }

    pub fn diagonal(&self) -> f64 {
        self.area_width.hypot(self.area_height)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: u32,
    #[serde(flatten)]
    pub position: Point,
    #[serde(rename = "residual_j")]
    pub residual_at_t0: f64,
    #[serde(rename = "beta_w")]
    pub consumption_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargingRequest {
    pub sensor_id: u32,
    #[serde(rename = "deadline_s")]
    pub deadline: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub schema_version: u32,
    pub params: SimParams,
    pub sensors: Vec<SensorNode>,
    pub requests: Vec<ChargingRequest>,
    pub seed: u64,
}

impl NetworkInstance {
    /// Builds an instance from explicit sensors, deriving the request set.
    pub fn new(params: SimParams, sensors: Vec<SensorNode>, seed: u64) -> Result<Self> {
        let requests = derive_requests(&sensors, &params);
        let inst = NetworkInstance {
            schema_version: SCHEMA_VERSION,
            params,
            sensors,
            requests,
            seed,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn sensor_index(&self, id: u32) -> Option<usize> {
        self.sensors.iter().position(|s| s.id == id)
    }

    pub fn sensor(&self, id: u32) -> Option<&SensorNode> {
        self.sensors.iter().find(|s| s.id == id)
    }

    pub fn deadline_of(&self, id: u32) -> Option<f64> {
        self.requests
            .iter()
            .find(|r| r.sensor_id == id)
            .map(|r| r.deadline)
    }

    pub fn is_requester(&self, id: u32) -> bool {
        self.requests.iter().any(|r| r.sensor_id == id)
    }

    /// Checks every structural invariant an instance file must satisfy.
    /// Initial k-coverage is a property of the field and is checked by the
    /// coverage analysis instead.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        p.validate().map_err(|e| Error::Invariant(e.to_string()))?;
        let mut ids = HashSet::new();
        for s in &self.sensors {
            if !ids.insert(s.id) {
                return Err(Error::Invariant(format!("duplicate sensor id {}", s.id)));
            }
            if !p.contains(&s.position) {
                return Err(Error::Invariant(format!("sensor {} lies outside the area", s.id)));
            }
            if !(s.residual_at_t0 >= 0.0 && s.residual_at_t0 <= p.battery_capacity) {
                return Err(Error::Invariant(format!(
                    "sensor {} residual {} outside [0, {}]",
                    s.id, s.residual_at_t0, p.battery_capacity
                )));
            }
            if !(s.consumption_rate.is_finite() && s.consumption_rate > 0.0) {
                return Err(Error::Invariant(format!(
                    "sensor {} consumption rate must be positive",
                    s.id
                )));
            }
        }
        let mut requested = HashSet::new();
        for r in &self.requests {
            let Some(s) = self.sensor(r.sensor_id) else {
                return Err(Error::Invariant(format!(
                    "request references unknown sensor {}",
                    r.sensor_id
                )));
            };
            if !requested.insert(r.sensor_id) {
                return Err(Error::Invariant(format!("duplicate request for sensor {}", r.sensor_id)));
            }
            let expected = deadline_for(s, p);
            let tol = 1e-9 * expected.abs().max(1.0);
            if (r.deadline - expected).abs() > tol {
                return Err(Error::Invariant(format!(
                    "request deadline {} for sensor {} differs from residual/rate = {}",
                    r.deadline, r.sensor_id, expected
                )));
            }
        }
        for s in &self.sensors {
            if qualifies(s, p) != requested.contains(&s.id) {
                return Err(Error::Invariant(format!(
                    "sensor {} request flag disagrees with the threshold",
                    s.id
                )));
            }
        }
        Ok(())
    }
}

fn qualifies(s: &SensorNode, p: &SimParams) -> bool {
    s.residual_at_t0 / p.battery_capacity <= p.threshold
}

fn deadline_for(s: &SensorNode, p: &SimParams) -> f64 {
    p.departure_time + s.residual_at_t0 / s.consumption_rate
}

/// One request per sensor whose residual fraction is at or below the
/// threshold, in sensor order.
pub fn derive_requests(sensors: &[SensorNode], params: &SimParams) -> Vec<ChargingRequest> {
    sensors
        .iter()
        .filter(|s| qualifies(s, params))
        .map(|s| ChargingRequest {
            sensor_id: s.id,
            deadline: deadline_for(s, params),
        })
        .collect()
}

/// Knobs for [`generate_instance`]. Defaults reproduce the evaluation setup
/// (500 m square, 135 m sensing range, 10.8 kJ batteries, 20 W transfer,
/// 5 m/s at 600 J/m, depot at the center).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub n: usize,
    pub k: u32,
    pub alpha: f64,
    pub area_width: f64,
    pub area_height: f64,
    pub sensing_range: f64,
    pub battery_capacity: f64,
    pub transfer_rate: f64,
    pub charger_speed: f64,
    pub move_cost: f64,
    /// Residual energy is drawn from `(residual_min_fraction * B, B]`.
    pub residual_min_fraction: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub grid_spacing: f64,
    pub max_attempts: usize,
    pub time_step: f64,
    pub include_return: bool,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            n: 64,
            k: 2,
            alpha: 0.45,
            area_width: 500.0,
            area_height: 500.0,
            sensing_range: 135.0,
            battery_capacity: 10_800.0,
            transfer_rate: 20.0,
            charger_speed: 5.0,
            move_cost: 600.0,
            residual_min_fraction: 0.05,
            beta_min: 0.2,
            beta_max: 1.0,
            grid_spacing: coverage::DEFAULT_GRID_SPACING,
            max_attempts: 10_000,
            time_step: 1.0,
            include_return: true,
        }
    }
}

impl GenerationParams {
    pub fn new(n: usize, k: u32, alpha: f64) -> Self {
        GenerationParams {
            n,
            k,
            alpha,
            ..Default::default()
        }
    }

    pub fn sim_params(&self) -> SimParams {
        SimParams {
            area_width: self.area_width,
            area_height: self.area_height,
            sensing_range: self.sensing_range,
            charger_speed: self.charger_speed,
            move_cost: self.move_cost,
            battery_capacity: self.battery_capacity,
            transfer_rate: self.transfer_rate,
            threshold: self.alpha,
            coverage_k: self.k,
            depot: Point::new(self.area_width / 2.0, self.area_height / 2.0),
            departure_time: 0.0,
            time_step: self.time_step,
            include_return: self.include_return,
        }
    }
}

/// Draws a random deployment that k-covers the field, then batteries and
/// consumption rates. Deterministic in `(gen, seed)`.
pub fn generate_instance(gen: &GenerationParams, seed: u64) -> Result<NetworkInstance> {
    let params = gen.sim_params();
    params.validate()?;
    if gen.n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if !(gen.residual_min_fraction >= 0.0 && gen.residual_min_fraction < 1.0) {
        return Err(Error::InvalidParams("residual_min_fraction must lie in [0, 1)".into()));
    }
    if !(gen.beta_min > 0.0 && gen.beta_min <= gen.beta_max) {
        return Err(Error::InvalidParams("need 0 < beta_min <= beta_max".into()));
    }
    if !(gen.grid_spacing > 0.0 && gen.grid_spacing <= gen.sensing_range) {
        return Err(Error::InvalidParams("grid spacing must lie in (0, sensing_range]".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = coverage::grid_points(&params, gen.grid_spacing);
    let mut positions = None;
    for _ in 0..gen.max_attempts {
        let candidate: Vec<Point> = (0..gen.n)
            .map(|_| {
                Point::new(
                    rng.gen::<f64>() * params.area_width,
                    rng.gen::<f64>() * params.area_height,
                )
            })
            .collect();
        if coverage::points_k_covered(&grid, &candidate, params.sensing_range, gen.k) {
            positions = Some(candidate);
            break;
        }
    }
    let Some(positions) = positions else {
        return Err(Error::CoverageUnachievable {
            n: gen.n,
            k: gen.k,
            attempts: gen.max_attempts,
        });
    };

    let b = params.battery_capacity;
    let sensors: Vec<SensorNode> = positions
        .into_iter()
        .enumerate()
        .map(|(i, position)| {
            // 1 - U[0,1) lies in (0, 1], giving a left-open interval.
            let u = 1.0 - rng.gen::<f64>();
            let frac = gen.residual_min_fraction + (1.0 - gen.residual_min_fraction) * u;
            let beta = if gen.beta_max > gen.beta_min {
                rng.gen_range(gen.beta_min..=gen.beta_max)
            } else {
                gen.beta_min
            };
            SensorNode {
                id: i as u32 + 1,
                position,
                residual_at_t0: (frac * b).min(b),
                consumption_rate: beta,
            }
        })
        .collect();
    NetworkInstance::new(params, sensors, seed)
}

pub fn to_json(inst: &NetworkInstance) -> Result<String> {
    serde_json::to_string_pretty(inst).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn from_json(text: &str) -> Result<NetworkInstance> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Malformed("missing field `schema_version`".into()))?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaVersion {
            expected: SCHEMA_VERSION,
            found: found as u32,
        });
    }
    let inst: NetworkInstance =
        serde_json::from_value(value).map_err(|e| Error::Malformed(e.to_string()))?;
    inst.validate()?;
    Ok(inst)
}

pub fn save_instance(inst: &NetworkInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = to_json(inst)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<NetworkInstance> {
    from_json(&fs::read_to_string(path)?)
}
