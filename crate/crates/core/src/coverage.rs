//! Field segmentation into coverage subregions and the requirement table.
//!
//! Subregions are realized by sampling the field on a uniform grid and
//! grouping grid points by the set of sensors whose disks contain them.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::{NetworkInstance, Point, SimParams};

pub const DEFAULT_GRID_SPACING: f64 = 5.0;

/// Grid sample points over the area, row-major, both borders included.
pub fn grid_points(params: &SimParams, spacing: f64) -> Vec<Point> {
    let axis = |extent: f64| -> Vec<f64> {
        let steps = (extent / spacing - 1e-9).ceil().max(0.0) as usize;
        (0..=steps)
            .map(|i| (i as f64 * spacing).min(extent))
            .collect()
    };
    let xs = axis(params.area_width);
    let ys = axis(params.area_height);
    ys.iter()
        .flat_map(|&y| xs.iter().map(move |&x| Point::new(x, y)))
        .collect()
}

#[inline]
fn covers(sensor: &Point, q: &Point, range: f64) -> bool {
    sensor.distance(q) <= range
}

/// True iff every grid point lies within `range` of at least `k` positions.
pub fn points_k_covered(grid: &[Point], positions: &[Point], range: f64, k: u32) -> bool {
    let k = k as usize;
    grid.iter().all(|q| {
        let mut count = 0;
        for p in positions {
            if covers(p, q, range) {
                count += 1;
                if count >= k {
                    return true;
                }
            }
        }
        false
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subregion {
    /// Sorted ids of the sensors covering this subregion.
    pub signature: Vec<u32>,
    /// Number of grid points carrying this signature.
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageSignatureMap {
    pub grid_spacing: f64,
    pub subregions: Vec<Subregion>,
    by_sensor: BTreeMap<u32, Vec<usize>>,
}

impl CoverageSignatureMap {
    pub fn len(&self) -> usize {
        self.subregions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subregions.is_empty()
    }

    /// Indices of the subregions inside `sensor_id`'s disk.
    pub fn subregions_of(&self, sensor_id: u32) -> &[usize] {
        self.by_sensor
            .get(&sensor_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn index_of(&self, signature: &[u32]) -> Option<usize> {
        self.subregions.iter().position(|s| s.signature == signature)
    }
}

pub fn compute_signatures(inst: &NetworkInstance, grid_spacing: f64) -> Result<CoverageSignatureMap> {
    let range = inst.params.sensing_range;
    if !(grid_spacing > 0.0 && grid_spacing <= range) {
        return Err(Error::InvalidParams(format!(
            "grid spacing {grid_spacing} must lie in (0, {range}]"
        )));
    }
    let mut sensors: Vec<_> = inst.sensors.iter().collect();
    sensors.sort_by_key(|s| s.id);

    let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for q in grid_points(&inst.params, grid_spacing) {
        let signature: Vec<u32> = sensors
            .iter()
            .filter(|s| covers(&s.position, &q, range))
            .map(|s| s.id)
            .collect();
        *counts.entry(signature).or_insert(0) += 1;
    }

    let subregions: Vec<Subregion> = counts
        .into_iter()
        .map(|(signature, points)| Subregion { signature, points })
        .collect();
    let mut by_sensor: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (idx, sub) in subregions.iter().enumerate() {
        for &id in &sub.signature {
            by_sensor.entry(id).or_default().push(idx);
        }
    }
    Ok(CoverageSignatureMap {
        grid_spacing,
        subregions,
        by_sensor,
    })
}

/// Minimum number of requesters still to charge per subregion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequirementTable {
    pub t: Vec<u32>,
}

impl RequirementTable {
    pub fn is_satisfied(&self) -> bool {
        self.t.iter().all(|&v| v == 0)
    }

    pub fn nonzero(&self) -> usize {
        self.t.iter().filter(|&&v| v > 0).count()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// `T[i] = max(0, k - covering(i) + requesting(i))` for every subregion.
pub fn build_requirement_table(
    sig: &CoverageSignatureMap,
    requester_ids: &BTreeSet<u32>,
    k: u32,
) -> Result<RequirementTable> {
    let mut t = Vec::with_capacity(sig.len());
    for sub in &sig.subregions {
        let total = sub.signature.len();
        if total < k as usize {
            return Err(Error::UnderCovered {
                signature: sub.signature.clone(),
                covering: total,
                k,
            });
        }
        let requesting = sub
            .signature
            .iter()
            .filter(|id| requester_ids.contains(id))
            .count();
        let need = k as i64 - total as i64 + requesting as i64;
        t.push(need.max(0) as u32);
    }
    Ok(RequirementTable { t })
}

/// Table after charging `sensor_id`: every subregion it covers drops by one,
/// floored at zero.
pub fn apply_charge(
    table: &RequirementTable,
    sensor_id: u32,
    sig: &CoverageSignatureMap,
) -> RequirementTable {
    let mut next = table.clone();
    for &idx in sig.subregions_of(sensor_id) {
        next.t[idx] = next.t[idx].saturating_sub(1);
    }
    next
}

/// Direct grid check: every sample point has at least k alive sensors, where
/// alive means not requesting or charged on this tour.
pub fn verify_k_coverage(
    inst: &NetworkInstance,
    charged_ids: &BTreeSet<u32>,
    grid_spacing: f64,
) -> bool {
    let alive: Vec<Point> = inst
        .sensors
        .iter()
        .filter(|s| !inst.is_requester(s.id) || charged_ids.contains(&s.id))
        .map(|s| s.position)
        .collect();
    let grid = grid_points(&inst.params, grid_spacing);
    points_k_covered(&grid, &alive, inst.params.sensing_range, inst.params.coverage_k)
}

pub fn requester_ids(inst: &NetworkInstance) -> BTreeSet<u32> {
    inst.requests.iter().map(|r| r.sensor_id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{SensorNode, SimParams};

    fn params(w: f64, h: f64, r: f64, k: u32) -> SimParams {
        SimParams {
            area_width: w,
            area_height: h,
            sensing_range: r,
            coverage_k: k,
            depot: Point::new(w / 2.0, h / 2.0),
            ..SimParams::default()
        }
    }

    fn node(id: u32, x: f64, y: f64, residual: f64) -> SensorNode {
        SensorNode {
            id,
            position: Point::new(x, y),
            residual_at_t0: residual,
            consumption_rate: 0.5,
        }
    }

    fn sig_with(table: Vec<(Vec<u32>, usize)>) -> CoverageSignatureMap {
        let subregions: Vec<Subregion> = table
            .into_iter()
            .map(|(signature, points)| Subregion { signature, points })
            .collect();
        let mut by_sensor: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, s) in subregions.iter().enumerate() {
            for &id in &s.signature {
                by_sensor.entry(id).or_default().push(i);
            }
        }
        CoverageSignatureMap {
            grid_spacing: 1.0,
            subregions,
            by_sensor,
        }
    }

    #[test]
    fn grid_includes_both_borders() {
        let g = grid_points(&SimParams::default(), 5.0);
        assert_eq!(g.len(), 101 * 101);
        assert_eq!(g.last().unwrap(), &Point::new(500.0, 500.0));
    }

    #[test]
    fn boundary_point_is_covered() {
        // sensor at the center, grid point exactly r away
        let p = params(20.0, 20.0, 10.0, 1);
        let inst = NetworkInstance {
            schema_version: 1,
            params: p,
            sensors: vec![node(1, 10.0, 10.0, 10_800.0)],
            requests: vec![],
            seed: 0,
        };
        let sig = compute_signatures(&inst, 10.0).unwrap();
        // grid 0,10,20: the 4 edge midpoints are exactly 10 m away
        let covered = sig.index_of(&[1]).map(|i| sig.subregions[i].points);
        assert_eq!(covered, Some(5));
        assert_eq!(sig.index_of(&[]).map(|i| sig.subregions[i].points), Some(4));
    }

    #[test]
    fn disjoint_disks_give_two_signatures_plus_uncovered() {
        let p = params(100.0, 20.0, 8.0, 1);
        let inst = NetworkInstance {
            schema_version: 1,
            params: p,
            sensors: vec![node(1, 10.0, 10.0, 10_800.0), node(2, 90.0, 10.0, 10_800.0)],
            requests: vec![],
            seed: 0,
        };
        let sig = compute_signatures(&inst, 2.0).unwrap();
        let sigs: Vec<_> = sig.subregions.iter().map(|s| s.signature.clone()).collect();
        assert_eq!(sigs, vec![vec![], vec![1], vec![2]]);
    }

    #[test]
    fn overlapping_disks_match_brute_force_classification() {
        let p = params(60.0, 40.0, 20.0, 1);
        let inst = NetworkInstance {
            schema_version: 1,
            params: p.clone(),
            sensors: vec![node(1, 20.0, 20.0, 10_800.0), node(2, 40.0, 20.0, 10_800.0)],
            requests: vec![],
            seed: 0,
        };
        let sig = compute_signatures(&inst, 1.0).unwrap();
        // brute force: classify each integer point independently
        let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        for y in 0..=40 {
            for x in 0..=60 {
                let (x, y) = (x as f64, y as f64);
                let mut s = vec![];
                if (x - 20.0).powi(2) + (y - 20.0).powi(2) <= 400.0 {
                    s.push(1);
                }
                if (x - 40.0).powi(2) + (y - 20.0).powi(2) <= 400.0 {
                    s.push(2);
                }
                *counts.entry(s).or_default() += 1;
            }
        }
        let got: BTreeMap<Vec<u32>, usize> = sig
            .subregions
            .iter()
            .map(|s| (s.signature.clone(), s.points))
            .collect();
        assert_eq!(got, counts);
        assert!(got.contains_key(&vec![1]) && got.contains_key(&vec![2]) && got.contains_key(&vec![1, 2]));
    }

    #[test]
    fn requirement_formula_cases() {
        let sig = sig_with(vec![
            (vec![1, 2, 3, 4, 5], 1),    // 5 covering, 4 requesting
            (vec![6, 7, 8, 9, 10, 11], 1), // 6 covering, 1 requesting
            (vec![12, 13, 14], 1),       // exactly k, 2 requesting
        ]);
        let requesters: BTreeSet<u32> = [1, 2, 3, 4, 6, 12, 13].into();
        let t = build_requirement_table(&sig, &requesters, 3).unwrap();
        assert_eq!(t.t, vec![2, 0, 2]);
    }

    #[test]
    fn under_covered_subregion_is_an_error() {
        let sig = sig_with(vec![(vec![1, 2], 1), (vec![], 3)]);
        let err = build_requirement_table(&sig, &BTreeSet::new(), 1).unwrap_err();
        assert!(matches!(err, Error::UnderCovered { covering: 0, .. }));
    }

    #[test]
    fn charging_decrements_covered_entries() {
        let sig = sig_with(vec![(vec![1, 2], 1), (vec![2, 3], 1)]);
        let t = RequirementTable { t: vec![2, 0] };
        assert_eq!(apply_charge(&t, 1, &sig).t, vec![1, 0]);
        assert_eq!(t.t, vec![2, 0], "input untouched");

        let zero = RequirementTable { t: vec![0, 0] };
        assert_eq!(apply_charge(&zero, 2, &sig), zero);

        let ones = RequirementTable { t: vec![1, 1] };
        assert_eq!(apply_charge(&ones, 2, &sig).t, vec![0, 0]);
    }
}
