//! A solved-for scenario (instance + coverage analysis) and a compact view of
//! the requirement table that search code can query without copying tables.

use std::collections::BTreeSet;

use crate::coverage::{self, CoverageSignatureMap, RequirementTable};
use crate::error::{Error, Result};
use crate::instance::{NetworkInstance, SensorNode};
use crate::kinematics;

/// Maximum number of chargeable requesters a [`ColorSet`] can index.
pub const MAX_COLORS: usize = 128;

/// Set of requester colors (local requester indices).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorSet(pub u128);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);

    #[inline]
    pub fn contains(self, c: usize) -> bool {
        self.0 >> c & 1 == 1
    }

    #[inline]
    pub fn with(self, c: usize) -> ColorSet {
        ColorSet(self.0 | 1u128 << c)
    }

    #[inline]
    pub fn without(self, c: usize) -> ColorSet {
        ColorSet(self.0 & !(1u128 << c))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_subset_of(self, other: ColorSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_COLORS).filter(move |&c| self.contains(c))
    }
}

#[derive(Clone, Debug)]
struct Entry {
    need: u32,
    covering: ColorSet,
}

/// The nonzero part of a requirement table, indexed by requester color.
///
/// After charging a color set `C`, an active entry `e` still needs
/// `max(0, need_e - |C ∩ covering_e|)` charges, which is exactly what
/// repeated [`coverage::apply_charge`] produces.
#[derive(Clone, Debug)]
pub struct Demand {
    /// Sensor id per color. Only requesters with a deadline after departure
    /// are chargeable and get a color.
    pub colors: Vec<u32>,
    entries: Vec<Entry>,
    /// Active entries each color covers.
    covers: Vec<Vec<usize>>,
    /// Subregion index per active entry.
    subregion: Vec<usize>,
}

impl Demand {
    pub fn new(inst: &NetworkInstance, sig: &CoverageSignatureMap, table: &RequirementTable) -> Result<Self> {
        let colors: Vec<u32> = inst
            .requests
            .iter()
            .filter(|r| kinematics::chargeable_deadline(inst, r.sensor_id).is_some())
            .map(|r| r.sensor_id)
            .collect();
        if colors.len() > MAX_COLORS {
            return Err(Error::BudgetExceeded(format!(
                "{} chargeable requesters exceed the {MAX_COLORS}-color limit",
                colors.len()
            )));
        }
        let mut entries = Vec::new();
        let mut subregion = Vec::new();
        let mut covers = vec![Vec::new(); colors.len()];
        for (idx, &need) in table.t.iter().enumerate() {
            if need == 0 {
                continue;
            }
            let e = entries.len();
            let mut covering = ColorSet::EMPTY;
            for (c, &id) in colors.iter().enumerate() {
                if sig.subregions_of(id).contains(&idx) {
                    covering = covering.with(c);
                    covers[c].push(e);
                }
            }
            entries.push(Entry { need, covering });
            subregion.push(idx);
        }
        Ok(Demand {
            colors,
            entries,
            covers,
            subregion,
        })
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn color_of(&self, sensor_id: u32) -> Option<usize> {
        self.colors.iter().position(|&id| id == sensor_id)
    }

    #[inline]
    fn remaining_at(&self, e: usize, charged: ColorSet) -> u32 {
        let entry = &self.entries[e];
        let done = ColorSet(charged.0 & entry.covering.0).len() as u32;
        entry.need.saturating_sub(done)
    }

    /// Whether charging `color` after `charged` lowers at least one entry.
    #[inline]
    pub fn decrements(&self, charged: ColorSet, color: usize) -> bool {
        self.covers[color]
            .iter()
            .any(|&e| self.remaining_at(e, charged) > 0)
    }

    /// Number of active entries `color` would lower.
    pub fn decrement_count(&self, charged: ColorSet, color: usize) -> usize {
        self.covers[color]
            .iter()
            .filter(|&&e| self.remaining_at(e, charged) > 0)
            .count()
    }

    #[inline]
    pub fn satisfied(&self, charged: ColorSet) -> bool {
        (0..self.entries.len()).all(|e| self.remaining_at(e, charged) == 0)
    }

    /// Active entries still above zero.
    pub fn open_entries(&self, charged: ColorSet) -> usize {
        (0..self.entries.len())
            .filter(|&e| self.remaining_at(e, charged) > 0)
            .count()
    }

    /// Materializes the full table after charging `charged`.
    pub fn table_after(&self, base: &RequirementTable, charged: ColorSet) -> RequirementTable {
        let mut t = base.clone();
        for (e, &idx) in self.subregion.iter().enumerate() {
            t.t[idx] = self.remaining_at(e, charged);
        }
        t
    }

    pub fn color_set_of(&self, ids: &[u32]) -> Option<ColorSet> {
        ids.iter()
            .try_fold(ColorSet::EMPTY, |acc, &id| self.color_of(id).map(|c| acc.with(c)))
    }
}

/// Instance plus its coverage analysis: everything a solver needs.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub instance: NetworkInstance,
    pub signatures: CoverageSignatureMap,
    pub table: RequirementTable,
    pub demand: Demand,
}

impl Scenario {
    pub fn new(instance: NetworkInstance, grid_spacing: f64) -> Result<Self> {
        let signatures = coverage::compute_signatures(&instance, grid_spacing)?;
        let table = coverage::build_requirement_table(
            &signatures,
            &coverage::requester_ids(&instance),
            instance.params.coverage_k,
        )?;
        let demand = Demand::new(&instance, &signatures, &table)?;
        Ok(Scenario {
            instance,
            signatures,
            table,
            demand,
        })
    }

    pub fn grid_spacing(&self) -> f64 {
        self.signatures.grid_spacing
    }

    pub fn sensor_of_color(&self, color: usize) -> &SensorNode {
        let id = self.demand.colors[color];
        self.instance
            .sensor(id)
            .expect("colors reference existing sensors")
    }

    pub fn deadline_of_color(&self, color: usize) -> f64 {
        self.instance
            .deadline_of(self.demand.colors[color])
            .expect("colors are requesters")
    }

    /// Requirement table after charging `ids`, via repeated `apply_charge`.
    pub fn table_after(&self, ids: &[u32]) -> RequirementTable {
        ids.iter().fold(self.table.clone(), |t, &id| {
            coverage::apply_charge(&t, id, &self.signatures)
        })
    }

    pub fn verify_coverage(&self, charged: &[u32]) -> bool {
        let set: BTreeSet<u32> = charged.iter().copied().collect();
        coverage::verify_k_coverage(&self.instance, &set, self.grid_spacing())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_set_ops() {
        let s = ColorSet::EMPTY.with(0).with(5).with(127);
        assert!(s.contains(5) && s.contains(127) && !s.contains(4));
        assert_eq!(s.len(), 3);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 5, 127]);
        assert!(s.without(5).is_subset_of(s));
        assert!(!s.is_subset_of(s.without(0)));
    }
}
