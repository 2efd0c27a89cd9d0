//! Experiment runner for the kcharge solvers: seeded sweeps over `(k, n,
//! alpha)`, one record per (algorithm, instance), CSV output and per-cell
//! medians.

use std::cmp::Ordering;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use kcharge::baselines::{solve_acs, solve_greedy, solve_random, AcsParams};
use kcharge::dp::{self, DpConfig};
use kcharge::oracle::{solve_exact, OracleBudget, TimeMode};
use kcharge::rl::{solve_dqn, RlHyperparams};
use kcharge::{generate_instance, verify, GenerationParams, NetworkInstance, Scenario, Solution};
use serde::{Deserialize, Serialize};

/// Column order of the results CSV.
pub const CSV_HEADER: &str =
    "algorithm,k,n,alpha,seed,feasible,travel_distance_m,travel_energy_kj,compute_time_s,nodes_charged,status";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] kcharge::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dp,
    Dqn,
    Acs,
    Greedy,
    Random,
    Exact,
}

impl Algorithm {
    /// The five solvers compared in the sweeps.
    pub const COMPARED: [Algorithm; 5] = [
        Algorithm::Dp,
        Algorithm::Dqn,
        Algorithm::Acs,
        Algorithm::Greedy,
        Algorithm::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dp => "dp",
            Algorithm::Dqn => "dqn",
            Algorithm::Acs => "acs",
            Algorithm::Greedy => "greedy",
            Algorithm::Random => "random",
            Algorithm::Exact => "exact",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        [Algorithm::Exact]
            .into_iter()
            .chain(Algorithm::COMPARED)
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    NoneFound,
    BudgetExceeded,
    /// No k-covered deployment within the retry bound; no solver ran.
    GenerationFailed,
    /// The solver errored or returned a tour that failed re-validation.
    SolverBug,
}

/// Solver settings shared by every run of a sweep. Seeds in `rl` and `acs`
/// are replaced by the instance seed of each run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub dp_label_cap: usize,
    pub dp_filter: bool,
    pub dp_dominance: bool,
    pub rl: RlHyperparams,
    pub acs: AcsParams,
    pub random_restarts: usize,
    pub oracle_max_requesters: usize,
    /// Wall-time limit for the exact solvers (dp, exact); `None` = no limit.
    pub time_limit_s: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            dp_label_cap: DpConfig::default().label_cap,
            dp_filter: true,
            dp_dominance: false,
            rl: RlHyperparams::default(),
            acs: AcsParams::default(),
            random_restarts: 100,
            oracle_max_requesters: OracleBudget::default().max_requesters,
            time_limit_s: None,
        }
    }
}

impl SolverSettings {
    pub fn dp_config(&self) -> DpConfig {
        DpConfig {
            label_cap: self.dp_label_cap,
            filter: self.dp_filter,
            dominance: self.dp_dominance,
            time_limit: self.time_limit_s.map(Duration::from_secs_f64),
            ..DpConfig::default()
        }
    }

    pub fn oracle_budget(&self) -> OracleBudget {
        let mut budget = OracleBudget {
            max_requesters: self.oracle_max_requesters,
            ..OracleBudget::default()
        };
        if let Some(s) = self.time_limit_s {
            budget.time_limit = Duration::from_secs_f64(s);
        }
        budget
    }

    pub fn validate(&self) -> Result<()> {
        if self.dp_label_cap == 0 || self.random_restarts == 0 {
            return Err(BenchError::Config("label cap and restarts must be positive".into()));
        }
        if let Some(s) = self.time_limit_s {
            if !(s > 0.0 && s.is_finite()) {
                return Err(BenchError::Config("time limit must be positive".into()));
            }
        }
        self.rl.validate()?;
        self.acs.validate()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub ks: Vec<u32>,
    pub ns: Vec<usize>,
    pub alphas: Vec<f64>,
    /// Seeds `seed_base .. seed_base + seeds` in every cell.
    pub seeds: u64,
    pub seed_base: u64,
    /// Template for instance generation; `n`, `k` and `alpha` come from the
    /// sweep.
    pub generation: GenerationParams,
    pub grid_spacing: f64,
    pub solvers: SolverSettings,
    /// Write measured wall times; when false every time is 0 and repeated
    /// sweeps produce identical bytes.
    pub timing: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithms: Algorithm::COMPARED.to_vec(),
            ks: vec![2],
            ns: vec![64],
            alphas: vec![0.45],
            seeds: 20,
            seed_base: 0,
            generation: GenerationParams::default(),
            grid_spacing: 5.0,
            solvers: SolverSettings::default(),
            timing: true,
            out: PathBuf::from("results.csv"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("algorithm list is empty".into()));
        }
        if self.ks.is_empty() || self.ns.is_empty() || self.alphas.is_empty() {
            return Err(BenchError::Config("every sweep axis needs at least one value".into()));
        }
        if self.seeds == 0 {
            return Err(BenchError::Config("need at least one seed per cell".into()));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(BenchError::Config("alpha must lie in (0, 1]".into()));
        }
        if !(self.grid_spacing > 0.0 && self.grid_spacing.is_finite()) {
            return Err(BenchError::Config("grid spacing must be positive".into()));
        }
        self.solvers.validate()
    }

    /// Every `(k, n, alpha, seed)` of the sweep in output order.
    pub fn instances(&self) -> Vec<InstanceKey> {
        let mut out = Vec::new();
        for &k in &self.ks {
            for &n in &self.ns {
                for &alpha in &self.alphas {
                    for seed in self.seed_base..self.seed_base + self.seeds {
                        out.push(InstanceKey { k, n, alpha, seed });
                    }
                }
            }
        }
        out
    }

    pub fn generation_for(&self, key: &InstanceKey) -> GenerationParams {
        GenerationParams {
            n: key.n,
            k: key.k,
            alpha: key.alpha,
            ..self.generation.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceKey {
    pub k: u32,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub algorithm: Algorithm,
    pub k: u32,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub feasible: bool,
    pub travel_distance_m: Option<f64>,
    pub travel_energy_kj: Option<f64>,
    pub compute_time_s: f64,
    pub nodes_charged: Option<usize>,
    pub status: Status,
}

impl ResultRecord {
    fn blank(algorithm: Algorithm, key: &InstanceKey, status: Status) -> Self {
        ResultRecord {
            algorithm,
            k: key.k,
            n: key.n,
            alpha: key.alpha,
            seed: key.seed,
            feasible: false,
            travel_distance_m: None,
            travel_energy_kj: None,
            compute_time_s: 0.0,
            nodes_charged: None,
            status,
        }
    }

    /// Sort key: cell, then seed, then algorithm.
    fn cmp_key(&self, other: &Self) -> Ordering {
        (self.k, self.n)
            .cmp(&(other.k, other.n))
            .then(self.alpha.total_cmp(&other.alpha))
            .then(self.seed.cmp(&other.seed))
            .then(self.algorithm.cmp(&other.algorithm))
    }
}

/// Runs one solver on a prepared scenario. `seed` seeds the stochastic
/// solvers.
pub fn solve(
    algorithm: Algorithm,
    scenario: &Scenario,
    seed: u64,
    settings: &SolverSettings,
) -> kcharge::Result<Option<Solution>> {
    match algorithm {
        Algorithm::Dp => dp::solve(scenario, &settings.dp_config()).map(|o| o.solution),
        Algorithm::Dqn => solve_dqn(
            scenario,
            &RlHyperparams {
                seed,
                ..settings.rl.clone()
            },
        ),
        Algorithm::Acs => solve_acs(
            scenario,
            &AcsParams {
                seed,
                ..settings.acs.clone()
            },
        ),
        Algorithm::Greedy => solve_greedy(scenario),
        Algorithm::Random => solve_random(scenario, seed, settings.random_restarts),
        Algorithm::Exact => solve_exact(scenario, &settings.oracle_budget(), TimeMode::Continuous),
    }
}

/// Solves, times and re-validates one run on an existing scenario.
pub fn run_on(algorithm: Algorithm, key: &InstanceKey, scenario: &Scenario, cfg: &ExperimentConfig) -> ResultRecord {
    let started = Instant::now();
    let outcome = solve(algorithm, scenario, key.seed, &cfg.solvers);
    let elapsed = started.elapsed().as_secs_f64();
    let mut rec = ResultRecord::blank(algorithm, key, Status::Ok);
    if cfg.timing {
        rec.compute_time_s = elapsed;
    }
    match outcome {
        Ok(Some(sol)) => {
            let valid = verify(&sol.order, scenario).is_ok_and(|v| v.is_valid());
            let energy = sol.distance_m * scenario.instance.params.move_cost / 1000.0;
            if !valid || !sol.feasible || (energy - sol.energy_kj).abs() > 1e-9 * energy.max(1.0) {
                rec.status = Status::SolverBug;
                return rec;
            }
            rec.feasible = true;
            rec.travel_distance_m = Some(sol.distance_m);
            rec.travel_energy_kj = Some(energy);
            rec.nodes_charged = Some(sol.order.len());
        }
        Ok(None) => rec.status = Status::NoneFound,
        Err(kcharge::Error::BudgetExceeded(_)) => rec.status = Status::BudgetExceeded,
        Err(_) => rec.status = Status::SolverBug,
    }
    rec
}

/// Generates the seeded instance of `key` and its coverage analysis.
pub fn prepare(key: &InstanceKey, cfg: &ExperimentConfig) -> kcharge::Result<Scenario> {
    let inst: NetworkInstance = generate_instance(&cfg.generation_for(key), key.seed)?;
    Scenario::new(inst, cfg.grid_spacing)
}

/// One (algorithm, instance) run from scratch.
pub fn run_cell(algorithm: Algorithm, key: &InstanceKey, cfg: &ExperimentConfig) -> ResultRecord {
    match prepare(key, cfg) {
        Ok(scenario) => run_on(algorithm, key, &scenario, cfg),
        Err(_) => ResultRecord::blank(algorithm, key, Status::GenerationFailed),
    }
}

/// Median travel energy and time of one `(algorithm, k, n, alpha)` cell.
/// Runs without a tour count as infinite energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub k: u32,
    pub n: usize,
    pub alpha: f64,
    pub runs: usize,
    pub feasible: usize,
    pub budget_exceeded: usize,
    pub median_energy_kj: f64,
    pub median_time_s: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

pub fn summarize(records: &[ResultRecord]) -> Vec<CellSummary> {
    let mut sorted: Vec<&ResultRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.algorithm
            .cmp(&b.algorithm)
            .then((a.k, a.n).cmp(&(b.k, b.n)))
            .then(a.alpha.total_cmp(&b.alpha))
    });
    let same = |a: &ResultRecord, b: &ResultRecord| {
        a.algorithm == b.algorithm && a.k == b.k && a.n == b.n && a.alpha == b.alpha
    };
    let mut out = Vec::new();
    for group in sorted.chunk_by(|a, b| same(a, b)) {
        let first = group[0];
        let mut energy: Vec<f64> = group
            .iter()
            .map(|r| r.travel_energy_kj.unwrap_or(f64::INFINITY))
            .collect();
        let mut time: Vec<f64> = group.iter().map(|r| r.compute_time_s).collect();
        out.push(CellSummary {
            algorithm: first.algorithm,
            k: first.k,
            n: first.n,
            alpha: first.alpha,
            runs: group.len(),
            feasible: group.iter().filter(|r| r.feasible).count(),
            budget_exceeded: group.iter().filter(|r| r.status == Status::BudgetExceeded).count(),
            median_energy_kj: median(&mut energy),
            median_time_s: median(&mut time),
        });
    }
    out
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub records: Vec<ResultRecord>,
    pub summary: Vec<CellSummary>,
}

impl SweepReport {
    pub fn cell(&self, algorithm: Algorithm, k: u32, n: usize, alpha: f64) -> Option<&CellSummary> {
        self.summary
            .iter()
            .find(|c| c.algorithm == algorithm && c.k == k && c.n == n && c.alpha == alpha)
    }
}

/// Runs every algorithm on every instance of the sweep, in order. Each
/// instance is generated once and shared by the algorithms.
pub fn collect(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let mut records = Vec::new();
    for key in cfg.instances() {
        match prepare(&key, cfg) {
            Ok(scenario) => {
                for &alg in &cfg.algorithms {
                    records.push(run_on(alg, &key, &scenario, cfg));
                }
            }
            Err(_) => {
                for &alg in &cfg.algorithms {
                    records.push(ResultRecord::blank(alg, &key, Status::GenerationFailed));
                }
            }
        }
    }
    records.sort_by(|a, b| a.cmp_key(b));
    let summary = summarize(&records);
    Ok(SweepReport { records, summary })
}

/// Sibling path of the results file holding the per-cell medians.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn write_records(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_summary(path: &Path, summary: &[CellSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in summary {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes the records to `cfg.out` and the medians next
/// to it.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let report = collect(cfg)?;
    write_records(&cfg.out, &report.records)?;
    write_summary(&summary_path(&cfg.out), &report.summary)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_even_and_infinite() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&mut [1.0, f64::INFINITY, f64::INFINITY]), f64::INFINITY);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::COMPARED.into_iter().chain([Algorithm::Exact]) {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("dijkstra".parse::<Algorithm>().is_err());
    }

    #[test]
    fn summary_path_sits_next_to_results() {
        assert_eq!(summary_path(Path::new("/tmp/x/run.csv")), PathBuf::from("/tmp/x/run.summary.csv"));
    }
}
