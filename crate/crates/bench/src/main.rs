use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcharge::baselines::{solve_acs_traced, AcsParams};
use kcharge::dp::{self, DpConfig};
use kcharge::graph::{build_reachability, build_time_expanded};
use kcharge::oracle::{solve_exact, OracleBudget, TimeMode};
use kcharge::rl::{final_tour, train, RlHyperparams};
use kcharge::{generate_instance, load_instance, save_instance, verify, GenerationParams, NetworkInstance, Scenario, Solution};
use kcharge_bench::{run_sweep, summary_path, Algorithm, ExperimentConfig, SolverSettings};

#[derive(Parser)]
#[command(name = "kcharge", version, about = "Mobile-charger scheduling for k-covered sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded k-covered instance.
    Gen(GenArgs),
    /// Solve one instance and write the tour as JSON.
    Solve(SolveArgs),
    /// Run a parameter sweep and write results as CSV.
    Bench(BenchArgs),
    /// Re-validate a solution file against an instance.
    Verify(VerifyArgs),
    /// Dump a graph as `src dst weight_m` lines.
    Graph(GraphArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side of the square field in meters.
    #[arg(long, default_value_t = 500.0)]
    area: f64,
    #[arg(long, default_value_t = 135.0)]
    sensing_range: f64,
    #[arg(long, default_value_t = 1.0)]
    time_step: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    include_return: bool,
    #[arg(long, default_value_t = 5.0)]
    grid_spacing: f64,
    #[arg(long)]
    max_attempts: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Dp,
    Dqn,
    Acs,
    Greedy,
    Random,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeModeArg {
    Continuous,
    Grid,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Overrides the instance's time-grid step.
    #[arg(long)]
    time_step: Option<f64>,
    /// Overrides whether the tour returns to the depot.
    #[arg(long, action = clap::ArgAction::Set)]
    include_return: Option<bool>,
    #[arg(long, default_value_t = 5.0)]
    grid_spacing: f64,
}

impl InstanceArgs {
    fn scenario(&self) -> Result<Scenario, String> {
        let mut inst: NetworkInstance = load_instance(&self.instance).map_err(|e| e.to_string())?;
        if let Some(step) = self.time_step {
            inst.params.time_step = step;
        }
        if let Some(ret) = self.include_return {
            inst.params.include_return = ret;
        }
        inst.params.validate().map_err(|e| e.to_string())?;
        Scenario::new(inst, self.grid_spacing).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct DpArgs {
    #[arg(long, default_value_t = 5_000_000)]
    label_cap: usize,
    /// Extend to every reachable sensor, not only ones that lower the table.
    #[arg(long)]
    no_filter: bool,
    /// Drop a label when the same vertex holds a superset of its colors at
    /// no greater distance.
    #[arg(long)]
    dominance: bool,
    /// Wall-time limit in seconds for dp and exact.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl DpArgs {
    fn config(&self) -> DpConfig {
        DpConfig {
            label_cap: self.label_cap,
            filter: !self.no_filter,
            dominance: self.dominance,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            ..DpConfig::default()
        }
    }
}

#[derive(Args)]
struct RlArgs {
    #[arg(long, default_value_t = 500)]
    episodes: usize,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon_start: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon_end: f64,
    /// Fraction of the episodes over which epsilon decays.
    #[arg(long, default_value_t = 0.8)]
    epsilon_decay: f64,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    step_size: f64,
    #[arg(long, default_value_t = 10_000)]
    replay_capacity: usize,
    #[arg(long, num_args = 2, value_delimiter = ',', default_values_t = [64, 64])]
    hidden: Vec<usize>,
    #[arg(long, default_value_t = 4.0)]
    dead_end_penalty: f64,
    /// Return the greedy rollout even when a training episode found a
    /// shorter tour.
    #[arg(long)]
    rollout_only: bool,
    /// Write the trained Q-network as text.
    #[arg(long)]
    policy_out: Option<PathBuf>,
}

impl RlArgs {
    fn hyperparams(&self, seed: u64) -> RlHyperparams {
        RlHyperparams {
            gamma: self.gamma,
            epsilon_start: self.epsilon_start,
            epsilon_end: self.epsilon_end,
            epsilon_decay: self.epsilon_decay,
            episodes: self.episodes,
            max_steps: self.max_steps,
            batch_size: self.batch_size,
            step_size: self.step_size,
            replay_capacity: self.replay_capacity,
            hidden: [self.hidden[0], self.hidden[1]],
            dead_end_penalty: self.dead_end_penalty,
            keep_best_episode: !self.rollout_only,
            seed,
        }
    }
}

#[derive(Args)]
struct AcsArgs {
    #[arg(long, default_value_t = 20)]
    agents: usize,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long, default_value_t = 0.1)]
    global_decay: f64,
    #[arg(long, default_value_t = 0.1)]
    local_decay: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.9)]
    q0: f64,
    #[arg(long)]
    tau0: Option<f64>,
    /// Write the `iteration,best_length_m` trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

impl AcsArgs {
    fn params(&self, seed: u64) -> AcsParams {
        AcsParams {
            agents: self.agents,
            iterations: self.iterations,
            global_decay: self.global_decay,
            local_decay: self.local_decay,
            beta: self.beta,
            q0: self.q0,
            tau0: self.tau0,
            seed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    dp: DpArgs,
    #[command(flatten)]
    rl: RlArgs,
    #[command(flatten)]
    acs: AcsArgs,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    /// Largest number of live requesters the exact oracle accepts.
    #[arg(long, default_value_t = 10)]
    oracle_max_requesters: usize,
    #[arg(long, value_enum, default_value = "continuous")]
    time_mode: TimeModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON experiment config; the sweep flags below are ignored when set.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "dp,dqn,acs,greedy,random")]
    algorithms: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    k: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "64")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.45")]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long, default_value_t = 1.0)]
    time_step: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    include_return: bool,
    #[arg(long, default_value_t = 5.0)]
    grid_spacing: f64,
    #[command(flatten)]
    dp: DpArgs,
    #[command(flatten)]
    rl: RlArgs,
    #[command(flatten)]
    acs: AcsArgs,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    /// Write 0 for every compute time so reruns give identical files.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

impl BenchArgs {
    fn config(&self) -> Result<ExperimentConfig, String> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            return serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()));
        }
        let algorithms = self
            .algorithms
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<Algorithm>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExperimentConfig {
            algorithms,
            ks: self.k.clone(),
            ns: self.n.clone(),
            alphas: self.alpha.clone(),
            seeds: self.seeds,
            seed_base: self.seed_base,
            generation: GenerationParams {
                time_step: self.time_step,
                include_return: self.include_return,
                ..GenerationParams::default()
            },
            grid_spacing: self.grid_spacing,
            solvers: SolverSettings {
                dp_label_cap: self.dp.label_cap,
                dp_filter: !self.dp.no_filter,
                dp_dominance: self.dp.dominance,
                rl: self.rl.hyperparams(0),
                acs: self.acs.params(0),
                random_restarts: self.restarts,
                time_limit_s: self.dp.time_limit,
                ..SolverSettings::default()
            },
            timing: !self.no_timing,
            out: self.out.clone(),
        })
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    TimeExpanded,
    Reachability,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "time-expanded")]
    kind: GraphKind,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen(args: &GenArgs) -> Result<(), String> {
    let mut params = GenerationParams {
        area_width: args.area,
        area_height: args.area,
        sensing_range: args.sensing_range,
        time_step: args.time_step,
        include_return: args.include_return,
        grid_spacing: args.grid_spacing,
        ..GenerationParams::new(args.n, args.k, args.alpha)
    };
    if let Some(m) = args.max_attempts {
        params.max_attempts = m;
    }
    let inst = generate_instance(&params, args.seed).map_err(|e| e.to_string())?;
    save_instance(&inst, &args.out).map_err(|e| e.to_string())?;
    eprintln!(
        "{} sensors, {} requests -> {}",
        inst.sensors.len(),
        inst.requests.len(),
        args.out.display()
    );
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<(), String> {
    let sc = args.instance.scenario()?;
    let seed = args.seed;
    let found: Option<Solution> = match args.algorithm {
        AlgorithmArg::Dp => {
            let out = dp::solve(&sc, &args.dp.config()).map_err(|e| e.to_string())?;
            eprintln!(
                "vertices {} edges {} labels {} feasible labels {}",
                out.stats.vertices, out.stats.edges, out.stats.labels, out.stats.feasible_labels
            );
            out.solution
        }
        AlgorithmArg::Dqn => {
            let hp = args.rl.hyperparams(seed);
            let report = train(&sc, &hp).map_err(|e| e.to_string())?;
            if let Some(path) = &args.rl.policy_out {
                fs::write(path, report.policy.dump()).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            final_tour(&report, &sc, &hp).map_err(|e| e.to_string())?
        }
        AlgorithmArg::Acs => {
            let out = solve_acs_traced(&sc, &args.acs.params(seed)).map_err(|e| e.to_string())?;
            if let Some(path) = &args.acs.trace_out {
                let mut text = String::from("iteration,best_length_m\n");
                for (i, l) in &out.trace {
                    text.push_str(&format!("{i},{l}\n"));
                }
                fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            out.solution
        }
        AlgorithmArg::Greedy => kcharge::baselines::solve_greedy(&sc).map_err(|e| e.to_string())?,
        AlgorithmArg::Random => kcharge::baselines::solve_random(&sc, seed, args.restarts).map_err(|e| e.to_string())?,
        AlgorithmArg::Exact => {
            let mut budget = OracleBudget {
                max_requesters: args.oracle_max_requesters,
                ..OracleBudget::default()
            };
            if let Some(s) = args.dp.time_limit {
                budget.time_limit = Duration::from_secs_f64(s);
            }
            let mode = match args.time_mode {
                TimeModeArg::Continuous => TimeMode::Continuous,
                TimeModeArg::Grid => TimeMode::Grid,
            };
            solve_exact(&sc, &budget, mode).map_err(|e| e.to_string())?
        }
    };
    let sol = match found {
        Some(sol) => sol,
        None => {
            eprintln!("no feasible tour found");
            Solution {
                feasible: false,
                ..Solution::empty()
            }
        }
    };
    let text = serde_json::to_string_pretty(&sol).map_err(|e| e.to_string())? + "\n";
    write_or_print(args.out.as_deref(), &text)
}

fn bench(args: &BenchArgs) -> Result<(), String> {
    let cfg = args.config()?;
    let report = run_sweep(&cfg).map_err(|e| e.to_string())?;
    for s in &report.summary {
        eprintln!(
            "{:>6} k={} n={} alpha={} feasible {}/{} median {:.1} kJ {:.2} s",
            s.algorithm, s.k, s.n, s.alpha, s.feasible, s.runs, s.median_energy_kj, s.median_time_s
        );
    }
    eprintln!(
        "{} records -> {} (medians in {})",
        report.records.len(),
        cfg.out.display(),
        summary_path(&cfg.out).display()
    );
    Ok(())
}

fn verify_file(args: &VerifyArgs) -> Result<bool, String> {
    let sc = args.instance.scenario()?;
    let text = fs::read_to_string(&args.solution).map_err(|e| format!("{}: {e}", args.solution.display()))?;
    let sol: Solution = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let verdict = verify(&sol.order, &sc).map_err(|e| e.to_string())?;
    println!("deadlines {}", if verdict.deadlines_ok { "ok" } else { "violated" });
    if let Some(id) = verdict.evaluation.violated_at {
        println!("first violation at sensor {id}");
    }
    println!("k-coverage {}", if verdict.coverage_ok { "ok" } else { "not restored" });
    println!("distance {} m", verdict.evaluation.travel_distance);
    Ok(verdict.is_valid())
}

fn graph(args: &GraphArgs) -> Result<(), String> {
    let sc = args.instance.scenario()?;
    let text = match args.kind {
        GraphKind::TimeExpanded => build_time_expanded(&sc).map_err(|e| e.to_string())?.dump(),
        GraphKind::Reachability => build_reachability(&sc).dump(),
    };
    write_or_print(args.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => match verify_file(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::Graph(a) => graph(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
