//! `mpcqkd` — command-line frontend: instance generation, rate tables,
//! topology optimization, relay-cell simulation and the comparative
//! experiment harness.
//!
//! Exit codes: 0 success, 2 usage (clap), 3 input error, 4 solver failure,
//! 5 I/O failure.

use clap::{Args, Parser, Subcommand};
use mpcqkd_core::experiment::{
    self, read_raw_csv, ExperimentConfig, ExperimentResult, Group, Profile, ResultRow,
};
use mpcqkd_core::formulation::{
    build_program, extract_metrics, CellVariant, EconParams,
};
use mpcqkd_core::keyrate::{LinkRates, RateParams};
use mpcqkd_core::netmodel::{
    generate_demands, generate_network, load_instance, save_instance, Instance, InstanceSpec,
};
use mpcqkd_core::relaysim::{audit_exposure, bb84_baseline_send, establish_pools, mpc_send};
use mpcqkd_core::solver::{solve_milp, verify_solution, MilpStatus, SolveMode, SolverConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const EXIT_INPUT: i32 = 3;
const EXIT_SOLVER: i32 = 4;
const EXIT_IO: i32 = 5;

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
    fn solver(message: impl Into<String>) -> Self {
        CliError { code: EXIT_SOLVER, message: message.into() }
    }
    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "mpcqkd", version, about = "QKD network planning with multi-protocol collaborative cells")]
struct Cli {
    /// JSON config file; flags override its values, which override defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $MPCQKD_OUT_DIR or the working directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Log level: error, warn, info, debug, trace.
    #[arg(long, global = true)]
    log_level: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SolverArgs {
    /// Solver mode: exact or heuristic.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random connected network instance with demands.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        seed: u64,
        /// Output file (default: <out-dir>/instance_<nodes>_<seed>.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the per-edge key-rate table of an instance.
    Rates {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the topology optimization for one cell variant.
    Optimize {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// mdi, tf, mpc, bb84, nsa, hybrid-bb84-mdi or hybrid-bb84-tf.
        #[arg(long)]
        variant: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the layered-encryption relay cell and audit exposure.
    SimulateRelay {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        messages: usize,
        /// Maximum message size in bytes.
        #[arg(long, default_value_t = 1024)]
        max_size: usize,
        /// Also run the hop-by-hop baseline for contrast.
        #[arg(long)]
        baseline: bool,
    },
    /// Run the Group 1 / Group 2 comparison matrix and emit CSVs.
    Experiment {
        #[arg(long)]
        group: u8,
        /// ci (truncated grid) or paper (full grid).
        #[arg(long, default_value = "ci")]
        profile: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Override the profile's node scales, comma separated.
        #[arg(long)]
        scales: Option<String>,
        /// Override the profile's instances per scale.
        #[arg(long)]
        instances: Option<usize>,
        /// Record wall-clock times (off by default so reruns are identical).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate raw experiment CSVs into one report.
    Report {
        /// Raw CSV files produced by `experiment`.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Aggregate despite mismatched config hashes.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Serializable mirror of [`SolverConfig`] for the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SolverFileConfig {
    mode: String,
    feas_tol: f64,
    int_tol: f64,
    gap_tol: f64,
    node_limit: usize,
    time_limit_s: f64,
    heuristic_attempts: usize,
}

impl Default for SolverFileConfig {
    fn default() -> Self {
        SolverFileConfig::from(&SolverConfig::default())
    }
}

impl From<&SolverConfig> for SolverFileConfig {
    fn from(c: &SolverConfig) -> Self {
        SolverFileConfig {
            mode: match c.mode {
                SolveMode::Exact => "exact".to_string(),
                SolveMode::Heuristic => "heuristic".to_string(),
            },
            feas_tol: c.feas_tol,
            int_tol: c.int_tol,
            gap_tol: c.gap_tol,
            node_limit: c.node_limit,
            time_limit_s: c.time_limit_s,
            heuristic_attempts: c.heuristic_attempts,
        }
    }
}

impl SolverFileConfig {
    fn to_solver(&self) -> CliResult<SolverConfig> {
        let mode = match self.mode.as_str() {
            "exact" => SolveMode::Exact,
            "heuristic" => SolveMode::Heuristic,
            other => return Err(CliError::input(format!("unknown solver mode `{other}`"))),
        };
        Ok(SolverConfig {
            mode,
            feas_tol: self.feas_tol,
            int_tol: self.int_tol,
            gap_tol: self.gap_tol,
            node_limit: self.node_limit,
            time_limit_s: self.time_limit_s,
            heuristic_attempts: self.heuristic_attempts,
        })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    rates: Option<RateParams>,
    econ: Option<EconParams>,
    solver: Option<SolverFileConfig>,
    out_dir: Option<PathBuf>,
    log_level: Option<String>,
}

/// Fully resolved configuration: flags > config file > defaults.
struct Resolved {
    rates: RateParams,
    econ: EconParams,
    solver: SolverConfig,
    solver_file: SolverFileConfig,
    solver_from_file: bool,
    out_dir: PathBuf,
    log_level: String,
}

impl Resolved {
    fn load(cli: &Cli) -> CliResult<Self> {
        let file: FileConfig = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let out_dir = cli
            .out_dir
            .clone()
            .or(file.out_dir)
            .or_else(|| std::env::var_os("MPCQKD_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let log_level = cli
            .log_level
            .clone()
            .or(file.log_level)
            .unwrap_or_else(|| "warn".to_string());
        let solver_from_file = file.solver.is_some();
        let solver_file = file.solver.unwrap_or_default();
        Ok(Resolved {
            rates: file.rates.unwrap_or_default(),
            econ: file.econ.unwrap_or_default(),
            solver: solver_file.to_solver()?,
            solver_file,
            solver_from_file,
            out_dir,
            log_level,
        })
    }

    /// Short digest of everything that influences computed outputs.
    fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::json!({
            "rates": self.rates,
            "econ": self.econ,
            "solver": self.solver_file,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = Resolved::load(cli)?;
    env_logger::Builder::new()
        .parse_filters(&cfg.log_level)
        .try_init()
        .ok();
    log::info!(
        "resolved config hash {} (econ: {:?}, rates: {:?}, solver: {:?})",
        cfg.config_hash(),
        cfg.econ,
        cfg.rates,
        cfg.solver
    );
    match &cli.cmd {
        Cmd::Gen { nodes, seed, out } => cmd_gen(&cfg, *nodes, *seed, out.as_deref()),
        Cmd::Rates { input, out } => cmd_rates(&cfg, input, out.as_deref()),
        Cmd::Optimize { input, variant, solver, out } => {
            cmd_optimize(&cfg, input, variant, solver, out.as_deref())
        }
        Cmd::SimulateRelay { seed, messages, max_size, baseline } => {
            cmd_simulate_relay(*seed, *messages, *max_size, *baseline)
        }
        Cmd::Experiment { group, profile, seed, scales, instances, timing, out } => cmd_experiment(
            &cfg,
            *group,
            profile,
            *seed,
            scales.as_deref(),
            *instances,
            *timing,
            out.as_deref(),
        ),
        Cmd::Report { input, force, out } => cmd_report(&cfg, input, *force, out.as_deref()),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json serialization");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn cmd_gen(cfg: &Resolved, nodes: usize, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let spec = InstanceSpec::new(nodes, seed);
    let network = generate_network(&spec).map_err(|e| CliError::input(e.to_string()))?;
    let demands = generate_demands(&network, &spec).map_err(|e| CliError::input(e.to_string()))?;
    let instance = Instance {
        network,
        demands,
        seed,
        config_hash: Some(cfg.config_hash()),
    };
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => cfg.out_dir.join(format!("instance_{nodes}_{seed}.json")),
    };
    save_instance(&path, &instance).map_err(|e| CliError::io(&path, e))?;
    println!("{}", path.display());
    Ok(())
}

fn load_input(path: &Path) -> CliResult<Instance> {
    load_instance(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn cmd_rates(cfg: &Resolved, input: &Path, out: Option<&Path>) -> CliResult<()> {
    let instance = load_input(input)?;
    let rates = LinkRates::compute(&instance.network, &cfg.rates)
        .map_err(|e| CliError::input(e.to_string()))?;
    let bb84: Vec<_> = instance
        .network
        .c2c_edges()
        .iter()
        .map(|e| {
            serde_json::json!({
                "u": e.u, "v": e.v,
                "bb84_kbps": rates.bb84(e.u, e.v).unwrap(),
            })
        })
        .collect();
    let csc: Vec<_> = instance
        .network
        .csc_edges()
        .iter()
        .map(|c| {
            serde_json::json!({
                "u": c.u, "p": c.p, "v": c.v,
                "mdi_kbps": rates.mdi(c).unwrap(),
                "tf_kbps": rates.tf(c).unwrap(),
                "mpc_csc_kbps": rates.mpc_csc(c, cfg.econ.beta).unwrap(),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "config_hash": cfg.config_hash(),
        "instance_hash": instance.content_hash(),
        "c2c": bb84,
        "csc": csc,
    });
    match out {
        Some(path) => write_json(path, &doc)?,
        None => println!("{}", serde_json::to_string_pretty(&doc).unwrap()),
    }
    Ok(())
}

fn cmd_optimize(
    cfg: &Resolved,
    input: &Path,
    variant: &str,
    solver_args: &SolverArgs,
    out: Option<&Path>,
) -> CliResult<()> {
    let variant = CellVariant::parse(variant)
        .ok_or_else(|| CliError::input(format!("unknown variant `{variant}`")))?;
    let instance = load_input(input)?;
    let rates = LinkRates::compute(&instance.network, &cfg.rates)
        .map_err(|e| CliError::input(e.to_string()))?;
    let prog = build_program(&instance.network, &instance.demands, &rates, &cfg.econ, variant)
        .map_err(|e| CliError::input(e.to_string()))?;
    let mut solver = cfg.solver;
    if let Some(mode) = &solver_args.mode {
        solver.mode = match mode.as_str() {
            "exact" => SolveMode::Exact,
            "heuristic" => SolveMode::Heuristic,
            other => return Err(CliError::input(format!("unknown solver mode `{other}`"))),
        };
    }
    let sol = solve_milp(&prog, &solver).map_err(|e| CliError::solver(e.to_string()))?;
    let (status, gap) = match sol.status {
        MilpStatus::Optimal => ("optimal", 0.0),
        MilpStatus::Feasible { gap } => ("feasible", gap),
        MilpStatus::Infeasible => ("infeasible", 0.0),
        MilpStatus::Unknown => ("unknown", f64::NAN),
    };
    let mut doc = serde_json::json!({
        "config_hash": cfg.config_hash(),
        "instance_hash": instance.content_hash(),
        "variant": variant.name(),
        "status": status,
        "gap": gap,
    });
    if sol.is_feasible() {
        let violations = verify_solution(&prog, &sol.values, solver.feas_tol);
        let metrics = extract_metrics(&sol.values, &prog);
        doc["objective"] = sol.objective.into();
        doc["sod"] = metrics.sod.into();
        doc["csc_p"] = metrics.csc_p.into();
        doc["strong_relays"] = metrics.strong_relays.into();
        doc["devices"] = metrics.devices.into();
        doc["violations"] = violations.len().into();
        if !violations.is_empty() {
            return Err(CliError::solver(format!(
                "solution failed verification: {}",
                violations[0].description
            )));
        }
    }
    match out {
        Some(path) => write_json(path, &doc)?,
        None => println!("{}", serde_json::to_string_pretty(&doc).unwrap()),
    }
    Ok(())
}

fn cmd_simulate_relay(seed: u64, messages: usize, max_size: usize, baseline: bool) -> CliResult<()> {
    use rand_like::SimpleLcg;
    let budget = messages * max_size + 64;
    let mut pools = establish_pools(seed, (32 * messages + 32, budget, budget))
        .map_err(|e| CliError::input(e.to_string()))?;
    let mut sizes = SimpleLcg::new(seed);
    let mut ok = 0usize;
    let mut exposed = 0usize;
    for i in 0..messages {
        let len = 1 + (sizes.next() as usize) % max_size;
        let text: Vec<u8> = (0..len).map(|j| (i + j) as u8 ^ (sizes.next() as u8)).collect();
        let trace = mpc_send(&text, &mut pools).map_err(|e| CliError::solver(e.to_string()))?;
        if trace.recovered == text {
            ok += 1;
        }
        let report = audit_exposure(&trace, &pools);
        if report.relay.saw_plaintext || report.relay.saw_mdi_key {
            exposed += 1;
        }
    }
    println!("messages: {messages}");
    println!("roundtrip_ok: {ok}");
    println!("relay_exposures: {exposed}");
    if baseline {
        let mut bpools = establish_pools(seed ^ 1, (64, budget, budget))
            .map_err(|e| CliError::input(e.to_string()))?;
        let text = vec![0x42u8; 64];
        let trace = bb84_baseline_send(&text, &mut bpools)
            .map_err(|e| CliError::solver(e.to_string()))?;
        let report = audit_exposure(&trace, &bpools);
        println!("baseline_relay_saw_plaintext: {}", report.relay.saw_plaintext);
    }
    if ok != messages {
        return Err(CliError::solver(format!(
            "{} of {messages} messages failed roundtrip",
            messages - ok
        )));
    }
    Ok(())
}

/// Tiny deterministic generator for simulate-relay message sizes; avoids
/// coupling CLI output to any library RNG's stream layout.
mod rand_like {
    pub struct SimpleLcg(u64);
    impl SimpleLcg {
        pub fn new(seed: u64) -> Self {
            SimpleLcg(seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493))
        }
        pub fn next(&mut self) -> u32 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (self.0 >> 33) as u32
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    cfg: &Resolved,
    group: u8,
    profile: &str,
    seed: u64,
    scales: Option<&str>,
    instances: Option<usize>,
    timing: bool,
    out: Option<&Path>,
) -> CliResult<()> {
    let group = match group {
        1 => Group::One,
        2 => Group::Two,
        other => return Err(CliError::input(format!("unknown group `{other}` (expected 1 or 2)"))),
    };
    let profile = match profile {
        "ci" => Profile::Ci,
        "paper" => Profile::Paper,
        other => return Err(CliError::input(format!("unknown profile `{other}`"))),
    };
    let mut exp = ExperimentConfig::new(profile, seed);
    exp.econ = cfg.econ;
    exp.rates = cfg.rates;
    // The harness profiles pick their own solver mode; a config file may
    // still override it explicitly.
    if cfg.solver_from_file {
        exp.solver = cfg.solver;
    }
    exp.record_timing = timing;
    if let Some(scales) = scales {
        exp.node_scales = scales
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::input(format!("bad scale `{s}`")))
            })
            .collect::<CliResult<Vec<usize>>>()?;
    }
    if let Some(n) = instances {
        exp.instances_per_scale = n;
    }
    let result = experiment::run_group(&exp, group).map_err(|e| CliError::solver(e.to_string()))?;
    let dir = match out {
        Some(p) => p.to_path_buf(),
        None => cfg.out_dir.join(format!(
            "group{}",
            if group == Group::One { 1 } else { 2 }
        )),
    };
    let (raw, agg) = experiment::emit_report(&result, &dir, &cfg.config_hash())
        .map_err(|e| CliError { code: EXIT_IO, message: e.to_string() })?;
    println!("{}", raw.display());
    println!("{}", agg.display());
    Ok(())
}

fn cmd_report(cfg: &Resolved, inputs: &[PathBuf], force: bool, out: Option<&Path>) -> CliResult<()> {
    let mut merged: Vec<ResultRow> = Vec::new();
    let mut hashes: Vec<String> = Vec::new();
    for path in inputs {
        let (hash, rows) =
            read_raw_csv(path).map_err(|e| CliError::input(e.to_string()))?;
        hashes.push(hash);
        merged.extend(rows);
    }
    if !force && hashes.windows(2).any(|w| w[0] != w[1]) {
        return Err(CliError::input(format!(
            "config hashes differ across inputs ({}); pass --force to aggregate anyway",
            hashes.join(", ")
        )));
    }
    merged.sort_by(|a, b| {
        (a.scale, a.instance, &a.variant).cmp(&(b.scale, b.instance, &b.variant))
    });
    let result = ExperimentResult { group: Group::One, rows: merged };
    let rows = experiment::aggregate(&result);
    let hash = hashes.first().cloned().unwrap_or_else(|| cfg.config_hash());
    let mut text = format!("# config_hash={hash}\n");
    text.push_str("scale,variant,mean_sod,min_sod,max_sod,mean_cscp\n");
    for a in rows {
        text.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6}\n",
            a.scale, a.variant, a.mean_sod, a.min_sod, a.max_sod, a.mean_cscp
        ));
    }
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => cfg.out_dir.join("report.csv"),
    };
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    println!("{}", path.display());
    Ok(())
}
