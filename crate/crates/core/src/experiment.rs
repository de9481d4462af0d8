//! Comparative experiment harness: generate instances across network scales,
//! solve every (instance, variant) cell, and emit raw plus aggregated CSVs.
//!
//! Group One compares the CSC-only cells (MDI, TF, MPC with the device fully
//! in cell mode); Group Two adds the C2C-flow cells (plain BB84, the
//! nonstandalone device, and the two hybrid deployments) against MPC at the
//! default time split.

use crate::formulation::{
    build_program, extract_metrics, CellVariant, EconParams,
};
use crate::keyrate::{LinkRates, RateParams};
use crate::netmodel::{generate_demands, generate_network, Instance, InstanceSpec};
use crate::solver::{self, solve_milp, MilpStatus, SolveMode, SolverConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("cannot build instance (scale {scale}, instance {instance}): {message}")]
    Instance {
        scale: usize,
        instance: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed result CSV: {message}")]
    Csv { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Truncated grid that finishes on a desk machine.
    Ci,
    /// The full published grid (10..=45 node scales, 10 instances each).
    Paper,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub node_scales: Vec<usize>,
    pub instances_per_scale: usize,
    pub econ: EconParams,
    pub rates: RateParams,
    pub seed: u64,
    pub solver: SolverConfig,
    /// When false, `wall_s` is reported as 0.000 so reruns are byte-identical.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(profile: Profile, seed: u64) -> Self {
        let (node_scales, instances_per_scale) = match profile {
            Profile::Ci => (vec![10, 13, 15, 18, 20], 3),
            Profile::Paper => (
                (10..=45).filter(|n| n % 5 == 0 || n % 5 == 3).collect(),
                10,
            ),
        };
        ExperimentConfig {
            node_scales,
            instances_per_scale,
            econ: EconParams::default(),
            rates: RateParams::default(),
            seed,
            solver: SolverConfig {
                mode: SolveMode::Heuristic,
                ..SolverConfig::default()
            },
            record_timing: false,
        }
    }
}

/// The cell variants compared in each group.
pub fn group_variants(group: Group) -> Vec<CellVariant> {
    match group {
        Group::One => vec![
            CellVariant::Mdi,
            CellVariant::Tf,
            CellVariant::Mpc { tau: Some(1.0) },
        ],
        Group::Two => vec![
            CellVariant::Bb84,
            CellVariant::Nsa { tau: None },
            CellVariant::HybridBb84Mdi,
            CellVariant::HybridBb84Tf,
            CellVariant::Mpc { tau: None },
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scale: usize,
    pub instance: usize,
    pub variant: String,
    pub sod: f64,
    pub csc_p: f64,
    pub strong_relays: usize,
    pub devices: u64,
    pub status: String,
    pub wall_s: f64,
    pub instance_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub group: Group,
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scale: usize,
    pub variant: String,
    pub mean_sod: f64,
    pub min_sod: f64,
    pub max_sod: f64,
    pub mean_cscp: f64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-instance seed, decorrelated across (master seed, scale, index).
pub fn instance_seed(master: u64, scale: usize, instance: usize) -> u64 {
    splitmix(master ^ splitmix((scale as u64) << 32 | instance as u64))
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

struct InstanceData {
    scale: usize,
    instance: usize,
    net: crate::netmodel::Network,
    demands: crate::netmodel::DemandSet,
    rates: LinkRates,
    hash: String,
}

/// Run the full (scale × instance × variant) matrix of one group.
///
/// Each instance is generated once and shared across all variants of the
/// group so the comparison is paired; solver failures are recorded in the
/// row's status and never abort the run.
pub fn run_group(cfg: &ExperimentConfig, group: Group) -> Result<ExperimentResult, ExperimentError> {
    let mut econ = cfg.econ;
    if group == Group::One {
        // Group One devices spend all their time in cell mode.
        econ.tau = 1.0;
    }
    let variants = group_variants(group);

    let mut instances: Vec<InstanceData> = Vec::new();
    for &scale in &cfg.node_scales {
        for i in 0..cfg.instances_per_scale {
            let seed = instance_seed(cfg.seed, scale, i);
            let spec = InstanceSpec::new(scale, seed);
            let build = || -> Result<InstanceData, String> {
                let net = generate_network(&spec).map_err(|e| e.to_string())?;
                let demands = generate_demands(&net, &spec).map_err(|e| e.to_string())?;
                let rates = LinkRates::compute(&net, &cfg.rates).map_err(|e| e.to_string())?;
                let hash = Instance {
                    network: net.clone(),
                    demands: demands.clone(),
                    seed,
                    config_hash: None,
                }
                .content_hash();
                Ok(InstanceData {
                    scale,
                    instance: i,
                    net,
                    demands,
                    rates,
                    hash,
                })
            };
            instances.push(build().map_err(|message| ExperimentError::Instance {
                scale,
                instance: i,
                message,
            })?);
        }
    }

    let cells: Vec<(usize, CellVariant)> = (0..instances.len())
        .flat_map(|ii| variants.iter().map(move |&v| (ii, v)))
        .collect();
    let instances_ref = &instances;
    let mut rows = crate::map_maybe_parallel(cells, move |(ii, variant)| {
        let data = &instances_ref[ii];
        run_cell(data, variant, &econ, &cfg.solver, cfg.record_timing)
    });
    rows.sort_by(|a, b| {
        (a.scale, a.instance, &a.variant).cmp(&(b.scale, b.instance, &b.variant))
    });
    Ok(ExperimentResult { group, rows })
}

fn run_cell(
    data: &InstanceData,
    variant: CellVariant,
    econ: &EconParams,
    solver: &SolverConfig,
    record_timing: bool,
) -> ResultRow {
    let started = Instant::now();
    let mut row = ResultRow {
        scale: data.scale,
        instance: data.instance,
        variant: variant.name().to_string(),
        sod: 0.0,
        csc_p: 0.0,
        strong_relays: 0,
        devices: 0,
        status: String::new(),
        wall_s: 0.0,
        instance_hash: data.hash.clone(),
    };
    match build_program(&data.net, &data.demands, &data.rates, econ, variant) {
        Ok(prog) => match solve_milp(&prog, solver) {
            Ok(sol) => {
                row.status = match sol.status {
                    MilpStatus::Optimal => "optimal".to_string(),
                    MilpStatus::Feasible { .. } => "feasible".to_string(),
                    MilpStatus::Infeasible => "infeasible".to_string(),
                    MilpStatus::Unknown => "unknown".to_string(),
                };
                if sol.is_feasible() {
                    // Metrics come from the canonical minimal-flow pattern so
                    // they do not depend on which optimal vertex was found.
                    let canonical = solver::minimal_flow_values(&prog, &sol.values)
                        .unwrap_or_else(|_| sol.values.clone());
                    let m = extract_metrics(&canonical, &prog);
                    row.sod = round6(m.sod);
                    row.csc_p = round6(m.csc_p);
                    row.strong_relays = m.strong_relays;
                    row.devices = m.devices;
                } else if prog.csc_only {
                    row.csc_p = 1.0;
                }
            }
            Err(e) => row.status = format!("error: {e}"),
        },
        Err(e) => row.status = format!("error: {e}"),
    }
    if record_timing {
        row.wall_s = (started.elapsed().as_secs_f64() * 1e3).round() / 1e3;
    }
    row
}

/// Per-(scale, variant) means and min/max bands over comparable rows.
///
/// Rows that errored (or hit a solver limit without any solution) are
/// excluded; infeasible rows count with their reported zero SoD.
pub fn aggregate(result: &ExperimentResult) -> Vec<AggregateRow> {
    let mut keys: Vec<(usize, String)> = result
        .rows
        .iter()
        .map(|r| (r.scale, r.variant.clone()))
        .collect();
    keys.sort();
    keys.dedup();
    keys.iter()
        .filter_map(|(scale, variant)| {
            let group: Vec<&ResultRow> = result
                .rows
                .iter()
                .filter(|r| {
                    r.scale == *scale
                        && &r.variant == variant
                        && matches!(r.status.as_str(), "optimal" | "feasible" | "infeasible")
                })
                .collect();
            if group.is_empty() {
                return None;
            }
            let n = group.len() as f64;
            Some(AggregateRow {
                scale: *scale,
                variant: variant.clone(),
                mean_sod: round6(group.iter().map(|r| r.sod).sum::<f64>() / n),
                min_sod: group.iter().map(|r| r.sod).fold(f64::INFINITY, f64::min),
                max_sod: group.iter().map(|r| r.sod).fold(f64::NEG_INFINITY, f64::max),
                mean_cscp: round6(group.iter().map(|r| r.csc_p).sum::<f64>() / n),
            })
        })
        .collect()
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write `raw.csv` and `aggregate.csv` into `dir`, each prefixed with a
/// `# config_hash=` comment line. LF line endings, fixed decimal formatting,
/// rows already in deterministic order.
pub fn emit_report(
    result: &ExperimentResult,
    dir: &Path,
    config_hash: &str,
) -> Result<(PathBuf, PathBuf), ExperimentError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let raw_path = dir.join("raw.csv");
    let mut raw = format!("# config_hash={config_hash}\n");
    raw.push_str("scale,instance,variant,sod,csc_p,strong_relays,devices,status,wall_s,instance_hash\n");
    for r in &result.rows {
        raw.push_str(&format!(
            "{},{},{},{:.6},{:.6},{},{},{},{:.3},{}\n",
            r.scale,
            r.instance,
            r.variant,
            r.sod,
            r.csc_p,
            r.strong_relays,
            r.devices,
            r.status,
            r.wall_s,
            r.instance_hash
        ));
    }
    std::fs::write(&raw_path, raw).map_err(io_err(&raw_path))?;

    let agg_path = dir.join("aggregate.csv");
    let mut agg = format!("# config_hash={config_hash}\n");
    agg.push_str("scale,variant,mean_sod,min_sod,max_sod,mean_cscp\n");
    for a in aggregate(result) {
        agg.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6}\n",
            a.scale, a.variant, a.mean_sod, a.min_sod, a.max_sod, a.mean_cscp
        ));
    }
    std::fs::write(&agg_path, agg).map_err(io_err(&agg_path))?;
    Ok((raw_path, agg_path))
}

/// Read back a raw CSV written by [`emit_report`]; returns the config hash
/// from the leading comment and the rows.
pub fn read_raw_csv(path: &Path) -> Result<(String, Vec<ResultRow>), ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |message: &str| ExperimentError::Csv {
        path: path.display().to_string(),
        message: message.to_string(),
    };
    let mut lines = text.lines();
    let hash = lines
        .next()
        .and_then(|l| l.strip_prefix("# config_hash="))
        .ok_or_else(|| bad("missing config_hash comment"))?
        .to_string();
    let header = lines.next().ok_or_else(|| bad("missing header"))?;
    if header
        != "scale,instance,variant,sod,csc_p,strong_relays,devices,status,wall_s,instance_hash"
    {
        return Err(bad("unexpected header"));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad(&format!("expected 10 fields, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad integer `{s}`")));
        rows.push(ResultRow {
            scale: int(f[0])?,
            instance: int(f[1])?,
            variant: f[2].to_string(),
            sod: num(f[3])?,
            csc_p: num(f[4])?,
            strong_relays: int(f[5])?,
            devices: f[6].parse().map_err(|_| bad(&format!("bad integer `{}`", f[6])))?,
            status: f[7].to_string(),
            wall_s: num(f[8])?,
            instance_hash: f[9].to_string(),
        });
    }
    Ok((hash, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg(seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(Profile::Ci, seed);
        cfg.node_scales = vec![10];
        cfg.instances_per_scale = 2;
        cfg
    }

    #[test]
    fn group_one_matrix_is_complete_and_csc_only() {
        let result = run_group(&tiny_cfg(11), Group::One).unwrap();
        assert_eq!(result.rows.len(), 6); // 1 scale x 2 instances x 3 variants
        for row in &result.rows {
            assert_eq!(row.csc_p, 1.0, "{row:?}");
            assert!(
                matches!(row.status.as_str(), "optimal" | "feasible"),
                "{row:?}"
            );
        }
    }

    #[test]
    fn variants_of_one_instance_share_the_same_hash() {
        let result = run_group(&tiny_cfg(3), Group::One).unwrap();
        for i in 0..2 {
            let hashes: Vec<&str> = result
                .rows
                .iter()
                .filter(|r| r.instance == i)
                .map(|r| r.instance_hash.as_str())
                .collect();
            assert_eq!(hashes.len(), 3);
            assert!(hashes.windows(2).all(|w| w[0] == w[1]));
        }
        // Different instances draw different networks.
        assert_ne!(result.rows[0].instance_hash, result.rows[3].instance_hash);
    }

    #[test]
    fn reruns_are_identical() {
        let a = run_group(&tiny_cfg(5), Group::One).unwrap();
        let b = run_group(&tiny_cfg(5), Group::One).unwrap();
        assert_eq!(a, b);
    }

    fn hand_rows() -> ExperimentResult {
        let row = |scale, instance, variant: &str, sod, csc_p, status: &str| ResultRow {
            scale,
            instance,
            variant: variant.to_string(),
            sod,
            csc_p,
            strong_relays: 0,
            devices: 1,
            status: status.to_string(),
            wall_s: 0.0,
            instance_hash: "h".to_string(),
        };
        ExperimentResult {
            group: Group::One,
            rows: vec![
                row(10, 0, "mdi", 0.5, 1.0, "feasible"),
                row(10, 1, "mdi", 1.5, 1.0, "feasible"),
                row(10, 0, "tf", 2.0, 1.0, "feasible"),
                row(10, 1, "tf", 4.0, 1.0, "error: boom"),
            ],
        }
    }

    #[test]
    fn aggregate_means_and_bands() {
        let agg = aggregate(&hand_rows());
        let mdi = agg.iter().find(|a| a.variant == "mdi").unwrap();
        assert_eq!(mdi.mean_sod, 1.0);
        assert_eq!((mdi.min_sod, mdi.max_sod), (0.5, 1.5));
        // The errored tf row is excluded, leaving a single-row mean.
        let tf = agg.iter().find(|a| a.variant == "tf").unwrap();
        assert_eq!(tf.mean_sod, 2.0);
        assert_eq!((tf.min_sod, tf.max_sod), (2.0, 2.0));
    }

    #[test]
    fn aggregate_is_order_invariant() {
        let mut shuffled = hand_rows();
        shuffled.rows.reverse();
        assert_eq!(aggregate(&hand_rows()), aggregate(&shuffled));
    }

    #[test]
    fn csv_roundtrip_preserves_rows() {
        let result = hand_rows();
        let dir = tempfile::tempdir().unwrap();
        let (raw_path, agg_path) = emit_report(&result, dir.path(), "cfg123").unwrap();
        let (hash, rows) = read_raw_csv(&raw_path).unwrap();
        assert_eq!(hash, "cfg123");
        assert_eq!(rows, result.rows);
        let agg_text = std::fs::read_to_string(&agg_path).unwrap();
        assert!(agg_text.starts_with("# config_hash=cfg123\n"));
        assert!(agg_text.contains("scale,variant,mean_sod,min_sod,max_sod,mean_cscp"));
        assert!(!agg_text.contains('\r'));
    }

    #[test]
    fn paper_profile_covers_the_full_grid() {
        let cfg = ExperimentConfig::new(Profile::Paper, 1);
        assert_eq!(cfg.node_scales.first(), Some(&10));
        assert_eq!(cfg.node_scales.last(), Some(&45));
        assert_eq!(cfg.instances_per_scale, 10);
    }
}
