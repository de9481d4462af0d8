//! Compares the experiment harness (rayon-parallel when the `parallel`
//! feature is on) against a hand-rolled sequential sweep of the same cells.

use criterion::{criterion_group, criterion_main, Criterion};
use mpcqkd_core::experiment::{group_variants, run_group, ExperimentConfig, Group, Profile};
use mpcqkd_core::formulation::{build_program, extract_metrics, EconParams};
use mpcqkd_core::keyrate::LinkRates;
use mpcqkd_core::netmodel::{generate_demands, generate_network, InstanceSpec};
use mpcqkd_core::solver::solve_milp;
use std::hint::black_box;

fn bench_cfg() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Profile::Ci, 42);
    cfg.node_scales = vec![10];
    cfg.instances_per_scale = 2;
    cfg
}

fn sequential_sweep(cfg: &ExperimentConfig) -> Vec<f64> {
    let econ = EconParams { tau: 1.0, ..cfg.econ };
    let mut objectives = Vec::new();
    for &scale in &cfg.node_scales {
        for i in 0..cfg.instances_per_scale {
            // Same derivation run_group uses internally is irrelevant here;
            // any fixed seed per cell keeps the workloads comparable.
            let spec = InstanceSpec::new(scale, cfg.seed ^ (i as u64));
            let net = generate_network(&spec).unwrap();
            let demands = generate_demands(&net, &spec).unwrap();
            let rates = LinkRates::compute(&net, &cfg.rates).unwrap();
            for variant in group_variants(Group::One) {
                let prog = build_program(&net, &demands, &rates, &econ, variant).unwrap();
                let sol = solve_milp(&prog, &cfg.solver).unwrap();
                let metrics = extract_metrics(&sol.values, &prog);
                objectives.push(metrics.sod);
            }
        }
    }
    objectives
}

fn harness(c: &mut Criterion) {
    let cfg = bench_cfg();
    let mut group = c.benchmark_group("group_one_sweep");
    group.sample_size(10);
    group.bench_function("parallel_harness", |b| {
        b.iter(|| black_box(run_group(&cfg, Group::One).unwrap()))
    });
    group.bench_function("sequential_sweep", |b| {
        b.iter(|| black_box(sequential_sweep(&cfg)))
    });
    group.finish();
}

criterion_group!(benches, harness);
criterion_main!(benches);
