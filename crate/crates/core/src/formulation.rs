//! Translation of a network instance into the max-min-fairness mixed-integer
//! program for a chosen networking-cell variant.
//!
//! The program maximizes the minimum satisfaction degree of demand (SoD) over
//! all communication pairs, via an epigraph variable `B_min`, subject to key
//! bandwidth, flow conservation and construction-cost constraints. Each
//! variant instantiates a different recipe of flow families, per-edge
//! bandwidth formulas and trust charges; see [`variant_table`].

use crate::keyrate::LinkRates;
use crate::netmodel::{DemandSet, Network, NodeId};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormulationError {
    #[error("missing key rate for edge {0}")]
    MissingRate(String),
    #[error("empty demand set")]
    EmptyDemands,
    #[error("invalid economic params: {0}")]
    InvalidEcon(String),
}

/// Economic parameters of the topology optimization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EconParams {
    /// Trusted-control cost charged per strongly trusted node.
    pub q_trust_cost: f64,
    /// Total construction budget (devices cost 1 each).
    pub total_budget: f64,
    /// Fraction of device time spent in MPC-cell mode (vs plain BB84).
    pub tau: f64,
    /// Fraction of MPC-cell time allocated to BB84 key generation.
    pub beta: f64,
    /// Upper bound on devices per edge; also the big-M of trust linking.
    pub device_count_cap: u32,
}

impl Default for EconParams {
    fn default() -> Self {
        EconParams {
            q_trust_cost: 100.0,
            total_budget: 10_000.0,
            tau: 0.5,
            beta: 0.9,
            device_count_cap: 50,
        }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<(), FormulationError> {
        if !(self.q_trust_cost >= 0.0) {
            return Err(FormulationError::InvalidEcon(format!(
                "q_trust_cost {}",
                self.q_trust_cost
            )));
        }
        if !(self.total_budget > 0.0) {
            return Err(FormulationError::InvalidEcon(format!(
                "total_budget {}",
                self.total_budget
            )));
        }
        for (name, v) in [("tau", self.tau), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(FormulationError::InvalidEcon(format!("{name} {v} outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// The compared networking-cell variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellVariant {
    Mdi,
    Tf,
    /// The multi-protocol collaborative cell; `tau` overrides `EconParams::tau`
    /// when set.
    Mpc { tau: Option<f64> },
    Bb84,
    /// Nonstandalone device running BB84 and MDI independently.
    Nsa { tau: Option<f64> },
    HybridBb84Mdi,
    HybridBb84Tf,
}

impl CellVariant {
    pub fn name(&self) -> &'static str {
        match self {
            CellVariant::Mdi => "mdi",
            CellVariant::Tf => "tf",
            CellVariant::Mpc { .. } => "mpc",
            CellVariant::Bb84 => "bb84",
            CellVariant::Nsa { .. } => "nsa",
            CellVariant::HybridBb84Mdi => "hybrid-bb84-mdi",
            CellVariant::HybridBb84Tf => "hybrid-bb84-tf",
        }
    }

    pub fn parse(s: &str) -> Option<CellVariant> {
        Some(match s {
            "mdi" => CellVariant::Mdi,
            "tf" => CellVariant::Tf,
            "mpc" => CellVariant::Mpc { tau: None },
            "bb84" => CellVariant::Bb84,
            "nsa" => CellVariant::Nsa { tau: None },
            "hybrid-bb84-mdi" => CellVariant::HybridBb84Mdi,
            "hybrid-bb84-tf" => CellVariant::HybridBb84Tf,
            _ => return None,
        })
    }
}

/// How C2C edges obtain key bandwidth in a variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C2cCapacity {
    /// No C2C flow family at all.
    None,
    /// Dedicated BB84 devices per C2C edge, each contributing the full rate.
    Standalone,
    /// Equivalent devices: every CSC device containing the edge contributes
    /// `(1 - tau) * R_B` (its two half-edge shares combined).
    Equivalent { tau: f64 },
}

/// Which rate a CSC device provides to its CSC edge, per orientation term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CscCapacity {
    /// No CSC flow family.
    None,
    /// MPC cell: `tau` share of the combined BB84 half-link bandwidth.
    Combined { beta: f64, tau: f64 },
    /// Plain MDI rate (share `tau` of device time).
    Mdi { tau: f64 },
    /// Plain TF rate.
    Tf { tau: f64 },
}

/// Declarative constraint recipe of one variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantRecipe {
    pub c2c: C2cCapacity,
    pub csc: CscCapacity,
    /// Charge `q` per node that is an endpoint of a device-carrying CSC edge.
    pub trust_csc_endpoints: bool,
    /// Charge `q` per node carrying transit C2C flow.
    pub trust_transit_nodes: bool,
}

impl VariantRecipe {
    pub fn has_c2c_flows(&self) -> bool {
        self.c2c != C2cCapacity::None
    }

    pub fn has_csc_flows(&self) -> bool {
        self.csc != CscCapacity::None
    }

    pub fn has_csc_devices(&self) -> bool {
        self.has_csc_flows() || matches!(self.c2c, C2cCapacity::Equivalent { .. })
    }
}

/// The constraint recipe used by [`build_program`] for each variant.
pub fn variant_table(variant: CellVariant, econ: &EconParams) -> VariantRecipe {
    match variant {
        CellVariant::Mdi => VariantRecipe {
            c2c: C2cCapacity::None,
            csc: CscCapacity::Mdi { tau: 1.0 },
            trust_csc_endpoints: true,
            trust_transit_nodes: false,
        },
        CellVariant::Tf => VariantRecipe {
            c2c: C2cCapacity::None,
            csc: CscCapacity::Tf { tau: 1.0 },
            trust_csc_endpoints: true,
            trust_transit_nodes: false,
        },
        CellVariant::Mpc { tau } => {
            let tau = tau.unwrap_or(econ.tau);
            VariantRecipe {
                c2c: C2cCapacity::Equivalent { tau },
                csc: CscCapacity::Combined { beta: econ.beta, tau },
                trust_csc_endpoints: true,
                // Leftover BB84 capacity relayed hop-by-hop still crosses a
                // node in the clear, so transit carries the same charge as in
                // the pure-BB84 network.
                trust_transit_nodes: true,
            }
        }
        CellVariant::Bb84 => VariantRecipe {
            c2c: C2cCapacity::Standalone,
            csc: CscCapacity::None,
            trust_csc_endpoints: false,
            trust_transit_nodes: true,
        },
        CellVariant::Nsa { tau } => {
            let tau = tau.unwrap_or(econ.tau);
            VariantRecipe {
                c2c: C2cCapacity::Equivalent { tau },
                csc: CscCapacity::Mdi { tau },
                trust_csc_endpoints: true,
                trust_transit_nodes: true,
            }
        }
        CellVariant::HybridBb84Mdi => VariantRecipe {
            c2c: C2cCapacity::Standalone,
            csc: CscCapacity::Mdi { tau: 1.0 },
            trust_csc_endpoints: true,
            trust_transit_nodes: true,
        },
        CellVariant::HybridBb84Tf => VariantRecipe {
            c2c: C2cCapacity::Standalone,
            csc: CscCapacity::Tf { tau: 1.0 },
            trust_csc_endpoints: true,
            trust_transit_nodes: true,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

/// One linear constraint row, sparse.
#[derive(Debug, Clone)]
pub struct LinRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A bounded linear program, maximization form.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    /// Objective coefficients (maximize).
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    /// `f64::INFINITY` for unbounded-above variables.
    pub upper: Vec<f64>,
    pub rows: Vec<LinRow>,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    fn add_var(&mut self, obj: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }
}

/// Role of each decision variable, for metrics and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    /// Epigraph variable for the minimum SoD.
    BMin,
    /// Directed C2C flow of a pair over arc `(from, to)`.
    C2cFlow {
        pair: usize,
        from: NodeId,
        to: NodeId,
    },
    /// Directed CSC flow of a pair over `(from, relay, to)`.
    CscFlow {
        pair: usize,
        from: NodeId,
        relay: NodeId,
        to: NodeId,
    },
    /// Devices on the canonical CSC edge with this index.
    CscDevice { edge: usize },
    /// Standalone BB84 devices on the C2C edge with this index.
    C2cDevice { edge: usize },
    /// Strong-trust flag of a CSC-endpoint node.
    Trust { node: NodeId },
    /// Transit-relay flag of a node carrying C2C through-flow.
    Transit { node: NodeId },
}

/// Role of each constraint row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowKind {
    /// `A^{s,t} - D^{s,t} B_min >= 0`.
    SodLink { pair: usize },
    C2cBandwidth { edge: usize },
    CscBandwidth { edge: usize },
    FlowConservation { pair: usize, node: NodeId },
    Cost,
    /// Devices on a CSC edge force the trust flag of one endpoint.
    TrustLink { edge: usize, node: NodeId },
    /// Transit C2C flow through a node forces its transit flag.
    TransitLink { node: NodeId },
}

/// The assembled mixed-integer program plus bookkeeping for metric
/// extraction and verification.
#[derive(Debug, Clone)]
pub struct MilpProblem {
    pub lp: LinearProgram,
    /// True for integer-constrained variables (binaries have bounds [0,1]).
    pub integer: Vec<bool>,
    pub var_kinds: Vec<VarKind>,
    pub row_kinds: Vec<RowKind>,
    /// Ordered communication pairs `(s, t, demand_kbps)`.
    pub pairs: Vec<(NodeId, NodeId, f64)>,
    pub variant: CellVariant,
    pub recipe: VariantRecipe,
    pub econ: EconParams,
    /// True when every flow family in this program is CSC (all C2C capacity
    /// is absent or zeroed by `tau = 1`).
    pub csc_only: bool,
}

/// Metrics read off a solved program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionMetrics {
    /// Minimum over pairs of delivered/demanded traffic.
    pub sod: f64,
    /// Fraction of total flow carried on CSC edges.
    pub csc_p: f64,
    /// Nodes carrying transit C2C flow.
    pub strong_relays: usize,
    /// Total devices deployed (CSC plus standalone).
    pub devices: u64,
}

const FLOW_TOL: f64 = 1e-6;

/// Build the topology-optimization program for one instance and variant.
pub fn build_program(
    net: &Network,
    demands: &DemandSet,
    rates: &LinkRates,
    econ: &EconParams,
    variant: CellVariant,
) -> Result<MilpProblem, FormulationError> {
    econ.validate()?;
    if demands.is_empty() {
        return Err(FormulationError::EmptyDemands);
    }
    let recipe = variant_table(variant, econ);
    let pairs: Vec<(NodeId, NodeId, f64)> = demands.iter().collect();
    let c2c_edges = net.c2c_edges();
    let csc_edges = net.csc_edges();

    for e in c2c_edges {
        if rates.bb84(e.u, e.v).is_none() {
            return Err(FormulationError::MissingRate(format!("({},{})", e.u, e.v)));
        }
    }
    for c in csc_edges {
        if rates.mdi(c).is_none() || rates.tf(c).is_none() {
            return Err(FormulationError::MissingRate(format!("({},{},{})", c.u, c.p, c.v)));
        }
    }

    let mut lp = LinearProgram::default();
    let mut integer = Vec::new();
    let mut var_kinds = Vec::new();
    let push_kind = |lp: &mut LinearProgram,
                         integer: &mut Vec<bool>,
                         var_kinds: &mut Vec<VarKind>,
                         kind: VarKind,
                         obj: f64,
                         lo: f64,
                         hi: f64,
                         int: bool| {
        let idx = lp.add_var(obj, lo, hi);
        integer.push(int);
        var_kinds.push(kind);
        idx
    };

    let b_min = push_kind(
        &mut lp,
        &mut integer,
        &mut var_kinds,
        VarKind::BMin,
        1.0,
        0.0,
        f64::INFINITY,
        false,
    );

    // Directed arc tables.
    let c2c_arcs: Vec<(NodeId, NodeId)> = c2c_edges
        .iter()
        .flat_map(|e| [(e.u, e.v), (e.v, e.u)])
        .collect();
    let csc_arcs: Vec<(NodeId, NodeId, NodeId)> = csc_edges
        .iter()
        .flat_map(|c| [(c.u, c.p, c.v), (c.v, c.p, c.u)])
        .collect();

    // Flow variables, dense layout per pair.
    let n_c2c_arcs = if recipe.has_c2c_flows() { c2c_arcs.len() } else { 0 };
    let n_csc_arcs = if recipe.has_csc_flows() { csc_arcs.len() } else { 0 };
    let c2c_flow_base = lp.n_vars();
    for (pi, _) in pairs.iter().enumerate() {
        for &(from, to) in c2c_arcs.iter().take(n_c2c_arcs) {
            push_kind(
                &mut lp,
                &mut integer,
                &mut var_kinds,
                VarKind::C2cFlow { pair: pi, from, to },
                0.0,
                0.0,
                f64::INFINITY,
                false,
            );
        }
    }
    let csc_flow_base = lp.n_vars();
    for (pi, _) in pairs.iter().enumerate() {
        for &(from, relay, to) in csc_arcs.iter().take(n_csc_arcs) {
            push_kind(
                &mut lp,
                &mut integer,
                &mut var_kinds,
                VarKind::CscFlow {
                    pair: pi,
                    from,
                    relay,
                    to,
                },
                0.0,
                0.0,
                f64::INFINITY,
                false,
            );
        }
    }
    let c2c_flow = |pair: usize, arc: usize| c2c_flow_base + pair * n_c2c_arcs + arc;
    let csc_flow = |pair: usize, arc: usize| csc_flow_base + pair * n_csc_arcs + arc;

    // Device variables.
    let cap = econ.device_count_cap as f64;
    let csc_dev_base = lp.n_vars();
    if recipe.has_csc_devices() {
        for (ei, _) in csc_edges.iter().enumerate() {
            push_kind(
                &mut lp,
                &mut integer,
                &mut var_kinds,
                VarKind::CscDevice { edge: ei },
                0.0,
                0.0,
                cap,
                true,
            );
        }
    }
    let c2c_dev_base = lp.n_vars();
    if recipe.c2c == C2cCapacity::Standalone {
        for (ei, _) in c2c_edges.iter().enumerate() {
            push_kind(
                &mut lp,
                &mut integer,
                &mut var_kinds,
                VarKind::C2cDevice { edge: ei },
                0.0,
                0.0,
                cap,
                true,
            );
        }
    }

    // Trust flags for CSC endpoints, transit flags for all nodes.
    let mut endpoint_nodes: Vec<NodeId> = csc_edges
        .iter()
        .flat_map(|c| [c.u, c.v])
        .collect();
    endpoint_nodes.sort();
    endpoint_nodes.dedup();
    let mut trust_var = vec![usize::MAX; net.n_nodes()];
    if recipe.trust_csc_endpoints && recipe.has_csc_devices() {
        for &node in &endpoint_nodes {
            trust_var[node] = push_kind(
                &mut lp,
                &mut integer,
                &mut var_kinds,
                VarKind::Trust { node },
                0.0,
                0.0,
                1.0,
                true,
            );
        }
    }
    let mut transit_var = vec![usize::MAX; net.n_nodes()];
    if recipe.trust_transit_nodes && recipe.has_c2c_flows() {
        for node in net.nodes() {
            transit_var[node] = push_kind(
                &mut lp,
                &mut integer,
                &mut var_kinds,
                VarKind::Transit { node },
                0.0,
                0.0,
                1.0,
                true,
            );
        }
    }

    let mut rows = Vec::new();
    let mut row_kinds = Vec::new();

    // Delivered traffic A^{s,t}: net outflow at the source.
    let delivered = |pi: usize, s: NodeId| -> Vec<(usize, f64)> {
        let mut expr = Vec::new();
        for (ai, &(from, to)) in c2c_arcs.iter().take(n_c2c_arcs).enumerate() {
            if from == s {
                expr.push((c2c_flow(pi, ai), 1.0));
            } else if to == s {
                expr.push((c2c_flow(pi, ai), -1.0));
            }
        }
        for (ai, &(from, _, to)) in csc_arcs.iter().take(n_csc_arcs).enumerate() {
            if from == s {
                expr.push((csc_flow(pi, ai), 1.0));
            } else if to == s {
                expr.push((csc_flow(pi, ai), -1.0));
            }
        }
        expr
    };

    // Epigraph: A^{s,t} - D^{s,t} B_min >= 0.
    for (pi, &(s, _, demand)) in pairs.iter().enumerate() {
        let mut coeffs = delivered(pi, s);
        coeffs.push((b_min, -demand));
        rows.push(LinRow {
            coeffs,
            sense: RowSense::Ge,
            rhs: 0.0,
        });
        row_kinds.push(RowKind::SodLink { pair: pi });
    }

    // C2C bandwidth per undirected edge: both directed flows of every pair
    // against the equivalent- or standalone-device capacity.
    if recipe.has_c2c_flows() {
        for (ei, e) in c2c_edges.iter().enumerate() {
            let r_b = rates.bb84(e.u, e.v).expect("checked above");
            let mut coeffs = Vec::new();
            for pi in 0..pairs.len() {
                coeffs.push((c2c_flow(pi, 2 * ei), 1.0));
                coeffs.push((c2c_flow(pi, 2 * ei + 1), 1.0));
            }
            match recipe.c2c {
                C2cCapacity::Standalone => {
                    coeffs.push((c2c_dev_base + ei, -r_b));
                }
                C2cCapacity::Equivalent { tau } => {
                    // Each CSC device containing this edge contributes
                    // (1-tau) * R_B / 2 of shared-direction capacity.
                    let per_device = (1.0 - tau) * r_b / 2.0;
                    if per_device != 0.0 {
                        for (ci, c) in csc_edges.iter().enumerate() {
                            let leg1 = (c.u.min(c.p), c.u.max(c.p));
                            let leg2 = (c.p.min(c.v), c.p.max(c.v));
                            if leg1 == (e.u, e.v) || leg2 == (e.u, e.v) {
                                coeffs.push((csc_dev_base + ci, -per_device));
                            }
                        }
                    }
                }
                C2cCapacity::None => unreachable!(),
            }
            rows.push(LinRow {
                coeffs,
                sense: RowSense::Le,
                rhs: 0.0,
            });
            row_kinds.push(RowKind::C2cBandwidth { edge: ei });
        }
    }

    // CSC bandwidth per canonical edge: both orientations of every pair
    // against the device capacity (the single device count backs both
    // orientation terms of the capacity sum).
    if recipe.has_csc_flows() {
        for (ci, c) in csc_edges.iter().enumerate() {
            let per_orientation = match recipe.csc {
                CscCapacity::Combined { beta, tau } => {
                    tau * rates.mpc_csc(c, beta).expect("checked above")
                }
                CscCapacity::Mdi { tau } => tau * rates.mdi(c).expect("checked above"),
                CscCapacity::Tf { tau } => tau * rates.tf(c).expect("checked above"),
                CscCapacity::None => unreachable!(),
            };
            let mut coeffs = Vec::new();
            for pi in 0..pairs.len() {
                coeffs.push((csc_flow(pi, 2 * ci), 1.0));
                coeffs.push((csc_flow(pi, 2 * ci + 1), 1.0));
            }
            let capacity = 2.0 * per_orientation;
            if capacity != 0.0 {
                coeffs.push((csc_dev_base + ci, -capacity));
            }
            rows.push(LinRow {
                coeffs,
                sense: RowSense::Le,
                rhs: 0.0,
            });
            row_kinds.push(RowKind::CscBandwidth { edge: ci });
        }
    }

    // Flow conservation at every non-endpoint node of every pair.
    for (pi, &(s, t, _)) in pairs.iter().enumerate() {
        for u in net.nodes() {
            if u == s || u == t {
                continue;
            }
            let mut coeffs = Vec::new();
            for (ai, &(from, to)) in c2c_arcs.iter().take(n_c2c_arcs).enumerate() {
                if from == u {
                    coeffs.push((c2c_flow(pi, ai), 1.0));
                } else if to == u {
                    coeffs.push((c2c_flow(pi, ai), -1.0));
                }
            }
            for (ai, &(from, _, to)) in csc_arcs.iter().take(n_csc_arcs).enumerate() {
                if from == u {
                    coeffs.push((csc_flow(pi, ai), 1.0));
                } else if to == u {
                    coeffs.push((csc_flow(pi, ai), -1.0));
                }
            }
            if coeffs.is_empty() {
                continue;
            }
            rows.push(LinRow {
                coeffs,
                sense: RowSense::Eq,
                rhs: 0.0,
            });
            row_kinds.push(RowKind::FlowConservation { pair: pi, node: u });
        }
    }

    // Trust linking: devices on a CSC edge force both endpoint flags.
    if recipe.trust_csc_endpoints && recipe.has_csc_devices() {
        for (ci, c) in csc_edges.iter().enumerate() {
            for node in [c.u, c.v] {
                rows.push(LinRow {
                    coeffs: vec![(csc_dev_base + ci, 1.0), (trust_var[node], -cap)],
                    sense: RowSense::Le,
                    rhs: 0.0,
                });
                row_kinds.push(RowKind::TrustLink { edge: ci, node });
            }
        }
    }

    // Transit linking: through-flow at a node forces its transit flag.
    if recipe.trust_transit_nodes && recipe.has_c2c_flows() {
        // Largest capacity each C2C edge can reach under the recipe.
        let edge_cap = |e: &crate::netmodel::C2cEdge| -> f64 {
            let r_b = rates.bb84(e.u, e.v).expect("checked above");
            match recipe.c2c {
                C2cCapacity::Standalone => cap * r_b,
                C2cCapacity::Equivalent { tau } => {
                    let containing = csc_edges
                        .iter()
                        .filter(|c| {
                            let leg1 = (c.u.min(c.p), c.u.max(c.p));
                            let leg2 = (c.p.min(c.v), c.p.max(c.v));
                            leg1 == (e.u, e.v) || leg2 == (e.u, e.v)
                        })
                        .count() as f64;
                    containing * cap * (1.0 - tau) * r_b / 2.0
                }
                C2cCapacity::None => 0.0,
            }
        };
        for u in net.nodes() {
            // Valid upper bound on transit flow: total capacity incident to u.
            let incident_cap: f64 = c2c_edges
                .iter()
                .filter(|e| e.u == u || e.v == u)
                .map(edge_cap)
                .sum();
            if incident_cap == 0.0 {
                continue;
            }
            let mut coeffs = Vec::new();
            for (pi, &(s, t, _)) in pairs.iter().enumerate() {
                if u == s || u == t {
                    continue;
                }
                for (ai, &(from, _)) in c2c_arcs.iter().take(n_c2c_arcs).enumerate() {
                    if from == u {
                        coeffs.push((c2c_flow(pi, ai), 1.0));
                    }
                }
            }
            if coeffs.is_empty() {
                continue;
            }
            coeffs.push((transit_var[u], -incident_cap));
            rows.push(LinRow {
                coeffs,
                sense: RowSense::Le,
                rhs: 0.0,
            });
            row_kinds.push(RowKind::TransitLink { node: u });
        }
    }

    // Cost: devices plus q per trusted node within the budget.
    {
        let mut coeffs = Vec::new();
        for (j, kind) in var_kinds.iter().enumerate() {
            match kind {
                VarKind::CscDevice { .. } | VarKind::C2cDevice { .. } => coeffs.push((j, 1.0)),
                VarKind::Trust { .. } | VarKind::Transit { .. } => {
                    if econ.q_trust_cost != 0.0 {
                        coeffs.push((j, econ.q_trust_cost));
                    }
                }
                _ => {}
            }
        }
        rows.push(LinRow {
            coeffs,
            sense: RowSense::Le,
            rhs: econ.total_budget,
        });
        row_kinds.push(RowKind::Cost);
    }

    lp.rows = rows;
    let csc_only = match recipe.c2c {
        C2cCapacity::None => true,
        C2cCapacity::Equivalent { tau } => tau >= 1.0,
        C2cCapacity::Standalone => false,
    };
    Ok(MilpProblem {
        lp,
        integer,
        var_kinds,
        row_kinds,
        pairs,
        variant,
        recipe,
        econ: *econ,
        csc_only,
    })
}

impl MilpProblem {
    /// Delivered traffic of pair `pi` under a variable assignment.
    pub fn delivered(&self, values: &[f64], pi: usize) -> f64 {
        let s = self.pairs[pi].0;
        let mut total = 0.0;
        for (j, kind) in self.var_kinds.iter().enumerate() {
            match *kind {
                VarKind::C2cFlow { pair, from, to } if pair == pi => {
                    if from == s {
                        total += values[j];
                    } else if to == s {
                        total -= values[j];
                    }
                }
                VarKind::CscFlow { pair, from, to, .. } if pair == pi => {
                    if from == s {
                        total += values[j];
                    } else if to == s {
                        total -= values[j];
                    }
                }
                _ => {}
            }
        }
        total
    }

    /// Evaluate the left-hand side of row `ri` under an assignment.
    pub fn row_value(&self, values: &[f64], ri: usize) -> f64 {
        self.lp.rows[ri]
            .coeffs
            .iter()
            .map(|&(j, c)| c * values[j])
            .sum()
    }
}

/// Compute SoD, CSC-flow proportion, strong-relay count and device totals
/// from a variable assignment.
pub fn extract_metrics(values: &[f64], prog: &MilpProblem) -> SolutionMetrics {
    let mut sod = f64::INFINITY;
    for (pi, &(_, _, demand)) in prog.pairs.iter().enumerate() {
        sod = sod.min(prog.delivered(values, pi) / demand);
    }
    if !sod.is_finite() {
        sod = 0.0;
    }
    sod = sod.max(0.0);

    let mut csc_total = 0.0;
    let mut c2c_total = 0.0;
    let mut devices = 0u64;
    let mut transit: std::collections::BTreeMap<NodeId, f64> = Default::default();
    for (j, kind) in prog.var_kinds.iter().enumerate() {
        match *kind {
            VarKind::CscFlow { .. } => csc_total += values[j],
            VarKind::C2cFlow { pair, from, .. } => {
                c2c_total += values[j];
                let (s, t, _) = prog.pairs[pair];
                if from != s && from != t {
                    *transit.entry(from).or_default() += values[j];
                }
            }
            VarKind::CscDevice { .. } | VarKind::C2cDevice { .. } => {
                devices += values[j].round().max(0.0) as u64;
            }
            _ => {}
        }
    }
    let total = csc_total + c2c_total;
    let csc_p = if total > FLOW_TOL {
        csc_total / total
    } else if prog.csc_only {
        1.0
    } else {
        0.0
    };
    let strong_relays = transit.values().filter(|&&f| f > FLOW_TOL).count();
    SolutionMetrics {
        sod,
        csc_p,
        strong_relays,
        devices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyrate::{LinkRates, RateParams};
    use crate::netmodel::{C2cEdge, DemandSet, Network};

    fn path_3() -> (Network, DemandSet, LinkRates) {
        let net = Network::new(
            3,
            vec![
                C2cEdge { u: 0, v: 1, length_km: 50.0 },
                C2cEdge { u: 1, v: 2, length_km: 50.0 },
            ],
        )
        .unwrap();
        let mut demands = DemandSet::default();
        demands.insert(0, 2, 100.0).unwrap();
        let rates = LinkRates::compute(&net, &RateParams::default()).unwrap();
        (net, demands, rates)
    }

    #[test]
    fn mpc_program_on_three_node_path_has_expected_variables() {
        // Hand enumeration: one pair A->B over A-C-B gives two CSC flow
        // orientations, four C2C arcs, one device, two endpoint trust flags,
        // one transit flag per node and the epigraph variable.
        let (net, demands, rates) = path_3();
        let econ = EconParams::default();
        let prog =
            build_program(&net, &demands, &rates, &econ, CellVariant::Mpc { tau: None }).unwrap();
        let count = |pred: &dyn Fn(&VarKind) -> bool| prog.var_kinds.iter().filter(|k| pred(k)).count();
        assert_eq!(count(&|k| matches!(k, VarKind::BMin)), 1);
        assert_eq!(count(&|k| matches!(k, VarKind::C2cFlow { .. })), 4);
        assert_eq!(count(&|k| matches!(k, VarKind::CscFlow { .. })), 2);
        assert_eq!(count(&|k| matches!(k, VarKind::CscDevice { .. })), 1);
        assert_eq!(count(&|k| matches!(k, VarKind::Trust { .. })), 2);
        assert_eq!(count(&|k| matches!(k, VarKind::Transit { .. })), 3);
        assert_eq!(prog.var_kinds.len(), 13);
        let conservation = prog
            .row_kinds
            .iter()
            .filter(|k| matches!(k, RowKind::FlowConservation { .. }))
            .count();
        assert_eq!(conservation, 1);
        assert_eq!(
            prog.row_kinds.iter().filter(|k| matches!(k, RowKind::Cost)).count(),
            1
        );
    }

    #[test]
    fn tau_one_zeroes_all_c2c_capacity() {
        let (net, demands, rates) = path_3();
        let econ = EconParams { tau: 1.0, ..EconParams::default() };
        let prog =
            build_program(&net, &demands, &rates, &econ, CellVariant::Mpc { tau: None }).unwrap();
        assert!(prog.csc_only);
        // Every C2C bandwidth row must reduce to sum(flows) <= 0: no device
        // term survives.
        for (ri, kind) in prog.row_kinds.iter().enumerate() {
            if matches!(kind, RowKind::C2cBandwidth { .. }) {
                let row = &prog.lp.rows[ri];
                // No device term survives: only unit flow coefficients remain,
                // so the row is sum(flows) <= 0.
                for &(j, c) in &row.coeffs {
                    assert!(matches!(prog.var_kinds[j], VarKind::C2cFlow { .. }));
                    assert_eq!(c, 1.0);
                }
                assert_eq!(row.rhs, 0.0);
            }
        }
    }

    #[test]
    fn equivalent_device_sums_on_four_node_fixture() {
        // Path 0-1-2-3: CSC edges (0,1,2) and (1,2,3). Edge (1,2) lies in
        // both, so its capacity row must reference both device variables;
        // edges (0,1) and (2,3) each lie in exactly one.
        let net = Network::new(
            4,
            vec![
                C2cEdge { u: 0, v: 1, length_km: 30.0 },
                C2cEdge { u: 1, v: 2, length_km: 40.0 },
                C2cEdge { u: 2, v: 3, length_km: 50.0 },
            ],
        )
        .unwrap();
        let mut demands = DemandSet::default();
        demands.insert(0, 3, 100.0).unwrap();
        let rates = LinkRates::compute(&net, &RateParams::default()).unwrap();
        let econ = EconParams { tau: 0.5, ..EconParams::default() };
        let prog =
            build_program(&net, &demands, &rates, &econ, CellVariant::Mpc { tau: None }).unwrap();
        let device_terms = |edge: usize| -> usize {
            let ri = prog
                .row_kinds
                .iter()
                .position(|k| *k == RowKind::C2cBandwidth { edge })
                .unwrap();
            prog.lp.rows[ri]
                .coeffs
                .iter()
                .filter(|&&(j, _)| matches!(prog.var_kinds[j], VarKind::CscDevice { .. }))
                .count()
        };
        assert_eq!(device_terms(0), 1); // edge (0,1)
        assert_eq!(device_terms(1), 2); // edge (1,2) in both CSC edges
        assert_eq!(device_terms(2), 1); // edge (2,3)
        // Coefficient value is (1-tau) * R_B / 2.
        let ri = prog
            .row_kinds
            .iter()
            .position(|k| *k == RowKind::C2cBandwidth { edge: 0 })
            .unwrap();
        let r_b = rates.bb84(0, 1).unwrap();
        let dev_coef = prog.lp.rows[ri]
            .coeffs
            .iter()
            .find(|&&(j, _)| matches!(prog.var_kinds[j], VarKind::CscDevice { .. }))
            .unwrap()
            .1;
        assert!((dev_coef - (-(1.0 - 0.5) * r_b / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn mdi_recipe_has_only_csc_flows_and_endpoint_trust() {
        let econ = EconParams::default();
        let recipe = variant_table(CellVariant::Mdi, &econ);
        assert!(!recipe.has_c2c_flows());
        assert!(recipe.has_csc_flows());
        assert!(recipe.trust_csc_endpoints);
        assert!(!recipe.trust_transit_nodes);
        assert_eq!(recipe.csc, CscCapacity::Mdi { tau: 1.0 });
    }

    #[test]
    fn bb84_recipe_is_c2c_only_with_transit_trust() {
        let econ = EconParams::default();
        let recipe = variant_table(CellVariant::Bb84, &econ);
        assert_eq!(recipe.c2c, C2cCapacity::Standalone);
        assert!(!recipe.has_csc_flows());
        assert!(recipe.trust_transit_nodes);
        assert!(!recipe.trust_csc_endpoints);
    }

    #[test]
    fn mpc_recipe_matches_full_program_shape() {
        let econ = EconParams { tau: 0.5, beta: 0.9, ..EconParams::default() };
        let recipe = variant_table(CellVariant::Mpc { tau: None }, &econ);
        assert_eq!(recipe.c2c, C2cCapacity::Equivalent { tau: 0.5 });
        assert_eq!(recipe.csc, CscCapacity::Combined { beta: 0.9, tau: 0.5 });
        // Explicit override wins over the econ default.
        let recipe2 = variant_table(CellVariant::Mpc { tau: Some(1.0) }, &econ);
        assert_eq!(recipe2.c2c, C2cCapacity::Equivalent { tau: 1.0 });
    }

    #[test]
    fn hybrid_recipes_are_unions() {
        let econ = EconParams::default();
        for (variant, csc) in [
            (CellVariant::HybridBb84Mdi, CscCapacity::Mdi { tau: 1.0 }),
            (CellVariant::HybridBb84Tf, CscCapacity::Tf { tau: 1.0 }),
        ] {
            let recipe = variant_table(variant, &econ);
            assert_eq!(recipe.c2c, C2cCapacity::Standalone);
            assert_eq!(recipe.csc, csc);
            assert!(recipe.trust_csc_endpoints && recipe.trust_transit_nodes);
        }
    }

    #[test]
    fn empty_demands_are_rejected() {
        let (net, _, rates) = path_3();
        let econ = EconParams::default();
        let err = build_program(&net, &DemandSet::default(), &rates, &econ, CellVariant::Bb84);
        assert!(matches!(err, Err(FormulationError::EmptyDemands)));
    }

    #[test]
    fn missing_rate_names_the_edge() {
        let (net, demands, _) = path_3();
        let econ = EconParams::default();
        let empty = LinkRates::default();
        let err = build_program(&net, &demands, &empty, &econ, CellVariant::Bb84).unwrap_err();
        assert!(err.to_string().contains("(0,1)"), "{err}");
    }

    #[test]
    fn metrics_with_all_demands_met_give_sod_one() {
        let (net, demands, rates) = path_3();
        let econ = EconParams::default();
        let prog =
            build_program(&net, &demands, &rates, &econ, CellVariant::Mpc { tau: None }).unwrap();
        // Assign exactly the demand on the forward CSC arc.
        let mut values = vec![0.0; prog.lp.n_vars()];
        for (j, kind) in prog.var_kinds.iter().enumerate() {
            if matches!(kind, VarKind::CscFlow { pair: 0, from: 0, relay: 1, to: 2 }) {
                values[j] = 100.0;
            }
        }
        let m = extract_metrics(&values, &prog);
        assert_eq!(m.sod, 1.0);
        assert_eq!(m.csc_p, 1.0);
        assert_eq!(m.strong_relays, 0);
    }

    #[test]
    fn zero_flow_metrics_follow_group_convention() {
        let (net, demands, rates) = path_3();
        let econ = EconParams { tau: 1.0, ..EconParams::default() };
        let group1 =
            build_program(&net, &demands, &rates, &econ, CellVariant::Mpc { tau: None }).unwrap();
        let zeros = vec![0.0; group1.lp.n_vars()];
        let m1 = extract_metrics(&zeros, &group1);
        assert_eq!((m1.sod, m1.csc_p), (0.0, 1.0));

        let econ2 = EconParams::default();
        let group2 = build_program(&net, &demands, &rates, &econ2, CellVariant::Bb84).unwrap();
        let zeros2 = vec![0.0; group2.lp.n_vars()];
        let m2 = extract_metrics(&zeros2, &group2);
        assert_eq!((m2.sod, m2.csc_p), (0.0, 0.0));
    }
}
