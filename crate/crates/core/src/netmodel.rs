//! Optical-network model: C2C/CSC edge graphs, random instance generation and
//! canonical JSON persistence.
//!
//! Nodes are dense integers `0..n`. A C2C edge is a single fiber link between
//! two clients; a CSC edge is a pair of adjacent links `(u,p)`, `(p,v)` on
//! which a measurement device can be deployed at the middle node `p`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub type NodeId = usize;

/// Current on-disk schema version for instance files.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid demands: {0}")]
    InvalidDemands(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
}

/// A single fiber link between clients `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C2cEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub length_km: f64,
}

/// A client-server-client structure `(u, p, v)`: two adjacent C2C edges
/// through the candidate relay `p`, stored once with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CscEdge {
    pub u: NodeId,
    pub p: NodeId,
    pub v: NodeId,
    pub len_up_km: f64,
    pub len_pv_km: f64,
}

/// Undirected weighted graph with its derived CSC structures.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n_nodes: usize,
    c2c_edges: Vec<C2cEdge>,
    csc_edges: Vec<CscEdge>,
}

impl Network {
    /// Build a network from an edge list, validating invariants and deriving
    /// the CSC edge set.
    pub fn new(n_nodes: usize, mut edges: Vec<C2cEdge>) -> Result<Self, NetError> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &mut edges {
            if e.u == e.v {
                return Err(NetError::InvalidNetwork(format!("self-loop at node {}", e.u)));
            }
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
            if e.v >= n_nodes {
                return Err(NetError::InvalidNetwork(format!(
                    "edge ({},{}) references node outside 0..{}",
                    e.u, e.v, n_nodes
                )));
            }
            if !(e.length_km > 0.0) {
                return Err(NetError::InvalidNetwork(format!(
                    "edge ({},{}) has non-positive length {}",
                    e.u, e.v, e.length_km
                )));
            }
            if !seen.insert((e.u, e.v)) {
                return Err(NetError::InvalidNetwork(format!(
                    "duplicate edge ({},{})",
                    e.u, e.v
                )));
            }
        }
        edges.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        let csc_edges = enumerate_csc_from_edges(n_nodes, &edges);
        Ok(Network {
            n_nodes,
            c2c_edges: edges,
            csc_edges,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.n_nodes
    }

    pub fn c2c_edges(&self) -> &[C2cEdge] {
        &self.c2c_edges
    }

    pub fn csc_edges(&self) -> &[CscEdge] {
        &self.csc_edges
    }

    /// True if every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        if self.n_nodes == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n_nodes];
        for e in &self.c2c_edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n_nodes];
        let mut queue = vec![0];
        seen[0] = true;
        while let Some(u) = queue.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Enumerate all CSC structures of a network: triples `(u, p, v)` with
/// `u < v` such that `(u,p)` and `(p,v)` are C2C edges.
pub fn enumerate_csc(network: &Network) -> Vec<CscEdge> {
    enumerate_csc_from_edges(network.n_nodes, &network.c2c_edges)
}

fn enumerate_csc_from_edges(n_nodes: usize, edges: &[C2cEdge]) -> Vec<CscEdge> {
    let mut neighbors: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n_nodes];
    for e in edges {
        neighbors[e.u].push((e.v, e.length_km));
        neighbors[e.v].push((e.u, e.length_km));
    }
    let mut out = Vec::new();
    for (p, nbrs) in neighbors.iter().enumerate() {
        for i in 0..nbrs.len() {
            for j in (i + 1)..nbrs.len() {
                let (a, la) = nbrs[i];
                let (b, lb) = nbrs[j];
                let (u, v, len_up_km, len_pv_km) =
                    if a < b { (a, b, la, lb) } else { (b, a, lb, la) };
                out.push(CscEdge {
                    u,
                    p,
                    v,
                    len_up_km,
                    len_pv_km,
                });
            }
        }
    }
    out.sort_by(|x, y| (x.u, x.p, x.v).cmp(&(y.u, y.p, y.v)));
    out
}

/// Directed communication demands, kbps per ordered `(s, t)` pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DemandSet {
    entries: BTreeMap<(NodeId, NodeId), f64>,
}

impl DemandSet {
    pub fn insert(&mut self, s: NodeId, t: NodeId, kbps: f64) -> Result<(), NetError> {
        if s == t {
            return Err(NetError::InvalidDemands(format!("demand {s}->{t} is a self-pair")));
        }
        if !(kbps > 0.0) {
            return Err(NetError::InvalidDemands(format!(
                "demand {s}->{t} has non-positive rate {kbps}"
            )));
        }
        if self.entries.insert((s, t), kbps).is_some() {
            return Err(NetError::InvalidDemands(format!("duplicate demand pair {s}->{t}")));
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.entries.iter().map(|(&(s, t), &d)| (s, t, d))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Parameters of the random instance generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n_nodes: usize,
    pub edge_factor: f64,
    pub length_range_km: (f64, f64),
    pub demand_range_kbps: (f64, f64),
    pub demand_src_fraction: f64,
    pub demand_dst_fraction: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(n_nodes: usize, seed: u64) -> Self {
        InstanceSpec {
            n_nodes,
            edge_factor: 1.5,
            length_range_km: (10.0, 250.0),
            demand_range_kbps: (100.0, 300.0),
            demand_src_fraction: 1.0 / 3.0,
            demand_dst_fraction: 1.0 / 5.0,
            seed,
        }
    }

    fn validate(&self) -> Result<(), NetError> {
        if self.n_nodes < 3 {
            return Err(NetError::InvalidSpec(format!(
                "need at least 3 nodes, got {}",
                self.n_nodes
            )));
        }
        let (lo, hi) = self.length_range_km;
        if !(lo > 0.0 && hi >= lo) {
            return Err(NetError::InvalidSpec(format!("bad length range [{lo},{hi}]")));
        }
        let (dlo, dhi) = self.demand_range_kbps;
        if !(dlo > 0.0 && dhi >= dlo) {
            return Err(NetError::InvalidSpec(format!("bad demand range [{dlo},{dhi}]")));
        }
        for (name, f) in [
            ("demand_src_fraction", self.demand_src_fraction),
            ("demand_dst_fraction", self.demand_dst_fraction),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(NetError::InvalidSpec(format!("{name} {f} outside (0,1]")));
            }
        }
        Ok(())
    }

    fn target_edges(&self) -> Result<usize, NetError> {
        let target = (self.edge_factor * self.n_nodes as f64).round() as usize;
        let max = self.n_nodes * (self.n_nodes - 1) / 2;
        if target < self.n_nodes - 1 || target > max {
            return Err(NetError::InvalidSpec(format!(
                "edge count {} infeasible for {} nodes (need {}..={})",
                target,
                self.n_nodes,
                self.n_nodes - 1,
                max
            )));
        }
        Ok(target)
    }
}

/// Generate a connected random network: a uniform random spanning tree
/// (via a random Pruefer sequence) plus extra edges drawn uniformly from the
/// absent pairs, with lengths uniform in the spec range.
pub fn generate_network(spec: &InstanceSpec) -> Result<Network, NetError> {
    spec.validate()?;
    let target = spec.target_edges()?;
    let n = spec.n_nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut pairs: Vec<(NodeId, NodeId)> = pruefer_tree(n, &mut rng);
    let present: std::collections::BTreeSet<(NodeId, NodeId)> = pairs.iter().copied().collect();
    let mut absent: Vec<(NodeId, NodeId)> = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if !present.contains(&(u, v)) {
                absent.push((u, v));
            }
        }
    }
    let extra = target - (n - 1);
    for idx in sample(&mut rng, absent.len(), extra) {
        pairs.push(absent[idx]);
    }
    pairs.sort();

    let (lo, hi) = spec.length_range_km;
    let edges = pairs
        .into_iter()
        .map(|(u, v)| C2cEdge {
            u,
            v,
            length_km: rng.random_range(lo..=hi),
        })
        .collect();
    Network::new(n, edges)
}

/// Decode a uniformly random Pruefer sequence into a spanning tree of the
/// complete graph on `n >= 3` nodes; edges returned with `u < v`.
fn pruefer_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always remains");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] = 0;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Draw the demand set per the spec fractions: `ceil(n*src_fraction)` sources,
/// each communicating with `ceil(n*dst_fraction)` distinct other nodes.
pub fn generate_demands(network: &Network, spec: &InstanceSpec) -> Result<DemandSet, NetError> {
    spec.validate()?;
    let n = network.n_nodes();
    let n_src = (n as f64 * spec.demand_src_fraction).ceil() as usize;
    let n_dst = (n as f64 * spec.demand_dst_fraction).ceil() as usize;
    if n_src == 0 || n_dst == 0 {
        return Err(NetError::InvalidSpec(format!(
            "{n} nodes select zero sources or destinations"
        )));
    }
    if n_dst > n - 1 {
        return Err(NetError::InvalidSpec(format!(
            "{n} nodes too few for {n_dst} destinations per source"
        )));
    }
    // Independent stream so network and demand draws do not interleave.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut sources: Vec<NodeId> = sample(&mut rng, n, n_src).into_iter().collect();
    sources.sort();
    let (dlo, dhi) = spec.demand_range_kbps;
    let mut demands = DemandSet::default();
    for s in sources {
        let mut others: Vec<NodeId> = (0..n).filter(|&v| v != s).collect();
        let mut dsts: Vec<NodeId> = sample(&mut rng, others.len(), n_dst)
            .into_iter()
            .map(|i| others[i])
            .collect();
        dsts.sort();
        others.clear();
        for t in dsts {
            demands.insert(s, t, rng.random_range(dlo..=dhi))?;
        }
    }
    Ok(demands)
}

/// Strongly trusted relay counts on an `n`-node linear network:
/// `n-2` for hop-by-hop BB84 relaying, `floor((n-2)/2)` when alternating
/// MPC cells make every other interior node weakly trusted.
pub fn linear_strong_relay_counts(n: usize) -> Result<(usize, usize), NetError> {
    if n < 2 {
        return Err(NetError::InvalidSpec(format!("linear network needs n >= 2, got {n}")));
    }
    Ok((n - 2, (n - 2) / 2))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    nodes: usize,
    edges: Vec<EdgeRec>,
    demands: Vec<DemandRec>,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config_hash: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct EdgeRec {
    u: usize,
    v: usize,
    length_km: f64,
}

#[derive(Serialize, Deserialize)]
struct DemandRec {
    s: usize,
    t: usize,
    kbps: f64,
}

/// A network plus demands, as persisted by `save_instance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub network: Network,
    pub demands: DemandSet,
    pub seed: u64,
    pub config_hash: Option<String>,
}

impl Instance {
    /// Canonical serialized form: fixed field order, edges sorted by `(u,v)`,
    /// demands sorted by `(s,t)`, trailing newline. Byte-stable for a given
    /// instance.
    pub fn to_canonical_json(&self) -> String {
        let file = InstanceFile {
            version: SCHEMA_VERSION,
            nodes: self.network.n_nodes(),
            edges: self
                .network
                .c2c_edges()
                .iter()
                .map(|e| EdgeRec {
                    u: e.u,
                    v: e.v,
                    length_km: e.length_km,
                })
                .collect(),
            demands: self
                .demands
                .iter()
                .map(|(s, t, kbps)| DemandRec { s, t, kbps })
                .collect(),
            seed: self.seed,
            config_hash: self.config_hash.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("instance serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, NetError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| NetError::Parse {
            message: e.to_string(),
            line: e.line(),
            column: e.column(),
        })?;
        if file.version != SCHEMA_VERSION {
            return Err(NetError::SchemaVersion { found: file.version });
        }
        let edges = file
            .edges
            .into_iter()
            .map(|r| C2cEdge {
                u: r.u,
                v: r.v,
                length_km: r.length_km,
            })
            .collect();
        let network = Network::new(file.nodes, edges)?;
        let mut demands = DemandSet::default();
        for r in file.demands {
            demands.insert(r.s, r.t, r.kbps)?;
        }
        Ok(Instance {
            network,
            demands,
            seed: file.seed,
            config_hash: file.config_hash,
        })
    }

    /// Hex digest of the canonical form with any config hash stripped; used to
    /// pair instances across experiment variants.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let stripped = Instance {
            config_hash: None,
            ..self.clone()
        };
        let digest = Sha256::digest(stripped.to_canonical_json().as_bytes());
        hex_prefix(&digest, 16)
    }
}

pub(crate) fn hex_prefix(bytes: &[u8], chars: usize) -> String {
    let mut s = String::with_capacity(chars);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}

pub fn save_instance(path: &Path, instance: &Instance) -> Result<(), NetError> {
    std::fs::write(path, instance.to_canonical_json()).map_err(|e| NetError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_instance(path: &Path) -> Result<Instance, NetError> {
    let text = std::fs::read_to_string(path).map_err(|e| NetError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Instance::from_json(&text)
}
