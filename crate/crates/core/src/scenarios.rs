//! Canned scenarios shared by the CLI, the FFI layer and the test suites.

use crate::config::ScenarioConfig;
use crate::network::{Network, NetworkError, NodeStats};
use crate::topology::Topology;
use crate::traffic::{ArrivalProcess, Scheme};

/// Result of one run of the two-sender contention fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentionSample {
    pub own: NodeStats,
    pub competitor: NodeStats,
    pub duration_s: f64,
}

impl ContentionSample {
    /// Acknowledged DATA frames per second for the node under test.
    pub fn own_forwarding_rate(&self) -> f64 {
        self.own.acked as f64 / self.duration_s
    }
}

/// Sink plus two always-backlogged senders, all within range of each other.
/// Node 1 uses `own_window`, node 2 `competitor_window`; both stay fixed.
pub fn contention_pair(
    own_window: f64,
    competitor_window: f64,
    seed: u64,
    duration_s: f64,
) -> Result<ContentionSample, NetworkError> {
    let mut cfg = ScenarioConfig::default();
    cfg.run.scheme = Scheme::None;
    cfg.run.duration_s = duration_s;
    cfg.run.warmup_s = 0.0;
    cfg.traffic.arrival = ArrivalProcess::Saturated;
    // Saturated senders would exhaust the stock battery in seconds.
    cfg.energy.initial = f64::MAX / 4.0;
    let radius = cfg.topology.radius;
    let topo = Topology::from_positions(&[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)], &[1, 2], radius);
    let mut net = Network::with_topology(&cfg, topo, seed)?;
    net.set_window(1, own_window);
    net.set_window(2, competitor_window);
    let out = net.run()?;
    Ok(ContentionSample {
        own: out.node_stats[1].clone(),
        competitor: out.node_stats[2].clone(),
        duration_s,
    })
}

/// Stock parameters with every source pushed to `offered_load` pps.
pub fn overload(offered_load: f64, scheme: Scheme) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.traffic.offered_load = offered_load;
    cfg.run.scheme = scheme;
    cfg
}
