//! Node placement, unit-disk connectivity and static shortest-hop routing.
//!
//! Node 0 is always the sink. Routes are a BFS tree rooted at the sink; a
//! node's next hop is its lowest-id neighbour one hop closer to the sink.

use std::collections::VecDeque;
use std::io::Write;

use thiserror::Error;

use crate::sim::{RandomStream, SimError};

pub const SINK: usize = 0;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("need at least 2 nodes (sink and one source), got {0}")]
    TooFewNodes(usize),
    #[error("area side must be positive, got {0}")]
    BadSide(f64),
    #[error("source count {sources} must be within 1..={max}")]
    BadSourceCount { sources: usize, max: usize },
    #[error("source nodes {0:?} cannot reach the sink")]
    Unreachable(Vec<usize>),
    #[error(transparent)]
    Rng(#[from] SimError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Sink,
    Source,
    Relay,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Sink => "sink",
            Role::Source => "source",
            Role::Relay => "relay",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub role: Role,
}

/// `n` nodes uniform over `[0, side]^2`; node 0 is the sink and `sources`
/// distinct sources are drawn from the rest.
pub fn place_random(
    n: usize,
    side: f64,
    sources: usize,
    stream: &mut RandomStream,
) -> Result<Vec<NodeSpec>, TopologyError> {
    if n < 2 {
        return Err(TopologyError::TooFewNodes(n));
    }
    if !(side > 0.0) {
        return Err(TopologyError::BadSide(side));
    }
    if sources == 0 || sources > n - 1 {
        return Err(TopologyError::BadSourceCount {
            sources,
            max: n - 1,
        });
    }
    let mut nodes: Vec<NodeSpec> = (0..n)
        .map(|id| NodeSpec {
            id,
            x: stream.uniform_f64() * side,
            y: stream.uniform_f64() * side,
            role: if id == SINK { Role::Sink } else { Role::Relay },
        })
        .collect();
    // Partial Fisher-Yates over the non-sink ids.
    let mut pool: Vec<usize> = (1..n).collect();
    for i in 0..sources {
        let j = i + stream.index(pool.len() - i)?;
        pool.swap(i, j);
        nodes[pool[i]].role = Role::Source;
    }
    Ok(nodes)
}

/// Symmetric neighbour lists, each sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    /// Edge iff Euclidean distance <= radius, compared on squared distances.
    pub fn build(nodes: &[NodeSpec], radius: f64) -> Self {
        let r2 = radius * radius;
        let mut neighbors = vec![Vec::new(); nodes.len()];
        for (i, a) in nodes.iter().enumerate() {
            for (j, b) in nodes.iter().enumerate().skip(i + 1) {
                let dx = a.x - b.x;
                let dy = a.y - b.y;
                if dx * dx + dy * dy <= r2 {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Adjacency { neighbors }
    }

    pub fn from_lists(neighbors: Vec<Vec<usize>>) -> Self {
        Adjacency { neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteTable {
    next_hop: Vec<Option<usize>>,
    hops: Vec<Option<u32>>,
}

impl RouteTable {
    pub fn compute(adjacency: &Adjacency, sink: usize) -> Self {
        let n = adjacency.len();
        let mut hops = vec![None; n];
        let mut queue = VecDeque::new();
        hops[sink] = Some(0u32);
        queue.push_back(sink);
        while let Some(u) = queue.pop_front() {
            let d = hops[u].unwrap_or(0);
            for &v in adjacency.neighbors(u) {
                if hops[v].is_none() {
                    hops[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        let next_hop = (0..n)
            .map(|v| {
                let d = hops[v]?;
                if d == 0 {
                    return None;
                }
                // Neighbour lists are sorted, so the first match has the lowest id.
                adjacency
                    .neighbors(v)
                    .iter()
                    .copied()
                    .find(|&u| hops[u] == Some(d - 1))
            })
            .collect();
        RouteTable { next_hop, hops }
    }

    pub fn next_hop(&self, node: usize) -> Option<usize> {
        self.next_hop[node]
    }

    pub fn hops(&self, node: usize) -> Option<u32> {
        self.hops[node]
    }

    pub fn reachable(&self, node: usize) -> bool {
        self.hops[node].is_some()
    }

    /// Next hops from `node` to the sink, excluding `node` itself.
    pub fn path(&self, node: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = node;
        while let Some(next) = self.next_hop[cur] {
            path.push(next);
            cur = next;
            if path.len() > self.next_hop.len() {
                break;
            }
        }
        path
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnreachablePolicy {
    Exclude,
    Fail,
}

impl UnreachablePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            UnreachablePolicy::Exclude => "exclude",
            UnreachablePolicy::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    pub nodes: Vec<NodeSpec>,
    pub adjacency: Adjacency,
    pub routes: RouteTable,
}

impl Topology {
    pub fn new(nodes: Vec<NodeSpec>, radius: f64) -> Self {
        let adjacency = Adjacency::build(&nodes, radius);
        let routes = RouteTable::compute(&adjacency, SINK);
        Topology {
            nodes,
            adjacency,
            routes,
        }
    }

    pub fn random(
        n: usize,
        side: f64,
        radius: f64,
        sources: usize,
        stream: &mut RandomStream,
    ) -> Result<Self, TopologyError> {
        Ok(Topology::new(place_random(n, side, sources, stream)?, radius))
    }

    /// Topology from explicit coordinates; node 0 is the sink.
    pub fn from_positions(positions: &[(f64, f64)], sources: &[usize], radius: f64) -> Self {
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| NodeSpec {
                id,
                x,
                y,
                role: if id == SINK {
                    Role::Sink
                } else if sources.contains(&id) {
                    Role::Source
                } else {
                    Role::Relay
                },
            })
            .collect();
        Topology::new(nodes, radius)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter(|n| n.role == Role::Source).map(|n| n.id)
    }

    pub fn unreachable_sources(&self) -> Vec<usize> {
        self.sources().filter(|&s| !self.routes.reachable(s)).collect()
    }

    /// Applies the policy, returning the sources that will carry traffic.
    pub fn active_sources(&self, policy: UnreachablePolicy) -> Result<Vec<usize>, TopologyError> {
        let unreachable = self.unreachable_sources();
        if policy == UnreachablePolicy::Fail && !unreachable.is_empty() {
            return Err(TopologyError::Unreachable(unreachable));
        }
        Ok(self.sources().filter(|&s| self.routes.reachable(s)).collect())
    }

    /// One row per node: position, role, next hop and hop count. Edges follow
    /// as `edge,a,b` rows with `a < b`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TopologyError> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["kind", "id", "x", "y", "role", "next_hop", "hops"])?;
        for node in &self.nodes {
            let next = self.routes.next_hop(node.id).map(|h| h.to_string()).unwrap_or_default();
            let hops = self.routes.hops(node.id).map(|h| h.to_string()).unwrap_or_default();
            w.write_record([
                "node".to_string(),
                node.id.to_string(),
                node.x.to_string(),
                node.y.to_string(),
                node.role.as_str().to_string(),
                next,
                hops,
            ])?;
        }
        for a in 0..self.len() {
            for &b in self.adjacency.neighbors(a) {
                if a < b {
                    w.write_record(["edge".to_string(), a.to_string(), b.to_string()])?;
                }
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TOPOLOGY_STREAM;

    #[test]
    fn hundred_nodes_inside_square() {
        let mut s = RandomStream::new(1, TOPOLOGY_STREAM);
        let nodes = place_random(100, 100.0, 20, &mut s).unwrap();
        assert_eq!(nodes.len(), 100);
        assert!(nodes.iter().all(|n| (0.0..=100.0).contains(&n.x) && (0.0..=100.0).contains(&n.y)));
        assert_eq!(nodes.iter().filter(|n| n.role == Role::Source).count(), 20);
        assert_eq!(nodes[0].role, Role::Sink);
        assert!(nodes.iter().enumerate().all(|(i, n)| n.id == i));
    }

    #[test]
    fn minimal_network() {
        let mut s = RandomStream::new(1, TOPOLOGY_STREAM);
        let nodes = place_random(2, 1.0, 1, &mut s).unwrap();
        assert_eq!(nodes[0].role, Role::Sink);
        assert_eq!(nodes[1].role, Role::Source);
    }

    #[test]
    fn too_few_nodes_rejected() {
        let mut s = RandomStream::new(1, TOPOLOGY_STREAM);
        assert!(matches!(place_random(1, 10.0, 1, &mut s), Err(TopologyError::TooFewNodes(1))));
        assert!(matches!(place_random(5, 0.0, 1, &mut s), Err(TopologyError::BadSide(_))));
        assert!(matches!(place_random(5, 1.0, 5, &mut s), Err(TopologyError::BadSourceCount { .. })));
    }

    #[test]
    fn placement_is_deterministic() {
        let a = place_random(100, 100.0, 20, &mut RandomStream::new(77, TOPOLOGY_STREAM)).unwrap();
        let b = place_random(100, 100.0, 20, &mut RandomStream::new(77, TOPOLOGY_STREAM)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn radius_boundary_is_inclusive() {
        let t = Topology::from_positions(&[(0.0, 0.0), (30.0, 0.0)], &[1], 30.0);
        assert!(t.adjacency.connected(0, 1));
        let t = Topology::from_positions(&[(0.0, 0.0), (30.01, 0.0)], &[1], 30.0);
        assert!(!t.adjacency.connected(0, 1));
    }

    #[test]
    fn line_topology_routes() {
        // sink(0) -- B(1) -- A(2)
        let t = Topology::from_positions(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0)], &[2], 25.0);
        assert_eq!(t.routes.next_hop(2), Some(1));
        assert_eq!(t.routes.hops(2), Some(2));
        assert_eq!(t.routes.hops(1), Some(1));
        assert_eq!(t.routes.next_hop(0), None);
        assert_eq!(t.routes.path(2), vec![1, 0]);
    }

    #[test]
    fn ties_prefer_lowest_neighbor_id() {
        // Node 3 can go via 1 or 2; both are one hop from the sink.
        let t = Topology::from_positions(
            &[(0.0, 0.0), (10.0, 5.0), (10.0, -5.0), (20.0, 0.0)],
            &[3],
            15.0,
        );
        assert_eq!(t.routes.next_hop(3), Some(1));
    }

    #[test]
    fn unreachable_source_policy() {
        let t = Topology::from_positions(&[(0.0, 0.0), (5.0, 0.0), (90.0, 90.0)], &[1, 2], 30.0);
        assert_eq!(t.unreachable_sources(), vec![2]);
        assert_eq!(t.active_sources(UnreachablePolicy::Exclude).unwrap(), vec![1]);
        assert!(matches!(
            t.active_sources(UnreachablePolicy::Fail),
            Err(TopologyError::Unreachable(v)) if v == vec![2]
        ));
    }

    #[test]
    fn csv_dump_lists_nodes_and_edges() {
        let t = Topology::from_positions(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0)], &[2], 25.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,id,x,y,role,next_hop,hops\n"));
        assert!(text.contains("node,2,40,0,source,1,2\n"));
        assert!(text.contains("edge,0,1\n"));
        assert!(text.contains("edge,1,2\n"));
        assert!(!text.contains("edge,0,2\n"));
    }
}
