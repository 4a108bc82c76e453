//! Server graphs: loading, validation and the all-pairs effective
//! rate/distance tables used by the migration and response equations.
//!
//! Inter-server transfers follow the minimum-hop path (ties by smaller
//! total serialization cost, then by node-id sequence). The per-pair
//! effective rate is the harmonic composition of the hop rates, so
//! `size / R[a][k]` equals the sum of per-hop store-and-forward times,
//! and `D[a][k]` is the summed hop distance.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MecServer, ServerId};

/// One undirected inter-server link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: ServerId,
    pub b: ServerId,
    pub rate_bps: f64,
    pub distance_m: f64,
}

/// Immutable server graph with precomputed all-pairs tables.
#[derive(Debug, Clone)]
pub struct Topology {
    servers: Vec<MecServer>,
    links: Vec<Link>,
    /// Effective rate per ordered pair; +inf on the diagonal so a
    /// self-transfer takes zero time.
    eff_rate_bps: Vec<Vec<f64>>,
    /// Path distance per ordered pair; 0 on the diagonal.
    dist_m: Vec<Vec<f64>>,
}

impl Topology {
    /// Builds a topology, validating ids, link endpoints and connectivity,
    /// then precomputing the all-pairs tables.
    pub fn new(servers: Vec<MecServer>, links: Vec<Link>) -> Result<Self> {
        if servers.is_empty() {
            return Err(Error::InvalidInput("topology needs at least one server".into()));
        }
        let n = servers.len();
        let mut seen = vec![false; n];
        for s in &servers {
            if s.id.0 >= n {
                return Err(Error::InvalidInput(format!(
                    "server ids must be contiguous 0..{}, got {}",
                    n - 1,
                    s.id
                )));
            }
            if seen[s.id.0] {
                return Err(Error::DuplicateNode(s.id.0));
            }
            seen[s.id.0] = true;
            if s.capacity_mips <= 0.0 {
                return Err(Error::InvalidInput(format!("{}: capacity must be > 0", s.id)));
            }
        }
        let mut ordered = servers;
        ordered.sort_by_key(|s| s.id);

        let mut pair_seen = std::collections::HashSet::new();
        for l in &links {
            if l.a.0 >= n || l.b.0 >= n {
                return Err(Error::UnknownServer(l.a.0.max(l.b.0)));
            }
            if l.a == l.b {
                return Err(Error::InvalidInput(format!("self-loop on {}", l.a)));
            }
            if l.rate_bps <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "link {}-{}: rate must be > 0",
                    l.a, l.b
                )));
            }
            if l.distance_m < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "link {}-{}: distance must be >= 0",
                    l.a, l.b
                )));
            }
            let key = (l.a.0.min(l.b.0), l.a.0.max(l.b.0));
            if !pair_seen.insert(key) {
                return Err(Error::InvalidInput(format!(
                    "duplicate link between {} and {}",
                    l.a, l.b
                )));
            }
        }

        let (eff_rate_bps, dist_m) = all_pairs(n, &links)?;
        Ok(Self { servers: ordered, links, eff_rate_bps, dist_m })
    }

    pub fn server_count(&self) -> usize {
        self.servers.len()
    }

    pub fn servers(&self) -> &[MecServer] {
        &self.servers
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn server(&self, id: ServerId) -> Result<&MecServer> {
        self.servers.get(id.0).ok_or(Error::UnknownServer(id.0))
    }

    pub fn server_ids(&self) -> impl Iterator<Item = ServerId> + '_ {
        (0..self.servers.len()).map(ServerId)
    }

    /// Effective inter-server rate R\[a\]\[k\]; +inf when a == k.
    pub fn effective_rate_bps(&self, a: ServerId, k: ServerId) -> Result<f64> {
        self.check(a)?;
        self.check(k)?;
        Ok(self.eff_rate_bps[a.0][k.0])
    }

    /// Path distance D\[a\]\[k\]; 0 when a == k.
    pub fn distance_m(&self, a: ServerId, k: ServerId) -> Result<f64> {
        self.check(a)?;
        self.check(k)?;
        Ok(self.dist_m[a.0][k.0])
    }

    /// Server closest to a point, ties broken by id.
    pub fn nearest_server(&self, point: (f64, f64)) -> ServerId {
        let mut best = self.servers[0].id;
        let mut best_d = self.servers[0].distance_to(point);
        for s in &self.servers[1..] {
            let d = s.distance_to(point);
            if d < best_d {
                best = s.id;
                best_d = d;
            }
        }
        best
    }

    fn check(&self, id: ServerId) -> Result<()> {
        if id.0 >= self.servers.len() {
            return Err(Error::UnknownServer(id.0));
        }
        Ok(())
    }
}

/// All-pairs effective rate and distance over minimum-hop paths.
///
/// Per source, nodes are settled layer by layer; among predecessors in the
/// previous layer the one minimizing (accumulated 1/rate, node-id sequence)
/// wins. Results are mirrored from the smaller-id source so both tables
/// come out exactly symmetric.
pub fn all_pairs(n: usize, links: &[Link]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut adj: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); n];
    for l in links {
        adj[l.a.0].push((l.b.0, l.rate_bps, l.distance_m));
        adj[l.b.0].push((l.a.0, l.rate_bps, l.distance_m));
    }
    for nbrs in &mut adj {
        nbrs.sort_by(|x, y| x.0.cmp(&y.0));
    }

    // Connectivity check up front so per-source runs can't surprise us.
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &(v, _, _) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let unreachable: Vec<usize> = (0..n).filter(|&v| !seen[v]).collect();
    if !unreachable.is_empty() {
        return Err(Error::Disconnected { root: 0, component: unreachable });
    }

    let mut rate = vec![vec![f64::INFINITY; n]; n];
    let mut dist = vec![vec![0.0f64; n]; n];

    for src in 0..n {
        let (sum_inv, d, paths) = single_source(src, n, &adj);
        for dst in 0..n {
            if dst <= src {
                continue; // mirror from the smaller-id source
            }
            // A direct link keeps its exact rate; the harmonic reciprocal
            // would be off by an ulp.
            let r = if paths[dst].len() == 2 {
                adj[src]
                    .iter()
                    .find(|&&(v, _, _)| v == dst)
                    .map(|&(_, r, _)| r)
                    .expect("single-hop path implies a direct link")
            } else if sum_inv[dst] == 0.0 {
                f64::INFINITY
            } else {
                1.0 / sum_inv[dst]
            };
            rate[src][dst] = r;
            rate[dst][src] = r;
            dist[src][dst] = d[dst];
            dist[dst][src] = d[dst];
        }
    }
    Ok((rate, dist))
}

/// Layered single-source pass; returns (sum of 1/rate, distance, path) per node.
fn single_source(
    src: usize,
    n: usize,
    adj: &[Vec<(usize, f64, f64)>],
) -> (Vec<f64>, Vec<f64>, Vec<Vec<usize>>) {
    let mut hops = vec![usize::MAX; n];
    hops[src] = 0;
    let mut order = vec![src];
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &(v, _, _) in &adj[u] {
            if hops[v] == usize::MAX {
                hops[v] = hops[u] + 1;
                order.push(v);
                queue.push_back(v);
            }
        }
    }

    let mut sum_inv = vec![0.0f64; n];
    let mut dist = vec![0.0f64; n];
    let mut path: Vec<Vec<usize>> = vec![Vec::new(); n];
    path[src] = vec![src];

    for &v in order.iter().skip(1) {
        let mut best: Option<(f64, Vec<usize>, f64)> = None;
        for &(u, r, d) in &adj[v] {
            if hops[u] + 1 != hops[v] {
                continue;
            }
            let cand_sum = sum_inv[u] + 1.0 / r;
            let mut cand_path = path[u].clone();
            cand_path.push(v);
            let cand_dist = dist[u] + d;
            let better = match &best {
                None => true,
                Some((s, p, _)) => {
                    cand_sum < *s || (cand_sum == *s && cand_path < *p)
                }
            };
            if better {
                best = Some((cand_sum, cand_path, cand_dist));
            }
        }
        let (s, p, d) = best.expect("layered predecessor must exist");
        sum_inv[v] = s;
        path[v] = p;
        dist[v] = d;
    }
    (sum_inv, dist, path)
}

/// Plain-text topology document: node and edge records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub capacity_mips: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub a: usize,
    pub b: usize,
    pub rate_bps: f64,
    /// None means "use the Euclidean distance between the node positions".
    pub distance_m: Option<f64>,
}

impl TopologyDoc {
    /// Parses the line-oriented format:
    ///
    /// ```text
    /// node <id> <x_m> <y_m> <capacity_mips>
    /// edge <a> <b> <rate_bps> <distance_m | ->
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            match fields[0] {
                "node" => {
                    if fields.len() != 5 {
                        return Err(Error::Parse {
                            line,
                            msg: format!("node record needs 4 fields, got {}", fields.len() - 1),
                        });
                    }
                    nodes.push(NodeSpec {
                        id: parse_field(fields[1], line, "id")?,
                        x_m: parse_field(fields[2], line, "x_m")?,
                        y_m: parse_field(fields[3], line, "y_m")?,
                        capacity_mips: parse_field(fields[4], line, "capacity_mips")?,
                    });
                }
                "edge" => {
                    if fields.len() != 5 {
                        return Err(Error::Parse {
                            line,
                            msg: format!("edge record needs 4 fields, got {}", fields.len() - 1),
                        });
                    }
                    let distance_m = if fields[4] == "-" {
                        None
                    } else {
                        Some(parse_field(fields[4], line, "distance_m")?)
                    };
                    edges.push(EdgeSpec {
                        a: parse_field(fields[1], line, "a")?,
                        b: parse_field(fields[2], line, "b")?,
                        rate_bps: parse_field(fields[3], line, "rate_bps")?,
                        distance_m,
                    });
                }
                other => {
                    return Err(Error::Parse { line, msg: format!("unknown record '{other}'") });
                }
            }
        }
        Ok(Self { nodes, edges })
    }

    pub fn to_doc_string(&self) -> String {
        let mut out = String::from("# mecsim topology document\n");
        for nd in &self.nodes {
            out.push_str(&format!("node {} {} {} {}\n", nd.id, nd.x_m, nd.y_m, nd.capacity_mips));
        }
        for e in &self.edges {
            match e.distance_m {
                Some(d) => out.push_str(&format!("edge {} {} {} {}\n", e.a, e.b, e.rate_bps, d)),
                None => out.push_str(&format!("edge {} {} {} -\n", e.a, e.b, e.rate_bps)),
            }
        }
        out
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, name: &str) -> Result<T> {
    s.parse::<T>().map_err(|_| Error::Parse { line, msg: format!("bad {name} value '{s}'") })
}

impl Topology {
    pub fn from_doc(doc: &TopologyDoc) -> Result<Self> {
        let servers: Vec<MecServer> = doc
            .nodes
            .iter()
            .map(|nd| MecServer::new(nd.id, nd.x_m, nd.y_m, nd.capacity_mips))
            .collect();
        let pos = |id: usize| -> Result<(f64, f64)> {
            doc.nodes
                .iter()
                .find(|nd| nd.id == id)
                .map(|nd| (nd.x_m, nd.y_m))
                .ok_or(Error::UnknownServer(id))
        };
        let mut links = Vec::with_capacity(doc.edges.len());
        for e in &doc.edges {
            let distance_m = match e.distance_m {
                Some(d) => d,
                None => {
                    let (ax, ay) = pos(e.a)?;
                    let (bx, by) = pos(e.b)?;
                    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
                }
            };
            links.push(Link { a: ServerId(e.a), b: ServerId(e.b), rate_bps: e.rate_bps, distance_m });
        }
        Self::new(servers, links)
    }

    pub fn from_doc_str(text: &str) -> Result<Self> {
        Self::from_doc(&TopologyDoc::parse(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_doc_str(&text)
    }
}
