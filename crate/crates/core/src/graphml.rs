//! Importer for Internet Topology Zoo GraphML files.
//!
//! Zoo graphs carry node coordinates (Latitude/Longitude) and sometimes a
//! LinkSpeedRaw attribute, but never server capacities, so conversion
//! needs a sidecar config supplying capacities and fallback link rates.
//! Node ids are remapped to contiguous indices in document order; parallel
//! edges collapse to the fastest one.

use std::collections::HashMap;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{EdgeSpec, NodeSpec, TopologyDoc};

const EARTH_RADIUS_M: f64 = 6.371e6;

/// Sidecar config for GraphML conversion (TOML).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    /// Capacities assigned round-robin to nodes in document order, MIPS.
    pub capacity_mips: Vec<f64>,
    /// Link rate when the graph has no LinkSpeedRaw attribute, bits/s.
    #[serde(default = "default_rate")]
    pub default_rate_bps: f64,
    /// Coordinate interpretation: "latlon" (Zoo graphs) or "xy_m".
    #[serde(default = "default_coords")]
    pub coords: String,
}

fn default_rate() -> f64 {
    1.0e9
}

fn default_coords() -> String {
    "latlon".into()
}

impl Sidecar {
    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Sidecar =
            toml::from_str(text).map_err(|e| Error::Config(format!("sidecar: {e}")))?;
        if sc.capacity_mips.is_empty() || sc.capacity_mips.iter().any(|&c| c <= 0.0) {
            return Err(Error::Config("sidecar: capacity_mips must be non-empty and > 0".into()));
        }
        if sc.default_rate_bps <= 0.0 {
            return Err(Error::Config("sidecar: default_rate_bps must be > 0".into()));
        }
        if sc.coords != "latlon" && sc.coords != "xy_m" {
            return Err(Error::Config(format!("sidecar: unknown coords '{}'", sc.coords)));
        }
        Ok(sc)
    }
}

#[derive(Default)]
struct RawNode {
    id: String,
    lat: Option<f64>,
    lon: Option<f64>,
}

#[derive(Default)]
struct RawEdge {
    source: String,
    target: String,
    speed_bps: Option<f64>,
}

/// Converts a GraphML document plus sidecar into a topology document.
pub fn graphml_to_doc(xml: &str, sidecar: &Sidecar) -> Result<TopologyDoc> {
    let (nodes, edges) = parse_graphml(xml)?;
    if nodes.is_empty() {
        return Err(Error::InvalidInput("graphml has no nodes".into()));
    }

    let latlon = sidecar.coords == "latlon";
    if latlon {
        let missing: Vec<&str> = nodes
            .iter()
            .filter(|n| n.lat.is_none() || n.lon.is_none())
            .map(|n| n.id.as_str())
            .take(8)
            .collect();
        if !missing.is_empty() {
            return Err(Error::InvalidInput(format!(
                "nodes without coordinates: {missing:?}; supply coords = \"xy_m\" or fix the graph"
            )));
        }
    }

    // Project around the centroid so coordinates come out as local meters.
    let (positions, _) = if latlon {
        let lat0 = nodes.iter().map(|n| n.lat.unwrap()).sum::<f64>() / nodes.len() as f64;
        let lon0 = nodes.iter().map(|n| n.lon.unwrap()).sum::<f64>() / nodes.len() as f64;
        let pos: Vec<(f64, f64)> = nodes
            .iter()
            .map(|n| {
                let x = EARTH_RADIUS_M
                    * lat0.to_radians().cos()
                    * (n.lon.unwrap() - lon0).to_radians();
                let y = EARTH_RADIUS_M * (n.lat.unwrap() - lat0).to_radians();
                (x, y)
            })
            .collect();
        (pos, (lat0, lon0))
    } else {
        let pos: Vec<(f64, f64)> =
            nodes.iter().map(|n| (n.lon.unwrap_or(0.0), n.lat.unwrap_or(0.0))).collect();
        (pos, (0.0, 0.0))
    };

    // Shift into the positive quadrant.
    let min_x = positions.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let min_y = positions.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);

    let index: HashMap<&str, usize> =
        nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    if index.len() != nodes.len() {
        return Err(Error::InvalidInput("graphml has duplicate node ids".into()));
    }

    let doc_nodes: Vec<NodeSpec> = nodes
        .iter()
        .enumerate()
        .map(|(i, _)| NodeSpec {
            id: i,
            x_m: positions[i].0 - min_x,
            y_m: positions[i].1 - min_y,
            capacity_mips: sidecar.capacity_mips[i % sidecar.capacity_mips.len()],
        })
        .collect();

    // Collapse parallel edges, keeping the fastest.
    let mut best: HashMap<(usize, usize), f64> = HashMap::new();
    for e in &edges {
        let a = *index
            .get(e.source.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("edge references unknown node '{}'", e.source)))?;
        let b = *index
            .get(e.target.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("edge references unknown node '{}'", e.target)))?;
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        let rate = e.speed_bps.unwrap_or(sidecar.default_rate_bps);
        let entry = best.entry(key).or_insert(rate);
        if rate > *entry {
            *entry = rate;
        }
    }
    let mut doc_edges: Vec<EdgeSpec> = best
        .into_iter()
        .map(|((a, b), rate_bps)| EdgeSpec { a, b, rate_bps, distance_m: None })
        .collect();
    doc_edges.sort_by_key(|e| (e.a, e.b));

    Ok(TopologyDoc { nodes: doc_nodes, edges: doc_edges })
}

fn parse_graphml(xml: &str) -> Result<(Vec<RawNode>, Vec<RawEdge>)> {
    let mut reader = Reader::from_str(xml);
    reader.trim_text(true);

    // key id -> attr.name, from the <key> declarations.
    let mut key_names: HashMap<String, String> = HashMap::new();
    let mut nodes: Vec<RawNode> = Vec::new();
    let mut edges: Vec<RawEdge> = Vec::new();

    enum Ctx {
        None,
        Node,
        Edge,
    }
    let mut ctx = Ctx::None;
    let mut data_key: Option<String> = None;
    let mut data_text = String::new();

    let bad = |e: quick_xml::Error| Error::InvalidInput(format!("graphml: {e}"));

    loop {
        match reader.read_event().map_err(bad)? {
            Event::Start(el) | Event::Empty(el) => {
                let name = el.name();
                let attrs: HashMap<String, String> = el
                    .attributes()
                    .filter_map(|a| a.ok())
                    .map(|a| {
                        (
                            String::from_utf8_lossy(a.key.as_ref()).into_owned(),
                            String::from_utf8_lossy(&a.value).into_owned(),
                        )
                    })
                    .collect();
                match name.as_ref() {
                    b"key" => {
                        if let (Some(id), Some(attr)) = (attrs.get("id"), attrs.get("attr.name")) {
                            key_names.insert(id.clone(), attr.clone());
                        }
                    }
                    b"node" => {
                        let id = attrs
                            .get("id")
                            .cloned()
                            .ok_or_else(|| Error::InvalidInput("graphml node without id".into()))?;
                        nodes.push(RawNode { id, ..RawNode::default() });
                        ctx = Ctx::Node;
                    }
                    b"edge" => {
                        let source = attrs.get("source").cloned().ok_or_else(|| {
                            Error::InvalidInput("graphml edge without source".into())
                        })?;
                        let target = attrs.get("target").cloned().ok_or_else(|| {
                            Error::InvalidInput("graphml edge without target".into())
                        })?;
                        edges.push(RawEdge { source, target, speed_bps: None });
                        ctx = Ctx::Edge;
                    }
                    b"data" => {
                        data_key = attrs.get("key").cloned();
                        data_text.clear();
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                if data_key.is_some() {
                    data_text.push_str(&String::from_utf8_lossy(&t.into_inner()));
                }
            }
            Event::End(el) => match el.name().as_ref() {
                b"data" => {
                    if let Some(key) = data_key.take() {
                        let attr = key_names.get(&key).map(String::as_str).unwrap_or("");
                        let value = data_text.trim();
                        match (attr, &ctx) {
                            ("Latitude", Ctx::Node) => {
                                if let (Some(n), Ok(v)) = (nodes.last_mut(), value.parse()) {
                                    n.lat = Some(v);
                                }
                            }
                            ("Longitude", Ctx::Node) => {
                                if let (Some(n), Ok(v)) = (nodes.last_mut(), value.parse()) {
                                    n.lon = Some(v);
                                }
                            }
                            ("LinkSpeedRaw", Ctx::Edge) => {
                                if let (Some(e), Ok(v)) = (edges.last_mut(), value.parse::<f64>()) {
                                    if v > 0.0 {
                                        e.speed_bps = Some(v);
                                    }
                                }
                            }
                            _ => {}
                        }
                    }
                }
                b"node" | b"edge" => ctx = Ctx::None,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok((nodes, edges))
}
