//! Directed road graph: links, intersections, and the street-segment file format.
//!
//! One row of the network file describes a street segment between two
//! intersections:
//!
//! ```text
//! from_node,to_node,length_m,speed_kmh,lanes,direction,section_count,name
//! King&Bay,King&Yonge,180,60,2,twoway,3,King
//! ```
//!
//! `direction` is `oneway` or `twoway`; a two-way row expands into two directed
//! links (forward first). `section_count` and `name` may be left empty.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sections per link when a row leaves `section_count` empty.
pub const DEFAULT_SECTION_COUNT: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: u64, message: String },
    #[error("line {line}: node `{node}` is not declared in the node file")]
    DanglingNode { line: u64, node: String },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown node id {0:?}")]
    UnknownNodeId(NodeId),
    #[error("network is not {0} connected")]
    NotConnected(&'static str),
    #[error("network has no links")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    OneWay,
    TwoWay,
}

impl Direction {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oneway" | "one-way" | "one_way" => Some(Direction::OneWay),
            "twoway" | "two-way" | "two_way" => Some(Direction::TwoWay),
            _ => None,
        }
    }
}

/// How strictly connectivity is checked after load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Weak,
    Strong,
    Unchecked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    pub length_m: f64,
    pub speed_limit_kmh: f64,
    pub lanes: u32,
    pub section_count: u32,
    pub name: Option<String>,
}

impl Link {
    /// Speed limit in m/s.
    pub fn free_flow_speed(&self) -> f64 {
        self.speed_limit_kmh / 3.6
    }

    pub fn free_flow_time(&self) -> f64 {
        self.length_m / self.free_flow_speed()
    }

    /// Section index for a position measured from the link start.
    pub fn section_of(&self, position_m: f64) -> usize {
        let p = self.section_count as usize;
        let sec = (position_m / (self.length_m / p as f64)).floor();
        if sec <= 0.0 {
            0
        } else {
            (sec as usize).min(p - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub id: NodeId,
    pub name: String,
    pub incoming: Vec<LinkId>,
    pub outgoing: Vec<LinkId>,
}

/// One street segment as it appears in the network file.
#[derive(Debug, Clone, PartialEq)]
pub struct StreetRow {
    pub from: String,
    pub to: String,
    pub length_m: f64,
    pub speed_kmh: f64,
    pub lanes: u32,
    pub direction: Direction,
    pub section_count: u32,
    pub name: Option<String>,
}

/// Immutable road graph. Node ids are assigned in lexicographic order of node
/// names, so comparing `NodeId`s compares names.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    intersections: Vec<Intersection>,
    links: Vec<Link>,
    by_name: BTreeMap<String, NodeId>,
    coords: Option<Vec<(f64, f64)>>,
}

impl RoadNetwork {
    /// Builds a network from street rows. Links are numbered in row order,
    /// forward direction first for two-way rows.
    pub fn from_rows(rows: &[StreetRow], connectivity: Connectivity) -> Result<Self, NetworkError> {
        if rows.is_empty() {
            return Err(NetworkError::Empty);
        }
        let names: BTreeSet<&str> = rows
            .iter()
            .flat_map(|r| [r.from.as_str(), r.to.as_str()])
            .collect();
        let by_name: BTreeMap<String, NodeId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.to_string(), NodeId(i as u32)))
            .collect();
        let mut intersections: Vec<Intersection> = by_name
            .iter()
            .map(|(name, &id)| Intersection {
                id,
                name: name.clone(),
                incoming: Vec::new(),
                outgoing: Vec::new(),
            })
            .collect();
        let mut links = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, row) in rows.iter().enumerate() {
            let line = i as u64 + 2;
            validate_row(row, line)?;
            let a = by_name[&row.from];
            let b = by_name[&row.to];
            let mut pairs = vec![(a, b)];
            if row.direction == Direction::TwoWay {
                pairs.push((b, a));
            }
            for (from, to) in pairs {
                if !seen.insert((from, to)) {
                    return Err(NetworkError::Invalid {
                        line,
                        message: format!(
                            "duplicate link `{}` -> `{}`",
                            intersections[from.index()].name,
                            intersections[to.index()].name
                        ),
                    });
                }
            }
            let mut push = |from: NodeId, to: NodeId| {
                let id = LinkId(links.len() as u32);
                links.push(Link {
                    id,
                    from,
                    to,
                    length_m: row.length_m,
                    speed_limit_kmh: row.speed_kmh,
                    lanes: row.lanes,
                    section_count: row.section_count,
                    name: row.name.clone(),
                });
                intersections[from.index()].outgoing.push(id);
                intersections[to.index()].incoming.push(id);
            };
            push(a, b);
            if row.direction == Direction::TwoWay {
                push(b, a);
            }
        }
        let net = RoadNetwork {
            intersections,
            links,
            by_name,
            coords: None,
        };
        net.check_connectivity(connectivity)?;
        Ok(net)
    }

    pub fn load(path: impl AsRef<Path>, connectivity: Connectivity) -> Result<Self, NetworkError> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(file, connectivity)
    }

    pub fn from_reader<R: Read>(
        reader: R,
        connectivity: Connectivity,
    ) -> Result<Self, NetworkError> {
        let rows = parse_rows(reader)?;
        Self::from_rows(&rows, connectivity)
    }

    pub fn from_csv_str(text: &str, connectivity: Connectivity) -> Result<Self, NetworkError> {
        Self::from_reader(text.as_bytes(), connectivity)
    }

    /// Attaches node coordinates read from a `node_id,x_m,y_m` file. Every node
    /// of the graph must be present.
    pub fn with_node_file(mut self, path: impl AsRef<Path>) -> Result<Self, NetworkError> {
        let file = std::fs::File::open(path)?;
        let coords = parse_nodes(file)?;
        self.attach_coords(&coords)?;
        Ok(self)
    }

    pub fn attach_coords(
        &mut self,
        coords: &BTreeMap<String, (f64, f64)>,
    ) -> Result<(), NetworkError> {
        let mut out = Vec::with_capacity(self.intersections.len());
        for ix in &self.intersections {
            match coords.get(&ix.name) {
                Some(&c) => out.push(c),
                None => {
                    return Err(NetworkError::DanglingNode {
                        line: 0,
                        node: ix.name.clone(),
                    })
                }
            }
        }
        self.coords = Some(out);
        Ok(())
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.index()]
    }

    pub fn intersections(&self) -> &[Intersection] {
        &self.intersections
    }

    pub fn intersection(&self, id: NodeId) -> &Intersection {
        &self.intersections[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.intersections.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node(&self, name: &str) -> Result<NodeId, NetworkError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| NetworkError::UnknownNode(name.to_string()))
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.intersections[id.index()].name
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    fn check_node(&self, id: NodeId) -> Result<(), NetworkError> {
        if id.index() < self.intersections.len() {
            Ok(())
        } else {
            Err(NetworkError::UnknownNodeId(id))
        }
    }

    /// True iff a directed path leads from `origin` to `dest`.
    pub fn reachable(&self, origin: NodeId, dest: NodeId) -> Result<bool, NetworkError> {
        self.check_node(origin)?;
        self.check_node(dest)?;
        Ok(self.reachable_set(origin)[dest.index()])
    }

    /// Directed BFS from `origin`.
    pub fn reachable_set(&self, origin: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.intersections.len()];
        let mut queue = VecDeque::from([origin]);
        seen[origin.index()] = true;
        while let Some(u) = queue.pop_front() {
            for &l in &self.intersections[u.index()].outgoing {
                let v = self.links[l.index()].to;
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Neighbours in the undirected sense (either link direction), sorted and deduplicated.
    pub fn undirected_neighbors(&self, node: NodeId) -> Vec<NodeId> {
        let ix = &self.intersections[node.index()];
        let mut out: Vec<NodeId> = ix
            .outgoing
            .iter()
            .map(|&l| self.links[l.index()].to)
            .chain(ix.incoming.iter().map(|&l| self.links[l.index()].from))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Undirected hop distances from `origin`; `None` where unreachable.
    pub fn hop_distances(&self, origin: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.intersections.len()];
        dist[origin.index()] = Some(0);
        let mut queue = VecDeque::from([origin]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()].unwrap();
            for v in self.undirected_neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_strongly_connected(&self) -> bool {
        (0..self.intersections.len())
            .all(|i| self.reachable_set(NodeId(i as u32)).iter().all(|&r| r))
    }

    pub fn is_weakly_connected(&self) -> bool {
        self.hop_distances(NodeId(0)).iter().all(Option::is_some)
    }

    fn check_connectivity(&self, connectivity: Connectivity) -> Result<(), NetworkError> {
        match connectivity {
            Connectivity::Unchecked => Ok(()),
            Connectivity::Weak if !self.is_weakly_connected() => {
                Err(NetworkError::NotConnected("weakly"))
            }
            Connectivity::Strong if !self.is_strongly_connected() => {
                Err(NetworkError::NotConnected("strongly"))
            }
            _ => Ok(()),
        }
    }

    /// The first link from `from` to `to`, if any.
    pub fn link_between(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.intersections[from.index()]
            .outgoing
            .iter()
            .copied()
            .find(|&l| self.links[l.index()].to == to)
    }

    /// Writes every directed link as a one-way row. Loading the output yields
    /// an identical graph with identical link ids.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "from_node,to_node,length_m,speed_kmh,lanes,direction,section_count,name\n",
        );
        for l in &self.links {
            out.push_str(&format!(
                "{},{},{},{},{},oneway,{},{}\n",
                self.node_name(l.from),
                self.node_name(l.to),
                l.length_m,
                l.speed_limit_kmh,
                l.lanes,
                l.section_count,
                l.name.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

fn validate_row(row: &StreetRow, line: u64) -> Result<(), NetworkError> {
    let invalid = |message: String| Err(NetworkError::Invalid { line, message });
    if row.from == row.to {
        return invalid(format!("self-loop at node `{}`", row.from));
    }
    if !(row.length_m.is_finite() && row.length_m > 0.0) {
        return invalid(format!("length must be positive, got {}", row.length_m));
    }
    if !(row.speed_kmh.is_finite() && row.speed_kmh > 0.0) {
        return invalid(format!("speed must be positive, got {}", row.speed_kmh));
    }
    if row.lanes == 0 {
        return invalid("lanes must be at least 1".into());
    }
    if row.section_count == 0 {
        return invalid("section_count must be at least 1".into());
    }
    Ok(())
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_error(e: csv::Error) -> NetworkError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    NetworkError::Parse {
        line,
        message: e.to_string(),
    }
}

fn field<'a>(rec: &'a csv::StringRecord, idx: usize, what: &str) -> Result<&'a str, NetworkError> {
    rec.get(idx).ok_or_else(|| NetworkError::Parse {
        line: record_line(rec),
        message: format!("missing column `{what}`"),
    })
}

fn number<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    what: &str,
) -> Result<T, NetworkError> {
    let raw = field(rec, idx, what)?;
    raw.parse().map_err(|_| NetworkError::Parse {
        line: record_line(rec),
        message: format!("column `{what}`: cannot parse `{raw}`"),
    })
}

/// Parses street rows without building the graph.
pub fn parse_rows<R: Read>(reader: R) -> Result<Vec<StreetRow>, NetworkError> {
    let mut rdr = csv_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(parse_error)?;
        let line = record_line(&rec);
        let direction_raw = field(&rec, 5, "direction")?;
        let direction = Direction::parse(direction_raw).ok_or_else(|| NetworkError::Parse {
            line,
            message: format!("direction must be oneway or twoway, got `{direction_raw}`"),
        })?;
        let section_count = match rec.get(6) {
            None | Some("") => DEFAULT_SECTION_COUNT,
            Some(_) => number(&rec, 6, "section_count")?,
        };
        let name = rec.get(7).filter(|s| !s.is_empty()).map(str::to_string);
        let row = StreetRow {
            from: field(&rec, 0, "from_node")?.to_string(),
            to: field(&rec, 1, "to_node")?.to_string(),
            length_m: number(&rec, 2, "length_m")?,
            speed_kmh: number(&rec, 3, "speed_kmh")?,
            lanes: number(&rec, 4, "lanes")?,
            direction,
            section_count,
            name,
        };
        validate_row(&row, line)?;
        rows.push(row);
    }
    Ok(rows)
}

/// Parses a `node_id,x_m,y_m` file.
pub fn parse_nodes<R: Read>(reader: R) -> Result<BTreeMap<String, (f64, f64)>, NetworkError> {
    let mut rdr = csv_reader(reader);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(parse_error)?;
        let id = field(&rec, 0, "node_id")?.to_string();
        let x: f64 = number(&rec, 1, "x_m")?;
        let y: f64 = number(&rec, 2, "y_m")?;
        out.insert(id, (x, y));
    }
    Ok(out)
}

/// Loads a network whose node references are checked against a node file.
pub fn load_with_nodes(
    network: impl AsRef<Path>,
    nodes: impl AsRef<Path>,
    connectivity: Connectivity,
) -> Result<RoadNetwork, NetworkError> {
    let rows = parse_rows(std::fs::File::open(network)?)?;
    let coords = parse_nodes(std::fs::File::open(nodes)?)?;
    for (i, row) in rows.iter().enumerate() {
        for n in [&row.from, &row.to] {
            if !coords.contains_key(n) {
                return Err(NetworkError::DanglingNode {
                    line: i as u64 + 2,
                    node: n.clone(),
                });
            }
        }
    }
    let mut net = RoadNetwork::from_rows(&rows, connectivity)?;
    net.attach_coords(&coords)?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str =
        "from_node,to_node,length_m,speed_kmh,lanes,direction,section_count,name\n";

    fn net(body: &str) -> Result<RoadNetwork, NetworkError> {
        RoadNetwork::from_csv_str(&format!("{HEADER}{body}"), Connectivity::Unchecked)
    }

    #[test]
    fn two_way_row_expands_to_two_links() {
        let n = net("A,B,500,60,2,twoway,,\n").unwrap();
        assert_eq!(n.link_count(), 2);
        let a = n.node("A").unwrap();
        let b = n.node("B").unwrap();
        assert_eq!((n.links()[0].from, n.links()[0].to), (a, b));
        assert_eq!((n.links()[1].from, n.links()[1].to), (b, a));
        assert!(n
            .links()
            .iter()
            .all(|l| l.length_m == 500.0 && l.section_count == 3));
    }

    #[test]
    fn one_way_row_is_one_link() {
        let n = net("A,B,500,60,2,oneway,4,Wellington\n").unwrap();
        assert_eq!(n.link_count(), 1);
        assert_eq!(n.links()[0].section_count, 4);
        assert_eq!(n.links()[0].name.as_deref(), Some("Wellington"));
    }

    #[test]
    fn victoria_between_king_and_front() {
        let n = net("Victoria&Front,Victoria&King,120,10,1,oneway,,Victoria\n").unwrap();
        let l = &n.links()[0];
        assert_eq!(l.speed_limit_kmh, 10.0);
        assert_eq!(l.lanes, 1);
        assert_eq!(n.node_name(l.to), "Victoria&King");
    }

    #[test]
    fn duplicate_direction_rejected() {
        let err = net("A,B,500,60,1,twoway,,\nB,A,300,60,1,oneway,,\n").unwrap_err();
        assert!(
            matches!(err, NetworkError::Invalid { line: 3, .. }),
            "{err}"
        );
        assert!(net("A,B,500,60,1,oneway,,\nB,A,300,60,1,oneway,,\n").is_ok());
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = net("A,B,500,60,2,twoway,,\nB,C,abc,60,1,oneway,,\n").unwrap_err();
        match err {
            NetworkError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_positive_length_or_speed_rejected() {
        assert!(matches!(
            net("A,B,0,60,1,oneway,,\n"),
            Err(NetworkError::Invalid { .. })
        ));
        assert!(matches!(
            net("A,B,10,-5,1,oneway,,\n"),
            Err(NetworkError::Invalid { .. })
        ));
        assert!(matches!(
            net("A,A,10,5,1,oneway,,\n"),
            Err(NetworkError::Invalid { .. })
        ));
        assert!(matches!(
            net("A,B,10,5,0,oneway,,\n"),
            Err(NetworkError::Invalid { .. })
        ));
        assert!(matches!(
            net("A,B,10,5,1,sideways,,\n"),
            Err(NetworkError::Parse { .. })
        ));
    }

    #[test]
    fn dangling_node_in_node_file() {
        let dir = tempfile::tempdir().unwrap();
        let netp = dir.path().join("n.csv");
        let nodep = dir.path().join("nodes.csv");
        std::fs::write(&netp, format!("{HEADER}A,B,10,50,1,twoway,,\n")).unwrap();
        std::fs::write(&nodep, "node_id,x_m,y_m\nA,0,0\n").unwrap();
        let err = load_with_nodes(&netp, &nodep, Connectivity::Weak).unwrap_err();
        assert!(matches!(err, NetworkError::DanglingNode { ref node, .. } if node == "B"));
        std::fs::write(&nodep, "node_id,x_m,y_m\nA,0,0\nB,10,0\n").unwrap();
        let n = load_with_nodes(&netp, &nodep, Connectivity::Weak).unwrap();
        assert_eq!(n.coords().unwrap()[1], (10.0, 0.0));
    }

    #[test]
    fn reachability_respects_direction() {
        let n = net("A,B,100,50,1,oneway,,\n").unwrap();
        let a = n.node("A").unwrap();
        let b = n.node("B").unwrap();
        assert!(n.reachable(a, b).unwrap());
        assert!(!n.reachable(b, a).unwrap());
        assert!(n.reachable(a, NodeId(9)).is_err());
        assert!(matches!(n.node("Z"), Err(NetworkError::UnknownNode(_))));
    }

    #[test]
    fn connectivity_modes() {
        let body = format!("{HEADER}A,B,100,50,1,oneway,,\nC,D,100,50,1,twoway,,\n");
        assert!(RoadNetwork::from_csv_str(&body, Connectivity::Weak).is_err());
        let body = format!("{HEADER}A,B,100,50,1,oneway,,\nB,C,100,50,1,twoway,,\n");
        assert!(RoadNetwork::from_csv_str(&body, Connectivity::Weak).is_ok());
        assert!(RoadNetwork::from_csv_str(&body, Connectivity::Strong).is_err());
    }

    #[test]
    fn section_index() {
        let n = net("A,B,300,50,1,oneway,3,\n").unwrap();
        let l = &n.links()[0];
        assert_eq!(l.section_of(0.0), 0);
        assert_eq!(l.section_of(99.9), 0);
        assert_eq!(l.section_of(100.0), 1);
        assert_eq!(l.section_of(300.0), 2);
    }

    fn arb_rows() -> impl Strategy<Value = Vec<(u8, u8, u16, u8, u8, bool, u8)>> {
        prop::collection::vec(
            (
                0u8..8,
                0u8..8,
                1u16..2000,
                5u8..100,
                1u8..5,
                any::<bool>(),
                1u8..6,
            ),
            1..25,
        )
    }

    proptest! {
        #[test]
        fn round_trip_and_link_count(raw in arb_rows()) {
            let line = |r: &(u8, u8, u16, u8, u8, bool, u8)| format!(
                "n{},n{},{},{},{},{},{},\n", r.0, r.1, r.2, r.3, r.4,
                if r.5 { "oneway" } else { "twoway" }, r.6);
            let mut seen = BTreeSet::new();
            let mut dup = false;
            let mut rows = Vec::new();
            for r in raw.iter().filter(|r| r.0 != r.1) {
                let mut pairs = vec![(r.0, r.1)];
                if !r.5 {
                    pairs.push((r.1, r.0));
                }
                if pairs.iter().any(|p| seen.contains(p)) {
                    dup = true;
                } else {
                    seen.extend(pairs);
                    rows.push(r);
                }
            }
            prop_assume!(!rows.is_empty());
            if dup {
                let all: String = raw.iter().filter(|r| r.0 != r.1).map(line).collect();
                prop_assert!(net(&all).is_err());
            }
            let body: String = rows.iter().map(|r| line(r)).collect();
            let n = net(&body).unwrap();
            let expected: usize = rows.iter().map(|r| if r.5 { 1 } else { 2 }).sum();
            prop_assert_eq!(n.link_count(), expected);
            let again = RoadNetwork::from_csv_str(&n.to_csv(), Connectivity::Unchecked).unwrap();
            prop_assert_eq!(again, n);
        }
    }
}
