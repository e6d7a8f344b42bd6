//! Radial feeder graph: validation, rooted tree structure and path queries.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub struct Bus {
    pub id: String,
    /// Easting in meters, used only for reporting and missing-length fallback.
    pub x: Option<f64>,
    pub y: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub from: String,
    pub to: String,
    pub length_m: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadPoint {
    pub bus: String,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("topology has no buses")]
    Empty,
    #[error("duplicate bus id `{0}`")]
    DuplicateBus(String),
    #[error("line {line} references unknown bus `{bus}`")]
    DanglingLine { line: usize, bus: String },
    #[error("line {line} (`{from}` - `{to}`) is a self loop")]
    SelfLoop { line: usize, from: String, to: String },
    #[error("line {line} (`{from}` - `{to}`) has invalid length {length}")]
    InvalidLength { line: usize, from: String, to: String, length: f64 },
    #[error("cycle detected: line {line} (`{from}` - `{to}`) closes a loop")]
    Cycle { line: usize, from: String, to: String },
    #[error("network is disconnected: bus `{0}` is unreachable from the feeder source")]
    Disconnected(String),
    #[error("feeder source bus `{0}` does not exist")]
    UnknownSource(String),
    #[error("base voltage must be positive, got {0} kV")]
    InvalidBaseVoltage(f64),
    #[error("load {index} references unknown bus `{bus}`")]
    DanglingLoad { index: usize, bus: String },
    #[error("unknown bus id `{0}`")]
    UnknownBus(String),
    #[error("degenerate feeder: every path from the source has zero length")]
    DegenerateFeeder,
}

/// A validated radial network rooted at its feeder source.
///
/// Buses keep their input order; all derived iteration (children, leaves)
/// follows lexicographic bus id order so seeded runs are reproducible.
#[derive(Clone, Debug)]
pub struct NetworkTopology {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    source: usize,
    base_kv: f64,
    loads: Vec<LoadPoint>,
    index: BTreeMap<String, usize>,
    load_bus: Vec<usize>,
    parent: Vec<Option<usize>>,
    parent_line: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    /// Buses in breadth-first order from the source.
    order: Vec<usize>,
    hops: Vec<usize>,
    distance_m: Vec<f64>,
    feeder_length_m: f64,
}

impl PartialEq for NetworkTopology {
    fn eq(&self, other: &Self) -> bool {
        self.buses == other.buses
            && self.lines == other.lines
            && self.source == other.source
            && self.base_kv == other.base_kv
            && self.loads == other.loads
    }
}

impl NetworkTopology {
    pub fn new(
        buses: Vec<Bus>,
        lines: Vec<Line>,
        source_bus: &str,
        base_kv: f64,
        loads: Vec<LoadPoint>,
    ) -> Result<Self, TopologyError> {
        if buses.is_empty() {
            return Err(TopologyError::Empty);
        }
        let mut index = BTreeMap::new();
        for (i, b) in buses.iter().enumerate() {
            if index.insert(b.id.clone(), i).is_some() {
                return Err(TopologyError::DuplicateBus(b.id.clone()));
            }
        }
        let source = *index
            .get(source_bus)
            .ok_or_else(|| TopologyError::UnknownSource(source_bus.into()))?;
        if !(base_kv.is_finite() && base_kv > 0.0) {
            return Err(TopologyError::InvalidBaseVoltage(base_kv));
        }

        let n = buses.len();
        let mut uf = DisjointSet::new(n);
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (li, line) in lines.iter().enumerate() {
            let lookup = |id: &String| {
                index.get(id).copied().ok_or_else(|| TopologyError::DanglingLine {
                    line: li,
                    bus: id.clone(),
                })
            };
            let a = lookup(&line.from)?;
            let b = lookup(&line.to)?;
            if a == b {
                return Err(TopologyError::SelfLoop {
                    line: li,
                    from: line.from.clone(),
                    to: line.to.clone(),
                });
            }
            if !(line.length_m.is_finite() && line.length_m >= 0.0) {
                return Err(TopologyError::InvalidLength {
                    line: li,
                    from: line.from.clone(),
                    to: line.to.clone(),
                    length: line.length_m,
                });
            }
            if !uf.union(a, b) {
                return Err(TopologyError::Cycle {
                    line: li,
                    from: line.from.clone(),
                    to: line.to.clone(),
                });
            }
            adjacency[a].push((b, li));
            adjacency[b].push((a, li));
        }
        for adj in &mut adjacency {
            adj.sort_by(|x, y| buses[x.0].id.cmp(&buses[y.0].id));
        }

        let mut load_bus = Vec::with_capacity(loads.len());
        for (i, l) in loads.iter().enumerate() {
            let b = index.get(&l.bus).copied().ok_or_else(|| TopologyError::DanglingLoad {
                index: i,
                bus: l.bus.clone(),
            })?;
            load_bus.push(b);
        }

        // Root the tree at the source.
        let mut parent = vec![None; n];
        let mut parent_line = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut hops = vec![0usize; n];
        let mut distance_m = vec![0.0f64; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        seen[source] = true;
        order.push(source);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &(v, li) in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    parent_line[v] = Some(li);
                    children[u].push(v);
                    hops[v] = hops[u] + 1;
                    distance_m[v] = distance_m[u] + lines[li].length_m;
                    order.push(v);
                }
            }
        }
        if order.len() != n {
            // Report the lexicographically first unreachable bus.
            let missing = index
                .iter()
                .find(|(_, &i)| !seen[i])
                .map(|(id, _)| id.clone())
                .unwrap_or_default();
            return Err(TopologyError::Disconnected(missing));
        }
        let feeder_length_m = distance_m.iter().copied().fold(0.0, f64::max);

        Ok(NetworkTopology {
            buses,
            lines,
            source,
            base_kv,
            loads,
            index,
            load_bus,
            parent,
            parent_line,
            children,
            order,
            hops,
            distance_m,
            feeder_length_m,
        })
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn loads(&self) -> &[LoadPoint] {
        &self.loads
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn base_kv(&self) -> f64 {
        self.base_kv
    }

    pub fn source_bus(&self) -> &str {
        &self.buses[self.source].id
    }

    pub fn source_index(&self) -> usize {
        self.source
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, idx: usize) -> &str {
        &self.buses[idx].id
    }

    /// Bus index of every load, in load order.
    pub fn load_bus_indices(&self) -> &[usize] {
        &self.load_bus
    }

    pub fn parent(&self, idx: usize) -> Option<usize> {
        self.parent[idx]
    }

    /// Line connecting `idx` to its parent.
    pub fn parent_line(&self, idx: usize) -> Option<&Line> {
        self.parent_line[idx].map(|li| &self.lines[li])
    }

    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    /// Bus indices in breadth-first order starting at the source. Reversing it
    /// visits every child before its parent.
    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    /// Indices in lexicographic bus id order.
    pub fn sorted_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.index.values().copied()
    }

    fn degree(&self, idx: usize) -> usize {
        self.children[idx].len() + usize::from(self.parent[idx].is_some())
    }

    /// Degree-1 buses other than the source, as indices in id order.
    pub fn leaf_indices(&self) -> Vec<usize> {
        self.sorted_indices()
            .filter(|&i| i != self.source && self.degree(i) == 1)
            .collect()
    }

    pub fn leaf_nodes(&self) -> Vec<&str> {
        self.leaf_indices().into_iter().map(|i| self.id(i)).collect()
    }

    /// Edges of the unique tree path between two bus indices, ordered from
    /// `a` toward `b`, each as `(nearer to a, nearer to b)`.
    pub fn path_indices(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        let mut up_a = Vec::new();
        let mut up_b = Vec::new();
        let (mut x, mut y) = (a, b);
        while self.hops[x] > self.hops[y] {
            let p = self.parent[x].expect("non-root has parent");
            up_a.push((x, p));
            x = p;
        }
        while self.hops[y] > self.hops[x] {
            let p = self.parent[y].expect("non-root has parent");
            up_b.push((p, y));
            y = p;
        }
        while x != y {
            let px = self.parent[x].expect("non-root has parent");
            let py = self.parent[y].expect("non-root has parent");
            up_a.push((x, px));
            up_b.push((py, y));
            x = px;
            y = py;
        }
        up_a.extend(up_b.into_iter().rev());
        up_a
    }

    pub fn shortest_path(&self, a: &str, b: &str) -> Result<Vec<(&str, &str)>, TopologyError> {
        let ia = self.index_of(a).ok_or_else(|| TopologyError::UnknownBus(a.into()))?;
        let ib = self.index_of(b).ok_or_else(|| TopologyError::UnknownBus(b.into()))?;
        Ok(self
            .path_indices(ia, ib)
            .into_iter()
            .map(|(u, v)| (self.id(u), self.id(v)))
            .collect())
    }

    /// Sum of line lengths from the source to `idx`.
    pub fn distance_from_source(&self, idx: usize) -> f64 {
        self.distance_m[idx]
    }

    /// Feeder depth: the longest source-to-bus path length in meters.
    pub fn feeder_length(&self) -> f64 {
        self.feeder_length_m
    }

    pub fn normalized_distance_index(&self, idx: usize) -> Result<f64, TopologyError> {
        if self.feeder_length_m <= 0.0 {
            return Err(TopologyError::DegenerateFeeder);
        }
        Ok((self.distance_m[idx] / self.feeder_length_m).clamp(0.0, 1.0))
    }

    pub fn normalized_distance(&self, load_bus: &str) -> Result<f64, TopologyError> {
        let idx = self
            .index_of(load_bus)
            .ok_or_else(|| TopologyError::UnknownBus(load_bus.into()))?;
        self.normalized_distance_index(idx)
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn bus(id: &str) -> Bus {
        Bus { id: id.into(), x: Some(0.0), y: Some(0.0) }
    }

    fn line(a: &str, b: &str, len: f64) -> Line {
        Line { from: a.into(), to: b.into(), length_m: len }
    }

    fn chain(l1: f64, l2: f64) -> NetworkTopology {
        NetworkTopology::new(
            vec![bus("f"), bus("n1"), bus("n2")],
            vec![line("f", "n1", l1), line("n1", "n2", l2)],
            "f",
            0.4,
            vec![LoadPoint { bus: "n2".into() }],
        )
        .unwrap()
    }

    #[test]
    fn chain_queries() {
        let t = chain(100.0, 100.0);
        assert_eq!(t.bus_count(), 3);
        assert_eq!(t.lines().len(), 2);
        assert_eq!(t.leaf_nodes(), vec!["n2"]);
        assert_eq!(t.shortest_path("f", "n2").unwrap(), vec![("f", "n1"), ("n1", "n2")]);
        assert_eq!(t.shortest_path("n2", "f").unwrap(), vec![("n2", "n1"), ("n1", "f")]);
        assert!(t.shortest_path("n1", "n1").unwrap().is_empty());
        assert!(matches!(t.shortest_path("f", "zz"), Err(TopologyError::UnknownBus(_))));
    }

    #[test]
    fn normalized_distance_examples() {
        let t = chain(100.0, 200.0);
        assert_eq!(t.normalized_distance("f").unwrap(), 0.0);
        assert_eq!(t.normalized_distance("n2").unwrap(), 1.0);
        assert!((t.normalized_distance("n1").unwrap() - 100.0 / 300.0).abs() < 1e-15);
        let flat = chain(0.0, 0.0);
        assert_eq!(flat.normalized_distance("n1"), Err(TopologyError::DegenerateFeeder));
    }

    #[test]
    fn star_leaves() {
        let spokes = ["n1", "n2", "n3", "n4"];
        let mut buses = vec![bus("f")];
        buses.extend(spokes.iter().map(|s| bus(s)));
        let lines = spokes.iter().map(|s| line("f", s, 10.0)).collect();
        let t = NetworkTopology::new(buses, lines, "f", 0.4, vec![]).unwrap();
        assert_eq!(t.leaf_nodes(), spokes.to_vec());
        assert_eq!(t.shortest_path("n1", "n3").unwrap(), vec![("n1", "f"), ("f", "n3")]);
    }

    #[test]
    fn rejects_cycle() {
        let err = NetworkTopology::new(
            vec![bus("a"), bus("b"), bus("c")],
            vec![line("a", "b", 1.0), line("b", "c", 1.0), line("c", "a", 1.0)],
            "a",
            0.4,
            vec![],
        )
        .unwrap_err();
        assert!(err.to_string().contains("cycle detected"), "{err}");
        assert!(err.to_string().contains("`c` - `a`"), "{err}");
    }

    #[test]
    fn rejects_bad_references() {
        let disc = NetworkTopology::new(
            vec![bus("a"), bus("b"), bus("c")],
            vec![line("a", "b", 1.0)],
            "a",
            0.4,
            vec![],
        );
        assert_eq!(disc.unwrap_err(), TopologyError::Disconnected("c".into()));

        let dangling = NetworkTopology::new(
            vec![bus("a"), bus("b")],
            vec![line("a", "x", 1.0)],
            "a",
            0.4,
            vec![],
        );
        assert!(matches!(dangling, Err(TopologyError::DanglingLine { bus, .. }) if bus == "x"));

        let load = NetworkTopology::new(
            vec![bus("a"), bus("b")],
            vec![line("a", "b", 1.0)],
            "a",
            0.4,
            vec![LoadPoint { bus: "q".into() }],
        );
        assert!(matches!(load, Err(TopologyError::DanglingLoad { index: 0, .. })));

        let src = NetworkTopology::new(vec![bus("a")], vec![], "s", 0.4, vec![]);
        assert_eq!(src.unwrap_err(), TopologyError::UnknownSource("s".into()));

        let kv = NetworkTopology::new(vec![bus("a")], vec![], "a", 0.0, vec![]);
        assert_eq!(kv.unwrap_err(), TopologyError::InvalidBaseVoltage(0.0));

        let dup = NetworkTopology::new(vec![bus("a"), bus("a")], vec![], "a", 0.4, vec![]);
        assert_eq!(dup.unwrap_err(), TopologyError::DuplicateBus("a".into()));
    }
}
