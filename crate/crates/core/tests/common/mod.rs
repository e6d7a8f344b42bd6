#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use gridsynth_core::{
    Bus, Line, LoadPoint, NetworkTopology, Phase, PhaseAssignment, PhaseSet, RngStream,
};

/// Random radial tree: bus `i` hangs off a uniformly chosen earlier bus.
/// Ids are `b0..b{n-1}` so lexicographic order differs from creation order.
pub fn random_tree(n: usize, rng: &mut RngStream, load_every: usize) -> NetworkTopology {
    let id = |i: usize| format!("b{i}");
    let buses = (0..n)
        .map(|i| Bus { id: id(i), x: Some(i as f64), y: Some(0.0) })
        .collect();
    let mut lines = Vec::new();
    for i in 1..n {
        let parent = (rng.next_u64() % i as u64) as usize;
        let length_m = 1.0 + 49.0 * rng.uniform();
        lines.push(Line { from: id(parent), to: id(i), length_m });
    }
    let loads = (1..n)
        .filter(|i| load_every > 0 && i % load_every == 0)
        .map(|i| LoadPoint { bus: id(i) })
        .collect();
    NetworkTopology::new(buses, lines, &id(0), 0.4, loads).unwrap()
}

/// Adjacency lists keyed by id, built straight from the line list.
pub fn adjacency(t: &NetworkTopology) -> BTreeMap<String, Vec<String>> {
    let mut adj: BTreeMap<String, Vec<String>> =
        t.buses().iter().map(|b| (b.id.clone(), Vec::new())).collect();
    for l in t.lines() {
        adj.get_mut(&l.from).unwrap().push(l.to.clone());
        adj.get_mut(&l.to).unwrap().push(l.from.clone());
    }
    adj
}

/// Breadth-first search path oracle, returned as directed edges a -> b.
pub fn bfs_path(t: &NetworkTopology, a: &str, b: &str) -> Vec<(String, String)> {
    let adj = adjacency(t);
    let mut prev: BTreeMap<String, String> = BTreeMap::new();
    let mut queue = VecDeque::from([a.to_string()]);
    let mut seen = std::collections::BTreeSet::from([a.to_string()]);
    while let Some(u) = queue.pop_front() {
        if u == b {
            break;
        }
        for v in &adj[&u] {
            if seen.insert(v.clone()) {
                prev.insert(v.clone(), u.clone());
                queue.push_back(v.clone());
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = b.to_string();
    while cur != a {
        let p = prev[&cur].clone();
        path.push((p.clone(), cur));
        cur = p;
    }
    path.reverse();
    path
}

pub fn random_phase_set(rng: &mut RngStream) -> PhaseSet {
    PhaseSet::from_bits(1 + (rng.next_u64() % 7) as u8)
}

/// Random assignment covering every bus, source forced to ABC.
pub fn random_assignment(t: &NetworkTopology, rng: &mut RngStream) -> PhaseAssignment {
    t.buses()
        .iter()
        .map(|b| {
            let s = if b.id == t.source_bus() { PhaseSet::ABC } else { random_phase_set(rng) };
            (b.id.clone(), s)
        })
        .collect()
}

/// All-pairs oracle: (n, m) for every bus n and every m on the BFS path
/// from the source to n, with Phases(n) not a subset of Phases(m).
pub fn brute_force_violations(t: &NetworkTopology, a: &PhaseAssignment) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for b in t.buses() {
        let Some(down) = a.get(&b.id) else { continue };
        for (u, _) in bfs_path(t, t.source_bus(), &b.id) {
            if let Some(up) = a.get(&u) {
                if !down.is_subset(up) {
                    out.push((b.id.clone(), u));
                }
            }
        }
    }
    out.sort();
    out
}

/// Every bus receives the union of its own set and all its descendants'.
pub fn descendant_union(t: &NetworkTopology, a: &PhaseAssignment) -> BTreeMap<String, PhaseSet> {
    let mut out: BTreeMap<String, PhaseSet> =
        t.buses().iter().map(|b| (b.id.clone(), a.get(&b.id).unwrap_or_default())).collect();
    for b in t.buses() {
        let own = a.get(&b.id).unwrap_or_default();
        for (u, _) in bfs_path(t, t.source_bus(), &b.id) {
            let e = out.get_mut(&u).unwrap();
            *e = e.union(own);
        }
    }
    out
}

pub fn phases() -> [Phase; 3] {
    Phase::ALL
}
