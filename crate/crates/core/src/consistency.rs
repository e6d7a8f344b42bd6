//! Upstream phase containment: every phase present at a bus must also be
//! present at every bus between it and the feeder source.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::phase::{Phase, PhaseSet};
use crate::topology::NetworkTopology;

/// Phase set per bus id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseAssignment(BTreeMap<String, PhaseSet>);

impl PhaseAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, bus: &str) -> Option<PhaseSet> {
        self.0.get(bus).copied()
    }

    pub fn set(&mut self, bus: impl Into<String>, phases: PhaseSet) {
        self.0.insert(bus.into(), phases);
    }

    /// Adds `phases` to the set stored for `bus`.
    pub fn widen(&mut self, bus: &str, phases: PhaseSet) {
        match self.0.get_mut(bus) {
            Some(s) => *s = s.union(phases),
            None => {
                self.0.insert(bus.into(), phases);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries in lexicographic bus id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, PhaseSet)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn to_indexed(&self, t: &NetworkTopology) -> Vec<Option<PhaseSet>> {
        let mut out = vec![None; t.bus_count()];
        for (id, s) in &self.0 {
            if let Some(i) = t.index_of(id) {
                out[i] = Some(*s);
            }
        }
        out
    }
}

impl FromIterator<(String, PhaseSet)> for PhaseAssignment {
    fn from_iter<I: IntoIterator<Item = (String, PhaseSet)>>(iter: I) -> Self {
        PhaseAssignment(iter.into_iter().collect())
    }
}

/// `downstream` carries a phase that `upstream`, a bus on its path to the
/// feeder, does not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub downstream: String,
    pub upstream: String,
}

/// All (bus, ancestor) pairs violating containment. Buses missing from the
/// assignment are skipped.
pub fn check_consistency(t: &NetworkTopology, a: &PhaseAssignment) -> Vec<Violation> {
    let sets = a.to_indexed(t);
    let mut out = Vec::new();
    for n in t.sorted_indices() {
        let Some(down) = sets[n] else { continue };
        let mut m = t.parent(n);
        while let Some(up_idx) = m {
            if let Some(up) = sets[up_idx] {
                if !down.is_subset(up) {
                    out.push(Violation {
                        downstream: t.id(n).into(),
                        upstream: t.id(up_idx).into(),
                    });
                }
            }
            m = t.parent(up_idx);
        }
    }
    out
}

fn edges_consistent(t: &NetworkTopology, sets: &[PhaseSet]) -> bool {
    t.bfs_order()
        .iter()
        .all(|&n| t.parent(n).is_none_or(|p| sets[n].is_subset(sets[p])))
}

/// Repairs an assignment so that it has no violations.
///
/// Buses absent from `a` first receive the union of their children's sets
/// (`{A}` when childless) and the source is widened to `{A, B, C}`. Then each
/// leaf path is walked from the leaf toward the feeder; when a child's set is
/// not contained in its parent's, the parent absorbs it if it already has at
/// least as many phases, otherwise every bus from the feeder down to the
/// parent is widened by both sets. Sweeps repeat until no edge violates
/// containment. Phases are only ever added.
pub fn enforce_consistency(t: &NetworkTopology, a: &PhaseAssignment) -> PhaseAssignment {
    let given = a.to_indexed(t);
    let mut sets = vec![PhaseSet::EMPTY; t.bus_count()];
    for &n in t.bfs_order().iter().rev() {
        sets[n] = match given[n] {
            Some(s) if !s.is_empty() => s,
            _ => {
                let u = t.children(n).iter().fold(PhaseSet::EMPTY, |acc, &c| acc.union(sets[c]));
                if u.is_empty() {
                    PhaseSet::single(Phase::A)
                } else {
                    u
                }
            }
        };
    }
    let source = t.source_index();
    sets[source] = PhaseSet::ABC;

    let leaves = t.leaf_indices();
    // Sets only grow and each holds at most three phases.
    let max_sweeps = 3 * t.bus_count() + 1;
    for _ in 0..max_sweeps {
        if edges_consistent(t, &sets) {
            break;
        }
        for &leaf in &leaves {
            let path = t.path_indices(source, leaf);
            for &(up, down) in path.iter().rev() {
                if sets[down].is_subset(sets[up]) {
                    continue;
                }
                if sets[up].len() >= sets[down].len() {
                    sets[up] = sets[up].union(sets[down]);
                } else {
                    let widened = sets[up].union(sets[down]);
                    let mut n = Some(up);
                    while let Some(i) = n {
                        sets[i] = sets[i].union(widened);
                        n = t.parent(i);
                    }
                }
            }
        }
    }
    debug_assert!(edges_consistent(t, &sets));

    t.sorted_indices().map(|i| (String::from(t.id(i)), sets[i])).collect()
}
