//! Phase labels, phase sets and per-phase triples.

use core::fmt;
use core::ops::{Index, IndexMut};
use core::str::FromStr;

/// One of the three conductors of a three-phase feeder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    #[inline]
    pub const fn index(self) -> usize {
        match self {
            Phase::A => 0,
            Phase::B => 1,
            Phase::C => 2,
        }
    }

    pub const fn from_index(i: usize) -> Option<Phase> {
        match i {
            0 => Some(Phase::A),
            1 => Some(Phase::B),
            2 => Some(Phase::C),
            _ => None,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Phase::A => "A",
            Phase::B => "B",
            Phase::C => "C",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown phase label `{0}` (expected A, B or C)")]
pub struct ParsePhaseError(pub alloc::string::String);

impl FromStr for Phase {
    type Err = ParsePhaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(Phase::A),
            "B" => Ok(Phase::B),
            "C" => Ok(Phase::C),
            other => Err(ParsePhaseError(other.into())),
        }
    }
}

/// A subset of `{A, B, C}` stored as a bit mask.
///
/// Iteration is always in canonical order `A < B < C`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PhaseSet(u8);

impl PhaseSet {
    pub const EMPTY: PhaseSet = PhaseSet(0);
    pub const ABC: PhaseSet = PhaseSet(0b111);

    #[inline]
    pub const fn single(p: Phase) -> PhaseSet {
        PhaseSet(1 << p.index())
    }

    /// Builds a set from the low three bits of `bits` (bit 0 = A).
    #[inline]
    pub const fn from_bits(bits: u8) -> PhaseSet {
        PhaseSet(bits & 0b111)
    }

    #[inline]
    pub const fn bits(self) -> u8 {
        self.0
    }

    #[inline]
    pub const fn contains(self, p: Phase) -> bool {
        self.0 & (1 << p.index()) != 0
    }

    #[inline]
    pub const fn is_subset(self, other: PhaseSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub const fn union(self, other: PhaseSet) -> PhaseSet {
        PhaseSet(self.0 | other.0)
    }

    #[inline]
    pub fn insert(&mut self, p: Phase) {
        self.0 |= 1 << p.index();
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Phase> {
        Phase::ALL.into_iter().filter(move |p| self.contains(*p))
    }
}

impl FromIterator<Phase> for PhaseSet {
    fn from_iter<I: IntoIterator<Item = Phase>>(iter: I) -> Self {
        let mut s = PhaseSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl fmt::Debug for PhaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for p in self.iter() {
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for PhaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.iter() {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// A value per phase, indexable by [`Phase`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PhaseTriple<T>(pub [T; 3]);

impl<T: Copy> PhaseTriple<T> {
    pub const fn new(a: T, b: T, c: T) -> Self {
        PhaseTriple([a, b, c])
    }

    pub const fn splat(v: T) -> Self {
        PhaseTriple([v, v, v])
    }

    pub fn map<U: Copy>(self, mut f: impl FnMut(T) -> U) -> PhaseTriple<U> {
        PhaseTriple([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Phase, T)> + '_ {
        Phase::ALL.into_iter().map(move |p| (p, self.0[p.index()]))
    }
}

impl PhaseTriple<f64> {
    pub fn sum(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }
}

impl<T> Index<Phase> for PhaseTriple<T> {
    type Output = T;

    #[inline]
    fn index(&self, p: Phase) -> &T {
        &self.0[p.index()]
    }
}

impl<T> IndexMut<Phase> for PhaseTriple<T> {
    #[inline]
    fn index_mut(&mut self, p: Phase) -> &mut T {
        &mut self.0[p.index()]
    }
}
