//! The hierarchical load model: draws load type, phase, phase ratios, total
//! demand and power factor, then allocates per-phase P and Q to every load
//! of a target topology.
//!
//! Each load `j` of sample `i` reads its own stream `(seed, i, j)` and the
//! network power factor comes from `(seed, i, NETWORK_SLOT)`, so samples can
//! be produced in any order or in parallel with identical results. The
//! Bernoulli load-type draw is always the first word of the load stream.

use alloc::string::String;
use alloc::vec::Vec;
use libm::{acos, tan};

use crate::consistency::{enforce_consistency, PhaseAssignment};
use crate::dist;
use crate::estimator::{
    DistanceBinCurve, ModelParameters, MomentSlot, ObservedLoad, PhaseChoiceProbs, RatioParams,
};
use crate::phase::{Phase, PhaseSet, PhaseTriple};
use crate::rng::{RngStream, NETWORK_SLOT};
use crate::topology::{NetworkTopology, TopologyError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PfEntry {
    pub threshold: f64,
    pub pf: f64,
}

/// Step table mapping a uniform draw to a power factor.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerFactorTable {
    pub entries: Vec<PfEntry>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PfTableError {
    #[error("power factor table is empty")]
    Empty,
    #[error("thresholds must be strictly increasing within (0, 1]")]
    Thresholds,
    #[error("last threshold must be 1.0")]
    LastThreshold,
    #[error("power factors must lie in (0, 1]")]
    PowerFactor,
}

impl Default for PowerFactorTable {
    fn default() -> Self {
        PowerFactorTable {
            entries: alloc::vec![
                PfEntry { threshold: 0.1649, pf: 0.85 },
                PfEntry { threshold: 0.27, pf: 0.90 },
                PfEntry { threshold: 1.0, pf: 0.95 },
            ],
        }
    }
}

impl PowerFactorTable {
    pub fn new(entries: Vec<PfEntry>) -> Result<Self, PfTableError> {
        let t = PowerFactorTable { entries };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), PfTableError> {
        let last = self.entries.last().ok_or(PfTableError::Empty)?;
        let mut prev = 0.0;
        for e in &self.entries {
            if !(e.threshold > prev && e.threshold <= 1.0) {
                return Err(PfTableError::Thresholds);
            }
            if !(e.pf > 0.0 && e.pf <= 1.0) {
                return Err(PfTableError::PowerFactor);
            }
            prev = e.threshold;
        }
        if last.threshold != 1.0 {
            return Err(PfTableError::LastThreshold);
        }
        Ok(())
    }

    /// Power factor of the first entry with `u <= threshold`.
    pub fn lookup(&self, u: f64) -> f64 {
        self.entries
            .iter()
            .find(|e| u <= e.threshold)
            .or(self.entries.last())
            .map(|e| e.pf)
            .expect("validated table is non-empty")
    }
}

/// Reactive-to-active power ratio `tan(arccos(pf))`.
#[inline]
pub fn q_over_p(pf: f64) -> f64 {
    tan(acos(pf))
}

pub fn sample_phase_count(d: f64, curve: &DistanceBinCurve, rng: &mut RngStream) -> bool {
    dist::bernoulli(curve.p3_at(d), rng)
}

pub fn sample_phase_choice(p: &PhaseChoiceProbs, rng: &mut RngStream) -> Phase {
    let i = dist::categorical(&p.p.0, rng);
    Phase::from_index(i).expect("three categories")
}

pub fn sample_phase_ratios(r: &RatioParams, rng: &mut RngStream) -> [f64; 3] {
    dist::dirichlet3(r.alpha(), rng)
}

pub fn sample_total_demand(m: MomentSlot, rng: &mut RngStream) -> f64 {
    dist::truncated_normal_positive(m.mu, m.sigma, rng)
}

pub fn sample_power_factor(table: &PowerFactorTable, rng: &mut RngStream) -> f64 {
    table.lookup(rng.uniform())
}

/// Outcome of the per-load model layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseDraw {
    ThreePhase { ratios: [f64; 3], total_kw: f64 },
    SinglePhase { phase: Phase, total_kw: f64 },
}

impl PhaseDraw {
    pub fn phases(&self) -> PhaseSet {
        match *self {
            PhaseDraw::ThreePhase { .. } => PhaseSet::ABC,
            PhaseDraw::SinglePhase { phase, .. } => PhaseSet::single(phase),
        }
    }

    pub fn total_kw(&self) -> f64 {
        match *self {
            PhaseDraw::ThreePhase { total_kw, .. } | PhaseDraw::SinglePhase { total_kw, .. } => {
                total_kw
            }
        }
    }

    /// Per-phase active power: ratios times the total for three-phase loads,
    /// the whole total on the chosen phase otherwise.
    pub fn active_power(&self) -> PhaseTriple<f64> {
        match *self {
            PhaseDraw::ThreePhase { ratios, total_kw } => {
                PhaseTriple(ratios).map(|r| r * total_kw)
            }
            PhaseDraw::SinglePhase { phase, total_kw } => {
                let mut p = PhaseTriple::splat(0.0);
                p[phase] = total_kw;
                p
            }
        }
    }
}

/// Runs the load-type, phase-choice, ratio and demand layers for one load.
pub fn draw_load(d: f64, params: &ModelParameters, rng: &mut RngStream) -> PhaseDraw {
    if sample_phase_count(d, &params.curve, rng) {
        let ratios = sample_phase_ratios(&params.ratios, rng);
        let total_kw = sample_total_demand(params.demand.three_phase, rng);
        PhaseDraw::ThreePhase { ratios, total_kw }
    } else {
        let phase = sample_phase_choice(&params.phase_choice, rng);
        let total_kw = sample_total_demand(params.demand.per_phase[phase], rng);
        PhaseDraw::SinglePhase { phase, total_kw }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LoadDemand {
    pub p_kw: PhaseTriple<f64>,
    pub q_kvar: PhaseTriple<f64>,
}

impl LoadDemand {
    pub fn from_active(p_kw: PhaseTriple<f64>, pf: f64) -> Self {
        let k = q_over_p(pf);
        LoadDemand { p_kw, q_kvar: p_kw.map(|p| p * k) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledLoad {
    pub bus: String,
    pub bus_index: usize,
    pub phases: PhaseSet,
    pub demand: LoadDemand,
    /// Power factor used for this load's reactive power.
    pub pf: f64,
}

/// One generated network instance for a topology held by the caller.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSample {
    pub seed: u64,
    pub sample_index: u64,
    /// Network-wide power factor drawn for this sample.
    pub pf: f64,
    pub loads: Vec<SampledLoad>,
    /// Phase set of every bus after consistency repair.
    pub bus_phases: PhaseAssignment,
}

impl SyntheticSample {
    /// The sample's loads in observed-network form, ready for refitting.
    pub fn observed_loads(&self) -> Vec<ObservedLoad> {
        self.loads
            .iter()
            .map(|l| ObservedLoad {
                bus: l.bus.clone(),
                phases: l.phases,
                p_kw: l.demand.p_kw,
                q_kvar: l.demand.q_kvar,
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SamplerOptions {
    /// Draw a power factor per load instead of one per sample.
    pub per_load_pf: bool,
}

/// Draws every load of `topology` for sample `sample_index`, without phase
/// repair. `bus_phases` holds the union of load phase sets per load bus.
pub fn allocate_loads(
    topology: &NetworkTopology,
    params: &ModelParameters,
    opts: SamplerOptions,
    seed: u64,
    sample_index: u64,
) -> Result<SyntheticSample, TopologyError> {
    let network_pf =
        sample_power_factor(&params.pf_table, &mut RngStream::substream(seed, sample_index, NETWORK_SLOT));
    let mut loads = Vec::with_capacity(topology.loads().len());
    let mut bus_phases = PhaseAssignment::new();
    for (j, (lp, &bus)) in topology.loads().iter().zip(topology.load_bus_indices()).enumerate() {
        let d = topology.normalized_distance_index(bus)?;
        let mut rng = RngStream::substream(seed, sample_index, j as u64);
        let draw = draw_load(d, params, &mut rng);
        let pf = if opts.per_load_pf {
            sample_power_factor(&params.pf_table, &mut rng)
        } else {
            network_pf
        };
        let phases = draw.phases();
        bus_phases.widen(&lp.bus, phases);
        loads.push(SampledLoad {
            bus: lp.bus.clone(),
            bus_index: bus,
            phases,
            demand: LoadDemand::from_active(draw.active_power(), pf),
            pf,
        });
    }
    Ok(SyntheticSample { seed, sample_index, pf: network_pf, loads, bus_phases })
}

/// [`allocate_loads`] followed by phase-consistency repair of the bus phase
/// sets. Load demands are not touched by the repair.
pub fn generate_sample(
    topology: &NetworkTopology,
    params: &ModelParameters,
    opts: SamplerOptions,
    seed: u64,
    sample_index: u64,
) -> Result<SyntheticSample, TopologyError> {
    let mut s = allocate_loads(topology, params, opts, seed, sample_index)?;
    s.bus_phases = enforce_consistency(topology, &s.bus_phases);
    Ok(s)
}

/// Samples `0..n_samples` in order.
pub fn generate(
    topology: &NetworkTopology,
    params: &ModelParameters,
    opts: SamplerOptions,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<SyntheticSample>, TopologyError> {
    (0..n_samples).map(|i| generate_sample(topology, params, opts, seed, i)).collect()
}

/// Replaces the ratio means, as for the balanced and unbalanced scenarios.
pub fn with_ratio_mean(mut params: ModelParameters, mean: [f64; 3]) -> ModelParameters {
    params.ratios.mean = PhaseTriple(mean);
    params
}

pub const BALANCED_RATIOS: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
pub const UNBALANCED_RATIOS: [f64; 3] = [0.1, 0.6, 0.3];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pf_table_thresholds() {
        let t = PowerFactorTable::default();
        assert_eq!(t.lookup(0.10), 0.85);
        assert_eq!(t.lookup(0.1649), 0.85);
        assert_eq!(t.lookup(0.20), 0.90);
        assert_eq!(t.lookup(0.27), 0.90);
        assert_eq!(t.lookup(0.50), 0.95);
        assert_eq!(t.lookup(0.0), 0.85);
        t.validate().unwrap();
    }

    #[test]
    fn pf_table_validation() {
        let e = |threshold, pf| PfEntry { threshold, pf };
        assert_eq!(PowerFactorTable::new(alloc::vec![]), Err(PfTableError::Empty));
        assert_eq!(
            PowerFactorTable::new(alloc::vec![e(0.5, 0.9), e(0.4, 0.9), e(1.0, 0.9)]),
            Err(PfTableError::Thresholds)
        );
        assert_eq!(PowerFactorTable::new(alloc::vec![e(0.5, 0.9)]), Err(PfTableError::LastThreshold));
        assert_eq!(PowerFactorTable::new(alloc::vec![e(1.0, 1.2)]), Err(PfTableError::PowerFactor));
    }

    #[test]
    fn worked_allocation_examples() {
        let three = PhaseDraw::ThreePhase { ratios: [0.5, 0.3, 0.2], total_kw: 50.0 };
        assert_eq!(three.active_power().0, [25.0, 15.0, 10.0]);
        assert_eq!(three.phases(), PhaseSet::ABC);

        let single = PhaseDraw::SinglePhase { phase: Phase::B, total_kw: 2.0 };
        assert_eq!(single.active_power().0, [0.0, 2.0, 0.0]);
        assert_eq!(single.phases(), PhaseSet::single(Phase::B));

        // tan(arccos(0.95)) = sqrt(1 - 0.95^2) / 0.95 = 0.328684...
        let d = LoadDemand::from_active(three.active_power(), 0.95);
        let expect = [8.217_10, 4.930_26, 3.286_84];
        for (q, e) in d.q_kvar.0.iter().zip(expect) {
            assert!((q - e).abs() < 1e-5, "{q} vs {e}");
        }
    }

    #[test]
    fn degenerate_layers() {
        let mut rng = RngStream::from_seed(11);
        let curve = DistanceBinCurve::constant(4, 1.0);
        let never = DistanceBinCurve::constant(4, 0.0);
        let point = PhaseChoiceProbs::new(1.0, 0.0, 0.0);
        for i in 0..1000 {
            let d = i as f64 / 999.0;
            assert!(sample_phase_count(d, &curve, &mut rng));
            assert!(!sample_phase_count(d, &never, &mut rng));
            assert_eq!(sample_phase_choice(&point, &mut rng), Phase::A);
        }
        let m = MomentSlot { mu: 0.45, sigma: 0.0 };
        assert_eq!(sample_total_demand(m, &mut rng), 0.45);
        let corner = RatioParams { mean: PhaseTriple::new(1.0, 0.0, 0.0), concentration: 100.0 };
        let r = sample_phase_ratios(&corner, &mut rng);
        assert!(r[0] > 0.999_999 && (r[0] + r[1] + r[2] - 1.0).abs() < 1e-9);
    }
}
