//! Fitting model parameters from an observed network.
//!
//! Probabilities use add-one smoothing (posterior means under uniform
//! priors); demand moments and phase ratios use sample statistics.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;

use crate::phase::{Phase, PhaseSet, PhaseTriple};
use crate::sampler::PowerFactorTable;
use crate::topology::{NetworkTopology, TopologyError};

pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_CONCENTRATION: f64 = 100.0;
pub const MIN_CONCENTRATION: f64 = 1.0;
pub const MAX_CONCENTRATION: f64 = 10_000.0;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error("observed network has no loads")]
    NoLoads,
    #[error("number of distance bins must be at least 1")]
    InvalidBins,
    #[error(
        "observed network has no three-phase loads with positive demand; \
         supply ratio parameters manually"
    )]
    NoThreePhaseLoads,
    #[error("observed load {index} at bus `{bus}`: {reason}")]
    InvalidLoad { index: usize, bus: String, reason: &'static str },
    #[error("fitted mean demand for {slot} is not positive ({mu} kW)")]
    NonPositiveDemand { slot: &'static str, mu: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(&'static str),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservedLoad {
    pub bus: String,
    pub phases: PhaseSet,
    pub p_kw: PhaseTriple<f64>,
    pub q_kvar: PhaseTriple<f64>,
}

impl ObservedLoad {
    pub fn total_kw(&self) -> f64 {
        self.p_kw.sum()
    }

    pub fn is_three_phase(&self) -> bool {
        self.phases.len() == 3
    }

    pub fn single_phase(&self) -> Option<Phase> {
        if self.phases.len() == 1 {
            self.phases.iter().next()
        } else {
            None
        }
    }
}

/// A topology together with measured per-phase load data.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedNetwork {
    topology: NetworkTopology,
    loads: Vec<ObservedLoad>,
    load_bus: Vec<usize>,
}

impl ObservedNetwork {
    pub fn new(topology: NetworkTopology, loads: Vec<ObservedLoad>) -> Result<Self, EstimateError> {
        if loads.is_empty() {
            return Err(EstimateError::NoLoads);
        }
        let mut load_bus = Vec::with_capacity(loads.len());
        for (index, l) in loads.iter().enumerate() {
            let bad = |reason| EstimateError::InvalidLoad { index, bus: l.bus.clone(), reason };
            let b = topology.index_of(&l.bus).ok_or_else(|| bad("unknown bus"))?;
            if l.phases.is_empty() {
                return Err(bad("empty phase set"));
            }
            for p in Phase::ALL {
                let v = l.p_kw[p];
                if !v.is_finite() || v < 0.0 {
                    return Err(bad("active power must be finite and non-negative"));
                }
                if v > 0.0 && !l.phases.contains(p) {
                    return Err(bad("active power on a phase outside the load's phase set"));
                }
                if !l.q_kvar[p].is_finite() {
                    return Err(bad("reactive power must be finite"));
                }
            }
            load_bus.push(b);
        }
        Ok(ObservedNetwork { topology, loads, load_bus })
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn loads(&self) -> &[ObservedLoad] {
        &self.loads
    }

    pub fn into_parts(self) -> (NetworkTopology, Vec<ObservedLoad>) {
        (self.topology, self.loads)
    }

    /// Bus index of every observed load.
    pub fn load_bus_indices(&self) -> &[usize] {
        &self.load_bus
    }
}

/// Three-phase probability as a function of normalized distance.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceBinCurve {
    pub bin_edges: Vec<f64>,
    /// Per-bin probability that a load is three-phase, used for sampling.
    pub conditional_p3: Vec<f64>,
    /// Three-phase count per bin divided by the total load count.
    pub joint_mass: Vec<f64>,
    /// `(three_phase, total)` per bin.
    pub counts: Vec<(u64, u64)>,
}

impl DistanceBinCurve {
    pub fn uniform_edges(n_bins: usize) -> Vec<f64> {
        (0..=n_bins).map(|k| k as f64 / n_bins as f64).collect()
    }

    /// A curve with the same three-phase probability in every bin and no
    /// observation counts.
    pub fn constant(n_bins: usize, p3: f64) -> Self {
        Self::from_conditional(vec![p3; n_bins.max(1)])
    }

    pub fn from_conditional(conditional_p3: Vec<f64>) -> Self {
        let k = conditional_p3.len();
        DistanceBinCurve {
            bin_edges: Self::uniform_edges(k),
            conditional_p3,
            joint_mass: vec![0.0; k],
            counts: vec![(0, 0); k],
        }
    }

    pub fn n_bins(&self) -> usize {
        self.conditional_p3.len()
    }

    /// Bin containing `d`; `d == 1` belongs to the last bin.
    pub fn bin_of(&self, d: f64) -> usize {
        let k = self.n_bins();
        // Edges are uniform for every curve this crate builds, but a curve
        // read from a file is searched explicitly.
        match self.bin_edges[1..k].iter().position(|&e| d < e) {
            Some(i) => i,
            None => k - 1,
        }
    }

    pub fn p3_at(&self, d: f64) -> f64 {
        self.conditional_p3[self.bin_of(d)]
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        let k = self.conditional_p3.len();
        let bad = EstimateError::InvalidParameters;
        if k == 0 {
            return Err(bad("curve has no bins"));
        }
        if self.bin_edges.len() != k + 1 || self.joint_mass.len() != k || self.counts.len() != k {
            return Err(bad("curve arrays have inconsistent lengths"));
        }
        if self.bin_edges[0] != 0.0 || self.bin_edges[k] != 1.0 {
            return Err(bad("curve bins must cover [0, 1]"));
        }
        if self.bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(bad("curve bin edges must be strictly increasing"));
        }
        if self.conditional_p3.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(bad("curve probabilities must lie in [0, 1]"));
        }
        if self.joint_mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(bad("curve joint mass must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveOptions {
    pub n_bins: usize,
    /// Fill empty bins by linear interpolation between the nearest non-empty
    /// neighbours instead of the flat prior value 0.5.
    pub interpolate_empty: bool,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { n_bins: DEFAULT_BINS, interpolate_empty: false }
    }
}

impl CurveOptions {
    pub fn bins(n_bins: usize) -> Self {
        CurveOptions { n_bins, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseChoiceProbs {
    pub p: PhaseTriple<f64>,
}

impl PhaseChoiceProbs {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        PhaseChoiceProbs { p: PhaseTriple::new(a, b, c) }
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        if self.p.0.iter().any(|v| !(0.0..=1.0).contains(v)) || (self.p.sum() - 1.0).abs() > 1e-9 {
            return Err(EstimateError::InvalidParameters("phase choice must lie on the simplex"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentSlot {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemandMoments {
    /// Total (A+B+C) active power of three-phase loads.
    pub three_phase: MomentSlot,
    /// Active power of single-phase loads on each phase.
    pub per_phase: PhaseTriple<MomentSlot>,
}

impl DemandMoments {
    pub fn uniform(mu: f64, sigma: f64) -> Self {
        let s = MomentSlot { mu, sigma };
        DemandMoments { three_phase: s, per_phase: PhaseTriple::splat(s) }
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        let slots = [
            ("three-phase", self.three_phase),
            ("phase A", self.per_phase[Phase::A]),
            ("phase B", self.per_phase[Phase::B]),
            ("phase C", self.per_phase[Phase::C]),
        ];
        for (slot, m) in slots {
            if !(m.mu.is_finite() && m.mu > 0.0) {
                return Err(EstimateError::NonPositiveDemand { slot, mu: m.mu });
            }
            if !(m.sigma.is_finite() && m.sigma >= 0.0) {
                return Err(EstimateError::InvalidParameters("demand sigma must be non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioParams {
    pub mean: PhaseTriple<f64>,
    pub concentration: f64,
}

impl RatioParams {
    pub const MIN_ALPHA: f64 = 1e-6;

    /// Dirichlet concentration vector `concentration * mean`, floored so
    /// every gamma shape is valid.
    pub fn alpha(&self) -> [f64; 3] {
        self.mean.map(|m| (m * self.concentration).max(Self::MIN_ALPHA)).0
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        if self.mean.0.iter().any(|v| !(v.is_finite() && *v >= 0.0))
            || (self.mean.sum() - 1.0).abs() > 1e-9
        {
            return Err(EstimateError::InvalidParameters("ratio mean must lie on the simplex"));
        }
        if !(self.concentration.is_finite() && self.concentration > 0.0) {
            return Err(EstimateError::InvalidParameters("ratio concentration must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParameters {
    pub curve: DistanceBinCurve,
    pub phase_choice: PhaseChoiceProbs,
    pub demand: DemandMoments,
    pub ratios: RatioParams,
    pub pf_table: PowerFactorTable,
}

impl ModelParameters {
    pub fn validate(&self) -> Result<(), EstimateError> {
        self.curve.validate()?;
        self.phase_choice.validate()?;
        self.demand.validate()?;
        self.ratios.validate()?;
        self.pf_table
            .validate()
            .map_err(|_| EstimateError::InvalidParameters("invalid power factor table"))
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Sample mean and standard deviation (n - 1 denominator; zero for n < 2).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mut s = KahanSum::default();
    values.iter().for_each(|&v| s.add(v));
    let mean = s.value() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut ss = KahanSum::default();
    values.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
    (mean, sqrt(ss.value() / (n - 1) as f64))
}

pub fn estimate_p3_curve(
    obs: &ObservedNetwork,
    opts: CurveOptions,
) -> Result<DistanceBinCurve, EstimateError> {
    if opts.n_bins == 0 {
        return Err(EstimateError::InvalidBins);
    }
    if obs.loads.is_empty() {
        return Err(EstimateError::NoLoads);
    }
    let k = opts.n_bins;
    let mut curve = DistanceBinCurve::from_conditional(vec![0.0; k]);
    let topo = &obs.topology;
    for (load, &bus) in obs.loads.iter().zip(&obs.load_bus) {
        let d = topo.normalized_distance_index(bus)?;
        let bin = curve.bin_of(d);
        curve.counts[bin].1 += 1;
        if load.is_three_phase() {
            curve.counts[bin].0 += 1;
        }
    }
    let total = obs.loads.len() as f64;
    for (i, &(n3, n)) in curve.counts.iter().enumerate() {
        curve.joint_mass[i] = n3 as f64 / total;
        curve.conditional_p3[i] = (n3 as f64 + 1.0) / (n as f64 + 2.0);
    }
    if opts.interpolate_empty {
        interpolate_empty_bins(&mut curve);
    }
    Ok(curve)
}

fn interpolate_empty_bins(curve: &mut DistanceBinCurve) {
    let filled: Vec<usize> = (0..curve.n_bins()).filter(|&i| curve.counts[i].1 > 0).collect();
    if filled.is_empty() {
        return;
    }
    let centre = |i: usize| 0.5 * (curve.bin_edges[i] + curve.bin_edges[i + 1]);
    for i in 0..curve.n_bins() {
        if curve.counts[i].1 > 0 {
            continue;
        }
        let left = filled.iter().rev().find(|&&j| j < i).copied();
        let right = filled.iter().find(|&&j| j > i).copied();
        curve.conditional_p3[i] = match (left, right) {
            (Some(l), Some(r)) => {
                let t = (centre(i) - centre(l)) / (centre(r) - centre(l));
                curve.conditional_p3[l] + t * (curve.conditional_p3[r] - curve.conditional_p3[l])
            }
            (Some(l), None) => curve.conditional_p3[l],
            (None, Some(r)) => curve.conditional_p3[r],
            (None, None) => unreachable!("at least one bin is filled"),
        };
    }
}

pub fn estimate_phase_choice(obs: &ObservedNetwork) -> PhaseChoiceProbs {
    let mut counts = [0u64; 3];
    for p in obs.loads.iter().filter_map(ObservedLoad::single_phase) {
        counts[p.index()] += 1;
    }
    phase_choice_from_counts(counts)
}

/// Posterior mean `(c + 1) / (n + 3)` of a categorical under a uniform prior.
pub fn phase_choice_from_counts(counts: [u64; 3]) -> PhaseChoiceProbs {
    let n = (counts[0] + counts[1] + counts[2]) as f64;
    let den = n + 3.0;
    PhaseChoiceProbs::new(
        (counts[0] as f64 + 1.0) / den,
        (counts[1] as f64 + 1.0) / den,
        (counts[2] as f64 + 1.0) / den,
    )
}

pub fn estimate_demand_moments(obs: &ObservedNetwork) -> DemandMoments {
    let all: Vec<f64> = obs.loads.iter().map(ObservedLoad::total_kw).collect();
    let slot = |values: &[f64]| {
        let (mu, sigma) = if values.is_empty() { mean_std(&all) } else { mean_std(values) };
        MomentSlot { mu, sigma }
    };
    let three: Vec<f64> =
        obs.loads.iter().filter(|l| l.is_three_phase()).map(ObservedLoad::total_kw).collect();
    let mut per_phase: [Vec<f64>; 3] = Default::default();
    for l in &obs.loads {
        if let Some(p) = l.single_phase() {
            per_phase[p.index()].push(l.p_kw[p]);
        }
    }
    DemandMoments {
        three_phase: slot(&three),
        per_phase: PhaseTriple::new(slot(&per_phase[0]), slot(&per_phase[1]), slot(&per_phase[2])),
    }
}

pub fn estimate_ratio_params(obs: &ObservedNetwork) -> Result<RatioParams, EstimateError> {
    let ratios: Vec<[f64; 3]> = obs
        .loads
        .iter()
        .filter(|l| l.is_three_phase() && l.total_kw() > 0.0)
        .map(|l| {
            let t = l.total_kw();
            l.p_kw.map(|v| v / t).0
        })
        .collect();
    ratio_params_from_samples(&ratios)
}

/// Mean ratio (renormalised onto the simplex) and a method-of-moments
/// concentration from the variance of the first coordinate.
pub fn ratio_params_from_samples(ratios: &[[f64; 3]]) -> Result<RatioParams, EstimateError> {
    if ratios.is_empty() {
        return Err(EstimateError::NoThreePhaseLoads);
    }
    let mut mean = [0.0; 3];
    for (i, m) in mean.iter_mut().enumerate() {
        let col: Vec<f64> = ratios.iter().map(|r| r[i]).collect();
        *m = mean_std(&col).0;
    }
    let s: f64 = mean.iter().sum();
    let mean = PhaseTriple(mean.map(|m| m / s));

    let col_a: Vec<f64> = ratios.iter().map(|r| r[0]).collect();
    let (_, sd_a) = mean_std(&col_a);
    let var_a = sd_a * sd_a;
    let ma = mean[Phase::A];
    let concentration = if var_a > 0.0 {
        let k = ma * (1.0 - ma) / var_a - 1.0;
        if k.is_finite() {
            k.clamp(MIN_CONCENTRATION, MAX_CONCENTRATION)
        } else {
            DEFAULT_CONCENTRATION
        }
    } else {
        MAX_CONCENTRATION
    };
    Ok(RatioParams { mean, concentration })
}

pub fn fit(obs: &ObservedNetwork, opts: CurveOptions) -> Result<ModelParameters, EstimateError> {
    let params = ModelParameters {
        curve: estimate_p3_curve(obs, opts)?,
        phase_choice: estimate_phase_choice(obs),
        demand: estimate_demand_moments(obs),
        ratios: estimate_ratio_params(obs)?,
        pf_table: PowerFactorTable::default(),
    };
    params.demand.validate()?;
    Ok(params)
}

/// Empirical three-phase fraction of an observed network.
pub fn three_phase_fraction(obs: &ObservedNetwork) -> f64 {
    obs.loads.iter().filter(|l| l.is_three_phase()).count() as f64 / obs.loads.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Bus, Line, LoadPoint};

    /// Chain `f - n1 - ... - n{len}` with unit lines.
    fn chain(len: usize) -> NetworkTopology {
        let ids: Vec<String> = (0..=len)
            .map(|i| if i == 0 { "f".into() } else { alloc::format!("n{i:03}") })
            .collect();
        let buses = ids.iter().map(|id| Bus { id: id.clone(), x: None, y: None }).collect();
        let lines = ids
            .windows(2)
            .map(|w| Line { from: w[0].clone(), to: w[1].clone(), length_m: 1.0 })
            .collect();
        NetworkTopology::new(buses, lines, "f", 0.4, Vec::<LoadPoint>::new()).unwrap()
    }

    fn three(bus: &str, a: f64, b: f64, c: f64) -> ObservedLoad {
        ObservedLoad {
            bus: bus.into(),
            phases: PhaseSet::ABC,
            p_kw: PhaseTriple::new(a, b, c),
            q_kvar: PhaseTriple::splat(0.0),
        }
    }

    fn single(bus: &str, p: Phase, kw: f64) -> ObservedLoad {
        let mut p_kw = PhaseTriple::splat(0.0);
        p_kw[p] = kw;
        ObservedLoad {
            bus: bus.into(),
            phases: PhaseSet::single(p),
            p_kw,
            q_kvar: PhaseTriple::splat(0.0),
        }
    }

    #[test]
    fn curve_all_three_phase_at_source() {
        let t = chain(2);
        let n = 5;
        let loads = (0..n).map(|_| three("f", 1.0, 1.0, 1.0)).collect();
        let obs = ObservedNetwork::new(t, loads).unwrap();
        let c = estimate_p3_curve(&obs, CurveOptions::bins(2)).unwrap();
        assert_eq!(c.joint_mass, vec![1.0, 0.0]);
        assert_eq!(c.conditional_p3[0], (n as f64 + 1.0) / (n as f64 + 2.0));
        assert_eq!(c.conditional_p3[1], 0.5);
        assert_eq!(c.bin_edges, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn curve_without_three_phase_loads() {
        let t = chain(4);
        let loads = ["n001", "n002", "n004", "n004"]
            .iter()
            .map(|b| single(b, Phase::A, 1.0))
            .collect();
        let obs = ObservedNetwork::new(t, loads).unwrap();
        let c = estimate_p3_curve(&obs, CurveOptions::bins(4)).unwrap();
        assert!(c.joint_mass.iter().all(|&m| m == 0.0));
        for (p, (_, n)) in c.conditional_p3.iter().zip(&c.counts) {
            assert_eq!(*p, 1.0 / (*n as f64 + 2.0));
        }
    }

    #[test]
    fn curve_hand_counted_bins() {
        // 10 loads in each half; 8 of the near ones and 1 of the far ones are
        // three-phase. Hand count: (8+1)/(10+2) and (1+1)/(10+2).
        let t = chain(10);
        let mut loads = Vec::new();
        for i in 0..10 {
            let near = "n002";
            loads.push(if i < 8 { three(near, 1.0, 1.0, 1.0) } else { single(near, Phase::B, 1.0) });
            let far = "n009";
            loads.push(if i < 1 { three(far, 1.0, 1.0, 1.0) } else { single(far, Phase::C, 1.0) });
        }
        let obs = ObservedNetwork::new(t, loads).unwrap();
        let c = estimate_p3_curve(&obs, CurveOptions::bins(2)).unwrap();
        assert_eq!(c.counts, vec![(8, 10), (1, 10)]);
        assert!((c.conditional_p3[0] - 9.0 / 12.0).abs() < 1e-15);
        assert!((c.conditional_p3[1] - 2.0 / 12.0).abs() < 1e-15);
        assert!((c.joint_mass.iter().sum::<f64>() - three_phase_fraction(&obs)).abs() < 1e-12);
    }

    #[test]
    fn curve_interpolation_is_opt_in() {
        let t = chain(10);
        let loads = vec![three("n001", 1.0, 1.0, 1.0), single("n010", Phase::A, 1.0)];
        let obs = ObservedNetwork::new(t, loads).unwrap();
        let flat = estimate_p3_curve(&obs, CurveOptions::bins(5)).unwrap();
        assert_eq!(flat.conditional_p3[2], 0.5);
        let opts = CurveOptions { n_bins: 5, interpolate_empty: true };
        let lin = estimate_p3_curve(&obs, opts).unwrap();
        // Bin 0 holds 2/3, bin 4 holds 1/3, bin 2 sits half way.
        assert!((lin.conditional_p3[2] - 0.5).abs() < 1e-15);
        assert!((lin.conditional_p3[1] - (2.0 / 3.0 - 1.0 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_bins_rejected() {
        let obs = ObservedNetwork::new(chain(1), vec![three("n001", 1.0, 1.0, 1.0)]).unwrap();
        assert_eq!(estimate_p3_curve(&obs, CurveOptions::bins(0)), Err(EstimateError::InvalidBins));
    }

    #[test]
    fn phase_choice_counts() {
        assert_eq!(phase_choice_from_counts([0, 0, 0]).p.0, [1.0 / 3.0; 3]);
        let p = phase_choice_from_counts([997, 0, 0]).p;
        assert_eq!(p.0, [998.0 / 1000.0, 1.0 / 1000.0, 1.0 / 1000.0]);
        let p = phase_choice_from_counts([335, 329, 336]).p;
        assert_eq!(p.0, [336.0 / 1003.0, 330.0 / 1003.0, 337.0 / 1003.0]);
        assert!((p[Phase::A] - 0.3350).abs() < 5e-5);
        assert!((p[Phase::B] - 0.3290).abs() < 5e-5);
        assert!((p[Phase::C] - 0.3360).abs() < 5e-5);
    }

    #[test]
    fn demand_moments_examples() {
        let t = chain(2);
        let one = ObservedNetwork::new(t.clone(), vec![three("n001", 20.0, 20.0, 10.0)]).unwrap();
        let m = estimate_demand_moments(&one);
        assert_eq!(m.three_phase, MomentSlot { mu: 50.0, sigma: 0.0 });
        // No single-phase loads: every phase slot falls back to all loads.
        assert_eq!(m.per_phase[Phase::B], MomentSlot { mu: 50.0, sigma: 0.0 });

        let two = ObservedNetwork::new(
            t,
            vec![single("n001", Phase::A, 40.0), single("n002", Phase::A, 60.0)],
        )
        .unwrap();
        let m = estimate_demand_moments(&two);
        assert_eq!(m.per_phase[Phase::A].mu, 50.0);
        assert!((m.per_phase[Phase::A].sigma - 10.0 * core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn ratio_examples() {
        let t = chain(2);
        let obs = ObservedNetwork::new(t.clone(), vec![three("n001", 25.0, 15.0, 10.0)]).unwrap();
        let r = estimate_ratio_params(&obs).unwrap();
        assert!((r.mean[Phase::A] - 0.5).abs() < 1e-15);
        assert!((r.mean[Phase::B] - 0.3).abs() < 1e-15);
        assert!((r.mean[Phase::C] - 0.2).abs() < 1e-15);

        let balanced = (0..4).map(|_| three("n002", 3.0, 3.0, 3.0)).collect();
        let r = estimate_ratio_params(&ObservedNetwork::new(t.clone(), balanced).unwrap()).unwrap();
        assert_eq!(r.mean.0, [1.0 / 3.0; 3]);
        assert_eq!(r.concentration, MAX_CONCENTRATION);

        let none = ObservedNetwork::new(t, vec![single("n001", Phase::A, 1.0)]).unwrap();
        let err = estimate_ratio_params(&none).unwrap_err();
        assert_eq!(err, EstimateError::NoThreePhaseLoads);
        assert!(alloc::string::ToString::to_string(&err).contains("manually"));
    }

    #[test]
    fn minimal_fit() {
        let obs = ObservedNetwork::new(chain(1), vec![three("n001", 1.0, 2.0, 3.0)]).unwrap();
        let p = fit(&obs, CurveOptions::default()).unwrap();
        assert_eq!(p.demand.three_phase.sigma, 0.0);
        assert_eq!(p.ratios.concentration, MAX_CONCENTRATION);
        assert_eq!(p.curve.n_bins(), DEFAULT_BINS);
        p.validate().unwrap();
    }

    #[test]
    fn observed_network_validation() {
        let t = chain(1);
        assert_eq!(ObservedNetwork::new(t.clone(), vec![]), Err(EstimateError::NoLoads));
        let mut l = single("n001", Phase::A, 1.0);
        l.p_kw[Phase::B] = 0.5;
        assert!(matches!(
            ObservedNetwork::new(t.clone(), vec![l]),
            Err(EstimateError::InvalidLoad { index: 0, .. })
        ));
        let ghost = single("zz", Phase::A, 1.0);
        assert!(ObservedNetwork::new(t, vec![ghost]).is_err());
    }
}
