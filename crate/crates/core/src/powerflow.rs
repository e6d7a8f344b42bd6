//! Decoupled per-phase backward/forward sweep for radial feeders.
//!
//! Lines carry self impedance only (no mutual coupling, no shunt), loads are
//! constant power, and the source is held at 1.0 p.u. with balanced
//! 120-degree displacement. Each phase is therefore an independent
//! single-phase sweep.
//!
//! Per-unit bases: line-to-line voltage `base_kv`, three-phase power
//! `s_base_kva` (so each phase carries a third of it), and impedance
//! `base_kv^2 / s_base`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::phase::{Phase, PhaseSet, PhaseTriple};
use crate::sampler::SyntheticSample;
use crate::topology::NetworkTopology;

pub const DEFAULT_R_OHM_PER_KM: f64 = 0.4;
pub const DEFAULT_X_OHM_PER_KM: f64 = 0.3;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_S_BASE_KVA: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PowerFlowError {
    #[error("no convergence after {iterations} iterations (max mismatch {mismatch:e} p.u.)")]
    NonConvergence { iterations: usize, mismatch: f64 },
    #[error("base voltage must be positive, got {0} kV")]
    InvalidBaseVoltage(f64),
    #[error("invalid line impedance: {0}")]
    InvalidImpedance(&'static str),
    #[error("invalid solver option: {0}")]
    InvalidOption(&'static str),
    #[error("load demand at bus `{0}` is negative or not finite")]
    InvalidDemand(String),
}

/// Per-phase series impedance per kilometre, applied to every line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineImpedance {
    pub r_ohm_per_km: f64,
    pub x_ohm_per_km: f64,
    /// Permits `r = x = 0` (ideal conductors).
    pub allow_zero: bool,
}

impl Default for LineImpedance {
    fn default() -> Self {
        LineImpedance {
            r_ohm_per_km: DEFAULT_R_OHM_PER_KM,
            x_ohm_per_km: DEFAULT_X_OHM_PER_KM,
            allow_zero: false,
        }
    }
}

impl LineImpedance {
    pub fn new(r_ohm_per_km: f64, x_ohm_per_km: f64) -> Result<Self, PowerFlowError> {
        let z = LineImpedance { r_ohm_per_km, x_ohm_per_km, allow_zero: false };
        z.validate()?;
        Ok(z)
    }

    pub fn ideal() -> Self {
        LineImpedance { r_ohm_per_km: 0.0, x_ohm_per_km: 0.0, allow_zero: true }
    }

    pub fn validate(&self) -> Result<(), PowerFlowError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.r_ohm_per_km) || !ok(self.x_ohm_per_km) {
            return Err(PowerFlowError::InvalidImpedance("r and x must be finite and non-negative"));
        }
        if !self.allow_zero && self.r_ohm_per_km == 0.0 && self.x_ohm_per_km == 0.0 {
            return Err(PowerFlowError::InvalidImpedance(
                "r and x are both zero; use the explicit zero-impedance mode",
            ));
        }
        Ok(())
    }

    fn ohms(&self, length_m: f64) -> Complex64 {
        Complex64::new(self.r_ohm_per_km, self.x_ohm_per_km) * (length_m / 1000.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFlowOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub s_base_kva: f64,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        PowerFlowOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, s_base_kva: DEFAULT_S_BASE_KVA }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoltageSolution {
    pub bus_ids: Vec<String>,
    /// Per-unit phasors by bus index (topology input order).
    pub voltages: Vec<PhaseTriple<Complex64>>,
    /// Phases energized at each bus; others are excluded from reports.
    pub energized: Vec<PhaseSet>,
    /// Largest per-phase sweep count.
    pub iterations: usize,
    pub max_mismatch: f64,
}

impl VoltageSolution {
    pub fn magnitude(&self, bus: usize, phase: Phase) -> f64 {
        self.voltages[bus][phase].norm()
    }
}

/// Balanced source phasor for `phase` at 1.0 p.u. (A leads, B at -120
/// degrees, C at +120 degrees). Components are written out so each phasor
/// has magnitude exactly 1.0 in floating point.
pub fn source_phasor(phase: Phase) -> Complex64 {
    const HALF_SQRT_3: f64 = 0.866_025_403_784_438_6;
    match phase {
        Phase::A => Complex64::new(1.0, 0.0),
        Phase::B => Complex64::new(-0.5, -HALF_SQRT_3),
        Phase::C => Complex64::new(-0.5, HALF_SQRT_3),
    }
}

/// Result of one single-phase sweep: voltages, sweep count and final mismatch.
#[derive(Clone, Debug, PartialEq)]
pub struct SinglePhaseSolution {
    pub voltages: Vec<Complex64>,
    pub iterations: usize,
    pub max_mismatch: f64,
}

/// Single-phase backward/forward sweep with per-unit complex loads `s` and
/// per-unit impedance `z_pu` of the line feeding each bus (ignored for the
/// source).
pub fn sweep_single_phase(
    t: &NetworkTopology,
    s: &[Complex64],
    z_pu: &[Complex64],
    source: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<SinglePhaseSolution, PowerFlowError> {
    let n = t.bus_count();
    let order = t.bfs_order();
    let mut v = vec![source; n];
    let mut i_load = vec![Complex64::new(0.0, 0.0); n];
    let mut i_branch = vec![Complex64::new(0.0, 0.0); n];
    let mut mismatch = f64::INFINITY;
    for iter in 1..=max_iter {
        for b in 0..n {
            i_load[b] = if s[b] == Complex64::new(0.0, 0.0) { s[b] } else { (s[b] / v[b]).conj() };
        }
        for &b in order.iter().rev() {
            let mut acc = i_load[b];
            for &c in t.children(b) {
                acc += i_branch[c];
            }
            i_branch[b] = acc;
        }
        for &b in order {
            v[b] = match t.parent(b) {
                None => source,
                Some(p) => v[p] - z_pu[b] * i_branch[b],
            };
        }
        mismatch = (0..n).map(|b| (v[b] * i_load[b].conj() - s[b]).norm()).fold(0.0, f64::max);
        if !mismatch.is_finite() {
            break;
        }
        if mismatch <= tol {
            return Ok(SinglePhaseSolution { voltages: v, iterations: iter, max_mismatch: mismatch });
        }
    }
    Err(PowerFlowError::NonConvergence { iterations: max_iter, mismatch })
}

/// Per-unit impedance of the line feeding each bus.
pub fn per_unit_impedances(
    t: &NetworkTopology,
    z: &LineImpedance,
    s_base_kva: f64,
) -> Vec<Complex64> {
    let kv = t.base_kv();
    let z_base = kv * kv * 1000.0 / s_base_kva;
    (0..t.bus_count())
        .map(|b| t.parent_line(b).map_or(Complex64::new(0.0, 0.0), |l| z.ohms(l.length_m) / z_base))
        .collect()
}

/// Solves the network for per-bus complex loads in kVA.
pub fn run_power_flow_loads(
    t: &NetworkTopology,
    loads_kva: &[PhaseTriple<Complex64>],
    energized: Vec<PhaseSet>,
    z: &LineImpedance,
    opts: &PowerFlowOptions,
) -> Result<VoltageSolution, PowerFlowError> {
    if !(t.base_kv().is_finite() && t.base_kv() > 0.0) {
        return Err(PowerFlowError::InvalidBaseVoltage(t.base_kv()));
    }
    z.validate()?;
    if !(opts.tol > 0.0 && opts.max_iter > 0 && opts.s_base_kva > 0.0) {
        return Err(PowerFlowError::InvalidOption("tol, max_iter and s_base must be positive"));
    }
    let z_pu = per_unit_impedances(t, z, opts.s_base_kva);
    let s_phase_base = opts.s_base_kva / 3.0;
    let n = t.bus_count();
    let mut voltages = vec![PhaseTriple::splat(Complex64::new(0.0, 0.0)); n];
    let mut iterations = 0;
    let mut max_mismatch: f64 = 0.0;
    for phase in Phase::ALL {
        let s: Vec<Complex64> = loads_kva.iter().map(|l| l[phase] / s_phase_base).collect();
        let sol = sweep_single_phase(t, &s, &z_pu, source_phasor(phase), opts.tol, opts.max_iter)?;
        for (b, v) in sol.voltages.into_iter().enumerate() {
            voltages[b][phase] = v;
        }
        iterations = iterations.max(sol.iterations);
        max_mismatch = max_mismatch.max(sol.max_mismatch);
    }
    Ok(VoltageSolution {
        bus_ids: t.buses().iter().map(|b| b.id.clone()).collect(),
        voltages,
        energized,
        iterations,
        max_mismatch,
    })
}

/// Solves a generated sample. Buses missing from its phase assignment are
/// treated as de-energized for reporting.
pub fn run_power_flow(
    t: &NetworkTopology,
    sample: &SyntheticSample,
    z: &LineImpedance,
    opts: &PowerFlowOptions,
) -> Result<VoltageSolution, PowerFlowError> {
    let mut loads = vec![PhaseTriple::splat(Complex64::new(0.0, 0.0)); t.bus_count()];
    for l in &sample.loads {
        for p in Phase::ALL {
            let (pk, qk) = (l.demand.p_kw[p], l.demand.q_kvar[p]);
            if !(pk.is_finite() && pk >= 0.0 && qk.is_finite()) {
                return Err(PowerFlowError::InvalidDemand(l.bus.clone()));
            }
            loads[l.bus_index][p] += Complex64::new(pk, qk);
        }
    }
    let energized = (0..t.bus_count())
        .map(|b| sample.bus_phases.get(t.id(b)).unwrap_or(PhaseSet::EMPTY))
        .collect();
    run_power_flow_loads(t, &loads, energized, z, opts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandViolation {
    pub bus: String,
    pub phase: Phase,
    pub magnitude: f64,
}

/// Energized (bus, phase) pairs whose magnitude lies outside `[lo, hi]`,
/// in bus input order then phase order.
pub fn voltage_band_report(v: &VoltageSolution, lo: f64, hi: f64) -> Vec<BandViolation> {
    let mut out = Vec::new();
    for (b, id) in v.bus_ids.iter().enumerate() {
        for phase in v.energized[b].iter() {
            let m = v.magnitude(b, phase);
            if m < lo || m > hi {
                out.push(BandViolation { bus: id.clone(), phase, magnitude: m });
            }
        }
    }
    out
}
