//! Real-versus-synthetic comparison: MAPE, parameter rows and histograms.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::estimator::{estimate_phase_choice, three_phase_fraction, ObservedNetwork};
use crate::phase::{Phase, PhaseTriple};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("sequence lengths differ: reference {reference}, estimate {estimate}")]
    LengthMismatch { reference: usize, estimate: usize },
    #[error("reference sequence is empty")]
    Empty,
    #[error("reference value at index {0} is zero")]
    ZeroReference(usize),
}

/// Mean absolute percentage error, `100/n * sum |r - e| / |r|`.
pub fn mape(reference: &[f64], estimate: &[f64]) -> Result<f64, MetricsError> {
    if reference.len() != estimate.len() {
        return Err(MetricsError::LengthMismatch {
            reference: reference.len(),
            estimate: estimate.len(),
        });
    }
    if reference.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut acc = 0.0;
    for (i, (&r, &e)) in reference.iter().zip(estimate).enumerate() {
        if r == 0.0 {
            return Err(MetricsError::ZeroReference(i));
        }
        acc += ((r - e) / r).abs();
    }
    Ok(100.0 * acc / reference.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_bounds(&self, k: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.n_bins() as f64;
        (self.lo + k as f64 * w, if k + 1 == self.n_bins() { self.hi } else { self.lo + (k + 1) as f64 * w })
    }

    /// `(lower, upper, count)` per bin.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        (0..self.n_bins()).map(move |k| {
            let (a, b) = self.bin_bounds(k);
            (a, b, self.counts[k])
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Index of the fullest bin (first on ties).
    pub fn modal_bin(&self) -> usize {
        let mut best = 0;
        for (k, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = k;
            }
        }
        best
    }
}

/// Uniform bins over `[lo, hi]`; values outside are clamped into the end
/// bins and NaNs land in the first bin, so counts always sum to the input
/// length.
///
/// # Panics
/// If `n_bins == 0` or `!(lo < hi)`.
pub fn histogram(values: &[f64], n_bins: usize, lo: f64, hi: f64) -> Histogram {
    assert!(n_bins >= 1, "histogram needs at least one bin");
    assert!(lo < hi, "histogram range must satisfy lo < hi");
    let mut counts = vec![0u64; n_bins];
    let w = (hi - lo) / n_bins as f64;
    for &v in values {
        let k = libm::floor((v - lo) / w);
        let k = if k.is_nan() || k < 0.0 { 0 } else { (k as usize).min(n_bins - 1) };
        counts[k] += 1;
    }
    Histogram { lo, hi, counts }
}

/// Phase-allocation statistics compared between real and synthetic data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterSummary {
    /// Overall fraction of three-phase loads.
    pub p3: f64,
    pub phase_choice: PhaseTriple<f64>,
}

impl ParameterSummary {
    pub fn from_observed(obs: &ObservedNetwork) -> Self {
        ParameterSummary { p3: three_phase_fraction(obs), phase_choice: estimate_phase_choice(obs).p }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterRow {
    pub name: String,
    pub real: f64,
    pub synthetic: f64,
}

pub fn compare_parameters(real: &ParameterSummary, synth: &ParameterSummary) -> Vec<ParameterRow> {
    let row = |name: &str, real, synthetic| ParameterRow { name: name.into(), real, synthetic };
    let mut rows = vec![row("p3", real.p3, synth.p3)];
    for p in Phase::ALL {
        let name = alloc::format!("p_phase_{p}");
        rows.push(row(&name, real.phase_choice[p], synth.phase_choice[p]));
    }
    rows
}

/// How a MAPE figure was aggregated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapeMode {
    /// Paired per-load values.
    PerLoad,
    /// A single (real mean, synthetic mean) pair.
    MeanPair,
}

impl MapeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MapeMode::PerLoad => "per_load",
            MapeMode::MeanPair => "mean_pair",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMeanRow {
    pub phase: Phase,
    pub mean_real_kw: f64,
    pub mean_synth_kw: f64,
    pub mape_percent: f64,
    pub mode: MapeMode,
}

/// Per-phase mean active power of energized phases.
pub fn phase_means<'a>(loads: impl IntoIterator<Item = &'a crate::estimator::ObservedLoad>) -> PhaseTriple<f64> {
    let mut sum = [0.0; 3];
    let mut n = [0usize; 3];
    for l in loads {
        for p in l.phases.iter() {
            sum[p.index()] += l.p_kw[p];
            n[p.index()] += 1;
        }
    }
    PhaseTriple([0, 1, 2].map(|i| if n[i] == 0 { 0.0 } else { sum[i] / n[i] as f64 }))
}

/// Per-phase mean table with single-pair MAPE. Phases with a zero real mean
/// get an infinite MAPE unless the synthetic mean is zero too.
pub fn phase_mean_table(real: PhaseTriple<f64>, synth: PhaseTriple<f64>) -> Vec<PhaseMeanRow> {
    Phase::ALL
        .into_iter()
        .map(|p| {
            let mape_percent = match mape(&[real[p]], &[synth[p]]) {
                Ok(v) => v,
                Err(_) if synth[p] == 0.0 => 0.0,
                Err(_) => f64::INFINITY,
            };
            PhaseMeanRow {
                phase: p,
                mean_real_kw: real[p],
                mean_synth_kw: synth[p],
                mape_percent,
                mode: MapeMode::MeanPair,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramSeries {
    pub name: String,
    pub histogram: Histogram,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub phase_rows: Vec<PhaseMeanRow>,
    pub parameter_rows: Vec<ParameterRow>,
    /// Paired per-load MAPE of total load power, when the real and synthetic
    /// load lists line up bus for bus.
    pub per_load_total_mape: Option<f64>,
    pub histograms: Vec<HistogramSeries>,
}
