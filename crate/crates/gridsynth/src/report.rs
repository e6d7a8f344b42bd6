//! Real-versus-synthetic comparison report: CSV mean table, JSON twin and
//! gnuplot histogram data.

use std::fmt::Write as _;
use std::path::Path;

use gridsynth_core::metrics::{
    compare_parameters, histogram, mape, phase_mean_table, phase_means, ComparisonReport, HistogramSeries,
    ParameterSummary,
};
use gridsynth_core::{EstimateError, NetworkTopology, ObservedLoad, ObservedNetwork, Phase};
use serde::Serialize;

pub const HISTOGRAM_BINS: usize = 40;

/// Generated samples sharing one topology.
#[derive(Clone, Debug)]
pub struct SyntheticSet {
    pub topology: NetworkTopology,
    pub samples: Vec<Vec<ObservedLoad>>,
}

impl SyntheticSet {
    pub fn pooled(&self) -> Result<ObservedNetwork, EstimateError> {
        let loads = self.samples.iter().flatten().cloned().collect();
        ObservedNetwork::new(self.topology.clone(), loads)
    }
}

fn active_power(loads: &[ObservedLoad], p: Phase) -> Vec<f64> {
    loads.iter().filter(|l| l.phases.contains(p)).map(|l| l.p_kw[p]).collect()
}

/// MAPE between each real load's total power and its mean over the
/// samples, when every sample lists loads on the same buses as the real
/// network.
fn per_load_total_mape(real: &ObservedNetwork, synth: &SyntheticSet) -> Option<f64> {
    let n = real.loads().len();
    let aligned = !synth.samples.is_empty()
        && synth.samples.iter().all(|s| {
            s.len() == n && s.iter().zip(real.loads()).all(|(a, b)| a.bus == b.bus)
        });
    if !aligned {
        return None;
    }
    let reference: Vec<f64> = real.loads().iter().map(|l| l.total_kw()).collect();
    let estimate: Vec<f64> = (0..n)
        .map(|j| synth.samples.iter().map(|s| s[j].total_kw()).sum::<f64>() / synth.samples.len() as f64)
        .collect();
    mape(&reference, &estimate).ok()
}

pub fn compare(real: &ObservedNetwork, synth: &SyntheticSet) -> Result<ComparisonReport, EstimateError> {
    let pooled = synth.pooled()?;
    let phase_rows = phase_mean_table(phase_means(real.loads()), phase_means(pooled.loads()));
    let parameter_rows =
        compare_parameters(&ParameterSummary::from_observed(real), &ParameterSummary::from_observed(&pooled));
    let mut histograms = Vec::new();
    for p in Phase::ALL {
        let r = active_power(real.loads(), p);
        let s = active_power(pooled.loads(), p);
        let hi = r.iter().chain(&s).copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
        let hi = if hi > 0.0 { hi } else { 1.0 };
        for (tag, values) in [("real", &r), ("synth", &s)] {
            histograms.push(HistogramSeries {
                name: format!("p_kw_{p}_{tag}"),
                histogram: histogram(values, HISTOGRAM_BINS, 0.0, hi),
            });
        }
    }
    Ok(ComparisonReport { phase_rows, parameter_rows, per_load_total_mape: per_load_total_mape(real, synth), histograms })
}

pub fn mean_table_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("phase,mean_kw_real,mean_kw_synth,mape_percent\n");
    for r in &report.phase_rows {
        writeln!(out, "{},{},{},{}", r.phase, r.mean_real_kw, r.mean_synth_kw, r.mape_percent).unwrap();
    }
    out
}

#[derive(Serialize)]
struct PhaseRowJson {
    phase: String,
    mean_kw_real: f64,
    mean_kw_synth: f64,
    mape_percent: f64,
}

#[derive(Serialize)]
struct ParameterRowJson<'a> {
    name: &'a str,
    real: f64,
    synthetic: f64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    mape_mode: &'static str,
    n_samples: usize,
    phase_means: Vec<PhaseRowJson>,
    parameters: Vec<ParameterRowJson<'a>>,
    per_load_total_mape: Option<f64>,
}

pub fn report_json(report: &ComparisonReport, n_samples: usize) -> Vec<u8> {
    let doc = ReportJson {
        mape_mode: report.phase_rows.first().map_or("mean_pair", |r| r.mode.as_str()),
        n_samples,
        phase_means: report
            .phase_rows
            .iter()
            .map(|r| PhaseRowJson {
                phase: r.phase.to_string(),
                mean_kw_real: r.mean_real_kw,
                mean_kw_synth: r.mean_synth_kw,
                mape_percent: r.mape_percent,
            })
            .collect(),
        parameters: report
            .parameter_rows
            .iter()
            .map(|r| ParameterRowJson { name: &r.name, real: r.real, synthetic: r.synthetic })
            .collect(),
        per_load_total_mape: report.per_load_total_mape,
    };
    crate::format::to_pretty_json(&doc)
}

/// Gnuplot data: one `lo hi count` row per bin.
pub fn histogram_dat(series: &HistogramSeries) -> String {
    let h = &series.histogram;
    let mut out = format!("# {} n={}\n# lo hi count\n", series.name, h.total());
    for (lo, hi, count) in h.rows() {
        writeln!(out, "{lo} {hi} {count}").unwrap();
    }
    out
}

/// Path of the JSON twin written next to the CSV.
pub fn json_twin(csv: &Path) -> std::path::PathBuf {
    let twin = csv.with_extension("json");
    if twin == csv {
        let mut s = csv.as_os_str().to_owned();
        s.push(".json");
        s.into()
    } else {
        twin
    }
}
