//! Command line: `fit`, `generate`, `check`, `enforce`, `powerflow`,
//! `report` and `pipeline`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gridsynth_core::estimator::DEFAULT_BINS;
use gridsynth_core::powerflow::{PowerFlowOptions, DEFAULT_MAX_ITER, DEFAULT_R_OHM_PER_KM, DEFAULT_TOL, DEFAULT_X_OHM_PER_KM};
use gridsynth_core::sampler::{with_ratio_mean, BALANCED_RATIOS, UNBALANCED_RATIOS};
use gridsynth_core::{
    check_consistency, enforce_consistency, fit, run_power_flow, CurveOptions, LineImpedance, ModelParameters,
    NetworkTopology, SamplerOptions,
};

use crate::format::{LoadedSample, NetworkDocument, ParametersDocument};
use crate::fsio::{list_samples, sample_file_name, write_atomic};
use crate::{parallel, report};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "gridsynth", version, about = "Synthetic unbalanced three-phase load allocation for radial feeders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit model parameters from an observed network
    Fit(FitArgs),
    /// Draw synthetic samples onto a target topology
    Generate(GenerateArgs),
    /// List phase-consistency violations of a sample
    Check(CheckArgs),
    /// Repair phase consistency of a sample
    Enforce(EnforceArgs),
    /// Solve the per-phase power flow of a sample
    Powerflow(PowerflowArgs),
    /// Compare an observed network with a directory of samples
    Report(ReportArgs),
    /// fit, generate, powerflow and report in one run
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Ratio means (1/3, 1/3, 1/3)
    Balanced,
    /// Ratio means (0.1, 0.6, 0.3)
    Unbalanced,
    /// Ratio means from the parameters file
    File,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Observed network document with `observed_loads`
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Fill empty distance bins by linear interpolation
    #[arg(long)]
    pub interpolate_empty: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Scenario::File)]
    pub scenario: Scenario,
    /// Draw a power factor per load instead of one per sample
    #[arg(long)]
    pub per_load_pf: bool,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub sample: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnforceArgs {
    #[arg(long)]
    pub sample: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

fn parse_band(s: &str) -> Result<Band, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if !(lo < hi) {
        return Err("lower bound must be below upper bound".into());
    }
    Ok(Band { lo, hi })
}

#[derive(Debug, Args)]
pub struct PowerFlowArgs {
    #[arg(long, default_value_t = DEFAULT_R_OHM_PER_KM)]
    pub r_ohm_km: f64,
    #[arg(long, default_value_t = DEFAULT_X_OHM_PER_KM)]
    pub x_ohm_km: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Voltage band in p.u. as LO:HI
    #[arg(long, value_parser = parse_band, default_value = "0.95:1.04")]
    pub band: Band,
}

impl PowerFlowArgs {
    fn impedance(&self) -> Result<LineImpedance> {
        Ok(LineImpedance::new(self.r_ohm_km, self.x_ohm_km)?)
    }

    fn options(&self) -> PowerFlowOptions {
        PowerFlowOptions { tol: self.tol, max_iter: self.max_iter, ..Default::default() }
    }
}

#[derive(Debug, Args)]
pub struct PowerflowArgs {
    #[arg(long)]
    pub sample: PathBuf,
    /// CSV with columns bus,phase,v_pu,in_band
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub pf: PowerFlowArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Observed network document with `observed_loads`
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub synthetic_dir: PathBuf,
    /// Mean table CSV; a JSON twin is written beside it
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for gnuplot histogram data
    #[arg(long)]
    pub histograms: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub observed: PathBuf,
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long, default_value = "gridsynth-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub pf: PowerFlowArgs,
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code: 0 success, 1 failure, 2 usage error.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Fit(a) => fit_cmd(&a.input, a.bins, a.interpolate_empty, &a.out).map(|_| true),
        Command::Generate(a) => generate_cmd(&a.topology, &a.params, &a.out_dir, &a.sampling).map(|_| true),
        Command::Check(a) => check_cmd(&a.sample),
        Command::Enforce(a) => enforce_cmd(&a.sample, &a.out).map(|_| true),
        Command::Powerflow(a) => powerflow_cmd(&a.sample, a.report.as_deref(), &a.pf).map(|_| true),
        Command::Report(a) => report_cmd(&a.real, &a.synthetic_dir, &a.out, a.histograms.as_deref()).map(|_| true),
        Command::Pipeline(a) => pipeline_cmd(&a).map(|_| true),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_network(path: &Path) -> Result<NetworkDocument> {
    NetworkDocument::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn read_sample(path: &Path) -> Result<LoadedSample> {
    LoadedSample::from_document(&read_network(path)?).with_context(|| format!("in {}", path.display()))
}

fn timing(stage: &str, start: Instant, detail: &str) {
    eprintln!("[gridsynth] {stage}: {detail} in {:.3} s", start.elapsed().as_secs_f64());
}

fn fit_cmd(input: &Path, bins: usize, interpolate_empty: bool, out: &Path) -> Result<ModelParameters> {
    let obs = read_network(input)?.observed_network().with_context(|| format!("in {}", input.display()))?;
    let start = Instant::now();
    let params = fit(&obs, CurveOptions { n_bins: bins, interpolate_empty })?;
    timing("fit", start, &format!("{} loads", obs.loads().len()));
    write(out, &ParametersDocument::from(&params).to_json())?;
    Ok(params)
}

fn scenario_params(params: ModelParameters, scenario: Scenario) -> ModelParameters {
    match scenario {
        Scenario::Balanced => with_ratio_mean(params, BALANCED_RATIOS),
        Scenario::Unbalanced => with_ratio_mean(params, UNBALANCED_RATIOS),
        Scenario::File => params,
    }
}

fn generate_cmd(topology: &Path, params: &Path, out_dir: &Path, s: &SamplingArgs) -> Result<()> {
    let t = read_network(topology)?.topology().with_context(|| format!("in {}", topology.display()))?;
    let params = ParametersDocument::parse(&read(params)?)
        .and_then(|d| d.to_parameters())
        .with_context(|| format!("in {}", params.display()))?;
    generate_into(&t, &scenario_params(params, s.scenario), out_dir, s, |_, _| Ok(()))
}

/// Writes every sample to `out_dir`, calling `also` on each sample document
/// and its index.
fn generate_into<F>(t: &NetworkTopology, params: &ModelParameters, out_dir: &Path, s: &SamplingArgs, also: F) -> Result<()>
where
    F: Fn(u64, &NetworkDocument) -> Result<()> + Sync,
{
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let pool = parallel::pool(s.jobs)?;
    let opts = SamplerOptions { per_load_pf: s.per_load_pf };
    let start = Instant::now();
    parallel::for_each_sample(&pool, t, params, opts, s.samples, s.seed, |sample| -> Result<()> {
        let doc = NetworkDocument::from_sample(t, &sample);
        write(&out_dir.join(sample_file_name(sample.sample_index)), &doc.to_json())?;
        also(sample.sample_index, &doc)
    })?;
    timing("generate", start, &format!("{} samples on {} buses", s.samples, t.bus_count()));
    Ok(())
}

fn check_cmd(path: &Path) -> Result<bool> {
    let loaded = read_sample(path)?;
    let violations = check_consistency(&loaded.topology, &loaded.sample.bus_phases);
    let a = &loaded.sample.bus_phases;
    for v in &violations {
        let set = |bus: &str| a.get(bus).map(|s| s.to_string()).unwrap_or_default();
        println!(
            "bus {} ({}) is not covered by upstream bus {} ({})",
            v.downstream,
            set(&v.downstream),
            v.upstream,
            set(&v.upstream)
        );
    }
    eprintln!("[gridsynth] check: {} violations", violations.len());
    Ok(violations.is_empty())
}

fn enforce_cmd(path: &Path, out: &Path) -> Result<()> {
    let mut doc = read_network(path)?;
    let loaded = LoadedSample::from_document(&doc).with_context(|| format!("in {}", path.display()))?;
    doc.set_bus_phases(&enforce_consistency(&loaded.topology, &loaded.sample.bus_phases));
    write(out, &doc.to_json())
}

/// Power-flow CSV of one sample and the number of out-of-band phases.
fn powerflow_csv(loaded: &LoadedSample, pf: &PowerFlowArgs) -> Result<(String, usize)> {
    let mut sample = loaded.sample.clone();
    if !loaded.repaired {
        sample.bus_phases = enforce_consistency(&loaded.topology, &sample.bus_phases);
    }
    let v = run_power_flow(&loaded.topology, &sample, &pf.impedance()?, &pf.options())?;
    let mut csv = String::from("bus,phase,v_pu,in_band\n");
    let mut outside = 0;
    for (b, id) in v.bus_ids.iter().enumerate() {
        for p in v.energized[b].iter() {
            let m = v.magnitude(b, p);
            let in_band = m >= pf.band.lo && m <= pf.band.hi;
            outside += usize::from(!in_band);
            writeln!(csv, "{id},{p},{m},{in_band}").unwrap();
        }
    }
    Ok((csv, outside))
}

fn powerflow_cmd(path: &Path, report: Option<&Path>, pf: &PowerFlowArgs) -> Result<()> {
    let loaded = read_sample(path)?;
    let start = Instant::now();
    let (csv, outside) = powerflow_csv(&loaded, pf)?;
    timing("powerflow", start, &format!("{} buses", loaded.topology.bus_count()));
    eprintln!("[gridsynth] powerflow: {outside} phase voltages outside {}:{}", pf.band.lo, pf.band.hi);
    match report {
        Some(out) => write(out, csv.as_bytes()),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn report_cmd(real: &Path, synthetic_dir: &Path, out: &Path, histograms: Option<&Path>) -> Result<()> {
    let real_obs = read_network(real)?.observed_network().with_context(|| format!("in {}", real.display()))?;
    let files = list_samples(synthetic_dir).with_context(|| format!("listing {}", synthetic_dir.display()))?;
    if files.is_empty() {
        bail!("no sample_<i>.json files in {}", synthetic_dir.display());
    }
    let start = Instant::now();
    let mut topology: Option<NetworkTopology> = None;
    let mut samples = Vec::with_capacity(files.len());
    for (_, path) in &files {
        let doc = read_network(path)?;
        let t = doc.topology().with_context(|| format!("in {}", path.display()))?;
        match &topology {
            None => topology = Some(t),
            Some(first) if *first != t => bail!("{} has a different topology from the other samples", path.display()),
            Some(_) => {}
        }
        samples.push(doc.observed_loads().with_context(|| format!("in {}", path.display()))?.unwrap_or_default());
    }
    let set = report::SyntheticSet { topology: topology.expect("at least one sample"), samples };
    let cmp = report::compare(&real_obs, &set)?;
    write(out, report::mean_table_csv(&cmp).as_bytes())?;
    write(&report::json_twin(out), &report::report_json(&cmp, files.len()))?;
    if let Some(dir) = histograms {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for h in &cmp.histograms {
            write(&dir.join(format!("{}.dat", h.name)), report::histogram_dat(h).as_bytes())?;
        }
    }
    timing("report", start, &format!("{} samples", files.len()));
    Ok(())
}

/// Layout: `params.json`, `samples/`, `powerflow/`, `report.csv`,
/// `report.json`, `hist/`.
fn pipeline_cmd(a: &PipelineArgs) -> Result<()> {
    let total = Instant::now();
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let params = fit_cmd(&a.observed, a.bins, false, &a.out_dir.join("params.json"))?;
    let t = read_network(&a.topology)?.topology().with_context(|| format!("in {}", a.topology.display()))?;
    let samples_dir = a.out_dir.join("samples");
    let pf_dir = a.out_dir.join("powerflow");
    std::fs::create_dir_all(&pf_dir).with_context(|| format!("creating {}", pf_dir.display()))?;
    let params = scenario_params(params, a.sampling.scenario);
    generate_into(&t, &params, &samples_dir, &a.sampling, |i, doc| {
        let (csv, _) = powerflow_csv(&LoadedSample::from_document(doc)?, &a.pf)
            .with_context(|| format!("power flow of sample {i}"))?;
        write(&pf_dir.join(format!("sample_{i}.csv")), csv.as_bytes())
    })?;
    report_cmd(&a.observed, &samples_dir, &a.out_dir.join("report.csv"), Some(&a.out_dir.join("hist")))?;
    timing("pipeline", total, "all stages");
    Ok(())
}
