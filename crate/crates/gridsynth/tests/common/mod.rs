#![allow(dead_code)]

use std::path::Path;

use gridsynth::format::ParametersDocument;
use gridsynth::NetworkDocument;
use gridsynth_core::{
    generate_sample, Bus, DemandMoments, DistanceBinCurve, Line, LoadPoint, ModelParameters, NetworkTopology,
    PhaseChoiceProbs, PhaseTriple, PowerFactorTable, RatioParams, RngStream, SamplerOptions,
};

/// Random radial tree over buses `b0..b{n-1}` rooted at `b0`, with
/// `n_loads` loads on distinct non-source buses.
pub fn random_feeder(n: usize, n_loads: usize, rng: &mut RngStream) -> NetworkTopology {
    let id = |i: usize| format!("b{i}");
    let buses = (0..n).map(|i| Bus { id: id(i), x: Some(i as f64), y: Some(0.0) }).collect();
    let lines = (1..n)
        .map(|i| {
            let parent = (rng.next_u64() % i as u64) as usize;
            Line { from: id(parent), to: id(i), length_m: 1.0 + 49.0 * rng.uniform() }
        })
        .collect();
    let mut candidates: Vec<usize> = (1..n).collect();
    for k in (1..candidates.len()).rev() {
        candidates.swap(k, (rng.next_u64() % (k as u64 + 1)) as usize);
    }
    let mut chosen: Vec<usize> = candidates.into_iter().take(n_loads).collect();
    chosen.sort();
    let loads = chosen.into_iter().map(|i| LoadPoint { bus: id(i) }).collect();
    NetworkTopology::new(buses, lines, &id(0), 0.4, loads).unwrap()
}

pub fn p0() -> ModelParameters {
    ModelParameters {
        curve: DistanceBinCurve::from_conditional((0..20).map(|k| 0.3 - 0.01 * k as f64).collect()),
        phase_choice: PhaseChoiceProbs::new(0.3350, 0.3296, 0.3354),
        demand: DemandMoments::uniform(0.45, 0.15),
        ratios: RatioParams { mean: PhaseTriple::splat(1.0 / 3.0), concentration: 100.0 },
        pf_table: PowerFactorTable::default(),
    }
}

/// An observed network: one draw from `params` on `t`, stored as
/// observed loads.
pub fn observed_document(t: &NetworkTopology, params: &ModelParameters, seed: u64) -> NetworkDocument {
    let s = generate_sample(t, params, SamplerOptions::default(), seed, 0).unwrap();
    let mut doc = NetworkDocument::from_topology(t);
    doc.set_observed_loads(&s.observed_loads());
    doc
}

pub fn write_inputs(dir: &Path, n_buses: usize, n_loads: usize, seed: u64) {
    let mut rng = RngStream::from_seed(seed);
    let observed_t = random_feeder(n_buses, n_loads, &mut rng);
    let target_t = random_feeder(n_buses, n_loads, &mut rng);
    std::fs::write(dir.join("obs.json"), observed_document(&observed_t, &p0(), seed).to_json()).unwrap();
    std::fs::write(dir.join("topo.json"), NetworkDocument::from_topology(&target_t).to_json()).unwrap();
    std::fs::write(dir.join("p0.json"), ParametersDocument::from(&p0()).to_json()).unwrap();
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn tree_contents(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}
