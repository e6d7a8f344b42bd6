//! JSON documents for networks, observed and sampled loads, and model
//! parameters.

use std::collections::BTreeMap;

use gridsynth_core::estimator::DistanceBinCurve;
use gridsynth_core::sampler::{PfEntry, PfTableError};
use gridsynth_core::{
    Bus, DemandMoments, EstimateError, Line, LoadPoint, ModelParameters, MomentSlot, NetworkTopology,
    ObservedLoad, ObservedNetwork, Phase, PhaseAssignment, PhaseChoiceProbs, PhaseSet, PhaseTriple,
    PowerFactorTable, RatioParams, SyntheticSample, TopologyError,
};
use gridsynth_core::{LoadDemand, SampledLoad};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("line {line} (`{from}` - `{to}`) has no length_m and its endpoints lack coordinates")]
    MissingLength { line: usize, from: String, to: String },
    #[error("unknown phase `{0}`")]
    UnknownPhase(String),
    #[error("{what} lists phase {phase} twice")]
    DuplicatePhase { what: String, phase: Phase },
    #[error("document has no observed_loads")]
    NoObservedLoads,
    #[error("curve counts must have one [n3, n] pair per bin")]
    Counts,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("invalid power factor table: {0}")]
    PfTable(#[from] PfTableError),
}

/// Topology document, optionally carrying observed loads and, for generated
/// samples, bus phase sets and sample metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub buses: Vec<BusRecord>,
    pub lines: Vec<LineRecord>,
    pub feeder: FeederRecord,
    pub loads: Vec<LoadRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_loads: Option<Vec<ObservedLoadRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bus_phases: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeederRecord {
    pub source_bus: String,
    pub base_kv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadRecord {
    pub bus: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservedLoadRecord {
    pub bus: String,
    pub phases: Vec<String>,
    #[serde(default)]
    pub p_kw: PhaseValues,
    #[serde(default)]
    pub q_kvar: PhaseValues,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseValues {
    #[serde(rename = "A", default)]
    pub a: f64,
    #[serde(rename = "B", default)]
    pub b: f64,
    #[serde(rename = "C", default)]
    pub c: f64,
}

impl From<PhaseTriple<f64>> for PhaseValues {
    fn from(t: PhaseTriple<f64>) -> Self {
        PhaseValues { a: t[Phase::A], b: t[Phase::B], c: t[Phase::C] }
    }
}

impl From<PhaseValues> for PhaseTriple<f64> {
    fn from(v: PhaseValues) -> Self {
        PhaseTriple::new(v.a, v.b, v.c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub seed: u64,
    pub index: u64,
    pub pf: f64,
}

pub fn phase_names(set: PhaseSet) -> Vec<String> {
    set.iter().map(|p| p.as_str().to_string()).collect()
}

pub fn parse_phase_set(names: &[String], what: impl FnOnce() -> String) -> Result<PhaseSet, FormatError> {
    let mut set = PhaseSet::EMPTY;
    for name in names {
        let p: Phase = name.parse().map_err(|_| FormatError::UnknownPhase(name.clone()))?;
        if set.contains(p) {
            return Err(FormatError::DuplicatePhase { what: what(), phase: p });
        }
        set.insert(p);
    }
    Ok(set)
}

impl NetworkDocument {
    pub fn parse(bytes: &[u8]) -> Result<Self, FormatError> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn from_topology(t: &NetworkTopology) -> Self {
        NetworkDocument {
            buses: t.buses().iter().map(|b| BusRecord { id: b.id.clone(), x: b.x, y: b.y }).collect(),
            lines: t
                .lines()
                .iter()
                .map(|l| LineRecord { from: l.from.clone(), to: l.to.clone(), length_m: Some(l.length_m) })
                .collect(),
            feeder: FeederRecord { source_bus: t.source_bus().to_string(), base_kv: t.base_kv() },
            loads: t.loads().iter().map(|l| LoadRecord { bus: l.bus.clone() }).collect(),
            observed_loads: None,
            bus_phases: None,
            sample: None,
        }
    }

    /// Sample file: the target topology plus the sampled loads as observed
    /// loads, so the file can be refitted directly.
    pub fn from_sample(t: &NetworkTopology, s: &SyntheticSample) -> Self {
        let mut doc = NetworkDocument::from_topology(t);
        doc.set_observed_loads(&s.observed_loads());
        doc.set_bus_phases(&s.bus_phases);
        doc.sample = Some(SampleRecord { seed: s.seed, index: s.sample_index, pf: s.pf });
        doc
    }

    pub fn set_observed_loads(&mut self, loads: &[ObservedLoad]) {
        self.observed_loads = Some(
            loads
                .iter()
                .map(|l| ObservedLoadRecord {
                    bus: l.bus.clone(),
                    phases: phase_names(l.phases),
                    p_kw: l.p_kw.into(),
                    q_kvar: l.q_kvar.into(),
                })
                .collect(),
        );
    }

    pub fn set_bus_phases(&mut self, a: &PhaseAssignment) {
        self.bus_phases = Some(a.iter().map(|(bus, set)| (bus.to_string(), phase_names(set))).collect());
    }

    pub fn topology(&self) -> Result<NetworkTopology, FormatError> {
        let coords: BTreeMap<&str, (Option<f64>, Option<f64>)> =
            self.buses.iter().map(|b| (b.id.as_str(), (b.x, b.y))).collect();
        let mut lines = Vec::with_capacity(self.lines.len());
        for (i, l) in self.lines.iter().enumerate() {
            let length_m = match l.length_m {
                Some(v) => v,
                None => {
                    for end in [&l.from, &l.to] {
                        if !coords.contains_key(end.as_str()) {
                            return Err(TopologyError::DanglingLine { line: i, bus: end.clone() }.into());
                        }
                    }
                    match (coords[l.from.as_str()], coords[l.to.as_str()]) {
                        ((Some(x1), Some(y1)), (Some(x2), Some(y2))) => (x2 - x1).hypot(y2 - y1),
                        _ => {
                            return Err(FormatError::MissingLength {
                                line: i,
                                from: l.from.clone(),
                                to: l.to.clone(),
                            })
                        }
                    }
                }
            };
            lines.push(Line { from: l.from.clone(), to: l.to.clone(), length_m });
        }
        let buses = self.buses.iter().map(|b| Bus { id: b.id.clone(), x: b.x, y: b.y }).collect();
        let loads = self.loads.iter().map(|l| LoadPoint { bus: l.bus.clone() }).collect();
        Ok(NetworkTopology::new(buses, lines, &self.feeder.source_bus, self.feeder.base_kv, loads)?)
    }

    pub fn observed_loads(&self) -> Result<Option<Vec<ObservedLoad>>, FormatError> {
        let Some(records) = &self.observed_loads else { return Ok(None) };
        records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(ObservedLoad {
                    bus: r.bus.clone(),
                    phases: parse_phase_set(&r.phases, || format!("observed load {i}"))?,
                    p_kw: r.p_kw.into(),
                    q_kvar: r.q_kvar.into(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn bus_phases(&self) -> Result<Option<PhaseAssignment>, FormatError> {
        let Some(map) = &self.bus_phases else { return Ok(None) };
        map.iter()
            .map(|(bus, names)| Ok((bus.clone(), parse_phase_set(names, || format!("bus `{bus}`"))?)))
            .collect::<Result<PhaseAssignment, _>>()
            .map(Some)
    }

    pub fn observed_network(&self) -> Result<ObservedNetwork, FormatError> {
        let loads = self.observed_loads()?.ok_or(FormatError::NoObservedLoads)?;
        Ok(ObservedNetwork::new(self.topology()?, loads)?)
    }

    pub fn to_json(&self) -> Vec<u8> {
        to_pretty_json(self)
    }
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("documents serialize infallibly");
    out.push(b'\n');
    out
}

/// A sample document as a [`SyntheticSample`] on its topology. Without
/// stored `bus_phases` the assignment is the union of load phases per load
/// bus and `repaired` is false.
pub struct LoadedSample {
    pub topology: NetworkTopology,
    pub sample: SyntheticSample,
    pub repaired: bool,
}

impl LoadedSample {
    pub fn from_document(doc: &NetworkDocument) -> Result<Self, FormatError> {
        let topology = doc.topology()?;
        let meta = doc.sample.unwrap_or(SampleRecord { seed: 0, index: 0, pf: f64::NAN });
        let mut loads = Vec::new();
        let mut unions = PhaseAssignment::new();
        for l in doc.observed_loads()?.unwrap_or_default() {
            let bus_index = topology.index_of(&l.bus).ok_or_else(|| TopologyError::UnknownBus(l.bus.clone()))?;
            unions.widen(&l.bus, l.phases);
            let (p, q) = (l.p_kw.sum(), l.q_kvar.sum());
            let pf = if p > 0.0 { p / p.hypot(q) } else { 1.0 };
            loads.push(SampledLoad {
                bus: l.bus,
                bus_index,
                phases: l.phases,
                demand: LoadDemand { p_kw: l.p_kw, q_kvar: l.q_kvar },
                pf,
            });
        }
        let (bus_phases, repaired) = match doc.bus_phases()? {
            Some(a) => {
                if let Some((bus, _)) = a.iter().find(|(bus, _)| topology.index_of(bus).is_none()) {
                    return Err(TopologyError::UnknownBus(bus.to_string()).into());
                }
                (a, true)
            }
            None => (unions, false),
        };
        let sample = SyntheticSample { seed: meta.seed, sample_index: meta.index, pf: meta.pf, loads, bus_phases };
        Ok(LoadedSample { topology, sample, repaired })
    }
}

/// Parses and validates a topology document.
pub fn load_topology(bytes: &[u8]) -> Result<NetworkTopology, FormatError> {
    NetworkDocument::parse(bytes)?.topology()
}

pub fn serialize_topology(t: &NetworkTopology) -> Vec<u8> {
    NetworkDocument::from_topology(t).to_json()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersDocument {
    pub curve: CurveRecord,
    pub phase_choice: PhaseValues,
    pub demand: DemandRecord,
    pub ratios: RatiosRecord,
    pub pf_table: Vec<PfRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub bin_edges: Vec<f64>,
    pub conditional_p3: Vec<f64>,
    pub joint_mass: Vec<f64>,
    /// `[three_phase, total]` per bin.
    pub counts: Vec<[u64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentRecord {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerPhaseMoments {
    #[serde(rename = "A")]
    pub a: MomentRecord,
    #[serde(rename = "B")]
    pub b: MomentRecord,
    #[serde(rename = "C")]
    pub c: MomentRecord,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandRecord {
    pub three_phase: MomentRecord,
    pub per_phase: PerPhaseMoments,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatiosRecord {
    pub mean: PhaseValues,
    pub concentration: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfRecord {
    pub threshold: f64,
    pub pf: f64,
}

fn moment_record(m: MomentSlot) -> MomentRecord {
    MomentRecord { mu: m.mu, sigma: m.sigma }
}

fn moment_slot(m: MomentRecord) -> MomentSlot {
    MomentSlot { mu: m.mu, sigma: m.sigma }
}

impl From<&ModelParameters> for ParametersDocument {
    fn from(p: &ModelParameters) -> Self {
        ParametersDocument {
            curve: CurveRecord {
                bin_edges: p.curve.bin_edges.clone(),
                conditional_p3: p.curve.conditional_p3.clone(),
                joint_mass: p.curve.joint_mass.clone(),
                counts: p.curve.counts.iter().map(|&(n3, n)| [n3, n]).collect(),
            },
            phase_choice: p.phase_choice.p.into(),
            demand: DemandRecord {
                three_phase: moment_record(p.demand.three_phase),
                per_phase: PerPhaseMoments {
                    a: moment_record(p.demand.per_phase[Phase::A]),
                    b: moment_record(p.demand.per_phase[Phase::B]),
                    c: moment_record(p.demand.per_phase[Phase::C]),
                },
            },
            ratios: RatiosRecord { mean: p.ratios.mean.into(), concentration: p.ratios.concentration },
            pf_table: p.pf_table.entries.iter().map(|e| PfRecord { threshold: e.threshold, pf: e.pf }).collect(),
        }
    }
}

impl ParametersDocument {
    pub fn parse(bytes: &[u8]) -> Result<Self, FormatError> {
        Ok(serde_json::from_slice(bytes)?)
    }

    /// Converts to validated model parameters. Empty `counts` are accepted
    /// for hand-written curves.
    pub fn to_parameters(&self) -> Result<ModelParameters, FormatError> {
        let n = self.curve.conditional_p3.len();
        let counts = match self.curve.counts.len() {
            0 => vec![(0, 0); n],
            k if k == n => self.curve.counts.iter().map(|c| (c[0], c[1])).collect(),
            _ => return Err(FormatError::Counts),
        };
        let pp = &self.demand.per_phase;
        let params = ModelParameters {
            curve: DistanceBinCurve {
                bin_edges: self.curve.bin_edges.clone(),
                conditional_p3: self.curve.conditional_p3.clone(),
                joint_mass: self.curve.joint_mass.clone(),
                counts,
            },
            phase_choice: PhaseChoiceProbs { p: self.phase_choice.into() },
            demand: DemandMoments {
                three_phase: moment_slot(self.demand.three_phase),
                per_phase: PhaseTriple([moment_slot(pp.a), moment_slot(pp.b), moment_slot(pp.c)]),
            },
            ratios: RatioParams { mean: self.ratios.mean.into(), concentration: self.ratios.concentration },
            pf_table: PowerFactorTable::new(
                self.pf_table.iter().map(|e| PfEntry { threshold: e.threshold, pf: e.pf }).collect(),
            )?,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> Vec<u8> {
        to_pretty_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = r#"{
        "buses": [{"id": "f"}, {"id": "n1"}, {"id": "n2"}],
        "lines": [{"from": "f", "to": "n1", "length_m": 100}, {"from": "n1", "to": "n2", "length_m": 100}],
        "feeder": {"source_bus": "f", "base_kv": 0.4},
        "loads": [{"bus": "n2"}]
    }"#;

    #[test]
    fn chain_document() {
        let t = load_topology(CHAIN.as_bytes()).unwrap();
        assert_eq!(t.bus_count(), 3);
        assert_eq!(t.lines().len(), 2);
        assert_eq!(t.loads().len(), 1);
    }

    #[test]
    fn triangle_is_rejected() {
        let doc = r#"{
            "buses": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
            "lines": [{"from": "a", "to": "b", "length_m": 1}, {"from": "b", "to": "c", "length_m": 1},
                      {"from": "c", "to": "a", "length_m": 1}],
            "feeder": {"source_bus": "a", "base_kv": 0.4},
            "loads": []
        }"#;
        let err = load_topology(doc.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("cycle detected"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let doc = CHAIN.replace("\"loads\"", "\"colour\": 1, \"loads\"");
        assert!(matches!(load_topology(doc.as_bytes()), Err(FormatError::Parse(_))));
        let doc = CHAIN.replace("{\"id\": \"f\"}", "{\"id\": \"f\", \"z\": 3}");
        assert!(matches!(load_topology(doc.as_bytes()), Err(FormatError::Parse(_))));
    }

    #[test]
    fn missing_length_uses_coordinates() {
        let doc = r#"{
            "buses": [{"id": "f", "x": 0, "y": 0}, {"id": "n", "x": 30, "y": 40}],
            "lines": [{"from": "f", "to": "n"}],
            "feeder": {"source_bus": "f", "base_kv": 0.4},
            "loads": []
        }"#;
        assert_eq!(load_topology(doc.as_bytes()).unwrap().lines()[0].length_m, 50.0);
        let doc = doc.replace(", \"x\": 30, \"y\": 40", "");
        match load_topology(doc.as_bytes()) {
            Err(FormatError::MissingLength { line: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_phase_names() {
        let doc = CHAIN.replace(
            "\"loads\": [{\"bus\": \"n2\"}]",
            "\"loads\": [], \"observed_loads\": [{\"bus\": \"n2\", \"phases\": [\"A\", \"D\"]}]",
        );
        let d = NetworkDocument::parse(doc.as_bytes()).unwrap();
        assert!(matches!(d.observed_loads(), Err(FormatError::UnknownPhase(p)) if p == "D"));
    }

    #[test]
    fn parameters_round_trip() {
        let p = ModelParameters {
            curve: DistanceBinCurve::from_conditional(vec![0.2, 0.1]),
            phase_choice: PhaseChoiceProbs::new(0.3350, 0.3296, 0.3354),
            demand: DemandMoments::uniform(0.45, 0.15),
            ratios: RatioParams { mean: PhaseTriple::new(0.1, 0.6, 0.3), concentration: 100.0 },
            pf_table: PowerFactorTable::default(),
        };
        let bytes = ParametersDocument::from(&p).to_json();
        let back = ParametersDocument::parse(&bytes).unwrap().to_parameters().unwrap();
        assert_eq!(back, p);
    }
}
