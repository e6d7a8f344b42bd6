#![no_std]

//! Model core for generating synthetic unbalanced three-phase distribution
//! networks.
//!
//! The crate is `no_std` + `alloc`. It holds the radial feeder graph, the
//! parameter estimator, the hierarchical load sampler, phase-consistency
//! repair, a decoupled backward/forward sweep power flow and the comparison
//! metrics. File formats, parallel execution and the command line live in the
//! `gridsynth` crate.

extern crate alloc;

pub mod consistency;
pub mod dist;
pub mod estimator;
pub mod metrics;
pub mod phase;
pub mod powerflow;
pub mod rng;
pub mod sampler;
pub mod topology;

pub use consistency::{check_consistency, enforce_consistency, PhaseAssignment, Violation};
pub use estimator::{
    estimate_demand_moments, estimate_p3_curve, estimate_phase_choice, estimate_ratio_params, fit,
    CurveOptions, DemandMoments, DistanceBinCurve, EstimateError, ModelParameters, MomentSlot,
    ObservedLoad, ObservedNetwork, PhaseChoiceProbs, RatioParams,
};
pub use phase::{Phase, PhaseSet, PhaseTriple};
pub use powerflow::{run_power_flow, voltage_band_report, LineImpedance, PowerFlowError, VoltageSolution};
pub use rng::RngStream;
pub use sampler::{
    allocate_loads, generate, generate_sample, LoadDemand, PowerFactorTable, SampledLoad,
    SamplerOptions, SyntheticSample,
};
pub use topology::{Bus, Line, LoadPoint, NetworkTopology, TopologyError};
