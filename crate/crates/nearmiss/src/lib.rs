//! Scenario-based falsification workbench for driving controllers.
//!
//! `nearmiss` searches the parameter space of traffic scenarios for
//! configurations in which a driving controller collides or nearly collides
//! with another traffic participant. It ships:
//!
//! - a library of parameterized scenario templates ([`library::ScenarioLibrary`]),
//! - a deterministic fixed-step 2D simulator ([`sim::run_simulation`]),
//! - baseline controllers and a registry for user controllers ([`controller`]),
//! - uniform and genetic-algorithm samplers ([`sample`]),
//! - a min-distance/collision evaluator ([`eval::evaluate`]),
//! - bit-exact replay logs with verification and SVG rendering ([`replay`], [`render`]),
//! - a batch campaign runner and report writer ([`campaign::run_campaign`]).
//!
//! Every run is deterministic in its seed: the same campaign configuration
//! produces byte-identical artifacts regardless of worker count. See the
//! `examples/` directory for one runnable example per capability, and the
//! `nearmiss` binary for the command-line interface.

pub mod campaign;
pub mod controller;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod library;
pub mod render;
pub mod replay;
pub mod rng;
pub mod sample;
pub mod scenario;
pub mod sim;

pub use campaign::{run_campaign, summarize_dir, CampaignConfig, CampaignReport};
pub use controller::{Controller, ControllerRegistry, ControllerSpec, Observation};
pub use error::Error;
pub use eval::{evaluate, EvaluationResult};
pub use library::ScenarioLibrary;
pub use replay::{verify_replay, ReplayLog, ReplayVerdict};
pub use scenario::{ScenarioCategory, ScenarioConfig, ScenarioTemplate};
pub use sim::{run_simulation, Outcome, Trace, WorldState};
