//! The driver-under-test abstraction and the built-in baseline controllers.
//!
//! A controller is a pure function from (state, observation) to (command,
//! state): no hidden clock, no ambient randomness. Whatever randomness a
//! controller wants must flow through the RNG in its [`ControllerState`],
//! which is seeded from the scenario configuration, so replaying a run
//! reproduces every decision.

use crate::error::Error;
use crate::geometry::Polyline;
use crate::rng::Rng64;
use crate::sim::{ActorState, Command};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Controller selection plus its tuning parameters, as stored in campaign
/// configs and replay logs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerSpec {
    pub name: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl ControllerSpec {
    pub fn named(name: &str) -> Self {
        ControllerSpec {
            name: name.to_string(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str, default: f64) -> f64 {
        self.parameters.get(key).copied().unwrap_or(default)
    }
}

/// Explicitly threaded controller state: a seeded RNG plus scratch memory.
/// The built-in controllers are stateless and pass it through untouched.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerState {
    pub rng: Rng64,
    pub memory: Vec<f64>,
}

impl ControllerState {
    pub fn new(seed: u64) -> Self {
        ControllerState {
            rng: Rng64::new(seed),
            memory: Vec::new(),
        }
    }
}

/// What a controller sees at one frame: its own state, every actor within
/// the visibility range, and its planned route.
pub struct Observation<'w> {
    pub time: f64,
    pub ego: &'w ActorState,
    /// `(state, footprint radius)` for each actor within visibility.
    pub visible_actors: Vec<(&'w ActorState, f64)>,
    /// Remaining arc length of the ego route.
    pub route_remaining: f64,
    pub ego_route: &'w Polyline,
}

/// The observation-to-command contract every driver under test satisfies.
pub trait Controller: Send + Sync {
    fn decide(
        &self,
        spec: &ControllerSpec,
        state: &ControllerState,
        observation: &Observation<'_>,
    ) -> (Command, ControllerState);
}

/// Built-in baseline controllers.
pub mod builtin {
    use super::*;

    pub const DEFAULT_TARGET_SPEED: f64 = 6.5;
    pub const DEFAULT_REACTION_DISTANCE: f64 = 25.0;
    /// Half-width of the corridor ahead in which an actor counts as "ahead".
    pub const CORRIDOR_HALF_WIDTH: f64 = 2.0;
    /// Proportional speed gain, 1/s.
    const SPEED_GAIN: f64 = 1.0;

    fn speed_tracking(spec: &ControllerSpec, ego_speed: f64) -> Command {
        let target = spec.get("target_speed", DEFAULT_TARGET_SPEED);
        let accel = (SPEED_GAIN * (target - ego_speed))
            .clamp(Command::MIN_ACCELERATION, Command::MAX_ACCELERATION);
        Command::new(accel)
    }

    /// Holds `target_speed` with a proportional controller and never reacts
    /// to anything. Unsafe by construction.
    pub struct ConstantSpeed;

    impl Controller for ConstantSpeed {
        fn decide(
            &self,
            spec: &ControllerSpec,
            state: &ControllerState,
            observation: &Observation<'_>,
        ) -> (Command, ControllerState) {
            (speed_tracking(spec, observation.ego.speed), state.clone())
        }
    }

    /// Brakes hard when any visible actor is ahead: its position projects
    /// onto the ego route within the next `reaction_distance` meters of arc
    /// length at a lateral offset below [`CORRIDOR_HALF_WIDTH`]. Otherwise
    /// tracks `target_speed`. Safe in clear weather; falsifiable by late
    /// corridor entries and by high cloudiness hiding actors.
    pub struct ReactiveBraking;

    impl ReactiveBraking {
        fn threat_ahead(spec: &ControllerSpec, observation: &Observation<'_>) -> bool {
            let reaction = spec.get("reaction_distance", DEFAULT_REACTION_DISTANCE);
            let ego_arc = observation.ego.route_progress;
            observation.visible_actors.iter().any(|(actor, _)| {
                let projection = observation.ego_route.project(actor.position);
                projection.lateral < CORRIDOR_HALF_WIDTH
                    && projection.arc > ego_arc
                    && projection.arc <= ego_arc + reaction
            })
        }
    }

    impl Controller for ReactiveBraking {
        fn decide(
            &self,
            spec: &ControllerSpec,
            state: &ControllerState,
            observation: &Observation<'_>,
        ) -> (Command, ControllerState) {
            let command = if Self::threat_ahead(spec, observation) {
                Command::brake()
            } else {
                speed_tracking(spec, observation.ego.speed)
            };
            (command, state.clone())
        }
    }
}

/// Name-to-controller registry. Read-only during batch execution.
#[derive(Clone, Default)]
pub struct ControllerRegistry {
    map: BTreeMap<String, Arc<dyn Controller>>,
}

impl ControllerRegistry {
    pub fn empty() -> Self {
        ControllerRegistry::default()
    }

    /// Registry preloaded with the baseline controllers `constant_speed`
    /// and `reactive_braking`.
    pub fn with_builtins() -> Self {
        let mut registry = ControllerRegistry::empty();
        registry
            .register("constant_speed", Arc::new(builtin::ConstantSpeed))
            .unwrap();
        registry
            .register("reactive_braking", Arc::new(builtin::ReactiveBraking))
            .unwrap();
        registry
    }

    pub fn register(&mut self, name: &str, controller: Arc<dyn Controller>) -> Result<(), Error> {
        if self.map.contains_key(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        self.map.insert(name.to_string(), controller);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Controller>, Error> {
        self.map
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownController(name.to_string()))
    }

    pub fn list(&self) -> Vec<String> {
        self.map.keys().cloned().collect()
    }
}
