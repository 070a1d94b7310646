//! Deterministic fixed-step 2D kinematic simulation.
//!
//! One run iterates observe -> controller -> step until a terminator fires.
//! Determinism contract: given the same (config, controller, step size), two
//! runs produce bit-identical traces. To that end time is always computed as
//! `step_index * step_size` (never accumulated by repeated addition), actor
//! updates are pure f64 arithmetic in a fixed order, and no hash-map
//! iteration occurs anywhere on the simulation path.

use crate::controller::{Controller, ControllerSpec, ControllerState, Observation};
use crate::error::Error;
use crate::geometry::Vec2;
use crate::scenario::{
    resolve, ResolvedActor, ResolvedScenario, ScenarioConfig, ScenarioTemplate, TriggerReference,
};
use serde::{Deserialize, Serialize};

/// Default simulation step: 20 Hz.
pub const DEFAULT_STEP_SIZE: f64 = 0.05;

/// Longitudinal acceleration command. The simulator clamps to
/// `[MIN_ACCELERATION, MAX_ACCELERATION]`; controllers are not trusted to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Command {
    pub acceleration: f64,
}

impl Command {
    pub const MIN_ACCELERATION: f64 = -8.0;
    pub const MAX_ACCELERATION: f64 = 3.0;

    pub fn new(acceleration: f64) -> Self {
        Command { acceleration }
    }

    /// Full braking.
    pub fn brake() -> Self {
        Command::new(Self::MIN_ACCELERATION)
    }

    pub fn coast() -> Self {
        Command::new(0.0)
    }
}

/// Kinematic state of one actor at one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActorState {
    pub actor_id: String,
    pub position: Vec2,
    /// Radians in (-pi, pi], along the local route tangent.
    pub heading: f64,
    /// Current speed in m/s, >= 0. Dormant (untriggered) actors carry 0.
    pub speed: f64,
    /// Arc length along the actor's route, in [0, route length].
    pub route_progress: f64,
    pub triggered: bool,
}

/// Snapshot of the whole world at one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    /// Seconds; always an exact integer multiple of the step size.
    pub time: f64,
    pub ego: ActorState,
    /// Non-ego actors in template order.
    pub others: Vec<ActorState>,
    /// Controller visibility range in meters, derived from cloudiness.
    pub visibility: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Collision,
    RouteCompleted,
    Timeout,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// The full time-indexed record of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub config: ScenarioConfig,
    pub step_size: f64,
    pub frames: Vec<WorldState>,
    pub outcome: Outcome,
}

fn heading_of(tangent: Vec2) -> f64 {
    let h = tangent.y.atan2(tangent.x);
    // Keep headings in (-pi, pi].
    if h == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        h
    }
}

fn actor_state_at(actor: &ResolvedActor, progress: f64, speed: f64, triggered: bool) -> ActorState {
    ActorState {
        actor_id: actor.actor_id.clone(),
        position: actor.route.point_at(progress),
        heading: heading_of(actor.route.tangent_at(progress)),
        speed,
        route_progress: progress,
        triggered,
    }
}

/// World at t = 0. Actors with a trigger start dormant at speed 0; actors
/// without one are live from the start.
pub fn init_world(scenario: &ResolvedScenario) -> WorldState {
    let ego = actor_state_at(
        &scenario.ego,
        scenario.ego.initial_offset,
        scenario.ego.speed,
        true,
    );
    let others = scenario
        .others
        .iter()
        .map(|actor| {
            let triggered = actor.trigger.is_none();
            let at_end = actor.initial_offset >= actor.route.length();
            let speed = if triggered && !at_end {
                actor.speed
            } else {
                0.0
            };
            actor_state_at(actor, actor.initial_offset, speed, triggered)
        })
        .collect();
    WorldState {
        time: 0.0,
        ego,
        others,
        visibility: scenario.visibility,
    }
}

/// Advances the world by one step.
///
/// Semantics, in order:
/// 1. Triggers are evaluated against positions at the start of the step. A
///    dormant actor whose reference comes within the trigger distance flips
///    to triggered in the produced frame but keeps speed 0 there; it adopts
///    its bound speed from the next step (one frame later still).
/// 2. Every actor advances its route progress by `current speed * dt`
///    (forward Euler on arc length) and clamps at the route end, where its
///    speed drops to 0.
/// 3. The ego's new speed is `max(0, speed + a * dt)` with `a` clamped to
///    the command range.
///
/// `step_index` is the index of the step being taken, i.e. the index of the
/// frame `world` itself; the produced frame carries time
/// `(step_index + 1) * dt` exactly.
pub fn step(
    world: &WorldState,
    command: Command,
    scenario: &ResolvedScenario,
    dt: f64,
    step_index: u64,
) -> Result<WorldState, Error> {
    if !command.acceleration.is_finite() {
        return Err(Error::NonFiniteCommand { time: world.time });
    }
    let accel = command
        .acceleration
        .clamp(Command::MIN_ACCELERATION, Command::MAX_ACCELERATION);

    // Trigger checks against start-of-step positions.
    let fires_now: Vec<bool> = scenario
        .others
        .iter()
        .zip(&world.others)
        .map(|(actor, state)| {
            if state.triggered {
                return false;
            }
            match &actor.trigger {
                None => false,
                Some(trigger) => {
                    let reference = match trigger.reference {
                        TriggerReference::Ego => world.ego.position,
                        TriggerReference::Other(i) => world.others[i].position,
                    };
                    state.position.dist(reference) <= trigger.distance
                }
            }
        })
        .collect();

    let ego_len = scenario.ego.route.length();
    let ego_progress = (world.ego.route_progress + world.ego.speed * dt).min(ego_len);
    let ego_speed = if ego_progress >= ego_len {
        0.0
    } else {
        (world.ego.speed + accel * dt).max(0.0)
    };
    let ego = actor_state_at(&scenario.ego, ego_progress, ego_speed, true);

    let others = scenario
        .others
        .iter()
        .zip(&world.others)
        .zip(&fires_now)
        .map(|((actor, state), &fired)| {
            let len = actor.route.length();
            let progress = (state.route_progress + state.speed * dt).min(len);
            // Speed follows the start-of-step triggered flag, so an actor
            // that fired just now stays at 0 for one more frame.
            let speed = if state.triggered && progress < len {
                actor.speed
            } else {
                0.0
            };
            actor_state_at(actor, progress, speed, state.triggered || fired)
        })
        .collect();

    Ok(WorldState {
        time: (step_index + 1) as f64 * dt,
        ego,
        others,
        visibility: world.visibility,
    })
}

/// First overlapping pair of disc footprints, or `None`. Pairs are checked
/// ego-first, then lexicographically by actor id; overlap is strict
/// (touching circles do not collide).
pub fn detect_collision(
    world: &WorldState,
    scenario: &ResolvedScenario,
) -> Option<(String, String)> {
    let mut order: Vec<usize> = (0..world.others.len()).collect();
    order.sort_by(|&a, &b| world.others[a].actor_id.cmp(&world.others[b].actor_id));

    for &i in &order {
        let gap = world.ego.position.dist(world.others[i].position);
        if gap < scenario.ego.radius + scenario.others[i].radius {
            return Some((world.ego.actor_id.clone(), world.others[i].actor_id.clone()));
        }
    }
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            let gap = world.others[i].position.dist(world.others[j].position);
            if gap < scenario.others[i].radius + scenario.others[j].radius {
                return Some((
                    world.others[i].actor_id.clone(),
                    world.others[j].actor_id.clone(),
                ));
            }
        }
    }
    None
}

/// Minimum surface-to-surface distance between the ego and any other actor,
/// floored at 0. Errors when the scenario has no other actors.
pub fn pairwise_min_distance(
    world: &WorldState,
    scenario: &ResolvedScenario,
) -> Result<f64, Error> {
    if world.others.is_empty() {
        return Err(Error::NoOtherActors);
    }
    let mut min = f64::INFINITY;
    for (state, actor) in world.others.iter().zip(&scenario.others) {
        let gap = world.ego.position.dist(state.position) - scenario.ego.radius - actor.radius;
        if gap < min {
            min = gap;
        }
    }
    Ok(min.max(0.0))
}

/// What the controller is allowed to see: the ego state plus every actor
/// within the visibility range.
pub fn observe<'w>(world: &'w WorldState, scenario: &'w ResolvedScenario) -> Observation<'w> {
    let visible_actors = world
        .others
        .iter()
        .zip(&scenario.others)
        .filter(|(state, _)| world.ego.position.dist(state.position) <= world.visibility)
        .map(|(state, actor)| (state, actor.radius))
        .collect();
    Observation {
        time: world.time,
        ego: &world.ego,
        visible_actors,
        route_remaining: scenario.ego.route.length() - world.ego.route_progress,
        ego_route: &scenario.ego.route,
    }
}

/// Runs one scenario configuration against one controller.
///
/// Terminator checks happen on every frame, including the initial one, in
/// the order collision, route completed, timeout. Bindings are resolved
/// structurally but not range-checked here, so replay can re-execute edited
/// configs; use [`crate::scenario::instantiate`] to enforce ranges.
pub fn run_simulation(
    template: &ScenarioTemplate,
    config: &ScenarioConfig,
    controller: &dyn Controller,
    controller_spec: &ControllerSpec,
    step_size: f64,
) -> Result<Trace, Error> {
    if !step_size.is_finite() || step_size <= 0.0 {
        return Err(Error::InvalidCampaign(format!(
            "step_size must be positive and finite, got {step_size}"
        )));
    }
    let scenario = resolve(template, config)?;
    run_resolved(&scenario, config, controller, controller_spec, step_size)
}

/// [`run_simulation`] on an already-resolved scenario.
pub fn run_resolved(
    scenario: &ResolvedScenario,
    config: &ScenarioConfig,
    controller: &dyn Controller,
    controller_spec: &ControllerSpec,
    step_size: f64,
) -> Result<Trace, Error> {
    let mut world = init_world(scenario);
    let mut frames = vec![world.clone()];
    let mut state = ControllerState::new(config.seed);

    let outcome = loop {
        if scenario.terminators.collision && detect_collision(&world, scenario).is_some() {
            break Outcome::Collision;
        }
        if scenario.terminators.route_completed
            && world.ego.route_progress >= scenario.ego.route.length()
        {
            break Outcome::RouteCompleted;
        }
        if world.time >= scenario.horizon {
            break Outcome::Timeout;
        }
        let observation = observe(&world, scenario);
        let (command, next_state) = controller.decide(controller_spec, &state, &observation);
        state = next_state;
        world = step(
            &world,
            command,
            scenario,
            step_size,
            frames.len() as u64 - 1,
        )?;
        frames.push(world.clone());
    };

    Ok(Trace {
        config: config.clone(),
        step_size,
        frames,
        outcome,
    })
}
