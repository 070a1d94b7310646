//! Plug in a controller of your own. A controller is a pure function from
//! (spec, state, observation) to (command, state); register it under a name
//! and every part of the pipeline can drive it.
//!
//! This one models a driver with perception latency: it only brakes after a
//! threat has been inside the corridor for several consecutive frames,
//! tracked through the explicit controller state. The latency makes it
//! measurably easier to falsify than the instant reactive baseline.
//!
//! ```sh
//! cargo run --release --example custom_controller
//! ```

use nearmiss::campaign::{run_campaign, CampaignConfig, SamplerConfig};
use nearmiss::controller::{
    builtin::CORRIDOR_HALF_WIDTH, Controller, ControllerRegistry, ControllerSpec, ControllerState,
    Observation,
};
use nearmiss::library::ScenarioLibrary;
use nearmiss::sim::Command;
use std::sync::Arc;

struct DelayedBraking;

impl Controller for DelayedBraking {
    fn decide(
        &self,
        spec: &ControllerSpec,
        state: &ControllerState,
        observation: &Observation<'_>,
    ) -> (Command, ControllerState) {
        let reaction = spec.get("reaction_distance", 25.0);
        let latency_frames = spec.get("latency_frames", 6.0) as usize;
        let target = spec.get("target_speed", 6.5);

        let ego_arc = observation.ego.route_progress;
        let threat = observation.visible_actors.iter().any(|(actor, _)| {
            let projection = observation.ego_route.project(actor.position);
            projection.lateral < CORRIDOR_HALF_WIDTH
                && projection.arc > ego_arc
                && projection.arc <= ego_arc + reaction
        });

        // memory[0] counts consecutive frames with a visible threat.
        let mut next = state.clone();
        if next.memory.is_empty() {
            next.memory.push(0.0);
        }
        next.memory[0] = if threat { next.memory[0] + 1.0 } else { 0.0 };

        let command = if next.memory[0] as usize > latency_frames {
            Command::brake()
        } else {
            Command::new((target - observation.ego.speed).clamp(-8.0, 3.0))
        };
        (command, next)
    }
}

fn main() {
    let library = ScenarioLibrary::with_builtins();
    let mut registry = ControllerRegistry::with_builtins();
    registry
        .register("delayed_braking", Arc::new(DelayedBraking))
        .unwrap();

    for name in ["reactive_braking", "delayed_braking"] {
        let config = CampaignConfig {
            template_id: "sudden_pedestrian".to_string(),
            controller: ControllerSpec::named(name),
            sampler: SamplerConfig::Uniform,
            budget: 400,
            seed: 5,
            step_size: 0.05,
            output_dir: Some(std::env::temp_dir().join(format!("nearmiss-{name}"))),
            workers: 4,
        };
        let report = run_campaign(&library, &registry, &config).unwrap();
        println!(
            "{name:18} {:3} collisions / {} cases ({} near misses)",
            report.collision_count, report.cases_run, report.near_miss_count
        );
    }
}
