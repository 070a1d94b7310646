//! Extend the scenario library: build a template in code and load another
//! from a JSON file, then run cases against both.
//!
//! ```sh
//! cargo run --example custom_template
//! ```

use nearmiss::controller::{ControllerRegistry, ControllerSpec};
use nearmiss::eval::evaluate;
use nearmiss::geometry::Vec2;
use nearmiss::library::ScenarioLibrary;
use nearmiss::scenario::{
    instantiate, resolve, ActorClass, ActorSpec, ParameterSpec, ScenarioCategory, ScenarioTemplate,
    Terminators, TriggerRule, ValueRef,
};
use nearmiss::sim::run_simulation;
use std::collections::BTreeMap;
use std::path::Path;

/// A scooter shoots out of an alley perpendicular to the road.
fn alley_scooter() -> ScenarioTemplate {
    ScenarioTemplate {
        template_id: "alley_scooter".to_string(),
        category: ScenarioCategory::EmergencyEvasion,
        actors: vec![
            ActorSpec {
                actor_id: "ego".to_string(),
                actor_class: ActorClass::Ego,
                footprint: 0.9,
                route: vec![Vec2::new(0.0, 0.0), Vec2::new(90.0, 0.0)],
                initial_offset: ValueRef::param("start_distance"),
                speed: ValueRef::Constant(6.5),
                trigger: None,
            },
            ActorSpec {
                actor_id: "scooter".to_string(),
                actor_class: ActorClass::Bicycle,
                footprint: 0.4,
                route: vec![Vec2::new(60.0, 5.0), Vec2::new(60.0, -5.0)],
                initial_offset: ValueRef::Constant(0.0),
                speed: ValueRef::param("v"),
                trigger: Some(TriggerRule::ego_distance(ValueRef::param("d_trigger"))),
            },
        ],
        parameters: vec![
            ParameterSpec::continuous("v", "m/s", 3.0, 9.0),
            ParameterSpec::continuous("d_trigger", "m", 6.0, 25.0),
            ParameterSpec::continuous("start_distance", "m", 15.0, 50.0),
        ],
        weather_parameters: vec![],
        horizon: 18.0,
        terminators: Terminators::default(),
    }
}

fn main() {
    let mut library = ScenarioLibrary::with_builtins();

    // In code:
    library.register(alley_scooter()).unwrap();

    // From a directory of JSON files (one template per file):
    let template_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("templates");
    let loaded = library.load_dir(&template_dir).unwrap();
    println!(
        "loaded {loaded} template(s) from {}",
        template_dir.display()
    );

    let registry = ControllerRegistry::with_builtins();
    let controller = registry.get("reactive_braking").unwrap();
    let spec = ControllerSpec::named("reactive_braking");

    for id in ["alley_scooter", "bus_pullout"] {
        let template = library.get(id).unwrap();
        // Midpoint bindings as a smoke run.
        let bindings: BTreeMap<String, f64> = template
            .parameters
            .iter()
            .map(|p| (p.name.clone(), 0.5 * (p.lower + p.upper)))
            .collect();
        let config = instantiate(&template, &bindings, 1).unwrap();
        let trace = run_simulation(&template, &config, controller.as_ref(), &spec, 0.05).unwrap();
        let scenario = resolve(&template, &config).unwrap();
        let result = evaluate(&trace, &scenario).unwrap();
        println!(
            "{id:14} -> {:?}, min distance {:.2} m, fitness {:.3}",
            trace.outcome, result.min_distance, result.fitness
        );
    }
}
