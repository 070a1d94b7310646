//! Run a single scenario configuration end to end: bind parameters,
//! simulate against a controller, and score the trace.
//!
//! ```sh
//! cargo run --example single_case
//! ```

use nearmiss::controller::{ControllerRegistry, ControllerSpec};
use nearmiss::eval::evaluate;
use nearmiss::library::ScenarioLibrary;
use nearmiss::scenario::{instantiate, resolve};
use nearmiss::sim::{pairwise_min_distance, run_simulation, DEFAULT_STEP_SIZE};
use std::collections::BTreeMap;

fn main() {
    let library = ScenarioLibrary::with_builtins();
    let registry = ControllerRegistry::with_builtins();

    let template = library.get("ped_crossing").unwrap();
    let bindings: BTreeMap<String, f64> = [
        ("v", 1.8),
        ("d_trigger", 14.0),
        ("start_distance", 38.0),
        ("cloudiness", 65.0),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), *v))
    .collect();

    let config = instantiate(&template, &bindings, 42).unwrap();
    let controller = registry.get("reactive_braking").unwrap();
    let spec = ControllerSpec::named("reactive_braking");
    let trace = run_simulation(
        &template,
        &config,
        controller.as_ref(),
        &spec,
        DEFAULT_STEP_SIZE,
    )
    .unwrap();
    let scenario = resolve(&template, &config).unwrap();
    let result = evaluate(&trace, &scenario).unwrap();

    println!("outcome:      {:?}", trace.outcome);
    println!("frames:       {}", trace.frames.len());
    println!(
        "min distance: {:.3} m at t = {:.2} s",
        result.min_distance, result.time_of_min
    );
    println!("fitness:      {:.4}", result.fitness);

    // A coarse closest-approach timeline.
    println!("\n  t(s)   ego x(m)  ped y(m)  gap(m)");
    for frame in trace.frames.iter().step_by(20) {
        println!(
            "  {:5.2}  {:8.2}  {:8.2}  {:6.2}",
            frame.time,
            frame.ego.position.x,
            frame.others[0].position.y,
            pairwise_min_distance(frame, &scenario).unwrap(),
        );
    }
}
