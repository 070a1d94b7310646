//! Render a colliding run to a deterministic SVG: routes, trajectories,
//! footprints at closest approach, and the collision marker.
//!
//! ```sh
//! cargo run --example render_svg
//! ```

use nearmiss::controller::{ControllerRegistry, ControllerSpec};
use nearmiss::library::ScenarioLibrary;
use nearmiss::render::render_to_file;
use nearmiss::scenario::{instantiate, resolve};
use nearmiss::sim::run_simulation;
use std::collections::BTreeMap;

fn main() {
    let library = ScenarioLibrary::with_builtins();
    let registry = ControllerRegistry::with_builtins();

    // The distracted baseline drives straight through the crossing.
    let template = library.get("ped_crossing").unwrap();
    let bindings: BTreeMap<String, f64> = [
        ("v", 1.66),
        ("d_trigger", 25.0),
        ("start_distance", 40.0),
        ("cloudiness", 10.0),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), *v))
    .collect();
    let config = instantiate(&template, &bindings, 11).unwrap();
    let controller = registry.get("constant_speed").unwrap();
    let spec = ControllerSpec::named("constant_speed");
    let trace = run_simulation(&template, &config, controller.as_ref(), &spec, 0.05).unwrap();
    let scenario = resolve(&template, &config).unwrap();

    let path = std::path::PathBuf::from("ped_crossing_collision.svg");
    render_to_file(&trace.frames, &scenario, trace.outcome, &path).unwrap();
    println!("outcome {:?}; wrote {}", trace.outcome, path.display());
}
