//! Replay logs: persist a run, verify bit-exact re-execution, and watch
//! verification catch a tampered configuration.
//!
//! ```sh
//! cargo run --example replay_and_verify
//! ```

use nearmiss::controller::{ControllerRegistry, ControllerSpec};
use nearmiss::library::ScenarioLibrary;
use nearmiss::replay::{read_log, verify_replay, write_log};
use nearmiss::scenario::instantiate;
use nearmiss::sim::run_simulation;
use std::collections::BTreeMap;

fn main() {
    let library = ScenarioLibrary::with_builtins();
    let registry = ControllerRegistry::with_builtins();

    let template = library.get("sudden_pedestrian").unwrap();
    let bindings: BTreeMap<String, f64> = [
        ("v", 2.5),
        ("d_trigger", 12.0),
        ("start_distance", 45.0),
        ("cloudiness", 30.0),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), *v))
    .collect();
    let config = instantiate(&template, &bindings, 99).unwrap();
    let controller = registry.get("reactive_braking").unwrap();
    let spec = ControllerSpec::named("reactive_braking");
    let trace = run_simulation(&template, &config, controller.as_ref(), &spec, 0.05).unwrap();

    let path = std::env::temp_dir().join("sudden_pedestrian.replay.json");
    write_log(&trace, &spec, &path, false).unwrap();
    println!(
        "wrote {} ({} frame digests)",
        path.display(),
        trace.frames.len()
    );

    let log = read_log(&path).unwrap();
    println!(
        "verify untouched log: {}",
        verify_replay(&log, &library, &registry).unwrap()
    );

    // Nudge one parameter: re-execution diverges and verification reports
    // the first differing frame.
    let mut tampered = log.clone();
    tampered.config.bindings.insert("v".to_string(), 2.51);
    println!(
        "verify with v 2.5 -> 2.51: {}",
        verify_replay(&tampered, &library, &registry).unwrap()
    );
}
