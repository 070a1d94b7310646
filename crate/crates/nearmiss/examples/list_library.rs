//! Browse the built-in scenario library: ids, categories, parameter ranges.
//!
//! ```sh
//! cargo run --example list_library
//! ```

use nearmiss::library::ScenarioLibrary;
use nearmiss::scenario::ParamKind;

fn main() {
    let library = ScenarioLibrary::with_builtins();
    println!("{} built-in templates\n", library.len());
    for (id, category) in library.list() {
        let template = library.get(&id).unwrap();
        println!("{id}  [{category}]  horizon {}s", template.horizon);
        for actor in &template.actors {
            println!(
                "    actor {:12} {:?} r={}m, route {} waypoints",
                actor.actor_id,
                actor.actor_class,
                actor.footprint,
                actor.route.len()
            );
        }
        for p in &template.parameters {
            let kind = match p.kind {
                ParamKind::Continuous => String::new(),
                ParamKind::Stepped { step } => format!(", step {step}"),
            };
            println!(
                "    param {:12} [{}, {}] {}{kind}",
                p.name, p.lower, p.upper, p.unit
            );
        }
        println!();
    }
}
