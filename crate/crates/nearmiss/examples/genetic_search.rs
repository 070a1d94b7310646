//! Falsification by genetic search: the sampler concentrates on parameter
//! regions with small minimum distances and finds far more collisions than
//! uniform sampling on the same budget.
//!
//! ```sh
//! cargo run --release --example genetic_search
//! ```

use nearmiss::campaign::{run_campaign, CampaignConfig, SamplerConfig};
use nearmiss::controller::{ControllerRegistry, ControllerSpec};
use nearmiss::library::ScenarioLibrary;
use nearmiss::sample::GaParams;

fn main() {
    let library = ScenarioLibrary::with_builtins();
    let registry = ControllerRegistry::with_builtins();
    let budget = 480;
    let seed = 3;

    let run = |sampler: SamplerConfig, out: &str| {
        let config = CampaignConfig {
            template_id: "ped_crossing".to_string(),
            controller: ControllerSpec::named("reactive_braking"),
            sampler,
            budget,
            seed,
            step_size: 0.05,
            output_dir: Some(std::env::temp_dir().join(out)),
            workers: 4,
        };
        run_campaign(&library, &registry, &config).unwrap()
    };

    let genetic = run(
        SamplerConfig::Genetic(GaParams::default()),
        "nearmiss-genetic",
    );
    let uniform = run(SamplerConfig::Uniform, "nearmiss-uniform-baseline");

    println!("budget {budget}, seed {seed}, reactive_braking on ped_crossing\n");
    println!("generation   best fitness   mean fitness   cases");
    for g in genetic.per_generation.as_ref().unwrap() {
        println!(
            "{:10}   {:12.4}   {:12.4}   {:5}",
            g.generation, g.best_fitness, g.mean_fitness, g.cases
        );
    }
    println!(
        "\ngenetic:  {} collisions, {} near misses",
        genetic.collision_count, genetic.near_miss_count
    );
    println!(
        "uniform:  {} collisions, {} near misses",
        uniform.collision_count, uniform.near_miss_count
    );
}
