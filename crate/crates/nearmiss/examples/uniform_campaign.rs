//! A small uniform-sampling batch campaign with all artifacts written to
//! disk: per-case configs, results, replay logs, and the campaign report.
//!
//! ```sh
//! cargo run --example uniform_campaign
//! ```

use nearmiss::campaign::{run_campaign, CampaignConfig, SamplerConfig};
use nearmiss::controller::{ControllerRegistry, ControllerSpec};
use nearmiss::library::ScenarioLibrary;

fn main() {
    let library = ScenarioLibrary::with_builtins();
    let registry = ControllerRegistry::with_builtins();
    let out = std::env::temp_dir().join("nearmiss-uniform-campaign");

    let config = CampaignConfig {
        template_id: "crossing_traffic".to_string(),
        controller: ControllerSpec::named("reactive_braking"),
        sampler: SamplerConfig::Uniform,
        budget: 200,
        seed: 7,
        step_size: 0.05,
        output_dir: Some(out.clone()),
        workers: 4,
    };

    let report = run_campaign(&library, &registry, &config).unwrap();
    println!(
        "{} cases: {} collisions, {} near misses",
        report.cases_run, report.collision_count, report.near_miss_count
    );
    if let (Some(fitness), Some(case)) = (report.best_fitness, &report.best_case) {
        println!("most dangerous case: {case} (fitness {fitness:.4})");
    }
    for (name, stats) in &report.param_stats {
        println!(
            "colliding {name}: mean {:.2}, range [{:.2}, {:.2}]",
            stats.mean, stats.min, stats.max
        );
    }
    println!("artifacts under {}", out.display());
}
