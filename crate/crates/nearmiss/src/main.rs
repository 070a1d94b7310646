//! Command-line front end. All logic lives in the library; this binary only
//! parses arguments, wires the library and controller registry together, and
//! maps errors to exit codes:
//!
//! 0 success, 1 usage error, 2 verification mismatch, 3 i/o failure.

use clap::{Parser, Subcommand};
use nearmiss::campaign::{run_campaign, summarize_dir, CampaignConfig, SamplerConfig};
use nearmiss::controller::ControllerRegistry;
use nearmiss::error::Error;
use nearmiss::library::ScenarioLibrary;
use nearmiss::replay::{read_log, replay_frames, verify_replay, ReplayVerdict};
use nearmiss::sample::GaParams;
use nearmiss::scenario::{resolve, ParamKind};
use std::path::PathBuf;

/// Environment variable holding the default output root for `run`.
const OUT_ROOT_ENV: &str = "NEARMISS_OUT";

#[derive(Parser)]
#[command(
    name = "nearmiss",
    version,
    about = "Scenario-based falsification for driving controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandLine,
}

#[derive(Subcommand)]
enum CommandLine {
    /// List scenario templates with categories and parameter ranges.
    ListScenarios {
        /// Extra directory of template JSON files to load.
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Run a batch campaign from a config file, with flag overrides.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
        /// Sampler override: uniform or genetic.
        #[arg(long)]
        sampler: Option<String>,
        /// Controller name override.
        #[arg(long)]
        controller: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory; defaults to the config file's output_dir, then
        /// $NEARMISS_OUT/<template_id>.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        step_size: Option<f64>,
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Verify a replay log by deterministic re-execution.
    Replay {
        log: PathBuf,
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Render a replay log to a deterministic SVG.
    Render {
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Recompute a campaign report from the case files in a directory.
    Summarize { dir: PathBuf },
}

fn library_with(templates: Option<&PathBuf>) -> Result<ScenarioLibrary, Error> {
    let mut library = ScenarioLibrary::with_builtins();
    if let Some(dir) = templates {
        library.load_dir(dir)?;
    }
    Ok(library)
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Json(_) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        CommandLine::ListScenarios { templates } => {
            let library = library_with(templates.as_ref())?;
            for (id, category) in library.list() {
                println!("{id}  [{category}]");
                let template = library.get(&id)?;
                for p in &template.parameters {
                    let step = match p.kind {
                        ParamKind::Continuous => String::new(),
                        ParamKind::Stepped { step } => format!(" step {step}"),
                    };
                    println!(
                        "    {} ({}): [{}, {}]{}",
                        p.name, p.unit, p.lower, p.upper, step
                    );
                }
            }
            Ok(0)
        }
        CommandLine::Run {
            config,
            seed,
            budget,
            sampler,
            controller,
            workers,
            out,
            step_size,
            templates,
        } => {
            let library = library_with(templates.as_ref())?;
            let registry = ControllerRegistry::with_builtins();
            let mut campaign = CampaignConfig::from_json(&std::fs::read_to_string(&config)?)?;
            if let Some(seed) = seed {
                campaign.seed = seed;
            }
            if let Some(budget) = budget {
                campaign.budget = budget;
            }
            if let Some(name) = controller {
                campaign.controller.name = name;
            }
            if let Some(workers) = workers {
                campaign.workers = workers;
            }
            if let Some(step_size) = step_size {
                campaign.step_size = step_size;
            }
            if let Some(kind) = sampler {
                campaign.sampler = match (kind.as_str(), campaign.sampler) {
                    ("uniform", _) => SamplerConfig::Uniform,
                    ("genetic", SamplerConfig::Genetic(params)) => SamplerConfig::Genetic(params),
                    ("genetic", _) => SamplerConfig::Genetic(GaParams::default()),
                    (other, _) => {
                        return Err(Error::InvalidCampaign(format!(
                            "unknown sampler {other}, expected uniform or genetic"
                        )))
                    }
                };
            }
            if let Some(out) = out {
                campaign.output_dir = Some(out);
            }
            if campaign.output_dir.is_none() {
                let root = std::env::var(OUT_ROOT_ENV).unwrap_or_else(|_| "nearmiss-out".into());
                campaign.output_dir = Some(PathBuf::from(root).join(&campaign.template_id));
            }

            let report = run_campaign(&library, &registry, &campaign)?;
            println!(
                "{}: {} cases, {} collisions, {} near misses",
                campaign.template_id,
                report.cases_run,
                report.collision_count,
                report.near_miss_count
            );
            if let (Some(fitness), Some(case)) = (report.best_fitness, &report.best_case) {
                println!("best fitness {fitness:.6} at {case}");
            }
            println!(
                "report: {}",
                campaign.output_dir.unwrap().join("report.json").display()
            );
            Ok(0)
        }
        CommandLine::Replay { log, templates } => {
            let library = library_with(templates.as_ref())?;
            let registry = ControllerRegistry::with_builtins();
            let log = read_log(&log)?;
            let verdict = verify_replay(&log, &library, &registry)?;
            println!("{verdict}");
            Ok(match verdict {
                ReplayVerdict::Match => 0,
                ReplayVerdict::Mismatch { .. } => 2,
            })
        }
        CommandLine::Render {
            log,
            out,
            templates,
        } => {
            let library = library_with(templates.as_ref())?;
            let registry = ControllerRegistry::with_builtins();
            let log = read_log(&log)?;
            let frames = replay_frames(&log, &library, &registry)?;
            let template = library.get(&log.config.template_id)?;
            let scenario = resolve(&template, &log.config)?;
            nearmiss::render::render_to_file(&frames, &scenario, log.outcome, &out)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        CommandLine::Summarize { dir } => {
            let report = summarize_dir(&dir)?;
            print!("{}", report.to_json());
            Ok(0)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap defaults to exit code 2 for usage errors; help/version are
            // not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code_for(&err));
        }
    }
}
