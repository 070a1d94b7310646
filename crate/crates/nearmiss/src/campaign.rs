//! Batch campaign orchestration: sample, simulate, evaluate, persist,
//! iterate.
//!
//! A campaign binds one template, one controller, one sampler, a case budget
//! and a seed. Every case writes three artifacts under
//! `<output>/cases/<zero-padded index>/`:
//!
//! ```text
//! config.json        the bound scenario configuration
//! result.json        the evaluation result
//! case.replay.json   the replay log (digests only)
//! ```
//!
//! and the campaign writes `<output>/report.json`. Determinism contract:
//! the campaign seed fixes every artifact byte-for-byte (wall time in the
//! report excepted) regardless of worker count. Per-case seeds derive from
//! `(campaign seed, case index)`; the sampler owns a separate derived
//! stream; case results are committed in case-index order.

use crate::controller::{Controller, ControllerRegistry, ControllerSpec};
use crate::error::Error;
use crate::eval::{campaign_summary, evaluate, EvaluationResult, ParamStats};
use crate::library::ScenarioLibrary;
use crate::replay::write_log;
use crate::rng::derive_stream;
use crate::sample::{Bindings, GaParams, GeneticSampler, UniformSampler};
use crate::scenario::{instantiate, resolve, ScenarioConfig, ScenarioTemplate};
use crate::sim::{run_resolved, DEFAULT_STEP_SIZE};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Stream tags for seed derivation; arbitrary fixed constants.
const SAMPLER_STREAM_TAG: u64 = 0x5341_4d50_4c45_5221;
const CASE_STREAM_TAG: u64 = 0x4341_5345_5345_4544;

/// Sampler selection in a campaign config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerConfig {
    Uniform,
    Genetic(GaParams),
}

fn default_step_size() -> f64 {
    DEFAULT_STEP_SIZE
}

fn default_workers() -> usize {
    1
}

/// Everything one batch run needs, as stored in a campaign config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub template_id: String,
    pub controller: ControllerSpec,
    pub sampler: SamplerConfig,
    /// Total number of cases to execute.
    pub budget: usize,
    pub seed: u64,
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl CampaignConfig {
    pub fn from_json(s: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("campaign serialization");
        s.push('\n');
        s
    }
}

/// Fitness statistics of one genetic generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: u32,
    /// Cases evaluated in this generation (smaller for a truncated final one).
    pub cases: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

/// Campaign-level results. `summarize_dir` recomputes the countable fields
/// from case files alone; fields it cannot recover stay `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub template_id: String,
    pub controller: Option<ControllerSpec>,
    pub sampler: Option<SamplerConfig>,
    pub budget: usize,
    pub seed: Option<u64>,
    pub step_size: Option<f64>,
    pub workers: Option<usize>,
    pub cases_run: usize,
    pub collision_count: usize,
    pub near_miss_count: usize,
    pub best_fitness: Option<f64>,
    /// Relative path of the best case directory, e.g. `cases/0012`.
    pub best_case: Option<String>,
    pub wall_time_seconds: Option<f64>,
    pub per_generation: Option<Vec<GenerationStats>>,
    pub param_stats: BTreeMap<String, ParamStats>,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Case directory name for an index: zero-padded to 4 digits.
pub fn case_dir_name(index: usize) -> String {
    format!("{index:04}")
}

struct CaseContext<'a> {
    template: &'a ScenarioTemplate,
    controller: Arc<dyn Controller>,
    controller_spec: &'a ControllerSpec,
    step_size: f64,
    cases_dir: &'a Path,
    case_stream: u64,
}

impl CaseContext<'_> {
    /// Runs one case end to end and writes its three artifacts. All file
    /// writes happen before the result is returned to the coordinator.
    fn run_case(
        &self,
        index: usize,
        bindings: &Bindings,
    ) -> Result<(ScenarioConfig, EvaluationResult), Error> {
        let seed = derive_stream(self.case_stream, index as u64);
        let config = instantiate(self.template, bindings, seed)?;
        let scenario = resolve(self.template, &config)?;
        let trace = run_resolved(
            &scenario,
            &config,
            self.controller.as_ref(),
            self.controller_spec,
            self.step_size,
        )?;
        let result = evaluate(&trace, &scenario)?;

        let dir = self.cases_dir.join(case_dir_name(index));
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("config.json"), config.to_json())?;
        let mut result_json = serde_json::to_string_pretty(&result)?;
        result_json.push('\n');
        std::fs::write(dir.join("result.json"), result_json)?;
        write_log(
            &trace,
            self.controller_spec,
            &dir.join("case.replay.json"),
            false,
        )?;
        Ok((config, result))
    }

    /// Runs a batch of cases, possibly in parallel; results come back in
    /// input order either way.
    fn run_batch(
        &self,
        pool: Option<&rayon::ThreadPool>,
        work: &[(usize, Bindings)],
    ) -> Result<Vec<(ScenarioConfig, EvaluationResult)>, Error> {
        match pool {
            None => work.iter().map(|(i, b)| self.run_case(*i, b)).collect(),
            Some(pool) => {
                pool.install(|| work.par_iter().map(|(i, b)| self.run_case(*i, b)).collect())
            }
        }
    }
}

fn generation_stats(
    generation: u32,
    results: &[(ScenarioConfig, EvaluationResult)],
) -> GenerationStats {
    let fitness: Vec<f64> = results.iter().map(|(_, r)| r.fitness).collect();
    let best = fitness.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;
    GenerationStats {
        generation,
        cases: results.len(),
        best_fitness: best,
        mean_fitness: mean,
    }
}

fn validate_campaign(
    config: &CampaignConfig,
    library: &ScenarioLibrary,
    registry: &ControllerRegistry,
) -> Result<(), Error> {
    if config.budget < 1 {
        return Err(Error::InvalidCampaign("budget must be at least 1".into()));
    }
    if !config.step_size.is_finite() || config.step_size <= 0.0 {
        return Err(Error::InvalidCampaign("step_size must be positive".into()));
    }
    if config.workers < 1 {
        return Err(Error::InvalidCampaign("workers must be at least 1".into()));
    }
    if let SamplerConfig::Genetic(ga) = &config.sampler {
        if config.budget < ga.population_size {
            return Err(Error::InvalidCampaign(format!(
                "genetic campaigns need budget >= population size ({})",
                ga.population_size
            )));
        }
    }
    library.get(&config.template_id)?;
    registry.get(&config.controller.name)?;
    if config.output_dir.is_none() {
        return Err(Error::InvalidCampaign("output_dir is not set".into()));
    }
    Ok(())
}

/// Executes a full campaign: exactly `budget` cases, all artifacts written
/// under the output directory, report returned and written to
/// `report.json`.
pub fn run_campaign(
    library: &ScenarioLibrary,
    registry: &ControllerRegistry,
    config: &CampaignConfig,
) -> Result<CampaignReport, Error> {
    validate_campaign(config, library, registry)?;
    let started = std::time::Instant::now();

    let template = library.get(&config.template_id)?;
    let controller = registry.get(&config.controller.name)?;
    let out_dir = config.output_dir.as_ref().unwrap();
    let cases_dir = out_dir.join("cases");
    std::fs::create_dir_all(&cases_dir)?;

    let pool = if config.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| Error::InvalidCampaign(format!("worker pool: {e}")))?,
        )
    } else {
        None
    };

    let ctx = CaseContext {
        template: &template,
        controller,
        controller_spec: &config.controller,
        step_size: config.step_size,
        cases_dir: &cases_dir,
        case_stream: derive_stream(config.seed, CASE_STREAM_TAG),
    };
    let sampler_seed = derive_stream(config.seed, SAMPLER_STREAM_TAG);

    let mut cases: Vec<(ScenarioConfig, EvaluationResult)> = Vec::with_capacity(config.budget);
    let mut per_generation: Option<Vec<GenerationStats>> = None;

    match &config.sampler {
        SamplerConfig::Uniform => {
            let mut sampler = UniformSampler::new(template.parameters.clone(), sampler_seed);
            let work: Vec<(usize, Bindings)> =
                (0..config.budget).map(|i| (i, sampler.sample())).collect();
            cases = ctx.run_batch(pool.as_ref(), &work)?;
        }
        SamplerConfig::Genetic(ga_params) => {
            let mut ga =
                GeneticSampler::new(template.parameters.clone(), ga_params.clone(), sampler_seed)?;
            let population = ga_params.population_size;
            let full_generations = config.budget / population;
            let leftover = config.budget % population;
            let mut stats = Vec::new();
            let mut next_index = 0;

            for g in 0..full_generations {
                if g > 0 {
                    ga.next_generation()?;
                }
                let work: Vec<(usize, Bindings)> = (0..population)
                    .map(|m| (next_index + m, ga.bindings_of(m)))
                    .collect();
                let results = ctx.run_batch(pool.as_ref(), &work)?;
                // Fitness applied in member-index order.
                for (m, (_, result)) in results.iter().enumerate() {
                    ga.set_fitness(m, result.fitness);
                }
                stats.push(generation_stats(ga.population.generation, &results));
                cases.extend(results);
                next_index += population;
            }
            if leftover > 0 {
                // The final partial generation is evaluated but not evolved.
                ga.next_generation()?;
                let work: Vec<(usize, Bindings)> = (0..leftover)
                    .map(|m| (next_index + m, ga.bindings_of(m)))
                    .collect();
                let results = ctx.run_batch(pool.as_ref(), &work)?;
                stats.push(generation_stats(ga.population.generation, &results));
                cases.extend(results);
            }
            per_generation = Some(stats);
        }
    }

    let summary = campaign_summary(&cases);
    let report = CampaignReport {
        schema_version: REPORT_SCHEMA_VERSION,
        template_id: config.template_id.clone(),
        controller: Some(config.controller.clone()),
        sampler: Some(config.sampler.clone()),
        budget: config.budget,
        seed: Some(config.seed),
        step_size: Some(config.step_size),
        workers: Some(config.workers),
        cases_run: summary.cases_run,
        collision_count: summary.collision_count,
        near_miss_count: summary.near_miss_count,
        best_fitness: summary.best_fitness,
        best_case: summary
            .best_case_index
            .map(|i| format!("cases/{}", case_dir_name(i))),
        wall_time_seconds: Some(started.elapsed().as_secs_f64()),
        per_generation,
        param_stats: summary.param_stats,
    };
    std::fs::write(out_dir.join("report.json"), report.to_json())?;
    Ok(report)
}

/// Recomputes a report by scanning case files under `dir/cases/`. Never
/// reads `report.json`, so interrupted campaigns summarize fine; case
/// directories missing any artifact are skipped.
pub fn summarize_dir(dir: &Path) -> Result<CampaignReport, Error> {
    let cases_dir = dir.join("cases");
    let mut case_dirs: Vec<PathBuf> = match std::fs::read_dir(&cases_dir) {
        Ok(entries) => entries
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect(),
        Err(_) => Vec::new(),
    };
    case_dirs.sort();

    let mut cases = Vec::new();
    let mut names = Vec::new();
    let mut template_id = String::new();
    let mut controller = None;
    let mut step_size = None;
    for case_dir in case_dirs {
        let config_path = case_dir.join("config.json");
        let result_path = case_dir.join("result.json");
        if !config_path.is_file() || !result_path.is_file() {
            continue;
        }
        let config = ScenarioConfig::from_json(&std::fs::read_to_string(config_path)?)?;
        let result: EvaluationResult =
            serde_json::from_str(&std::fs::read_to_string(result_path)?)?;
        if controller.is_none() {
            if let Ok(log) = crate::replay::read_log(&case_dir.join("case.replay.json")) {
                controller = Some(log.controller);
                step_size = Some(log.step_size);
            }
        }
        template_id = config.template_id.clone();
        names.push(format!(
            "cases/{}",
            case_dir.file_name().unwrap().to_string_lossy()
        ));
        cases.push((config, result));
    }

    let summary = campaign_summary(&cases);
    Ok(CampaignReport {
        schema_version: REPORT_SCHEMA_VERSION,
        template_id,
        controller,
        sampler: None,
        budget: summary.cases_run,
        seed: None,
        step_size,
        workers: None,
        cases_run: summary.cases_run,
        collision_count: summary.collision_count,
        near_miss_count: summary.near_miss_count,
        best_fitness: summary.best_fitness,
        best_case: summary.best_case_index.map(|i| names[i].clone()),
        wall_time_seconds: None,
        per_generation: None,
        param_stats: summary.param_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(out: &Path) -> CampaignConfig {
        CampaignConfig {
            template_id: "ped_crossing".to_string(),
            controller: ControllerSpec::named("reactive_braking"),
            sampler: SamplerConfig::Uniform,
            budget: 1,
            seed: 7,
            step_size: DEFAULT_STEP_SIZE,
            output_dir: Some(out.to_path_buf()),
            workers: 1,
        }
    }

    #[test]
    fn minimal_campaign_writes_three_files_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        let report = run_campaign(&lib, &registry, &base_config(dir.path())).unwrap();
        assert_eq!(report.cases_run, 1);

        let case = dir.path().join("cases").join("0000");
        for file in ["config.json", "result.json", "case.replay.json"] {
            assert!(case.join(file).is_file(), "missing {file}");
        }
        assert!(dir.path().join("report.json").is_file());
    }

    #[test]
    fn campaign_validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();

        let mut c = base_config(dir.path());
        c.budget = 0;
        assert!(matches!(
            run_campaign(&lib, &registry, &c),
            Err(Error::InvalidCampaign(_))
        ));

        let mut c = base_config(dir.path());
        c.template_id = "nope".to_string();
        assert!(matches!(
            run_campaign(&lib, &registry, &c),
            Err(Error::UnknownTemplate(_))
        ));

        let mut c = base_config(dir.path());
        c.controller = ControllerSpec::named("nope");
        assert!(matches!(
            run_campaign(&lib, &registry, &c),
            Err(Error::UnknownController(_))
        ));

        let mut c = base_config(dir.path());
        c.sampler = SamplerConfig::Genetic(GaParams::default());
        c.budget = 10;
        assert!(matches!(
            run_campaign(&lib, &registry, &c),
            Err(Error::InvalidCampaign(_))
        ));

        let mut c = base_config(dir.path());
        c.output_dir = None;
        assert!(matches!(
            run_campaign(&lib, &registry, &c),
            Err(Error::InvalidCampaign(_))
        ));
    }

    #[test]
    fn identical_seeds_produce_identical_artifacts() {
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let mut c1 = base_config(d1.path());
        c1.budget = 6;
        let mut c2 = base_config(d2.path());
        c2.budget = 6;
        run_campaign(&lib, &registry, &c1).unwrap();
        run_campaign(&lib, &registry, &c2).unwrap();

        for i in 0..6 {
            for file in ["config.json", "result.json", "case.replay.json"] {
                let p1 = d1.path().join("cases").join(case_dir_name(i)).join(file);
                let p2 = d2.path().join("cases").join(case_dir_name(i)).join(file);
                assert_eq!(
                    std::fs::read(p1).unwrap(),
                    std::fs::read(p2).unwrap(),
                    "case {i} {file} differs"
                );
            }
        }
        // Reports identical after dropping wall time.
        let mut r1 = CampaignReport::from_json(
            &std::fs::read_to_string(d1.path().join("report.json")).unwrap(),
        )
        .unwrap();
        let mut r2 = CampaignReport::from_json(
            &std::fs::read_to_string(d2.path().join("report.json")).unwrap(),
        )
        .unwrap();
        r1.wall_time_seconds = None;
        r2.wall_time_seconds = None;
        assert_eq!(r1, r2);
    }

    #[test]
    fn genetic_budget_480_runs_20_generations_non_decreasing() {
        let dir = tempfile::tempdir().unwrap();
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        let mut config = base_config(dir.path());
        config.sampler = SamplerConfig::Genetic(GaParams::default());
        config.budget = 480;
        config.workers = 4;
        let report = run_campaign(&lib, &registry, &config).unwrap();
        assert_eq!(report.cases_run, 480);
        let generations = report.per_generation.unwrap();
        assert_eq!(generations.len(), 20);
        for pair in generations.windows(2) {
            assert!(
                pair[1].best_fitness >= pair[0].best_fitness,
                "per-generation best fitness decreased: {pair:?}"
            );
        }
    }

    #[test]
    fn partial_final_generation_is_evaluated_not_evolved() {
        let dir = tempfile::tempdir().unwrap();
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        let mut config = base_config(dir.path());
        config.sampler = SamplerConfig::Genetic(GaParams::default());
        config.budget = 50; // 2 full generations of 24 + 2 leftover cases
        let report = run_campaign(&lib, &registry, &config).unwrap();
        assert_eq!(report.cases_run, 50);
        let generations = report.per_generation.unwrap();
        assert_eq!(generations.len(), 3);
        assert_eq!(generations[0].cases, 24);
        assert_eq!(generations[1].cases, 24);
        assert_eq!(generations[2].cases, 2);
        // Budget accounting: exactly one directory per case.
        let n = std::fs::read_dir(dir.path().join("cases")).unwrap().count();
        assert_eq!(n, 50);
    }

    #[test]
    fn summarize_recounts_what_run_reported() {
        let dir = tempfile::tempdir().unwrap();
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        let mut config = base_config(dir.path());
        config.budget = 25;
        config.controller = ControllerSpec::named("constant_speed");
        let report = run_campaign(&lib, &registry, &config).unwrap();

        let recounted = summarize_dir(dir.path()).unwrap();
        assert_eq!(recounted.cases_run, report.cases_run);
        assert_eq!(recounted.collision_count, report.collision_count);
        assert_eq!(recounted.near_miss_count, report.near_miss_count);
        assert_eq!(recounted.best_fitness, report.best_fitness);
        assert_eq!(recounted.best_case, report.best_case);
        assert_eq!(recounted.param_stats, report.param_stats);
        assert_eq!(recounted.template_id, "ped_crossing");

        // Crash resilience: summarize works without the report file and
        // with missing case artifacts.
        std::fs::remove_file(dir.path().join("report.json")).unwrap();
        std::fs::remove_file(
            dir.path()
                .join("cases")
                .join(case_dir_name(3))
                .join("result.json"),
        )
        .unwrap();
        let partial = summarize_dir(dir.path()).unwrap();
        assert_eq!(partial.cases_run, 24);
    }

    #[test]
    fn campaign_config_json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.sampler = SamplerConfig::Genetic(GaParams::default());
        let parsed = CampaignConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(parsed, config);

        // Defaults fill in missing optional fields.
        let minimal = r#"{
            "template_id": "ped_crossing",
            "controller": {"name": "reactive_braking"},
            "sampler": {"kind": "uniform"},
            "budget": 5,
            "seed": 1
        }"#;
        let c = CampaignConfig::from_json(minimal).unwrap();
        assert_eq!(c.step_size, DEFAULT_STEP_SIZE);
        assert_eq!(c.workers, 1);
        assert!(c.output_dir.is_none());

        let genetic = r#"{
            "template_id": "ped_crossing",
            "controller": {"name": "reactive_braking"},
            "sampler": {"kind": "genetic", "population_size": 12},
            "budget": 24,
            "seed": 1
        }"#;
        let c = CampaignConfig::from_json(genetic).unwrap();
        match c.sampler {
            SamplerConfig::Genetic(ga) => {
                assert_eq!(ga.population_size, 12);
                assert_eq!(ga.elitism, 2);
            }
            _ => panic!("expected genetic sampler"),
        }
    }
}
