//! Trace scoring: collision flag, minimum distance, fitness.
//!
//! Fitness is the scalar the genetic sampler maximizes: `1 / (1 + d)` for a
//! closest approach of `d` meters, pinned to 2 for collisions. It is
//! strictly decreasing in distance, so ranking by fitness equals ranking by
//! danger.

use crate::error::Error;
use crate::scenario::{ResolvedScenario, ScenarioConfig};
use crate::sim::{pairwise_min_distance, Outcome, Trace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Non-collision cases closer than this count as near misses in reports.
pub const NEAR_MISS_THRESHOLD: f64 = 0.5;

/// Schema version stamped into per-case result files.
pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Score of one test case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub schema_version: u32,
    pub collision: bool,
    /// Whole-run minimum ego-to-actor surface distance, meters, >= 0.
    pub min_distance: f64,
    /// Time of the earliest frame attaining the minimum, seconds.
    pub time_of_min: f64,
    /// In (0, 2]; exactly 2 iff collision.
    pub fitness: f64,
    pub outcome: Outcome,
}

/// The fitness form: 2 for collisions, otherwise `1 / (1 + min_distance)`.
pub fn fitness_of(collision: bool, min_distance: f64) -> f64 {
    if collision {
        2.0
    } else {
        1.0 / (1.0 + min_distance)
    }
}

/// Scores a trace. Pure function of the trace and the scenario geometry.
pub fn evaluate(trace: &Trace, scenario: &ResolvedScenario) -> Result<EvaluationResult, Error> {
    if trace.frames.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if scenario.others.is_empty() {
        return Err(Error::NoOtherActors);
    }
    let mut min_distance = f64::INFINITY;
    let mut time_of_min = 0.0;
    for frame in &trace.frames {
        let d = pairwise_min_distance(frame, scenario)?;
        if d < min_distance {
            min_distance = d;
            time_of_min = frame.time;
        }
    }
    let collision = trace.outcome == Outcome::Collision;
    Ok(EvaluationResult {
        schema_version: RESULT_SCHEMA_VERSION,
        collision,
        min_distance,
        time_of_min,
        fitness: fitness_of(collision, min_distance),
        outcome: trace.outcome,
    })
}

/// Descriptive statistics of one parameter over the colliding configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub samples: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub stddev: f64,
}

/// Aggregate counts over a set of evaluated cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryCounts {
    pub cases_run: usize,
    pub collision_count: usize,
    pub near_miss_count: usize,
    pub best_fitness: Option<f64>,
    /// Index (into the input order) of the best case; ties go to the lowest
    /// index.
    pub best_case_index: Option<usize>,
    /// Per-parameter statistics of the colliding configs.
    pub param_stats: BTreeMap<String, ParamStats>,
}

impl SummaryCounts {
    pub fn empty() -> Self {
        SummaryCounts {
            cases_run: 0,
            collision_count: 0,
            near_miss_count: 0,
            best_fitness: None,
            best_case_index: None,
            param_stats: BTreeMap::new(),
        }
    }
}

/// Folds per-case results into campaign totals.
pub fn campaign_summary(cases: &[(ScenarioConfig, EvaluationResult)]) -> SummaryCounts {
    let mut summary = SummaryCounts::empty();
    summary.cases_run = cases.len();

    let mut colliding_values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (index, (config, result)) in cases.iter().enumerate() {
        if result.collision {
            summary.collision_count += 1;
            for (name, value) in &config.bindings {
                colliding_values
                    .entry(name.clone())
                    .or_default()
                    .push(*value);
            }
        } else if result.min_distance < NEAR_MISS_THRESHOLD {
            summary.near_miss_count += 1;
        }
        let better = match summary.best_fitness {
            None => true,
            Some(best) => result.fitness > best,
        };
        if better {
            summary.best_fitness = Some(result.fitness);
            summary.best_case_index = Some(index);
        }
    }

    for (name, values) in colliding_values {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        summary.param_stats.insert(
            name,
            ParamStats {
                samples: values.len(),
                mean,
                min,
                max,
                stddev: var.sqrt(),
            },
        );
    }
    summary
}
