//! Scenario templates, parameter bindings, and concrete scenario
//! configurations.
//!
//! A [`ScenarioTemplate`] is a reusable traffic situation: actors on polyline
//! routes, optional distance triggers, free parameters with ranges. Binding
//! every parameter to a value plus a seed yields a [`ScenarioConfig`], the
//! unit of one test case. Templates and configs serialize as JSON; config
//! files have lexicographically sorted keys and round-trip-exact floats.

use crate::error::Error;
use crate::geometry::{Polyline, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Schema version stamped into scenario configuration files.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Visibility range in clear weather (cloudiness 0).
pub const VISIBILITY_MAX: f64 = 60.0;
/// Visibility range in fully overcast weather (cloudiness 100).
pub const VISIBILITY_MIN: f64 = 15.0;

/// Maps a cloudiness percentage to a controller visibility range in meters,
/// linearly from [`VISIBILITY_MAX`] down to [`VISIBILITY_MIN`].
pub fn visibility_from_cloudiness(cloudiness: f64) -> f64 {
    VISIBILITY_MAX - (cloudiness / 100.0) * (VISIBILITY_MAX - VISIBILITY_MIN)
}

/// How a parameter's value domain is shaped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Continuous,
    /// Lattice `{lower, lower + step, ..., upper}`; `upper - lower` must be an
    /// integer multiple of `step`.
    Stepped {
        step: f64,
    },
}

/// A free parameter of a template: name, unit, inclusive range, domain shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    pub unit: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: ParamKind,
}

impl ParameterSpec {
    pub fn continuous(name: &str, unit: &str, lower: f64, upper: f64) -> Self {
        ParameterSpec {
            name: name.to_string(),
            unit: unit.to_string(),
            lower,
            upper,
            kind: ParamKind::Continuous,
        }
    }

    pub fn stepped(name: &str, unit: &str, lower: f64, upper: f64, step: f64) -> Self {
        ParameterSpec {
            name: name.to_string(),
            unit: unit.to_string(),
            lower,
            upper,
            kind: ParamKind::Stepped { step },
        }
    }

    fn check(&self) -> Result<(), String> {
        if !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(format!("parameter {}: non-finite range", self.name));
        }
        if self.lower > self.upper {
            return Err(format!("parameter {}: lower > upper", self.name));
        }
        if let ParamKind::Stepped { step } = self.kind {
            if step.is_nan() || step <= 0.0 {
                return Err(format!("parameter {}: step must be > 0", self.name));
            }
            let spans = (self.upper - self.lower) / step;
            if (spans - spans.round()).abs() > 1e-9 {
                return Err(format!(
                    "parameter {}: range width is not a multiple of step",
                    self.name
                ));
            }
        }
        Ok(())
    }

    /// True when `value` lies on the parameter's lattice (always true for
    /// continuous parameters). Uses a 1e-9 slack on the step quotient.
    pub fn on_step(&self, value: f64) -> bool {
        match self.kind {
            ParamKind::Continuous => true,
            ParamKind::Stepped { step } => {
                let t = (value - self.lower) / step;
                (t - t.round()).abs() <= 1e-9
            }
        }
    }
}

/// The five scenario families in the built-in library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioCategory {
    ObstacleRecognition,
    IntersectionEncounter,
    PedestrianNonMotorized,
    SurroundingVehicle,
    EmergencyEvasion,
}

impl ScenarioCategory {
    pub const ALL: [ScenarioCategory; 5] = [
        ScenarioCategory::ObstacleRecognition,
        ScenarioCategory::IntersectionEncounter,
        ScenarioCategory::PedestrianNonMotorized,
        ScenarioCategory::SurroundingVehicle,
        ScenarioCategory::EmergencyEvasion,
    ];
}

impl fmt::Display for ScenarioCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorClass {
    Ego,
    Vehicle,
    Pedestrian,
    Bicycle,
    StaticObstacle,
}

/// A scalar that is either a literal or a reference to a template parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueRef {
    Constant(f64),
    Parameter { param: String },
}

impl ValueRef {
    pub fn param(name: &str) -> Self {
        ValueRef::Parameter {
            param: name.to_string(),
        }
    }

    pub fn param_name(&self) -> Option<&str> {
        match self {
            ValueRef::Constant(_) => None,
            ValueRef::Parameter { param } => Some(param),
        }
    }

    fn resolve(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, Error> {
        match self {
            ValueRef::Constant(v) => Ok(*v),
            ValueRef::Parameter { param } => bindings.get(param).copied().ok_or_else(|| {
                Error::InvalidBindings(vec![BindingViolation::Missing {
                    name: param.clone(),
                }])
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerMetric {
    Euclidean,
}

/// A dormant actor starts moving once the reference actor comes within
/// `trigger_distance` (Euclidean, checked at frame boundaries). A fired
/// trigger never un-fires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerRule {
    pub reference_actor: String,
    pub trigger_distance: ValueRef,
    pub metric: TriggerMetric,
}

impl TriggerRule {
    pub fn ego_distance(distance: ValueRef) -> Self {
        TriggerRule {
            reference_actor: "ego".to_string(),
            trigger_distance: distance,
            metric: TriggerMetric::Euclidean,
        }
    }
}

/// One traffic participant: disc footprint, polyline route, initial
/// arc-length offset, longitudinal speed, optional trigger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActorSpec {
    pub actor_id: String,
    pub actor_class: ActorClass,
    /// Disc radius in meters.
    pub footprint: f64,
    pub route: Vec<Vec2>,
    pub initial_offset: ValueRef,
    pub speed: ValueRef,
    #[serde(default)]
    pub trigger: Option<TriggerRule>,
}

/// Which conditions end a run. The timeout terminator must stay enabled;
/// collision and route completion can be disabled to let a run play out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Terminators {
    pub collision: bool,
    pub route_completed: bool,
    pub timeout: bool,
}

impl Default for Terminators {
    fn default() -> Self {
        Terminators {
            collision: true,
            route_completed: true,
            timeout: true,
        }
    }
}

/// A reusable, parameterized traffic situation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTemplate {
    pub template_id: String,
    pub category: ScenarioCategory,
    pub actors: Vec<ActorSpec>,
    pub parameters: Vec<ParameterSpec>,
    /// Names of parameters that model the environment rather than an actor.
    /// A parameter named `cloudiness` feeds the visibility model.
    #[serde(default)]
    pub weather_parameters: Vec<String>,
    /// Simulation horizon in seconds.
    pub horizon: f64,
    #[serde(default)]
    pub terminators: Terminators,
}

/// One reported problem with a set of bindings. Violations are data, not
/// errors: validation reports all of them at once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BindingViolation {
    OutOfRange {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    OffStep {
        name: String,
        value: f64,
        step: f64,
    },
    Missing {
        name: String,
    },
    Extra {
        name: String,
    },
}

impl fmt::Display for BindingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingViolation::OutOfRange {
                name,
                value,
                lower,
                upper,
            } => write!(f, "{name} = {value} outside [{lower}, {upper}]"),
            BindingViolation::OffStep { name, value, step } => {
                write!(f, "{name} = {value} not on step {step}")
            }
            BindingViolation::Missing { name } => write!(f, "missing binding for {name}"),
            BindingViolation::Extra { name } => write!(f, "extra binding {name}"),
        }
    }
}

impl ScenarioTemplate {
    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidTemplate {
            template_id: self.template_id.clone(),
            reason: reason.into(),
        }
    }

    /// Checks every structural invariant of the template. Called on
    /// registration and when loading template files.
    pub fn validate(&self) -> Result<(), Error> {
        if self.template_id.is_empty() {
            return Err(self.invalid("empty template_id"));
        }
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(self.invalid("horizon must be positive and finite"));
        }
        if !self.terminators.timeout {
            return Err(self.invalid("the timeout terminator must be enabled"));
        }

        let mut names = std::collections::BTreeSet::new();
        for p in &self.parameters {
            p.check().map_err(|r| self.invalid(r))?;
            if !names.insert(p.name.clone()) {
                return Err(self.invalid(format!("duplicate parameter name {}", p.name)));
            }
        }
        for w in &self.weather_parameters {
            if self.parameter(w).is_none() {
                return Err(self.invalid(format!("weather parameter {w} is not declared")));
            }
        }

        let ego_count = self
            .actors
            .iter()
            .filter(|a| a.actor_class == ActorClass::Ego)
            .count();
        if ego_count != 1 {
            return Err(self.invalid(format!("expected exactly one ego actor, found {ego_count}")));
        }

        let mut ids = std::collections::BTreeSet::new();
        for actor in &self.actors {
            if !ids.insert(actor.actor_id.clone()) {
                return Err(self.invalid(format!("duplicate actor id {}", actor.actor_id)));
            }
            if actor.footprint.is_nan() || actor.footprint <= 0.0 {
                return Err(self.invalid(format!(
                    "actor {}: footprint radius must be > 0",
                    actor.actor_id
                )));
            }
            let route = Polyline::new(actor.route.clone()).ok_or_else(|| {
                self.invalid(format!(
                    "actor {}: route needs at least 2 distinct consecutive waypoints",
                    actor.actor_id
                ))
            })?;
            self.check_scalar_ref(
                &actor.initial_offset,
                &format!("actor {} initial_offset", actor.actor_id),
                0.0,
                route.length(),
            )?;
            self.check_scalar_ref(
                &actor.speed,
                &format!("actor {} speed", actor.actor_id),
                0.0,
                f64::INFINITY,
            )?;
            if let Some(trigger) = &actor.trigger {
                if actor.actor_class == ActorClass::Ego {
                    return Err(self.invalid("the ego actor cannot carry a trigger"));
                }
                if !self
                    .actors
                    .iter()
                    .any(|a| a.actor_id == trigger.reference_actor)
                {
                    return Err(self.invalid(format!(
                        "actor {}: trigger references unknown actor {}",
                        actor.actor_id, trigger.reference_actor
                    )));
                }
                // Resolved trigger distances must be strictly positive.
                self.check_scalar_ref(
                    &trigger.trigger_distance,
                    &format!("actor {} trigger_distance", actor.actor_id),
                    f64::MIN_POSITIVE,
                    f64::INFINITY,
                )?;
            }
        }
        Ok(())
    }

    /// A scalar reference must either be a constant inside `[lo, hi]` or a
    /// parameter whose whole range fits inside `[lo, hi]`.
    fn check_scalar_ref(
        &self,
        value: &ValueRef,
        what: &str,
        lo: f64,
        hi: f64,
    ) -> Result<(), Error> {
        match value {
            ValueRef::Constant(v) => {
                if !v.is_finite() || *v < lo || *v > hi {
                    return Err(self.invalid(format!("{what}: constant {v} outside [{lo}, {hi}]")));
                }
            }
            ValueRef::Parameter { param } => {
                let spec = self
                    .parameter(param)
                    .ok_or_else(|| self.invalid(format!("{what}: unknown parameter {param}")))?;
                if spec.lower < lo || spec.upper > hi {
                    return Err(self.invalid(format!(
                        "{what}: parameter {param} range [{}, {}] exceeds [{lo}, {hi}]",
                        spec.lower, spec.upper
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Reports every out-of-range, missing, extra, or off-step binding. An empty
/// result means a [`ScenarioConfig`] built from these bindings would satisfy
/// its invariants.
pub fn validate_bindings(
    template: &ScenarioTemplate,
    bindings: &BTreeMap<String, f64>,
) -> Vec<BindingViolation> {
    let mut violations = Vec::new();
    for spec in &template.parameters {
        match bindings.get(&spec.name) {
            None => violations.push(BindingViolation::Missing {
                name: spec.name.clone(),
            }),
            Some(&value) => {
                if !value.is_finite() || value < spec.lower || value > spec.upper {
                    violations.push(BindingViolation::OutOfRange {
                        name: spec.name.clone(),
                        value,
                        lower: spec.lower,
                        upper: spec.upper,
                    });
                } else if !spec.on_step(value) {
                    let step = match spec.kind {
                        ParamKind::Stepped { step } => step,
                        ParamKind::Continuous => unreachable!(),
                    };
                    violations.push(BindingViolation::OffStep {
                        name: spec.name.clone(),
                        value,
                        step,
                    });
                }
            }
        }
    }
    for name in bindings.keys() {
        if template.parameter(name).is_none() {
            violations.push(BindingViolation::Extra { name: name.clone() });
        }
    }
    violations
}

/// A template with every parameter bound plus an RNG seed: one test case.
/// Field order is alphabetical so serialized keys come out sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub bindings: BTreeMap<String, f64>,
    pub schema_version: u32,
    pub seed: u64,
    pub template_id: String,
}

impl ScenarioConfig {
    /// Canonical file form: pretty JSON, sorted keys, trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialization");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Binds a template to concrete values. Pure: consumes no randomness; the
/// seed is stored for the simulation stage.
pub fn instantiate(
    template: &ScenarioTemplate,
    bindings: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<ScenarioConfig, Error> {
    let violations = validate_bindings(template, bindings);
    if !violations.is_empty() {
        return Err(Error::InvalidBindings(violations));
    }
    Ok(ScenarioConfig {
        bindings: bindings.clone(),
        schema_version: CONFIG_SCHEMA_VERSION,
        seed,
        template_id: template.template_id.clone(),
    })
}

/// Which actor a resolved trigger measures distance against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriggerReference {
    Ego,
    /// Index into the resolved `others` list.
    Other(usize),
}

#[derive(Clone, Debug)]
pub struct ResolvedTrigger {
    pub reference: TriggerReference,
    pub distance: f64,
}

/// An actor with all parameter references replaced by values and its route
/// compiled to an arc-length polyline.
#[derive(Clone, Debug)]
pub struct ResolvedActor {
    pub actor_id: String,
    pub class: ActorClass,
    pub radius: f64,
    pub route: Arc<Polyline>,
    pub initial_offset: f64,
    pub speed: f64,
    pub trigger: Option<ResolvedTrigger>,
}

/// A fully bound scenario ready to simulate. `others` preserves template
/// order; the ego is split out.
#[derive(Clone, Debug)]
pub struct ResolvedScenario {
    pub template_id: String,
    pub ego: ResolvedActor,
    pub others: Vec<ResolvedActor>,
    pub visibility: f64,
    pub horizon: f64,
    pub terminators: Terminators,
}

/// Resolves `config.bindings` against a template. Only structural problems
/// (unresolvable parameter references, broken routes) are errors here; range
/// checking belongs to [`instantiate`]. This keeps replay verification able
/// to re-execute logs whose stored bindings were edited out of range.
pub fn resolve(
    template: &ScenarioTemplate,
    config: &ScenarioConfig,
) -> Result<ResolvedScenario, Error> {
    let bindings = &config.bindings;
    let non_ego_ids: Vec<&str> = template
        .actors
        .iter()
        .filter(|a| a.actor_class != ActorClass::Ego)
        .map(|a| a.actor_id.as_str())
        .collect();

    let resolve_actor = |spec: &ActorSpec| -> Result<ResolvedActor, Error> {
        let route = Polyline::new(spec.route.clone()).ok_or_else(|| Error::InvalidTemplate {
            template_id: template.template_id.clone(),
            reason: format!("actor {}: invalid route", spec.actor_id),
        })?;
        let initial_offset = spec
            .initial_offset
            .resolve(bindings)?
            .clamp(0.0, route.length());
        let trigger = match &spec.trigger {
            None => None,
            Some(rule) => {
                let reference = if rule.reference_actor
                    == template
                        .actors
                        .iter()
                        .find(|a| a.actor_class == ActorClass::Ego)
                        .map(|a| a.actor_id.as_str())
                        .unwrap_or("")
                {
                    TriggerReference::Ego
                } else {
                    let idx = non_ego_ids
                        .iter()
                        .position(|id| *id == rule.reference_actor)
                        .ok_or_else(|| Error::InvalidTemplate {
                            template_id: template.template_id.clone(),
                            reason: format!(
                                "trigger references unknown actor {}",
                                rule.reference_actor
                            ),
                        })?;
                    TriggerReference::Other(idx)
                };
                Some(ResolvedTrigger {
                    reference,
                    distance: rule.trigger_distance.resolve(bindings)?,
                })
            }
        };
        Ok(ResolvedActor {
            actor_id: spec.actor_id.clone(),
            class: spec.actor_class,
            radius: spec.footprint,
            route: Arc::new(route),
            initial_offset,
            speed: spec.speed.resolve(bindings)?,
            trigger,
        })
    };

    let mut ego = None;
    let mut others = Vec::new();
    for spec in &template.actors {
        let actor = resolve_actor(spec)?;
        if spec.actor_class == ActorClass::Ego {
            ego = Some(actor);
        } else {
            others.push(actor);
        }
    }
    let ego = ego.ok_or_else(|| Error::InvalidTemplate {
        template_id: template.template_id.clone(),
        reason: "no ego actor".to_string(),
    })?;

    let visibility = template
        .weather_parameters
        .iter()
        .find(|w| w.as_str() == "cloudiness")
        .and_then(|w| bindings.get(w))
        .map(|c| visibility_from_cloudiness(*c))
        .unwrap_or(VISIBILITY_MAX);

    Ok(ResolvedScenario {
        template_id: template.template_id.clone(),
        ego,
        others,
        visibility,
        horizon: template.horizon,
        terminators: template.terminators,
    })
}
