//! The built-in scenario library and template registry.
//!
//! Ten templates ship with the library, two per category. Four of them
//! (`ped_crossing`, `crossing_traffic`, `merge_cut_in`, `sudden_pedestrian`)
//! form the case-study set used by the falsification benchmarks. Templates
//! share a common parameter vocabulary where applicable:
//!
//! - `start_distance` (m): initial arc-length offset of an actor along its
//!   route (usually the ego),
//! - `v` (m/s): speed of the moving non-ego actor,
//! - `d_trigger` (m): ego distance at which a dormant actor starts moving,
//! - `cloudiness` (percent): weather, mapped linearly to controller
//!   visibility.
//!
//! User templates can be registered programmatically or loaded from a
//! directory of JSON files (one template per file).

use crate::error::Error;
use crate::geometry::Vec2;
use crate::scenario::{
    ActorClass, ActorSpec, ParameterSpec, ScenarioCategory, ScenarioTemplate, Terminators,
    TriggerRule, ValueRef,
};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// Template ids of the four case-study scenarios, spanning four categories.
pub const CASE_STUDY_TEMPLATES: [&str; 4] = [
    "ped_crossing",
    "crossing_traffic",
    "merge_cut_in",
    "sudden_pedestrian",
];

/// Read-mostly registry of scenario templates. After construction and
/// registration it is shared immutably across batch workers.
#[derive(Clone, Debug, Default)]
pub struct ScenarioLibrary {
    templates: BTreeMap<String, Arc<ScenarioTemplate>>,
}

impl ScenarioLibrary {
    /// An empty library with no templates.
    pub fn empty() -> Self {
        ScenarioLibrary::default()
    }

    /// The library preloaded with all built-in templates.
    pub fn with_builtins() -> Self {
        let mut lib = ScenarioLibrary::empty();
        for template in builtin_templates() {
            lib.register(template)
                .expect("built-in templates are valid");
        }
        lib
    }

    /// Validates and registers a template. Fails on duplicate ids or
    /// structural problems.
    pub fn register(&mut self, template: ScenarioTemplate) -> Result<(), Error> {
        template.validate()?;
        if self.templates.contains_key(&template.template_id) {
            return Err(Error::DuplicateTemplate(template.template_id));
        }
        self.templates
            .insert(template.template_id.clone(), Arc::new(template));
        Ok(())
    }

    /// Loads every `*.json` file in `dir` as a template, in sorted file-name
    /// order. Returns the number of templates loaded.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, Error> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        let mut loaded = 0;
        for path in paths {
            let text = std::fs::read_to_string(&path)?;
            let template: ScenarioTemplate = serde_json::from_str(&text)?;
            self.register(template)?;
            loaded += 1;
        }
        Ok(loaded)
    }

    /// All `(template_id, category)` pairs, sorted by template id.
    pub fn list(&self) -> Vec<(String, ScenarioCategory)> {
        self.templates
            .values()
            .map(|t| (t.template_id.clone(), t.category))
            .collect()
    }

    pub fn get(&self, template_id: &str) -> Result<Arc<ScenarioTemplate>, Error> {
        self.templates
            .get(template_id)
            .cloned()
            .ok_or_else(|| Error::UnknownTemplate(template_id.to_string()))
    }

    pub fn contains(&self, template_id: &str) -> bool {
        self.templates.contains_key(template_id)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

fn pt(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

/// Ego initial speed in every built-in template, matching the controllers'
/// default target speed.
pub const EGO_CRUISE_SPEED: f64 = 6.5;
/// Ego disc radius in every built-in template.
pub const EGO_RADIUS: f64 = 0.9;

fn ego_actor(route: Vec<Vec2>, offset: ValueRef) -> ActorSpec {
    ActorSpec {
        actor_id: "ego".to_string(),
        actor_class: ActorClass::Ego,
        footprint: EGO_RADIUS,
        route,
        initial_offset: offset,
        speed: ValueRef::Constant(EGO_CRUISE_SPEED),
        trigger: None,
    }
}

fn triggered_actor(id: &str, class: ActorClass, radius: f64, route: Vec<Vec2>) -> ActorSpec {
    ActorSpec {
        actor_id: id.to_string(),
        actor_class: class,
        footprint: radius,
        route,
        initial_offset: ValueRef::Constant(0.0),
        speed: ValueRef::param("v"),
        trigger: Some(TriggerRule::ego_distance(ValueRef::param("d_trigger"))),
    }
}

fn standard_params(v_lower: f64, v_upper: f64) -> Vec<ParameterSpec> {
    vec![
        ParameterSpec::continuous("v", "m/s", v_lower, v_upper),
        ParameterSpec::continuous("d_trigger", "m", 5.0, 30.0),
        ParameterSpec::continuous("start_distance", "m", 20.0, 60.0),
        ParameterSpec::continuous("cloudiness", "percent", 0.0, 100.0),
    ]
}

fn template(
    id: &str,
    category: ScenarioCategory,
    actors: Vec<ActorSpec>,
    parameters: Vec<ParameterSpec>,
    horizon: f64,
) -> ScenarioTemplate {
    ScenarioTemplate {
        template_id: id.to_string(),
        category,
        actors,
        parameters,
        weather_parameters: vec!["cloudiness".to_string()],
        horizon,
        terminators: Terminators::default(),
    }
}

fn builtin_templates() -> Vec<ScenarioTemplate> {
    vec![
        // --- Obstacle recognition -------------------------------------------

        // Static obstacle on a straight road; its position along the shoulder
        // line is the start_distance parameter.
        template(
            "static_obstacle",
            ScenarioCategory::ObstacleRecognition,
            vec![
                ego_actor(vec![pt(0.0, 0.0), pt(100.0, 0.0)], ValueRef::Constant(0.0)),
                ActorSpec {
                    actor_id: "obstacle".to_string(),
                    actor_class: ActorClass::StaticObstacle,
                    footprint: 0.8,
                    route: vec![pt(0.0, 0.3), pt(80.0, 0.3)],
                    initial_offset: ValueRef::param("start_distance"),
                    speed: ValueRef::Constant(0.0),
                    trigger: None,
                },
            ],
            vec![
                ParameterSpec::continuous("start_distance", "m", 20.0, 60.0),
                ParameterSpec::continuous("cloudiness", "percent", 0.0, 100.0),
            ],
            25.0,
        ),
        // Stationary vehicle hidden just after a 90-degree turn.
        template(
            "obstacle_after_turn",
            ScenarioCategory::ObstacleRecognition,
            vec![
                ego_actor(
                    vec![pt(0.0, 0.0), pt(40.0, 0.0), pt(40.0, 40.0)],
                    ValueRef::Constant(0.0),
                ),
                ActorSpec {
                    actor_id: "stalled".to_string(),
                    actor_class: ActorClass::Vehicle,
                    footprint: 0.9,
                    route: vec![pt(40.0, 2.0), pt(40.0, 32.0)],
                    initial_offset: ValueRef::param("start_distance"),
                    speed: ValueRef::Constant(0.0),
                    trigger: None,
                },
            ],
            vec![
                ParameterSpec::continuous("start_distance", "m", 5.0, 25.0),
                ParameterSpec::continuous("cloudiness", "percent", 0.0, 100.0),
            ],
            25.0,
        ),
        // --- Intersection encounters ----------------------------------------

        // Cross traffic from a side street; the crossing vehicle pulls out when
        // the ego gets close.
        template(
            "crossing_traffic",
            ScenarioCategory::IntersectionEncounter,
            vec![
                ego_actor(
                    vec![pt(0.0, 0.0), pt(120.0, 0.0)],
                    ValueRef::param("start_distance"),
                ),
                triggered_actor(
                    "crosser",
                    ActorClass::Vehicle,
                    0.9,
                    vec![pt(80.0, 10.0), pt(80.0, -30.0)],
                ),
            ],
            standard_params(3.0, 12.0),
            20.0,
        ),
        // Oncoming vehicle turning across the ego lane at a crossroads.
        template(
            "oncoming_left_turn",
            ScenarioCategory::IntersectionEncounter,
            vec![
                ego_actor(
                    vec![pt(0.0, 0.0), pt(120.0, 0.0)],
                    ValueRef::param("start_distance"),
                ),
                triggered_actor(
                    "oncoming",
                    ActorClass::Vehicle,
                    0.9,
                    vec![pt(95.0, 3.5), pt(82.0, 3.5), pt(76.0, -8.0)],
                ),
            ],
            standard_params(3.0, 10.0),
            20.0,
        ),
        // --- Pedestrian and non-motorized interactions -----------------------

        // A pedestrian steps off the curb and crosses when the ego comes within
        // the trigger distance.
        template(
            "ped_crossing",
            ScenarioCategory::PedestrianNonMotorized,
            vec![
                ego_actor(
                    vec![pt(0.0, 0.0), pt(100.0, 0.0)],
                    ValueRef::param("start_distance"),
                ),
                triggered_actor(
                    "pedestrian",
                    ActorClass::Pedestrian,
                    0.3,
                    vec![pt(70.0, 6.0), pt(70.0, -4.0)],
                ),
            ],
            standard_params(0.5, 3.0),
            20.0,
        ),
        // A bicycle cuts diagonally across the intersection.
        template(
            "bicycle_diagonal",
            ScenarioCategory::PedestrianNonMotorized,
            vec![
                ego_actor(
                    vec![pt(0.0, 0.0), pt(110.0, 0.0)],
                    ValueRef::param("start_distance"),
                ),
                triggered_actor(
                    "bicycle",
                    ActorClass::Bicycle,
                    0.4,
                    vec![pt(85.0, 12.0), pt(65.0, -8.0)],
                ),
            ],
            standard_params(2.0, 8.0),
            20.0,
        ),
        // --- Surrounding vehicle interactions --------------------------------

        // A parked vehicle ahead pulls out as the ego approaches, drives to the
        // end of its route and halts there.
        template(
            "lead_vehicle_brake",
            ScenarioCategory::SurroundingVehicle,
            vec![
                ego_actor(vec![pt(0.0, 0.0), pt(110.0, 0.0)], ValueRef::Constant(0.0)),
                ActorSpec {
                    actor_id: "lead".to_string(),
                    actor_class: ActorClass::Vehicle,
                    footprint: 0.9,
                    route: vec![pt(0.0, 0.0), pt(75.0, 0.0)],
                    initial_offset: ValueRef::param("start_distance"),
                    speed: ValueRef::param("v"),
                    trigger: Some(TriggerRule::ego_distance(ValueRef::param("d_trigger"))),
                },
            ],
            standard_params(2.0, 10.0),
            25.0,
        ),
        // A vehicle merges into the ego lane from the adjacent lane ahead.
        template(
            "merge_cut_in",
            ScenarioCategory::SurroundingVehicle,
            vec![
                ego_actor(
                    vec![pt(0.0, 0.0), pt(110.0, 0.0)],
                    ValueRef::param("start_distance"),
                ),
                triggered_actor(
                    "merger",
                    ActorClass::Vehicle,
                    0.9,
                    vec![pt(55.0, 3.5), pt(70.0, 0.0), pt(90.0, 0.0)],
                ),
            ],
            standard_params(2.0, 10.0),
            20.0,
        ),
        // --- Emergency evasion ------------------------------------------------

        // A pedestrian darts from just off the lane edge: very little distance
        // between trigger and conflict.
        template(
            "sudden_pedestrian",
            ScenarioCategory::EmergencyEvasion,
            vec![
                ego_actor(
                    vec![pt(0.0, 0.0), pt(105.0, 0.0)],
                    ValueRef::param("start_distance"),
                ),
                triggered_actor(
                    "runner",
                    ActorClass::Pedestrian,
                    0.3,
                    vec![pt(75.0, 2.8), pt(75.0, -4.0)],
                ),
            ],
            standard_params(1.0, 4.0),
            20.0,
        ),
        // An adjacent vehicle loses control and swerves into the ego lane.
        template(
            "adjacent_swerve",
            ScenarioCategory::EmergencyEvasion,
            vec![
                ego_actor(
                    vec![pt(0.0, 0.0), pt(110.0, 0.0)],
                    ValueRef::param("start_distance"),
                ),
                triggered_actor(
                    "swerver",
                    ActorClass::Vehicle,
                    0.9,
                    vec![pt(58.0, 3.2), pt(68.0, 0.5), pt(85.0, 0.5)],
                ),
            ],
            standard_params(4.0, 12.0),
            20.0,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{instantiate, validate_bindings};

    #[test]
    fn builtins_cover_all_categories_twice() {
        let lib = ScenarioLibrary::with_builtins();
        let mut per_category: BTreeMap<ScenarioCategory, usize> = BTreeMap::new();
        for (_, cat) in lib.list() {
            *per_category.entry(cat).or_default() += 1;
        }
        for cat in ScenarioCategory::ALL {
            assert!(
                per_category.get(&cat).copied().unwrap_or(0) >= 2,
                "category {cat} has fewer than 2 templates"
            );
        }
        for id in CASE_STUDY_TEMPLATES {
            assert!(lib.contains(id), "missing case-study template {id}");
        }
        assert!(lib.len() >= 5);
    }

    #[test]
    fn moving_actor_templates_expose_standard_parameters() {
        let lib = ScenarioLibrary::with_builtins();
        for (id, _) in lib.list() {
            let t = lib.get(&id).unwrap();
            let has_moving_non_ego = t
                .actors
                .iter()
                .any(|a| a.actor_class != ActorClass::Ego && a.speed != ValueRef::Constant(0.0));
            if has_moving_non_ego {
                for p in ["start_distance", "d_trigger", "v"] {
                    assert!(t.parameter(p).is_some(), "{id} lacks parameter {p}");
                }
            }
        }
    }

    #[test]
    fn list_is_sorted_and_stable() {
        let lib = ScenarioLibrary::with_builtins();
        let a = lib.list();
        let b = lib.list();
        assert_eq!(a, b);
        let ids: Vec<_> = a.iter().map(|(id, _)| id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn register_appends_and_rejects_duplicates() {
        let mut lib = ScenarioLibrary::with_builtins();
        let before = lib.list();
        let mut custom = (*lib.get("ped_crossing").unwrap()).clone();
        custom.template_id = "t_custom".to_string();
        lib.register(custom.clone()).unwrap();
        let after = lib.list();
        assert_eq!(after.len(), before.len() + 1);
        assert!(lib.contains("t_custom"));
        assert!(matches!(
            lib.register(custom),
            Err(Error::DuplicateTemplate(_))
        ));
    }

    #[test]
    fn get_known_and_unknown_templates() {
        let lib = ScenarioLibrary::with_builtins();
        let ped = lib.get("ped_crossing").unwrap();
        assert_eq!(ped.category, ScenarioCategory::PedestrianNonMotorized);
        let v = ped.parameter("v").unwrap();
        assert_eq!(v.unit, "m/s");
        assert!(ped.parameter("d_trigger").unwrap().unit == "m");

        let lead = lib.get("lead_vehicle_brake").unwrap();
        assert_eq!(lead.category, ScenarioCategory::SurroundingVehicle);

        assert!(matches!(
            lib.get("no_such_id"),
            Err(Error::UnknownTemplate(_))
        ));
    }

    #[test]
    fn in_range_bindings_instantiate_for_every_builtin() {
        let lib = ScenarioLibrary::with_builtins();
        for (id, _) in lib.list() {
            let t = lib.get(&id).unwrap();
            // Midpoint of every range is always valid.
            let bindings: BTreeMap<String, f64> = t
                .parameters
                .iter()
                .map(|p| (p.name.clone(), 0.5 * (p.lower + p.upper)))
                .collect();
            assert!(validate_bindings(&t, &bindings).is_empty(), "{id}");
            instantiate(&t, &bindings, 1).unwrap();
        }
    }

    #[test]
    fn template_json_roundtrip() {
        let lib = ScenarioLibrary::with_builtins();
        let t = lib.get("ped_crossing").unwrap();
        let json = serde_json::to_string_pretty(&*t).unwrap();
        let parsed: ScenarioTemplate = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, *t);
    }

    #[test]
    fn load_dir_reads_template_files() {
        let dir = tempfile::tempdir().unwrap();
        let lib = ScenarioLibrary::with_builtins();
        let mut t = (*lib.get("ped_crossing").unwrap()).clone();
        t.template_id = "from_file".to_string();
        std::fs::write(
            dir.path().join("from_file.json"),
            serde_json::to_string_pretty(&t).unwrap(),
        )
        .unwrap();
        std::fs::write(dir.path().join("ignored.txt"), "not a template").unwrap();

        let mut lib = ScenarioLibrary::with_builtins();
        let loaded = lib.load_dir(dir.path()).unwrap();
        assert_eq!(loaded, 1);
        assert!(lib.contains("from_file"));
    }
}
