//! Built-in scenarios, loaded from `data/scenarios.json`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GraspRule, ObjectState, OrientationClass, SceneState, SimError};

pub const SCENARIOS_JSON: &str = include_str!("../../data/scenarios.json");

/// Half-width of the seeded layout shift (m).
const JITTER: f64 = 0.03;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    pub position: [f64; 3],
    pub orientation: OrientationClass,
    #[serde(default = "yes")]
    pub toppleable: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub description: String,
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub rules: Vec<GraspRule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub table_height: f64,
    pub scenarios: BTreeMap<String, ScenarioSpec>,
}

fn file() -> &'static ScenarioFile {
    static FILE: OnceLock<ScenarioFile> = OnceLock::new();
    FILE.get_or_init(|| serde_json::from_str(SCENARIOS_JSON).expect("bundled scenarios parse"))
}

pub fn scenario_names() -> Vec<&'static str> {
    file().scenarios.keys().map(String::as_str).collect()
}

impl ScenarioSpec {
    pub fn build(&self, name: &str, table_height: f64, seed: u64) -> Result<SceneState, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offset = Vector3::new(rng.random_range(-JITTER..=JITTER), rng.random_range(-JITTER..=JITTER), 0.0);
        let objects = self
            .objects
            .iter()
            .map(|o| {
                (
                    o.name.clone(),
                    ObjectState {
                        position: Vector3::from(o.position) + offset,
                        orientation_class: o.orientation,
                        held: false,
                        toppleable: o.toppleable,
                        aliases: o.aliases.clone(),
                    },
                )
            })
            .collect();
        SceneState::from_objects(name, table_height, objects, self.rules.clone())
    }
}

pub(super) fn builtin(name: &str, seed: u64) -> Result<SceneState, SimError> {
    let f = file();
    let spec = f
        .scenarios
        .get(name)
        .ok_or_else(|| SimError::UnknownScenario(name.to_string()))?;
    spec.build(name, f.table_height, seed)
}
