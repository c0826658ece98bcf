//! Synthetic demonstration episodes with exact ground truth.
//!
//! A script of skill calls is run through the controllers on a fresh
//! scene; the concatenated trajectories (optionally jittered) form the
//! episode and each call's step span becomes a ground-truth segment.

use std::collections::BTreeMap;
use std::io::{self, Write};

use nalgebra::{UnitQuaternion, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ControllerConfig, ObjectState, OrientationClass, SceneState, SimError};
use crate::geometry::{GraspApproachClass, Quat};
use crate::language::{approach_surface, ReorientDirection};
use crate::skill::{SkillCall, SkillCallError};
use crate::trajectory::{write_episode, Episode, SkillKind, SkillSegment, TimeStep};

/// Bounds of the uniform jitter added to every recorded step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Maximum rotation (degrees) about a random axis applied to the wrist.
    pub rotation_deg: f64,
    /// Per-axis position jitter half-width (m).
    pub position_m: f64,
    /// Aperture jitter half-width; results are clamped to [0, 1].
    pub aperture: f64,
}

impl NoiseConfig {
    pub const NONE: NoiseConfig = NoiseConfig {
        rotation_deg: 0.0,
        position_m: 0.0,
        aperture: 0.0,
    };

    /// Sensor-level jitter: 2° of wrist rotation, 2 mm of position, 0.02 of aperture.
    pub const JITTER: NoiseConfig = NoiseConfig {
        rotation_deg: 2.0,
        position_m: 0.002,
        aperture: 0.02,
    };

    pub fn is_none(&self) -> bool {
        self.rotation_deg == 0.0 && self.position_m == 0.0 && self.aperture == 0.0
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("empty script")]
    EmptyScript,
    #[error("script must start with a grasp, found {0}")]
    MustStartWithGrasp(SkillKind),
    #[error("call {index} ({call}): {source}")]
    Invalid {
        index: usize,
        call: String,
        #[source]
        source: SimError,
    },
    #[error("call {index} ({call}) failed: {reason}")]
    Failed { index: usize, call: String, reason: String },
    #[error("upward grasps have no instruction form")]
    UpwardGrasp,
    #[error("bad script token {token:?}: {source}")]
    Token {
        token: String,
        #[source]
        source: SkillCallError,
    },
    #[error("invalid corpus spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Spacing between objects of a synthetic scene, in the table plane (m).
const OBJECT_SPACING: f64 = 0.2;
const TABLE_HEIGHT: f64 = 0.75;

fn synth_scene(script: &[SkillCall], controller: &ControllerConfig, rng: &mut ChaCha8Rng) -> SceneState {
    let mut names: Vec<&str> = Vec::new();
    for call in script {
        if !names.contains(&call.object()) {
            names.push(call.object());
        }
    }
    let objects = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let position = Vector3::new(
                0.55 + rng.random_range(-0.05..=0.05),
                i as f64 * OBJECT_SPACING + rng.random_range(-0.05..=0.05),
                TABLE_HEIGHT,
            );
            (
                name.to_string(),
                ObjectState {
                    position,
                    orientation_class: OrientationClass::Upright,
                    held: false,
                    toppleable: true,
                    aliases: vec![],
                },
            )
        })
        .collect();
    let mut scene = SceneState::from_objects("synthetic", TABLE_HEIGHT, objects, vec![])
        .expect("synthetic scenes hold nothing");
    scene.controller = controller.clone();
    // Start from a varied heading so side grasps cover several compass anchors.
    let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    scene.gripper.position += Vector3::new(0.0, 0.0, rng.random_range(0.0..0.05));
    scene.gripper.position = rotate_about(&scene.gripper.position, &scene_center(&scene), yaw);
    scene
}

fn scene_center(scene: &SceneState) -> Vector3<f64> {
    let n = scene.objects.len().max(1) as f64;
    scene.objects.values().map(|o| o.position).sum::<Vector3<f64>>() / n
}

fn rotate_about(p: &Vector3<f64>, center: &Vector3<f64>, yaw: f64) -> Vector3<f64> {
    let r = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw);
    center + r * (p - center)
}

fn random_axis(rng: &mut ChaCha8Rng) -> nalgebra::Unit<Vector3<f64>> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    nalgebra::Unit::new_normalize(Vector3::new(r * phi.cos(), r * phi.sin(), z))
}

fn jitter(step: &mut TimeStep, noise: &NoiseConfig, rng: &mut ChaCha8Rng) {
    if noise.rotation_deg > 0.0 {
        let angle = rng.random_range(0.0..=noise.rotation_deg).to_radians();
        let r = UnitQuaternion::from_axis_angle(&random_axis(rng), angle);
        let q = r * step.wrist_orientation.to_unit_quaternion();
        step.wrist_orientation = Quat::from_unit_quaternion(&q);
    }
    if noise.position_m > 0.0 {
        for c in step.ee_position.iter_mut() {
            *c += rng.random_range(-noise.position_m..=noise.position_m);
        }
    }
    if noise.aperture > 0.0 {
        step.gripper_aperture =
            (step.gripper_aperture + rng.random_range(-noise.aperture..=noise.aperture)).clamp(0.0, 1.0);
    }
}

/// Runs `script` on a fresh seeded scene and records it as an episode.
pub fn synth_episode(
    episode_id: &str,
    instruction: &str,
    script: &[SkillCall],
    noise: &NoiseConfig,
    controller: &ControllerConfig,
    seed: u64,
) -> Result<Episode, SynthError> {
    let first = script.first().ok_or(SynthError::EmptyScript)?;
    if first.kind() != SkillKind::Grasp {
        return Err(SynthError::MustStartWithGrasp(first.kind()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scene = synth_scene(script, controller, &mut rng);

    let mut steps = Vec::with_capacity(script.len() * controller.steps_per_skill);
    let mut truth = Vec::with_capacity(script.len());
    for (index, call) in script.iter().enumerate() {
        if let SkillCall::Grasp {
            approach: GraspApproachClass::Upward,
            ..
        } = call
        {
            return Err(SynthError::UpwardGrasp);
        }
        let outcome = scene.exec(call).map_err(|source| SynthError::Invalid {
            index,
            call: call.to_dsl(),
            source,
        })?;
        if !outcome.success {
            return Err(SynthError::Failed {
                index,
                call: call.to_dsl(),
                reason: outcome.reason,
            });
        }
        let start = steps.len();
        steps.extend(outcome.trajectory);
        truth.push(SkillSegment {
            episode_id: episode_id.to_string(),
            start_index: start,
            end_index: steps.len() - 1,
            kind: call.kind(),
            object_slot: call.object().to_string(),
            modifier: call.segment_modifier().map(str::to_string),
            rendered_instruction: call.render_language(),
        });
    }
    if !noise.is_none() {
        for step in &mut steps {
            jitter(step, noise, &mut rng);
        }
    }
    Ok(Episode {
        episode_id: episode_id.to_string(),
        instruction: instruction.to_string(),
        steps,
        ground_truth_segments: Some(truth),
    }
    .validate()
    .expect("controller output satisfies episode invariants"))
}

/// The (kind, modifier) labels of a ground truth that proprioception can
/// recover. A lift followed by further skills leaves no terminal signature
/// (lift is only read off the end of an episode), so it is dropped.
pub fn recoverable_labels(truth: &[SkillSegment]) -> Vec<(SkillKind, Option<String>)> {
    truth
        .iter()
        .enumerate()
        .filter(|(i, s)| s.kind != SkillKind::Lift || *i + 1 == truth.len())
        .map(|(_, s)| (s.kind, s.modifier.clone()))
        .collect()
}

/// Reorientation sequences that each grasp class can carry out and that
/// read back with the same labels. The wrist sweeps between side and
/// top-down, so a side grasp cannot stand an object further up and a
/// top-down grasp cannot lay it further down.
pub fn realizable_reorients(class: GraspApproachClass) -> Vec<Vec<ReorientDirection>> {
    use ReorientDirection::{ToHorizontal as H, ToUpright as U};
    match class {
        GraspApproachClass::Side => vec![vec![], vec![H], vec![H, U]],
        GraspApproachClass::TopDown => vec![vec![], vec![U], vec![U, H]],
        GraspApproachClass::Diagonal => vec![vec![], vec![H], vec![H, U], vec![U], vec![U, H]],
        GraspApproachClass::Upward => vec![],
    }
}

/// Every script of the relabeling grid for `object`: each labeled grasp
/// class, each realizable reorientation sequence, ending held and lifted
/// or lifted, turned and placed.
pub fn relabeling_grid(object: &str) -> Vec<Vec<SkillCall>> {
    let mut scripts = Vec::new();
    for class in [GraspApproachClass::TopDown, GraspApproachClass::Side, GraspApproachClass::Diagonal] {
        for reorients in realizable_reorients(class) {
            let turns = reorients.iter().map(|d| SkillCall::reorient(object, *d));
            let mut lifted = vec![SkillCall::grasp(object, class)];
            lifted.extend(turns.clone());
            lifted.push(SkillCall::lift(object));
            scripts.push(lifted);

            let mut placed = vec![SkillCall::grasp(object, class), SkillCall::lift(object)];
            placed.extend(turns);
            placed.push(SkillCall::place(object));
            scripts.push(placed);
        }
    }
    scripts
}

/// One weighted script family of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub weight: f64,
    /// Instruction with an `{object}` placeholder, e.g. `pick {object}`.
    pub instruction: String,
    /// Calls as `kind[:modifier]`, e.g. `grasp:side`, `reorient:to_horizontal`, `lift`.
    pub script: Vec<String>,
    #[serde(default)]
    pub steps_per_skill: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub entries: Vec<CorpusEntry>,
    pub objects: Vec<String>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub controller: ControllerConfig,
}

/// Parses a script token (`grasp:top_down`, `grasp:top-down`, `reorient:vertical`, `place`).
pub fn parse_script_token(token: &str, object: &str) -> Result<SkillCall, SynthError> {
    let (name, modifier) = match token.split_once(':') {
        Some((n, m)) => (n.trim(), Some(m.trim())),
        None => (token.trim(), None),
    };
    let modifier = match (name, modifier) {
        ("grasp", Some(m)) => GraspApproachClass::parse(m).and_then(approach_surface).or(Some(m)),
        (_, m) => m,
    };
    SkillCall::from_parts(name, object, modifier).map_err(|source| SynthError::Token {
        token: token.to_string(),
        source,
    })
}

impl CorpusSpec {
    pub fn from_json(text: &str) -> Result<CorpusSpec, SynthError> {
        let spec: CorpusSpec = serde_json::from_str(text).map_err(|e| SynthError::Spec(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    /// Single-family spec.
    pub fn single(name: &str, instruction: &str, script: &[&str], objects: &[&str]) -> CorpusSpec {
        CorpusSpec {
            entries: vec![CorpusEntry {
                name: name.to_string(),
                weight: 1.0,
                instruction: instruction.to_string(),
                script: script.iter().map(|s| s.to_string()).collect(),
                steps_per_skill: None,
            }],
            objects: objects.iter().map(|s| s.to_string()).collect(),
            noise: NoiseConfig::NONE,
            controller: ControllerConfig::default(),
        }
    }

    pub fn check(&self) -> Result<(), SynthError> {
        if self.entries.is_empty() {
            return Err(SynthError::Spec("no entries".into()));
        }
        if self.objects.is_empty() {
            return Err(SynthError::Spec("no objects".into()));
        }
        if self.entries.iter().any(|e| !(e.weight >= 0.0) || !e.weight.is_finite()) {
            return Err(SynthError::Spec("weights must be finite and non-negative".into()));
        }
        if self.entries.iter().map(|e| e.weight).sum::<f64>() <= 0.0 {
            return Err(SynthError::Spec("all weights are zero".into()));
        }
        for e in &self.entries {
            if !e.instruction.contains("{object}") {
                return Err(SynthError::Spec(format!("entry {:?}: instruction lacks {{object}}", e.name)));
            }
            for token in &e.script {
                parse_script_token(token, "object")?;
            }
        }
        Ok(())
    }

    /// Exact number of episodes per entry for a corpus of `count`, by
    /// largest-remainder apportionment of the weights.
    pub fn apportion(&self, count: usize) -> Vec<usize> {
        let total: f64 = self.entries.iter().map(|e| e.weight).sum();
        let quotas: Vec<f64> = self.entries.iter().map(|e| e.weight / total * count as f64).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let missing = count - counts.iter().sum::<usize>();
        for &i in order.iter().take(missing) {
            counts[i] += 1;
        }
        counts
    }

    /// Entry index of each episode, in corpus order.
    pub fn assignment(&self, count: usize, seed: u64) -> Vec<usize> {
        let mut slots: Vec<usize> = self
            .apportion(count)
            .into_iter()
            .enumerate()
            .flat_map(|(i, n)| std::iter::repeat_n(i, n))
            .collect();
        slots.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        slots
    }

    /// Episode `index` of the corpus for (`self`, `seed`).
    pub fn episode(&self, entry: usize, index: usize, seed: u64) -> Result<Episode, SynthError> {
        let e = &self.entries[entry];
        let episode_seed = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let object = &self.objects[ChaCha8Rng::seed_from_u64(episode_seed).random_range(0..self.objects.len())];
        let script = e
            .script
            .iter()
            .map(|t| parse_script_token(t, object))
            .collect::<Result<Vec<_>, _>>()?;
        let mut controller = self.controller.clone();
        if let Some(n) = e.steps_per_skill {
            controller.steps_per_skill = n;
        }
        synth_episode(
            &format!("synth-{seed}-{index:06}"),
            &e.instruction.replace("{object}", object),
            &script,
            &self.noise,
            &controller,
            episode_seed,
        )
    }
}

/// Episodes generated per parallel batch in [`synth_corpus`].
const BATCH: usize = 512;

/// Writes a deterministic corpus of `count` episodes for (`spec`, `seed`)
/// and returns how many episodes each entry received, keyed by entry name.
pub fn synth_corpus<W: Write>(
    spec: &CorpusSpec,
    count: usize,
    seed: u64,
    sink: &mut W,
) -> Result<BTreeMap<String, usize>, SynthError> {
    spec.check()?;
    let assignment = spec.assignment(count, seed);
    let mut buf = Vec::new();
    for (b, chunk) in assignment.chunks(BATCH).enumerate() {
        let lines = chunk
            .par_iter()
            .enumerate()
            .map(|(j, &entry)| {
                let episode = spec.episode(entry, b * BATCH + j, seed)?;
                let mut line = Vec::with_capacity(episode.steps.len() * 160);
                write_episode(&episode, &mut line)?;
                Ok(line)
            })
            .collect::<Result<Vec<_>, SynthError>>()?;
        buf.clear();
        for line in lines {
            buf.extend_from_slice(&line);
        }
        sink.write_all(&buf)?;
    }
    let mut histogram = BTreeMap::new();
    for (entry, n) in spec.entries.iter().zip(spec.apportion(count)) {
        *histogram.entry(entry.name.clone()).or_insert(0) += n;
    }
    Ok(histogram)
}
