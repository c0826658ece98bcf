//! Kinematic tabletop world with scripted skill controllers.
//!
//! There is no physics: positions are interpolated linearly, wrist
//! orientations spherically, and failures such as toppling come from
//! per-scenario grasp rules. The same controllers generate labeled
//! demonstration episodes ([`synth`]) and execute plans.

mod scenario;
pub mod synth;

use std::collections::BTreeMap;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{approach_vector, build_anchor_set, nearest_anchor, GraspApproachClass, Quat};
use crate::language::ReorientDirection;
use crate::skill::SkillCall;
use crate::trajectory::TimeStep;

pub use scenario::{scenario_names, ObjectSpec, ScenarioFile, ScenarioSpec, SCENARIOS_JSON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationClass {
    Upright,
    Horizontal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripperState {
    pub position: Vector3<f64>,
    pub wrist_orientation: Quat,
    pub aperture: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub position: Vector3<f64>,
    pub orientation_class: OrientationClass,
    pub held: bool,
    pub toppleable: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

/// Approaches that fail on an object, and what the failure does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraspRule {
    pub object: String,
    pub forbidden: Vec<GraspApproachClass>,
    pub reason: String,
    /// Objects knocked over when the rule is violated.
    #[serde(default)]
    pub topples: Vec<String>,
    /// One-line description of the constraint for planners.
    #[serde(default)]
    pub hint: String,
}

/// Controller timing and travel distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub steps_per_skill: usize,
    /// Upward travel of the lift skill (m).
    pub lift_distance: f64,
    /// Objects closer than this in the table plane block a placement (m).
    pub placement_clearance: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            steps_per_skill: 20,
            lift_distance: 0.10,
            placement_clearance: 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub scenario: String,
    pub gripper: GripperState,
    pub objects: BTreeMap<String, ObjectState>,
    pub table_height: f64,
    #[serde(default)]
    pub rules: Vec<GraspRule>,
    #[serde(default)]
    pub controller: ControllerConfig,
    /// Index the next recorded time step receives.
    #[serde(default)]
    pub clock: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillOutcome {
    pub success: bool,
    pub reason: String,
    pub trajectory: Vec<TimeStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("unknown object {0:?}")]
    UnknownObject(String),
    #[error("already holding {0:?}")]
    AlreadyHolding(String),
    #[error("{0:?} is not held")]
    NotHeld(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

pub const HOME_OFFSET: [f64; 3] = [-0.25, 0.0, 0.30];

const ROTATE_HALF_TURN: f64 = std::f64::consts::PI;

fn wrist_for_approach(approach: &Vector3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::rotation_between(&Vector3::y(), approach)
        .unwrap_or_else(|| UnitQuaternion::from_axis_angle(&Vector3::z_axis(), ROTATE_HALF_TURN))
}

/// Horizontal heading snapped to the nearest multiple of 45°, so grasp
/// approach vectors land exactly on anchor directions.
fn snapped_heading(from: &Vector3<f64>, to: &Vector3<f64>) -> Vector3<f64> {
    let d = to - from;
    if d.x.hypot(d.y) < 1e-9 {
        return Vector3::x();
    }
    let step = std::f64::consts::FRAC_PI_4;
    let angle = (d.y.atan2(d.x) / step).round() * step;
    let (s, c) = angle.sin_cos();
    // Kill round-off so axis-aligned headings stay exact.
    let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    Vector3::new(clean(c), clean(s), 0.0).normalize()
}

fn approach_direction(class: GraspApproachClass, heading: &Vector3<f64>) -> Vector3<f64> {
    match class {
        GraspApproachClass::TopDown => -Vector3::z(),
        GraspApproachClass::Side => *heading,
        GraspApproachClass::Diagonal => (heading - Vector3::z()).normalize(),
        GraspApproachClass::Upward => Vector3::z(),
    }
}

impl SceneState {
    /// Deterministic scene for a built-in scenario; `seed` shifts the whole
    /// layout by a few centimeters in the table plane.
    pub fn reset(scenario: &str, seed: u64) -> Result<SceneState, SimError> {
        scenario::builtin(scenario, seed)
    }

    /// Scene from an explicit object list.
    pub fn from_objects(
        name: &str,
        table_height: f64,
        objects: BTreeMap<String, ObjectState>,
        rules: Vec<GraspRule>,
    ) -> Result<SceneState, SimError> {
        let held: Vec<_> = objects.iter().filter(|(_, o)| o.held).map(|(n, _)| n.clone()).collect();
        if held.len() > 1 {
            return Err(SimError::InvalidScene(format!("more than one held object: {held:?}")));
        }
        let centroid = if objects.is_empty() {
            Vector3::new(0.5, 0.0, table_height)
        } else {
            objects.values().map(|o| o.position).sum::<Vector3<f64>>() / objects.len() as f64
        };
        let mut gripper = GripperState {
            position: centroid + Vector3::from(HOME_OFFSET),
            wrist_orientation: Quat::IDENTITY,
            aperture: 1.0,
        };
        if let Some(name) = held.first() {
            gripper.position = objects[name].position;
            gripper.aperture = 0.0;
        }
        Ok(SceneState {
            scenario: name.to_string(),
            gripper,
            objects,
            table_height,
            rules,
            controller: ControllerConfig::default(),
            clock: 0,
        })
    }

    /// Canonical name of an object given its name or one of its aliases.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        if let Some((k, _)) = self.objects.get_key_value(name) {
            return Some(k.as_str());
        }
        self.objects
            .iter()
            .find(|(_, o)| o.aliases.iter().any(|a| a == name))
            .map(|(k, _)| k.as_str())
    }

    pub fn held_object(&self) -> Option<&str> {
        self.objects.iter().find(|(_, o)| o.held).map(|(k, _)| k.as_str())
    }

    pub fn is_on_table(&self, name: &str) -> bool {
        self.resolve(name)
            .map(|n| {
                let o = &self.objects[n];
                !o.held && (o.position.z - self.table_height).abs() < 1e-9
            })
            .unwrap_or(false)
    }

    /// Current wrist approach class via nearest anchor.
    pub fn approach_class(&self) -> GraspApproachClass {
        let anchors = build_anchor_set();
        let v = approach_vector(&self.gripper.wrist_orientation.normalized()).expect("unit quaternion");
        nearest_anchor(&v, &anchors).expect("anchors").semantic_class
    }

    fn current_approach(&self) -> Vector3<f64> {
        *approach_vector(&self.gripper.wrist_orientation.normalized())
            .expect("unit quaternion")
            .as_vector()
    }

    fn held_name(&self, name: &str) -> Result<String, SimError> {
        let canonical = self
            .resolve(name)
            .ok_or_else(|| SimError::UnknownObject(name.to_string()))?
            .to_string();
        if !self.objects[&canonical].held {
            return Err(SimError::NotHeld(name.to_string()));
        }
        Ok(canonical)
    }

    fn record(&mut self, trajectory: &mut Vec<TimeStep>) {
        trajectory.push(TimeStep {
            index: self.clock,
            ee_position: self.gripper.position,
            wrist_orientation: self.gripper.wrist_orientation,
            gripper_aperture: self.gripper.aperture,
        });
        self.clock += 1;
        self.sync_held();
    }

    /// Rigid attachment: a held object sits at the gripper.
    fn sync_held(&mut self) {
        let p = self.gripper.position;
        for o in self.objects.values_mut().filter(|o| o.held) {
            o.position = p;
        }
    }

    /// Interpolates gripper pose and aperture over `steps` steps, linear in
    /// position and aperture, spherical in orientation.
    fn interpolate(
        &mut self,
        steps: usize,
        position: Vector3<f64>,
        orientation: UnitQuaternion<f64>,
        aperture: f64,
        trajectory: &mut Vec<TimeStep>,
    ) {
        let p0 = self.gripper.position;
        let q0 = self.gripper.wrist_orientation.to_unit_quaternion();
        let a0 = self.gripper.aperture;
        for i in 1..=steps {
            let t = i as f64 / steps as f64;
            self.gripper.position = if i == steps { position } else { p0.lerp(&position, t) };
            let q = if i == steps {
                orientation
            } else {
                q0.try_slerp(&orientation, t, 1e-12).unwrap_or(orientation)
            };
            self.gripper.wrist_orientation = Quat::from_unit_quaternion(&q);
            self.gripper.aperture = if i == steps { aperture } else { a0 + (aperture - a0) * t };
            self.record(trajectory);
        }
    }

    fn split_steps(&self) -> (usize, usize) {
        let n = self.controller.steps_per_skill.max(2);
        let actuate = (n / 4).max(1);
        (n - actuate, actuate)
    }

    /// Approach `object` from the requested direction and close the gripper.
    pub fn exec_grasp(&mut self, object: &str, approach: GraspApproachClass) -> Result<SkillOutcome, SimError> {
        let name = self
            .resolve(object)
            .ok_or_else(|| SimError::UnknownObject(object.to_string()))?
            .to_string();
        if let Some(held) = self.held_object() {
            return Err(SimError::AlreadyHolding(held.to_string()));
        }
        let target = self.objects[&name].position;
        let heading = snapped_heading(&self.gripper.position, &target);
        let wrist = wrist_for_approach(&approach_direction(approach, &heading));
        let (travel, close) = self.split_steps();

        let mut trajectory = Vec::with_capacity(travel + close);
        self.interpolate(travel, target, wrist, 1.0, &mut trajectory);

        if let Some(rule) = self
            .rules
            .iter()
            .find(|r| r.object == name && r.forbidden.contains(&approach))
            .cloned()
        {
            for victim in &rule.topples {
                if let Some(o) = self.objects.get_mut(victim) {
                    if o.toppleable {
                        o.orientation_class = OrientationClass::Horizontal;
                    }
                }
            }
            return Ok(SkillOutcome {
                success: false,
                reason: rule.reason,
                trajectory,
            });
        }

        self.interpolate(close, target, wrist, 0.0, &mut trajectory);
        self.objects.get_mut(&name).expect("resolved").held = true;
        self.sync_held();
        Ok(SkillOutcome {
            success: true,
            reason: format!("holding {name}"),
            trajectory,
        })
    }

    /// Wrist sweep for a reorientation. Laying an object down tilts the
    /// approach toward vertical, standing it up tilts it back to horizontal;
    /// when the wrist is already at that end it sweeps to the other one.
    fn reorient_target(&self, direction: ReorientDirection) -> Vector3<f64> {
        let current = self.current_approach();
        let class = self.approach_class();
        let horizontal = Vector3::new(current.x, current.y, 0.0);
        let heading = if horizontal.norm() > 1e-6 {
            snapped_heading(&Vector3::zeros(), &horizontal)
        } else {
            Vector3::x()
        };
        let to_vertical = match (direction, class) {
            (ReorientDirection::ToHorizontal, GraspApproachClass::TopDown) => false,
            (ReorientDirection::ToHorizontal, _) => true,
            (ReorientDirection::ToUpright, GraspApproachClass::Side) => true,
            (ReorientDirection::ToUpright, _) => false,
        };
        if to_vertical {
            -Vector3::z()
        } else {
            heading
        }
    }

    pub fn exec_reorient(&mut self, object: &str, direction: ReorientDirection) -> Result<SkillOutcome, SimError> {
        let name = self.held_name(object)?;
        let from = self.current_approach();
        let to = self.reorient_target(direction);
        let delta = UnitQuaternion::rotation_between(&from, &to)
            .unwrap_or_else(|| UnitQuaternion::from_axis_angle(&Vector3::x_axis(), ROTATE_HALF_TURN));
        let q0 = self.gripper.wrist_orientation.to_unit_quaternion();
        let steps = self.controller.steps_per_skill.max(2);
        let position = self.gripper.position;

        let mut trajectory = Vec::with_capacity(steps);
        // Great-circle sweep of the approach vector: slerp the delta, not the
        // absolute orientation.
        for i in 1..=steps {
            let t = i as f64 / steps as f64;
            let partial = UnitQuaternion::identity().slerp(&delta, t);
            self.gripper.wrist_orientation = Quat::from_unit_quaternion(&(partial * q0));
            self.gripper.position = position;
            self.gripper.aperture = 0.0;
            self.record(&mut trajectory);
        }
        let obj = self.objects.get_mut(&name).expect("held object exists");
        obj.orientation_class = match direction {
            ReorientDirection::ToHorizontal => OrientationClass::Horizontal,
            ReorientDirection::ToUpright => OrientationClass::Upright,
        };
        Ok(SkillOutcome {
            success: true,
            reason: format!("{name} is now {:?}", obj.orientation_class).to_lowercase(),
            trajectory,
        })
    }

    pub fn exec_lift(&mut self, object: &str) -> Result<SkillOutcome, SimError> {
        let name = self.held_name(object)?;
        let steps = self.controller.steps_per_skill.max(2);
        let target = self.gripper.position + Vector3::new(0.0, 0.0, self.controller.lift_distance);
        let wrist = self.gripper.wrist_orientation.to_unit_quaternion();
        let mut trajectory = Vec::with_capacity(steps);
        self.interpolate(steps, target, wrist, 0.0, &mut trajectory);
        Ok(SkillOutcome {
            success: true,
            reason: format!("lifted {name}"),
            trajectory,
        })
    }

    /// First free spot on the table at or beside the gripper's xy.
    fn placement_spot(&self, held: &str) -> Vector3<f64> {
        let mut spot = Vector3::new(self.gripper.position.x, self.gripper.position.y, self.table_height);
        for _ in 0..32 {
            let blocked = self.objects.iter().any(|(n, o)| {
                n != held && (o.position.xy() - spot.xy()).norm() < self.controller.placement_clearance
            });
            if !blocked {
                break;
            }
            spot.y += 2.0 * self.controller.placement_clearance;
        }
        spot
    }

    /// Lower to the table and release, keeping the orientation class.
    pub fn exec_place(&mut self, object: &str) -> Result<SkillOutcome, SimError> {
        let name = self.held_name(object)?;
        let spot = self.placement_spot(&name);
        let wrist = self.gripper.wrist_orientation.to_unit_quaternion();
        let (travel, open) = self.split_steps();
        let mut trajectory = Vec::with_capacity(travel + open);
        self.interpolate(travel, spot, wrist, 0.0, &mut trajectory);
        self.objects.get_mut(&name).expect("held").held = false;
        self.interpolate(open, spot, wrist, 1.0, &mut trajectory);
        let obj = self.objects.get_mut(&name).expect("placed");
        obj.position = spot;
        Ok(SkillOutcome {
            success: true,
            reason: format!("placed {name}"),
            trajectory,
        })
    }

    /// Dispatches a skill call to its controller.
    pub fn exec(&mut self, call: &SkillCall) -> Result<SkillOutcome, SimError> {
        match call {
            SkillCall::Grasp { object, approach } => self.exec_grasp(object, *approach),
            SkillCall::Reorient { object, direction } => self.exec_reorient(object, *direction),
            SkillCall::Lift { object } => self.exec_lift(object),
            SkillCall::Place { object } => self.exec_place(object),
        }
    }
}
