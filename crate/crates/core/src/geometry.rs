//! Grasp-pose geometry: wrist quaternion to approach vector, the anchor
//! direction set and nearest-anchor grasp classification.
//!
//! The anchor set holds the 26 normalized nonzero vectors whose components
//! lie in {-1, 0, 1}. The all-zero combination has no direction, so the set
//! is one short of the 27 combinations of three ternary components.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on |q| - 1 accepted by [`approach_vector`].
pub const UNIT_QUAT_TOLERANCE: f64 = 1e-6;

/// Gripper axis that the wrist quaternion rotates into the approach vector.
pub const GRIPPER_AXIS: [f64; 3] = [0.0, 1.0, 0.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("quaternion is not unit length (norm {norm})")]
    NonUnitQuaternion { norm: f64 },
    #[error("anchor set is empty")]
    EmptyAnchorSet,
    #[error("vector has zero length")]
    ZeroVector,
}

/// Wrist orientation as a scalar-first quaternion `(w, x, y, z)`.
///
/// Serialized as the array `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product `self ⊗ rhs`.
    pub fn mul(&self, rhs: &Quat) -> Quat {
        let (a1, b1, c1, d1) = (self.w, self.x, self.y, self.z);
        let (a2, b2, c2, d2) = (rhs.w, rhs.x, rhs.y, rhs.z);
        Quat::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }

    /// Rotates `v` by this quaternion via the sandwich product `q v q*`.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let p = Quat::new(0.0, v[0], v[1], v[2]);
        let r = self.mul(&p).mul(&self.conjugate());
        [r.x, r.y, r.z]
    }

    pub fn to_unit_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(self.w, self.x, self.y, self.z))
    }

    pub fn from_unit_quaternion(q: &UnitQuaternion<f64>) -> Self {
        Self::new(q.w, q.i, q.j, q.k)
    }
}

impl From<[f64; 4]> for Quat {
    fn from(a: [f64; 4]) -> Self {
        Quat::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quat> for [f64; 4] {
    fn from(q: Quat) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

/// Unit 3-vector giving the direction the gripper approaches from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ApproachVector(Vector3<f64>);

impl ApproachVector {
    /// Normalizes `v`. Any positive rescaling of `v` yields the same vector.
    pub fn new(v: Vector3<f64>) -> Result<Self, GeometryError> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeometryError::ZeroVector);
        }
        Ok(Self(v / n))
    }

    pub fn from_array(a: [f64; 3]) -> Result<Self, GeometryError> {
        Self::new(Vector3::new(a[0], a[1], a[2]))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn dot(&self, other: &Vector3<f64>) -> f64 {
        self.0.dot(other)
    }
}

impl TryFrom<[f64; 3]> for ApproachVector {
    type Error = GeometryError;

    fn try_from(a: [f64; 3]) -> Result<Self, Self::Error> {
        Self::from_array(a)
    }
}

impl From<ApproachVector> for [f64; 3] {
    fn from(v: ApproachVector) -> Self {
        [v.0.x, v.0.y, v.0.z]
    }
}

/// Semantic grasp mode of an anchor direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspApproachClass {
    TopDown,
    Side,
    Diagonal,
    Upward,
}

impl GraspApproachClass {
    pub const ALL: [GraspApproachClass; 4] = [
        GraspApproachClass::TopDown,
        GraspApproachClass::Side,
        GraspApproachClass::Diagonal,
        GraspApproachClass::Upward,
    ];

    /// Identifier used in data files (`top_down`, `side`, ...).
    pub fn as_str(&self) -> &'static str {
        match self {
            GraspApproachClass::TopDown => "top_down",
            GraspApproachClass::Side => "side",
            GraspApproachClass::Diagonal => "diagonal",
            GraspApproachClass::Upward => "upward",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Ordering of classes by how far the approach tilts away from
    /// horizontal. Reorientation direction is read off this rank.
    pub fn tilt_rank(&self) -> u8 {
        match self {
            GraspApproachClass::Side => 0,
            GraspApproachClass::Diagonal => 1,
            GraspApproachClass::TopDown => 2,
            GraspApproachClass::Upward => 3,
        }
    }
}

impl fmt::Display for GraspApproachClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub id: usize,
    pub direction: ApproachVector,
    pub semantic_class: GraspApproachClass,
}

/// Rotates the gripper axis `(0, 1, 0)` by `q`.
pub fn approach_vector(q: &Quat) -> Result<ApproachVector, GeometryError> {
    let norm = q.norm();
    if !((norm - 1.0).abs() <= UNIT_QUAT_TOLERANCE) {
        return Err(GeometryError::NonUnitQuaternion { norm });
    }
    let r = q.rotate(GRIPPER_AXIS);
    ApproachVector::from_array(r)
}

/// Threshold rule on the z-component of a unit direction.
pub fn classify_anchor(direction: &ApproachVector) -> GraspApproachClass {
    let z = direction.z();
    if z < -0.9 {
        GraspApproachClass::TopDown
    } else if z < -0.3 {
        GraspApproachClass::Diagonal
    } else if z <= 0.3 {
        GraspApproachClass::Side
    } else {
        GraspApproachClass::Upward
    }
}

/// All 26 nonzero {-1,0,1} combinations, ids in lexicographic order of
/// `(x, y, z)`.
pub fn build_anchor_set() -> Vec<Anchor> {
    const TERNARY: [f64; 3] = [-1.0, 0.0, 1.0];
    let mut anchors = Vec::with_capacity(26);
    for x in TERNARY {
        for y in TERNARY {
            for z in TERNARY {
                if x == 0.0 && y == 0.0 && z == 0.0 {
                    continue;
                }
                let direction = ApproachVector::new(Vector3::new(x, y, z))
                    .expect("nonzero combination");
                anchors.push(Anchor {
                    id: anchors.len(),
                    direction,
                    semantic_class: classify_anchor(&direction),
                });
            }
        }
    }
    anchors
}

/// Anchor with the highest cosine similarity to `v`; exact ties go to the
/// lowest id.
pub fn nearest_anchor<'a>(
    v: &ApproachVector,
    anchors: &'a [Anchor],
) -> Result<&'a Anchor, GeometryError> {
    let mut best: Option<(&Anchor, f64)> = None;
    for anchor in anchors {
        let score = v.dot(anchor.direction.as_vector());
        match best {
            Some((b, s)) if score < s || (score == s && anchor.id >= b.id) => {}
            _ => best = Some((anchor, score)),
        }
    }
    best.map(|(a, _)| a).ok_or(GeometryError::EmptyAnchorSet)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub counts: BTreeMap<usize, usize>,
    pub occupied_anchor_count: usize,
    pub total: usize,
}

/// Assigns every vector to its nearest anchor and tallies the clusters.
/// Every anchor id appears in `counts`, occupied or not.
pub fn cluster_grasps(
    vectors: &[ApproachVector],
    anchors: &[Anchor],
) -> Result<ClusterReport, GeometryError> {
    let mut counts: BTreeMap<usize, usize> = anchors.iter().map(|a| (a.id, 0)).collect();
    for v in vectors {
        let anchor = nearest_anchor(v, anchors)?;
        *counts.entry(anchor.id).or_default() += 1;
    }
    Ok(ClusterReport {
        occupied_anchor_count: counts.values().filter(|&&c| c > 0).count(),
        total: vectors.len(),
        counts,
    })
}

/// Serializable row of the anchor legend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    pub id: usize,
    pub direction: [f64; 3],
    pub components: [i8; 3],
    pub class: GraspApproachClass,
}

impl From<&Anchor> for AnchorRecord {
    fn from(a: &Anchor) -> Self {
        let d = a.direction.as_vector();
        let comp = |c: f64| -> i8 {
            if c > 1e-9 {
                1
            } else if c < -1e-9 {
                -1
            } else {
                0
            }
        };
        AnchorRecord {
            id: a.id,
            direction: [d.x, d.y, d.z],
            components: [comp(d.x), comp(d.y), comp(d.z)],
            class: a.semantic_class,
        }
    }
}

/// Anchor legend as structured text, one JSON object per line.
pub fn anchors_to_jsonl(anchors: &[Anchor]) -> String {
    let mut out = String::new();
    for a in anchors {
        out.push_str(&serde_json::to_string(&AnchorRecord::from(a)).expect("anchor record serializes"));
        out.push('\n');
    }
    out
}
