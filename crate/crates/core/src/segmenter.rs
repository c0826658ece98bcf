//! Grasp, reorientation, lift and place detection from proprioception, and
//! the partition of an episode into relabeled skill segments.
//!
//! A grasp is an open-to-closed gripper transition; the wrist pose at the
//! closing step is classified against the anchor set. While the gripper
//! stays closed, every step's wrist pose is classified the same way and a
//! sustained change of class is a reorientation. Consecutive class changes
//! in the same tilt direction (side → diagonal → top-down on a single
//! sweep) are one reorientation. At the end of the episode the held object
//! was either lifted or placed.

use serde::{Deserialize, Serialize};

use crate::geometry::{approach_vector, nearest_anchor, Anchor, GraspApproachClass};
use crate::instruction::ParsedInstruction;
use crate::language::{render_grasp, render_lift, render_place, render_reorient, ReorientDirection};
use crate::trajectory::{Episode, SkillKind, SkillSegment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmenterConfig {
    /// Aperture at or above which the gripper counts as fully open.
    pub open_threshold: f64,
    /// Aperture at or below which the gripper counts as fully closed.
    pub closed_threshold: f64,
    /// Steps a new wrist class must persist to count as a reorientation.
    pub reorient_dwell: usize,
    /// Net upward travel (m) since the last event boundary that makes a lift.
    pub lift_height: f64,
    /// Median filter width over aperture; 1 disables smoothing.
    pub smoothing_window: usize,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            open_threshold: 0.95,
            closed_threshold: 0.05,
            reorient_dwell: 3,
            lift_height: 0.05,
            smoothing_window: 1,
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 <= self.closed_threshold
            && self.closed_threshold < self.open_threshold
            && self.open_threshold <= 1.0)
        {
            return Err(format!(
                "thresholds must satisfy 0 <= closed ({}) < open ({}) <= 1",
                self.closed_threshold, self.open_threshold
            ));
        }
        if self.reorient_dwell < 1 {
            return Err("reorient_dwell must be at least 1".into());
        }
        if !(self.lift_height > 0.0) {
            return Err("lift_height must be positive".into());
        }
        if self.smoothing_window < 1 {
            return Err("smoothing_window must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraspEvent {
    pub step_index: usize,
    pub approach: GraspApproachClass,
    pub anchor_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReorientEvent {
    pub end_step: usize,
    pub from_class: GraspApproachClass,
    pub to_class: GraspApproachClass,
    pub direction: ReorientDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Lift,
    Place,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    NoGrasp,
    UnknownTemplate,
    UnlabeledGraspMode,
    EmptySlot,
    /// A line of the input that is not a valid episode record.
    MalformedRecord,
}

/// Per-episode problem that skips the episode without aborting a corpus run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub episode_id: String,
    pub code: DiagnosticCode,
    pub detail: String,
}

/// Direction of a wrist-class change: tilting away from horizontal lays
/// the object down, tilting back stands it up.
pub fn reorient_direction(from: GraspApproachClass, to: GraspApproachClass) -> ReorientDirection {
    if to.tilt_rank() > from.tilt_rank() {
        ReorientDirection::ToHorizontal
    } else {
        ReorientDirection::ToUpright
    }
}

/// Per-step signals the detectors share.
struct Signals<'a> {
    aperture: Vec<f64>,
    anchors: &'a [Anchor],
}

impl<'a> Signals<'a> {
    fn new(episode: &Episode, config: &SegmenterConfig, anchors: &'a [Anchor]) -> Self {
        let raw: Vec<f64> = episode.steps.iter().map(|s| s.gripper_aperture).collect();
        Self {
            aperture: median_filter(&raw, config.smoothing_window),
            anchors,
        }
    }

    fn anchor_at(&self, episode: &Episode, step: usize) -> &'a Anchor {
        // Validated episodes carry unit quaternions.
        let v = approach_vector(&episode.steps[step].wrist_orientation)
            .unwrap_or_else(|_| {
                approach_vector(&episode.steps[step].wrist_orientation.normalized())
                    .expect("normalized quaternion")
            });
        nearest_anchor(&v, self.anchors).expect("non-empty anchor set")
    }

    /// End (exclusive) of the closed run starting at `from`.
    fn closed_run_end(&self, from: usize, config: &SegmenterConfig) -> usize {
        (from..self.aperture.len())
            .find(|&i| self.aperture[i] > config.closed_threshold)
            .unwrap_or(self.aperture.len())
    }
}

/// Centered running median; edges use the truncated window.
pub fn median_filter(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return values.to_vec();
    }
    let half = window / 2;
    let mut scratch = Vec::with_capacity(window);
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + window - half).min(values.len());
            scratch.clear();
            scratch.extend_from_slice(&values[lo..hi]);
            scratch.sort_by(|a, b| a.total_cmp(b));
            let n = scratch.len();
            if n % 2 == 1 {
                scratch[n / 2]
            } else {
                0.5 * (scratch[n / 2 - 1] + scratch[n / 2])
            }
        })
        .collect()
}

fn grasp_events(episode: &Episode, config: &SegmenterConfig, signals: &Signals<'_>) -> Vec<GraspEvent> {
    let mut events = Vec::new();
    let mut armed = false;
    for (i, &a) in signals.aperture.iter().enumerate() {
        if a >= config.open_threshold {
            armed = true;
        } else if armed && a <= config.closed_threshold {
            armed = false;
            let anchor = signals.anchor_at(episode, i);
            events.push(GraspEvent {
                step_index: i,
                approach: anchor.semantic_class,
                anchor_id: anchor.id,
            });
        }
    }
    events
}

/// One event per hysteresis-filtered open→closed transition, stamped at the
/// first step at or below the closed threshold.
pub fn detect_grasp_events(episode: &Episode, config: &SegmenterConfig, anchors: &[Anchor]) -> Vec<GraspEvent> {
    let signals = Signals::new(episode, config, anchors);
    grasp_events(episode, config, &signals)
}

fn reorientations_after(
    episode: &Episode,
    grasp: &GraspEvent,
    config: &SegmenterConfig,
    signals: &Signals<'_>,
) -> Vec<ReorientEvent> {
    let run_end = signals.closed_run_end(grasp.step_index, config);
    let classes: Vec<GraspApproachClass> = (grasp.step_index..run_end)
        .map(|i| signals.anchor_at(episode, i).semantic_class)
        .collect();

    let mut events: Vec<ReorientEvent> = Vec::new();
    let mut stable = grasp.approach;
    let mut i = 1;
    while i < classes.len() {
        let c = classes[i];
        let run = classes[i..].iter().take_while(|&&x| x == c).count();
        if c != stable && run >= config.reorient_dwell {
            let direction = reorient_direction(stable, c);
            let end_step = grasp.step_index + i;
            match events.last_mut() {
                Some(last) if last.direction == direction => {
                    last.to_class = c;
                    last.end_step = end_step;
                }
                _ => events.push(ReorientEvent {
                    end_step,
                    from_class: stable,
                    to_class: c,
                    direction,
                }),
            }
            stable = c;
        }
        i += run;
    }
    events
}

/// Sustained wrist-class changes while the gripper stays closed after each
/// grasp. Events from all grasps are returned in temporal order.
pub fn detect_reorientations(
    episode: &Episode,
    grasp_events: &[GraspEvent],
    config: &SegmenterConfig,
    anchors: &[Anchor],
) -> Vec<ReorientEvent> {
    let signals = Signals::new(episode, config, anchors);
    grasp_events
        .iter()
        .flat_map(|g| reorientations_after(episode, g, config, &signals))
        .collect()
}

fn terminal_after(
    episode: &Episode,
    last_grasp: usize,
    last_boundary: usize,
    config: &SegmenterConfig,
    aperture: &[f64],
) -> Terminal {
    let last = episode.steps.len() - 1;
    let rise = episode.steps[last].ee_position.z - episode.steps[last_boundary].ee_position.z;
    if aperture[last] <= config.closed_threshold && rise >= config.lift_height {
        Terminal::Lift
    } else if aperture[last_grasp..].iter().any(|&a| a >= config.open_threshold) {
        Terminal::Place
    } else {
        Terminal::None
    }
}

/// How the final grasp ended: held and raised (`Lift`), released (`Place`),
/// or neither.
pub fn detect_terminal(
    episode: &Episode,
    grasp_events: &[GraspEvent],
    reorient_events: &[ReorientEvent],
    config: &SegmenterConfig,
) -> Terminal {
    let Some(last_grasp) = grasp_events.last() else {
        return Terminal::None;
    };
    let boundary = reorient_events
        .iter()
        .map(|r| r.end_step)
        .filter(|&e| e > last_grasp.step_index)
        .max()
        .unwrap_or(last_grasp.step_index);
    let aperture = median_filter(
        &episode.steps.iter().map(|s| s.gripper_aperture).collect::<Vec<_>>(),
        config.smoothing_window,
    );
    terminal_after(episode, last_grasp.step_index, boundary, config, &aperture)
}

fn diagnostic(episode: &Episode, code: DiagnosticCode, detail: impl Into<String>) -> Diagnostic {
    Diagnostic {
        episode_id: episode.episode_id.clone(),
        code,
        detail: detail.into(),
    }
}

/// Partitions `episode` into relabeled segments, in temporal order.
///
/// Each grasp opens a chain: the grasp segment runs from the previous
/// boundary to the closing step, each reorientation from the previous
/// boundary to the first sustained step of its new class, and the chain
/// closes with a place (released before the next grasp) or, for the last
/// grasp, with the lift/place terminal segment up to the final step.
pub fn segment_episode(
    episode: &Episode,
    parsed: &ParsedInstruction,
    config: &SegmenterConfig,
    anchors: &[Anchor],
) -> Result<Vec<SkillSegment>, Diagnostic> {
    let signals = Signals::new(episode, config, anchors);
    let grasps = grasp_events(episode, config, &signals);
    if grasps.is_empty() {
        return Err(diagnostic(episode, DiagnosticCode::NoGrasp, "gripper never closed from fully open"));
    }

    let object = parsed.object_slot.as_str();
    let last_step = episode.steps.len() - 1;
    let mut segments = Vec::new();
    let mut cursor = 0usize;
    let push = |segments: &mut Vec<SkillSegment>,
                    cursor: &mut usize,
                    end: usize,
                    kind: SkillKind,
                    modifier: Option<String>,
                    text: String| {
        segments.push(SkillSegment {
            episode_id: episode.episode_id.clone(),
            start_index: *cursor,
            end_index: end,
            kind,
            object_slot: object.to_string(),
            modifier,
            rendered_instruction: text,
        });
        *cursor = end + 1;
    };

    for (n, grasp) in grasps.iter().enumerate() {
        let text = render_grasp(object, grasp.approach).map_err(|e| {
            diagnostic(
                episode,
                DiagnosticCode::UnlabeledGraspMode,
                format!("grasp at step {}: {e}", grasp.step_index),
            )
        })?;
        push(
            &mut segments,
            &mut cursor,
            grasp.step_index,
            SkillKind::Grasp,
            Some(grasp.approach.as_str().to_string()),
            text,
        );

        let reorients = reorientations_after(episode, grasp, config, &signals);
        for r in &reorients {
            push(
                &mut segments,
                &mut cursor,
                r.end_step,
                SkillKind::Reorient,
                Some(r.direction.as_str().to_string()),
                render_reorient(object, r.direction),
            );
        }

        if let Some(next) = grasps.get(n + 1) {
            // Released before the next grasp; the place ends once fully open.
            let release = (grasp.step_index..next.step_index)
                .find(|&i| signals.aperture[i] >= config.open_threshold)
                .unwrap_or(next.step_index - 1);
            if release >= cursor {
                push(&mut segments, &mut cursor, release, SkillKind::Place, None, render_place(object));
            }
        } else {
            let boundary = cursor - 1;
            let terminal = terminal_after(episode, grasp.step_index, boundary, config, &signals.aperture);
            if cursor <= last_step {
                match terminal {
                    Terminal::Lift => push(&mut segments, &mut cursor, last_step, SkillKind::Lift, None, render_lift(object)),
                    Terminal::Place => push(&mut segments, &mut cursor, last_step, SkillKind::Place, None, render_place(object)),
                    Terminal::None => {}
                }
            }
        }
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_anchor_set, Quat};
    use crate::instruction::parse_instruction;
    use crate::trajectory::TimeStep;
    use nalgebra::{UnitQuaternion, Vector3};

    fn wrist_for(approach: [f64; 3]) -> Quat {
        let target = Vector3::from(approach).normalize();
        let q = UnitQuaternion::rotation_between(&Vector3::y(), &target).unwrap();
        Quat::from_unit_quaternion(&q)
    }

    const SIDE: [f64; 3] = [1.0, 0.0, 0.0];
    const DOWN: [f64; 3] = [0.0, 0.0, -1.0];
    const DIAG: [f64; 3] = [1.0, 0.0, -1.0];

    /// (aperture, z, approach) per step.
    fn build(id: &str, instruction: &str, script: &[(f64, f64, [f64; 3])]) -> Episode {
        Episode {
            episode_id: id.into(),
            instruction: instruction.into(),
            steps: script
                .iter()
                .enumerate()
                .map(|(t, &(a, z, dir))| TimeStep {
                    index: t,
                    ee_position: Vector3::new(0.5, 0.0, z),
                    wrist_orientation: wrist_for(dir),
                    gripper_aperture: a,
                })
                .collect(),
            ground_truth_segments: None,
        }
    }

    fn repeat(n: usize, a: f64, z: f64, dir: [f64; 3]) -> Vec<(f64, f64, [f64; 3])> {
        vec![(a, z, dir); n]
    }

    fn pick_episode() -> Episode {
        let mut s = repeat(5, 1.0, 0.3, DOWN);
        s.extend([(0.5, 0.2, DOWN), (0.0, 0.2, DOWN)]);
        s.extend((1..=5).map(|i| (0.0, 0.2 + 0.02 * i as f64, DOWN)));
        build("pick", "pick coke can", &s)
    }

    #[test]
    fn pick_then_lift() {
        let ep = pick_episode();
        let anchors = build_anchor_set();
        let cfg = SegmenterConfig::default();
        let grasps = detect_grasp_events(&ep, &cfg, &anchors);
        assert_eq!(grasps.len(), 1);
        assert_eq!(grasps[0].step_index, 6);
        assert_eq!(grasps[0].approach, GraspApproachClass::TopDown);
        assert_eq!(detect_terminal(&ep, &grasps, &[], &cfg), Terminal::Lift);

        let parsed = parse_instruction(&ep.instruction).unwrap();
        let segs = segment_episode(&ep, &parsed, &cfg, &anchors).unwrap();
        let got: Vec<_> = segs
            .iter()
            .map(|s| (s.rendered_instruction.as_str(), s.start_index, s.end_index))
            .collect();
        assert_eq!(
            got,
            vec![
                ("grasp the coke can in a top-down grasp", 0, 6),
                ("hold and lift the coke can", 7, 11)
            ]
        );
    }

    #[test]
    fn never_closing_means_no_grasp() {
        let ep = build("open", "pick apple", &repeat(8, 1.0, 0.3, DOWN));
        let anchors = build_anchor_set();
        let cfg = SegmenterConfig::default();
        assert!(detect_grasp_events(&ep, &cfg, &anchors).is_empty());
        let parsed = parse_instruction("pick apple").unwrap();
        let diag = segment_episode(&ep, &parsed, &cfg, &anchors).unwrap_err();
        assert_eq!(diag.code, DiagnosticCode::NoGrasp);
        assert_eq!(detect_terminal(&ep, &[], &[], &cfg), Terminal::None);
    }

    #[test]
    fn grasp_release_regrasp() {
        let mut s = repeat(3, 1.0, 0.2, SIDE);
        s.extend(repeat(3, 0.0, 0.2, SIDE));
        s.extend(repeat(3, 1.0, 0.2, SIDE));
        s.extend(repeat(3, 0.0, 0.2, DOWN));
        s.extend(repeat(2, 1.0, 0.2, DOWN));
        let ep = build("two", "pick apple", &s);
        let anchors = build_anchor_set();
        let cfg = SegmenterConfig::default();
        let grasps = detect_grasp_events(&ep, &cfg, &anchors);
        let steps: Vec<_> = grasps.iter().map(|g| (g.step_index, g.approach)).collect();
        assert_eq!(steps, vec![(3, GraspApproachClass::Side), (9, GraspApproachClass::TopDown)]);

        let parsed = parse_instruction("pick apple").unwrap();
        let segs = segment_episode(&ep, &parsed, &cfg, &anchors).unwrap();
        let labels: Vec<_> = segs.iter().map(|s| (s.kind, s.start_index, s.end_index)).collect();
        assert_eq!(
            labels,
            vec![
                (SkillKind::Grasp, 0, 3),
                (SkillKind::Place, 4, 6),
                (SkillKind::Grasp, 7, 9),
                (SkillKind::Place, 10, 13)
            ]
        );
    }

    #[test]
    fn hysteresis_requires_full_open_before_close() {
        // Starts half open: never armed, so the close is not a grasp.
        let mut s = repeat(3, 0.5, 0.2, SIDE);
        s.extend(repeat(3, 0.0, 0.2, SIDE));
        let ep = build("half", "pick apple", &s);
        assert!(detect_grasp_events(&ep, &SegmenterConfig::default(), &build_anchor_set()).is_empty());
    }

    fn pour_episode() -> Episode {
        let mut s = repeat(3, 1.0, 0.2, SIDE);
        s.extend(repeat(4, 0.0, 0.2, SIDE));
        s.extend(repeat(4, 0.0, 0.2, DIAG));
        s.extend(repeat(4, 0.0, 0.2, DOWN));
        s.extend(repeat(4, 0.0, 0.2, DIAG));
        s.extend(repeat(4, 0.0, 0.2, SIDE));
        s.extend(repeat(3, 1.0, 0.2, SIDE));
        build("pour", "pick pink cup", &s)
    }

    #[test]
    fn pour_sweep_gives_two_reorientations() {
        let ep = pour_episode();
        let anchors = build_anchor_set();
        let cfg = SegmenterConfig::default();
        let grasps = detect_grasp_events(&ep, &cfg, &anchors);
        let r = detect_reorientations(&ep, &grasps, &cfg, &anchors);
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].direction, ReorientDirection::ToHorizontal);
        assert_eq!((r[0].from_class, r[0].to_class), (GraspApproachClass::Side, GraspApproachClass::TopDown));
        assert_eq!(r[0].end_step, 11);
        assert_eq!(r[1].direction, ReorientDirection::ToUpright);
        assert_eq!(r[1].end_step, 19);

        let parsed = parse_instruction("pick pink cup").unwrap();
        let segs = segment_episode(&ep, &parsed, &cfg, &anchors).unwrap();
        let labels: Vec<_> = segs.iter().map(|s| s.label()).collect();
        assert_eq!(
            labels,
            vec![
                (SkillKind::Grasp, Some("side")),
                (SkillKind::Reorient, Some("to_horizontal")),
                (SkillKind::Reorient, Some("to_upright")),
                (SkillKind::Place, None)
            ]
        );
        assert_eq!(segs[0].start_index, 0);
        assert_eq!(segs.last().unwrap().end_index, ep.len() - 1);
    }

    #[test]
    fn short_blip_is_filtered_by_dwell() {
        let mut s = repeat(3, 1.0, 0.2, SIDE);
        s.extend(repeat(4, 0.0, 0.2, SIDE));
        s.push((0.0, 0.2, DOWN));
        s.extend(repeat(4, 0.0, 0.2, SIDE));
        let ep = build("blip", "pick cup", &s);
        let anchors = build_anchor_set();
        let cfg = SegmenterConfig::default();
        let grasps = detect_grasp_events(&ep, &cfg, &anchors);
        assert!(detect_reorientations(&ep, &grasps, &cfg, &anchors).is_empty());
        let dwell_one = SegmenterConfig {
            reorient_dwell: 1,
            ..cfg
        };
        assert_eq!(detect_reorientations(&ep, &grasps, &dwell_one, &anchors).len(), 2);
    }

    #[test]
    fn upward_grasp_is_unlabeled() {
        let mut s = repeat(3, 1.0, 0.2, [0.0, 0.0, 1.0]);
        s.extend(repeat(3, 0.0, 0.2, [0.0, 0.0, 1.0]));
        let ep = build("up", "pick apple", &s);
        let parsed = parse_instruction("pick apple").unwrap();
        let diag = segment_episode(&ep, &parsed, &SegmenterConfig::default(), &build_anchor_set()).unwrap_err();
        assert_eq!(diag.code, DiagnosticCode::UnlabeledGraspMode);
    }

    #[test]
    fn move_near_uses_first_object() {
        let ep = pick_episode();
        let parsed = parse_instruction("move coke can near sponge").unwrap();
        let segs = segment_episode(&ep, &parsed, &SegmenterConfig::default(), &build_anchor_set()).unwrap();
        assert!(segs.iter().all(|s| s.object_slot == "coke can"));
    }

    #[test]
    fn median_filter_removes_single_spike() {
        let v = [1.0, 1.0, 0.0, 1.0, 1.0];
        assert_eq!(median_filter(&v, 3), vec![1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(median_filter(&v, 1), v.to_vec());
    }

    #[test]
    fn config_validation() {
        assert!(SegmenterConfig::default().validate().is_ok());
        let bad = SegmenterConfig {
            closed_threshold: 0.9,
            open_threshold: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SegmenterConfig {
            reorient_dwell: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
