//! Cluster simulated grasp directions onto the anchor set.
//!
//! ```text
//! cargo run -p steer-core --example cluster_grasps
//! ```

use steer_core::geometry::{approach_vector, build_anchor_set, cluster_grasps, GraspApproachClass};
use steer_core::sim::synth::{synth_episode, NoiseConfig};
use steer_core::sim::ControllerConfig;
use steer_core::skill::SkillCall;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let anchors = build_anchor_set();
    let mut vectors = Vec::new();
    for (i, class) in [GraspApproachClass::TopDown, GraspApproachClass::Side, GraspApproachClass::Diagonal]
        .into_iter()
        .cycle()
        .take(300)
        .enumerate()
    {
        let script = [SkillCall::grasp("apple", class), SkillCall::lift("apple")];
        let ep = synth_episode(&format!("g{i}"), "pick apple", &script, &NoiseConfig::JITTER, &ControllerConfig::default(), i as u64)?;
        // Wrist pose at the moment the gripper has closed.
        let closed = ep.steps.iter().find(|s| s.gripper_aperture <= 0.05).unwrap_or(&ep.steps[0]);
        vectors.push(approach_vector(&closed.wrist_orientation.normalized())?);
    }
    let report = cluster_grasps(&vectors, &anchors)?;
    println!("{} grasps over {} occupied anchors", report.total, report.occupied_anchor_count);
    for (id, n) in report.counts.iter().filter(|(_, n)| **n > 0) {
        println!("  anchor {id:>2} ({:<8}): {n}", anchors[*id].semantic_class.as_str());
    }
    Ok(())
}
