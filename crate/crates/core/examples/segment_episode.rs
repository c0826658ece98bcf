//! Simulate one demonstration and relabel it into skill segments.
//!
//! ```text
//! cargo run -p steer-core --example segment_episode
//! ```

use steer_core::geometry::{build_anchor_set, GraspApproachClass};
use steer_core::language::ReorientDirection;
use steer_core::pipeline::relabel_episode;
use steer_core::segmenter::SegmenterConfig;
use steer_core::sim::synth::{synth_episode, NoiseConfig};
use steer_core::sim::ControllerConfig;
use steer_core::skill::SkillCall;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let object = "pink cup";
    let script = [
        SkillCall::grasp(object, GraspApproachClass::Side),
        SkillCall::lift(object),
        SkillCall::reorient(object, ReorientDirection::ToHorizontal),
        SkillCall::reorient(object, ReorientDirection::ToUpright),
        SkillCall::place(object),
    ];
    let episode = synth_episode(
        "demo-0",
        "pick pink cup",
        &script,
        &NoiseConfig::JITTER,
        &ControllerConfig::default(),
        42,
    )?;
    println!("episode {:?}: {} steps, instruction {:?}", episode.episode_id, episode.steps.len(), episode.instruction);
    let segments = relabel_episode(&episode, &SegmenterConfig::default(), &build_anchor_set())
        .map_err(|d| format!("{:?}: {}", d.code, d.detail))?;
    for s in segments {
        println!("  [{:>3}..={:>3}] {}", s.start_index, s.end_index, s.rendered_instruction);
    }
    Ok(())
}
