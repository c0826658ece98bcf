//! Relabel robot demonstration logs into composable, language-indexed
//! manipulation skills, and drive those skills from plans.
//!
//! The crate is organized bottom-up:
//!
//! - [`trajectory`]: episode and segment records and their JSONL formats
//! - [`geometry`]: wrist quaternion → approach vector, the anchor set and
//!   nearest-anchor grasp classification
//! - [`instruction`]: the original instruction templates
//! - [`language`]: skill instruction templates and their reverse grammar
//! - [`skill`]: skill calls, their wire form and rendered instructions
//! - [`segmenter`]: grasp/reorient/lift/place detection and relabeling
//! - [`pipeline`]: corpus annotation, statistics and dataset mixing
//! - [`sim`]: kinematic tabletop world, skill controllers, episode synthesis
//! - [`orchestrator`]: plan language, validation, execution, planners and
//!   the example memory
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod geometry;
pub mod instruction;
pub mod language;
pub mod orchestrator;
pub mod pipeline;
pub mod segmenter;
pub mod sim;
pub mod skill;
pub mod trajectory;
