//! Print the grasp anchor legend and the class of each anchor.
//!
//! ```text
//! cargo run -p steer-core --example anchors
//! ```

use std::collections::BTreeMap;

use steer_core::geometry::{anchors_to_jsonl, build_anchor_set};

fn main() {
    let anchors = build_anchor_set();
    print!("{}", anchors_to_jsonl(&anchors));
    let mut histogram = BTreeMap::new();
    for a in &anchors {
        *histogram.entry(a.semantic_class.as_str()).or_insert(0) += 1;
    }
    eprintln!("{} anchors: {histogram:?}", anchors.len());
}
