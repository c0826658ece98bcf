//! Classify wrist orientations by their approach direction.
//!
//! ```text
//! cargo run -p steer-core --example approach_vector
//! ```

use std::f64::consts::FRAC_PI_4;

use steer_core::geometry::{approach_vector, build_anchor_set, nearest_anchor, Quat};

fn about_x(angle: f64) -> Quat {
    Quat::new((angle / 2.0).cos(), (angle / 2.0).sin(), 0.0, 0.0)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let anchors = build_anchor_set();
    let poses = [
        ("identity", Quat::IDENTITY),
        ("pitched down 45 deg", about_x(-FRAC_PI_4)),
        ("pitched down 90 deg", about_x(-2.0 * FRAC_PI_4)),
        ("pitched up 90 deg", about_x(2.0 * FRAC_PI_4)),
    ];
    for (name, q) in poses {
        let v = approach_vector(&q)?;
        let anchor = nearest_anchor(&v, &anchors)?;
        let d = v.as_vector();
        println!(
            "{name:>20}: approach ({:+.3}, {:+.3}, {:+.3}) -> anchor {} ({})",
            d.x,
            d.y,
            d.z,
            anchor.id,
            anchor.semantic_class.as_str()
        );
    }
    Ok(())
}
