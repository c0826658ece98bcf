//! Extract object slots from episode-level instructions.
//!
//! ```text
//! cargo run -p steer-core --example parse_instruction -- "move coke can near apple"
//! ```

use steer_core::instruction::parse_instruction;

fn main() {
    let given: Vec<String> = std::env::args().skip(1).collect();
    let texts = if given.is_empty() {
        vec![
            "pick coke can".to_string(),
            "move blue chip bag near apple".to_string(),
            "knock redbull can over".to_string(),
            "place water bottle upright".to_string(),
            "open the drawer".to_string(),
        ]
    } else {
        given
    };
    for text in texts {
        match parse_instruction(&text) {
            Ok(p) => println!("{text:?} -> {:?} object={:?} secondary={:?}", p.template, p.object_slot, p.secondary_object_slot),
            Err(e) => println!("{text:?} -> error: {e}"),
        }
    }
}
