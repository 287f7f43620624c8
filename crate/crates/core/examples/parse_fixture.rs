//! Parse the blood-analysis process and list its nodes and attributes.
//!
//! `cargo run -p pm3d-core --example parse_fixture`

use pm3d_core::parser::parse;
use pm3d_core::samples;

fn main() {
    let (model, diagnostics) = parse(samples::BLOOD_ANALYSIS).expect("fixture parses");
    println!("{} ({} tasks)", model.name(), model.task_count());
    for node in model.nodes() {
        println!("  {:<6} {:<16} {}", node.id, node.kind.as_str(), node.label);
    }
    for (name, info) in model.attribute_index() {
        println!(
            "attribute {name}: {:?} on {} nodes",
            info.kind,
            info.carriers.len()
        );
    }
    for (line, message) in diagnostics.warnings {
        println!("warning at line {line}: {message}");
    }
}
