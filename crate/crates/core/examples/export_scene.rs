//! Render the blood-analysis process with five mapped attributes in a room
//! backdrop and write the scene file.
//!
//! `cargo run -p pm3d-core --example export_scene -- out.scene.json`

use pm3d_core::pipeline::render;
use pm3d_core::samples;
use pm3d_core::scene::{write_scene, BackdropKind, SceneOptions};

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "blood_analysis.scene.json".into());
    let (model, _) = pm3d_core::parser::parse(samples::BLOOD_ANALYSIS).unwrap();
    let config = samples::FIVE_ATTRIBUTE_CONFIG.parse().unwrap();
    let options = SceneOptions {
        backdrop: BackdropKind::Room,
    };
    let scene = render(&model, &config, &options).unwrap();
    write_scene(&scene, &out).unwrap();
    println!(
        "wrote {out}: {} elements, {} lanes, legend {:?}",
        scene.element_count(),
        scene.lanes.len(),
        scene.legend.as_ref().map(|l| &l.axes)
    );
}
