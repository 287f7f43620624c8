use std::path::PathBuf;

use pm3d_core::mapping::MappingConfig;
use pm3d_core::parser::parse;
use pm3d_core::pipeline::render;
use pm3d_core::samples;
use pm3d_core::scene::{
    node_details, read_scene, to_json, write_scene, BackdropKind, SceneGraph, SceneOptions, Shape,
};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/blood_analysis.scene.json")
}

fn five_attribute_scene(backdrop: BackdropKind) -> SceneGraph {
    let (m, _) = parse(samples::BLOOD_ANALYSIS).unwrap();
    let config = MappingConfig::parse(samples::FIVE_ATTRIBUTE_CONFIG).unwrap();
    render(&m, &config, &SceneOptions { backdrop }).unwrap()
}

fn schema_validator() -> jsonschema::Validator {
    let text = include_str!("../../../docs/scene3dviz-1.schema.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).unwrap()
}

/// Regenerate with `UPDATE_GOLDEN=1 cargo test -p pm3d-core --test scene_golden`.
#[test]
fn five_attribute_scene_matches_golden() {
    let text = to_json(&five_attribute_scene(BackdropKind::None));
    let path = golden_path();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(text, golden, "scene differs from {}", path.display());
}

#[test]
fn scenes_validate_against_the_schema() {
    let validator = schema_validator();
    for backdrop in [BackdropKind::None, BackdropKind::Grid, BackdropKind::Room] {
        let value = serde_json::to_value(five_attribute_scene(backdrop)).unwrap();
        let errors: Vec<String> = validator
            .iter_errors(&value)
            .map(|e| e.to_string())
            .collect();
        assert!(errors.is_empty(), "{backdrop}: {errors:?}");
    }
    for (name, xml) in samples::PROCESSES {
        let (m, _) = parse(xml).unwrap();
        let scene = render(&m, &MappingConfig::default(), &SceneOptions::default()).unwrap();
        assert!(
            validator.is_valid(&serde_json::to_value(&scene).unwrap()),
            "{name}"
        );
    }
}

#[test]
fn element_catalog_of_the_five_attribute_scene() {
    let s = five_attribute_scene(BackdropKind::None);
    let count = |shape: Shape| {
        s.elements
            .iter()
            .filter(|e| e.shape == shape && e.pick_id.is_some())
            .count()
    };
    assert_eq!(count(Shape::Cube), 6);
    assert_eq!(count(Shape::Bar), 2);
    assert_eq!(count(Shape::Sphere), 2);
    let connectors = s.elements.iter().filter(|e| e.pick_id.is_none()).count();
    assert_eq!(connectors, 10);
    assert_eq!(
        s.lanes.iter().filter(|l| l.attribute == "Location").count(),
        4
    );
    assert_eq!(s.lanes.iter().filter(|l| l.attribute == "Role").count(), 2);
    let legend = s.legend.as_ref().unwrap();
    assert_eq!(legend.axes["x"], "Duration (relative)");
    assert_eq!(legend.axes["z"], "Cost (relative)");
    assert_eq!(s.element_count(), 10 + 10 + 6 + 1);
    // lanes span the x extent of the scene
    for lane in &s.lanes {
        let half = lane.transform.scale[0] / 2.0;
        assert_eq!(lane.transform.position[0] - half, s.bounds.min[0]);
        assert_eq!(lane.transform.position[0] + half, s.bounds.max[0]);
    }
}

#[test]
fn pick_ids_resolve_to_detail_cards() {
    let (m, _) = parse(samples::BLOOD_ANALYSIS).unwrap();
    let s = five_attribute_scene(BackdropKind::Room);
    for e in s.node_elements() {
        node_details(&m, e.pick_id.as_deref().unwrap()).unwrap();
    }
    let card = node_details(&m, "a4").unwrap();
    assert_eq!(card.label, "Centrifugation");
    let names: Vec<&str> = card.arguments.iter().map(|a| a.name.as_str()).collect();
    for data in ["Duration", "RoleDuration", "Cost", "Location"] {
        assert!(names.contains(&data), "{data}");
    }
    assert_eq!(card.roles, ["Nurse"]);
    assert!(card.services.is_empty());
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = five_attribute_scene(BackdropKind::Room);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    write_scene(&s, &a).unwrap();
    write_scene(&five_attribute_scene(BackdropKind::Room), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_scene(&a).unwrap(), s);
}
