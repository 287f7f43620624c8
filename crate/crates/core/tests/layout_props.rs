mod support;

use pm3d_core::generator::{generate, GenSpec, Rng};
use pm3d_core::layout::{bounding_volume, layout};
use pm3d_core::mapping::resolve;
use pm3d_core::parser::parse;
use pm3d_core::pipeline::render;
use pm3d_core::samples;
use pm3d_core::scene::{to_json, SceneOptions};
use proptest::prelude::*;

use support::*;

fn spec_strategy(max_nodes: usize) -> impl Strategy<Value = GenSpec> {
    (1..=max_nodes, 0usize..=5, any::<u64>())
        .prop_flat_map(|(n, a, s)| (0..=n).prop_map(move |c| GenSpec::new(n, c, a, s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generated_layouts_are_sound(spec in spec_strategy(256), config_seed in any::<u64>()) {
        let model = generate(&spec).unwrap();
        let config = random_config(&model, &mut Rng::new(config_seed));
        let res = resolve(&model, &config).unwrap();
        let l = layout(&model, &res).unwrap();
        prop_assert!(overlaps(&l.placements).is_empty(), "{:?}", overlaps(&l.placements));
        prop_assert!(backward_links(&model, &l).is_empty());
        prop_assert!(stacking_violations(&model, &l).is_empty(), "{config}");
        prop_assert!(detached_connectors(&model, &l).is_empty());
        let again = layout(&model, &res).unwrap();
        prop_assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&l).unwrap());
    }
}

#[test]
fn fixtures_lay_out_soundly() {
    for (name, xml) in samples::PROCESSES {
        let (m, _) = parse(xml).unwrap();
        let config = random_config(&m, &mut Rng::new(5));
        let l = layout(&m, &resolve(&m, &config).unwrap()).unwrap();
        assert!(overlaps(&l.placements).is_empty(), "{name}");
        assert!(backward_links(&m, &l).is_empty(), "{name}");
        assert!(stacking_violations(&m, &l).is_empty(), "{name}");
    }
}

#[test]
fn bounding_volume_holds_every_task_of_the_five_attribute_scene() {
    let (m, _) = parse(samples::BLOOD_ANALYSIS).unwrap();
    let config = samples::FIVE_ATTRIBUTE_CONFIG.parse().unwrap();
    let l = layout(&m, &resolve(&m, &config).unwrap()).unwrap();
    let bb = bounding_volume(&l.placements, &l.connectors).unwrap();
    for p in &l.placements {
        assert!(bb.contains(p.min(), p.max()), "{}", p.node_id);
    }
    // tight: some box touches each face
    for axis in 0..3 {
        assert!(l.placements.iter().any(|p| p.min()[axis] == bb.min[axis]));
        assert!(l.placements.iter().any(|p| p.max()[axis] == bb.max[axis]));
    }
}

#[test]
fn order_process_second_branch_base() {
    let (m, _) = parse(samples::ORDER_PROCESS).unwrap();
    let l = layout(&m, &pm3d_core::mapping::Resolution::baseline(&m)).unwrap();
    let y = |id: &str| l.placements[m.position(id).unwrap()].position[1];
    assert_eq!(y("pick"), 0.0);
    assert_eq!(y("reorder"), 1.5);
    assert_eq!(y("invoice"), 3.0);
}

#[test]
fn scenes_are_byte_identical_across_runs() {
    let model = generate(&GenSpec::new(200, 60, 5, 99)).unwrap();
    let config = random_config(&model, &mut Rng::new(1));
    let a = to_json(&render(&model, &config, &SceneOptions::default()).unwrap());
    let b = to_json(&render(&model, &config, &SceneOptions::default()).unwrap());
    assert_eq!(a, b);
}
