//! Resolve the same attribute under the three mappings and print what each
//! task receives.
//!
//! `cargo run -p pm3d-core --example map_attributes`

use pm3d_core::mapping::{resolve, MappingConfig, VisualStyle};
use pm3d_core::parser::parse;
use pm3d_core::samples;

fn main() {
    let (model, _) = parse(samples::BLOOD_ANALYSIS).unwrap();
    for line in [
        "positionZ = Cost : direct",
        "positionZ = Cost : relative",
        "positionZ = Cost : discrete",
        "positionZ = Role : discrete",
        "scaleY = Duration : discrete:3",
    ] {
        let config: MappingConfig = line.parse().unwrap();
        let res = resolve(&model, &config).unwrap();
        println!("{line}");
        for v in res.visuals.iter().filter(|v| v.node_id.starts_with('a')) {
            let lane = v.lane_assignments.values().next();
            let pct = v.percentages.values().next();
            println!(
                "  {}: offset_z {:>6.3}  scale {:?}  lane {:?}  pct {:?}",
                v.node_id, v.offset_z, v.scale, lane, pct
            );
        }
        for lane in res
            .lanes
            .iter()
            .filter(|l| l.style == VisualStyle::PositionZ)
        {
            println!("  lane {} = {}", lane.index, lane.label);
        }
    }
}
