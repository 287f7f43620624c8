//! Lay out a process with a parallel block, a decision and a loop, and print
//! where every box and connector ends up.
//!
//! `cargo run -p pm3d-core --example layout_order_process`

use pm3d_core::layout::{bounding_volume, layout};
use pm3d_core::mapping::Resolution;
use pm3d_core::parser::parse;
use pm3d_core::samples;

fn main() {
    let (model, _) = parse(samples::ORDER_PROCESS).unwrap();
    let l = layout(&model, &Resolution::baseline(&model)).unwrap();
    for p in &l.placements {
        println!("{:<14} at {:?} size {:?}", p.node_id, p.position, p.size);
    }
    for c in &l.connectors {
        let tag = if c.back_edge { " (back edge)" } else { "" };
        println!(
            "{} -> {} {:?}{tag}, {} waypoints",
            c.from,
            c.to,
            c.kind,
            c.waypoints.len()
        );
    }
    let bb = bounding_volume(&l.placements, &l.connectors).unwrap();
    println!("bounds {:?} .. {:?}", bb.min, bb.max);
}
