//! Independent checks over layouts, shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::HashSet;

use pm3d_core::generator::Rng;
use pm3d_core::layout::{Layout, Placement};
use pm3d_core::mapping::{MappingConfig, MappingKind, MappingTuple, VisualStyle};
use pm3d_core::model::{AttributeKind, Block, ProcessModel};

pub const EPS: f64 = 1e-9;
pub const GAP: f64 = 0.5;

/// A config that passes validation: each spatial style at most once, text
/// attributes only with the discrete mapping.
pub fn random_config(model: &ProcessModel, rng: &mut Rng) -> MappingConfig {
    let attrs: Vec<(&String, AttributeKind)> = model
        .attribute_index()
        .iter()
        .map(|(name, info)| (name, info.kind))
        .filter(|(_, k)| matches!(k, AttributeKind::Numeric | AttributeKind::Text))
        .collect();
    let mut tuples = Vec::new();
    if attrs.is_empty() {
        return MappingConfig::new(tuples);
    }
    for style in VisualStyle::SPATIAL {
        if rng.chance(1, 3) {
            continue;
        }
        let (name, kind) = attrs[rng.below(attrs.len() as u64) as usize];
        let mapping = match (kind, rng.below(3)) {
            (AttributeKind::Text, _) | (_, 0) => MappingKind::Discrete {
                lanes: Some(2 + rng.below(6) as u32),
                order: Default::default(),
            },
            (_, 1) => MappingKind::relative(),
            _ => MappingKind::Direct,
        };
        tuples.push(MappingTuple::new(style, name.clone(), mapping));
    }
    MappingConfig::new(tuples)
}

/// Pairs of node boxes with a strictly positive common volume.
pub fn overlaps(placements: &[Placement]) -> Vec<(String, String)> {
    let mut order: Vec<&Placement> = placements.iter().collect();
    order.sort_by(|a, b| a.min()[0].total_cmp(&b.min()[0]));
    let mut out = Vec::new();
    for (i, a) in order.iter().enumerate() {
        let (a0, a1) = (a.min(), a.max());
        for b in &order[i + 1..] {
            let (b0, b1) = (b.min(), b.max());
            if b0[0] >= a1[0] {
                break;
            }
            if (0..3).all(|k| a0[k] < b1[k] && b0[k] < a1[k]) {
                out.push((a.node_id.clone(), b.node_id.clone()));
            }
        }
    }
    out
}

/// Forward links whose target does not lie strictly to the right of the
/// source.
pub fn backward_links(model: &ProcessModel, layout: &Layout) -> Vec<(String, String)> {
    let x = |id: &str| layout.placements[model.position(id).unwrap()].position[0];
    let mut out = Vec::new();
    for n in model.nodes() {
        for next in &n.nodes_after {
            if x(next) <= x(&n.id) {
                out.push((n.id.clone(), next.clone()));
            }
        }
    }
    out
}

/// Connectors whose ends do not sit on the right face of the source and the
/// left face of the target (back edges: top faces).
pub fn detached_connectors(model: &ProcessModel, layout: &Layout) -> Vec<(String, String)> {
    let p = |id: &str| &layout.placements[model.position(id).unwrap()];
    let close = |a: [f64; 3], b: [f64; 3]| (0..3).all(|k| (a[k] - b[k]).abs() < EPS);
    layout
        .connectors
        .iter()
        .filter(|c| {
            let (s, t) = (p(&c.from), p(&c.to));
            let (first, last) = (c.waypoints[0], *c.waypoints.last().unwrap());
            let ok = if c.back_edge {
                close(first, [s.position[0], s.max()[1], s.position[2]])
                    && close(last, [t.position[0], t.max()[1], t.position[2]])
            } else {
                close(first, [s.max()[0], s.position[1], s.position[2]])
                    && close(last, [t.min()[0], t.position[1], t.position[2]])
            };
            !ok
        })
        .map(|c| (c.from.clone(), c.to.clone()))
        .collect()
}

fn collect(blocks: &[Block], out: &mut Vec<usize>) {
    for b in blocks {
        match b {
            Block::Task(i) => out.push(*i),
            Block::Parallel {
                split,
                join,
                branches,
            }
            | Block::Xor {
                split,
                join,
                branches,
            } => {
                out.push(*split);
                out.push(*join);
                for br in branches {
                    collect(br, out);
                }
            }
            Block::Loop { head, tail, body } => {
                out.push(*head);
                out.push(*tail);
                collect(body, out);
            }
        }
    }
}

/// Vertical extent of a branch: its node boxes and the waypoints of
/// connectors running between its nodes.
fn branch_extent(model: &ProcessModel, layout: &Layout, branch: &[Block]) -> Option<(f64, f64)> {
    let mut idx = Vec::new();
    collect(branch, &mut idx);
    if idx.is_empty() {
        return None;
    }
    let ids: HashSet<&str> = idx.iter().map(|&i| model.nodes()[i].id.as_str()).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &i in &idx {
        lo = lo.min(layout.placements[i].min()[1]);
        hi = hi.max(layout.placements[i].max()[1]);
    }
    for c in &layout.connectors {
        if ids.contains(c.from.as_str()) && ids.contains(c.to.as_str()) {
            for w in &c.waypoints {
                hi = hi.max(w[1]);
            }
        }
    }
    Some((lo, hi))
}

/// Branches that start below the top of an earlier sibling (plus the gap),
/// at any nesting depth. Returns the split ids of offending blocks.
pub fn stacking_violations(model: &ProcessModel, layout: &Layout) -> Vec<String> {
    fn walk(model: &ProcessModel, layout: &Layout, blocks: &[Block], out: &mut Vec<String>) {
        for b in blocks {
            match b {
                Block::Task(_) => {}
                Block::Parallel {
                    split, branches, ..
                }
                | Block::Xor {
                    split, branches, ..
                } => {
                    let mut top = f64::NEG_INFINITY;
                    for br in branches {
                        if let Some((lo, hi)) = branch_extent(model, layout, br) {
                            if lo < top + GAP - EPS {
                                out.push(model.nodes()[*split].id.clone());
                            }
                            top = top.max(hi);
                        }
                        walk(model, layout, br, out);
                    }
                }
                Block::Loop { body, .. } => walk(model, layout, body, out),
            }
        }
    }
    let mut out = Vec::new();
    walk(model, layout, &model.block_tree().unwrap(), &mut out);
    out
}
