//! 3D placement of nodes and connectors.
//!
//! Axis roles are fixed: X follows control flow, Y stacks parallel and xor
//! branches (plus any `positionY` offset), Z carries `positionZ` lanes only.
//! All lengths are in lane units; an unscaled node is a unit cube centered
//! on its position.
//!
//! Layout runs in two passes over the block tree. The first measures every
//! block relative to its own left edge and base line; the second walks the
//! tree again and assigns absolute coordinates. Both passes touch each block
//! once.
//!
//! Neighbours along a sequence keep [`GAP`] between their boxes, which puts
//! unscaled nodes 1.5 lanes apart. Branch `i + 1` of a block starts
//! [`GAP`] above the highest box of branches `0..=i`; for unit nodes that
//! is one lane above the previous branch's top.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::mapping::{Face, Resolution, ResolvedVisual, VisualStyle};
use crate::model::{Block, NodeKind, ProcessModel, StructureError};

/// Clearance between neighbouring boxes, in lanes.
pub const GAP: f64 = 0.5;
/// Height of a loop's back edge above the loop's highest box.
pub const BACK_EDGE_CLEARANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub node_id: String,
    pub position: [f64; 3],
    pub size: [f64; 3],
    pub labels: BTreeMap<Face, String>,
}

impl Placement {
    pub fn min(&self) -> [f64; 3] {
        std::array::from_fn(|a| self.position[a] - self.size[a] / 2.0)
    }

    pub fn max(&self) -> [f64; 3] {
        std::array::from_fn(|a| self.position[a] + self.size[a] / 2.0)
    }

    /// Strict overlap of the two boxes; touching faces do not count.
    pub fn intersects(&self, other: &Placement) -> bool {
        let (a0, a1, b0, b1) = (self.min(), self.max(), other.min(), other.max());
        (0..3).all(|i| a0[i] < b1[i] && b0[i] < a1[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectorKind {
    Plain,
    Arrow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub from: String,
    pub to: String,
    pub kind: ConnectorKind,
    pub waypoints: Vec<[f64; 3]>,
    /// Loop back edges run from the tail to the head.
    #[serde(default)]
    pub back_edge: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lane {
    pub style: VisualStyle,
    pub index: u32,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// One per node, in model order.
    pub placements: Vec<Placement>,
    pub connectors: Vec<Connector>,
    pub lanes: Vec<Lane>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn center(&self) -> [f64; 3] {
        std::array::from_fn(|a| (self.min[a] + self.max[a]) / 2.0)
    }

    pub fn extent(&self) -> [f64; 3] {
        std::array::from_fn(|a| self.max[a] - self.min[a])
    }

    pub fn contains(&self, other_min: [f64; 3], other_max: [f64; 3]) -> bool {
        (0..3).all(|a| self.min[a] <= other_min[a] && other_max[a] <= self.max[a])
    }

    fn grow(&mut self, lo: [f64; 3], hi: [f64; 3]) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(lo[a]);
            self.max[a] = self.max[a].max(hi[a]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("model is not block-structured {0}")]
    Structure(#[from] StructureError),
    #[error("nothing to frame: the scene has no placements")]
    EmptyScene,
}

/// Tight box around all node boxes and connector waypoints.
pub fn bounding_volume(
    placements: &[Placement],
    connectors: &[Connector],
) -> Result<Aabb, LayoutError> {
    let first = placements.first().ok_or(LayoutError::EmptyScene)?;
    let mut bb = Aabb {
        min: first.min(),
        max: first.max(),
    };
    for p in placements {
        bb.grow(p.min(), p.max());
    }
    for c in connectors {
        for w in &c.waypoints {
            bb.grow(*w, *w);
        }
    }
    Ok(bb)
}

#[derive(Debug, Clone, Copy)]
struct Extent {
    width: f64,
    bottom: f64,
    top: f64,
}

impl Extent {
    /// Placeholder for an empty branch: no width, one lane of height.
    const EMPTY: Extent = Extent {
        width: 0.0,
        bottom: -0.5,
        top: 0.5,
    };
}

struct Measured {
    extent: Extent,
    /// Base line of each branch relative to the block's base.
    bases: Vec<f64>,
    /// Back-edge height relative to the base (loops only).
    back_y: f64,
}

struct Engine<'a> {
    visuals: Vec<&'a ResolvedVisual>,
    measured: HashMap<usize, Measured>,
    positions: Vec<[f64; 3]>,
    back_edges: Vec<(usize, usize, f64)>,
}

/// Lays out `model`, taking offsets, scales and labels from `resolution`.
/// Nodes missing from `resolution` are drawn with baseline visuals.
pub fn layout(model: &ProcessModel, resolution: &Resolution) -> Result<Layout, LayoutError> {
    let tree = model.block_tree()?;
    let nodes = model.nodes();

    let defaults: Vec<ResolvedVisual>;
    let aligned = resolution.visuals.len() == nodes.len()
        && resolution
            .visuals
            .iter()
            .zip(nodes)
            .all(|(v, n)| v.node_id == n.id);
    let visuals: Vec<&ResolvedVisual> = if aligned {
        resolution.visuals.iter().collect()
    } else {
        let by_id = resolution.by_id();
        defaults = nodes
            .iter()
            .map(|n| ResolvedVisual::baseline(&n.id))
            .collect();
        nodes
            .iter()
            .zip(&defaults)
            .map(|(n, d)| by_id.get(n.id.as_str()).copied().unwrap_or(d))
            .collect()
    };

    let start = nodes
        .iter()
        .position(|n| n.kind == NodeKind::Start)
        .expect("validated");
    let end = nodes
        .iter()
        .position(|n| n.kind == NodeKind::End)
        .expect("validated");
    let mut root = Vec::with_capacity(tree.len() + 2);
    root.push(Block::Task(start));
    root.extend(tree);
    root.push(Block::Task(end));

    let mut engine = Engine {
        visuals,
        measured: HashMap::new(),
        positions: vec![[0.0; 3]; nodes.len()],
        back_edges: Vec::new(),
    };
    engine.measure_seq(&root);
    let start_half = engine.visuals[start].scale[0] / 2.0;
    engine.place_seq(&root, -start_half, 0.0);

    let placements: Vec<Placement> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| Placement {
            node_id: n.id.clone(),
            position: engine.positions[i],
            size: engine.visuals[i].scale,
            labels: engine.visuals[i].face_labels.clone(),
        })
        .collect();

    let mut connectors = Vec::with_capacity(nodes.len() + engine.back_edges.len());
    for (i, n) in nodes.iter().enumerate() {
        for next in &n.nodes_after {
            let j = model.position(next).expect("validated");
            let (a, b) = (&placements[i], &placements[j]);
            let kind = match nodes[j].kind {
                NodeKind::Task | NodeKind::End => ConnectorKind::Arrow,
                _ => ConnectorKind::Plain,
            };
            connectors.push(Connector {
                from: n.id.clone(),
                to: next.clone(),
                kind,
                waypoints: vec![
                    [a.max()[0], a.position[1], a.position[2]],
                    [b.min()[0], b.position[1], b.position[2]],
                ],
                back_edge: false,
            });
        }
    }
    for &(head, tail, y) in &engine.back_edges {
        let (h, t) = (&placements[head], &placements[tail]);
        connectors.push(Connector {
            from: t.node_id.clone(),
            to: h.node_id.clone(),
            kind: ConnectorKind::Arrow,
            waypoints: vec![
                [t.position[0], t.max()[1], t.position[2]],
                [
                    (t.position[0] + h.position[0]) / 2.0,
                    y,
                    (t.position[2] + h.position[2]) / 2.0,
                ],
                [h.position[0], h.max()[1], h.position[2]],
            ],
            back_edge: true,
        });
    }

    let lanes = resolution
        .lanes
        .iter()
        .map(|l| Lane {
            style: l.style,
            index: l.index,
            label: l.label.clone(),
        })
        .collect();

    Ok(Layout {
        placements,
        connectors,
        lanes,
    })
}

impl Engine<'_> {
    fn node_extent(&self, i: usize) -> Extent {
        let v = self.visuals[i];
        Extent {
            width: v.scale[0],
            bottom: v.offset_y - v.scale[1] / 2.0,
            top: v.offset_y + v.scale[1] / 2.0,
        }
    }

    fn extent(&self, block: &Block) -> Extent {
        match block {
            Block::Task(i) => self.node_extent(*i),
            other => self.measured[&other.entry()].extent,
        }
    }

    fn measure_seq(&mut self, items: &[Block]) -> Extent {
        if items.is_empty() {
            return Extent::EMPTY;
        }
        let mut out = Extent {
            width: -GAP,
            bottom: f64::INFINITY,
            top: f64::NEG_INFINITY,
        };
        for item in items {
            let e = self.measure(item);
            out.width += GAP + e.width;
            out.bottom = out.bottom.min(e.bottom);
            out.top = out.top.max(e.top);
        }
        out
    }

    fn measure(&mut self, block: &Block) -> Extent {
        let measured = match block {
            Block::Task(i) => return self.node_extent(*i),
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
                let s = self.node_extent(*split);
                let j = self.node_extent(*join);
                let mut bases = Vec::with_capacity(branches.len());
                let mut inner_width: f64 = 0.0;
                let mut bottom = s.bottom.min(j.bottom);
                let mut top = s.top.max(j.top);
                let mut branch_top = f64::NEG_INFINITY;
                for (k, branch) in branches.iter().enumerate() {
                    let e = self.measure_seq(branch);
                    let base = if k == 0 {
                        0.0
                    } else {
                        branch_top + GAP - e.bottom
                    };
                    branch_top = branch_top.max(base + e.top);
                    bottom = bottom.min(base + e.bottom);
                    top = top.max(base + e.top);
                    inner_width = inner_width.max(e.width);
                    bases.push(base);
                }
                let mut width = s.width + GAP + j.width;
                if inner_width > 0.0 {
                    width += inner_width + GAP;
                }
                Measured {
                    extent: Extent { width, bottom, top },
                    bases,
                    back_y: 0.0,
                }
            }
            Block::Loop { head, tail, body } => {
                let h = self.node_extent(*head);
                let t = self.node_extent(*tail);
                let mut bottom = h.bottom.min(t.bottom);
                let mut top = h.top.max(t.top);
                let mut width = h.width + GAP + t.width;
                if !body.is_empty() {
                    let e = self.measure_seq(body);
                    bottom = bottom.min(e.bottom);
                    top = top.max(e.top);
                    width += e.width + GAP;
                }
                let back_y = top + BACK_EDGE_CLEARANCE;
                Measured {
                    extent: Extent {
                        width,
                        bottom,
                        top: back_y,
                    },
                    bases: Vec::new(),
                    back_y,
                }
            }
        };
        let extent = measured.extent;
        self.measured.insert(block.entry(), measured);
        extent
    }

    /// Places a node with its left face at `left`; returns its right face.
    fn place_node(&mut self, i: usize, left: f64, base: f64) -> f64 {
        let v = self.visuals[i];
        let half = v.scale[0] / 2.0;
        self.positions[i] = [left + half, base + v.offset_y, v.offset_z];
        left + v.scale[0]
    }

    fn place_seq(&mut self, items: &[Block], left: f64, base: f64) {
        let mut cursor = left;
        for item in items {
            self.place(item, cursor, base);
            cursor += self.extent(item).width + GAP;
        }
    }

    fn place(&mut self, block: &Block, left: f64, base: f64) {
        match block {
            Block::Task(i) => {
                self.place_node(*i, left, base);
            }
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
                let inner_left = self.place_node(*split, left, base) + GAP;
                let mut inner_width: f64 = 0.0;
                let bases = self.measured[split].bases.clone();
                for (branch, rel) in branches.iter().zip(bases) {
                    self.place_seq(branch, inner_left, base + rel);
                    if !branch.is_empty() {
                        let w = branch.iter().map(|b| self.extent(b).width).sum::<f64>()
                            + GAP * (branch.len() - 1) as f64;
                        inner_width = inner_width.max(w);
                    }
                }
                let join_left = if inner_width > 0.0 {
                    inner_left + inner_width + GAP
                } else {
                    inner_left
                };
                self.place_node(*join, join_left, base);
            }
            Block::Loop { head, tail, body } => {
                let mut cursor = self.place_node(*head, left, base) + GAP;
                if !body.is_empty() {
                    self.place_seq(body, cursor, base);
                    let w = body.iter().map(|b| self.extent(b).width).sum::<f64>()
                        + GAP * (body.len() - 1) as f64;
                    cursor += w + GAP;
                }
                self.place_node(*tail, cursor, base);
                let back_y = base + self.measured[head].back_y;
                self.back_edges.push((*head, *tail, back_y));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::Resolution;
    use crate::parser::parse;

    fn baseline_layout(xml: &str) -> (ProcessModel, Layout) {
        let (m, _) = parse(xml).unwrap();
        let l = layout(&m, &Resolution::baseline(&m)).unwrap();
        (m, l)
    }

    fn pos<'a>(l: &'a Layout, id: &str) -> &'a Placement {
        l.placements.iter().find(|p| p.node_id == id).unwrap()
    }

    #[test]
    fn linear_chain_spacing() {
        let (_, l) = baseline_layout(
            "<description><call id='a'/><call id='b'/><call id='c'/></description>",
        );
        let xs: Vec<f64> = l.placements.iter().map(|p| p.position[0]).collect();
        assert_eq!(xs, vec![0.0, 1.5, 3.0, 4.5, 6.0]);
        assert!(l
            .placements
            .iter()
            .all(|p| p.position[1] == 0.0 && p.position[2] == 0.0));
        assert!(l.placements.iter().all(|p| p.size == [1.0; 3]));
        let bb = bounding_volume(&l.placements, &l.connectors).unwrap();
        assert_eq!(bb.min[0], -0.5);
        assert_eq!(bb.max[0], 6.5);
    }

    #[test]
    fn single_node_bounds() {
        let p = Placement {
            node_id: "n".into(),
            position: [0.0; 3],
            size: [1.0; 3],
            labels: BTreeMap::new(),
        };
        let bb = bounding_volume(&[p], &[]).unwrap();
        assert_eq!(bb.min, [-0.5; 3]);
        assert_eq!(bb.max, [0.5; 3]);
        assert_eq!(bounding_volume(&[], &[]), Err(LayoutError::EmptyScene));
    }

    #[test]
    fn xor_inside_first_parallel_branch_pushes_second_branch_to_three() {
        let (_, l) = baseline_layout(
            "<description><parallel id='p'>
               <parallel_branch><choose id='x'>
                 <alternative><call id='a'/></alternative>
                 <alternative><call id='b'/></alternative>
               </choose></parallel_branch>
               <parallel_branch><call id='c'/></parallel_branch>
             </parallel></description>",
        );
        assert_eq!(pos(&l, "a").position[1], 0.0);
        assert_eq!(pos(&l, "b").position[1], 1.5);
        assert_eq!(pos(&l, "b").max()[1], 2.0);
        assert_eq!(pos(&l, "c").position[1], 3.0);
        // join sits after the widest branch
        assert!(pos(&l, "p_join").min()[0] > pos(&l, "x_join").max()[0]);
    }

    #[test]
    fn loop_back_edge_routes_over_body() {
        let (_, l) = baseline_layout(
            "<description><loop id='l' condition='again'><call id='a'/><call id='b'/></loop></description>",
        );
        let back: Vec<_> = l.connectors.iter().filter(|c| c.back_edge).collect();
        assert_eq!(back.len(), 1);
        let c = back[0];
        assert_eq!((c.from.as_str(), c.to.as_str()), ("l_end", "l"));
        assert_eq!(c.waypoints.len(), 3);
        assert_eq!(c.waypoints[1][1], 1.0);
        assert_eq!(c.waypoints[0], [pos(&l, "l_end").position[0], 0.5, 0.0]);
        assert_eq!(c.waypoints[2], [pos(&l, "l").position[0], 0.5, 0.0]);
    }

    #[test]
    fn empty_branch_and_empty_loop() {
        let (m, l) = baseline_layout(
            "<description>
               <choose id='x'><alternative/><alternative><call id='a'/></alternative></choose>
               <loop id='l'/>
             </description>",
        );
        assert_eq!(pos(&l, "a").position[1], 1.5);
        assert_eq!(l.placements.len(), m.nodes().len());
        assert_eq!(
            pos(&l, "x_join").position[0] - pos(&l, "x").position[0],
            3.0
        );
        assert_eq!(pos(&l, "l_end").position[0] - pos(&l, "l").position[0], 1.5);
    }

    #[test]
    fn scaled_nodes_keep_clearance() {
        let (m, _) = parse("<description><call id='a'/><call id='b'/></description>").unwrap();
        let mut res = Resolution::baseline(&m);
        for v in &mut res.visuals {
            v.scale = [2.0; 3];
        }
        let l = layout(&m, &res).unwrap();
        assert_eq!(pos(&l, "b").min()[0] - pos(&l, "a").max()[0], GAP);
        assert!(!pos(&l, "a").intersects(pos(&l, "b")));
    }

    #[test]
    fn missing_visuals_fall_back_to_baseline() {
        let (m, _) = parse("<description><call id='a'/></description>").unwrap();
        let mut res = Resolution::baseline(&m);
        res.visuals.retain(|v| v.node_id != "a");
        let l = layout(&m, &res).unwrap();
        assert_eq!(pos(&l, "a").size, [1.0; 3]);
    }
}
