//! Renderer-agnostic scene files (`scene3dviz-1`).
//!
//! A [`SceneGraph`] is plain data: shapes with transforms, face labels, lane
//! planes, an optional scaling legend and an optional backdrop. It is written
//! as pretty-printed JSON with sorted map keys, so equal scenes produce equal
//! bytes. Readers ignore fields they do not know.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::layout::{bounding_volume, Aabb, ConnectorKind, Layout, LayoutError};
use crate::mapping::{Face, MappingConfig, MappingKind, VisualStyle};
use crate::model::{ArgumentValue, NodeKind, ProcessModel};

pub const SCHEMA: &str = "scene3dviz-1";
/// Argument read into a detail card's role list.
pub const ROLE_ATTRIBUTE: &str = "Role";
/// Argument read into a detail card's service list.
pub const SERVICE_ATTRIBUTE: &str = "IT-Service";

/// Cross-section of connector bars.
const CONNECTOR_THICKNESS: f64 = 0.08;
/// Thickness of lane planes and backdrop slabs.
const PLANE_THICKNESS: f64 = 0.02;
/// Margin between the model and the backdrop walls.
const ROOM_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Cube,
    Sphere,
    Diamond,
    Bar,
    ArrowBar,
    Plane,
}

impl Shape {
    pub fn for_node(kind: NodeKind) -> Shape {
        match kind {
            NodeKind::Task => Shape::Cube,
            NodeKind::Start | NodeKind::End => Shape::Sphere,
            NodeKind::ParallelSplit | NodeKind::ParallelJoin => Shape::Bar,
            NodeKind::XorSplit | NodeKind::XorJoin | NodeKind::LoopHead | NodeKind::LoopTail => {
                Shape::Diamond
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub position: [f64; 3],
    pub scale: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneElement {
    pub shape: Shape,
    pub transform: Transform,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<Face, String>,
    /// Node id for clickable node elements; connectors carry none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick_id: Option<String>,
    /// Node kind in snake case, or `edge` / `edge_arrow` for connectors.
    pub kind_tag: String,
    /// Connector polyline, first point at the source.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub path: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaneAxis {
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanePlane {
    pub axis: LaneAxis,
    pub index: u32,
    pub caption: String,
    /// Attribute that produced the lane.
    pub attribute: String,
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Legend {
    /// Corner the axis glyph is anchored at.
    pub origin: [f64; 3],
    /// Axis name (`x`, `y`, `z`) to a caption such as `Cost (relative)`.
    pub axes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackdropKind {
    #[default]
    None,
    Grid,
    Room,
}

impl FromStr for BackdropKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(BackdropKind::None),
            "grid" => Ok(BackdropKind::Grid),
            "room" => Ok(BackdropKind::Room),
            other => Err(format!(
                "unknown backdrop `{other}` (expected none, grid or room)"
            )),
        }
    }
}

impl fmt::Display for BackdropKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackdropKind::None => "none",
            BackdropKind::Grid => "grid",
            BackdropKind::Room => "room",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackdropPart {
    pub name: String,
    pub shape: Shape,
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Backdrop {
    pub kind: BackdropKind,
    /// Spacing of grid lines on the floor, in lanes.
    pub grid_step: f64,
    pub parts: Vec<BackdropPart>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraHint {
    pub eye: [f64; 3],
    pub target: [f64; 3],
    pub up: [f64; 3],
    pub fov_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub schema: String,
    pub name: String,
    /// Nodes in model order, then connectors.
    pub elements: Vec<SceneElement>,
    pub lanes: Vec<LanePlane>,
    #[serde(default)]
    pub legend: Option<Legend>,
    #[serde(default)]
    pub backdrop: Option<Backdrop>,
    pub bounds: Aabb,
    pub camera_hint: CameraHint,
}

impl SceneGraph {
    /// Everything drawable: elements, lanes, legend and backdrop.
    pub fn element_count(&self) -> usize {
        self.elements.len()
            + self.lanes.len()
            + usize::from(self.legend.is_some())
            + usize::from(self.backdrop.is_some())
    }

    pub fn node_elements(&self) -> impl Iterator<Item = &SceneElement> {
        self.elements.iter().filter(|e| e.pick_id.is_some())
    }

    pub fn element(&self, pick_id: &str) -> Option<&SceneElement> {
        self.elements
            .iter()
            .find(|e| e.pick_id.as_deref() == Some(pick_id))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SceneOptions {
    pub backdrop: BackdropKind,
}

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("layout does not match the model: {0}")]
    InconsistentInputs(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("scene i/o failed: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("not a {SCHEMA} scene: {0}")]
    Format(#[from] serde_json::Error),
}

/// Turns a laid-out model into a scene graph.
pub fn build_scene(
    model: &ProcessModel,
    layout: &Layout,
    config: &MappingConfig,
    options: &SceneOptions,
) -> Result<SceneGraph, SceneError> {
    let nodes = model.nodes();
    if layout.placements.len() != nodes.len() {
        return Err(SceneError::InconsistentInputs(format!(
            "{} placements for {} nodes",
            layout.placements.len(),
            nodes.len()
        )));
    }
    let ids: HashSet<&str> = nodes.iter().map(|n| n.id.as_str()).collect();
    for p in &layout.placements {
        if !ids.contains(p.node_id.as_str()) {
            return Err(SceneError::InconsistentInputs(format!(
                "placement for unknown node `{}`",
                p.node_id
            )));
        }
    }
    for c in &layout.connectors {
        for end in [&c.from, &c.to] {
            if !ids.contains(end.as_str()) {
                return Err(SceneError::InconsistentInputs(format!(
                    "connector touches unknown node `{end}`"
                )));
            }
        }
    }

    let bounds = bounding_volume(&layout.placements, &layout.connectors)?;
    let mut elements = Vec::with_capacity(layout.placements.len() + layout.connectors.len());
    for p in &layout.placements {
        let kind = model.node(&p.node_id).expect("checked above").kind;
        elements.push(SceneElement {
            shape: Shape::for_node(kind),
            transform: Transform {
                position: p.position,
                scale: p.size,
            },
            labels: p.labels.clone(),
            pick_id: Some(p.node_id.clone()),
            kind_tag: kind.as_str().to_owned(),
            path: Vec::new(),
        });
    }
    for c in &layout.connectors {
        let (shape, tag) = match c.kind {
            ConnectorKind::Arrow => (Shape::ArrowBar, "edge_arrow"),
            ConnectorKind::Plain => (Shape::Bar, "edge"),
        };
        elements.push(SceneElement {
            shape,
            transform: connector_transform(&c.waypoints),
            labels: BTreeMap::new(),
            pick_id: None,
            kind_tag: tag.to_owned(),
            path: c.waypoints.clone(),
        });
    }

    let lanes = layout
        .lanes
        .iter()
        .map(|l| {
            let attribute = config
                .tuple(l.style)
                .map(|t| t.attribute.clone())
                .unwrap_or_default();
            lane_plane(l.style, l.index, &l.label, attribute, &bounds)
        })
        .collect();

    let legend = config.has_scaling().then(|| legend(config, &bounds));
    let backdrop = match options.backdrop {
        BackdropKind::None => None,
        kind => Some(backdrop(kind, &bounds)),
    };

    Ok(SceneGraph {
        schema: SCHEMA.to_owned(),
        name: model.name().to_owned(),
        elements,
        lanes,
        legend,
        backdrop,
        bounds,
        camera_hint: camera_hint(&bounds),
    })
}

fn connector_transform(path: &[[f64; 3]]) -> Transform {
    let mut lo = path[0];
    let mut hi = path[0];
    for p in path {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let length = path.windows(2).map(|w| dist(w[0], w[1])).sum::<f64>();
    Transform {
        position: std::array::from_fn(|a| (lo[a] + hi[a]) / 2.0),
        scale: [length, CONNECTOR_THICKNESS, CONNECTOR_THICKNESS],
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

fn lane_plane(
    style: VisualStyle,
    index: u32,
    caption: &str,
    attribute: String,
    b: &Aabb,
) -> LanePlane {
    let cx = (b.min[0] + b.max[0]) / 2.0;
    let width = b.max[0] - b.min[0];
    let lane = f64::from(index);
    let (axis, transform) = match style {
        // strip on the floor under the model
        VisualStyle::PositionZ => (
            LaneAxis::Z,
            Transform {
                position: [cx, b.min[1] - PLANE_THICKNESS, lane],
                scale: [width, PLANE_THICKNESS, 1.0],
            },
        ),
        // strip on the wall behind the model
        _ => (
            LaneAxis::Y,
            Transform {
                position: [cx, lane, b.min[2] - PLANE_THICKNESS],
                scale: [width, 1.0, PLANE_THICKNESS],
            },
        ),
    };
    LanePlane {
        axis,
        index,
        caption: caption.to_owned(),
        attribute,
        transform,
    }
}

fn legend(config: &MappingConfig, b: &Aabb) -> Legend {
    let mut axes = BTreeMap::new();
    for t in &config.tuples {
        if let Some(axis) = t.style.scale_axis() {
            let mapping = match t.mapping {
                MappingKind::Direct => "direct",
                MappingKind::Relative { .. } => "relative",
                MappingKind::Discrete { .. } => "discrete",
            };
            axes.insert(
                ["x", "y", "z"][axis].to_owned(),
                format!("{} ({mapping})", t.attribute),
            );
        }
    }
    Legend {
        origin: [b.min[0] - 1.0, b.min[1], b.max[2] + 1.0],
        axes,
    }
}

fn backdrop(kind: BackdropKind, b: &Aabb) -> Backdrop {
    let lo = b.min.map(|v| v - ROOM_MARGIN);
    let hi = b.max.map(|v| v + ROOM_MARGIN);
    let size: [f64; 3] = std::array::from_fn(|a| hi[a] - lo[a]);
    let c: [f64; 3] = std::array::from_fn(|a| (lo[a] + hi[a]) / 2.0);
    let floor_y = lo[1];
    let slab = |name: &str, shape: Shape, position: [f64; 3], scale: [f64; 3]| BackdropPart {
        name: name.to_owned(),
        shape,
        transform: Transform { position, scale },
    };
    let mut parts = vec![slab(
        "floor",
        Shape::Plane,
        [c[0], floor_y, c[2]],
        [size[0], PLANE_THICKNESS, size[2]],
    )];
    if kind == BackdropKind::Room {
        let wall_h = size[1].max(4.0);
        let wall_y = floor_y + wall_h / 2.0;
        let table_h = 0.75;
        let table = [size[0] * 0.15, table_h, size[2] * 0.3];
        parts.extend([
            slab(
                "wall_back",
                Shape::Plane,
                [c[0], wall_y, lo[2]],
                [size[0], wall_h, PLANE_THICKNESS],
            ),
            slab(
                "wall_left",
                Shape::Plane,
                [lo[0], wall_y, c[2]],
                [PLANE_THICKNESS, wall_h, size[2]],
            ),
            slab(
                "wall_right",
                Shape::Plane,
                [hi[0], wall_y, c[2]],
                [PLANE_THICKNESS, wall_h, size[2]],
            ),
            slab(
                "table_left",
                Shape::Cube,
                [lo[0] + table[0], floor_y + table_h / 2.0, c[2]],
                table,
            ),
            slab(
                "table_right",
                Shape::Cube,
                [hi[0] - table[0], floor_y + table_h / 2.0, c[2]],
                table,
            ),
        ]);
    }
    Backdrop {
        kind,
        grid_step: 1.0,
        parts,
    }
}

/// Looks at the center of `b` from the front, slightly above, far enough
/// back that a 60 degree frustum holds the bounding sphere.
pub fn camera_hint(b: &Aabb) -> CameraHint {
    let target = b.center();
    let e = b.extent();
    let radius = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt() / 2.0;
    let fov_deg: f64 = 60.0;
    let distance = radius.max(1.0) / (fov_deg.to_radians() / 2.0).sin();
    CameraHint {
        eye: [target[0], target[1] + distance * 0.4, target[2] + distance],
        target,
        up: [0.0, 1.0, 0.0],
        fov_deg,
    }
}

pub fn to_json(scene: &SceneGraph) -> String {
    let mut s = serde_json::to_string_pretty(scene).expect("scene serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<SceneGraph, SceneError> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_scene(scene: &SceneGraph, path: impl AsRef<Path>) -> Result<(), SceneError> {
    std::fs::write(path, to_json(scene))?;
    Ok(())
}

pub fn read_scene(path: impl AsRef<Path>) -> Result<SceneGraph, SceneError> {
    from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailArgument {
    pub name: String,
    /// Value with its unit, e.g. `20 min`.
    pub display: String,
    pub value: ArgumentValue,
}

/// What a click on a node shows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailCard {
    pub id: String,
    pub label: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    pub arguments: Vec<DetailArgument>,
    pub roles: Vec<String>,
    pub services: Vec<String>,
}

pub fn node_details(model: &ProcessModel, node_id: &str) -> Result<DetailCard, SceneError> {
    let node = model
        .node(node_id)
        .ok_or_else(|| SceneError::UnknownNode(node_id.to_owned()))?;
    let text_list = |name: &str| -> Vec<String> {
        node.arguments
            .get(name)
            .map(|v| vec![v.to_string()])
            .unwrap_or_default()
    };
    Ok(DetailCard {
        id: node.id.clone(),
        label: node.label.clone(),
        kind: node.kind,
        condition: node.condition.clone(),
        arguments: node
            .arguments
            .iter()
            .map(|(name, value)| DetailArgument {
                name: name.clone(),
                display: value.to_string(),
                value: value.clone(),
            })
            .collect(),
        roles: text_list(ROLE_ATTRIBUTE),
        services: text_list(SERVICE_ATTRIBUTE),
    })
}
