//! Attribute-to-visual mappings.
//!
//! A [`MappingConfig`] is a list of `(style, attribute, mapping)` tuples.
//! Each tuple turns the values of one attribute into a position offset, a
//! scale factor or a face label:
//!
//! * **Direct** uses the raw value: offset `v` lanes, scale factor `v`, or the
//!   value's text as a label.
//! * **Relative** normalizes numeric values to `pct = (v - min) / (max - min)`;
//!   positions become `pct * (span - 1)` lanes, scales become `1 + pct`.
//! * **Discrete** bins values into swim lanes. Numbers land in
//!   `floor(pct * k)` (clamped to `k - 1`); text values get one lane per
//!   distinct value. Positions use the lane index, scales `1 + lane / (lanes - 1)`.
//!
//! Nodes that do not carry a configured attribute keep offset 0 and scale 1.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{ArgumentValue, AttributeKind, ProcessModel};

pub const DEFAULT_LANES: u32 = 5;
/// Direct scale factors never drop below this.
pub const MIN_DIRECT_SCALE: f64 = 0.01;
/// Pseudo-attribute resolving to a node's label.
pub const NAME_ATTRIBUTE: &str = "Name";
/// Pseudo-attribute resolving to a node's id.
pub const ID_ATTRIBUTE: &str = "Id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Face {
    Front,
    Top,
    Back,
    Bottom,
    Left,
    Right,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::Front,
        Face::Top,
        Face::Back,
        Face::Bottom,
        Face::Left,
        Face::Right,
    ];

    fn name(self) -> &'static str {
        match self {
            Face::Front => "Front",
            Face::Top => "Top",
            Face::Back => "Back",
            Face::Bottom => "Bottom",
            Face::Left => "Left",
            Face::Right => "Right",
        }
    }
}

/// A render channel one attribute can occupy. The X axis is reserved for
/// control flow and is not a style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VisualStyle {
    PositionY,
    PositionZ,
    ScaleX,
    ScaleY,
    ScaleZ,
    Label(Face),
}

impl VisualStyle {
    /// The five position/scale styles.
    pub const SPATIAL: [VisualStyle; 5] = [
        VisualStyle::PositionY,
        VisualStyle::PositionZ,
        VisualStyle::ScaleX,
        VisualStyle::ScaleY,
        VisualStyle::ScaleZ,
    ];

    pub fn is_position(self) -> bool {
        matches!(self, VisualStyle::PositionY | VisualStyle::PositionZ)
    }

    pub fn is_scale(self) -> bool {
        matches!(
            self,
            VisualStyle::ScaleX | VisualStyle::ScaleY | VisualStyle::ScaleZ
        )
    }

    /// Axis index (0 = x) for scale styles.
    pub fn scale_axis(self) -> Option<usize> {
        match self {
            VisualStyle::ScaleX => Some(0),
            VisualStyle::ScaleY => Some(1),
            VisualStyle::ScaleZ => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for VisualStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VisualStyle::PositionY => f.write_str("positionY"),
            VisualStyle::PositionZ => f.write_str("positionZ"),
            VisualStyle::ScaleX => f.write_str("scaleX"),
            VisualStyle::ScaleY => f.write_str("scaleY"),
            VisualStyle::ScaleZ => f.write_str("scaleZ"),
            VisualStyle::Label(face) => write!(f, "label{}", face.name()),
        }
    }
}

impl FromStr for VisualStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let style = match lower.as_str() {
            "positiony" => VisualStyle::PositionY,
            "positionz" => VisualStyle::PositionZ,
            "scalex" => VisualStyle::ScaleX,
            "scaley" => VisualStyle::ScaleY,
            "scalez" => VisualStyle::ScaleZ,
            "positionx" => {
                return Err("the X axis carries control flow and cannot be mapped".into())
            }
            other => {
                let face = other
                    .strip_prefix("label")
                    .map(|f| f.trim_start_matches(['.', '-', '_']))
                    .and_then(|f| {
                        Face::ALL
                            .into_iter()
                            .find(|face| face.name().eq_ignore_ascii_case(f))
                    });
                match face {
                    Some(face) => VisualStyle::Label(face),
                    None => return Err(format!("unknown visual style `{}`", s.trim())),
                }
            }
        };
        Ok(style)
    }
}

impl Serialize for VisualStyle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VisualStyle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneOrder {
    /// Text lanes follow first appearance in node-list order.
    #[default]
    FirstAppearance,
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MappingKind {
    Direct,
    /// `span` is the number of lanes a relative position stretches over.
    Relative {
        span: Option<u32>,
    },
    /// `lanes` only matters for numeric attributes.
    Discrete {
        lanes: Option<u32>,
        order: LaneOrder,
    },
}

impl MappingKind {
    pub fn discrete() -> Self {
        MappingKind::Discrete {
            lanes: None,
            order: LaneOrder::FirstAppearance,
        }
    }

    pub fn relative() -> Self {
        MappingKind::Relative { span: None }
    }
}

impl fmt::Display for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingKind::Direct => f.write_str("direct"),
            MappingKind::Relative { span } => {
                f.write_str("relative")?;
                if let Some(n) = span {
                    write!(f, ":{n}")?;
                }
                Ok(())
            }
            MappingKind::Discrete { lanes, order } => {
                f.write_str("discrete")?;
                if let Some(n) = lanes {
                    write!(f, ":{n}")?;
                }
                if *order == LaneOrder::Lexicographic {
                    f.write_str(":lex")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for MappingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':').map(str::trim);
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut count = None;
        let mut order = LaneOrder::FirstAppearance;
        for opt in parts {
            if opt.eq_ignore_ascii_case("lex") {
                order = LaneOrder::Lexicographic;
            } else if let Ok(n) = opt.parse::<u32>() {
                if count.replace(n).is_some() {
                    return Err(format!("lane count given twice in `{}`", s.trim()));
                }
            } else {
                return Err(format!("unknown mapping option `{opt}`"));
            }
        }
        match head.as_str() {
            "direct" if count.is_none() && order == LaneOrder::FirstAppearance => {
                Ok(MappingKind::Direct)
            }
            "relative" if order == LaneOrder::FirstAppearance => {
                Ok(MappingKind::Relative { span: count })
            }
            "discrete" => Ok(MappingKind::Discrete {
                lanes: count,
                order,
            }),
            "direct" | "relative" => Err(format!("`{head}` takes no such options")),
            _ => Err(format!("unknown mapping `{head}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingTuple {
    pub style: VisualStyle,
    pub attribute: String,
    pub mapping: MappingKind,
}

impl MappingTuple {
    pub fn new(style: VisualStyle, attribute: impl Into<String>, mapping: MappingKind) -> Self {
        MappingTuple {
            style,
            attribute: attribute.into(),
            mapping,
        }
    }
}

impl fmt::Display for MappingTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} : {}", self.style, self.attribute, self.mapping)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingConfig {
    pub tuples: Vec<MappingTuple>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigParseError {
    pub line: usize,
    pub message: String,
}

impl MappingConfig {
    pub fn new(tuples: Vec<MappingTuple>) -> Self {
        MappingConfig { tuples }
    }

    /// Parses the line format `style = attribute : mapping[:k]`. Blank lines
    /// and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ConfigParseError> {
        let mut tuples = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ConfigParseError { line, message };
            let (style, rest) = content
                .split_once('=')
                .ok_or_else(|| err("expected `style = attribute : mapping`".into()))?;
            let (attribute, mapping) = rest
                .split_once(':')
                .ok_or_else(|| err("expected `attribute : mapping` after `=`".into()))?;
            let attribute = attribute.trim();
            if attribute.is_empty() {
                return Err(err("empty attribute name".into()));
            }
            tuples.push(MappingTuple {
                style: style.parse().map_err(err)?,
                attribute: attribute.to_owned(),
                mapping: mapping.parse().map_err(err)?,
            });
        }
        Ok(MappingConfig { tuples })
    }

    pub fn has_scaling(&self) -> bool {
        self.tuples.iter().any(|t| t.style.is_scale())
    }

    pub fn tuple(&self, style: VisualStyle) -> Option<&MappingTuple> {
        self.tuples.iter().find(|t| t.style == style)
    }
}

impl fmt::Display for MappingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tuples {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for MappingConfig {
    type Err = ConfigParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MappingConfig::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ConfigViolation {
    DuplicateStyle { style: VisualStyle },
    TextNeedsDiscrete { attribute: String },
    MixedAttribute { attribute: String },
    LabelNeedsDirect { style: VisualStyle },
    TooFewLanes { style: VisualStyle, lanes: u32 },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigViolation::DuplicateStyle { style } => {
                write!(f, "style {style} is used by more than one tuple")
            }
            ConfigViolation::TextNeedsDiscrete { attribute } => {
                write!(
                    f,
                    "`{attribute}` holds text and can only use the discrete mapping"
                )
            }
            ConfigViolation::MixedAttribute { attribute } => {
                write!(f, "`{attribute}` mixes numeric and text values")
            }
            ConfigViolation::LabelNeedsDirect { style } => {
                write!(
                    f,
                    "{style} shows verbatim text and needs the direct mapping"
                )
            }
            ConfigViolation::TooFewLanes { style, lanes } => {
                write!(f, "{style} asks for {lanes} lanes; at least 2 are needed")
            }
        }
    }
}

/// Kind of an attribute as seen by the mapper; `Name` and `Id` count as text
/// unless the model defines arguments with those names.
pub fn effective_kind(model: &ProcessModel, attribute: &str) -> AttributeKind {
    match model.attribute_kind(attribute) {
        AttributeKind::Absent if attribute == NAME_ATTRIBUTE || attribute == ID_ATTRIBUTE => {
            AttributeKind::Text
        }
        kind => kind,
    }
}

/// Lists every way `config` breaks the tuple rules for `model`.
pub fn validate_config(model: &ProcessModel, config: &MappingConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();
    let mut counts: BTreeMap<VisualStyle, usize> = BTreeMap::new();
    for t in &config.tuples {
        *counts.entry(t.style).or_default() += 1;
    }
    for (style, n) in counts {
        if n > 1 {
            out.push(ConfigViolation::DuplicateStyle { style });
        }
    }
    for t in &config.tuples {
        if let VisualStyle::Label(_) = t.style {
            if t.mapping != MappingKind::Direct {
                out.push(ConfigViolation::LabelNeedsDirect { style: t.style });
            }
        }
        match t.mapping {
            MappingKind::Relative { span: Some(n) }
            | MappingKind::Discrete { lanes: Some(n), .. }
                if n < 2 =>
            {
                out.push(ConfigViolation::TooFewLanes {
                    style: t.style,
                    lanes: n,
                });
            }
            _ => {}
        }
        match effective_kind(model, &t.attribute) {
            AttributeKind::Mixed => out.push(ConfigViolation::MixedAttribute {
                attribute: t.attribute.clone(),
            }),
            AttributeKind::Text
                if !matches!(t.style, VisualStyle::Label(_))
                    && !matches!(t.mapping, MappingKind::Discrete { .. }) =>
            {
                out.push(ConfigViolation::TextNeedsDiscrete {
                    attribute: t.attribute.clone(),
                });
            }
            _ => {}
        }
    }
    out
}

/// Per-node visual quantities after mapping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedVisual {
    pub node_id: String,
    /// Lanes along Y.
    pub offset_y: f64,
    /// Lanes along Z.
    pub offset_z: f64,
    pub scale: [f64; 3],
    pub face_labels: BTreeMap<Face, String>,
    /// Lane index per discrete style.
    pub lane_assignments: BTreeMap<VisualStyle, u32>,
    /// Normalized value per relative or discrete-numeric style.
    pub percentages: BTreeMap<VisualStyle, f64>,
}

impl ResolvedVisual {
    pub fn baseline(node_id: impl Into<String>) -> Self {
        ResolvedVisual {
            node_id: node_id.into(),
            offset_y: 0.0,
            offset_z: 0.0,
            scale: [1.0; 3],
            face_labels: BTreeMap::new(),
            lane_assignments: BTreeMap::new(),
            percentages: BTreeMap::new(),
        }
    }
}

/// A swim lane produced by a discrete position tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneSpec {
    pub style: VisualStyle,
    pub index: u32,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum ResolveWarning {
    /// No node carries the attribute; the tuple was skipped.
    EmptyAttribute {
        style: VisualStyle,
        attribute: String,
    },
    /// A direct scale value at or below zero was raised to the minimum.
    NonPositiveScale {
        node_id: String,
        attribute: String,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolution {
    /// One entry per model node, in node order.
    pub visuals: Vec<ResolvedVisual>,
    pub lanes: Vec<LaneSpec>,
    pub warnings: Vec<ResolveWarning>,
}

impl Resolution {
    /// Baseline visuals for every node, as if no tuple were configured.
    pub fn baseline(model: &ProcessModel) -> Self {
        Resolution {
            visuals: model
                .nodes()
                .iter()
                .map(|n| ResolvedVisual::baseline(&n.id))
                .collect(),
            lanes: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn get(&self, node_id: &str) -> Option<&ResolvedVisual> {
        self.visuals.iter().find(|v| v.node_id == node_id)
    }

    pub fn by_id(&self) -> HashMap<&str, &ResolvedVisual> {
        self.visuals
            .iter()
            .map(|v| (v.node_id.as_str(), v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("incompatible mapping config: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    IncompatibleMapping(Vec<ConfigViolation>),
}

enum Value<'a> {
    Number(f64),
    Text(&'a str),
}

/// Applies every tuple of `config` to `model`.
pub fn resolve(model: &ProcessModel, config: &MappingConfig) -> Result<Resolution, ResolveError> {
    let violations = validate_config(model, config);
    if !violations.is_empty() {
        return Err(ResolveError::IncompatibleMapping(violations));
    }
    let mut res = Resolution::baseline(model);
    let nodes = model.nodes();

    for t in &config.tuples {
        let carriers: Vec<(usize, Value)> = nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| {
                let v = match n.arguments.get(&t.attribute) {
                    Some(ArgumentValue::Numeric { value, .. }) => Value::Number(*value),
                    Some(ArgumentValue::Text { value }) => Value::Text(value),
                    None if t.attribute == NAME_ATTRIBUTE => {
                        if n.label.is_empty() {
                            return None;
                        }
                        Value::Text(&n.label)
                    }
                    None if t.attribute == ID_ATTRIBUTE => Value::Text(&n.id),
                    None => return None,
                };
                Some((i, v))
            })
            .collect();
        if carriers.is_empty() {
            log::warn!("no node carries `{}`; skipping {}", t.attribute, t.style);
            res.warnings.push(ResolveWarning::EmptyAttribute {
                style: t.style,
                attribute: t.attribute.clone(),
            });
            continue;
        }
        apply_tuple(t, &carriers, model, &mut res);
    }

    for (visual, node) in res.visuals.iter_mut().zip(nodes) {
        if config.tuple(VisualStyle::Label(Face::Front)).is_none() && !node.label.is_empty() {
            visual.face_labels.insert(Face::Front, node.label.clone());
        }
        if config.tuple(VisualStyle::Label(Face::Top)).is_none() {
            visual.face_labels.insert(Face::Top, node.id.clone());
        }
    }
    Ok(res)
}

fn set_position(visual: &mut ResolvedVisual, style: VisualStyle, offset: f64) {
    match style {
        VisualStyle::PositionY => visual.offset_y = offset,
        VisualStyle::PositionZ => visual.offset_z = offset,
        _ => unreachable!("not a position style"),
    }
}

fn apply_tuple(
    t: &MappingTuple,
    carriers: &[(usize, Value)],
    model: &ProcessModel,
    res: &mut Resolution,
) {
    let style = t.style;
    match (t.mapping, style) {
        (MappingKind::Direct, VisualStyle::Label(face)) => {
            for (i, v) in carriers {
                let text = match v {
                    Value::Text(s) => (*s).to_owned(),
                    Value::Number(_) => model.nodes()[*i].arguments[&t.attribute].to_string(),
                };
                res.visuals[*i].face_labels.insert(face, text);
            }
        }
        (MappingKind::Direct, _) => {
            for (i, v) in carriers {
                let Value::Number(x) = v else { continue };
                if let Some(axis) = style.scale_axis() {
                    let mut factor = *x;
                    if factor <= 0.0 {
                        res.warnings.push(ResolveWarning::NonPositiveScale {
                            node_id: model.nodes()[*i].id.clone(),
                            attribute: t.attribute.clone(),
                            value: factor,
                        });
                    }
                    factor = factor.max(MIN_DIRECT_SCALE);
                    res.visuals[*i].scale[axis] = factor;
                } else {
                    set_position(&mut res.visuals[*i], style, *x);
                }
            }
        }
        (MappingKind::Relative { span }, _) => {
            let span = span.unwrap_or(DEFAULT_LANES);
            let numbers: Vec<(usize, f64)> = numeric_carriers(carriers);
            let (lo, hi) = min_max(&numbers);
            for (i, x) in numbers {
                let pct = percent(x, lo, hi);
                let visual = &mut res.visuals[i];
                visual.percentages.insert(style, pct);
                if let Some(axis) = style.scale_axis() {
                    visual.scale[axis] = 1.0 + pct;
                } else {
                    set_position(visual, style, pct * f64::from(span - 1));
                }
            }
        }
        (MappingKind::Discrete { lanes, order }, _) => {
            let numbers = numeric_carriers(carriers);
            let lane_of: Vec<(usize, u32)>;
            let lane_count: u32;
            let labels: Vec<String>;
            if numbers.len() == carriers.len() {
                let k = lanes.unwrap_or(DEFAULT_LANES);
                let (lo, hi) = min_max(&numbers);
                lane_of = numbers
                    .iter()
                    .map(|&(i, x)| {
                        let pct = percent(x, lo, hi);
                        res.visuals[i].percentages.insert(style, pct);
                        (i, bucket(pct, k))
                    })
                    .collect();
                lane_count = k;
                labels = bucket_labels(lo, hi, k);
            } else {
                let mut groups: Vec<&str> = Vec::new();
                for (_, v) in carriers {
                    if let Value::Text(s) = v {
                        if !groups.contains(s) {
                            groups.push(s);
                        }
                    }
                }
                if order == LaneOrder::Lexicographic {
                    groups.sort_unstable();
                }
                let lookup: HashMap<&str, u32> = groups
                    .iter()
                    .enumerate()
                    .map(|(g, s)| (*s, g as u32))
                    .collect();
                lane_of = carriers
                    .iter()
                    .filter_map(|(i, v)| match v {
                        Value::Text(s) => Some((*i, lookup[s])),
                        Value::Number(_) => None,
                    })
                    .collect();
                lane_count = groups.len() as u32;
                labels = groups.iter().map(|s| (*s).to_owned()).collect();
            }
            for (i, lane) in lane_of {
                let visual = &mut res.visuals[i];
                visual.lane_assignments.insert(style, lane);
                if let Some(axis) = style.scale_axis() {
                    visual.scale[axis] = lane_scale(lane, lane_count);
                } else {
                    set_position(visual, style, f64::from(lane));
                }
            }
            if style.is_position() {
                res.lanes.extend(
                    labels
                        .into_iter()
                        .enumerate()
                        .map(|(index, label)| LaneSpec {
                            style,
                            index: index as u32,
                            label,
                        }),
                );
            }
        }
    }
}

fn numeric_carriers(carriers: &[(usize, Value)]) -> Vec<(usize, f64)> {
    carriers
        .iter()
        .filter_map(|(i, v)| match v {
            Value::Number(x) => Some((*i, *x)),
            Value::Text(_) => None,
        })
        .collect()
}

fn min_max(values: &[(usize, f64)]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, x)| {
            (lo.min(x), hi.max(x))
        })
}

/// Position of `x` within `[lo, hi]`; 0 when the range is degenerate.
pub fn percent(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Lane for a normalized value among `k` equal-width buckets.
pub fn bucket(pct: f64, k: u32) -> u32 {
    let lane = (pct * f64::from(k)).floor();
    lane.clamp(0.0, f64::from(k - 1)) as u32
}

/// Scale factor for a lane: 1 for the first lane up to 2 for the last.
pub fn lane_scale(lane: u32, lanes: u32) -> f64 {
    if lanes <= 1 {
        1.0
    } else {
        1.0 + f64::from(lane) / f64::from(lanes - 1)
    }
}

fn bucket_labels(lo: f64, hi: f64, k: u32) -> Vec<String> {
    let width = (hi - lo) / f64::from(k);
    (0..k)
        .map(|i| {
            let a = lo + width * f64::from(i);
            let b = if i + 1 == k {
                hi
            } else {
                lo + width * f64::from(i + 1)
            };
            let close = if i + 1 == k { ']' } else { ')' };
            format!("[{}, {}{close}", trim_float(a), trim_float(b))
        })
        .collect()
}

fn trim_float(x: f64) -> String {
    let s = format!("{:.2}", x);
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn style_names_round_trip() {
        for style in VisualStyle::SPATIAL
            .into_iter()
            .chain(Face::ALL.into_iter().map(VisualStyle::Label))
        {
            assert_eq!(style.to_string().parse::<VisualStyle>().unwrap(), style);
        }
        assert_eq!(
            "label.front".parse::<VisualStyle>().unwrap(),
            VisualStyle::Label(Face::Front)
        );
        assert!("positionX".parse::<VisualStyle>().is_err());
        assert!("colour".parse::<VisualStyle>().is_err());
    }

    #[test]
    fn mapping_options() {
        assert_eq!(
            "discrete".parse::<MappingKind>().unwrap(),
            MappingKind::discrete()
        );
        assert_eq!(
            "Discrete:3:lex".parse::<MappingKind>().unwrap(),
            MappingKind::Discrete {
                lanes: Some(3),
                order: LaneOrder::Lexicographic
            }
        );
        assert_eq!(
            "relative:7".parse::<MappingKind>().unwrap(),
            MappingKind::Relative { span: Some(7) }
        );
        assert!("direct:3".parse::<MappingKind>().is_err());
        assert!("relative:lex".parse::<MappingKind>().is_err());
        assert!("aggregate".parse::<MappingKind>().is_err());
    }

    #[test]
    fn config_text_format() {
        let text = "# roles as lanes\npositionZ = Role : discrete\n\nscaleX = Duration : relative:4  # span\n";
        let config = MappingConfig::parse(text).unwrap();
        assert_eq!(config.tuples.len(), 2);
        assert_eq!(config.tuples[0].to_string(), "positionZ = Role : discrete");
        assert_eq!(MappingConfig::parse(&config.to_string()).unwrap(), config);

        let err = MappingConfig::parse("positionZ = Role : discrete\nscaleQ = Cost : direct")
            .unwrap_err();
        assert_eq!(err.line, 2);
        assert!(MappingConfig::parse("positionZ Role").is_err());
        assert!(MappingConfig::parse("positionZ = : direct").is_err());
    }

    #[test]
    fn buckets_and_lane_scales() {
        assert_eq!(bucket(0.0, 5), 0);
        assert_eq!(bucket(0.199, 5), 0);
        assert_eq!(bucket(0.2, 5), 1);
        assert_eq!(bucket(1.0, 5), 4);
        assert_eq!(lane_scale(0, 1), 1.0);
        assert_eq!(lane_scale(4, 5), 2.0);
        assert_eq!(lane_scale(1, 2), 2.0);
        assert_eq!(percent(3.0, 3.0, 3.0), 0.0);
        assert_eq!(bucket_labels(5.0, 45.0, 2), vec!["[5, 25)", "[25, 45]"]);
    }
}
