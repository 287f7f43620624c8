//! Reader and writer for the `pm3d-1` XML process format.
//!
//! The vocabulary follows CPEE process descriptions: `description` holds a
//! sequence of `call`, `parallel`/`parallel_branch`, `choose`/`alternative`/
//! `otherwise` and `loop` elements. Calls carry `argument` children. Anything
//! outside that set is rejected. See `docs/format.md` for the full grammar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::LazyLock;

use regex::Regex;
use roxmltree::{Document, Node as XmlNode};

use crate::flow::{Branch, Flow, FlowItem, DEFAULT_END_ID, DEFAULT_START_ID};
use crate::model::{ArgumentValue, ProcessModel, StructureError, Violation};

pub const FORMAT_VERSION: &str = "pm3d-1";

static NUMERIC: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([+-]?[0-9]+(?:\.[0-9]+)?)(?:\s+(\S+))?$").unwrap());

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseDiagnostics {
    pub source_name: String,
    pub warnings: Vec<(u32, String)>,
}

impl ParseDiagnostics {
    fn warn(&mut self, line: u32, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{}:{line}: {message}", self.source_name);
        self.warnings.push((line, message));
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: malformed XML: {message}")]
    MalformedXml { line: u32, message: String },
    #[error("line {line}: unbalanced block: {message}")]
    UnbalancedBlock { line: u32, message: String },
    #[error("line {line}: unknown element <{name}>")]
    UnknownElement { line: u32, name: String },
    #[error("line {line}: <{element}> is missing attribute `{attribute}`")]
    MissingAttribute {
        line: u32,
        element: String,
        attribute: String,
    },
    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),
}

impl ParseError {
    pub fn line(&self) -> Option<u32> {
        match self {
            ParseError::MalformedXml { line, .. }
            | ParseError::UnbalancedBlock { line, .. }
            | ParseError::UnknownElement { line, .. }
            | ParseError::MissingAttribute { line, .. } => Some(*line),
            ParseError::InvalidModel(_) => None,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Classifies a raw argument value: `20`, `-3.5` and `20 min` are numeric,
/// everything else is text.
pub fn parse_value(raw: &str) -> ArgumentValue {
    if let Some(caps) = NUMERIC.captures(raw.trim()) {
        if let Ok(value) = caps[1].parse::<f64>() {
            if value.is_finite() {
                return ArgumentValue::Numeric {
                    value,
                    unit: caps.get(2).map(|u| u.as_str().to_owned()),
                };
            }
        }
    }
    ArgumentValue::text(raw)
}

/// Parses a `pm3d-1` document.
pub fn parse(xml_text: &str) -> Result<(ProcessModel, ParseDiagnostics), ParseError> {
    parse_named(xml_text, "<input>")
}

/// Like [`parse`], recording `source_name` in the diagnostics.
pub fn parse_named(
    xml_text: &str,
    source_name: &str,
) -> Result<(ProcessModel, ParseDiagnostics), ParseError> {
    let doc = Document::parse(xml_text).map_err(|e| ParseError::MalformedXml {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let mut reader = Reader {
        diag: ParseDiagnostics {
            source_name: source_name.to_owned(),
            warnings: Vec::new(),
        },
        counter: 0,
        newlines: xml_text.match_indices('\n').map(|(i, _)| i).collect(),
    };
    let flow = reader.description(doc.root_element())?;
    let model = flow.build();
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(ParseError::InvalidModel(violations));
    }
    Ok((model, reader.diag))
}

struct Reader {
    diag: ParseDiagnostics,
    counter: usize,
    /// Byte offsets of every newline, for line lookups.
    newlines: Vec<usize>,
}

impl Reader {
    fn line(&self, node: XmlNode) -> u32 {
        let offset = node.range().start;
        self.newlines.partition_point(|&nl| nl < offset) as u32 + 1
    }

    fn check_attributes(&mut self, node: XmlNode, known: &[&str]) {
        for attr in node.attributes() {
            if attr.namespace().is_none() && !known.contains(&attr.name()) {
                let line = self.line(node);
                self.diag.warn(
                    line,
                    format!(
                        "ignoring attribute `{}` on <{}>",
                        attr.name(),
                        node.tag_name().name()
                    ),
                );
            }
        }
    }

    /// Element children; stray text is warned about, comments are skipped.
    fn children<'a, 'input>(&mut self, node: XmlNode<'a, 'input>) -> Vec<XmlNode<'a, 'input>> {
        let mut out = Vec::new();
        for child in node.children() {
            if child.is_element() {
                out.push(child);
            } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
                let line = self.line(child);
                self.diag.warn(
                    line,
                    format!("ignoring text inside <{}>", node.tag_name().name()),
                );
            }
        }
        out
    }

    fn fresh_id(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn description(&mut self, root: XmlNode<'_, '_>) -> Result<Flow, ParseError> {
        if root.tag_name().name() != "description" {
            return Err(ParseError::UnknownElement {
                line: self.line(root),
                name: root.tag_name().name().to_owned(),
            });
        }
        self.check_attributes(root, &["name", "format", "start", "end"]);
        match root.attribute("format") {
            Some(FORMAT_VERSION) | None => {}
            Some(other) => {
                let line = self.line(root);
                self.diag.warn(
                    line,
                    format!("format `{other}` is not {FORMAT_VERSION}; reading anyway"),
                );
            }
        }
        let body = self.sequence(root)?;
        Ok(Flow {
            name: root.attribute("name").unwrap_or_default().to_owned(),
            start_id: root
                .attribute("start")
                .unwrap_or(DEFAULT_START_ID)
                .to_owned(),
            end_id: root.attribute("end").unwrap_or(DEFAULT_END_ID).to_owned(),
            body,
        })
    }

    fn sequence(&mut self, parent: XmlNode<'_, '_>) -> Result<Vec<FlowItem>, ParseError> {
        let mut items = Vec::new();
        for child in self.children(parent) {
            items.push(self.item(child)?);
        }
        Ok(items)
    }

    fn item(&mut self, node: XmlNode<'_, '_>) -> Result<FlowItem, ParseError> {
        let line = self.line(node);
        match node.tag_name().name() {
            "call" => self.call(node),
            "parallel" => {
                self.check_attributes(node, &["id", "join", "label", "wait", "cancel"]);
                let id = self.id_of(node, "parallel");
                let branches = self.branches(node, &["parallel_branch"])?;
                Ok(FlowItem::Parallel {
                    join_id: join_id(node, &id),
                    label: node.attribute("label").unwrap_or_default().to_owned(),
                    id,
                    branches,
                })
            }
            "choose" => {
                self.check_attributes(node, &["id", "join", "label", "mode"]);
                let id = self.id_of(node, "choose");
                let branches = self.branches(node, &["alternative", "otherwise"])?;
                Ok(FlowItem::Xor {
                    join_id: join_id(node, &id),
                    label: node.attribute("label").unwrap_or_default().to_owned(),
                    id,
                    branches,
                })
            }
            "loop" => {
                self.check_attributes(node, &["id", "tail", "condition", "mode"]);
                let id = self.id_of(node, "loop");
                let body = self.sequence(node)?;
                Ok(FlowItem::Loop {
                    tail_id: node
                        .attribute("tail")
                        .map_or_else(|| format!("{id}_end"), str::to_owned),
                    label: node.attribute("condition").unwrap_or_default().to_owned(),
                    id,
                    body,
                })
            }
            "parallel_branch" | "alternative" | "otherwise" => Err(ParseError::UnbalancedBlock {
                line,
                message: format!("<{}> outside its enclosing block", node.tag_name().name()),
            }),
            other => Err(ParseError::UnknownElement {
                line,
                name: other.to_owned(),
            }),
        }
    }

    fn id_of(&mut self, node: XmlNode, prefix: &str) -> String {
        match node.attribute("id") {
            Some(id) => id.to_owned(),
            None => {
                let id = self.fresh_id(prefix);
                let line = self.line(node);
                self.diag
                    .warn(line, format!("<{prefix}> without id; assigned `{id}`"));
                id
            }
        }
    }

    fn call(&mut self, node: XmlNode<'_, '_>) -> Result<FlowItem, ParseError> {
        self.check_attributes(node, &["id", "label", "endpoint"]);
        let id = self.id_of(node, "call");
        let mut arguments = BTreeMap::new();
        for child in self.children(node) {
            let line = self.line(child);
            if child.tag_name().name() != "argument" {
                return Err(ParseError::UnknownElement {
                    line,
                    name: child.tag_name().name().to_owned(),
                });
            }
            self.check_attributes(child, &["name", "value"]);
            let name = child
                .attribute("name")
                .ok_or_else(|| ParseError::MissingAttribute {
                    line,
                    element: "argument".into(),
                    attribute: "name".into(),
                })?;
            let raw = match child.attribute("value") {
                Some(v) => v.to_owned(),
                None => child.text().unwrap_or_default().to_owned(),
            };
            let value = parse_value(&raw);
            if arguments.insert(name.to_owned(), value).is_some() {
                self.diag.warn(
                    line,
                    format!("argument `{name}` repeated on `{id}`; keeping the last value"),
                );
            }
        }
        Ok(FlowItem::Task {
            label: node.attribute("label").unwrap_or_default().to_owned(),
            id,
            arguments,
        })
    }

    fn branches(
        &mut self,
        node: XmlNode<'_, '_>,
        allowed: &[&str],
    ) -> Result<Vec<Branch>, ParseError> {
        let block = node.tag_name().name();
        let mut branches = Vec::new();
        let mut empty = 0;
        for child in self.children(node) {
            let line = self.line(child);
            let name = child.tag_name().name();
            if !allowed.contains(&name) {
                return Err(ParseError::UnbalancedBlock {
                    line,
                    message: format!("<{name}> directly inside <{block}>; wrap it in a branch"),
                });
            }
            self.check_attributes(child, &["condition"]);
            let items = self.sequence(child)?;
            let condition = child.attribute("condition").map(str::to_owned);
            if items.is_empty() {
                empty += 1;
                if condition.is_some() {
                    self.diag.warn(
                        line,
                        "condition on an empty branch has no node to attach to",
                    );
                }
            }
            branches.push(Branch { condition, items });
        }
        let line = self.line(node);
        if branches.is_empty() {
            return Err(ParseError::UnbalancedBlock {
                line,
                message: format!("<{block}> has no branches"),
            });
        }
        if empty > 1 {
            return Err(ParseError::UnbalancedBlock {
                line,
                message: format!("<{block}> has {empty} empty branches; at most one is allowed"),
            });
        }
        Ok(branches)
    }
}

fn join_id(node: XmlNode, id: &str) -> String {
    node.attribute("join")
        .map_or_else(|| format!("{id}_join"), str::to_owned)
}

/// Writes a model as a `pm3d-1` document. The output is canonical: the same
/// model always yields the same bytes.
pub fn serialize(model: &ProcessModel) -> Result<String, StructureError> {
    let flow = Flow::from_model(model)?;
    Ok(serialize_flow(&flow))
}

pub fn serialize_flow(flow: &Flow) -> String {
    let mut out = String::with_capacity(256 + flow.body.len() * 128);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = write!(
        out,
        "<description format=\"{FORMAT_VERSION}\" name=\"{}\"",
        escape(&flow.name)
    );
    if flow.start_id != DEFAULT_START_ID {
        let _ = write!(out, " start=\"{}\"", escape(&flow.start_id));
    }
    if flow.end_id != DEFAULT_END_ID {
        let _ = write!(out, " end=\"{}\"", escape(&flow.end_id));
    }
    if flow.body.is_empty() {
        out.push_str("/>\n");
        return out;
    }
    out.push_str(">\n");
    write_items(&mut out, &flow.body, 1);
    out.push_str("</description>\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_items(out: &mut String, items: &[FlowItem], depth: usize) {
    for item in items {
        indent(out, depth);
        match item {
            FlowItem::Task {
                id,
                label,
                arguments,
            } => {
                let _ = write!(
                    out,
                    "<call id=\"{}\" label=\"{}\"",
                    escape(id),
                    escape(label)
                );
                if arguments.is_empty() {
                    out.push_str("/>\n");
                    continue;
                }
                out.push_str(">\n");
                for (name, value) in arguments {
                    indent(out, depth + 1);
                    let _ = writeln!(
                        out,
                        "<argument name=\"{}\" value=\"{}\"/>",
                        escape(name),
                        escape(&value.to_string())
                    );
                }
                indent(out, depth);
                out.push_str("</call>\n");
            }
            FlowItem::Parallel {
                id,
                join_id,
                label,
                branches,
            } => write_block(
                out,
                "parallel",
                "parallel_branch",
                id,
                join_id,
                label,
                branches,
                depth,
            ),
            FlowItem::Xor {
                id,
                join_id,
                label,
                branches,
            } => write_block(
                out,
                "choose",
                "alternative",
                id,
                join_id,
                label,
                branches,
                depth,
            ),
            FlowItem::Loop {
                id,
                tail_id,
                label,
                body,
            } => {
                let _ = write!(
                    out,
                    "<loop id=\"{}\" tail=\"{}\" condition=\"{}\"",
                    escape(id),
                    escape(tail_id),
                    escape(label)
                );
                if body.is_empty() {
                    out.push_str("/>\n");
                    continue;
                }
                out.push_str(">\n");
                write_items(out, body, depth + 1);
                indent(out, depth);
                out.push_str("</loop>\n");
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn write_block(
    out: &mut String,
    tag: &str,
    branch_tag: &str,
    id: &str,
    join_id: &str,
    label: &str,
    branches: &[Branch],
    depth: usize,
) {
    let _ = write!(
        out,
        "<{tag} id=\"{}\" join=\"{}\"",
        escape(id),
        escape(join_id)
    );
    if !label.is_empty() {
        let _ = write!(out, " label=\"{}\"", escape(label));
    }
    out.push_str(">\n");
    for branch in branches {
        indent(out, depth + 1);
        let _ = write!(out, "<{branch_tag}");
        if let Some(c) = &branch.condition {
            let _ = write!(out, " condition=\"{}\"", escape(c));
        }
        if branch.items.is_empty() {
            out.push_str("/>\n");
            continue;
        }
        out.push_str(">\n");
        write_items(out, &branch.items, depth + 2);
        indent(out, depth + 1);
        let _ = writeln!(out, "</{branch_tag}>");
    }
    indent(out, depth);
    let _ = writeln!(out, "</{tag}>");
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeKind;

    #[test]
    fn numeric_detection() {
        assert_eq!(parse_value("40"), ArgumentValue::numeric(40.0));
        assert_eq!(parse_value(" -2.5 "), ArgumentValue::numeric(-2.5));
        assert_eq!(parse_value("20 min"), ArgumentValue::with_unit(20.0, "min"));
        assert_eq!(parse_value("90 €"), ArgumentValue::with_unit(90.0, "€"));
        for text in ["20min", "1e3", ".5", "5.", "20 min extra", "Laboratory", ""] {
            assert_eq!(parse_value(text), ArgumentValue::text(text), "{text:?}");
        }
        let huge = "9".repeat(400);
        assert_eq!(parse_value(&huge), ArgumentValue::text(huge.clone()));
    }

    #[test]
    fn empty_description() {
        let (m, diag) = parse("<description/>").unwrap();
        let kinds: Vec<_> = m.nodes().iter().map(|n| n.kind).collect();
        assert_eq!(kinds, [NodeKind::Start, NodeKind::End]);
        assert_eq!(m.task_count(), 0);
        assert!(diag.warnings.is_empty());
    }

    #[test]
    fn malformed_xml() {
        let err = parse("<description><call id='a'></description>").unwrap_err();
        assert!(
            matches!(err, ParseError::MalformedXml { line: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn unknown_structural_element() {
        let err = parse("<description>\n  <script/>\n</description>").unwrap_err();
        assert!(
            matches!(err, ParseError::UnknownElement { line: 2, ref name } if name == "script"),
            "{err}"
        );
        let err = parse("<process/>").unwrap_err();
        assert!(matches!(err, ParseError::UnknownElement { .. }));
    }

    #[test]
    fn unbalanced_blocks() {
        for xml in [
            "<description><parallel id='p'/></description>",
            "<description><parallel id='p'><call id='a'/></parallel></description>",
            "<description><parallel_branch/></description>",
            "<description><choose id='x'><alternative/><otherwise/></choose></description>",
            "<description><choose id='x'><parallel_branch><call id='a'/></parallel_branch></choose></description>",
        ] {
            let err = parse(xml).unwrap_err();
            assert!(matches!(err, ParseError::UnbalancedBlock { .. }), "{xml}: {err}");
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = parse("<description><call id='a'/><call id='a'/></description>").unwrap_err();
        match err {
            ParseError::InvalidModel(v) => assert!(v.contains(&Violation::DuplicateId("a".into()))),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn missing_argument_name() {
        let err = parse("<description><call id='a'><argument value='1'/></call></description>")
            .unwrap_err();
        assert!(matches!(err, ParseError::MissingAttribute { .. }));
    }

    #[test]
    fn warnings_for_ignored_content() {
        let xml = r#"<description name="w">
  <call id="a" color="red">
    <argument name="Cost" value="1"/>
    <argument name="Cost" value="2"/>
  </call>
  <choose id="x"><alternative condition="never"/><alternative><call id="b"/></alternative></choose>
  <loop><call id="c"/></loop>
</description>"#;
        let (m, diag) = parse(xml).unwrap();
        assert_eq!(
            m.node("a").unwrap().arguments["Cost"],
            ArgumentValue::numeric(2.0)
        );
        let lines: Vec<u32> = diag.warnings.iter().map(|w| w.0).collect();
        assert_eq!(lines, vec![2, 4, 6, 7]);
        assert!(m.node("loop1").is_some());
    }

    #[test]
    fn argument_value_from_text_content() {
        let (m, _) = parse(
            "<description><call id='a'><argument name='Role'>Nurse</argument></call></description>",
        )
        .unwrap();
        assert_eq!(
            m.node("a").unwrap().arguments["Role"],
            ArgumentValue::text("Nurse")
        );
    }

    #[test]
    fn escaping_round_trips() {
        let xml = "<description name='a &amp; b'><call id='x' label='say &quot;hi&quot;&#10;&lt;now&gt;'/></description>";
        let (m, _) = parse(xml).unwrap();
        let out = serialize(&m).unwrap();
        let (again, _) = parse(&out).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.node("x").unwrap().label, "say \"hi\"\n<now>");
    }

    #[test]
    fn custom_start_end_ids_round_trip() {
        let (m, _) =
            parse("<description start='s0' end='e0'><call id='a'/></description>").unwrap();
        assert_eq!(m.nodes()[0].id, "s0");
        let out = serialize(&m).unwrap();
        assert!(out.contains("start=\"s0\""));
        assert_eq!(parse(&out).unwrap().0, m);
    }
}
