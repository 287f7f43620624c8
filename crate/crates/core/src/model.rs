//! Domain types for parsed process graphs.
//!
//! A [`ProcessModel`] is an ordered list of [`Node`]s linked through their
//! `nodes_before` / `nodes_after` sets. Control flow is restricted to properly
//! nested sequence, parallel, xor and loop blocks; [`ProcessModel::block_tree`]
//! recovers that nesting from the links and is what layout and serialization
//! walk. Models are immutable once built.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Control-flow role of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Start,
    End,
    Task,
    ParallelSplit,
    ParallelJoin,
    XorSplit,
    XorJoin,
    LoopHead,
    LoopTail,
}

impl NodeKind {
    /// Join kind closing a block opened by `self`, if `self` opens one.
    pub fn closing(self) -> Option<NodeKind> {
        match self {
            NodeKind::ParallelSplit => Some(NodeKind::ParallelJoin),
            NodeKind::XorSplit => Some(NodeKind::XorJoin),
            NodeKind::LoopHead => Some(NodeKind::LoopTail),
            _ => None,
        }
    }

    pub fn is_closing(self) -> bool {
        matches!(
            self,
            NodeKind::ParallelJoin | NodeKind::XorJoin | NodeKind::LoopTail | NodeKind::End
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Start => "start",
            NodeKind::End => "end",
            NodeKind::Task => "task",
            NodeKind::ParallelSplit => "parallel_split",
            NodeKind::ParallelJoin => "parallel_join",
            NodeKind::XorSplit => "xor_split",
            NodeKind::XorJoin => "xor_join",
            NodeKind::LoopHead => "loop_head",
            NodeKind::LoopTail => "loop_tail",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single argument value. Units are opaque labels and never converted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArgumentValue {
    Numeric { value: f64, unit: Option<String> },
    Text { value: String },
}

impl ArgumentValue {
    pub fn numeric(value: f64) -> Self {
        ArgumentValue::Numeric { value, unit: None }
    }

    pub fn with_unit(value: f64, unit: impl Into<String>) -> Self {
        ArgumentValue::Numeric {
            value,
            unit: Some(unit.into()),
        }
    }

    pub fn text(value: impl Into<String>) -> Self {
        ArgumentValue::Text {
            value: value.into(),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            ArgumentValue::Numeric { value, .. } => Some(*value),
            ArgumentValue::Text { .. } => None,
        }
    }

    pub fn kind(&self) -> DataKind {
        match self {
            ArgumentValue::Numeric { .. } => DataKind::Numeric,
            ArgumentValue::Text { .. } => DataKind::Text,
        }
    }
}

/// Display text, e.g. `20 min` or `Laboratory`. Numbers use the shortest
/// representation that parses back to the same value.
impl fmt::Display for ArgumentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgumentValue::Numeric { value, unit: None } => write!(f, "{value}"),
            ArgumentValue::Numeric {
                value,
                unit: Some(unit),
            } => write!(f, "{value} {unit}"),
            ArgumentValue::Text { value } => f.write_str(value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Numeric,
    Text,
}

/// Result of [`ProcessModel::attribute_kind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    Text,
    Mixed,
    Absent,
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttributeKind::Numeric => "numeric",
            AttributeKind::Text => "text",
            AttributeKind::Mixed => "mixed",
            AttributeKind::Absent => "absent",
        })
    }
}

/// One control-flow element.
///
/// `nodes_before` / `nodes_after` are sets kept in a stable order: for a
/// split, `nodes_after` lists the branches in document order (an empty branch
/// appears as the join itself).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    /// Guard of the xor alternative this node opens, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    pub nodes_before: Vec<String>,
    pub nodes_after: Vec<String>,
    pub arguments: BTreeMap<String, ArgumentValue>,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: NodeKind) -> Self {
        Node {
            id: id.into(),
            kind,
            label: String::new(),
            condition: None,
            nodes_before: Vec::new(),
            nodes_after: Vec::new(),
            arguments: BTreeMap::new(),
        }
    }

    pub fn argument(&self, name: &str) -> Option<&ArgumentValue> {
        self.arguments.get(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeInfo {
    pub kind: AttributeKind,
    pub carriers: BTreeSet<String>,
}

/// Parsed control-flow graph plus an index of which nodes carry which
/// attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessModel {
    name: String,
    nodes: Vec<Node>,
    attribute_index: BTreeMap<String, AttributeInfo>,
    positions: HashMap<String, usize>,
}

impl ProcessModel {
    /// Builds a model and derives its attribute index. No validation happens
    /// here; see [`ProcessModel::validate`].
    pub fn new(name: impl Into<String>, nodes: Vec<Node>) -> Self {
        let attribute_index = index_attributes(&nodes);
        Self::from_parts(name, nodes, attribute_index)
    }

    /// Builds a model with a caller-supplied attribute index, which may be
    /// inconsistent with the nodes.
    pub fn from_parts(
        name: impl Into<String>,
        nodes: Vec<Node>,
        attribute_index: BTreeMap<String, AttributeInfo>,
    ) -> Self {
        let mut positions = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            positions.entry(n.id.clone()).or_insert(i);
        }
        ProcessModel {
            name: name.into(),
            nodes,
            attribute_index,
            positions,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn attribute_index(&self) -> &BTreeMap<String, AttributeInfo> {
        &self.attribute_index
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.positions.get(id).map(|&i| &self.nodes[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn start(&self) -> Option<&Node> {
        self.nodes.iter().find(|n| n.kind == NodeKind::Start)
    }

    pub fn task_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Task)
            .count()
    }

    pub fn attribute_kind(&self, name: &str) -> AttributeKind {
        self.attribute_index
            .get(name)
            .map_or(AttributeKind::Absent, |info| info.kind)
    }

    /// Recovers the block nesting from the node links.
    pub fn block_tree(&self) -> Result<Vec<Block>, StructureError> {
        TreeBuilder::new(self).root()
    }

    /// Checks every model invariant and reports each broken one. An empty
    /// list means the model is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut seen = HashSet::new();
        let mut reported = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) && reported.insert(n.id.as_str()) {
                out.push(Violation::DuplicateId(n.id.clone()));
            }
        }

        let starts: Vec<_> = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Start)
            .collect();
        let ends: Vec<_> = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::End)
            .collect();
        if starts.len() != 1 {
            out.push(Violation::StartCount(starts.len()));
        }
        if ends.len() != 1 {
            out.push(Violation::EndCount(ends.len()));
        }
        for s in &starts {
            if !s.nodes_before.is_empty() {
                out.push(Violation::StartHasPredecessors(s.id.clone()));
            }
        }
        for e in &ends {
            if !e.nodes_after.is_empty() {
                out.push(Violation::EndHasSuccessors(e.id.clone()));
            }
        }

        let mut links_ok = true;
        for n in &self.nodes {
            for (list, forward) in [(&n.nodes_after, true), (&n.nodes_before, false)] {
                let mut local = HashSet::new();
                for other in list {
                    if !local.insert(other.as_str()) {
                        out.push(Violation::DuplicateLink(n.id.clone(), other.clone()));
                        links_ok = false;
                        continue;
                    }
                    let Some(peer) = self.node(other) else {
                        out.push(Violation::UnknownReference(n.id.clone(), other.clone()));
                        links_ok = false;
                        continue;
                    };
                    let back = if forward {
                        &peer.nodes_before
                    } else {
                        &peer.nodes_after
                    };
                    if !back.iter().any(|b| b == &n.id) {
                        let (a, b) = if forward {
                            (n.id.clone(), other.clone())
                        } else {
                            (other.clone(), n.id.clone())
                        };
                        out.push(Violation::AsymmetricLink(a, b));
                        links_ok = false;
                    }
                }
            }
            for (name, value) in &n.arguments {
                if let ArgumentValue::Numeric { value, .. } = value {
                    if !value.is_finite() {
                        out.push(Violation::NonFiniteValue(n.id.clone(), name.clone()));
                    }
                }
            }
        }

        if out.is_empty() && links_ok {
            if let Err(e) = self.block_tree() {
                out.push(Violation::NotBlockStructured(e.node, e.reason));
            }
        }

        let recomputed = index_attributes(&self.nodes);
        let names: BTreeSet<_> = recomputed
            .keys()
            .chain(self.attribute_index.keys())
            .collect();
        for name in names {
            if recomputed.get(name) != self.attribute_index.get(name) {
                out.push(Violation::IndexMismatch(name.clone()));
            }
        }
        out
    }
}

/// Derives the attribute index from node arguments.
pub fn index_attributes(nodes: &[Node]) -> BTreeMap<String, AttributeInfo> {
    let mut index: BTreeMap<String, AttributeInfo> = BTreeMap::new();
    for n in nodes {
        for (name, value) in &n.arguments {
            let kind = match value.kind() {
                DataKind::Numeric => AttributeKind::Numeric,
                DataKind::Text => AttributeKind::Text,
            };
            let entry = index.entry(name.clone()).or_insert_with(|| AttributeInfo {
                kind,
                carriers: BTreeSet::new(),
            });
            if entry.kind != kind {
                entry.kind = AttributeKind::Mixed;
            }
            entry.carriers.insert(n.id.clone());
        }
    }
    index
}

/// A broken model invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", content = "nodes", rename_all = "snake_case")]
pub enum Violation {
    DuplicateId(String),
    AsymmetricLink(String, String),
    DuplicateLink(String, String),
    UnknownReference(String, String),
    StartCount(usize),
    EndCount(usize),
    StartHasPredecessors(String),
    EndHasSuccessors(String),
    NonFiniteValue(String, String),
    NotBlockStructured(String, String),
    IndexMismatch(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate node id `{id}`"),
            Violation::AsymmetricLink(a, b) => {
                write!(f, "link `{a}` -> `{b}` is not mirrored on both nodes")
            }
            Violation::DuplicateLink(a, b) => write!(f, "node `{a}` lists `{b}` twice"),
            Violation::UnknownReference(a, b) => write!(f, "node `{a}` references unknown `{b}`"),
            Violation::StartCount(n) => write!(f, "expected exactly one start node, found {n}"),
            Violation::EndCount(n) => write!(f, "expected exactly one end node, found {n}"),
            Violation::StartHasPredecessors(id) => write!(f, "start node `{id}` has predecessors"),
            Violation::EndHasSuccessors(id) => write!(f, "end node `{id}` has successors"),
            Violation::NonFiniteValue(id, arg) => {
                write!(f, "node `{id}` argument `{arg}` is not finite")
            }
            Violation::NotBlockStructured(id, why) => {
                write!(f, "not block-structured at `{id}`: {why}")
            }
            Violation::IndexMismatch(name) => {
                write!(
                    f,
                    "attribute index entry `{name}` disagrees with node arguments"
                )
            }
        }
    }
}

/// One element of a block-structured sequence. Indices point into
/// [`ProcessModel::nodes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Task(usize),
    Parallel {
        split: usize,
        join: usize,
        branches: Vec<Vec<Block>>,
    },
    Xor {
        split: usize,
        join: usize,
        branches: Vec<Vec<Block>>,
    },
    Loop {
        head: usize,
        tail: usize,
        body: Vec<Block>,
    },
}

impl Block {
    /// First node index of this block.
    pub fn entry(&self) -> usize {
        match self {
            Block::Task(i) => *i,
            Block::Parallel { split, .. } | Block::Xor { split, .. } => *split,
            Block::Loop { head, .. } => *head,
        }
    }

    /// Last node index of this block.
    pub fn exit(&self) -> usize {
        match self {
            Block::Task(i) => *i,
            Block::Parallel { join, .. } | Block::Xor { join, .. } => *join,
            Block::Loop { tail, .. } => *tail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at `{node}`: {reason}")]
pub struct StructureError {
    pub node: String,
    pub reason: String,
}

struct TreeBuilder<'a> {
    model: &'a ProcessModel,
    visited: Vec<bool>,
}

impl<'a> TreeBuilder<'a> {
    fn new(model: &'a ProcessModel) -> Self {
        TreeBuilder {
            model,
            visited: vec![false; model.nodes.len()],
        }
    }

    fn fail<T>(&self, idx: usize, reason: impl Into<String>) -> Result<T, StructureError> {
        Err(StructureError {
            node: self.model.nodes[idx].id.clone(),
            reason: reason.into(),
        })
    }

    fn lookup(&self, from: usize, id: &str) -> Result<usize, StructureError> {
        match self.model.position(id) {
            Some(i) => Ok(i),
            None => self.fail(from, format!("references unknown node `{id}`")),
        }
    }

    fn single_after(&self, idx: usize) -> Result<usize, StructureError> {
        match self.model.nodes[idx].nodes_after.as_slice() {
            [next] => self.lookup(idx, next),
            other => self.fail(
                idx,
                format!("expected one successor, found {}", other.len()),
            ),
        }
    }

    fn visit(&mut self, idx: usize) -> Result<(), StructureError> {
        if std::mem::replace(&mut self.visited[idx], true) {
            return self.fail(idx, "reached twice");
        }
        Ok(())
    }

    fn root(mut self) -> Result<Vec<Block>, StructureError> {
        let starts: Vec<usize> = (0..self.model.nodes.len())
            .filter(|&i| self.model.nodes[i].kind == NodeKind::Start)
            .collect();
        let start = match starts.as_slice() {
            [s] => *s,
            _ => {
                return Err(StructureError {
                    node: String::new(),
                    reason: format!("expected one start node, found {}", starts.len()),
                })
            }
        };
        self.visit(start)?;
        let first = self.single_after(start)?;
        let (items, term) = self.sequence(first)?;
        if self.model.nodes[term].kind != NodeKind::End {
            return self.fail(term, "top-level sequence closed by a join");
        }
        self.visit(term)?;
        if let Some(stray) = self.visited.iter().position(|v| !v) {
            return self.fail(stray, "unreachable from start");
        }
        Ok(items)
    }

    /// Parses a sequence starting at `idx` up to (not including) the closing
    /// node that ends it. Returns the items and that closing node.
    fn sequence(&mut self, mut idx: usize) -> Result<(Vec<Block>, usize), StructureError> {
        let mut items = Vec::new();
        loop {
            let kind = self.model.nodes[idx].kind;
            match kind {
                _ if kind.is_closing() => return Ok((items, idx)),
                NodeKind::Start => return self.fail(idx, "start node inside the flow"),
                NodeKind::Task => {
                    self.visit(idx)?;
                    items.push(Block::Task(idx));
                    idx = self.single_after(idx)?;
                }
                NodeKind::ParallelSplit | NodeKind::XorSplit => {
                    self.visit(idx)?;
                    let block = self.branching(idx)?;
                    idx = self.single_after(block.exit())?;
                    items.push(block);
                }
                NodeKind::LoopHead => {
                    self.visit(idx)?;
                    let head = idx;
                    let first = self.single_after(head)?;
                    let (body, tail) = if self.model.nodes[first].kind == NodeKind::LoopTail {
                        (Vec::new(), first)
                    } else {
                        self.sequence(first)?
                    };
                    if self.model.nodes[tail].kind != NodeKind::LoopTail {
                        return self.fail(tail, "loop body closed by a foreign node");
                    }
                    self.visit(tail)?;
                    idx = self.single_after(tail)?;
                    items.push(Block::Loop { head, tail, body });
                }
                _ => unreachable!(),
            }
        }
    }

    fn branching(&mut self, split: usize) -> Result<Block, StructureError> {
        let kind = self.model.nodes[split].kind;
        let want = kind.closing().expect("split kind");
        let succ = self.model.nodes[split].nodes_after.clone();
        if succ.is_empty() {
            return self.fail(split, "split without branches");
        }
        let mut join = None;
        let mut branches = Vec::with_capacity(succ.len());
        for id in &succ {
            let first = self.lookup(split, id)?;
            let (items, term) = if self.model.nodes[first].kind == want {
                (Vec::new(), first)
            } else {
                self.sequence(first)?
            };
            if self.model.nodes[term].kind != want {
                return self.fail(
                    term,
                    format!(
                        "branch of `{}` closed by a foreign node",
                        self.model.nodes[split].id
                    ),
                );
            }
            match join {
                None => join = Some(term),
                Some(j) if j == term => {}
                Some(_) => return self.fail(term, "branches close at different joins"),
            }
            branches.push(items);
        }
        let join = join.expect("at least one branch");
        self.visit(join)?;
        Ok(match kind {
            NodeKind::ParallelSplit => Block::Parallel {
                split,
                join,
                branches,
            },
            _ => Block::Xor {
                split,
                join,
                branches,
            },
        })
    }
}
