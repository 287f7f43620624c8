//! Owned block tree used to build models and to write them back out.
//!
//! The parser, the serializer and the random generator all go through
//! [`Flow`], so every model they produce has the same canonical node order
//! and link order.

use std::collections::BTreeMap;

use crate::model::{ArgumentValue, Block, Node, NodeKind, ProcessModel, StructureError};

pub const DEFAULT_START_ID: &str = "start";
pub const DEFAULT_END_ID: &str = "end";

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub name: String,
    pub start_id: String,
    pub end_id: String,
    pub body: Vec<FlowItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowItem {
    Task {
        id: String,
        label: String,
        arguments: BTreeMap<String, ArgumentValue>,
    },
    Parallel {
        id: String,
        join_id: String,
        label: String,
        branches: Vec<Branch>,
    },
    Xor {
        id: String,
        join_id: String,
        label: String,
        branches: Vec<Branch>,
    },
    Loop {
        id: String,
        tail_id: String,
        /// Loop condition, carried as the head's label.
        label: String,
        body: Vec<FlowItem>,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Branch {
    /// Xor guard; stored on the first node of the branch.
    pub condition: Option<String>,
    pub items: Vec<FlowItem>,
}

impl Branch {
    pub fn new(items: Vec<FlowItem>) -> Self {
        Branch {
            condition: None,
            items,
        }
    }
}

impl Flow {
    pub fn new(name: impl Into<String>, body: Vec<FlowItem>) -> Self {
        Flow {
            name: name.into(),
            start_id: DEFAULT_START_ID.to_owned(),
            end_id: DEFAULT_END_ID.to_owned(),
            body,
        }
    }

    /// Materializes the node list in pre-order: start, body, end; a block's
    /// split precedes its branches and its join follows them.
    pub fn build(&self) -> ProcessModel {
        let mut b = Emitter { nodes: Vec::new() };
        let start = b.push(Node::new(&self.start_id, NodeKind::Start));
        let last = b.sequence(&self.body, start);
        let end = b.push(Node::new(&self.end_id, NodeKind::End));
        b.link(last, end);
        ProcessModel::new(&self.name, b.nodes)
    }

    /// Inverse of [`Flow::build`] for block-structured models.
    pub fn from_model(model: &ProcessModel) -> Result<Flow, StructureError> {
        let tree = model.block_tree()?;
        let nodes = model.nodes();
        let start = model.start().expect("block tree implies a start node");
        let end = nodes
            .iter()
            .find(|n| n.kind == NodeKind::End)
            .expect("block tree implies an end node");
        Ok(Flow {
            name: model.name().to_owned(),
            start_id: start.id.clone(),
            end_id: end.id.clone(),
            body: items_from_blocks(nodes, &tree),
        })
    }
}

fn items_from_blocks(nodes: &[Node], blocks: &[Block]) -> Vec<FlowItem> {
    blocks.iter().map(|b| item_from_block(nodes, b)).collect()
}

fn branches_from(nodes: &[Node], branches: &[Vec<Block>]) -> Vec<Branch> {
    branches
        .iter()
        .map(|items| Branch {
            condition: items
                .first()
                .and_then(|b| nodes[b.entry()].condition.clone()),
            items: items_from_blocks(nodes, items),
        })
        .collect()
}

fn item_from_block(nodes: &[Node], block: &Block) -> FlowItem {
    match block {
        Block::Task(i) => FlowItem::Task {
            id: nodes[*i].id.clone(),
            label: nodes[*i].label.clone(),
            arguments: nodes[*i].arguments.clone(),
        },
        Block::Parallel {
            split,
            join,
            branches,
        } => FlowItem::Parallel {
            id: nodes[*split].id.clone(),
            join_id: nodes[*join].id.clone(),
            label: nodes[*split].label.clone(),
            branches: branches_from(nodes, branches),
        },
        Block::Xor {
            split,
            join,
            branches,
        } => FlowItem::Xor {
            id: nodes[*split].id.clone(),
            join_id: nodes[*join].id.clone(),
            label: nodes[*split].label.clone(),
            branches: branches_from(nodes, branches),
        },
        Block::Loop { head, tail, body } => FlowItem::Loop {
            id: nodes[*head].id.clone(),
            tail_id: nodes[*tail].id.clone(),
            label: nodes[*head].label.clone(),
            body: items_from_blocks(nodes, body),
        },
    }
}

struct Emitter {
    nodes: Vec<Node>,
}

impl Emitter {
    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn link(&mut self, from: usize, to: usize) {
        let to_id = self.nodes[to].id.clone();
        let from_id = self.nodes[from].id.clone();
        self.nodes[from].nodes_after.push(to_id);
        self.nodes[to].nodes_before.push(from_id);
    }

    fn sequence(&mut self, items: &[FlowItem], mut prev: usize) -> usize {
        for item in items {
            prev = self.item(item, prev);
        }
        prev
    }

    fn item(&mut self, item: &FlowItem, prev: usize) -> usize {
        match item {
            FlowItem::Task {
                id,
                label,
                arguments,
            } => {
                let mut n = Node::new(id, NodeKind::Task);
                n.label = label.clone();
                n.arguments = arguments.clone();
                let i = self.push(n);
                self.link(prev, i);
                i
            }
            FlowItem::Parallel {
                id,
                join_id,
                label,
                branches,
            } => self.branching(NodeKind::ParallelSplit, id, join_id, label, branches, prev),
            FlowItem::Xor {
                id,
                join_id,
                label,
                branches,
            } => self.branching(NodeKind::XorSplit, id, join_id, label, branches, prev),
            FlowItem::Loop {
                id,
                tail_id,
                label,
                body,
            } => {
                let mut head = Node::new(id, NodeKind::LoopHead);
                head.label = label.clone();
                let head = self.push(head);
                self.link(prev, head);
                let exit = self.sequence(body, head);
                let tail = self.push(Node::new(tail_id, NodeKind::LoopTail));
                self.link(exit, tail);
                tail
            }
        }
    }

    fn branching(
        &mut self,
        kind: NodeKind,
        id: &str,
        join_id: &str,
        label: &str,
        branches: &[Branch],
        prev: usize,
    ) -> usize {
        let mut split = Node::new(id, kind);
        split.label = label.to_owned();
        let split = self.push(split);
        self.link(prev, split);

        let mut exits = Vec::with_capacity(branches.len());
        let mut entries = Vec::with_capacity(branches.len());
        for branch in branches {
            if branch.items.is_empty() {
                exits.push(None);
                entries.push(None);
                continue;
            }
            let first = self.nodes.len();
            let exit = self.sequence(&branch.items, split);
            if branch.condition.is_some() {
                self.nodes[first].condition = branch.condition.clone();
            }
            exits.push(Some(exit));
            entries.push(Some(first));
        }

        let join = self.push(Node::new(join_id, kind.closing().expect("split kind")));
        for exit in &exits {
            self.link(exit.unwrap_or(split), join);
        }
        // restore branch order on the split; empty branches were linked last
        let after = entries
            .iter()
            .map(|e| self.nodes[e.unwrap_or(join)].id.clone())
            .collect();
        self.nodes[split].nodes_after = after;
        join
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: &str) -> FlowItem {
        FlowItem::Task {
            id: id.into(),
            label: id.to_uppercase(),
            arguments: BTreeMap::new(),
        }
    }

    #[test]
    fn empty_flow_is_start_to_end() {
        let m = Flow::new("empty", vec![]).build();
        assert_eq!(m.nodes().len(), 2);
        assert_eq!(m.nodes()[0].nodes_after, vec!["end".to_string()]);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn empty_branch_keeps_document_order() {
        let flow = Flow::new(
            "p",
            vec![FlowItem::Parallel {
                id: "p".into(),
                join_id: "pj".into(),
                label: String::new(),
                branches: vec![Branch::default(), Branch::new(vec![task("a")])],
            }],
        );
        let m = flow.build();
        assert_eq!(m.node("p").unwrap().nodes_after, vec!["pj", "a"]);
        assert_eq!(m.node("pj").unwrap().nodes_before, vec!["p", "a"]);
        assert!(m.validate().is_empty());
        assert_eq!(Flow::from_model(&m).unwrap(), flow);
    }

    #[test]
    fn loop_with_condition_round_trips() {
        let flow = Flow::new(
            "l",
            vec![FlowItem::Loop {
                id: "l".into(),
                tail_id: "l_end".into(),
                label: "retry < 3".into(),
                body: vec![task("a"), task("b")],
            }],
        );
        let m = flow.build();
        assert!(m.validate().is_empty());
        assert_eq!(Flow::from_model(&m).unwrap(), flow);
    }
}
