//! Seeded random process models.
//!
//! Generation runs in four steps, all drawing from one [`Rng`]:
//!
//! 1. Insert `control_flow_elements` blocks, each kind picked uniformly from
//!    parallel, xor and loop, at a uniformly chosen slot of the growing tree.
//!    Parallel and xor blocks get two branches, loops one body.
//! 2. Give every block one task in a uniformly chosen slot of its own
//!    branches, so no block is degenerate.
//! 3. Insert the remaining tasks at uniformly chosen slots anywhere.
//! 4. Assign arguments `attr0..attrA` to tasks in document order, each
//!    present with probability 4/5. Even-indexed attributes are integers in
//!    1..=100, odd-indexed ones words from [`WORDS`]. An attribute that
//!    landed on no task is then put on one uniformly chosen task.
//!
//! The PRNG recurrence is documented in `docs/generator.md` so other
//! implementations can reproduce models from a seed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::flow::{Branch, Flow, FlowItem};
use crate::model::{ArgumentValue, ProcessModel};

/// Word pool for text attributes.
pub const WORDS: [&str; 4] = ["north", "south", "east", "west"];
/// Presence probability of each attribute on each task, as a fraction.
pub const PRESENCE: (u64, u64) = (4, 5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub nodes: usize,
    #[serde(alias = "cf")]
    pub control_flow_elements: usize,
    #[serde(alias = "args")]
    pub arguments: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid generator spec: {0}")]
pub struct InvalidSpec(pub String);

impl GenSpec {
    pub fn new(nodes: usize, control_flow_elements: usize, arguments: usize, seed: u64) -> Self {
        GenSpec {
            nodes,
            control_flow_elements,
            arguments,
            seed,
        }
    }

    pub fn check(&self) -> Result<(), InvalidSpec> {
        if self.nodes == 0 {
            return Err(InvalidSpec("nodes must be positive".into()));
        }
        if self.control_flow_elements > self.nodes {
            return Err(InvalidSpec(format!(
                "{} control-flow elements need at least as many nodes, got {}",
                self.control_flow_elements, self.nodes
            )));
        }
        Ok(())
    }
}

/// xorshift64* seeded through SplitMix64.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        // xorshift has a fixed point at zero
        Rng {
            state: if z == 0 { 0x9E37_79B9_7F4A_7C15 } else { z },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform integer in `0..n` by multiply-high. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Parallel,
    Xor,
    Loop,
}

#[derive(Debug, Clone, Copy)]
enum Item {
    Task,
    Block(usize),
}

struct Tree {
    /// Sequences; index 0 is the process body.
    containers: Vec<Vec<Item>>,
    blocks: Vec<(Kind, Vec<usize>)>,
}

impl Tree {
    fn slot_count(&self, containers: &[usize]) -> u64 {
        containers
            .iter()
            .map(|&c| self.containers[c].len() as u64 + 1)
            .sum()
    }

    /// Inserts at slot `r` counted across `containers` in order.
    fn insert(&mut self, containers: &[usize], mut r: u64, item: Item) {
        for &c in containers {
            let slots = self.containers[c].len() as u64 + 1;
            if r < slots {
                self.containers[c].insert(r as usize, item);
                return;
            }
            r -= slots;
        }
        unreachable!("slot index out of range");
    }

    fn insert_uniform(&mut self, rng: &mut Rng, containers: &[usize], item: Item) {
        let r = rng.below(self.slot_count(containers));
        self.insert(containers, r, item);
    }
}

/// Builds a random block-structured flow; see the module docs.
pub fn generate_flow(spec: &GenSpec) -> Result<Flow, InvalidSpec> {
    spec.check()?;
    let mut rng = Rng::new(spec.seed);
    let mut tree = Tree {
        containers: vec![Vec::new()],
        blocks: Vec::with_capacity(spec.control_flow_elements),
    };

    let mut all: Vec<usize> = vec![0];
    for _ in 0..spec.control_flow_elements {
        let kind = [Kind::Parallel, Kind::Xor, Kind::Loop][rng.below(3) as usize];
        let arms = if kind == Kind::Loop { 1 } else { 2 };
        let first = tree.containers.len();
        let own: Vec<usize> = (first..first + arms).collect();
        tree.containers.extend(own.iter().map(|_| Vec::new()));
        let b = tree.blocks.len();
        tree.blocks.push((kind, own.clone()));
        tree.insert_uniform(&mut rng, &all, Item::Block(b));
        all.extend(own);
    }

    for b in 0..tree.blocks.len() {
        let own = tree.blocks[b].1.clone();
        tree.insert_uniform(&mut rng, &own, Item::Task);
    }
    for _ in spec.control_flow_elements..spec.nodes {
        tree.insert_uniform(&mut rng, &all, Item::Task);
    }

    let mut emit = Emit {
        tree: &tree,
        tasks: 0,
        counters: [0; 3],
    };
    let body = emit.sequence(0);

    let mut flow = Flow::new(
        format!(
            "random-n{}-c{}-a{}-s{}",
            spec.nodes, spec.control_flow_elements, spec.arguments, spec.seed
        ),
        body,
    );
    assign_arguments(&mut flow, spec.arguments, &mut rng);
    Ok(flow)
}

/// Generates a model; same spec, same model.
pub fn generate(spec: &GenSpec) -> Result<ProcessModel, InvalidSpec> {
    Ok(generate_flow(spec)?.build())
}

struct Emit<'a> {
    tree: &'a Tree,
    tasks: usize,
    counters: [usize; 3],
}

impl Emit<'_> {
    fn sequence(&mut self, c: usize) -> Vec<FlowItem> {
        self.tree.containers[c]
            .iter()
            .map(|item| self.item(*item))
            .collect()
    }

    fn item(&mut self, item: Item) -> FlowItem {
        match item {
            Item::Task => {
                self.tasks += 1;
                FlowItem::Task {
                    id: format!("t{}", self.tasks),
                    label: format!("Task {}", self.tasks),
                    arguments: BTreeMap::new(),
                }
            }
            Item::Block(b) => {
                let (kind, ref own) = self.tree.blocks[b];
                let slot = kind as usize;
                self.counters[slot] += 1;
                let id = format!("{}{}", ["p", "x", "l"][slot], self.counters[slot]);
                match kind {
                    Kind::Loop => FlowItem::Loop {
                        tail_id: format!("{id}_end"),
                        id,
                        label: String::new(),
                        body: self.sequence(own[0]),
                    },
                    Kind::Parallel | Kind::Xor => {
                        let branches = own.iter().map(|&c| Branch::new(self.sequence(c))).collect();
                        let join_id = format!("{id}_join");
                        if kind == Kind::Parallel {
                            FlowItem::Parallel {
                                id,
                                join_id,
                                label: String::new(),
                                branches,
                            }
                        } else {
                            FlowItem::Xor {
                                id,
                                join_id,
                                label: String::new(),
                                branches,
                            }
                        }
                    }
                }
            }
        }
    }
}

fn tasks_mut<'a>(
    items: &'a mut [FlowItem],
    out: &mut Vec<&'a mut BTreeMap<String, ArgumentValue>>,
) {
    for item in items {
        match item {
            FlowItem::Task { arguments, .. } => out.push(arguments),
            FlowItem::Parallel { branches, .. } | FlowItem::Xor { branches, .. } => {
                for b in branches {
                    tasks_mut(&mut b.items, out);
                }
            }
            FlowItem::Loop { body, .. } => tasks_mut(body, out),
        }
    }
}

fn draw_value(rng: &mut Rng, attr: usize) -> ArgumentValue {
    if attr % 2 == 0 {
        ArgumentValue::numeric(1.0 + rng.below(100) as f64)
    } else {
        ArgumentValue::text(WORDS[rng.below(WORDS.len() as u64) as usize])
    }
}

fn assign_arguments(flow: &mut Flow, count: usize, rng: &mut Rng) {
    let mut tasks = Vec::new();
    tasks_mut(&mut flow.body, &mut tasks);
    let mut used = vec![false; count];
    for args in tasks.iter_mut() {
        for (a, seen) in used.iter_mut().enumerate() {
            if rng.chance(PRESENCE.0, PRESENCE.1) {
                args.insert(format!("attr{a}"), draw_value(rng, a));
                *seen = true;
            }
        }
    }
    for (a, seen) in used.iter().enumerate() {
        if !seen {
            let t = rng.below(tasks.len() as u64) as usize;
            tasks[t].insert(format!("attr{a}"), draw_value(rng, a));
        }
    }
}
