//! The online tree: routing, majority-vote prediction and split application.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, Sample, Slot};
use crate::element::{ElementPool, LeafId, ObserverConfig};
use crate::error::{Error, Result};
use crate::fixed::FixedStats;
use crate::split::{run_split_trial, Decision, HyperParams, SplitCandidate, SplitReason, SplitTest};

pub use crate::element::ObserverMode;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub label_counts: Vec<u64>,
    /// Prediction while the leaf has seen nothing.
    pub default_label: u32,
    /// Root is at depth 1.
    pub depth: usize,
    starved: bool,
}

impl Leaf {
    fn new(labels: usize, default_label: u32, depth: usize) -> Self {
        Leaf {
            label_counts: vec![0; labels],
            default_label,
            depth,
            starved: false,
        }
    }

    /// Majority label; ties go to the lowest index.
    pub fn predict(&self) -> u32 {
        let mut best: Option<(usize, u64)> = None;
        for (j, &c) in self.label_counts.iter().enumerate() {
            if c > 0 && best.is_none_or(|(_, b)| c > b) {
                best = Some((j, c));
            }
        }
        best.map_or(self.default_label, |(j, _)| j as u32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        attribute: usize,
        test: SplitTest,
        left: NodeId,
        right: NodeId,
        depth: usize,
    },
    Leaf(Leaf),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeMetrics {
    pub samples: u64,
    pub trials: u64,
    pub splits: u64,
    pub splits_by_bound: u64,
    pub splits_by_tie: u64,
    /// Leaves that could not get an element, plus splits aborted for lack of
    /// elements.
    pub pool_exhausted: u64,
    pub depth_limited: u64,
    pub leaf_limited: u64,
    pub fixed: FixedStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvent {
    pub leaf: LeafId,
    pub attribute: usize,
    pub test: SplitTest,
    pub reason: SplitReason,
    pub n_f: u64,
    pub left: LeafId,
    pub right: LeafId,
}

#[derive(Debug, Clone)]
pub struct HoeffdingTree {
    nodes: Vec<Node>,
    pool: ElementPool,
    hp: HyperParams,
    schema: DatasetSchema,
    mode: ObserverMode,
    fixed_point: bool,
    leaves: usize,
    metrics: TreeMetrics,
}

impl HoeffdingTree {
    pub fn new(schema: DatasetSchema, hp: HyperParams, mode: ObserverMode, fixed_point: bool) -> Result<Self> {
        hp.validate()?;
        let config = ObserverConfig {
            mode,
            quantiles: hp.quantiles,
            lambda: hp.lambda,
            fixed_point,
        };
        let mut pool = ElementPool::new(hp.elements, &schema, config);
        pool.allocate(0)?;
        Ok(HoeffdingTree {
            nodes: vec![Node::Leaf(Leaf::new(schema.label_count, 0, 1))],
            pool,
            hp,
            schema,
            mode,
            fixed_point,
            leaves: 1,
            metrics: TreeMetrics::default(),
        })
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn hyper_params(&self) -> &HyperParams {
        &self.hp
    }

    pub fn mode(&self) -> ObserverMode {
        self.mode
    }

    pub fn metrics(&self) -> &TreeMetrics {
        &self.metrics
    }

    pub fn pool(&self) -> &ElementPool {
        &self.pool
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    /// Deepest leaf level.
    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(l) => Some(l.depth),
                Node::Internal { .. } => None,
            })
            .max()
            .unwrap_or(1)
    }

    /// Route a sample to its leaf.
    pub fn traverse(&self, sample: &Sample) -> NodeId {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf(_) => return id,
                Node::Internal {
                    attribute,
                    test,
                    left,
                    right,
                    ..
                } => {
                    let go_left = match (self.schema.slot(*attribute), test) {
                        (Slot::Numeric(k), SplitTest::Threshold(t)) => sample.numeric[k] <= *t,
                        (Slot::Categorical(k), SplitTest::Equals(v)) => sample.categorical[k] == *v,
                        _ => unreachable!("split test kind matches attribute kind"),
                    };
                    id = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf(&self, id: NodeId) -> Option<&Leaf> {
        match &self.nodes[id] {
            Node::Leaf(l) => Some(l),
            Node::Internal { .. } => None,
        }
    }

    fn leaf_mut(&mut self, id: NodeId) -> &mut Leaf {
        match &mut self.nodes[id] {
            Node::Leaf(l) => l,
            Node::Internal { .. } => unreachable!("node {id} is a leaf"),
        }
    }

    fn quantized(&self, sample: &Sample) -> Sample {
        let mut s = sample.clone();
        for v in &mut s.numeric {
            *v = crate::fixed::FixedPoint::from_f64(*v).0.to_f64();
        }
        s
    }

    pub fn predict(&self, sample: &Sample) -> u32 {
        let leaf = if self.fixed_point {
            self.traverse(&self.quantized(sample))
        } else {
            self.traverse(sample)
        };
        self.leaf(leaf).expect("traverse ends at a leaf").predict()
    }

    /// Update the tree with one labeled sample; returns the split taken, if any.
    pub fn learn_one(&mut self, sample: &Sample) -> Result<Option<SplitEvent>> {
        self.schema.check(sample)?;
        let owned;
        let sample = if self.fixed_point {
            let mut s = sample.clone();
            for v in &mut s.numeric {
                *v = self.metrics.fixed.quantize(*v);
            }
            owned = s;
            &owned
        } else {
            sample
        };
        self.metrics.samples += 1;
        let leaf_id = self.traverse(sample);
        self.leaf_mut(leaf_id).label_counts[sample.label as usize] += 1;

        let element = match self.pool.element_of(leaf_id) {
            Some(e) => e,
            None => match self.pool.allocate(leaf_id)? {
                Some(e) => e,
                None => {
                    let leaf = self.leaf_mut(leaf_id);
                    if !leaf.starved {
                        leaf.starved = true;
                        self.metrics.pool_exhausted += 1;
                    }
                    return Ok(None);
                }
            },
        };
        let elem = self.pool.element_mut(element);
        elem.observe(sample)?;
        if elem.samples_since_trial() < self.hp.n_min {
            return Ok(None);
        }
        let n_f = elem.n_f();
        self.metrics.trials += 1;
        let outcome = run_split_trial(elem, &self.schema, &self.hp)?;
        let Decision::Split(reason) = outcome.decision else {
            return Ok(None);
        };
        let candidate = outcome.best.expect("split decision carries a candidate");
        let depth = self.leaf(leaf_id).expect("leaf").depth;
        if depth >= self.hp.max_depth {
            self.metrics.depth_limited += 1;
            return Ok(None);
        }
        if self.leaves >= self.hp.max_leaves {
            self.metrics.leaf_limited += 1;
            return Ok(None);
        }
        match self.apply_split(leaf_id, &candidate)? {
            Some((left, right)) => {
                match reason {
                    SplitReason::Bound => self.metrics.splits_by_bound += 1,
                    SplitReason::Tie => self.metrics.splits_by_tie += 1,
                }
                Ok(Some(SplitEvent {
                    leaf: leaf_id,
                    attribute: candidate.attribute,
                    test: candidate.test,
                    reason,
                    n_f,
                    left,
                    right,
                }))
            }
            None => Ok(None),
        }
    }

    /// Turn `leaf_id` into an internal node with two fresh leaves. Returns
    /// `None` (tree untouched) when the pool cannot back both children.
    pub fn apply_split(&mut self, leaf_id: NodeId, candidate: &SplitCandidate) -> Result<Option<(NodeId, NodeId)>> {
        let leaf = self
            .leaf(leaf_id)
            .ok_or_else(|| Error::Contract(format!("node {leaf_id} is not a leaf")))?;
        match (self.schema.slot(candidate.attribute), candidate.test) {
            (Slot::Numeric(_), SplitTest::Threshold(_)) | (Slot::Categorical(_), SplitTest::Equals(_)) => {}
            _ => {
                return Err(Error::Contract(format!(
                    "split test {:?} does not fit attribute {}",
                    candidate.test, candidate.attribute
                )))
            }
        }
        let depth = leaf.depth;
        let inherited = leaf.predict();
        let parent_bound = self.pool.element_of(leaf_id).is_some();
        if self.pool.free_count() + usize::from(parent_bound) < 2 {
            self.metrics.pool_exhausted += 1;
            return Ok(None);
        }
        if parent_bound {
            self.pool.release(leaf_id)?;
        }
        let left = self.nodes.len();
        let right = left + 1;
        let labels = self.schema.label_count;
        self.nodes.push(Node::Leaf(Leaf::new(labels, inherited, depth + 1)));
        self.nodes.push(Node::Leaf(Leaf::new(labels, inherited, depth + 1)));
        self.pool.allocate(left)?;
        self.pool.allocate(right)?;
        self.nodes[leaf_id] = Node::Internal {
            attribute: candidate.attribute,
            test: candidate.test,
            left,
            right,
            depth,
        };
        self.leaves += 1;
        self.metrics.splits += 1;
        Ok(Some((left, right)))
    }

    /// Parenthesized one-node-per-line dump.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_node(0, 0, &mut out);
        out
    }

    fn dump_node(&self, id: NodeId, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match &self.nodes[id] {
            Node::Leaf(l) => {
                let _ = writeln!(
                    out,
                    "{pad}(leaf #{id} -> {} {:?})",
                    l.predict(),
                    l.label_counts
                );
            }
            Node::Internal {
                attribute,
                test,
                left,
                right,
                ..
            } => {
                let name = &self.schema.attributes[*attribute].name;
                let _ = match test {
                    SplitTest::Threshold(t) => writeln!(out, "{pad}({name} <= {t}"),
                    SplitTest::Equals(v) => writeln!(out, "{pad}({name} == {v}"),
                };
                self.dump_node(*left, indent + 1, out);
                self.dump_node(*right, indent + 1, out);
                // close the paren on the last child's line
                out.pop();
                out.push_str(")\n");
            }
        }
    }

    /// Structural and pool invariants; used by tests.
    pub fn check_invariants(&self) -> Result<()> {
        self.pool.check_invariants()?;
        let mut leaves = 0;
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf(l) => {
                    leaves += 1;
                    if l.depth > self.hp.max_depth {
                        return Err(Error::Contract(format!("leaf {id} deeper than limit")));
                    }
                }
                Node::Internal { left, right, .. } => {
                    if self.pool.element_of(id).is_some() {
                        return Err(Error::Contract(format!("internal node {id} holds an element")));
                    }
                    stack.push(*left);
                    stack.push(*right);
                }
            }
        }
        if leaves != self.leaves || leaves > self.hp.max_leaves {
            return Err(Error::Contract(format!("leaf count {leaves} inconsistent")));
        }
        if self.pool.bound_count() > leaves {
            return Err(Error::Contract("more bound elements than leaves".into()));
        }
        Ok(())
    }
}
