//! The finite market model: scenario trees, one-step conditional laws,
//! trading strategies and equivalent changes of measure.

mod density;
mod support;
mod tree;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exact::{Rational, RationalVector};

pub use density::{reweight, LeafDensity};
pub use support::{conditional_mean, conditional_support, Atom, ConditionalSupport};
pub use tree::{validate, Node, NodeId, NodeRecord, ScenarioTree, TreeDocument, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid tree: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("node {0} is a leaf")]
    LeafNode(NodeId),
    #[error("strategy has no entry for node {0}")]
    MissingStrategy(NodeId),
    #[error("vector at node {node} has dimension {found}, expected {expected}")]
    Dimension { node: NodeId, expected: usize, found: usize },
    #[error("invalid density: {0}")]
    Density(String),
}

/// A predictable position vector for every non-leaf node: the holding chosen
/// at a node applies over the step to each of its children.
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Strategy(pub BTreeMap<NodeId, RationalVector>);

impl Strategy {
    pub fn zero(tree: &ScenarioTree) -> Self {
        Strategy(
            tree.internal_nodes()
                .map(|n| (n.id, RationalVector::zeros(tree.dim())))
                .collect(),
        )
    }

    pub fn get(&self, node: NodeId) -> Option<&RationalVector> {
        self.0.get(&node)
    }

    pub fn set(&mut self, node: NodeId, position: RationalVector) {
        self.0.insert(node, position);
    }

    /// Nodes with a nonzero position.
    pub fn active_nodes(&self) -> Vec<NodeId> {
        self.0.iter().filter(|(_, v)| !v.is_zero()).map(|(k, _)| *k).collect()
    }

    pub fn add(&self, other: &Strategy) -> Strategy {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            let entry = out.0.entry(*k).or_insert_with(|| RationalVector::zeros(v.dim()));
            *entry = entry.add(v);
        }
        out
    }
}

/// Terminal gain `Σₖ (γₖ, ΔSₖ)` at every leaf, in leaf-id order.
pub fn gains(tree: &ScenarioTree, strategy: &Strategy) -> Result<BTreeMap<NodeId, Rational>, ModelError> {
    for node in tree.internal_nodes() {
        let pos = strategy.get(node.id).ok_or(ModelError::MissingStrategy(node.id))?;
        if pos.dim() != tree.dim() {
            return Err(ModelError::Dimension {
                node: node.id,
                expected: tree.dim(),
                found: pos.dim(),
            });
        }
    }
    // accumulate top-down so each edge is evaluated once
    let mut stack = vec![(tree.root(), Rational::zero())];
    let mut out = BTreeMap::new();
    while let Some((id, g)) = stack.pop() {
        let node = tree.node(id)?;
        if node.children.is_empty() {
            out.insert(id, g);
            continue;
        }
        let pos = &strategy.0[&id];
        for &c in &node.children {
            let step = pos.dot(&tree.increment(c));
            stack.push((c, &g + &step));
        }
    }
    Ok(out)
}
