use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ModelError, NodeId, ScenarioTree};
use crate::exact::Rational;

/// A strictly positive Radon–Nikodym density `z = dQ/dP`, one value per leaf.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LeafDensity(pub BTreeMap<NodeId, Rational>);

impl LeafDensity {
    /// `z ≡ 1`.
    pub fn uniform(tree: &ScenarioTree) -> Self {
        LeafDensity(tree.leaves().map(|l| (l.id, Rational::one())).collect())
    }

    pub fn get(&self, leaf: NodeId) -> Option<&Rational> {
        self.0.get(&leaf)
    }

    /// `max_l z_l`.
    pub fn bound(&self) -> Rational {
        self.0.values().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// Errors unless the density covers exactly the leaves of `tree`, is
    /// strictly positive, and has unit `P`-expectation.
    pub fn check(&self, tree: &ScenarioTree) -> Result<(), ModelError> {
        let leaves: Vec<NodeId> = tree.leaves().map(|l| l.id).collect();
        if leaves.len() != self.0.len() || leaves.iter().any(|l| !self.0.contains_key(l)) {
            return Err(ModelError::Density("density must list every leaf exactly once".into()));
        }
        if let Some((id, z)) = self.0.iter().find(|(_, z)| !z.is_positive()) {
            return Err(ModelError::Density(format!("value {z} at leaf {id} is not strictly positive")));
        }
        let total: Rational = tree.leaves().map(|l| &l.mass * &self.0[&l.id]).sum();
        if !total.is_one() {
            return Err(ModelError::Density(format!("expectation is {total}, expected 1")));
        }
        Ok(())
    }

    /// The density process `Zₙ = E(z | node)` at every node.
    pub fn process(&self, tree: &ScenarioTree) -> BTreeMap<NodeId, Rational> {
        // Σ over leaves below of mass·z, divided by the node's own mass
        let mut weighted: BTreeMap<NodeId, Rational> = BTreeMap::new();
        for leaf in tree.leaves() {
            let w = &leaf.mass * &self.0[&leaf.id];
            for id in tree.path(leaf.id) {
                *weighted.entry(id).or_default() += &w;
            }
        }
        tree.nodes()
            .map(|n| (n.id, &weighted[&n.id] / &n.mass))
            .collect()
    }
}

/// Bayes reweighting: transition `q_c` becomes `q_c · Z_c / Z_parent`.
pub fn reweight(tree: &ScenarioTree, density: &LeafDensity) -> Result<ScenarioTree, ModelError> {
    density.check(tree)?;
    let z = density.process(tree);
    let probs: BTreeMap<NodeId, Rational> = tree
        .nodes()
        .filter_map(|n| n.parent.map(|p| (n.id, &(&n.prob * &z[&n.id]) / &z[&p])))
        .collect();
    tree.with_probabilities(&probs)
}
