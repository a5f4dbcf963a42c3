use serde::{Deserialize, Serialize};

use super::{ModelError, NodeId, ScenarioTree};
use crate::exact::{Rational, RationalVector};

/// One point of a conditional law: an increment value and its probability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub x: RationalVector,
    pub q: Rational,
}

/// The one-step conditional distribution of the price increment at a node.
///
/// Atoms are the distinct increments over the node's children, ordered by
/// first occurrence in child-id order; `members[i]` lists the children that
/// realize atom `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalSupport {
    pub node: NodeId,
    pub atoms: Vec<Atom>,
    pub members: Vec<Vec<NodeId>>,
}

impl ConditionalSupport {
    /// Builds a support directly from atoms, for use outside a tree.
    pub fn from_atoms(node: NodeId, atoms: Vec<Atom>) -> Self {
        let members = vec![Vec::new(); atoms.len()];
        ConditionalSupport { node, atoms, members }
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, |a| a.x.dim())
    }

    pub fn points(&self) -> Vec<RationalVector> {
        self.atoms.iter().map(|a| a.x.clone()).collect()
    }

    /// Index of the atom realized by `child`.
    pub fn atom_of(&self, child: NodeId) -> Option<usize> {
        self.members.iter().position(|m| m.contains(&child))
    }
}

/// Merges the children of `node` into distinct increment values.
pub fn conditional_support(tree: &ScenarioTree, node: NodeId) -> Result<ConditionalSupport, ModelError> {
    let n = tree.node(node)?;
    if n.children.is_empty() {
        return Err(ModelError::LeafNode(node));
    }
    let mut atoms: Vec<Atom> = Vec::new();
    let mut members: Vec<Vec<NodeId>> = Vec::new();
    for &c in &n.children {
        let x = tree.increment(c);
        let q = &tree.node(c)?.prob;
        match atoms.iter().position(|a| a.x == x) {
            Some(i) => {
                atoms[i].q += q;
                members[i].push(c);
            }
            None => {
                atoms.push(Atom { x, q: q.clone() });
                members.push(vec![c]);
            }
        }
    }
    Ok(ConditionalSupport {
        node,
        atoms,
        members,
    })
}

/// `Σ qᵢ xᵢ`, the conditional expectation of the increment.
pub fn conditional_mean(support: &ConditionalSupport) -> RationalVector {
    let mut mean = RationalVector::zeros(support.dim());
    for a in &support.atoms {
        mean.axpy(&a.q, &a.x);
    }
    mean
}
