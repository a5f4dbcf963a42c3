//! Constructive equivalent martingale measure.
//!
//! At each node the conditional law of the increment yields a convex gauge
//! `ψ(h) = Σ qᵢ (h, xᵢ)⁻` and the set `T = {h ∈ span : ψ(h) ≤ 1}`, compact
//! when the origin is relatively interior to the hull of the atoms. The scale
//! `f = 1 / (1 + s(E ξ | T))` bounds from below a per-atom density `g` that
//! solves `Σ qᵢ gᵢ xᵢ = 0`; normalized one-step densities are then multiplied
//! along root-to-leaf paths to give the global density `dQ/dP`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{in_span, solve_lp, span_basis, LinearProgram, LpError, LpOutcome, Rational, RationalVector};
use crate::geometry::{ri_conv_contains_origin, GeometryError, RiCertificate};
use crate::model::{
    conditional_mean, conditional_support, ConditionalSupport, LeafDensity, ModelError, NodeId, ScenarioTree,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmmError {
    /// The origin is not in the relative interior of the hull at `node`.
    #[error("origin is not in the relative interior of the conditional support at node {node}")]
    NotInRelativeInterior { node: NodeId, certificate: RiCertificate },
    #[error("vector is not in the span of the atoms at node {node}")]
    NotInSpan { node: NodeId },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `ψ(h) = Σᵢ qᵢ · max(−(h, xᵢ), 0)`.
pub fn psi(support: &ConditionalSupport, h: &RationalVector) -> Rational {
    support.atoms.iter().map(|a| &a.q * h.dot(&a.x).negative_part()).sum()
}

fn precondition_failure(support: &ConditionalSupport) -> EmmError {
    match ri_conv_contains_origin(&support.points()) {
        Ok(certificate @ RiCertificate::NotInRi { .. }) => EmmError::NotInRelativeInterior {
            node: support.node,
            certificate,
        },
        Ok(RiCertificate::InRi { .. }) => EmmError::Geometry(GeometryError::Inconsistent),
        Err(e) => e.into(),
    }
}

/// Support function `s(a | T) = max {(a, h) : h ∈ span(atoms), ψ(h) ≤ 1}`.
pub fn support_function(support: &ConditionalSupport, a: &RationalVector) -> Result<Rational, EmmError> {
    let points = support.points();
    if points.is_empty() {
        return Err(GeometryError::NoAtoms.into());
    }
    let basis = span_basis(&points);
    if !in_span(a, &basis) {
        return Err(EmmError::NotInSpan { node: support.node });
    }
    let (r, k) = (basis.len(), points.len());
    if r == 0 {
        return Ok(Rational::zero());
    }
    // variables: α₁..α_r (h = Σ αⱼ bⱼ), then t₁..t_k ≥ 0 with tᵢ ≥ −(h, xᵢ)
    let mut objective = RationalVector::zeros(r + k);
    for (j, b) in basis.iter().enumerate() {
        objective[j] = a.dot(b);
    }
    let mut lp = LinearProgram::maximize(objective);
    for (i, x) in points.iter().enumerate() {
        let mut row = RationalVector::zeros(r + k);
        for (j, b) in basis.iter().enumerate() {
            row[j] = -b.dot(x);
        }
        row[r + i] = -Rational::one();
        lp.add_le(row, Rational::zero());
        lp.set_nonnegative(r + i);
    }
    let mut budget = RationalVector::zeros(r + k);
    for (i, atom) in support.atoms.iter().enumerate() {
        budget[r + i] = atom.q.clone();
    }
    lp.add_le(budget, Rational::one());
    match solve_lp(&lp)? {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Unbounded { .. } => Err(precondition_failure(support)),
        LpOutcome::Infeasible { .. } => unreachable!("h = 0 is always feasible"),
    }
}

/// `f = 1 / (1 + s(E ξ | T))`, in `(0, 1]`.
pub fn one_step_scale(support: &ConditionalSupport) -> Result<Rational, EmmError> {
    let s = support_function(support, &conditional_mean(support))?;
    Ok((Rational::one() + s).recip())
}

/// Per-atom density at one node: raw `g ≥ f` solving the martingale equation,
/// and its normalization `ĝ = g / Σ qᵢ gᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneStepDensity {
    pub node: NodeId,
    pub f: Rational,
    pub g: Vec<Rational>,
    pub g_hat: Vec<Rational>,
}

impl OneStepDensity {
    /// Exact check of `g ≥ f > 0`, `Σ qᵢ gᵢ xᵢ = 0` and `Σ qᵢ ĝᵢ = 1`.
    pub fn verify(&self, support: &ConditionalSupport) -> bool {
        let k = support.atoms.len();
        if self.g.len() != k || self.g_hat.len() != k || !self.f.is_positive() {
            return false;
        }
        let mut moment = RationalVector::zeros(support.dim());
        let mut mass = Rational::zero();
        let mut raw_mass = Rational::zero();
        for ((atom, g), gh) in support.atoms.iter().zip(&self.g).zip(&self.g_hat) {
            moment.axpy(&(&atom.q * g), &atom.x);
            mass.add_product(&atom.q, gh);
            raw_mass.add_product(&atom.q, g);
        }
        self.g.iter().all(|g| *g >= self.f)
            && moment.is_zero()
            && mass.is_one()
            && self.g.iter().zip(&self.g_hat).all(|(g, gh)| *gh == g / &raw_mass)
    }
}

/// Minimizes `max gᵢ` subject to `gᵢ ≥ f` and `Σ qᵢ gᵢ xᵢ = 0`.
pub fn one_step_density(support: &ConditionalSupport) -> Result<OneStepDensity, EmmError> {
    let f = one_step_scale(support)?;
    let k = support.atoms.len();
    let d = support.dim();
    // variables: g₁..g_k, u; maximize −u
    let mut objective = RationalVector::zeros(k + 1);
    objective[k] = -Rational::one();
    let mut lp = LinearProgram::maximize(objective);
    for i in 0..k {
        let mut lower = RationalVector::zeros(k + 1);
        lower[i] = -Rational::one();
        lp.add_le(lower, -f.clone());
        let mut upper = RationalVector::zeros(k + 1);
        upper[i] = Rational::one();
        upper[k] = -Rational::one();
        lp.add_le(upper, Rational::zero());
    }
    for j in 0..d {
        let mut row = RationalVector::zeros(k + 1);
        for (i, atom) in support.atoms.iter().enumerate() {
            row[i] = &atom.q * &atom.x[j];
        }
        lp.add_eq(row, Rational::zero());
    }
    let g: Vec<Rational> = match solve_lp(&lp)? {
        LpOutcome::Optimal { point, .. } => point.as_slice()[..k].to_vec(),
        LpOutcome::Infeasible { .. } => return Err(precondition_failure(support)),
        LpOutcome::Unbounded { .. } => unreachable!("u is bounded below by f"),
    };
    let total: Rational = support.atoms.iter().zip(&g).map(|(a, g)| &a.q * g).sum();
    let g_hat = g.iter().map(|x| x / &total).collect();
    Ok(OneStepDensity {
        node: support.node,
        f,
        g,
        g_hat,
    })
}

/// Result of the backward-induction construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmmConstruction {
    pub leaf_density: LeafDensity,
    /// `max_l z_l`.
    pub bound: Rational,
    pub per_node: Vec<OneStepDensity>,
}

/// Builds `dQ/dP` as the product of normalized one-step densities along each
/// root-to-leaf path. Fails at the first node (in id order) whose support
/// does not contain the origin in the relative interior of its hull.
pub fn build_emm(tree: &ScenarioTree) -> Result<EmmConstruction, EmmError> {
    let mut per_node = Vec::new();
    // normalized density of each child's atom, keyed by child
    let mut edge_factor: BTreeMap<NodeId, Rational> = BTreeMap::new();
    for node in tree.internal_nodes() {
        let support = conditional_support(tree, node.id)?;
        let density = one_step_density(&support)?;
        for (i, members) in support.members.iter().enumerate() {
            for c in members {
                edge_factor.insert(*c, density.g_hat[i].clone());
            }
        }
        per_node.push(density);
    }
    let mut z = BTreeMap::new();
    for leaf in tree.leaves() {
        let value = tree
            .path(leaf.id)
            .iter()
            .skip(1)
            .fold(Rational::one(), |acc, id| acc * &edge_factor[id]);
        z.insert(leaf.id, value);
    }
    let leaf_density = LeafDensity(z);
    Ok(EmmConstruction {
        bound: leaf_density.bound(),
        leaf_density,
        per_node,
    })
}

/// Per-node `Q`-conditional expectation of the increment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MartingaleCheck {
    pub holds: bool,
    pub residuals: BTreeMap<NodeId, RationalVector>,
}

/// Checks `E_Q(ΔS | node) = 0` at every non-leaf node, where `Q = z · P`.
pub fn verify_martingale(tree: &ScenarioTree, density: &LeafDensity) -> Result<MartingaleCheck, ModelError> {
    density.check(tree)?;
    let z = density.process(tree);
    let mut residuals = BTreeMap::new();
    for node in tree.internal_nodes() {
        let mut r = RationalVector::zeros(tree.dim());
        for &c in &node.children {
            let q = &(&tree.node(c)?.prob * &z[&c]) / &z[&node.id];
            r.axpy(&q, &tree.increment(c));
        }
        residuals.insert(node.id, r);
    }
    Ok(MartingaleCheck {
        holds: residuals.values().all(RationalVector::is_zero),
        residuals,
    })
}
