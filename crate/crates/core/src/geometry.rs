//! Relative-interior test for the convex hull of a conditional support, and
//! the one-step arbitrage direction produced when the test fails.
//!
//! Both questions are answered by small exact LPs. A node whose hull does not
//! contain the origin in its relative interior (taken inside the linear span
//! of the atoms) admits a direction `h` in that span with `(h, x) ≥ 0` for
//! every atom and strict inequality for at least one; holding `h` over that
//! step is an arbitrage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{solve_lp, span_basis, LinearProgram, LpError, LpOutcome, Rational, RationalVector};
use crate::model::{conditional_support, ModelError, NodeId, ScenarioTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("atom list is empty")]
    NoAtoms,
    #[error("atoms do not share a common dimension")]
    Dimension,
    #[error("relative-interior LP and direction LP disagree")]
    Inconsistent,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome of the relative-interior test, with its witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RiCertificate {
    /// All-positive convex weights whose combination of the atoms is zero.
    InRi { weights: Vec<Rational> },
    /// A one-sided direction in the span of the atoms, max-norm one.
    NotInRi { direction: RationalVector },
}

impl RiCertificate {
    pub fn is_in_ri(&self) -> bool {
        matches!(self, RiCertificate::InRi { .. })
    }

    /// Re-checks the witness against `atoms` exactly.
    pub fn verify(&self, atoms: &[RationalVector]) -> bool {
        match self {
            RiCertificate::InRi { weights } => {
                if weights.len() != atoms.len() || atoms.is_empty() {
                    return false;
                }
                let mut combo = RationalVector::zeros(atoms[0].dim());
                for (w, x) in weights.iter().zip(atoms) {
                    combo.axpy(w, x);
                }
                weights.iter().all(Rational::is_positive)
                    && weights.iter().sum::<Rational>().is_one()
                    && combo.is_zero()
            }
            RiCertificate::NotInRi { direction } => is_one_sided_direction(direction, atoms),
        }
    }
}

/// A per-node certificate as written to JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCertificate {
    pub node: NodeId,
    #[serde(flatten)]
    pub certificate: RiCertificate,
}

fn is_one_sided_direction(h: &RationalVector, atoms: &[RationalVector]) -> bool {
    if atoms.is_empty() || h.dim() != atoms[0].dim() || !h.max_norm().is_one() {
        return false;
    }
    let products: Vec<Rational> = atoms.iter().map(|x| h.dot(x)).collect();
    crate::exact::in_span(h, &span_basis(atoms))
        && products.iter().all(|p| !p.is_negative())
        && products.iter().any(Rational::is_positive)
}

fn check_atoms(atoms: &[RationalVector]) -> Result<usize, GeometryError> {
    let first = atoms.first().ok_or(GeometryError::NoAtoms)?;
    let d = first.dim();
    if atoms.iter().any(|a| a.dim() != d) {
        return Err(GeometryError::Dimension);
    }
    Ok(d)
}

/// Solves `max Σᵢ (h, xᵢ)` over `h ∈ span(atoms)` with `(h, xᵢ) ≥ 0` and
/// `|hⱼ| ≤ 1`, returning the optimum and the optimal `h`.
///
/// The optimum is zero exactly when no one-sided direction exists.
pub fn one_sided_direction_lp(atoms: &[RationalVector]) -> Result<(Rational, RationalVector), GeometryError> {
    let d = check_atoms(atoms)?;
    let basis = span_basis(atoms);
    let r = basis.len();
    if r == 0 {
        return Ok((Rational::zero(), RationalVector::zeros(d)));
    }
    // h = Σₖ αₖ bₖ; coefficient rows are expressed in α
    let in_alpha = |y: &RationalVector| -> RationalVector { basis.iter().map(|b| b.dot(y)).collect() };
    let mut total = RationalVector::zeros(d);
    for x in atoms {
        total = total.add(x);
    }
    let mut lp = LinearProgram::maximize(in_alpha(&total));
    for x in atoms {
        lp.add_ge(in_alpha(x), Rational::zero());
    }
    for j in 0..d {
        let coord: RationalVector = basis.iter().map(|b| b[j].clone()).collect();
        lp.add_le(coord.clone(), Rational::one());
        lp.add_ge(coord, -Rational::one());
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal { point, value } => {
            let mut h = RationalVector::zeros(d);
            for (a, b) in point.iter().zip(&basis) {
                h.axpy(a, b);
            }
            Ok((value, h))
        }
        // h = 0 is feasible and the box bounds the objective
        other => unreachable!("direction LP must have an optimum, got {other:?}"),
    }
}

/// A direction `h ∈ span(atoms)` with `(h, xᵢ) ≥ 0` for all atoms and `> 0`
/// for some, normalized to max-norm one; `None` when the origin lies in the
/// relative interior of the hull.
pub fn arbitrage_direction(atoms: &[RationalVector]) -> Result<Option<RationalVector>, GeometryError> {
    let (value, h) = one_sided_direction_lp(atoms)?;
    if !value.is_positive() {
        return Ok(None);
    }
    let scale = h.max_norm().recip();
    Ok(Some(h.scale(&scale)))
}

/// Decides whether the origin lies in the relative interior of `conv(atoms)`.
///
/// Solves `max t` over convex weights `λ` with `λᵢ ≥ t` and `Σ λᵢ xᵢ = 0`;
/// the origin is relatively interior iff the optimum is positive.
pub fn ri_conv_contains_origin(atoms: &[RationalVector]) -> Result<RiCertificate, GeometryError> {
    let d = check_atoms(atoms)?;
    let k = atoms.len();
    // variables: λ₁..λₖ, t
    let mut objective = RationalVector::zeros(k + 1);
    objective[k] = Rational::one();
    let mut lp = LinearProgram::maximize(objective);
    for i in 0..k {
        let mut row = RationalVector::zeros(k + 1);
        row[i] = -Rational::one();
        row[k] = Rational::one();
        lp.add_le(row, Rational::zero());
    }
    let mut sum = RationalVector::zeros(k + 1);
    for i in 0..k {
        sum[i] = Rational::one();
    }
    lp.add_eq(sum, Rational::one());
    for j in 0..d {
        let mut row = RationalVector::zeros(k + 1);
        for (i, x) in atoms.iter().enumerate() {
            row[i] = x[j].clone();
        }
        lp.add_eq(row, Rational::zero());
    }
    let weights = match solve_lp(&lp)? {
        LpOutcome::Optimal { point, value } if value.is_positive() => Some(point.as_slice()[..k].to_vec()),
        _ => None,
    };
    match (weights, arbitrage_direction(atoms)?) {
        (Some(weights), None) => Ok(RiCertificate::InRi { weights }),
        (None, Some(direction)) => Ok(RiCertificate::NotInRi { direction }),
        _ => Err(GeometryError::Inconsistent),
    }
}

/// Runs the relative-interior test at every non-leaf node, in id order.
pub fn node_certificates(tree: &ScenarioTree) -> Result<Vec<NodeCertificate>, GeometryError> {
    tree.internal_nodes()
        .map(|n| {
            let support = conditional_support(tree, n.id)?;
            Ok(NodeCertificate {
                node: n.id,
                certificate: ri_conv_contains_origin(&support.points())?,
            })
        })
        .collect()
}
