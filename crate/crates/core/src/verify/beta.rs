use crate::emm::{one_step_scale, EmmError};
use crate::exact::{solve_lp, span_basis, LinearProgram, LpOutcome, Rational, RationalVector};
use crate::model::{conditional_mean, conditional_support, ScenarioTree};

use super::VerifyError;

/// Exact optimum of the gain-functional LP
///
/// ```text
/// β = max Σ_v m_v f_v (γ_v, E(ΔS | v))
///     s.t. Σ_v m_v Σ_i q_{v,i} (γ_v, x_{v,i})⁻ ≤ 1,   γ_v ∈ span(atoms at v)
/// ```
///
/// over all non-leaf nodes `v` (mass `m_v`, scale `f_v`). The negative parts
/// are lifted into auxiliary variables. On a tree where every node passes the
/// relative-interior test, β ≤ 1.
pub fn beta_exact(tree: &ScenarioTree) -> Result<Rational, VerifyError> {
    struct Block {
        basis: Vec<RationalVector>,
        support: crate::model::ConditionalSupport,
        weight: Rational,
        mean: RationalVector,
        mass: Rational,
    }
    let mut blocks = Vec::new();
    for node in tree.internal_nodes() {
        let support = conditional_support(tree, node.id)?;
        let f = one_step_scale(&support).map_err(|e| match e {
            EmmError::NotInRelativeInterior { node, certificate } => VerifyError::Geometry { node, certificate },
            other => other.into(),
        })?;
        let basis = span_basis(&support.points());
        blocks.push(Block {
            basis,
            mean: conditional_mean(&support),
            weight: &node.mass * &f,
            mass: node.mass.clone(),
            support,
        });
    }
    // columns: per block, basis coordinates then one t per atom
    let mut offsets = Vec::new();
    let mut n = 0;
    for b in &blocks {
        offsets.push(n);
        n += b.basis.len() + b.support.atoms.len();
    }
    if blocks.iter().all(|b| b.basis.is_empty()) {
        return Ok(Rational::zero());
    }
    let mut objective = RationalVector::zeros(n);
    for (b, &o) in blocks.iter().zip(&offsets) {
        for (j, v) in b.basis.iter().enumerate() {
            objective[o + j] = &b.weight * &v.dot(&b.mean);
        }
    }
    let mut lp = LinearProgram::maximize(objective);
    let mut budget = RationalVector::zeros(n);
    for (b, &o) in blocks.iter().zip(&offsets) {
        let r = b.basis.len();
        for (i, atom) in b.support.atoms.iter().enumerate() {
            let col = o + r + i;
            // t ≥ −(γ, x)
            let mut row = RationalVector::zeros(n);
            for (j, v) in b.basis.iter().enumerate() {
                row[o + j] = -v.dot(&atom.x);
            }
            row[col] = -Rational::one();
            lp.add_le(row, Rational::zero());
            lp.set_nonnegative(col);
            budget[col] = &b.mass * &atom.q;
        }
    }
    lp.add_le(budget, Rational::one());
    match solve_lp(&lp)? {
        LpOutcome::Optimal { value, .. } => Ok(value),
        other => Err(VerifyError::WitnessRejected(format!(
            "β-LP should have a finite optimum on a tree passing the geometric test, got {other:?}"
        ))),
    }
}
