//! Independent LP oracles for arbitrage strategies and martingale measures.
//!
//! Neither oracle looks at conditional supports or hull geometry: they work
//! directly with leaf gains and leaf masses.

use std::collections::BTreeMap;

use crate::exact::{solve_lp, LinearProgram, LpOutcome, Rational, RationalVector};
use crate::model::{gains, LeafDensity, NodeId, ScenarioTree, Strategy};

use super::VerifyError;

/// Column layout for one position vector per non-leaf node.
struct PositionIndex {
    nodes: Vec<NodeId>,
    offset: BTreeMap<NodeId, usize>,
    d: usize,
}

impl PositionIndex {
    fn new(tree: &ScenarioTree) -> Self {
        let nodes: Vec<NodeId> = tree.internal_nodes().map(|n| n.id).collect();
        let d = tree.dim();
        let offset = nodes.iter().enumerate().map(|(i, id)| (*id, i * d)).collect();
        PositionIndex { nodes, offset, d }
    }

    fn len(&self) -> usize {
        self.nodes.len() * self.d
    }

    fn strategy(&self, x: &RationalVector) -> Strategy {
        Strategy(
            self.nodes
                .iter()
                .map(|id| {
                    let o = self.offset[id];
                    (*id, x.as_slice()[o..o + self.d].iter().cloned().collect())
                })
                .collect(),
        )
    }
}

/// Whether `strategy` is an arbitrage: terminal gain nonnegative at every
/// leaf and positive at some leaf, checked exactly.
pub fn is_arbitrage(tree: &ScenarioTree, strategy: &Strategy) -> bool {
    match gains(tree, strategy) {
        Ok(g) => g.values().all(|x| !x.is_negative()) && g.values().any(Rational::is_positive),
        Err(_) => false,
    }
}

/// Searches for an arbitrage by maximizing expected terminal gain over
/// positions with `|γ| ≤ 1` and nonnegative gain at every leaf.
///
/// A positive optimum is then reduced to a one-step arbitrage: a strategy
/// active at a single date, nonzero only at nodes where it actually earns
/// something.
pub fn oracle_arbitrage_lp(tree: &ScenarioTree) -> Result<Option<Strategy>, VerifyError> {
    let idx = PositionIndex::new(tree);
    let n = idx.len();
    if n == 0 {
        return Ok(None);
    }
    let mut objective = RationalVector::zeros(n);
    for node in tree.internal_nodes() {
        let o = idx.offset[&node.id];
        for &c in &node.children {
            let inc = tree.increment(c);
            let mass = &tree.node(c)?.mass;
            for j in 0..idx.d {
                objective[o + j].add_product(mass, &inc[j]);
            }
        }
    }
    let mut lp = LinearProgram::maximize(objective);
    for leaf in tree.leaves() {
        let mut row = RationalVector::zeros(n);
        let path = tree.path(leaf.id);
        for pair in path.windows(2) {
            let o = idx.offset[&pair[0]];
            let inc = tree.increment(pair[1]);
            for j in 0..idx.d {
                row[o + j] += &inc[j];
            }
        }
        lp.add_ge(row, Rational::zero());
    }
    for k in 0..n {
        let unit = RationalVector::unit(n, k);
        lp.add_le(unit.clone(), Rational::one());
        lp.add_ge(unit, -Rational::one());
    }
    let point = match solve_lp(&lp)? {
        LpOutcome::Optimal { point, value } if value.is_positive() => point,
        LpOutcome::Optimal { .. } => return Ok(None),
        other => unreachable!("arbitrage LP is feasible and bounded, got {other:?}"),
    };
    let strategy = idx.strategy(&point);
    Ok(Some(one_step_reduction(tree, &strategy)?))
}

/// Turns an arbitrage into one that trades at a single date.
///
/// Let `n` be the first date at which the running gain is nonnegative
/// everywhere and positive somewhere. If the gain before `n` vanishes
/// everywhere, the date-`n` positions alone are an arbitrage; otherwise the
/// date-`n` positions restricted to nodes with negative running gain are.
/// Positions that earn zero on every child are then dropped.
pub fn one_step_reduction(tree: &ScenarioTree, strategy: &Strategy) -> Result<Strategy, VerifyError> {
    if !is_arbitrage(tree, strategy) {
        return Err(VerifyError::WitnessRejected("input to one-step reduction is not an arbitrage".into()));
    }
    // running gain at every node
    let mut running: BTreeMap<NodeId, Rational> = BTreeMap::new();
    let mut stack = vec![(tree.root(), Rational::zero())];
    while let Some((id, g)) = stack.pop() {
        let node = tree.node(id)?;
        if let Some(pos) = strategy.get(id) {
            for &c in &node.children {
                stack.push((c, &g + &pos.dot(&tree.increment(c))));
            }
        }
        running.insert(id, g);
    }
    let at_depth = |k: usize| tree.nodes().filter(move |n| n.depth == k).map(|n| n.id);
    let date = (1..=tree.horizon())
        .find(|&k| {
            at_depth(k).all(|id| !running[&id].is_negative()) && at_depth(k).any(|id| running[&id].is_positive())
        })
        .expect("an arbitrage is nonnegative and somewhere positive at the horizon");
    let losing: Vec<NodeId> = at_depth(date - 1).filter(|id| running[id].is_negative()).collect();
    let active: Vec<NodeId> = if losing.is_empty() {
        at_depth(date - 1).collect()
    } else {
        losing
    };
    let mut reduced = Strategy::zero(tree);
    for id in active {
        let pos = strategy.get(id).expect("strategy covers non-leaf nodes");
        let node = tree.node(id)?;
        if node.children.iter().any(|&c| !pos.dot(&tree.increment(c)).is_zero()) {
            reduced.set(id, pos.clone());
        }
    }
    if !is_arbitrage(tree, &reduced) {
        return Err(VerifyError::WitnessRejected("one-step reduction lost the arbitrage".into()));
    }
    Ok(reduced)
}

/// Searches for an equivalent martingale measure directly: maximize `t`
/// subject to `z_l ≥ t`, `Σ p_l z_l = 1` and, at every non-leaf node, zero
/// `z`-weighted expected increment. Returns the density iff `t > 0`.
pub fn oracle_emm_lp(tree: &ScenarioTree) -> Result<Option<LeafDensity>, VerifyError> {
    let leaves: Vec<(NodeId, Rational)> = tree.leaves().map(|l| (l.id, l.mass.clone())).collect();
    let position: BTreeMap<NodeId, usize> = leaves.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
    let n = leaves.len();
    let t = n;
    let mut objective = RationalVector::zeros(n + 1);
    objective[t] = Rational::one();
    let mut lp = LinearProgram::maximize(objective);
    for i in 0..n {
        let mut row = RationalVector::zeros(n + 1);
        row[t] = Rational::one();
        row[i] = -Rational::one();
        lp.add_le(row, Rational::zero());
    }
    let mut total = RationalVector::zeros(n + 1);
    for (i, (_, mass)) in leaves.iter().enumerate() {
        total[i] = mass.clone();
    }
    lp.add_eq(total, Rational::one());
    for node in tree.internal_nodes() {
        let mut rows = vec![RationalVector::zeros(n + 1); tree.dim()];
        for &c in &node.children {
            let inc = tree.increment(c);
            for leaf in tree.leaves_under(c) {
                let i = position[&leaf];
                for (j, row) in rows.iter_mut().enumerate() {
                    row[i].add_product(&leaves[i].1, &inc[j]);
                }
            }
        }
        for row in rows {
            if !row.is_zero() {
                lp.add_eq(row, Rational::zero());
            }
        }
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal { point, value } if value.is_positive() => Ok(Some(LeafDensity(
            leaves
                .iter()
                .enumerate()
                .map(|(i, (id, _))| (*id, point[i].clone()))
                .collect(),
        ))),
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded { .. } => unreachable!("t ≤ z_l and Σ p z = 1 bound t by 1"),
    }
}
