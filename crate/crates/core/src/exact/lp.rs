//! Exact two-phase simplex with Bland's rule.
//!
//! Problems are stated as `maximize cᵀx` subject to rows `aᵢᵀx ≤ bᵢ` or
//! `aᵢᵀx = bᵢ`, with every variable either free or `≥ 0`. Every outcome
//! carries a certificate that [`LpOutcome::verify`] checks with exact
//! arithmetic: an optimal point, a Farkas vector, or an improving ray.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Rational, RationalVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    LessEq,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarBound {
    Free,
    NonNegative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: RationalVector,
    pub rhs: Rational,
    pub kind: RowKind,
}

/// `maximize objective·x` subject to `constraints`, with per-variable `bounds`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: RationalVector,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("objective has {objective} entries but {bounds} variable bounds were given")]
    BoundCount { objective: usize, bounds: usize },
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    RowLength { row: usize, found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LpOutcome {
    Optimal { point: RationalVector, value: Rational },
    /// Row multipliers `y` with `y ≥ 0` on inequality rows, `yᵀA = 0` on free
    /// columns, `yᵀA ≥ 0` on nonnegative columns, and `yᵀb < 0`.
    Infeasible { certificate: RationalVector },
    /// A feasible point plus a ray along which the objective grows without bound.
    Unbounded { point: RationalVector, ray: RationalVector },
}

impl LinearProgram {
    /// An LP over `objective.dim()` free variables with no constraints yet.
    pub fn maximize(objective: RationalVector) -> Self {
        let n = objective.dim();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBound::Free; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.dim()
    }

    pub fn add_le(&mut self, coeffs: RationalVector, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            rhs,
            kind: RowKind::LessEq,
        });
        self
    }

    pub fn add_ge(&mut self, coeffs: RationalVector, rhs: Rational) -> &mut Self {
        self.add_le(coeffs.scale(&-Rational::one()), -rhs)
    }

    pub fn add_eq(&mut self, coeffs: RationalVector, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            rhs,
            kind: RowKind::Equal,
        });
        self
    }

    pub fn set_nonnegative(&mut self, var: usize) -> &mut Self {
        self.bounds[var] = VarBound::NonNegative;
        self
    }

    pub fn check_dimensions(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::BoundCount {
                objective: n,
                bounds: self.bounds.len(),
            });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coeffs.dim() != n {
                return Err(LpError::RowLength {
                    row,
                    found: c.coeffs.dim(),
                    expected: n,
                });
            }
        }
        Ok(())
    }

    /// Whether `x` satisfies every row and bound exactly.
    pub fn is_feasible(&self, x: &RationalVector) -> bool {
        if x.dim() != self.num_vars() {
            return false;
        }
        let bounds_ok = self
            .bounds
            .iter()
            .zip(x.iter())
            .all(|(b, v)| *b == VarBound::Free || !v.is_negative());
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs = c.coeffs.dot(x);
                match c.kind {
                    RowKind::LessEq => lhs <= c.rhs,
                    RowKind::Equal => lhs == c.rhs,
                }
            })
    }

    /// Checks a Farkas vector against the sign conventions of [`LpOutcome::Infeasible`].
    pub fn is_farkas_certificate(&self, y: &RationalVector) -> bool {
        if y.dim() != self.constraints.len() {
            return false;
        }
        let n = self.num_vars();
        let mut combo = RationalVector::zeros(n);
        let mut rhs = Rational::zero();
        for (c, yi) in self.constraints.iter().zip(y.iter()) {
            if c.kind == RowKind::LessEq && yi.is_negative() {
                return false;
            }
            combo.axpy(yi, &c.coeffs);
            rhs.add_product(yi, &c.rhs);
        }
        let columns_ok = self.bounds.iter().zip(combo.iter()).all(|(b, v)| match b {
            VarBound::Free => v.is_zero(),
            VarBound::NonNegative => !v.is_negative(),
        });
        columns_ok && rhs.is_negative()
    }

    /// Whether `ray` is a recession direction with strictly improving objective.
    pub fn is_improving_ray(&self, ray: &RationalVector) -> bool {
        if ray.dim() != self.num_vars() {
            return false;
        }
        let bounds_ok = self
            .bounds
            .iter()
            .zip(ray.iter())
            .all(|(b, v)| *b == VarBound::Free || !v.is_negative());
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs = c.coeffs.dot(ray);
                match c.kind {
                    RowKind::LessEq => !lhs.is_positive(),
                    RowKind::Equal => lhs.is_zero(),
                }
            })
            && self.objective.dot(ray).is_positive()
    }
}

impl LpOutcome {
    /// Re-checks the certificate against `lp` with exact arithmetic.
    pub fn verify(&self, lp: &LinearProgram) -> bool {
        match self {
            LpOutcome::Optimal { point, value } => lp.is_feasible(point) && lp.objective.dot(point) == *value,
            LpOutcome::Infeasible { certificate } => lp.is_farkas_certificate(certificate),
            LpOutcome::Unbounded { point, ray } => lp.is_feasible(point) && lp.is_improving_ray(ray),
        }
    }

    pub fn optimal_value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn optimal_point(&self) -> Option<&RationalVector> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Column {
    Plus(usize),
    Minus(usize),
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    // reduced costs c_B B⁻¹ A_j − c_j and current objective value
    cost_row: Vec<Rational>,
    value: Rational,
    basis: Vec<usize>,
    columns: Vec<Column>,
}

enum Step {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn pivot(&mut self, p: usize, q: usize) {
        let inv = self.rows[p][q].recip();
        if !inv.is_one() {
            for x in self.rows[p].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
            self.rhs[p] *= &inv;
        }
        let support: Vec<usize> = (0..self.columns.len())
            .filter(|&j| !self.rows[p][j].is_zero())
            .collect();
        let (pivot_row, pivot_rhs) = (self.rows[p].clone(), self.rhs[p].clone());
        for i in 0..self.rows.len() {
            if i == p || self.rows[i][q].is_zero() {
                continue;
            }
            let factor = -&self.rows[i][q];
            let row = &mut self.rows[i];
            for &j in &support {
                row[j].add_product(&factor, &pivot_row[j]);
            }
            self.rhs[i].add_product(&factor, &pivot_rhs);
        }
        if !self.cost_row[q].is_zero() {
            let factor = -&self.cost_row[q];
            for &j in &support {
                self.cost_row[j].add_product(&factor, &pivot_row[j]);
            }
            self.value.add_product(&factor, &pivot_rhs);
        }
        self.basis[p] = q;
    }

    fn reset_costs(&mut self, costs: &[Rational]) {
        let n = self.columns.len();
        let mut row: Vec<Rational> = costs.iter().map(|c| -c).collect();
        let mut value = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (j, r) in row.iter_mut().enumerate().take(n) {
                r.add_product(cb, &self.rows[i][j]);
            }
            value.add_product(cb, &self.rhs[i]);
        }
        self.cost_row = row;
        self.value = value;
    }

    /// Bland's rule: lowest-index improving column enters; ratio ties leave by
    /// lowest basic index.
    fn run(&mut self, may_enter: impl Fn(usize) -> bool) -> Step {
        loop {
            let Some(q) = (0..self.columns.len()).find(|&j| may_enter(j) && self.cost_row[j].is_negative()) else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((p, _)) => self.pivot(p, q),
                None => return Step::Unbounded(q),
            }
        }
    }

    fn primal_point(&self, n: usize) -> RationalVector {
        let mut x = RationalVector::zeros(n);
        for (i, &b) in self.basis.iter().enumerate() {
            match self.columns[b] {
                Column::Plus(j) => x[j] += &self.rhs[i],
                Column::Minus(j) => x[j] -= &self.rhs[i],
                _ => {}
            }
        }
        x
    }
}

/// Solves `lp` exactly. Deterministic for a fixed input.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.check_dimensions()?;
    let n = lp.num_vars();
    let m = lp.constraints.len();

    let mut columns = Vec::new();
    for (j, b) in lp.bounds.iter().enumerate() {
        columns.push(Column::Plus(j));
        if *b == VarBound::Free {
            columns.push(Column::Minus(j));
        }
    }
    let n_struct = columns.len();

    // rows are negated when b < 0 so the right-hand side starts nonnegative
    let signs: Vec<bool> = lp.constraints.iter().map(|c| c.rhs.is_negative()).collect();
    let mut slack_of = vec![None; m];
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.kind == RowKind::LessEq {
            slack_of[i] = Some(columns.len());
            columns.push(Column::Slack);
        }
    }
    let mut initial = vec![0usize; m];
    for i in 0..m {
        match slack_of[i] {
            Some(s) if !signs[i] => initial[i] = s,
            _ => {
                initial[i] = columns.len();
                columns.push(Column::Artificial);
            }
        }
    }
    let ncols = columns.len();

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let flip = signs[i];
        let signed = |x: &Rational| if flip { -x } else { x.clone() };
        let mut row = vec![Rational::zero(); ncols];
        for (k, col) in columns[..n_struct].iter().enumerate() {
            row[k] = match col {
                Column::Plus(j) => signed(&c.coeffs[*j]),
                Column::Minus(j) => -signed(&c.coeffs[*j]),
                _ => unreachable!(),
            };
        }
        if let Some(s) = slack_of[i] {
            row[s] = if flip { -Rational::one() } else { Rational::one() };
        }
        row[initial[i]] = Rational::one();
        rows.push(row);
        rhs.push(signed(&c.rhs));
    }

    let mut tab = Tableau {
        rows,
        rhs,
        cost_row: Vec::new(),
        value: Rational::zero(),
        basis: initial.clone(),
        columns,
    };

    let is_artificial = |j: usize, cols: &[Column]| cols[j] == Column::Artificial;
    if tab.columns.contains(&Column::Artificial) {
        let phase1: Vec<Rational> = tab
            .columns
            .iter()
            .map(|c| if *c == Column::Artificial { -Rational::one() } else { Rational::zero() })
            .collect();
        tab.reset_costs(&phase1);
        match tab.run(|_| true) {
            Step::Optimal => {}
            Step::Unbounded(_) => unreachable!("phase one is bounded by zero"),
        }
        if tab.value.is_negative() {
            // duals y' = c_B B⁻¹; column initial[i] of the tableau is B⁻¹ eᵢ
            let certificate = (0..m)
                .map(|i| {
                    let mut y = Rational::zero();
                    for (k, &b) in tab.basis.iter().enumerate() {
                        y.add_product(&phase1[b], &tab.rows[k][initial[i]]);
                    }
                    if signs[i] {
                        -y
                    } else {
                        y
                    }
                })
                .collect();
            return Ok(LpOutcome::Infeasible { certificate });
        }
        for i in 0..m {
            if is_artificial(tab.basis[i], &tab.columns) {
                if let Some(j) = (0..ncols).find(|&j| !is_artificial(j, &tab.columns) && !tab.rows[i][j].is_zero()) {
                    tab.pivot(i, j);
                }
            }
        }
    }

    let costs: Vec<Rational> = tab
        .columns
        .iter()
        .map(|c| match c {
            Column::Plus(j) => lp.objective[*j].clone(),
            Column::Minus(j) => -&lp.objective[*j],
            _ => Rational::zero(),
        })
        .collect();
    tab.reset_costs(&costs);
    let columns = tab.columns.clone();
    match tab.run(|j| columns[j] != Column::Artificial) {
        Step::Optimal => {
            let point = tab.primal_point(n);
            let value = lp.objective.dot(&point);
            Ok(LpOutcome::Optimal { point, value })
        }
        Step::Unbounded(q) => {
            let point = tab.primal_point(n);
            let mut ray = RationalVector::zeros(n);
            let mut add = |col: Column, amount: Rational| match col {
                Column::Plus(j) => ray[j] += &amount,
                Column::Minus(j) => ray[j] -= &amount,
                _ => {}
            };
            add(tab.columns[q], Rational::one());
            for (i, &b) in tab.basis.iter().enumerate() {
                if !tab.rows[i][q].is_zero() {
                    add(tab.columns[b], -&tab.rows[i][q]);
                }
            }
            Ok(LpOutcome::Unbounded { point, ray })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn v(x: &[i64]) -> RationalVector {
        RationalVector::from_integers(x)
    }

    #[test]
    fn single_binding_constraint() {
        let mut lp = LinearProgram::maximize(v(&[1]));
        lp.add_le(v(&[1]), q(3));
        let out = solve_lp(&lp).unwrap();
        assert_eq!(
            out,
            LpOutcome::Optimal {
                point: v(&[3]),
                value: q(3)
            }
        );
        assert!(out.verify(&lp));
    }

    #[test]
    fn contradictory_bounds_give_farkas_vector() {
        let mut lp = LinearProgram::maximize(v(&[1]));
        lp.add_le(v(&[1]), q(-1)).add_le(v(&[-1]), q(0));
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out, LpOutcome::Infeasible { certificate: v(&[1, 1]) });
        assert!(out.verify(&lp));
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::maximize(v(&[1]));
        lp.add_le(v(&[-1]), q(0));
        let out = solve_lp(&lp).unwrap();
        match &out {
            LpOutcome::Unbounded { ray, .. } => assert_eq!(*ray, v(&[1])),
            other => panic!("expected unbounded, got {other:?}"),
        }
        assert!(out.verify(&lp));
    }

    #[test]
    fn dimension_errors() {
        let mut lp = LinearProgram::maximize(v(&[1, 1]));
        lp.add_le(v(&[1]), q(1));
        assert!(matches!(solve_lp(&lp), Err(LpError::RowLength { row: 0, .. })));
        let mut lp = LinearProgram::maximize(v(&[1]));
        lp.bounds.push(VarBound::Free);
        assert!(matches!(solve_lp(&lp), Err(LpError::BoundCount { .. })));
    }

    #[test]
    fn equality_and_nonnegativity() {
        // max x + y  s.t. x + 2y = 4, x - y <= 1, x, y >= 0  -> x = 2, y = 1
        let mut lp = LinearProgram::maximize(v(&[1, 1]));
        lp.add_eq(v(&[1, 2]), q(4)).add_le(v(&[1, -1]), q(1));
        lp.set_nonnegative(0).set_nonnegative(1);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.optimal_point(), Some(&v(&[2, 1])));
        assert!(out.verify(&lp));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::maximize(v(&[1, 0]));
        lp.add_eq(v(&[1, 1]), q(2))
            .add_eq(v(&[2, 2]), q(4))
            .add_le(v(&[1, 0]), q(5))
            .add_ge(v(&[0, 1]), q(-10));
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.optimal_value(), Some(&q(5)));
        assert!(out.verify(&lp));
    }

    #[test]
    fn infeasible_equalities_with_nonnegative_vars() {
        // x + y = -1 with x, y >= 0
        let mut lp = LinearProgram::maximize(v(&[0, 0]));
        lp.add_eq(v(&[1, 1]), q(-1));
        lp.set_nonnegative(0).set_nonnegative(1);
        let out = solve_lp(&lp).unwrap();
        assert!(matches!(out, LpOutcome::Infeasible { .. }));
        assert!(out.verify(&lp));
    }

    #[test]
    fn empty_program_is_optimal_at_origin() {
        let lp = LinearProgram::maximize(v(&[0, 0]));
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.optimal_value(), Some(&q(0)));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let r = |n, d| Rational::new(n, d);
        let mut lp = LinearProgram::maximize(RationalVector::new(vec![r(3, 4), q(-150), r(1, 50), q(-6)]));
        lp.add_le(RationalVector::new(vec![r(1, 4), q(-60), r(-1, 25), q(9)]), q(0))
            .add_le(RationalVector::new(vec![r(1, 2), q(-90), r(-1, 50), q(3)]), q(0))
            .add_le(v(&[0, 0, 1, 0]), q(1));
        for j in 0..4 {
            lp.set_nonnegative(j);
        }
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.optimal_value(), Some(&r(1, 20)));
        assert!(out.verify(&lp));
    }
}
