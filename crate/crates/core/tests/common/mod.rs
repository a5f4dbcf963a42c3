//! Test-only oracles. Everything here uses `num_rational::BigRational`
//! directly so it shares no arithmetic or elimination code with the crate.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noarb_core::exact::{LinearProgram, RowKind, VarBound};
use noarb_core::model::{LeafDensity, ScenarioTree};
use noarb_core::{Rational, RationalVector};

pub fn big(r: &Rational) -> BigRational {
    BigRational::new(r.numer(), r.denom())
}

pub fn from_big(b: &BigRational) -> Rational {
    Rational::from_bigint_ratio(b.numer().clone(), b.denom().clone())
}

fn bi(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Solves the square system `m·x = rhs`; `None` if singular.
fn solve_square(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        rhs.swap(col, p);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                let pivot_row = m[col].clone();
                for (x, p) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &f * p;
                }
                let t = &f * &rhs[col];
                rhs[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// A nonzero vector spanning the null space of `m` (rows × n), if that null
/// space is exactly one-dimensional.
fn null_line(m: &[Vec<BigRational>], n: usize) -> Option<Vec<BigRational>> {
    let mut rows: Vec<Vec<BigRational>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = BigRational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot_row = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if n - pivots.len() != 1 {
        return None;
    }
    let free = (0..n).find(|c| !pivots.contains(c)).unwrap();
    let mut v = vec![BigRational::zero(); n];
    v[free] = BigRational::one();
    for (i, &pc) in pivots.iter().enumerate() {
        v[pc] = -rows[i][free].clone();
    }
    Some(v)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum BruteOutcome {
    Infeasible,
    Unbounded,
    Optimal(BigRational),
}

/// Brute-force LP oracle for programs whose variables are all nonnegative,
/// so a nonempty feasible region always has a vertex.
///
/// Vertices come from every choice of `n` linearly independent active rows
/// (equalities always active); unboundedness is decided by the extreme rays
/// of the recession cone, each cut out by `n − 1` active homogeneous rows.
pub fn brute_force_lp(lp: &LinearProgram) -> BruteOutcome {
    let n = lp.objective.dim();
    assert!(lp.bounds.iter().all(|b| *b == VarBound::NonNegative));
    // every row as (a, b, is_equality), bounds as −x_j ≤ 0
    let mut rows: Vec<(Vec<BigRational>, BigRational, bool)> = lp
        .constraints
        .iter()
        .map(|c| (c.coeffs.iter().map(big).collect(), big(&c.rhs), c.kind == RowKind::Equal))
        .collect();
    for j in 0..n {
        let mut a = vec![BigRational::zero(); n];
        a[j] = bi(-1);
        rows.push((a, BigRational::zero(), false));
    }
    let c: Vec<BigRational> = lp.objective.iter().map(big).collect();
    let dot = |a: &[BigRational], x: &[BigRational]| a.iter().zip(x).fold(BigRational::zero(), |s, (p, q)| s + p * q);
    let feasible = |x: &[BigRational]| {
        rows.iter().all(|(a, b, eq)| {
            let v = dot(a, x);
            if *eq {
                v == *b
            } else {
                v <= *b
            }
        })
    };
    let eqs: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].2).collect();
    let ineqs: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].2).collect();

    let mut best: Option<BigRational> = None;
    if eqs.len() <= n {
        for pick in combinations(ineqs.len(), n - eqs.len()) {
            let active: Vec<usize> = eqs.iter().copied().chain(pick.iter().map(|&i| ineqs[i])).collect();
            let m = active.iter().map(|&i| rows[i].0.clone()).collect();
            let rhs = active.iter().map(|&i| rows[i].1.clone()).collect();
            if let Some(x) = solve_square(m, rhs) {
                if feasible(&x) {
                    let v = dot(&c, &x);
                    if best.as_ref().is_none_or(|b| v > *b) {
                        best = Some(v);
                    }
                }
            }
        }
    }
    let Some(best) = best else {
        return BruteOutcome::Infeasible;
    };

    let in_cone = |d: &[BigRational]| {
        rows.iter().all(|(a, _, eq)| {
            let v = dot(a, d);
            if *eq {
                v.is_zero()
            } else {
                !v.is_positive()
            }
        })
    };
    if eqs.len() < n {
        for pick in combinations(ineqs.len(), n - 1 - eqs.len()) {
            let active: Vec<Vec<BigRational>> = eqs
                .iter()
                .copied()
                .chain(pick.iter().map(|&i| ineqs[i]))
                .map(|i| rows[i].0.clone())
                .collect();
            if let Some(d) = null_line(&active, n) {
                for sign in [1i64, -1] {
                    let d: Vec<BigRational> = d.iter().map(|x| x * bi(sign)).collect();
                    if in_cone(&d) && dot(&c, &d).is_positive() {
                        return BruteOutcome::Unbounded;
                    }
                }
            }
        }
    }
    BruteOutcome::Optimal(best)
}

/// A random LP with 1..=4 nonnegative variables and 1..=6 rows, small integer data.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(1..=4usize);
    let m = rng.gen_range(1..=6usize);
    let ivec = |rng: &mut ChaCha8Rng, len: usize| -> RationalVector {
        (0..len).map(|_| Rational::from(rng.gen_range(-4i64..=4))).collect()
    };
    let mut lp = LinearProgram::maximize(ivec(rng, n));
    for j in 0..n {
        lp.set_nonnegative(j);
    }
    let mut eq_budget = if n > 1 { 1 } else { 0 };
    for _ in 0..m {
        let coeffs = ivec(rng, n);
        let rhs = Rational::from(rng.gen_range(-3i64..=8));
        if eq_budget > 0 && rng.gen_bool(0.2) {
            eq_budget -= 1;
            lp.add_eq(coeffs, rhs);
        } else {
            lp.add_le(coeffs, rhs);
        }
    }
    lp
}

/// Up to 6 random points with integer coordinates in [-2, 2] and dimension 1..=3.
pub fn random_atoms(rng: &mut ChaCha8Rng) -> Vec<RationalVector> {
    let d = rng.gen_range(1..=3usize);
    let k = rng.gen_range(1..=6usize);
    let mut out: Vec<RationalVector> = Vec::new();
    while out.len() < k {
        let x: RationalVector = (0..d).map(|_| Rational::from(rng.gen_range(-2i64..=2))).collect();
        if !out.contains(&x) {
            out.push(x);
        }
        if d == 1 && out.len() == 5 {
            break;
        }
    }
    out
}

/// A strictly positive density proportional to random integer weights 1..=16.
pub fn random_density(tree: &ScenarioTree, seed: u64) -> LeafDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<(noarb_core::NodeId, Rational, Rational)> = tree
        .leaves()
        .map(|l| (l.id, Rational::from(rng.gen_range(1i64..=16)), l.mass.clone()))
        .collect();
    let total: Rational = weights.iter().map(|(_, w, p)| w * p).sum();
    LeafDensity(weights.into_iter().map(|(id, w, _)| (id, &w / &total)).collect())
}

/// Indices of a maximal linearly independent subset, chosen greedily.
fn independent_subset(vs: &[Vec<BigRational>]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut reduced: Vec<(usize, Vec<BigRational>)> = Vec::new();
    for (i, v) in vs.iter().enumerate() {
        let mut w = v.clone();
        for (p, r) in &reduced {
            if !w[*p].is_zero() {
                let f = &w[*p] / &r[*p];
                for k in 0..w.len() {
                    let t = &f * &r[k];
                    w[k] -= t;
                }
            }
        }
        if let Some(p) = w.iter().position(|x| !x.is_zero()) {
            reduced.push((p, w));
            kept.push(i);
        }
    }
    kept
}

/// Whether the origin is in the relative interior of `conv(atoms)`.
///
/// In coordinates of a basis of the span the cone `{h : (h, xᵢ) ≥ 0}` is
/// pointed, so it is nonzero iff it has an extreme ray, and every extreme ray
/// is cut out by `r − 1` active constraints.
pub fn brute_force_in_ri(atoms: &[RationalVector]) -> bool {
    let xs: Vec<Vec<BigRational>> = atoms.iter().map(|x| x.iter().map(big).collect()).collect();
    let basis: Vec<Vec<BigRational>> = independent_subset(&xs).into_iter().map(|i| xs[i].clone()).collect();
    let r = basis.len();
    if r == 0 {
        return true;
    }
    let dot = |a: &[BigRational], b: &[BigRational]| a.iter().zip(b).fold(BigRational::zero(), |s, (p, q)| s + p * q);
    let rows: Vec<Vec<BigRational>> = xs.iter().map(|x| basis.iter().map(|b| dot(b, x)).collect()).collect();
    for pick in combinations(rows.len(), r - 1) {
        let active: Vec<Vec<BigRational>> = pick.iter().map(|&i| rows[i].clone()).collect();
        if let Some(d) = null_line(&active, r) {
            for sign in [1i64, -1] {
                let d: Vec<BigRational> = d.iter().map(|x| x * bi(sign)).collect();
                let vals: Vec<BigRational> = rows.iter().map(|a| dot(a, &d)).collect();
                if vals.iter().all(|v| !v.is_negative()) && vals.iter().any(|v| v.is_positive()) {
                    return false;
                }
            }
        }
    }
    true
}

/// A random tree drawn from the generator with small parameters.
pub fn small_tree(seed: u64) -> ScenarioTree {
    use noarb_core::verify::{random_tree, GeneratorMode, GeneratorParams};
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let params = GeneratorParams {
        d: rng.gen_range(1..=3),
        horizon: rng.gen_range(1..=3),
        max_branching: rng.gen_range(1..=4),
        value_range: rng.gen_range(1..=3),
        grid: [1, 2, 4][rng.gen_range(0..3)],
        mode: if rng.gen_bool(0.5) { GeneratorMode::Generic } else { GeneratorMode::MartingalePerturbed },
    };
    random_tree(&params, seed).unwrap()
}
