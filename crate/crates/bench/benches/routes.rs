use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use noarb_bench::martingale_tree;
use noarb_core::emm::build_emm;
use noarb_core::exact::{solve_lp, LinearProgram};
use noarb_core::verify::{beta_exact, equivalence_report, oracle_arbitrage_lp};
use noarb_core::{Rational, RationalVector};

/// max Σ xⱼ over a dense box-and-simplex polytope in n variables.
fn dense_lp(n: usize) -> LinearProgram {
    let mut lp = LinearProgram::maximize((0..n).map(|j| Rational::from(1 + (j % 3) as i64)).collect());
    for j in 0..n {
        lp.set_nonnegative(j);
        lp.add_le(RationalVector::unit(n, j), Rational::new(j as i64 + 2, 3));
    }
    for i in 0..n {
        let row: RationalVector = (0..n).map(|j| Rational::from(((i * 7 + j * 3) % 5) as i64 - 1)).collect();
        lp.add_le(row, Rational::from(n as i64));
    }
    lp
}

fn bench_lp(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_lp");
    for n in [4, 8, 16] {
        let lp = dense_lp(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &lp, |b, lp| b.iter(|| solve_lp(black_box(lp))));
    }
    g.finish();
}

fn bench_routes(c: &mut Criterion) {
    let shapes = [(1, 2, 2), (2, 3, 3), (3, 4, 3)];
    let mut g = c.benchmark_group("routes");
    g.sample_size(20);
    for (d, n, b) in shapes {
        let tree = martingale_tree(d, n, b, 1);
        let id = format!("d{d}_n{n}_b{b}");
        g.bench_with_input(BenchmarkId::new("build_emm", &id), &tree, |bch, t| bch.iter(|| build_emm(black_box(t))));
        g.bench_with_input(BenchmarkId::new("arbitrage_lp", &id), &tree, |bch, t| {
            bch.iter(|| oracle_arbitrage_lp(black_box(t)))
        });
        g.bench_with_input(BenchmarkId::new("beta", &id), &tree, |bch, t| bch.iter(|| beta_exact(black_box(t))));
        g.bench_with_input(BenchmarkId::new("equivalence_report", &id), &tree, |bch, t| {
            bch.iter(|| equivalence_report(black_box(t)))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_lp, bench_routes);
criterion_main!(benches);
