//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! hard criterion fails. Positional arguments filter criteria by substring;
//! `FIAM_FULL_SCALE=1` runs the near-linearity ladder at full size.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use fiam::baselines::{select_baseline, BaselineKind};
use fiam::config::Tolerances;
use fiam::exact::{DensePinv, ExactScorer};
use fiam::fast::{farthest, fast_greedy};
use fiam::graph::{Graph, GroupAssignment, Hyperparams, Node};
use fiam::greedy::{
    brute_force_optimum_with, exact_greedy, find_nonsupermodular_counterexample, gradient_greedy,
    EdgeSelection, Target, COUNTEREXAMPLE_ATTEMPTS,
};
use fiam::hull::{approx_ch, diameter_sq, PointSet};
use fiam::netgen::{generate_bah, BAhParams};
use fiam::sketch::{app_diag, build_sketch, jl_matrix, jl_rows, Solver, SolverConfig};
use fiam::stats::{eta_theta, pearson};
use fiam::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestRunner};
use rand::Rng;

// Pinned tolerances.
const IDENTITY_REL: f64 = 1e-8;
const SM_ABS: f64 = 1e-8;
const GREEDY_RATIO: f64 = 1.05;
const GREEDY_MIN_OK: usize = 95;
const PEARSON_MIN: f64 = 0.9;
const SOLVER_DELTA: f64 = 1e-6;
const APPDIAG_EPS: f64 = 0.2;
const APPDIAG_MIN_OK: usize = 19;
const JL_EPS: f64 = 0.5;
const JL_POINTS: usize = 50;
const JL_MIN_OK: usize = 98;
const HULL_EPS: f64 = 0.2;
const FARTHEST_EPS: f64 = 0.3;
const FARTHEST_MIN_FRACTION: f64 = 0.9;
const FAST_EPS: f64 = 0.3;
const FAST_MAX_REL: f64 = 0.06;
const GROWTH_PER_DOUBLING: f64 = 3.0;
const WITNESS_TRIALS: usize = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget_secs: Option<f64>,
    /// Reported but never fails the run.
    soft: bool,
    run: fn() -> Outcome,
}

fn bah(n: usize, seed: u64) -> (Graph, GroupAssignment) {
    generate_bah(&BAhParams::new(n, 0.3, 0.7, seed)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn c1_oracle_identities() -> Outcome {
    let mut r = common::rng(101);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..200 {
        let n = r.random_range(3..=60);
        let density = r.random_range(0.0..0.2);
        let g = common::random_connected(&mut r, n, density);
        let p = DensePinv::new(&g).unwrap();
        let tr = p.trace();
        let pair = |u, v| p.pairwise_resistance(u, v).unwrap();
        let mut kf = 0.0;
        let mut check = |x: f64, y: f64| {
            let e = rel(x, y);
            worst = worst.max(e);
            if e > IDENTITY_REL {
                bad += 1;
            }
        };
        for v in 0..n {
            let s: f64 = (0..n).filter(|&u| u != v).map(|u| pair(u, v)).sum();
            check(p.node_resistance(v), s);
        }
        for u in 0..n {
            for v in u + 1..n {
                kf += pair(u, v);
            }
        }
        check(p.kirchhoff_index(), kf);
        let all: Vec<Node> = (0..n).collect();
        check(p.group_access(&all).unwrap(), 2.0 * tr);
        // Pairwise values against grounded-Laplacian solves.
        for _ in 0..3 {
            let u = r.random_range(0..n);
            let v = (u + r.random_range(1..n)) % n;
            check(pair(u, v), common::grounded_resistance(&g, u, v));
        }
        let nf = n as f64;
        if tr > nf * (nf * nf - 1.0) / 6.0 * (1.0 + IDENTITY_REL) {
            bad += 1;
        }
    }
    Outcome::new(
        bad == 0,
        format!("violations {bad}, worst relative error {worst:.2e}"),
    )
}

fn c2_sherman_morrison() -> Outcome {
    let mut r = common::rng(202);
    let mut worst: f64 = 0.0;
    let mut updates = 0;
    while updates < 50 {
        let n = r.random_range(8..=60);
        let g = common::random_connected(&mut r, n, 0.05);
        let mut p = DensePinv::new(&g).unwrap();
        for _ in 0..10 {
            let cands: Vec<_> = p.graph().non_edges().collect();
            let (u, v) = cands[r.random_range(0..cands.len())];
            p = p.with_edge(u, v).unwrap();
            let fresh = common::pinv(p.graph());
            worst = worst.max((p.matrix() - fresh).amax());
            updates += 1;
        }
    }
    Outcome::new(
        worst <= SM_ABS,
        format!("{updates} updates, max entry diff {worst:.2e}"),
    )
}

// NaN counts as a violation.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn strictly_decreasing(sel: &EdgeSelection) -> bool {
    let mut prev = sel.initial.f;
    for r in &sel.records {
        if !(r.f < prev) {
            return false;
        }
        prev = r.f;
    }
    true
}

fn c3_monotonicity() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        PtConfig {
            cases: 48,
            failure_persistence: None,
            ..PtConfig::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    let strategy = (4usize..=10, 0.0f64..0.4, any::<u64>(), 1usize..=3);
    let checked = std::cell::Cell::new(0usize);
    let violations = std::cell::RefCell::new(Vec::<String>::new());
    let result = runner.run(&strategy, |(n, p, seed, k)| {
        let mut r = common::rng(seed);
        let g = common::random_connected(&mut r, n, p);
        let ga = common::random_groups(&mut r, n);
        let k = k.min(g.non_edge_count());
        if k == 0 {
            return Ok(());
        }
        for lambda in [0.0, 0.5, 1.0] {
            let hp = Hyperparams::new(lambda, k).with_seed(seed);
            let mut runs: Vec<(String, fiam::Result<EdgeSelection>)> = vec![
                ("exact".into(), exact_greedy(&g, &ga, &hp)),
                ("gradient".into(), gradient_greedy(&g, &ga, &hp)),
                ("fast".into(), fast_greedy(&g, &ga, &hp)),
            ];
            for kind in BaselineKind::ALL {
                runs.push((kind.to_string(), select_baseline(&g, &ga, kind, &hp)));
            }
            for (name, res) in runs {
                match res {
                    Ok(sel) => {
                        checked.set(checked.get() + 1);
                        if !strictly_decreasing(&sel) {
                            violations
                                .borrow_mut()
                                .push(format!("{name} n={n} seed={seed} lambda={lambda}"));
                        }
                    }
                    Err(Error::InsufficientCandidates { .. }) => {}
                    Err(e) => panic!("{name} failed: {e}"),
                }
            }
        }
        prop_assert!(violations.borrow().is_empty(), "{:?}", violations.borrow());
        Ok(())
    });
    let violations = violations.into_inner();
    Outcome::new(
        result.is_ok() && violations.is_empty(),
        format!(
            "{} runs, {} violations {:?}",
            checked.get(),
            violations.len(),
            violations.first()
        ),
    )
}

fn c4_greedy_vs_optimum() -> Outcome {
    let tol = Tolerances {
        brute_force_cap: u128::MAX,
        ..Tolerances::default()
    };
    let sizes = std::iter::repeat_n(10, 34)
        .chain(std::iter::repeat_n(20, 33))
        .chain(std::iter::repeat_n(30, 33));
    let mut ratios = Vec::with_capacity(100);
    for (i, n) in sizes.enumerate() {
        let (g, ga) = bah(n, 4000 + i as u64);
        let hp = Hyperparams::new(0.5, 4);
        let greedy = exact_greedy(&g, &ga, &hp)
            .unwrap()
            .final_metrics()
            .unwrap()
            .f;
        let opt = brute_force_optimum_with(&g, &ga, &hp, Target::F, &tol)
            .unwrap()
            .final_metrics()
            .unwrap()
            .f;
        ratios.push((n, greedy / opt));
    }
    let ok = ratios.iter().filter(|(_, r)| *r <= GREEDY_RATIO).count();
    let worst = ratios.iter().map(|x| x.1).fold(0.0, f64::max);
    let list: Vec<String> = ratios.iter().map(|(n, r)| format!("{n}:{r:.5}")).collect();
    println!("  criterion 4 ratios: {}", list.join(" "));
    Outcome::new(
        ok >= GREEDY_MIN_OK,
        format!("{ok}/100 within {GREEDY_RATIO}, worst ratio {worst:.5}"),
    )
}

fn c5_surrogate_fidelity() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for lambda in [0.0, 0.5, 1.0] {
        for seed in 0..10 {
            let (g, ga) = bah(100, 500 + seed);
            let hp = Hyperparams::new(lambda, 1);
            let pinv = DensePinv::new(&g).unwrap();
            let sc = ExactScorer::new(&pinv, &ga, &hp.objective()).unwrap();
            let coefs = sc.coefficients();
            let (xs, ys): (Vec<f64>, Vec<f64>) = g
                .non_edges()
                .map(|(u, v)| (sc.delta(u, v), sc.delta_bar_with(&coefs, u, v)))
                .unzip();
            let r = pearson(&xs, &ys).unwrap();
            worst = worst.min(r);
            if r < PEARSON_MIN {
                failures += 1;
            }
        }
    }
    Outcome::new(
        failures == 0,
        format!("30 runs, {failures} below {PEARSON_MIN}, min pearson {worst:.4}"),
    )
}

fn l_norm(l: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(l * x)).max(0.0).sqrt()
}

fn c6_solver_contract() -> Outcome {
    let mut r = common::rng(606);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..100 {
        let n = r.random_range(2..=300);
        let g = if r.random_bool(0.5) {
            let density = r.random_range(0.0..(8.0 / n as f64).min(1.0));
            common::random_connected(&mut r, n, density)
        } else if n > 6 {
            bah(n, r.random()).0
        } else {
            common::path(n)
        };
        let b: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let solver = Solver::new(&g, SolverConfig::with_delta(SOLVER_DELTA).strict()).unwrap();
        let x = DVector::from_vec(solver.solve(&b).unwrap());
        let l = common::laplacian(&g);
        let exact = common::pinv(&g) * DVector::from_vec(b);
        let ratio = l_norm(&l, &(&x - &exact)) / l_norm(&l, &exact);
        worst = worst.max(ratio);
        if ratio > SOLVER_DELTA {
            bad += 1;
        }
    }
    Outcome::new(
        bad == 0,
        format!("{bad} violations, worst ratio {worst:.2e} (delta {SOLVER_DELTA:e})"),
    )
}

fn c7_appdiag_contract() -> Outcome {
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let n = 100 + 10 * seed as usize;
        let (g, _) = bah(n, 700 + seed);
        let d = common::pinv(&g).diagonal();
        let est = app_diag(&g, APPDIAG_EPS, seed).unwrap();
        let e = est
            .iter()
            .zip(d.iter())
            .map(|(a, b)| rel(*a, *b))
            .fold(0.0, f64::max);
        worst = worst.max(e);
        if e <= APPDIAG_EPS {
            ok += 1;
        }
    }
    Outcome::new(
        ok >= APPDIAG_MIN_OK,
        format!("{ok}/20 runs fully within 1 +- {APPDIAG_EPS}, worst element error {worst:.3}"),
    )
}

fn c8_jl_contract() -> Outcome {
    let q = jl_rows(JL_POINTS, JL_EPS);
    let d = 400;
    let mut ok = 0;
    let mut r = common::rng(808);
    for trial in 0..100u64 {
        let x = DMatrix::from_fn(d, JL_POINTS, |_, _| r.random_range(-1.0..1.0));
        let q_mat = jl_matrix(q, d, trial);
        let y = &q_mat * &x;
        let mut all = true;
        'pairs: for i in 0..JL_POINTS {
            for j in i + 1..JL_POINTS {
                let a = (x.column(i) - x.column(j)).norm_squared();
                let b = (y.column(i) - y.column(j)).norm_squared();
                if b < (1.0 - JL_EPS) * a || b > (1.0 + JL_EPS) * a {
                    all = false;
                    break 'pairs;
                }
            }
        }
        if all {
            ok += 1;
        }
    }
    Outcome::new(
        ok >= JL_MIN_OK,
        format!("q={q}, {ok}/100 trials preserve all pairs"),
    )
}

fn hull_ratio(p: &PointSet) -> f64 {
    let h = approx_ch(p, HULL_EPS / 25.0).unwrap();
    let (_, full) = diameter_sq(p, None).unwrap();
    let (_, sub) = if h.len() >= 2 {
        diameter_sq(p, Some(&h.indices)).unwrap()
    } else {
        ((0, 0), 0.0)
    };
    if full == 0.0 {
        1.0
    } else {
        sub / full
    }
}

fn c9_hull_diameter() -> Outcome {
    let mut r = common::rng(909);
    let mut bad = 0;
    let mut worst: f64 = 1.0;
    let mut cases = 0;
    let mut record = |ratio: f64| {
        cases += 1;
        worst = worst.min(ratio);
        if !(1.0 - HULL_EPS / 5.0..=1.0 + HULL_EPS / 5.0).contains(&ratio) {
            bad += 1;
        }
    };
    for i in 0..200 {
        let n = r.random_range(2..=500);
        let d = r.random_range(1..=64);
        let scale: Vec<f64> = (0..d).map(|_| r.random_range(0.1..3.0)).collect();
        let data: Vec<f64> = (0..n * d)
            .map(|k| {
                let u: f64 = r.random_range(-1.0..1.0);
                match i % 3 {
                    0 => u * scale[k % d],
                    1 => u.powi(3) * scale[k % d],
                    _ => u.signum() * scale[k % d] + 0.05 * u,
                }
            })
            .collect();
        record(hull_ratio(&PointSet::new(d, data).unwrap()));
    }
    for seed in 0..5 {
        let (g, ga) = bah(150 + 50 * seed as usize, 900 + seed);
        let s = build_sketch(&g, &ga, 0.5, HULL_EPS, seed).unwrap();
        record(hull_ratio(&s.coordinates()));
    }
    Outcome::new(
        bad == 0,
        format!("{cases} point sets, {bad} violations, min D_hat^2 / D^2 {worst:.4}"),
    )
}

fn c10_farthest_value() -> Outcome {
    let runs = 20;
    let mut ok = 0;
    let mut log = Vec::new();
    for seed in 0..runs {
        let (g, ga) = bah(150, 1000 + seed);
        let pinv = DensePinv::new(&g).unwrap();
        let hp = Hyperparams::new(0.5, 1);
        let sc = ExactScorer::new(&pinv, &ga, &hp.objective()).unwrap();
        let coefs = sc.coefficients();
        let max_bar = g
            .non_edges()
            .map(|(u, v)| sc.delta_bar_with(&coefs, u, v))
            .fold(f64::NEG_INFINITY, f64::max);
        let res = farthest(&g, &ga, 0.5, FARTHEST_EPS, seed).unwrap();
        let ratio = res.delta_tilde_value / max_bar;
        if (1.0 - FARTHEST_EPS..=1.0 + FARTHEST_EPS).contains(&ratio) {
            ok += 1;
        } else {
            log.push(format!("seed {seed}: ratio {ratio:.4}"));
        }
    }
    for l in &log {
        println!("  criterion 10 violation: {l}");
    }
    let frac = ok as f64 / runs as f64;
    Outcome::new(
        frac >= FARTHEST_MIN_FRACTION,
        format!("{ok}/{runs} within 1 +- {FARTHEST_EPS}"),
    )
}

fn fast_vs_exact(
    g: &Graph,
    ga: &GroupAssignment,
    exact: &EdgeSelection,
    eps: f64,
    seed: u64,
) -> (f64, f64) {
    let hp = Hyperparams::new(0.5, 50).with_epsilon(eps).with_seed(seed);
    let fast = fast_greedy(g, ga, &hp).unwrap();
    eta_theta(exact, &fast).unwrap()
}

fn c11_fast_vs_exact() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let instances: Vec<(usize, u64)> = vec![(100, 1), (100, 2), (100, 3), (300, 4), (1000, 5)];
    let mut trend: Vec<[(f64, f64); 3]> = Vec::new();
    for &(n, seed) in &instances {
        let (g, ga) = bah(n, 1100 + seed);
        let hp = Hyperparams::new(0.5, 50).with_seed(seed);
        let exact = exact_greedy(&g, &ga, &hp).unwrap();
        let (eta, theta) = fast_vs_exact(&g, &ga, &exact, FAST_EPS, seed);
        pass &= eta <= FAST_MAX_REL && theta <= FAST_MAX_REL;
        parts.push(format!("n={n}: eta {eta:.4} theta {theta:.4}"));
        if n == 100 {
            let e2 = fast_vs_exact(&g, &ga, &exact, 0.2, seed);
            let e1 = fast_vs_exact(&g, &ga, &exact, 0.1, seed);
            trend.push([(eta, theta), e2, e1]);
        }
    }
    let mean = |i: usize, pick: fn(&(f64, f64)) -> f64| {
        trend.iter().map(|t| pick(&t[i])).sum::<f64>() / trend.len() as f64
    };
    let eta_t: Vec<f64> = (0..3).map(|i| mean(i, |p| p.0)).collect();
    let theta_t: Vec<f64> = (0..3).map(|i| mean(i, |p| p.1)).collect();
    let shrinks = eta_t[2] <= eta_t[0] && theta_t[2] <= theta_t[0];
    parts.push(format!(
        "mean over n=100 at eps 0.3/0.2/0.1: eta {:.4}/{:.4}/{:.4} theta {:.4}/{:.4}/{:.4}",
        eta_t[0], eta_t[1], eta_t[2], theta_t[0], theta_t[1], theta_t[2]
    ));
    println!("  criterion 11: {}", parts.join("; "));
    Outcome::new(
        pass && shrinks,
        format!(
            "bound {FAST_MAX_REL} {}, trend {}",
            if pass { "met" } else { "violated" },
            if shrinks {
                "shrinks"
            } else {
                "does not shrink"
            }
        ),
    )
}

fn c12_tradeoff_direction() -> Outcome {
    let (g, ga) = bah(500, 1212);
    let run = |lambda| {
        *exact_greedy(&g, &ga, &Hyperparams::new(lambda, 50))
            .unwrap()
            .final_metrics()
            .unwrap()
    };
    let (r0, r1) = (run(0.0), run(1.0));
    Outcome::new(
        r1.u.abs() < r0.u.abs() && r1.r >= r0.r,
        format!(
            "|U| {:.4} (lambda 0) vs {:.4} (lambda 1); R {:.4} vs {:.4}",
            r0.u.abs(),
            r1.u.abs(),
            r0.r,
            r1.r
        ),
    )
}

fn c13_near_linearity() -> Outcome {
    let full = std::env::var("FIAM_FULL_SCALE").is_ok_and(|v| v == "1");
    let sizes: [usize; 3] = if full {
        [10_000, 20_000, 40_000]
    } else {
        [1_000, 2_000, 4_000]
    };
    let mut times = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let (g, ga) = bah(n, 1300 + i as u64);
        let t0 = Instant::now();
        farthest(&g, &ga, 0.5, FAST_EPS, 13).unwrap();
        times.push(t0.elapsed().as_secs_f64());
    }
    let growth: Vec<f64> = times.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = growth.iter().all(|&x| x <= GROWTH_PER_DOUBLING);
    Outcome::new(
        pass,
        format!(
            "n {:?}{} per-iteration seconds {:.2?}, growth per doubling {:.2?}",
            sizes,
            if full { "" } else { " (scaled ladder)" },
            times,
            growth
        ),
    )
}

const _: () = assert!(COUNTEREXAMPLE_ATTEMPTS <= WITNESS_TRIALS);

fn c14_non_supermodularity() -> Outcome {
    let Some(w) = find_nonsupermodular_counterexample(14) else {
        return Outcome::new(
            false,
            format!("no witness in {COUNTEREXAMPLE_ATTEMPTS} trials"),
        );
    };
    let subset = w.b.iter().all(|e| w.c.contains(e)) && !w.c.contains(&w.e);
    let f = |set: &[(Node, Node)], extra: Option<(Node, Node)>| {
        let mut all = set.to_vec();
        all.extend(extra);
        common::objective(&w.graph.with_edges(&all).unwrap(), &w.groups, w.lambda)
    };
    let gain_b = f(&w.b, None) - f(&w.b, Some(w.e));
    let gain_c = f(&w.c, None) - f(&w.c, Some(w.e));
    let valid = subset && gain_c > gain_b;
    Outcome::new(
        valid,
        format!(
            "n={} lambda={} |B|={} |C|={}: gain on B {gain_b:.6} < gain on C {gain_c:.6}",
            w.graph.n(),
            w.lambda,
            w.b.len(),
            w.c.len()
        ),
    )
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "exact_kernel_identities",
            budget_secs: Some(60.0),
            soft: false,
            run: c1_oracle_identities,
        },
        Criterion {
            id: 2,
            name: "sherman_morrison_update",
            budget_secs: Some(30.0),
            soft: false,
            run: c2_sherman_morrison,
        },
        Criterion {
            id: 3,
            name: "monotone_objective",
            budget_secs: None,
            soft: false,
            run: c3_monotonicity,
        },
        Criterion {
            id: 4,
            name: "greedy_vs_optimum",
            budget_secs: Some(600.0),
            soft: false,
            run: c4_greedy_vs_optimum,
        },
        Criterion {
            id: 5,
            name: "surrogate_pearson",
            budget_secs: Some(300.0),
            soft: false,
            run: c5_surrogate_fidelity,
        },
        Criterion {
            id: 6,
            name: "solver_contract",
            budget_secs: None,
            soft: false,
            run: c6_solver_contract,
        },
        Criterion {
            id: 7,
            name: "app_diag_contract",
            budget_secs: None,
            soft: false,
            run: c7_appdiag_contract,
        },
        Criterion {
            id: 8,
            name: "jl_contract",
            budget_secs: None,
            soft: false,
            run: c8_jl_contract,
        },
        Criterion {
            id: 9,
            name: "hull_diameter",
            budget_secs: None,
            soft: false,
            run: c9_hull_diameter,
        },
        Criterion {
            id: 10,
            name: "farthest_value",
            budget_secs: None,
            soft: false,
            run: c10_farthest_value,
        },
        Criterion {
            id: 11,
            name: "fast_vs_exact",
            budget_secs: Some(1800.0),
            soft: false,
            run: c11_fast_vs_exact,
        },
        Criterion {
            id: 12,
            name: "tradeoff_direction",
            budget_secs: None,
            soft: false,
            run: c12_tradeoff_direction,
        },
        Criterion {
            id: 13,
            name: "near_linearity",
            budget_secs: None,
            soft: true,
            run: c13_near_linearity,
        },
        Criterion {
            id: 14,
            name: "non_supermodularity",
            budget_secs: None,
            soft: false,
            run: c14_non_supermodularity,
        },
    ];
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for c in &criteria {
            println!("criterion_{:02}_{}: test", c.id, c.name);
        }
        return;
    }
    std::panic::set_hook(Box::new(|info| eprintln!("  panic: {info}")));
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for c in &criteria {
        let label = format!("criterion_{:02}_{}", c.id, c.name);
        if !filters.is_empty() && !filters.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        let in_budget = c.budget_secs.is_none_or(|b| secs <= b);
        let pass = out.pass && in_budget;
        let status = match (pass, c.soft) {
            (true, _) => "PASS",
            (false, true) => "WARN",
            (false, false) => "FAIL",
        };
        let budget = c
            .budget_secs
            .map_or(String::new(), |b| format!(", budget {b:.0}s"));
        println!("{label}: {status} [{secs:.1}s{budget}] {}", out.detail);
        if !pass && !c.soft {
            failed.push(label);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all hard criteria passed");
    } else {
        println!("acceptance: {} failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
}
