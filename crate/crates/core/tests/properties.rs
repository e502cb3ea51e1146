mod common;

use momcomp::delay::{make_schedule, measure_overlap, verify_schedule, DelayKind};
use momcomp::linalg;
use momcomp::momentum::{
    comp_sum_aagd, comp_sum_aascd, solve_theta_sc, step_inequality_lhs, step_size, Algo, Regime,
    ScheduleParams, StepConstants, ThetaSchedule,
};
use momcomp::problem::synth::SynthTask;
use momcomp::problem::{
    make_dual_svm, make_erm, prox_step, vr_grad, Coords, Loss, NonsmoothPart, Regularizer,
    Snapshot,
};
use momcomp::runtime::{read_delay_log, write_delay_log, SpeedupReport, SpeedupRow};
use momcomp::solvers::{run_aagd, run_aascd, AagdForm, AascdForm, SolverOptions, Trace, TraceRecord};
use proptest::prelude::*;

use common::{dataset, least_squares, logistic, random_point};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn nonsmooth(dim: usize) -> impl Strategy<Value = NonsmoothPart> {
    prop_oneof![
        Just(NonsmoothPart::Zero),
        (1e-3..10.0f64).prop_map(|mu| NonsmoothPart::Ridge { mu }),
        (1e-3..5.0f64).prop_map(|weight| NonsmoothPart::L1 { weight }),
        (-3.0..0.0f64, 0.0..3.0f64).prop_map(|(lo, hi)| NonsmoothPart::Box { lo, hi }),
        (
            prop::collection::vec(-2.0..2.0f64, dim),
            0.0..3.0f64,
            prop::collection::vec(0.0..1.0f64, dim),
        )
            .prop_map(|(linear, quad, width)| {
                let lo: Vec<f64> = width.iter().map(|w| -w).collect();
                NonsmoothPart::QuadBox {
                    linear,
                    quad,
                    lo,
                    hi: width,
                }
            }),
        (1e-3..5.0f64).prop_map(|weight| NonsmoothPart::GroupNorm { weight }),
    ]
}

/// Distance from −r to ∂h(x), restricted to coordinates in `coords`.
fn subgradient_violation(h: &NonsmoothPart, x: &[f64], r: &[f64], coords: &[usize]) -> f64 {
    // −r must lie in the normal cone of [lo, hi] at x shifted by the smooth part s.
    let boxed = |xi: f64, ri: f64, lo: f64, hi: f64, s: f64| {
        // x = z + δ lands on a bound only up to rounding.
        let eps = 1e-12 * (1.0 + xi.abs());
        let t = ri + s;
        if lo == hi {
            0.0
        } else if xi <= lo + eps {
            (-t).max(0.0)
        } else if xi >= hi - eps {
            t.max(0.0)
        } else {
            t.abs()
        }
    };
    match h {
        NonsmoothPart::Zero => coords.iter().map(|&i| r[i].abs()).fold(0.0, f64::max),
        NonsmoothPart::Ridge { mu } => coords
            .iter()
            .map(|&i| (mu * x[i] + r[i]).abs())
            .fold(0.0, f64::max),
        NonsmoothPart::L1 { weight } => coords
            .iter()
            .map(|&i| {
                if x[i] == 0.0 {
                    (r[i].abs() - weight).max(0.0)
                } else {
                    (r[i] + weight * x[i].signum()).abs()
                }
            })
            .fold(0.0, f64::max),
        NonsmoothPart::Box { lo, hi } => coords
            .iter()
            .map(|&i| boxed(x[i], r[i], *lo, *hi, 0.0))
            .fold(0.0, f64::max),
        NonsmoothPart::QuadBox {
            linear,
            quad,
            lo,
            hi,
        } => coords
            .iter()
            .map(|&i| boxed(x[i], r[i], lo[i], hi[i], linear[i] + quad * x[i]))
            .fold(0.0, f64::max),
        NonsmoothPart::GroupNorm { weight } => {
            let nx = linalg::norm(x);
            if nx == 0.0 {
                (linalg::norm(r) - weight).max(0.0)
            } else {
                x.iter()
                    .zip(r)
                    .map(|(xi, ri)| (weight * xi / nx + ri).abs())
                    .fold(0.0, f64::max)
            }
        }
    }
}

fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], j: usize, eps: f64) -> f64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[j] += eps;
    b[j] -= eps;
    (f(&a) - f(&b)) / (2.0 * eps)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    linalg::norm(&linalg::sub(a, b)) / linalg::norm(b).max(1.0)
}

fn loss_problem(which: usize, seed: u64) -> momcomp::problem::CompositeProblem {
    let (loss, task) = match which {
        0 => (Loss::Squared, SynthTask::Regression),
        1 => (Loss::Logistic, SynthTask::Classification),
        _ => (Loss::smoothed_hinge(), SynthTask::Classification),
    };
    let data = dataset(20, 6, 0.7, seed, task);
    make_erm(&data, loss, Regularizer::None).unwrap()
}

fn theta_schedule(algo: Algo, regime: Regime, n: usize, tau: usize) -> ThetaSchedule {
    ThetaSchedule::new(
        algo,
        regime,
        &ScheduleParams {
            n,
            tau,
            gamma: 0.05,
            mu: 0.01,
            l: 1.0,
        },
    )
    .unwrap()
}

fn delay_kind() -> impl Strategy<Value = DelayKind> {
    prop_oneof![
        Just(DelayKind::Serial),
        Just(DelayKind::Fixed),
        Just(DelayKind::UniformRandom),
    ]
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn prox_step_is_optimal(
        (h, z, g) in (1usize..6).prop_flat_map(|d| (
            nonsmooth(d),
            prop::collection::vec(-3.0..3.0f64, d),
            prop::collection::vec(-5.0..5.0f64, d),
        )),
        weight in 0.05..20.0f64,
    ) {
        let all: Vec<usize> = (0..z.len()).collect();
        let delta = prox_step(&h, &z, &g, weight, Coords::All).unwrap();
        let x: Vec<f64> = z.iter().zip(&delta).map(|(a, b)| a + b).collect();
        let r: Vec<f64> = g.iter().zip(&delta).map(|(gi, di)| gi + weight * di).collect();
        let v = subgradient_violation(&h, &x, &r, &all);
        prop_assert!(v <= 1e-10, "violation {v:e} for {h:?}");

        if h.is_separable() {
            for i in 0..z.len() {
                let delta = prox_step(&h, &z, &g, weight, Coords::Single(i)).unwrap();
                prop_assert!(delta.iter().enumerate().all(|(j, d)| j == i || *d == 0.0));
                let x: Vec<f64> = z.iter().zip(&delta).map(|(a, b)| a + b).collect();
                let r: Vec<f64> = g.iter().zip(&delta).map(|(gi, di)| gi + weight * di).collect();
                let v = subgradient_violation(&h, &x, &r, &[i]);
                prop_assert!(v <= 1e-10, "coordinate {i}: violation {v:e} for {h:?}");
            }
        }
    }

    #[test]
    fn theta_recursion_inequality(k in 1usize..1_000_000, n in 1usize..64, tau in 0usize..8) {
        for algo in [Algo::Aagd, Algo::Aascd, Algo::Aasvrg] {
            let s = theta_schedule(algo, Regime::Nc, n, tau);
            let (t, p) = (s.theta(k as i64), s.theta(k as i64 - 1));
            prop_assert!(t > 0.0 && t <= 1.0);
            prop_assert!((1.0 - t) / (t * t) <= 1.0 / (p * p) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sc_theta_solves_its_quadratic(gamma in 1e-6..1.0f64, mu in 1e-6..1.0f64) {
        let t = solve_theta_sc(gamma, mu, 1).unwrap();
        let gm = gamma * mu;
        prop_assert!((t * t + gm * t - gm).abs() <= 1e-14);
        prop_assert!(t > 0.0 && t <= 1.0);
    }

    #[test]
    fn step_size_is_maximal_and_admissible(
        l in 1e-3..1e3f64,
        lc_frac in 0.01..1.0f64,
        mu_frac in 0.0..0.5f64,
        n in 1usize..200,
        tau in 0usize..6,
    ) {
        let c = StepConstants { l, l_c: l * lc_frac, mu: l * mu_frac * 1e-3, n, tau };
        for algo in [Algo::Aagd, Algo::Aascd, Algo::Aasvrg] {
            if algo == Algo::Aascd && tau * tau > n {
                continue;
            }
            for regime in [Regime::Nc, Regime::Sc] {
                let g = step_size(algo, regime, &c).unwrap();
                let resid = step_inequality_lhs(algo, regime, &c, g).unwrap() - 1.0;
                prop_assert!((-1e-12..=0.0).contains(&resid), "{algo:?} {regime:?}: {resid:e}");
                prop_assert!(step_inequality_lhs(algo, regime, &c, 2.0 * g).unwrap() > 1.0);
            }
        }
    }

    #[test]
    fn constant_theta_compensation_is_geometric(theta in 0.01..1.0f64, j in 0usize..50, gap in 0usize..1000) {
        let s = ThetaSchedule::constant(Algo::Aagd, theta).unwrap();
        let k = j + gap;
        let a = 1.0 - theta;
        let m = (gap + 1) as i32;
        let closed = if a == 0.0 { 0.0 } else { a * (1.0 - a.powi(m)) / (1.0 - a) };
        let got = comp_sum_aagd(&s, j, k).unwrap();
        prop_assert!((got - closed).abs() <= 1e-12 * closed.max(1.0), "{got} vs {closed}");
    }

    #[test]
    fn compensation_sums_grow_with_k(j in 0usize..200, gap in 0usize..40, n in 1usize..32) {
        for (algo, regime) in [(Algo::Aagd, Regime::Nc), (Algo::Aagd, Regime::Sc), (Algo::Aascd, Regime::Nc), (Algo::Aascd, Regime::Sc)] {
            let s = theta_schedule(algo, regime, n, 2);
            let sum = |k| match algo {
                Algo::Aagd => comp_sum_aagd(&s, j, k).unwrap(),
                _ => comp_sum_aascd(&s, j, k).unwrap(),
            };
            let mut prev = sum(j);
            prop_assert!(prev >= 0.0);
            for k in j + 1..=j + gap {
                let cur = sum(k);
                prop_assert!(cur >= prev, "{algo:?} {regime:?} j={j} k={k}: {cur} < {prev}");
                prev = cur;
            }
        }
    }

    #[test]
    fn schedules_respect_window(
        kind in delay_kind(),
        tau in 0usize..20,
        horizon in 1usize..2000,
        seed in any::<u64>(),
        warmup in any::<bool>(),
    ) {
        let s = make_schedule(kind.clone(), tau, horizon, seed, warmup).unwrap();
        let report = verify_schedule(&s);
        prop_assert!(report.is_valid(), "{:?}", report.first_violation);
        for k in 0..horizon {
            let j = s.j(k);
            prop_assert!(j <= k && k - j <= s.tau());
        }
        let again = make_schedule(kind, tau, horizon, seed, warmup).unwrap();
        prop_assert!((0..horizon).all(|k| s.j(k) == again.j(k)));
    }

    #[test]
    fn dense_overlap_is_clamped_delay(tau in 0usize..10, steps in 1usize..200, coords in 1usize..6) {
        let s = make_schedule(DelayKind::Fixed, tau, steps, 0, false).unwrap();
        let supports = vec![(0..coords).collect::<Vec<_>>(); steps];
        let stats = measure_overlap(&supports, coords, &s);
        let expected = (0..steps).map(|k| tau.min(k) as f64).sum::<f64>() / steps as f64;
        for i in 0..coords {
            prop_assert!((stats.mean_overlap[i] - expected).abs() <= 1e-12);
            prop_assert_eq!(stats.max_overlap[i] as usize, tau.min(steps - 1));
        }
    }

    #[test]
    fn delay_log_roundtrip(log in prop::collection::vec((any::<u64>(), any::<u64>()), 0..200)) {
        let mut buf = Vec::new();
        write_delay_log(&mut buf, &log).unwrap();
        prop_assert_eq!(read_delay_log(&buf[..]).unwrap(), log);
    }

    #[test]
    fn trace_csv_roundtrip(
        rows in prop::collection::vec(
            (any::<u64>(), 0.0..1e4f64, -1e6..1e6f64, 1e-15..1e3f64, any::<u64>()),
            0..50,
        ),
    ) {
        let trace = Trace {
            records: rows
                .iter()
                .map(|&(step, seconds, objective, residual, grad_evals)| TraceRecord {
                    step, seconds, objective, residual, grad_evals,
                })
                .collect(),
            ..Default::default()
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        prop_assert_eq!(Trace::read_csv(&buf[..]).unwrap(), trace);
    }

    #[test]
    fn speedup_csv_roundtrip(
        rows in prop::collection::vec(
            (1usize..64, any::<u64>(), 0.0..1e4f64, 0.0..100.0f64, 0.0..100.0f64),
            0..20,
        ),
    ) {
        let report = SpeedupReport {
            target: 1e-6,
            serial_iters: 1,
            serial_seconds: 0.0,
            rows: rows
                .iter()
                .map(|&(threads, iters, seconds, iter_speedup, time_speedup)| SpeedupRow {
                    threads, iters, seconds, iter_speedup, time_speedup,
                })
                .collect(),
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        prop_assert_eq!(SpeedupReport::read_rows(&buf[..]).unwrap(), report.rows);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn gradients_match_central_differences(which in 0usize..3, seed in 0u64..1000) {
        let p = loss_problem(which, seed);
        let f = p.smooth();
        let eps = 1e-5;
        let x = random_point(p.dim(), 1.0, seed + 1);
        let g = f.grad(&x);
        let fd: Vec<f64> = (0..p.dim()).map(|j| central_diff(|y| f.value(y), &x, j, eps)).collect();
        prop_assert!(rel_err(&g, &fd) <= 1e-5, "full gradient error {:e}", rel_err(&g, &fd));
        for j in 0..p.dim() {
            let cg = f.coord_grad(&x, j);
            prop_assert!((cg - g[j]).abs() <= 1e-12 * g[j].abs().max(1.0));
        }
        let rows = f.matrix();
        for i in 0..p.n_components() {
            let (cols, vals) = rows.row(i);
            let y = f.targets()[i];
            let fi = |w: &[f64]| {
                let m: f64 = cols.iter().zip(vals).map(|(&c, v)| v * w[c]).sum();
                f.loss().value(m, y)
            };
            let gi = f.component_grad(&x, i).unwrap();
            let fd: Vec<f64> = (0..p.dim()).map(|j| central_diff(fi, &x, j, eps)).collect();
            // f = (1/n) Σ f_i, so f_i carries the weight n·scale.
            let w = p.n_components() as f64 * f.scale();
            let gi: Vec<f64> = gi.iter().map(|v| v / w).collect();
            prop_assert!(rel_err(&gi, &fd) <= 1e-5, "component {i} error {:e}", rel_err(&gi, &fd));
        }
    }

    #[test]
    fn vr_gradient_is_unbiased(seed in 0u64..1000) {
        let p = logistic(30, 8, 1e-3, 0.5, seed);
        let snap = Snapshot::new(&p, random_point(p.dim(), 2.0, seed + 1));
        let w = random_point(p.dim(), 2.0, seed + 2);
        let n = p.n_components();
        let mut mean = vec![0.0; p.dim()];
        for i in 0..n {
            linalg::axpy(1.0 / n as f64, &vr_grad(&p, &w, &snap, i).unwrap(), &mut mean);
        }
        let full = p.full_grad(&w);
        prop_assert!(rel_err(&mean, &full) <= 1e-12);
    }

    #[test]
    fn smoothness_constants_are_upper_bounds(which in 0usize..3, seed in 0u64..1000) {
        let p = loss_problem(which, seed);
        let c = p.constants();
        let f = p.smooth();
        for s in 0..1000u64 {
            let x = random_point(p.dim(), 3.0, seed * 7919 + 2 * s);
            let y = random_point(p.dim(), 3.0, seed * 7919 + 2 * s + 1);
            let lhs = linalg::norm(&linalg::sub(&f.grad(&x), &f.grad(&y)));
            let rhs = c.l * linalg::norm(&linalg::sub(&x, &y));
            prop_assert!(lhs <= rhs * (1.0 + 1e-9), "L: {lhs} > {rhs}");

            let j = (s as usize) % p.dim();
            let t = y[j] - x[j];
            let mut xt = x.clone();
            xt[j] += t;
            let lhs = (f.coord_grad(&xt, j) - f.coord_grad(&x, j)).abs();
            let rhs = c.l_coord[j] * t.abs();
            prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-15, "L_{j}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn weak_duality(seed in 0u64..1000, lambda in 1e-4..0.1f64) {
        let data = dataset(25, 6, 0.6, seed, SynthTask::Classification);
        // Large λ makes the dual's modulus exceed its smoothness constant.
        let p = make_dual_svm(&data, lambda);
        prop_assume!(!matches!(p, Err(momcomp::Error::Hypothesis(_))));
        let p = p.unwrap();
        let u = random_point(data.n_samples(), 1.0, seed + 5);
        // y_i α_i ∈ [0, 1]
        let alpha: Vec<f64> = u.iter().zip(&data.labels).map(|(v, y)| y * v.abs()).collect();
        prop_assert!(p.is_feasible(&alpha));
        let primal = p.primal_objective(&p.primal_map(&alpha));
        prop_assert!(-p.dual_objective(&alpha) <= primal + 1e-12);
        prop_assert!(p.duality_gap(&alpha).unwrap() >= -1e-12);
    }

    #[test]
    fn identical_inputs_give_identical_traces(
        seed in any::<u64>(),
        tau in 0usize..4,
        kind in delay_kind(),
    ) {
        let p = least_squares(30, 9, 1e-2, 5);
        let n = p.dim();
        let th = theta_schedule(Algo::Aascd, Regime::Nc, n, tau);
        let sched = make_schedule(kind.clone(), tau, 400, seed, false).unwrap();
        let gamma = 0.1 / p.l();
        let opts = SolverOptions::new(gamma, 400).seed(seed).record_every(50);
        let bits = |t: &Trace| -> Vec<u64> {
            t.records
                .iter()
                .flat_map(|r| [r.step, r.objective.to_bits(), r.residual.to_bits(), r.grad_evals])
                .chain(t.final_x.iter().map(|v| v.to_bits()))
                .collect()
        };
        let a = run_aascd(&p, &th, &sched, AascdForm::Efficient, &opts).unwrap();
        let b = run_aascd(&p, &th, &sched, AascdForm::Efficient, &opts).unwrap();
        prop_assert_eq!(bits(&a), bits(&b));

        let th = theta_schedule(Algo::Aagd, Regime::Nc, 1, tau);
        let a = run_aagd(&p, &th, &sched, AagdForm::Uv, &opts).unwrap();
        let b = run_aagd(&p, &th, &sched, AagdForm::Uv, &opts).unwrap();
        prop_assert_eq!(bits(&a), bits(&b));
    }
}
