mod common;

use std::time::Duration;

use common::*;
use momcomp::delay::DelaySchedule;
use momcomp::momentum::{step_size, Algo, Regime, ScheduleParams, StepConstants, ThetaSchedule};
use momcomp::problem::synth::SynthTask;
use momcomp::problem::{make_erm, CompositeProblem, CsrMatrix, Loss, Regularizer};
use momcomp::runtime::*;
use momcomp::solvers::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn schedule(algo: Algo, regime: Regime, p: &CompositeProblem, n: usize, tau: usize) -> (f64, ThetaSchedule) {
    let l = if algo == Algo::Aasvrg { p.l_c() } else { p.l() };
    let c = StepConstants {
        l,
        l_c: p.l_c(),
        mu: p.mu(),
        n,
        tau,
    };
    let gamma = step_size(algo, regime, &c).unwrap();
    let th = ThetaSchedule::new(
        algo,
        regime,
        &ScheduleParams {
            n,
            tau,
            gamma,
            mu: p.mu(),
            l,
        },
    )
    .unwrap();
    (gamma, th)
}

fn serial_cfg() -> ParallelConfig {
    ParallelConfig::new(1, Mode::Atom).order_queue(true).log_delays(true)
}

fn assert_bitwise(name: &str, par: &ParallelRun, det: &Trace) {
    let bits = |t: &Trace| -> Vec<(u64, u64, u64, u64, u64)> {
        t.records
            .iter()
            .map(|r| (r.step, r.seconds.to_bits(), r.objective.to_bits(), r.residual.to_bits(), r.grad_evals))
            .collect()
    };
    assert_eq!(bits(&par.trace), bits(det), "{name}: records differ");
    let same = par
        .trace
        .final_x
        .iter()
        .zip(&det.final_x)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    assert!(same && par.trace.final_x.len() == det.final_x.len(), "{name}: final iterate differs");
    assert!(par.delay_histogram().max() == 0, "{name}: nonzero delay at P=1");
}

#[test]
fn one_thread_matches_deterministic_aagd() {
    let p = least_squares(60, 30, 1e-3, 3);
    for regime in [Regime::Nc, Regime::Sc] {
        let (gamma, th) = schedule(Algo::Aagd, regime, &p, 1, 0);
        let opts = SolverOptions::new(gamma, 300).record_every(7);
        let det = run_aagd(&p, &th, &DelaySchedule::serial(300), AagdForm::Uv, &opts).unwrap();
        let par = run_parallel(&p, &ParallelAlgo::Aagd(th), &opts, &serial_cfg()).unwrap();
        assert_bitwise("aagd", &par, &det);
    }
}

#[test]
fn one_thread_matches_deterministic_aascd() {
    let p = logistic(80, 12, 1e-2, 0.4, 4);
    for (regime, steps) in [(Regime::Nc, 2000), (Regime::Sc, 20000)] {
        let (gamma, th) = schedule(Algo::Aascd, regime, &p, p.dim(), 0);
        let opts = SolverOptions::new(gamma, steps).seed(5).record_every(97);
        let det =
            run_aascd(&p, &th, &DelaySchedule::serial(steps), AascdForm::Efficient, &opts).unwrap();
        let par = run_parallel(&p, &ParallelAlgo::Aascd(th), &opts, &serial_cfg()).unwrap();
        assert_bitwise("aascd", &par, &det);
    }
}

#[test]
fn one_thread_matches_deterministic_svrg_family() {
    let p = logistic(40, 10, 1e-2, 0.5, 6);
    let n = p.n_components();
    for (regime, grad_mode) in [
        (Regime::Nc, GradMode::Exact),
        (Regime::Nc, GradMode::Hvp),
        (Regime::Sc, GradMode::Exact),
    ] {
        let (gamma, th) = schedule(Algo::Aasvrg, regime, &p, n, 0);
        let aopts = AasvrgOptions {
            grad_mode,
            ..Default::default()
        };
        let opts = SolverOptions::new(gamma, 6).seed(7);
        let det = run_aasvrg(&p, &th, &DelaySchedule::serial(6 * n), &aopts, &opts).unwrap();
        let par = run_parallel(&p, &ParallelAlgo::Aasvrg(th, aopts), &opts, &serial_cfg()).unwrap();
        assert_bitwise("aasvrg", &par, &det);
    }

    let opts = SolverOptions::new(0.1 / p.l_c(), 4).seed(8);
    let det = run_asvrg_baseline(&p, &DelaySchedule::serial(8 * n), &opts).unwrap();
    let par = run_parallel(&p, &ParallelAlgo::Asvrg, &opts, &serial_cfg()).unwrap();
    assert_bitwise("asvrg", &par, &det);

    let rule = StepRule::Decaying { sigma0: 20.0 };
    let opts = SolverOptions::new(0.5 / p.l_c(), 500).seed(9).record_every(50);
    let det = run_sgd_baseline(&p, &DelaySchedule::serial(500), rule, &opts).unwrap();
    let par = run_parallel(&p, &ParallelAlgo::Sgd(rule), &opts, &serial_cfg()).unwrap();
    assert_bitwise("sgd", &par, &det);
}

#[test]
fn atom_reads_are_past_iterates() {
    let p = least_squares(40, 12, 1e-2, 10);
    let cfg = ParallelConfig::new(4, Mode::Atom).log_reads(true).log_delays(true);
    let (gamma, th) = schedule(Algo::Aagd, Regime::Nc, &p, 1, 3);
    let runs = [
        run_parallel(&p, &ParallelAlgo::Aagd(th), &SolverOptions::new(gamma, 200), &cfg).unwrap(),
        run_parallel(
            &p,
            &ParallelAlgo::Sgd(StepRule::Constant),
            &SolverOptions::new(0.1 / p.l_c(), 2000).record_every(100),
            &cfg,
        )
        .unwrap(),
    ];
    for run in runs {
        assert_eq!(run.states.len() as u64, run.steps + 1);
        assert_eq!(run.reads.len() as u64, run.steps);
        for (j, seen) in &run.reads {
            assert_eq!(seen, &run.states[*j as usize], "read at j={j} is not a past iterate");
        }
        assert_eq!(run.delays.len() as u64, run.steps);
    }
}

#[test]
fn ordered_delays_are_bounded_by_thread_count() {
    let p = logistic(200, 50, 1e-2, 0.1, 11);
    let (gamma, th) = schedule(Algo::Aascd, Regime::Nc, &p, p.dim(), 3);
    let opts = SolverOptions::new(gamma, 20_000).record_every(1000);
    for mode in [Mode::Atom, Mode::Wild] {
        let cfg = ParallelConfig::new(4, mode).order_queue(true).log_delays(true);
        let run = run_parallel(&p, &ParallelAlgo::Aascd(th), &opts, &cfg).unwrap();
        let h = run.delay_histogram();
        assert_eq!(h.total, 20_000);
        assert!(h.max() <= 3, "{mode:?}: delay {} exceeds P-1", h.max());
        let ks: Vec<u64> = run.delays.iter().map(|d| d.0).collect();
        assert!(ks.iter().enumerate().all(|(i, &k)| k == i as u64));
        eprintln!("{mode:?}: max delay {} mean {:.3}", h.max(), h.mean());
    }
}

#[test]
fn atom_ridge_reaches_serial_optimum() {
    let d = dataset(2000, 200, 0.05, 12, SynthTask::Regression);
    let p = make_erm(&d, Loss::Squared, Regularizer::L2(1e-2)).unwrap();
    let fs = compute_fstar(&p, FSTAR_TOL, FSTAR_MAX_ITERS).unwrap();
    let (gamma, th) = schedule(Algo::Aascd, Regime::Sc, &p, p.dim(), 3);
    let opts = SolverOptions::new(gamma, 400 * p.dim()).record_every(10 * p.dim()).f_star(fs.value);
    let cfg = ParallelConfig::new(4, Mode::Atom).target(1e-7);
    let run = run_parallel(&p, &ParallelAlgo::Aascd(th), &opts, &cfg).unwrap();
    let res = run.trace.final_residual();
    assert!(res.abs() <= 1e-6, "residual {res:e}");
}

#[test]
fn wild_coordinate_descent_keeps_running_safely() {
    let d = dataset(1000, 300, 0.02, 13, SynthTask::Classification);
    let p = make_erm(&d, Loss::Logistic, Regularizer::L2(1e-3)).unwrap();
    let (gamma, th) = schedule(Algo::Aascd, Regime::Nc, &p, p.dim(), 3);
    let opts = SolverOptions::new(gamma, 30 * p.dim()).record_every(p.dim());
    let run = run_parallel(&p, &ParallelAlgo::Aascd(th), &opts, &ParallelConfig::new(4, Mode::Wild)).unwrap();
    assert!(run.trace.final_x.iter().all(|x| x.is_finite()));
    let first = run.trace.records[0].objective;
    let last = run.trace.records.last().unwrap().objective;
    eprintln!("wild AASCD objective {first:.6} -> {last:.6}");
}

#[test]
fn unsupported_combinations_name_the_constraint() {
    let p = logistic(20, 5, 1e-2, 1.0, 14);
    let th = ThetaSchedule::new(Algo::Aasvrg, Regime::Nc, &ScheduleParams::default()).unwrap();
    let opts = SolverOptions::new(0.1, 2);
    let wild = ParallelConfig::new(2, Mode::Wild);
    let e = run_parallel(&p, &ParallelAlgo::Aasvrg(th, Default::default()), &opts, &wild).unwrap_err();
    assert!(e.to_string().contains("atom"), "{e}");
    assert!(run_parallel(&p, &ParallelAlgo::Asvrg, &opts, &wild).is_err());
    let th = ThetaSchedule::new(Algo::Aagd, Regime::Nc, &ScheduleParams::default()).unwrap();
    let e = run_parallel(&p, &ParallelAlgo::Aagd(th), &opts, &wild).unwrap_err();
    assert!(e.to_string().contains("quadratic"), "{e}");
    assert!(run_parallel(&p, &ParallelAlgo::Aagd(th), &opts, &wild.clone().order_queue(true)).is_ok());
    let zero = ParallelConfig::new(0, Mode::Atom);
    assert!(run_parallel(&p, &ParallelAlgo::Aagd(th), &opts, &zero).is_err());
}

#[test]
fn quadratic_split_matches_direct_gradient() {
    let p = least_squares(50, 20, 0.0, 15);
    let u = random_point(20, 1.0, 1);
    let v = random_point(20, 3.0, 2);
    let d = 0.37;
    let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + d * b).collect();
    let direct = p.full_grad(&w);
    let lin = p.smooth().linear_grad(&v).unwrap();
    let split: Vec<f64> = p.full_grad(&u).iter().zip(&lin).map(|(g, l)| g + d * l).collect();
    assert!(max_rel_diff(&split, &direct) <= 1e-12);
}

#[test]
fn disjoint_increments_match_sequential() {
    let ops = 500_000;
    let deltas: Vec<f64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..ops).map(|_| rng.random_range(-1.0..1.0)).collect()
    };
    for mode in [Mode::Atom, Mode::Wild] {
        let s = SharedState::new(&[0.0, 0.0], &[], mode);
        std::thread::scope(|sc| {
            for c in 0..2 {
                let (s, deltas) = (&s, &deltas);
                sc.spawn(move || deltas.iter().for_each(|&d| s.apply_coordinate_delta(c, d, &[], &[])));
            }
        });
        let seq = deltas.iter().fold(0.0, |a, d| a + d);
        assert_eq!(s.params().to_vec(), vec![seq, seq], "{mode:?}");
    }
}

#[test]
fn same_coordinate_increments_are_not_lost() {
    for mode in [Mode::Atom, Mode::Wild] {
        let s = SharedState::new(&[0.0], &[0.0], mode);
        std::thread::scope(|sc| {
            for _ in 0..2 {
                let s = &s;
                sc.spawn(move || (0..100_000).for_each(|_| s.apply_coordinate_delta(0, 1.0, &[0], &[2.0])));
            }
        });
        assert_eq!(s.params().get(0), 200_000.0, "{mode:?}");
        assert_eq!(s.products().get(0), 400_000.0, "{mode:?}");
    }
}

/// Random sparse matrix as (rows, cols) with its transpose.
fn sparse(rows: usize, cols: usize, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense: Vec<f64> = (0..rows * cols)
        .map(|_| if rng.random::<f64>() < 0.3 { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect();
    CsrMatrix::from_dense(rows, cols, &dense).unwrap()
}

#[test]
fn products_stay_consistent_under_contention() {
    let a = sparse(30, 10, 4);
    let at = a.transpose();
    let s = SharedState::new(&[0.0; 10], &[0.0; 30], Mode::Wild);
    std::thread::scope(|sc| {
        for t in 0..4u64 {
            let (s, at) = (&s, &at);
            sc.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + t);
                for _ in 0..50_000 {
                    let i = rng.random_range(0..10);
                    let (rows, vals) = at.row(i);
                    s.apply_coordinate_delta(i, rng.random_range(-1.0..1.0), rows, vals);
                }
            });
        }
    });
    let expect = a.mul_vec(&s.params().to_vec());
    let got = s.products().to_vec();
    assert!(max_abs_diff(&got, &expect) <= 1e-9, "{}", max_abs_diff(&got, &expect));
}

#[test]
fn lock_ordering_survives_collision_stress() {
    let total = collision_stress(8, Duration::from_secs(2));
    assert!(total > 0);
}

#[test]
fn speedup_from_parallel_runs() {
    let d = dataset(3000, 400, 0.01, 16, SynthTask::Classification);
    let p = make_erm(&d, Loss::Logistic, Regularizer::L2(1e-3)).unwrap();
    let fs = compute_fstar(&p, FSTAR_TOL, FSTAR_MAX_ITERS).unwrap();
    let (gamma, th) = schedule(Algo::Aascd, Regime::Sc, &p, p.dim(), 3);
    let opts = SolverOptions::new(gamma, 200 * p.dim())
        .record_every(p.dim())
        .f_star(fs.value)
        .wall_clock(true);
    let target = 1e-6;
    let serial = run_parallel(&p, &ParallelAlgo::Aascd(th), &opts, &ParallelConfig::new(1, Mode::Wild).target(target)).unwrap();
    let par = run_parallel(&p, &ParallelAlgo::Aascd(th), &opts, &ParallelConfig::new(4, Mode::Wild).target(target)).unwrap();
    let report = speedup(&serial.trace, &[(1, serial.trace.clone()), (4, par.trace)], target).unwrap();
    assert_eq!(report.rows[0].iter_speedup, 1.0);
    eprintln!("iteration speedup at P=4: {:.2}", report.rows[1].iter_speedup);
    assert!(report.rows[1].iter_speedup > 0.0);
}
