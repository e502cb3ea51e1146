mod common;

use common::*;
use momcomp::delay::{make_schedule, DelayKind, DelaySchedule};
use momcomp::momentum::{Algo, Regime, ScheduleParams, ThetaSchedule};
use momcomp::solvers::*;

fn nc(algo: Algo, n: usize) -> ThetaSchedule {
    ThetaSchedule::new(
        algo,
        Regime::Nc,
        &ScheduleParams {
            n,
            ..Default::default()
        },
    )
    .unwrap()
}

#[test]
fn aagd_serial_matches_agd() {
    let p = least_squares(80, 50, 0.0, 1);
    let th = nc(Algo::Aagd, 1);
    let opts = SolverOptions::new(1.0 / p.l(), 200).keep_iterates();
    let base = run_agd(&p, &th, &opts).unwrap();
    let sched = DelaySchedule::serial(200);
    for form in [AagdForm::Math, AagdForm::Uv] {
        let t = run_aagd(&p, &th, &sched, form, &opts).unwrap();
        let gap = max_iterate_gap(&t.iterates, &base.iterates, false);
        assert!(gap <= 1e-10, "{form:?}: {gap}");
    }
}

#[test]
fn aagd_forms_agree_under_delay() {
    let p = least_squares(60, 30, 1e-3, 2);
    for (tau, regime) in [(1, Regime::Nc), (2, Regime::Nc), (5, Regime::Nc), (3, Regime::Sc)] {
        let gamma = 0.5 / p.l();
        let th = ThetaSchedule::new(
            Algo::Aagd,
            regime,
            &ScheduleParams {
                n: 1,
                gamma,
                mu: p.mu(),
                l: p.l(),
                tau,
            },
        )
        .unwrap();
        let sched = make_schedule(DelayKind::UniformRandom, tau, 500, 9, false).unwrap();
        let opts = SolverOptions::new(gamma, 500).keep_iterates();
        let a = run_aagd(&p, &th, &sched, AagdForm::Math, &opts).unwrap();
        let b = run_aagd(&p, &th, &sched, AagdForm::Uv, &opts).unwrap();
        let gap = max_iterate_gap(&b.iterates, &a.iterates, true);
        assert!(gap <= 1e-8, "tau={tau}: {gap}");
    }
}

#[test]
fn aascd_forms_agree_under_delay() {
    let p = logistic(40, 36, 1e-2, 0.3, 3);
    let th = nc(Algo::Aascd, p.dim());
    for tau in [0, 1, 2, 5] {
        let sched = make_schedule(DelayKind::UniformRandom, tau, 600, 4, false).unwrap();
        let opts = SolverOptions::new(0.3 / p.l_c(), 600).seed(5).keep_iterates();
        let a = run_aascd(&p, &th, &sched, AascdForm::Naive, &opts).unwrap();
        let b = run_aascd(&p, &th, &sched, AascdForm::Efficient, &opts).unwrap();
        let gap = max_iterate_gap(&b.iterates, &a.iterates, true);
        assert!(gap <= 1e-8, "tau={tau}: {gap}");
    }
}

#[test]
fn aascd_serial_matches_apcg() {
    let p = least_squares(50, 20, 1e-2, 4);
    let th = nc(Algo::Aascd, p.dim());
    let opts = SolverOptions::new(1.0 / p.l_c(), 400).seed(2).keep_iterates();
    let base = run_apcg(&p, &th, &opts).unwrap();
    let sched = DelaySchedule::serial(400);
    for form in [AascdForm::Naive, AascdForm::Efficient] {
        let t = run_aascd(&p, &th, &sched, form, &opts).unwrap();
        let gap = max_iterate_gap(&t.iterates, &base.iterates, false);
        assert!(gap <= 1e-10, "{form:?}: {gap}");
    }
}

#[test]
fn aasvrg_serial_matches_reference() {
    let p = least_squares(40, 10, 1e-2, 5);
    let th = nc(Algo::Aasvrg, p.n_components());
    let opts = SolverOptions::new(0.2 / p.constants().l_comp, 8).seed(1).keep_iterates();
    let aopts = AasvrgOptions::default();
    let sched = DelaySchedule::serial(8 * 40);
    let a = run_aasvrg(&p, &th, &sched, &aopts, &opts).unwrap();
    let b = run_accelerated_svrg(&p, &th, &aopts, &opts).unwrap();
    let gap = max_iterate_gap(&a.iterates, &b.iterates, false);
    assert!(gap <= 1e-10, "{gap}");
    assert_eq!(a.last().unwrap().grad_evals, 8 * 40 + 8 * 40);
}

#[test]
fn aasvrg_hvp_exact_on_quadratic() {
    let p = least_squares(30, 12, 1e-2, 6);
    let th = nc(Algo::Aasvrg, p.n_components());
    for tau in 0..=3 {
        let sched = make_schedule(DelayKind::UniformRandom, tau, 10 * 30, 3, false).unwrap();
        let opts = SolverOptions::new(0.1 / p.constants().l_comp, 10).seed(2).keep_iterates();
        let ex = AasvrgOptions::default();
        let hv = AasvrgOptions {
            grad_mode: GradMode::Hvp,
            ..Default::default()
        };
        let a = run_aasvrg(&p, &th, &sched, &ex, &opts).unwrap();
        let b = run_aasvrg(&p, &th, &sched, &hv, &opts).unwrap();
        let gap = max_iterate_gap(&a.iterates, &b.iterates, false);
        assert!(gap <= 1e-10, "tau={tau}: {gap}");
    }
}

#[test]
fn fstar_converges() {
    let p = least_squares(60, 20, 1e-3, 7);
    let f = compute_fstar(&p, FSTAR_TOL, FSTAR_MAX_ITERS).unwrap();
    assert!(f.converged, "{}", f.grad_map_norm);
}

#[test]
fn forms_agree_across_rebases() {
    let p = least_squares(40, 20, 1e-2, 8);
    let th = ThetaSchedule::constant(Algo::Aagd, 0.5).unwrap();
    let sched = make_schedule(DelayKind::UniformRandom, 3, 600, 1, false).unwrap();
    let opts = SolverOptions::new(0.5 / p.l(), 600).keep_iterates();
    let a = run_aagd(&p, &th, &sched, AagdForm::Math, &opts).unwrap();
    let b = run_aagd(&p, &th, &sched, AagdForm::Uv, &opts).unwrap();
    assert!(max_iterate_gap(&b.iterates, &a.iterates, true) <= 1e-8);

    let p = logistic(30, 4, 1e-2, 1.0, 9);
    let th = ThetaSchedule::constant(Algo::Aascd, 0.2).unwrap();
    let sched = make_schedule(DelayKind::UniformRandom, 2, 2500, 1, false).unwrap();
    let opts = SolverOptions::new(0.2 / p.l_c(), 2500).seed(3).keep_iterates();
    let a = run_aascd(&p, &th, &sched, AascdForm::Naive, &opts).unwrap();
    let b = run_aascd(&p, &th, &sched, AascdForm::Efficient, &opts).unwrap();
    assert!(max_iterate_gap(&b.iterates, &a.iterates, true) <= 1e-8);
}
