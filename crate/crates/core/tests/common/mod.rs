#![allow(dead_code)]

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use momcomp::problem::synth::{synthesize, SynthSpec, SynthTask};
use momcomp::problem::{make_erm, CompositeProblem, Dataset, Loss, Regularizer};
use momcomp::runtime::{Mode, SharedState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn dataset(rows: usize, cols: usize, density: f64, seed: u64, task: SynthTask) -> Dataset {
    synthesize(&SynthSpec {
        rows,
        cols,
        density,
        condition: None,
        seed,
        task,
        noise: 0.1,
    })
    .expect("synthetic data")
    .data
}

/// Least squares with `rows` samples in `cols` dimensions and ridge weight `lambda`.
pub fn least_squares(rows: usize, cols: usize, lambda: f64, seed: u64) -> CompositeProblem {
    let d = dataset(rows, cols, 1.0, seed, SynthTask::Regression);
    let reg = if lambda > 0.0 {
        Regularizer::L2(lambda)
    } else {
        Regularizer::None
    };
    make_erm(&d, Loss::Squared, reg).expect("problem")
}

pub fn logistic(rows: usize, cols: usize, lambda: f64, density: f64, seed: u64) -> CompositeProblem {
    let d = dataset(rows, cols, density, seed, SynthTask::Classification);
    make_erm(&d, Loss::Logistic, Regularizer::L2(lambda)).expect("problem")
}

pub fn random_point(dim: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// max |a − b| / max(1, |b|) over entries.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn max_iterate_gap(a: &[Vec<f64>], b: &[Vec<f64>], rel: bool) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| if rel { max_rel_diff(x, y) } else { max_abs_diff(x, y) })
        .fold(0.0, f64::max)
}

/// P workers hammer a few coordinates whose row sets overlap, listing rows
/// in scrambled order. Returns the number of updates applied.
pub fn collision_stress(threads: usize, duration: Duration) -> u64 {
    let s = SharedState::new(&[0.0; 3], &[0.0; 4], Mode::Wild);
    let stop = AtomicBool::new(false);
    let deadline = Instant::now() + duration;
    let counts: Vec<u64> = std::thread::scope(|sc| {
        let hs: Vec<_> = (0..threads)
            .map(|t| {
                let (s, stop) = (&s, &stop);
                sc.spawn(move || {
                    let sets: [&[usize]; 3] = [&[3, 0, 2], &[2, 1, 3], &[1, 3, 0]];
                    let mut n = 0u64;
                    while !stop.load(Ordering::Relaxed) {
                        let i = (t + n as usize) % 3;
                        s.apply_coordinate_delta(i, 1.0, sets[i], &[1.0; 3]);
                        n += 1;
                        if n % 1024 == 0 && Instant::now() >= deadline {
                            stop.store(true, Ordering::Relaxed);
                        }
                    }
                    n
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let total: u64 = counts.iter().sum();
    let params: f64 = s.params().to_vec().iter().sum();
    let products: f64 = s.products().to_vec().iter().sum();
    assert_eq!(params, total as f64);
    assert_eq!(products, 3.0 * total as f64);
    total
}
