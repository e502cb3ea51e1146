use crate::error::{Error, Result};

use super::{Algo, Regime};

/// Constants entering the step-size conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConstants {
    pub l: f64,
    pub l_c: f64,
    pub mu: f64,
    pub n: usize,
    pub tau: usize,
}

/// γ-free factor C in the condition γ · C ≤ 1.
fn condition_factor(algo: Algo, regime: Regime, c: &StepConstants) -> Result<f64> {
    let t = c.tau as f64;
    let n = c.n.max(1) as f64;
    let f = match (algo, regime) {
        (Algo::Aagd, Regime::Nc) => c.l * (2.0 + 3.0 * (t * t + 3.0 * t).powi(2)),
        (Algo::Aagd, Regime::Sc) => c.l * (2.5 + (t * t + 3.0 * t).powi(2)),
        (Algo::Aascd, r) => {
            if t * t > n {
                return Err(Error::Hypothesis(format!(
                    "coordinate descent bound requires tau <= sqrt(n), got tau={} n={}",
                    c.tau, c.n
                )));
            }
            let q = ((t * t + t) / n + 2.0 * t).powi(2);
            let w = match r {
                Regime::Nc => 1.0 + 1.0 / n,
                Regime::Sc => 0.75 + 3.0 / (8.0 * n),
            };
            c.l_c * (2.0 + w * q)
        }
        (Algo::Aasvrg, Regime::Nc) => c.l * (5.0 + 10.0 * t * t),
        (Algo::Aasvrg, Regime::Sc) => c.l * (5.0 + 95.0 / 8.0 * t * t),
    };
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::invalid("smoothness constants must be positive and finite"));
    }
    Ok(f)
}

/// Left-hand side of the step-size condition evaluated at γ (≤ 1 is admissible).
pub fn step_inequality_lhs(
    algo: Algo,
    regime: Regime,
    c: &StepConstants,
    gamma: f64,
) -> Result<f64> {
    Ok(gamma * condition_factor(algo, regime, c)?)
}

/// Largest γ satisfying the method's step-size condition.
pub fn step_size(algo: Algo, regime: Regime, c: &StepConstants) -> Result<f64> {
    Ok(1.0 / condition_factor(algo, regime, c)?)
}

/// γ·L bound of the delayed SVRG baseline for given ρ₁, ρ₂ > 1.
pub fn asvrg_step_size(l: f64, tau: usize, rho1: f64, rho2: f64) -> Result<f64> {
    if !(rho1 > 1.0 && rho2 > 1.0) || !(l > 0.0) {
        return Err(Error::invalid("need rho1 > 1, rho2 > 1 and L > 0"));
    }
    let first = (rho1 - 1.0) / (10.0 * rho1 * rho2.sqrt());
    let second = if tau == 0 {
        f64::INFINITY
    } else {
        let sr = rho1.sqrt();
        let geo = (rho1.powf(tau as f64 / 2.0) - 1.0) / (sr - 1.0);
        (rho2 - 1.0) / (10.0 * sr * rho2.powf(1.5) * geo)
    };
    Ok(first.min(second) / l)
}

/// Largest baseline γ over a logarithmic (ρ₁, ρ₂) grid on (1, 10⁴].
pub fn asvrg_step_size_best(l: f64, tau: usize) -> Result<f64> {
    const GRID: usize = 400;
    let mut best = 0.0f64;
    let at = |i: usize| 1.0 + 10f64.powf(-6.0 + 10.0 * i as f64 / GRID as f64);
    for i in 0..=GRID {
        for j in 0..=GRID {
            best = best.max(asvrg_step_size(l, tau, at(i), at(j))?);
        }
    }
    Ok(best)
}
