use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Aagd,
    Aascd,
    Aasvrg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Non-strongly convex.
    Nc,
    /// Strongly convex.
    Sc,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Aagd => "aagd",
            Algo::Aascd => "aascd",
            Algo::Aasvrg => "aasvrg",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nc" => Ok(Regime::Nc),
            "sc" => Ok(Regime::Sc),
            other => Err(Error::invalid(format!("unknown regime '{other}' (nc|sc)"))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Nc => "nc",
            Regime::Sc => "sc",
        })
    }
}

/// Inputs a schedule may need. Unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    /// Coordinates (AASCD) or components (AASVRG).
    pub n: usize,
    pub tau: usize,
    pub gamma: f64,
    pub mu: f64,
    pub l: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self {
            n: 1,
            tau: 0,
            gamma: 0.0,
            mu: 0.0,
            l: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// θᵏ = 2 / (k + offset)
    Harmonic(f64),
    Constant(f64),
}

/// θᵏ for one algorithm and regime. For AASVRG, k is the epoch index s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSchedule {
    algo: Algo,
    regime: Regime,
    kind: Kind,
}

const THETA2: f64 = 0.5;

impl ThetaSchedule {
    pub fn new(algo: Algo, regime: Regime, p: &ScheduleParams) -> Result<Self> {
        let n = p.n.max(1) as f64;
        let kind = match (algo, regime) {
            (Algo::Aagd, Regime::Nc) => Kind::Harmonic(2.0),
            (Algo::Aascd, Regime::Nc) => Kind::Harmonic(2.0 * n),
            (Algo::Aasvrg, Regime::Nc) => Kind::Harmonic(4.0),
            (Algo::Aagd, Regime::Sc) => Kind::Constant(solve_theta_sc(p.gamma, p.mu, 1)?),
            (Algo::Aascd, Regime::Sc) => Kind::Constant(solve_theta_sc(p.gamma, p.mu, p.n)?),
            (Algo::Aasvrg, Regime::Sc) => {
                if !(p.mu > 0.0) || !(p.l > 0.0) {
                    return Err(Error::invalid("strongly convex schedule needs mu > 0 and L > 0"));
                }
                let root = (n * p.mu / p.l).sqrt();
                let t = if p.tau == 0 {
                    root.min(1.0)
                } else {
                    root / p.tau as f64
                };
                Kind::Constant(t.min(THETA2))
            }
        };
        Ok(Self { algo, regime, kind })
    }

    /// Fixed θ, for experiments and tests.
    pub fn constant(algo: Algo, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::invalid(format!("theta {theta} outside (0, 1]")));
        }
        Ok(Self {
            algo,
            regime: Regime::Sc,
            kind: Kind::Constant(theta),
        })
    }

    pub fn algo(&self) -> Algo {
        self.algo
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// θᵏ for k ≥ −1.
    pub fn theta(&self, k: i64) -> f64 {
        debug_assert!(k >= -1);
        match self.kind {
            Kind::Harmonic(off) => 2.0 / (k as f64 + off),
            Kind::Constant(t) => t,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant(_))
    }

    /// θ₂ of the variance-reduced method.
    pub fn theta2(&self) -> f64 {
        THETA2
    }
}

/// θ = (−γμ + √((γμ)² + 4γμ)) / (2n), the positive root of (nθ)² + γμ(nθ) − γμ = 0.
pub fn solve_theta_sc(gamma: f64, mu: f64, n: usize) -> Result<f64> {
    if !(gamma > 0.0) || !(mu > 0.0) || n == 0 {
        return Err(Error::invalid("strongly convex theta needs gamma > 0, mu > 0, n >= 1"));
    }
    let gm = gamma * mu;
    if gm > 1.0 {
        return Err(Error::Hypothesis(format!(
            "gamma*mu = {gm} exceeds 1; the strongly convex schedule assumes gamma*mu <= 1"
        )));
    }
    // 2γμ / (γμ + √(γμ² + 4γμ)) avoids cancellation for small γμ.
    let t = 2.0 * gm / (gm + (gm * gm + 4.0 * gm).sqrt());
    Ok(t / n as f64)
}
