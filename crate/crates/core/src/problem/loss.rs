/// Scalar loss φ(m; y) of a linear prediction m = aᵀx against target y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    /// ½(m − y)²
    Squared,
    /// ln(1 + exp(−y m))
    Logistic,
    /// Hinge on the margin t = y m, quadratically smoothed on [1 − s, 1].
    SmoothedHinge { smoothing: f64 },
}

impl Loss {
    pub const fn smoothed_hinge() -> Self {
        Loss::SmoothedHinge { smoothing: 1.0 }
    }

    pub fn value(&self, m: f64, y: f64) -> f64 {
        match *self {
            Loss::Squared => 0.5 * (m - y) * (m - y),
            Loss::Logistic => softplus(-y * m),
            Loss::SmoothedHinge { smoothing: s } => {
                let t = y * m;
                if t >= 1.0 {
                    0.0
                } else if t <= 1.0 - s {
                    1.0 - t - 0.5 * s
                } else {
                    (1.0 - t) * (1.0 - t) / (2.0 * s)
                }
            }
        }
    }

    /// dφ/dm
    pub fn deriv(&self, m: f64, y: f64) -> f64 {
        match *self {
            Loss::Squared => m - y,
            Loss::Logistic => -y * sigmoid(-y * m),
            Loss::SmoothedHinge { smoothing: s } => {
                let t = y * m;
                if t >= 1.0 {
                    0.0
                } else if t <= 1.0 - s {
                    -y
                } else {
                    -y * (1.0 - t) / s
                }
            }
        }
    }

    /// d²φ/dm². At the smoothed-hinge kinks the value from the quadratic
    /// piece is used (boundary counted as inside).
    pub fn second(&self, m: f64, y: f64) -> f64 {
        match *self {
            Loss::Squared => 1.0,
            Loss::Logistic => {
                let p = sigmoid(y * m);
                y * y * p * (1.0 - p)
            }
            Loss::SmoothedHinge { smoothing: s } => {
                let t = y * m;
                if t >= 1.0 - s && t <= 1.0 {
                    y * y / s
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper bound on d²φ/dm² over all m.
    pub fn curvature_bound(&self, y: f64) -> f64 {
        match *self {
            Loss::Squared => 1.0,
            Loss::Logistic => 0.25 * y * y,
            Loss::SmoothedHinge { smoothing: s } => y * y / s,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, Loss::Squared)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Loss::Squared => "squared",
            Loss::Logistic => "logistic",
            Loss::SmoothedHinge { .. } => "smoothed-hinge",
        }
    }
}

impl std::str::FromStr for Loss {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "squared" | "ridge" | "least-squares" => Ok(Loss::Squared),
            "logistic" => Ok(Loss::Logistic),
            "smoothed-hinge" | "hinge" | "svm" => Ok(Loss::smoothed_hinge()),
            other => Err(crate::Error::invalid(format!("unknown loss {other:?}"))),
        }
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}
