use crate::error::{Error, Result};

/// Nonsmooth (or simple smooth) part h of the composite objective.
///
/// Every family here has a closed-form proximal step; there is no generic
/// numeric fallback.
#[derive(Debug, Clone, PartialEq)]
pub enum NonsmoothPart {
    Zero,
    /// (μ/2)‖x‖²
    Ridge { mu: f64 },
    /// weight · ‖x‖₁
    L1 { weight: f64 },
    /// Indicator of the box [lo, hi]^d.
    Box { lo: f64, hi: f64 },
    /// Σ_i linear_i x_i + (quad/2) x_i², restricted to lo_i ≤ x_i ≤ hi_i.
    ///
    /// This is the conjugate term of the smoothed-hinge dual.
    QuadBox {
        linear: Vec<f64>,
        quad: f64,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// weight · ‖x‖₂ (not coordinate separable).
    GroupNorm { weight: f64 },
}

/// Which coordinates a proximal step acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coords {
    All,
    Single(usize),
}

impl NonsmoothPart {
    /// Strong-convexity modulus.
    pub fn mu(&self) -> f64 {
        match self {
            NonsmoothPart::Ridge { mu } => *mu,
            NonsmoothPart::QuadBox { quad, .. } => *quad,
            _ => 0.0,
        }
    }

    pub fn is_separable(&self) -> bool {
        !matches!(self, NonsmoothPart::GroupNorm { .. })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            NonsmoothPart::Zero => 0.0,
            NonsmoothPart::Ridge { mu } => 0.5 * mu * crate::linalg::norm_sq(x),
            NonsmoothPart::L1 { weight } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            NonsmoothPart::Box { lo, hi } => {
                if x.iter().all(|v| v >= lo && v <= hi) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            NonsmoothPart::QuadBox {
                linear,
                quad,
                lo,
                hi,
            } => {
                let mut s = 0.0;
                for i in 0..x.len() {
                    if x[i] < lo[i] || x[i] > hi[i] {
                        return f64::INFINITY;
                    }
                    s += linear[i] * x[i] + 0.5 * quad * x[i] * x[i];
                }
                s
            }
            NonsmoothPart::GroupNorm { weight } => weight * crate::linalg::norm(x),
        }
    }

    /// Whether x lies in dom h.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.value(x).is_finite()
    }

    /// Closed-form minimizer of h_i(z_i + δ) + g_i δ + (weight/2) δ² over δ.
    pub fn prox_coord(&self, i: usize, z: f64, g: f64, weight: f64) -> Result<f64> {
        debug_assert!(weight > 0.0);
        let delta = match self {
            NonsmoothPart::Zero => -g / weight,
            NonsmoothPart::Ridge { mu } => -(g + mu * z) / (mu + weight),
            NonsmoothPart::L1 { weight: l } => {
                let t = z - g / weight;
                soft_threshold(t, l / weight) - z
            }
            NonsmoothPart::Box { lo, hi } => (z - g / weight).clamp(*lo, *hi) - z,
            NonsmoothPart::QuadBox {
                linear,
                quad,
                lo,
                hi,
            } => {
                let t = (weight * z - g - linear[i]) / (quad + weight);
                t.clamp(lo[i], hi[i]) - z
            }
            NonsmoothPart::GroupNorm { .. } => {
                return Err(Error::Unsupported(
                    "coordinate prox of a non-separable regularizer".into(),
                ))
            }
        };
        Ok(delta)
    }

    /// Writes δ = argmin h(z+δ) + ⟨g,δ⟩ + (weight/2)‖δ‖² into `out`.
    pub fn prox_full_into(&self, z: &[f64], g: &[f64], weight: f64, out: &mut [f64]) {
        if let NonsmoothPart::GroupNorm { weight: l } = self {
            let t: Vec<f64> = z.iter().zip(g).map(|(zi, gi)| zi - gi / weight).collect();
            let n = crate::linalg::norm(&t);
            let shrink = if n > 0.0 {
                (1.0 - (l / weight) / n).max(0.0)
            } else {
                0.0
            };
            for i in 0..z.len() {
                out[i] = shrink * t[i] - z[i];
            }
            return;
        }
        for i in 0..z.len() {
            out[i] = self
                .prox_coord(i, z[i], g[i], weight)
                .expect("separable families always have a coordinate prox");
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let ok = match self {
            NonsmoothPart::Zero => true,
            NonsmoothPart::Ridge { mu } => *mu >= 0.0 && mu.is_finite(),
            NonsmoothPart::L1 { weight } | NonsmoothPart::GroupNorm { weight } => {
                *weight >= 0.0 && weight.is_finite()
            }
            NonsmoothPart::Box { lo, hi } => lo <= hi,
            NonsmoothPart::QuadBox {
                linear,
                quad,
                lo,
                hi,
            } => {
                linear.len() == dim
                    && lo.len() == dim
                    && hi.len() == dim
                    && *quad >= 0.0
                    && lo.iter().zip(hi).all(|(a, b)| a <= b)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("malformed regularizer {self:?}")))
        }
    }
}

#[inline]
fn soft_threshold(t: f64, k: f64) -> f64 {
    if t > k {
        t - k
    } else if t < -k {
        t + k
    } else {
        0.0
    }
}

/// Proximal step δ for the given coordinates. For `Coords::Single(i)` every
/// other coordinate of δ is zero.
pub fn prox_step(
    h: &NonsmoothPart,
    z: &[f64],
    g: &[f64],
    weight: f64,
    coords: Coords,
) -> Result<Vec<f64>> {
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(Error::invalid("prox weight must be positive"));
    }
    if z.len() != g.len() {
        return Err(Error::invalid("z and g differ in length"));
    }
    match coords {
        Coords::All => {
            let mut out = vec![0.0; z.len()];
            h.prox_full_into(z, g, weight, &mut out);
            Ok(out)
        }
        Coords::Single(i) => {
            if i >= z.len() {
                return Err(Error::OutOfRange {
                    index: i,
                    len: z.len(),
                });
            }
            let mut out = vec![0.0; z.len()];
            out[i] = h.prox_coord(i, z[i], g[i], weight)?;
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_quadratic() {
        let d = prox_step(&NonsmoothPart::Zero, &[0.0, 0.0], &[2.0, 4.0], 2.0, Coords::All).unwrap();
        assert_eq!(d, vec![-1.0, -2.0]);
    }

    #[test]
    fn ridge_closed_form() {
        let d = prox_step(&NonsmoothPart::Ridge { mu: 1.0 }, &[1.0], &[1.0], 1.0, Coords::All).unwrap();
        assert_eq!(d, vec![-1.0]);
    }

    #[test]
    fn box_projects_to_upper_bound() {
        let h = NonsmoothPart::Box { lo: 0.0, hi: 1.0 };
        let d = prox_step(&h, &[0.5], &[-10.0], 1.0, Coords::All).unwrap();
        assert_eq!(d, vec![0.5]);
    }

    #[test]
    fn l1_soft_thresholds() {
        let h = NonsmoothPart::L1 { weight: 1.0 };
        // t = 0 - (-3)/1 = 3 -> 2
        assert_eq!(h.prox_coord(0, 0.0, -3.0, 1.0).unwrap(), 2.0);
        assert_eq!(h.prox_coord(0, 0.0, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn single_coordinate_leaves_others() {
        let h = NonsmoothPart::Ridge { mu: 0.5 };
        let d = prox_step(&h, &[1.0, 2.0], &[1.0, 1.0], 1.0, Coords::Single(1)).unwrap();
        assert_eq!(d[0], 0.0);
        assert!((d[1] - (-(1.0 + 1.0) / 1.5)).abs() < 1e-15);
    }

    #[test]
    fn non_separable_coordinate_prox_is_rejected() {
        let h = NonsmoothPart::GroupNorm { weight: 1.0 };
        assert!(matches!(
            prox_step(&h, &[1.0, 1.0], &[0.0, 0.0], 1.0, Coords::Single(0)),
            Err(Error::Unsupported(_))
        ));
        let d = prox_step(&h, &[3.0, 4.0], &[0.0, 0.0], 1.0, Coords::All).unwrap();
        // shrink ‖(3,4)‖ = 5 by 1
        assert!((d[0] - (3.0 * 0.8 - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_weight_rejected() {
        assert!(prox_step(&NonsmoothPart::Zero, &[0.0], &[0.0], 0.0, Coords::All).is_err());
    }
}
