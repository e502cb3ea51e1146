use crate::momentum::{ldexp, ScaledScalar};

/// Rebase once d has shrunk this many binary orders below the v scale.
const REBASE_GAP: i64 = 200;

/// Storage scale of v in the (u, v, d) form: the stored vector is v·2^E.
///
/// E follows the exponent of d so stored entries stay O(|δ|) while d decays.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UvScale {
    exp: i64,
}

impl UvScale {
    pub fn from_exponent(exp: i64) -> Self {
        Self { exp }
    }

    /// Factor c with d·v = c · stored.
    #[inline]
    pub fn weight(&self, d: ScaledScalar) -> f64 {
        d.to_f64_shifted(-self.exp)
    }

    /// Factor c with v-increment −δ/d stored as −c·δ.
    #[inline]
    pub fn inv_weight(&self, d: ScaledScalar) -> f64 {
        ldexp(1.0 / d.significand(), self.exp - d.exponent())
    }

    /// If d has drifted too far, moves E to d's exponent and returns the
    /// power-of-two factor every stored v entry must be multiplied by.
    pub fn rebase(&mut self, d: ScaledScalar) -> Option<f64> {
        let gap = self.exp - d.exponent();
        if gap <= REBASE_GAP {
            return None;
        }
        self.exp = d.exponent();
        Some(ldexp(1.0, -gap))
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// x = u + d·v.
    pub fn materialize(&self, u: &[f64], v: &[f64], d: ScaledScalar, out: &mut [f64]) {
        let c = self.weight(d);
        for i in 0..u.len() {
            out[i] = u[i] + c * v[i];
        }
    }
}
