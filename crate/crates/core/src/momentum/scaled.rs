/// A positive scalar stored as significand · 2^exponent with the
/// significand in [0.5, 1), so repeated shrinking never underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledScalar {
    sig: f64,
    exp: i64,
}

/// Splits a finite x into (m, e) with x = m · 2^e and |m| ∈ [0.5, 1).
fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // Subnormal: lift into the normal range first.
        let (m, e) = frexp(x * f64::from_bits(0x43f0_0000_0000_0000)); // 2^64
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, raw - 1022)
}

/// x · 2^e without intermediate overflow or underflow of the factor.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return 0.0;
        }
    }
    x * 2f64.powi(e as i32)
}

impl ScaledScalar {
    pub const ONE: ScaledScalar = ScaledScalar { sig: 0.5, exp: 1 };

    pub fn new(x: f64) -> Self {
        let (sig, exp) = frexp(x);
        Self { sig, exp }
    }

    pub fn from_parts(significand: f64, exponent: i64) -> Self {
        let (sig, e) = frexp(significand);
        Self { sig, exp: e + exponent }
    }

    pub fn significand(&self) -> f64 {
        self.sig
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.sig == 0.0
    }

    /// Multiplies by `factor` and renormalizes.
    pub fn scaled_mul(self, factor: f64) -> Self {
        let (sig, e) = frexp(self.sig * factor);
        if sig == 0.0 {
            return Self { sig: 0.0, exp: 0 };
        }
        Self {
            sig,
            exp: self.exp + e,
        }
    }

    /// value · 2^shift as a plain float (may be 0 or inf if out of range).
    pub fn to_f64_shifted(&self, shift: i64) -> f64 {
        ldexp(self.sig, self.exp + shift)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_f64_shifted(0)
    }

    /// Natural logarithm of the value.
    pub fn ln(&self) -> f64 {
        self.sig.ln() + self.exp as f64 * std::f64::consts::LN_2
    }
}

/// Multiplies `d` by `factor` ∈ (0, 1].
pub fn scaled_mul(d: ScaledScalar, factor: f64) -> ScaledScalar {
    d.scaled_mul(factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frexp_roundtrip() {
        for &x in &[1.0, 0.5, 3.0, 1e-310, 1e300, -7.25] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m.abs()), "{x}");
            assert_eq!(ldexp(m, e), x);
        }
    }

    #[test]
    fn exact_power_of_two() {
        let d = ScaledScalar::from_parts(0.5, 0);
        let h = scaled_mul(d, 0.5);
        assert_eq!((h.significand(), h.exponent()), (0.5, -1));
        assert_eq!(scaled_mul(d, 1.0), d);
    }

    #[test]
    fn long_product_tracks_log_domain() {
        let mut d = ScaledScalar::ONE;
        let n = 1_000_000;
        for _ in 0..n {
            d = d.scaled_mul(0.999);
        }
        let oracle = n as f64 * 0.999f64.ln();
        assert!(((d.ln() - oracle) / oracle).abs() <= 1e-9);
        assert!(!d.is_zero());
    }
}
