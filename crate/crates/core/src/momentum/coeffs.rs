use crate::error::{Error, Result};

use super::ThetaSchedule;

/// Which closed form of the extrapolation coefficient aᵏ to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientConvention {
    /// aᵏ = θᵏ(1−θᵏ⁻¹)/θᵏ⁻¹, which makes yᵏ = xᵏ + aᵏ(xᵏ − xᵏ⁻¹) an identity.
    #[default]
    Recursion,
    /// aᵏ = θᵏ(1−θᵏ)/θᵏ⁻¹ as printed in the derivation appendix.
    AppendixLiteral,
}

/// aᵏ. For k = 0 the predecessor θ⁻¹ is taken to be θ⁰; a⁰ only ever
/// multiplies x⁰ − x⁻¹ = 0.
pub fn extrapolation_coeff(s: &ThetaSchedule, k: usize, conv: CoefficientConvention) -> f64 {
    let t = s.theta(k as i64);
    let prev = if k == 0 { t } else { s.theta(k as i64 - 1) };
    match conv {
        CoefficientConvention::Recursion => t * (1.0 - prev) / prev,
        CoefficientConvention::AppendixLiteral => t * (1.0 - t) / prev,
    }
}

/// b(l, k) = ∏_{i=l}^{k} aⁱ (empty product 1 when l > k).
pub fn b_product(s: &ThetaSchedule, l: usize, k: usize, conv: CoefficientConvention) -> f64 {
    (l..=k).map(|i| extrapolation_coeff(s, i, conv)).product()
}

fn check_order(j: usize, k: usize) -> Result<()> {
    if j > k {
        Err(Error::invalid(format!("delayed index j={j} exceeds k={k}")))
    } else {
        Ok(())
    }
}

/// Σ_{i=j}^{k} b(j, i): the full-gradient compensation weight on xʲ − xʲ⁻¹.
pub fn comp_sum_aagd(s: &ThetaSchedule, j: usize, k: usize) -> Result<f64> {
    comp_sum_aagd_with(s, j, k, CoefficientConvention::Recursion)
}

pub fn comp_sum_aagd_with(
    s: &ThetaSchedule,
    j: usize,
    k: usize,
    conv: CoefficientConvention,
) -> Result<f64> {
    check_order(j, k)?;
    let mut prod = 1.0;
    let mut sum = 0.0;
    for i in j..=k {
        prod *= extrapolation_coeff(s, i, conv);
        sum += prod;
    }
    Ok(sum)
}

/// Variants of the coordinate-descent compensation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AascdCompensation {
    /// w = yʲ + Σ_{i=j+1}^{k} b(j+1, i) (yʲ − xʲ): the point reached from
    /// state j when no coordinate moves during steps j+1..k.
    #[default]
    Exact,
    /// w = yʲ + Σ_{i=j+1}^{k} b(j, i) (yʲ − xʲ⁻¹)
    Appendix,
    /// w = yʲ + Σ_{i=j+1}^{k} b(i, k) (yʲ − xʲ⁻¹)
    MainText,
}

/// Coefficient of the exact coordinate-descent compensation.
pub fn comp_sum_aascd(s: &ThetaSchedule, j: usize, k: usize) -> Result<f64> {
    comp_sum_aascd_with(s, j, k, AascdCompensation::Exact)
}

pub fn comp_sum_aascd_with(
    s: &ThetaSchedule,
    j: usize,
    k: usize,
    variant: AascdCompensation,
) -> Result<f64> {
    check_order(j, k)?;
    let conv = CoefficientConvention::Recursion;
    let sum = match variant {
        AascdCompensation::Exact => {
            let mut prod = 1.0;
            let mut sum = 0.0;
            for i in j + 1..=k {
                prod *= extrapolation_coeff(s, i, conv);
                sum += prod;
            }
            sum
        }
        AascdCompensation::Appendix => {
            let mut prod = extrapolation_coeff(s, j, conv);
            let mut sum = 0.0;
            for i in j + 1..=k {
                prod *= extrapolation_coeff(s, i, conv);
                sum += prod;
            }
            sum
        }
        AascdCompensation::MainText => (j + 1..=k).map(|i| b_product(s, i, k, conv)).sum(),
    };
    Ok(sum)
}

/// Σ_{m=1}^{delay+1} a_sᵐ = a_s(1 − a_s^{delay+1})/(1 − a_s).
pub fn comp_sum_aasvrg(a_s: f64, delay: usize) -> Result<f64> {
    if a_s == 1.0 {
        return Ok((delay + 1) as f64);
    }
    if !(0.0..1.0).contains(&a_s) {
        return Err(Error::invalid(format!("momentum weight {a_s} outside [0, 1]")));
    }
    let e = i32::try_from(delay + 1).unwrap_or(i32::MAX);
    Ok(a_s * (1.0 - a_s.powi(e)) / (1.0 - a_s))
}

/// cᵏ = (θᵏ/θᵏ⁻¹)(1/n − θᵏ⁻¹).
pub fn c_coeff(s: &ThetaSchedule, k: usize, n: usize) -> f64 {
    let t = s.theta(k as i64);
    let prev = s.theta(k as i64 - 1);
    t / prev * (1.0 / n as f64 - prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum::{Algo, Regime, ScheduleParams};

    fn nc(algo: Algo, n: usize) -> ThetaSchedule {
        let p = ScheduleParams {
            n,
            ..Default::default()
        };
        ThetaSchedule::new(algo, Regime::Nc, &p).unwrap()
    }

    #[test]
    fn zero_delay_is_single_coefficient() {
        let s = nc(Algo::Aagd, 1);
        for k in 0..10 {
            let a = extrapolation_coeff(&s, k, CoefficientConvention::Recursion);
            assert_eq!(comp_sum_aagd(&s, k, k).unwrap(), a);
        }
    }

    #[test]
    fn appendix_literal_example() {
        let s = nc(Algo::Aagd, 1);
        let conv = CoefficientConvention::AppendixLiteral;
        assert!((extrapolation_coeff(&s, 1, conv) - 2.0 / 9.0).abs() < 1e-15);
        assert!((extrapolation_coeff(&s, 2, conv) - 3.0 / 8.0).abs() < 1e-15);
        let v = comp_sum_aagd_with(&s, 1, 2, conv).unwrap();
        assert!((v - 11.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn recursion_coefficient_vanishes_after_unit_theta() {
        let s = nc(Algo::Aagd, 1);
        assert_eq!(extrapolation_coeff(&s, 1, CoefficientConvention::Recursion), 0.0);
    }

    #[test]
    fn aascd_examples() {
        let s = nc(Algo::Aascd, 2);
        assert_eq!(comp_sum_aascd(&s, 3, 3).unwrap(), 0.0);
        assert!((comp_sum_aascd(&s, 0, 2).unwrap() - 0.6).abs() < 1e-15);
        let c = ThetaSchedule::constant(Algo::Aascd, 0.25).unwrap();
        assert!((comp_sum_aascd(&c, 4, 5).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn aasvrg_examples() {
        assert_eq!(comp_sum_aasvrg(0.3, 0).unwrap(), 0.3);
        assert!((comp_sum_aasvrg(0.5, 2).unwrap() - 0.875).abs() < 1e-15);
        assert_eq!(comp_sum_aasvrg(0.0, 5).unwrap(), 0.0);
        assert_eq!(comp_sum_aasvrg(1.0, 3).unwrap(), 4.0);
        assert!(comp_sum_aasvrg(1.5, 3).is_err());
    }

    #[test]
    fn j_after_k_rejected() {
        let s = nc(Algo::Aagd, 1);
        assert!(comp_sum_aagd(&s, 3, 2).is_err());
        assert!(comp_sum_aascd(&s, 3, 2).is_err());
    }
}
