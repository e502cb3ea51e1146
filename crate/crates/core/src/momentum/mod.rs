//! θ schedules, momentum-compensation coefficients, step-size rules and the
//! scaled scalar used for the decaying weight dᵏ.

mod coeffs;
mod scaled;
mod step;
mod theta;

pub use coeffs::{
    b_product, c_coeff, comp_sum_aagd, comp_sum_aagd_with, comp_sum_aascd, comp_sum_aascd_with,
    comp_sum_aasvrg, extrapolation_coeff, AascdCompensation, CoefficientConvention,
};
pub use scaled::{ldexp, scaled_mul, ScaledScalar};
pub use step::{
    asvrg_step_size, asvrg_step_size_best, step_inequality_lhs, step_size, StepConstants,
};
pub use theta::{solve_theta_sc, Algo, Regime, ScheduleParams, ThetaSchedule};
