//! Exterior forms over (dζ, dζ̄, dz̄), Cauchy–Fantappiè–Leray kernels, bracket
//! determinants and the exact constants of the operators.

pub mod chart;
pub mod constants;
pub mod domega;
pub mod exterior;
pub mod kernels;

pub use chart::{chart_reduce, omega_prime_reduced, ChartReduction};
pub use constants::{
    projector_constant, projector_r_range, series_coefficient, simplex_moment, solver_constant,
    ConstantRecord, SimplexMoment,
};
pub use domega::{domega_residual, DomegaPoint, DomegaReport};
pub use exterior::{ExteriorForm, Generator};
pub use kernels::{
    bracket_minors, eval_b, eval_bstar, omega, omega_prime, Column, Denominator, KernelColumnSpec,
    KernelPoint,
};

/// ω′_q: the part of ω′ with exactly `q` dz̄ factors, evaluated from the kernel columns.
pub fn omega_prime_q(
    spec: &KernelColumnSpec,
    pt: &KernelPoint<'_>,
    q: u32,
) -> crate::Result<ExteriorForm> {
    Ok(spec.eval(pt)?.dzbar_part(q))
}
