//! Sphere points in chart coordinates: ζ = ρ(w)·e^{iφ}·s_α(w).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::polycore::variety::{chart_coords, sphere_lift};

#[derive(Clone, Debug, PartialEq)]
pub struct ChartReduction {
    pub alpha: usize,
    pub w: Vec<C64>,
    pub rho: f64,
    /// e^{iφ_α}.
    pub phase: C64,
}

/// Chart data of a point on S^{2n+1} with ζ_α ≠ 0.
pub fn chart_reduce(zeta: &[C64], alpha: usize) -> Result<ChartReduction> {
    let za = zeta[alpha];
    if za.norm() == 0.0 {
        return Err(Error::Chart { chart: alpha });
    }
    let w = chart_coords(alpha, zeta)?;
    let tau2: f64 = zeta.iter().map(|v| v.norm_sqr()).sum();
    let rho = za.norm() / tau2.sqrt();
    Ok(ChartReduction {
        alpha,
        w,
        rho,
        phase: za / za.norm(),
    })
}

impl ChartReduction {
    /// The unit-sphere point ρ e^{iφ} s_α(w).
    pub fn zeta(&self) -> Vec<C64> {
        let (z, _) = sphere_lift(self.alpha, &self.w);
        z.into_iter().map(|v| v * self.phase).collect()
    }

    /// |τ|²/|ζ_α|² − (1 + Σ|w_i|²); zero up to rounding.
    pub fn r0_residual(&self, zeta: &[C64]) -> f64 {
        let tau2: f64 = zeta.iter().map(|v| v.norm_sqr()).sum();
        let lhs = tau2 / zeta[self.alpha].norm_sqr();
        let rhs = 1.0 + self.w.iter().map(|v| v.norm_sqr()).sum::<f64>();
        (lhs - rhs).abs() / rhs
    }
}

/// Coefficient of dw_1∧…∧dw_n in ω′(ζ) restricted to chart α: (−1)^α ζ_α^{n+1}.
pub fn omega_prime_reduced(alpha: usize, zeta: &[C64]) -> C64 {
    let n1 = zeta.len() as u32;
    let s = if alpha.is_multiple_of(2) { 1.0 } else { -1.0 };
    zeta[alpha].powu(n1) * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::exterior::{ExteriorForm, Generator};
    use crate::forms::kernels::omega_prime;
    use crate::polycore::variety::chart_lift;

    #[test]
    fn omega_prime_reduces_to_power_of_chart_coordinate() {
        // ω′(ζ) with ζ = c·s_α(w): dζ_j = c dw_j for j ≠ α (dc terms cancel in ω′).
        let n = 2;
        for alpha in 0..=n {
            let w = [C64::new(0.3, -0.4), C64::new(-0.2, 0.6)];
            let c = C64::new(0.5, 0.25);
            let zeta: Vec<C64> = chart_lift(alpha, &w).into_iter().map(|v| v * c).collect();
            // represent dw_j by the dz̄ generators purely as placeholders
            let deta: Vec<ExteriorForm> = (0..=n)
                .map(|i| {
                    if i == alpha {
                        ExteriorForm::zero(n + 1, 0)
                    } else {
                        let j = if i < alpha { i } else { i - 1 };
                        ExteriorForm::generator(n + 1, 0, Generator::DZBar(j))
                            .unwrap()
                            .scale(c)
                    }
                })
                .collect();
            let f = omega_prime(&zeta, &deta);
            let got = f
                .coeff_of(&[Generator::DZBar(0), Generator::DZBar(1)])
                .unwrap();
            assert!(
                (got - omega_prime_reduced(alpha, &zeta)).norm() < 1e-14,
                "chart {alpha}"
            );
        }
    }

    #[test]
    fn r0_identity_and_round_trip() {
        let zeta = [C64::new(0.2, 0.5), C64::new(-0.6, 0.1), C64::new(0.3, -0.4)];
        let nrm = zeta.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let zeta: Vec<C64> = zeta.iter().map(|v| v / nrm).collect();
        for a in 0..3 {
            let red = chart_reduce(&zeta, a).unwrap();
            assert!(red.r0_residual(&zeta) < 1e-14);
            let back = red.zeta();
            for (x, y) in back.iter().zip(&zeta) {
                assert!((x - y).norm() < 1e-14);
            }
        }
    }
}
