//! Finite-difference check of d_{ζ,λ,μ}ω′_r(η)∧ω(ζ) + ∂̄_z ω′_{r−1}(η)∧ω(ζ) = 0 for
//! η = (1−λ−Σμ)z̄/B* + λζ̄/B + Σμ_k Q_k/(P_k(ζ)−P_k(z)).
//!
//! Wedging with ω(ζ) removes every dζ component, so the identity is checked on
//! the generators dζ̄, dz̄, dλ, dμ. ζ̄ and z̄ are treated as independent complex
//! variables, which makes every derivative a holomorphic one.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::exterior::{ExteriorForm, Generator};
use super::kernels::omega_prime;
use crate::error::{Error, Result};
use crate::hefer::HeferNum;
use crate::polycore::NumPoly;

#[derive(Clone, Debug)]
pub struct DomegaPoint {
    pub zeta: Vec<C64>,
    pub zeta_bar: Vec<C64>,
    pub z: Vec<C64>,
    pub z_bar: Vec<C64>,
    pub lambda: f64,
    pub mu: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomegaReport {
    /// ‖dω′‖ / Σ_v ‖dv ∧ ∂_v ω′‖.
    pub relative_residual: f64,
    pub absolute_residual: f64,
    pub scale: f64,
    /// Residual split by dz̄-degree r of d_{ζ,λ,μ}ω′_r + ∂̄_zω′_{r−1}.
    pub by_dzbar_degree: Vec<f64>,
}

fn eta_and_differential(
    pt: &DomegaPoint,
    hefer: &[HeferNum],
    polys: &[NumPoly],
) -> Result<(Vec<C64>, Vec<ExteriorForm>)> {
    let nv = pt.z.len();
    let m = polys.len();
    let np = 1 + m;
    let diff: Vec<C64> = pt.zeta.iter().zip(&pt.z).map(|(a, b)| a - b).collect();
    let bstar: C64 = pt.z_bar.iter().zip(&diff).map(|(a, b)| a * b).sum();
    let b: C64 = pt.zeta_bar.iter().zip(&diff).map(|(a, b)| a * b).sum();
    if bstar.norm() == 0.0 {
        return Err(Error::SingularKernel {
            factor: "B*".into(),
        });
    }
    if b.norm() == 0.0 {
        return Err(Error::SingularKernel { factor: "B".into() });
    }
    let mut qs = Vec::with_capacity(m);
    for k in 0..m {
        let dp = polys[k].eval(&pt.zeta) - polys[k].eval(&pt.z);
        if dp.norm() == 0.0 {
            return Err(Error::SingularKernel {
                factor: format!("P_{}(ζ)−P_{}(z)", k + 1, k + 1),
            });
        }
        qs.push(
            hefer[k]
                .eval(&pt.zeta, &pt.z)
                .into_iter()
                .map(|v| v / dp)
                .collect::<Vec<_>>(),
        );
    }
    let a: Vec<C64> = pt.z_bar.iter().map(|v| v / bstar).collect();
    let c: Vec<C64> = pt.zeta_bar.iter().map(|v| v / b).collect();
    let w0 = 1.0 - pt.lambda - pt.mu.iter().sum::<f64>();
    let gen = |g| ExteriorForm::generator(nv, np, g).unwrap();
    let mut eta = Vec::with_capacity(nv);
    let mut deta = Vec::with_capacity(nv);
    for j in 0..nv {
        let mut v = a[j] * w0 + c[j] * pt.lambda;
        for k in 0..m {
            v += qs[k][j] * pt.mu[k];
        }
        eta.push(v);
        let mut f = ExteriorForm::zero(nv, np);
        for l in 0..nv {
            let da = if j == l { 1.0 / bstar } else { C64::default() }
                - pt.z_bar[j] * diff[l] / (bstar * bstar);
            f = f.add(&gen(Generator::DZBar(l)).scale(da * w0));
            let dc =
                if j == l { 1.0 / b } else { C64::default() } - pt.zeta_bar[j] * diff[l] / (b * b);
            f = f.add(&gen(Generator::DZetaBar(l)).scale(dc * pt.lambda));
        }
        f = f.add(&gen(Generator::Param(0)).scale(c[j] - a[j]));
        for k in 0..m {
            f = f.add(&gen(Generator::Param(1 + k)).scale(qs[k][j] - a[j]));
        }
        deta.push(f);
    }
    Ok((eta, deta))
}

pub fn omega_prime_at(
    pt: &DomegaPoint,
    hefer: &[HeferNum],
    polys: &[NumPoly],
) -> Result<ExteriorForm> {
    let (eta, deta) = eta_and_differential(pt, hefer, polys)?;
    Ok(omega_prime(&eta, &deta))
}

/// Central-difference exterior derivative of ω′(η) in (ζ̄, z̄, λ, μ).
pub fn domega_residual(
    pt: &DomegaPoint,
    hefer: &[HeferNum],
    polys: &[NumPoly],
    h: f64,
) -> Result<DomegaReport> {
    let nv = pt.z.len();
    let m = polys.len();
    let np = 1 + m;
    let mut total = ExteriorForm::zero(nv, np);
    let mut scale = 0.0;
    let nvar = 2 * nv + np;
    for v in 0..nvar {
        let mut p = pt.clone();
        let mut q = pt.clone();
        let g = if v < nv {
            p.zeta_bar[v] += h;
            q.zeta_bar[v] -= h;
            Generator::DZetaBar(v)
        } else if v < 2 * nv {
            p.z_bar[v - nv] += h;
            q.z_bar[v - nv] -= h;
            Generator::DZBar(v - nv)
        } else if v == 2 * nv {
            p.lambda += h;
            q.lambda -= h;
            Generator::Param(0)
        } else {
            let k = v - 2 * nv - 1;
            p.mu[k] += h;
            q.mu[k] -= h;
            Generator::Param(1 + k)
        };
        let fp = omega_prime_at(&p, hefer, polys)?;
        let fm = omega_prime_at(&q, hefer, polys)?;
        let deriv = fp.sub(&fm).scale(C64::new(0.5 / h, 0.0));
        let piece = ExteriorForm::generator(nv, np, g)?.wedge(&deriv);
        scale += piece.norm();
        total = total.add(&piece);
    }
    let abs = total.norm();
    let by_r = (0..=nv as u32)
        .map(|r| total.dzbar_part(r).norm() / scale.max(f64::MIN_POSITIVE))
        .collect();
    Ok(DomegaReport {
        relative_residual: abs / scale.max(f64::MIN_POSITIVE),
        absolute_residual: abs,
        scale,
        by_dzbar_degree: by_r,
    })
}
