//! Dirichlet simplex moments and the exact constants of the projector L and
//! the solution operator I, with a factor-by-factor provenance record.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::polycore::ComplexRational;

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |a, b| a * BigInt::from(b))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// ∫_{Δ_p} Π μ_i^{α_i} (1−Σμ)^β dμ = β!Πα_i!/(β+Σα_i+p)!.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplexMoment {
    pub alpha: Vec<u64>,
    pub beta: u64,
    pub p: u64,
    #[serde(serialize_with = "ser_rational")]
    pub value: BigRational,
}

fn ser_rational<S: serde::Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn simplex_moment(alpha: &[u64], beta: u64, p: u64) -> SimplexMoment {
    let num = alpha.iter().fold(factorial(beta), |a, &k| a * factorial(k));
    let den = factorial(beta + alpha.iter().sum::<u64>() + p);
    SimplexMoment {
        alpha: alpha.to_vec(),
        beta,
        p,
        value: BigRational::new(num, den),
    }
}

/// One factor of a constant: rational · (2πi)^power.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantFactor {
    pub label: String,
    pub rational: String,
    pub two_pi_i_power: i32,
    /// True when the factor is applied inside a quadrature rather than here.
    pub applied_in_quadrature: bool,
    #[serde(skip)]
    exact: ComplexRational,
}

impl ConstantFactor {
    fn new(label: impl Into<String>, exact: ComplexRational, power: i32) -> Self {
        Self {
            label: label.into(),
            rational: exact.to_string(),
            two_pi_i_power: power,
            applied_in_quadrature: false,
            exact,
        }
    }

    fn deferred(mut self) -> Self {
        self.applied_in_quadrature = true;
        self
    }

    pub fn value(&self) -> C64 {
        self.exact.to_c64() * C64::new(0.0, 2.0 * PI).powi(self.two_pi_i_power)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantRecord {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub r: Option<usize>,
    pub factors: Vec<ConstantFactor>,
    /// Exact rational part of the applied factors.
    pub rational: String,
    pub two_pi_i_power: i32,
    pub value_re: f64,
    pub value_im: f64,
}

impl ConstantRecord {
    fn assemble(
        name: &str,
        n: usize,
        m: usize,
        q: usize,
        r: Option<usize>,
        factors: Vec<ConstantFactor>,
    ) -> Self {
        let mut exact = ComplexRational::one();
        let mut pow = 0;
        for f in factors.iter().filter(|f| !f.applied_in_quadrature) {
            exact = &exact * &f.exact;
            pow += f.two_pi_i_power;
        }
        let v = exact.to_c64() * C64::new(0.0, 2.0 * PI).powi(pow);
        Self {
            name: name.into(),
            n,
            m,
            q,
            r,
            factors,
            rational: exact.to_string(),
            two_pi_i_power: pow,
            value_re: v.re,
            value_im: v.im,
        }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.value_re, self.value_im)
    }
}

fn sign(k: i64) -> ComplexRational {
    ComplexRational::from_integer(if k.rem_euclid(2) == 0 { 1 } else { -1 })
}

fn rat(b: BigInt) -> ComplexRational {
    ComplexRational::from_rational(BigRational::from_integer(b))
}

/// r-range 0..=d−n−1 of the projector; empty when d ≤ n.
pub fn projector_r_range(n: usize, d: u32) -> std::ops::Range<usize> {
    let top = d as i64 - n as i64 - 1;
    if top < 0 {
        0..0
    } else {
        0..(top as usize + 1)
    }
}

/// c_r = C(q+r, r), the coefficients of (1−x)^{−q−1}.
pub fn series_coefficient(q: usize, r: usize) -> BigInt {
    binomial((q + r) as u64, r as u64)
}

/// C(n,m,d,r) for L_{n−m}. `None` when r lies outside 0..=d−n−1 (the projector
/// term vanishes). `sigma` is the calibrated global orientation sign.
pub fn projector_constant(
    n: usize,
    m: usize,
    d: u32,
    r: usize,
    sigma: i64,
) -> Option<ConstantRecord> {
    if !projector_r_range(n, d).contains(&r) || m > n {
        return None;
    }
    let q = n - m;
    let factors = vec![
        ConstantFactor::new(
            "global n!/(2πi)^{n+1}",
            rat(factorial(n as u64)),
            -(n as i32 + 1),
        ),
        ConstantFactor::new("orientation (−1)^{|J|−1}, |J| = m", sign(m as i64 - 1), 0),
        ConstantFactor::new(
            "series sign (−1)^{q+1} from B* = −(1 − ⟨z̄,ζ⟩) on the sphere",
            sign(q as i64 + 1),
            0,
        ),
        ConstantFactor::new(
            format!("simplex moment ∫_Δ_{m} (1−Σμ)^{q} dμ = q!/n!"),
            ComplexRational::from_rational(simplex_moment(&vec![0; m], q as u64, m as u64).value),
            0,
        ),
        ConstantFactor::new(
            format!("series coefficient c_{r} = C(q+r, r)"),
            rat(series_coefficient(q, r)),
            0,
        ),
        ConstantFactor::new(
            "fiber phase ∮ i dφ (phase average computed in quadrature)",
            ComplexRational::one(),
            1,
        ),
        ConstantFactor::new("residue (2πi)^m", ComplexRational::one(), m as i32).deferred(),
        ConstantFactor::new(
            "calibrated orientation sign σ",
            ComplexRational::from_integer(sigma),
            0,
        ),
    ];
    Some(ConstantRecord::assemble(
        "projector",
        n,
        m,
        q,
        Some(r),
        factors,
    ))
}

/// C for I_q with J = (1..m): (q−1)!/(2πi)^{n+1} up to the calibrated sign.
pub fn solver_constant(n: usize, m: usize, q: usize, sigma: i64) -> Option<ConstantRecord> {
    if q == 0 || q + m > n {
        return None;
    }
    let factors = vec![
        ConstantFactor::new(
            "global n!/(2πi)^{n+1}",
            rat(factorial(n as u64)),
            -(n as i32 + 1),
        ),
        ConstantFactor::new("orientation (−1)^{|J|−1}, |J| = m", sign(m as i64 - 1), 0),
        ConstantFactor::new(
            format!(
                "simplex moment ∫_Δ_{} (1−λ−Σμ)^{} = (q−1)!/n!",
                m + 1,
                q - 1
            ),
            ComplexRational::from_rational(
                simplex_moment(&vec![0; m + 1], (q - 1) as u64, (m + 1) as u64).value,
            ),
            0,
        ),
        ConstantFactor::new(
            "fiber phase ∮ i dφ (evaluated analytically in quadrature)",
            ComplexRational::one(),
            1,
        )
        .deferred(),
        ConstantFactor::new("residue (2πi)^m", ComplexRational::one(), m as i32).deferred(),
        ConstantFactor::new(
            "calibrated orientation sign σ_I",
            ComplexRational::from_integer(sigma),
            0,
        ),
    ];
    Some(ConstantRecord::assemble("solver", n, m, q, None, factors))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_examples() {
        assert_eq!(simplex_moment(&[0], 0, 1).value, BigRational::one());
        assert_eq!(
            simplex_moment(&[1], 0, 1).value,
            BigRational::new(1.into(), 2.into())
        );
        assert_eq!(
            simplex_moment(&[1, 1], 1, 2).value,
            BigRational::new(1.into(), 120.into())
        );
    }

    #[test]
    fn empty_range_below_threshold() {
        assert!(projector_constant(2, 1, 2, 0, -1).is_none());
        assert!(projector_constant(2, 1, 1, 0, -1).is_none());
        assert!(projector_constant(2, 1, 3, 1, -1).is_none());
        assert!(projector_constant(2, 1, 3, 0, -1).is_some());
    }

    #[test]
    fn c0_is_one() {
        for q in 0..6 {
            assert_eq!(series_coefficient(q, 0), BigInt::one());
        }
    }

    #[test]
    fn cubic_projector_constant_is_sigma_over_two_pi_i_squared() {
        let c = projector_constant(2, 1, 3, 0, 1).unwrap();
        let expect = C64::new(0.0, 2.0 * PI).powi(-2);
        assert!((c.value() - expect).norm() < 1e-15);
        assert_eq!(c.two_pi_i_power, -2);
    }
}
