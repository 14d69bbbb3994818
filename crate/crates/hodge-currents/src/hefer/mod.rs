//! Hefer (Weil) coefficients: P(ζ) − P(z) = Σ_i Q^i(ζ,z)(ζ_i − z_i).

pub mod cache;

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{arg, Result};
use crate::polycore::poly::{monomial_c64, monomial_exact};
use crate::polycore::{ComplexRational, HomogeneousPolynomial, MultiIndex};

pub use cache::HeferCache;

/// Polynomial in (ζ, z) ∈ C^{n+1} × C^{n+1}, homogeneous of a fixed joint degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BihomogeneousPolynomial {
    num_vars: usize,
    joint_degree: u32,
    terms: BTreeMap<(MultiIndex, MultiIndex), ComplexRational>,
}

impl BihomogeneousPolynomial {
    pub fn zero(num_vars: usize, joint_degree: u32) -> Self {
        Self {
            num_vars,
            joint_degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        num_vars: usize,
        joint_degree: u32,
        terms: impl IntoIterator<Item = ((MultiIndex, MultiIndex), ComplexRational)>,
    ) -> Result<Self> {
        let mut p = Self::zero(num_vars, joint_degree);
        for ((a, b), c) in terms {
            if a.len() != num_vars || b.len() != num_vars {
                return arg("bihomogeneous term has wrong number of variables");
            }
            if a.degree() + b.degree() != joint_degree {
                return arg(format!(
                    "term of joint degree {} in a polynomial of joint degree {joint_degree}",
                    a.degree() + b.degree()
                ));
            }
            p.add_term(a, b, &c);
        }
        Ok(p)
    }

    fn add_term(&mut self, a: MultiIndex, b: MultiIndex, c: &ComplexRational) {
        if c.is_zero() {
            return;
        }
        let key = (a, b);
        let vanished = match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                v.is_zero()
            }
            None => {
                self.terms.insert(key.clone(), c.clone());
                false
            }
        };
        if vanished {
            self.terms.remove(&key);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn joint_degree(&self) -> u32 {
        self.joint_degree
    }

    pub fn terms(&self) -> &BTreeMap<(MultiIndex, MultiIndex), ComplexRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_bihomogeneous(&self) -> bool {
        self.terms
            .keys()
            .all(|(a, b)| a.degree() + b.degree() == self.joint_degree)
    }

    pub fn scale(&self, s: &ComplexRational) -> Self {
        let mut out = Self::zero(self.num_vars, self.joint_degree);
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), &(c * s));
        }
        out
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if o.num_vars != self.num_vars || o.joint_degree != self.joint_degree {
            return arg("adding bihomogeneous polynomials of different shapes");
        }
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(a.clone(), b.clone(), c);
        }
        Ok(out)
    }

    /// Product with (ζ_i − z_i).
    pub fn mul_displacement(&self, i: usize) -> Self {
        let mut out = Self::zero(self.num_vars, self.joint_degree + 1);
        let u = MultiIndex::unit(self.num_vars, i);
        for ((a, b), c) in &self.terms {
            out.add_term(a.add(&u), b.clone(), c);
            out.add_term(a.clone(), b.add(&u), &(-c));
        }
        out
    }

    /// P(ζ) − P(z) as a bihomogeneous polynomial.
    pub fn difference_of(p: &HomogeneousPolynomial) -> Self {
        let nv = p.num_vars();
        let zero = MultiIndex::zero(nv);
        let mut out = Self::zero(nv, p.degree());
        for (e, c) in p.terms() {
            out.add_term(e.clone(), zero.clone(), c);
            out.add_term(zero.clone(), e.clone(), &(-c));
        }
        out
    }

    pub fn eval_exact(
        &self,
        zeta: &[ComplexRational],
        z: &[ComplexRational],
    ) -> Result<ComplexRational> {
        if zeta.len() != self.num_vars || z.len() != self.num_vars {
            return arg("point length does not match the number of variables");
        }
        let mut acc = ComplexRational::zero();
        for ((a, b), c) in &self.terms {
            let t = &(c * &monomial_exact(zeta, &a.0)) * &monomial_exact(z, &b.0);
            acc += &t;
        }
        Ok(acc)
    }

    pub fn eval(&self, zeta: &[C64], z: &[C64]) -> Result<C64> {
        if zeta.len() != self.num_vars || z.len() != self.num_vars {
            return arg("point length does not match the number of variables");
        }
        Ok(self
            .terms
            .iter()
            .map(|((a, b), c)| c.to_c64() * monomial_c64(zeta, &a.0) * monomial_c64(z, &b.0))
            .sum())
    }
}

/// Q^0..Q^n for a homogeneous P of degree d, each of joint degree d − 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeferDecomposition {
    pub source: HomogeneousPolynomial,
    pub coefficients: Vec<BihomogeneousPolynomial>,
}

impl HeferDecomposition {
    /// P(ζ) − P(z) − Σ Q^i(ζ_i − z_i), exact. Zero for a valid decomposition.
    pub fn residual(&self) -> BihomogeneousPolynomial {
        let mut r = BihomogeneousPolynomial::difference_of(&self.source);
        for (i, q) in self.coefficients.iter().enumerate() {
            let t = q
                .mul_displacement(i)
                .scale(&ComplexRational::from_integer(-1));
            r = r.add(&t).expect("matching shapes");
        }
        r
    }

    pub fn verify(&self) -> bool {
        let d = self.source.degree();
        self.coefficients.len() == self.source.num_vars()
            && self
                .coefficients
                .iter()
                .all(|q| q.joint_degree() + 1 == d && q.is_bihomogeneous())
            && self.residual().is_zero()
    }

    pub fn compile(&self) -> HeferNum {
        HeferNum::new(self)
    }
}

/// Hefer coefficients of c·ζ^e by peeling variables in ascending index order:
/// Q^i = z_0^{e_0}⋯z_{i−1}^{e_{i−1}} · (Σ_j ζ_i^{e_i−1−j} z_i^j) · ζ_{i+1}^{e_{i+1}}⋯ζ_n^{e_n}.
pub fn hefer_monomial(monomial: &MultiIndex, coefficient: &ComplexRational) -> HeferDecomposition {
    let nv = monomial.len();
    let d = monomial.degree();
    let source =
        HomogeneousPolynomial::from_terms(nv, d, [(monomial.clone(), coefficient.clone())])
            .expect("monomial is homogeneous");
    if d == 0 {
        return HeferDecomposition {
            source,
            coefficients: vec![BihomogeneousPolynomial::zero(nv, 0); nv],
        };
    }
    let e = &monomial.0;
    let mut coefficients = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut q = BihomogeneousPolynomial::zero(nv, d - 1);
        if e[i] > 0 {
            for j in 0..e[i] {
                let mut a = vec![0u32; nv];
                let mut b = vec![0u32; nv];
                b[..i].copy_from_slice(&e[..i]);
                a[i + 1..].copy_from_slice(&e[i + 1..]);
                a[i] = e[i] - 1 - j;
                b[i] = j;
                q.add_term(MultiIndex(a), MultiIndex(b), coefficient);
            }
        }
        coefficients.push(q);
    }
    HeferDecomposition {
        source,
        coefficients,
    }
}

pub fn hefer_decompose(p: &HomogeneousPolynomial) -> Result<HeferDecomposition> {
    if p.degree() == 0 {
        return arg("Hefer decomposition needs degree at least one");
    }
    let nv = p.num_vars();
    let mut coefficients = vec![BihomogeneousPolynomial::zero(nv, p.degree() - 1); nv];
    for (e, c) in p.terms() {
        let h = hefer_monomial(e, c);
        for (acc, q) in coefficients.iter_mut().zip(&h.coefficients) {
            *acc = acc.add(q)?;
        }
    }
    Ok(HeferDecomposition {
        source: p.clone(),
        coefficients,
    })
}

pub fn eval_hefer(q: &BihomogeneousPolynomial, zeta: &[C64], z: &[C64]) -> Result<C64> {
    q.eval(zeta, z)
}

/// Floating-point Hefer coefficients with evaluation graded by ζ-degree.
#[derive(Clone, Debug)]
pub struct HeferNum {
    pub num_vars: usize,
    pub joint_degree: u32,
    /// Per coefficient i: (ζ exponents, z exponents, ζ-degree, coefficient).
    terms: Vec<Vec<(Vec<u32>, Vec<u32>, usize, C64)>>,
    max_zeta: Vec<u32>,
    max_z: Vec<u32>,
}

fn power_table(x: &[C64], max: &[u32]) -> Vec<Vec<C64>> {
    x.iter()
        .zip(max)
        .map(|(&v, &m)| {
            let mut p = Vec::with_capacity(m as usize + 1);
            let mut acc = C64::new(1.0, 0.0);
            p.push(acc);
            for _ in 0..m {
                acc *= v;
                p.push(acc);
            }
            p
        })
        .collect()
}

impl HeferNum {
    pub fn new(h: &HeferDecomposition) -> Self {
        let nv = h.source.num_vars();
        let mut max_zeta = vec![0; nv];
        let mut max_z = vec![0; nv];
        let terms = h
            .coefficients
            .iter()
            .map(|q| {
                q.terms()
                    .iter()
                    .map(|((a, b), c)| {
                        for k in 0..nv {
                            max_zeta[k] = max_zeta[k].max(a.0[k]);
                            max_z[k] = max_z[k].max(b.0[k]);
                        }
                        (a.0.clone(), b.0.clone(), a.degree() as usize, c.to_c64())
                    })
                    .collect()
            })
            .collect();
        Self {
            num_vars: nv,
            joint_degree: h.source.degree() - 1,
            terms,
            max_zeta,
            max_z,
        }
    }

    /// Q^i(ζ, z) for all i.
    pub fn eval(&self, zeta: &[C64], z: &[C64]) -> Vec<C64> {
        self.eval_graded(zeta, z)
            .into_iter()
            .map(|g| g.into_iter().sum())
            .collect()
    }

    /// out[i][j] = part of Q^i(ζ, z) of degree j in ζ, j = 0..=d−1.
    pub fn eval_graded(&self, zeta: &[C64], z: &[C64]) -> Vec<Vec<C64>> {
        let pz = power_table(zeta, &self.max_zeta);
        let pw = power_table(z, &self.max_z);
        let nd = self.joint_degree as usize + 1;
        self.terms
            .iter()
            .map(|ts| {
                let mut g = vec![C64::new(0.0, 0.0); nd];
                for (a, b, deg, c) in ts {
                    let mut t = *c;
                    for k in 0..self.num_vars {
                        if a[k] > 0 {
                            t *= pz[k][a[k] as usize];
                        }
                        if b[k] > 0 {
                            t *= pw[k][b[k] as usize];
                        }
                    }
                    g[*deg] += t;
                }
                g
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cr(v: i64) -> ComplexRational {
        ComplexRational::from_integer(v)
    }

    #[test]
    fn square_of_one_variable() {
        let h = hefer_monomial(&MultiIndex(vec![2, 0]), &cr(1));
        let q0 = &h.coefficients[0];
        assert_eq!(q0.terms().len(), 2);
        assert!(h.coefficients[1].is_zero());
        let v = q0
            .eval(
                &[C64::new(2.0, 0.0), C64::new(0.0, 0.0)],
                &[C64::new(3.0, 0.0), C64::new(0.0, 0.0)],
            )
            .unwrap();
        assert_eq!(v, C64::new(5.0, 0.0));
    }

    #[test]
    fn product_peels_first_variable() {
        let h = hefer_monomial(&MultiIndex(vec![1, 1]), &cr(1));
        let q0: Vec<_> = h.coefficients[0].terms().keys().cloned().collect();
        let q1: Vec<_> = h.coefficients[1].terms().keys().cloned().collect();
        assert_eq!(q0, vec![(MultiIndex(vec![0, 1]), MultiIndex(vec![0, 0]))]);
        assert_eq!(q1, vec![(MultiIndex(vec![0, 0]), MultiIndex(vec![1, 0]))]);
        assert!(h.verify());
    }

    #[test]
    fn cube_in_last_variable() {
        let h = hefer_monomial(&MultiIndex(vec![0, 0, 3]), &cr(1));
        assert!(h.coefficients[0].is_zero() && h.coefficients[1].is_zero());
        assert_eq!(h.coefficients[2].terms().len(), 3);
        assert!(h.verify());
    }

    #[test]
    fn degree_zero_monomial_is_all_zero() {
        let h = hefer_monomial(&MultiIndex(vec![0, 0]), &cr(5));
        assert!(h.coefficients.iter().all(|q| q.is_zero()));
    }

    #[test]
    fn graded_sums_to_value() {
        let p = HomogeneousPolynomial::from_terms(
            3,
            3,
            [
                (MultiIndex(vec![1, 1, 1]), cr(2)),
                (
                    MultiIndex(vec![0, 3, 0]),
                    ComplexRational::from_gaussian(1, -1),
                ),
            ],
        )
        .unwrap();
        let h = hefer_decompose(&p).unwrap();
        let num = h.compile();
        let zeta = [C64::new(0.3, 0.1), C64::new(-0.5, 0.2), C64::new(0.7, 0.0)];
        let z = [C64::new(0.1, -0.4), C64::new(0.2, 0.2), C64::new(-0.3, 0.5)];
        let v = num.eval(&zeta, &z);
        for (i, q) in h.coefficients.iter().enumerate() {
            assert!((q.eval(&zeta, &z).unwrap() - v[i]).norm() < 1e-15);
        }
    }
}
