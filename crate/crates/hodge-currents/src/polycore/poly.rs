//! Homogeneous polynomials on C^{n+1}, their chart restrictions, and compiled
//! floating-point evaluators.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rational::ComplexRational;
use crate::error::{arg, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(len: usize) -> Self {
        MultiIndex(vec![0; len])
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut e = vec![0; len];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices of the given length and total degree, in lexicographic order.
    pub fn all_of_degree(len: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(len: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if cur.len() + 1 == len {
                cur.push(left);
                out.push(MultiIndex(cur.clone()));
                cur.pop();
                return;
            }
            for e in (0..=left).rev() {
                cur.push(e);
                rec(len, left - e, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if len == 0 {
            if degree == 0 {
                out.push(MultiIndex(vec![]));
            }
            return out;
        }
        rec(len, degree, &mut Vec::with_capacity(len), &mut out);
        out
    }
}

pub fn monomial_c64(point: &[C64], e: &[u32]) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for (x, &k) in point.iter().zip(e) {
        if k > 0 {
            v *= x.powu(k);
        }
    }
    v
}

pub fn monomial_exact(point: &[ComplexRational], e: &[u32]) -> ComplexRational {
    let mut v = ComplexRational::one();
    for (x, &k) in point.iter().zip(e) {
        if k > 0 {
            v = &v * &x.pow(k);
        }
    }
    v
}

/// Homogeneous polynomial in `num_vars` variables z_0..z_n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousPolynomial {
    num_vars: usize,
    degree: u32,
    terms: BTreeMap<MultiIndex, ComplexRational>,
}

impl HomogeneousPolynomial {
    pub fn zero(num_vars: usize, degree: u32) -> Self {
        Self {
            num_vars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        num_vars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (MultiIndex, ComplexRational)>,
    ) -> Result<Self> {
        let mut p = Self::zero(num_vars, degree);
        for (e, c) in terms {
            if e.len() != num_vars {
                return arg(format!(
                    "exponent tuple {:?} has length {}, expected {}",
                    e.0,
                    e.len(),
                    num_vars
                ));
            }
            if e.degree() != degree {
                return arg(format!(
                    "exponent tuple {:?} has degree {}, expected {}",
                    e.0,
                    e.degree(),
                    degree
                ));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Infers the degree from the first term. Empty input is rejected.
    pub fn from_terms_infer(
        num_vars: usize,
        terms: Vec<(MultiIndex, ComplexRational)>,
    ) -> Result<Self> {
        let Some(first) = terms.first() else {
            return arg("polynomial has no terms");
        };
        let d = first.0.degree();
        Self::from_terms(num_vars, d, terms)
    }

    pub(crate) fn add_term(&mut self, e: MultiIndex, c: ComplexRational) {
        if c.is_zero() {
            return;
        }
        let vanished = {
            let entry = self
                .terms
                .entry(e.clone())
                .or_insert_with(ComplexRational::zero);
            *entry += &c;
            entry.is_zero()
        };
        if vanished {
            self.terms.remove(&e);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, ComplexRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval_exact(&self, point: &[ComplexRational]) -> Result<ComplexRational> {
        if point.len() != self.num_vars {
            return arg(format!(
                "point has length {}, polynomial has {} variables",
                point.len(),
                self.num_vars
            ));
        }
        let mut acc = ComplexRational::zero();
        for (e, c) in &self.terms {
            acc += &(c * &monomial_exact(point, &e.0));
        }
        Ok(acc)
    }

    pub fn eval(&self, point: &[C64]) -> Result<C64> {
        if point.len() != self.num_vars {
            return arg(format!(
                "point has length {}, polynomial has {} variables",
                point.len(),
                self.num_vars
            ));
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| c.to_c64() * monomial_c64(point, &e.0))
            .sum())
    }

    pub fn partial(&self, j: usize) -> HomogeneousPolynomial {
        let mut out = Self::zero(self.num_vars, self.degree.saturating_sub(1));
        for (e, c) in &self.terms {
            let k = e.0[j];
            if k == 0 {
                continue;
            }
            let mut f = e.0.clone();
            f[j] -= 1;
            out.add_term(MultiIndex(f), c.scale_int(k as i64));
        }
        out
    }

    pub fn scale(&self, s: &ComplexRational) -> HomogeneousPolynomial {
        let mut out = Self::zero(self.num_vars, self.degree);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn add(&self, o: &HomogeneousPolynomial) -> Result<HomogeneousPolynomial> {
        if o.num_vars != self.num_vars
            || (o.degree != self.degree && !o.is_zero() && !self.is_zero())
        {
            return arg("adding polynomials of different shape");
        }
        let degree = if self.is_zero() {
            o.degree
        } else {
            self.degree
        };
        let mut out = Self::zero(self.num_vars, degree);
        for (e, c) in self.terms.iter().chain(o.terms.iter()) {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, o: &HomogeneousPolynomial) -> HomogeneousPolynomial {
        let mut out = Self::zero(self.num_vars, self.degree + o.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }

    pub fn dehomogenize(&self, alpha: usize) -> Result<ChartPolynomial> {
        if alpha >= self.num_vars {
            return arg(format!("chart {alpha} out of range 0..{}", self.num_vars));
        }
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let f: Vec<u32> = (0..self.num_vars)
                .filter(|&j| j != alpha)
                .map(|j| e.0[j])
                .collect();
            terms.insert(MultiIndex(f), c.clone());
        }
        Ok(ChartPolynomial {
            chart: alpha,
            num_affine: self.num_vars - 1,
            terms,
        })
    }

    /// Stable content hash used as the Hefer cache key.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("vars={};deg={};", self.num_vars, self.degree).as_bytes());
        for (e, c) in &self.terms {
            let (re, im) = c.to_fraction_pairs();
            h.update(format!("{:?}:{}/{},{}/{};", e.0, re[0], re[1], im[0], im[1]).as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn compile(&self) -> NumPoly {
        NumPoly::new(
            self.num_vars,
            self.terms.iter().map(|(e, c)| (e.0.clone(), c.to_c64())),
        )
    }

    pub fn gradient(&self) -> Vec<HomogeneousPolynomial> {
        (0..self.num_vars).map(|j| self.partial(j)).collect()
    }
}

/// F^{(α)}(w) = P(z)/z_α^d with w the remaining coordinates in increasing index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartPolynomial {
    pub chart: usize,
    pub num_affine: usize,
    pub terms: BTreeMap<MultiIndex, ComplexRational>,
}

impl ChartPolynomial {
    pub fn constant(chart: usize, num_affine: usize, c: ComplexRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(MultiIndex::zero(num_affine), c);
        }
        Self {
            chart,
            num_affine,
            terms,
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.degree()).max().unwrap_or(0)
    }

    pub fn homogenize(&self, degree: u32) -> Result<HomogeneousPolynomial> {
        let nv = self.num_affine + 1;
        let mut out = HomogeneousPolynomial::zero(nv, degree);
        for (e, c) in &self.terms {
            let k = e.degree();
            if k > degree {
                return arg(format!("chart term of degree {k} exceeds {degree}"));
            }
            let mut f = Vec::with_capacity(nv);
            let mut it = e.0.iter();
            for j in 0..nv {
                if j == self.chart {
                    f.push(degree - k);
                } else {
                    f.push(*it.next().unwrap());
                }
            }
            out.add_term(MultiIndex(f), c.clone());
        }
        Ok(out)
    }

    pub fn eval_exact(&self, w: &[ComplexRational]) -> ComplexRational {
        let mut acc = ComplexRational::zero();
        for (e, c) in &self.terms {
            acc += &(c * &monomial_exact(w, &e.0));
        }
        acc
    }

    pub fn compile(&self) -> NumPoly {
        NumPoly::new(
            self.num_affine,
            self.terms.iter().map(|(e, c)| (e.0.clone(), c.to_c64())),
        )
    }
}

/// Floating-point polynomial with value and gradient evaluation.
#[derive(Clone, Debug)]
pub struct NumPoly {
    pub nvars: usize,
    pub terms: Vec<(Vec<u32>, C64)>,
    max_exp: Vec<u32>,
}

impl NumPoly {
    pub fn new(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Self {
        let terms: Vec<_> = terms.into_iter().collect();
        let mut max_exp = vec![0u32; nvars];
        for (e, _) in &terms {
            for (m, &k) in max_exp.iter_mut().zip(e) {
                *m = (*m).max(k);
            }
        }
        Self {
            nvars,
            terms,
            max_exp,
        }
    }

    fn powers(&self, x: &[C64]) -> Vec<Vec<C64>> {
        x.iter()
            .zip(&self.max_exp)
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

    pub fn eval(&self, x: &[C64]) -> C64 {
        let pw = self.powers(x);
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= pw[j][k as usize];
                }
            }
            acc += t;
        }
        acc
    }

    /// Value and holomorphic gradient.
    pub fn eval_grad(&self, x: &[C64]) -> (C64, Vec<C64>) {
        let pw = self.powers(x);
        let mut val = C64::new(0.0, 0.0);
        let mut grad = vec![C64::new(0.0, 0.0); self.nvars];
        for (e, c) in &self.terms {
            let mut t = *c;
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= pw[j][k as usize];
                }
            }
            val += t;
            for j in 0..self.nvars {
                let k = e[j];
                if k == 0 {
                    continue;
                }
                let mut g = *c * k as f64;
                for (l, &kl) in e.iter().enumerate() {
                    let p = if l == j { kl - 1 } else { kl };
                    if p > 0 {
                        g *= pw[l][p as usize];
                    }
                }
                grad[j] += g;
            }
        }
        (val, grad)
    }
}
