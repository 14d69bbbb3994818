//! Coefficients polynomial in (w, w̄) over (1+|w|²)^s, their homogeneous
//! counterparts over |z|^{2s}, and (0,q)-forms built from them.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{arg, Result};
use crate::polycore::{ChartPolynomial, ComplexRational, HomogeneousPolynomial, MultiIndex};

/// Polynomial in (x, x̄): Σ c_{ab} x^a x̄^b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiPoly {
    pub nvars: usize,
    pub terms: BTreeMap<(MultiIndex, MultiIndex), ComplexRational>,
}

impl BiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: ComplexRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(MultiIndex::zero(nvars), MultiIndex::zero(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, ComplexRational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(
            MultiIndex::unit(nvars, i),
            MultiIndex::zero(nvars),
            ComplexRational::one(),
        );
        p
    }

    pub fn var_bar(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(
            MultiIndex::zero(nvars),
            MultiIndex::unit(nvars, i),
            ComplexRational::one(),
        );
        p
    }

    /// Σ x_i x̄_i, plus `shift` (1 in charts, 0 for |z|²).
    pub fn norm_sqr(nvars: usize, shift: bool) -> Self {
        let mut p = if shift {
            Self::one(nvars)
        } else {
            Self::zero(nvars)
        };
        for i in 0..nvars {
            p.add_term(
                MultiIndex::unit(nvars, i),
                MultiIndex::unit(nvars, i),
                ComplexRational::one(),
            );
        }
        p
    }

    pub fn holomorphic(p: &HomogeneousPolynomial) -> Self {
        let nv = p.num_vars();
        let mut out = Self::zero(nv);
        for (e, c) in p.terms() {
            out.add_term(e.clone(), MultiIndex::zero(nv), c.clone());
        }
        out
    }

    /// The conjugate polynomial p̄(x̄).
    pub fn antiholomorphic(p: &HomogeneousPolynomial) -> Self {
        let nv = p.num_vars();
        let mut out = Self::zero(nv);
        for (e, c) in p.terms() {
            out.add_term(MultiIndex::zero(nv), e.clone(), c.conj());
        }
        out
    }

    pub fn from_chart(p: &ChartPolynomial) -> Self {
        let nv = p.num_affine;
        let mut out = Self::zero(nv);
        for (e, c) in &p.terms {
            out.add_term(e.clone(), MultiIndex::zero(nv), c.clone());
        }
        out
    }

    pub(crate) fn add_term(&mut self, a: MultiIndex, b: MultiIndex, c: ComplexRational) {
        if c.is_zero() {
            return;
        }
        let key = (a, b);
        let v = match self.terms.get(&key) {
            Some(old) => old + &c,
            None => c,
        };
        if v.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(a.clone(), b.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &ComplexRational) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&ComplexRational::from_integer(-1)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &o.terms {
                out.add_term(a1.add(a2), b1.add(b2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// ∂/∂x̄_j.
    pub fn d_bar(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, b), c) in &self.terms {
            let e = b.0[j];
            if e == 0 {
                continue;
            }
            let mut nb = b.clone();
            nb.0[j] -= 1;
            out.add_term(a.clone(), nb, c.scale_int(e as i64));
        }
        out
    }

    /// Substitutes x_α = x̄_α = 1, leaving the remaining variables in order.
    pub fn dehomogenize(&self, alpha: usize) -> Self {
        let mut out = Self::zero(self.nvars - 1);
        let drop = |e: &MultiIndex| {
            let mut v = e.0.clone();
            v.remove(alpha);
            MultiIndex(v)
        };
        for ((a, b), c) in &self.terms {
            out.add_term(drop(a), drop(b), c.clone());
        }
        out
    }

    /// (holomorphic degree, antiholomorphic degree) when every term shares them.
    pub fn bidegree(&self) -> Option<(u32, u32)> {
        let mut it = self.terms.keys().map(|(a, b)| (a.degree(), b.degree()));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn compile(&self) -> CompiledBiPoly {
        let mut max = vec![0u32; self.nvars];
        let terms = self
            .terms
            .iter()
            .map(|((a, b), c)| {
                for k in 0..self.nvars {
                    max[k] = max[k].max(a.0[k]).max(b.0[k]);
                }
                (a.0.clone(), b.0.clone(), c.to_c64())
            })
            .collect();
        CompiledBiPoly {
            nvars: self.nvars,
            terms,
            max,
        }
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.compile().eval(x)
    }
}

#[derive(Clone, Debug)]
pub struct CompiledBiPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, Vec<u32>, C64)>,
    max: Vec<u32>,
}

impl CompiledBiPoly {
    pub fn eval(&self, x: &[C64]) -> C64 {
        let (p, pb) = powers(x, &self.max);
        self.eval_with(&p, &pb)
    }

    fn eval_with(&self, p: &[Vec<C64>], pb: &[Vec<C64>]) -> C64 {
        let mut acc = C64::default();
        for (a, b, c) in &self.terms {
            let mut t = *c;
            for k in 0..self.nvars {
                if a[k] > 0 {
                    t *= p[k][a[k] as usize];
                }
                if b[k] > 0 {
                    t *= pb[k][b[k] as usize];
                }
            }
            acc += t;
        }
        acc
    }

    fn max_exponents(&self) -> &[u32] {
        &self.max
    }
}

fn powers(x: &[C64], max: &[u32]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let mk = |conj: bool| {
        x.iter()
            .zip(max)
            .map(|(&v, &m)| {
                let v = if conj { v.conj() } else { v };
                let mut out = Vec::with_capacity(m as usize + 1);
                let mut acc = C64::new(1.0, 0.0);
                out.push(acc);
                for _ in 0..m {
                    acc *= v;
                    out.push(acc);
                }
                out
            })
            .collect()
    };
    (mk(false), mk(true))
}

/// N(w, w̄)/(1+|w|²)^s on a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartFormCoefficient {
    pub num: BiPoly,
    pub s: u32,
}

impl ChartFormCoefficient {
    pub fn new(num: BiPoly, s: u32) -> Self {
        Self { num, s }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::new(BiPoly::zero(nvars), 0)
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Same value with denominator exponent `s ≥ self.s`.
    pub fn lift(&self, s: u32) -> Self {
        assert!(s >= self.s);
        let f = BiPoly::norm_sqr(self.nvars(), true).pow(s - self.s);
        Self::new(self.num.mul(&f), s)
    }

    pub fn add(&self, o: &Self) -> Self {
        let s = self.s.max(o.s);
        Self::new(self.lift(s).num.add(&o.lift(s).num), s)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.s + o.s)
    }

    pub fn scale(&self, c: &ComplexRational) -> Self {
        Self::new(self.num.scale(c), self.s)
    }

    /// ∂/∂w̄_j: (∂N/∂w̄_j·(1+|w|²) − s·w_j·N)/(1+|w|²)^{s+1}.
    pub fn dbar(&self, j: usize) -> Self {
        let nv = self.nvars();
        let a = self.num.d_bar(j).mul(&BiPoly::norm_sqr(nv, true));
        let b = self
            .num
            .mul(&BiPoly::var(nv, j))
            .scale(&ComplexRational::from_integer(self.s as i64));
        Self::new(a.sub(&b), self.s + 1)
    }

    pub fn compile(&self) -> CompiledCoefficient {
        CompiledCoefficient {
            num: self.num.compile(),
            s: self.s as i32,
        }
    }

    pub fn eval(&self, w: &[C64]) -> C64 {
        self.compile().eval(w)
    }
}

#[derive(Clone, Debug)]
pub struct CompiledCoefficient {
    num: CompiledBiPoly,
    s: i32,
}

impl CompiledCoefficient {
    pub fn eval(&self, w: &[C64]) -> C64 {
        let den = 1.0 + w.iter().map(|v| v.norm_sqr()).sum::<f64>();
        self.num.eval(w) / den.powi(self.s)
    }
}

/// Σ_J c_J dw̄_J on a chart, J a bitmask over the n affine coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartForm {
    pub n: usize,
    pub q: usize,
    pub coeffs: BTreeMap<u64, ChartFormCoefficient>,
}

/// Sign of dw̄_j ∧ dw̄_J relative to dw̄_{J ∪ j} in increasing order.
fn insert_sign(mask: u64, j: usize) -> i64 {
    if (mask & ((1u64 << j) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl ChartForm {
    pub fn zero(n: usize, q: usize) -> Self {
        Self {
            n,
            q,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn function(c: ChartFormCoefficient) -> Self {
        let mut f = Self::zero(c.nvars(), 0);
        f.insert(0, c);
        f
    }

    pub fn insert(&mut self, mask: u64, c: ChartFormCoefficient) {
        if c.is_zero() {
            return;
        }
        let v = match self.coeffs.get(&mask) {
            Some(old) => old.add(&c),
            None => c,
        };
        if v.is_zero() {
            self.coeffs.remove(&mask);
        } else {
            self.coeffs.insert(mask, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.n != o.n || self.q != o.q {
            return arg("adding forms of different shapes");
        }
        let mut out = self.clone();
        for (&k, c) in &o.coeffs {
            out.insert(k, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, s: &ComplexRational) -> Self {
        let mut out = Self::zero(self.n, self.q);
        for (&k, c) in &self.coeffs {
            out.insert(k, c.scale(s));
        }
        out
    }

    /// Multiplies every coefficient by a function.
    pub fn mul_function(&self, f: &ChartFormCoefficient) -> Self {
        let mut out = Self::zero(self.n, self.q);
        for (&k, c) in &self.coeffs {
            out.insert(k, c.mul(f));
        }
        out
    }

    /// ∂̄ = Σ_j dw̄_j ∧ ∂/∂w̄_j.
    pub fn dbar(&self) -> Self {
        let mut out = Self::zero(self.n, self.q + 1);
        for (&mask, c) in &self.coeffs {
            for j in 0..self.n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let d = c.dbar(j);
                if d.is_zero() {
                    continue;
                }
                let sgn = ComplexRational::from_integer(insert_sign(mask, j));
                out.insert(mask | (1 << j), d.scale(&sgn));
            }
        }
        out
    }

    pub fn compile(&self) -> CompiledForm {
        CompiledForm {
            q: self.q,
            coeffs: self.coeffs.iter().map(|(&k, c)| (k, c.compile())).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompiledForm {
    pub q: usize,
    coeffs: Vec<(u64, CompiledCoefficient)>,
}

impl CompiledForm {
    pub fn eval(&self, w: &[C64]) -> Vec<(u64, C64)> {
        if self.coeffs.is_empty() {
            return vec![];
        }
        let den = 1.0 + w.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let mut max = vec![0u32; w.len()];
        for (_, c) in &self.coeffs {
            for (m, &e) in max.iter_mut().zip(c.num.max_exponents()) {
                *m = (*m).max(e);
            }
        }
        let (p, pb) = powers(w, &max);
        self.coeffs
            .iter()
            .map(|(k, c)| (*k, c.num.eval_with(&p, &pb) / den.powi(c.s)))
            .collect()
    }
}

/// N(z, z̄)/|z|^{2s} in homogeneous coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalFunction {
    pub num: BiPoly,
    pub s: u32,
}

/// Σ_K N_K(z, z̄) dz̄_K / |z|^{2s}, K a bitmask over the n+1 homogeneous coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalForm {
    pub nvars: usize,
    pub q: usize,
    pub s: u32,
    pub coeffs: BTreeMap<u64, BiPoly>,
}

impl GlobalFunction {
    pub fn new(num: BiPoly, s: u32) -> Self {
        Self { num, s }
    }

    pub fn as_form(&self) -> GlobalForm {
        let mut coeffs = BTreeMap::new();
        if !self.num.is_zero() {
            coeffs.insert(0, self.num.clone());
        }
        GlobalForm {
            nvars: self.num.nvars,
            q: 0,
            s: self.s,
            coeffs,
        }
    }

    pub fn to_chart(&self, alpha: usize) -> ChartFormCoefficient {
        ChartFormCoefficient::new(self.num.dehomogenize(alpha), self.s)
    }
}

impl GlobalForm {
    /// Checks that every term is invariant under z ↦ tz: holomorphic degree s and
    /// antiholomorphic degree s − q (each dz̄ carries one more).
    pub fn check_homogeneity_zero(&self) -> Result<()> {
        for (k, p) in &self.coeffs {
            for (a, b) in p.terms.keys() {
                if a.degree() != self.s || b.degree() as usize + self.q != self.s as usize {
                    return arg(format!(
                        "term z^{:?} z̄^{:?} in dz̄-component {k:#b} is not of homogeneity zero over |z|^{}",
                        a.0,
                        b.0,
                        2 * self.s
                    ));
                }
            }
        }
        Ok(())
    }

    /// Pullback along s_α: dz̄_α ↦ 0, dz̄_j ↦ dw̄_j, |z|² ↦ 1+|w|².
    pub fn to_chart(&self, alpha: usize) -> ChartForm {
        let n = self.nvars - 1;
        let mut out = ChartForm::zero(n, self.q);
        for (&k, p) in &self.coeffs {
            if k & (1 << alpha) != 0 {
                continue;
            }
            let low = k & ((1u64 << alpha) - 1);
            let high = (k >> (alpha + 1)) << alpha;
            out.insert(
                low | high,
                ChartFormCoefficient::new(p.dehomogenize(alpha), self.s),
            );
        }
        out
    }

    /// Contraction with the Euler field Σ z̄_j ∂/∂z̄_j, evaluated at z. Vanishes for forms
    /// descending to projective space.
    pub fn euler_contraction_norm(&self, z: &[C64]) -> f64 {
        let mut out: BTreeMap<u64, C64> = BTreeMap::new();
        for (&k, p) in &self.coeffs {
            let v = p.eval(z);
            let mut pos = 0;
            for j in 0..self.nvars {
                if k & (1 << j) == 0 {
                    continue;
                }
                let s = if pos % 2 == 0 { 1.0 } else { -1.0 };
                *out.entry(k & !(1 << j)).or_default() += v * z[j].conj() * s;
                pos += 1;
            }
        }
        out.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// The symbolic determinant det[V | e_K] for polynomial columns V (each of length N),
/// as the dz̄_K coefficients of det[V, dz̄^{N−|V|}]. Signs match `forms::bracket_minors`.
pub fn symbolic_bracket(columns: &[Vec<BiPoly>], nvars: usize) -> BTreeMap<u64, BiPoly> {
    let p = columns.len();
    let q = nvars - p;
    let mut out = BTreeMap::new();
    for kmask in 0u64..(1 << nvars) {
        if kmask.count_ones() as usize != q {
            continue;
        }
        let rows: Vec<usize> = (0..nvars).filter(|i| kmask & (1 << i) == 0).collect();
        let swaps: u32 = rows
            .iter()
            .map(|&r| (kmask & ((1u64 << r) - 1)).count_ones())
            .sum();
        let mut det = leibniz(&rows, columns, nvars);
        if swaps % 2 == 1 {
            det = det.scale(&ComplexRational::from_integer(-1));
        }
        if !det.is_zero() {
            out.insert(kmask, det);
        }
    }
    out
}

fn leibniz(rows: &[usize], columns: &[Vec<BiPoly>], nvars: usize) -> BiPoly {
    let p = rows.len();
    let mut acc = BiPoly::zero(nvars);
    let mut perm: Vec<usize> = (0..p).collect();
    permute(&mut perm, 0, &mut |perm| {
        let inv = (0..p)
            .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
            .filter(|&(i, j)| perm[i] > perm[j])
            .count();
        let mut t = BiPoly::one(nvars);
        for (r, &c) in perm.iter().enumerate() {
            t = t.mul(&columns[c][rows[r]]);
            if t.is_zero() {
                return;
            }
        }
        if inv % 2 == 1 {
            t = t.scale(&ComplexRational::from_integer(-1));
        }
        acc = acc.add(&t);
    });
    acc
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: i64) -> ComplexRational {
        ComplexRational::from_integer(re)
    }

    #[test]
    fn dbar_of_inverse_norm() {
        // ∂̄(1+|w|²)^{-1} = −w_j/(1+|w|²)^2 dw̄_j
        let f = ChartFormCoefficient::new(BiPoly::one(2), 1);
        let w = [C64::new(0.3, -0.2), C64::new(-0.5, 0.7)];
        for j in 0..2 {
            let d = f.dbar(j).eval(&w);
            let s = 1.0 + w.iter().map(|v| v.norm_sqr()).sum::<f64>();
            assert!((d + w[j] / (s * s)).norm() < 1e-14);
        }
    }

    #[test]
    fn dbar_squared_vanishes() {
        let mut num = BiPoly::var_bar(2, 0).mul(&BiPoly::var(2, 1));
        num = num.add(&BiPoly::var_bar(2, 1).pow(2).scale(&c(3)));
        let f = ChartForm::function(ChartFormCoefficient::new(num, 2));
        assert!(f.dbar().dbar().is_zero());
    }

    #[test]
    fn chart_pullback_drops_chart_differential() {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0b011, BiPoly::one(3));
        coeffs.insert(0b110, BiPoly::one(3));
        let g = GlobalForm {
            nvars: 3,
            q: 2,
            s: 0,
            coeffs,
        };
        let f = g.to_chart(0);
        assert_eq!(f.coeffs.keys().copied().collect::<Vec<_>>(), vec![0b11]);
    }
}
