//! Exterior algebra over the generators dζ_0..dζ_n, dζ̄_0..dζ̄_n, dz̄_0..dz̄_n and a
//! few real parameter differentials (dλ, dμ_k). Basis monomials are bitmasks in
//! the fixed generator order, so canonical ordering is automatic.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{arg, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    DZeta(usize),
    DZetaBar(usize),
    DZBar(usize),
    Param(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExteriorForm {
    num_vars: usize,
    params: usize,
    coeffs: BTreeMap<u64, C64>,
}

/// Index sets of a basis monomial, one per family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisKey {
    pub dzeta: Vec<usize>,
    pub dzeta_bar: Vec<usize>,
    pub dz_bar: Vec<usize>,
    pub params: Vec<usize>,
}

/// Sign of moving the bits of `b` to the right of the bits of `a` in sorted order.
pub fn merge_sign(a: u64, b: u64) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if bit == 63 { 0 } else { a >> (bit + 1) };
        swaps += above.count_ones();
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl ExteriorForm {
    pub fn zero(num_vars: usize, params: usize) -> Self {
        assert!(
            3 * num_vars + params <= 64,
            "too many generators for a bitmask basis"
        );
        Self {
            num_vars,
            params,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(num_vars: usize, params: usize, c: C64) -> Self {
        let mut f = Self::zero(num_vars, params);
        f.add_coeff(0, c);
        f
    }

    pub fn generator(num_vars: usize, params: usize, g: Generator) -> Result<Self> {
        let mut f = Self::zero(num_vars, params);
        let bit = f.bit(g)?;
        f.add_coeff(1 << bit, C64::new(1.0, 0.0));
        Ok(f)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn params(&self) -> usize {
        self.params
    }

    pub fn bit(&self, g: Generator) -> Result<u32> {
        let n = self.num_vars;
        let b = match g {
            Generator::DZeta(i) if i < n => i,
            Generator::DZetaBar(i) if i < n => n + i,
            Generator::DZBar(i) if i < n => 2 * n + i,
            Generator::Param(k) if k < self.params => 3 * n + k,
            _ => return arg(format!("generator {g:?} out of range")),
        };
        Ok(b as u32)
    }

    pub fn key(&self, mask: u64) -> BasisKey {
        let n = self.num_vars;
        let mut k = BasisKey {
            dzeta: vec![],
            dzeta_bar: vec![],
            dz_bar: vec![],
            params: vec![],
        };
        let mut rest = mask;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            match b / n {
                0 => k.dzeta.push(b),
                1 => k.dzeta_bar.push(b - n),
                2 => k.dz_bar.push(b - 2 * n),
                _ => k.params.push(b - 3 * n),
            }
        }
        k
    }

    pub fn mask_of(&self, gens: &[Generator]) -> Result<(u64, f64)> {
        let mut m = 0u64;
        let mut sign = 1.0;
        for &g in gens {
            let b = 1u64 << self.bit(g)?;
            if m & b != 0 {
                return Ok((0, 0.0));
            }
            sign *= merge_sign(m, b);
            m |= b;
        }
        Ok((m, sign))
    }

    pub fn add_coeff(&mut self, mask: u64, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        *self.coeffs.entry(mask).or_insert(C64::new(0.0, 0.0)) += c;
    }

    pub fn coeff(&self, mask: u64) -> C64 {
        self.coeffs.get(&mask).copied().unwrap_or_default()
    }

    /// Coefficient of the wedge of `gens` in the given order.
    pub fn coeff_of(&self, gens: &[Generator]) -> Result<C64> {
        let (m, s) = self.mask_of(gens)?;
        Ok(if s == 0.0 {
            C64::default()
        } else {
            self.coeff(m) * s
        })
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, C64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| *c == C64::default())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.num_vars, self.params);
        for (&m, &c) in &self.coeffs {
            out.add_coeff(m, c * s);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.num_vars, self.params), (o.num_vars, o.params));
        let mut out = self.clone();
        for (&m, &c) in &o.coeffs {
            out.add_coeff(m, c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    pub fn wedge(&self, o: &Self) -> Self {
        assert_eq!((self.num_vars, self.params), (o.num_vars, o.params));
        let mut out = Self::zero(self.num_vars, self.params);
        for (&a, &ca) in &self.coeffs {
            for (&b, &cb) in &o.coeffs {
                if a & b != 0 {
                    continue;
                }
                out.add_coeff(a | b, ca * cb * merge_sign(a, b));
            }
        }
        out
    }

    /// Components of a fixed degree.
    pub fn homogeneous_part(&self, degree: u32) -> Self {
        let mut out = Self::zero(self.num_vars, self.params);
        for (&m, &c) in &self.coeffs {
            if m.count_ones() == degree {
                out.add_coeff(m, c);
            }
        }
        out
    }

    /// Components with exactly `q` dz̄ factors.
    pub fn dzbar_part(&self, q: u32) -> Self {
        let n = self.num_vars;
        let zmask = ((1u64 << n) - 1) << (2 * n);
        let mut out = Self::zero(self.num_vars, self.params);
        for (&m, &c) in &self.coeffs {
            if (m & zmask).count_ones() == q {
                out.add_coeff(m, c);
            }
        }
        out
    }

    /// Drops every component containing a dζ factor (wedging with ω(ζ) kills them).
    pub fn drop_dzeta(&self) -> Self {
        let n = self.num_vars;
        let zmask = (1u64 << n) - 1;
        let mut out = Self::zero(self.num_vars, self.params);
        for (&m, &c) in &self.coeffs {
            if m & zmask == 0 {
                out.add_coeff(m, c);
            }
        }
        out
    }
}

impl fmt::Display for ExteriorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&m, &c) in &self.coeffs {
            if c == C64::default() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let k = self.key(m);
            write!(f, "({:.6e}{:+.6e}i)", c.re, c.im)?;
            for i in k.dzeta {
                write!(f, " dζ{i}")?;
            }
            for i in k.dzeta_bar {
                write!(f, " dζ̄{i}")?;
            }
            for i in k.dz_bar {
                write!(f, " dz̄{i}")?;
            }
            for i in k.params {
                write!(f, " dp{i}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(x: Generator) -> ExteriorForm {
        ExteriorForm::generator(3, 0, x).unwrap()
    }

    #[test]
    fn wedge_basics() {
        let a = g(Generator::DZeta(0)).wedge(&g(Generator::DZeta(1)));
        assert_eq!(
            a.coeff_of(&[Generator::DZeta(0), Generator::DZeta(1)])
                .unwrap(),
            C64::new(1.0, 0.0)
        );
        assert!(g(Generator::DZeta(0))
            .wedge(&g(Generator::DZeta(0)))
            .is_zero());
        let s = g(Generator::DZeta(0)).add(&g(Generator::DZeta(1)));
        let d = g(Generator::DZeta(0)).sub(&g(Generator::DZeta(1)));
        let w = s.wedge(&d);
        assert_eq!(
            w.coeff_of(&[Generator::DZeta(0), Generator::DZeta(1)])
                .unwrap(),
            C64::new(-2.0, 0.0)
        );
    }

    #[test]
    fn graded_commutativity() {
        let a = g(Generator::DZBar(2)).wedge(&g(Generator::DZeta(1)));
        let b = g(Generator::DZetaBar(0));
        assert_eq!(a.wedge(&b), b.wedge(&a));
        let c = g(Generator::DZeta(2));
        assert_eq!(b.wedge(&c), c.wedge(&b).scale(C64::new(-1.0, 0.0)));
    }
}
