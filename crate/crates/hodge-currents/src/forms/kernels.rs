//! B, B*, the Leray forms ω and ω′, and the determinant-bracket kernels.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::exterior::{merge_sign, ExteriorForm, Generator};
use crate::error::{arg, Error, Result};
use crate::hefer::HeferNum;

/// B*(ζ,z) = Σ z̄_j(ζ_j − z_j).
pub fn eval_bstar(zeta: &[C64], z: &[C64]) -> C64 {
    zeta.iter().zip(z).map(|(a, b)| b.conj() * (a - b)).sum()
}

/// B(ζ,z) = Σ ζ̄_j(ζ_j − z_j).
pub fn eval_b(zeta: &[C64], z: &[C64]) -> C64 {
    zeta.iter().zip(z).map(|(a, b)| a.conj() * (a - b)).sum()
}

/// ⟨a, b⟩ = Σ a_j b_j (no conjugation).
pub fn pairing(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ω(ζ) = dζ_0∧…∧dζ_n.
pub fn omega(num_vars: usize, params: usize) -> ExteriorForm {
    let mut f = ExteriorForm::scalar(num_vars, params, C64::new(1.0, 0.0));
    for i in 0..num_vars {
        f = f.wedge(&ExteriorForm::generator(num_vars, params, Generator::DZeta(i)).unwrap());
    }
    f
}

/// ω′(η) = Σ_k (−1)^k η_k ⋀_{j≠k} dη_j.
pub fn omega_prime(eta: &[C64], deta: &[ExteriorForm]) -> ExteriorForm {
    let n1 = eta.len();
    let (nv, np) = (deta[0].num_vars(), deta[0].params());
    let one = ExteriorForm::scalar(nv, np, C64::new(1.0, 0.0));
    let mut pre = vec![one.clone()];
    for d in deta.iter().take(n1 - 1) {
        let next = pre.last().unwrap().wedge(d);
        pre.push(next);
    }
    let mut suf = vec![one; n1];
    for k in (0..n1.saturating_sub(1)).rev() {
        suf[k] = deta[k + 1].wedge(&suf[k + 1]);
    }
    let mut out = ExteriorForm::zero(nv, np);
    for k in 0..n1 {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&pre[k].wedge(&suf[k]).scale(eta[k] * s));
    }
    out
}

/// det[V | e_K] for every K ⊂ {0..N−1} with |K| = N − V.len(), as (K bitmask, value).
/// The differential columns contribute dz̄_K (or dζ̄_K) with coefficient det[V, e_K].
pub fn bracket_minors(vectors: &[&[C64]], big_n: usize) -> Vec<(u64, C64)> {
    let p = vectors.len();
    assert!(p <= big_n);
    let q = big_n - p;
    let mut out = Vec::new();
    for_each_subset(big_n, q, |kmask| {
        let rows: Vec<usize> = (0..big_n).filter(|i| kmask & (1 << i) == 0).collect();
        let mut swaps = 0;
        for &r in &rows {
            swaps += (kmask & ((1u64 << r) - 1)).count_ones();
        }
        let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        let det = small_det(&rows, vectors);
        out.push((kmask, det * sign));
    });
    out
}

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(u64)) {
    fn rec(start: usize, n: usize, k: usize, acc: u64, f: &mut dyn FnMut(u64)) {
        if k == 0 {
            f(acc);
            return;
        }
        for i in start..n {
            if n - i < k {
                break;
            }
            rec(i + 1, n, k - 1, acc | (1 << i), f);
        }
    }
    rec(0, n, k, 0, &mut f);
}

/// Determinant of the p×p matrix with entries vectors[c][rows[r]].
fn small_det(rows: &[usize], vectors: &[&[C64]]) -> C64 {
    let p = rows.len();
    let e = |r: usize, c: usize| vectors[c][rows[r]];
    match p {
        0 => C64::new(1.0, 0.0),
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => DMatrix::from_fn(p, p, e).determinant(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    ConjZ,
    ConjZeta,
    Hefer(usize),
    DzBar,
    DzetaBar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Denominator {
    B,
    BStar,
    /// P_k(ζ) − P_k(z).
    PDiff(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelColumnSpec {
    pub columns: Vec<(Column, Option<Denominator>)>,
}

/// Point data for kernel evaluation.
pub struct KernelPoint<'a> {
    pub zeta: &'a [C64],
    pub z: &'a [C64],
    pub hefer: &'a [HeferNum],
    /// P_k(ζ) − P_k(z).
    pub pdiff: &'a [C64],
}

impl KernelColumnSpec {
    /// det[z̄/B*, Q_1/(P_1(ζ)−P_1(z)), …, Q_m/(…), (dz̄/B*)^q], q = n − m.
    pub fn projector(n: usize, m: usize) -> Result<Self> {
        if m > n {
            return arg("codimension exceeds dimension");
        }
        let mut columns = vec![(Column::ConjZ, Some(Denominator::BStar))];
        for k in 0..m {
            columns.push((Column::Hefer(k), Some(Denominator::PDiff(k))));
        }
        for _ in 0..n - m {
            columns.push((Column::DzBar, Some(Denominator::BStar)));
        }
        let s = Self { columns };
        s.validate(n + 1)?;
        Ok(s)
    }

    /// det[z̄/B*, ζ̄/B, Q_k/(…), (dz̄/B*)^{q−1}, (dζ̄/B)^{n−m−q}].
    pub fn solver(n: usize, m: usize, q: usize) -> Result<Self> {
        if q == 0 || q + m > n {
            return arg(format!(
                "solver bidegree q={q} out of range for n={n}, m={m}"
            ));
        }
        let mut columns = vec![
            (Column::ConjZ, Some(Denominator::BStar)),
            (Column::ConjZeta, Some(Denominator::B)),
        ];
        for k in 0..m {
            columns.push((Column::Hefer(k), Some(Denominator::PDiff(k))));
        }
        for _ in 0..q - 1 {
            columns.push((Column::DzBar, Some(Denominator::BStar)));
        }
        for _ in 0..n - m - q {
            columns.push((Column::DzetaBar, Some(Denominator::B)));
        }
        let s = Self { columns };
        s.validate(n + 1)?;
        Ok(s)
    }

    pub fn validate(&self, num_vars: usize) -> Result<()> {
        if self.columns.len() != num_vars {
            return arg(format!(
                "bracket has {} columns, expected {num_vars}",
                self.columns.len()
            ));
        }
        let mut seen = vec![];
        for (c, _) in &self.columns {
            if let Column::Hefer(k) = c {
                if seen.contains(k) {
                    return arg("repeated Hefer column");
                }
                seen.push(*k);
            }
        }
        Ok(())
    }

    /// Expands the bracket into a form in dz̄ and dζ̄. Each group of repeated
    /// differential columns contributes Σ_K det[…, e_K] d·_K (no factorial).
    pub fn eval(&self, pt: &KernelPoint<'_>) -> Result<ExteriorForm> {
        let nv = pt.z.len();
        let bstar = eval_bstar(pt.zeta, pt.z);
        let b = eval_b(pt.zeta, pt.z);
        let denom = |d: Option<Denominator>| -> Result<C64> {
            let (v, name) = match d {
                None => return Ok(C64::new(1.0, 0.0)),
                Some(Denominator::B) => (b, "B".to_string()),
                Some(Denominator::BStar) => (bstar, "B*".to_string()),
                Some(Denominator::PDiff(k)) => (
                    *pt.pdiff
                        .get(k)
                        .ok_or_else(|| Error::Argument("missing P difference".into()))?,
                    format!("P_{}(ζ)−P_{}(z)", k + 1, k + 1),
                ),
            };
            if v.norm() == 0.0 {
                return Err(Error::SingularKernel { factor: name });
            }
            Ok(v)
        };
        let mut scale = C64::new(1.0, 0.0);
        let mut vecs: Vec<Vec<C64>> = Vec::new();
        let (mut nz, mut nzeta) = (0usize, 0usize);
        for &(c, d) in &self.columns {
            scale /= denom(d)?;
            match c {
                Column::ConjZ => vecs.push(pt.z.iter().map(|v| v.conj()).collect()),
                Column::ConjZeta => vecs.push(pt.zeta.iter().map(|v| v.conj()).collect()),
                Column::Hefer(k) => {
                    let h = pt
                        .hefer
                        .get(k)
                        .ok_or_else(|| Error::Argument("missing Hefer data".into()))?;
                    vecs.push(h.eval(pt.zeta, pt.z));
                }
                Column::DzBar => nz += 1,
                Column::DzetaBar => nzeta += 1,
            }
        }
        // Column order is vectors, then dz̄ block, then dζ̄ block; the
        // KernelColumnSpec constructors already list them in that order.
        let mut out = ExteriorForm::zero(nv, 0);
        let mut full = DMatrix::<C64>::zeros(nv, nv);
        for (c, v) in vecs.iter().enumerate() {
            for r in 0..nv {
                full[(r, c)] = v[r];
            }
        }
        let p = vecs.len();
        for_each_subset(nv, nz, |k1| {
            for_each_subset(nv, nzeta, |k2| {
                let mut m = full.clone();
                let mut col = p;
                for mask in [k1, k2] {
                    let mut rest = mask;
                    while rest != 0 {
                        let i = rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        for r in 0..nv {
                            m[(r, col)] = C64::new(if r == i { 1.0 } else { 0.0 }, 0.0);
                        }
                        col += 1;
                    }
                }
                let det = m.determinant();
                if det != C64::default() {
                    let gmask = (k1 << (2 * nv)) | (k2 << nv);
                    // canonical order puts dζ̄ before dz̄; we built dz̄_K ∧ dζ̄_K′.
                    let s = merge_sign(k1 << (2 * nv), k2 << nv);
                    out.add_coeff(gmask, det * scale * s);
                }
            });
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn omega_prime_n1_matches_hand_expansion() {
        // η constant columns: ω′ = η_0 dη_1 − η_1 dη_0.
        let nv = 2;
        let d0 = ExteriorForm::generator(nv, 0, Generator::DZBar(0)).unwrap();
        let d1 = ExteriorForm::generator(nv, 0, Generator::DZBar(1)).unwrap();
        let eta = [c(2.0, 1.0), c(-0.5, 0.3)];
        let w = omega_prime(&eta, &[d0.clone(), d1.clone()]);
        let expect = d1.scale(eta[0]).sub(&d0.scale(eta[1]));
        assert!(w.sub(&expect).norm() < 1e-15);
    }

    fn perm_det(m: &[[C64; 3]; 3]) -> C64 {
        let perms = [
            ([0, 1, 2], 1.0),
            ([0, 2, 1], -1.0),
            ([1, 0, 2], -1.0),
            ([1, 2, 0], 1.0),
            ([2, 0, 1], 1.0),
            ([2, 1, 0], -1.0),
        ];
        perms
            .iter()
            .map(|(p, s)| m[p[0]][0] * m[p[1]][1] * m[p[2]][2] * *s)
            .sum()
    }

    #[test]
    fn minors_match_permutation_sum() {
        let a = [c(0.3, 0.1), c(-1.0, 0.2), c(0.5, -0.7)];
        let b = [c(1.1, 0.0), c(0.4, 0.4), c(-0.2, 0.9)];
        for (k, v) in bracket_minors(&[&a, &b], 3) {
            let i = k.trailing_zeros() as usize;
            let mut m = [[C64::default(); 3]; 3];
            for r in 0..3 {
                m[r][0] = a[r];
                m[r][1] = b[r];
                m[r][2] = c(if r == i { 1.0 } else { 0.0 }, 0.0);
            }
            assert!((perm_det(&m) - v).norm() < 1e-14);
        }
    }

    #[test]
    fn repeated_column_vanishes() {
        let a = [c(0.3, 0.1), c(-1.0, 0.2), c(0.5, -0.7)];
        assert!(bracket_minors(&[&a, &a], 3)
            .iter()
            .all(|(_, v)| v.norm() < 1e-15));
    }

    #[test]
    fn column_counts_enforced() {
        assert_eq!(KernelColumnSpec::projector(2, 1).unwrap().columns.len(), 3);
        assert_eq!(KernelColumnSpec::solver(3, 1, 1).unwrap().columns.len(), 4);
        assert!(KernelColumnSpec::solver(2, 1, 2).is_err());
    }
}
