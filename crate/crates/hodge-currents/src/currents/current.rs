//! Residual currents of homogeneity zero and sections of the dualizing bundle.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::coeff::{
    symbolic_bracket, BiPoly, ChartForm, ChartFormCoefficient, CompiledBiPoly, CompiledCoefficient,
    CompiledForm, GlobalForm, GlobalFunction,
};
use crate::error::{arg, Result};
use crate::polycore::{ComplexRational, HomogeneousPolynomial, MultiIndex, Variety};
use crate::residue::FormCoeffs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurrentKind {
    Zero,
    Exact,
    Antiholomorphic,
    Ideal,
    Explicit,
    Combination,
}

/// φ = Σ_α ϑ_α Φ_α ∧ ∂̄(1/F^{(α)}), stored as the (0,q) chart forms Φ_α.
#[derive(Clone, Debug)]
pub struct ResidualCurrent {
    pub label: String,
    pub kind: CurrentKind,
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub charts: Vec<ChartForm>,
    compiled: Vec<CompiledForm>,
}

impl ResidualCurrent {
    pub fn from_charts(
        variety: &Variety,
        charts: Vec<ChartForm>,
        kind: CurrentKind,
        label: &str,
    ) -> Result<Self> {
        let n = variety.n;
        if charts.len() != n + 1 {
            return arg(format!(
                "expected {} chart forms, got {}",
                n + 1,
                charts.len()
            ));
        }
        let q = charts[0].q;
        for (a, c) in charts.iter().enumerate() {
            if c.n != n || c.q != q {
                return arg(format!(
                    "chart form {a} has shape (n={}, q={}), expected (n={n}, q={q})",
                    c.n, c.q
                ));
            }
            if c.coeffs
                .keys()
                .any(|&k| k >> n != 0 || k.count_ones() as usize != q)
            {
                return arg(format!("chart form {a} has a dw̄ index outside the chart"));
            }
        }
        let compiled = charts.iter().map(|c| c.compile()).collect();
        Ok(Self {
            label: label.into(),
            kind,
            n,
            m: variety.m,
            q,
            charts,
            compiled,
        })
    }

    pub fn from_global(
        variety: &Variety,
        form: &GlobalForm,
        kind: CurrentKind,
        label: &str,
    ) -> Result<Self> {
        if form.nvars != variety.n + 1 {
            return arg("global form lives in the wrong number of variables");
        }
        form.check_homogeneity_zero()?;
        let charts = (0..=variety.n).map(|a| form.to_chart(a)).collect();
        Self::from_charts(variety, charts, kind, label)
    }

    pub fn zero(variety: &Variety) -> Self {
        let q = variety.n - variety.m;
        let charts = vec![ChartForm::zero(variety.n, q); variety.n + 1];
        Self::from_charts(variety, charts, CurrentKind::Zero, "zero")
            .expect("well-formed zero current")
    }

    /// Coefficients of Φ_α at w (dw̄ bitmask, value).
    pub fn eval(&self, alpha: usize, w: &[C64]) -> FormCoeffs {
        self.compiled[alpha].eval(w)
    }

    pub fn is_zero(&self) -> bool {
        self.charts.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &ComplexRational, label: &str) -> Self {
        let charts = self.charts.iter().map(|f| f.scale(c)).collect::<Vec<_>>();
        Self {
            label: label.into(),
            kind: self.kind,
            n: self.n,
            m: self.m,
            q: self.q,
            compiled: charts.iter().map(|c| c.compile()).collect(),
            charts,
        }
    }

    /// Σ c_i φ_i over currents of equal shape.
    pub fn combination(terms: &[(ComplexRational, &ResidualCurrent)], label: &str) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return arg("empty combination");
        };
        let mut charts = vec![ChartForm::zero(first.n, first.q); first.n + 1];
        for (c, phi) in terms {
            if (phi.n, phi.m, phi.q) != (first.n, first.m, first.q) {
                return arg("combining currents of different shapes");
            }
            for (acc, f) in charts.iter_mut().zip(&phi.charts) {
                *acc = acc.add(&f.scale(c))?;
            }
        }
        Ok(Self {
            label: label.into(),
            kind: CurrentKind::Combination,
            n: first.n,
            m: first.m,
            q: first.q,
            compiled: charts.iter().map(|c| c.compile()).collect(),
            charts,
        })
    }
}

/// φ = ∂̄ψ for ψ a (0,q−1)-form of homogeneity zero given in homogeneous coordinates.
pub fn make_exact_current(
    variety: &Variety,
    psi: &GlobalForm,
    label: &str,
) -> Result<ResidualCurrent> {
    if psi.nvars != variety.n + 1 {
        return arg("ψ lives in the wrong number of variables");
    }
    psi.check_homogeneity_zero()?;
    if psi.q + 1 > variety.n - variety.m {
        return arg(format!(
            "ψ has degree (0,{}), the current would exceed (0,{})",
            psi.q,
            variety.n - variety.m
        ));
    }
    let charts = (0..=variety.n).map(|a| psi.to_chart(a).dbar()).collect();
    ResidualCurrent::from_charts(variety, charts, CurrentKind::Exact, label)
}

/// Φ = h̄(z̄)·g(z)·det[z̄, ∇P_1, …, ∇P_m, dz̄^{n−m}]/|z|^{2s} with
/// deg h − deg g = d − n − 1. For d > n the default is g = 1 and h a monomial; for
/// d ≤ n there is no such h and g = z_0^{n+1−d} is used instead.
pub fn make_antiholomorphic(
    variety: &Variety,
    h: Option<&HomogeneousPolynomial>,
    g: Option<&HomogeneousPolynomial>,
    label: &str,
) -> Result<ResidualCurrent> {
    let nv = variety.n + 1;
    let excess = variety.total_degree as i64 - variety.n as i64 - 1;
    let one = |deg: u32| {
        let mut e = vec![0; nv];
        e[0] = deg;
        HomogeneousPolynomial::from_terms(nv, deg, [(MultiIndex(e), ComplexRational::one())])
            .unwrap()
    };
    let (h, g) = match (h, g) {
        (Some(h), Some(g)) => (h.clone(), g.clone()),
        (Some(h), None) => (h.clone(), one(0)),
        (None, Some(g)) => {
            let dh = excess + g.degree() as i64;
            if dh < 0 {
                return arg("holomorphic factor degree too small");
            }
            (one(dh as u32), g.clone())
        }
        (None, None) if excess >= 0 => (one(excess as u32), one(0)),
        (None, None) => (one(0), one((-excess) as u32)),
    };
    if h.num_vars() != nv || g.num_vars() != nv {
        return arg("factor lives in the wrong number of variables");
    }
    if h.degree() as i64 - g.degree() as i64 != excess {
        return arg(format!(
            "need deg h − deg g = d − n − 1 = {excess}, got {} − {}",
            h.degree(),
            g.degree()
        ));
    }
    let mut columns = vec![(0..nv).map(|i| BiPoly::var_bar(nv, i)).collect::<Vec<_>>()];
    for p in &variety.polys {
        columns.push(p.gradient().iter().map(BiPoly::holomorphic).collect());
    }
    let factor = BiPoly::antiholomorphic(&h).mul(&BiPoly::holomorphic(&g));
    let coeffs = symbolic_bracket(&columns, nv)
        .into_iter()
        .map(|(k, p)| (k, p.mul(&factor)))
        .collect();
    let s = variety.total_degree - variety.m as u32 + g.degree();
    let form = GlobalForm {
        nvars: nv,
        q: variety.n - variety.m,
        s,
        coeffs,
    };
    ResidualCurrent::from_global(variety, &form, CurrentKind::Antiholomorphic, label)
}

/// Φ_α ↦ F_k^{(α)}·F̄_k^{(α)}/(1+|w|²)^{deg P_k}·Φ_α, a current in the ideal of F_k.
pub fn make_ideal_current(
    variety: &Variety,
    k: usize,
    base: &ResidualCurrent,
    label: &str,
) -> Result<ResidualCurrent> {
    if k >= variety.m {
        return arg(format!("no defining polynomial {k}"));
    }
    let charts = (0..=variety.n)
        .map(|a| {
            let f = BiPoly::from_chart(&variety.chart_polys(a)[k]);
            let fbar = conj_poly(&f);
            let c = ChartFormCoefficient::new(f.mul(&fbar), variety.degrees[k]);
            base.charts[a].mul_function(&c)
        })
        .collect();
    ResidualCurrent::from_charts(variety, charts, CurrentKind::Ideal, label)
}

fn conj_poly(p: &BiPoly) -> BiPoly {
    let mut out = BiPoly::zero(p.nvars);
    for ((a, b), c) in &p.terms {
        out.add_term(b.clone(), a.clone(), c.conj());
    }
    out
}

/// γ = f·h·ω(z)/ΠP: in chart α, γ_α = (−1)^α h^{(α)}(w)·f^{(α)}(w) dw_1∧…∧dw_n,
/// with h of degree d − n − 1 and f an optional smooth factor of homogeneity zero.
#[derive(Clone, Debug)]
pub struct DualizingSection {
    pub label: String,
    pub h: HomogeneousPolynomial,
    pub factor: Option<GlobalFunction>,
    pub twist: u32,
    n: usize,
    h_charts: Vec<CompiledBiPoly>,
    f_charts: Vec<CompiledCoefficient>,
    df_charts: Vec<Vec<CompiledCoefficient>>,
}

impl DualizingSection {
    pub fn new(variety: &Variety, h: &HomogeneousPolynomial, label: &str) -> Result<Self> {
        let excess = variety.total_degree as i64 - variety.n as i64 - 1;
        if excess < 0 {
            return arg(format!(
                "no dualizing sections: d − n − 1 = {excess} < 0 (the space of sections is zero)"
            ));
        }
        if h.num_vars() != variety.n + 1 || h.degree() as i64 != excess {
            return arg(format!(
                "section polynomial must have degree d − n − 1 = {excess}"
            ));
        }
        let h_charts = (0..=variety.n)
            .map(|a| BiPoly::holomorphic(h).dehomogenize(a).compile())
            .collect();
        let mut s = Self {
            label: label.into(),
            h: h.clone(),
            factor: None,
            twist: variety.total_degree,
            n: variety.n,
            h_charts,
            f_charts: vec![],
            df_charts: vec![],
        };
        s.set_factor(None)?;
        Ok(s)
    }

    /// Monomial basis z^e, |e| = d − n − 1, in graded lexicographic order.
    pub fn basis(variety: &Variety) -> Result<Vec<Self>> {
        let excess = variety.total_degree as i64 - variety.n as i64 - 1;
        if excess < 0 {
            return Ok(vec![]);
        }
        let nv = variety.n + 1;
        MultiIndex::all_of_degree(nv, excess as u32)
            .into_iter()
            .map(|e| {
                let label = format!("z^{:?}", e.0);
                let h = HomogeneousPolynomial::from_terms(
                    nv,
                    excess as u32,
                    [(e, ComplexRational::one())],
                )?;
                Self::new(variety, &h, &label)
            })
            .collect()
    }

    pub fn with_factor(&self, f: GlobalFunction) -> Result<Self> {
        let mut s = self.clone();
        s.set_factor(Some(f))?;
        Ok(s)
    }

    fn set_factor(&mut self, f: Option<GlobalFunction>) -> Result<()> {
        let nv = self.n + 1;
        let f = match f {
            Some(f) => {
                if f.num.nvars != nv {
                    return arg("factor lives in the wrong number of variables");
                }
                f.as_form().check_homogeneity_zero()?;
                Some(f)
            }
            None => None,
        };
        let one = GlobalFunction::new(BiPoly::one(nv), 0);
        let fc: Vec<ChartFormCoefficient> = (0..nv)
            .map(|a| f.as_ref().unwrap_or(&one).to_chart(a))
            .collect();
        self.f_charts = fc.iter().map(|c| c.compile()).collect();
        self.df_charts = fc
            .iter()
            .map(|c| (0..self.n).map(|j| c.dbar(j).compile()).collect())
            .collect();
        self.factor = f;
        Ok(())
    }

    /// Coefficient of γ_α = c·dw_1∧…∧dw_n at w.
    pub fn eval(&self, alpha: usize, w: &[C64]) -> C64 {
        let s = if alpha.is_multiple_of(2) { 1.0 } else { -1.0 };
        self.h_charts[alpha].eval(w) * self.f_charts[alpha].eval(w) * s
    }

    /// Coefficients c_j of ∂̄γ_α = Σ_j c_j dw_1∧…∧dw_n∧dw̄_j.
    pub fn dbar_eval(&self, alpha: usize, w: &[C64]) -> Vec<C64> {
        if self.factor.is_none() {
            return vec![C64::default(); self.n];
        }
        let s = if (alpha + self.n).is_multiple_of(2) { 1.0 } else { -1.0 };
        let h = self.h_charts[alpha].eval(w) * s;
        self.df_charts[alpha]
            .iter()
            .map(|d| d.eval(w) * h)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fermat_cubic() -> Variety {
        let p = HomogeneousPolynomial::from_terms(
            3,
            3,
            (0..3).map(|i| {
                let mut e = vec![0; 3];
                e[i] = 3;
                (MultiIndex(e), ComplexRational::one())
            }),
        )
        .unwrap();
        Variety::new(vec![p], None).unwrap()
    }

    #[test]
    fn antiholomorphic_cubic_value() {
        let v = fermat_cubic();
        let phi = make_antiholomorphic(&v, None, None, "anti").unwrap();
        let w = [C64::new(-1.0, 0.0), C64::new(0.0, 0.0)];
        let vals = phi.eval(0, &w);
        let get = |k: u64| {
            vals.iter()
                .find(|(m, _)| *m == k)
                .map_or(C64::default(), |p| p.1)
        };
        // det[z̄, ∇P, dz̄] at z = (1, −1, 0): dw̄_1 coefficient 0, dw̄_2 coefficient 6, over 2².
        assert!(get(0b01).norm() < 1e-14);
        assert!((get(0b10) - C64::new(1.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn section_counts_follow_adjunction() {
        let v = fermat_cubic();
        assert_eq!(DualizingSection::basis(&v).unwrap().len(), 1);
    }
}
