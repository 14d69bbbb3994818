//! The Hodge projector L_{n−m}.
//!
//! After the phase integral over arg ζ_α only the part of
//! ⟨z̄,ζ⟩^r det[z̄, Q(ζ,z)^m, dz̄^q] of total ζ-degree d−n−1 survives, and the
//! ρ powers cancel on it. Expanding that part in ζ-monomials gives
//! L[φ](z) = Σ_{|e|=d−n−1} ⟨φ, γ_{z^e}⟩·K_e(z), so the quadrature over V is done
//! once per current and K_e is a closed-form (0,q)-form in z.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::currents::{pair_current, DualizingSection, ResidualCurrent};
use crate::error::{arg, Result};
use crate::forms::constants::{projector_constant, projector_r_range, ConstantRecord};
use crate::forms::kernels::bracket_minors;
use crate::hefer::{HeferDecomposition, HeferNum};
use crate::polycore::{MultiIndex, Variety};
use crate::residue::{ResidueReport, VNode, VQuadrature};

type Form = Vec<(u64, C64)>;

/// Hefer column k: ζ-exponent → (coefficient index i, z-exponent, c) terms.
type GradedColumn = BTreeMap<Vec<u32>, Vec<(usize, Vec<u32>, C64)>>;

#[derive(Clone, Debug)]
pub struct ProjectorSetup {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub d: u32,
    pub sigma: i64,
    pub constants: Vec<ConstantRecord>,
    /// Exponents e with |e| = d − n − 1, in the order of `DualizingSection::basis`.
    pub monomials: Vec<MultiIndex>,
    columns: Vec<GradedColumn>,
    hefer: Vec<HeferNum>,
}

fn add_into(acc: &mut BTreeMap<u64, C64>, f: &[(u64, C64)], s: C64) {
    for &(k, v) in f {
        *acc.entry(k).or_default() += v * s;
    }
}

fn multinomial(b: &[u32]) -> f64 {
    let mut r = 1.0;
    let mut tot = 0u32;
    for &k in b {
        for j in 1..=k {
            tot += 1;
            r *= tot as f64 / j as f64;
        }
    }
    r
}

impl ProjectorSetup {
    pub fn new(variety: &Variety, hefer: &[HeferDecomposition], sigma: i64) -> Result<Self> {
        if hefer.len() != variety.m {
            return arg("need one Hefer decomposition per defining polynomial");
        }
        let (n, m) = (variety.n, variety.m);
        let d = variety.total_degree;
        let constants = projector_r_range(n, d)
            .map(|r| projector_constant(n, m, d, r, sigma).expect("r in range"))
            .collect();
        let excess = d as i64 - n as i64 - 1;
        let monomials = if excess >= 0 {
            MultiIndex::all_of_degree(n + 1, excess as u32)
        } else {
            vec![]
        };
        let columns = hefer
            .iter()
            .map(|h| {
                let mut col: GradedColumn = BTreeMap::new();
                for (i, qi) in h.coefficients.iter().enumerate() {
                    for ((a, b), c) in qi.terms() {
                        col.entry(a.0.clone())
                            .or_default()
                            .push((i, b.0.clone(), c.to_c64()));
                    }
                }
                col
            })
            .collect();
        Ok(Self {
            n,
            m,
            q: n - m,
            d,
            sigma,
            constants,
            monomials,
            columns,
            hefer: hefer.iter().map(|h| h.compile()).collect(),
        })
    }

    /// L vanishes identically when d ≤ n.
    pub fn is_structural_zero(&self) -> bool {
        self.constants.is_empty()
    }

    /// For each column k: ζ-exponent → vector (Σ_b c z^b)_i at fixed z.
    fn columns_at(&self, z: &[C64]) -> Vec<Vec<(Vec<u32>, Vec<C64>)>> {
        let nv = self.n + 1;
        self.columns
            .iter()
            .map(|col| {
                col.iter()
                    .map(|(a, terms)| {
                        let mut v = vec![C64::default(); nv];
                        for (i, b, c) in terms {
                            let mut t = *c;
                            for (k, &e) in b.iter().enumerate() {
                                if e > 0 {
                                    t *= z[k].powu(e);
                                }
                            }
                            v[*i] += t;
                        }
                        (a.clone(), v)
                    })
                    .collect()
            })
            .collect()
    }

    /// det[z̄, Q_1, …, Q_m, dz̄^q] expanded in ζ-monomials of degree `deg`.
    fn det_by_monomial(&self, z: &[C64], deg: u32) -> BTreeMap<Vec<u32>, BTreeMap<u64, C64>> {
        let nv = self.n + 1;
        let zbar: Vec<C64> = z.iter().map(|v| v.conj()).collect();
        let cols = self.columns_at(z);
        let mut out: BTreeMap<Vec<u32>, BTreeMap<u64, C64>> = BTreeMap::new();
        let mut choice: Vec<usize> = vec![0; self.m];
        fn rec(
            k: usize,
            left: u32,
            sum: &mut Vec<u32>,
            choice: &mut Vec<usize>,
            cols: &[Vec<(Vec<u32>, Vec<C64>)>],
            f: &mut dyn FnMut(&[usize], &[u32]),
        ) {
            if k == cols.len() {
                if left == 0 {
                    f(choice, sum);
                }
                return;
            }
            for (idx, (a, _)) in cols[k].iter().enumerate() {
                let da: u32 = a.iter().sum();
                if da > left {
                    continue;
                }
                for (s, &e) in sum.iter_mut().zip(a) {
                    *s += e;
                }
                choice[k] = idx;
                rec(k + 1, left - da, sum, choice, cols, f);
                for (s, &e) in sum.iter_mut().zip(a) {
                    *s -= e;
                }
            }
        }
        let mut sum = vec![0u32; nv];
        rec(0, deg, &mut sum, &mut choice, &cols, &mut |ch, s| {
            let mut vecs: Vec<&[C64]> = vec![&zbar];
            for (k, &i) in ch.iter().enumerate() {
                vecs.push(&cols[k][i].1);
            }
            let minors = bracket_minors(&vecs, nv);
            add_into(
                out.entry(s.to_vec()).or_default(),
                &minors,
                C64::new(1.0, 0.0),
            );
        });
        out
    }

    /// K_e(z) per monomial e, split by r. z must lie on the unit sphere.
    pub fn kernel_by_r(&self, z: &[C64]) -> Vec<Vec<Form>> {
        let excess = (self.d as i64 - self.n as i64 - 1).max(-1);
        let mut out = vec![vec![Form::new(); self.constants.len()]; self.monomials.len()];
        if excess < 0 {
            return out;
        }
        let nv = self.n + 1;
        let zbar: Vec<C64> = z.iter().map(|v| v.conj()).collect();
        for (ri, c) in self.constants.iter().enumerate() {
            let r = ri as u32;
            let dets = self.det_by_monomial(z, excess as u32 - r);
            let cr = c.value();
            for (ei, e) in self.monomials.iter().enumerate() {
                let mut acc: BTreeMap<u64, C64> = BTreeMap::new();
                // ⟨z̄, ζ⟩^r = Σ_{|b|=r} multinomial(b) z̄^b ζ^b
                for b in MultiIndex::all_of_degree(nv, r) {
                    if b.0.iter().zip(&e.0).any(|(x, y)| x > y) {
                        continue;
                    }
                    let f: Vec<u32> = e.0.iter().zip(&b.0).map(|(x, y)| x - y).collect();
                    let Some(det) = dets.get(&f) else {
                        continue;
                    };
                    let mut zb = C64::new(multinomial(&b.0), 0.0);
                    for (k, &p) in b.0.iter().enumerate() {
                        if p > 0 {
                            zb *= zbar[k].powu(p);
                        }
                    }
                    for (&k, &v) in det {
                        *acc.entry(k).or_default() += v * zb * cr;
                    }
                }
                out[ei][ri] = acc.into_iter().collect();
            }
        }
        out
    }

    pub fn kernel(&self, z: &[C64]) -> Vec<Form> {
        self.kernel_by_r(z)
            .into_iter()
            .map(|per_r| {
                let mut acc = BTreeMap::new();
                for f in per_r {
                    add_into(&mut acc, &f, C64::new(1.0, 0.0));
                }
                acc.into_iter().collect()
            })
            .collect()
    }
}

/// μ_e = ⟨φ, γ_{z^e}⟩ with their ladders.
pub fn projector_moments(
    setup: &ProjectorSetup,
    variety: &Variety,
    phi: &ResidualCurrent,
    vq: &VQuadrature,
    eta: f64,
    levels: usize,
) -> Result<Vec<ResidueReport>> {
    if setup.is_structural_zero() {
        return Ok(vec![]);
    }
    DualizingSection::basis(variety)?
        .iter()
        .map(|g| pair_current(phi, g, vq, eta, levels))
        .collect()
}

/// L[φ](z) = Σ_e μ_e K_e(z) as a (0,q)-form in dz̄ (homogeneous indices).
pub fn hodge_project(setup: &ProjectorSetup, moments: &[C64], z: &[C64]) -> Form {
    if setup.is_structural_zero() {
        return vec![];
    }
    let mut acc = BTreeMap::new();
    for (mu, k) in moments.iter().zip(setup.kernel(z)) {
        add_into(&mut acc, &k, *mu);
    }
    acc.into_iter().collect()
}

/// Direct evaluation of L[φ](z): for each V node a trapezoid average over the phase
/// of ζ_α (P ≥ 2(d+n+2) nodes) of (ρx)^{n+1−d}⟨z̄,ρxŵ⟩^r det[z̄, Q(ρxŵ, z), dz̄^q].
/// Used to cross-check the moment factorization.
pub fn hodge_project_literal(
    setup: &ProjectorSetup,
    phi: &ResidualCurrent,
    vq: &VQuadrature,
    z: &[C64],
    eta: f64,
    phase_nodes: usize,
) -> Result<Form> {
    if setup.is_structural_zero() {
        return Ok(vec![]);
    }
    let np = phase_nodes.max(2 * (setup.d as usize + setup.n + 2));
    let nv = setup.n + 1;
    let zbar: Vec<C64> = z.iter().map(|v| v.conj()).collect();
    let parts: Vec<BTreeMap<u64, C64>> = vq
        .nodes
        .par_iter()
        .map(|node: &VNode| {
            let mut acc = BTreeMap::new();
            if node.cutoff <= eta {
                return acc;
            }
            let sgn = if node.chart.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut wgt = C64::default();
            for (k, c) in phi.eval(node.chart, &node.w) {
                if let Some(p) = vq.j_position(k) {
                    wgt += c * node.tau[p];
                }
            }
            if wgt == C64::default() {
                return acc;
            }
            let what = crate::polycore::chart_lift(node.chart, &node.w);
            for p in 0..np {
                let x = C64::from_polar(1.0, 2.0 * PI * p as f64 / np as f64);
                let zeta: Vec<C64> = what.iter().map(|v| v * x * node.rho).collect();
                let pre = (x * node.rho).powi(setup.n as i32 + 1 - setup.d as i32);
                let qs: Vec<Vec<C64>> = setup.hefer.iter().map(|h| h.eval(&zeta, z)).collect();
                let mut vecs: Vec<&[C64]> = vec![&zbar];
                for q in &qs {
                    vecs.push(q);
                }
                let minors = bracket_minors(&vecs, nv);
                let zz: C64 = zbar.iter().zip(&zeta).map(|(a, b)| a * b).sum();
                let mut s = C64::default();
                for (ri, c) in setup.constants.iter().enumerate() {
                    s += c.value() * zz.powi(ri as i32);
                }
                add_into(&mut acc, &minors, pre * s * wgt * sgn / np as f64);
            }
            acc
        })
        .collect();
    let mut total = BTreeMap::new();
    for p in parts {
        for (k, v) in p {
            *total.entry(k).or_insert(C64::default()) += v;
        }
    }
    Ok(total.into_iter().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorPoint {
    pub z_re: Vec<f64>,
    pub z_im: Vec<f64>,
    /// (dz̄ bitmask, re, im) per component.
    pub value: Vec<(u64, f64, f64)>,
    /// The same split by r.
    pub by_r: Vec<Vec<(u64, f64, f64)>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorOutput {
    pub structural_zero: bool,
    pub moments: Vec<ResidueReport>,
    pub points: Vec<ProjectorPoint>,
    pub constants: Vec<ConstantRecord>,
}

fn to_triples(f: &Form) -> Vec<(u64, f64, f64)> {
    f.iter().map(|(k, v)| (*k, v.re, v.im)).collect()
}

/// L[φ] on a list of sphere points, with the per-r breakdown.
pub fn projector_output(
    setup: &ProjectorSetup,
    variety: &Variety,
    phi: &ResidualCurrent,
    vq: Option<&VQuadrature>,
    grid: &[Vec<C64>],
    eta: f64,
    levels: usize,
) -> Result<ProjectorOutput> {
    if setup.is_structural_zero() {
        return Ok(ProjectorOutput {
            structural_zero: true,
            moments: vec![],
            points: grid
                .iter()
                .map(|z| ProjectorPoint {
                    z_re: z.iter().map(|v| v.re).collect(),
                    z_im: z.iter().map(|v| v.im).collect(),
                    value: vec![],
                    by_r: vec![],
                })
                .collect(),
            constants: vec![],
        });
    }
    let vq =
        vq.ok_or_else(|| crate::error::Error::Argument("projector needs a V quadrature".into()))?;
    let moments = projector_moments(setup, variety, phi, vq, eta, levels)?;
    let mu: Vec<C64> = moments.iter().map(|r| r.extrapolated()).collect();
    let points = grid
        .iter()
        .map(|z| {
            let by_e = setup.kernel_by_r(z);
            let mut by_r = vec![BTreeMap::new(); setup.constants.len()];
            for (e, per_r) in by_e.iter().enumerate() {
                for (ri, f) in per_r.iter().enumerate() {
                    add_into(&mut by_r[ri], f, mu[e]);
                }
            }
            let mut tot = BTreeMap::new();
            for f in &by_r {
                let v: Form = f.iter().map(|(k, v)| (*k, *v)).collect();
                add_into(&mut tot, &v, C64::new(1.0, 0.0));
            }
            ProjectorPoint {
                z_re: z.iter().map(|v| v.re).collect(),
                z_im: z.iter().map(|v| v.im).collect(),
                value: to_triples(&tot.into_iter().collect()),
                by_r: by_r
                    .into_iter()
                    .map(|f| to_triples(&f.into_iter().collect()))
                    .collect(),
            }
        })
        .collect();
    Ok(ProjectorOutput {
        structural_zero: false,
        moments,
        points,
        constants: setup.constants.clone(),
    })
}

/// Pulls a (0,q)-form in homogeneous dz̄ back to chart α at the sphere point ρ·s_α(w):
/// dz̄ ↦ ρ dw̄ modulo the z̄ direction, components containing dz̄_α dropped.
pub fn pullback_to_chart(f: &Form, alpha: usize, rho: f64, q: usize) -> Form {
    let s = rho.powi(q as i32);
    f.iter()
        .filter(|(k, _)| k & (1 << alpha) == 0)
        .map(|(k, v)| {
            let low = k & ((1u64 << alpha) - 1);
            let high = (k >> (alpha + 1)) << alpha;
            (low | high, v * s)
        })
        .collect()
}

/// ⟨L[φ], γ⟩ = Σ_e μ_e ⟨K_e, γ⟩.
pub fn hodge_project_pair(
    setup: &ProjectorSetup,
    moments: &[C64],
    gamma: &DualizingSection,
    vq: &VQuadrature,
    eta: f64,
    levels: usize,
) -> Result<ResidueReport> {
    if setup.is_structural_zero() {
        return Ok(ResidueReport::exact("<L, γ>", C64::default()));
    }
    let num = |node: &VNode| -> Vec<(u64, C64)> {
        let l = hodge_project(setup, moments, &node.zeta);
        let g = gamma.eval(node.chart, &node.w);
        pullback_to_chart(&l, node.chart, node.rho, setup.q)
            .into_iter()
            .map(|(k, v)| (k, v * g))
            .collect()
    };
    let mut r = crate::residue::fibered_residue(vq, &num, eta, levels)?;
    r.label = format!("<L, {}>", gamma.label);
    Ok(r)
}

/// G_{ef} = ⟨K_e, γ_{z^f}⟩; L is a projector on the section pairings iff G = I.
pub fn projector_gram(
    setup: &ProjectorSetup,
    variety: &Variety,
    vq: &VQuadrature,
    eta: f64,
    levels: usize,
) -> Result<Vec<Vec<C64>>> {
    let basis = DualizingSection::basis(variety)?;
    let k = setup.monomials.len();
    let mut g = vec![vec![C64::default(); k]; k];
    for e in 0..k {
        let mut mu = vec![C64::default(); k];
        mu[e] = C64::new(1.0, 0.0);
        for (f, gam) in basis.iter().enumerate() {
            g[e][f] = hodge_project_pair(setup, &mu, gam, vq, eta, levels)?.extrapolated();
        }
    }
    Ok(g)
}
