//! The ∂̄-solution operator I_q for q = n − m.
//!
//! With ζ = u·ζ̂ (|u| = 1, ζ̂ = ρ s_β(w)) and a = ⟨z̄, ζ̂⟩ the kernel depends on the
//! phase only through u^N/((au−1)^q (u−ā)), N = n − d + Σj, so the fiber integral
//! is done in closed form and only the base integral over V is a quadrature.
//! The point singularity at ζ̂ ~ z is removed by a geodesic δ-ball. The leading
//! O(δ) part of the removed integral cancels by symmetry, so the ladder is
//! extrapolated in δ².

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::currents::ResidualCurrent;
use crate::error::{arg, Result};
use crate::forms::constants::{solver_constant, ConstantRecord};
use crate::forms::kernels::bracket_minors;
use crate::hefer::{HeferDecomposition, HeferNum};
use crate::polycore::{NumPoly, Variety};
use crate::residue::{ResidueReport, VNode, VQuadrature};

#[derive(Clone, Debug)]
pub struct SolverSetup {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub d: u32,
    pub sigma: i64,
    pub constant: ConstantRecord,
    hefer: Vec<HeferNum>,
    cutoffs: Vec<NumPoly>,
}

impl SolverSetup {
    /// |g_α(w)| in the chart where z is largest.
    pub fn cutoff_at(&self, z: &[C64]) -> f64 {
        let alpha = (0..z.len())
            .max_by(|&a, &b| z[a].norm().total_cmp(&z[b].norm()))
            .unwrap_or(0);
        let w = crate::polycore::chart_coords(alpha, z).expect("largest coordinate is nonzero");
        self.cutoffs[alpha].eval(&w).norm()
    }

    pub fn new(variety: &Variety, hefer: &[HeferDecomposition], sigma: i64) -> Result<Self> {
        let (n, m) = (variety.n, variety.m);
        let q = n - m;
        let Some(constant) = solver_constant(n, m, q, sigma) else {
            return arg("the solution operator needs q = n − m ≥ 1");
        };
        if hefer.len() != m {
            return arg("need one Hefer decomposition per defining polynomial");
        }
        Ok(Self {
            n,
            m,
            q,
            d: variety.total_degree,
            sigma,
            constant,
            hefer: hefer.iter().map(|h| h.compile()).collect(),
            cutoffs: variety.chart_cutoffs.iter().map(|g| g.compile()).collect(),
        })
    }
}

fn falling(n: i64, i: usize) -> f64 {
    (0..i as i64).map(|k| (n - k) as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// ∮_{|u|=1} u^N / ((a u − 1)^q (u − ā)) du/i for |a| < 1.
pub fn phase_integral(a: C64, big_n: i64, q: usize) -> C64 {
    let s = 1.0 - a.norm_sqr();
    if big_n >= 0 {
        // only the pole at u = ā is inside
        return 2.0 * PI * a.conj().powi(big_n as i32) / (-s).powi(q as i32);
    }
    // u^N has a pole at 0; use the exterior pole u = 1/a (no residue at ∞)
    let k = q - 1;
    let mut acc = 0.0;
    for i in 0..=k {
        let sgn = if (k - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        let fact: f64 = (1..=(k - i)).map(|v| v as f64).product();
        acc += binom(k, i) * falling(big_n, i) * sgn * fact / s.powi((q - i) as i32);
    }
    let kf: f64 = (1..=k).map(|v| v as f64).product();
    -2.0 * PI * a.powi((-big_n) as i32) * acc / kf
}

/// Selections (j_1..j_m), j_k < d_k, of graded Hefer parts.
fn selections(degs: &[u32]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in degs {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..d as usize).map(move |j| {
                    let mut t = s.clone();
                    t.push(j);
                    t
                })
            })
            .collect();
    }
    out
}

/// Contribution of one V node to I[φ](z), as a (0,q−1)-form in dz̄, with the
/// geodesic distance from z.
fn node_term(setup: &SolverSetup, node: &VNode, weight: C64, z: &[C64]) -> (f64, Vec<(u64, C64)>) {
    let nv = setup.n + 1;
    let zbar: Vec<C64> = z.iter().map(|v| v.conj()).collect();
    let a: C64 = zbar.iter().zip(&node.zeta).map(|(x, y)| x * y).sum();
    let dist = a.norm().min(1.0).acos();
    if dist == 0.0 {
        return (0.0, vec![]);
    }
    let zhat_bar: Vec<C64> = node.zeta.iter().map(|v| v.conj()).collect();
    let graded: Vec<Vec<Vec<C64>>> = setup
        .hefer
        .iter()
        .map(|h| h.eval_graded(&node.zeta, z))
        .collect();
    let degs: Vec<u32> = setup.hefer.iter().map(|h| h.joint_degree + 1).collect();
    let mut acc: BTreeMap<u64, C64> = BTreeMap::new();
    let mut cols: Vec<Vec<C64>> = vec![vec![]; setup.m];
    for sel in selections(&degs) {
        for (k, &j) in sel.iter().enumerate() {
            cols[k] = graded[k].iter().map(|g| g[j]).collect();
        }
        let sj: usize = sel.iter().sum();
        let big_n = setup.n as i64 - setup.d as i64 + sj as i64;
        let xi = phase_integral(a, big_n, setup.q);
        let mut vecs: Vec<&[C64]> = vec![&zbar, &zhat_bar];
        for c in &cols {
            vecs.push(c);
        }
        for (mask, v) in bracket_minors(&vecs, nv) {
            *acc.entry(mask).or_default() += v * xi;
        }
    }
    let s = weight * node.rho.powi(setup.n as i32 + 1 - setup.d as i32);
    (dist, acc.into_iter().map(|(k, v)| (k, v * s)).collect())
}

/// I[φ](z) with the δ-ball around z removed, for each δ in `deltas` (one pass).
pub fn solve_dbar_multi(
    setup: &SolverSetup,
    phi: &ResidualCurrent,
    vq: &VQuadrature,
    z: &[C64],
    deltas: &[f64],
    eta: f64,
) -> Vec<Vec<(u64, C64)>> {
    let pre = setup.constant.value()
        * C64::new(0.0, 1.0)
        * if (setup.n + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let parts: Vec<(f64, Vec<(u64, C64)>)> = vq
        .nodes
        .par_iter()
        .map(|node| {
            if node.cutoff <= eta {
                return (0.0, vec![]);
            }
            let mut w = C64::default();
            for (k, c) in phi.eval(node.chart, &node.w) {
                if let Some(p) = vq.j_position(k) {
                    w += c * node.tau[p];
                }
            }
            if w == C64::default() {
                return (0.0, vec![]);
            }
            let sgn = if node.chart % 2 == 0 { 1.0 } else { -1.0 };
            node_term(setup, node, w * sgn * pre, z)
        })
        .collect();
    deltas
        .iter()
        .map(|&dl| {
            let mut acc: BTreeMap<u64, C64> = BTreeMap::new();
            for (dist, p) in &parts {
                if *dist < dl {
                    continue;
                }
                for (k, v) in p {
                    *acc.entry(*k).or_default() += v;
                }
            }
            acc.into_iter().collect()
        })
        .collect()
}

/// I[φ](z) with the δ-ball around z removed.
pub fn solve_dbar_at(
    setup: &SolverSetup,
    phi: &ResidualCurrent,
    vq: &VQuadrature,
    z: &[C64],
    delta: f64,
    eta: f64,
) -> Vec<(u64, C64)> {
    solve_dbar_multi(setup, phi, vq, z, &[delta], eta)
        .pop()
        .unwrap()
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverComponent {
    pub mask: u64,
    pub report: ResidueReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverOutput {
    pub z_re: Vec<f64>,
    pub z_im: Vec<f64>,
    pub deltas: Vec<f64>,
    pub components: Vec<SolverComponent>,
    pub constant: ConstantRecord,
}

impl SolverOutput {
    pub fn value(&self) -> Vec<(u64, C64)> {
        self.components
            .iter()
            .map(|c| (c.mask, c.report.extrapolated()))
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.value()
            .iter()
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// I[φ](z) on a δ-ladder δ0, δ0/2, … with extrapolation in δ².
pub fn solve_dbar(
    setup: &SolverSetup,
    phi: &ResidualCurrent,
    vq: &VQuadrature,
    z: &[C64],
    delta0: f64,
    levels: usize,
    eta: f64,
) -> Result<SolverOutput> {
    if phi.q != setup.q || phi.n != setup.n {
        return arg("current bidegree does not match the solution operator");
    }
    if !vq.nodes.is_empty() && vq.nodes.iter().all(|v| v.cutoff <= eta) {
        return Err(crate::error::Error::Cutoff { eta });
    }
    if setup.cutoff_at(z) <= eta {
        return Err(crate::error::Error::Cutoff { eta });
    }
    let deltas: Vec<f64> = (0..=levels).map(|k| delta0 / 2f64.powi(k as i32)).collect();
    let vals = solve_dbar_multi(setup, phi, vq, z, &deltas, eta);
    let xs: Vec<f64> = deltas.iter().map(|d| d * d).collect();
    let mut masks: Vec<u64> = vals.iter().flat_map(|v| v.iter().map(|p| p.0)).collect();
    masks.sort_unstable();
    masks.dedup();
    let components = masks
        .into_iter()
        .map(|mask| {
            let ys: Vec<C64> = vals
                .iter()
                .map(|v| {
                    v.iter()
                        .find(|p| p.0 == mask)
                        .map_or(C64::default(), |p| p.1)
                })
                .collect();
            let mut report = ResidueReport::from_ladder(
                &format!("I[{}] dz̄ mask {mask}", phi.label),
                &deltas,
                &xs,
                &ys,
                2,
            );
            report.eta = Some(eta);
            SolverComponent { mask, report }
        })
        .collect();
    Ok(SolverOutput {
        z_re: z.iter().map(|v| v.re).collect(),
        z_im: z.iter().map(|v| v.im).collect(),
        deltas,
        components,
        constant: setup.constant.clone(),
    })
}

/// ⟨I[φ], ∂̄γ⟩ := (−1)^{n+1} ∫ ∂̄γ ∧ I[φ] for γ = f·γ_h, oriented so that
/// ⟨∂̄u, γ⟩ = ⟨u, ∂̄γ⟩. I[φ] is evaluated at the nodes on the ladder δ, δ/2 and
/// extrapolated in δ². Vanishes identically when f is absent (γ holomorphic).
pub fn solver_pair_dbar(
    setup: &SolverSetup,
    phi: &ResidualCurrent,
    gamma: &crate::currents::DualizingSection,
    vq: &VQuadrature,
    delta: f64,
    eta: f64,
) -> Result<ResidueReport> {
    if gamma.factor.is_none() || phi.is_zero() {
        return Ok(ResidueReport::exact("<I, dbar γ>", C64::default()));
    }
    if setup.q != 1 {
        return arg("⟨I[φ], ∂̄γ⟩ is implemented for curves");
    }
    let deltas = [delta, 0.5 * delta];
    let sign = if (setup.n + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    // I[φ] is a function on V; ∂̄γ = Σ c_j dw∧dw̄_j has bidegree (n, 1) = (n, q).
    let vals: Vec<Vec<C64>> = vq
        .nodes
        .iter()
        .map(|node| {
            solve_dbar_multi(setup, phi, vq, &node.zeta, &deltas, eta)
                .into_iter()
                .map(|f| f.into_iter().map(|p| p.1).sum())
                .collect()
        })
        .collect();
    let index: BTreeMap<usize, usize> = vq
        .nodes
        .iter()
        .enumerate()
        .map(|(i, v)| (v as *const VNode as usize, i))
        .collect();
    let ys: Vec<C64> = (0..deltas.len())
        .map(|k| {
            let num = |node: &VNode| -> Vec<(u64, C64)> {
                let f = vals[index[&(node as *const VNode as usize)]][k];
                gamma
                    .dbar_eval(node.chart, &node.w)
                    .into_iter()
                    .enumerate()
                    .map(|(j, c)| (1u64 << j, c * f * sign))
                    .collect()
            };
            vq.integrate(&num, eta)
        })
        .collect();
    let xs: Vec<f64> = deltas.iter().map(|d| d * d).collect();
    let mut r = ResidueReport::from_ladder("<I, dbar γ>", &deltas, &xs, &ys, 2);
    r.eta = Some(eta);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(a: C64, n: i64, q: usize) -> C64 {
        let k = 4096;
        let mut s = C64::default();
        for p in 0..k {
            let u = C64::from_polar(1.0, 2.0 * PI * p as f64 / k as f64);
            // du/i = u dθ
            s += u.powi(n as i32) / ((a * u - 1.0).powi(q as i32) * (u - a.conj())) * u;
        }
        s * 2.0 * PI / k as f64
    }

    #[test]
    fn phase_integral_matches_trapezoid() {
        let a = C64::new(0.3, -0.4);
        for q in 1..=3 {
            for n in -4..=3 {
                let got = phase_integral(a, n, q);
                let want = direct(a, n, q);
                assert!(
                    (got - want).norm() < 1e-10 * (1.0 + want.norm()),
                    "q={q} N={n}: {got} vs {want}"
                );
            }
        }
    }
}
