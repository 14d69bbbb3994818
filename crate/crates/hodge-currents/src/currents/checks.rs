//! Closedness, chart compatibility, section transitions, and the pairing ⟨φ, γ⟩.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::coeff::{BiPoly, ChartForm, ChartFormCoefficient};
use super::current::{DualizingSection, ResidualCurrent};
use crate::error::{arg, Result};
use crate::polycore::Variety;
use crate::residue::{fibered_residue, FormCoeffs, ResidueReport, VNode, VQuadrature};

/// Value of the (0,q)-form Σ c_J dw̄_J on the conjugates of q chosen tangent vectors,
/// for every q-subset of the columns of `t`.
pub fn restrict_to_tangent(coeffs: &FormCoeffs, q: usize, t: &DMatrix<C64>) -> Vec<C64> {
    let k = t.ncols();
    if q > k {
        return vec![];
    }
    let mut out = Vec::new();
    for cols in 0u64..(1 << k) {
        if cols.count_ones() as usize != q {
            continue;
        }
        let cidx: Vec<usize> = (0..k).filter(|c| cols & (1 << c) != 0).collect();
        let mut acc = C64::default();
        for &(jmask, c) in coeffs {
            let ridx: Vec<usize> = (0..t.nrows()).filter(|r| jmask & (1 << r) != 0).collect();
            let m = DMatrix::from_fn(q, q, |r, cc| t[(ridx[r], cidx[cc])].conj());
            acc += c * m.determinant();
        }
        out.push(acc);
    }
    out
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn coeff_norm(v: &FormCoeffs) -> f64 {
    v.iter().map(|(_, x)| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Values below this are round-off (e.g. a current in the ideal, which vanishes on V);
/// relative residuals are taken against at least this scale.
pub const SCALE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct ClosednessReport {
    /// ∂̄Φ_α vanishes identically in every chart.
    pub symbolically_closed: bool,
    /// max |∂̄Φ_α restricted to T^{0,1}V| / max ‖∂̄Φ_α‖ over V samples.
    pub tangential_residual: f64,
    /// Least-squares misfit of ∂̄Φ_α against F_k·(monomials in w, w̄) at ambient
    /// points near V, relative to ‖∂̄Φ‖. Informational.
    pub ambient_fit_residual: f64,
    pub ambient_basis_degree: u32,
    pub dbar_scale: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub closed: bool,
}

/// ∂̄-closedness as a residual current: ∂̄Φ_α must vanish along V modulo the ideal,
/// which at V points means its restriction to the tangential (0,1)-directions is zero.
pub fn check_closed(
    phi: &ResidualCurrent,
    variety: &Variety,
    samples: &[VNode],
    tolerance: f64,
    basis_degree: u32,
    seed: u64,
) -> ClosednessReport {
    let dbars: Vec<ChartForm> = phi.charts.iter().map(|c| c.dbar()).collect();
    let symbolically_closed = dbars.iter().all(|d| d.is_zero());
    let compiled: Vec<_> = dbars.iter().map(|d| d.compile()).collect();
    let mut worst_tan: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for node in samples {
        let v = compiled[node.chart].eval(&node.w);
        scale = scale.max(coeff_norm(&v));
        if let Some(t) = variety.tangent_basis(node.chart, &node.w) {
            worst_tan = worst_tan.max(norm(&restrict_to_tangent(&v, phi.q + 1, &t)));
        }
    }
    let tangential_residual = worst_tan / scale.max(SCALE_FLOOR);
    let ambient_fit_residual = if symbolically_closed {
        0.0
    } else {
        ambient_fit(&dbars, variety, samples, basis_degree, seed)
    };
    ClosednessReport {
        symbolically_closed,
        tangential_residual,
        ambient_fit_residual,
        ambient_basis_degree: basis_degree,
        dbar_scale: scale,
        samples: samples.len(),
        tolerance,
        closed: symbolically_closed || tangential_residual <= tolerance,
    }
}

fn monomials(n: usize, max_deg: u32) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = vec![];
    let total = 2 * n;
    let mut e = vec![0u32; total];
    loop {
        if e.iter().sum::<u32>() <= max_deg {
            out.push((e[..n].to_vec(), e[n..].to_vec()));
        }
        let mut i = 0;
        loop {
            if i == total {
                return out;
            }
            e[i] += 1;
            if e[i] <= max_deg {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

fn ambient_fit(
    dbars: &[ChartForm],
    variety: &Variety,
    samples: &[VNode],
    deg: u32,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = variety.n;
    let monos = monomials(n, deg);
    let mut worst: f64 = 0.0;
    for (alpha, dbar) in dbars.iter().enumerate() {
        let pts: Vec<Vec<C64>> = samples
            .iter()
            .filter(|s| s.chart == alpha)
            .take(4 * monos.len() * variety.m + 8)
            .map(|s| {
                s.w.iter()
                    .map(|v| v + C64::new(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05)))
                    .collect()
            })
            .collect();
        if pts.len() < monos.len() * variety.m {
            continue;
        }
        let cf = dbar.compile();
        let ncols = monos.len() * variety.m;
        let a = DMatrix::from_fn(pts.len(), ncols, |r, c| {
            let (vals, _) = variety.chart_eval(alpha, &pts[r]);
            let (k, mi) = (c / monos.len(), c % monos.len());
            let (ea, eb) = &monos[mi];
            let mut t = vals[k];
            for (i, w) in pts[r].iter().enumerate() {
                t *= w.powu(ea[i]) * w.conj().powu(eb[i]);
            }
            t
        });
        let svd = a.clone().svd(true, true);
        for &mask in dbar.coeffs.keys() {
            let b = DVector::from_iterator(
                pts.len(),
                pts.iter().map(|w| {
                    cf.eval(w)
                        .into_iter()
                        .find(|(k, _)| *k == mask)
                        .map_or(C64::default(), |p| p.1)
                }),
            );
            let bn = b.norm();
            if bn == 0.0 {
                continue;
            }
            if let Ok(x) = svd.solve(&b, 1e-12) {
                worst = worst.max((&a * x - &b).norm() / bn);
            }
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityReport {
    /// max over overlap samples of the tangential mismatch of Φ_α and Φ_β, relative
    /// to the largest tangential value seen.
    pub residual: f64,
    pub pairs_checked: usize,
    pub tolerance: f64,
    pub compatible: bool,
}

/// Compares Φ_α with the pullback of Φ_β along the chart change, restricted to V.
pub fn check_compatibility(
    phi: &ResidualCurrent,
    variety: &Variety,
    samples: &[VNode],
    tolerance: f64,
) -> CompatibilityReport {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut pairs = 0;
    for node in samples {
        let alpha = node.chart;
        let Some(t) = variety.tangent_basis(alpha, &node.w) else {
            continue;
        };
        let here = restrict_to_tangent(&phi.eval(alpha, &node.w), phi.q, &t);
        scale = scale.max(norm(&here));
        for beta in 0..=variety.n {
            if beta == alpha {
                continue;
            }
            let z = crate::polycore::chart_lift(alpha, &node.w);
            let ratio = z[beta].norm();
            if !(0.25..=4.0).contains(&ratio) {
                continue;
            }
            let (Ok(wb), Ok(jac)) = (
                variety.change_chart(alpha, beta, &node.w),
                variety.chart_change_jacobian(alpha, beta, &node.w),
            ) else {
                continue;
            };
            let tb = &jac * &t;
            let there = restrict_to_tangent(&phi.eval(beta, &wb), phi.q, &tb);
            let diff: Vec<C64> = here.iter().zip(&there).map(|(a, b)| a - b).collect();
            worst = worst.max(norm(&diff));
            scale = scale.max(norm(&there));
            pairs += 1;
        }
    }
    let residual = worst / scale.max(SCALE_FLOOR);
    CompatibilityReport {
        residual,
        pairs_checked: pairs,
        tolerance,
        compatible: residual <= tolerance,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionReport {
    pub residual: f64,
    pub pairs_checked: usize,
    pub tolerance: f64,
    pub holds: bool,
}

/// γ_α/F^{(α)} = γ_β/F^{(β)} as meromorphic (n,0)-forms at random overlap points.
pub fn check_transitions(
    gamma: &DualizingSection,
    variety: &Variety,
    points: usize,
    seed: u64,
    tolerance: f64,
) -> TransitionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = variety.n;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for _ in 0..points {
        let z: Vec<C64> = (0..=n)
            .map(|_| {
                C64::from_polar(
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        for alpha in 0..=n {
            let w = crate::polycore::chart_coords(alpha, &z).expect("nonzero coordinates");
            let (fa, _) = variety.chart_eval(alpha, &w);
            let lhs = gamma.eval(alpha, &w) / fa.iter().product::<C64>();
            for beta in 0..=n {
                if beta == alpha {
                    continue;
                }
                let wb = variety
                    .change_chart(alpha, beta, &w)
                    .expect("nonzero coordinates");
                let jac = variety
                    .chart_change_jacobian(alpha, beta, &w)
                    .expect("nonzero coordinates");
                let (fb, _) = variety.chart_eval(beta, &wb);
                let rhs = gamma.eval(beta, &wb) / fb.iter().product::<C64>() * jac.determinant();
                worst = worst
                    .max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE));
                pairs += 1;
            }
        }
    }
    TransitionReport {
        residual: worst,
        pairs_checked: pairs,
        tolerance,
        holds: worst <= tolerance,
    }
}

/// ⟨φ, γ⟩ = Σ_α ∫ ϑ_α γ_α ∧ Φ_α ∧ ∂̄(1/F^{(α)}) by fibered residues with an η-ladder.
pub fn pair_current(
    phi: &ResidualCurrent,
    gamma: &DualizingSection,
    vq: &VQuadrature,
    eta: f64,
    levels: usize,
) -> Result<ResidueReport> {
    if phi.q != phi.n - phi.m || vq.n != phi.n {
        return arg(format!(
            "bidegree mismatch: γ∧Φ has bidegree ({}, {}), expected ({}, {})",
            phi.n,
            phi.q,
            phi.n,
            phi.n - phi.m
        ));
    }
    if phi.is_zero() {
        return Ok(ResidueReport::exact("pairing", C64::default()));
    }
    let num = |node: &VNode| -> FormCoeffs {
        let g = gamma.eval(node.chart, &node.w);
        phi.eval(node.chart, &node.w)
            .into_iter()
            .map(|(k, c)| (k, c * g))
            .collect()
    };
    let mut r = fibered_residue(vq, &num, eta, levels)?;
    r.label = format!("<{}, {}>", phi.label, gamma.label);
    Ok(r)
}

/// A global function N/|z|^{2s} pulled back to chart α, as a chart coefficient.
pub fn chart_function(num: &BiPoly, s: u32, alpha: usize) -> ChartFormCoefficient {
    ChartFormCoefficient::new(num.dehomogenize(alpha), s)
}
