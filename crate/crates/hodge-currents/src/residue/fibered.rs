//! Quadrature over V by fibered residues: at each root of the fiber system the
//! residue of c·dw_1∧…∧dw_n∧dw̄_J/ΠF is (2πi)^m c/det(∂F/∂w_S) times the
//! restriction of ±dw_B∧dw̄_J to V, integrated over the base coordinates w_B.
//! Several projections S are blended with weights |det J_S|²/Σ_S′|det J_S′|².

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ladder::ResidueReport;
use super::tube::{dbar_index_sets, FormCoeffs};
use crate::error::{arg, Result};
use crate::polycore::variety::{fiber_jacobian, sphere_lift, DISCRIMINANT_GUARD};
use crate::polycore::{BaseGrid, Variety};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ProjectionMode {
    /// All m-subsets S, blended by the projection weights.
    Partition,
    /// One fixed fiber set; no blending.
    Single { fiber: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VQuadratureConfig {
    pub grid: BaseGrid,
    pub charts: Vec<usize>,
    /// Multiply by ϑ_α = |z_α|²/|z|².
    pub partition_of_unity: bool,
    pub projection: ProjectionMode,
}

impl VQuadratureConfig {
    pub fn global(variety: &Variety, grid: BaseGrid) -> Self {
        Self {
            grid,
            charts: (0..=variety.n).collect(),
            partition_of_unity: true,
            projection: ProjectionMode::Partition,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VNode {
    pub chart: usize,
    pub fiber: Vec<usize>,
    /// Affine point in the chart.
    pub w: Vec<C64>,
    /// ρ·s_α(w) on the unit sphere.
    pub zeta: Vec<C64>,
    pub rho: f64,
    /// Base weight · projection weight · ϑ_α.
    pub weight: f64,
    /// Sample measure used for excluded-measure accounting.
    pub measure: f64,
    pub det_js: C64,
    /// τ_J per antiholomorphic index set J (same order as `VQuadrature::jsets`).
    pub tau: Vec<C64>,
    pub cutoff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExclusionAccount {
    pub excluded_roots: usize,
    pub degenerate_base_points: usize,
    pub excluded_measure_estimate: f64,
    pub total_measure: f64,
}

#[derive(Clone, Debug)]
pub struct VQuadrature {
    pub n: usize,
    pub m: usize,
    pub jsets: Vec<u64>,
    pub nodes: Vec<VNode>,
    pub exclusions: ExclusionAccount,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    dbar_index_sets(n, k)
        .into_iter()
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Sign of dw_1∧…∧dw_n = sgn · dw_S∧dw_B.
fn split_sign(s: &[usize], b: &[usize]) -> f64 {
    let inv = s
        .iter()
        .map(|&x| b.iter().filter(|&&y| y < x).count())
        .sum::<usize>();
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl VQuadrature {
    pub fn build(variety: &Variety, cfg: &VQuadratureConfig) -> Result<Self> {
        let (n, m) = (variety.n, variety.m);
        let k = n - m;
        if cfg.charts.iter().any(|&a| a > n) {
            return arg("chart index out of range");
        }
        let fibers: Vec<Vec<usize>> = match &cfg.projection {
            ProjectionMode::Partition => subsets(n, m),
            ProjectionMode::Single { fiber } => {
                if fiber.len() != m || fiber.iter().any(|&s| s >= n) {
                    return arg("fiber set must hold m affine indices");
                }
                let mut f = fiber.clone();
                f.sort_unstable();
                vec![f]
            }
        };
        let all_fibers = subsets(n, m);
        let jsets = dbar_index_sets(n, k);
        let base_nodes = cfg.grid.nodes(k);
        let orient = (if (k * k.saturating_sub(1) / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }) * C64::new(0.0, -2.0).powi(k as i32);
        let res_factor = C64::new(0.0, 2.0 * PI).powi(m as i32);

        let mut jobs = Vec::new();
        for &alpha in &cfg.charts {
            for s in &fibers {
                for (bi, node) in base_nodes.iter().enumerate() {
                    jobs.push((alpha, s.clone(), bi, node));
                }
            }
        }
        let blend = matches!(cfg.projection, ProjectionMode::Partition);
        let results: Vec<(Vec<VNode>, usize, bool, f64)> = jobs
            .par_iter()
            .map(|(alpha, s, _bi, (base, bw))| {
                let alpha = *alpha;
                let b: Vec<usize> = (0..n).filter(|j| !s.contains(j)).collect();
                let sign = split_sign(s, &b);
                let zeros = vec![C64::default(); m];
                let sol = variety.fiber_solutions(alpha, s, base, &zeros);
                let mut out = Vec::new();
                let mut excluded = 0;
                let mut excluded_measure = 0.0;
                for w in sol.points {
                    let (_, jac) = variety.chart_eval(alpha, &w);
                    let js = fiber_jacobian(&jac, s);
                    let det = js.determinant();
                    let scale: f64 = (0..m)
                        .map(|r| jac.row(r).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
                        .product();
                    let (zeta, rho) = sphere_lift(alpha, &w);
                    let theta = if cfg.partition_of_unity {
                        rho * rho
                    } else {
                        1.0
                    };
                    // M = −J_S^{-1} J_B: dw_S = M dw_B on V.
                    let jb = DMatrix::from_fn(m, k, |r, c| jac[(r, b[c])]);
                    let mmat = match js.clone().lu().solve(&jb) {
                        Some(x)
                            if det.norm() >= DISCRIMINANT_GUARD * scale.max(f64::MIN_POSITIVE) =>
                        {
                            -x
                        }
                        _ => {
                            excluded += 1;
                            let meas = bw * theta * rho.powi(2 * (k as i32 + 1));
                            excluded_measure += meas;
                            continue;
                        }
                    };
                    let pi_s = if blend {
                        let tot: f64 = all_fibers
                            .iter()
                            .map(|s2| fiber_jacobian(&jac, s2).determinant().norm_sqr())
                            .sum();
                        det.norm_sqr() / tot
                    } else {
                        1.0
                    };
                    let weight = bw * pi_s * theta;
                    let gram = DMatrix::<C64>::identity(k, k) + mmat.adjoint() * &mmat;
                    let measure = weight * gram.determinant().re * rho.powi(2 * (k as i32 + 1));
                    let pre = res_factor * orient * (sign * weight) / det;
                    let tau = jsets
                        .iter()
                        .map(|&jm| {
                            let js_idx: Vec<usize> =
                                (0..n).filter(|i| jm & (1 << i) != 0).collect();
                            let a = DMatrix::from_fn(k, k, |r, c| {
                                let j = js_idx[r];
                                if let Some(pb) = b.iter().position(|&x| x == j) {
                                    C64::new(if pb == c { 1.0 } else { 0.0 }, 0.0)
                                } else {
                                    let ps = s.iter().position(|&x| x == j).unwrap();
                                    mmat[(ps, c)].conj()
                                }
                            });
                            pre * a.determinant()
                        })
                        .collect();
                    let cutoff = variety.cutoff(alpha, &w).norm();
                    out.push(VNode {
                        chart: alpha,
                        fiber: s.clone(),
                        w,
                        zeta,
                        rho,
                        weight,
                        measure,
                        det_js: det,
                        tau,
                        cutoff,
                    });
                }
                (out, excluded, sol.failed > 0, excluded_measure)
            })
            .collect();
        let mut nodes = Vec::new();
        let mut acct = ExclusionAccount {
            excluded_roots: 0,
            degenerate_base_points: 0,
            excluded_measure_estimate: 0.0,
            total_measure: 0.0,
        };
        for (ns, ex, deg, em) in results {
            acct.excluded_roots += ex;
            acct.degenerate_base_points += deg as usize;
            acct.excluded_measure_estimate += em;
            nodes.extend(ns);
        }
        acct.total_measure =
            nodes.iter().map(|v| v.measure).sum::<f64>() + acct.excluded_measure_estimate;
        Ok(Self {
            n,
            m,
            jsets,
            nodes,
            exclusions: acct,
        })
    }

    pub fn j_position(&self, jmask: u64) -> Option<usize> {
        self.jsets.iter().position(|&j| j == jmask)
    }

    /// Residue sum of Σ_J c_J dw∧dw̄_J/ΠF over nodes with cutoff > η.
    pub fn integrate(&self, numerator: &(dyn Fn(&VNode) -> FormCoeffs + Sync), eta: f64) -> C64 {
        let parts: Vec<C64> = self
            .nodes
            .par_iter()
            .map(|node| {
                if node.cutoff <= eta {
                    return C64::default();
                }
                let mut acc = C64::default();
                for (jm, c) in numerator(node) {
                    if let Some(p) = self.j_position(jm) {
                        acc += c * node.tau[p];
                    }
                }
                acc
            })
            .collect();
        parts.into_iter().sum()
    }

    /// Fraction of the sample measure with cutoff ≤ η, plus discriminant exclusions.
    pub fn excluded_fraction(&self, eta: f64) -> f64 {
        let cut: f64 = self
            .nodes
            .iter()
            .filter(|v| v.cutoff <= eta)
            .map(|v| v.measure)
            .sum();
        (cut + self.exclusions.excluded_measure_estimate)
            / self.exclusions.total_measure.max(f64::MIN_POSITIVE)
    }

    /// Largest η (from `eta0` halving) whose excluded fraction stays ≤ `max_fraction`.
    pub fn default_eta(&self, eta0: f64, max_fraction: f64) -> f64 {
        let mut eta = eta0;
        for _ in 0..60 {
            if self.excluded_fraction(eta) <= max_fraction {
                return eta;
            }
            eta *= 0.5;
        }
        0.0
    }
}

/// Fibered residue with an η-ladder (η halved `levels` times) and extrapolation in η.
pub fn fibered_residue(
    vq: &VQuadrature,
    numerator: &(dyn Fn(&VNode) -> FormCoeffs + Sync),
    eta: f64,
    levels: usize,
) -> Result<ResidueReport> {
    if vq.nodes.iter().all(|v| v.cutoff <= eta) && !vq.nodes.is_empty() {
        return Err(crate::error::Error::Cutoff { eta });
    }
    let mut etas = vec![eta];
    for _ in 0..levels {
        let e = *etas.last().unwrap();
        etas.push(e * 0.5);
    }
    let vals: Vec<C64> = etas.iter().map(|&e| vq.integrate(numerator, e)).collect();
    let mut rep = ResidueReport::from_ladder("fibered", &etas, &etas, &vals, 3);
    rep.eta = Some(eta);
    Ok(rep)
}
