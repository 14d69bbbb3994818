//! Direct quadrature over tubes {F_k·χ_k = ε_k e^{iθ_k}} parametrized by the
//! phases θ and the base coordinates; the fiber coordinates are solved for.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ladder::ResidueReport;
use super::path::AdmissiblePath;
use crate::error::{Error, Result};
use crate::polycore::{BaseGrid, Variety};

/// Coefficients c_J of Σ_J c_J dw_1∧…∧dw_n∧dw̄_J, J a bitmask of affine indices.
pub type FormCoeffs = Vec<(u64, C64)>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TubeWeight {
    Unit,
    /// χ_k(w) = (scale/(1+|w|²))^{deg P_k/2}; χ ≥ 1 where 1+|w|² ≤ scale.
    Sphere {
        scale: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TubeGrid {
    pub chart: usize,
    pub fiber: Vec<usize>,
    pub base: BaseGrid,
    pub phase_nodes: usize,
    pub weight: TubeWeight,
}

#[derive(Clone, Debug)]
pub struct TubeValue {
    pub value: C64,
    pub points: usize,
    /// max ||F_k|χ_k − ε_k| / ε_k over the grid.
    pub max_tube_residual: f64,
}

struct Weights {
    chi: Vec<f64>,
    /// ∂χ_k/∂w_l and ∂χ_k/∂w̄_l.
    dchi: Vec<Vec<C64>>,
    dchi_bar: Vec<Vec<C64>>,
}

fn weights(kind: TubeWeight, degrees: &[u32], w: &[C64]) -> Weights {
    let m = degrees.len();
    let n = w.len();
    match kind {
        TubeWeight::Unit => Weights {
            chi: vec![1.0; m],
            dchi: vec![vec![C64::default(); n]; m],
            dchi_bar: vec![vec![C64::default(); n]; m],
        },
        TubeWeight::Sphere { scale } => {
            let s = 1.0 + w.iter().map(|v| v.norm_sqr()).sum::<f64>();
            let mut chi = Vec::with_capacity(m);
            let mut dchi = Vec::with_capacity(m);
            let mut dchi_bar = Vec::with_capacity(m);
            for &d in degrees {
                let h = d as f64 / 2.0;
                let c = (scale / s).powf(h);
                chi.push(c);
                dchi.push(w.iter().map(|v| -v.conj() * (h * c / s)).collect());
                dchi_bar.push(w.iter().map(|v| -v * (h * c / s)).collect());
            }
            Weights {
                chi,
                dchi,
                dchi_bar,
            }
        }
    }
}

/// Solves A v + B v̄ = r for v ∈ C^m.
fn solve_real_linear(a: &DMatrix<C64>, b: &DMatrix<C64>, r: &[C64]) -> Option<Vec<C64>> {
    let m = a.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * m, 2 * m);
    let mut rhs = DVector::<f64>::zeros(2 * m);
    for i in 0..m {
        for j in 0..m {
            let p = a[(i, j)] + b[(i, j)];
            let q = a[(i, j)] - b[(i, j)];
            big[(i, j)] = p.re;
            big[(i, m + j)] = -q.im;
            big[(m + i, j)] = p.im;
            big[(m + i, m + j)] = q.re;
        }
        rhs[i] = r[i].re;
        rhs[m + i] = r[i].im;
    }
    let x = big.lu().solve(&rhs)?;
    Some((0..m).map(|i| C64::new(x[i], x[m + i])).collect())
}

struct Local {
    /// ∂G/∂w and ∂G/∂w̄ (m×n).
    dg: DMatrix<C64>,
    dg_bar: DMatrix<C64>,
    g: Vec<C64>,
    chi: Vec<f64>,
}

fn local(variety: &Variety, chart: usize, kind: TubeWeight, w: &[C64]) -> Local {
    let (f, jac) = variety.chart_eval(chart, w);
    let wt = weights(kind, &variety.degrees, w);
    let (m, n) = (variety.m, variety.n);
    let mut dg = DMatrix::zeros(m, n);
    let mut dg_bar = DMatrix::zeros(m, n);
    for k in 0..m {
        for l in 0..n {
            dg[(k, l)] = jac[(k, l)] * wt.chi[k] + f[k] * wt.dchi[k][l];
            dg_bar[(k, l)] = f[k] * wt.dchi_bar[k][l];
        }
    }
    let g = f.iter().zip(&wt.chi).map(|(v, c)| v * *c).collect();
    Local {
        dg,
        dg_bar,
        g,
        chi: wt.chi,
    }
}

fn sub_cols(mat: &DMatrix<C64>, cols: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(mat.nrows(), cols.len(), |i, j| mat[(i, cols[j])])
}

/// Newton iteration for G(w) = target in the fiber coordinates (real-linearized).
fn polish_weighted(
    variety: &Variety,
    grid: &TubeGrid,
    w0: &[C64],
    target: &[C64],
) -> Option<Vec<C64>> {
    let mut w = w0.to_vec();
    let scale = target.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for _ in 0..30 {
        let loc = local(variety, grid.chart, grid.weight, &w);
        let r: Vec<C64> = loc.g.iter().zip(target).map(|(g, t)| t - g).collect();
        let res = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let a = sub_cols(&loc.dg, &grid.fiber);
        let b = sub_cols(&loc.dg_bar, &grid.fiber);
        let dv = solve_real_linear(&a, &b, &r)?;
        for (&s, d) in grid.fiber.iter().zip(&dv) {
            w[s] += d;
        }
        let step = dv.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if res <= 1e-14 * scale.max(1e-300)
            || step <= 1e-15 * (1.0 + w.iter().map(|v| v.norm()).fold(0.0, f64::max))
        {
            break;
        }
    }
    Some(w)
}

fn subsets(n: usize, k: usize) -> Vec<u64> {
    let mut out = vec![];
    for mask in 0u64..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push(mask);
        }
    }
    out
}

/// One tube integral at fixed ε.
pub fn tube_value(
    variety: &Variety,
    grid: &TubeGrid,
    numerator: &(dyn Fn(&[C64]) -> FormCoeffs + Sync),
    eps: &[f64],
) -> Result<TubeValue> {
    let (n, m) = (variety.n, variety.m);
    if eps.len() != m || grid.fiber.len() != m {
        return Err(Error::Argument("ε and fiber must have length m".into()));
    }
    let k = n - m;
    let base_idx: Vec<usize> = (0..n).filter(|j| !grid.fiber.contains(j)).collect();
    let np = grid.phase_nodes.max(1);
    let mut phases: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..m {
        phases = phases
            .into_iter()
            .flat_map(|p| {
                (0..np).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .collect();
    }
    let dtheta = 2.0 * PI / np as f64;
    let phase_w = dtheta.powi(m as i32);
    let nodes = grid.base.nodes(k);
    let per_node: Vec<Result<(C64, usize, f64)>> = nodes
        .par_iter()
        .map(|(base, bw)| {
            let mut acc = C64::default();
            let mut count = 0;
            let mut worst: f64 = 0.0;
            for ph in &phases {
                let target: Vec<C64> = ph
                    .iter()
                    .zip(eps)
                    .map(|(&j, &e)| C64::from_polar(e, dtheta * j as f64))
                    .collect();
                let sol = variety.fiber_solutions(grid.chart, &grid.fiber, base, &target);
                if sol.failed > 0 {
                    return Err(Error::Tube("fiber solver failed on the tube".into()));
                }
                for w0 in sol.points {
                    let w = match grid.weight {
                        TubeWeight::Unit => w0,
                        _ => polish_weighted(variety, grid, &w0, &target)
                            .ok_or_else(|| Error::Tube("weighted tube solve failed".into()))?,
                    };
                    let loc = local(variety, grid.chart, grid.weight, &w);
                    for kk in 0..m {
                        let r = ((loc.g[kk].norm() - eps[kk]) / eps[kk]).abs();
                        if eps[kk] > 1e-12 {
                            worst = worst.max(r);
                        }
                    }
                    // Tangent vectors ∂w/∂u for u = (θ_1..θ_m, x_1, y_1, …).
                    let a = sub_cols(&loc.dg, &grid.fiber);
                    let b = sub_cols(&loc.dg_bar, &grid.fiber);
                    let nparams = m + 2 * k;
                    let mut tang = DMatrix::<C64>::zeros(n, nparams);
                    for p in 0..nparams {
                        let mut dwb = vec![C64::default(); k];
                        let mut rhs = vec![C64::default(); m];
                        if p < m {
                            rhs[p] = C64::i() * target[p];
                        } else {
                            let bi = (p - m) / 2;
                            dwb[bi] = if (p - m) % 2 == 0 {
                                C64::new(1.0, 0.0)
                            } else {
                                C64::i()
                            };
                        }
                        for kk in 0..m {
                            for (bj, &l) in base_idx.iter().enumerate() {
                                rhs[kk] -= loc.dg[(kk, l)] * dwb[bj]
                                    + loc.dg_bar[(kk, l)] * dwb[bj].conj();
                            }
                        }
                        let dws = solve_real_linear(&a, &b, &rhs)
                            .ok_or_else(|| Error::Tube("singular tube tangent system".into()))?;
                        for (si, &s) in grid.fiber.iter().enumerate() {
                            tang[(s, p)] = dws[si];
                        }
                        for (bj, &l) in base_idx.iter().enumerate() {
                            tang[(l, p)] = dwb[bj];
                        }
                    }
                    let fprod: C64 = target.iter().zip(&loc.chi).map(|(t, c)| t / *c).product();
                    for (jmask, c) in numerator(&w) {
                        if c == C64::default() {
                            continue;
                        }
                        let mut rows = DMatrix::<C64>::zeros(nparams, nparams);
                        for l in 0..n {
                            for p in 0..nparams {
                                rows[(l, p)] = tang[(l, p)];
                            }
                        }
                        let mut r = n;
                        let mut rest = jmask;
                        while rest != 0 {
                            let j = rest.trailing_zeros() as usize;
                            rest &= rest - 1;
                            if r >= nparams {
                                return Err(Error::Argument(
                                    "numerator has the wrong antiholomorphic degree".into(),
                                ));
                            }
                            for p in 0..nparams {
                                rows[(r, p)] = tang[(j, p)].conj();
                            }
                            r += 1;
                        }
                        if r != nparams {
                            return Err(Error::Argument(
                                "numerator has the wrong antiholomorphic degree".into(),
                            ));
                        }
                        acc += c * rows.determinant() / fprod * (bw * phase_w);
                    }
                    count += 1;
                }
            }
            Ok((acc, count, worst))
        })
        .collect();
    let mut value = C64::default();
    let mut points = 0;
    let mut worst: f64 = 0.0;
    for r in per_node {
        let (v, c, wr) = r?;
        value += v;
        points += c;
        worst = worst.max(wr);
    }
    Ok(TubeValue {
        value,
        points,
        max_tube_residual: worst,
    })
}

/// Tube integrals along the t-ladder, Richardson-extrapolated in the leading ε.
pub fn tube_integrate(
    variety: &Variety,
    grid: &TubeGrid,
    numerator: &(dyn Fn(&[C64]) -> FormCoeffs + Sync),
    path: &AdmissiblePath,
    ts: &[f64],
) -> Result<ResidueReport> {
    let mut xs = Vec::with_capacity(ts.len());
    let mut vals = Vec::with_capacity(ts.len());
    for &t in ts {
        let eps = path.eps(t);
        let v = tube_value(variety, grid, numerator, &eps)?;
        xs.push(path.leading_eps(t));
        vals.push(v.value);
    }
    Ok(ResidueReport::from_ladder("tube", ts, &xs, &vals, 3))
}

/// Antiholomorphic index sets of size `k` among `n` affine coordinates.
pub fn dbar_index_sets(n: usize, k: usize) -> Vec<u64> {
    subsets(n, k)
}
