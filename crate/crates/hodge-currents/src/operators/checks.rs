//! Homotopy identity, exactness verdicts, genus detection by rank, the
//! Bochner–Martinelli reproduction check and a smoothness probe for L[φ].

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::projector::{hodge_project, hodge_project_pair, projector_moments, ProjectorSetup};
use super::solver::{solver_pair_dbar, SolverSetup};
use crate::currents::{pair_current, DualizingSection, ResidualCurrent};
use crate::error::{arg, Result};
use crate::polycore::Variety;
use crate::residue::{ResidueReport, VQuadrature};

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyLevel {
    pub nodes: usize,
    pub pairing: ResidueReport,
    pub projector_term: ResidueReport,
    pub solver_term: ResidueReport,
    pub residual: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyReport {
    pub current: String,
    pub section: String,
    pub levels: Vec<HomotopyLevel>,
    pub scale: f64,
    pub tolerance: f64,
    /// Residuals are non-increasing along the refinement ladder (up to a noise
    /// floor of 1e-3 · tolerance · scale).
    pub monotone: bool,
    pub pass: bool,
}

/// ⟨φ,γ⟩ − ⟨I[φ],∂̄γ⟩ − ⟨L[φ],γ⟩ on a ladder of V quadratures, finest last.
#[allow(clippy::too_many_arguments)]
pub fn homotopy_check(
    variety: &Variety,
    projector: &ProjectorSetup,
    solver: Option<&SolverSetup>,
    phi: &ResidualCurrent,
    gamma: &DualizingSection,
    ladder: &[VQuadrature],
    scale: f64,
    tolerance: f64,
    eta: f64,
    delta: f64,
) -> Result<HomotopyReport> {
    if ladder.is_empty() {
        return arg("homotopy check needs at least one quadrature level");
    }
    let mut levels = Vec::with_capacity(ladder.len());
    for vq in ladder {
        let pairing = pair_current(phi, gamma, vq, eta, 0)?;
        let mu: Vec<C64> = projector_moments(projector, variety, phi, vq, eta, 0)?
            .iter()
            .map(|r| r.extrapolated())
            .collect();
        let projector_term = hodge_project_pair(projector, &mu, gamma, vq, eta, 0)?;
        let solver_term = match solver {
            Some(s) => solver_pair_dbar(s, phi, gamma, vq, delta, eta)?,
            None if gamma.factor.is_none() => ResidueReport::exact("<I, dbar γ>", C64::default()),
            None => return arg("a non-holomorphic test section needs the solution operator"),
        };
        let residual =
            (pairing.extrapolated() - solver_term.extrapolated() - projector_term.extrapolated())
                .norm();
        levels.push(HomotopyLevel {
            nodes: vq.nodes.len(),
            pairing,
            projector_term,
            solver_term,
            residual,
            relative: residual / scale.max(f64::MIN_POSITIVE),
        });
    }
    // below a thousandth of the tolerance the residual is quadrature noise
    let floor = 1e-3 * tolerance * scale;
    let monotone = levels
        .windows(2)
        .all(|w| w[1].residual <= w[0].residual * (1.0 + 1e-9) + floor);
    let pass = levels.last().unwrap().relative <= tolerance && monotone;
    Ok(HomotopyReport {
        current: phi.label.clone(),
        section: gamma.label.clone(),
        levels,
        scale,
        tolerance,
        monotone,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub current: String,
    /// No dualizing sections exist (d ≤ n): every closed current is exact.
    pub structural: bool,
    /// ⟨φ, γ_{z^e}⟩ over the monomial basis, as (re, im).
    pub pairings: Vec<(f64, f64)>,
    pub norm: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub exact: bool,
}

/// A closed current is exact iff it pairs to zero with every holomorphic section.
pub fn exactness_test(
    variety: &Variety,
    phi: &ResidualCurrent,
    vq: Option<&VQuadrature>,
    scale: f64,
    tolerance: f64,
    eta: f64,
) -> Result<ExactnessReport> {
    let excess = variety.total_degree as i64 - variety.n as i64 - 1;
    if excess < 0 || phi.is_zero() {
        return Ok(ExactnessReport {
            current: phi.label.clone(),
            structural: excess < 0,
            pairings: vec![],
            norm: 0.0,
            scale,
            tolerance,
            exact: true,
        });
    }
    let vq = vq.ok_or_else(|| {
        crate::error::Error::Argument("exactness test needs a V quadrature".into())
    })?;
    let vals: Vec<C64> = DualizingSection::basis(variety)?
        .iter()
        .map(|g| pair_current(phi, g, vq, eta, 0).map(|r| r.extrapolated()))
        .collect::<Result<_>>()?;
    let norm = vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    Ok(ExactnessReport {
        current: phi.label.clone(),
        structural: false,
        pairings: vals.iter().map(|v| (v.re, v.im)).collect(),
        norm,
        scale,
        tolerance,
        exact: norm <= tolerance * scale,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// Row-major (re, im).
    pub matrix: Vec<Vec<(f64, f64)>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// s_{rank−1}/s_rank (infinite when the rank is full).
    pub gap: f64,
    pub relative_threshold: f64,
}

/// Numerical rank: singular values above `rel` · s_0.
pub fn numerical_rank(m: &DMatrix<C64>, rel: f64) -> (Vec<f64>, usize, f64) {
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = s.first().copied().unwrap_or(0.0);
    let rank = if top == 0.0 {
        0
    } else {
        s.iter().filter(|&&v| v > rel * top).count()
    };
    let gap = match (rank, s.get(rank)) {
        (0, _) => f64::NAN,
        (_, None) => f64::INFINITY,
        (r, Some(&next)) => {
            if next == 0.0 {
                f64::INFINITY
            } else {
                s[r - 1] / next
            }
        }
    };
    (s, rank, gap)
}

/// Matrix ⟨L[φ_i], γ_j⟩ and its numerical rank. Rank = dim of the sections reached by
/// the currents; for plane curves with enough currents this is the genus.
pub fn pairing_rank(
    variety: &Variety,
    projector: &ProjectorSetup,
    currents: &[&ResidualCurrent],
    sections: &[DualizingSection],
    vq: &VQuadrature,
    rel: f64,
    eta: f64,
) -> Result<RankReport> {
    let mut m = DMatrix::<C64>::zeros(currents.len(), sections.len());
    for (i, phi) in currents.iter().enumerate() {
        if projector.is_structural_zero() {
            continue;
        }
        let mu: Vec<C64> = projector_moments(projector, variety, phi, vq, eta, 0)?
            .iter()
            .map(|r| r.extrapolated())
            .collect();
        for (j, g) in sections.iter().enumerate() {
            m[(i, j)] = hodge_project_pair(projector, &mu, g, vq, eta, 0)?.extrapolated();
        }
    }
    let (singular_values, rank, gap) = numerical_rank(&m, rel);
    Ok(RankReport {
        rows: currents.iter().map(|c| c.label.clone()).collect(),
        columns: sections.iter().map(|g| g.label.clone()).collect(),
        matrix: (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| (m[(i, j)].re, m[(i, j)].im))
                    .collect()
            })
            .collect(),
        singular_values,
        rank,
        gap,
        relative_threshold: rel,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BmReport {
    pub center: Vec<(f64, f64)>,
    pub radius: f64,
    pub points: usize,
    pub functions: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Nodes (t, weight) on the standard simplex {t ≥ 0, Σt = 1} ⊂ R^N by collapsed Gauss.
fn simplex_nodes(nv: usize, k: usize) -> Vec<(Vec<f64>, f64)> {
    let gl = GaussLegendre::new(NonZeroUsize::new(k).unwrap());
    let rule: Vec<(f64, f64)> = gl
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let mut out = vec![(vec![], 1.0, 1.0)];
    for _ in 0..nv - 1 {
        let mut next = Vec::with_capacity(out.len() * k);
        for (t, w, rem) in &out {
            for &(u, wu) in &rule {
                let mut tt = t.clone();
                tt.push(rem * u);
                next.push((tt, w * wu * rem, rem * (1.0 - u)));
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|(mut t, w, rem)| {
            t.push(rem);
            (t, w)
        })
        .collect()
}

/// Bochner–Martinelli integral over the sphere |ζ − c| = R at interior z.
pub fn bochner_martinelli(
    f: &dyn Fn(&[C64]) -> C64,
    center: &[C64],
    radius: f64,
    z: &[C64],
    simplex_k: usize,
    phases: usize,
) -> C64 {
    let nv = center.len();
    // dS = R^{2N−1} 2^{1−N} dt dθ; kernel (N−1)!/(2π^N) ⟨ζ−c, ζ−z⟩/(R |ζ−z|^{2N})
    let fact: f64 = (1..nv).map(|v| v as f64).product();
    let pre = fact / (2.0 * PI.powi(nv as i32))
        * radius.powi(2 * nv as i32 - 2)
        * 2f64.powi(1 - nv as i32);
    let dth = 2.0 * PI / phases as f64;
    let mut total = C64::default();
    let mut idx = vec![0usize; nv];
    let simplex = simplex_nodes(nv, simplex_k);
    loop {
        let ph: Vec<C64> = idx
            .iter()
            .map(|&k| C64::from_polar(1.0, dth * (k as f64 + 0.5)))
            .collect();
        for (t, w) in &simplex {
            let zeta: Vec<C64> = (0..nv)
                .map(|j| center[j] + ph[j] * radius * t[j].sqrt())
                .collect();
            let mut num = C64::default();
            let mut dist2 = 0.0;
            for j in 0..nv {
                let d = zeta[j] - z[j];
                num += (zeta[j] - center[j]) * d.conj();
                dist2 += d.norm_sqr();
            }
            total += f(&zeta) * num / dist2.powi(nv as i32) * *w;
        }
        let mut i = 0;
        loop {
            if i == nv {
                return total * pre * dth.powi(nv as i32);
            }
            idx[i] += 1;
            if idx[i] < phases {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Reproduction f(z) = ∫ f K_BM at `points` interior points.
pub fn bm_reproduction_check(
    fs: &[&dyn Fn(&[C64]) -> C64],
    center: &[C64],
    radius: f64,
    points: &[Vec<C64>],
    tolerance: f64,
) -> BmReport {
    let mut worst: f64 = 0.0;
    for f in fs {
        for z in points {
            let want = f(z);
            let got = bochner_martinelli(*f, center, radius, z, 24, 32);
            worst = worst.max((got - want).norm() / want.norm().max(f64::MIN_POSITIVE));
        }
    }
    BmReport {
        center: center.iter().map(|c| (c.re, c.im)).collect(),
        radius,
        points: points.len(),
        functions: fs.len(),
        max_relative_error: worst,
        tolerance,
        pass: worst <= tolerance,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    /// max |L(e^{iθ}z) − e^{iqθ}L(z)| / max |L|: invariance under the circle action.
    pub phase_residual: f64,
    /// max second difference / (h² max |L|) along random sphere directions.
    pub curvature: f64,
    pub step: f64,
    pub points: usize,
}

fn form_diff(a: &[(u64, C64)], b: &[(u64, C64)], s: C64) -> f64 {
    let mut acc = std::collections::BTreeMap::new();
    for (k, v) in a {
        *acc.entry(*k).or_insert(C64::default()) += v;
    }
    for (k, v) in b {
        *acc.entry(*k).or_insert(C64::default()) -= v * s;
    }
    acc.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn form_norm(a: &[(u64, C64)]) -> f64 {
    a.iter().map(|(_, v)| v.norm_sqr()).sum::<f64>().sqrt()
}

fn unit(z: &[C64]) -> Vec<C64> {
    let n = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    z.iter().map(|v| v / n).collect()
}

/// Probes L[φ] for phase invariance and bounded second differences.
pub fn smoothness_probe(
    projector: &ProjectorSetup,
    moments: &[C64],
    points: &[Vec<C64>],
    h: f64,
    seed: u64,
) -> SmoothnessReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut scale: f64 = 0.0;
    let mut phase: f64 = 0.0;
    let mut curv: f64 = 0.0;
    for z in points {
        let z = unit(z);
        let l0 = hodge_project(projector, moments, &z);
        scale = scale.max(form_norm(&l0));
        let u = C64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
        let zr: Vec<C64> = z.iter().map(|v| v * u).collect();
        // coefficients carry weight u^q, cancelled by dz̄^q
        phase = phase.max(form_diff(
            &hodge_project(projector, moments, &zr),
            &l0,
            u.powi(projector.q as i32),
        ));
        let dir: Vec<C64> = (0..z.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let shift = |t: f64| {
            unit(
                &z.iter()
                    .zip(&dir)
                    .map(|(a, b)| a + b * t)
                    .collect::<Vec<_>>(),
            )
        };
        let lp = hodge_project(projector, moments, &shift(h));
        let lm = hodge_project(projector, moments, &shift(-h));
        let mut acc = std::collections::BTreeMap::new();
        for (k, v) in lp.iter().chain(lm.iter()) {
            *acc.entry(*k).or_insert(C64::default()) += v;
        }
        for (k, v) in &l0 {
            *acc.entry(*k).or_insert(C64::default()) -= v * 2.0;
        }
        curv = curv.max(acc.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / (h * h));
    }
    let s = scale.max(f64::MIN_POSITIVE);
    SmoothnessReport {
        phase_residual: phase / s,
        curvature: curv / s,
        step: h,
        points: points.len(),
    }
}
