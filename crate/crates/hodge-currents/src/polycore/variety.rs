//! Complete intersections V = {P_1 = … = P_m = 0} ⊂ CP^n, chart data,
//! transition factors, the partition of unity and fibered sampling.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::poly::{ChartPolynomial, HomogeneousPolynomial, NumPoly};
use super::rational::ComplexRational;
use super::roots::{homotopy_solve, newton, poly_roots, SquareSystem};
use crate::error::{arg, Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Homogeneous index of affine coordinate `j` in chart `alpha`.
pub fn homog_index(alpha: usize, j: usize) -> usize {
    if j < alpha {
        j
    } else {
        j + 1
    }
}

/// Affine index of homogeneous coordinate `i ≠ alpha`.
pub fn affine_index(alpha: usize, i: usize) -> Option<usize> {
    match i.cmp(&alpha) {
        std::cmp::Ordering::Less => Some(i),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(i - 1),
    }
}

/// The section s_α(w): z_α = 1, remaining coordinates w.
pub fn chart_lift(alpha: usize, w: &[C64]) -> Vec<C64> {
    let mut z = Vec::with_capacity(w.len() + 1);
    z.extend_from_slice(&w[..alpha]);
    z.push(ONE);
    z.extend_from_slice(&w[alpha..]);
    z
}

pub fn chart_coords(alpha: usize, z: &[C64]) -> Result<Vec<C64>> {
    let za = z[alpha];
    if za.norm() == 0.0 {
        return Err(Error::Chart { chart: alpha });
    }
    Ok(z.iter()
        .enumerate()
        .filter(|&(i, _)| i != alpha)
        .map(|(_, v)| v / za)
        .collect())
}

/// Lift to the unit sphere: ρ·s_α(w) with ρ = (1+|w|²)^{-1/2}.
pub fn sphere_lift(alpha: usize, w: &[C64]) -> (Vec<C64>, f64) {
    let rho = 1.0 / (1.0 + w.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    let z = chart_lift(alpha, w).into_iter().map(|v| v * rho).collect();
    (z, rho)
}

/// ϑ_α(z) = |z_α|²/|z|².
pub fn partition_of_unity(z: &[C64]) -> Result<Vec<f64>> {
    let tot: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    if tot == 0.0 {
        return arg("partition of unity at the zero vector");
    }
    Ok(z.iter().map(|v| v.norm_sqr() / tot).collect())
}

/// l_{αβ} = (z_β/z_α)^{Σ deg P_k} with the diagonal matrix A_{αβ}.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionFactor {
    pub alpha: usize,
    pub beta: usize,
    pub degrees: Vec<u32>,
    pub total_degree: u32,
}

impl TransitionFactor {
    pub fn diagonal(&self, z: &[C64]) -> Vec<C64> {
        let r = z[self.beta] / z[self.alpha];
        self.degrees.iter().map(|&d| r.powu(d)).collect()
    }

    pub fn det(&self, z: &[C64]) -> C64 {
        (z[self.beta] / z[self.alpha]).powu(self.total_degree)
    }

    pub fn det_exact(&self, z: &[ComplexRational]) -> Option<ComplexRational> {
        let r = &z[self.beta] * &z[self.alpha].inv()?;
        Some(r.pow(self.total_degree))
    }

    pub fn describe(&self) -> String {
        format!("(z_{}/z_{})^{}", self.beta, self.alpha, self.total_degree)
    }
}

pub fn transition_factor(alpha: usize, beta: usize, variety: &Variety) -> Result<TransitionFactor> {
    if alpha == beta || alpha > variety.n || beta > variety.n {
        return arg(format!("invalid chart pair ({alpha},{beta})"));
    }
    Ok(TransitionFactor {
        alpha,
        beta,
        degrees: variety.degrees.clone(),
        total_degree: variety.total_degree,
    })
}

#[derive(Clone, Debug)]
pub struct Variety {
    pub n: usize,
    pub m: usize,
    pub polys: Vec<HomogeneousPolynomial>,
    pub degrees: Vec<u32>,
    pub total_degree: u32,
    pub chart_cutoffs: Vec<ChartPolynomial>,
    /// True when the cutoffs were not supplied and default to the constant 1.
    pub cutoffs_defaulted: bool,
    charts: Vec<Vec<ChartPolynomial>>,
    compiled: Vec<Vec<NumPoly>>,
    cutoffs_compiled: Vec<NumPoly>,
}

impl Variety {
    pub fn new(
        polys: Vec<HomogeneousPolynomial>,
        cutoffs: Option<Vec<ChartPolynomial>>,
    ) -> Result<Self> {
        let Some(first) = polys.first() else {
            return arg("variety needs at least one polynomial");
        };
        let nv = first.num_vars();
        if nv < 2 {
            return arg("ambient space must have at least two homogeneous coordinates");
        }
        let n = nv - 1;
        let m = polys.len();
        if m > n {
            return arg(format!("codimension {m} exceeds dimension {n}"));
        }
        for p in &polys {
            if p.num_vars() != nv {
                return arg("polynomials live in different numbers of variables");
            }
            if p.degree() == 0 || p.is_zero() {
                return arg("defining polynomials must be nonzero of positive degree");
            }
        }
        let degrees: Vec<u32> = polys.iter().map(|p| p.degree()).collect();
        let total_degree = degrees.iter().sum();
        let mut charts = Vec::with_capacity(nv);
        for a in 0..nv {
            charts.push(
                polys
                    .iter()
                    .map(|p| p.dehomogenize(a))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let compiled = charts
            .iter()
            .map(|c| c.iter().map(|p| p.compile()).collect())
            .collect();
        let cutoffs_defaulted = cutoffs.is_none();
        let chart_cutoffs = match cutoffs {
            Some(c) => {
                if c.len() != nv {
                    return arg(format!("expected {nv} chart cutoffs, got {}", c.len()));
                }
                for (a, g) in c.iter().enumerate() {
                    if g.chart != a || g.num_affine != n {
                        return arg(format!("cutoff {a} has wrong chart or arity"));
                    }
                }
                c
            }
            None => (0..nv)
                .map(|a| ChartPolynomial::constant(a, n, ComplexRational::one()))
                .collect(),
        };
        let cutoffs_compiled = chart_cutoffs.iter().map(|g| g.compile()).collect();
        Ok(Self {
            n,
            m,
            polys,
            degrees,
            total_degree,
            chart_cutoffs,
            cutoffs_defaulted,
            charts,
            compiled,
            cutoffs_compiled,
        })
    }

    pub fn dim(&self) -> usize {
        self.n - self.m
    }

    pub fn chart_polys(&self, alpha: usize) -> &[ChartPolynomial] {
        &self.charts[alpha]
    }

    pub fn chart_compiled(&self, alpha: usize) -> &[NumPoly] {
        &self.compiled[alpha]
    }

    pub fn cutoff(&self, alpha: usize, w: &[C64]) -> C64 {
        self.cutoffs_compiled[alpha].eval(w)
    }

    /// Values F_k^{(α)}(w) and the m×n Jacobian.
    pub fn chart_eval(&self, alpha: usize, w: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
        let mut vals = Vec::with_capacity(self.m);
        let mut jac = DMatrix::zeros(self.m, self.n);
        for (k, p) in self.compiled[alpha].iter().enumerate() {
            let (v, g) = p.eval_grad(w);
            vals.push(v);
            for (j, gj) in g.into_iter().enumerate() {
                jac[(k, j)] = gj;
            }
        }
        (vals, jac)
    }

    /// Numerical rank of the chart Jacobian (relative singular value threshold).
    pub fn jacobian_rank(&self, alpha: usize, w: &[C64], rel_tol: f64) -> usize {
        let (_, j) = self.chart_eval(alpha, w);
        let sv = j.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > rel_tol * smax).count()
    }

    /// Basis t_c = e_{b_c} + Σ_s M_{s,c} e_s of the holomorphic tangent space of V at w
    /// (n × (n−m)), using the fiber set S with the largest |det ∂F/∂w_S|.
    pub fn tangent_basis(&self, alpha: usize, w: &[C64]) -> Option<DMatrix<C64>> {
        let (n, m) = (self.n, self.m);
        let (_, jac) = self.chart_eval(alpha, w);
        let mut best: Option<(f64, Vec<usize>)> = None;
        for mask in 0u64..(1 << n) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let s: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let d = fiber_jacobian(&jac, &s).determinant().norm();
            if best.as_ref().is_none_or(|(b, _)| d > *b) {
                best = Some((d, s));
            }
        }
        let (d, s) = best?;
        if d == 0.0 {
            return None;
        }
        let b: Vec<usize> = (0..n).filter(|j| !s.contains(j)).collect();
        let jb = DMatrix::from_fn(m, b.len(), |r, c| jac[(r, b[c])]);
        let mm = -fiber_jacobian(&jac, &s).lu().solve(&jb)?;
        let mut t = DMatrix::zeros(n, b.len());
        for (c, &bc) in b.iter().enumerate() {
            t[(bc, c)] = ONE;
            for (r, &sr) in s.iter().enumerate() {
                t[(sr, c)] = mm[(r, c)];
            }
        }
        Some(t)
    }

    /// Coordinates of the same point in chart `beta`.
    pub fn change_chart(&self, alpha: usize, beta: usize, w: &[C64]) -> Result<Vec<C64>> {
        chart_coords(beta, &chart_lift(alpha, w))
    }

    /// Jacobian ∂w^{(β)}/∂w^{(α)} (n×n) at a point of chart α.
    pub fn chart_change_jacobian(
        &self,
        alpha: usize,
        beta: usize,
        w: &[C64],
    ) -> Result<DMatrix<C64>> {
        let z = chart_lift(alpha, w);
        let zb = z[beta];
        if zb.norm() == 0.0 {
            return Err(Error::Chart { chart: beta });
        }
        let n = self.n;
        let mut jac = DMatrix::zeros(n, n);
        for jb in 0..n {
            let i = homog_index(beta, jb);
            for la in 0..n {
                let l = homog_index(alpha, la);
                // z_l = w^α_la for l ≠ α; derivative of z_i/z_β.
                let mut v = ZERO;
                if i == l {
                    v += ONE / zb;
                }
                if beta == l {
                    v -= z[i] / (zb * zb);
                }
                jac[(jb, la)] = v;
            }
        }
        Ok(jac)
    }

    /// Degree of F_k^{(α)} in the fiber unknowns.
    fn fiber_degrees(&self, alpha: usize, fiber: &[usize]) -> Vec<u32> {
        self.compiled[alpha]
            .iter()
            .map(|p| {
                p.terms
                    .iter()
                    .map(|(e, _)| fiber.iter().map(|&s| e[s]).sum::<u32>())
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    /// All solutions w_S of F^{(α)}(w_S, base) = target, as full affine points.
    pub fn fiber_solutions(
        &self,
        alpha: usize,
        fiber: &[usize],
        base: &[C64],
        target: &[C64],
    ) -> FiberSolve {
        let n = self.n;
        let base_idx: Vec<usize> = (0..n).filter(|j| !fiber.contains(j)).collect();
        let assemble = |xs: &[C64]| -> Vec<C64> {
            let mut w = vec![ZERO; n];
            for (&s, &x) in fiber.iter().zip(xs) {
                w[s] = x;
            }
            for (&b, &x) in base_idx.iter().zip(base) {
                w[b] = x;
            }
            w
        };
        if self.m == 1 {
            let s = fiber[0];
            let p = &self.compiled[alpha][0];
            let mut w = assemble(&[ZERO]);
            let deg = self.fiber_degrees(alpha, fiber)[0] as usize;
            let mut coeffs = vec![ZERO; deg + 1];
            for (e, c) in &p.terms {
                let mut t = *c;
                for (j, &k) in e.iter().enumerate() {
                    if j != s && k > 0 {
                        t *= w[j].powu(k);
                    }
                }
                coeffs[e[s] as usize] += t;
            }
            coeffs[0] -= target[0];
            let roots = poly_roots(&coeffs);
            let points = roots
                .into_iter()
                .map(|r| {
                    w[s] = r;
                    w.clone()
                })
                .collect();
            FiberSolve {
                points,
                diverged: 0,
                failed: 0,
            }
        } else {
            let sys = FiberSystem {
                variety: self,
                alpha,
                fiber,
                base_idx: &base_idx,
                base,
                target,
            };
            let degrees = self.fiber_degrees(alpha, fiber);
            let gamma = C64::from_polar(1.0, 0.917_263_5);
            let (sols, stats) = homotopy_solve(&sys, &degrees, gamma);
            FiberSolve {
                points: sols.iter().map(|x| assemble(x)).collect(),
                diverged: stats.diverged,
                failed: stats.failed,
            }
        }
    }

    /// Newton refinement of a point on {F = target} in the fiber unknowns.
    pub fn polish_fiber(
        &self,
        alpha: usize,
        fiber: &[usize],
        w: &[C64],
        target: &[C64],
    ) -> Option<Vec<C64>> {
        let n = self.n;
        let base_idx: Vec<usize> = (0..n).filter(|j| !fiber.contains(j)).collect();
        let base: Vec<C64> = base_idx.iter().map(|&b| w[b]).collect();
        let sys = FiberSystem {
            variety: self,
            alpha,
            fiber,
            base_idx: &base_idx,
            base: &base,
            target,
        };
        let x0: Vec<C64> = fiber.iter().map(|&s| w[s]).collect();
        let (x, _) = newton(&sys, &x0, 1e-15, 20)?;
        let mut out = w.to_vec();
        for (&s, v) in fiber.iter().zip(x) {
            out[s] = v;
        }
        Some(out)
    }
}

pub struct FiberSolve {
    pub points: Vec<Vec<C64>>,
    pub diverged: usize,
    pub failed: usize,
}

struct FiberSystem<'a> {
    variety: &'a Variety,
    alpha: usize,
    fiber: &'a [usize],
    base_idx: &'a [usize],
    base: &'a [C64],
    target: &'a [C64],
}

impl SquareSystem for FiberSystem<'_> {
    fn dim(&self) -> usize {
        self.fiber.len()
    }
    fn eval(&self, x: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
        let mut w = vec![ZERO; self.variety.n];
        for (&s, &v) in self.fiber.iter().zip(x) {
            w[s] = v;
        }
        for (&b, &v) in self.base_idx.iter().zip(self.base) {
            w[b] = v;
        }
        let (vals, jac) = self.variety.chart_eval(self.alpha, &w);
        let m = self.fiber.len();
        let f = vals.iter().zip(self.target).map(|(a, b)| a - b).collect();
        let mut j = DMatrix::zeros(m, m);
        for k in 0..m {
            for (c, &s) in self.fiber.iter().enumerate() {
                j[(k, c)] = jac[(k, s)];
            }
        }
        (f, j)
    }
}

/// Jacobian-rank witness that V is reduced: at sampled points of V the rank of
/// ∂F/∂w must be m. A multiple component shows up as a rank drop along V.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ReducednessReport {
    pub points: usize,
    pub min_rank: usize,
    /// rank → count.
    pub rank_histogram: Vec<(usize, usize)>,
    /// Smallest σ_m(∂F/∂w) relative to the coefficient scale, over the samples.
    pub min_relative_singular_value: f64,
    pub tolerance: f64,
    pub reduced: bool,
}

impl Variety {
    /// Samples `base_points` random base points per chart and fiber set (disc of
    /// radius 2) and every root over them, without the discriminant guard.
    pub fn reducedness_witness(
        &self,
        base_points: usize,
        seed: u64,
        tolerance: f64,
    ) -> ReducednessReport {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = self.dim();
        let fibers: Vec<Vec<usize>> = crate::residue::dbar_index_sets(self.n, self.m)
            .into_iter()
            .map(|mask| (0..self.n).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
        let coef_scale: Vec<f64> = self
            .polys
            .iter()
            .map(|p| p.terms().values().map(|c| c.to_c64().norm()).sum::<f64>())
            .collect();
        let mut hist = std::collections::BTreeMap::new();
        let mut min_sv = f64::INFINITY;
        let mut count = 0;
        for alpha in 0..=self.n {
            for fiber in &fibers {
                for _ in 0..base_points {
                    let base: Vec<C64> = (0..k)
                        .map(|_| {
                            C64::from_polar(
                                2.0 * rng.gen::<f64>().sqrt(),
                                rng.gen_range(0.0..2.0 * PI),
                            )
                        })
                        .collect();
                    let sol = self.fiber_solutions(alpha, fiber, &base, &vec![ZERO; self.m]);
                    for w in sol.points {
                        let (_, jac) = self.chart_eval(alpha, &w);
                        let grow = (1.0 + w.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
                        // row k scaled by its natural size ‖coeffs‖·(1+|w|)^{d_k−1}
                        let scaled = DMatrix::from_fn(self.m, self.n, |r, c| {
                            jac[(r, c)] / (coef_scale[r] * grow.powi(self.degrees[r] as i32 - 1))
                        });
                        let sv = scaled.singular_values();
                        let rank = sv.iter().filter(|&&x| x > tolerance).count();
                        min_sv = min_sv.min(sv.iter().cloned().fold(f64::INFINITY, f64::min));
                        *hist.entry(rank).or_insert(0usize) += 1;
                        count += 1;
                    }
                }
            }
        }
        let min_rank = hist.keys().next().copied().unwrap_or(0);
        ReducednessReport {
            points: count,
            min_rank,
            rank_histogram: hist.into_iter().collect(),
            min_relative_singular_value: if count > 0 { min_sv } else { 0.0 },
            tolerance,
            reduced: count > 0 && min_rank == self.m,
        }
    }
}

/// Quadrature rule over the base coordinates (C^k).
#[derive(Clone, Debug, PartialEq)]
pub enum BaseGrid {
    /// Whole plane per coordinate: r = tan(πs/2), Gauss–Legendre in s, midpoint angles.
    Plane { radial: usize, angular: usize },
    /// Disc |w| ≤ radius per coordinate.
    Disc {
        radius: f64,
        radial: usize,
        angular: usize,
    },
    /// Explicit nodes with weights relative to dx dy.
    Points(Vec<(Vec<C64>, f64)>),
}

impl BaseGrid {
    fn rule_1d(&self) -> Vec<(C64, f64)> {
        let (radial, angular, map): (usize, usize, Box<dyn Fn(f64) -> (f64, f64)>) = match self {
            BaseGrid::Plane { radial, angular } => (
                *radial,
                *angular,
                Box::new(|s: f64| {
                    let r = (0.5 * PI * s).tan();
                    (r, 0.5 * PI * (1.0 + r * r))
                }),
            ),
            BaseGrid::Disc {
                radius,
                radial,
                angular,
            } => {
                let rad = *radius;
                (*radial, *angular, Box::new(move |s: f64| (rad * s, rad)))
            }
            BaseGrid::Points(_) => unreachable!(),
        };
        let gl = GaussLegendre::new(NonZeroUsize::new(radial.max(1)).unwrap());
        let mut out = Vec::with_capacity(radial * angular);
        for &(x, wx) in gl.as_node_weight_pairs() {
            let s = 0.5 * (x + 1.0);
            let ws = 0.5 * wx;
            let (r, drds) = map(s);
            for j in 0..angular {
                let th = 2.0 * PI * (j as f64 + 0.5) / angular as f64;
                out.push((
                    C64::from_polar(r, th),
                    r * drds * ws * 2.0 * PI / angular as f64,
                ));
            }
        }
        out
    }

    /// Tensor-product nodes over `k` complex base coordinates.
    pub fn nodes(&self, k: usize) -> Vec<(Vec<C64>, f64)> {
        if let BaseGrid::Points(p) = self {
            return p.clone();
        }
        let rule = self.rule_1d();
        let mut out: Vec<(Vec<C64>, f64)> = vec![(vec![], 1.0)];
        for _ in 0..k {
            let mut next = Vec::with_capacity(out.len() * rule.len());
            for (p, w) in &out {
                for &(x, wx) in &rule {
                    let mut q = p.clone();
                    q.push(x);
                    next.push((q, w * wx));
                }
            }
            out = next;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct VarietySample {
    pub chart: usize,
    pub fiber: Vec<usize>,
    pub base_point: Vec<C64>,
    pub base_weight: f64,
    /// Full affine points (fiber and base coordinates) of accepted roots.
    pub fiber_roots: Vec<Vec<C64>>,
    pub jacobian_dets: Vec<C64>,
    pub excluded_roots: usize,
    pub degenerate: bool,
}

/// Degeneracy guard: |det ∂F/∂w_S| below `DISCRIMINANT_GUARD · Π‖∇F_k‖`.
pub const DISCRIMINANT_GUARD: f64 = 1e-8;

pub fn fiber_jacobian(jac: &DMatrix<C64>, fiber: &[usize]) -> DMatrix<C64> {
    let m = fiber.len();
    DMatrix::from_fn(m, m, |k, c| jac[(k, fiber[c])])
}

pub fn sample_variety(
    variety: &Variety,
    chart: usize,
    base_grid: &BaseGrid,
    fiber: &[usize],
) -> Result<Vec<VarietySample>> {
    if chart > variety.n {
        return arg(format!("chart {chart} out of range"));
    }
    if fiber.len() != variety.m || fiber.iter().any(|&s| s >= variety.n) {
        return arg("fiber coordinates must be m distinct affine indices");
    }
    let k = variety.dim();
    let zeros = vec![ZERO; variety.m];
    let mut out = Vec::new();
    for (base, bw) in base_grid.nodes(k) {
        let sol = variety.fiber_solutions(chart, fiber, &base, &zeros);
        let mut roots = Vec::new();
        let mut dets = Vec::new();
        let mut excluded = 0;
        for w in sol.points {
            let (_, jac) = variety.chart_eval(chart, &w);
            let det = fiber_jacobian(&jac, fiber).determinant();
            let scale: f64 = (0..variety.m)
                .map(|r| jac.row(r).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
                .product();
            if det.norm() < DISCRIMINANT_GUARD * scale.max(f64::MIN_POSITIVE) {
                excluded += 1;
                continue;
            }
            roots.push(w);
            dets.push(det);
        }
        out.push(VarietySample {
            chart,
            fiber: fiber.to_vec(),
            base_point: base,
            base_weight: bw,
            fiber_roots: roots,
            jacobian_dets: dets,
            excluded_roots: excluded,
            degenerate: sol.failed > 0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::poly::MultiIndex;

    pub(crate) fn fermat(n: usize, d: u32) -> Variety {
        let p = HomogeneousPolynomial::from_terms(
            n + 1,
            d,
            (0..=n).map(|i| {
                let mut e = vec![0; n + 1];
                e[i] = d;
                (MultiIndex(e), ComplexRational::one())
            }),
        )
        .unwrap();
        Variety::new(vec![p], None).unwrap()
    }

    #[test]
    fn fermat_fiber_roots_at_zero_base() {
        let v = fermat(2, 3);
        let s = sample_variety(&v, 0, &BaseGrid::Points(vec![(vec![ZERO], 1.0)]), &[0]).unwrap();
        assert_eq!(s[0].fiber_roots.len(), 3);
        for r in &s[0].fiber_roots {
            assert!((r[0].powu(3) + 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn chart_change_jacobian_matches_finite_differences() {
        let v = fermat(2, 3);
        let w = [C64::new(0.3, -0.2), C64::new(0.7, 0.4)];
        let jac = v.chart_change_jacobian(0, 2, &w).unwrap();
        let h = 1e-6;
        for l in 0..2 {
            let mut wp = w.to_vec();
            wp[l] += h;
            let mut wm = w.to_vec();
            wm[l] -= h;
            let fp = v.change_chart(0, 2, &wp).unwrap();
            let fm = v.change_chart(0, 2, &wm).unwrap();
            for j in 0..2 {
                let fd = (fp[j] - fm[j]) / (2.0 * h);
                assert!((fd - jac[(j, l)]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn plane_grid_integrates_gaussian() {
        let g = BaseGrid::Plane {
            radial: 40,
            angular: 8,
        };
        let tot: f64 = g
            .nodes(1)
            .iter()
            .map(|(p, w)| w * (-p[0].norm_sqr()).exp())
            .sum();
        assert!((tot - PI).abs() < 1e-8, "{tot}");
    }
}
