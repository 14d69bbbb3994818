//! Fiber root solving: companion-matrix eigenvalues for one unknown, total-degree
//! homotopy continuation for several.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Roots of Σ c_k x^k. Leading coefficients below `1e-14·max|c|` are dropped,
/// which removes roots that escaped to infinity in the current chart.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let roots: Vec<C64> = if deg == 1 {
        vec![-coeffs[0] / lead]
    } else {
        let mut m = DMatrix::<C64>::zeros(deg, deg);
        for i in 1..deg {
            m[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..deg {
            m[(i, deg - 1)] = -coeffs[i] / lead;
        }
        match m.clone().schur().eigenvalues() {
            Some(ev) => ev.iter().copied().collect(),
            None => return Vec::new(),
        }
    };
    roots
        .into_iter()
        .map(|r| polish_univariate(&coeffs[..=deg], r))
        .collect()
}

fn horner(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn polish_univariate(coeffs: &[C64], mut x: C64) -> C64 {
    for _ in 0..8 {
        let (p, dp) = horner(coeffs, x);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.norm() <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Value vector and Jacobian of a square system.
pub trait SquareSystem {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[C64]) -> (Vec<C64>, DMatrix<C64>);
}

pub fn solve_linear(a: &DMatrix<C64>, b: &[C64]) -> Option<Vec<C64>> {
    let rhs = DVector::from_column_slice(b);
    let lu = a.clone().lu();
    lu.solve(&rhs).map(|v| v.iter().copied().collect())
}

/// Newton iteration; returns the converged point and the final residual norm.
pub fn newton<S: SquareSystem>(
    sys: &S,
    x0: &[C64],
    tol: f64,
    max_iter: usize,
) -> Option<(Vec<C64>, f64)> {
    let mut x = x0.to_vec();
    let mut res = f64::INFINITY;
    for _ in 0..max_iter {
        let (f, j) = sys.eval(&x);
        res = f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if res <= tol {
            return Some((x, res));
        }
        let dx = solve_linear(&j, &f)?;
        let mut step = 0.0f64;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= di;
            step = step.max(di.norm());
        }
        if !x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return None;
        }
        if step <= 1e-15 * (1.0 + x.iter().map(|v| v.norm()).fold(0.0, f64::max)) {
            let (f, _) = sys.eval(&x);
            res = f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            break;
        }
    }
    if res.is_finite() {
        Some((x, res))
    } else {
        None
    }
}

struct Homotopy<'a, S: SquareSystem> {
    target: &'a S,
    degrees: &'a [u32],
    gamma: C64,
    t: f64,
}

impl<S: SquareSystem> Homotopy<'_, S> {
    fn start(&self, x: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let g: Vec<C64> = x
            .iter()
            .zip(self.degrees)
            .map(|(v, &d)| v.powu(d) - C64::new(1.0, 0.0))
            .collect();
        let dg: Vec<C64> = x
            .iter()
            .zip(self.degrees)
            .map(|(v, &d)| v.powu(d - 1) * d as f64)
            .collect();
        (g, dg)
    }

    /// dH/dt at fixed x.
    fn dt(&self, x: &[C64]) -> Vec<C64> {
        let (f, _) = self.target.eval(x);
        let (g, _) = self.start(x);
        f.iter()
            .zip(&g)
            .map(|(fi, gi)| fi - self.gamma * gi)
            .collect()
    }
}

impl<S: SquareSystem> SquareSystem for Homotopy<'_, S> {
    fn dim(&self) -> usize {
        self.target.dim()
    }
    fn eval(&self, x: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
        let (f, jf) = self.target.eval(x);
        let (g, dg) = self.start(x);
        let t = self.t;
        let h: Vec<C64> = f
            .iter()
            .zip(&g)
            .map(|(fi, gi)| fi * t + self.gamma * gi * (1.0 - t))
            .collect();
        let mut j = jf * C64::new(t, 0.0);
        for (i, d) in dg.iter().enumerate() {
            j[(i, i)] += self.gamma * d * (1.0 - t);
        }
        (h, j)
    }
}

#[derive(Clone, Debug, Default)]
pub struct HomotopyStats {
    pub paths: usize,
    pub diverged: usize,
    pub failed: usize,
}

/// Tracks the Π d_k start solutions of x_k^{d_k} = 1 to the target system.
/// `degrees` are the degrees of the target equations in the unknowns.
pub fn homotopy_solve<S: SquareSystem>(
    sys: &S,
    degrees: &[u32],
    gamma: C64,
) -> (Vec<Vec<C64>>, HomotopyStats) {
    let m = sys.dim();
    let mut stats = HomotopyStats::default();
    let mut starts: Vec<Vec<C64>> = vec![vec![]];
    for &d in degrees {
        let mut next = Vec::new();
        for s in &starts {
            for k in 0..d {
                let mut v = s.clone();
                v.push(C64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * k as f64 / d as f64,
                ));
                next.push(v);
            }
        }
        starts = next;
    }
    let mut sols: Vec<Vec<C64>> = Vec::new();
    for s in starts {
        stats.paths += 1;
        match track_path(sys, degrees, gamma, &s, m) {
            PathEnd::Finite(x) => {
                let dup = sols.iter().any(|y| {
                    y.iter()
                        .zip(&x)
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max)
                        < 1e-8 * (1.0 + x.iter().map(|v| v.norm()).fold(0.0, f64::max))
                });
                if !dup {
                    sols.push(x);
                }
            }
            PathEnd::Diverged => stats.diverged += 1,
            PathEnd::Failed => stats.failed += 1,
        }
    }
    (sols, stats)
}

enum PathEnd {
    Finite(Vec<C64>),
    Diverged,
    Failed,
}

fn track_path<S: SquareSystem>(
    sys: &S,
    degrees: &[u32],
    gamma: C64,
    start: &[C64],
    m: usize,
) -> PathEnd {
    let mut x = start.to_vec();
    let mut t = 0.0f64;
    let mut dt = 0.02f64;
    let mut h = Homotopy {
        target: sys,
        degrees,
        gamma,
        t,
    };
    let mut steps = 0;
    while t < 1.0 {
        steps += 1;
        if steps > 20000 || dt < 1e-12 {
            return PathEnd::Failed;
        }
        let step = dt.min(1.0 - t);
        // Euler predictor: dx/dt = -J^{-1} ∂H/∂t
        h.t = t;
        let (_, j) = h.eval(&x);
        let ht = h.dt(&x);
        let Some(v) = solve_linear(&j, &ht) else {
            dt *= 0.5;
            continue;
        };
        let pred: Vec<C64> = x.iter().zip(&v).map(|(xi, vi)| xi - vi * step).collect();
        h.t = t + step;
        let scale = 1.0 + pred.iter().map(|v| v.norm()).fold(0.0, f64::max);
        match newton(&h, &pred, 1e-11 * scale, 6) {
            Some((xn, res)) if res <= 1e-9 * scale => {
                let jump = xn
                    .iter()
                    .zip(&pred)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if jump > 0.1 * scale {
                    dt *= 0.5;
                    continue;
                }
                x = xn;
                t += step;
                dt = (dt * 1.5).min(0.1);
                if x.iter().any(|v| v.norm() > 1e8) {
                    return PathEnd::Diverged;
                }
            }
            _ => dt *= 0.5,
        }
    }
    let _ = m;
    match newton(sys, &x, 1e-14, 10) {
        Some((xf, _)) if xf.iter().all(|v| v.norm() < 1e7) => PathEnd::Finite(xf),
        Some(_) => PathEnd::Diverged,
        None => PathEnd::Failed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_roots_of_minus_one() {
        let c = [C64::new(1.0, 0.0), ZERO, ZERO, C64::new(1.0, 0.0)];
        let r = poly_roots(&c);
        assert_eq!(r.len(), 3);
        for x in r {
            assert!((x.powu(3) + 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn dropped_leading_coefficient() {
        let c = [C64::new(2.0, 0.0), C64::new(1.0, 0.0), ZERO];
        let r = poly_roots(&c);
        assert_eq!(r.len(), 1);
        assert!((r[0] + 2.0).norm() < 1e-15);
    }

    struct Circles;
    impl SquareSystem for Circles {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, x: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
            let one = C64::new(1.0, 0.0);
            let f = vec![x[0] * x[0] + x[1] * x[1] - 4.0 * one, x[0] * x[1] - one];
            let j = DMatrix::from_row_slice(2, 2, &[x[0] * 2.0, x[1] * 2.0, x[1], x[0]]);
            (f, j)
        }
    }

    #[test]
    fn homotopy_finds_all_four_solutions() {
        let (sols, stats) = homotopy_solve(&Circles, &[2, 2], C64::new(0.6, 0.8));
        assert_eq!(sols.len(), 4, "{stats:?}");
        for s in sols {
            let (f, _) = Circles.eval(&s);
            assert!(f.iter().all(|v| v.norm() < 1e-12));
        }
    }
}
