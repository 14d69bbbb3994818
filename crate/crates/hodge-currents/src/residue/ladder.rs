//! Ladders of approximations and their Richardson (polynomial) extrapolation.

use num_complex::Complex64 as C64;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderEntry {
    /// Ladder parameter (t, η, or δ).
    pub param: f64,
    /// Extrapolation variable attached to the parameter (ε(t), η, δ).
    pub x: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueReport {
    pub label: String,
    pub ladder: Vec<LadderEntry>,
    pub value_re: f64,
    pub value_im: f64,
    pub extrapolated_re: f64,
    pub extrapolated_im: f64,
    pub error_estimate: f64,
    pub eta: Option<f64>,
    pub note: Option<String>,
}

impl ResidueReport {
    pub fn value(&self) -> C64 {
        C64::new(self.value_re, self.value_im)
    }

    pub fn extrapolated(&self) -> C64 {
        C64::new(self.extrapolated_re, self.extrapolated_im)
    }

    /// A report for a value computed without a ladder (exact in the limit).
    pub fn exact(label: &str, v: C64) -> Self {
        Self {
            label: label.into(),
            ladder: vec![],
            value_re: v.re,
            value_im: v.im,
            extrapolated_re: v.re,
            extrapolated_im: v.im,
            error_estimate: 0.0,
            eta: None,
            note: None,
        }
    }

    /// Builds the report from ladder values, extrapolating with the last `order` points.
    pub fn from_ladder(
        label: &str,
        params: &[f64],
        xs: &[f64],
        values: &[C64],
        order: usize,
    ) -> Self {
        let ladder = params
            .iter()
            .zip(xs)
            .zip(values)
            .map(|((&p, &x), v)| LadderEntry {
                param: p,
                x,
                re: v.re,
                im: v.im,
            })
            .collect();
        let last = *values.last().expect("nonempty ladder");
        let k = order.min(values.len()).max(1);
        let ex = richardson(&xs[xs.len() - k..], &values[values.len() - k..]);
        Self {
            label: label.into(),
            ladder,
            value_re: last.re,
            value_im: last.im,
            extrapolated_re: ex.re,
            extrapolated_im: ex.im,
            error_estimate: (last - ex).norm(),
            eta: None,
            note: None,
        }
    }

    /// True when |value_t − extrapolated| decreases along the ladder.
    pub fn monotone(&self) -> bool {
        let ex = self.extrapolated();
        let d: Vec<f64> = self
            .ladder
            .iter()
            .map(|e| (C64::new(e.re, e.im) - ex).norm())
            .collect();
        d.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300)
    }
}

/// Neville extrapolation of the interpolating polynomial through (x_i, y_i) to x = 0.
pub fn richardson(xs: &[f64], ys: &[C64]) -> C64 {
    let k = xs.len();
    if k == 0 {
        return C64::default();
    }
    let mut p: Vec<C64> = ys.to_vec();
    for lvl in 1..k {
        for i in 0..k - lvl {
            let (xi, xj) = (xs[i], xs[i + lvl]);
            let den = xi - xj;
            if den == 0.0 {
                continue;
            }
            p[i] = (p[i + 1] * xi - p[i] * xj) / den;
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_quadratics() {
        let f = |x: f64| C64::new(3.0 + 2.0 * x - x * x, 1.0 - x);
        let xs = [0.4, 0.2, 0.1];
        let ys: Vec<C64> = xs.iter().map(|&x| f(x)).collect();
        let e = richardson(&xs, &ys);
        assert!((e - C64::new(3.0, 1.0)).norm() < 1e-13);
    }
}
