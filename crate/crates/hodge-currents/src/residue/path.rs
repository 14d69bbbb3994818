//! Admissible paths ε(t) → 0 with ε_j ≪ ε_{j+1}^l for every l.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum PathFamily {
    /// ε_j(t) = exp(−t^{−(m−j+1)}); ε(t) = t when m = 1.
    ExpTower,
    /// ε(t) = t^p, admissible only for m = 1.
    Power { p: f64 },
    /// ε_j(t) = t for all j. Not admissible when m ≥ 2.
    Diagonal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissiblePath {
    pub m: usize,
    pub family: PathFamily,
    pub admissible: bool,
}

pub fn admissible_path(m: usize, family: PathFamily) -> Result<AdmissiblePath> {
    admissible_path_with_override(m, family, false)
}

/// Non-admissible paths are only constructed when `allow_non_admissible` is set.
pub fn admissible_path_with_override(
    m: usize,
    family: PathFamily,
    allow_non_admissible: bool,
) -> Result<AdmissiblePath> {
    if m == 0 {
        return arg("admissible paths need m >= 1");
    }
    let admissible = match family {
        PathFamily::ExpTower => true,
        PathFamily::Power { p } => {
            if p <= 0.0 {
                return arg("power path needs a positive exponent");
            }
            m == 1
        }
        PathFamily::Diagonal => m == 1,
    };
    if !admissible && !allow_non_admissible {
        return arg(format!(
            "{family:?} is not admissible for m = {m}; pass the override to build it"
        ));
    }
    Ok(AdmissiblePath {
        m,
        family,
        admissible,
    })
}

impl AdmissiblePath {
    pub fn eps(&self, t: f64) -> Vec<f64> {
        match self.family {
            PathFamily::ExpTower if self.m == 1 => vec![t],
            PathFamily::ExpTower => (1..=self.m)
                .map(|j| (-t.powi(-((self.m - j + 1) as i32))).exp())
                .collect(),
            PathFamily::Power { p } => vec![t.powf(p); self.m],
            PathFamily::Diagonal => vec![t; self.m],
        }
    }

    /// The largest ε_k, which controls the distance to the limit.
    pub fn leading_eps(&self, t: f64) -> f64 {
        self.eps(t).into_iter().fold(0.0, f64::max)
    }

    /// log(ε_j/ε_{j+1}^l) for each j < m and l ≤ l_max along the ladder. The ratio
    /// condition holds numerically when every sequence decreases monotonically
    /// and ends below log(1e−3).
    pub fn ratio_ladder(&self, ts: &[f64], l_max: u32) -> Vec<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        for j in 0..self.m.saturating_sub(1) {
            let mut per_l = Vec::new();
            for l in 1..=l_max {
                per_l.push(
                    ts.iter()
                        .map(|&t| self.log_eps(t, j) - l as f64 * self.log_eps(t, j + 1))
                        .collect(),
                );
            }
            out.push(per_l);
        }
        out
    }

    fn log_eps(&self, t: f64, j: usize) -> f64 {
        match self.family {
            PathFamily::ExpTower if self.m == 1 => t.ln(),
            PathFamily::ExpTower => -t.powi(-((self.m - j) as i32)),
            PathFamily::Power { p } => p * t.ln(),
            PathFamily::Diagonal => t.ln(),
        }
    }

    pub fn ratio_condition_holds(&self, ts: &[f64], l_max: u32) -> bool {
        self.ratio_ladder(ts, l_max).iter().all(|per_l| {
            per_l.iter().all(|seq| {
                seq.windows(2).all(|w| w[1] < w[0])
                    && seq.last().is_some_and(|&v| v < (1e-3f64).ln())
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m1_is_identity() {
        let p = admissible_path(1, PathFamily::ExpTower).unwrap();
        assert_eq!(p.eps(0.3), vec![0.3]);
    }

    #[test]
    fn tower_satisfies_ratio_condition() {
        let p = admissible_path(2, PathFamily::ExpTower).unwrap();
        let ts = [0.5, 0.4, 0.3, 0.2, 0.1];
        assert!(p.ratio_condition_holds(&ts, 3));
    }

    #[test]
    fn diagonal_needs_override() {
        assert!(admissible_path(2, PathFamily::Diagonal).is_err());
        let p = admissible_path_with_override(2, PathFamily::Diagonal, true).unwrap();
        assert!(!p.admissible);
        assert!(!p.ratio_condition_holds(&[0.5, 0.4, 0.3, 0.2, 0.1], 2));
    }
}
