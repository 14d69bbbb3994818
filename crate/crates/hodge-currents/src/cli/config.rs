//! Scenario files (TOML, schema 1).
//!
//! Coefficients are exact: `re = [num, den]`, `im = [num, den]` (im defaults to 0).
//! Polynomials are lists of terms `{ exp = [..], re = [..], im = [..] }`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use crate::currents::{
    make_antiholomorphic, make_exact_current, make_ideal_current, BiPoly, ChartForm,
    ChartFormCoefficient, CurrentKind, DualizingSection, GlobalForm, GlobalFunction,
    ResidualCurrent,
};
use crate::error::{Error, Result};
use crate::polycore::{
    BaseGrid, ChartPolynomial, ComplexRational, HomogeneousPolynomial, MultiIndex, Variety,
};

pub const SCHEMA_VERSION: u32 = 1;

fn cfg<T>(path: impl Into<String>, msg: impl Into<String>) -> Result<T> {
    Err(Error::Config {
        path: path.into(),
        msg: msg.into(),
    })
}

fn zero_pair() -> [i64; 2] {
    [0, 1]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coef {
    pub re: [i64; 2],
    #[serde(default = "zero_pair")]
    pub im: [i64; 2],
}

impl Coef {
    fn exact(&self, path: &str) -> Result<ComplexRational> {
        ComplexRational::from_fractions((self.re[0], self.re[1]), (self.im[0], self.im[1]))
            .map_or_else(|| cfg(path, "zero denominator"), Ok)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exp: Vec<u32>,
    #[serde(flatten)]
    pub coef: Coef,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolySpec {
    pub terms: Vec<Term>,
}

impl PolySpec {
    pub fn homogeneous(&self, nvars: usize, path: &str) -> Result<HomogeneousPolynomial> {
        if self.terms.is_empty() {
            return cfg(format!("{path}.terms"), "polynomial has no terms");
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            let p = format!("{path}.terms[{i}]");
            if t.exp.len() != nvars {
                return cfg(
                    format!("{p}.exp"),
                    format!("expected {nvars} exponents, got {}", t.exp.len()),
                );
            }
            terms.push((MultiIndex(t.exp.clone()), t.coef.exact(&p)?));
        }
        let deg = terms[0].0.degree();
        if let Some(i) = terms.iter().position(|(e, _)| e.degree() != deg) {
            return cfg(
                format!("{path}.terms[{i}].exp"),
                format!("term degree differs from {deg}: not homogeneous"),
            );
        }
        HomogeneousPolynomial::from_terms(nvars, deg, terms).or_else(|e| cfg(path, e.to_string()))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    pub chart: usize,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietySpec {
    pub polynomials: Vec<PolySpec>,
    /// Chart cutoffs g_α as polynomials in the affine coordinates; default 1.
    #[serde(default)]
    pub cutoffs: Vec<CutoffSpec>,
}

/// A term of a polynomial in (z, z̄) or (w, w̄).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiTerm {
    pub hol: Vec<u32>,
    pub anti: Vec<u32>,
    #[serde(flatten)]
    pub coef: Coef,
}

fn bipoly(terms: &[BiTerm], nvars: usize, path: &str) -> Result<BiPoly> {
    let mut out = BiPoly::zero(nvars);
    for (i, t) in terms.iter().enumerate() {
        let p = format!("{path}.terms[{i}]");
        if t.hol.len() != nvars || t.anti.len() != nvars {
            return cfg(p, format!("expected {nvars} exponents in hol and anti"));
        }
        out.add_term(
            MultiIndex(t.hol.clone()),
            MultiIndex(t.anti.clone()),
            t.coef.exact(&p)?,
        );
    }
    Ok(out)
}

/// N(z, z̄)/|z|^{2s}.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub s: u32,
    pub terms: Vec<BiTerm>,
}

impl FunctionSpec {
    pub fn build(&self, nvars: usize, path: &str) -> Result<GlobalFunction> {
        let f = GlobalFunction::new(bipoly(&self.terms, nvars, path)?, self.s);
        f.as_form()
            .check_homogeneity_zero()
            .or_else(|e| cfg(path, e.to_string()))?;
        Ok(f)
    }
}

/// Σ_K N_K dz̄_K/|z|^{2s}.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub s: u32,
    pub components: Vec<FormComponent>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormComponent {
    /// Indices K of dz̄_K (homogeneous coordinates), or dw̄_K in chart forms.
    pub dbar: Vec<usize>,
    #[serde(default)]
    pub s: Option<u32>,
    pub terms: Vec<BiTerm>,
}

fn mask_of(idx: &[usize], bound: usize, path: &str) -> Result<u64> {
    let mut mask = 0u64;
    for &i in idx {
        if i >= bound {
            return cfg(
                format!("{path}.dbar"),
                format!("index {i} out of range 0..{bound}"),
            );
        }
        if mask & (1 << i) != 0 {
            return cfg(format!("{path}.dbar"), format!("repeated index {i}"));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

fn sign_of_sort(idx: &[usize]) -> i64 {
    let mut inv = 0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if idx[a] > idx[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

impl FormSpec {
    pub fn build(&self, nvars: usize, path: &str) -> Result<GlobalForm> {
        let Some(first) = self.components.first() else {
            return cfg(format!("{path}.components"), "form has no components");
        };
        let q = first.dbar.len();
        let mut coeffs: BTreeMap<u64, BiPoly> = BTreeMap::new();
        for (i, c) in self.components.iter().enumerate() {
            let p = format!("{path}.components[{i}]");
            if c.dbar.len() != q {
                return cfg(format!("{p}.dbar"), format!("expected {q} indices"));
            }
            let mask = mask_of(&c.dbar, nvars, &p)?;
            let num = bipoly(&c.terms, nvars, &p)?
                .scale(&ComplexRational::from_integer(sign_of_sort(&c.dbar)));
            let e = coeffs.entry(mask).or_insert_with(|| BiPoly::zero(nvars));
            *e = e.add(&num);
        }
        let f = GlobalForm {
            nvars,
            q,
            s: self.s,
            coeffs,
        };
        f.check_homogeneity_zero()
            .or_else(|e| cfg(path, e.to_string()))?;
        Ok(f)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartFormSpec {
    pub chart: usize,
    pub components: Vec<FormComponent>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinationTerm {
    pub current: String,
    #[serde(flatten)]
    pub coef: Coef,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurrentSpecKind {
    Zero,
    /// h̄·g·det[z̄, ∇P, dz̄^q]/|z|^{2s}.
    Antiholomorphic {
        #[serde(default)]
        h: Option<PolySpec>,
        #[serde(default)]
        g: Option<PolySpec>,
    },
    /// ∂̄ψ for a global (0, q−1)-form ψ.
    Exact {
        psi: FormSpec,
    },
    /// F_k·F̄_k/|z|^{2d_k} times another current.
    Ideal {
        base: String,
        polynomial: usize,
    },
    /// Per-chart (0,q)-forms in (w, w̄).
    Explicit {
        q: usize,
        charts: Vec<ChartFormSpec>,
    },
    Combination {
        terms: Vec<CombinationTerm>,
    },
}

#[derive(Clone, Debug, Deserialize)]
pub struct CurrentSpec {
    pub label: String,
    #[serde(flatten)]
    pub kind: CurrentSpecKind,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub label: String,
    pub h: PolySpec,
    #[serde(default)]
    pub factor: Option<FunctionSpec>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    Plane {
        radial: usize,
        angular: usize,
    },
    Disc {
        radius: f64,
        radial: usize,
        angular: usize,
    },
}

impl GridSpec {
    pub fn base_grid(&self) -> BaseGrid {
        match *self {
            GridSpec::Plane { radial, angular } => BaseGrid::Plane { radial, angular },
            GridSpec::Disc {
                radius,
                radial,
                angular,
            } => BaseGrid::Disc {
                radius,
                radial,
                angular,
            },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GridSpec::Plane { radial, angular } => format!("plane {radial}x{angular}"),
            GridSpec::Disc {
                radius,
                radial,
                angular,
            } => format!("disc r={radius} {radial}x{angular}"),
        }
    }
}

fn default_grid() -> GridSpec {
    GridSpec::Plane {
        radial: 16,
        angular: 24,
    }
}
fn default_delta() -> f64 {
    0.4
}
fn default_delta_levels() -> usize {
    3
}
fn default_samples() -> usize {
    48
}
fn default_basis_degree() -> u32 {
    2
}
fn default_exclusion() -> f64 {
    0.01
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    /// Refinement ladder for homotopy checks (coarse to fine); defaults to `[grid]`.
    #[serde(default)]
    pub ladder: Vec<GridSpec>,
    /// Fixed η; when absent η is the largest halving of 1 that excludes at most
    /// `max_excluded_fraction` of the sample measure.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_exclusion")]
    pub max_excluded_fraction: f64,
    #[serde(default)]
    pub eta_levels: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_delta_levels")]
    pub delta_levels: usize,
    /// V samples used by closedness and compatibility checks.
    #[serde(default = "default_samples")]
    pub check_samples: usize,
    #[serde(default = "default_basis_degree")]
    pub ambient_basis_degree: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

macro_rules! tol_default {
    ($name:ident, $v:expr) => {
        fn $name() -> f64 {
            $v
        }
    };
}
tol_default!(t_closed, 1e-8);
tol_default!(t_compat, 1e-8);
tol_default!(t_trans, 1e-10);
tol_default!(t_homotopy, 5e-2);
tol_default!(t_exact, 1e-2);
tol_default!(t_solver, 1e-2);
tol_default!(t_rank, 1e-3);
tol_default!(t_gap, 10.0);
tol_default!(t_reduced, 1e-6);

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "t_closed")]
    pub closedness: f64,
    #[serde(default = "t_compat")]
    pub compatibility: f64,
    #[serde(default = "t_trans")]
    pub transition: f64,
    #[serde(default = "t_homotopy")]
    pub homotopy: f64,
    #[serde(default = "t_exact")]
    pub exactness: f64,
    #[serde(default = "t_solver")]
    pub solver: f64,
    /// Singular values below this fraction of the largest count as zero.
    #[serde(default = "t_rank")]
    pub rank_threshold: f64,
    /// Minimum s_{r−1}/s_r at the detected rank.
    #[serde(default = "t_gap")]
    pub rank_gap: f64,
    #[serde(default = "t_reduced")]
    pub reducedness: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

impl ToleranceSpec {
    /// Multiplies every acceptance tolerance by `k` (rank gap and thresholds excepted).
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            closedness: self.closedness * k,
            compatibility: self.compatibility * k,
            transition: self.transition * k,
            homotopy: self.homotopy * k,
            exactness: self.exactness * k,
            solver: self.solver * k,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("closedness", self.closedness),
            ("compatibility", self.compatibility),
            ("transition", self.transition),
            ("homotopy", self.homotopy),
            ("exactness", self.exactness),
            ("solver", self.solver),
            ("rank_threshold", self.rank_threshold),
            ("rank_gap", self.rank_gap),
            ("reducedness", self.reducedness),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return cfg(format!("tolerances.{name}"), "tolerances must be positive");
            }
        }
        Ok(())
    }
}

/// A point of CP^n as [[re, im], …] (normalized to the unit sphere on use).
pub type PointSpec = Vec<[f64; 2]>;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperationSpec {
    Validate,
    Pair {
        current: String,
        section: String,
    },
    Project {
        current: String,
        #[serde(default)]
        points: Vec<PointSpec>,
        /// Additional points drawn from V with the scenario seed.
        #[serde(default)]
        random_points: usize,
    },
    Solve {
        current: String,
        #[serde(default)]
        points: Vec<PointSpec>,
        #[serde(default)]
        random_points: usize,
        /// Require ‖I[φ]‖ ≤ tolerances.solver · scale.
        #[serde(default)]
        expect_zero: bool,
        /// Current whose I-values on the same points set the scale.
        #[serde(default)]
        scale_current: Option<String>,
    },
    Homotopy {
        current: String,
        section: String,
        /// Current whose pairing with the section sets the scale (default: this one).
        #[serde(default)]
        scale_current: Option<String>,
    },
    Exactness {
        current: String,
        #[serde(default)]
        scale_current: Option<String>,
        /// Expected verdict; a mismatch fails the run.
        #[serde(default)]
        expect_exact: Option<bool>,
    },
    Rank {
        currents: Vec<String>,
        /// Defaults to the monomial section basis.
        #[serde(default)]
        sections: Vec<String>,
        #[serde(default)]
        expect_rank: Option<usize>,
    },
}

impl OperationSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OperationSpec::Validate => "validate",
            OperationSpec::Pair { .. } => "pair",
            OperationSpec::Project { .. } => "project",
            OperationSpec::Solve { .. } => "solve",
            OperationSpec::Homotopy { .. } => "homotopy",
            OperationSpec::Exactness { .. } => "exactness",
            OperationSpec::Rank { .. } => "rank",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    pub variety: VarietySpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub currents: Vec<CurrentSpec>,
    #[serde(default)]
    pub sections: Vec<SectionSpec>,
    #[serde(default)]
    pub operations: Vec<OperationSpec>,
}

/// Everything built from a scenario.
pub struct Built {
    pub variety: Variety,
    pub currents: Vec<ResidualCurrent>,
    pub sections: Vec<DualizingSection>,
}

impl Built {
    pub fn current(&self, label: &str) -> Option<&ResidualCurrent> {
        self.currents.iter().find(|c| c.label == label)
    }

    pub fn section(&self, label: &str) -> Option<&DualizingSection> {
        self.sections.iter().find(|s| s.label == label)
    }
}

impl Scenario {
    pub fn from_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).or_else(|e| {
            let span = e
                .span()
                .map(|r| format!("byte {}..{}", r.start, r.end))
                .unwrap_or_default();
            cfg(span, e.message().to_string())
        })?;
        if s.schema != SCHEMA_VERSION {
            return cfg(
                "schema",
                format!("unsupported schema {}, expected {SCHEMA_VERSION}", s.schema),
            );
        }
        s.tolerances.validate()?;
        let q = &s.quadrature;
        if !(q.delta > 0.0 && q.delta < std::f64::consts::FRAC_PI_2) {
            return cfg("quadrature.delta", "δ must lie in (0, π/2)");
        }
        if let Some(eta) = q.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return cfg("quadrature.eta", "η must be nonnegative");
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    pub fn build_variety(&self) -> Result<Variety> {
        let v = &self.variety;
        if v.polynomials.is_empty() {
            return cfg("variety.polynomials", "at least one polynomial is required");
        }
        let nvars = v.polynomials[0]
            .terms
            .first()
            .map(|t| t.exp.len())
            .unwrap_or(0);
        let polys = v
            .polynomials
            .iter()
            .enumerate()
            .map(|(i, p)| p.homogeneous(nvars, &format!("variety.polynomials[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let cutoffs = if v.cutoffs.is_empty() {
            None
        } else {
            let n = nvars - 1;
            let mut by_chart: Vec<Option<ChartPolynomial>> = vec![None; nvars];
            for (i, c) in v.cutoffs.iter().enumerate() {
                let p = format!("variety.cutoffs[{i}]");
                if c.chart >= nvars {
                    return cfg(
                        format!("{p}.chart"),
                        format!("chart {} does not exist", c.chart),
                    );
                }
                let mut terms = BTreeMap::new();
                for (j, t) in c.terms.iter().enumerate() {
                    if t.exp.len() != n {
                        return cfg(
                            format!("{p}.terms[{j}].exp"),
                            format!("expected {n} affine exponents"),
                        );
                    }
                    terms.insert(
                        MultiIndex(t.exp.clone()),
                        t.coef.exact(&format!("{p}.terms[{j}]"))?,
                    );
                }
                by_chart[c.chart] = Some(ChartPolynomial {
                    chart: c.chart,
                    num_affine: n,
                    terms,
                });
            }
            Some(
                by_chart
                    .into_iter()
                    .enumerate()
                    .map(|(a, g)| {
                        g.unwrap_or_else(|| ChartPolynomial::constant(a, n, ComplexRational::one()))
                    })
                    .collect(),
            )
        };
        Variety::new(polys, cutoffs).or_else(|e| cfg("variety", e.to_string()))
    }

    pub fn build(&self) -> Result<Built> {
        let variety = self.build_variety()?;
        let nvars = variety.n + 1;
        let mut currents: Vec<ResidualCurrent> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, c) in self.currents.iter().enumerate() {
            let p = format!("currents[{i}]");
            if !seen.insert(c.label.clone()) {
                return cfg(
                    format!("{p}.label"),
                    format!("duplicate label `{}`", c.label),
                );
            }
            let find = |name: &str, field: &str| -> Result<ResidualCurrent> {
                currents
                    .iter()
                    .find(|x| x.label == name)
                    .cloned()
                    .map_or_else(
                        || {
                            cfg(
                                format!("{p}.{field}"),
                                format!("unknown or later current `{name}`"),
                            )
                        },
                        Ok,
                    )
            };
            let wrap = |r: Result<ResidualCurrent>| r.or_else(|e| cfg(p.clone(), e.to_string()));
            let cur = match &c.kind {
                CurrentSpecKind::Zero => {
                    let mut z = ResidualCurrent::zero(&variety);
                    z.label = c.label.clone();
                    z
                }
                CurrentSpecKind::Antiholomorphic { h, g } => {
                    let h = h
                        .as_ref()
                        .map(|s| s.homogeneous(nvars, &format!("{p}.h")))
                        .transpose()?;
                    let g = g
                        .as_ref()
                        .map(|s| s.homogeneous(nvars, &format!("{p}.g")))
                        .transpose()?;
                    wrap(make_antiholomorphic(
                        &variety,
                        h.as_ref(),
                        g.as_ref(),
                        &c.label,
                    ))?
                }
                CurrentSpecKind::Exact { psi } => {
                    let f = psi.build(nvars, &format!("{p}.psi"))?;
                    wrap(make_exact_current(&variety, &f, &c.label))?
                }
                CurrentSpecKind::Ideal { base, polynomial } => {
                    let b = find(base, "base")?;
                    if *polynomial >= variety.m {
                        return cfg(
                            format!("{p}.polynomial"),
                            format!("index {polynomial} out of range"),
                        );
                    }
                    wrap(make_ideal_current(&variety, *polynomial, &b, &c.label))?
                }
                CurrentSpecKind::Explicit { q, charts } => {
                    let n = variety.n;
                    let mut forms: Vec<ChartForm> =
                        (0..=n).map(|_| ChartForm::zero(n, *q)).collect();
                    for (j, ch) in charts.iter().enumerate() {
                        let pc = format!("{p}.charts[{j}]");
                        if ch.chart > n {
                            return cfg(
                                format!("{pc}.chart"),
                                format!("chart {} does not exist", ch.chart),
                            );
                        }
                        for (k, comp) in ch.components.iter().enumerate() {
                            let pk = format!("{pc}.components[{k}]");
                            if comp.dbar.len() != *q {
                                return cfg(format!("{pk}.dbar"), format!("expected {q} indices"));
                            }
                            let Some(s) = comp.s else {
                                return cfg(
                                    format!("{pk}.s"),
                                    "chart components need an s exponent",
                                );
                            };
                            let mask = mask_of(&comp.dbar, n, &pk)?;
                            let num = bipoly(&comp.terms, n, &pk)?
                                .scale(&ComplexRational::from_integer(sign_of_sort(&comp.dbar)));
                            forms[ch.chart].insert(mask, ChartFormCoefficient::new(num, s));
                        }
                    }
                    wrap(ResidualCurrent::from_charts(
                        &variety,
                        forms,
                        CurrentKind::Explicit,
                        &c.label,
                    ))?
                }
                CurrentSpecKind::Combination { terms } => {
                    let mut owned = Vec::with_capacity(terms.len());
                    for (j, t) in terms.iter().enumerate() {
                        owned.push((
                            t.coef.exact(&format!("{p}.terms[{j}]"))?,
                            find(&t.current, &format!("terms[{j}].current"))?,
                        ));
                    }
                    let refs: Vec<(ComplexRational, &ResidualCurrent)> =
                        owned.iter().map(|(a, b)| (a.clone(), b)).collect();
                    wrap(ResidualCurrent::combination(&refs, &c.label))?
                }
            };
            currents.push(cur);
        }
        let mut sections = Vec::new();
        if self.sections.is_empty() {
            if variety.total_degree as i64 > variety.n as i64 {
                sections = DualizingSection::basis(&variety)?;
            }
        } else {
            let mut seen = BTreeSet::new();
            for (i, s) in self.sections.iter().enumerate() {
                let p = format!("sections[{i}]");
                if !seen.insert(s.label.clone()) {
                    return cfg(
                        format!("{p}.label"),
                        format!("duplicate label `{}`", s.label),
                    );
                }
                let h = s.h.homogeneous(nvars, &format!("{p}.h"))?;
                let mut g = DualizingSection::new(&variety, &h, &s.label)
                    .or_else(|e| cfg(format!("{p}.h"), e.to_string()))?;
                if let Some(f) = &s.factor {
                    g = g
                        .with_factor(f.build(nvars, &format!("{p}.factor"))?)
                        .or_else(|e| cfg(format!("{p}.factor"), e.to_string()))?;
                }
                sections.push(g);
            }
        }
        let built = Built {
            variety,
            currents,
            sections,
        };
        self.check_references(&built)?;
        Ok(built)
    }

    fn check_references(&self, b: &Built) -> Result<()> {
        for (i, op) in self.operations.iter().enumerate() {
            let p = format!("operations[{i}]");
            let cur = |name: &str, f: &str| -> Result<()> {
                if b.current(name).is_none() {
                    return cfg(format!("{p}.{f}"), format!("unknown current `{name}`"));
                }
                Ok(())
            };
            let sec = |name: &str, f: &str| -> Result<()> {
                if b.section(name).is_none() {
                    return cfg(format!("{p}.{f}"), format!("unknown section `{name}`"));
                }
                Ok(())
            };
            match op {
                OperationSpec::Validate => {}
                OperationSpec::Pair { current, section } => {
                    cur(current, "current")?;
                    sec(section, "section")?;
                }
                OperationSpec::Project {
                    current, points, ..
                }
                | OperationSpec::Solve {
                    current, points, ..
                } => {
                    cur(current, "current")?;
                    for (j, pt) in points.iter().enumerate() {
                        if pt.len() != b.variety.n + 1 {
                            return cfg(
                                format!("{p}.points[{j}]"),
                                format!("expected {} coordinates", b.variety.n + 1),
                            );
                        }
                        if pt.iter().all(|c| c[0] == 0.0 && c[1] == 0.0) {
                            return cfg(
                                format!("{p}.points[{j}]"),
                                "the zero vector is not a point of CP^n",
                            );
                        }
                    }
                    if let OperationSpec::Solve {
                        scale_current: Some(s),
                        ..
                    } = op
                    {
                        cur(s, "scale_current")?;
                    }
                }
                OperationSpec::Homotopy {
                    current,
                    section,
                    scale_current,
                } => {
                    cur(current, "current")?;
                    sec(section, "section")?;
                    if let Some(s) = scale_current {
                        cur(s, "scale_current")?;
                    }
                }
                OperationSpec::Exactness {
                    current,
                    scale_current,
                    ..
                } => {
                    cur(current, "current")?;
                    if let Some(s) = scale_current {
                        cur(s, "scale_current")?;
                    }
                }
                OperationSpec::Rank {
                    currents, sections, ..
                } => {
                    for (j, c) in currents.iter().enumerate() {
                        cur(c, &format!("currents[{j}]"))?;
                    }
                    for (j, s) in sections.iter().enumerate() {
                        sec(s, &format!("sections[{j}]"))?;
                    }
                }
            }
        }
        Ok(())
    }
}
