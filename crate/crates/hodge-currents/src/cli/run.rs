//! Executes scenarios: builds the variety, currents and sections, then runs the
//! listed operations against lazily built V quadratures.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Built, GridSpec, OperationSpec, PointSpec, Scenario, ToleranceSpec};
use super::report::*;
use crate::currents::{
    check_closed, check_compatibility, check_transitions, pair_current, ClosednessReport,
    DualizingSection, ResidualCurrent,
};
use crate::error::{Error, Result};
use crate::hefer::{HeferCache, HeferDecomposition};
use crate::operators::{
    exactness_test, homotopy_check, pairing_rank, projector_output, smoothness_probe, solve_dbar,
    ProjectorSetup, SolverSetup, PROJECTOR_SIGMA, SOLVER_SIGMA,
};
use crate::polycore::{BaseGrid, HomogeneousPolynomial, Variety};
use crate::residue::{VNode, VQuadrature, VQuadratureConfig};

/// Grid used for closedness, compatibility and random evaluation points.
const CHECK_GRID: BaseGrid = BaseGrid::Plane {
    radial: 3,
    angular: 5,
};
const REDUCEDNESS_POINTS: usize = 4;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tolerance_scale: f64,
    pub cache: HeferCache,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            tolerance_scale: 1.0,
            cache: HeferCache::from_env(),
        }
    }
}

fn poly_string(p: &HomogeneousPolynomial) -> String {
    let mut parts = vec![];
    for (e, c) in p.terms() {
        let mono: Vec<String> =
            e.0.iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("z{i}")
                    } else {
                        format!("z{i}^{k}")
                    }
                })
                .collect();
        let mono = if mono.is_empty() {
            "1".into()
        } else {
            mono.join("*")
        };
        parts.push(format!("({c})*{mono}"));
    }
    parts.join(" + ")
}

fn sphere(z: &[C64]) -> Vec<C64> {
    let r = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    z.iter().map(|v| v / r).collect()
}

fn point(p: &PointSpec) -> Vec<C64> {
    sphere(&p.iter().map(|c| C64::new(c[0], c[1])).collect::<Vec<_>>())
}

struct Context<'a> {
    scenario: &'a Scenario,
    built: Built,
    tol: ToleranceSpec,
    seed: u64,
    projector: ProjectorSetup,
    solver: Option<SolverSetup>,
    hefer: Vec<HeferDecomposition>,
    quadratures: BTreeMap<String, VQuadrature>,
    level_order: Vec<String>,
    checks: Option<std::result::Result<VQuadrature, String>>,
    eta: Option<f64>,
    timing: Vec<Timing>,
}

impl<'a> Context<'a> {
    fn variety(&self) -> &Variety {
        &self.built.variety
    }

    fn timed<T>(&mut self, step: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let t = Instant::now();
        let out = f(self);
        self.timing.push(Timing {
            step: step.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }

    fn quadrature(&mut self, g: &GridSpec) -> Result<&VQuadrature> {
        let key = g.describe();
        if !self.quadratures.contains_key(&key) {
            let t = Instant::now();
            let cfg = VQuadratureConfig::global(self.variety(), g.base_grid());
            let vq = VQuadrature::build(self.variety(), &cfg)?;
            self.timing.push(Timing {
                step: format!("quadrature {key}"),
                seconds: t.elapsed().as_secs_f64(),
            });
            self.quadratures.insert(key.clone(), vq);
            self.level_order.push(key.clone());
        }
        Ok(&self.quadratures[&key])
    }

    fn main_quadrature(&mut self) -> Result<&VQuadrature> {
        let g = self.scenario.quadrature.grid.clone();
        self.quadrature(&g)?;
        self.eta_for(&g);
        Ok(&self.quadratures[&g.describe()])
    }

    /// η from the scenario, else 0 for trivial cutoffs, else the largest halving of 1/2
    /// that keeps the excluded fraction of the main quadrature within bounds.
    fn eta_for(&mut self, g: &GridSpec) -> f64 {
        if let Some(e) = self.eta {
            return e;
        }
        let q = &self.scenario.quadrature;
        let e = match q.eta {
            Some(e) => e,
            None if self.variety().cutoffs_defaulted => 0.0,
            None => self.quadratures[&g.describe()].default_eta(0.5, q.max_excluded_fraction),
        };
        self.eta = Some(e);
        e
    }

    fn eta(&mut self) -> Result<f64> {
        if let Some(e) = self.eta {
            return Ok(e);
        }
        let q = &self.scenario.quadrature;
        if let Some(e) = q.eta {
            self.eta = Some(e);
            return Ok(e);
        }
        if self.variety().cutoffs_defaulted {
            self.eta = Some(0.0);
            return Ok(0.0);
        }
        self.main_quadrature()?;
        Ok(self.eta.unwrap())
    }

    fn check_nodes(&mut self) -> std::result::Result<Vec<VNode>, String> {
        if self.checks.is_none() {
            let cfg = VQuadratureConfig::global(self.variety(), CHECK_GRID);
            let r = VQuadrature::build(self.variety(), &cfg).map_err(|e| e.to_string());
            self.checks = Some(r);
        }
        match self.checks.as_ref().unwrap() {
            Ok(vq) => {
                let cap = self.scenario.quadrature.check_samples.max(1);
                let stride = vq.nodes.len().div_ceil(cap).max(1);
                Ok(vq.nodes.iter().step_by(stride).cloned().collect())
            }
            Err(e) => Err(e.clone()),
        }
    }

    fn closedness(&mut self, phi: &ResidualCurrent) -> ClosednessReport {
        let nodes = self.check_nodes().unwrap_or_default();
        check_closed(
            phi,
            self.variety(),
            &nodes,
            self.tol.closedness,
            self.scenario.quadrature.ambient_basis_degree,
            self.seed,
        )
    }

    fn random_points(&mut self, k: usize, salt: u64) -> Vec<Vec<C64>> {
        if k == 0 {
            return vec![];
        }
        let Ok(nodes) = self.check_nodes() else {
            return vec![];
        };
        if nodes.is_empty() {
            return vec![];
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        (0..k)
            .map(|_| nodes[rng.gen_range(0..nodes.len())].zeta.clone())
            .collect()
    }

    fn current(&self, label: &str) -> ResidualCurrent {
        self.built
            .current(label)
            .expect("references checked")
            .clone()
    }

    fn section(&self, label: &str) -> DualizingSection {
        self.built
            .section(label)
            .expect("references checked")
            .clone()
    }

    fn validate(&mut self) -> ValidationReport {
        let reducedness =
            self.variety()
                .reducedness_witness(REDUCEDNESS_POINTS, self.seed, self.tol.reducedness);
        let hefer_verified: Vec<bool> = self.hefer.iter().map(|h| h.verify()).collect();
        let nodes = if self.built.currents.is_empty() {
            Ok(vec![])
        } else {
            self.check_nodes()
        };
        let sampling_error = nodes.as_ref().err().cloned();
        let nodes = nodes.unwrap_or_default();
        let mut currents = vec![];
        for phi in &self.built.currents {
            currents.push(CurrentValidation {
                label: phi.label.clone(),
                q: phi.q,
                closedness: check_closed(
                    phi,
                    &self.built.variety,
                    &nodes,
                    self.tol.closedness,
                    self.scenario.quadrature.ambient_basis_degree,
                    self.seed,
                ),
                compatibility: check_compatibility(
                    phi,
                    &self.built.variety,
                    &nodes,
                    self.tol.compatibility,
                ),
            });
        }
        let sections: Vec<SectionValidation> = self
            .built
            .sections
            .iter()
            .map(|g| SectionValidation {
                label: g.label.clone(),
                transitions: check_transitions(
                    g,
                    &self.built.variety,
                    4,
                    self.seed,
                    self.tol.transition,
                ),
            })
            .collect();
        let pass = reducedness.reduced
            && hefer_verified.iter().all(|&b| b)
            && sampling_error.is_none()
            && currents
                .iter()
                .all(|c| c.closedness.closed && c.compatibility.compatible)
            && sections.iter().all(|s| s.transitions.holds);
        ValidationReport {
            reducedness,
            hefer_verified,
            currents,
            sections,
            sampling_error,
            pass,
        }
    }

    fn operation(&mut self, index: usize, op: &OperationSpec) -> OperationReport {
        let mut rep = OperationReport {
            index,
            op: op.name().into(),
            pass: false,
            error: None,
            closedness: None,
            result: None,
        };
        // closedness gate
        let gated: Vec<String> = match op {
            OperationSpec::Project { current, .. }
            | OperationSpec::Solve { current, .. }
            | OperationSpec::Homotopy { current, .. }
            | OperationSpec::Exactness { current, .. } => vec![current.clone()],
            OperationSpec::Rank { currents, .. } => currents.clone(),
            _ => vec![],
        };
        for label in &gated {
            let phi = self.current(label);
            let c = self.closedness(&phi);
            let closed = c.closed;
            let residual = c.tangential_residual;
            rep.closedness = Some(c);
            if !closed {
                rep.error = Some(format!(
                    "`{label}`: {}",
                    Error::NotClosed {
                        residual,
                        tolerance: self.tol.closedness
                    }
                ));
                return rep;
            }
        }
        match self.run_op(index, op) {
            Ok((pass, result)) => {
                rep.pass = pass;
                rep.result = Some(result);
            }
            Err(e) => rep.error = Some(e.to_string()),
        }
        rep
    }

    fn run_op(&mut self, index: usize, op: &OperationSpec) -> Result<(bool, OperationResult)> {
        let q = self.scenario.quadrature.clone();
        match op {
            OperationSpec::Validate => {
                let v = self.validate();
                Ok((v.pass, OperationResult::Validate(v)))
            }
            OperationSpec::Pair { current, section } => {
                let phi = self.current(current);
                let g = self.section(section);
                let eta = self.eta()?;
                let vq = self.main_quadrature()?;
                let report = pair_current(&phi, &g, vq, eta, q.eta_levels)?;
                Ok((
                    true,
                    OperationResult::Pair {
                        current: current.clone(),
                        section: section.clone(),
                        report,
                    },
                ))
            }
            OperationSpec::Project {
                current,
                points,
                random_points,
            } => {
                let phi = self.current(current);
                let mut pts: Vec<Vec<C64>> = points.iter().map(point).collect();
                pts.extend(self.random_points(*random_points, index as u64));
                if self.projector.is_structural_zero() {
                    let output = projector_output(
                        &self.projector,
                        self.variety(),
                        &phi,
                        None,
                        &pts,
                        0.0,
                        0,
                    )?;
                    return Ok((
                        true,
                        OperationResult::Project {
                            current: current.clone(),
                            output,
                            smoothness: None,
                        },
                    ));
                }
                let eta = self.eta()?;
                self.main_quadrature()?;
                let vq = &self.quadratures[&q.grid.describe()];
                let output = projector_output(
                    &self.projector,
                    &self.built.variety,
                    &phi,
                    Some(vq),
                    &pts,
                    eta,
                    q.eta_levels,
                )?;
                let mu: Vec<C64> = output.moments.iter().map(|r| r.extrapolated()).collect();
                let smoothness = (!pts.is_empty())
                    .then(|| smoothness_probe(&self.projector, &mu, &pts, 1e-3, self.seed));
                Ok((
                    true,
                    OperationResult::Project {
                        current: current.clone(),
                        output,
                        smoothness,
                    },
                ))
            }
            OperationSpec::Solve {
                current,
                points,
                random_points,
                expect_zero,
                scale_current,
            } => {
                let Some(solver) = self.solver.clone() else {
                    return Err(Error::Unsupported(
                        "the solution operator needs q = n − m ≥ 1".into(),
                    ));
                };
                let phi = self.current(current);
                let mut pts: Vec<Vec<C64>> = points.iter().map(point).collect();
                pts.extend(self.random_points(*random_points, index as u64));
                let eta = self.eta()?;
                self.main_quadrature()?;
                let vq = &self.quadratures[&q.grid.describe()];
                let solve = |phi: &ResidualCurrent| -> Result<Vec<SolvePoint>> {
                    pts.iter()
                        .map(|z| {
                            let output =
                                solve_dbar(&solver, phi, vq, z, q.delta, q.delta_levels, eta)?;
                            Ok(SolvePoint {
                                norm: output.norm(),
                                output,
                            })
                        })
                        .collect()
                };
                let out = solve(&phi)?;
                let max_norm = out.iter().map(|p| p.norm).fold(0.0, f64::max);
                let scale = match scale_current {
                    Some(s) => {
                        let s = self.built.current(s).expect("references checked");
                        solve(s)?.iter().map(|p| p.norm).fold(0.0, f64::max)
                    }
                    None => 1.0,
                };
                let pass = !*expect_zero || max_norm <= self.tol.solver * scale;
                Ok((
                    pass,
                    OperationResult::Solve {
                        current: current.clone(),
                        points: out,
                        max_norm,
                        scale,
                        tolerance: self.tol.solver,
                        expect_zero: *expect_zero,
                    },
                ))
            }
            OperationSpec::Homotopy {
                current,
                section,
                scale_current,
            } => {
                let phi = self.current(current);
                let g = self.section(section);
                let eta = self.eta()?;
                let grids = if q.ladder.is_empty() {
                    vec![q.grid.clone()]
                } else {
                    q.ladder.clone()
                };
                for gs in &grids {
                    self.quadrature(gs)?;
                }
                let ladder: Vec<VQuadrature> = grids
                    .iter()
                    .map(|gs| self.quadratures[&gs.describe()].clone())
                    .collect();
                let finest = ladder.last().unwrap();
                let scale_phi = match scale_current {
                    Some(s) => self.current(s),
                    None => phi.clone(),
                };
                let scale = pair_current(&scale_phi, &g, finest, eta, 0)?
                    .extrapolated()
                    .norm();
                if scale == 0.0 {
                    return Err(Error::Argument(
                        "homotopy scale is zero; set scale_current".into(),
                    ));
                }
                let report = homotopy_check(
                    &self.built.variety,
                    &self.projector,
                    self.solver.as_ref(),
                    &phi,
                    &g,
                    &ladder,
                    scale,
                    self.tol.homotopy,
                    eta,
                    q.delta,
                )?;
                Ok((report.pass, OperationResult::Homotopy(report)))
            }
            OperationSpec::Exactness {
                current,
                scale_current,
                expect_exact,
            } => {
                let phi = self.current(current);
                let structural = self.projector.is_structural_zero();
                let eta = self.eta()?;
                let vq = if structural {
                    None
                } else {
                    self.main_quadrature()?;
                    Some(&self.quadratures[&q.grid.describe()])
                };
                let scale = match (scale_current, structural) {
                    (Some(s), false) => {
                        let s = self.built.current(s).expect("references checked");
                        exactness_test(&self.built.variety, s, vq, 1.0, 1.0, eta)?.norm
                    }
                    _ => 1.0,
                };
                let report = exactness_test(
                    &self.built.variety,
                    &phi,
                    vq,
                    scale,
                    self.tol.exactness,
                    eta,
                )?;
                let pass = expect_exact.is_none_or(|e| e == report.exact);
                Ok((
                    pass,
                    OperationResult::Exactness {
                        report,
                        expected: *expect_exact,
                    },
                ))
            }
            OperationSpec::Rank {
                currents,
                sections,
                expect_rank,
            } => {
                let phis: Vec<ResidualCurrent> = currents.iter().map(|c| self.current(c)).collect();
                let secs: Vec<DualizingSection> = if sections.is_empty() {
                    DualizingSection::basis(self.variety())?
                } else {
                    sections.iter().map(|s| self.section(s)).collect()
                };
                let eta = self.eta()?;
                self.main_quadrature()?;
                let vq = &self.quadratures[&q.grid.describe()];
                let refs: Vec<&ResidualCurrent> = phis.iter().collect();
                let report = pairing_rank(
                    &self.built.variety,
                    &self.projector,
                    &refs,
                    &secs,
                    vq,
                    self.tol.rank_threshold,
                    eta,
                )?;
                let rank_ok = expect_rank.is_none_or(|r| r == report.rank);
                let gap_ok = report.rank == 0 || report.gap >= self.tol.rank_gap;
                Ok((
                    rank_ok && gap_ok,
                    OperationResult::Rank {
                        report,
                        expected: *expect_rank,
                        required_gap: self.tol.rank_gap,
                    },
                ))
            }
        }
    }
}

/// Loads Hefer decompositions through the cache.
pub fn load_hefer(
    variety: &Variety,
    cache: &HeferCache,
) -> Result<(Vec<HeferDecomposition>, Vec<bool>)> {
    let mut hs = vec![];
    let mut hits = vec![];
    for p in &variety.polys {
        let (h, hit) = cache.load_or_compute(p)?;
        hs.push(h);
        hits.push(hit);
    }
    Ok((hs, hits))
}

fn setup<'a>(scenario: &'a Scenario, opts: &RunOptions) -> Result<(Context<'a>, Vec<bool>)> {
    let t = Instant::now();
    let built = scenario.build()?;
    let build_time = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let (hefer, hits) = load_hefer(&built.variety, &opts.cache)?;
    let projector = ProjectorSetup::new(&built.variety, &hefer, PROJECTOR_SIGMA)?;
    let solver = SolverSetup::new(&built.variety, &hefer, SOLVER_SIGMA).ok();
    let ctx = Context {
        scenario,
        tol: scenario.tolerances.scaled(opts.tolerance_scale),
        seed: opts.seed.unwrap_or(scenario.seed),
        built,
        projector,
        solver,
        hefer,
        quadratures: BTreeMap::new(),
        level_order: vec![],
        checks: None,
        eta: None,
        timing: vec![
            Timing {
                step: "build".into(),
                seconds: build_time,
            },
            Timing {
                step: "hefer".into(),
                seconds: t.elapsed().as_secs_f64(),
            },
        ],
    };
    Ok((ctx, hits))
}

fn finish(
    ctx: Context<'_>,
    opts: &RunOptions,
    hits: Vec<bool>,
    operations: Vec<OperationReport>,
) -> RunReport {
    let v = &ctx.built.variety;
    let q = &ctx.scenario.quadrature;
    let eta = ctx.eta.unwrap_or(q.eta.unwrap_or(0.0));
    let levels = ctx
        .level_order
        .iter()
        .map(|k| {
            let vq = &ctx.quadratures[k];
            LevelReport {
                grid: k.clone(),
                nodes: vq.nodes.len(),
                exclusions: vq.exclusions.clone(),
                excluded_fraction: vq.excluded_fraction(eta),
            }
        })
        .collect();
    let pass = operations.iter().all(|o| o.pass);
    RunReport {
        values: RunValues {
            scenario: ctx.scenario.name.clone(),
            description: ctx.scenario.description.clone(),
            schema: ctx.scenario.schema,
            seed: ctx.seed,
            tolerance_scale: opts.tolerance_scale,
            variety: VarietySummary {
                n: v.n,
                m: v.m,
                degrees: v.degrees.clone(),
                total_degree: v.total_degree,
                q: v.n - v.m,
                polynomials: v.polys.iter().map(poly_string).collect(),
                cutoffs_defaulted: v.cutoffs_defaulted,
                structural_zero: ctx.projector.is_structural_zero(),
                hefer_verified: ctx.hefer.iter().map(|h| h.verify()).collect(),
            },
            constants: ConstantsReport {
                projector_sigma: PROJECTOR_SIGMA,
                solver_sigma: SOLVER_SIGMA,
                projector: ctx.projector.constants.clone(),
                solver: ctx.solver.as_ref().map(|s| s.constant.clone()),
            },
            quadrature: QuadratureReport {
                grid: q.grid.describe(),
                eta,
                eta_levels: q.eta_levels,
                delta: q.delta,
                delta_levels: q.delta_levels,
                check_samples: q.check_samples,
                levels,
            },
            operations,
            pass,
        },
        cache: CacheReport {
            dir: opts.cache.dir().display().to_string(),
            hefer_hits: hits,
        },
        timing: ctx.timing,
    }
}

/// Runs every operation of the scenario in order. Configuration errors are returned
/// as `Err`; failed operations are recorded in the report with `pass = false`.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    let (mut ctx, hits) = setup(scenario, opts)?;
    let mut ops = vec![];
    for (i, op) in scenario.operations.iter().enumerate() {
        let r = ctx.timed(&format!("operation {i} ({})", op.name()), |c| {
            c.operation(i, op)
        });
        ops.push(r);
    }
    Ok(finish(ctx, opts, hits, ops))
}

/// The `validate` subcommand: reducedness witness, current and section checks only.
pub fn validate_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    let (mut ctx, hits) = setup(scenario, opts)?;
    let v = ctx.timed("validate", |c| c.validate());
    let op = OperationReport {
        index: 0,
        op: "validate".into(),
        pass: v.pass,
        error: None,
        closedness: None,
        result: Some(OperationResult::Validate(v)),
    };
    Ok(finish(ctx, opts, hits, vec![op]))
}
