//! JSON run reports. `values` is everything that must be reproducible; timing and
//! cache hits live beside it so two runs can be compared bit for bit.

use serde::Serialize;

use crate::currents::{ClosednessReport, CompatibilityReport, TransitionReport};
use crate::forms::constants::ConstantRecord;
use crate::operators::{
    ExactnessReport, HomotopyReport, ProjectorOutput, RankReport, SmoothnessReport, SolverOutput,
};
use crate::polycore::ReducednessReport;
use crate::residue::{ExclusionAccount, ResidueReport};

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub values: RunValues,
    pub cache: CacheReport,
    pub timing: Vec<Timing>,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.values.pass
    }

    /// Canonical JSON of the reproducible part.
    pub fn values_json(&self) -> String {
        serde_json::to_string(&self.values).expect("report values serialize")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunValues {
    pub scenario: String,
    pub description: String,
    pub schema: u32,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub variety: VarietySummary,
    pub constants: ConstantsReport,
    pub quadrature: QuadratureReport,
    pub operations: Vec<OperationReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarietySummary {
    pub n: usize,
    pub m: usize,
    pub degrees: Vec<u32>,
    pub total_degree: u32,
    pub q: usize,
    pub polynomials: Vec<String>,
    pub cutoffs_defaulted: bool,
    /// d ≤ n: no dualizing sections, L ≡ 0.
    pub structural_zero: bool,
    pub hefer_verified: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub projector_sigma: i64,
    pub solver_sigma: i64,
    pub projector: Vec<ConstantRecord>,
    pub solver: Option<ConstantRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub grid: String,
    pub nodes: usize,
    pub exclusions: ExclusionAccount,
    pub excluded_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureReport {
    pub grid: String,
    pub eta: f64,
    pub eta_levels: usize,
    pub delta: f64,
    pub delta_levels: usize,
    pub check_samples: usize,
    /// Quadratures actually built, in build order. Empty when nothing needed one.
    pub levels: Vec<LevelReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CacheReport {
    pub dir: String,
    /// One flag per defining polynomial.
    pub hefer_hits: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub step: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurrentValidation {
    pub label: String,
    pub q: usize,
    pub closedness: ClosednessReport,
    pub compatibility: CompatibilityReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionValidation {
    pub label: String,
    pub transitions: TransitionReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub reducedness: ReducednessReport,
    pub hefer_verified: Vec<bool>,
    pub currents: Vec<CurrentValidation>,
    pub sections: Vec<SectionValidation>,
    /// Set when V could not be sampled for the current checks.
    pub sampling_error: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolvePoint {
    pub output: SolverOutput,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum OperationResult {
    Validate(ValidationReport),
    Pair {
        current: String,
        section: String,
        report: ResidueReport,
    },
    Project {
        current: String,
        output: ProjectorOutput,
        smoothness: Option<SmoothnessReport>,
    },
    Solve {
        current: String,
        points: Vec<SolvePoint>,
        max_norm: f64,
        scale: f64,
        tolerance: f64,
        expect_zero: bool,
    },
    Homotopy(HomotopyReport),
    Exactness {
        report: ExactnessReport,
        expected: Option<bool>,
    },
    Rank {
        report: RankReport,
        expected: Option<usize>,
        required_gap: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct OperationReport {
    pub index: usize,
    pub op: String,
    pub pass: bool,
    /// Why the operation failed or was refused.
    pub error: Option<String>,
    /// Closedness gate for operations that need a closed current.
    pub closedness: Option<ClosednessReport>,
    pub result: Option<OperationResult>,
}
