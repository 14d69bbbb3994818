//! The Hodge projector L, the solution operator I and the checks built on them.

pub mod projector;
pub mod solver;

pub use projector::{
    hodge_project, hodge_project_literal, hodge_project_pair, projector_gram, projector_moments,
    projector_output, pullback_to_chart, ProjectorOutput, ProjectorPoint, ProjectorSetup,
};
pub use solver::{
    phase_integral, solve_dbar, solve_dbar_at, solve_dbar_multi, solver_pair_dbar, SolverComponent,
    SolverOutput, SolverSetup,
};
pub mod checks;

pub use checks::{
    bm_reproduction_check, bochner_martinelli, exactness_test, homotopy_check, numerical_rank,
    pairing_rank, smoothness_probe, BmReport, ExactnessReport, HomotopyLevel, HomotopyReport,
    RankReport, SmoothnessReport,
};

/// Orientation signs fixed by the projector identity ⟨K_e, γ_f⟩ = δ_ef and by
/// I[∂̄ψ] = ψ + const on the Fermat cubic.
pub const PROJECTOR_SIGMA: i64 = -1;
pub const SOLVER_SIGMA: i64 = -1;
