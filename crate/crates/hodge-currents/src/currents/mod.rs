//! Residual currents of homogeneity zero, dualizing sections, closedness and
//! compatibility checks, and the Coleff–Herrera pairing.

pub mod checks;
pub mod coeff;
pub mod current;

pub use checks::{
    check_closed, check_compatibility, check_transitions, pair_current, restrict_to_tangent,
    ClosednessReport, CompatibilityReport, TransitionReport,
};
pub use coeff::{
    BiPoly, ChartForm, ChartFormCoefficient, CompiledForm, GlobalForm, GlobalFunction,
};
pub use current::{
    make_antiholomorphic, make_exact_current, make_ideal_current, CurrentKind, DualizingSection,
    ResidualCurrent,
};
