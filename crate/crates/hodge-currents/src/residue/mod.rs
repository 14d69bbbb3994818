//! Coleff–Herrera residues: admissible paths, tube quadrature, fibered residues
//! over V and extrapolation ladders.

pub mod fibered;
pub mod ladder;
pub mod path;
pub mod tube;

pub use fibered::{
    fibered_residue, ExclusionAccount, ProjectionMode, VNode, VQuadrature, VQuadratureConfig,
};
pub use ladder::{richardson, LadderEntry, ResidueReport};
pub use path::{admissible_path, admissible_path_with_override, AdmissiblePath, PathFamily};
pub use tube::{
    dbar_index_sets, tube_integrate, tube_value, FormCoeffs, TubeGrid, TubeValue, TubeWeight,
};

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::polycore::Variety;

/// Weighted and unweighted tube limits with their difference.
#[derive(Clone, Debug, serde::Serialize)]
pub struct WeightedTubeReport {
    pub weighted: ResidueReport,
    pub unweighted: ResidueReport,
    pub difference: f64,
    pub relative_difference: f64,
}

pub fn weighted_tube_equivalence(
    variety: &Variety,
    grid: &TubeGrid,
    numerator: &(dyn Fn(&[C64]) -> FormCoeffs + Sync),
    path: &AdmissiblePath,
    ts: &[f64],
) -> Result<WeightedTubeReport> {
    let weighted = tube_integrate(variety, grid, numerator, path, ts)?;
    let mut plain = grid.clone();
    plain.weight = TubeWeight::Unit;
    let unweighted = tube_integrate(variety, &plain, numerator, path, ts)?;
    let difference = (weighted.extrapolated() - unweighted.extrapolated()).norm();
    let relative_difference = difference / unweighted.extrapolated().norm().max(f64::MIN_POSITIVE);
    Ok(WeightedTubeReport {
        weighted,
        unweighted,
        difference,
        relative_difference,
    })
}
