//! Exact polynomial algebra, charts and sampling of the variety.

pub mod poly;
pub mod rational;
pub mod roots;
pub mod variety;

pub use poly::{ChartPolynomial, HomogeneousPolynomial, MultiIndex, NumPoly};
pub use rational::ComplexRational;
pub use variety::{
    chart_coords, chart_lift, partition_of_unity, sample_variety, sphere_lift, transition_factor,
    BaseGrid, ReducednessReport, TransitionFactor, Variety, VarietySample,
};

use num_complex::Complex64 as C64;

use crate::error::Result;

pub fn eval_poly(p: &HomogeneousPolynomial, point: &[C64]) -> Result<C64> {
    p.eval(point)
}

pub fn dehomogenize(p: &HomogeneousPolynomial, alpha: usize) -> Result<ChartPolynomial> {
    p.dehomogenize(alpha)
}
