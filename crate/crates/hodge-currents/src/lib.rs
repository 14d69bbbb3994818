//! Hodge decomposition of ∂̄-closed residual currents on projective complete
//! intersections V ⊂ CP^n.
//!
//! The crate builds the Hefer decomposition of the defining polynomials,
//! evaluates Coleff–Herrera residues by fibered quadrature over V, and
//! assembles the Hodge projector L and the solution operator I so that
//! φ = ∂̄I[φ] + L[φ] can be checked numerically.

pub mod cli;
pub mod currents;
pub mod error;
pub mod forms;
pub mod hefer;
pub mod operators;
pub mod polycore;
pub mod residue;

pub use error::{Error, Result};
