//! Exact symbolic-numeric calculus on sub-Riemannian Lie groups.
//!
//! Groups are given by rational structure constants, a polarization and a
//! scalar product on it. Nilpotent groups are realized in exponential
//! coordinates, where sub-Laplacians become second-order operators with
//! polynomial coefficients. On top of that the crate decides when a
//! polynomial map intertwines two sub-Laplacians (up to a conformal factor
//! and a drift), when two horizontal frames give the same sum of squares,
//! and classifies Heisenberg sub-Laplacians by their symplectic spectrum.

pub mod algebra;
pub mod conformal;
pub mod error;
pub mod heisenberg;
pub mod io;
pub mod linalg;
pub mod nilpotent;
pub mod operators;
pub mod poly;

pub use algebra::{LieAlgebra, Metric, Polarization, Strata, SubRiemannianGroup};
pub use error::{Error, Result};
pub use linalg::{Matrix, Rational};
pub use nilpotent::{ExpCoordinates, PolyVectorField};
pub use poly::{PolyMap, PolyMatrix, Polynomial};
