//! Exact wall-crossing computations on Calabi-Yau threefold invariant data.
//!
//! - [`lattice`]: the Chern-character lattice, the Euler pairing, slopes and
//!   the cones that support the completed algebras.
//! - [`torus`]: the quantum torus over those cones with star product,
//!   Poisson bracket, `exp`/`log`/inverse and the adjoint exponential.
//! - [`invariants`]: MacMahon factors, degree-zero `N` invariants and the
//!   DT/PT and PT/L series transforms.
//! - [`rationality`]: recurrence detection and rational reconstruction of
//!   PT slices.
//! - [`io`]: JSON and CSV formats.
//! - [`selftest`]: the randomized identity suites behind `wallcross selftest`.

pub mod error;
pub mod invariants;
pub mod io;
pub mod laurent;
pub mod lattice;
pub mod poly;
pub mod rational;
pub mod rationality;
pub mod sample;
pub mod selftest;
pub mod series;
pub mod torus;

pub use error::{Error, Result};
pub use lattice::{ChernVector, ConeKind, ConeSpec, GeometryData, Slope, TruncationWindow};
pub use laurent::{LaurentPoly, UCoefficient};
pub use rational::Rat;
pub use torus::TorusElement;
