//! Nibbled-ellipse billiards.
//!
//! A nibbled ellipse is an ellipse whose boundary in each quadrant has been
//! cut into a staircase of confocal elliptic and hyperbolic arcs. Billiard
//! orbits tangent to a fixed confocal caustic fill an invariant set that
//! flattens to a generalized staircase polygon; unfolding that polygon gives a
//! translation surface whose π/4 flow carries the dynamics.
//!
//! Module map:
//! - [`conic`]: confocal geometry, table construction, physical billiard.
//! - [`quadrature`]: the singular period integrals and their derivatives.
//! - [`staircase`]: staircase polygons and their gluing relations.
//! - [`flattening`]: the caustic parameter partition and flat coordinates.
//! - [`surface`]: unfolding, singularities, crossing data, homology pairing.
//! - [`flow`]: translation flow, saddle connections, return maps, averages.
//! - [`iet`]: interval exchange transformations and recurrence diagnostics.
//! - [`criterion`]: Wronskian and bracket checks over parameter intervals.
//! - [`render`]: deterministic SVG output.
//! - [`analysis`]: the sampling pipeline used by the CLI and test suites.

pub mod analysis;
pub mod conic;
pub mod criterion;
pub mod error;
pub mod flattening;
pub mod flow;
pub mod iet;
pub mod quadrature;
pub mod render;
pub mod staircase;
pub mod surface;
pub mod symmetry;
pub mod tolerances;

pub use error::Error;
pub use num_complex::Complex64;
