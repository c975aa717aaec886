//! Numerical tolerances shared across modules.
//!
//! Each constant is the single source for its threshold. Tests and the
//! acceptance suite refer to these by name.

/// A boundary hit closer than this to a table corner kills the orbit.
pub const CORNER: f64 = 1e-9;

/// Relative discriminant below which a ray is treated as tangent to a conic.
pub const TANGENCY: f64 = 1e-14;

/// Target relative accuracy of a single period integral.
pub const QUADRATURE_REL: f64 = 1e-14;

/// Evaluation is refused when the caustic parameter is this close to an
/// endpoint of the integration interval without being equal to it.
pub const ENDPOINT_GUARD: f64 = 1e-9;

/// Allowed relative disagreement between the two period expressions.
pub const PERIOD_AGREEMENT: f64 = 1e-7;

/// Default number of derivative orders supported by a quadrature context.
pub const K_MAX: usize = 4;

/// Equal-length tolerance for glued sides, in flat units.
pub const SIDE_LENGTH: f64 = 1e-10;

/// Agreement between numeric and symbolic flat profiles.
pub const PROFILE_AGREEMENT: f64 = 1e-9;

/// Margin kept between sampled caustic parameters and interval endpoints.
pub const INTERVAL_MARGIN: f64 = 1e-6;

/// Distance to a polygon corner treated as passing through it.
pub const FLAT_CORNER: f64 = 1e-12;

/// The homology pairing refuses curves this close to a polygon corner.
pub const PAIRING_CORNER: f64 = 1e-9;

/// Distance at which a traced separatrix is deemed to reach a singularity.
pub const SADDLE_HIT: f64 = 1e-9;

/// Return-map intervals shorter than this signal a corner coincidence.
pub const MIN_IET_INTERVAL: f64 = 1e-10;

/// IET connection tolerance on normalized lengths.
pub const CONNECTION: f64 = 1e-12;

/// Strict sign checks require the value to exceed this multiple of the
/// estimated error.
pub const SIGN_MARGIN: f64 = 1e3;

/// Band around zero for the weak bracket inequalities.
pub const WEAK_BAND: f64 = 1e-12;
