//! Pairing of a piecewise straight curve with the translation structure.
//!
//! The value is the sum of the crossing data along the curve, corrected by
//! the chart positions of singular endpoints. For a genuine relative cycle it
//! equals the holonomy (sum of the legs).

use num_complex::Complex64;
use serde::Serialize;

use super::track::{walk, Crossing, SurfacePoint, WalkOptions, WalkStatus};
use super::{SurfaceError, TranslationSurface};
use crate::tolerances;

#[derive(Debug, Clone, Serialize)]
pub struct PairingResult {
    pub value: Complex64,
    pub holonomy: Complex64,
    pub crossings: Vec<Crossing>,
    /// Singular point at the start, if any.
    pub start_class: Option<usize>,
    pub end_class: Option<usize>,
}

/// Singular class of a corner at distance below the pairing tolerance.
fn corner_at(m: &TranslationSurface, p: SurfacePoint) -> Option<(usize, Complex64, bool)> {
    let poly = &m.polygons[p.polygon];
    poly.corners().into_iter().find_map(|c| {
        let v = poly.vertex(c);
        let class = m.corner_class(p.polygon, c);
        ((v - p.z).norm() < tolerances::PAIRING_CORNER).then(|| (class, v, m.singularities[class].is_singular))
    })
}

pub fn pairing(m: &TranslationSurface, start: SurfacePoint, legs: &[Complex64]) -> Result<PairingResult, SurfaceError> {
    let poly = &m.polygons[start.polygon];
    if !poly.contains(start.z, tolerances::PAIRING_CORNER) {
        return Err(SurfaceError::PointOutside { polygon: start.polygon, point: start.z });
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut start_class = None;
    if let Some((class, v, singular)) = corner_at(m, start) {
        if !singular {
            return Err(SurfaceError::CornerCrossing { polygon: start.polygon, distance: (v - start.z).norm() });
        }
        start_class = Some(class);
        value -= v;
    }
    let opts = WalkOptions { corner_tol: tolerances::PAIRING_CORNER, through_regular: false, ..WalkOptions::default() };
    let mut cur = start;
    let mut crossings = Vec::new();
    for (i, &leg) in legs.iter().enumerate() {
        let len = leg.norm();
        if len == 0.0 {
            continue;
        }
        let w = walk(m, cur, leg, len, opts)?;
        crossings.extend(w.crossings.iter().copied());
        match w.status {
            WalkStatus::Completed => cur = w.end,
            WalkStatus::Stopped { .. } | WalkStatus::CrossingLimit { .. } => return Err(SurfaceError::GeometryFailure { polygon: w.end.polygon, point: w.end.z }),
            WalkStatus::Singular { at, .. } | WalkStatus::NearCorner { at, .. } => {
                let last = i + 1 == legs.len();
                if !(last && (at - len).abs() < tolerances::PAIRING_CORNER) {
                    return Err(SurfaceError::CornerCrossing { polygon: w.end.polygon, distance: 0.0 });
                }
                cur = w.end;
            }
        }
    }
    let holonomy: Complex64 = legs.iter().sum();
    value += crossings.iter().map(|c| c.datum).sum::<Complex64>();
    let mut end_class = None;
    match corner_at(m, cur) {
        Some((class, v, true)) => {
            end_class = Some(class);
            value += v;
        }
        Some((_, v, false)) => return Err(SurfaceError::CornerCrossing { polygon: cur.polygon, distance: (v - cur.z).norm() }),
        None => {
            if start_class.is_some() || cur.polygon != start.polygon || (cur.z - start.z).norm() > tolerances::PAIRING_CORNER {
                return Err(SurfaceError::NotClosed { polygon: cur.polygon, end: cur.z });
            }
        }
    }
    if start_class.is_none() && end_class.is_some() {
        return Err(SurfaceError::NotClosed { polygon: cur.polygon, end: cur.z });
    }
    if (value - holonomy).norm() > 1e-10 * m.diameter().max(1.0) * (1 + crossings.len()) as f64 {
        return Err(SurfaceError::PairingMismatch { pairing: value, holonomy });
    }
    Ok(PairingResult { value, holonomy, crossings, start_class, end_class })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{l_shape, two_rectangles};
    use super::super::unfold;
    use super::*;
    use crate::symmetry::Gamma;

    #[test]
    fn torus_periods() {
        let m = unfold(&two_rectangles()).unwrap();
        let id = m.polygon_id(1, Gamma::Id).unwrap();
        let s = SurfacePoint { polygon: id, z: Complex64::new(0.5, 0.5) };
        let h = pairing(&m, s, &[Complex64::new(10.0, 0.0)]).unwrap();
        assert!((h.value - Complex64::new(10.0, 0.0)).norm() < 1e-12);
        let v = pairing(&m, s, &[Complex64::new(0.0, 2.0)]).unwrap();
        assert!((v.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!(matches!(pairing(&m, s, &[Complex64::new(0.0, 1.0)]), Err(SurfaceError::NotClosed { .. })));
    }

    #[test]
    fn vertical_saddle_connection() {
        // from the reflex corner (1,1) straight down into the H copy
        let m = unfold(&l_shape()).unwrap();
        let id = m.polygon_id(1, Gamma::Id).unwrap();
        let s = SurfacePoint { polygon: id, z: Complex64::new(1.0, 1.0) };
        let r = pairing(&m, s, &[Complex64::new(0.0, -2.0)]).unwrap();
        assert!((r.value - Complex64::new(0.0, -2.0)).norm() < 1e-12, "{r:?}");
        assert!(r.start_class.is_some() && r.end_class.is_some());
    }
}
