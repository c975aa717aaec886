//! Straight-line motion on the surface.

use num_complex::Complex64;
use serde::Serialize;

use super::{SideRef, SurfaceError, SurfacePolygon, TranslationSurface};
use crate::staircase::{CornerKind, SideKind};

/// A point in the chart of one polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub polygon: usize,
    pub z: Complex64,
}

/// Straight piece inside a single polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub polygon: usize,
    pub start: Complex64,
    pub end: Complex64,
}

/// A side crossing; `datum` is ζ_src(x) − ζ_dst(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub from: SideRef,
    pub to: SideRef,
    /// Crossing point in the chart of the source polygon.
    pub point: Complex64,
    pub datum: Complex64,
    /// Arc length from the start of the walk.
    pub at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WalkStatus {
    Completed,
    /// Stopped on a singular point (class id) after `at`.
    Singular { class: usize, at: f64 },
    /// Passed within the corner tolerance of a corner that is not followed.
    NearCorner { polygon: usize, corner: CornerKind, at: f64 },
    /// The stop predicate fired after `at`.
    Stopped { at: f64 },
    /// More side crossings than allowed.
    CrossingLimit { at: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Walk {
    pub segments: Vec<Segment>,
    pub crossings: Vec<Crossing>,
    pub end: SurfacePoint,
    pub status: WalkStatus,
    pub length: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct WalkOptions {
    /// Distance at which an exit point counts as a corner.
    pub corner_tol: f64,
    /// Continue straight through regular corners instead of stopping.
    pub through_regular: bool,
    pub max_crossings: usize,
    /// Keep the segment list (off for long averaging runs).
    pub record: bool,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions { corner_tol: crate::tolerances::FLAT_CORNER, through_regular: true, max_crossings: 10_000_000, record: true }
    }
}

enum Exit {
    Side { side: SideKind, t: f64, point: Complex64 },
    Corner { corner: CornerKind, t: f64 },
}

fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// First boundary point hit by the ray p + t·d, t > 0.
fn exit(poly: &SurfacePolygon, p: Complex64, d: Complex64, corner_tol: f64) -> Option<Exit> {
    let n = poly.vertices.len();
    let scale = poly.diameter().max(1.0);
    let t_min = 1e-12 * scale;
    let mut best: Option<(usize, f64, Complex64)> = None;
    for j in 0..n {
        if dot(poly.normals[j], d) <= 0.0 {
            continue;
        }
        let a = poly.vertices[j];
        let b = poly.vertices[(j + 1) % n];
        let (t, along, lo, hi) = if a.re == b.re {
            let t = (a.re - p.re) / d.re;
            (t, p.im + t * d.im, a.im.min(b.im), a.im.max(b.im))
        } else {
            let t = (a.im - p.im) / d.im;
            (t, p.re + t * d.re, a.re.min(b.re), a.re.max(b.re))
        };
        if !t.is_finite() || t <= t_min || along < lo - corner_tol || along > hi + corner_tol {
            continue;
        }
        if best.is_none_or(|(_, bt, _)| t < bt) {
            best = Some((j, t, p + t * d));
        }
    }
    let (j, t, point) = best?;
    let a = poly.vertices[j];
    let b = poly.vertices[(j + 1) % n];
    let (da, db) = ((point - a).norm(), (point - b).norm());
    let kinds = poly.corners();
    if da < corner_tol || db < corner_tol {
        let c = if da <= db { kinds[j] } else { kinds[(j + 1) % n] };
        return Some(Exit::Corner { corner: c, t });
    }
    Some(Exit::Side { side: poly.sides()[j], t, point })
}

/// Moves from `start` along the unit direction `dir` for arc length `length`.
pub fn walk(m: &TranslationSurface, start: SurfacePoint, dir: Complex64, length: f64, opts: WalkOptions) -> Result<Walk, SurfaceError> {
    walk_until(m, start, dir, length, opts, |_| None)
}

/// As [`walk`], but `stop` sees every straight piece before it is committed
/// and may cut the walk short at an arc-length offset within the piece.
pub fn walk_until<F>(m: &TranslationSurface, start: SurfacePoint, dir: Complex64, length: f64, opts: WalkOptions, mut stop: F) -> Result<Walk, SurfaceError>
where
    F: FnMut(&Segment) -> Option<f64>,
{
    let d = dir / dir.norm();
    let mut cur = start;
    let mut travelled = 0.0;
    let mut segments = Vec::new();
    let mut crossings = Vec::new();
    let mut n_cross = 0usize;
    let done = |segments: Vec<Segment>, crossings: Vec<Crossing>, end: SurfacePoint, status: WalkStatus, length: f64| Ok(Walk { segments, crossings, end, status, length });
    loop {
        if n_cross > opts.max_crossings {
            return done(segments, crossings, cur, WalkStatus::CrossingLimit { at: travelled }, travelled);
        }
        let remaining = length - travelled;
        let poly = &m.polygons[cur.polygon];
        let ex = exit(poly, cur.z, d, opts.corner_tol).ok_or(SurfaceError::GeometryFailure { polygon: cur.polygon, point: cur.z })?;
        let t = match ex {
            Exit::Side { t, .. } | Exit::Corner { t, .. } => t,
        };
        let piece_len = t.min(remaining);
        let piece = Segment { polygon: cur.polygon, start: cur.z, end: cur.z + piece_len * d };
        if let Some(cut) = stop(&piece) {
            let cut = cut.clamp(0.0, piece_len);
            let end = SurfacePoint { polygon: cur.polygon, z: cur.z + cut * d };
            if opts.record {
                segments.push(Segment { end: end.z, ..piece });
            }
            return done(segments, crossings, end, WalkStatus::Stopped { at: travelled + cut }, travelled + cut);
        }
        if t >= remaining {
            if opts.record {
                segments.push(piece);
            }
            return done(segments, crossings, SurfacePoint { polygon: cur.polygon, z: piece.end }, WalkStatus::Completed, length);
        }
        match ex {
            Exit::Side { side, t, point } => {
                if opts.record {
                    segments.push(Segment { polygon: cur.polygon, start: cur.z, end: point });
                }
                let from = SideRef { polygon: cur.polygon, side };
                let (to, shift) = m.partner(from);
                travelled += t;
                crossings.push(Crossing { from, to, point, datum: -shift, at: travelled });
                n_cross += 1;
                cur = SurfacePoint { polygon: to.polygon, z: point + shift };
            }
            Exit::Corner { corner, t } => {
                let vertex = poly.vertex(corner);
                if opts.record {
                    segments.push(Segment { polygon: cur.polygon, start: cur.z, end: vertex });
                }
                travelled += t;
                let class = m.corner_class(cur.polygon, corner);
                let here = SurfacePoint { polygon: cur.polygon, z: vertex };
                if m.singularities[class].is_singular {
                    return done(segments, crossings, here, WalkStatus::Singular { class, at: travelled }, travelled);
                }
                if !opts.through_regular {
                    return done(segments, crossings, here, WalkStatus::NearCorner { polygon: cur.polygon, corner, at: travelled }, travelled);
                }
                let (next, mut steps) = through_corner(m, cur.polygon, corner, d, travelled)?;
                n_cross += steps.len();
                crossings.append(&mut steps);
                cur = next;
            }
        }
    }
}

/// Crosses a regular corner diagonally, once in each order of the two sides,
/// and checks that both orders land on the same point.
fn through_corner(m: &TranslationSurface, polygon: usize, corner: CornerKind, d: Complex64, at: f64) -> Result<(SurfacePoint, Vec<Crossing>), SurfaceError> {
    let p = &m.polygons[polygon];
    let n = p.vertices.len();
    let j = corner.index(p.k());
    let incident = [(j + n - 1) % n, j];
    let mut results = Vec::with_capacity(2);
    for first in 0..2 {
        let mut here = polygon;
        let mut z = p.vertices[j];
        let mut side_idx = incident[first];
        let mut crossings = Vec::new();
        for _ in 0..2 {
            let q = &m.polygons[here];
            if dot(q.normals[side_idx], d) <= 0.0 {
                return Err(SurfaceError::GeometryFailure { polygon: here, point: z });
            }
            let from = SideRef { polygon: here, side: q.sides()[side_idx] };
            let (to, shift) = m.partner(from);
            crossings.push(Crossing { from, to, point: z, datum: -shift, at });
            z += shift;
            here = to.polygon;
            // the other side of the new polygon meeting at z
            let r = &m.polygons[here];
            let nr = r.vertices.len();
            let entry = to.side.index(r.k());
            let tol = 1e-9 * r.diameter().max(1.0);
            side_idx = if (r.vertices[entry] - z).norm() < tol {
                (entry + nr - 1) % nr
            } else {
                (entry + 1) % nr
            };
        }
        results.push((here, z, crossings));
    }
    let (a, b) = (&results[0], &results[1]);
    let tol = 1e-9 * m.diameter().max(1.0);
    if a.0 != b.0 || (a.1 - b.1).norm() > tol {
        return Err(SurfaceError::GeometryFailure { polygon, point: p.vertices[j] });
    }
    let (here, z, crossings) = results.swap_remove(0);
    let probe = z + 1e-7 * d;
    if !m.polygons[here].contains_strictly(probe) {
        return Err(SurfaceError::GeometryFailure { polygon: here, point: z });
    }
    Ok((SurfacePoint { polygon: here, z }, crossings))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{l_shape, two_rectangles};
    use super::super::unfold;
    use super::*;
    use crate::symmetry::Gamma;

    #[test]
    fn torus_closes_after_period() {
        // rectangle cylinder of width 2·(2+3) and height 2: slope one returns
        let m = unfold(&two_rectangles()).unwrap();
        let id = m.polygon_id(1, Gamma::Id).unwrap();
        let start = SurfacePoint { polygon: id, z: Complex64::new(0.3, 0.1) };
        let d = Complex64::new(1.0, 1.0);
        let w = walk(&m, start, d, 10.0 * 2f64.sqrt(), WalkOptions::default()).unwrap();
        assert_eq!(w.status, WalkStatus::Completed);
        assert_eq!(w.end.polygon, id);
        assert!((w.end.z - start.z).norm() < 1e-12);
        let total: Complex64 = w.crossings.iter().map(|c| c.datum).sum();
        assert!((total - Complex64::new(10.0, 10.0)).norm() < 1e-12, "{total}");
    }

    #[test]
    fn hits_singularity() {
        let m = unfold(&l_shape()).unwrap();
        let id = m.polygon_id(1, Gamma::Id).unwrap();
        // diagonal from (0.5, 0.5) reaches the reflex corner (1,1)
        let w = walk(&m, SurfacePoint { polygon: id, z: Complex64::new(0.5, 0.5) }, Complex64::new(1.0, 1.0), 10.0, WalkOptions::default()).unwrap();
        match w.status {
            WalkStatus::Singular { at, .. } => assert!((at - 0.5 * 2f64.sqrt()).abs() < 1e-12),
            s => panic!("{s:?}"),
        }
    }
}
