//! Sampling pipeline shared by the command line and the test suites:
//! caustic parameter → flat polygon → translation surfaces → return maps,
//! plus deterministic choices of boxes and starting points.

use num_complex::Complex64;
use serde::Serialize;

use crate::conic::NibbledEllipse;
use crate::error::Error;
use crate::flattening::{build_flat_polygon_with, interval_partition, FlatPolygon, FlattenError, ParamInterval};
use crate::flow::{first_return_iet, FlatBox, FlowError, ReturnSystem, Transversal};
use crate::iet::{EpsilonOptions, RecurrenceRecord};
use crate::quadrature::Quadrature;
use crate::surface::{unfold_components, SurfacePoint, TranslationSurface};
use crate::symmetry::Gamma;

/// Crossing budget for one first-return computation.
pub const RETURN_CROSSINGS: usize = 1_000_000;

/// Flat polygon at s and one translation surface per connected component.
#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub s: f64,
    pub interval: usize,
    pub flat: FlatPolygon,
    pub surfaces: Vec<TranslationSurface>,
}

pub fn surfaces_at(q: &Quadrature, table: &NibbledEllipse, s: f64) -> Result<SurfaceSample, Error> {
    let part = interval_partition(table);
    let (lo, hi) = (part.breakpoints[0], *part.breakpoints.last().expect("nonempty"));
    let interval = part.locate(s).ok_or(if s > lo && s < hi { FlattenError::DegenerateCaustic(s) } else { FlattenError::OutsideRange { s, lo, hi } })?;
    let flat = build_flat_polygon_with(q, table, &part.intervals[interval], s)?;
    let mut surfaces = Vec::new();
    for c in &flat.components {
        surfaces.extend(unfold_components(c)?);
    }
    Ok(SurfaceSample { s, interval, flat, surfaces })
}

/// The point u ∈ [0,1] of J, kept `rel_margin`·|J| away from both ends.
pub fn point_in(j: &ParamInterval, u: f64, rel_margin: f64) -> f64 {
    let w = j.hi - j.lo;
    j.lo + w * (rel_margin + (1.0 - 2.0 * rel_margin) * u.clamp(0.0, 1.0))
}

/// Id-oriented polygons, largest area first.
fn id_polygons(m: &TranslationSurface) -> Vec<usize> {
    let mut ids: Vec<usize> = m.polygons.iter().filter(|p| p.gamma == Gamma::Id).map(|p| p.id).collect();
    ids.sort_by(|&a, &b| m.polygons[b].area.total_cmp(&m.polygons[a].area).then(a.cmp(&b)));
    ids
}

/// First-return system on a transversal through the centroid of the largest
/// Id polygon; the next polygon is tried when a separatrix runs into a
/// corner.
pub fn return_system(m: &TranslationSurface) -> Result<ReturnSystem, FlowError> {
    let mut last = None;
    for id in id_polygons(m) {
        let tr = Transversal::through_centroid(m, id)?;
        match first_return_iet(m, &tr, RETURN_CROSSINGS) {
            Err(e @ FlowError::SeparatrixHitsCorner { .. }) => last = Some(e),
            r => return r,
        }
    }
    Err(last.unwrap_or(FlowError::BadTransversal { polygon: 0 }))
}

/// Recurrence diagnostic of one component's return map.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceSample {
    pub s: f64,
    pub interval: usize,
    pub component: usize,
    pub d: usize,
    pub record: RecurrenceRecord,
    pub homology_defect: f64,
}

/// Return maps of every component at s, normalized to unit length, with
/// min n·ε_n over n ∈ [n/2, n].
pub fn recurrence_at(q: &Quadrature, table: &NibbledEllipse, s: f64, n: usize) -> Result<Vec<RecurrenceSample>, Error> {
    let sample = surfaces_at(q, table, s)?;
    let mut out = Vec::with_capacity(sample.surfaces.len());
    for (component, m) in sample.surfaces.iter().enumerate() {
        let r = return_system(m)?;
        let iet = r.iet.normalized();
        let record = iet.recurrence_diagnostic(n, n / 2, EpsilonOptions::default());
        out.push(RecurrenceSample { s, interval: sample.interval, component, d: iet.d(), record, homology_defect: r.homology_defect() });
    }
    Ok(out)
}

/// `count` boxes spread over the polygons of the surface: box j sits in the
/// rectangle [0,x_i]×[0,y_i] of polygon j mod N, scaled into its middle.
pub fn sample_boxes(m: &TranslationSurface, count: usize) -> Result<Vec<FlatBox>, FlowError> {
    let n = m.polygons.len();
    // stride coprime to n so the boxes visit different polygons
    let stride = (1..=n).rev().find(|&k| gcd(k, n) == 1 && k <= n / 2 + 1).unwrap_or(1);
    (0..count)
        .map(|j| {
            let p = &m.polygons[(j * stride) % n];
            let i = 1 + (j / n) % p.k();
            let (w, h) = (p.x(i), p.y(i));
            let (sx, sy) = (p.gamma.sx(), p.gamma.sy());
            let (a, b) = (0.2 * w, 0.6 * w);
            let (c, d) = (0.25 * h, 0.7 * h);
            let (x0, x1) = if sx > 0.0 { (a, b) } else { (-b, -a) };
            let (y0, y1) = if sy > 0.0 { (c, d) } else { (-d, -c) };
            FlatBox::new(m, p.id, x0, x1, y0, y1)
        })
        .collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Interior point of polygon ⌊u·N⌋ at relative position (v, w) of its
/// first rectangle.
pub fn start_point(m: &TranslationSurface, u: f64, v: f64, w: f64) -> SurfacePoint {
    let n = m.polygons.len();
    let p = &m.polygons[((u.clamp(0.0, 1.0) * n as f64) as usize).min(n - 1)];
    let f = |t: f64| 0.05 + 0.9 * t.clamp(0.0, 1.0);
    let z = Complex64::new(p.gamma.sx() * f(v) * p.x(1), p.gamma.sy() * f(w) * p.y(1));
    SurfacePoint { polygon: p.id, z }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::TableSpec;

    #[test]
    fn boxes_and_starts_are_inside() {
        let t = TableSpec::symmetric(2.0, 1.0, vec![2.0, 1.5, 1.0], vec![0.0, 0.3, 0.6]).build().unwrap();
        let q = Quadrature::new(t.family);
        let sample = surfaces_at(&q, &t, 0.45).unwrap();
        for m in &sample.surfaces {
            let boxes = sample_boxes(m, 10).unwrap();
            let mut polys: Vec<usize> = boxes.iter().map(|b| b.polygon).collect();
            polys.sort_unstable();
            polys.dedup();
            assert!(polys.len() > 1);
            let p = start_point(m, 0.99, 0.5, 0.5);
            assert!(m.polygons[p.polygon].contains_strictly(p.z));
        }
    }

    #[test]
    fn margin_keeps_points_inside() {
        let j = ParamInterval { lo: 1.0, hi: 2.0 };
        assert_eq!(point_in(&j, 0.0, 0.01), 1.01);
        assert_eq!(point_in(&j, 1.0, 0.01), 1.99);
    }
}
