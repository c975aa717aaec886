//! The translation surface obtained by unfolding a generalized polygon.
//!
//! Each part m contributes four copies P_m(γ(x̄,ȳ)), γ ∈ Γ, laid out in their
//! own chart with the corner (0,0) at the origin. Sides are identified by
//! translations; the shift of a gluing is stored so that a point z on side A
//! is the point z + shift on side B.

mod corners;
mod dbe;
mod pairing;
mod track;

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::staircase::{build_basic, CornerKind, GeneralizedPolygon, PolygonError, RelationKind, Relations, SideKind};
use crate::symmetry::Gamma;
use crate::tolerances;

pub use corners::{cycle_test, SingularPoint};
pub use dbe::{brute_force_dbe, enumerate_dbe, CornerEntry, DEntry, Dbe};
pub use pairing::{pairing, PairingResult};
pub use track::{walk, walk_until, Crossing, Segment, SurfacePoint, Walk, WalkOptions, WalkStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("side {side:?} of polygon {polygon} has no partner of equal length")]
    UngluedSide { polygon: usize, side: SideKind },
    #[error("corner walk around class {class} does not close (angle {angle})")]
    InconsistentAngle { class: usize, angle: f64 },
    #[error("Gauss-Bonnet gives 2g-2={gauss_bonnet} but the Euler characteristic is {euler}")]
    EulerMismatch { gauss_bonnet: f64, euler: i64 },
    #[error("unfolded surface has {0} components")]
    Disconnected(usize),
    #[error("relation-cycle test says {corner} of part {label} is {} but its cone angle is {angle}", if *.cycle_regular { "regular" } else { "singular" })]
    CycleTestDisagreement { label: usize, corner: CornerKind, cycle_regular: bool, angle: f64 },
    #[error("curve passes within {distance:e} of a corner of polygon {polygon}")]
    CornerCrossing { polygon: usize, distance: f64 },
    #[error("curve does not close: ends in polygon {polygon} at {end}")]
    NotClosed { polygon: usize, end: Complex64 },
    #[error("crossing sum {pairing} differs from holonomy {holonomy}")]
    PairingMismatch { pairing: Complex64, holonomy: Complex64 },
    #[error("point {point} is not in polygon {polygon}")]
    PointOutside { polygon: usize, point: Complex64 },
    #[error("ray from {point} leaves polygon {polygon} without an exit")]
    GeometryFailure { polygon: usize, point: Complex64 },
    #[error(transparent)]
    Polygon(#[from] PolygonError),
}

impl SurfaceError {
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            SurfaceError::InconsistentAngle { .. }
                | SurfaceError::EulerMismatch { .. }
                | SurfaceError::CycleTestDisagreement { .. }
                | SurfaceError::PairingMismatch { .. }
                | SurfaceError::GeometryFailure { .. }
        )
    }
}

/// One copy P_m(γ(x̄,ȳ)) in its own chart.
#[derive(Debug, Clone)]
pub struct SurfacePolygon {
    pub id: usize,
    pub label: usize,
    pub gamma: Gamma,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub vertices: Vec<Complex64>,
    /// Outward unit normal of side j (from vertex j to vertex j+1).
    pub normals: Vec<Complex64>,
    pub area: f64,
}

impl SurfacePolygon {
    pub fn k(&self) -> usize {
        self.xs.len()
    }

    pub fn vertex(&self, c: CornerKind) -> Complex64 {
        self.vertices[c.index(self.k())]
    }

    pub fn side_ends(&self, s: SideKind) -> (Complex64, Complex64) {
        let j = s.index(self.k());
        (self.vertices[j], self.vertices[(j + 1) % self.vertices.len()])
    }

    pub fn sides(&self) -> Vec<SideKind> {
        SideKind::sequence(self.k())
    }

    pub fn corners(&self) -> Vec<CornerKind> {
        CornerKind::sequence(self.k())
    }

    /// x_i with x_0 = 0.
    pub fn x(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.xs[i - 1]
        }
    }

    /// y_i with y_{k+1} = 0.
    pub fn y(&self, i: usize) -> f64 {
        if i > self.k() {
            0.0
        } else {
            self.ys[i - 1]
        }
    }

    /// Open-polygon membership.
    pub fn contains_strictly(&self, z: Complex64) -> bool {
        let (u, v) = (self.gamma.sx() * z.re, self.gamma.sy() * z.im);
        u > 0.0 && v > 0.0 && (1..=self.k()).any(|i| u < self.x(i) && v < self.y(i))
    }

    /// Closed membership with slack.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        let (u, v) = (self.gamma.sx() * z.re, self.gamma.sy() * z.im);
        u >= -tol && v >= -tol && (1..=self.k()).any(|i| u <= self.x(i) + tol && v <= self.y(i) + tol)
    }

    pub fn centroid(&self) -> Complex64 {
        let mut c = Complex64::new(0.0, 0.0);
        for i in 1..=self.k() {
            let h = self.y(i) - self.y(i + 1);
            let a = self.x(i) * h;
            c += a * Complex64::new(0.5 * self.x(i), 0.5 * (self.y(i) + self.y(i + 1)));
        }
        let c = c / self.area;
        Complex64::new(self.gamma.sx() * c.re, self.gamma.sy() * c.im)
    }

    /// Largest coordinate extent, used to scale tolerances.
    pub fn diameter(&self) -> f64 {
        self.x(self.k()).hypot(self.y(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SideRef {
    pub polygon: usize,
    pub side: SideKind,
}

/// An identification of side `a` with side `b`: z on a is z + shift on b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gluing {
    pub a: SideRef,
    pub b: SideRef,
    pub shift: Complex64,
}

/// M(P): the four reflected copies of every part with their identifications.
#[derive(Debug, Clone)]
pub struct TranslationSurface {
    pub polygons: Vec<SurfacePolygon>,
    /// Each identification once, with `a` < `b`.
    pub gluings: Vec<Gluing>,
    pub singularities: Vec<SingularPoint>,
    pub genus: usize,
    pub labels: Vec<usize>,
    pub relations: Relations,
    partner: HashMap<SideRef, (SideRef, Complex64)>,
    corner_class: HashMap<(usize, CornerKind), usize>,
    ids: HashMap<(usize, Gamma), usize>,
}

/// Partner side of a copy (m, γ).
fn partner_of(rel: &Relations, label: usize, gamma: Gamma, side: SideKind) -> (usize, Gamma, SideKind) {
    match side {
        SideKind::LongV => (rel.partner(RelationKind::V, label), gamma.compose(Gamma::V), side),
        SideKind::LongH => (rel.partner(RelationKind::H, label), gamma.compose(Gamma::H), side),
        SideKind::ShortV => (rel.partner(RelationKind::ShortV, label), gamma.compose(Gamma::V), side),
        SideKind::ShortH => (rel.partner(RelationKind::ShortH, label), gamma.compose(Gamma::H), side),
        SideKind::StepV(_) => (label, gamma.compose(Gamma::V), side),
        SideKind::StepH(_) => (label, gamma.compose(Gamma::H), side),
    }
}

/// M(P) when it is connected.
pub fn unfold(p: &GeneralizedPolygon) -> Result<TranslationSurface, SurfaceError> {
    let mut parts = unfold_components(p)?;
    if parts.len() != 1 {
        return Err(SurfaceError::Disconnected(parts.len()));
    }
    Ok(parts.remove(0))
}

/// M(P) split into connected translation surfaces. Several components occur
/// when the reflected copies fall into separate gluing orbits, e.g. the two
/// rotation senses around an elliptic caustic.
pub fn unfold_components(p: &GeneralizedPolygon) -> Result<Vec<TranslationSurface>, SurfaceError> {
    let labels = p.labels();
    let index: BTreeMap<usize, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut polygons = Vec::with_capacity(4 * labels.len());
    for &m in &labels {
        let part = p.part(m);
        for g in Gamma::ALL {
            let b = build_basic(part.profile.clone(), g, m)?;
            let vertices: Vec<Complex64> = b.vertices.iter().map(|v| Complex64::new(v[0], v[1])).collect();
            // the untransformed chain runs clockwise; each reflection reverses it
            let orient = if g.flips_x() ^ g.flips_y() { -1.0 } else { 1.0 };
            let n = vertices.len();
            let normals = (0..n)
                .map(|j| {
                    let e = vertices[(j + 1) % n] - vertices[j];
                    let e = e / e.norm();
                    orient * Complex64::new(-e.im, e.re)
                })
                .collect();
            polygons.push(SurfacePolygon {
                id: polygons.len(),
                label: m,
                gamma: g,
                xs: part.profile.xs.clone(),
                ys: part.profile.ys.clone(),
                vertices,
                normals,
                area: b.area,
            });
        }
    }
    let id = |m: usize, g: Gamma| index[&m] * 4 + g.index();
    let mut partner = HashMap::new();
    for poly in &polygons {
        for side in poly.sides() {
            let (m2, g2, s2) = partner_of(&p.relations, poly.label, poly.gamma, side);
            let other = &polygons[id(m2, g2)];
            let (a0, a1) = poly.side_ends(side);
            let (b0, b1) = other.side_ends(s2);
            let la = (a1 - a0).norm();
            let lb = (b1 - b0).norm();
            if (la - lb).abs() > tolerances::SIDE_LENGTH || partner_of(&p.relations, m2, g2, s2) != (poly.label, poly.gamma, side) {
                return Err(SurfaceError::UngluedSide { polygon: poly.id, side });
            }
            let shift = 0.5 * (b0 + b1) - 0.5 * (a0 + a1);
            partner.insert(SideRef { polygon: poly.id, side }, (SideRef { polygon: other.id, side: s2 }, shift));
        }
    }
    polygon_components(&polygons, &partner)
        .into_iter()
        .map(|members| {
            // re-index the member copies in (label, γ) order
            let new_id: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &old)| (old, i)).collect();
            let polys: Vec<SurfacePolygon> = members.iter().enumerate().map(|(i, &old)| SurfacePolygon { id: i, ..polygons[old].clone() }).collect();
            let mut part_map = HashMap::new();
            let mut gluings = Vec::new();
            for (&a, &(b, shift)) in &partner {
                let Some(&na) = new_id.get(&a.polygon) else { continue };
                let a = SideRef { polygon: na, side: a.side };
                let b = SideRef { polygon: new_id[&b.polygon], side: b.side };
                part_map.insert(a, (b, shift));
                if a < b {
                    gluings.push(Gluing { a, b, shift });
                }
            }
            gluings.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
            let mut comp_labels: Vec<usize> = polys.iter().map(|q| q.label).collect();
            comp_labels.dedup();
            let ids = polys.iter().map(|q| ((q.label, q.gamma), q.id)).collect();
            let mut surface = TranslationSurface {
                polygons: polys,
                gluings,
                singularities: Vec::new(),
                genus: 0,
                labels: comp_labels,
                relations: p.relations.clone(),
                partner: part_map,
                corner_class: HashMap::new(),
                ids,
            };
            let (classes, lookup) = corners::classify(&surface)?;
            surface.singularities = classes;
            surface.corner_class = lookup;
            surface.genus = surface.compute_genus()?;
            corners::check_cycle_tests(&surface)?;
            Ok(surface)
        })
        .collect()
}

/// Connected classes of copies under the side identifications, each sorted.
fn polygon_components(polygons: &[SurfacePolygon], partner: &HashMap<SideRef, (SideRef, Complex64)>) -> Vec<Vec<usize>> {
    let n = polygons.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for side in polygons[i].sides() {
                let (b, _) = partner[&SideRef { polygon: i, side }];
                if !seen[b.polygon] {
                    seen[b.polygon] = true;
                    comp.push(b.polygon);
                    stack.push(b.polygon);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

impl TranslationSurface {
    pub fn polygon_id(&self, label: usize, gamma: Gamma) -> Option<usize> {
        self.ids.get(&(label, gamma)).copied()
    }

    pub fn polygon(&self, id: usize) -> &SurfacePolygon {
        &self.polygons[id]
    }

    /// Partner side and shift of a side.
    pub fn partner(&self, s: SideRef) -> (SideRef, Complex64) {
        self.partner[&s]
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(|p| p.area).sum()
    }

    pub fn diameter(&self) -> f64 {
        self.polygons.iter().map(|p| p.diameter()).fold(0.0, f64::max)
    }

    /// Corner class (index into `singularities`) of a polygon corner.
    pub fn corner_class(&self, polygon: usize, corner: CornerKind) -> usize {
        self.corner_class[&(polygon, corner)]
    }

    pub fn is_singular_corner(&self, polygon: usize, corner: CornerKind) -> bool {
        self.singularities[self.corner_class(polygon, corner)].is_singular
    }

    /// Recomputes the corner classes from the identifications.
    pub fn classify_corners(&self) -> Result<Vec<SingularPoint>, SurfaceError> {
        Ok(corners::classify(self)?.0)
    }

    pub fn singular_points(&self) -> impl Iterator<Item = &SingularPoint> {
        self.singularities.iter().filter(|s| s.is_singular)
    }

    /// Genus from cone angles, cross-checked with V − E + F.
    fn compute_genus(&self) -> Result<usize, SurfaceError> {
        let gb: f64 = self.singularities.iter().map(|s| s.cone_angle / (2.0 * std::f64::consts::PI) - 1.0).sum();
        let v = self.singularities.len() as i64;
        let e = self.gluings.len() as i64;
        let f = self.polygons.len() as i64;
        let euler = v - e + f;
        if (gb + euler as f64).abs() > 1e-9 || euler > 2 || (2 - euler) % 2 != 0 {
            return Err(SurfaceError::EulerMismatch { gauss_bonnet: gb, euler });
        }
        Ok(((2 - euler) / 2) as usize)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.singularities.len() as i64 - self.gluings.len() as i64 + self.polygons.len() as i64
    }

    /// Serializable summary for debugging and rendering.
    pub fn dump(&self) -> SurfaceDump {
        SurfaceDump {
            genus: self.genus,
            polygons: self
                .polygons
                .iter()
                .map(|p| PolygonDump { id: p.id, label: p.label, gamma: p.gamma, vertices: p.vertices.iter().map(|z| [z.re, z.im]).collect() })
                .collect(),
            gluings: self.gluings.clone(),
            singularities: self
                .singularities
                .iter()
                .filter(|s| s.is_singular)
                .map(|s| SingularDump { id: s.id, cone_angle_over_pi: s.cone_angle / std::f64::consts::PI, corners: s.corners.iter().map(|&(p, c)| (p, c.to_string())).collect() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolygonDump {
    pub id: usize,
    pub label: usize,
    pub gamma: Gamma,
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularDump {
    pub id: usize,
    pub cone_angle_over_pi: f64,
    pub corners: Vec<(usize, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceDump {
    pub genus: usize,
    pub polygons: Vec<PolygonDump>,
    pub gluings: Vec<Gluing>,
    pub singularities: Vec<SingularDump>,
}
