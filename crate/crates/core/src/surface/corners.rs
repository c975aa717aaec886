//! Corner classes: polygon corners identified through the side gluings.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::{SideRef, SurfaceError, TranslationSurface};
use crate::staircase::{CornerKind, RelationKind, Relations};
use crate::symmetry::Gamma;

/// A point of the surface that is a corner of some polygon.
#[derive(Debug, Clone, Serialize)]
pub struct SingularPoint {
    pub id: usize,
    /// (polygon id, corner) pairs identified to this point.
    pub corners: Vec<(usize, CornerKind)>,
    pub cone_angle: f64,
    pub is_singular: bool,
}

impl SingularPoint {
    /// Cone angle as a multiple of 2π.
    pub fn order(&self) -> usize {
        (self.cone_angle / (2.0 * PI)).round() as usize
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

type ClassLookup = HashMap<(usize, CornerKind), usize>;

pub(super) fn classify(m: &TranslationSurface) -> Result<(Vec<SingularPoint>, ClassLookup), SurfaceError> {
    // flat index of every polygon corner
    let mut offsets = Vec::with_capacity(m.polygons.len());
    let mut total = 0;
    for p in &m.polygons {
        offsets.push(total);
        total += p.vertices.len();
    }
    let mut uf = UnionFind((0..total).collect());
    let tol = 1e-9 * m.diameter().max(1.0);
    for p in &m.polygons {
        let n = p.vertices.len();
        for side in p.sides() {
            let j = side.index(p.k());
            let (b, shift) = m.partner(SideRef { polygon: p.id, side });
            let q = &m.polygons[b.polygon];
            let i = b.side.index(q.k());
            let nq = q.vertices.len();
            for (end, v) in [(j, p.vertices[j]), ((j + 1) % n, p.vertices[(j + 1) % n])] {
                let image = v + shift;
                let hit = [i, (i + 1) % nq].into_iter().find(|&c| (q.vertices[c] - image).norm() < tol);
                match hit {
                    Some(c) => uf.union(offsets[p.id] + end, offsets[q.id] + c),
                    None => return Err(SurfaceError::UngluedSide { polygon: p.id, side }),
                }
            }
        }
    }
    let mut root_to_class = HashMap::new();
    let mut classes: Vec<SingularPoint> = Vec::new();
    let mut lookup = HashMap::new();
    for p in &m.polygons {
        for c in p.corners() {
            let root = uf.find(offsets[p.id] + c.index(p.k()));
            let id = *root_to_class.entry(root).or_insert_with(|| {
                classes.push(SingularPoint { id: classes.len(), corners: Vec::new(), cone_angle: 0.0, is_singular: false });
                classes.len() - 1
            });
            classes[id].corners.push((p.id, c));
            classes[id].cone_angle += c.interior_angle();
            lookup.insert((p.id, c), id);
        }
    }
    for s in &mut classes {
        let turns = s.cone_angle / (2.0 * PI);
        if (turns - turns.round()).abs() > 1e-9 || turns.round() < 1.0 {
            return Err(SurfaceError::InconsistentAngle { class: s.id, angle: s.cone_angle });
        }
        s.is_singular = turns.round() > 1.0;
    }
    Ok((classes, lookup))
}

/// Relation-cycle test for a corner of part m.
///
/// Returns `true` when the four-step label walk around the corner
/// closes, i.e. the corner is a regular point. Reflex corners are always
/// singular and interior diagonal corners always regular.
pub fn cycle_test(rel: &Relations, m: usize, corner: CornerKind) -> bool {
    let (first, second) = match corner {
        CornerKind::V00 => (RelationKind::V, RelationKind::H),
        CornerKind::V01 => (RelationKind::V, RelationKind::ShortH),
        CornerKind::Vk0 => (RelationKind::ShortV, RelationKind::H),
        CornerKind::Diag(_) => return true,
        CornerKind::Step(_) => return false,
    };
    let mut l = m;
    for _ in 0..2 {
        l = rel.partner(first, l);
        l = rel.partner(second, l);
    }
    l == m
}

pub(super) fn check_cycle_tests(m: &TranslationSurface) -> Result<(), SurfaceError> {
    for p in m.polygons.iter().filter(|p| p.gamma == Gamma::Id) {
        for c in p.corners() {
            let regular = cycle_test(&m.relations, p.label, c);
            let class = &m.singularities[m.corner_class(p.id, c)];
            if regular == class.is_singular {
                return Err(SurfaceError::CycleTestDisagreement { label: p.label, corner: c, cycle_regular: regular, angle: class.cone_angle });
            }
        }
    }
    Ok(())
}

