//! Crossing data of the diagonal flow: side crossings (D), separatrices
//! leaving singular corners (B) and separatrices entering them (E).
//!
//! `enumerate_dbe` reads the sets off the profile values and relations;
//! `brute_force_dbe` finds them by probing the glued geometry.

use num_complex::Complex64;
use serde::Serialize;

use super::{SideRef, TranslationSurface};
use crate::staircase::{CornerKind, RelationKind, SideKind};
use crate::symmetry::Gamma;

/// Flow crossing from polygon `from` into polygon `to` through side `side`
/// of `to`, with datum ζ_from − ζ_to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DEntry {
    pub to: usize,
    pub from: usize,
    pub side: SideKind,
    pub vector: Complex64,
}

/// A singular corner of a polygon together with the value it contributes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerEntry {
    pub polygon: usize,
    pub corner: CornerKind,
    pub class: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Dbe {
    pub d: Vec<DEntry>,
    pub b: Vec<CornerEntry>,
    pub e: Vec<CornerEntry>,
}

impl Dbe {
    fn sort(&mut self) {
        self.d.sort_by(|x, y| (x.to, x.side, x.from).cmp(&(y.to, y.side, y.from)));
        self.b.sort_by(|x, y| (x.polygon, x.corner).cmp(&(y.polygon, y.corner)));
        self.e.sort_by(|x, y| (x.polygon, x.corner).cmp(&(y.polygon, y.corner)));
    }

    /// Same entries with vectors within `tol`.
    pub fn agrees_with(&self, other: &Dbe, tol: f64) -> bool {
        let d = self.d.len() == other.d.len()
            && self.d.iter().zip(&other.d).all(|(x, y)| (x.to, x.from, x.side) == (y.to, y.from, y.side) && (x.vector - y.vector).norm() <= tol);
        let c = |a: &[CornerEntry], b: &[CornerEntry]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x.polygon, x.corner, x.class) == (y.polygon, y.corner, y.class) && (x.value - y.value).norm() <= tol)
        };
        d && c(&self.b, &other.b) && c(&self.e, &other.e)
    }
}

/// Table-driven enumeration for the flow in direction (1,1).
pub fn enumerate_dbe(m: &TranslationSurface) -> Dbe {
    let rel = &m.relations;
    let mut out = Dbe::default();
    for p in &m.polygons {
        let k = p.k();
        let (sx, sy) = (p.gamma.sx(), p.gamma.sy());
        let lab = p.label;
        let at = |label: usize, g: Gamma| m.polygon_id(label, g).expect("label of the surface");
        let gh = p.gamma.compose(Gamma::H);
        let gv = p.gamma.compose(Gamma::V);
        let mut push = |from: usize, side: SideKind, vector: Complex64| out.d.push(DEntry { to: p.id, from, side, vector });
        if sy < 0.0 {
            for j in 2..=k {
                push(at(lab, gh), SideKind::StepH(j), Complex64::new(0.0, 2.0 * p.y(j)));
            }
            let h = rel.partner(RelationKind::ShortH, lab);
            let yh = m.polygons[at(h, gh)].y(1);
            push(at(h, gh), SideKind::ShortH, Complex64::new(0.0, p.y(1) + yh));
        } else {
            push(at(rel.partner(RelationKind::H, lab), gh), SideKind::LongH, Complex64::new(0.0, 0.0));
        }
        if sx < 0.0 {
            for j in 1..k {
                push(at(lab, gv), SideKind::StepV(j), Complex64::new(2.0 * p.x(j), 0.0));
            }
            let v = rel.partner(RelationKind::ShortV, lab);
            let other = &m.polygons[at(v, gv)];
            push(at(v, gv), SideKind::ShortV, Complex64::new(p.x(k) + other.x(other.k()), 0.0));
        } else {
            push(at(rel.partner(RelationKind::V, lab), gv), SideKind::LongV, Complex64::new(0.0, 0.0));
        }
        for c in p.corners() {
            let class = m.corner_class(p.id, c);
            if !m.singularities[class].is_singular {
                continue;
            }
            let z = p.vertex(c);
            let (outgoing, incoming) = match c {
                CornerKind::Step(_) => (p.gamma != Gamma::Id, p.gamma != Gamma::VH),
                CornerKind::V01 => (p.gamma == Gamma::H, p.gamma == Gamma::V),
                CornerKind::Vk0 => (p.gamma == Gamma::V, p.gamma == Gamma::H),
                CornerKind::V00 => (p.gamma == Gamma::Id, p.gamma == Gamma::VH),
                CornerKind::Diag(_) => (p.gamma == Gamma::VH, p.gamma == Gamma::Id),
            };
            if outgoing {
                out.b.push(CornerEntry { polygon: p.id, corner: c, class, value: -z });
            }
            if incoming {
                out.e.push(CornerEntry { polygon: p.id, corner: c, class, value: z });
            }
        }
    }
    out.sort();
    out
}

/// Enumeration by point probes ±ε(1,1) around every side and corner.
pub fn brute_force_dbe(m: &TranslationSurface) -> Dbe {
    let eps = 1e-7 * m.diameter().max(1.0);
    let step = Complex64::new(eps, eps);
    let mut out = Dbe::default();
    for p in &m.polygons {
        for side in p.sides() {
            let (a, b) = p.side_ends(side);
            let mid = 0.5 * (a + b);
            let (to, shift) = m.partner(SideRef { polygon: p.id, side });
            let q = &m.polygons[to.polygon];
            if p.contains_strictly(mid - step) && q.contains_strictly(mid + shift + step) {
                out.d.push(DEntry { to: q.id, from: p.id, side: to.side, vector: -shift });
            }
        }
        for c in p.corners() {
            let class = m.corner_class(p.id, c);
            if !m.singularities[class].is_singular {
                continue;
            }
            let z = p.vertex(c);
            if p.contains_strictly(z + step) {
                out.b.push(CornerEntry { polygon: p.id, corner: c, class, value: -z });
            }
            if p.contains_strictly(z - step) {
                out.e.push(CornerEntry { polygon: p.id, corner: c, class, value: z });
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::{l_shape, two_rectangles};
    use super::super::unfold;
    use super::*;

    #[test]
    fn table_matches_probes() {
        for p in [l_shape(), two_rectangles()] {
            let m = unfold(&p).unwrap();
            let t = enumerate_dbe(&m);
            let b = brute_force_dbe(&m);
            assert!(t.agrees_with(&b, 1e-12), "{t:#?}\n{b:#?}");
        }
    }

    #[test]
    fn l_shape_separatrix_counts() {
        // one 6π point: three outgoing and three incoming separatrices
        let m = unfold(&l_shape()).unwrap();
        let t = enumerate_dbe(&m);
        assert_eq!(t.b.len(), 3);
        assert_eq!(t.e.len(), 3);
    }
}
