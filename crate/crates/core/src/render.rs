//! Deterministic SVG output.
//!
//! Coordinates are printed with six decimals and elements are sorted before
//! emission, so equal inputs give byte-identical documents.

use std::fmt::Write;

use crate::conic::{NibbledEllipse, PhysicalTrajectory};
use crate::staircase::GeneralizedPolygon;
use crate::symmetry::Gamma;

/// Drawing primitives in model coordinates (y up).
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polygon { class: String, points: Vec<[f64; 2]> },
    Polyline { class: String, points: Vec<[f64; 2]> },
    Dot { class: String, at: [f64; 2] },
    Label { class: String, at: [f64; 2], text: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    pub title: String,
    pub shapes: Vec<Shape>,
}

fn num(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    // avoid "-0.000000"
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.6}")
}

fn points_attr(pts: &[[f64; 2]]) -> String {
    pts.iter().map(|p| format!("{},{}", num(p[0]), num(-p[1]))).collect::<Vec<_>>().join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const STYLE: &str = "polygon,polyline{stroke-width:1;vector-effect:non-scaling-stroke}\
.outline{fill:#f4f1e8;stroke:#222}.part{fill:#e8eef4;stroke:#234}\
.orbit{fill:none;stroke:#c33}.flat{fill:none;stroke:#36c}\
.corner{fill:#222}.reflex{fill:#c33}text{font-family:sans-serif}";

impl Scene {
    pub fn new(title: impl Into<String>) -> Self {
        Scene { title: title.into(), shapes: Vec::new() }
    }

    pub fn push(&mut self, s: Shape) {
        self.shapes.push(s);
    }

    fn bounds(&self) -> Option<([f64; 2], [f64; 2])> {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let mut add = |p: &[f64; 2]| {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        };
        for s in &self.shapes {
            match s {
                Shape::Polygon { points, .. } | Shape::Polyline { points, .. } => points.iter().for_each(&mut add),
                Shape::Dot { at, .. } | Shape::Label { at, .. } => add(at),
            }
        }
        lo[0].is_finite().then_some((lo, hi))
    }

    /// Element strings, one per shape, in emission order.
    fn elements(&self, unit: f64) -> Vec<String> {
        let mut out: Vec<(u8, String)> = self
            .shapes
            .iter()
            .map(|s| match s {
                Shape::Polygon { class, points } => (0, format!("<polygon class=\"{}\" points=\"{}\"/>", escape(class), points_attr(points))),
                Shape::Polyline { class, points } => (1, format!("<polyline class=\"{}\" points=\"{}\"/>", escape(class), points_attr(points))),
                Shape::Dot { class, at } => (2, format!("<circle class=\"{}\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>", escape(class), num(at[0]), num(-at[1]), num(0.012 * unit))),
                Shape::Label { class, at, text } => (3, format!("<text class=\"{}\" x=\"{}\" y=\"{}\">{}</text>", escape(class), num(at[0]), num(-at[1]), escape(text))),
            })
            .collect();
        out.sort();
        out.into_iter().map(|(_, s)| s).collect()
    }

    pub fn to_svg(&self) -> String {
        let (lo, hi) = self.bounds().unwrap_or(([0.0, 0.0], [1.0, 1.0]));
        let unit = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let pad = 0.05 * unit;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
            num(lo[0] - pad),
            num(-hi[1] - pad),
            num(hi[0] - lo[0] + 2.0 * pad),
            num(hi[1] - lo[1] + 2.0 * pad)
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(s, "<style>{}</style>", STYLE);
        let _ = writeln!(s, "<g font-size=\"{}\">", num(0.04 * unit));
        for e in self.elements(unit) {
            let _ = writeln!(s, "{e}");
        }
        s.push_str("</g>\n</svg>\n");
        s
    }
}

/// Boundary outline and corners of the table.
pub fn table_scene(table: &NibbledEllipse, per_arc: usize) -> Scene {
    let mut sc = Scene::new("table");
    sc.push(Shape::Polygon { class: "outline".into(), points: table.outline(per_arc) });
    for c in table.corners() {
        sc.push(Shape::Dot { class: if c.reflex { "reflex" } else { "corner" }.into(), at: c.point });
    }
    sc
}

/// Parts drawn in their γ orientation around the origin, so the four
/// reflected copies sit in the four quadrants; repeated orientations are
/// pushed outward along the x axis.
pub fn polygon_scene(p: &GeneralizedPolygon) -> Scene {
    let mut sc = Scene::new("flat polygon");
    let width = p.parts.values().map(|b| b.bbox().1[0] - b.bbox().0[0]).fold(0.0, f64::max);
    let mut used = [0usize; 4];
    for part in p.parts.values() {
        let g = part.gamma;
        let n = used[g.index()];
        used[g.index()] += 1;
        let dx = g.sx() * n as f64 * 1.1 * width;
        let pts: Vec<[f64; 2]> = part.vertices.iter().map(|v| [v[0] + dx, v[1]]).collect();
        let c = part.centroid();
        sc.push(Shape::Polygon { class: "part".into(), points: pts });
        sc.push(Shape::Label { class: "label".into(), at: [c[0] + dx, c[1]], text: format!("{}{}", part.label, gamma_suffix(g)) });
    }
    sc
}

fn gamma_suffix(g: Gamma) -> &'static str {
    match g {
        Gamma::Id => "",
        Gamma::V => "V",
        Gamma::H => "H",
        Gamma::VH => "VH",
    }
}

/// Physical orbit over the table outline.
pub fn trajectory_scene(table: &NibbledEllipse, orbit: &PhysicalTrajectory, per_arc: usize) -> Scene {
    let mut sc = table_scene(table, per_arc);
    sc.title = "trajectory".into();
    if let Some(first) = orbit.segments.first() {
        let mut pts = vec![first.start];
        pts.extend(orbit.segments.iter().map(|g| g.end));
        sc.push(Shape::Polyline { class: "orbit".into(), points: pts });
    }
    sc
}

/// Flat-coordinate polylines; a jump longer than `wrap` starts a new piece,
/// which separates the cylinder seams.
pub fn flat_orbit_scene(points: &[[f64; 2]], wrap: f64) -> Scene {
    let mut sc = Scene::new("flat orbit");
    let mut cur: Vec<[f64; 2]> = Vec::new();
    for &p in points {
        if let Some(q) = cur.last() {
            if (p[0] - q[0]).hypot(p[1] - q[1]) > wrap {
                if cur.len() > 1 {
                    sc.push(Shape::Polyline { class: "flat".into(), points: std::mem::take(&mut cur) });
                }
                cur.clear();
            }
        }
        cur.push(p);
    }
    if cur.len() > 1 {
        sc.push(Shape::Polyline { class: "flat".into(), points: cur });
    }
    sc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::TableSpec;

    #[test]
    fn fixed_precision_and_no_negative_zero() {
        assert_eq!(num(0.1234567), "0.123457");
        assert_eq!(num(-1e-9), "0.000000");
    }

    #[test]
    fn table_render_is_deterministic() {
        let t = TableSpec::symmetric(2.0, 1.0, vec![2.0, 1.0], vec![0.0, 0.5]).build().unwrap();
        let a = table_scene(&t, 32).to_svg();
        let b = table_scene(&t, 32).to_svg();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.contains("<polygon class=\"outline\""));
    }

    #[test]
    fn element_order_ignores_push_order() {
        let mut s1 = Scene::new("x");
        let mut s2 = Scene::new("x");
        let d = Shape::Dot { class: "corner".into(), at: [1.0, 1.0] };
        let p = Shape::Polyline { class: "orbit".into(), points: vec![[0.0, 0.0], [1.0, 1.0]] };
        s1.push(d.clone());
        s1.push(p.clone());
        s2.push(p);
        s2.push(d);
        assert_eq!(s1.to_svg(), s2.to_svg());
    }

    #[test]
    fn flat_orbit_splits_at_seams() {
        let s = flat_orbit_scene(&[[0.0, 0.0], [0.1, 0.1], [3.0, 0.2], [3.1, 0.3]], 1.0);
        assert_eq!(s.shapes.len(), 2);
    }
}
