//! Flat coordinates on a caustic component and the flattened polygon.
//!
//! For a caustic parameter s the invariant set S_s is mapped by
//! σ_s(λ1,λ2) = (∫_{λ1}^a e, ∫_{λ2}^{s or b} e) onto a generalized staircase
//! polygon. Its shape is constant on each interval of the parameter
//! partition, so the side lengths are affine combinations of ξ_D and ℓ with
//! interval endpoints taken from the table.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{NibbledEllipse, Quadrant, TableError};
use crate::quadrature::{AffineCombination, Interval, Quadrature, QuadratureError, Regime};
use crate::staircase::{build_basic, build_generalized, GeneralizedPolygon, PolygonError, RelationKind, Relations, StaircaseProfile};
use crate::symmetry::Gamma;
use crate::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlattenError {
    #[error("degenerate caustic parameter s={0}")]
    DegenerateCaustic(f64),
    #[error("s={s} is not inside {interval} with margin {margin:e}")]
    NotInInterval { s: f64, interval: ParamInterval, margin: f64 },
    #[error("s={s} lies outside the caustic range ({lo}, {hi})")]
    OutsideRange { s: f64, lo: f64, hi: f64 },
    #[error("point ({}, {}) is not in the caustic component s={s}", .point[0], .point[1])]
    OutsideComponent { point: [f64; 2], s: f64 },
    #[error("numeric and symbolic profiles disagree for {quadrant} entry {entry}: {numeric} vs {symbolic}")]
    ProfileMismatch { quadrant: &'static str, entry: String, numeric: f64, symbolic: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("flattened polygon is malformed: {0}")]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl FlattenError {
    pub fn is_internal(&self) -> bool {
        match self {
            FlattenError::ProfileMismatch { .. } | FlattenError::Polygon(_) => true,
            FlattenError::Quadrature(e) => e.is_internal(),
            FlattenError::Table(e) => e.is_internal(),
            _ => false,
        }
    }
}

/// An open interval of caustic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamInterval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for ParamInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

impl ParamInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains_with_margin(&self, s: f64, margin: f64) -> bool {
        s >= self.lo + margin && s <= self.hi - margin
    }

    /// Chebyshev points of the first kind mapped into [lo+margin, hi−margin].
    pub fn chebyshev(&self, n: usize, margin: f64) -> Vec<f64> {
        let (lo, hi) = (self.lo + margin, self.hi - margin);
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut v: Vec<f64> = (0..n)
            .map(|j| c - r * (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Evenly spaced interior points with the given margin.
    pub fn uniform(&self, n: usize, margin: f64) -> Vec<f64> {
        let (lo, hi) = (self.lo + margin, self.hi - margin);
        (0..n).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / n as f64).collect()
    }
}

/// The partition of (β^t, a) by the table parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPartition {
    pub breakpoints: Vec<f64>,
    pub intervals: Vec<ParamInterval>,
}

impl ParameterPartition {
    pub fn locate(&self, s: f64) -> Option<usize> {
        self.intervals.iter().position(|j| s > j.lo && s < j.hi)
    }
}

const DEDUP: f64 = 1e-12;

pub fn interval_partition(table: &NibbledEllipse) -> ParameterPartition {
    let top = table.marks.top;
    let a = table.family.a;
    let mut pts = vec![top, table.family.b, a];
    for (_, seq) in table.sequences() {
        for &v in seq.alphas.iter().chain(&seq.betas) {
            if v > top && v < a {
                pts.push(v);
            }
        }
    }
    pts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let mut breakpoints: Vec<f64> = Vec::new();
    for p in pts {
        if breakpoints.last().is_none_or(|&q| p - q > DEDUP) {
            breakpoints.push(p);
        }
    }
    let intervals = breakpoints.windows(2).map(|w| ParamInterval { lo: w[0], hi: w[1] }).collect();
    ParameterPartition { breakpoints, intervals }
}

/// Which description of the flattened polygon applies on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlatCase {
    /// β^t < s < β^b: two parts.
    Upper,
    /// β^b < s < β^l: four parts in two components.
    Split,
    /// β^l < s < β^r: four parts joined on the left.
    LeftJoined,
    /// β^r < s < b: four parts forming a ring.
    Ring,
    /// b < s < a: four parts in the V/H cycle.
    Hyperbolic,
}

impl FlatCase {
    pub fn regime(self) -> Regime {
        if self == FlatCase::Hyperbolic {
            Regime::Hyperbolic
        } else {
            Regime::Elliptic
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FlatCase::Upper => "upper",
            FlatCase::Split => "split",
            FlatCase::LeftJoined => "left-joined",
            FlatCase::Ring => "ring",
            FlatCase::Hyperbolic => "hyperbolic",
        }
    }
}

fn flat_case(table: &NibbledEllipse, s: f64) -> Result<FlatCase, FlattenError> {
    let (a, b) = (table.family.a, table.family.b);
    let m = &table.marks;
    if !(s > m.top && s < a) {
        return Err(FlattenError::OutsideRange { s, lo: m.top, hi: a });
    }
    if s == b {
        return Err(FlattenError::DegenerateCaustic(s));
    }
    Ok(if s > b {
        FlatCase::Hyperbolic
    } else if s < m.bottom {
        FlatCase::Upper
    } else if s < m.left {
        FlatCase::Split
    } else if s < m.right {
        FlatCase::LeftJoined
    } else {
        FlatCase::Ring
    })
}

/// Part label of a quadrant in flattened polygons.
pub fn quadrant_label(q: Quadrant) -> usize {
    q.index() + 1
}

pub fn label_quadrant(m: usize) -> Quadrant {
    Quadrant::ALL[m - 1]
}

/// Number of nonempty steps of a quadrant's staircase at s.
pub fn steps_at(table: &NibbledEllipse, q: Quadrant, s: f64) -> usize {
    let seq = table.sequence(q);
    let k = seq.k();
    if s < table.family.b {
        (1..=k).filter(|&i| seq.beta(i) < s).count()
    } else {
        (1..=k).filter(|&i| seq.alpha(i - 1) > s).count()
    }
}

/// Side lengths of one part as affine combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicPart {
    pub quadrant: Quadrant,
    pub label: usize,
    pub gamma: Gamma,
    pub xs: Vec<AffineCombination>,
    pub ys: Vec<AffineCombination>,
}

/// Symbolic description of the flattened polygon on one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicProfile {
    pub case: FlatCase,
    pub parts: Vec<SymbolicPart>,
    pub relations: Vec<(RelationKind, usize, usize)>,
    pub ell: AffineCombination,
}

/// The families entering the Wronskian; `x` excludes ℓ itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Families {
    pub x: Vec<AffineCombination>,
    pub y: Vec<AffineCombination>,
    pub ell: AffineCombination,
}

impl Families {
    /// X ∪ Y ∪ {ℓ}.
    pub fn union(&self) -> Vec<AffineCombination> {
        let mut v = self.x.clone();
        v.extend(self.y.iter().cloned());
        v.push(self.ell.clone());
        v
    }
}

impl SymbolicProfile {
    pub fn families(&self) -> Families {
        let mut x: Vec<AffineCombination> = Vec::new();
        let mut y: Vec<AffineCombination> = Vec::new();
        for p in &self.parts {
            for c in &p.xs {
                if !c.is_pure_ell() && !x.contains(c) {
                    x.push(c.clone());
                }
            }
            for c in &p.ys {
                if !y.contains(c) {
                    y.push(c.clone());
                }
            }
        }
        // x entries by α descending, y entries by β ascending
        let key = |c: &AffineCombination| c.terms.first().map_or(f64::INFINITY, |t| t.1.lo.unwrap_or(t.1.hi));
        x.sort_by(|u, v| key(v).partial_cmp(&key(u)).unwrap());
        y.sort_by(|u, v| key(u).partial_cmp(&key(v)).unwrap());
        Families { x, y, ell: self.ell.clone() }
    }

    pub fn part(&self, q: Quadrant) -> Option<&SymbolicPart> {
        self.parts.iter().find(|p| p.quadrant == q)
    }

    /// Evaluates every entry at s into a generalized polygon.
    pub fn evaluate(&self, q: &Quadrature, s: f64) -> Result<GeneralizedPolygon, FlattenError> {
        let mut parts = Vec::new();
        for p in &self.parts {
            let xs = p.xs.iter().map(|c| c.value(q, s)).collect::<Result<Vec<_>, _>>()?;
            let ys = p.ys.iter().map(|c| c.value(q, s)).collect::<Result<Vec<_>, _>>()?;
            parts.push(build_basic(StaircaseProfile { xs, ys }, p.gamma, p.label)?);
        }
        Ok(build_generalized(parts, Relations::from_pairs(&self.relations)?)?)
    }
}

/// Symbolic profile valid throughout the partition interval containing s.
pub fn symbolic_profile(table: &NibbledEllipse, s: f64) -> Result<SymbolicProfile, FlattenError> {
    let case = flat_case(table, s)?;
    let (a, b) = (table.family.a, table.family.b);
    use Quadrant::*;
    let gamma = |q: Quadrant| match (case, q) {
        (_, PP) => Gamma::Id,
        (_, MP) => Gamma::V,
        (FlatCase::Hyperbolic, PM) => Gamma::H,
        (FlatCase::Hyperbolic, MM) => Gamma::VH,
        // elliptic lower half: +− mirrored, −− upright, laid out after the upper half
        (_, PM) => Gamma::V,
        (_, MM) => Gamma::Id,
    };
    let quadrants: Vec<Quadrant> = match case {
        FlatCase::Upper => vec![PP, MP],
        _ => vec![PP, PM, MP, MM],
    };
    let mut parts = Vec::new();
    for &q in &quadrants {
        let seq = table.sequence(q);
        let l = steps_at(table, q, s);
        let mut xs = Vec::with_capacity(l);
        let mut ys = Vec::with_capacity(l);
        for i in 1..=l {
            let alpha = seq.alpha(i);
            let beta = seq.beta(i);
            if case == FlatCase::Hyperbolic {
                xs.push(if i == l { AffineCombination::ell() } else { AffineCombination::xi(Interval::new(alpha, a)) });
                ys.push(AffineCombination::xi(Interval::new(beta, b)));
            } else {
                xs.push(if alpha == b { AffineCombination::ell() } else { AffineCombination::xi(Interval::new(alpha, a)) });
                ys.push(AffineCombination::ell_minus(Interval::below(beta)));
            }
        }
        parts.push(SymbolicPart { quadrant: q, label: quadrant_label(q), gamma: gamma(q), xs, ys });
    }
    let r = |k, p: Quadrant, q: Quadrant| (k, quadrant_label(p), quadrant_label(q));
    use RelationKind::{ShortV, H, V};
    let relations = match case {
        FlatCase::Upper => vec![r(V, PP, MP)],
        FlatCase::Split => vec![r(V, PP, MP), r(V, PM, MM)],
        FlatCase::LeftJoined => vec![r(V, PP, MP), r(ShortV, MP, MM), r(V, MM, PM)],
        FlatCase::Ring => vec![r(V, PP, MP), r(ShortV, MP, MM), r(V, MM, PM), r(ShortV, PM, PP)],
        FlatCase::Hyperbolic => vec![r(V, PP, MP), r(H, MP, MM), r(V, MM, PM), r(H, PM, PP)],
    };
    Ok(SymbolicProfile { case, parts, relations, ell: AffineCombination::ell() })
}

/// Symbolic profile of a partition interval.
pub fn xy_families(table: &NibbledEllipse, j: &ParamInterval) -> Result<Families, FlattenError> {
    Ok(symbolic_profile(table, j.midpoint())?.families())
}

/// Direct-form quadratures for one part, independent of the symbolic forms
/// where the entry touches s.
fn numeric_part(q: &Quadrature, table: &NibbledEllipse, part: &SymbolicPart, case: FlatCase, s: f64) -> Result<(Vec<f64>, Vec<f64>), FlattenError> {
    let (a, b) = (table.family.a, table.family.b);
    let seq = table.sequence(part.quadrant);
    let l = part.xs.len();
    let mut xs = Vec::with_capacity(l);
    let mut ys = Vec::with_capacity(l);
    for i in 1..=l {
        let alpha = seq.alpha(i);
        let beta = seq.beta(i);
        if case == FlatCase::Hyperbolic {
            let d = if i == l { Interval::new(s, a) } else { Interval::new(alpha, a) };
            xs.push(q.xi(&d, s, 0)?.value);
            ys.push(q.xi(&Interval::new(beta, b), s, 0)?.value);
        } else {
            let d = if alpha == b { Interval::below(s) } else { Interval::new(alpha, a) };
            xs.push(q.xi(&d, s, 0)?.value);
            ys.push(q.xi(&Interval::new(beta, s), s, 0)?.value);
        }
    }
    Ok((xs, ys))
}

/// The flattened polygon at one caustic parameter.
#[derive(Debug, Clone)]
pub struct FlatPolygon {
    pub s: f64,
    pub interval: ParamInterval,
    pub ell: f64,
    pub polygon: GeneralizedPolygon,
    /// One polygon per connected component; a single entry unless split.
    pub components: Vec<GeneralizedPolygon>,
    pub symbolic: SymbolicProfile,
}

impl FlatPolygon {
    pub fn case(&self) -> FlatCase {
        self.symbolic.case
    }
}

pub fn build_flat_polygon(table: &NibbledEllipse, j: &ParamInterval, s: f64) -> Result<FlatPolygon, FlattenError> {
    let q = Quadrature::new(table.family);
    build_flat_polygon_with(&q, table, j, s)
}

pub fn build_flat_polygon_with(q: &Quadrature, table: &NibbledEllipse, j: &ParamInterval, s: f64) -> Result<FlatPolygon, FlattenError> {
    let margin = tolerances::INTERVAL_MARGIN;
    if !j.contains_with_margin(s, margin) {
        return Err(FlattenError::NotInInterval { s, interval: *j, margin });
    }
    let symbolic = symbolic_profile(table, s)?;
    let ell = q.ell(s, 0)?.value;
    let tol = tolerances::PROFILE_AGREEMENT * ell.max(1.0);
    for part in &symbolic.parts {
        let (nx, ny) = numeric_part(q, table, part, symbolic.case, s)?;
        for (name, num, sym) in [("x", &nx, &part.xs), ("y", &ny, &part.ys)] {
            for (i, (n, c)) in num.iter().zip(sym).enumerate() {
                let v = c.value(q, s)?;
                if (n - v).abs() > tol {
                    return Err(FlattenError::ProfileMismatch {
                        quadrant: part.quadrant.label(),
                        entry: format!("{name}_{}", i + 1),
                        numeric: *n,
                        symbolic: v,
                    });
                }
            }
        }
    }
    let polygon = symbolic.evaluate(q, s)?;
    let components = if polygon.is_connected() {
        vec![polygon.clone()]
    } else {
        polygon.components.iter().map(|c| polygon.restrict(c)).collect::<Result<Vec<_>, _>>()?
    };
    Ok(FlatPolygon { s, interval: *j, ell, polygon, components, symbolic })
}

/// ∫_lo^hi e(λ,s) dλ for an interval inside Δ_s that may end within the
/// quadrature guard distance of s. The short piece next to s is expanded
/// analytically: ∫_0^δ t^{−1/2} g ≈ 2√δ·g(δ/3).
fn coordinate_integral(q: &Quadrature, lo: f64, hi: f64, s: f64) -> Result<f64, QuadratureError> {
    if hi <= lo {
        return Ok(0.0);
    }
    let (a, b) = (q.family.a, q.family.b);
    let guard = tolerances::ENDPOINT_GUARD;
    let g = |lam: f64| 1.0 / ((a - lam) * (b - lam)).abs().sqrt();
    let near = |t: f64| t != s && (t - s).abs() < guard;
    if lo >= s {
        // right of s
        let tail = |t: f64| if t == s { 0.0 } else { let d = t - s; 2.0 * d.sqrt() * g(s + d / 3.0) };
        if near(lo) || near(hi) {
            let full = if near(hi) { tail(hi) } else { q.xi(&Interval::new(s, hi), s, 0)?.value };
            return Ok(full - tail(lo));
        }
    } else if hi <= s {
        let tail = |t: f64| if t == s { 0.0 } else { let d = s - t; 2.0 * d.sqrt() * g(s - d / 3.0) };
        if near(lo) || near(hi) {
            let full = if near(lo) { tail(lo) } else { q.xi(&Interval::new(lo, s), s, 0)?.value };
            return Ok(full - tail(hi));
        }
    }
    Ok(q.xi(&Interval::new(lo, hi), s, 0)?.value)
}

/// Translation of a quadrant's flattened part in the elliptic cylinder.
pub fn part_offset(q: Quadrant, regime: Regime, ell: f64) -> f64 {
    match (regime, q) {
        (Regime::Elliptic, Quadrant::PM | Quadrant::MM) => 2.0 * ell,
        _ => 0.0,
    }
}

/// Flat coordinates (u, v) of a point of the caustic component.
///
/// Elliptic caustics map to the cylinder [0,4ℓ) × [0,ℓ): the upper
/// quadrants occupy u ∈ [−ℓ,ℓ] mod 4ℓ around the positive y-axis, the lower
/// ones u ∈ [ℓ,3ℓ] around the negative y-axis. Hyperbolic caustics map to
/// [−ℓ,ℓ] × (−ℓ,ℓ) by sign reflection.
pub fn flatten_point(table: &NibbledEllipse, s: f64, p: [f64; 2]) -> Result<[f64; 2], FlattenError> {
    let q = Quadrature::new(table.family);
    flatten_point_with(&q, table, s, p)
}

pub fn flatten_point_with(q: &Quadrature, table: &NibbledEllipse, s: f64, p: [f64; 2]) -> Result<[f64; 2], FlattenError> {
    let fam = &table.family;
    let regime = crate::quadrature::regime(fam, s).map_err(|_| FlattenError::DegenerateCaustic(s))?;
    if !table.contains(p) {
        return Err(FlattenError::OutsideComponent { point: p, s });
    }
    let c = fam.elliptic_coords([p[0].abs(), p[1].abs()])?;
    let slack = 1e-12 * fam.a;
    let (u, v) = match regime {
        Regime::Elliptic => {
            if c.l2 > s + slack {
                return Err(FlattenError::OutsideComponent { point: p, s });
            }
            let l2 = c.l2.min(s);
            (coordinate_integral(q, c.l1.max(fam.b), fam.a, s)?, coordinate_integral(q, l2, s, s)?)
        }
        Regime::Hyperbolic => {
            if c.l1 < s - slack {
                return Err(FlattenError::OutsideComponent { point: p, s });
            }
            let l1 = c.l1.max(s);
            (coordinate_integral(q, l1, fam.a, s)?, coordinate_integral(q, c.l2.min(fam.b), fam.b, s)?)
        }
    };
    let quad = Quadrant::of_point(p);
    Ok(match regime {
        Regime::Elliptic => {
            let ell = q.ell(s, 0)?.value;
            let x = match quad {
                Quadrant::PP => u,
                Quadrant::PM => 2.0 * ell - u,
                Quadrant::MM => 2.0 * ell + u,
                Quadrant::MP => {
                    if u > 0.0 {
                        4.0 * ell - u
                    } else {
                        0.0
                    }
                }
            };
            [x, v]
        }
        Regime::Hyperbolic => {
            let g = quad.gamma();
            g.apply([u, v])
        }
    })
}
