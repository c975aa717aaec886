//! Confocal conics, nibbled-ellipse tables and the physical billiard flow.
//!
//! The family is x²/(a−λ) + y²/(b−λ) = 1 with 0 < b < a: ellipses for λ < b,
//! hyperbolas for b < λ < a. Every point off the foci has two parameters
//! λ1 ∈ [b, a] and λ2 ≤ b, and in those coordinates every arc of a nibbled
//! ellipse is an axis-parallel segment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symmetry::Gamma;
use crate::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("invalid conic family: need 0 < b < a, got a={a}, b={b}")]
    InvalidFamily { a: f64, b: f64 },
    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),
    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),
    #[error("sequence length mismatch: {alphas} alphas vs {betas} betas (need equal, at least 2)")]
    LengthMismatch { alphas: usize, betas: usize },
    #[error("compatibility violation: {0}")]
    CompatibilityViolation(String),
    #[error("point ({x}, {y}) is a focus; elliptic coordinates are undefined there")]
    FocusSingularity { x: f64, y: f64 },
    #[error("boundary hit at ({x}, {y}) lies within corner tolerance")]
    CornerHit { x: f64, y: f64 },
    #[error("point ({x}, {y}) is not in the table")]
    NotInTable { x: f64, y: f64 },
    #[error("point ({x}, {y}) is not on the table boundary")]
    NotOnBoundary { x: f64, y: f64 },
    #[error("no caustic tangent line through the chosen point for s={s}")]
    NoTangentDirection { s: f64 },
    #[error("geometry failure: {0}")]
    GeometryFailure(String),
}

impl TableError {
    pub fn is_internal(&self) -> bool {
        matches!(self, TableError::GeometryFailure(_))
    }
}

/// The confocal family with parameters a > b > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicFamily {
    pub a: f64,
    pub b: f64,
}

/// The pair (λ1, λ2) with λ1 ∈ [b, a] and λ2 ≤ b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCoords {
    pub l1: f64,
    pub l2: f64,
}

impl ConicFamily {
    pub fn new(a: f64, b: f64) -> Result<Self, TableError> {
        if !(a.is_finite() && b.is_finite() && b > 0.0 && a > b) {
            return Err(TableError::InvalidFamily { a, b });
        }
        Ok(ConicFamily { a, b })
    }

    pub fn focal_distance(&self) -> f64 {
        (self.a - self.b).sqrt()
    }

    /// Roots of λ² − λ(a+b−x²−y²) + (ab − bx² − ay²), ordered λ1 ≥ b ≥ λ2.
    ///
    /// Solved in the shifted variable μ = λ − b so that both roots keep full
    /// relative accuracy near the axes.
    pub fn elliptic_coords(&self, p: [f64; 2]) -> Result<EllipticCoords, TableError> {
        let (x, y) = (p[0], p[1]);
        let c = self.a - self.b;
        let f = c.sqrt();
        if ((x.abs() - f).powi(2) + y * y).sqrt() < 1e-14 * (1.0 + f) {
            return Err(TableError::FocusSingularity { x, y });
        }
        let pc = x * x + y * y - c;
        let qc = -c * y * y;
        let disc = (pc * pc - 4.0 * qc).max(0.0);
        let sq = disc.sqrt();
        let (mu1, mu2) = if pc >= 0.0 {
            let m2 = -0.5 * (pc + sq);
            let m1 = if m2 != 0.0 { qc / m2 } else { 0.0 };
            (m1, m2)
        } else {
            let m1 = 0.5 * (-pc + sq);
            let m2 = if m1 != 0.0 { qc / m1 } else { 0.0 };
            (m1, m2)
        };
        let l1 = (self.b + mu1.max(0.0)).min(self.a);
        let l2 = self.b + mu2.min(0.0);
        Ok(EllipticCoords { l1, l2 })
    }

    /// Point of the positive quadrant with the given coordinates, reflected
    /// into `quadrant`.
    pub fn point_from_coords(&self, l1: f64, l2: f64, quadrant: Quadrant) -> [f64; 2] {
        let c = self.a - self.b;
        let x2 = ((self.a - l1) * (self.a - l2) / c).max(0.0);
        let y2 = ((l1 - self.b) * (self.b - l2) / c).max(0.0);
        quadrant.gamma().apply([x2.sqrt(), y2.sqrt()])
    }

    /// Unit normal of the conic with parameter `lambda` at `p`.
    pub fn unit_normal(&self, lambda: f64, p: [f64; 2]) -> [f64; 2] {
        let nx = p[0] / (self.a - lambda);
        let ny = p[1] / (self.b - lambda);
        let n = nx.hypot(ny);
        [nx / n, ny / n]
    }

    /// Value of x²/(a−λ) + y²/(b−λ) − 1.
    pub fn level(&self, lambda: f64, p: [f64; 2]) -> f64 {
        p[0] * p[0] / (self.a - lambda) + p[1] * p[1] / (self.b - lambda) - 1.0
    }
}

/// Free-function form of [`ConicFamily::elliptic_coords`].
pub fn elliptic_coords(point: [f64; 2], family: &ConicFamily) -> Result<EllipticCoords, TableError> {
    family.elliptic_coords(point)
}

/// A quadrant of the plane; the sign pair names it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    /// x ≥ 0, y ≥ 0
    PP,
    /// x ≥ 0, y ≤ 0
    PM,
    /// x ≤ 0, y ≥ 0
    MP,
    /// x ≤ 0, y ≤ 0
    MM,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::PP, Quadrant::PM, Quadrant::MP, Quadrant::MM];

    pub fn index(self) -> usize {
        match self {
            Quadrant::PP => 0,
            Quadrant::PM => 1,
            Quadrant::MP => 2,
            Quadrant::MM => 3,
        }
    }

    /// Reflection carrying the positive quadrant onto this one.
    pub fn gamma(self) -> Gamma {
        match self {
            Quadrant::PP => Gamma::Id,
            Quadrant::MP => Gamma::V,
            Quadrant::PM => Gamma::H,
            Quadrant::MM => Gamma::VH,
        }
    }

    pub fn of_point(p: [f64; 2]) -> Quadrant {
        match (p[0] < 0.0, p[1] < 0.0) {
            (false, false) => Quadrant::PP,
            (false, true) => Quadrant::PM,
            (true, false) => Quadrant::MP,
            (true, true) => Quadrant::MM,
        }
    }

    /// Sign label such as "+-".
    pub fn label(self) -> &'static str {
        match self {
            Quadrant::PP => "++",
            Quadrant::PM => "+-",
            Quadrant::MP => "-+",
            Quadrant::MM => "--",
        }
    }

    /// Key used in table JSON documents.
    pub fn key(self) -> &'static str {
        match self {
            Quadrant::PP => "pp",
            Quadrant::PM => "pm",
            Quadrant::MP => "mp",
            Quadrant::MM => "mm",
        }
    }

    pub fn from_label(s: &str) -> Option<Quadrant> {
        Quadrant::ALL.into_iter().find(|q| q.label() == s || q.key() == s)
    }

    /// Image of the quadrant under a reflection.
    pub fn reflected(self, g: Gamma) -> Quadrant {
        let p = g.apply(self.gamma().apply([1.0, 1.0]));
        Quadrant::of_point(p)
    }
}

/// A staircase chain a = α_0 > … > α_k = b > β_k > … > β_1 ≥ β_0 = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSequence {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl ThetaSequence {
    pub fn k(&self) -> usize {
        self.alphas.len() - 1
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.alphas[i]
    }

    pub fn beta(&self, i: usize) -> f64 {
        self.betas[i]
    }

    /// Step index i with α_i < λ1 ≤ α_{i−1}; λ1 = b belongs to the last step.
    pub fn step_of(&self, l1: f64) -> usize {
        let k = self.k();
        (1..=k).find(|&i| l1 > self.alphas[i]).unwrap_or(k)
    }
}

/// Checks the ordering chain and pins the three fixed endpoints.
pub fn validate_theta(alphas: &[f64], betas: &[f64], family: &ConicFamily) -> Result<ThetaSequence, TableError> {
    if alphas.len() != betas.len() || alphas.len() < 2 {
        return Err(TableError::LengthMismatch { alphas: alphas.len(), betas: betas.len() });
    }
    if alphas.iter().chain(betas).any(|v| !v.is_finite()) {
        return Err(TableError::MonotonicityViolation("non-finite entry".into()));
    }
    let k = alphas.len() - 1;
    let scale = family.a.max(1.0);
    let close = |u: f64, v: f64| (u - v).abs() <= 1e-12 * scale;
    if !close(alphas[0], family.a) {
        return Err(TableError::EndpointMismatch(format!("alpha_0 = {} but a = {}", alphas[0], family.a)));
    }
    if !close(alphas[k], family.b) {
        return Err(TableError::EndpointMismatch(format!("alpha_k = {} but b = {}", alphas[k], family.b)));
    }
    if !close(betas[0], 0.0) {
        return Err(TableError::EndpointMismatch(format!("beta_0 = {} but must be 0", betas[0])));
    }
    let mut al = alphas.to_vec();
    let mut be = betas.to_vec();
    al[0] = family.a;
    al[k] = family.b;
    be[0] = 0.0;
    for i in 1..=k {
        if al[i] >= al[i - 1] {
            return Err(TableError::MonotonicityViolation(format!(
                "alpha_{} = {} is not below alpha_{} = {}",
                i,
                al[i],
                i - 1,
                al[i - 1]
            )));
        }
    }
    if be[k] >= family.b {
        return Err(TableError::MonotonicityViolation(format!("beta_{k} = {} is not below b = {}", be[k], family.b)));
    }
    if be[1] < 0.0 {
        return Err(TableError::MonotonicityViolation(format!("beta_1 = {} is negative", be[1])));
    }
    for i in 2..=k {
        if be[i] <= be[i - 1] {
            return Err(TableError::MonotonicityViolation(format!(
                "beta_{} = {} is not above beta_{} = {}",
                i,
                be[i],
                i - 1,
                be[i - 1]
            )));
        }
    }
    Ok(ThetaSequence { alphas: al, betas: be })
}

/// The four caustic marks β^t, β^b, β^l, β^r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausticMarks {
    pub top: f64,
    pub bottom: f64,
    pub left: f64,
    pub right: f64,
}

/// A nibbled ellipse: one staircase chain per quadrant.
#[derive(Debug, Clone, PartialEq)]
pub struct NibbledEllipse {
    pub family: ConicFamily,
    quadrants: [ThetaSequence; 4],
    pub marks: CausticMarks,
    /// Reflection applied to the input to reach normalized form. Physical
    /// points of the input table map to this table through it.
    pub normalization: Gamma,
}

/// Builds a table from its four quadrant chains and normalizes it so that
/// β^t ≤ β^b ≤ β^l ≤ β^r.
pub fn build_table(
    family: ConicFamily,
    pp: ThetaSequence,
    pm: ThetaSequence,
    mp: ThetaSequence,
    mm: ThetaSequence,
) -> Result<NibbledEllipse, TableError> {
    let tol = 1e-12 * family.a.max(1.0);
    let eq = |u: f64, v: f64| (u - v).abs() <= tol;
    let first = |s: &ThetaSequence| s.betas[1];
    let last = |s: &ThetaSequence| s.betas[s.k()];
    if !eq(first(&pp), first(&mp)) {
        return Err(TableError::CompatibilityViolation(format!(
            "top: beta_1 of ++ is {} but beta_1 of -+ is {}",
            first(&pp),
            first(&mp)
        )));
    }
    if !eq(first(&pm), first(&mm)) {
        return Err(TableError::CompatibilityViolation(format!(
            "bottom: beta_1 of +- is {} but beta_1 of -- is {}",
            first(&pm),
            first(&mm)
        )));
    }
    if !eq(last(&pp), last(&pm)) {
        return Err(TableError::CompatibilityViolation(format!(
            "right: beta_k of ++ is {} but beta_k of +- is {}",
            last(&pp),
            last(&pm)
        )));
    }
    if !eq(last(&mp), last(&mm)) {
        return Err(TableError::CompatibilityViolation(format!(
            "left: beta_k of -+ is {} but beta_k of -- is {}",
            last(&mp),
            last(&mm)
        )));
    }
    let mut q = [pp, pm, mp, mm];
    let mut normalization = Gamma::Id;
    if first(&q[0]) > first(&q[1]) {
        // reflect in the horizontal axis: top and bottom trade places
        q.swap(0, 1);
        q.swap(2, 3);
        normalization = normalization.compose(Gamma::H);
    }
    if last(&q[2]) > last(&q[0]) {
        q.swap(0, 2);
        q.swap(1, 3);
        normalization = normalization.compose(Gamma::V);
    }
    let marks = CausticMarks { top: first(&q[0]), bottom: first(&q[1]), left: last(&q[2]), right: last(&q[0]) };
    Ok(NibbledEllipse { family, quadrants: q, marks, normalization })
}

/// Whether the curve is an ellipse (λ < b) or a hyperbola (λ > b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcKind {
    Ellipse,
    Hyperbola,
}

/// One boundary arc: the conic with parameter `lambda`, restricted to a
/// range of the other elliptic coordinate inside one quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub quadrant: Quadrant,
    pub kind: ArcKind,
    pub lambda: f64,
    pub range: (f64, f64),
}

impl Arc {
    /// Points along the arc, in order of increasing free coordinate.
    pub fn sample(&self, family: &ConicFamily, n: usize) -> Vec<[f64; 2]> {
        let n = n.max(2);
        (0..n)
            .map(|j| {
                let t = j as f64 / (n - 1) as f64;
                let free = self.range.0 + t * (self.range.1 - self.range.0);
                match self.kind {
                    ArcKind::Ellipse => family.point_from_coords(free, self.lambda, self.quadrant),
                    ArcKind::Hyperbola => family.point_from_coords(self.lambda, free, self.quadrant),
                }
            })
            .collect()
    }
}

/// A corner of the table boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCorner {
    pub quadrant: Quadrant,
    pub point: [f64; 2],
    /// Interior angle exceeds π (the concave steps of the staircase).
    pub reflex: bool,
}

/// A reflecting curve for [`reflect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mirror {
    Conic(f64),
    VerticalLine,
    HorizontalLine,
}

/// Position and unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilliardState {
    pub position: [f64; 2],
    pub direction: [f64; 2],
}

impl BilliardState {
    pub fn new(position: [f64; 2], direction: [f64; 2]) -> Self {
        let n = direction[0].hypot(direction[1]);
        BilliardState { position, direction: [direction[0] / n, direction[1] / n] }
    }
}

/// Caustic parameter of the line carrying the state.
///
/// With unit direction d and the line's signed offset m = d_x p_y − d_y p_x,
/// tangency to the conic with parameter s reads (a−s)d_y² + (b−s)d_x² = m²,
/// so s = a d_y² + b d_x² − m². This reduces to (k²a + b − m²)/(k²+1) for
/// slope k and to a − c² for the vertical line x = c, with no division.
pub fn caustic_parameter(state: &BilliardState, family: &ConicFamily) -> f64 {
    let [px, py] = state.position;
    let n = state.direction[0].hypot(state.direction[1]);
    let (dx, dy) = (state.direction[0] / n, state.direction[1] / n);
    let m = dx * py - dy * px;
    family.a * dy * dy + family.b * dx * dx - m * m
}

/// Mirror reflection d ↦ d − 2(d·n)n about the normal of `mirror` at the
/// state's position.
pub fn reflect(state: &BilliardState, mirror: Mirror, family: &ConicFamily) -> BilliardState {
    let n = match mirror {
        Mirror::Conic(lambda) => family.unit_normal(lambda, state.position),
        Mirror::VerticalLine => [1.0, 0.0],
        Mirror::HorizontalLine => [0.0, 1.0],
    };
    let d = state.direction;
    let dn = d[0] * n[0] + d[1] * n[1];
    let r = [d[0] - 2.0 * dn * n[0], d[1] - 2.0 * dn * n[1]];
    let norm = r[0].hypot(r[1]);
    BilliardState { position: state.position, direction: [r[0] / norm, r[1] / norm] }
}

/// One straight piece of a physical orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalSegment {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub caustic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceStatus {
    Alive,
    DiedAtCorner,
    TimeExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalTrajectory {
    pub segments: Vec<PhysicalSegment>,
    pub status: TraceStatus,
    pub reflections: usize,
    /// Rays that grazed a boundary conic and were continued.
    pub tangencies: usize,
    pub length: f64,
}

impl PhysicalTrajectory {
    pub fn max_caustic_drift(&self, s0: f64) -> f64 {
        self.segments.iter().map(|g| (g.caustic - s0).abs()).fold(0.0, f64::max)
    }
}

impl NibbledEllipse {
    pub fn sequence(&self, q: Quadrant) -> &ThetaSequence {
        &self.quadrants[q.index()]
    }

    pub fn sequences(&self) -> impl Iterator<Item = (Quadrant, &ThetaSequence)> {
        Quadrant::ALL.into_iter().map(move |q| (q, &self.quadrants[q.index()]))
    }

    /// Closed-region membership test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.contains_with(p, 1e-12)
    }

    fn contains_with(&self, p: [f64; 2], tol: f64) -> bool {
        let q = Quadrant::of_point(p);
        let seq = self.sequence(q);
        let c = match self.family.elliptic_coords([p[0].abs(), p[1].abs()]) {
            Ok(c) => c,
            // foci lie inside every table
            Err(_) => return true,
        };
        let i = seq.step_of(c.l1);
        c.l2 >= seq.betas[i] - tol
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let mut out = Vec::new();
        for (q, seq) in self.sequences() {
            let k = seq.k();
            for i in 1..=k {
                out.push(Arc {
                    quadrant: q,
                    kind: ArcKind::Ellipse,
                    lambda: seq.betas[i],
                    range: (seq.alphas[i], seq.alphas[i - 1]),
                });
            }
            for i in 1..k {
                out.push(Arc {
                    quadrant: q,
                    kind: ArcKind::Hyperbola,
                    lambda: seq.alphas[i],
                    range: (seq.betas[i], seq.betas[i + 1]),
                });
            }
        }
        out
    }

    pub fn corners(&self) -> Vec<TableCorner> {
        let mut out = Vec::new();
        for (q, seq) in self.sequences() {
            for i in 1..seq.k() {
                out.push(TableCorner {
                    quadrant: q,
                    point: self.family.point_from_coords(seq.alphas[i], seq.betas[i], q),
                    reflex: false,
                });
                out.push(TableCorner {
                    quadrant: q,
                    point: self.family.point_from_coords(seq.alphas[i], seq.betas[i + 1], q),
                    reflex: true,
                });
            }
        }
        out
    }

    /// All α and β values of all quadrants.
    pub fn parameters(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for (_, seq) in self.sequences() {
            v.extend_from_slice(&seq.alphas);
            v.extend_from_slice(&seq.betas);
        }
        v
    }

    /// Closed outline as one polyline, counter-clockwise from the top of the
    /// vertical axis.
    pub fn outline(&self, per_arc: usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::new();
        // walk quadrants counter-clockwise: -+ , -- , +- , ++ starting at top
        for q in [Quadrant::MP, Quadrant::MM, Quadrant::PM, Quadrant::PP] {
            let seq = self.sequence(q);
            let mut chain = Vec::new();
            // positive-quadrant order: from the vertical axis to the horizontal axis
            for i in 1..=seq.k() {
                let arc = Arc { quadrant: q, kind: ArcKind::Ellipse, lambda: seq.betas[i], range: (seq.alphas[i], seq.alphas[i - 1]) };
                let mut s = arc.sample(&self.family, per_arc);
                s.reverse();
                chain.extend(s);
                if i < seq.k() {
                    let h = Arc { quadrant: q, kind: ArcKind::Hyperbola, lambda: seq.alphas[i], range: (seq.betas[i], seq.betas[i + 1]) };
                    chain.extend(h.sample(&self.family, per_arc));
                }
            }
            // chain runs axis-to-axis away from the vertical axis; quadrants
            // traversed clockwise in the reflected picture need reversal
            if matches!(q, Quadrant::PP | Quadrant::MM) {
                chain.reverse();
            }
            pts.extend(chain);
        }
        pts
    }

    /// Reflects a state sitting on the boundary; fails at corners.
    pub fn reflect_at_boundary(&self, state: &BilliardState) -> Result<BilliardState, TableError> {
        let p = state.position;
        for c in self.corners() {
            if dist(c.point, p) < tolerances::CORNER {
                return Err(TableError::CornerHit { x: p[0], y: p[1] });
            }
        }
        let arc = self
            .arcs()
            .into_iter()
            .filter(|arc| self.on_arc(arc, p, 1e-9))
            .min_by(|u, v| {
                self.family.level(u.lambda, p).abs().total_cmp(&self.family.level(v.lambda, p).abs())
            })
            .ok_or(TableError::NotOnBoundary { x: p[0], y: p[1] })?;
        Ok(reflect(state, Mirror::Conic(arc.lambda), &self.family))
    }

    fn on_arc(&self, arc: &Arc, p: [f64; 2], tol: f64) -> bool {
        let g = arc.quadrant.gamma();
        if g.sx() * p[0] < -tol || g.sy() * p[1] < -tol {
            return false;
        }
        let c = match self.family.elliptic_coords([p[0].abs(), p[1].abs()]) {
            Ok(c) => c,
            Err(_) => return false,
        };
        let (on, free) = match arc.kind {
            ArcKind::Ellipse => (c.l2, c.l1),
            ArcKind::Hyperbola => (c.l1, c.l2),
        };
        (on - arc.lambda).abs() <= tol && free >= arc.range.0 - tol && free <= arc.range.1 + tol
    }

    /// A state tangent to the caustic with parameter `s`, inside the caustic
    /// component; `u` and `v` in [0,1) pick the starting point and the
    /// branch of directions.
    pub fn state_on_caustic(&self, s: f64, u: f64, v: f64) -> Result<BilliardState, TableError> {
        let ConicFamily { a, b } = self.family;
        if !(s > self.marks.top && s < a) || s == b {
            return Err(TableError::NoTangentDirection { s });
        }
        let frac = 0.1 + 0.8 * u.clamp(0.0, 1.0);
        let sign_a = if v < 0.5 { 1.0 } else { -1.0 };
        let sign_b = if (v * 4.0).fract() < 0.5 { 1.0 } else { -1.0 };
        if s < b {
            // a point on the upper vertical axis between the caustic and the table
            let lo = (b - s).sqrt();
            let hi = (b - self.marks.top).sqrt();
            let y = lo + frac * (hi - lo);
            let dx2 = (a - s) / (a - b + y * y);
            if !(0.0..=1.0).contains(&dx2) {
                return Err(TableError::NoTangentDirection { s });
            }
            let dx = sign_a * dx2.sqrt();
            let dy = sign_b * (1.0 - dx2).sqrt();
            Ok(BilliardState::new([0.0, y], [dx, dy]))
        } else {
            // a point on the horizontal axis between the foci inside the caustic
            let lim = (a - s).min(a - b).sqrt();
            let x = (2.0 * frac - 1.0) * 0.9 * lim;
            let dy2 = (s - b) / (a - b - x * x);
            if !(0.0..=1.0).contains(&dy2) {
                return Err(TableError::NoTangentDirection { s });
            }
            let dy = sign_a * dy2.sqrt();
            let dx = sign_b * (1.0 - dy2).sqrt();
            Ok(BilliardState::new([x, 0.0], [dx, dy]))
        }
    }

    /// Serializable description of the table.
    pub fn to_spec(&self) -> TableSpec {
        let part = |q: Quadrant| QuadrantSpec {
            alphas: self.sequence(q).alphas.clone(),
            betas: self.sequence(q).betas.clone(),
        };
        TableSpec {
            a: self.family.a,
            b: self.family.b,
            quadrants: QuadrantsSpec { pp: part(Quadrant::PP), pm: part(Quadrant::PM), mp: part(Quadrant::MP), mm: part(Quadrant::MM) },
        }
    }
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// A conic hit along a ray.
struct Hit {
    t: f64,
    arc: usize,
}

/// Roots of qa t² + qb t + qc in increasing order, skipping grazing rays.
fn ray_roots(qa: f64, qb: f64, qc: f64, grazed: &mut bool) -> Vec<f64> {
    let scale = qb * qb + (4.0 * qa * qc).abs();
    if qa.abs() <= 1e-300 {
        if qb != 0.0 {
            return vec![-qc / qb];
        }
        return vec![];
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc.abs() <= tolerances::TANGENCY * scale {
        *grazed = true;
        return vec![];
    }
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (qb + qb.signum() * sq);
    let mut r = if q != 0.0 { vec![q / qa, qc / q] } else { vec![0.0] };
    r.sort_by(f64::total_cmp);
    r
}

/// Traces the billiard for total length `horizon`.
pub fn billiard_trace(table: &NibbledEllipse, state: &BilliardState, horizon: f64) -> Result<PhysicalTrajectory, TableError> {
    let fam = table.family;
    if !table.contains_with(state.position, 1e-9) {
        return Err(TableError::NotInTable { x: state.position[0], y: state.position[1] });
    }
    let arcs = table.arcs();
    let corners = table.corners();
    let mut st = BilliardState::new(state.position, state.direction);
    let mut last_conic: Option<f64> = None;
    let mut segments = Vec::new();
    let mut remaining = horizon;
    let mut reflections = 0;
    let mut tangencies = 0;
    loop {
        let [px, py] = st.position;
        let [dx, dy] = st.direction;
        let mut best: Option<Hit> = None;
        let mut grazed_any = false;
        for (j, arc) in arcs.iter().enumerate() {
            let am = fam.a - arc.lambda;
            let bm = fam.b - arc.lambda;
            let qa = dx * dx / am + dy * dy / bm;
            let qb = 2.0 * (px * dx / am + py * dy / bm);
            let qc = px * px / am + py * py / bm - 1.0;
            let mut grazed = false;
            let roots = ray_roots(qa, qb, qc, &mut grazed);
            grazed_any |= grazed;
            let same = last_conic == Some(arc.lambda);
            for mut t in roots {
                let t_min = if same { 1e-9 } else { 1e-13 };
                if t <= t_min {
                    continue;
                }
                // one Newton step on the conic equation
                let g = (qa * t + qb) * t + qc;
                let dg = 2.0 * qa * t + qb;
                if dg != 0.0 {
                    t -= g / dg;
                }
                if best.as_ref().is_some_and(|h| h.t <= t) {
                    continue;
                }
                let h = [px + t * dx, py + t * dy];
                if table.on_arc(arc, h, 1e-10) {
                    best = Some(Hit { t, arc: j });
                }
            }
        }
        if grazed_any {
            tangencies += 1;
        }
        let hit = best.ok_or_else(|| {
            TableError::GeometryFailure(format!("no boundary intersection from ({px}, {py}) along ({dx}, {dy})"))
        })?;
        let caustic = caustic_parameter(&st, &fam);
        if hit.t >= remaining {
            let end = [px + remaining * dx, py + remaining * dy];
            segments.push(PhysicalSegment { start: st.position, end, caustic });
            return Ok(PhysicalTrajectory {
                segments,
                status: TraceStatus::TimeExhausted,
                reflections,
                tangencies,
                length: horizon,
            });
        }
        let h = [px + hit.t * dx, py + hit.t * dy];
        segments.push(PhysicalSegment { start: st.position, end: h, caustic });
        remaining -= hit.t;
        if corners.iter().any(|c| dist(c.point, h) < tolerances::CORNER) {
            return Ok(PhysicalTrajectory {
                segments,
                status: TraceStatus::DiedAtCorner,
                reflections,
                tangencies,
                length: horizon - remaining,
            });
        }
        let lambda = arcs[hit.arc].lambda;
        st = reflect(&BilliardState { position: h, direction: st.direction }, Mirror::Conic(lambda), &fam);
        last_conic = Some(lambda);
        reflections += 1;
    }
}

/// JSON form of a table: {"a","b","quadrants":{"pp","pm","mp","mm"}}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub a: f64,
    pub b: f64,
    pub quadrants: QuadrantsSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrantsSpec {
    pub pp: QuadrantSpec,
    pub pm: QuadrantSpec,
    pub mp: QuadrantSpec,
    pub mm: QuadrantSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrantSpec {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl TableSpec {
    pub fn build(&self) -> Result<NibbledEllipse, TableError> {
        let fam = ConicFamily::new(self.a, self.b)?;
        let v = |q: &QuadrantSpec| validate_theta(&q.alphas, &q.betas, &fam);
        build_table(fam, v(&self.quadrants.pp)?, v(&self.quadrants.pm)?, v(&self.quadrants.mp)?, v(&self.quadrants.mm)?)
    }

    /// Same chain in all four quadrants.
    pub fn symmetric(a: f64, b: f64, alphas: Vec<f64>, betas: Vec<f64>) -> TableSpec {
        let q = QuadrantSpec { alphas, betas };
        TableSpec { a, b, quadrants: QuadrantsSpec { pp: q.clone(), pm: q.clone(), mp: q.clone(), mm: q } }
    }
}
