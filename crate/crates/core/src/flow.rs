//! The slope-one translation flow on an unfolded surface: traces, saddle
//! connections, first-return maps to a horizontal transversal and Birkhoff
//! averages over boxes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::iet::{Iet, IetError};
use crate::surface::{
    enumerate_dbe, pairing, walk, walk_until, Segment, SideRef, SurfaceError, SurfacePoint, TranslationSurface, Walk, WalkOptions, WalkStatus,
};
use crate::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("trajectory reached singular point {class} after length {at}")]
    HitSingularity { at: f64, class: usize },
    #[error("orbit from x={x} did not return to the transversal within {crossings} crossings")]
    NotGlobalTransversal { x: f64, crossings: usize },
    #[error("return-map interval of length {length:e} near x={x}: a separatrix runs into a corner")]
    SeparatrixHitsCorner { x: f64, length: f64 },
    #[error("transversal is not interior to polygon {polygon}")]
    BadTransversal { polygon: usize },
    #[error("box is not inside polygon {polygon}")]
    BadBox { polygon: usize },
    #[error("start point {z} is not inside polygon {polygon}")]
    BadStart { polygon: usize, z: Complex64 },
    #[error("length {0} must be positive")]
    BadLength(f64),
    #[error("return map is inconsistent: {0}")]
    InconsistentReturn(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Iet(#[from] IetError),
}

impl FlowError {
    pub fn is_internal(&self) -> bool {
        match self {
            FlowError::InconsistentReturn(_) => true,
            FlowError::Surface(e) => e.is_internal(),
            _ => false,
        }
    }
}

/// Unit vector of the flow direction.
pub fn diagonal() -> Complex64 {
    Complex64::new(1.0, 1.0) / 2f64.sqrt()
}

fn check_start(m: &TranslationSurface, start: SurfacePoint) -> Result<(), FlowError> {
    if start.polygon >= m.polygons.len() || !m.polygons[start.polygon].contains(start.z, tolerances::FLAT_CORNER) {
        return Err(FlowError::BadStart { polygon: start.polygon, z: start.z });
    }
    Ok(())
}

/// Flow for arc length `length`; regular corners are passed straight through.
pub fn trace(m: &TranslationSurface, start: SurfacePoint, length: f64) -> Result<Walk, FlowError> {
    if !(length > 0.0) {
        return Err(FlowError::BadLength(length));
    }
    check_start(m, start)?;
    let w = walk(m, start, diagonal(), length, WalkOptions::default())?;
    match w.status {
        WalkStatus::Singular { class, at } => Err(FlowError::HitSingularity { at, class }),
        _ => Ok(w),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleConnection {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub holonomy: Complex64,
    /// Polygon and chart position of the starting corner.
    pub start: SurfacePoint,
}

/// Traces every outgoing separatrix up to `l_max` and keeps those that end
/// on a singular point.
pub fn find_saddle_connections(m: &TranslationSurface, l_max: f64) -> Result<Vec<SaddleConnection>, FlowError> {
    let opts = WalkOptions { corner_tol: tolerances::SADDLE_HIT, record: false, ..WalkOptions::default() };
    let mut out = Vec::new();
    for b in enumerate_dbe(m).b {
        let start = SurfacePoint { polygon: b.polygon, z: m.polygons[b.polygon].vertex(b.corner) };
        let w = walk(m, start, diagonal(), l_max, opts)?;
        if let WalkStatus::Singular { class, at } = w.status {
            out.push(SaddleConnection { from: b.class, to: class, length: at, holonomy: at * diagonal(), start });
        }
    }
    Ok(out)
}

/// Horizontal segment y = `y`, `x_lo` < x < `x_hi` inside one polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transversal {
    pub polygon: usize,
    pub y: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl Transversal {
    pub fn new(m: &TranslationSurface, polygon: usize, y: f64, x_lo: f64, x_hi: f64) -> Result<Self, FlowError> {
        let bad = FlowError::BadTransversal { polygon };
        let p = m.polygons.get(polygon).ok_or(bad.clone())?;
        if !(x_lo < x_hi) {
            return Err(bad);
        }
        // the polygon is a union of rectangles containing the origin corner,
        // so the closed chord is inside once both ends are
        let ends = [Complex64::new(x_lo, y), Complex64::new(x_hi, y)];
        if !ends.iter().all(|&z| p.contains_strictly(z)) || ends[0].re * ends[1].re < 0.0 {
            return Err(bad);
        }
        Ok(Transversal { polygon, y, x_lo, x_hi })
    }

    /// Widest horizontal chord near the centroid, shrunk by 1% and moved off
    /// the centroid by an irrational fraction of the height.
    pub fn through_centroid(m: &TranslationSurface, polygon: usize) -> Result<Self, FlowError> {
        let p = m.polygons.get(polygon).ok_or(FlowError::BadTransversal { polygon })?;
        let c = p.centroid();
        let nudge = (2f64.sqrt() - 1.0) * 1e-2 * p.y(1);
        let v = (c.im.abs() + nudge).min(0.999 * p.y(1));
        // widest step still above height v
        let i = (1..=p.k()).rev().find(|&i| p.y(i) > v).ok_or(FlowError::BadTransversal { polygon })?;
        let w = p.x(i);
        let (sx, sy) = (p.gamma.sx(), p.gamma.sy());
        let (lo, hi) = (0.005 * w, 0.995 * w);
        let (x_lo, x_hi) = if sx > 0.0 { (lo, hi) } else { (-hi, -lo) };
        Transversal::new(m, polygon, sy * v, x_lo, x_hi)
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn point(&self, x: f64) -> SurfacePoint {
        SurfacePoint { polygon: self.polygon, z: Complex64::new(x, self.y) }
    }

    /// Arc-length offset at which a slope-one piece crosses the transversal
    /// (upwards if `up`, else downwards), excluding its start.
    fn hit(&self, seg: &Segment, up: bool) -> Option<f64> {
        if seg.polygon != self.polygon {
            return None;
        }
        let (y0, y1) = (seg.start.im, seg.end.im);
        let crosses = if up { y0 < self.y && self.y <= y1 } else { y0 > self.y && self.y >= y1 };
        if !crosses {
            return None;
        }
        let x = seg.start.re + (self.y - y0) * (seg.end.re - seg.start.re) / (y1 - y0);
        (self.x_lo <= x && x <= self.x_hi).then(|| (self.y - y0).abs() * 2f64.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingCount {
    pub from: SideRef,
    pub to: SideRef,
    pub datum: Complex64,
    pub count: usize,
}

/// First-return data of the flow to a transversal.
#[derive(Debug, Clone, Serialize)]
pub struct ReturnSystem {
    pub transversal: Transversal,
    pub iet: Iet,
    /// Interior discontinuities in transversal coordinates (x − x_lo).
    pub discontinuities: Vec<f64>,
    pub return_times: Vec<f64>,
    pub crossing_counts: Vec<Vec<CrossingCount>>,
    /// (1+i)·⟨ω, loop_j⟩; the real part is b_j − t_{π(j)}.
    pub homology_displacements: Vec<Complex64>,
    /// Outgoing-to-incoming connections met while locating discontinuities.
    pub saddle_connections: usize,
}

impl ReturnSystem {
    /// Largest |Re(displacement_j) − (b_j − t_{π(j)})|.
    pub fn homology_defect(&self) -> f64 {
        (1..=self.iet.d())
            .map(|j| (self.homology_displacements[j - 1].re - (self.iet.b(j) - self.iet.t(self.iet.pi(j)))).abs())
            .fold(0.0, f64::max)
    }
}

fn to_transversal(m: &TranslationSurface, tr: &Transversal, start: SurfacePoint, up: bool, max_crossings: usize) -> Result<Walk, FlowError> {
    let dir = if up { diagonal() } else { -diagonal() };
    let opts = WalkOptions { max_crossings, ..WalkOptions::default() };
    Ok(walk_until(m, start, dir, f64::INFINITY, opts, |seg| tr.hit(seg, up))?)
}

/// First-return interval exchange of the slope-one flow on `tr`.
pub fn first_return_iet(m: &TranslationSurface, tr: &Transversal, max_crossings: usize) -> Result<ReturnSystem, FlowError> {
    // backward from every incoming separatrix and from both ends of I
    let mut starts: Vec<SurfacePoint> = enumerate_dbe(m).e.iter().map(|e| SurfacePoint { polygon: e.polygon, z: m.polygons[e.polygon].vertex(e.corner) }).collect();
    starts.push(tr.point(tr.x_lo));
    starts.push(tr.point(tr.x_hi));
    let mut cuts = Vec::new();
    let mut saddle_connections = 0;
    for s in starts {
        let w = to_transversal(m, tr, s, false, max_crossings)?;
        match w.status {
            WalkStatus::Stopped { .. } => cuts.push(w.end.z.re),
            WalkStatus::Singular { .. } => saddle_connections += 1,
            WalkStatus::CrossingLimit { .. } => return Err(FlowError::NotGlobalTransversal { x: s.z.re, crossings: max_crossings }),
            _ => return Err(FlowError::InconsistentReturn(format!("backward trace ended with {:?}", w.status))),
        }
    }
    cuts.retain(|&x| x > tr.x_lo && x < tr.x_hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= tolerances::CONNECTION * tr.width());
    let mut edges = vec![tr.x_lo];
    edges.extend(&cuts);
    edges.push(tr.x_hi);
    for w in edges.windows(2) {
        if w[1] - w[0] < tolerances::MIN_IET_INTERVAL {
            return Err(FlowError::SeparatrixHitsCorner { x: w[0], length: w[1] - w[0] });
        }
    }
    let d = edges.len() - 1;
    let mut shifts = Vec::with_capacity(d);
    let mut return_times = Vec::with_capacity(d);
    let mut crossing_counts = Vec::with_capacity(d);
    let mut homology_displacements = Vec::with_capacity(d);
    for j in 0..d {
        let (lo, hi) = (edges[j], edges[j + 1]);
        let mut last_err = None;
        let mut found = None;
        for frac in [0.5, 0.381_966_011_250_105, 0.618_033_988_749_895, 0.236_067_977_499_79, 0.763_932_022_500_21] {
            let x = lo + frac * (hi - lo);
            let w = to_transversal(m, tr, tr.point(x), true, max_crossings)?;
            let h = match w.status {
                WalkStatus::Stopped { at } => at,
                WalkStatus::CrossingLimit { .. } => return Err(FlowError::NotGlobalTransversal { x, crossings: max_crossings }),
                s => return Err(FlowError::InconsistentReturn(format!("forward orbit of an interior point ended with {s:?}"))),
            };
            let tx = w.end.z.re;
            // loop: along the flow to T(x), then back along I
            match pairing(m, tr.point(x), &[h * diagonal(), Complex64::new(x - tx, 0.0)]) {
                Ok(p) => {
                    found = Some((x, tx, h, w, p.value));
                    break;
                }
                Err(SurfaceError::CornerCrossing { .. }) => last_err = Some(SurfaceError::CornerCrossing { polygon: tr.polygon, distance: 0.0 }),
                Err(e) => return Err(e.into()),
            }
        }
        let (x, tx, h, w, value) = match found {
            Some(f) => f,
            None => return Err(last_err.expect("at least one attempt").into()),
        };
        shifts.push(tx - x);
        return_times.push(h);
        let mut counts: BTreeMap<(SideRef, SideRef), (Complex64, usize)> = BTreeMap::new();
        for c in &w.crossings {
            counts.entry((c.from, c.to)).or_insert((c.datum, 0)).1 += 1;
        }
        crossing_counts.push(counts.into_iter().map(|((from, to), (datum, count))| CrossingCount { from, to, datum, count }).collect());
        homology_displacements.push(Complex64::new(1.0, 1.0) * value);
    }
    // order of the image intervals gives π
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| (edges[a] + shifts[a]).total_cmp(&(edges[b] + shifts[b])));
    let mut perm = vec![0; d];
    let tol = 1e-9 * tr.width().max(1.0);
    let mut cursor = tr.x_lo;
    for (rank, &j) in order.iter().enumerate() {
        perm[j] = rank + 1;
        let start = edges[j] + shifts[j];
        if (start - cursor).abs() > tol {
            return Err(FlowError::InconsistentReturn(format!("image of interval {} starts at {start}, expected {cursor}", j + 1)));
        }
        cursor = edges[j + 1] + shifts[j];
    }
    if (cursor - tr.x_hi).abs() > tol {
        return Err(FlowError::InconsistentReturn(format!("images end at {cursor}, expected {}", tr.x_hi)));
    }
    let lengths = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let iet = Iet::new(perm, lengths)?;
    Ok(ReturnSystem {
        transversal: *tr,
        iet,
        discontinuities: cuts.iter().map(|x| x - tr.x_lo).collect(),
        return_times,
        crossing_counts,
        homology_displacements,
        saddle_connections,
    })
}

/// Axis-aligned box in the chart of one polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatBox {
    pub polygon: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl FlatBox {
    pub fn new(m: &TranslationSurface, polygon: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, FlowError> {
        let p = m.polygons.get(polygon).ok_or(FlowError::BadBox { polygon })?;
        let tol = 1e-12 * p.diameter();
        let corners = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)];
        if !(x0 < x1 && y0 < y1) || !corners.iter().all(|&(x, y)| p.contains(Complex64::new(x, y), tol)) {
            return Err(FlowError::BadBox { polygon });
        }
        Ok(FlatBox { polygon, x0, x1, y0, y1 })
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Arc length of a straight piece inside the box.
    pub fn clip(&self, seg: &Segment) -> f64 {
        if seg.polygon != self.polygon {
            return 0.0;
        }
        let d = seg.end - seg.start;
        let len = d.norm();
        if len == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for (p, v, a, b) in [(seg.start.re, d.re, self.x0, self.x1), (seg.start.im, d.im, self.y0, self.y1)] {
            if v == 0.0 {
                if p < a || p > b {
                    return 0.0;
                }
            } else {
                let (t0, t1) = ((a - p) / v, (b - p) / v);
                lo = lo.max(t0.min(t1));
                hi = hi.min(t0.max(t1));
            }
        }
        (hi - lo).max(0.0) * len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirkhoffResult {
    pub averages: Vec<f64>,
    /// Time actually flowed; less than requested if a singularity was hit.
    pub time: f64,
    pub hit_singularity: bool,
}

/// Fraction of the time in [0, T] spent in each box.
pub fn birkhoff_average(m: &TranslationSurface, boxes: &[FlatBox], start: SurfacePoint, time: f64) -> Result<BirkhoffResult, FlowError> {
    if !(time > 0.0) {
        return Err(FlowError::BadLength(time));
    }
    check_start(m, start)?;
    let mut inside = vec![0.0; boxes.len()];
    let opts = WalkOptions { record: false, ..WalkOptions::default() };
    let w = walk_until(m, start, diagonal(), time, opts, |seg| {
        for (acc, b) in inside.iter_mut().zip(boxes) {
            *acc += b.clip(seg);
        }
        None
    })?;
    let (elapsed, hit) = match w.status {
        WalkStatus::Completed => (time, false),
        WalkStatus::Singular { at, .. } => (at, true),
        s => return Err(FlowError::InconsistentReturn(format!("averaging walk ended with {s:?}"))),
    };
    if elapsed <= 0.0 {
        return Err(FlowError::HitSingularity { at: 0.0, class: 0 });
    }
    Ok(BirkhoffResult { averages: inside.iter().map(|t| t / elapsed).collect(), time: elapsed, hit_singularity: hit })
}

/// Distinct polygons met by a walk.
pub fn polygons_visited(w: &Walk) -> usize {
    let mut seen: Vec<usize> = w.segments.iter().map(|s| s.polygon).collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}
