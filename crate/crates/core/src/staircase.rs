//! Right-angle staircase polygons and generalized polygons glued from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symmetry::Gamma;
use crate::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygonError {
    #[error("profile is not a staircase: {0}")]
    ProfileViolation(String),
    #[error("{kind}-glued sides of parts {m} and {m2} differ: {len} vs {len2}")]
    SideLengthMismatch { kind: RelationKind, m: usize, m2: usize, len: f64, len2: f64 },
    #[error("parts {m} ({g}) and {m2} ({g2}) cannot be {kind}-glued")]
    TypeMismatch { kind: RelationKind, m: usize, g: Gamma, m2: usize, g2: Gamma },
    #[error("{kind} relation lists {m}~{m2} but not the reverse")]
    RelationNotSymmetric { kind: RelationKind, m: usize, m2: usize },
    #[error("relation refers to unknown part {0}")]
    UnknownLabel(usize),
    #[error("part label {0} used twice")]
    DuplicateLabel(usize),
    #[error("part {m} is {kind}-related to more than one part")]
    MultiplyRelated { kind: RelationKind, m: usize },
}

/// x_1 < … < x_k and y_1 > … > y_k, all positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseProfile {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl StaircaseProfile {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, PolygonError> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(PolygonError::ProfileViolation(format!("lengths {} and {}", xs.len(), ys.len())));
        }
        if !xs.iter().chain(&ys).all(|v| v.is_finite() && *v > 0.0) {
            return Err(PolygonError::ProfileViolation("entries must be positive".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PolygonError::ProfileViolation(format!("xs not increasing: {xs:?}")));
        }
        if ys.windows(2).any(|w| w[0] <= w[1]) {
            return Err(PolygonError::ProfileViolation(format!("ys not decreasing: {ys:?}")));
        }
        Ok(StaircaseProfile { xs, ys })
    }

    pub fn k(&self) -> usize {
        self.xs.len()
    }

    /// x_i with x_0 = 0, 0 ≤ i ≤ k.
    pub fn x(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.xs[i - 1]
        }
    }

    /// y_i with y_{k+1} = 0, 1 ≤ i ≤ k+1.
    pub fn y(&self, i: usize) -> f64 {
        if i > self.k() {
            0.0
        } else {
            self.ys[i - 1]
        }
    }

    pub fn area(&self) -> f64 {
        (1..=self.k()).map(|i| self.x(i) * (self.y(i) - self.y(i + 1))).sum()
    }

    /// Vertex chain (0,0), (0,y_1), (x_1,y_1), (x_1,y_2), …, (x_k,y_k), (x_k,0).
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        let k = self.k();
        let mut v = vec![[0.0, 0.0], [0.0, self.y(1)]];
        for i in 1..=k {
            v.push([self.x(i), self.y(i)]);
            v.push([self.x(i), self.y(i + 1)]);
        }
        v
    }

    pub fn side_length(&self, side: SideKind) -> f64 {
        let k = self.k();
        match side {
            SideKind::LongV => self.y(1),
            SideKind::ShortH => self.x(1),
            SideKind::StepV(i) => self.y(i) - self.y(i + 1),
            SideKind::StepH(i) => self.x(i) - self.x(i - 1),
            SideKind::ShortV => self.y(k),
            SideKind::LongH => self.x(k),
        }
    }
}

/// Role of a polygon side; side j runs from vertex j to vertex j+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SideKind {
    /// [(0,0),(0,y_1)]
    LongV,
    /// [(0,y_1),(x_1,y_1)]
    ShortH,
    /// [(x_i,y_i),(x_i,y_{i+1})], 1 ≤ i < k
    StepV(usize),
    /// [(x_{i−1},y_i),(x_i,y_i)], 1 < i ≤ k
    StepH(usize),
    /// [(x_k,y_k),(x_k,0)]
    ShortV,
    /// [(x_k,0),(0,0)]
    LongH,
}

impl SideKind {
    /// Side kinds in vertex order for a profile with k steps.
    pub fn sequence(k: usize) -> Vec<SideKind> {
        let mut s = vec![SideKind::LongV, SideKind::ShortH];
        for i in 1..k {
            s.push(SideKind::StepV(i));
            s.push(SideKind::StepH(i + 1));
        }
        s.push(SideKind::ShortV);
        s.push(SideKind::LongH);
        s
    }

    pub fn index(self, k: usize) -> usize {
        match self {
            SideKind::LongV => 0,
            SideKind::ShortH => 1,
            SideKind::StepV(i) => 2 * i,
            SideKind::StepH(i) => 2 * i - 1,
            SideKind::ShortV => 2 * k,
            SideKind::LongH => 2 * k + 1,
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, SideKind::LongV | SideKind::StepV(_) | SideKind::ShortV)
    }
}

/// Role of a polygon vertex; vertex j is the start of side j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CornerKind {
    /// (0,0)
    V00,
    /// (0,y_1)
    V01,
    /// (x_i,y_i), convex
    Diag(usize),
    /// (x_i,y_{i+1}), 1 ≤ i < k, reflex
    Step(usize),
    /// (x_k,0)
    Vk0,
}

impl CornerKind {
    pub fn sequence(k: usize) -> Vec<CornerKind> {
        let mut c = vec![CornerKind::V00, CornerKind::V01];
        for i in 1..=k {
            c.push(CornerKind::Diag(i));
            c.push(if i < k { CornerKind::Step(i) } else { CornerKind::Vk0 });
        }
        c
    }

    pub fn index(self, k: usize) -> usize {
        match self {
            CornerKind::V00 => 0,
            CornerKind::V01 => 1,
            CornerKind::Diag(i) => 2 * i,
            CornerKind::Step(i) => 2 * i + 1,
            CornerKind::Vk0 => 2 * k + 1,
        }
    }

    pub fn interior_angle(self) -> f64 {
        match self {
            CornerKind::Step(_) => 1.5 * std::f64::consts::PI,
            _ => 0.5 * std::f64::consts::PI,
        }
    }
}

impl fmt::Display for CornerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CornerKind::V00 => write!(f, "V00"),
            CornerKind::V01 => write!(f, "V01"),
            CornerKind::Diag(i) => write!(f, "V{i}{i}"),
            CornerKind::Step(i) => write!(f, "V{i}{}", i + 1),
            CornerKind::Vk0 => write!(f, "Vk0"),
        }
    }
}

/// A labelled staircase polygon in orientation γ.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicPolygon {
    pub label: usize,
    pub profile: StaircaseProfile,
    pub gamma: Gamma,
    pub vertices: Vec<[f64; 2]>,
    pub area: f64,
}

pub fn build_basic(profile: StaircaseProfile, gamma: Gamma, label: usize) -> Result<BasicPolygon, PolygonError> {
    let profile = StaircaseProfile::new(profile.xs, profile.ys)?;
    let vertices = profile.vertices().into_iter().map(|p| gamma.apply(p)).collect();
    let area = profile.area();
    Ok(BasicPolygon { label, profile, gamma, vertices, area })
}

impl BasicPolygon {
    pub fn k(&self) -> usize {
        self.profile.k()
    }

    pub fn vertex(&self, c: CornerKind) -> [f64; 2] {
        self.vertices[c.index(self.k())]
    }

    /// Endpoints of a side in vertex order.
    pub fn side(&self, s: SideKind) -> ([f64; 2], [f64; 2]) {
        let n = self.vertices.len();
        let j = s.index(self.k());
        (self.vertices[j], self.vertices[(j + 1) % n])
    }

    /// Closed-polygon membership in the untransformed frame.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let q = self.gamma.apply(p);
        if q[0] < 0.0 || q[1] < 0.0 {
            return false;
        }
        let k = self.k();
        let x = &self.profile;
        (1..=k).any(|i| q[0] <= x.x(i) && q[1] <= x.y(i))
    }

    /// Open-polygon membership.
    pub fn contains_strictly(&self, p: [f64; 2]) -> bool {
        let q = self.gamma.apply(p);
        if q[0] <= 0.0 || q[1] <= 0.0 {
            return false;
        }
        let x = &self.profile;
        (1..=self.k()).any(|i| q[0] < x.x(i) && q[1] < x.y(i))
    }

    pub fn centroid(&self) -> [f64; 2] {
        let x = &self.profile;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 1..=x.k() {
            // strip [0,x_i] × [y_{i+1}, y_i]
            let h = x.y(i) - x.y(i + 1);
            let a = x.x(i) * h;
            cx += a * 0.5 * x.x(i);
            cy += a * 0.5 * (x.y(i) + x.y(i + 1));
        }
        let area = x.area();
        self.gamma.apply([cx / area, cy / area])
    }

    /// Axis-aligned bounding box (min, max).
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let c = self.gamma.apply([self.profile.x(self.k()), self.profile.y(1)]);
        ([c[0].min(0.0), c[1].min(0.0)], [c[0].max(0.0), c[1].max(0.0)])
    }
}

/// The four gluing scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    /// long vertical sides
    V,
    /// long horizontal sides
    H,
    /// short vertical sides
    #[serde(rename = "v")]
    ShortV,
    /// short horizontal sides
    #[serde(rename = "h")]
    ShortH,
}

impl RelationKind {
    pub const ALL: [RelationKind; 4] = [RelationKind::V, RelationKind::H, RelationKind::ShortV, RelationKind::ShortH];

    pub fn index(self) -> usize {
        match self {
            RelationKind::V => 0,
            RelationKind::H => 1,
            RelationKind::ShortV => 2,
            RelationKind::ShortH => 3,
        }
    }

    pub fn side(self) -> SideKind {
        match self {
            RelationKind::V => SideKind::LongV,
            RelationKind::H => SideKind::LongH,
            RelationKind::ShortV => SideKind::ShortV,
            RelationKind::ShortH => SideKind::ShortH,
        }
    }

    /// Vertical gluings pair orientations of opposite x sign, horizontal ones
    /// opposite y sign.
    pub fn is_vertical(self) -> bool {
        matches!(self, RelationKind::V | RelationKind::ShortV)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelationKind::V => "V",
            RelationKind::H => "H",
            RelationKind::ShortV => "v",
            RelationKind::ShortH => "h",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        RelationKind::ALL.into_iter().find(|k| k.symbol() == s)
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Four partner maps. Missing entries mean the label is related to itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Relations {
    maps: [BTreeMap<usize, usize>; 4],
}

impl Relations {
    pub fn new() -> Self {
        Self::default()
    }

    /// Symmetric relations from unordered pairs.
    pub fn from_pairs(pairs: &[(RelationKind, usize, usize)]) -> Result<Self, PolygonError> {
        let mut r = Relations::new();
        for &(kind, m, m2) in pairs {
            r.insert(kind, m, m2)?;
        }
        Ok(r)
    }

    pub fn insert(&mut self, kind: RelationKind, m: usize, m2: usize) -> Result<(), PolygonError> {
        let map = &mut self.maps[kind.index()];
        for (u, v) in [(m, m2), (m2, m)] {
            match map.get(&u) {
                Some(&w) if w != v => return Err(PolygonError::MultiplyRelated { kind, m: u }),
                _ => {
                    map.insert(u, v);
                }
            }
        }
        Ok(())
    }

    /// Directed pairs as given; used to test symmetry of external input.
    pub fn from_directed(pairs: &[(RelationKind, usize, usize)]) -> Result<Self, PolygonError> {
        let mut r = Relations::new();
        for &(kind, m, m2) in pairs {
            let map = &mut r.maps[kind.index()];
            if map.get(&m).is_some_and(|&w| w != m2) {
                return Err(PolygonError::MultiplyRelated { kind, m });
            }
            map.insert(m, m2);
        }
        for kind in RelationKind::ALL {
            for (&m, &m2) in &r.maps[kind.index()] {
                if r.maps[kind.index()].get(&m2) != Some(&m) {
                    return Err(PolygonError::RelationNotSymmetric { kind, m, m2 });
                }
            }
        }
        Ok(r)
    }

    pub fn partner(&self, kind: RelationKind, m: usize) -> usize {
        self.maps[kind.index()].get(&m).copied().unwrap_or(m)
    }

    /// Unordered pairs with m ≤ m′, self-relations omitted.
    pub fn pairs(&self, kind: RelationKind) -> Vec<(usize, usize)> {
        self.maps[kind.index()].iter().filter(|(m, m2)| m < m2).map(|(&m, &m2)| (m, m2)).collect()
    }

    /// Labels relabelled through `f`.
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut r = Relations::new();
        for kind in RelationKind::ALL {
            for (&m, &m2) in &self.maps[kind.index()] {
                r.maps[kind.index()].insert(f(m), f(m2));
            }
        }
        r
    }
}

/// Parts glued by the four relations. No global embedding is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPolygon {
    pub parts: BTreeMap<usize, BasicPolygon>,
    pub relations: Relations,
    /// Connected components as sorted label lists.
    pub components: Vec<Vec<usize>>,
}

pub fn build_generalized(parts: Vec<BasicPolygon>, relations: Relations) -> Result<GeneralizedPolygon, PolygonError> {
    let mut map = BTreeMap::new();
    for p in parts {
        let l = p.label;
        if map.insert(l, p).is_some() {
            return Err(PolygonError::DuplicateLabel(l));
        }
    }
    for kind in RelationKind::ALL {
        for (&m, &m2) in &relations.maps[kind.index()] {
            if relations.partner(kind, m2) != m {
                return Err(PolygonError::RelationNotSymmetric { kind, m, m2 });
            }
            let p = map.get(&m).ok_or(PolygonError::UnknownLabel(m))?;
            let q = map.get(&m2).ok_or(PolygonError::UnknownLabel(m2))?;
            if m == m2 {
                continue;
            }
            let opposite = if kind.is_vertical() {
                p.gamma.flips_x() != q.gamma.flips_x()
            } else {
                p.gamma.flips_y() != q.gamma.flips_y()
            };
            if !opposite {
                return Err(PolygonError::TypeMismatch { kind, m, g: p.gamma, m2, g2: q.gamma });
            }
            let len = p.profile.side_length(kind.side());
            let len2 = q.profile.side_length(kind.side());
            if (len - len2).abs() > tolerances::SIDE_LENGTH {
                return Err(PolygonError::SideLengthMismatch { kind, m, m2, len, len2 });
            }
        }
    }
    let components = components(map.keys().copied(), &relations);
    Ok(GeneralizedPolygon { parts: map, relations, components })
}

fn components(labels: impl Iterator<Item = usize>, rel: &Relations) -> Vec<Vec<usize>> {
    let labels: Vec<usize> = labels.collect();
    let index: BTreeMap<usize, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut parent: Vec<usize> = (0..labels.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for kind in RelationKind::ALL {
        for (m, m2) in rel.pairs(kind) {
            let (a, b) = (find(&mut parent, index[&m]), find(&mut parent, index[&m2]));
            parent[a] = b;
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(l);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

impl GeneralizedPolygon {
    pub fn area(&self) -> f64 {
        self.parts.values().map(|p| p.area).sum()
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    pub fn labels(&self) -> Vec<usize> {
        self.parts.keys().copied().collect()
    }

    pub fn part(&self, m: usize) -> &BasicPolygon {
        &self.parts[&m]
    }

    /// The sub-polygon spanned by one component.
    pub fn restrict(&self, labels: &[usize]) -> Result<GeneralizedPolygon, PolygonError> {
        let set: BTreeSet<usize> = labels.iter().copied().collect();
        let parts = set.iter().map(|m| self.parts[m].clone()).collect();
        let mut rel = Relations::new();
        for kind in RelationKind::ALL {
            for (m, m2) in self.relations.pairs(kind) {
                if set.contains(&m) && set.contains(&m2) {
                    rel.insert(kind, m, m2)?;
                }
            }
        }
        build_generalized(parts, rel)
    }

    pub fn combinatorial_data(&self) -> CombinatorialData {
        let labels = self.labels();
        let relations = RelationKind::ALL.map(|kind| {
            labels.iter().map(|&m| (m, self.relations.partner(kind, m))).collect::<BTreeSet<_>>()
        });
        CombinatorialData {
            gammas: labels.iter().map(|m| self.parts[m].gamma).collect(),
            ks: labels.iter().map(|m| self.parts[m].k()).collect(),
            labels,
            relations,
        }
    }

    pub fn to_spec(&self) -> PolygonSpec {
        PolygonSpec {
            parts: self
                .parts
                .values()
                .map(|p| PartSpec { label: p.label, gamma: p.gamma, xs: p.profile.xs.clone(), ys: p.profile.ys.clone() })
                .collect(),
            relations: RelationKind::ALL
                .into_iter()
                .map(|k| (k, self.relations.pairs(k).into_iter().map(|(m, m2)| [m, m2]).collect()))
                .collect(),
        }
    }
}

/// Labels, orientations, step counts and the relations with self-loops made
/// explicit. Two polygons with equal data differ only in lengths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombinatorialData {
    pub labels: Vec<usize>,
    pub gammas: Vec<Gamma>,
    pub ks: Vec<usize>,
    /// Indexed V, H, v, h.
    pub relations: [BTreeSet<(usize, usize)>; 4],
}

impl CombinatorialData {
    pub fn relation(&self, kind: RelationKind) -> &BTreeSet<(usize, usize)> {
        &self.relations[kind.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub label: usize,
    pub gamma: Gamma,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

/// Serialized form of a generalized polygon; relation lists hold unordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonSpec {
    pub parts: Vec<PartSpec>,
    #[serde(default)]
    pub relations: BTreeMap<RelationKind, Vec<[usize; 2]>>,
}

impl PolygonSpec {
    pub fn build(&self) -> Result<GeneralizedPolygon, PolygonError> {
        let parts = self
            .parts
            .iter()
            .map(|p| build_basic(StaircaseProfile { xs: p.xs.clone(), ys: p.ys.clone() }, p.gamma, p.label))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rel = Relations::new();
        for (&kind, pairs) in &self.relations {
            for &[m, m2] in pairs {
                rel.insert(kind, m, m2)?;
            }
        }
        build_generalized(parts, rel)
    }
}
