//! Interval exchange transformations and the recurrence diagnostic.
//!
//! Conventions: intervals are numbered 1..=d; interval j is [b_{j−1}, b_j)
//! and lands as the π(j)-th interval of the image, [t_{π(j)−1}, t_{π(j)}).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IetError {
    #[error("need at least two intervals, got {0}")]
    TooFewIntervals(usize),
    #[error("permutation {0:?} is not a bijection of 1..=d")]
    InvalidPermutation(Vec<usize>),
    #[error("interval length {0} is not positive")]
    NonPositiveLength(f64),
    #[error("lengths and permutation differ in size ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("{x} is outside [0, {total})")]
    OutOfDomain { x: f64, total: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iet {
    /// π(j) for j = 1..=d, stored at index j−1.
    pub perm: Vec<usize>,
    pub lengths: Vec<f64>,
}

/// Which orbit points enter ε_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EpsilonOptions {
    /// Also measure distances to 0 and |λ|.
    pub include_endpoints: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceRecord {
    pub min_tail: f64,
    pub argmin_n: usize,
    pub connection_found: bool,
    /// First n with ε_n below the connection tolerance.
    pub connection_n: Option<usize>,
}

impl Iet {
    pub fn new(perm: Vec<usize>, lengths: Vec<f64>) -> Result<Self, IetError> {
        let d = perm.len();
        if d != lengths.len() {
            return Err(IetError::SizeMismatch(lengths.len(), d));
        }
        if d < 2 {
            return Err(IetError::TooFewIntervals(d));
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p == 0 || p > d || seen[p - 1] {
                return Err(IetError::InvalidPermutation(perm));
            }
            seen[p - 1] = true;
        }
        if let Some(&l) = lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(IetError::NonPositiveLength(l));
        }
        Ok(Iet { perm, lengths })
    }

    /// Two-interval exchange, i.e. a rotation by λ_2.
    pub fn rotation(l1: f64, l2: f64) -> Result<Self, IetError> {
        Iet::new(vec![2, 1], vec![l1, l2])
    }

    pub fn d(&self) -> usize {
        self.perm.len()
    }

    /// |λ|.
    pub fn total(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn pi(&self, j: usize) -> usize {
        self.perm[j - 1]
    }

    pub fn pi_inv(&self, r: usize) -> usize {
        self.perm.iter().position(|&p| p == r).expect("bijection") + 1
    }

    /// b_j = λ_1 + … + λ_j, with b_0 = 0.
    pub fn b(&self, j: usize) -> f64 {
        if j == self.d() {
            return self.total();
        }
        self.lengths[..j].iter().sum()
    }

    /// t_j = λ_{π⁻¹(1)} + … + λ_{π⁻¹(j)}, with t_0 = 0.
    pub fn t(&self, j: usize) -> f64 {
        if j == self.d() {
            return self.total();
        }
        (1..=j).map(|r| self.lengths[self.pi_inv(r) - 1]).sum()
    }

    pub fn normalized(&self) -> Iet {
        let s = self.total();
        Iet { perm: self.perm.clone(), lengths: self.lengths.iter().map(|l| l / s).collect() }
    }

    pub fn scaled(&self, c: f64) -> Iet {
        Iet { perm: self.perm.clone(), lengths: self.lengths.iter().map(|l| l * c).collect() }
    }

    /// Precomputed b_j and t_{π(j)} − b_j for fast iteration.
    fn tables(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.d();
        let bs: Vec<f64> = (0..=d).map(|j| self.b(j)).collect();
        let ts: Vec<f64> = (0..=d).map(|j| self.t(j)).collect();
        let shift = (1..=d).map(|j| ts[self.pi(j)] - bs[j]).collect();
        (bs, shift)
    }

    pub fn apply(&self, x: f64) -> Result<f64, IetError> {
        let (bs, shift) = self.tables();
        let total = bs[self.d()];
        if !(0.0..total).contains(&x) {
            return Err(IetError::OutOfDomain { x, total });
        }
        Ok(step(&bs, &shift, x))
    }

    /// ε_0, …, ε_n.
    pub fn epsilon_sequence(&self, n: usize, opts: EpsilonOptions) -> Vec<f64> {
        let (bs, shift) = self.tables();
        let d = self.d();
        let total = bs[d];
        let mut points = SortedPoints::default();
        if opts.include_endpoints {
            points.insert(0.0);
            points.insert(total);
        }
        let mut orbit: Vec<f64> = bs[1..d].to_vec();
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            if k > 0 {
                for x in orbit.iter_mut() {
                    *x = step(&bs, &shift, *x);
                }
            }
            for &x in &orbit {
                points.insert(x);
            }
            out.push(points.min_gap.unwrap_or(total));
        }
        out
    }

    pub fn epsilon_n(&self, n: usize, opts: EpsilonOptions) -> f64 {
        *self.epsilon_sequence(n, opts).last().expect("n+1 entries")
    }

    /// min of n·ε_n over n ∈ [big_n − window, big_n].
    pub fn recurrence_diagnostic(&self, big_n: usize, window: usize, opts: EpsilonOptions) -> RecurrenceRecord {
        let eps = self.epsilon_sequence(big_n, opts);
        let connection_n = eps.iter().position(|&e| e < tolerances::CONNECTION);
        let lo = big_n.saturating_sub(window).max(1);
        let (argmin_n, min_tail) = (lo..=big_n).map(|n| (n, n as f64 * eps[n])).fold((lo, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        RecurrenceRecord { min_tail, argmin_n, connection_found: connection_n.is_some(), connection_n }
    }

    /// First (n, i, j) with |Tⁿ b_i − b_j| ≤ tol, n = 1..=big_n.
    pub fn has_connection(&self, big_n: usize, tol: f64) -> Option<(usize, usize, usize)> {
        let (bs, shift) = self.tables();
        let d = self.d();
        let mut orbit: Vec<f64> = bs[1..d].to_vec();
        for n in 1..=big_n {
            for x in orbit.iter_mut() {
                *x = step(&bs, &shift, *x);
            }
            for (i, &x) in orbit.iter().enumerate() {
                if let Some(j) = (1..d).find(|&j| (x - bs[j]).abs() <= tol) {
                    return Some((n, i + 1, j));
                }
            }
        }
        None
    }

    /// Image intervals [t_{π(j)−1}, t_{π(j)}) in domain order.
    pub fn image_intervals(&self) -> Vec<(f64, f64)> {
        (1..=self.d()).map(|j| (self.t(self.pi(j) - 1), self.t(self.pi(j)))).collect()
    }
}

fn step(bs: &[f64], shift: &[f64], x: f64) -> f64 {
    // interval j with b_{j−1} ≤ x < b_j
    let j = bs[1..].partition_point(|&b| b <= x).min(shift.len() - 1);
    let y = x + shift[j];
    if y < 0.0 {
        0.0
    } else {
        y
    }
}

/// Multiset of points with the running minimal gap.
#[derive(Default)]
struct SortedPoints {
    map: BTreeMap<u64, usize>,
    min_gap: Option<f64>,
}

impl SortedPoints {
    fn insert(&mut self, x: f64) {
        // bit patterns of non-negative floats sort like the floats
        let key = (x + 0.0).to_bits();
        let mut gap = f64::INFINITY;
        if let Some(c) = self.map.get_mut(&key) {
            *c += 1;
            gap = 0.0;
        } else {
            if let Some((&k, _)) = self.map.range(..key).next_back() {
                gap = gap.min(x - f64::from_bits(k));
            }
            if let Some((&k, _)) = self.map.range(key..).next() {
                gap = gap.min(f64::from_bits(k) - x);
            }
            self.map.insert(key, 1);
        }
        if gap.is_finite() {
            self.min_gap = Some(self.min_gap.map_or(gap, |g| g.min(gap)));
        }
    }
}
