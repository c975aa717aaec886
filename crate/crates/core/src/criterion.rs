//! Wronskian and bracket checks over a parameter interval.
//!
//! On every grid point the Wronskian of X ∪ Y ∪ {ℓ} must be positive and the
//! brackets [x,ℓ], [y,ℓ] must carry the signs of the regime:
//! elliptic [x,ℓ] ≤ 0 < [y,ℓ], hyperbolic [x,ℓ] ≥ 0 > [y,ℓ].

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conic::NibbledEllipse;
use crate::flattening::{xy_families, FlattenError, Families, ParamInterval};
use crate::quadrature::{ell_interval, regime, AffineCombination, Estimate, Interval, Quadrature, QuadratureError, Regime};
use crate::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriterionError {
    #[error("empty function family")]
    EmptyFamily,
    #[error("grid needs at least one point")]
    EmptyGrid,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
}

impl CriterionError {
    pub fn is_internal(&self) -> bool {
        match self {
            CriterionError::Quadrature(e) => e.is_internal(),
            CriterionError::Flatten(e) => e.is_internal(),
            _ => false,
        }
    }
}

/// Outcome of one sign test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Pass,
    Fail,
    Inconclusive,
}

impl Check {
    fn and(self, other: Check) -> Check {
        match (self, other) {
            (Check::Fail, _) | (_, Check::Fail) => Check::Fail,
            (Check::Inconclusive, _) | (_, Check::Inconclusive) => Check::Inconclusive,
            _ => Check::Pass,
        }
    }
}

/// value > 0, with `value` required to clear the error by the sign margin.
pub fn strictly_positive(e: Estimate) -> Check {
    if e.value > tolerances::SIGN_MARGIN * e.error {
        Check::Pass
    } else if e.value < -e.error {
        Check::Fail
    } else {
        Check::Inconclusive
    }
}

/// value ≤ 0 within the weak band.
pub fn weakly_negative(e: Estimate) -> Check {
    if e.value <= tolerances::WEAK_BAND {
        Check::Pass
    } else if e.value > tolerances::WEAK_BAND + e.error {
        Check::Fail
    } else {
        Check::Inconclusive
    }
}

fn neg(e: Estimate) -> Estimate {
    Estimate { value: -e.value, error: e.error }
}

fn max_order(fs: &[AffineCombination]) -> usize {
    fs.len().saturating_sub(1)
}

/// |det[g_k^{(j)}(s)]| with a first-order error bound from the cofactors.
pub fn wronskian(q: &Quadrature, fs: &[AffineCombination], s: f64) -> Result<Estimate, CriterionError> {
    let n = fs.len();
    if n == 0 {
        return Err(CriterionError::EmptyFamily);
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut err = DMatrix::<f64>::zeros(n, n);
    for (col, f) in fs.iter().enumerate() {
        for row in 0..n {
            let e = f.eval(q, s, row)?;
            a[(row, col)] = e.value;
            // rounding in the elimination acts like a relative entry perturbation
            err[(row, col)] = e.error + 4.0 * n as f64 * f64::EPSILON * e.value.abs();
        }
    }
    // row scaling keeps the elimination well balanced and rescales the
    // determinant and its error bound alike
    let mut scale = 1.0f64;
    for row in 0..n {
        let m = (0..n).map(|c| a[(row, c)].abs()).fold(0.0, f64::max);
        if m > 0.0 {
            for c in 0..n {
                a[(row, c)] /= m;
                err[(row, c)] /= m;
            }
            scale *= m;
        }
    }
    let det = a.clone().determinant();
    let mut bound = 0.0;
    if n == 1 {
        bound = err[(0, 0)];
    } else {
        for i in 0..n {
            for j in 0..n {
                bound += cofactor(&a, i, j).abs() * err[(i, j)];
            }
        }
    }
    Ok(Estimate { value: det.abs() * scale, error: bound * scale })
}

fn cofactor(a: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    a.clone().remove_row(i).remove_column(j).determinant()
}

/// [f,g](s) = f′(s)g(s) − f(s)g′(s).
pub fn bracket(q: &Quadrature, f: &AffineCombination, g: &AffineCombination, s: f64) -> Result<Estimate, CriterionError> {
    if f == g {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (f0, f1) = (f.eval(q, s, 0)?, f.eval(q, s, 1)?);
    let (g0, g1) = (g.eval(q, s, 0)?, g.eval(q, s, 1)?);
    let value = f1.value * g0.value - f0.value * g1.value;
    let error = f1.error * g0.value.abs() + f1.value.abs() * g0.error + f0.error * g1.value.abs() + f0.value.abs() * g1.error + 4.0 * f64::EPSILON * (f1.value * g0.value).abs().max((f0.value * g1.value).abs());
    Ok(Estimate { value, error })
}

/// Terms of a combination with ℓ written as ξ over `ell`.
fn expand(f: &AffineCombination, ell: Interval) -> Vec<(f64, Interval)> {
    let mut t = f.terms.clone();
    if f.ell != 0.0 {
        t.push((f.ell, ell));
    }
    t
}

/// Elementary intervals cut out by all endpoints of the family, restricted
/// to those actually used, and the coefficient matrix C (atoms × functions)
/// with f_j = Σ_i C_ij ξ_{atom_i}.
pub fn atomize(fs: &[AffineCombination], ell: Interval) -> (Vec<Interval>, DMatrix<f64>) {
    let mut cuts: Vec<f64> = Vec::new();
    let mut has_inf = false;
    for f in fs {
        for (_, d) in expand(f, ell) {
            match d.lo {
                Some(lo) => cuts.push(lo),
                None => has_inf = true,
            }
            cuts.push(d.hi);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut atoms: Vec<Interval> = Vec::new();
    if has_inf && !cuts.is_empty() {
        atoms.push(Interval::below(cuts[0]));
    }
    atoms.extend(cuts.windows(2).map(|w| Interval::new(w[0], w[1])));
    let covers = |d: &Interval, a: &Interval| d.lo.map_or(true, |lo| a.lo.is_some_and(|alo| alo >= lo)) && a.hi <= d.hi;
    let mut c = DMatrix::<f64>::zeros(atoms.len(), fs.len());
    for (col, f) in fs.iter().enumerate() {
        for (coef, d) in expand(f, ell) {
            for (i, a) in atoms.iter().enumerate() {
                if covers(&d, a) {
                    c[(i, col)] += coef;
                }
            }
        }
    }
    let used: Vec<usize> = (0..atoms.len()).filter(|&i| (0..fs.len()).any(|j| c[(i, j)] != 0.0)).collect();
    let atoms = used.iter().map(|&i| atoms[i]).collect();
    let c = DMatrix::from_fn(used.len(), fs.len(), |i, j| c[(used[i], j)]);
    (atoms, c)
}

/// True when the family is linearly dependent as formal combinations of
/// period integrals over elementary intervals (so |W| vanishes identically).
pub fn formally_dependent(fs: &[AffineCombination], ell: Interval) -> bool {
    let (_, c) = atomize(fs, ell);
    c.nrows() < fs.len() || c.rank(1e-9) < fs.len()
}

/// |W| evaluated after exact column operations: when the family spans
/// exactly as many elementary intervals as it has members, |W(f)| equals
/// |det C|·|W(atoms)| and the atoms are disjoint, which avoids the
/// cancellation between columns sharing a dominant term.
pub fn wronskian_split(q: &Quadrature, fs: &[AffineCombination], ell: Interval, s: f64) -> Result<Estimate, CriterionError> {
    let (atoms, c) = atomize(fs, ell);
    if c.nrows() != fs.len() {
        return wronskian(q, fs, s);
    }
    let det_c = c.determinant().abs();
    if det_c == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let basis: Vec<AffineCombination> = atoms.into_iter().map(AffineCombination::xi).collect();
    let w = wronskian(q, &basis, s)?;
    Ok(Estimate { value: w.value * det_c, error: w.error * det_c })
}

/// [f,g] by bilinear expansion over the period integrals of both sides.
pub fn bracket_split(q: &Quadrature, f: &AffineCombination, g: &AffineCombination, ell: Interval, s: f64) -> Result<Estimate, CriterionError> {
    let mut value = 0.0;
    let mut error = 0.0;
    for (cf, df) in expand(f, ell) {
        for (cg, dg) in expand(g, ell) {
            if df == dg {
                continue;
            }
            let b = bracket(q, &AffineCombination::xi(df), &AffineCombination::xi(dg), s)?;
            value += cf * cg * b.value;
            error += (cf * cg).abs() * b.error + 4.0 * f64::EPSILON * (cf * cg * b.value).abs();
        }
    }
    Ok(Estimate { value, error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// [x,ℓ] ≤ 0 and [y,ℓ] > 0.
    XNonPositiveYPositive,
    /// [x,ℓ] ≥ 0 and [y,ℓ] < 0.
    XNonNegativeYNegative,
}

impl Branch {
    pub fn predicted(r: Regime) -> Branch {
        match r {
            Regime::Elliptic => Branch::XNonPositiveYPositive,
            Regime::Hyperbolic => Branch::XNonNegativeYNegative,
        }
    }

    fn check(self, xb: &[Estimate], yb: &[Estimate]) -> Check {
        let (x_ok, y_ok): (fn(Estimate) -> Check, fn(Estimate) -> Check) = match self {
            Branch::XNonPositiveYPositive => (weakly_negative, strictly_positive),
            Branch::XNonNegativeYNegative => (|e| weakly_negative(neg(e)), |e| strictly_positive(neg(e))),
        };
        xb.iter().map(|&e| x_ok(e)).chain(yb.iter().map(|&e| y_ok(e))).fold(Check::Pass, Check::and)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub s: f64,
    pub wronskian: f64,
    pub wronskian_error: f64,
    pub x_brackets: Vec<f64>,
    pub y_brackets: Vec<f64>,
    pub max_bracket_error: f64,
    pub wronskian_check: Check,
    pub branch_check: Check,
    /// Set when quadrature failed at this point.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    ViolatedAt { s: f64 },
    Inconclusive { s: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub interval: ParamInterval,
    pub regime: String,
    pub branch: Branch,
    pub family_x: Vec<String>,
    pub family_y: Vec<String>,
    pub formally_dependent: bool,
    pub grid: Vec<f64>,
    pub rows: Vec<GridRow>,
    pub wronskian_min: f64,
    /// Worst signed [x,ℓ] (largest for ≤ 0, smallest for ≥ 0).
    pub x_bracket_worst: f64,
    /// Worst signed [y,ℓ] (smallest for > 0, largest for < 0).
    pub y_bracket_worst: f64,
    /// Smallest strict-check margin value/error over the grid.
    pub min_margin: f64,
    pub verdict: Verdict,
}

impl CriterionReport {
    /// The verdict under a stricter sign margin. Margins below the default
    /// are ignored, so the result is never more permissive.
    pub fn tightened(mut self, margin: f64) -> Self {
        if margin <= tolerances::SIGN_MARGIN || self.verdict != Verdict::Satisfied {
            return self;
        }
        if let Some(r) = self.rows.iter().find(|r| !(row_margin(r, self.branch) > margin)) {
            self.verdict = Verdict::Inconclusive { s: r.s };
        }
        self
    }

    /// One row per grid point: s, |W|, error of |W|, then the x brackets and
    /// the y brackets in family order.
    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let mut header = vec!["s".to_string(), "wronskian".into(), "wronskian_error".into()];
        header.extend((0..self.family_x.len()).map(|i| format!("x{}_ell", i + 1)));
        header.extend((0..self.family_y.len()).map(|i| format!("y{}_ell", i + 1)));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![format!("{:.17e}", r.s), format!("{:.17e}", r.wronskian), format!("{:.17e}", r.wronskian_error)];
                v.extend(r.x_brackets.iter().chain(&r.y_brackets).map(|b| format!("{b:.17e}")));
                v
            })
            .collect();
        (header, rows)
    }
}

fn evaluate_row(q: &Quadrature, fam: &Families, union: &[AffineCombination], ell: Interval, branch: Branch, s: f64) -> GridRow {
    let attempt = || -> Result<GridRow, CriterionError> {
        let w = wronskian_split(q, union, ell, s)?;
        let xb = fam.x.iter().map(|x| bracket_split(q, x, &fam.ell, ell, s)).collect::<Result<Vec<_>, _>>()?;
        let yb = fam.y.iter().map(|y| bracket_split(q, y, &fam.ell, ell, s)).collect::<Result<Vec<_>, _>>()?;
        Ok(GridRow {
            s,
            wronskian: w.value,
            wronskian_error: w.error,
            x_brackets: xb.iter().map(|e| e.value).collect(),
            y_brackets: yb.iter().map(|e| e.value).collect(),
            max_bracket_error: xb.iter().chain(&yb).map(|e| e.error).fold(0.0, f64::max),
            wronskian_check: strictly_positive(w),
            branch_check: branch.check(&xb, &yb),
            failure: None,
        })
    };
    attempt().unwrap_or_else(|e| GridRow {
        s,
        wronskian: f64::NAN,
        wronskian_error: f64::NAN,
        x_brackets: vec![],
        y_brackets: vec![],
        max_bracket_error: f64::NAN,
        wronskian_check: Check::Inconclusive,
        branch_check: Check::Inconclusive,
        failure: Some(e.to_string()),
    })
}

/// Smallest value/error ratio over the strict checks of one row.
fn row_margin(r: &GridRow, branch: Branch) -> f64 {
    let sign = if branch == Branch::XNonPositiveYPositive { 1.0 } else { -1.0 };
    let w = r.wronskian / r.wronskian_error;
    r.y_brackets.iter().map(|v| (sign * v) / r.max_bracket_error).fold(w, f64::min)
}

fn build_report(table: &NibbledEllipse, j: &ParamInterval, grid_size: usize, branch_of: impl Fn(Regime) -> Branch) -> Result<CriterionReport, CriterionError> {
    if grid_size == 0 {
        return Err(CriterionError::EmptyGrid);
    }
    let fam = xy_families(table, j)?;
    let union = fam.union();
    let mid = j.midpoint();
    let reg = regime(&table.family, mid)?;
    let branch = branch_of(reg);
    let ell = ell_interval(&table.family, mid)?;
    let dependent = formally_dependent(&union, ell);
    let q = Quadrature::with_k_max(table.family, max_order(&union).max(1));
    let grid = j.chebyshev(grid_size, tolerances::INTERVAL_MARGIN);
    let rows: Vec<GridRow> = grid.par_iter().map(|&s| evaluate_row(&q, &fam, &union, ell, branch, s)).collect();
    let wronskian_min = rows.iter().map(|r| r.wronskian).fold(f64::INFINITY, f64::min);
    let sign = if branch == Branch::XNonPositiveYPositive { 1.0 } else { -1.0 };
    let x_bracket_worst = rows.iter().flat_map(|r| r.x_brackets.iter().map(|v| sign * v)).fold(f64::NEG_INFINITY, f64::max) * sign;
    let y_bracket_worst = rows.iter().flat_map(|r| r.y_brackets.iter().map(|v| sign * v)).fold(f64::INFINITY, f64::min) * sign;
    let min_margin = rows.iter().map(|r| row_margin(r, branch)).fold(f64::INFINITY, f64::min);
    let verdict = if dependent {
        Verdict::ViolatedAt { s: grid[0] }
    } else if let Some(r) = rows.iter().find(|r| r.wronskian_check == Check::Fail || r.branch_check == Check::Fail) {
        Verdict::ViolatedAt { s: r.s }
    } else if let Some(r) = rows.iter().find(|r| r.wronskian_check != Check::Pass || r.branch_check != Check::Pass) {
        Verdict::Inconclusive { s: r.s }
    } else {
        Verdict::Satisfied
    };
    Ok(CriterionReport {
        interval: *j,
        regime: format!("{reg:?}").to_lowercase(),
        branch,
        family_x: fam.x.iter().map(|c| c.to_string()).collect(),
        family_y: fam.y.iter().map(|c| c.to_string()).collect(),
        formally_dependent: dependent,
        grid,
        rows,
        wronskian_min,
        x_bracket_worst,
        y_bracket_worst,
        min_margin,
        verdict,
    })
}

/// Wronskian positivity plus the bracket signs required by the regime.
pub fn verify_wronbrack(table: &NibbledEllipse, j: &ParamInterval, grid_size: usize) -> Result<CriterionReport, CriterionError> {
    build_report(table, j, grid_size, Branch::predicted)
}

/// Unique-ergodicity hypotheses: Wronskian positivity and one bracket
/// branch. The branch checked is the one the regime predicts; if it does not
/// hold everywhere the opposite branch is tried and reported.
pub fn verify_mainsurf(table: &NibbledEllipse, j: &ParamInterval, grid_size: usize) -> Result<CriterionReport, CriterionError> {
    let first = build_report(table, j, grid_size, Branch::predicted)?;
    if first.verdict == Verdict::Satisfied {
        return Ok(first);
    }
    let other = build_report(table, j, grid_size, |r| match Branch::predicted(r) {
        Branch::XNonPositiveYPositive => Branch::XNonNegativeYNegative,
        Branch::XNonNegativeYNegative => Branch::XNonPositiveYPositive,
    })?;
    Ok(if other.verdict == Verdict::Satisfied { other } else { first })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::ConicFamily;

    fn q() -> Quadrature {
        Quadrature::with_k_max(ConicFamily::new(2.0, 1.0).unwrap(), 4)
    }

    #[test]
    fn single_function_wronskian() {
        let q = q();
        let f = AffineCombination::xi(Interval::new(1.5, 2.0));
        let w = wronskian(&q, &[f.clone()], 1.2).unwrap();
        assert!((w.value - f.value(&q, 1.2).unwrap().abs()).abs() < 1e-15);
    }

    #[test]
    fn dependent_pair() {
        let q = q();
        let f = AffineCombination::xi(Interval::new(1.5, 2.0));
        let w = wronskian(&q, &[f.clone(), f.scaled(2.0)], 1.2).unwrap();
        assert!(w.value <= 1e-12 * f.value(&q, 1.2).unwrap().powi(2));
        assert!(strictly_positive(w) != Check::Pass);
        assert!(formally_dependent(&[f.clone(), f.scaled(2.0)], Interval::below(1.0)));
        // splitting relation ξ(1.2,2) = ξ(1.2,1.5) + ξ(1.5,2)
        let g = AffineCombination::xi(Interval::new(1.2, 1.5));
        let h = AffineCombination::xi(Interval::new(1.2, 2.0));
        assert!(formally_dependent(&[f.clone(), g.clone(), h], Interval::below(1.0)));
        assert!(!formally_dependent(&[f, g], Interval::below(1.0)));
    }

    #[test]
    fn bracket_signs_by_ordering() {
        let q = q();
        let d1 = AffineCombination::xi(Interval::new(1.5, 2.0));
        let d2 = AffineCombination::xi(Interval::new(0.1, 0.3));
        assert!(bracket(&q, &d1, &d2, 1.2).unwrap().value > 0.0);
        let d2 = AffineCombination::xi(Interval::new(1.1, 1.3));
        assert!(bracket(&q, &d1, &d2, 0.5).unwrap().value < 0.0);
        assert_eq!(bracket(&q, &d1, &d1, 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn split_evaluation_matches_direct() {
        // elliptic side s < b, where ℓ lives on (b, a) = (1, 2)
        let q = q();
        let ell = Interval::new(1.0, 2.0);
        let fs = [AffineCombination::xi(Interval::new(1.6, 2.0)), AffineCombination::ell_minus(Interval::below(0.3)), AffineCombination::ell()];
        let (atoms, c) = atomize(&fs, ell);
        assert_eq!(atoms.len(), 3);
        assert!((c.determinant().abs() - 1.0).abs() < 1e-15);
        let s = 0.6;
        let direct = wronskian(&q, &fs, s).unwrap();
        let split = wronskian_split(&q, &fs, ell, s).unwrap();
        assert!((direct.value - split.value).abs() <= direct.error + split.error + 1e-12 * split.value);
        for f in &fs[..2] {
            let a = bracket(&q, f, &fs[2], s).unwrap();
            let b = bracket_split(&q, f, &fs[2], ell, s).unwrap();
            assert!((a.value - b.value).abs() <= a.error + b.error + 1e-12 * a.value.abs());
        }
    }
}
