//! Linear feasibility with strict rows, and Farkas-type infeasibility
//! certificates.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::simplex::{maximize, Cmp, Lp, LpResult};

const GAP_TOL: f64 = 1e-9;
const CERT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl RowSense {
    pub fn is_strict(self) -> bool {
        matches!(self, RowSense::Lt | RowSense::Gt)
    }

    /// Whether `lhs (sense) rhs` holds, with `slack` of tolerance on the
    /// nonstrict part and `margin` required on strict rows.
    pub fn holds(self, lhs: f64, rhs: f64, slack: f64, margin: f64) -> bool {
        match self {
            RowSense::Lt => lhs < rhs - margin,
            RowSense::Le => lhs <= rhs + slack,
            RowSense::Eq => (lhs - rhs).abs() <= slack,
            RowSense::Ge => lhs >= rhs - slack,
            RowSense::Gt => lhs > rhs + margin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(coeffs: Vec<f64>, sense: RowSense, rhs: f64) -> Self {
        LinearRow { coeffs, sense, rhs }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Box bounds; infinite entries mean unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct VarBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl VarBox {
    pub fn free(n: usize) -> Self {
        VarBox {
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    pub fn nonnegative(n: usize) -> Self {
        VarBox {
            lo: vec![0.0; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= l - slack && *v <= h + slack)
    }

    /// `min { d'x : lo <= x <= hi }`, `-inf` when unbounded below.
    pub fn min_linear(&self, d: &[f64]) -> f64 {
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.min_linear_with(d, 1e-12 * dmax)
    }

    /// As [`VarBox::min_linear`], treating `|d_j| <= zero` as exactly zero.
    pub fn min_linear_with(&self, d: &[f64], zero: f64) -> f64 {
        let mut s = 0.0;
        for (j, dj) in d.iter().enumerate() {
            if dj.abs() <= zero {
                continue;
            }
            let b = if *dj > 0.0 { self.lo[j] } else { self.hi[j] };
            if !b.is_finite() {
                return f64::NEG_INFINITY;
            }
            s += dj * b;
        }
        s
    }
}

/// Multipliers `y` over the rows (`y >= 0` on `<`/`<=`, `y <= 0` on
/// `>`/`>=`, free on `=`) whose aggregate `d'x (<|<=) R` cannot hold on the
/// variable box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub multipliers: Vec<f64>,
    pub derived: LinearRow,
}

impl FarkasCertificate {
    /// Recomputes the aggregate from `rows` and checks signs and the
    /// contradiction against `bounds`.
    pub fn verify(&self, rows: &[LinearRow], bounds: &VarBox) -> bool {
        if self.multipliers.len() != rows.len() {
            return false;
        }
        let n = bounds.lo.len();
        let ymax = self.multipliers.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if ymax == 0.0 || rows.iter().any(|r| r.coeffs.len() != n) {
            return false;
        }
        let mut d = vec![0.0; n];
        let mut r = 0.0;
        let mut strict_weight = 0.0;
        let mut mass = 0.0;
        for (y, row) in self.multipliers.iter().zip(rows) {
            mass += y.abs() * row.coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let sign_ok = match row.sense {
                RowSense::Lt | RowSense::Le => *y >= -1e-12 * ymax,
                RowSense::Gt | RowSense::Ge => *y <= 1e-12 * ymax,
                RowSense::Eq => true,
            };
            if !sign_ok {
                return false;
            }
            for (dj, a) in d.iter_mut().zip(&row.coeffs) {
                *dj += y * a;
            }
            r += y * row.rhs;
            if row.sense.is_strict() {
                strict_weight += y.abs();
            }
        }
        // cancellation below this size is round-off
        let phi = bounds.min_linear_with(&d, 1e-12 * mass);
        if !phi.is_finite() {
            return false;
        }
        let tol = 1e-9 * phi.abs().max(r.abs()).max(1.0);
        if strict_weight > 1e-9 * ymax {
            phi - r >= -tol
        } else {
            phi - r > tol
        }
    }

    pub fn is_strict(&self) -> bool {
        self.derived.sense == RowSense::Lt
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinearOutcome {
    Feasible(Vec<f64>),
    Infeasible(FarkasCertificate),
}

fn check_shapes(rows: &[LinearRow], bounds: &VarBox) -> Result<usize> {
    let n = bounds.lo.len();
    if bounds.hi.len() != n {
        return argument("bounds have mismatched lengths");
    }
    for (i, r) in rows.iter().enumerate() {
        if r.coeffs.len() != n {
            return argument(format!(
                "row {i} has {} coefficients, expected {n}",
                r.coeffs.len()
            ));
        }
        if !r.rhs.is_finite() || r.coeffs.iter().any(|v| !v.is_finite()) {
            return argument(format!("row {i} has non-finite data"));
        }
    }
    Ok(n)
}

fn cmp_of(s: RowSense) -> Cmp {
    match s {
        RowSense::Lt | RowSense::Le => Cmp::Le,
        RowSense::Eq => Cmp::Eq,
        RowSense::Gt | RowSense::Ge => Cmp::Ge,
    }
}

fn budget_error() -> Error {
    Error::Numerical("simplex pivot budget exhausted".into())
}

/// Finds a point meeting every row (strict rows by a normalized margin of at
/// least `1e-9`) inside `bounds`, or a certificate of infeasibility.
pub fn solve_linear_feasibility(
    rows: &[LinearRow],
    bounds: Option<&VarBox>,
) -> Result<LinearOutcome> {
    let free;
    let bounds = match bounds {
        Some(b) => b,
        None => {
            let n = rows.first().map_or(0, |r| r.coeffs.len());
            free = VarBox::free(n);
            &free
        }
    };
    let n = check_shapes(rows, bounds)?;
    let has_strict = rows.iter().any(|r| r.sense.is_strict());

    let mut lp = Lp::new(n + usize::from(has_strict));
    lp.lo[..n].copy_from_slice(&bounds.lo);
    lp.hi[..n].copy_from_slice(&bounds.hi);
    for r in rows {
        let mut coeffs = r.coeffs.clone();
        let mut rhs = r.rhs;
        if has_strict {
            let scale = coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let gap = match r.sense {
                RowSense::Lt => 1.0,
                RowSense::Gt => -1.0,
                _ => 0.0,
            };
            if scale > 0.0 && gap != 0.0 {
                coeffs.iter_mut().for_each(|v| *v /= scale);
                rhs /= scale;
            }
            coeffs.push(gap);
        }
        lp.row(coeffs, cmp_of(r.sense), rhs);
    }
    if has_strict {
        lp.objective[n] = 1.0;
        lp.hi[n] = 1.0;
    }
    match maximize(&lp).ok_or_else(budget_error)? {
        LpResult::Optimal { x, value } => {
            if !has_strict || value > GAP_TOL {
                return Ok(LinearOutcome::Feasible(x[..n].to_vec()));
            }
        }
        LpResult::Infeasible => {}
        LpResult::Unbounded => return Err(Error::Numerical("gap LP reported unbounded".into())),
    }
    farkas(rows, bounds).map(LinearOutcome::Infeasible)
}

enum YVar {
    Nonneg(usize),
    Nonpos(usize),
    Free(usize, usize),
}

/// Certificate search (Motzkin alternative) as a normalized LP: first look
/// for `phi(d) > R`, then for `phi(d) >= R` with positive strict weight.
fn farkas(rows: &[LinearRow], bounds: &VarBox) -> Result<FarkasCertificate> {
    let n = bounds.lo.len();
    let mut ymap = Vec::with_capacity(rows.len());
    let mut nv = 0usize;
    for r in rows {
        ymap.push(match r.sense {
            RowSense::Lt | RowSense::Le => YVar::Nonneg(nv),
            RowSense::Gt | RowSense::Ge => YVar::Nonpos(nv),
            RowSense::Eq => {
                nv += 1;
                YVar::Free(nv - 1, nv)
            }
        });
        nv += 1;
    }
    let mut pcol = vec![None; n];
    let mut ncol = vec![None; n];
    for j in 0..n {
        if bounds.lo[j].is_finite() {
            pcol[j] = Some(nv);
            nv += 1;
        }
        if bounds.hi[j].is_finite() {
            ncol[j] = Some(nv);
            nv += 1;
        }
    }
    let mut lp = Lp::new(nv);
    lp.lo = vec![0.0; nv];
    // d_j - p_j + n_j = 0
    for j in 0..n {
        let mut row = vec![0.0; nv];
        for (r, ym) in rows.iter().zip(&ymap) {
            let a = r.coeffs[j];
            match *ym {
                YVar::Nonneg(k) => row[k] += a,
                YVar::Nonpos(k) => row[k] -= a,
                YVar::Free(p, q) => {
                    row[p] += a;
                    row[q] -= a;
                }
            }
        }
        if let Some(k) = pcol[j] {
            row[k] -= 1.0;
        }
        if let Some(k) = ncol[j] {
            row[k] += 1.0;
        }
        lp.row(row, Cmp::Eq, 0.0);
    }
    lp.row(vec![1.0; nv], Cmp::Eq, 1.0);
    // phi - R
    let mut gain = vec![0.0; nv];
    for (r, ym) in rows.iter().zip(&ymap) {
        match *ym {
            YVar::Nonneg(k) => gain[k] -= r.rhs,
            YVar::Nonpos(k) => gain[k] += r.rhs,
            YVar::Free(p, q) => {
                gain[p] -= r.rhs;
                gain[q] += r.rhs;
            }
        }
    }
    for j in 0..n {
        if let Some(k) = pcol[j] {
            gain[k] += bounds.lo[j];
        }
        if let Some(k) = ncol[j] {
            gain[k] -= bounds.hi[j];
        }
    }
    lp.objective = gain.clone();
    let mut solution = None;
    if let LpResult::Optimal { x, value } = maximize(&lp).ok_or_else(budget_error)? {
        if value > CERT_TOL {
            solution = Some(x);
        }
    }
    if solution.is_none() && rows.iter().any(|r| r.sense.is_strict()) {
        let mut strict = vec![0.0; nv];
        for (r, ym) in rows.iter().zip(&ymap) {
            if r.sense.is_strict() {
                match *ym {
                    YVar::Nonneg(k) | YVar::Nonpos(k) => strict[k] = 1.0,
                    YVar::Free(..) => {}
                }
            }
        }
        lp.row(gain, Cmp::Ge, 0.0);
        lp.objective = strict;
        if let LpResult::Optimal { x, value } = maximize(&lp).ok_or_else(budget_error)? {
            if value > CERT_TOL {
                solution = Some(x);
            }
        }
    }
    let Some(z) = solution else {
        return Err(Error::Numerical(format!(
            "no feasible point and no certificate found ({} rows, {n} variables); system is \
             infeasible only at tolerance",
            rows.len()
        )));
    };

    let mut y: Vec<f64> = ymap
        .iter()
        .map(|ym| match *ym {
            YVar::Nonneg(k) => z[k],
            YVar::Nonpos(k) => -z[k],
            YVar::Free(p, q) => z[p] - z[q],
        })
        .collect();
    let aggregate = |y: &[f64]| {
        let mut d = vec![0.0; n];
        let mut r = 0.0;
        for (yi, row) in y.iter().zip(rows) {
            for (dj, a) in d.iter_mut().zip(&row.coeffs) {
                *dj += yi * a;
            }
            r += yi * row.rhs;
        }
        (d, r)
    };
    let (d, _) = aggregate(&y);
    let d1: f64 = d.iter().map(|v| v.abs()).sum();
    let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = if d1 > 1e-10 * ymax {
        1.0 / d1
    } else {
        1.0 / ymax
    };
    y.iter_mut().for_each(|v| *v *= s);
    let (d, r) = aggregate(&y);
    let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let strict = rows
        .iter()
        .zip(&y)
        .any(|(row, yi)| row.sense.is_strict() && yi.abs() > 1e-12 * ymax);
    let derived = LinearRow::new(d, if strict { RowSense::Lt } else { RowSense::Le }, r);
    Ok(FarkasCertificate {
        multipliers: y,
        derived,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contradictory_bounds() {
        let rows = vec![
            LinearRow::new(vec![1.0], RowSense::Ge, 0.0),
            LinearRow::new(vec![1.0], RowSense::Le, -1.0),
        ];
        match solve_linear_feasibility(&rows, None).unwrap() {
            LinearOutcome::Infeasible(c) => {
                assert!(c.verify(&rows, &VarBox::free(1)));
                assert!((c.multipliers[0] + 1.0).abs() < 1e-12);
                assert!((c.multipliers[1] - 1.0).abs() < 1e-12);
                assert_eq!(c.derived.coeffs, vec![0.0]);
                assert_eq!(c.derived.sense, RowSense::Le);
                assert!((c.derived.rhs + 1.0).abs() < 1e-12);
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn open_interval_is_feasible_at_midpoint() {
        let rows = vec![
            LinearRow::new(vec![1.0], RowSense::Gt, 0.0),
            LinearRow::new(vec![1.0], RowSense::Lt, 1.0),
        ];
        match solve_linear_feasibility(&rows, None).unwrap() {
            LinearOutcome::Feasible(x) => assert!((x[0] - 0.5).abs() < 1e-12),
            other => panic!("expected point, got {other:?}"),
        }
    }

    #[test]
    fn empty_open_interval_needs_strict_weight() {
        // x > 0, x < 0 : infeasible only because of strictness
        let rows = vec![
            LinearRow::new(vec![1.0], RowSense::Gt, 0.0),
            LinearRow::new(vec![1.0], RowSense::Lt, 0.0),
        ];
        match solve_linear_feasibility(&rows, None).unwrap() {
            LinearOutcome::Infeasible(c) => {
                assert!(c.is_strict());
                assert!(c.verify(&rows, &VarBox::free(1)));
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn approximate_four_quadratic_system() {
        let rows = vec![
            LinearRow::new(vec![0.3051, -3.0576, 1.4559, 1.4559], RowSense::Lt, 0.0),
            LinearRow::new(vec![-16.0, -160.0, 72.5, 72.5], RowSense::Gt, 0.0),
            LinearRow::new(vec![1.0; 4], RowSense::Eq, 1.0),
        ];
        let bounds = VarBox::nonnegative(4);
        match solve_linear_feasibility(&rows, Some(&bounds)).unwrap() {
            LinearOutcome::Infeasible(c) => {
                assert!(c.verify(&rows, &bounds));
                let want = [1.7629, -0.0342, -0.0854];
                for (got, w) in c.multipliers.iter().zip(want) {
                    assert!((got - w).abs() < 1e-2, "{:?}", c.multipliers);
                }
                assert!((c.derived.coeffs[0] - 1.0).abs() < 1e-6);
                assert!((c.derived.rhs + 0.0854).abs() < 5e-3);
                assert!(c.is_strict());
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn feasible_point_meets_rows() {
        let rows = vec![
            LinearRow::new(vec![1.0, 1.0], RowSense::Eq, 1.0),
            LinearRow::new(vec![1.0, -1.0], RowSense::Gt, 0.2),
            LinearRow::new(vec![0.0, 1.0], RowSense::Ge, 0.1),
        ];
        let bounds = VarBox::nonnegative(2);
        match solve_linear_feasibility(&rows, Some(&bounds)).unwrap() {
            LinearOutcome::Feasible(x) => {
                for r in &rows {
                    assert!(r.sense.holds(r.lhs(&x), r.rhs, 1e-9, 1e-9));
                }
                assert!(bounds.contains(&x, 1e-12));
            }
            other => panic!("expected point, got {other:?}"),
        }
    }

    #[test]
    fn tampered_certificate_fails_verification() {
        let rows = vec![
            LinearRow::new(vec![1.0], RowSense::Ge, 0.0),
            LinearRow::new(vec![1.0], RowSense::Le, -1.0),
        ];
        let bad = FarkasCertificate {
            multipliers: vec![1.0, 1.0],
            derived: LinearRow::new(vec![2.0], RowSense::Le, -1.0),
        };
        assert!(!bad.verify(&rows, &VarBox::free(1)));
    }
}
