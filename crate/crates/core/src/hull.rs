//! Aggregation-based separation from `conv(S)`, with a sampled inner
//! approximation of `conv(S)` as the independent check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certsearch::{
    self, solve_linear_feasibility, LinearOutcome, LinearRow, PsdSearch, RowSense, VarBox,
};
use crate::error::{argument, Error, Result};
use crate::linalg::{dot, norm2};
use crate::quadcore::{
    aggregate, contains_point, count_negative, evaluate, homogenized_matrix, nu, QuadSystem, Sense,
    SymMatrix, Weights, DEFAULT_MARGIN, DEFAULT_NU_TOL,
};
use crate::simplex::{maximize, Cmp, Lp, LpResult};
use crate::spectral::{hyperplane_basis, restrict};

/// Strict margin used to approximate the interior of a closed set.
pub const INTERIOR_MARGIN: f64 = 1e-6;
pub const DEFAULT_PROPOSALS: usize = 1_000_000;
const CHUNK: usize = 1 << 16;

/// Axis-aligned sampling box.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return argument("box bounds must be nonempty and of equal length");
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !l.is_finite() || !h.is_finite() || l > h)
        {
            return argument("box bounds must be finite with lo <= hi");
        }
        Ok(SampleBox { lo, hi })
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Accepted sample points of a set, all verified at `margin`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledHull {
    points: Vec<Vec<f64>>,
    seed: u64,
    margin: f64,
    /// Points were required to satisfy every form `< -margin` irrespective
    /// of the system's sense.
    interior: bool,
}

impl SampledHull {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn is_interior(&self) -> bool {
        self.interior
    }

    /// Adds an explicitly known point after checking membership at the
    /// hull's margin.
    pub fn add_point(&mut self, sys: &QuadSystem, x: Vec<f64>) -> Result<()> {
        if !accepts(sys, &x, self.margin, self.interior)? {
            return argument(format!(
                "point {x:?} is not in the set at margin {:e}",
                self.margin
            ));
        }
        self.points.push(x);
        Ok(())
    }
}

fn accepts(sys: &QuadSystem, x: &[f64], margin: f64, interior: bool) -> Result<bool> {
    if interior {
        for q in sys.constraints() {
            if evaluate(q, x)? >= -margin {
                return Ok(false);
            }
        }
        Ok(true)
    } else {
        contains_point(sys, x, margin)
    }
}

fn sample_impl(
    sys: &QuadSystem,
    bx: &SampleBox,
    count: usize,
    seed: u64,
    margin: f64,
    interior: bool,
) -> Result<SampledHull> {
    if bx.dim() != sys.n() {
        return argument(format!(
            "box has dimension {} but system has {}",
            bx.dim(),
            sys.n()
        ));
    }
    if count == 0 {
        return argument("proposal count must be at least 1");
    }
    let n = sys.n();
    let mut points = Vec::new();
    let mut x = vec![0.0; n];
    let mut done = 0usize;
    let mut chunk = 0u64;
    while done < count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let this = CHUNK.min(count - done);
        for _ in 0..this {
            for j in 0..n {
                x[j] = bx.lo[j] + (bx.hi[j] - bx.lo[j]) * rng.gen::<f64>();
            }
            if accepts(sys, &x, margin, interior)? {
                points.push(x.clone());
            }
        }
        done += this;
        chunk += 1;
    }
    Ok(SampledHull {
        points,
        seed,
        margin,
        interior,
    })
}

/// Uniform rejection sampling of `count` proposals in `bx`, accepting points
/// of the set at the default margin.
pub fn sample_set(
    sys: &QuadSystem,
    bx: &SampleBox,
    count: usize,
    seed: u64,
) -> Result<SampledHull> {
    sample_impl(sys, bx, count, seed, DEFAULT_MARGIN, false)
}

pub fn sample_set_with_margin(
    sys: &QuadSystem,
    bx: &SampleBox,
    count: usize,
    seed: u64,
    margin: f64,
) -> Result<SampledHull> {
    sample_impl(sys, bx, count, seed, margin, false)
}

/// Samples points where every form is below `-INTERIOR_MARGIN`.
pub fn sample_interior(
    sys: &QuadSystem,
    bx: &SampleBox,
    count: usize,
    seed: u64,
) -> Result<SampledHull> {
    sample_impl(sys, bx, count, seed, INTERIOR_MARGIN, true)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    /// Convex weights over sample indices reproducing the query.
    Inside { weights: Vec<(usize, f64)> },
    /// `alpha'p <= beta` on every sample while `alpha'x > beta`.
    OutsideSampledHull { alpha: Vec<f64>, beta: f64 },
}

fn nearest(points: &[Vec<f64>], x: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i))
        .collect();
    let k = k.min(idx.len());
    if k < idx.len() {
        idx.select_nth_unstable_by(k, |a, b| a.partial_cmp(b).unwrap());
        idx.truncate(k);
    }
    idx.sort_by(|a, b| a.partial_cmp(b).unwrap());
    idx.into_iter().map(|(_, i)| i).collect()
}

/// Column generation over the samples for `x = sum mu_i p_i`, `mu` in the
/// simplex, priced by the Farkas multipliers of the restricted problem.
pub fn hull_membership(hull: &SampledHull, x: &[f64]) -> Result<Membership> {
    if hull.is_empty() {
        return argument("membership needs a nonempty sample");
    }
    let n = x.len();
    if hull.points[0].len() != n {
        return argument("point dimension does not match the samples");
    }
    let mut cols = nearest(&hull.points, x, 4 * (n + 1));
    let scale = hull
        .points
        .iter()
        .chain(std::iter::once(&x.to_vec()))
        .fold(1.0f64, |m, p| {
            m.max(p.iter().fold(0.0f64, |a, v| a.max(v.abs())))
        });
    loop {
        let k = cols.len();
        let mut rows: Vec<LinearRow> = (0..n)
            .map(|j| {
                LinearRow::new(
                    cols.iter().map(|c| hull.points[*c][j]).collect(),
                    RowSense::Eq,
                    x[j],
                )
            })
            .collect();
        rows.push(LinearRow::new(vec![1.0; k], RowSense::Eq, 1.0));
        match solve_linear_feasibility(&rows, Some(&VarBox::nonnegative(k)))? {
            LinearOutcome::Feasible(mu) => {
                let weights = cols
                    .iter()
                    .zip(mu)
                    .filter(|(_, w)| *w > 0.0)
                    .map(|(c, w)| (*c, w))
                    .collect();
                return Ok(Membership::Inside { weights });
            }
            LinearOutcome::Infeasible(cert) => {
                let y = &cert.multipliers;
                let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let price = |p: &[f64]| dot(&y[..n], p) + y[n];
                let mut neg: Vec<(f64, usize)> = hull
                    .points
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !cols.contains(i))
                    .map(|(i, p)| (price(p), i))
                    .filter(|(v, _)| *v < -1e-12 * ynorm * scale)
                    .collect();
                if neg.is_empty() {
                    let alpha: Vec<f64> = y[..n].iter().map(|v| -v).collect();
                    return Ok(Membership::OutsideSampledHull { alpha, beta: y[n] });
                }
                neg.sort_by(|a, b| a.partial_cmp(b).unwrap());
                cols.extend(neg.iter().take(16).map(|(_, i)| *i));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HyperplaneOutcome {
    /// `alpha'p <= beta - delta` on samples, `alpha'q >= beta + delta`,
    /// `||alpha||_inf <= 1`; `beta` is the midpoint of the two sides.
    Separating {
        alpha: Vec<f64>,
        beta: f64,
        delta: f64,
    },
    QueryInside,
}

/// Maximum-margin hyperplane between `query` and the samples, by cutting
/// planes over the sample constraints.
pub fn best_separating_hyperplane(hull: &SampledHull, query: &[f64]) -> Result<HyperplaneOutcome> {
    if hull.is_empty() {
        return argument("separation needs a nonempty sample");
    }
    let n = query.len();
    if hull.points[0].len() != n {
        return argument("query dimension does not match the samples");
    }
    // variables: alpha (n), beta, delta
    let nv = n + 2;
    let mut active = nearest(&hull.points, query, 8 * (n + 1));
    for _ in 0..10_000 {
        let mut lp = Lp::new(nv);
        lp.objective[n + 1] = 1.0;
        for j in 0..n {
            lp.lo[j] = -1.0;
            lp.hi[j] = 1.0;
        }
        lp.hi[n + 1] = 1.0;
        let mut q = query.iter().map(|v| -v).collect::<Vec<_>>();
        q.extend([1.0, 1.0]);
        lp.row(q, Cmp::Le, 0.0);
        for i in &active {
            let mut r = hull.points[*i].clone();
            r.extend([-1.0, 1.0]);
            lp.row(r, Cmp::Le, 0.0);
        }
        let (alpha, delta) = match maximize(&lp) {
            Some(LpResult::Optimal { x, .. }) => (x[..n].to_vec(), x[n + 1]),
            _ => return Err(Error::Numerical("separating-hyperplane LP failed".into())),
        };
        // sample side recomputed rather than read from the LP's beta
        let side = hull
            .points
            .iter()
            .map(|p| dot(&alpha, p))
            .fold(f64::NEG_INFINITY, f64::max);
        let qv = dot(&alpha, query);
        let mut viol: Vec<(f64, usize)> = hull
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (dot(&alpha, p) - (qv - 2.0 * delta), i))
            .filter(|(v, i)| *v > 1e-12 && !active.contains(i))
            .collect();
        if viol.is_empty() {
            if delta <= 1e-9 {
                return Ok(HyperplaneOutcome::QueryInside);
            }
            let delta = 0.5 * (qv - side);
            return Ok(HyperplaneOutcome::Separating {
                alpha,
                beta: 0.5 * (qv + side),
                delta,
            });
        }
        viol.sort_by(|a, b| b.partial_cmp(a).unwrap());
        active.extend(viol.iter().take(16).map(|(_, i)| *i));
    }
    Err(Error::Numerical(
        "separating-hyperplane cutting planes did not converge".into(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationChecks {
    pub excludes_query: bool,
    pub nu_at_most_one: bool,
    pub contains_samples: bool,
}

impl SeparationChecks {
    pub fn all(&self) -> bool {
        self.excludes_query && self.nu_at_most_one && self.contains_samples
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationCertificate {
    pub alpha: Vec<f64>,
    /// Offset of the hyperplane actually used.
    pub beta: f64,
    pub lambda: Weights,
    pub checks: SeparationChecks,
    /// Aggregated form at the query.
    pub query_value: f64,
    /// Negative eigenvalue count of the homogenized aggregated matrix.
    pub nu_homogenized: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeparationOutcome {
    Certificate(SeparationCertificate),
    NoAggregation { detail: String },
}

impl SeparationOutcome {
    pub fn certificate(&self) -> Option<&SeparationCertificate> {
        match self {
            SeparationOutcome::Certificate(c) => Some(c),
            SeparationOutcome::NoAggregation { .. } => None,
        }
    }
}

/// `max(1, ||M_lambda||_F) * max(1, ||(x, 1)||^2)`.
fn eval_scale(m: &SymMatrix, x: &[f64]) -> f64 {
    m.frobenius_norm().max(1.0) * (1.0 + dot(x, x))
}

/// Recomputes the three checks for `lambda` from raw inputs.
pub fn check_certificate(
    sys: &QuadSystem,
    query: &[f64],
    alpha: &[f64],
    beta: f64,
    lambda: &Weights,
    hull: &SampledHull,
) -> Result<(SeparationChecks, f64, usize)> {
    let agg = aggregate(sys, lambda)?;
    let hm = homogenized_matrix(&agg);
    let qv = evaluate(&agg, query)?;
    let closed = sys.sense() == Sense::Nonstrict;
    let tol = 1e-9 * eval_scale(&hm, query);
    let excludes_query = if closed { qv > tol } else { qv >= -tol };
    let nu_at_most_one = nu(&agg, DEFAULT_NU_TOL)? <= 1;
    let mut contains_samples = true;
    let mut prev_near: Option<&Vec<f64>> = None;
    for p in hull.points() {
        let v = evaluate(&agg, p)?;
        if v >= 0.0 {
            contains_samples = false;
            break;
        }
        if dot(alpha, p) < beta {
            if let Some(q) = prev_near {
                let mid: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
                let vm = evaluate(&agg, &mid)?;
                let ok = if closed {
                    vm <= 1e-9 * eval_scale(&hm, &mid)
                } else {
                    vm < 0.0
                };
                if !ok {
                    contains_samples = false;
                    break;
                }
            }
            prev_near = Some(p);
        }
    }
    let nu_h = count_negative(&hm, DEFAULT_NU_TOL)?;
    Ok((
        SeparationChecks {
            excludes_query,
            nu_at_most_one,
            contains_samples,
        },
        qv,
        nu_h,
    ))
}

fn separate_at(
    sys: &QuadSystem,
    query: &[f64],
    alpha: &[f64],
    beta: f64,
    hull: &SampledHull,
    grid: usize,
) -> Result<SeparationOutcome> {
    let mut normal = alpha.to_vec();
    normal.push(-beta);
    let u = hyperplane_basis(&normal)?;
    let restricted = sys
        .homogenized()
        .iter()
        .map(|m| restrict(m, &u))
        .collect::<Result<Vec<_>>>()?;
    let comb = match certsearch::find_psd_combination(&restricted, grid)? {
        PsdSearch::Found(c) => c,
        PsdSearch::NoneFound { best_margin, .. } => {
            return Ok(SeparationOutcome::NoAggregation {
                detail: format!(
                    "no PSD combination on the hyperplane (best lambda_min {best_margin:e})"
                ),
            })
        }
    };
    let lambda = Weights::nonnegative(comb.lambda)?;
    let (checks, query_value, nu_homogenized) =
        check_certificate(sys, query, alpha, beta, &lambda, hull)?;
    if !checks.all() {
        return Ok(SeparationOutcome::NoAggregation {
            detail: format!("aggregation {:?} failed checks {checks:?}", lambda.values()),
        });
    }
    Ok(SeparationOutcome::Certificate(SeparationCertificate {
        alpha: alpha.to_vec(),
        beta,
        lambda,
        checks,
        query_value,
        nu_homogenized,
    }))
}

fn separate_common(
    sys: &QuadSystem,
    query: &[f64],
    alpha: &[f64],
    beta: f64,
    hull: &SampledHull,
    grid: usize,
) -> Result<SeparationOutcome> {
    sys.require_three()?;
    if query.len() != sys.n() || alpha.len() != sys.n() {
        return argument("query and alpha must match the system dimension");
    }
    if norm2(alpha) == 0.0 || !beta.is_finite() {
        return argument("alpha must be nonzero and beta finite");
    }
    let aq = dot(alpha, query);
    if aq < beta {
        return argument(format!(
            "query is on the near side of the hyperplane ({aq} < {beta})"
        ));
    }
    let first = separate_at(sys, query, alpha, beta, hull, grid)?;
    if first.certificate().is_some() || aq == beta {
        return Ok(first);
    }
    // the parallel hyperplane through the query also separates and puts the
    // lifted query on it
    separate_at(sys, query, alpha, aq, hull, grid)
}

/// Separation of `query` from `conv(S)` for an open system of three
/// constraints, given a valid inequality `alpha'x < beta` with
/// `alpha'query >= beta`.
pub fn separate(
    sys: &QuadSystem,
    query: &[f64],
    alpha: &[f64],
    beta: f64,
    hull: &SampledHull,
    grid: usize,
) -> Result<SeparationOutcome> {
    if sys.sense() != Sense::Strict {
        return argument("separate needs a strict system; use closed_separate");
    }
    separate_common(sys, query, alpha, beta, hull, grid)
}

/// Closed-set variant: samples come from the interior and exclusion requires
/// a positive aggregated value.
pub fn closed_separate(
    sys: &QuadSystem,
    query: &[f64],
    alpha: &[f64],
    beta: f64,
    hull: &SampledHull,
    grid: usize,
) -> Result<SeparationOutcome> {
    if sys.sense() != Sense::Nonstrict {
        return argument("closed_separate needs a nonstrict system");
    }
    if hull.is_empty() {
        return Err(Error::EmptyInterior);
    }
    separate_common(sys, query, alpha, beta, hull, grid)
}

/// `x` lies in every listed aggregation (an empty list describes the whole
/// space).
pub fn intersect_aggregations(
    sys: &QuadSystem,
    lambdas: &[Weights],
    x: &[f64],
    margin: f64,
) -> Result<bool> {
    for l in lambdas {
        let agg = aggregate(sys, l)?;
        let v = evaluate(&agg, x)?;
        if !sys.sense().admits(v, margin) {
            return Ok(false);
        }
    }
    Ok(true)
}
