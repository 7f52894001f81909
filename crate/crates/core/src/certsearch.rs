//! Certificate searches over the two-dimensional multiplier spaces of three
//! matrices (the sphere for PDLC, the simplex for PSD combinations), plus
//! linear feasibility with Farkas certificates.

mod linear;

pub use linear::{
    solve_linear_feasibility, FarkasCertificate, LinearOutcome, LinearRow, RowSense, VarBox,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::quadcore::{evaluate, QuadSystem, SymMatrix, Weights};
use crate::sdprank::{self, AffineSdpProblem, SdpConstraint, SdpOptions, SdpOutcome};
use crate::simplex::{maximize, Cmp, Lp, LpResult};
use crate::spectral::{eigenvalues, eigh, min_eigenvalue};

pub const DEFAULT_PDLC_GRID: usize = 64;
pub const DEFAULT_SIMPLEX_GRID: usize = 256;
const PDLC_REL_MARGIN: f64 = 1e-8;
const PSD_REL_TOL: f64 = 1e-8;

/// `theta` has unit 2-norm and `margin = lambda_min(sum theta_i M_i) > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdlcWitness {
    pub theta: Vec<f64>,
    pub margin: f64,
}

/// A PSD `W` orthogonal to every `M_i` with positive trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DualWitness {
    pub w: SymMatrix,
    pub inner: Vec<f64>,
    pub trace: f64,
}

/// `lambda` lies on the unit simplex and `margin = lambda_min(sum lambda_i Q_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdCombination {
    pub lambda: Vec<f64>,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PdlcOutcome {
    Witness(PdlcWitness),
    Dual(DualWitness),
    /// Neither kind of witness was found at the requested resolution.
    Inconclusive {
        best_theta: Vec<f64>,
        best_value: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsdSearch {
    Found(PsdCombination),
    NoneFound {
        best_lambda: Vec<f64>,
        best_margin: f64,
    },
}

impl PsdSearch {
    pub fn found(&self) -> Option<&PsdCombination> {
        match self {
            PsdSearch::Found(c) => Some(c),
            PsdSearch::NoneFound { .. } => None,
        }
    }
}

/// `max(1, max_i ||M_i||_F)`, the reference magnitude for relative tolerances.
pub fn matrix_scale(ms: &[SymMatrix]) -> f64 {
    ms.iter().fold(1.0f64, |s, m| s.max(m.frobenius_norm()))
}

fn check_triple(ms: &[SymMatrix]) -> Result<()> {
    if ms.len() != 3 {
        return argument(format!("expected three matrices, got {}", ms.len()));
    }
    if ms.iter().any(|m| m.order() != ms[0].order()) {
        return argument("matrices must share one order");
    }
    Ok(())
}

fn sphere_point(phi: f64, psi: f64) -> [f64; 3] {
    [phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()]
}

fn lmin_at(ms: &[SymMatrix], w: &[f64]) -> Result<f64> {
    min_eigenvalue(&SymMatrix::combination(w, ms))
}

/// Maximizes `lambda_min(sum theta_i M_i)` over the unit sphere; on failure
/// looks for a dual witness.
pub fn check_pdlc(ms: &[SymMatrix], grid: usize) -> Result<PdlcOutcome> {
    check_triple(ms)?;
    if grid == 0 {
        return argument("grid resolution must be positive");
    }
    let scale = matrix_scale(ms);
    let (np, na) = (grid, 2 * grid);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..np {
        let phi = PI * (i as f64 + 0.5) / np as f64;
        for j in 0..na {
            let psi = 2.0 * PI * j as f64 / na as f64;
            let v = lmin_at(ms, &sphere_point(phi, psi))?;
            if v > best.0 {
                best = (v, phi, psi);
            }
        }
    }
    // pattern search on the angles
    let (mut val, mut phi, mut psi) = best;
    let mut step = PI / np as f64;
    while step > 1e-6 {
        let mut moved = false;
        for (dp, ds) in [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (1.0, 1.0),
            (-1.0, -1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
        ] {
            let (p2, s2) = (phi + dp * step, psi + ds * step);
            let v = lmin_at(ms, &sphere_point(p2, s2))?;
            if v > val {
                (val, phi, psi) = (v, p2, s2);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    let theta = sphere_point(phi, psi).to_vec();
    if val > PDLC_REL_MARGIN * scale {
        let margin = lmin_at(ms, &theta)?;
        return Ok(PdlcOutcome::Witness(PdlcWitness { theta, margin }));
    }
    if let Some(w) = find_dual_witness(ms)? {
        return Ok(PdlcOutcome::Dual(w));
    }
    Ok(PdlcOutcome::Inconclusive {
        best_theta: theta,
        best_value: val,
    })
}

/// Solves `{W psd, <W, M_i> = 0, tr W = 1}`, trying an interior margin first.
pub fn find_dual_witness(ms: &[SymMatrix]) -> Result<Option<DualWitness>> {
    check_triple(ms)?;
    let k = ms[0].order();
    let mut cons: Vec<SdpConstraint> = ms
        .iter()
        .map(|m| SdpConstraint::eq(m.clone(), 0.0))
        .collect();
    cons.push(SdpConstraint::eq(SymMatrix::identity(k), 1.0));
    let problem = AffineSdpProblem::new(k, cons, None)?;
    for margin in [1e-3 / k as f64, 0.0] {
        let opts = SdpOptions {
            interior_margin: margin,
            ..SdpOptions::default()
        };
        if let SdpOutcome::Feasible(sol) = sdprank::solve_feasible_psd(&problem, &opts) {
            if verify_dual_witness(ms, &sol.x) {
                return Ok(Some(dual_from(ms, sol.x)));
            }
        }
    }
    Ok(None)
}

fn dual_from(ms: &[SymMatrix], w: SymMatrix) -> DualWitness {
    let inner = ms.iter().map(|m| m.inner(&w)).collect();
    let trace = w.trace();
    DualWitness { w, inner, trace }
}

impl DualWitness {
    /// Packages a candidate `W` with its inner products (unverified).
    pub fn new(ms: &[SymMatrix], w: SymMatrix) -> Self {
        dual_from(ms, w)
    }
}

/// PSD within `1e-8`, `|<W, M_i>| <= 1e-8 * scale`, trace in `(0, 1]`.
pub fn verify_dual_witness(ms: &[SymMatrix], w: &SymMatrix) -> bool {
    if ms.iter().any(|m| m.order() != w.order()) || !w.is_finite() {
        return false;
    }
    let trace = w.trace();
    if !(trace > 1e-12 && trace <= 1.0 + 1e-12) {
        return false;
    }
    let Ok(lmin) = min_eigenvalue(w) else {
        return false;
    };
    if lmin < -1e-8 * w.frobenius_norm().max(1.0) {
        return false;
    }
    let scale = matrix_scale(ms) * w.frobenius_norm().max(1.0);
    ms.iter().all(|m| m.inner(w).abs() <= 1e-8 * scale)
}

/// Re-derives the margin of `theta` from the raw matrices.
pub fn verify_pdlc_witness(ms: &[SymMatrix], wit: &PdlcWitness) -> bool {
    let norm: f64 = wit.theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if wit.theta.len() != ms.len() || (norm - 1.0).abs() > 1e-9 || wit.margin <= 0.0 {
        return false;
    }
    lmin_at(ms, &wit.theta).is_ok_and(|v| v > 0.0 && (v - wit.margin).abs() <= 1e-8)
}

/// Checks simplex normalization and recomputes the margin.
pub fn verify_psd_combination(qs: &[SymMatrix], c: &PsdCombination) -> bool {
    if c.lambda.len() != qs.len() || c.lambda.iter().any(|v| *v < 0.0) {
        return false;
    }
    if (c.lambda.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return false;
    }
    lmin_at(qs, &c.lambda)
        .is_ok_and(|v| v >= -PSD_REL_TOL * matrix_scale(qs) && (v - c.margin).abs() <= 1e-8)
}

fn project_simplex(l: &mut [f64]) {
    for v in l.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let s: f64 = l.iter().sum();
    l.iter_mut().for_each(|v| *v /= s);
}

/// Value and supergradient `(v'Q_i v)_i` of the concave function
/// `lambda -> lambda_min(sum lambda_i Q_i)`.
fn value_and_supergradient(qs: &[SymMatrix], l: &[f64]) -> Result<(f64, Vec<f64>)> {
    let spec = eigh(&SymMatrix::combination(l, qs))?;
    let v = spec.vector(spec.eigenvalues.len() - 1);
    Ok((spec.min(), qs.iter().map(|q| q.quad_form(&v)).collect()))
}

/// Maximizes `lambda_min(sum lambda_i Q_i)` over the unit simplex: a
/// barycentric grid with step `1/grid`, golden-section passes along the edge
/// directions, then supergradient cutting planes.
pub fn find_psd_combination(qs: &[SymMatrix], grid: usize) -> Result<PsdSearch> {
    check_triple(qs)?;
    if grid == 0 {
        return argument("grid resolution must be positive");
    }
    let scale = matrix_scale(qs);
    let f = |l: &[f64]| -> Result<f64> {
        eigenvalues(&SymMatrix::combination(l, qs)).map(|w| w[w.len() - 1])
    };

    let nf = grid as f64;
    let mut best = (f64::NEG_INFINITY, vec![1.0, 0.0, 0.0]);
    for i in 0..=grid {
        for j in 0..=grid - i {
            let l = [i as f64 / nf, j as f64 / nf, (grid - i - j) as f64 / nf];
            let v = f(&l)?;
            if v > best.0 {
                best = (v, l.to_vec());
            }
        }
    }

    let (mut val, mut lam) = best;
    let dirs = [[1.0, -1.0, 0.0], [0.0, 1.0, -1.0], [-1.0, 0.0, 1.0]];
    for _ in 0..40 {
        let before = val;
        for d in &dirs {
            // admissible interval for lam + s d
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for k in 0..3 {
                if d[k] > 0.0 {
                    lo = lo.max(-lam[k] / d[k]);
                } else if d[k] < 0.0 {
                    hi = hi.min(-lam[k] / d[k]);
                }
            }
            let (s, v) = golden_max(lo, hi, 1e-12, |s| {
                let p: Vec<f64> = (0..3).map(|k| lam[k] + s * d[k]).collect();
                f(&p).unwrap_or(f64::NEG_INFINITY)
            });
            if v > val {
                for k in 0..3 {
                    lam[k] += s * d[k];
                }
                project_simplex(&mut lam);
                val = f(&lam)?;
            }
        }
        if val - before <= 1e-15 * scale {
            break;
        }
    }

    let (v2, l2) = cutting_planes(qs, &lam, val, scale)?;
    if v2 > val {
        lam = l2;
    }

    let margin = lmin_at(qs, &lam)?;
    if margin >= -PSD_REL_TOL * scale {
        Ok(PsdSearch::Found(PsdCombination {
            lambda: lam,
            margin,
        }))
    } else {
        Ok(PsdSearch::NoneFound {
            best_lambda: lam,
            best_margin: margin,
        })
    }
}

fn golden_max(mut a: f64, mut b: f64, tol: f64, mut g: impl FnMut(f64) -> f64) -> (f64, f64) {
    if !(b > a) {
        return (0.0, g(0.0));
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > tol {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    let s = 0.5 * (a + b);
    (s, g(s))
}

/// Kelley's method over the simplex, warm-started at `start`. Returns the
/// best point seen.
fn cutting_planes(
    qs: &[SymMatrix],
    start: &[f64],
    start_val: f64,
    scale: f64,
) -> Result<(f64, Vec<f64>)> {
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let mut best = (start_val, start.to_vec());
    let mut probe = vec![
        start.to_vec(),
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    for _ in 0..200 {
        for p in probe.drain(..) {
            let (v, g) = value_and_supergradient(qs, &p)?;
            if v > best.0 {
                best = (v, p);
            }
            cuts.push(g);
        }
        // max z s.t. z <= g'lambda, lambda on the simplex
        let mut lp = Lp::new(4);
        lp.objective[3] = 1.0;
        for k in 0..3 {
            lp.lo[k] = 0.0;
        }
        lp.row(vec![1.0, 1.0, 1.0, 0.0], Cmp::Eq, 1.0);
        for g in &cuts {
            lp.row(vec![-g[0], -g[1], -g[2], 1.0], Cmp::Le, 0.0);
        }
        let Some(LpResult::Optimal { x, value }) = maximize(&lp) else {
            break;
        };
        if value - best.0 <= 1e-13 * scale {
            break;
        }
        let mut l = x[..3].to_vec();
        project_simplex(&mut l);
        probe.push(l);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExclusionOutcome {
    Aggregation(Weights),
    Infeasible(FarkasCertificate),
}

/// The linear system in `lambda` for "`exclude` outside `S_lambda`, `keep`
/// inside", with `lambda >= 0` and `sum lambda = 1`.
pub fn exclusion_rows(
    sys: &QuadSystem,
    keep: &[f64],
    exclude: &[f64],
) -> Result<(Vec<LinearRow>, VarBox)> {
    let (vk, ve) = (sys.values(keep)?, sys.values(exclude)?);
    let m = sys.m();
    let rows = vec![
        LinearRow::new(ve, RowSense::Ge, 0.0),
        LinearRow::new(
            vk,
            if sys.sense().eq(&crate::Sense::Strict) {
                RowSense::Lt
            } else {
                RowSense::Le
            },
            0.0,
        ),
        LinearRow::new(vec![1.0; m], RowSense::Eq, 1.0),
    ];
    Ok((rows, VarBox::nonnegative(m)))
}

/// Looks for `lambda >= 0` with `exclude` outside and `keep` inside the
/// aggregation. For a nonstrict system, exclusion means a positive value.
pub fn find_excluding_aggregation(
    sys: &QuadSystem,
    keep: &[f64],
    exclude: &[f64],
) -> Result<ExclusionOutcome> {
    let (mut rows, bounds) = exclusion_rows(sys, keep, exclude)?;
    if sys.sense() == crate::Sense::Nonstrict {
        rows[0].sense = RowSense::Gt;
    }
    match solve_linear_feasibility(&rows, Some(&bounds))? {
        LinearOutcome::Feasible(mut l) => {
            project_simplex(&mut l);
            let w = Weights::nonnegative(l)?;
            Ok(ExclusionOutcome::Aggregation(w))
        }
        LinearOutcome::Infeasible(c) => Ok(ExclusionOutcome::Infeasible(c)),
    }
}

/// Direct re-check of an exclusion answer.
pub fn verify_exclusion(
    sys: &QuadSystem,
    keep: &[f64],
    exclude: &[f64],
    w: &Weights,
) -> Result<bool> {
    let agg = crate::quadcore::aggregate(sys, w)?;
    let (ve, vk) = (evaluate(&agg, exclude)?, evaluate(&agg, keep)?);
    Ok(match sys.sense() {
        crate::Sense::Strict => ve >= 0.0 && vk < 0.0,
        crate::Sense::Nonstrict => ve > 0.0 && vk <= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadcore::{homogenized_matrix, Sense};

    fn example1() -> Vec<SymMatrix> {
        let sys = QuadSystem::from_parts(
            Sense::Strict,
            vec![
                (SymMatrix::diag(&[1.0, 1.0, 0.0]), vec![0.0; 3], -2.0),
                (SymMatrix::diag(&[-1.0, -1.0, 0.0]), vec![0.0; 3], 1.0),
                (SymMatrix::diag(&[-1.0, 1.0, 1.0]), vec![3.0, 0.0, 0.0], 0.0),
            ],
        )
        .unwrap();
        sys.constraints().iter().map(homogenized_matrix).collect()
    }

    fn example4() -> Vec<SymMatrix> {
        vec![
            SymMatrix::diag(&[1.0, 0.0, -1.0]),
            SymMatrix::diag(&[0.0, 1.0, -1.0]),
            SymMatrix::from_rows(&[
                vec![-1.0, 0.0, 1.0],
                vec![0.0, -1.0, 1.0],
                vec![1.0, 1.0, -1.0],
            ])
            .unwrap(),
        ]
    }

    fn reference_w() -> SymMatrix {
        SymMatrix::from_upper(3, |i, j| if i == j { 1.0 / 3.0 } else { 0.25 })
    }

    #[test]
    fn example_one_has_pdlc() {
        let ms = example1();
        let theta: Vec<f64> = [-12.0, -15.0, 1.0]
            .iter()
            .map(|v| v / 370f64.sqrt())
            .collect();
        assert!(lmin_at(&ms, &theta).unwrap() > 0.0);
        match check_pdlc(&ms, DEFAULT_PDLC_GRID).unwrap() {
            PdlcOutcome::Witness(w) => {
                assert!(w.margin > 1e-4);
                assert!(verify_pdlc_witness(&ms, &w));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_identities() {
        let ms = vec![SymMatrix::identity(3); 3];
        match check_pdlc(&ms, 16).unwrap() {
            PdlcOutcome::Witness(w) => {
                // best direction is (1,1,1)/sqrt(3) with margin sqrt(3)
                assert!((w.margin - 3f64.sqrt()).abs() < 1e-6);
                assert!(verify_pdlc_witness(
                    &ms,
                    &PdlcWitness {
                        theta: vec![1.0, 0.0, 0.0],
                        margin: 1.0
                    }
                ));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dual_witness_for_example_four() {
        let ms = example4();
        assert!(verify_dual_witness(&ms, &reference_w()));
        match check_pdlc(&ms, 32).unwrap() {
            PdlcOutcome::Dual(d) => {
                assert!(verify_dual_witness(&ms, &d.w));
                assert!(d.trace > 0.0 && d.trace <= 1.0 + 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dual_witness_rejections() {
        let ms = example4();
        assert!(!verify_dual_witness(&ms, &SymMatrix::zeros(3)));
        let eye = vec![
            SymMatrix::identity(3),
            SymMatrix::zeros(3),
            SymMatrix::zeros(3),
        ];
        assert!(!verify_dual_witness(
            &eye,
            &SymMatrix::identity(3).scaled(1.0 / 3.0)
        ));
    }

    #[test]
    fn psd_combination_examples() {
        let eye = SymMatrix::identity(3);
        let qs = vec![eye.clone(), eye.scaled(-1.0), eye.scaled(-1.0)];
        let c = find_psd_combination(&qs, 32)
            .unwrap()
            .found()
            .cloned()
            .unwrap();
        assert!((c.lambda[0] - 1.0).abs() < 1e-9);
        assert!(verify_psd_combination(&qs, &c));

        let qs = vec![
            SymMatrix::diag(&[-1.0, 1.0, 1.0]),
            SymMatrix::diag(&[1.0, -1.0, 1.0]),
            SymMatrix::diag(&[1.0, 1.0, -1.0]),
        ];
        let c = find_psd_combination(&qs, DEFAULT_SIMPLEX_GRID)
            .unwrap()
            .found()
            .cloned()
            .unwrap();
        assert!(verify_psd_combination(&qs, &c));
        // the maximizer is the barycenter; (1/2, 1/2, 0) is also PSD
        assert!((c.margin - 1.0 / 3.0).abs() < 1e-9);
        assert!(lmin_at(&qs, &[0.5, 0.5, 0.0]).unwrap() >= 0.0);
    }

    #[test]
    fn psd_combination_absent() {
        let qs = vec![
            SymMatrix::diag(&[-1.0, 0.0, 0.0]),
            SymMatrix::diag(&[0.0, -1.0, 0.0]),
            SymMatrix::diag(&[0.0, 0.0, -1.0]),
        ];
        match find_psd_combination(&qs, 16).unwrap() {
            PsdSearch::NoneFound { best_margin, .. } => assert!(best_margin < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn psd_combination_is_monotone_under_shift() {
        let qs = vec![
            SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, -1.0]]).unwrap(),
            SymMatrix::diag(&[-1.0, 2.0]),
            SymMatrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap(),
        ];
        let c = find_psd_combination(&qs, 64)
            .unwrap()
            .found()
            .cloned()
            .unwrap();
        let shifted: Vec<SymMatrix> = qs
            .iter()
            .map(|q| q.add(&SymMatrix::identity(2).scaled(1e-3)))
            .collect();
        let v = lmin_at(&shifted, &c.lambda).unwrap();
        assert!(v >= c.margin);
    }

    #[test]
    fn example_one_exclusion_by_first_constraint() {
        let sys = QuadSystem::from_parts(
            Sense::Strict,
            vec![
                (SymMatrix::diag(&[1.0, 1.0, 0.0]), vec![0.0; 3], -2.0),
                (SymMatrix::diag(&[-1.0, -1.0, 0.0]), vec![0.0; 3], 1.0),
                (SymMatrix::diag(&[-1.0, 1.0, 1.0]), vec![3.0, 0.0, 0.0], 0.0),
            ],
        )
        .unwrap();
        let (keep, exclude) = ([1.2, 0.0, 0.0], [2.0, 0.0, 0.0]);
        assert!(verify_exclusion(&sys, &keep, &exclude, &Weights::unit(3, 0)).unwrap());
        match find_excluding_aggregation(&sys, &keep, &exclude).unwrap() {
            ExclusionOutcome::Aggregation(w) => {
                assert!(verify_exclusion(&sys, &keep, &exclude, &w).unwrap())
            }
            other => panic!("{other:?}"),
        }
    }
}
