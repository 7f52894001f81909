//! Small dense SDP feasibility by alternating projections, rank reduction
//! of feasible points, and extraction of strict common negative points of
//! three quadratic forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certsearch::{self, PsdCombination, PsdSearch};
use crate::error::{argument, Error, Result};
use crate::linalg::{dot, norm2, solve, Matrix};
use crate::quadcore::SymMatrix;
use crate::spectral::{eigh, Spectrum};

/// Eigenvalues above this fraction of `||X||_2` count toward the rank.
pub const RANK_REL_TOL: f64 = 1e-7;
const NULL_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpSense {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
}

/// `<matrix, X> (sense) target`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpConstraint {
    pub matrix: SymMatrix,
    pub target: f64,
    pub sense: SdpSense,
}

impl SdpConstraint {
    pub fn eq(matrix: SymMatrix, target: f64) -> Self {
        SdpConstraint {
            matrix,
            target,
            sense: SdpSense::Eq,
        }
    }

    pub fn le(matrix: SymMatrix, target: f64) -> Self {
        SdpConstraint {
            matrix,
            target,
            sense: SdpSense::Le,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineSdpProblem {
    order: usize,
    constraints: Vec<SdpConstraint>,
    objective: Option<SymMatrix>,
}

impl AffineSdpProblem {
    pub const MAX_CONSTRAINTS: usize = 8;

    pub fn new(
        order: usize,
        constraints: Vec<SdpConstraint>,
        objective: Option<SymMatrix>,
    ) -> Result<Self> {
        if order == 0 {
            return argument("SDP order must be positive");
        }
        if constraints.is_empty() || constraints.len() > Self::MAX_CONSTRAINTS {
            return argument(format!(
                "SDP needs 1..=8 constraints, got {}",
                constraints.len()
            ));
        }
        let bad = constraints
            .iter()
            .any(|c| c.matrix.order() != order || !c.target.is_finite())
            || objective.as_ref().is_some_and(|c| c.order() != order);
        if bad {
            return argument("SDP data must share the problem order and be finite");
        }
        Ok(AffineSdpProblem {
            order,
            constraints,
            objective,
        })
    }

    /// Equality constraints `<Q_i, X> = eps_i`.
    pub fn equalities(order: usize, mats: &[SymMatrix], targets: &[f64]) -> Result<Self> {
        if mats.len() != targets.len() {
            return argument("one target per constraint matrix is required");
        }
        let cons = mats
            .iter()
            .zip(targets)
            .map(|(m, t)| SdpConstraint::eq(m.clone(), *t))
            .collect();
        Self::new(order, cons, None)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn constraints(&self) -> &[SdpConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&SymMatrix> {
        self.objective.as_ref()
    }

    pub fn all_equalities(&self) -> bool {
        self.constraints.iter().all(|c| c.sense == SdpSense::Eq)
    }

    /// `max(1, max ||Q_i||_F, max |eps_i|)`.
    pub fn scale(&self) -> f64 {
        self.constraints.iter().fold(1.0f64, |s, c| {
            s.max(c.matrix.frobenius_norm()).max(c.target.abs())
        })
    }

    /// Signed violation per constraint: `<Q,X> - eps` for equalities, its
    /// positive part for inequalities.
    pub fn residuals(&self, x: &SymMatrix) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                let r = c.matrix.inner(x) - c.target;
                match c.sense {
                    SdpSense::Eq => r,
                    SdpSense::Le => r.max(0.0),
                }
            })
            .collect()
    }

    /// Reference magnitude for residuals at `x`.
    pub fn residual_scale(&self, x: &SymMatrix) -> f64 {
        self.scale() * x.frobenius_norm().max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdSolution {
    pub x: SymMatrix,
    pub residuals: Vec<f64>,
    pub rank: usize,
}

impl PsdSolution {
    pub fn new(p: &AffineSdpProblem, x: SymMatrix) -> Result<Self> {
        let spec = eigh(&x)?;
        Ok(PsdSolution {
            residuals: p.residuals(&x),
            rank: numerical_rank(&spec),
            x,
        })
    }

    /// Re-checks the invariants from scratch.
    pub fn verify(&self, p: &AffineSdpProblem) -> bool {
        let Ok(spec) = eigh(&self.x) else {
            return false;
        };
        let xs = spec.spectral_norm().max(1.0);
        let rs = p.residual_scale(&self.x);
        spec.min() >= -1e-8 * xs
            && p.residuals(&self.x).iter().all(|r| r.abs() <= 1e-7 * rs)
            && numerical_rank(&spec) == self.rank
    }
}

pub fn numerical_rank(spec: &Spectrum) -> usize {
    let top = spec.spectral_norm();
    if top == 0.0 {
        return 0;
    }
    spec.eigenvalues
        .iter()
        .filter(|v| **v > RANK_REL_TOL * top)
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpOptions {
    pub max_iter: usize,
    /// Acceptance threshold on `lambda_min` of the affine iterate, relative to
    /// `max(1, ||X||_2)`.
    pub psd_tol: f64,
    /// Eigenvalues are clipped at this value in the PSD projection.
    pub interior_margin: f64,
    pub relaxation: f64,
    pub stall_window: usize,
    pub seed: u64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iter: 50_000,
            psd_tol: 1e-10,
            interior_margin: 0.0,
            relaxation: 1.0,
            stall_window: 2_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SdpOutcome {
    Feasible(PsdSolution),
    InfeasibleAtTolerance { gap: f64, iterations: usize },
}

/// Least-squares solve of a small symmetric PSD system via its spectrum,
/// ignoring directions below `1e-12` of the top eigenvalue.
fn pinv_solve(g: &SymMatrix, rhs: &[f64]) -> Vec<f64> {
    let Ok(spec) = eigh(g) else {
        return vec![0.0; rhs.len()];
    };
    let top = spec.spectral_norm();
    let k = rhs.len();
    let mut out = vec![0.0; k];
    for (idx, lam) in spec.eigenvalues.iter().enumerate() {
        if *lam <= 1e-12 * top {
            continue;
        }
        let v = spec.vector(idx);
        let c = dot(&v, rhs) / lam;
        for i in 0..k {
            out[i] += c * v[i];
        }
    }
    out
}

struct AffineProjector<'a> {
    p: &'a AffineSdpProblem,
    gram: Vec<Vec<f64>>,
}

impl<'a> AffineProjector<'a> {
    fn new(p: &'a AffineSdpProblem) -> Self {
        let cs = &p.constraints;
        let gram = cs
            .iter()
            .map(|a| cs.iter().map(|b| a.matrix.inner(&b.matrix)).collect())
            .collect();
        AffineProjector { p, gram }
    }

    /// Euclidean projection onto the polyhedron of the constraints, by a
    /// small active-set iteration on the multipliers.
    fn project(&self, y: &SymMatrix) -> SymMatrix {
        let cs = &self.p.constraints;
        let m = cs.len();
        let vals: Vec<f64> = cs.iter().map(|c| c.matrix.inner(y)).collect();
        let mut active: Vec<bool> = cs
            .iter()
            .zip(&vals)
            .map(|(c, v)| c.sense == SdpSense::Eq || *v > c.target)
            .collect();
        let mut mu = vec![0.0; m];
        for _ in 0..4 * m + 4 {
            let idx: Vec<usize> = (0..m).filter(|i| active[*i]).collect();
            mu = vec![0.0; m];
            if !idx.is_empty() {
                let g = SymMatrix::from_upper(idx.len(), |a, b| self.gram[idx[a]][idx[b]]);
                let rhs: Vec<f64> = idx.iter().map(|i| vals[*i] - cs[*i].target).collect();
                for (k, v) in pinv_solve(&g, &rhs).into_iter().enumerate() {
                    mu[idx[k]] = v;
                }
            }
            let neg = idx
                .iter()
                .filter(|i| cs[**i].sense == SdpSense::Le && mu[**i] < 0.0)
                .min_by(|a, b| mu[**a].partial_cmp(&mu[**b]).unwrap());
            if let Some(i) = neg {
                active[*i] = false;
                continue;
            }
            // values at the candidate: vals - G mu
            let mut worst = None;
            let mut worst_v = 0.0;
            for i in 0..m {
                if active[i] {
                    continue;
                }
                let vi = vals[i] - (0..m).map(|j| self.gram[i][j] * mu[j]).sum::<f64>();
                let viol = vi - cs[i].target;
                if viol > 1e-14 * self.p.scale() && viol > worst_v {
                    worst_v = viol;
                    worst = Some(i);
                }
            }
            match worst {
                Some(i) => active[i] = true,
                None => break,
            }
        }
        let mats: Vec<SymMatrix> = cs.iter().map(|c| c.matrix.clone()).collect();
        let neg_mu: Vec<f64> = mu.iter().map(|v| -v).collect();
        y.add(&SymMatrix::combination(&neg_mu, &mats))
    }
}

fn rebuild(spec: &Spectrum, f: impl Fn(f64) -> f64) -> SymMatrix {
    let n = spec.eigenvalues.len();
    let w: Vec<f64> = spec.eigenvalues.iter().map(|v| f(*v)).collect();
    let v = &spec.eigenvectors;
    SymMatrix::from_upper(n, |i, j| (0..n).map(|k| v[(i, k)] * w[k] * v[(j, k)]).sum())
}

fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SymMatrix::from_upper(n, |i, j| {
        (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum::<f64>() / n as f64
    })
}

/// Alternating projections between the PSD cone and the affine/polyhedral
/// constraint set, with optional over-relaxation and interior clipping.
pub fn solve_feasible_psd(p: &AffineSdpProblem, opts: &SdpOptions) -> SdpOutcome {
    let n = p.order;
    let proj = AffineProjector::new(p);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut y = random_psd(n, &mut rng);
    let scale = p.scale();
    let mut best_gap = f64::INFINITY;
    let mut window_best = f64::INFINITY;
    let mut gap = f64::INFINITY;
    for it in 0..opts.max_iter {
        let z = proj.project(&y);
        let Ok(spec) = eigh(&z) else {
            return SdpOutcome::InfeasibleAtTolerance {
                gap,
                iterations: it,
            };
        };
        let zs = spec.spectral_norm().max(1.0);
        if spec.min() >= -opts.psd_tol * zs {
            return match PsdSolution::new(p, z) {
                Ok(sol) => SdpOutcome::Feasible(sol),
                Err(_) => SdpOutcome::InfeasibleAtTolerance {
                    gap,
                    iterations: it,
                },
            };
        }
        let clipped = rebuild(&spec, |v| v.max(opts.interior_margin));
        gap = spec
            .eigenvalues
            .iter()
            .map(|v| v.min(0.0).powi(2))
            .sum::<f64>()
            .sqrt();
        best_gap = best_gap.min(gap);
        let w = opts.relaxation;
        y = if w == 1.0 {
            clipped
        } else {
            y.scaled(1.0 - w).add(&clipped.scaled(w))
        };
        if (it + 1) % opts.stall_window == 0 {
            if best_gap > 0.99 * window_best && best_gap > 1e-6 * scale {
                return SdpOutcome::InfeasibleAtTolerance {
                    gap: best_gap,
                    iterations: it + 1,
                };
            }
            window_best = best_gap;
        }
    }
    SdpOutcome::InfeasibleAtTolerance {
        gap: best_gap,
        iterations: opts.max_iter,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepKind {
    /// Move along a null direction of the constraint map to the PSD boundary.
    NullDirection { t: f64 },
    /// Rank two to rank one by intersecting two conics in a 3-dimensional
    /// subspace.
    Conic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub rank_before: usize,
    pub rank_after: usize,
    pub kind: StepKind,
    /// `max_i |res_i(after) - res_i(before)|` divided by the residual scale.
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankReduction {
    pub solution: PsdSolution,
    /// `Some(k)` when no reduction below rank `k > target` was possible.
    pub stuck: Option<usize>,
    pub steps: Vec<ReductionStep>,
}

/// Symmetric matrix from coordinates in the orthonormal basis
/// `E_kk`, `(E_kl + E_lk)/sqrt(2)` (pairs `k <= l` in row-major order).
fn sym_from_coords(r: usize, c: &[f64]) -> SymMatrix {
    let mut idx = 0;
    let mut m = vec![vec![0.0; r]; r];
    for k in 0..r {
        for l in k..r {
            if k == l {
                m[k][k] = c[idx];
            } else {
                let v = c[idx] / std::f64::consts::SQRT_2;
                m[k][l] = v;
                m[l][k] = v;
            }
            idx += 1;
        }
    }
    SymMatrix::from_upper(r, |i, j| m[i][j])
}

fn coords_of(b: &SymMatrix) -> Vec<f64> {
    let r = b.order();
    let mut out = Vec::with_capacity(r * (r + 1) / 2);
    for k in 0..r {
        for l in k..r {
            out.push(if k == l {
                b.get(k, k)
            } else {
                std::f64::consts::SQRT_2 * b.get(k, l)
            });
        }
    }
    out
}

/// Columns `sqrt(w_k) v_k` for the leading `r` eigenpairs.
fn factor(spec: &Spectrum, r: usize) -> Matrix {
    let cols: Vec<Vec<f64>> = (0..r)
        .map(|k| {
            spec.vector(k)
                .iter()
                .map(|v| v * spec.eigenvalues[k].max(0.0).sqrt())
                .collect()
        })
        .collect();
    Matrix::from_columns(&cols)
}

/// A symmetric `Delta` with `<B_i, Delta> = 0` for all `i`, if the map has a
/// null space at tolerance.
fn null_direction(bs: &[SymMatrix]) -> Option<SymMatrix> {
    let r = bs[0].order();
    let d = r * (r + 1) / 2;
    let rows: Vec<Vec<f64>> = bs.iter().map(coords_of).collect();
    let ltl = SymMatrix::from_upper(d, |a, b| rows.iter().map(|row| row[a] * row[b]).sum());
    let spec = eigh(&ltl).ok()?;
    let smax = spec.max().max(0.0).sqrt();
    let smin = spec.min().max(0.0).sqrt();
    // fewer rows than coordinates always leaves a null space; the normal
    // matrix only resolves its smallest singular value to about sqrt(eps)
    if bs.len() >= d && smin > NULL_REL_TOL * smax.max(1.0) {
        return None;
    }
    Some(sym_from_coords(r, &spec.vector(d - 1)))
}

/// Reduces the rank of a feasible point of an equality-constrained problem,
/// keeping every `<Q_i, X>` fixed.
pub fn rank_reduce(
    sol: &PsdSolution,
    p: &AffineSdpProblem,
    target_rank: usize,
) -> Result<RankReduction> {
    if !p.all_equalities() {
        return argument("rank reduction needs equality constraints only");
    }
    if sol.x.order() != p.order {
        return argument("solution order does not match the problem");
    }
    let mats: Vec<SymMatrix> = p.constraints.iter().map(|c| c.matrix.clone()).collect();
    let mut x = sol.x.clone();
    let mut steps = Vec::new();
    let mut stuck = None;
    for _ in 0..=p.order {
        let spec = eigh(&x)?;
        let r = numerical_rank(&spec);
        if r <= target_rank {
            break;
        }
        let before = p.residuals(&x);
        let v = factor(&spec, r);
        let bs: Vec<SymMatrix> = mats.iter().map(|q| q.congruence(&v)).collect();
        let (next, kind) = if let Some(delta) = null_direction(&bs) {
            let ds = eigh(&delta)?;
            let t_pos = if ds.min() < 0.0 {
                -1.0 / ds.min()
            } else {
                f64::INFINITY
            };
            let t_neg = if ds.max() > 0.0 {
                -1.0 / ds.max()
            } else {
                f64::NEG_INFINITY
            };
            let t = if t_pos <= -t_neg { t_pos } else { t_neg };
            let step = SymMatrix::identity(r).add(&delta.scaled(t));
            let projected = rebuild(&eigh(&step)?, |w| w.max(0.0));
            (
                projected.congruence(&v.transpose()),
                StepKind::NullDirection { t },
            )
        } else if r == 2 && target_rank <= 1 && mats.len() == 3 {
            match conic_rank_one(&mats, &x, &spec)? {
                Some(y) => (SymMatrix::outer(&y), StepKind::Conic),
                None => {
                    stuck = Some(r);
                    break;
                }
            }
        } else {
            stuck = Some(r);
            break;
        };
        let after = p.residuals(&next);
        let drift = before
            .iter()
            .zip(&after)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / p.residual_scale(&x);
        let rank_after = numerical_rank(&eigh(&next)?);
        steps.push(ReductionStep {
            rank_before: r,
            rank_after,
            kind,
            drift,
        });
        x = next;
        if rank_after >= r {
            stuck = Some(rank_after);
            break;
        }
    }
    let solution = PsdSolution::new(p, x)?;
    if stuck.is_none() && solution.rank > target_rank {
        stuck = Some(solution.rank);
    }
    Ok(RankReduction {
        solution,
        stuck,
        steps,
    })
}

/// Rank-2 `X` under three equalities: find `y` in a 3-dimensional subspace
/// containing `range(X)` with `y'B_i y = <Q_i, X>`.
fn conic_rank_one(mats: &[SymMatrix], x: &SymMatrix, spec: &Spectrum) -> Result<Option<Vec<f64>>> {
    let n = x.order();
    if n < 3 {
        return Ok(None);
    }
    let eps: Vec<f64> = mats.iter().map(|q| q.inner(x)).collect();
    let enorm = norm2(&eps);
    if enorm == 0.0 {
        return Ok(None);
    }
    let e_hat: Vec<f64> = eps.iter().map(|v| v / enorm).collect();
    let comp = crate::spectral::hyperplane_basis(&e_hat)?;
    let (n1, n2) = (comp.column(0), comp.column(1));
    let v1 = spec.vector(0);
    let v2 = spec.vector(1);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 2..n {
        let w = Matrix::from_columns(&[v1.clone(), v2.clone(), spec.vector(k)]);
        let bs: Vec<SymMatrix> = mats.iter().map(|q| q.congruence(&w)).collect();
        let c1 = SymMatrix::combination(&n1, &bs);
        let c2 = SymMatrix::combination(&n2, &bs);
        let dm = SymMatrix::combination(&e_hat, &bs);
        for cand in conic_intersections(&c1, &c2) {
            let q = dm.quad_form(&cand);
            if q <= 0.0 {
                continue;
            }
            let s = (enorm / q).sqrt();
            let mut y: Vec<f64> = cand.iter().map(|v| v * s).collect();
            newton_polish(&bs, &eps, &mut y);
            let res = bs
                .iter()
                .zip(&eps)
                .fold(0.0f64, |m, (b, e)| m.max((b.quad_form(&y) - e).abs()));
            if best.as_ref().map_or(true, |(r, _)| res < *r) {
                best = Some((res, w.mul_vec(&y)));
            }
        }
        if let Some((res, _)) = &best {
            if *res <= 1e-9 * enorm.max(1.0) {
                break;
            }
        }
    }
    Ok(best
        .filter(|(res, _)| *res <= 1e-7 * enorm.max(1.0))
        .map(|(_, y)| y))
}

fn newton_polish(bs: &[SymMatrix], eps: &[f64], y: &mut [f64]) {
    for _ in 0..8 {
        let f: Vec<f64> = bs
            .iter()
            .zip(eps)
            .map(|(b, e)| b.quad_form(y) - e)
            .collect();
        let jac = Matrix::from_rows(
            &bs.iter()
                .map(|b| b.mul_vec(y).iter().map(|v| 2.0 * v).collect())
                .collect::<Vec<_>>(),
        );
        let Some(step) = solve(&jac, &f) else {
            return;
        };
        for (yi, si) in y.iter_mut().zip(&step) {
            *yi -= si;
        }
        if norm2(&step) <= 1e-15 * norm2(y) {
            return;
        }
    }
}

/// Null directions of a 2x2 symmetric form `[[a, b], [b, c]]`.
fn form_zeros_2(a: f64, b: f64, c: f64) -> Vec<[f64; 2]> {
    let s = SymMatrix::from_upper(2, |i, j| match (i, j) {
        (0, 0) => a,
        (1, 1) => c,
        _ => b,
    });
    let Ok(spec) = eigh(&s) else {
        return vec![];
    };
    let (l0, l1) = (spec.eigenvalues[0], spec.eigenvalues[1]);
    let (e0, e1) = (spec.vector(0), spec.vector(1));
    let top = l0.abs().max(l1.abs());
    if top == 0.0 {
        return vec![[1.0, 0.0], [0.0, 1.0]];
    }
    if l1.abs() <= 1e-12 * top {
        return vec![[e1[0], e1[1]]];
    }
    if l0 > 0.0 && l1 < 0.0 {
        let (p, q) = (l0.sqrt(), (-l1).sqrt());
        // p^2 u^2 = q^2 w^2 in eigen-coordinates (u, w)
        return [1.0, -1.0]
            .iter()
            .map(|sgn| {
                let (u, w) = (q, sgn * p);
                [u * e0[0] + w * e1[0], u * e0[1] + w * e1[1]]
            })
            .collect();
    }
    vec![]
}

/// Real common zeros (up to scale) of two ternary quadratic forms.
fn conic_intersections(c1: &SymMatrix, c2: &SymMatrix) -> Vec<Vec<f64>> {
    let det3 = |m: &SymMatrix| {
        let g = |i, j| m.get(i, j);
        g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
            - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
    };
    let s1 = c1.frobenius_norm().max(1e-300);
    let s2 = c2.frobenius_norm().max(1e-300);
    let (a, b) = (c1.scaled(1.0 / s1), c2.scaled(1.0 / s2));
    let pencil = |phi: f64| a.scaled(phi.cos()).add(&b.scaled(phi.sin()));
    let h = |phi: f64| det3(&pencil(phi));

    let samples = 720;
    let mut roots = Vec::new();
    let step = std::f64::consts::PI / samples as f64;
    let mut prev = h(0.0);
    let mut min_abs = (prev.abs(), 0.0);
    for k in 1..=samples {
        let phi = k as f64 * step;
        let cur = h(phi);
        if cur.abs() < min_abs.0 {
            min_abs = (cur.abs(), phi);
        }
        if prev == 0.0 {
            roots.push(phi - step);
        } else if prev * cur < 0.0 {
            let (mut lo, mut hi) = (phi - step, phi);
            let mut flo = prev;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = h(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm * flo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    if roots.is_empty() {
        roots.push(min_abs.1);
    }

    let mut out = Vec::new();
    for phi in roots {
        let p = pencil(phi);
        // the other conic: whichever carries more weight off the pencil member
        let other = if phi.sin().abs() >= phi.cos().abs() {
            &a
        } else {
            &b
        };
        let Ok(spec) = eigh(&p) else { continue };
        let top = spec.spectral_norm();
        let mut lines: Vec<Vec<f64>> = Vec::new();
        let ev = &spec.eigenvalues;
        // the eigenvalue closest to zero is discarded
        let z = (0..3)
            .min_by(|i, j| ev[*i].abs().partial_cmp(&ev[*j].abs()).unwrap())
            .unwrap();
        let rest: Vec<usize> = (0..3).filter(|i| *i != z).collect();
        let (ia, ib) = (rest[0], rest[1]);
        let (la, lb) = (ev[ia], ev[ib]);
        let (ea, eb) = (spec.vector(ia), spec.vector(ib));
        if lb.abs() <= 1e-10 * top {
            lines.push(ea.clone());
        } else if la * lb < 0.0 {
            let (pa, pb) = (la.abs().sqrt(), lb.abs().sqrt());
            for sgn in [1.0, -1.0] {
                lines.push((0..3).map(|i| pa * ea[i] + sgn * pb * eb[i]).collect());
            }
        } else {
            out.push(spec.vector(z));
            continue;
        }
        for l in lines {
            let Ok(basis) = crate::spectral::hyperplane_basis(&l) else {
                continue;
            };
            let (u, w) = (basis.column(0), basis.column(1));
            let ou = other.mul_vec(&u);
            let ow = other.mul_vec(&w);
            for [s, t] in form_zeros_2(dot(&u, &ou), dot(&u, &ow), dot(&w, &ow)) {
                let y: Vec<f64> = (0..3).map(|i| s * u[i] + t * w[i]).collect();
                let len = norm2(&y);
                if len > 0.0 {
                    out.push(y.iter().map(|v| v / len).collect());
                }
            }
        }
    }
    out.into_iter()
        .filter(|y| a.quad_form(y).abs() <= 1e-6 && b.quad_form(y).abs() <= 1e-6)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrictPointOptions {
    pub grid: usize,
    pub seed: u64,
}

impl Default for StrictPointOptions {
    fn default() -> Self {
        StrictPointOptions {
            grid: certsearch::DEFAULT_SIMPLEX_GRID,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StrictPointOutcome {
    /// Unit vector with `x'Q_i x < 0` for all `i`.
    Point(Vec<f64>),
    NoStrictPoint(PsdCombination),
}

fn stage(stage: &'static str, detail: impl Into<String>) -> Error {
    Error::Pipeline {
        stage,
        detail: detail.into(),
    }
}

/// Either a common strict negative point of `Q_1, Q_2, Q_3` or a PSD
/// combination with nonnegative weights. Assumes a positive definite
/// combination with signed weights exists.
pub fn extract_strict_point(
    qs: &[SymMatrix],
    opts: &StrictPointOptions,
) -> Result<StrictPointOutcome> {
    if qs.len() != 3 {
        return argument("exactly three matrices are required");
    }
    let n = qs[0].order();
    if n < 3 || qs.iter().any(|q| q.order() != n) {
        return argument("matrices must share an order of at least 3");
    }
    let best_margin = match certsearch::find_psd_combination(qs, opts.grid)? {
        PsdSearch::Found(c) => return Ok(StrictPointOutcome::NoStrictPoint(c)),
        PsdSearch::NoneFound { best_margin, .. } => best_margin,
    };
    let scale = certsearch::matrix_scale(qs);

    // max tau over {tr X = 1, <Q_i, X> <= -tau} equals -best_margin
    let mut tau = -best_margin / 2.0;
    let mut feasible = None;
    for attempt in 0..10 {
        let mut cons: Vec<SdpConstraint> = qs
            .iter()
            .map(|q| SdpConstraint::le(q.clone(), -tau))
            .collect();
        cons.push(SdpConstraint::eq(SymMatrix::identity(n), 1.0));
        let p = AffineSdpProblem::new(n, cons, None)?;
        let sopts = SdpOptions {
            seed: opts.seed.wrapping_add(attempt),
            interior_margin: tau / n as f64,
            ..Default::default()
        };
        if let SdpOutcome::Feasible(sol) = solve_feasible_psd(&p, &sopts) {
            feasible = Some(sol);
            break;
        }
        tau *= 0.5;
    }
    let sol =
        feasible.ok_or_else(|| stage("sdp", format!("no feasible point down to tau = {tau:e}")))?;

    let targets: Vec<f64> = qs.iter().map(|q| q.inner(&sol.x)).collect();
    if targets.iter().any(|t| *t >= 0.0) {
        return Err(stage(
            "sdp",
            format!("achieved values {targets:?} are not all negative"),
        ));
    }
    let eqp = AffineSdpProblem::equalities(n, qs, &targets)?;
    let start = PsdSolution::new(&eqp, sol.x)?;
    let red = rank_reduce(&start, &eqp, 1)?;
    if let Some(k) = red.stuck {
        return Err(stage("rank_reduce", format!("stuck at rank {k}")));
    }
    let spec = eigh(&red.solution.x)?;
    let lead = spec.eigenvalues[0];
    if lead <= 0.0 {
        return Err(stage("rank_reduce", "reduced matrix vanished"));
    }
    let mut x = spec.vector(0);
    let len = norm2(&x);
    x.iter_mut().for_each(|v| *v /= len);
    let values: Vec<f64> = qs.iter().map(|q| q.quad_form(&x)).collect();
    if values.iter().any(|v| *v >= -1e-9 * scale) {
        return Err(stage(
            "verify",
            format!("extracted point has values {values:?}"),
        ));
    }
    Ok(StrictPointOutcome::Point(x))
}

/// Common strict point check used by callers that did not run the pipeline.
pub fn is_strict_point(qs: &[SymMatrix], x: &[f64]) -> bool {
    let scale = certsearch::matrix_scale(qs) * dot(x, x).max(f64::MIN_POSITIVE);
    qs.iter().all(|q| q.quad_form(x) < -1e-9 * scale)
}
