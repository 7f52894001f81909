//! Data model for systems of quadratic inequalities
//! `x'A_i x + 2 b_i'x + c_i < 0` (or `<= 0`), `i = 1..m`.

use crate::error::{argument, Result};
use crate::linalg::{dot, Matrix};
use crate::spectral;

/// Default numerical cushion used when testing strict/nonstrict membership.
pub const DEFAULT_MARGIN: f64 = 1e-9;
/// Default relative tolerance for classifying an eigenvalue as negative.
pub const DEFAULT_NU_TOL: f64 = 1e-9;

/// Dense real symmetric matrix. Entries `(i, j)` and `(j, i)` are always
/// bit-identical and finite.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        SymMatrix {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::diag(&vec![1.0; order])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = *v;
        }
        m
    }

    /// Builds the matrix from its upper triangle: `f(i, j)` is called for
    /// `i <= j` only and mirrored.
    pub fn from_upper(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                m.data[i * order + j] = v;
                m.data[j * order + i] = v;
            }
        }
        m
    }

    /// Exact construction: rows must be square, finite and exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return argument(format!("matrix is not square ({k} rows)"));
        }
        for i in 0..k {
            for j in 0..k {
                if !rows[i][j].is_finite() {
                    return argument(format!("entry ({i},{j}) is not finite"));
                }
                if rows[i][j] != rows[j][i] {
                    return argument(format!("matrix is not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(Self::from_upper(k, |i, j| rows[i][j]))
    }

    /// Averages `rows` with its transpose. Asymmetry larger than
    /// `rel_tol * max(1, max |entry|)` is rejected.
    pub fn symmetrized(rows: &[Vec<f64>], rel_tol: f64) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return argument(format!("matrix is not square ({k} rows)"));
        }
        let mut amax = 0.0f64;
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return argument(format!("entry ({i},{j}) is not finite"));
                }
                amax = amax.max(v.abs());
            }
        }
        let limit = rel_tol * amax.max(1.0);
        for i in 0..k {
            for j in i + 1..k {
                if (rows[i][j] - rows[j][i]).abs() > limit {
                    return argument(format!(
                        "asymmetry {:e} at ({i},{j}) exceeds tolerance",
                        (rows[i][j] - rows[j][i]).abs()
                    ));
                }
            }
        }
        Ok(Self::from_upper(k, |i, j| {
            if i == j {
                rows[i][i]
            } else {
                0.5 * (rows[i][j] + rows[j][i])
            }
        }))
    }

    /// Symmetric part of a general square matrix, `(M + M')/2`.
    pub fn sym_part(m: &Matrix) -> Self {
        assert_eq!(m.rows(), m.cols());
        Self::from_upper(m.rows(), |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)])
            }
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.order.max(1))
            .take(self.order)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.to_rows())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix {
            order: self.order,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.order, other.order, "order mismatch");
        SymMatrix {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// `sum_i w_i M_i`; all matrices must share one order.
    pub fn combination(weights: &[f64], mats: &[SymMatrix]) -> Self {
        assert_eq!(
            weights.len(),
            mats.len(),
            "weights/matrices length mismatch"
        );
        assert!(!mats.is_empty());
        let order = mats[0].order;
        let mut data = vec![0.0; order * order];
        for (w, m) in weights.iter().zip(mats) {
            assert_eq!(m.order, order, "order mismatch");
            if *w == 0.0 {
                continue;
            }
            for (d, v) in data.iter_mut().zip(&m.data) {
                *d += w * v;
            }
        }
        SymMatrix { order, data }
    }

    /// Frobenius inner product `<self, other> = tr(self * other)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.order, other.order, "order mismatch");
        dot(&self.data, &other.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        spectral::eigenvalues(self).map_or_else(
            |_| self.frobenius_norm(),
            |w| w.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        )
    }

    /// `x' M x`, accumulated over the upper triangle.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.order, "dimension mismatch");
        let k = self.order;
        let mut s = 0.0;
        for i in 0..k {
            let row = &self.data[i * k..(i + 1) * k];
            let mut off = 0.0;
            for j in i + 1..k {
                off += row[j] * x[j];
            }
            s += x[i] * (row[i] * x[i] + 2.0 * off);
        }
        s
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let k = self.order;
        (0..k)
            .map(|i| dot(&self.data[i * k..(i + 1) * k], x))
            .collect()
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_upper(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    /// `U' M U` for a `k x r` matrix `U`.
    pub fn congruence(&self, u: &Matrix) -> Self {
        assert_eq!(u.rows(), self.order, "congruence shape mismatch");
        let mu = self.to_matrix().matmul(u);
        let r = u.cols();
        Self::from_upper(r, |a, b| {
            (0..self.order).map(|i| u[(i, a)] * mu[(i, b)]).sum()
        })
    }

    /// `x x'`.
    pub fn outer(x: &[f64]) -> Self {
        Self::from_upper(x.len(), |i, j| x[i] * x[j])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `< 0`
    Strict,
    /// `<= 0`
    Nonstrict,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Strict => "strict",
            Sense::Nonstrict => "nonstrict",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Sense::Strict),
            "nonstrict" => Ok(Sense::Nonstrict),
            other => argument(format!("unknown sense `{other}`")),
        }
    }

    /// Whether the value `v` of a constraint form satisfies this sense with
    /// the given cushion.
    pub fn admits(self, v: f64, margin: f64) -> bool {
        match self {
            Sense::Strict => v < -margin,
            Sense::Nonstrict => v <= margin,
        }
    }
}

/// One constraint `x'Ax + 2b'x + c (sense) 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadConstraint {
    pub a: SymMatrix,
    pub b: Vec<f64>,
    pub c: f64,
    pub sense: Sense,
}

impl QuadConstraint {
    pub fn new(a: SymMatrix, b: Vec<f64>, c: f64, sense: Sense) -> Result<Self> {
        if b.len() != a.order() {
            return argument(format!(
                "b has length {} but A has order {}",
                b.len(),
                a.order()
            ));
        }
        if !c.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return argument("non-finite coefficient");
        }
        Ok(QuadConstraint { a, b, c, sense })
    }

    pub fn dim(&self) -> usize {
        self.a.order()
    }

    /// Splits a homogenized `(n+1) x (n+1)` matrix back into `(A, b, c)`.
    pub fn from_homogenized(m: &SymMatrix, sense: Sense) -> Result<Self> {
        let k = m.order();
        if k == 0 {
            return argument("empty homogenized matrix");
        }
        let n = k - 1;
        let a = SymMatrix::from_upper(n, |i, j| m.get(i, j));
        let b = (0..n).map(|i| m.get(i, n)).collect();
        Self::new(a, b, m.get(n, n), sense)
    }
}

/// `x'Ax + 2b'x + c`.
pub fn evaluate(q: &QuadConstraint, x: &[f64]) -> Result<f64> {
    if x.len() != q.dim() {
        return argument(format!(
            "point has dimension {} but constraint has {}",
            x.len(),
            q.dim()
        ));
    }
    Ok(q.a.quad_form(x) + 2.0 * dot(&q.b, x) + q.c)
}

/// The block matrix `[[A, b], [b', c]]`.
pub fn homogenized_matrix(q: &QuadConstraint) -> SymMatrix {
    let n = q.dim();
    SymMatrix::from_upper(n + 1, |i, j| match (i < n, j < n) {
        (true, true) => q.a.get(i, j),
        (true, false) => q.b[i],
        _ => q.c,
    })
}

/// Aggregation weights. Unsigned weights are nonnegative and not all zero;
/// signed weights (PDLC multipliers) are unrestricted.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    values: Vec<f64>,
    signed: bool,
}

impl Weights {
    pub fn nonnegative(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return argument("aggregation weights must be finite and nonnegative");
        }
        if values.iter().all(|v| *v == 0.0) {
            return argument("aggregation weights are all zero");
        }
        Ok(Weights {
            values,
            signed: false,
        })
    }

    pub fn signed(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return argument("weights must be finite");
        }
        Ok(Weights {
            values,
            signed: true,
        })
    }

    /// The unit vector `e_i` in `R^m`.
    pub fn unit(m: usize, i: usize) -> Self {
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        Weights {
            values: v,
            signed: false,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rescaled onto the unit simplex (unsigned) or unit sphere (signed).
    pub fn normalized(&self) -> Self {
        let s = if self.signed {
            self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
        } else {
            self.values.iter().sum()
        };
        Weights {
            values: self.values.iter().map(|v| v / s).collect(),
            signed: self.signed,
        }
    }
}

/// A system of `m >= 1` quadratic constraints in `R^n` sharing one sense.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadSystem {
    n: usize,
    sense: Sense,
    constraints: Vec<QuadConstraint>,
}

impl QuadSystem {
    pub fn new(constraints: Vec<QuadConstraint>) -> Result<Self> {
        let Some(first) = constraints.first() else {
            return argument("a system needs at least one constraint");
        };
        let (n, sense) = (first.dim(), first.sense);
        for (i, q) in constraints.iter().enumerate() {
            if q.dim() != n {
                return argument(format!(
                    "constraint {i} has dimension {} (expected {n})",
                    q.dim()
                ));
            }
            if q.sense != sense {
                return argument("all constraints of a system must share one sense");
            }
        }
        Ok(QuadSystem {
            n,
            sense,
            constraints,
        })
    }

    /// Convenience constructor from `(A, b, c)` triples.
    pub fn from_parts(sense: Sense, parts: Vec<(SymMatrix, Vec<f64>, f64)>) -> Result<Self> {
        let cs = parts
            .into_iter()
            .map(|(a, b, c)| QuadConstraint::new(a, b, c, sense))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn constraints(&self) -> &[QuadConstraint] {
        &self.constraints
    }

    /// Same constraints with a different sense (the closed/open variant).
    pub fn with_sense(&self, sense: Sense) -> Self {
        let constraints = self
            .constraints
            .iter()
            .map(|q| QuadConstraint { sense, ..q.clone() })
            .collect();
        QuadSystem {
            n: self.n,
            sense,
            constraints,
        }
    }

    pub fn homogenized(&self) -> Vec<SymMatrix> {
        self.constraints.iter().map(homogenized_matrix).collect()
    }

    /// Values of every constraint form at `x`.
    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.constraints.iter().map(|q| evaluate(q, x)).collect()
    }

    pub fn require_three(&self) -> Result<()> {
        if self.m() != 3 {
            return argument(format!(
                "operation needs exactly three constraints, system has {}",
                self.m()
            ));
        }
        Ok(())
    }
}

/// `(sum l_i A_i, sum l_i b_i, sum l_i c_i)` with the system's sense.
pub fn aggregate(sys: &QuadSystem, w: &Weights) -> Result<QuadConstraint> {
    if w.len() != sys.m() {
        return argument(format!("{} weights for {} constraints", w.len(), sys.m()));
    }
    if !w.is_signed() && w.values().iter().all(|v| *v == 0.0) {
        return argument("aggregation weights are all zero");
    }
    let mats: Vec<SymMatrix> = sys.constraints.iter().map(|q| q.a.clone()).collect();
    let a = SymMatrix::combination(w.values(), &mats);
    let mut b = vec![0.0; sys.n];
    let mut c = 0.0;
    for (l, q) in w.values().iter().zip(&sys.constraints) {
        for (bi, qi) in b.iter_mut().zip(&q.b) {
            *bi += l * qi;
        }
        c += l * q.c;
    }
    QuadConstraint::new(a, b, c, sys.sense)
}

/// Number of eigenvalues of `m` below `-tol * max(1, ||m||_2)`.
pub fn count_negative(m: &SymMatrix, tol: f64) -> Result<usize> {
    if tol <= 0.0 {
        return argument("tolerance must be positive");
    }
    let w = spectral::eigenvalues(m)?;
    let scale = w.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    Ok(w.iter().filter(|v| **v < -tol * scale).count())
}

/// Negative-eigenvalue count of the quadratic block `A` (not of the
/// homogenized matrix).
pub fn nu(q: &QuadConstraint, tol: f64) -> Result<usize> {
    count_negative(&q.a, tol)
}

/// Membership in the set described by `sys`, with `margin` as cushion:
/// strict constraints need value `< -margin`, nonstrict ones `<= margin`.
pub fn contains_point(sys: &QuadSystem, x: &[f64], margin: f64) -> Result<bool> {
    if x.len() != sys.n {
        return argument(format!(
            "point has dimension {} but system has {}",
            x.len(),
            sys.n
        ));
    }
    for q in &sys.constraints {
        if !sys.sense.admits(evaluate(q, x)?, margin) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example1() -> QuadSystem {
        QuadSystem::from_parts(
            Sense::Strict,
            vec![
                (SymMatrix::diag(&[1.0, 1.0, 0.0]), vec![0.0; 3], -2.0),
                (SymMatrix::diag(&[-1.0, -1.0, 0.0]), vec![0.0; 3], 1.0),
                (SymMatrix::diag(&[-1.0, 1.0, 1.0]), vec![3.0, 0.0, 0.0], 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_at_origin_is_constant_term() {
        let sys = example1();
        assert_eq!(evaluate(&sys.constraints()[0], &[0.0; 3]).unwrap(), -2.0);
        assert_eq!(sys.values(&[0.0; 3]).unwrap(), vec![-2.0, 1.0, 0.0]);
    }

    #[test]
    fn evaluate_rejects_wrong_dimension() {
        let sys = example1();
        assert!(evaluate(&sys.constraints()[0], &[0.0; 2]).is_err());
    }

    #[test]
    fn aggregation_of_last_two_constraints() {
        let sys = example1();
        let q = aggregate(&sys, &Weights::nonnegative(vec![0.0, 1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(q.a, SymMatrix::diag(&[-2.0, 0.0, 1.0]));
        assert_eq!(q.b, vec![3.0, 0.0, 0.0]);
        assert_eq!(q.c, 1.0);
        // -2(0.01) + 0 + 6(-0.1) + 1
        let v = evaluate(&q, &[-0.1, 0.0, 0.0]).unwrap();
        assert!((v - 0.38).abs() < 1e-12);
        assert_eq!(nu(&q, DEFAULT_NU_TOL).unwrap(), 1);
    }

    #[test]
    fn unit_weights_return_the_constraint() {
        let sys = example1();
        let q = aggregate(&sys, &Weights::unit(3, 0)).unwrap();
        assert_eq!(q, sys.constraints()[0]);
    }

    #[test]
    fn zero_weights_are_rejected() {
        assert!(Weights::nonnegative(vec![0.0, 0.0, 0.0]).is_err());
        assert!(Weights::nonnegative(vec![1.0, -1.0, 0.0]).is_err());
        assert!(Weights::signed(vec![0.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn homogenized_block_layout() {
        let sys = example1();
        let m = homogenized_matrix(&sys.constraints()[2]);
        assert_eq!(m.order(), 4);
        assert_eq!(m.get(0, 3), 3.0);
        assert_eq!(m.get(3, 0), 3.0);
        assert_eq!(m.get(3, 3), 0.0);
        let back = QuadConstraint::from_homogenized(&m, Sense::Strict).unwrap();
        assert_eq!(back, sys.constraints()[2]);

        let corner =
            QuadConstraint::new(SymMatrix::zeros(2), vec![0.0; 2], 1.0, Sense::Strict).unwrap();
        let h = homogenized_matrix(&corner);
        let nonzero: Vec<_> = h.as_slice().iter().filter(|v| **v != 0.0).collect();
        assert_eq!(nonzero, vec![&1.0]);
        assert_eq!(h.get(2, 2), 1.0);
    }

    #[test]
    fn nu_counts_on_quadratic_block() {
        let sys = example1();
        assert_eq!(nu(&sys.constraints()[0], DEFAULT_NU_TOL).unwrap(), 0);
        assert_eq!(nu(&sys.constraints()[2], DEFAULT_NU_TOL).unwrap(), 1);
        assert_eq!(
            count_negative(&SymMatrix::zeros(3), DEFAULT_NU_TOL).unwrap(),
            0
        );
    }

    #[test]
    fn membership_examples() {
        let sys = example1();
        assert!(!contains_point(&sys, &[2.0, 0.0, 0.0], DEFAULT_MARGIN).unwrap());
        assert!(!contains_point(&sys, &[0.0, 0.0, 0.0], DEFAULT_MARGIN).unwrap());
        assert!(contains_point(&sys, &[-1.0, 0.5, 0.0], DEFAULT_MARGIN).unwrap());
        let closed = sys.with_sense(Sense::Nonstrict);
        // boundary point of the closed set: x1^2 + x2^2 = 1 is allowed
        assert!(contains_point(&closed, &[-1.0, 0.0, 0.0], DEFAULT_MARGIN).unwrap());
        assert!(!contains_point(&sys, &[-1.0, 0.0, 0.0], DEFAULT_MARGIN).unwrap());
    }

    #[test]
    fn symmetrize_on_load() {
        let rows = vec![vec![1.0, 2.0], vec![2.0 + 1e-14, 3.0]];
        let m = SymMatrix::symmetrized(&rows, 1e-12).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        let bad = vec![vec![1.0, 2.0], vec![2.1, 3.0]];
        assert!(SymMatrix::symmetrized(&bad, 1e-12).is_err());
        assert!(SymMatrix::from_rows(&rows).is_err());
    }

    #[test]
    fn mixed_senses_rejected() {
        let a =
            QuadConstraint::new(SymMatrix::identity(2), vec![0.0; 2], -1.0, Sense::Strict).unwrap();
        let b = QuadConstraint {
            sense: Sense::Nonstrict,
            ..a.clone()
        };
        assert!(QuadSystem::new(vec![a, b]).is_err());
        assert!(QuadSystem::new(vec![]).is_err());
    }

    fn sym(k: usize) -> impl Strategy<Value = SymMatrix> {
        prop::collection::vec(-5.0f64..5.0, k * k)
            .prop_map(move |v| SymMatrix::from_upper(k, |i, j| v[i * k + j]))
    }

    fn constraint(k: usize) -> impl Strategy<Value = QuadConstraint> {
        (sym(k), prop::collection::vec(-5.0f64..5.0, k), -5.0f64..5.0)
            .prop_map(|(a, b, c)| QuadConstraint::new(a, b, c, Sense::Strict).unwrap())
    }

    proptest! {
        #[test]
        fn aggregation_is_bilinear(
            qs in prop::collection::vec(constraint(3), 3),
            l in prop::collection::vec(0.0f64..3.0, 3),
            x in prop::collection::vec(-4.0f64..4.0, 3),
        ) {
            prop_assume!(l.iter().any(|v| *v > 0.0));
            let sys = QuadSystem::new(qs).unwrap();
            let agg = aggregate(&sys, &Weights::nonnegative(l.clone()).unwrap()).unwrap();
            let lhs = evaluate(&agg, &x).unwrap();
            let parts: Vec<f64> = sys.values(&x).unwrap().iter().zip(&l).map(|(v, w)| v * w).collect();
            let rhs: f64 = parts.iter().sum();
            let scale = parts.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }

        #[test]
        fn homogenization_is_consistent(q in constraint(4), x in prop::collection::vec(-4.0f64..4.0, 4)) {
            let direct = evaluate(&q, &x).unwrap();
            let mut xh = x.clone();
            xh.push(1.0);
            let lifted = homogenized_matrix(&q).quad_form(&xh);
            let scale = homogenized_matrix(&q).as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()))
                * xh.iter().map(|v| v * v).sum::<f64>();
            prop_assert!((direct - lifted).abs() <= 1e-12 * scale);
        }
    }
}
