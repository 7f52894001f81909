//! Dense symmetric eigensolver (cyclic Jacobi) and the spectral predicates
//! built on it.

use crate::error::{argument, Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::quadcore::SymMatrix;

const MAX_SWEEPS: usize = 100;
const REL_OFF_TOL: f64 = 1e-12;

/// Eigenvalues sorted descending; column `i` of `eigenvectors` belongs to
/// `eigenvalues[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().unwrap_or(&0.0)
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.first().unwrap_or(&0.0)
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// `max |lambda|`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Unit normal of a linear hyperplane missing the open cone `{x'Mx < 0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FauxSeparator {
    pub normal: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SccClass {
    Separator(FauxSeparator),
    NotScc { negative_count: usize },
}

fn off_norm_sq(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    s
}

/// In-place cyclic Jacobi. `v`, when given, accumulates the rotations.
fn jacobi(a: &mut [f64], n: usize, mut v: Option<&mut [f64]>) -> Result<()> {
    let total: f64 = a.iter().map(|x| x * x).sum();
    if total == 0.0 || n < 2 {
        return Ok(());
    }
    let target = (REL_OFF_TOL * REL_OFF_TOL) * total;
    for _ in 0..MAX_SWEEPS {
        if off_norm_sq(a, n) <= target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if off_norm_sq(a, n) <= target {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )))
    }
}

fn check_finite(m: &SymMatrix) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        argument("matrix has non-finite entries")
    }
}

/// Full decomposition. Eigenvectors are sign-normalized so that their first
/// nonzero component is positive; equal eigenvalues are ordered by
/// lexicographically descending eigenvectors.
pub fn eigh(m: &SymMatrix) -> Result<Spectrum> {
    check_finite(m)?;
    let n = m.order();
    let mut a = m.as_slice().to_vec();
    let mut v = Matrix::identity(n).as_slice().to_vec();
    jacobi(&mut a, n, Some(&mut v))?;
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i * n + j]).collect();
            if let Some(first) = col.iter().find(|x| x.abs() > 1e-14) {
                if *first < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            (a[j * n + j], col)
        })
        .collect();
    pairs.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap()
            .then_with(|| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<Vec<f64>> = pairs.into_iter().map(|p| p.1).collect();
    let eigenvectors = if n == 0 {
        Matrix::zeros(0, 0)
    } else {
        Matrix::from_columns(&cols)
    };
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, sorted descending.
pub fn eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    let n = m.order();
    let mut a = m.as_slice().to_vec();
    jacobi(&mut a, n, None)?;
    let mut w: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    w.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(w)
}

pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.last().copied().unwrap_or(0.0))
}

/// `lambda_min(M) >= -tol * max(1, ||M||_2)`.
pub fn is_psd(m: &SymMatrix, tol: f64) -> Result<bool> {
    if tol < 0.0 {
        return argument("tolerance must be nonnegative");
    }
    let w = eigenvalues(m)?;
    let scale = w.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    Ok(w.last().map_or(true, |l| *l >= -tol * scale))
}

/// Returns the eigenvector of the single negative eigenvalue, or the
/// negative count when it is not exactly one.
pub fn classify_scc(m: &SymMatrix, tol: f64) -> Result<SccClass> {
    let spec = eigh(m)?;
    let scale = spec.spectral_norm().max(1.0);
    let negative_count = spec
        .eigenvalues
        .iter()
        .filter(|v| **v < -tol * scale)
        .count();
    if negative_count != 1 {
        return Ok(SccClass::NotScc { negative_count });
    }
    let mut normal = spec.vector(m.order() - 1);
    let len = norm2(&normal);
    normal.iter_mut().for_each(|x| *x /= len);
    Ok(SccClass::Separator(FauxSeparator { normal }))
}

/// `U' M U` after checking that `U` has orthonormal columns.
pub fn restrict(m: &SymMatrix, u: &Matrix) -> Result<SymMatrix> {
    if u.rows() != m.order() {
        return argument(format!(
            "basis has {} rows, matrix order is {}",
            u.rows(),
            m.order()
        ));
    }
    let gram = u.transpose().matmul(u);
    let err = gram.sub(&Matrix::identity(u.cols())).frobenius_norm();
    if err > 1e-10 {
        return argument(format!("basis columns are not orthonormal (error {err:e})"));
    }
    Ok(m.congruence(u))
}

/// Orthonormal basis of `normal`'s orthogonal complement: the columns other
/// than `k` of the Householder reflection sending `normal` onto `e_k`, where
/// `k` is the index of the largest |component|.
pub fn hyperplane_basis(normal: &[f64]) -> Result<Matrix> {
    let len = norm2(normal);
    if normal.is_empty() || len == 0.0 || !len.is_finite() {
        return argument("hyperplane normal must be nonzero and finite");
    }
    let n = normal.len();
    let u: Vec<f64> = normal.iter().map(|x| x / len).collect();
    let k = (0..n).fold(0, |b, i| if u[i].abs() > u[b].abs() { i } else { b });
    let mut w = u.clone();
    w[k] += if u[k] >= 0.0 { 1.0 } else { -1.0 };
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let mut basis = Matrix::zeros(n, n - 1);
    let mut col = 0;
    for j in 0..n {
        if j == k {
            continue;
        }
        for i in 0..n {
            let h = if i == j { 1.0 } else { 0.0 } - 2.0 * w[i] * w[j] / ww;
            basis[(i, col)] = h;
        }
        col += 1;
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use proptest::prelude::*;

    fn reconstruct(s: &Spectrum) -> SymMatrix {
        let n = s.eigenvalues.len();
        SymMatrix::from_upper(n, |i, j| {
            (0..n)
                .map(|k| s.eigenvectors[(i, k)] * s.eigenvalues[k] * s.eigenvectors[(j, k)])
                .sum()
        })
    }

    #[test]
    fn diagonal_input() {
        let s = eigh(&SymMatrix::diag(&[1.0, 3.0, -2.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![3.0, 1.0, -2.0]);
        assert_eq!(s.vector(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(s.vector(2), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn pdlc_matrix_of_example_one_is_positive_definite() {
        let m = SymMatrix::from_rows(&[
            vec![2.0, 0.0, 0.0, 3.0],
            vec![0.0, 4.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![3.0, 0.0, 0.0, 9.0],
        ])
        .unwrap();
        let lmin = min_eigenvalue(&m).unwrap();
        // the 2x2 block [[2,3],[3,9]] has eigenvalues (11 -+ sqrt(85))/2
        let exact = (11.0 - 85f64.sqrt()) / 2.0;
        assert!((lmin - exact).abs() < 1e-13);
        assert!(lmin > 0.0 && lmin <= 1.0);
    }

    #[test]
    fn psd_predicate() {
        assert!(is_psd(&SymMatrix::zeros(3), 1e-9).unwrap());
        assert!(is_psd(&SymMatrix::diag(&[1.0, 1.0, 0.0]), 1e-9).unwrap());
        assert!(!is_psd(&SymMatrix::diag(&[1.0, -1e-3, 1.0]), 1e-9).unwrap());
        let sum = SymMatrix::diag(&[-1.0, 1.0, 1.0]).add(&SymMatrix::diag(&[1.0, -1.0, 1.0]));
        assert!(is_psd(&sum, 1e-9).unwrap());
        assert_eq!(min_eigenvalue(&SymMatrix::identity(4)).unwrap(), 1.0);
        assert_eq!(
            min_eigenvalue(&SymMatrix::diag(&[1.0, 0.0, -1.0])).unwrap(),
            -1.0
        );
    }

    #[test]
    fn scc_classification() {
        match classify_scc(&SymMatrix::diag(&[-1.0, 1.0, 1.0]), 1e-9).unwrap() {
            SccClass::Separator(f) => {
                assert_eq!(f.normal, vec![1.0, 0.0, 0.0]);
                let u = hyperplane_basis(&f.normal).unwrap();
                let r = restrict(&SymMatrix::diag(&[-1.0, 1.0, 1.0]), &u).unwrap();
                assert!(is_psd(&r, 1e-12).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            classify_scc(&SymMatrix::diag(&[-1.0, -1.0, 1.0]), 1e-9).unwrap(),
            SccClass::NotScc { negative_count: 2 }
        );
    }

    #[test]
    fn basis_for_axis_normal() {
        let u = hyperplane_basis(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(u.cols(), 2);
        for j in 0..2 {
            assert_eq!(u[(0, j)], 0.0);
        }
        let r = restrict(&SymMatrix::diag(&[-1.0, 1.0, 1.0]), &u).unwrap();
        assert_eq!(r, SymMatrix::diag(&[1.0, 1.0]));
        assert!(hyperplane_basis(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn restrict_rejects_non_orthonormal() {
        let u = Matrix::from_columns(&[vec![1.0, 1.0, 0.0]]);
        assert!(restrict(&SymMatrix::identity(3), &u).is_err());
    }

    #[test]
    fn restricted_identity_is_identity() {
        let u = hyperplane_basis(&[0.3, -1.0, 2.0, 0.5]).unwrap();
        let r = restrict(&SymMatrix::identity(4), &u).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((r.get(i, j) - e).abs() < 1e-14);
            }
        }
    }

    fn sym(max: usize) -> impl Strategy<Value = SymMatrix> {
        (2..=max).prop_flat_map(|k| {
            prop::collection::vec(-10.0f64..10.0, k * k)
                .prop_map(move |v| SymMatrix::from_upper(k, |i, j| v[i * k + j]))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn decomposition_reconstructs(m in sym(30)) {
            let s = eigh(&m).unwrap();
            let scale = m.frobenius_norm().max(1.0);
            prop_assert!(reconstruct(&s).sub(&m).frobenius_norm() <= 1e-9 * scale);
            let n = m.order();
            let vtv = s.eigenvectors.transpose().matmul(&s.eigenvectors);
            prop_assert!(vtv.sub(&Matrix::identity(n)).frobenius_norm() <= 1e-9);
            for w in s.eigenvalues.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let fast = eigenvalues(&m).unwrap();
            for (a, b) in fast.iter().zip(&s.eigenvalues) {
                prop_assert!((a - b).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn basis_is_orthonormal_complement(v in prop::collection::vec(-5.0f64..5.0, 2..12)) {
            prop_assume!(norm2(&v) > 1e-6);
            let u = hyperplane_basis(&v).unwrap();
            let vn: Vec<f64> = v.iter().map(|x| x / norm2(&v)).collect();
            for j in 0..u.cols() {
                prop_assert!(dot(&vn, &u.column(j)).abs() <= 1e-12);
            }
            let g = u.transpose().matmul(&u).sub(&Matrix::identity(u.cols()));
            prop_assert!(g.frobenius_norm() <= 1e-12);
        }

        #[test]
        fn separator_restriction_is_psd(m in sym(8)) {
            if let SccClass::Separator(f) = classify_scc(&m, 1e-9).unwrap() {
                let r = restrict(&m, &hyperplane_basis(&f.normal).unwrap()).unwrap();
                let scale = m.spectral_norm().max(1.0);
                prop_assert!(min_eigenvalue(&r).unwrap() >= -1e-8 * scale);
                prop_assert!((norm2(&f.normal) - 1.0).abs() <= 1e-12);
            }
        }
    }
}
