//! Exact rank/kernel computation and numeric symmetric spectra.
//!
//! Rank and kernel questions are answered over the rationals with
//! fraction-free (Bareiss) elimination, so dimension claims carry no
//! tolerance. Spectra are computed in floating point and cross-checked
//! against the exact kernel: the number of numerically-zero eigenvalues
//! must match the exact kernel dimension or the call fails loudly.

use nalgebra::DMatrix;
use num::{BigInt, Integer, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::{Rational, RationalMatrix};

/// Default eigenvalue zero-classification tolerance, scaled by matrix norm.
pub const DEFAULT_TOL: f64 = 1e-9;

/// An exact basis of the null space of a rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelBasis {
    pub basis: Vec<Vec<Rational>>,
}

impl KernelBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Row echelon form over the integers, with pivot bookkeeping.
struct Echelon {
    mat: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    cols: usize,
}

/// Clears denominators row by row and divides out content, so Bareiss
/// elimination runs over integers of controlled size.
fn integer_rows(m: &RationalMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let mut lcm = BigInt::one();
            for e in row {
                lcm = lcm.lcm(e.denom());
            }
            let scaled: Vec<BigInt> = row.iter().map(|e| e.numer() * (&lcm / e.denom())).collect();
            let mut content = BigInt::zero();
            for v in &scaled {
                content = content.gcd(v);
            }
            if content.is_zero() || content.is_one() {
                scaled
            } else {
                scaled.iter().map(|v| v / &content).collect()
            }
        })
        .collect()
}

/// Fraction-free forward elimination (Bareiss), pivoting on the first
/// nonzero entry in column order. Row swaps keep the exact-division
/// property up to sign.
fn echelon(m: &RationalMatrix) -> Echelon {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = integer_rows(m);
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let num = &a[i][j] * &a[r][c] - &a[i][c] * &a[r][j];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division not exact");
                a[i][j] = num / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Echelon { mat: a, pivots, cols }
}

/// Exact rank of a rational matrix.
pub fn rational_rank(m: &RationalMatrix) -> usize {
    echelon(m).pivots.len()
}

/// Exact kernel basis; dimension = cols - rank. Basis vectors are scaled
/// to primitive integer vectors with positive leading entry, so the output
/// is deterministic.
pub fn rational_kernel(m: &RationalMatrix) -> KernelBasis {
    let ech = echelon(m);
    let pivot_set: Vec<usize> = ech.pivots.clone();
    let is_pivot = {
        let mut flags = vec![false; ech.cols];
        for &c in &pivot_set {
            flags[c] = true;
        }
        flags
    };
    let mut basis = Vec::new();
    for free in 0..ech.cols {
        if is_pivot[free] {
            continue;
        }
        let mut x = vec![Rational::zero(); ech.cols];
        x[free] = Rational::one();
        for (i, &p) in pivot_set.iter().enumerate().rev() {
            let mut s = Rational::zero();
            for j in p + 1..ech.cols {
                if !ech.mat[i][j].is_zero() && !x[j].is_zero() {
                    s += Rational::from_integer(ech.mat[i][j].clone()) * &x[j];
                }
            }
            x[p] = -s / Rational::from_integer(ech.mat[i][p].clone());
        }
        basis.push(primitive(x));
    }
    KernelBasis { basis }
}

/// Scales a rational vector to integer entries with content 1 and a
/// positive leading nonzero entry.
fn primitive(v: Vec<Rational>) -> Vec<Rational> {
    let mut lcm = BigInt::one();
    for e in &v {
        lcm = lcm.lcm(e.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|e| e.numer() * (&lcm / e.denom())).collect();
    let mut content = BigInt::zero();
    for e in &ints {
        content = content.gcd(e);
    }
    if content.is_zero() {
        return v;
    }
    if let Some(first) = ints.iter().find(|e| !e.is_zero()) {
        if first.is_negative() {
            content = -content;
        }
    }
    ints.into_iter()
        .map(|e| Rational::from_integer(e / &content))
        .collect()
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues with
/// matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    /// Norm-scaled tolerance used for zero classification.
    pub tol_effective: f64,
}

impl Spectrum {
    pub fn zero_count(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|l| l.abs() <= self.tol_effective)
            .count()
    }
}

/// Sorted symmetric eigen-decomposition of a float matrix. No exactness
/// claims; used for deformed operators evaluated at finite s.
pub fn numeric_spectrum(m: &DMatrix<f64>, tol: f64) -> Spectrum {
    assert_eq!(m.nrows(), m.ncols(), "numeric_spectrum requires square input");
    let n = m.nrows();
    let scale = m.abs().column_iter().map(|c| c.sum()).fold(1.0, f64::max);
    if n == 0 {
        return Spectrum {
            eigenvalues: vec![],
            eigenvectors: DMatrix::zeros(0, 0),
            tol_effective: tol,
        };
    }
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors =
        DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Spectrum {
        eigenvalues,
        eigenvectors,
        tol_effective: tol * scale,
    }
}

/// Full eigen-decomposition of a symmetric rational matrix, cross-checked:
/// the count of eigenvalues with |lambda| <= tol (norm-scaled) must equal
/// the exact kernel dimension.
pub fn symmetric_spectrum(m: &RationalMatrix, tol: f64) -> Result<Spectrum> {
    if !m.is_square() || !m.is_symmetric() {
        return Err(Error::Precondition(
            "symmetric_spectrum requires a symmetric square matrix".into(),
        ));
    }
    let spectrum = numeric_spectrum(&m.to_f64(), tol);
    let exact = rational_kernel(m).dimension();
    let numeric = spectrum.zero_count();
    if exact != numeric {
        return Err(Error::Internal(format!(
            "spectrum zero-count {numeric} disagrees with exact kernel dimension {exact}"
        )));
    }
    // Reconstruction residual: Q Lambda Q^T must reproduce the input.
    let n = m.rows();
    if n > 0 {
        let q = &spectrum.eigenvectors;
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            spectrum.eigenvalues.clone(),
        ));
        let recon = q * lambda * q.transpose();
        let resid = (m.to_f64() - recon).abs().max();
        if resid > spectrum.tol_effective.max(1e-12 * n as f64) {
            return Err(Error::Internal(format!(
                "eigen-decomposition residual {resid:e} above tolerance"
            )));
        }
    }
    Ok(spectrum)
}

/// Comparison of the nonzero spectra of A A^T and A^T A.
#[derive(Debug, Clone)]
pub struct SpectrumAgreement {
    pub rank: usize,
    /// Nonzero eigenvalues of A A^T, descending.
    pub left_nonzero: Vec<f64>,
    /// Nonzero eigenvalues of A^T A, descending.
    pub right_nonzero: Vec<f64>,
    pub max_discrepancy: f64,
}

/// Checks that A A^T and A^T A share their nonzero spectrum. The split
/// into zero/nonzero uses the exact rank of A, so the two lists always
/// have the same length.
pub fn verify_lemma_spectrum(a: &RationalMatrix, tol: f64) -> Result<SpectrumAgreement> {
    let rank = rational_rank(a);
    let at = a.transpose();
    let left = symmetric_spectrum(&a.matmul(&at), tol)?;
    let right = symmetric_spectrum(&at.matmul(a), tol)?;
    let top = |s: &Spectrum| -> Vec<f64> {
        let mut v: Vec<f64> = s.eigenvalues.iter().rev().take(rank).copied().collect();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    };
    let left_nonzero = top(&left);
    let right_nonzero = top(&right);
    let max_discrepancy = left_nonzero
        .iter()
        .zip(&right_nonzero)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max);
    Ok(SpectrumAgreement {
        rank,
        left_nonzero,
        right_nonzero,
        max_discrepancy,
    })
}

/// Checks dim ker(A) = dim ker(X A Y) for invertible X, Y, exactly.
pub fn verify_lemma_conjugacy(
    a: &RationalMatrix,
    x: &RationalMatrix,
    y: &RationalMatrix,
) -> Result<bool> {
    if !x.is_square() || rational_rank(x) != x.rows() {
        return Err(Error::Precondition("X is not invertible".into()));
    }
    if !y.is_square() || rational_rank(y) != y.rows() {
        return Err(Error::Precondition("Y is not invertible".into()));
    }
    if x.cols() != a.rows() || a.cols() != y.rows() {
        return Err(Error::Precondition(
            "conjugation dimensions do not match".into(),
        ));
    }
    let conjugated = x.matmul(a).matmul(y);
    Ok(rational_kernel(a).dimension() == rational_kernel(&conjugated).dimension())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rat;
    use proptest::prelude::*;

    #[test]
    fn kernel_of_k2_even_laplacian() {
        let m = RationalMatrix::from_int_rows(&[vec![1, -1], vec![-1, 1]]);
        let k = rational_kernel(&m);
        assert_eq!(k.dimension(), 1);
        assert_eq!(k.basis[0], vec![rat(1), rat(1)]);
    }

    #[test]
    fn kernel_of_identity_is_trivial() {
        let k = rational_kernel(&RationalMatrix::identity(3));
        assert_eq!(k.dimension(), 0);
    }

    #[test]
    fn rank_examples() {
        // K3 incidence matrix from an oriented triangle.
        let inc = RationalMatrix::from_int_rows(&[
            vec![0, -1, -1],
            vec![-1, 0, 1],
            vec![1, 1, 0],
        ]);
        assert_eq!(rational_rank(&inc), 2);
        assert_eq!(rational_rank(&RationalMatrix::zeros(3, 4)), 0);
        let k2 = RationalMatrix::from_int_rows(&[vec![-1], vec![1]]);
        assert_eq!(rational_rank(&k2), 1);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m = RationalMatrix::from_int_rows(&[vec![2, 4, 6], vec![1, 2, 3]]);
        let k = rational_kernel(&m);
        assert_eq!(k.dimension(), 2);
        for v in &k.basis {
            assert!(m.apply(v).iter().all(|e| e.is_zero()));
        }
    }

    #[test]
    fn empty_row_matrix_has_full_kernel() {
        let m = RationalMatrix::zeros(0, 3);
        assert_eq!(rational_kernel(&m).dimension(), 3);
        assert_eq!(rational_rank(&m), 0);
    }

    #[test]
    fn spectrum_of_k2_odd_laplacian() {
        let m = RationalMatrix::from_int_rows(&[vec![2]]);
        let s = symmetric_spectrum(&m, DEFAULT_TOL).unwrap();
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_of_zero_diag() {
        let s = symmetric_spectrum(&RationalMatrix::zeros(3, 3), DEFAULT_TOL).unwrap();
        assert_eq!(s.zero_count(), 3);
    }

    #[test]
    fn spectrum_of_k3_even_laplacian() {
        // val - A for the triangle: eigenvalues {0, 3, 3} from the
        // characteristic polynomial of the 3x3 circulant.
        let m = RationalMatrix::from_int_rows(&[
            vec![2, -1, -1],
            vec![-1, 2, -1],
            vec![-1, -1, 2],
        ]);
        let s = symmetric_spectrum(&m, DEFAULT_TOL).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-9);
        assert!((s.eigenvalues[1] - 3.0).abs() < 1e-9);
        assert!((s.eigenvalues[2] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = RationalMatrix::from_int_rows(&[vec![0, 1], vec![0, 0]]);
        assert!(matches!(
            symmetric_spectrum(&m, DEFAULT_TOL),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn conjugacy_with_identities() {
        let a = RationalMatrix::from_int_rows(&[
            vec![0, -1, -1],
            vec![-1, 0, 1],
            vec![1, 1, 0],
        ]);
        let id = RationalMatrix::identity(3);
        assert!(verify_lemma_conjugacy(&a, &id, &id).unwrap());
    }

    #[test]
    fn conjugacy_with_rational_surrogate() {
        // X = diag(2, 1), Y = [1/2]: stand-ins for exp(s) and exp(-s) at s = ln 2.
        let a = RationalMatrix::from_int_rows(&[vec![-1], vec![1]]);
        let x = RationalMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                if i == 0 {
                    rat(2)
                } else {
                    rat(1)
                }
            } else {
                rat(0)
            }
        });
        let y = RationalMatrix::from_fn(1, 1, |_, _| crate::matrix::ratio(1, 2));
        assert!(verify_lemma_conjugacy(&a, &x, &y).unwrap());
    }

    #[test]
    fn singular_conjugator_rejected() {
        let a = RationalMatrix::identity(2);
        let x = RationalMatrix::zeros(2, 2);
        assert!(matches!(
            verify_lemma_conjugacy(&a, &x, &RationalMatrix::identity(2)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lemma_spectrum_on_zero_matrix() {
        let rep = verify_lemma_spectrum(&RationalMatrix::zeros(2, 3), DEFAULT_TOL).unwrap();
        assert_eq!(rep.rank, 0);
        assert!(rep.left_nonzero.is_empty());
        assert_eq!(rep.max_discrepancy, 0.0);
    }

    fn small_matrix() -> impl Strategy<Value = RationalMatrix> {
        (1usize..5, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-4i64..5, r * c).prop_map(move |vals| {
                RationalMatrix::from_fn(r, c, |i, j| rat(vals[i * c + j]))
            })
        })
    }

    proptest! {
        #[test]
        fn kernel_lemma_holds(m in small_matrix()) {
            // dim ker(A) = dim ker(A^T A), and every kernel vector of A
            // is annihilated by A^T A.
            let gram = m.transpose().matmul(&m);
            let ka = rational_kernel(&m);
            let kg = rational_kernel(&gram);
            prop_assert_eq!(ka.dimension(), kg.dimension());
            for v in &ka.basis {
                prop_assert!(gram.apply(v).iter().all(|e| e.is_zero()));
            }
        }

        #[test]
        fn rank_transpose_invariant(m in small_matrix()) {
            prop_assert_eq!(rational_rank(&m), rational_rank(&m.transpose()));
            prop_assert_eq!(rational_rank(&m) + rational_kernel(&m).dimension(), m.cols());
        }

        #[test]
        fn gram_matrices_are_psd(m in small_matrix()) {
            let gram = m.matmul(&m.transpose());
            let s = symmetric_spectrum(&gram, DEFAULT_TOL).unwrap();
            for l in &s.eigenvalues {
                prop_assert!(*l >= -s.tol_effective);
            }
        }
    }
}
