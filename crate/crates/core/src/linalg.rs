//! Hermitian spectral analysis: cyclic complex Jacobi, operator norms,
//! square roots and matrix functions.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, I, ZERO};
use crate::tolerance::{TAU_HERM, TAU_PSD};

/// Jacobi sweeps stop once the off-diagonal Frobenius mass drops below this
/// fraction of `‖M‖_F`.
const JACOBI_REL_OFF: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Spectral decomposition `M = V · diag(λ) · V†` of a Hermitian matrix.
///
/// Eigenvalues are ascending. Each eigenvector's first component with
/// modulus above `1e-12` is made real and positive.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors.
    pub eigenvectors: Matrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// `V · diag(f(λ)) · V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> Matrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let weights: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Matrix::from_fn(n, |i, j| {
            (0..n)
                .filter(|&k| weights[k] != ZERO)
                .map(|k| v[(i, k)] * weights[k] * v[(j, k)].conj())
                .sum()
        })
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map_spectrum(|l| Complex64::new(l, 0.0))
    }

    /// Orthogonal projection onto the span of eigenvectors whose eigenvalue
    /// satisfies `select`. Returns the projection and its rank.
    pub fn projection_where(&self, select: impl Fn(f64) -> bool) -> (Matrix, usize) {
        let mut rank = 0;
        let p = self.map_spectrum(|l| {
            if select(l) {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        });
        for &l in &self.eigenvalues {
            if select(l) {
                rank += 1;
            }
        }
        (p, rank)
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

pub fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// `‖M − M†‖_op`.
pub fn hermiticity_defect(m: &Matrix) -> f64 {
    let d = m - &m.adjoint();
    if d.max_abs() == 0.0 {
        return 0.0;
    }
    // i(M − M†) is Hermitian.
    jacobi(&d.scale_complex(I).hermitian_part())
        .map(|e| e.max_abs_eigenvalue())
        .unwrap_or(f64::INFINITY)
}

/// Eigendecomposition of a Hermitian matrix (tolerance `τ_herm`).
pub fn eig_hermitian(m: &Matrix) -> Result<HermitianEigen> {
    let deviation = hermiticity_defect(m);
    if deviation > TAU_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    jacobi(&m.hermitian_part())
}

/// Cyclic Jacobi on an exactly Hermitian matrix.
pub(crate) fn jacobi(m: &Matrix) -> Result<HermitianEigen> {
    let n = m.dim();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    let threshold = JACOBI_REL_OFF * scale;

    let off_mass = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_mass(&a);
        if off <= threshold || off == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { residual: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let g = b.norm();
                if g == 0.0 {
                    continue;
                }
                rotate(&mut a, &mut v, p, q, b, g);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]).then(x.cmp(&y)));

    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let mut eigenvectors = Matrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let mut vec = v.column(k);
        if let Some(lead) = vec.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = lead.conj() / lead.norm();
            for z in vec.iter_mut() {
                *z *= phase;
            }
        }
        for (row, z) in vec.into_iter().enumerate() {
            eigenvectors[(row, col)] = z;
        }
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// One two-sided rotation annihilating `a[p][q] = b`, `g = |b|`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, b: Complex64, g: f64) {
    let n = a.dim();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // A phase on column q makes the pivot real; then a real symmetric rotation.
    let phase = b.conj() / g;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = phase * -s;
    let gqq = phase * c;

    for k in 0..n {
        let x = a[(k, p)];
        let y = a[(k, q)];
        a[(k, p)] = x * gpp + y * gqp;
        a[(k, q)] = x * gpq + y * gqq;
    }
    for k in 0..n {
        let x = a[(p, k)];
        let y = a[(q, k)];
        a[(p, k)] = gpp.conj() * x + gqp.conj() * y;
        a[(q, k)] = gpq.conj() * x + gqq.conj() * y;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x * gpp + y * gqp;
        v[(k, q)] = x * gpq + y * gqq;
    }
}

/// Largest singular value.
pub fn op_norm(m: &Matrix) -> f64 {
    if m.max_abs() == 0.0 {
        return 0.0;
    }
    let adj = m.adjoint();
    if *m == adj {
        return spectral_radius_hermitian(m);
    }
    if *m == -&adj {
        return spectral_radius_hermitian(&m.scale_complex(I));
    }
    let gram = (&adj * m).hermitian_part();
    jacobi(&gram)
        .map(|e| e.max().max(0.0).sqrt())
        .unwrap_or(f64::INFINITY)
}

fn spectral_radius_hermitian(m: &Matrix) -> f64 {
    jacobi(m)
        .map(|e| e.max_abs_eigenvalue())
        .unwrap_or(f64::INFINITY)
}

/// `AB − BA`.
pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    &(a * b) - &(b * a)
}

/// `‖AB − BA‖_op`.
pub fn commutator_norm(a: &Matrix, b: &Matrix) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok(commutator_norm_unchecked(a, b))
}

fn commutator_norm_unchecked(a: &Matrix, b: &Matrix) -> f64 {
    let c = commutator(a, b);
    if c.max_abs() == 0.0 {
        return 0.0;
    }
    if is_exactly_hermitian(a) && is_exactly_hermitian(b) {
        // The commutator of Hermitian operators is anti-Hermitian.
        spectral_radius_hermitian(&c.scale_complex(I).hermitian_part())
    } else {
        op_norm(&c)
    }
}

fn is_exactly_hermitian(m: &Matrix) -> bool {
    let n = m.dim();
    (0..n).all(|i| (i..n).all(|j| m[(i, j)] == m[(j, i)].conj()))
}

/// Index and value of the pair with the largest commutator norm.
///
/// Exact norms are computed in descending order of the Frobenius norm of
/// the commutator, stopping once the Frobenius bound falls below the best
/// exact value. Ties go to the lowest index.
pub fn max_commutator_norm(pairs: &[(&Matrix, &Matrix)]) -> Option<(usize, f64)> {
    if pairs.is_empty() {
        return None;
    }
    let mut bounds: Vec<(usize, f64)> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, (a, b))| (k, commutator(a, b).frobenius_norm()))
        .collect();
    bounds.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let mut best: Option<(usize, f64)> = None;
    const BATCH: usize = 32;
    for chunk in bounds.chunks(BATCH) {
        if let Some((_, b)) = best {
            if chunk[0].1 < b * (1.0 - 1e-12) {
                break;
            }
        }
        let exact: Vec<(usize, f64)> = chunk
            .par_iter()
            .map(|&(k, frob)| {
                let (a, b) = pairs[k];
                (
                    k,
                    if frob == 0.0 {
                        0.0
                    } else {
                        commutator_norm_unchecked(a, b)
                    },
                )
            })
            .collect();
        for (k, val) in exact {
            best = match best {
                None => Some((k, val)),
                Some((bk, bv)) if val > bv || (val == bv && k < bk) => Some((k, val)),
                keep => keep,
            };
        }
    }
    best
}

/// Square root of a positive semidefinite matrix; eigenvalues in
/// `[−τ_psd, 0)` are clamped to zero.
pub fn psd_sqrt(m: &Matrix) -> Result<Matrix> {
    let eig = eig_hermitian(m)?;
    check_psd(&eig, TAU_PSD)?;
    Ok(eig.map_spectrum(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)))
}

/// `M^{-1/2}` of a positive definite matrix.
pub fn psd_inverse_sqrt(m: &Matrix) -> Result<Matrix> {
    let eig = eig_hermitian(m)?;
    check_psd(&eig, TAU_PSD)?;
    let floor = 1e-12 * eig.max().max(1e-300);
    if eig.min() <= floor {
        return Err(Error::Singular {
            eigenvalue: eig.min(),
        });
    }
    Ok(eig.map_spectrum(|l| Complex64::new(1.0 / l.sqrt(), 0.0)))
}

fn check_psd(eig: &HermitianEigen, tol: f64) -> Result<()> {
    if eig.min() < -tol {
        return Err(Error::NotPsd {
            eigenvalue: eig.min(),
        });
    }
    Ok(())
}

/// `exp(−i·H·t)` from a precomputed decomposition of `H`.
pub fn unitary_evolution(h: &HermitianEigen, t: f64) -> Matrix {
    h.map_spectrum(|l| Complex64::from_polar(1.0, -l * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pauli;

    #[test]
    fn is_hermitian_examples() {
        assert!(is_hermitian(&Matrix::from_diag(&[0.3, 0.7]), 1e-12));
        let ix = Matrix::from_rows(vec![vec![ZERO, I], vec![I, ZERO]]).unwrap();
        assert!(!is_hermitian(&ix, 1e-12));
        assert!(is_hermitian(&pauli::x(), 1e-12));
    }

    #[test]
    fn eig_examples() {
        let e = eig_hermitian(&Matrix::from_diag(&[0.7, 0.3])).unwrap();
        assert_eq!(e.eigenvalues, vec![0.3, 0.7]);
        let e = eig_hermitian(&pauli::x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let ix = Matrix::from_rows(vec![vec![ZERO, I], vec![I, ZERO]]).unwrap();
        assert!(matches!(
            eig_hermitian(&ix),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigenvector_phase_convention() {
        let e = eig_hermitian(&pauli::y()).unwrap();
        for k in 0..2 {
            let v = e.eigenvector(k);
            let lead = v.iter().find(|z| z.norm() > 1e-12).unwrap();
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
    }

    #[test]
    fn psd_sqrt_examples() {
        let s = psd_sqrt(&Matrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!(s.max_abs_diff(&Matrix::from_diag(&[2.0, 3.0])) < 1e-14);
        let s = psd_sqrt(&Matrix::identity(3)).unwrap();
        assert!(s.max_abs_diff(&Matrix::identity(3)) < 1e-14);
        let plus = Matrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(psd_sqrt(&plus).unwrap().max_abs_diff(&plus) < 1e-14);
    }

    #[test]
    fn psd_sqrt_clamps_and_rejects() {
        let s = psd_sqrt(&Matrix::from_diag(&[1.0, -1e-10])).unwrap();
        assert_eq!(s[(1, 1)], ZERO);
        let err = psd_sqrt(&Matrix::from_diag(&[1.0, -1e-3])).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&Matrix::from_diag(&[0.3, -0.8])) - 0.8).abs() < 1e-15);
        assert_eq!(op_norm(&Matrix::zeros(4)), 0.0);
        let m = Matrix::from_real_rows(&[&[0.0, -2.0], &[2.0, 0.0]]).unwrap();
        assert!((op_norm(&m) - 2.0).abs() < 1e-14);
        // Non-normal: [[0, 1], [0, 0]] has singular values 1, 0.
        let m = Matrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((op_norm(&m) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn commutator_examples() {
        let x = pauli::x();
        let z = pauli::z();
        assert!((commutator_norm(&x, &z).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(commutator_norm(&x, &Matrix::identity(2)).unwrap(), 0.0);
        let a = Matrix::from_diag(&[1.0, 2.0, 3.0]);
        let b = Matrix::from_diag(&[-1.0, 0.5, 7.0]);
        assert_eq!(commutator_norm(&a, &b).unwrap(), 0.0);
        assert!(commutator_norm(&a, &x).is_err());
    }

    #[test]
    fn max_commutator_picks_worst_pair() {
        let x = pauli::x();
        let y = pauli::y();
        let z = pauli::z();
        let half_x = x.scale(0.5);
        let id = Matrix::identity(2);
        let pairs = vec![(&id, &x), (&half_x, &z), (&x, &z), (&y, &z)];
        let (k, v) = max_commutator_norm(&pairs).unwrap();
        assert_eq!(k, 2);
        assert!((v - 2.0).abs() < 1e-14);
        assert!(max_commutator_norm(&[]).is_none());
    }

    #[test]
    fn evolution_is_unitary() {
        let h = eig_hermitian(&pauli::x()).unwrap();
        let u = unitary_evolution(&h, 0.7);
        let uu = &u * &u.adjoint();
        assert!(uu.max_abs_diff(&Matrix::identity(2)) < 1e-14);
        // exp(-iXt) = cos t I - i sin t X
        let expected =
            &Matrix::identity(2).scale(0.7f64.cos()) - &pauli::x().scale_complex(I * 0.7f64.sin());
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }
}
