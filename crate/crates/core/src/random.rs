//! Seeded random operators.
//!
//! Every trial draws from its own ChaCha stream, `(seed, trial)`, so results
//! do not depend on how trials are scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::effects::Effect;
use crate::linalg;
use crate::matrix::{inner, Matrix, ZERO};
use crate::pom::Pom;

pub type TrialRng = ChaCha8Rng;

/// Independent generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, |_, _| complex_normal(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> Matrix {
    ginibre(rng, n).hermitian_part()
}

/// Haar-distributed unitary via Gram–Schmidt on a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> Matrix {
    let g = ginibre(rng, n);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        // Two passes keep the basis orthonormal to rounding.
        for _ in 0..2 {
            for u in &cols {
                let c = inner(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let norm = crate::matrix::vector_norm(&v);
        for x in v.iter_mut() {
            *x /= norm;
        }
        cols.push(v);
    }
    Matrix::from_fn(n, |i, j| cols[j][i])
}

/// `U · diag(values) · U†`.
pub fn in_basis(u: &Matrix, values: &[f64]) -> Matrix {
    Matrix::from_diag(values).conjugate_by(u)
}

/// `G†G` with its spectrum rescaled so the largest eigenvalue is uniform in
/// `[0.5, 1]`.
pub fn random_effect(rng: &mut impl Rng, n: usize) -> Effect {
    let g = ginibre(rng, n);
    let gram = (&g.adjoint() * &g).hermitian_part();
    let top = linalg::jacobi(&gram).expect("Jacobi converges").max();
    let target: f64 = rng.random_range(0.5..=1.0);
    Effect::trusted(gram.scale(target / top).hermitian_part())
}

/// Rank-`rank` orthogonal projection in a Haar-random basis.
pub fn random_projection(rng: &mut impl Rng, n: usize, rank: usize) -> Effect {
    let u = random_unitary(rng, n);
    let diag: Vec<f64> = (0..n).map(|k| if k < rank { 1.0 } else { 0.0 }).collect();
    Effect::trusted(in_basis(&u, &diag).hermitian_part())
}

/// Normalized `k`-outcome POM: `E_i = S^{-1/2} P_i S^{-1/2}` with `P_i = G_i†G_i`
/// and `S = Σ P_i`.
pub fn random_pom(rng: &mut impl Rng, n: usize, k: usize) -> Pom {
    let parts: Vec<Matrix> = (0..k)
        .map(|_| {
            let g = ginibre(rng, n);
            &g.adjoint() * &g
        })
        .collect();
    normalize_parts(parts).expect("Gaussian parts are almost surely positive definite")
}

fn normalize_parts(parts: Vec<Matrix>) -> crate::Result<Pom> {
    let n = parts[0].dim();
    let total = parts.iter().fold(Matrix::zeros(n), |acc, p| &acc + p);
    let inv = linalg::psd_inverse_sqrt(&total.hermitian_part())?;
    let effects = parts
        .iter()
        .map(|p| p.sandwich(&inv).hermitian_part())
        .collect();
    Pom::build(effects, true)
}

/// Random point of the probability simplex on `k` outcomes.
pub fn random_simplex(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Normalized POM whose effects are all diagonal in the basis `u`.
pub fn diagonal_pom(rng: &mut impl Rng, u: &Matrix, k: usize) -> Pom {
    let n = u.dim();
    let weights: Vec<Vec<f64>> = (0..n).map(|_| random_simplex(rng, k)).collect();
    let effects = (0..k)
        .map(|i| {
            let diag: Vec<f64> = weights.iter().map(|w| w[i]).collect();
            in_basis(u, &diag).hermitian_part()
        })
        .collect();
    Pom::build(effects, true).expect("convex weights give a normalized POM")
}

/// Random density matrix `GG† / tr(GG†)`.
pub fn random_density(rng: &mut impl Rng, n: usize) -> Matrix {
    let g = ginibre(rng, n);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    w.scale(1.0 / tr).hermitian_part()
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
    let norm = crate::matrix::vector_norm(&v);
    if norm == 0.0 {
        v = vec![ZERO; n];
        v[0] = Complex64::new(1.0, 0.0);
        return v;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    v
}
