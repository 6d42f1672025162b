//! Effects (`0 ≤ E ≤ I`), their complements and spectral projections.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen};
use crate::matrix::Matrix;
use crate::tolerance::{TAU_EIG, TAU_HERM, TAU_PSD};

/// Which end of the unit interval a spectral projection selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    /// Eigenvalue 1: the states in which the effect occurs with certainty.
    One,
    /// Eigenvalue 0: the states in which it certainly does not.
    Zero,
}

/// A Hermitian operator with spectrum in `[0, 1]`.
///
/// The matrix is stored exactly as given. Validation tolerates eigenvalues
/// up to `tol` outside the interval but never clamps them.
#[derive(Clone, Debug)]
pub struct Effect {
    op: Matrix,
    // Set iff `op = I − *complement_of`; `complement()` returns it verbatim.
    complement_of: Option<Arc<Matrix>>,
}

impl PartialEq for Effect {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op
    }
}

/// Checks Hermiticity (within `τ_herm`) and that the spectrum lies in
/// `[−tol, 1 + tol]`.
pub fn validate_effect(m: Matrix, tol: f64) -> Result<Effect> {
    let eig = linalg::eig_hermitian(&m)?;
    check_spectrum(&eig, tol)?;
    Ok(Effect::trusted(m))
}

fn check_spectrum(eig: &HermitianEigen, tol: f64) -> Result<()> {
    let lo = eig.min();
    let hi = eig.max();
    if lo < -tol {
        return Err(Error::SpectrumOutOfRange { eigenvalue: lo });
    }
    if hi > 1.0 + tol {
        return Err(Error::SpectrumOutOfRange { eigenvalue: hi });
    }
    Ok(())
}

impl Effect {
    /// Validates with the default `τ_psd` spectral tolerance.
    pub fn new(m: Matrix) -> Result<Self> {
        validate_effect(m, TAU_PSD)
    }

    /// Wraps a matrix known to be an effect by construction (sums within a
    /// valid POM, unitary conjugates of effects, Lüders duals).
    pub(crate) fn trusted(op: Matrix) -> Self {
        Self {
            op,
            complement_of: None,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::trusted(Matrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::trusted(Matrix::identity(dim))
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diag(values))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.op
    }

    pub fn into_matrix(self) -> Matrix {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn eigen(&self) -> HermitianEigen {
        // Hermiticity was established at construction.
        linalg::jacobi(&self.op.hermitian_part()).expect("Jacobi converges on Hermitian input")
    }

    /// `I − E`. Complementing twice returns the original matrix exactly.
    pub fn complement(&self) -> Effect {
        let op = match &self.complement_of {
            Some(orig) => (**orig).clone(),
            None => &Matrix::identity(self.dim()) - &self.op,
        };
        Effect {
            op,
            complement_of: Some(Arc::new(self.op.clone())),
        }
    }

    /// Projection onto the eigenvectors with eigenvalue within `tol` of the
    /// chosen endpoint; the zero matrix when there are none.
    pub fn spectral_projection(&self, which: Endpoint, tol: f64) -> Projection {
        self.spectral_projection_from(&self.eigen(), which, tol)
    }

    pub(crate) fn spectral_projection_from(
        &self,
        eig: &HermitianEigen,
        which: Endpoint,
        tol: f64,
    ) -> Projection {
        let target = match which {
            Endpoint::One => 1.0,
            Endpoint::Zero => 0.0,
        };
        let (op, rank) = eig.projection_where(|l| (l - target).abs() <= tol);
        Projection { op, rank }
    }

    /// `‖E(I − E)‖ ≤ tol`.
    pub fn is_sharp(&self, tol: f64) -> bool {
        self.sharpness_defect() <= tol
    }

    /// `‖E − E²‖_op`.
    pub fn sharpness_defect(&self) -> f64 {
        linalg::op_norm(&(&self.op - &(&self.op * &self.op)))
    }

    /// No eigenvalue within `tol` of 1.
    pub fn is_strongly_unsharp(&self, tol: f64) -> bool {
        self.spectral_projection(Endpoint::One, tol).is_zero()
    }

    /// Projection onto the span of eigenvectors with eigenvalue above `tol`.
    pub fn range_projection(&self, tol: f64) -> Projection {
        let (op, rank) = self.eigen().projection_where(|l| l > tol);
        Projection { op, rank }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen().max()
    }
}

/// An orthogonal projection, `P = P² = P†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    op: Matrix,
    rank: usize,
}

impl Projection {
    /// Validates idempotence and Hermiticity within `τ_eig`.
    pub fn new(op: Matrix) -> Result<Self> {
        let herm = linalg::hermiticity_defect(&op);
        if herm > TAU_HERM.max(TAU_EIG) {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let idem = linalg::op_norm(&(&(&op * &op) - &op));
        if idem > TAU_EIG {
            return Err(Error::NotPsd { eigenvalue: idem });
        }
        let rank = op.trace().re.round().max(0.0) as usize;
        Ok(Self { op, rank })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            op: Matrix::zeros(dim),
            rank: 0,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.op
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// `I − P`.
    pub fn complement(&self) -> Projection {
        Projection {
            op: &Matrix::identity(self.op.dim()) - &self.op,
            rank: self.op.dim() - self.rank,
        }
    }

    pub fn into_effect(self) -> Effect {
        Effect::trusted(self.op)
    }
}

/// Both sides of `E₁E₂ = 0 ⟺ P₁P₂ = 0`, with `P_k` the range projections.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnihilationReport {
    pub prod_zero: bool,
    pub ranges_orthogonal: bool,
    pub product_norm: f64,
    pub range_overlap: f64,
}

impl AnnihilationReport {
    pub fn agree(&self) -> bool {
        self.prod_zero == self.ranges_orthogonal
    }
}

pub fn annihilation_equivalence(e1: &Effect, e2: &Effect, tol: f64) -> Result<AnnihilationReport> {
    e1.op.check_same_dim(&e2.op)?;
    let product_norm = linalg::op_norm(&(&e1.op * &e2.op));
    let p1 = e1.range_projection(tol);
    let p2 = e2.range_projection(tol);
    let range_overlap = linalg::op_norm(&(p1.matrix() * p2.matrix()));
    Ok(AnnihilationReport {
        prod_zero: product_norm <= tol,
        ranges_orthogonal: range_overlap <= tol,
        product_norm,
        range_overlap,
    })
}

/// `‖P⁽¹⁾(E₁) · (I − P⁽⁰⁾(E₂))‖`, which vanishes exactly when every unit
/// vector with `⟨φ|E₁φ⟩ = 1` has `⟨φ|E₂φ⟩ = 0`.
pub fn weak_exclusion_residual(e1: &Effect, e2: &Effect, endpoint_tol: f64) -> Result<f64> {
    e1.op.check_same_dim(&e2.op)?;
    let one = e1.spectral_projection(Endpoint::One, endpoint_tol);
    if one.is_zero() {
        return Ok(0.0);
    }
    let not_zero = e2
        .spectral_projection(Endpoint::Zero, endpoint_tol)
        .complement();
    Ok(linalg::op_norm(&(one.matrix() * not_zero.matrix())))
}

#[derive(Serialize, Deserialize)]
struct EffectJson {
    kind: String,
    #[serde(flatten)]
    matrix: Matrix,
}

impl Serialize for Effect {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EffectJson {
            kind: "effect".into(),
            matrix: self.op.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Effect {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = EffectJson::deserialize(d)?;
        if json.kind != "effect" {
            return Err(serde::de::Error::custom(format!(
                "expected kind \"effect\", got {:?}",
                json.kind
            )));
        }
        Effect::new(json.matrix).map_err(serde::de::Error::custom)
    }
}
