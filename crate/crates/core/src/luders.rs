//! Lüders instruments and the operational equivalences built on them:
//! nondisturbance versus commutativity, weak causality and objectivity.

use num_complex::Complex64;
use serde::Serialize;

use crate::effects::Effect;
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{basis_vector, vector_norm, Matrix, I};
use crate::pom::{Outcome, Pom};
use crate::tolerance::{TAU_HERM, TAU_PSD, TRACE};

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct State {
    rho: Matrix,
}

impl State {
    pub fn new(rho: Matrix) -> Result<Self> {
        let deviation = linalg::hermiticity_defect(&rho);
        if deviation > TAU_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = linalg::jacobi(&rho.hermitian_part())?;
        if eig.min() < -TAU_PSD {
            return Err(Error::NotPsd {
                eigenvalue: eig.min(),
            });
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TRACE {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        Ok(Self { rho })
    }

    /// `|φ⟩⟨φ|` for a unit vector.
    pub fn pure(phi: &[Complex64]) -> Result<Self> {
        let norm = vector_norm(phi);
        if (norm - 1.0).abs() > TRACE {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self {
            rho: Matrix::projector(phi),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            rho: Matrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub(crate) fn trusted(rho: Matrix) -> Self {
        Self { rho }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `tr[ρ B]`.
    pub fn expectation(&self, b: &Matrix) -> f64 {
        trace_product(&self.rho, b)
    }
}

/// `tr[A B]`, real part.
pub fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s.re
}

/// The Lüders instrument of a normalized POM: selective operations
/// `ρ ↦ E_i^{1/2} ρ E_i^{1/2}`.
#[derive(Clone, Debug)]
pub struct LudersInstrument {
    source: Pom,
    kraus: Vec<Matrix>,
}

/// One selective outcome of a Lüders measurement.
#[derive(Clone, Debug, Serialize)]
pub struct SelectiveOutcome {
    pub sub_state: Matrix,
    pub probability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NondisturbanceReport {
    pub holds: bool,
    /// `‖Σ_i E_i^{1/2} B E_i^{1/2} − B‖_op`.
    pub deviation: f64,
    /// Pure state on the top eigenvector of the deviation operator; it
    /// attains `|tr[ρ(dual − B)]| = deviation`.
    pub witness: State,
}

impl LudersInstrument {
    pub fn new(source: Pom) -> Result<Self> {
        if !source.is_normalized() {
            let deviation = linalg::op_norm(&source.total().matrix().shift_diagonal(-1.0));
            return Err(Error::NotNormalized { deviation });
        }
        let kraus = source
            .effects()
            .iter()
            .map(|e| linalg::psd_sqrt(e.matrix()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { source, kraus })
    }

    pub fn source(&self) -> &Pom {
        &self.source
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    fn check_dim(&self, m: &Matrix) -> Result<()> {
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.dim(),
            });
        }
        Ok(())
    }

    /// `E_k^{1/2} X E_k^{1/2}` on an arbitrary operator, by outcome position.
    pub fn apply_operation(&self, k: usize, x: &Matrix) -> Matrix {
        x.sandwich(&self.kraus[k])
    }

    /// Nonselective map on an arbitrary operator.
    pub fn apply_channel(&self, x: &Matrix) -> Matrix {
        self.kraus
            .iter()
            .fold(Matrix::zeros(self.dim()), |acc, k| &acc + &x.sandwich(k))
    }

    /// `Σ_i E_i^{1/2} ρ E_i^{1/2}`.
    pub fn luders_channel(&self, rho: &State) -> Result<State> {
        self.check_dim(rho.matrix())?;
        Ok(State::trusted(self.apply_channel(rho.matrix())))
    }

    pub fn luders_selective(&self, outcome: &Outcome, rho: &State) -> Result<SelectiveOutcome> {
        self.check_dim(rho.matrix())?;
        let k = self.source.position(outcome)?;
        let sub_state = self.apply_operation(k, rho.matrix());
        let probability = sub_state.trace().re;
        Ok(SelectiveOutcome {
            sub_state,
            probability,
        })
    }

    /// Heisenberg-picture dual `B ↦ Σ_i E_i^{1/2} B E_i^{1/2}`.
    pub fn heisenberg_dual(&self, b: &Effect) -> Result<Effect> {
        self.check_dim(b.matrix())?;
        Ok(Effect::trusted(
            self.apply_channel(b.matrix()).hermitian_part(),
        ))
    }

    /// Decides `tr[ρB] = tr[𝓘(ρ)B]` for all `ρ` through the single operator
    /// identity `dual(B) = B`.
    pub fn nondisturbance(&self, b: &Effect, tol: f64) -> Result<NondisturbanceReport> {
        let dual = self.heisenberg_dual(b)?;
        let diff = (dual.matrix() - b.matrix()).hermitian_part();
        let eig = linalg::jacobi(&diff)?;
        let top = (0..eig.dim())
            .max_by(|&x, &y| {
                eig.eigenvalues[x]
                    .abs()
                    .total_cmp(&eig.eigenvalues[y].abs())
                    .then(y.cmp(&x))
            })
            .unwrap_or(0);
        let deviation = eig.eigenvalues.get(top).map_or(0.0, |l| l.abs());
        let witness = State::trusted(Matrix::projector(&eig.eigenvector(top)));
        Ok(NondisturbanceReport {
            holds: deviation <= tol,
            deviation,
            witness,
        })
    }
}

/// Which hypothesis of the nondisturbance/commutativity equivalence applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// `B` has an ordered discrete spectrum; always true in finite dimension.
    Alpha,
    /// `A` is binary, `{E, I − E}`.
    Beta,
    Both,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::Alpha => "alpha",
            Case::Beta => "beta",
            Case::Both => "both",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub case: Case,
    pub commute: bool,
    pub nondisturb: bool,
    pub equivalent: bool,
    pub max_commutator: f64,
    pub deviation: f64,
}

/// Compares `[B, E_i] = 0 ∀i` against nondisturbance of `B` by the Lüders
/// measurement of `A`.
pub fn commutativity_nondisturbance(a: &Pom, b: &Effect, tol: f64) -> Result<EquivalenceReport> {
    let instrument = LudersInstrument::new(a.clone())?;
    commutativity_nondisturbance_with(&instrument, b, tol)
}

pub fn commutativity_nondisturbance_with(
    instrument: &LudersInstrument,
    b: &Effect,
    tol: f64,
) -> Result<EquivalenceReport> {
    let a = instrument.source();
    let pairs: Vec<(&Matrix, &Matrix)> = a
        .effects()
        .iter()
        .map(|e| (b.matrix(), e.matrix()))
        .collect();
    let max_commutator = linalg::max_commutator_norm(&pairs).map_or(0.0, |(_, v)| v);
    let nd = instrument.nondisturbance(b, tol)?;
    let commute = max_commutator <= tol;
    Ok(EquivalenceReport {
        case: if a.len() == 2 {
            Case::Both
        } else {
            Case::Alpha
        },
        commute,
        nondisturb: nd.holds,
        equivalent: commute == nd.holds,
        max_commutator,
        deviation: nd.deviation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectivityReport {
    pub ops_commute: bool,
    pub effects_commute: bool,
    pub agree: bool,
    /// Largest `‖𝓘ᴬᵢ(𝓘ᴮⱼ(ρ)) − 𝓘ᴮⱼ(𝓘ᴬᵢ(ρ))‖_op` over `i, j` and the spanning states.
    pub max_order_gap: f64,
    pub max_commutator: f64,
}

/// `n²` pure states whose projectors span the Hermitian operators:
/// `|a⟩`, `(|a⟩+|b⟩)/√2` and `(|a⟩+i|b⟩)/√2` for `a < b`.
pub fn spanning_states(n: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(n * n);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..n {
        out.push(Matrix::projector(&basis_vector(n, a)));
    }
    for a in 0..n {
        for b in a + 1..n {
            for phase in [Complex64::new(1.0, 0.0), I] {
                let mut v = basis_vector(n, a);
                v[a] *= h;
                v[b] = phase * h;
                out.push(Matrix::projector(&v));
            }
        }
    }
    out
}

/// Checks both operation orders of the selective Lüders operations of two
/// normalized POMs, and the commutativity of their effects.
pub fn objectivity_check(a: &Pom, b: &Pom, tol: f64) -> Result<ObjectivityReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ia = LudersInstrument::new(a.clone())?;
    let ib = LudersInstrument::new(b.clone())?;
    Ok(objectivity_with(&ia, &ib, tol))
}

pub fn objectivity_with(
    ia: &LudersInstrument,
    ib: &LudersInstrument,
    tol: f64,
) -> ObjectivityReport {
    let states = spanning_states(ia.dim());
    let mut max_order_gap: f64 = 0.0;
    for i in 0..ia.kraus.len() {
        for j in 0..ib.kraus.len() {
            // K_A K_B ρ K_B K_A versus K_B K_A ρ K_A K_B.
            let ab = &ia.kraus[i] * &ib.kraus[j];
            let ba = &ib.kraus[j] * &ia.kraus[i];
            for rho in &states {
                let first = rho.conjugate_by(&ab);
                let second = rho.conjugate_by(&ba);
                let gap = linalg::op_norm(&(&first - &second).hermitian_part());
                max_order_gap = max_order_gap.max(gap);
            }
        }
    }
    let max_commutator = cross_commutator(ia.source(), ib.source());
    let ops_commute = max_order_gap <= tol;
    let effects_commute = max_commutator <= tol;
    ObjectivityReport {
        ops_commute,
        effects_commute,
        agree: ops_commute == effects_commute,
        max_order_gap,
        max_commutator,
    }
}

/// `max_{i,j} ‖[E_i, F_j]‖`.
pub fn cross_commutator(a: &Pom, b: &Pom) -> f64 {
    let pairs: Vec<(&Matrix, &Matrix)> = a
        .effects()
        .iter()
        .flat_map(|e| b.effects().iter().map(move |f| (e.matrix(), f.matrix())))
        .collect();
    linalg::max_commutator_norm(&pairs).map_or(0.0, |(_, v)| v)
}

#[derive(Clone, Debug, Serialize)]
pub struct CausalityReport {
    pub a_disturbs_b: bool,
    pub b_disturbs_a: bool,
    pub max_deviation_ab: f64,
    pub max_deviation_ba: f64,
    pub max_commutator: f64,
}

/// Weak causality for Lüders measurements, both directions.
pub fn causality_check_c(a: &Pom, b: &Pom, tol: f64) -> Result<CausalityReport> {
    let ia = LudersInstrument::new(a.clone())?;
    let ib = LudersInstrument::new(b.clone())?;
    causality_with(&ia, &ib, tol)
}

pub fn causality_with(
    ia: &LudersInstrument,
    ib: &LudersInstrument,
    tol: f64,
) -> Result<CausalityReport> {
    let worst = |inst: &LudersInstrument, other: &Pom| -> Result<f64> {
        other.effects().iter().try_fold(0.0f64, |m, f| {
            Ok(m.max(inst.nondisturbance(f, tol)?.deviation))
        })
    };
    let max_deviation_ab = worst(ia, ib.source())?;
    let max_deviation_ba = worst(ib, ia.source())?;
    Ok(CausalityReport {
        a_disturbs_b: max_deviation_ab > tol,
        b_disturbs_a: max_deviation_ba > tol,
        max_deviation_ab,
        max_deviation_ba,
        max_commutator: cross_commutator(ia.source(), ib.source()),
    })
}
