//! Translation-covariant localization on the cyclic lattice `Z_N`.
//!
//! A [`LatticeModel`] pairs the cyclic shift `T|x⟩ = |x+1⟩` with a
//! Hamiltonian. A [`LocalizationMap`] assigns to every set of sites at a
//! time slice the Heisenberg-evolved effect `e^{iHtτ} E_Δ e^{−iHtτ}`.
//!
//! Space is cyclic and shift covariance is exact. Light cones wrap around;
//! scans require `t·c·τ < N/2`.

mod config;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::effects::{self, Effect, Endpoint};
use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen};
use crate::matrix::{vector_norm, Matrix, ONE, ZERO};
use crate::pom::{Outcome, Pom};
use crate::tolerance::{ENDPOINT, TAU_EIG};

pub use config::{BuiltModel, FiducialEntry, HamiltonianSpec, ModelConfig};

/// Cyclic lattice with dynamics.
#[derive(Clone, Debug)]
pub struct LatticeModel {
    n_sites: usize,
    hamiltonian: Matrix,
    shift: Matrix,
    light_speed: f64,
    time_step: f64,
    spectrum: HermitianEigen,
}

/// `T` with `T|x⟩ = |x + 1 mod N⟩`.
pub fn shift_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, |i, j| if i == (j + 1) % n { ONE } else { ZERO })
}

/// Nearest-neighbour hopping `−(T + T†)/2`; group velocity at most one site
/// per unit time.
pub fn hopping_hamiltonian(n: usize) -> Matrix {
    let t = shift_matrix(n);
    (&t + &t.adjoint()).scale(-0.5)
}

impl LatticeModel {
    pub fn new(
        n_sites: usize,
        hamiltonian: Matrix,
        light_speed: f64,
        time_step: f64,
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidModel("n_sites must be positive".into()));
        }
        if hamiltonian.dim() != n_sites {
            return Err(Error::DimensionMismatch {
                expected: n_sites,
                found: hamiltonian.dim(),
            });
        }
        if !(light_speed.is_finite() && light_speed > 0.0) {
            return Err(Error::InvalidModel(format!(
                "light_speed {light_speed} must be positive"
            )));
        }
        if !(time_step.is_finite() && time_step > 0.0) {
            return Err(Error::InvalidModel(format!(
                "time_step {time_step} must be positive"
            )));
        }
        let spectrum = linalg::eig_hermitian(&hamiltonian)?;
        Ok(Self {
            n_sites,
            hamiltonian,
            shift: shift_matrix(n_sites),
            light_speed,
            time_step,
            spectrum,
        })
    }

    /// Hopping dynamics with `c = 1`, `τ = 1`.
    pub fn hopping(n_sites: usize) -> Self {
        Self::new(n_sites, hopping_hamiltonian(n_sites), 1.0, 1.0).expect("hopping model is valid")
    }

    /// `H = 0`, `c = 1`, `τ = 1`.
    pub fn static_model(n_sites: usize) -> Self {
        Self::new(n_sites, Matrix::zeros(n_sites), 1.0, 1.0).expect("static model is valid")
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn hamiltonian(&self) -> &Matrix {
        &self.hamiltonian
    }

    pub fn shift(&self) -> &Matrix {
        &self.shift
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }

    pub fn time_step(&self) -> f64 {
        self.time_step
    }

    pub fn spectrum(&self) -> &HermitianEigen {
        &self.spectrum
    }

    /// `H = 0` exactly.
    pub fn is_static(&self) -> bool {
        self.hamiltonian.max_abs() == 0.0
    }

    /// `exp(−iHt)` for physical time `t`.
    pub fn propagator(&self, t: f64) -> Matrix {
        if self.is_static() || t == 0.0 {
            return Matrix::identity(self.n_sites);
        }
        linalg::unitary_evolution(&self.spectrum, t)
    }

    /// Heisenberg picture at physical time `t`: `U(t)† E U(t)`.
    pub fn evolve_effect(&self, e: &Matrix, t: f64) -> Matrix {
        if self.is_static() || t == 0.0 {
            return e.clone();
        }
        let u = self.propagator(t);
        (&(&u.adjoint() * e) * &u).hermitian_part()
    }

    /// Physical time of slice `slice`.
    pub fn slice_time(&self, slice: i64) -> f64 {
        slice as f64 * self.time_step
    }

    pub fn cyclic_distance(&self, x: usize, y: usize) -> usize {
        let d = x.abs_diff(y) % self.n_sites;
        d.min(self.n_sites - d)
    }

    /// Largest slice count `t` with `t·c·τ < N/2`.
    pub fn max_unwrapped_slices(&self) -> i64 {
        let half = self.n_sites as f64 / 2.0;
        let per_slice = self.light_speed * self.time_step;
        let t = (half / per_slice).ceil() as i64 - 1;
        t.max(0)
    }
}

/// A set of lattice sites at an integer time slice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialSet {
    pub sites: BTreeSet<usize>,
    pub time_slice: i64,
}

impl SpatialSet {
    pub fn new(sites: impl IntoIterator<Item = usize>, time_slice: i64) -> Self {
        Self {
            sites: sites.into_iter().collect(),
            time_slice,
        }
    }

    /// `{start, start+1, …, start+len−1} mod n`.
    pub fn interval(start: usize, len: usize, n: usize, time_slice: i64) -> Self {
        Self::new((0..len).map(|k| (start + k) % n), time_slice)
    }

    pub fn is_disjoint(&self, other: &SpatialSet) -> bool {
        self.sites.is_disjoint(&other.sites)
    }

    /// Nonempty and not the whole lattice.
    pub fn is_bounded(&self, n: usize) -> bool {
        !self.sites.is_empty() && self.sites.len() < n
    }

    fn check_sites(&self, n: usize) -> Result<()> {
        match self.sites.iter().find(|&&x| x >= n) {
            Some(x) => Err(Error::InvalidSets(format!("site {x} outside Z_{n}"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for SpatialSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sites: Vec<String> = self.sites.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}@{}", sites.join(" "), self.time_slice)
    }
}

/// Which construction produced a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Sharp,
    Smeared,
    Coherent,
    Custom,
}

impl Construction {
    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Sharp => "sharp",
            Construction::Smeared => "smeared",
            Construction::Coherent => "coherent",
            Construction::Custom => "custom",
        }
    }
}

/// `Δ ↦ E_Δ`: a POM over the sites `0..N` at slice 0, evolved to other
/// slices in the Heisenberg picture.
#[derive(Clone, Debug)]
pub struct LocalizationMap {
    base: Pom,
    model: LatticeModel,
    construction: Construction,
}

impl LocalizationMap {
    /// The base POM must have outcomes `0, 1, …, N−1` in order.
    pub fn new(base: Pom, model: LatticeModel) -> Result<Self> {
        Self::with_construction(base, model, Construction::Custom)
    }

    fn with_construction(
        base: Pom,
        model: LatticeModel,
        construction: Construction,
    ) -> Result<Self> {
        let n = model.n_sites();
        if base.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: base.dim(),
            });
        }
        let expected: Vec<Outcome> = (0..n).map(Outcome::from).collect();
        if base.outcomes() != expected.as_slice() {
            return Err(Error::InvalidModel(format!(
                "localization POM must have outcomes 0..{n} in order"
            )));
        }
        Ok(Self {
            base,
            model,
            construction,
        })
    }

    pub fn base(&self) -> &Pom {
        &self.base
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn n_sites(&self) -> usize {
        self.model.n_sites()
    }

    /// `E_x` at slice 0.
    pub fn singleton(&self, x: usize) -> &Effect {
        self.base.effect(x)
    }

    /// `E_Δ` at slice 0.
    pub fn base_effect(&self, sites: &BTreeSet<usize>) -> Result<Effect> {
        SpatialSet {
            sites: sites.clone(),
            time_slice: 0,
        }
        .check_sites(self.n_sites())?;
        Ok(self.base.effect_of_indices(sites))
    }

    /// `E_Δ` at the set's time slice.
    pub fn effect(&self, set: &SpatialSet) -> Result<Effect> {
        self.effect_at_time(&set.sites, self.model.slice_time(set.time_slice))
    }

    /// `E_Δ` at physical time `t`.
    pub fn effect_at_time(&self, sites: &BTreeSet<usize>, t: f64) -> Result<Effect> {
        let base = self.base_effect(sites)?;
        Ok(Effect::trusted(self.model.evolve_effect(base.matrix(), t)))
    }
}

/// `E_x = |x⟩⟨x|`.
pub fn sharp_position_map(model: &LatticeModel) -> LocalizationMap {
    let n = model.n_sites();
    let effects = (0..n)
        .map(|x| {
            Effect::trusted(Matrix::from_fn(n, |i, j| {
                if i == x && j == x {
                    ONE
                } else {
                    ZERO
                }
            }))
        })
        .collect();
    let base = Pom::from_effects((0..n).map(Outcome::from).collect(), effects, true)
        .expect("position projections resolve the identity");
    LocalizationMap::with_construction(base, model.clone(), Construction::Sharp)
        .expect("outcomes are 0..N")
}

/// `E_x = Σ_y k(x − y mod N) |y⟩⟨y|`.
pub fn smeared_position_map(model: &LatticeModel, kernel: &[f64]) -> Result<LocalizationMap> {
    let n = model.n_sites();
    validate_kernel(kernel, n)?;
    let effects = (0..n)
        .map(|x| {
            let diag: Vec<f64> = (0..n).map(|y| kernel[(x + n - y) % n]).collect();
            Matrix::from_diag(&diag)
        })
        .collect();
    let base = Pom::build(effects, true)?;
    LocalizationMap::with_construction(base, model.clone(), Construction::Smeared)
}

fn validate_kernel(kernel: &[f64], n: usize) -> Result<()> {
    if kernel.len() != n {
        return Err(Error::InvalidKernel(format!(
            "kernel has {} entries, lattice has {n} sites",
            kernel.len()
        )));
    }
    if let Some(k) = kernel.iter().find(|k| !k.is_finite() || **k < 0.0) {
        return Err(Error::InvalidKernel(format!(
            "entry {k} is negative or not finite"
        )));
    }
    let total: f64 = kernel.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidKernel(format!(
            "entries sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Weight `1/2` on the origin and `1/4` on each neighbour.
pub fn three_point_kernel(n: usize) -> Vec<f64> {
    let mut k = vec![0.0; n];
    match n {
        1 => k[0] = 1.0,
        2 => {
            k[0] = 0.5;
            k[1] = 0.5;
        }
        _ => {
            k[0] = 0.5;
            k[1] = 0.25;
            k[n - 1] = 0.25;
        }
    }
    k
}

/// Periodic discrete Gaussian of width `N/8` centred at the origin, normalized.
pub fn default_fiducial(n: usize) -> Vec<Complex64> {
    let width = n as f64 / 8.0;
    let nf = n as f64;
    let mut v: Vec<Complex64> = (0..n)
        .map(|x| {
            let amp: f64 = (-3..=3)
                .map(|w| {
                    let d = x as f64 + w as f64 * nf;
                    (-d * d / (2.0 * width * width)).exp()
                })
                .sum();
            Complex64::new(amp, 0.0)
        })
        .collect();
    let norm = vector_norm(&v);
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// `(X^q Z^p η)(x) = e^{2πi p (x−q)/N} η(x − q)`.
pub fn weyl_orbit_vector(fiducial: &[Complex64], q: usize, p: usize) -> Vec<Complex64> {
    let n = fiducial.len();
    (0..n)
        .map(|x| {
            let src = (x + n - q) % n;
            let phase = 2.0 * PI * (p * src % n) as f64 / n as f64;
            fiducial[src] * Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// `G(q, p) = |η_{q,p}⟩⟨η_{q,p}| / N` over the phase space `Z_N × Z_N`,
/// outcomes `(q, p)` in row-major order.
pub fn coherent_state_povm(n: usize, fiducial: &[Complex64]) -> Result<Pom> {
    if fiducial.len() != n || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: fiducial.len(),
        });
    }
    let norm = vector_norm(fiducial);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitVector { norm });
    }
    let mut outcomes = Vec::with_capacity(n * n);
    let mut effects = Vec::with_capacity(n * n);
    for q in 0..n {
        for p in 0..n {
            let eta = weyl_orbit_vector(fiducial, q, p);
            outcomes.push(Outcome::Pair(q as i64, p as i64));
            effects.push(Effect::trusted(
                Matrix::projector(&eta).scale(1.0 / n as f64),
            ));
        }
    }
    Pom::from_effects(outcomes, effects, true)
}

/// `E_q = Σ_p G(q, p)`.
pub fn position_marginal(povm: &Pom, model: &LatticeModel) -> Result<LocalizationMap> {
    let n = model.n_sites();
    if povm.len() != n * n || povm.dim() != n {
        return Err(Error::MalformedGrid(format!(
            "expected {} outcomes of dimension {n}, got {} of dimension {}",
            n * n,
            povm.len(),
            povm.dim()
        )));
    }
    let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut seen = BTreeSet::new();
    for (k, o) in povm.outcomes().iter().enumerate() {
        let Outcome::Pair(q, p) = *o else {
            return Err(Error::MalformedGrid(format!(
                "outcome {o} is not a (q, p) pair"
            )));
        };
        if q < 0 || p < 0 || q as usize >= n || p as usize >= n {
            return Err(Error::MalformedGrid(format!(
                "outcome {o} outside Z_{n} × Z_{n}"
            )));
        }
        seen.insert((q, p));
        rows[q as usize].insert(k);
    }
    if seen.len() != n * n {
        return Err(Error::MalformedGrid("phase-space grid has holes".into()));
    }
    let effects = rows.iter().map(|r| povm.effect_of_indices(r)).collect();
    let base = Pom::from_effects(
        (0..n).map(Outcome::from).collect(),
        effects,
        povm.is_normalized(),
    )?;
    LocalizationMap::with_construction(base, model.clone(), Construction::Coherent)
}

/// Pass/fail with the residual that decided it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub holds: bool,
    pub residual: f64,
}

/// `max_x ‖T^a E_x T^{−a} − E_{x+a}‖`.
pub fn check_covariance(map: &LocalizationMap, a: i64, tol: f64) -> CheckReport {
    let n = map.n_sites();
    let ta = map.model().shift().unitary_power(a);
    let shift = a.rem_euclid(n as i64) as usize;
    let residual = (0..n)
        .map(|x| {
            let moved = map.singleton(x).matrix().conjugate_by(&ta);
            linalg::op_norm(&(&moved - map.singleton((x + shift) % n).matrix()))
        })
        .fold(0.0, f64::max);
    CheckReport {
        holds: residual <= tol,
        residual,
    }
}

/// `min_{x∈Δ₁, y∈Δ₂} dist(x, y) > c·τ·|t₁ − t₂|`.
pub fn spacelike_separated(d1: &SpatialSet, d2: &SpatialSet, model: &LatticeModel) -> bool {
    let dt = (d1.time_slice - d2.time_slice).unsigned_abs() as f64;
    let reach = model.light_speed() * model.time_step() * dt;
    d1.sites
        .iter()
        .flat_map(|&x| d2.sites.iter().map(move |&y| (x, y)))
        .all(|(x, y)| model.cyclic_distance(x, y) as f64 > reach)
}

/// Strict: `E₁E₂ = 0`. Weak: `P⁽¹⁾(E₁)(I − P⁽⁰⁾(E₂)) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Strict,
    Weak,
}

pub fn check_localizability(
    map: &LocalizationMap,
    d1: &SpatialSet,
    d2: &SpatialSet,
    variant: Variant,
    tol: f64,
) -> Result<CheckReport> {
    if d1.time_slice != d2.time_slice {
        return Err(Error::InvalidSets(
            "sets lie on different time slices".into(),
        ));
    }
    if !d1.is_disjoint(d2) {
        return Err(Error::InvalidSets("sets are not disjoint".into()));
    }
    let e1 = map.effect(d1)?;
    let e2 = map.effect(d2)?;
    let residual = match variant {
        Variant::Strict => linalg::op_norm(&(e1.matrix() * e2.matrix())),
        Variant::Weak => effects::weak_exclusion_residual(&e1, &e2, ENDPOINT)?,
    };
    Ok(CheckReport {
        holds: residual <= tol,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalCommutativityReport {
    /// The sets are spacelike separated.
    pub applicable: bool,
    /// Only asserted when applicable.
    pub holds: Option<bool>,
    pub commutator: f64,
}

pub fn check_local_commutativity(
    map: &LocalizationMap,
    d1: &SpatialSet,
    d2: &SpatialSet,
    tol: f64,
) -> Result<LocalCommutativityReport> {
    let applicable = spacelike_separated(d1, d2, map.model());
    let e1 = map.effect(d1)?;
    let e2 = map.effect(d2)?;
    let commutator = linalg::commutator_norm(e1.matrix(), e2.matrix())?;
    Ok(LocalCommutativityReport {
        applicable,
        holds: applicable.then_some(commutator <= tol),
        commutator,
    })
}

/// Every singleton effect has no eigenvalue within `tol` of 1.
pub fn singletons_strongly_unsharp(map: &LocalizationMap, tol: f64) -> bool {
    (0..map.n_sites()).all(|x| map.singleton(x).is_strongly_unsharp(tol))
}

/// `P⁽¹⁾(E_Δ)` at the set's slice.
pub fn certainty_projection(map: &LocalizationMap, set: &SpatialSet, tol: f64) -> Result<Matrix> {
    Ok(map
        .effect(set)?
        .spectral_projection(Endpoint::One, tol)
        .matrix()
        .clone())
}

/// `‖Σ_x E_x − I‖`.
pub fn normalization_residual(map: &LocalizationMap) -> f64 {
    linalg::op_norm(&map.base().total().matrix().shift_diagonal(-1.0))
}

/// Whether the base POM meets the normalization tolerance.
pub fn is_normalized(map: &LocalizationMap) -> bool {
    normalization_residual(map) <= TAU_EIG
}

#[cfg(test)]
mod tests;
