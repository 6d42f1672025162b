use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    coherent_state_povm, default_fiducial, hopping_hamiltonian, position_marginal,
    sharp_position_map, smeared_position_map, three_point_kernel, Construction, LatticeModel,
    LocalizationMap,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pom::Pom;

/// `"hopping"`, `"zero"`, or an explicit Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianSpec {
    Named(String),
    Matrix(Matrix),
}

impl Default for HamiltonianSpec {
    fn default() -> Self {
        HamiltonianSpec::Named("hopping".into())
    }
}

/// A real amplitude or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FiducialEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<FiducialEntry> for Complex64 {
    fn from(e: FiducialEntry) -> Self {
        match e {
            FiducialEntry::Real(re) => Complex64::new(re, 0.0),
            FiducialEntry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// JSON model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n_sites: usize,
    #[serde(default)]
    pub hamiltonian: HamiltonianSpec,
    #[serde(default = "one")]
    pub light_speed: f64,
    #[serde(default = "one")]
    pub time_step: f64,
    pub construction: Construction,
    /// Smeared only; length `n_sites`, indexed by `x − y mod N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<f64>>,
    /// Coherent only; length `n_sites`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiducial: Option<Vec<FiducialEntry>>,
}

fn one() -> f64 {
    1.0
}

/// A model with its localization map; `povm` is the phase-space POM for
/// the coherent construction.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub model: LatticeModel,
    pub map: LocalizationMap,
    pub povm: Option<Pom>,
}

impl ModelConfig {
    pub fn new(n_sites: usize, construction: Construction) -> Self {
        Self {
            n_sites,
            hamiltonian: HamiltonianSpec::default(),
            light_speed: 1.0,
            time_step: 1.0,
            construction,
            kernel: None,
            fiducial: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn lattice(&self) -> Result<LatticeModel> {
        let n = self.n_sites;
        if n == 0 {
            return Err(Error::InvalidModel("n_sites must be positive".into()));
        }
        let h = match &self.hamiltonian {
            HamiltonianSpec::Named(name) => match name.as_str() {
                "hopping" => hopping_hamiltonian(n),
                "zero" => Matrix::zeros(n),
                other => {
                    return Err(Error::InvalidModel(format!(
                        "unknown hamiltonian {other:?}; expected \"hopping\", \"zero\" or a matrix"
                    )))
                }
            },
            HamiltonianSpec::Matrix(m) => m.clone(),
        };
        LatticeModel::new(n, h, self.light_speed, self.time_step)
    }

    pub fn build(&self) -> Result<BuiltModel> {
        let model = self.lattice()?;
        let n = self.n_sites;
        if self.kernel.is_some() && self.construction != Construction::Smeared {
            return Err(Error::InvalidModel(
                "kernel given for a non-smeared construction".into(),
            ));
        }
        if self.fiducial.is_some() && self.construction != Construction::Coherent {
            return Err(Error::InvalidModel(
                "fiducial given for a non-coherent construction".into(),
            ));
        }
        let (map, povm) = match self.construction {
            Construction::Sharp => (sharp_position_map(&model), None),
            Construction::Smeared => {
                let kernel = self.kernel.clone().unwrap_or_else(|| three_point_kernel(n));
                (smeared_position_map(&model, &kernel)?, None)
            }
            Construction::Coherent => {
                let fiducial: Vec<Complex64> = match &self.fiducial {
                    Some(v) => v.iter().copied().map(Complex64::from).collect(),
                    None => default_fiducial(n),
                };
                let povm = coherent_state_povm(n, &fiducial)?;
                (position_marginal(&povm, &model)?, Some(povm))
            }
            Construction::Custom => {
                return Err(Error::InvalidModel(
                    "construction must be sharp, smeared or coherent".into(),
                ))
            }
        };
        Ok(BuiltModel { model, map, povm })
    }
}
