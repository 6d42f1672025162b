//! Positive-operator-valued measures on finite outcome sets.
//!
//! The σ-algebra is always the full power set of the outcomes, so additivity
//! holds by construction: the effect of a subset is the sum of its
//! singleton effects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::effects::Effect;
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::Matrix;
use crate::tolerance::{TAU_EIG, TAU_PSD};

/// An outcome label. Labels are totally ordered so reports are deterministic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Int(i64),
    /// Phase-space point `(q, p)`.
    Pair(i64, i64),
    Name(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Int(i) => write!(f, "{i}"),
            Outcome::Pair(q, p) => write!(f, "({q},{p})"),
            Outcome::Name(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Outcome {
    fn from(i: i64) -> Self {
        Outcome::Int(i)
    }
}

impl From<usize> for Outcome {
    fn from(i: usize) -> Self {
        Outcome::Int(i as i64)
    }
}

impl From<&str> for Outcome {
    fn from(s: &str) -> Self {
        Outcome::Name(s.to_owned())
    }
}

/// A finite POM: one effect per outcome, `Σ E_i ≤ I`.
#[derive(Clone, Debug)]
pub struct Pom {
    outcomes: Vec<Outcome>,
    effects: Vec<Effect>,
    normalized: bool,
    index: BTreeMap<Outcome, usize>,
}

impl PartialEq for Pom {
    fn eq(&self, other: &Self) -> bool {
        self.outcomes == other.outcomes && self.effects == other.effects
    }
}

/// Result of the all-pairs commutator scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutativityReport {
    pub commutative: bool,
    pub max_commutator: f64,
    /// The maximizing pair; absent when every commutator vanishes.
    pub worst_pair: Option<(Outcome, Outcome)>,
}

impl Pom {
    /// Builds a POM with outcomes labelled `0..k`.
    pub fn build(effects: Vec<Matrix>, require_normalized: bool) -> Result<Self> {
        let outcomes = (0..effects.len()).map(Outcome::from).collect();
        Self::with_outcomes(outcomes, effects, require_normalized)
    }

    pub fn with_outcomes(
        outcomes: Vec<Outcome>,
        effects: Vec<Matrix>,
        require_normalized: bool,
    ) -> Result<Self> {
        let effects = effects
            .into_iter()
            .enumerate()
            .map(|(index, m)| {
                Effect::new(m).map_err(|e| Error::InvalidEffect {
                    index,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_effects(outcomes, effects, require_normalized)
    }

    pub fn from_effects(
        outcomes: Vec<Outcome>,
        effects: Vec<Effect>,
        require_normalized: bool,
    ) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::EmptyPom);
        }
        if outcomes.len() != effects.len() {
            return Err(Error::LabelCount {
                outcomes: outcomes.len(),
                effects: effects.len(),
            });
        }
        let dim = effects[0].dim();
        for (index, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::InvalidEffect {
                    index,
                    source: Box::new(Error::DimensionMismatch {
                        expected: dim,
                        found: e.dim(),
                    }),
                });
            }
        }
        let mut index = BTreeMap::new();
        for (k, o) in outcomes.iter().enumerate() {
            if index.insert(o.clone(), k).is_some() {
                return Err(Error::DuplicateOutcome(o.to_string()));
            }
        }

        let total = sum_effects(effects.iter(), dim);
        let eig = linalg::eig_hermitian(&total)?;
        if eig.max() > 1.0 + TAU_PSD {
            return Err(Error::SumExceedsIdentity {
                max_eigenvalue: eig.max(),
            });
        }
        let deviation = linalg::op_norm(&total.shift_diagonal(-1.0));
        let normalized = deviation <= TAU_EIG;
        if require_normalized && !normalized {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self {
            outcomes,
            effects,
            normalized,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn effect(&self, k: usize) -> &Effect {
        &self.effects[k]
    }

    pub fn position(&self, outcome: &Outcome) -> Result<usize> {
        self.index
            .get(outcome)
            .copied()
            .ok_or_else(|| Error::UnknownOutcome(outcome.to_string()))
    }

    /// `E(X) = Σ_{i∈X} E_i`, summed in outcome order. Repeated labels count once.
    pub fn effect_of<'a>(&self, subset: impl IntoIterator<Item = &'a Outcome>) -> Result<Effect> {
        let indices = subset
            .into_iter()
            .map(|o| self.position(o))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(self.effect_of_indices(&indices))
    }

    pub fn effect_of_indices(&self, indices: &BTreeSet<usize>) -> Effect {
        Effect::trusted(sum_effects(
            indices.iter().map(|&k| &self.effects[k]),
            self.dim(),
        ))
    }

    pub fn total(&self) -> Effect {
        Effect::trusted(sum_effects(self.effects.iter(), self.dim()))
    }

    /// Every singleton effect is a projection.
    pub fn is_sharp_pom(&self, tol: f64) -> bool {
        self.effects.iter().all(|e| e.is_sharp(tol))
    }

    pub fn is_commutative(&self, tol: f64) -> CommutativityReport {
        let mut pairs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                pairs.push((self.effects[i].matrix(), self.effects[j].matrix()));
                labels.push((i, j));
            }
        }
        let (max_commutator, worst) = match linalg::max_commutator_norm(&pairs) {
            Some((k, v)) if v > 0.0 => (v, Some(labels[k])),
            _ => (0.0, None),
        };
        CommutativityReport {
            commutative: max_commutator <= tol,
            max_commutator,
            worst_pair: worst.map(|(i, j)| (self.outcomes[i].clone(), self.outcomes[j].clone())),
        }
    }

    /// Largest `‖E_i E_j‖` over distinct outcomes; zero iff `E(X)E(Y) = 0`
    /// for all disjoint `X, Y`.
    pub fn max_disjoint_product(&self) -> (f64, Option<(Outcome, Outcome)>) {
        let mut best = (0.0, None);
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i == j {
                    continue;
                }
                let v = linalg::op_norm(&(self.effects[i].matrix() * self.effects[j].matrix()));
                if v > best.0 {
                    best = (
                        v,
                        Some((self.outcomes[i].clone(), self.outcomes[j].clone())),
                    );
                }
            }
        }
        best
    }

    /// Groups outcomes by a partition of the outcome set; the new outcomes
    /// are labelled `0..partition.len()`.
    pub fn coarse_grain(&self, partition: &[Vec<Outcome>]) -> Result<Pom> {
        let mut seen = BTreeSet::new();
        let mut blocks = Vec::with_capacity(partition.len());
        for block in partition {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            let mut indices = BTreeSet::new();
            for o in block {
                let k = self.position(o)?;
                if !seen.insert(k) {
                    return Err(Error::InvalidPartition(format!(
                        "outcome {o} appears twice"
                    )));
                }
                indices.insert(k);
            }
            blocks.push(indices);
        }
        if seen.len() != self.len() {
            return Err(Error::InvalidPartition(format!(
                "covers {} of {} outcomes",
                seen.len(),
                self.len()
            )));
        }
        let effects = blocks.iter().map(|b| self.effect_of_indices(b)).collect();
        Ok(Pom {
            outcomes: (0..blocks.len()).map(Outcome::from).collect(),
            effects,
            normalized: self.normalized,
            index: (0..blocks.len()).map(|k| (Outcome::from(k), k)).collect(),
        })
    }
}

fn sum_effects<'a>(effects: impl Iterator<Item = &'a Effect>, dim: usize) -> Matrix {
    effects.fold(Matrix::zeros(dim), |acc, e| &acc + e.matrix())
}

#[derive(Serialize, Deserialize)]
struct PomJson {
    outcomes: Vec<Outcome>,
    effects: Vec<Matrix>,
    normalized: bool,
}

impl Serialize for Pom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PomJson {
            outcomes: self.outcomes.clone(),
            effects: self.effects.iter().map(|e| e.matrix().clone()).collect(),
            normalized: self.normalized,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = PomJson::deserialize(d)?;
        Pom::with_outcomes(json.outcomes, json.effects, json.normalized)
            .map_err(serde::de::Error::custom)
    }
}
