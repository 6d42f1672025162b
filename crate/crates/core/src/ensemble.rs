//! Seeded randomized ensembles for the Lüders equivalences, the range
//! reduction of annihilating effects and the sharpness dichotomy.
//!
//! Trials are independent and run in parallel; record order is trial order.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::effects::Effect;
use crate::error::Result;
use crate::luders::{self, Case, LudersInstrument};
use crate::matrix::{Matrix, ZERO};
use crate::pom::Pom;
use crate::random::{self, trial_rng};

/// How a trial's pair of POMs is constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Independent random POMs; generically noncommuting.
    Generic,
    /// Both POMs diagonal in one random basis.
    Commuting,
    /// `A`'s first effect is diagonal in the basis of `B`, the rest are
    /// generic; for binary `A` this commutes, otherwise it does not.
    PartiallyCommuting,
    /// `A` block-diagonal, `B` scalar on each block.
    BlockScalar,
    /// A pair supplied by the caller.
    Fixed,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Generic => "generic",
            Family::Commuting => "commuting",
            Family::PartiallyCommuting => "partially_commuting",
            Family::BlockScalar => "block_scalar",
            Family::Fixed => "fixed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: RangeInclusive<usize>,
    pub outcomes: RangeInclusive<usize>,
    pub tol: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            dims: 2..=6,
            outcomes: 2..=5,
            tol: crate::tolerance::VERDICT,
        }
    }
}

/// Inputs of one trial: POM `A` and POM `B`; the effect tested against `A`
/// is `B`'s first effect.
#[derive(Clone, Debug)]
pub struct TrialInputs {
    pub trial: u64,
    pub family: Family,
    pub a: Pom,
    pub b: Pom,
}

/// All verdicts of one trial.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub trial: u64,
    pub family: Family,
    pub dim: usize,
    pub outcomes_a: usize,
    pub outcomes_b: usize,
    pub case: Case,
    pub max_commutator: f64,
    pub deviation: f64,
    pub commute: bool,
    pub nondisturb: bool,
    pub equivalent: bool,
    pub max_order_gap: f64,
    pub cross_commutator: f64,
    pub ops_commute: bool,
    pub effects_commute: bool,
    pub agree: bool,
    pub a_disturbs_b: bool,
    pub b_disturbs_a: bool,
}

impl TrialRecord {
    /// Commuting operations must imply nondisturbance in both directions.
    pub fn objectivity_implies_causality(&self) -> bool {
        !self.ops_commute || (!self.a_disturbs_b && !self.b_disturbs_a)
    }

    pub fn is_counterexample(&self) -> bool {
        !self.equivalent || !self.agree || !self.objectivity_implies_causality()
    }
}

pub const CSV_HEADER: &str = "seed,trial,family,dim,outcomes_a,outcomes_b,case,max_commutator,deviation,commute,nondisturb,equivalent,max_order_gap,cross_commutator,ops_commute,effects_commute,agree,a_disturbs_b,b_disturbs_a";

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:e},{:e},{},{},{},{:e},{:e},{},{},{},{},{}",
            self.seed,
            self.trial,
            self.family.as_str(),
            self.dim,
            self.outcomes_a,
            self.outcomes_b,
            self.case.as_str(),
            self.max_commutator,
            self.deviation,
            self.commute,
            self.nondisturb,
            self.equivalent,
            self.max_order_gap,
            self.cross_commutator,
            self.ops_commute,
            self.effects_commute,
            self.agree,
            self.a_disturbs_b,
            self.b_disturbs_a,
        )
    }
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Draws the inputs of trial `trial` deterministically from `seed`.
pub fn draw_trial(
    seed: u64,
    trial: u64,
    dims: &RangeInclusive<usize>,
    outcomes: &RangeInclusive<usize>,
) -> TrialInputs {
    let mut rng = trial_rng(seed, trial);
    let n = rng.random_range(dims.clone());
    let ka = rng.random_range(outcomes.clone());
    let kb = rng.random_range(outcomes.clone());
    let family = match rng.random_range(0..4u8) {
        0 => Family::Generic,
        1 => Family::Commuting,
        2 => Family::PartiallyCommuting,
        _ => Family::BlockScalar,
    };
    let (a, b) = match family {
        Family::Generic => (
            random::random_pom(&mut rng, n, ka),
            random::random_pom(&mut rng, n, kb),
        ),
        Family::Commuting => {
            let u = random::random_unitary(&mut rng, n);
            (
                random::diagonal_pom(&mut rng, &u, ka),
                random::diagonal_pom(&mut rng, &u, kb),
            )
        }
        Family::PartiallyCommuting => partially_commuting(&mut rng, n, ka, kb),
        Family::BlockScalar | Family::Fixed => block_scalar(&mut rng, n, ka, kb),
    };
    TrialInputs {
        trial,
        family,
        a,
        b,
    }
}

fn partially_commuting(rng: &mut impl Rng, n: usize, ka: usize, kb: usize) -> (Pom, Pom) {
    let u = random::random_unitary(rng, n);
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.8)).collect();
    let first = random::in_basis(&u, &d).hermitian_part();
    let rest_diag: Vec<f64> = d.iter().map(|x| (1.0 - x).sqrt()).collect();
    let root = random::in_basis(&u, &rest_diag);
    let mut effects = vec![first];
    if ka == 2 {
        effects.push(
            random::in_basis(&u, &d.iter().map(|x| 1.0 - x).collect::<Vec<_>>()).hermitian_part(),
        );
    } else {
        let q = random::random_pom(rng, n, ka - 1);
        for e in q.effects() {
            effects.push(e.matrix().sandwich(&root).hermitian_part());
        }
    }
    let a = Pom::build(effects, true).expect("split of the identity");
    let b = random::diagonal_pom(rng, &u, kb);
    (a, b)
}

fn block_scalar(rng: &mut impl Rng, n: usize, ka: usize, kb: usize) -> (Pom, Pom) {
    let u = random::random_unitary(rng, n);
    let m = if n >= 2 { rng.random_range(1..n) } else { 1 };
    let upper = random::random_pom(rng, m, ka);
    let lower = (n > m).then(|| random::random_pom(rng, n - m, ka));
    let a_effects = (0..ka)
        .map(|i| {
            let block = direct_sum(
                upper.effect(i).matrix(),
                lower.as_ref().map(|p| p.effect(i).matrix()),
            );
            block.conjugate_by(&u).hermitian_part()
        })
        .collect();
    let f = random::random_simplex(rng, kb);
    let g = random::random_simplex(rng, kb);
    let b_effects = (0..kb)
        .map(|j| {
            let diag: Vec<f64> = (0..n).map(|k| if k < m { f[j] } else { g[j] }).collect();
            random::in_basis(&u, &diag).hermitian_part()
        })
        .collect();
    (
        Pom::build(a_effects, true).expect("blockwise normalized"),
        Pom::build(b_effects, true).expect("convex weights"),
    )
}

/// Block-diagonal `X ⊕ Y`.
pub fn direct_sum(x: &Matrix, y: Option<&Matrix>) -> Matrix {
    let m = x.dim();
    let n = m + y.map_or(0, Matrix::dim);
    Matrix::from_fn(n, |i, j| match (i < m, j < m) {
        (true, true) => x[(i, j)],
        (false, false) => y.map_or(ZERO, |y| y[(i - m, j - m)]),
        _ => ZERO,
    })
}

pub fn run_trial(seed: u64, inputs: &TrialInputs, tol: f64) -> Result<TrialRecord> {
    let ia = LudersInstrument::new(inputs.a.clone())?;
    let ib = LudersInstrument::new(inputs.b.clone())?;
    let p1 = luders::commutativity_nondisturbance_with(&ia, inputs.b.effect(0), tol)?;
    let obj = luders::objectivity_with(&ia, &ib, tol);
    let caus = luders::causality_with(&ia, &ib, tol)?;
    Ok(TrialRecord {
        seed,
        trial: inputs.trial,
        family: inputs.family,
        dim: inputs.a.dim(),
        outcomes_a: inputs.a.len(),
        outcomes_b: inputs.b.len(),
        case: p1.case,
        max_commutator: p1.max_commutator,
        deviation: p1.deviation,
        commute: p1.commute,
        nondisturb: p1.nondisturb,
        equivalent: p1.equivalent,
        max_order_gap: obj.max_order_gap,
        cross_commutator: obj.max_commutator,
        ops_commute: obj.ops_commute,
        effects_commute: obj.effects_commute,
        agree: obj.agree,
        a_disturbs_b: caus.a_disturbs_b,
        b_disturbs_a: caus.b_disturbs_a,
    })
}

/// Runs a caller-supplied pair: `B` is made binary as `{b, I − b}`.
pub fn run_fixed(a: &Pom, b: &Effect, tol: f64) -> Result<TrialRecord> {
    let b_pom = Pom::from_effects(
        vec![0usize.into(), 1usize.into()],
        vec![b.clone(), b.complement()],
        true,
    )?;
    let inputs = TrialInputs {
        trial: 0,
        family: Family::Fixed,
        a: a.clone(),
        b: b_pom,
    };
    run_trial(0, &inputs, tol)
}

/// Runs every trial; output is in trial order regardless of scheduling.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<Vec<TrialRecord>> {
    (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let inputs = draw_trial(config.seed, t, &config.dims, &config.outcomes);
            run_trial(config.seed, &inputs, config.tol)
        })
        .collect()
}

/// A pair of effects with supports built from chosen basis vectors of one
/// random basis, or (in `overlap` mode) one support spread over a random
/// subspace.
#[derive(Clone, Debug)]
pub struct SupportPair {
    pub e1: Effect,
    pub e2: Effect,
    /// Whether the construction makes the ranges orthogonal.
    pub orthogonal_by_construction: bool,
}

pub fn draw_support_pair(seed: u64, trial: u64, dims: &RangeInclusive<usize>) -> SupportPair {
    let mut rng = trial_rng(seed, trial);
    let n = rng.random_range(dims.clone());
    let u = random::random_unitary(&mut rng, n);
    let orthogonal = rng.random_bool(0.5);
    let assignment: Vec<u8> = (0..n).map(|_| rng.random_range(0..3u8)).collect();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for (k, &which) in assignment.iter().enumerate() {
        let v = rng.random_range(0.05..=1.0);
        match which {
            0 => d1[k] = v,
            1 => d2[k] = v,
            _ => {}
        }
    }
    if !orthogonal {
        // Share one basis direction.
        let k = rng.random_range(0..n);
        d1[k] = rng.random_range(0.05..=1.0);
        d2[k] = rng.random_range(0.05..=1.0);
    }
    let e1 = Effect::trusted(random::in_basis(&u, &d1).hermitian_part());
    let e2 = if !orthogonal && rng.random_bool(0.5) {
        // Range in a generic position relative to e1.
        let w = random::random_unitary(&mut rng, n);
        Effect::trusted(random::in_basis(&w, &d2).hermitian_part())
    } else {
        Effect::trusted(random::in_basis(&u, &d2).hermitian_part())
    };
    SupportPair {
        e1,
        e2,
        orthogonal_by_construction: orthogonal,
    }
}

/// Mix of projections, generic effects and effects whose eigenvalues sit
/// a small distance from {0, 1}.
pub fn draw_sharpness_effect(seed: u64, trial: u64, dims: &RangeInclusive<usize>) -> Effect {
    let mut rng = trial_rng(seed, trial);
    let n = rng.random_range(dims.clone());
    match rng.random_range(0..3u8) {
        0 => {
            let rank = rng.random_range(0..=n);
            random::random_projection(&mut rng, n, rank)
        }
        1 => random::random_effect(&mut rng, n),
        _ => {
            let u = random::random_unitary(&mut rng, n);
            let eps = 10f64.powf(rng.random_range(-6.0..-3.0));
            let diag: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.5) { 1.0 - eps } else { eps })
                .collect();
            Effect::trusted(random::in_basis(&u, &diag).hermitian_part())
        }
    }
}

/// Normalized POM for the sharpness dichotomy: either projective (a random
/// partition of a random basis) or generic.
pub fn draw_sharpness_pom(
    seed: u64,
    trial: u64,
    dims: &RangeInclusive<usize>,
    outcomes: &RangeInclusive<usize>,
) -> Pom {
    let mut rng = trial_rng(seed, trial);
    let n = rng.random_range(dims.clone());
    let k = rng.random_range(outcomes.clone());
    if rng.random_bool(0.5) {
        let u = random::random_unitary(&mut rng, n);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let effects = (0..k)
            .map(|i| {
                let diag: Vec<f64> = labels
                    .iter()
                    .map(|&l| if l == i { 1.0 } else { 0.0 })
                    .collect();
                random::in_basis(&u, &diag).hermitian_part()
            })
            .collect();
        Pom::build(effects, true).expect("projective partition of the identity")
    } else {
        random::random_pom(&mut rng, n, k)
    }
}
