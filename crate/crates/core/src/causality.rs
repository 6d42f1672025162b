//! Causality diagnostics on lattice localization maps: leakage out of
//! light-cone inflated sets, the projection chain under exact localization
//! and a scan of the covariance, localizability and local commutativity
//! conditions over small intervals.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::effects::{Effect, Endpoint};
use crate::error::{Error, Result};
use crate::linalg;
use crate::localization::{check_covariance, spacelike_separated, LocalizationMap, SpatialSet};
use crate::matrix::{vector_norm, Matrix};
use crate::tolerance::{ENDPOINT, VERDICT};

/// Initial probabilities below `1 − ε` are flagged.
pub const INITIAL_PROBABILITY_EPS: f64 = 1e-6;

/// `Δ_t = {x : dist(x, Δ) ≤ ⌊c·t⌋}` at slice `Δ.slice + round(t/τ)`.
pub fn inflated_set(d: &SpatialSet, t: f64, map: &LocalizationMap) -> Result<SpatialSet> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let model = map.model();
    let n = model.n_sites();
    let radius = (model.light_speed() * t + 1e-9).floor() as usize;
    let sites: BTreeSet<usize> = (0..n)
        .filter(|&x| {
            d.sites
                .iter()
                .any(|&y| model.cyclic_distance(x, y) <= radius)
        })
        .collect();
    Ok(SpatialSet {
        sites,
        time_slice: d.time_slice + (t / model.time_step()).round() as i64,
    })
}

/// `1 − ⟨ψ_t| E_{Δ_t} |ψ_t⟩` over a list of times.
#[derive(Clone, Debug, Serialize)]
pub struct LeakageSeries {
    pub base: SpatialSet,
    pub times: Vec<f64>,
    pub leakage: Vec<f64>,
    pub initial_probability: f64,
    pub warning: Option<String>,
}

/// Schrödinger picture: the state evolves with `exp(−iHt)`, effects are
/// taken at slice 0 so only the sites of `d` matter.
pub fn leakage_scan(
    map: &LocalizationMap,
    phi: &[Complex64],
    d: &SpatialSet,
    times: &[f64],
) -> Result<LeakageSeries> {
    let model = map.model();
    let n = model.n_sites();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    let norm = vector_norm(phi);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitVector { norm });
    }
    if let Some(&t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let initial_probability = map.base_effect(&d.sites)?.matrix().expectation(phi);
    let warning = (initial_probability < 1.0 - INITIAL_PROBABILITY_EPS).then(|| {
        format!("initial state has probability {initial_probability:.6e} in the base set, below 1 − {INITIAL_PROBABILITY_EPS:e}")
    });
    let leakage = times
        .par_iter()
        .map(|&t| {
            let inflated = inflated_set(d, t, map)?;
            let psi = model.propagator(t).apply(phi);
            let e = map.base_effect(&inflated.sites)?;
            Ok(1.0 - e.matrix().expectation(&psi))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LeakageSeries {
        base: d.clone(),
        times: times.to_vec(),
        leakage,
        initial_probability,
        warning,
    })
}

/// Residuals of
/// `P⁽¹⁾(E_{Δ₁}) ≤ P⁽¹⁾(E_{Δ₁,t}) ≤ P⁽⁰⁾(E_{Δ₂,t}) ≤ I − P⁽¹⁾(E_{Δ₂,t})`,
/// each measured as `‖P(I − Q)‖`.
#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    /// `P⁽¹⁾(E_{Δ₁}) ≠ 0`: some state is strictly localized in `Δ₁`.
    pub premise_holds: bool,
    /// True when the premise fails; the chain then holds vacuously.
    pub vacuous: bool,
    pub chain_holds: bool,
    pub residuals: [f64; 3],
    /// `‖P⁽¹⁾(E_{Δ₁}) P⁽¹⁾(E_{Δ₂,t})‖`.
    pub endpoint: f64,
    pub premise_rank: usize,
}

/// `Δ₁` is taken at time 0 and `Δ₂` at time `t`; `Δ₂` must avoid the
/// inflation of `Δ₁` by `t`.
pub fn strong_causality_chain(
    map: &LocalizationMap,
    d1: &SpatialSet,
    d2: &SpatialSet,
    t: f64,
    tol: f64,
) -> Result<ChainReport> {
    let model = map.model();
    let inflated = inflated_set(d1, t, map)?;
    if !inflated.is_disjoint(d2) {
        return Err(Error::Geometry(format!(
            "{} meets the inflated set {}",
            setlabel(d2),
            setlabel(&inflated)
        )));
    }
    let identity = Matrix::identity(model.n_sites());
    let e1 = map.base_effect(&d1.sites)?;
    let p1 = e1.spectral_projection(Endpoint::One, ENDPOINT);
    if p1.is_zero() {
        return Ok(ChainReport {
            premise_holds: false,
            vacuous: true,
            chain_holds: true,
            residuals: [0.0; 3],
            endpoint: 0.0,
            premise_rank: 0,
        });
    }
    let e_inf = map.effect_at_time(&inflated.sites, t)?;
    let e2 = map.effect_at_time(&d2.sites, t)?;

    let q = e_inf.spectral_projection(Endpoint::One, ENDPOINT);
    let r = e2.spectral_projection(Endpoint::Zero, ENDPOINT);
    let s1 = e2.spectral_projection(Endpoint::One, ENDPOINT);
    let gap = |p: &Matrix, q: &Matrix| linalg::op_norm(&(p * &(&identity - q)));
    let residuals = [
        gap(p1.matrix(), q.matrix()),
        gap(q.matrix(), r.matrix()),
        linalg::op_norm(&(r.matrix() * s1.matrix())),
    ];
    let endpoint = linalg::op_norm(&(p1.matrix() * s1.matrix()));
    Ok(ChainReport {
        premise_holds: true,
        vacuous: false,
        chain_holds: residuals.iter().all(|&x| x <= tol) && endpoint <= tol,
        residuals,
        endpoint,
        premise_rank: p1.rank(),
    })
}

fn setlabel(d: &SpatialSet) -> String {
    d.to_string()
}

/// Scan parameters.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanOptions {
    /// Largest time slice; must satisfy `t·c·τ < N/2`.
    pub max_t: i64,
    /// Interval lengths `1..=max_len`.
    pub max_len: usize,
    pub tol: f64,
}

impl ScanOptions {
    pub fn for_map(map: &LocalizationMap) -> Self {
        let model = map.model();
        Self {
            max_t: model.max_unwrapped_slices().min(4),
            max_len: 2.min(model.n_sites().saturating_sub(1)).max(1),
            tol: VERDICT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Covariance,
    StrictLocalizability,
    WeakLocalizability,
    LocalCommutativity,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Covariance,
        Condition::StrictLocalizability,
        Condition::WeakLocalizability,
        Condition::LocalCommutativity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Covariance => "covariance",
            Condition::StrictLocalizability => "strict_localizability",
            Condition::WeakLocalizability => "weak_localizability",
            Condition::LocalCommutativity => "local_commutativity",
        }
    }
}

/// One evaluated condition instance. Covariance cells carry the shift in
/// `shift` and no sets.
#[derive(Clone, Debug, Serialize)]
pub struct ScanCell {
    pub condition: Condition,
    pub shift: Option<i64>,
    pub set1: Option<SpatialSet>,
    pub set2: Option<SpatialSet>,
    pub residual: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionRow {
    pub condition: Condition,
    pub holds: bool,
    pub cells: usize,
    pub worst_residual: f64,
    pub worst_cell: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every singleton effect is strongly unsharp.
    StronglyUnsharp,
    /// Some spacelike pair fails to commute.
    CommutativityViolated,
    /// Sharp, covariant, localizable and locally commutative.
    SharpAndLocalizable,
    Mixed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::StronglyUnsharp => "strongly_unsharp",
            Verdict::CommutativityViolated => "commutativity_violated",
            Verdict::SharpAndLocalizable => "sharp_and_localizable",
            Verdict::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SchliederReport {
    pub construction: String,
    pub n_sites: usize,
    pub options: ScanOptions,
    pub rows: Vec<ConditionRow>,
    pub cells: Vec<ScanCell>,
    /// `max_x λ_max(E_x)`.
    pub max_singleton_eigenvalue: f64,
    /// Largest eigenvalue of `E_Δ` over scanned intervals.
    pub max_interval_eigenvalue: f64,
    pub has_unit_eigenvalue: bool,
    pub dynamics_nontrivial: bool,
    pub verdict: Verdict,
    /// Covariance, weak localizability and local commutativity all hold
    /// with nontrivial dynamics while some bounded `E_Δ` has eigenvalue 1.
    pub consistency_violation: bool,
}

impl SchliederReport {
    pub fn row(&self, c: Condition) -> &ConditionRow {
        self.rows
            .iter()
            .find(|r| r.condition == c)
            .expect("every condition has a row")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "construction {}  N={}  max_t={}  max_len={}  tol={:e}",
            self.construction,
            self.n_sites,
            self.options.max_t,
            self.options.max_len,
            self.options.tol
        );
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>7} {:>14}  worst",
            "condition", "holds", "cells", "max_residual"
        );
        for r in &self.rows {
            let worst = r
                .worst_cell
                .map(|k| describe(&self.cells[k]))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>7} {:>14.6e}  {}",
                r.condition.as_str(),
                r.holds,
                r.cells,
                r.worst_residual,
                worst
            );
        }
        let _ = writeln!(
            out,
            "max singleton eigenvalue {:.12}",
            self.max_singleton_eigenvalue
        );
        let _ = writeln!(
            out,
            "max interval eigenvalue  {:.12}",
            self.max_interval_eigenvalue
        );
        let _ = writeln!(out, "verdict {}", self.verdict.as_str());
        if !self.dynamics_nontrivial {
            let _ = writeln!(
                out,
                "note: static dynamics; the consistency assertion is not applicable"
            );
        }
        if self.consistency_violation {
            let _ = writeln!(
                out,
                "FINDING: all conditions hold with nontrivial dynamics and a unit eigenvalue"
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,shift,set1,t1,set2,t2,residual,holds\n");
        for c in &self.cells {
            let (s1, t1) = c.set1.as_ref().map(split).unwrap_or_default();
            let (s2, t2) = c.set2.as_ref().map(split).unwrap_or_default();
            let shift = c.shift.map(|a| a.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:e},{}",
                c.condition.as_str(),
                shift,
                s1,
                t1,
                s2,
                t2,
                c.residual,
                c.holds
            );
        }
        out
    }
}

fn split(d: &SpatialSet) -> (String, String) {
    let sites: Vec<String> = d.sites.iter().map(|x| x.to_string()).collect();
    (sites.join(" "), d.time_slice.to_string())
}

fn describe(c: &ScanCell) -> String {
    match (&c.shift, &c.set1, &c.set2) {
        (Some(a), _, _) => format!("a={a}"),
        (_, Some(d1), Some(d2)) => format!("{d1} vs {d2}"),
        _ => "-".into(),
    }
}

struct PairSpec {
    d1: SpatialSet,
    d2: SpatialSet,
}

/// Evaluates the four conditions on intervals `{s, …, s+l−1}` with
/// `l ≤ max_len`, `Δ₁` anchored at site 0, and time slices `0..=max_t`.
pub fn schlieder_scan(map: &LocalizationMap, options: ScanOptions) -> Result<SchliederReport> {
    let model = map.model();
    let n = model.n_sites();
    if options.max_t < 0 {
        return Err(Error::NegativeTime(options.max_t as f64));
    }
    if options.max_t > model.max_unwrapped_slices() {
        return Err(Error::Geometry(format!(
            "max_t={} reaches half the lattice (N={n}, c={}, τ={}); light cones would wrap",
            options.max_t,
            model.light_speed(),
            model.time_step()
        )));
    }
    if options.max_len == 0 || options.max_len >= n {
        return Err(Error::Geometry(format!("max_len must be in 1..{n}")));
    }
    let tol = options.tol;
    let mut cells = Vec::new();

    for a in 1..n as i64 {
        let r = check_covariance(map, a, tol);
        cells.push(ScanCell {
            condition: Condition::Covariance,
            shift: Some(a),
            set1: None,
            set2: None,
            residual: r.residual,
            holds: r.holds,
        });
    }

    let lens = 1..=options.max_len;
    let anchors: Vec<SpatialSet> = lens
        .clone()
        .map(|l| SpatialSet::interval(0, l, n, 0))
        .collect();
    let base_effects: Vec<Effect> = anchors
        .iter()
        .map(|d| map.base_effect(&d.sites))
        .collect::<Result<_>>()?;

    let mut equal_time = Vec::new();
    for d1 in &anchors {
        for l2 in lens.clone() {
            for s in 0..n {
                let d2 = SpatialSet::interval(s, l2, n, 0);
                if d1.is_disjoint(&d2) {
                    equal_time.push(PairSpec { d1: d1.clone(), d2 });
                }
            }
        }
    }
    let localizability: Vec<(f64, f64)> = equal_time
        .par_iter()
        .map(|p| {
            let e1 = map.base_effect(&p.d1.sites)?;
            let e2 = map.base_effect(&p.d2.sites)?;
            let strict = linalg::op_norm(&(e1.matrix() * e2.matrix()));
            let weak = crate::effects::weak_exclusion_residual(&e1, &e2, ENDPOINT)?;
            Ok((strict, weak))
        })
        .collect::<Result<_>>()?;
    for (p, &(strict, _)) in equal_time.iter().zip(&localizability) {
        cells.push(pair_cell(Condition::StrictLocalizability, p, strict, tol));
    }
    for (p, &(_, weak)) in equal_time.iter().zip(&localizability) {
        cells.push(pair_cell(Condition::WeakLocalizability, p, weak, tol));
    }

    let mut spacelike = Vec::new();
    for t in 0..=options.max_t {
        for d1 in &anchors {
            for l2 in lens.clone() {
                for s in 0..n {
                    let d2 = SpatialSet::interval(s, l2, n, t);
                    if spacelike_separated(d1, &d2, model) {
                        spacelike.push(PairSpec { d1: d1.clone(), d2 });
                    }
                }
            }
        }
    }
    let propagators: Vec<Matrix> = (0..=options.max_t)
        .map(|t| model.propagator(model.slice_time(t)))
        .collect();
    let commutators: Vec<f64> = spacelike
        .par_iter()
        .map(|p| {
            let e1 = &base_effects[p.d1.sites.len() - 1];
            let u = &propagators[p.d2.time_slice as usize];
            let e2 = map
                .base_effect(&p.d2.sites)?
                .matrix()
                .conjugate_by(&u.adjoint())
                .hermitian_part();
            linalg::commutator_norm(e1.matrix(), &e2)
        })
        .collect::<Result<_>>()?;
    for (p, &c) in spacelike.iter().zip(&commutators) {
        cells.push(pair_cell(Condition::LocalCommutativity, p, c, tol));
    }

    let rows: Vec<ConditionRow> = Condition::ALL
        .iter()
        .map(|&condition| {
            let mut row = ConditionRow {
                condition,
                holds: true,
                cells: 0,
                worst_residual: 0.0,
                worst_cell: None,
            };
            for (k, c) in cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.condition == condition)
            {
                row.cells += 1;
                row.holds &= c.holds;
                if row.worst_cell.is_none() || c.residual > row.worst_residual {
                    row.worst_residual = c.residual;
                    row.worst_cell = Some(k);
                }
            }
            row
        })
        .collect();

    let max_singleton_eigenvalue = (0..n)
        .map(|x| map.singleton(x).max_eigenvalue())
        .fold(f64::MIN, f64::max);
    let max_interval_eigenvalue = (1..=options.max_len)
        .flat_map(|l| (0..n).map(move |s| (s, l)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(s, l)| {
            let d = SpatialSet::interval(s, l, n, 0);
            map.base_effect(&d.sites).map(|e| e.max_eigenvalue())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::MIN, f64::max);
    let has_unit_eigenvalue = max_interval_eigenvalue > 1.0 - tol;
    let dynamics_nontrivial = model.hamiltonian().max_abs() > tol;

    let holds = |c: Condition| {
        rows.iter()
            .find(|r| r.condition == c)
            .is_some_and(|r| r.holds)
    };
    let sharp = (0..n).all(|x| map.singleton(x).is_sharp(tol));
    let verdict = if max_singleton_eigenvalue < 1.0 - tol {
        Verdict::StronglyUnsharp
    } else if !holds(Condition::LocalCommutativity) {
        Verdict::CommutativityViolated
    } else if sharp && Condition::ALL.iter().all(|&c| holds(c)) {
        Verdict::SharpAndLocalizable
    } else {
        Verdict::Mixed
    };
    let consistency_violation = dynamics_nontrivial
        && has_unit_eigenvalue
        && holds(Condition::Covariance)
        && holds(Condition::WeakLocalizability)
        && holds(Condition::LocalCommutativity);

    Ok(SchliederReport {
        construction: map.construction().as_str().to_string(),
        n_sites: n,
        options,
        rows,
        cells,
        max_singleton_eigenvalue,
        max_interval_eigenvalue,
        has_unit_eigenvalue,
        dynamics_nontrivial,
        verdict,
        consistency_violation,
    })
}

fn pair_cell(condition: Condition, p: &PairSpec, residual: f64, tol: f64) -> ScanCell {
    ScanCell {
        condition,
        shift: None,
        set1: Some(p.d1.clone()),
        set2: Some(p.d2.clone()),
        residual,
        holds: residual <= tol,
    }
}
