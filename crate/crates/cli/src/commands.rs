use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::json;
use unsharp_core::causality::{Condition, SchliederReport};
use unsharp_core::ensemble::{self, EnsembleConfig, TrialRecord};
use unsharp_core::localization::{BuiltModel, HamiltonianSpec, LocalizationMap};
use unsharp_core::matrix::basis_vector;
use unsharp_core::tolerance::ENDPOINT;
use unsharp_core::{
    leakage_scan, linalg, schlieder_scan, Construction, Effect, Endpoint, Error, LeakageSeries,
    Matrix, ModelConfig, Pom, ScanOptions, SpatialSet,
};

use crate::args::{Cli, Command, Common, Format, LudersArgs, ModelArgs};
use crate::{EXIT_FINDING, EXIT_OK};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{}: {e}", e.kind()),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// A finished command: exit code, report body, and diagnostics for stderr.
#[derive(Debug, Clone)]
pub struct Report {
    pub code: u8,
    pub body: String,
    pub dump: Option<String>,
}

impl Report {
    fn ok(body: String) -> Self {
        Self {
            code: EXIT_OK,
            body,
            dump: None,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::EffectCheck { input } => effect_check(input, c),
        Command::LudersVerify(args) => luders_verify(args, c),
        Command::LocalizationDemo(args) => localization_demo(args, c),
        Command::CausalityScan {
            model,
            t_max,
            max_len,
            builtin_family,
        } => {
            if *builtin_family {
                causality_family(*t_max, *max_len, c)
            } else {
                causality_scan(model, *t_max, *max_len, c)
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Core(Error::from(e)))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Rounds to 12 significant decimals so exact endpoints print as `0` and `1`.
fn clean(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn effect_check(input: &Path, c: &Common) -> Result<Report, CliError> {
    let m: Matrix = parse_json(input)?;
    let e = Effect::new(m)?;
    let eig = e.eigen();
    let p1 = e.spectral_projection(Endpoint::One, ENDPOINT);
    let p0 = e.spectral_projection(Endpoint::Zero, ENDPOINT);
    let class = if e.is_sharp(c.tol) {
        "sharp"
    } else if e.is_strongly_unsharp(c.tol) {
        "strongly unsharp"
    } else {
        "unsharp"
    };
    let eigenvalues: Vec<f64> = eig.eigenvalues.iter().map(|&x| clean(x)).collect();
    let body = match c.format {
        Format::Text => {
            let list: Vec<String> = eigenvalues.iter().map(|x| x.to_string()).collect();
            format!(
                "{class}, eigenvalues [{}], rank P⁽¹⁾={}, rank P⁽⁰⁾={}, ‖E²−E‖={:e}\n",
                list.join(","),
                p1.rank(),
                p0.rank(),
                e.sharpness_defect()
            )
        }
        Format::Json => pretty(&json!({
            "classification": class,
            "dim": e.dim(),
            "eigenvalues": eigenvalues,
            "rank_p1": p1.rank(),
            "rank_p0": p0.rank(),
            "sharpness_defect": e.sharpness_defect(),
        })),
        Format::Csv => {
            let list: Vec<String> = eigenvalues.iter().map(|x| x.to_string()).collect();
            format!(
                "classification,eigenvalues,rank_p1,rank_p0,sharpness_defect\n{class},{},{},{},{:e}\n",
                list.join(" "),
                p1.rank(),
                p0.rank(),
                e.sharpness_defect()
            )
        }
    };
    Ok(Report::ok(body))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixedPair {
    a: Pom,
    b: Matrix,
}

fn luders_verify(args: &LudersArgs, c: &Common) -> Result<Report, CliError> {
    let (records, config) = match &args.input {
        Some(path) => {
            let pair: FixedPair = parse_json(path)?;
            let b = Effect::new(pair.b)?;
            if b.dim() != pair.a.dim() {
                return Err(Error::DimensionMismatch {
                    expected: pair.a.dim(),
                    found: b.dim(),
                }
                .into());
            }
            (vec![ensemble::run_fixed(&pair.a, &b, c.tol)?], None)
        }
        None => {
            let config = EnsembleConfig {
                seed: args.seed,
                trials: args.trials as usize,
                dims: args.dims.clone(),
                outcomes: args.outcomes.clone(),
                tol: c.tol,
            };
            (ensemble::run_ensemble(&config)?, Some(config))
        }
    };
    let bad: Vec<&TrialRecord> = records.iter().filter(|r| r.is_counterexample()).collect();
    let summary = luders_summary(&records);
    let body = match c.format {
        Format::Csv => ensemble::records_to_csv(&records),
        Format::Json => pretty(&json!({ "summary": summary, "records": records })),
        Format::Text => luders_text(&records, &summary),
    };
    let dump = (!bad.is_empty()).then(|| {
        let items: Vec<serde_json::Value> = bad
            .iter()
            .map(|r| match &config {
                Some(cfg) => {
                    let inputs = ensemble::draw_trial(cfg.seed, r.trial, &cfg.dims, &cfg.outcomes);
                    json!({"seed": cfg.seed, "trial": r.trial, "record": r, "a": inputs.a, "b": inputs.b})
                }
                None => json!({"record": r, "input": args.input}),
            })
            .collect();
        pretty(&json!({ "counterexamples": items }))
    });
    Ok(Report {
        code: if bad.is_empty() {
            EXIT_OK
        } else {
            EXIT_FINDING
        },
        body,
        dump,
    })
}

fn luders_summary(records: &[TrialRecord]) -> serde_json::Value {
    let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count();
    let max = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
    json!({
        "trials": records.len(),
        "equivalent": count(&|r| r.equivalent),
        "commute": count(&|r| r.commute),
        "nondisturb": count(&|r| r.nondisturb),
        "objectivity_agree": count(&|r| r.agree),
        "ops_commute": count(&|r| r.ops_commute),
        "ops_commute_implies_nondisturbance": count(&|r| r.objectivity_implies_causality()),
        "counterexamples": count(&|r| r.is_counterexample()),
        "max_order_gap": max(&|r| r.max_order_gap),
    })
}

fn luders_text(records: &[TrialRecord], summary: &serde_json::Value) -> String {
    let mut out = String::new();
    if let [r] = records {
        let _ = writeln!(
            out,
            "dim={} case={} commute={} nondisturb={} equivalent={} max_commutator={:e} deviation={:e}",
            r.dim,
            r.case.as_str(),
            r.commute,
            r.nondisturb,
            r.equivalent,
            r.max_commutator,
            r.deviation
        );
        let _ = writeln!(
            out,
            "ops_commute={} effects_commute={} agree={} a_disturbs_b={} b_disturbs_a={}",
            r.ops_commute, r.effects_commute, r.agree, r.a_disturbs_b, r.b_disturbs_a
        );
    }
    let n = records.len();
    let s = |k: &str| summary[k].as_u64().unwrap_or(0);
    let _ = writeln!(out, "trials                {n}");
    let _ = writeln!(
        out,
        "commute ⟺ nondisturb  {}/{n} equivalent ({} commuting)",
        s("equivalent"),
        s("commute")
    );
    let _ = writeln!(
        out,
        "objectivity           {}/{n} agree ({} with commuting operations)",
        s("objectivity_agree"),
        s("ops_commute")
    );
    let _ = writeln!(
        out,
        "ops ⟹ nondisturbance  {}/{n}",
        s("ops_commute_implies_nondisturbance")
    );
    let _ = writeln!(out, "counterexamples       {}", s("counterexamples"));
    out
}

fn model_config(args: &ModelArgs) -> Result<ModelConfig, CliError> {
    match (&args.model, args.construction) {
        (Some(path), _) => Ok(ModelConfig::from_json(&read(path)?)?),
        (None, Some(c)) => {
            let mut cfg = ModelConfig::new(args.n_sites, c.into());
            cfg.hamiltonian = HamiltonianSpec::Named(args.hamiltonian.clone());
            Ok(cfg)
        }
        (None, None) => Err(CliError::Usage(
            "either --model or --construction is required".into(),
        )),
    }
}

fn scan_options(
    map: &LocalizationMap,
    t_max: Option<i64>,
    max_len: Option<usize>,
    tol: f64,
) -> ScanOptions {
    let mut opts = ScanOptions::for_map(map);
    if let Some(t) = t_max {
        opts.max_t = t;
    }
    if let Some(l) = max_len {
        opts.max_len = l;
    }
    opts.tol = tol;
    opts
}

/// Largest commutator between `G(0,0)` and every other phase-space effect;
/// Weyl covariance makes this the maximum over all pairs.
fn phase_space_commutator(povm: &Pom) -> Result<f64, CliError> {
    let g0 = povm.effect(0).matrix();
    let mut best = 0.0f64;
    for e in &povm.effects()[1..] {
        best = best.max(linalg::commutator_norm(g0, e.matrix())?);
    }
    Ok(best)
}

fn localization_demo(args: &ModelArgs, c: &Common) -> Result<Report, CliError> {
    let cfg = model_config(args)?;
    let built = cfg.build()?;
    let opts = scan_options(
        &built.map,
        Some(built.model.max_unwrapped_slices().min(1)),
        None,
        c.tol,
    );
    let scan = schlieder_scan(&built.map, opts)?;
    let marginal = built.map.base().is_commutative(c.tol);
    let povm = built
        .povm
        .as_ref()
        .map(phase_space_commutator)
        .transpose()?;
    let strongly_unsharp = scan.max_singleton_eigenvalue < 1.0 - c.tol;

    let body = match c.format {
        Format::Text => {
            let mut out = scan.to_text();
            let _ = writeln!(
                out,
                "strongly unsharp on all singletons: {strongly_unsharp}"
            );
            let _ = writeln!(
                out,
                "position effects commutative: {} (max commutator {:e})",
                marginal.commutative, marginal.max_commutator
            );
            if let Some(g) = povm {
                let _ = writeln!(
                    out,
                    "phase-space POVM commutative: {} (max commutator {g:e})",
                    g <= c.tol
                );
            }
            out
        }
        Format::Csv => scan.to_csv(),
        Format::Json => pretty(&json!({
            "scan": scan,
            "strongly_unsharp": strongly_unsharp,
            "marginal_commutative": marginal.commutative,
            "marginal_max_commutator": marginal.max_commutator,
            "povm_max_commutator": povm,
        })),
    };
    Ok(finish_scan(&scan, body))
}

fn finish_scan(scan: &SchliederReport, body: String) -> Report {
    if scan.consistency_violation {
        Report {
            code: EXIT_FINDING,
            body,
            dump: Some(pretty(&json!(scan))),
        }
    } else {
        Report::ok(body)
    }
}

/// Leakage from `|0⟩` out of `{0}` on the grid `0, ½, 1, …, t_max·τ`.
pub fn default_leakage(map: &LocalizationMap, max_t: i64) -> Result<LeakageSeries, Error> {
    let model = map.model();
    let t_end = model.slice_time(max_t);
    let steps = (2.0 * t_end).floor() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * 0.5).collect();
    let phi = basis_vector(model.n_sites(), 0);
    leakage_scan(map, &phi, &SpatialSet::new([0], 0), &times)
}

fn leakage_csv(series: &LeakageSeries, tol: f64) -> String {
    let mut out = String::new();
    for (t, l) in series.times.iter().zip(&series.leakage) {
        let _ = writeln!(out, "leakage,,0,{t},,,{l:e},{}", *l <= tol);
    }
    out
}

fn causality_scan(
    args: &ModelArgs,
    t_max: Option<i64>,
    max_len: Option<usize>,
    c: &Common,
) -> Result<Report, CliError> {
    let built = model_config(args)?.build()?;
    let opts = scan_options(&built.map, t_max, max_len, c.tol);
    let scan = schlieder_scan(&built.map, opts)?;
    let leakage = default_leakage(&built.map, opts.max_t)?;
    let body = match c.format {
        Format::Text => {
            let mut out = scan.to_text();
            let _ = writeln!(out, "leakage from |0⟩ out of the inflated {{0}}:");
            for (t, l) in leakage.times.iter().zip(&leakage.leakage) {
                let _ = writeln!(out, "  t={t:<5} {l:.6e}");
            }
            if let Some(w) = &leakage.warning {
                let _ = writeln!(out, "warning: {w}");
            }
            out
        }
        Format::Csv => scan.to_csv() + &leakage_csv(&leakage, c.tol),
        Format::Json => pretty(&json!({ "scan": scan, "leakage": leakage })),
    };
    Ok(finish_scan(&scan, body))
}

/// Sharp, smeared and coherent maps, static and hopping, on 8, 16 and 32 sites.
pub fn builtin_family() -> Vec<ModelConfig> {
    let mut out = Vec::new();
    for n in [8, 16, 32] {
        for h in ["zero", "hopping"] {
            for c in [
                Construction::Sharp,
                Construction::Smeared,
                Construction::Coherent,
            ] {
                let mut cfg = ModelConfig::new(n, c);
                cfg.hamiltonian = HamiltonianSpec::Named(h.into());
                out.push(cfg);
            }
        }
    }
    out
}

fn hamiltonian_label(cfg: &ModelConfig) -> String {
    match &cfg.hamiltonian {
        HamiltonianSpec::Named(s) => s.clone(),
        HamiltonianSpec::Matrix(_) => "matrix".into(),
    }
}

/// Scans every configuration; the exit code is 2 if any one violates the
/// consistency assertion.
pub fn scan_family(
    configs: &[ModelConfig],
    t_max: Option<i64>,
    max_len: Option<usize>,
    tol: f64,
) -> Result<Vec<(ModelConfig, SchliederReport)>, Error> {
    configs
        .iter()
        .map(|cfg| {
            let BuiltModel { map, .. } = cfg.build()?;
            let opts = scan_options(&map, t_max, max_len, tol);
            Ok((cfg.clone(), schlieder_scan(&map, opts)?))
        })
        .collect()
}

fn causality_family(
    t_max: Option<i64>,
    max_len: Option<usize>,
    c: &Common,
) -> Result<Report, CliError> {
    let results = scan_family(&builtin_family(), t_max, max_len, c.tol)?;
    let header = "construction,hamiltonian,n_sites,max_t,verdict,covariance,strict_localizability,weak_localizability,local_commutativity,max_interval_eigenvalue,unit_eigenvalue,dynamics_nontrivial,consistency_violation";
    let row = |cfg: &ModelConfig, s: &SchliederReport| {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.15},{},{},{}",
            cfg.construction.as_str(),
            hamiltonian_label(cfg),
            cfg.n_sites,
            s.options.max_t,
            s.verdict.as_str(),
            s.row(Condition::Covariance).holds,
            s.row(Condition::StrictLocalizability).holds,
            s.row(Condition::WeakLocalizability).holds,
            s.row(Condition::LocalCommutativity).holds,
            s.max_interval_eigenvalue,
            s.has_unit_eigenvalue,
            s.dynamics_nontrivial,
            s.consistency_violation
        )
    };
    let body = match c.format {
        Format::Csv | Format::Text => {
            let mut out = format!("{header}\n");
            for (cfg, s) in &results {
                let _ = writeln!(out, "{}", row(cfg, s));
            }
            out
        }
        Format::Json => pretty(&json!(results
            .iter()
            .map(|(cfg, s)| json!({"config": cfg, "scan": s}))
            .collect::<Vec<_>>())),
    };
    let violations: Vec<serde_json::Value> = results
        .iter()
        .filter(|(_, s)| s.consistency_violation)
        .map(|(cfg, s)| json!({"config": cfg, "scan": s}))
        .collect();
    Ok(Report {
        code: if violations.is_empty() {
            EXIT_OK
        } else {
            EXIT_FINDING
        },
        body,
        dump: (!violations.is_empty()).then(|| pretty(&json!(violations))),
    })
}
