//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use unsharp_core::effects::annihilation_equivalence;
use unsharp_core::ensemble::{self, EnsembleConfig, TrialRecord};
use unsharp_core::localization::{
    check_local_commutativity, coherent_state_povm, default_fiducial, position_marginal,
    sharp_position_map, smeared_position_map, spacelike_separated, three_point_kernel,
    LatticeModel, SpatialSet,
};
use unsharp_core::matrix::basis_vector;
use unsharp_core::{eig_hermitian, leakage_scan, op_norm, Pom};

const TOL: f64 = 1e-8;
const BIN: &str = env!("CARGO_BIN_EXE_unsharp");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ensemble(outcomes: std::ops::RangeInclusive<usize>) -> Vec<TrialRecord> {
    let cfg = EnsembleConfig {
        seed: 0,
        trials: 200,
        dims: 2..=6,
        outcomes,
        tol: TOL,
    };
    ensemble::run_ensemble(&cfg).expect("ensemble inputs are valid")
}

fn equivalence(records: &[TrialRecord]) -> Outcome {
    let bad = records.iter().filter(|r| !r.equivalent).count();
    let commuting = records.iter().filter(|r| r.commute).count();
    let nondisturbing = records.iter().filter(|r| r.nondisturb).count();
    outcome(
        bad == 0 && records.len() == 200,
        format!(
            "{} trials, {commuting} commuting, {nondisturbing} nondisturbing, {bad} counterexamples",
            records.len()
        ),
    )
}

fn criterion_1() -> Outcome {
    let records = ensemble(2..=2);
    let mut o = equivalence(&records);
    let binary = records.iter().all(|r| r.outcomes_a == 2);
    o.pass &= binary;
    o
}

fn criterion_2() -> Outcome {
    let records = ensemble(2..=5);
    let mut o = equivalence(&records);
    let multi = records.iter().filter(|r| r.outcomes_a > 2).count();
    o.detail
        .push_str(&format!(", {multi} with more than two outcomes"));
    o.pass &= multi > 0;
    o
}

fn criterion_3() -> Outcome {
    let mut records = ensemble(2..=2);
    records.extend(ensemble(2..=5));
    let disagree = records
        .iter()
        .filter(|r| r.ops_commute != r.effects_commute)
        .count();
    let ops = records.iter().filter(|r| r.ops_commute).count();
    let link = records
        .iter()
        .filter(|r| r.ops_commute && (r.a_disturbs_b || r.b_disturbs_a))
        .count();
    outcome(
        disagree == 0 && link == 0 && ops > 0 && ops < records.len(),
        format!(
            "{} trials, {ops} with commuting operations, {disagree} disagreements, {link} disturbing despite commuting operations",
            records.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut disagree = 0;
    let mut orthogonal = 0;
    let mut annihilating = 0;
    for trial in 0..200 {
        let pair = ensemble::draw_support_pair(0, trial, &(2..=6));
        let r = annihilation_equivalence(&pair.e1, &pair.e2, TOL).expect("valid effects");
        disagree += usize::from(!r.agree());
        orthogonal += usize::from(pair.orthogonal_by_construction);
        annihilating += usize::from(r.prod_zero);
    }
    outcome(
        disagree == 0 && annihilating > 0 && annihilating < 200,
        format!("200 pairs, {orthogonal} orthogonal by construction, {annihilating} annihilating, {disagree} disagreements"),
    )
}

/// `max_λ |λ − λ²|` from the spectrum.
fn spectral_defect(m: &unsharp_core::Matrix) -> f64 {
    eig_hermitian(m)
        .expect("Hermitian")
        .eigenvalues
        .iter()
        .map(|l| (l - l * l).abs())
        .fold(0.0, f64::max)
}

/// `max ‖E(X)E(Y)‖` over disjoint nonempty outcome sets.
fn disjoint_products(p: &Pom) -> f64 {
    let k = p.len();
    let mut worst = 0.0f64;
    for mask_x in 1u32..(1 << k) {
        for mask_y in 1u32..(1 << k) {
            if mask_x & mask_y != 0 {
                continue;
            }
            let set = |m: u32| -> BTreeSet<usize> { (0..k).filter(|i| m >> i & 1 == 1).collect() };
            let ex = p.effect_of_indices(&set(mask_x));
            let ey = p.effect_of_indices(&set(mask_y));
            worst = worst.max(op_norm(&(ex.matrix() * ey.matrix())));
        }
    }
    worst
}

fn criterion_5() -> Outcome {
    let mut effect_mismatch = 0;
    let mut sharp = 0;
    for trial in 0..200 {
        let e = ensemble::draw_sharpness_effect(0, trial, &(1..=6));
        let defect = spectral_defect(e.matrix());
        let direct = op_norm(&(&(e.matrix() * e.matrix()) - e.matrix()));
        effect_mismatch += usize::from(e.is_sharp(TOL) != (defect <= TOL));
        effect_mismatch += usize::from(e.is_sharp(TOL) != (direct <= TOL));
        sharp += usize::from(e.is_sharp(TOL));
    }
    let mut pom_mismatch = 0;
    let mut sharp_poms = 0;
    for trial in 0..200 {
        let p = ensemble::draw_sharpness_pom(0, trial, &(1..=5), &(2..=4));
        let localizable = disjoint_products(&p) <= TOL;
        pom_mismatch += usize::from(localizable != p.is_sharp_pom(TOL));
        sharp_poms += usize::from(p.is_sharp_pom(TOL));
    }
    outcome(
        effect_mismatch == 0 && pom_mismatch == 0 && sharp > 0 && sharp < 200 && sharp_poms > 0 && sharp_poms < 200,
        format!("effects: {sharp}/200 sharp, {effect_mismatch} mismatches; POMs: {sharp_poms}/200 sharp, {pom_mismatch} mismatches"),
    )
}

fn criterion_6() -> Outcome {
    let n = 32;
    let model = LatticeModel::hopping(n);
    let sharp = sharp_position_map(&model);
    let mut best = (0.0f64, String::new());
    for t in 1..=4i64 {
        for y in 0..n {
            let d1 = SpatialSet::new([0], 0);
            let d2 = SpatialSet::new([y], t);
            if !spacelike_separated(&d1, &d2, &model) {
                continue;
            }
            let r = check_local_commutativity(&sharp, &d1, &d2, 1e-3).expect("valid sets");
            if r.commutator > best.0 {
                best = (r.commutator, format!("{d1} vs {d2}"));
            }
        }
    }
    let smeared = smeared_position_map(&model, &three_point_kernel(n)).expect("valid kernel");
    let max_eig = (0..n)
        .map(|x| {
            eig_hermitian(smeared.singleton(x).matrix())
                .expect("Hermitian")
                .max()
        })
        .fold(f64::MIN, f64::max);
    outcome(
        best.0 > 1e-3 && max_eig <= 0.5 + 1e-10,
        format!(
            "sharp: max spacelike commutator {:.4e} at {}; smeared: max singleton eigenvalue {max_eig:.12}",
            best.0, best.1
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut worst_povm = f64::INFINITY;
    let mut worst_marginal = 0.0f64;
    for n in 4..=16 {
        let povm = coherent_state_povm(n, &default_fiducial(n)).expect("unit fiducial");
        let g = povm.is_commutative(1e-6);
        let marginal = position_marginal(&povm, &LatticeModel::hopping(n)).expect("full grid");
        let m = marginal.base().is_commutative(1e-10);
        pass &= g.max_commutator > 1e-6 && m.max_commutator <= 1e-10;
        worst_povm = worst_povm.min(g.max_commutator);
        worst_marginal = worst_marginal.max(m.max_commutator);
    }
    outcome(
        pass,
        format!("N=4..16: smallest POVM max commutator {worst_povm:.4e}, largest marginal max commutator {worst_marginal:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let n = 32;
    let times = [0.0, 0.5, 1.0, 2.0, 4.0];
    let phi = basis_vector(n, 0);
    let d = SpatialSet::new([0], 0);
    let moving = leakage_scan(
        &sharp_position_map(&LatticeModel::hopping(n)),
        &phi,
        &d,
        &times,
    )
    .expect("valid scan");
    let frozen = leakage_scan(
        &sharp_position_map(&LatticeModel::static_model(n)),
        &phi,
        &d,
        &times,
    )
    .expect("valid scan");
    let positive = moving.leakage[1..].iter().all(|&l| l > 0.0);
    let start = moving.leakage[0].abs() <= 1e-10;
    let flat = frozen.leakage.iter().all(|l| l.abs() <= 1e-10);
    let curve: Vec<String> = times
        .iter()
        .zip(&moving.leakage)
        .map(|(t, l)| format!("{t}:{l:.3e}"))
        .collect();
    outcome(
        positive && start && flat,
        format!(
            "hopping [{}]; static max {:.1e}",
            curve.join(" "),
            frozen.leakage.iter().fold(0.0f64, |a, b| a.max(b.abs()))
        ),
    )
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout, out.stderr)
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let effect = dir.path().join("effect.json");
    std::fs::write(
        &effect,
        r#"{"dim":2,"entries":[[[0.75,0],[0.25,0.1]],[[0.25,-0.1],[0.5,0]]]}"#,
    )
    .expect("write");
    let effect = effect.to_str().expect("utf-8 path").to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "luders-verify",
            "--seed",
            "7",
            "--trials",
            "50",
            "--dims",
            "2..6",
            "--format",
            "csv",
        ],
        vec!["effect-check", "--input", &effect, "--format", "csv"],
        vec![
            "localization-demo",
            "--construction",
            "coherent",
            "--n-sites",
            "8",
            "--format",
            "csv",
        ],
        vec![
            "causality-scan",
            "--construction",
            "sharp",
            "--n-sites",
            "16",
            "--format",
            "csv",
        ],
    ];
    let mut identical = 0;
    for args in &commands {
        let (c1, a, _) = run_cli(args);
        let (c2, b, _) = run_cli(args);
        identical += usize::from(c1 == 0 && c2 == 0 && a == b && !a.is_empty());
    }
    outcome(
        identical == commands.len(),
        format!(
            "{identical}/{} commands byte-identical across two runs",
            commands.len()
        ),
    )
}

fn criterion_10() -> Outcome {
    let (code, stdout, stderr) =
        run_cli(&["causality-scan", "--builtin-family", "--format", "csv"]);
    let text = String::from_utf8_lossy(&stdout);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let violations = rows.iter().filter(|r| r.ends_with(",true")).count();

    // A diagonal Hamiltonian freezes sharp position effects: the assertion
    // must fire and exit 2 with a dump.
    let dir = tempfile::tempdir().expect("temp dir");
    let model = dir.path().join("diag.json");
    let n = 8;
    let entries: Vec<String> = (0..n)
        .map(|i| {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    if i == j {
                        format!("[{i},0]")
                    } else {
                        "[0,0]".into()
                    }
                })
                .collect();
            format!("[{}]", row.join(","))
        })
        .collect();
    let cfg = format!(
        r#"{{"n_sites":{n},"hamiltonian":{{"dim":{n},"entries":[{}]}},"construction":"sharp"}}"#,
        entries.join(",")
    );
    std::fs::write(&model, cfg).expect("write");
    let (synthetic_code, _, synthetic_err) = run_cli(&[
        "causality-scan",
        "--model",
        model.to_str().expect("utf-8"),
        "--format",
        "csv",
    ]);
    let dumped =
        String::from_utf8_lossy(&synthetic_err).contains("\"consistency_violation\": true");
    outcome(
        code == 0 && rows.len() == 18 && violations == 0 && stderr.is_empty() && synthetic_code == 2 && dumped,
        format!(
            "{} configurations, {violations} violations, exit {code}; diagonal-H probe exit {synthetic_code}, dump {}",
            rows.len(),
            if dumped { "present" } else { "missing" }
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 10] = [
        (
            1,
            "binary A: commutativity ⟺ nondisturbance",
            criterion_1,
            Some(Duration::from_secs(10)),
        ),
        (
            2,
            "2–5 outcomes: commutativity ⟺ nondisturbance",
            criterion_2,
            Some(Duration::from_secs(30)),
        ),
        (
            3,
            "operation order independence ⟺ effect commutativity, and it implies nondisturbance",
            criterion_3,
            None,
        ),
        (4, "E₁E₂ = 0 ⟺ orthogonal ranges", criterion_4, None),
        (
            5,
            "sharpness dichotomy for effects and POMs",
            criterion_5,
            None,
        ),
        (
            6,
            "sharp map noncommuting, smeared map strongly unsharp (N=32)",
            criterion_6,
            Some(Duration::from_secs(60)),
        ),
        (
            7,
            "coherent POVM noncommutative, position marginal commutative",
            criterion_7,
            None,
        ),
        (
            8,
            "leakage positive under hopping, zero when static",
            criterion_8,
            Some(Duration::from_secs(10)),
        ),
        (
            9,
            "identical flags give byte-identical CSV",
            criterion_9,
            None,
        ),
        (
            10,
            "no built-in model violates the consistency assertion",
            criterion_10,
            None,
        ),
    ];
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let mut o = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                o.pass = false;
                o.detail
                    .push_str(&format!("; over the {}s limit", limit.as_secs()));
            }
        }
        failed += usize::from(!o.pass);
        println!(
            "criterion {id:>2} {}  {name}: {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
