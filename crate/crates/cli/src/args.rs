use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unsharp_core::Construction;

#[derive(Debug, Parser)]
#[command(
    name = "unsharp",
    version,
    about = "Checks for unsharp measurements and lattice localization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Comparison tolerance for verdicts.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive_f64)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a single effect given as a JSON matrix.
    EffectCheck {
        #[arg(long)]
        input: PathBuf,
    },
    /// Seeded ensemble for commutativity, nondisturbance and objectivity.
    LudersVerify(LudersArgs),
    /// Build a localization map and tabulate its conditions.
    LocalizationDemo(ModelArgs),
    /// Condition scan over intervals and time slices plus a leakage curve.
    CausalityScan {
        #[command(flatten)]
        model: ModelArgs,
        /// Largest time slice; defaults to min(4, largest non-wrapping slice).
        #[arg(long)]
        t_max: Option<i64>,
        /// Longest interval scanned.
        #[arg(long)]
        max_len: Option<usize>,
        /// Scan every built-in configuration instead of one model.
        #[arg(long, conflicts_with_all = ["model", "construction"])]
        builtin_family: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct LudersArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Inclusive dimension range, `A..B`.
    #[arg(long, default_value = "2..6", value_parser = parse_range)]
    pub dims: RangeInclusive<usize>,
    /// Inclusive outcome-count range, `A..B`.
    #[arg(long, default_value = "2..5", value_parser = parse_range)]
    pub outcomes: RangeInclusive<usize>,
    /// JSON `{"a": POM, "b": matrix}`; runs that one pair instead of the ensemble.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model config JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Inline model, used when `--model` is absent.
    #[arg(long, value_enum)]
    pub construction: Option<ConstructionArg>,
    #[arg(long, default_value_t = 8)]
    pub n_sites: usize,
    /// `hopping` or `zero`.
    #[arg(long, default_value = "hopping")]
    pub hamiltonian: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionArg {
    Sharp,
    Smeared,
    Coherent,
}

impl From<ConstructionArg> for Construction {
    fn from(c: ConstructionArg) -> Self {
        match c {
            ConstructionArg::Sharp => Construction::Sharp,
            ConstructionArg::Smeared => Construction::Smeared,
            ConstructionArg::Coherent => Construction::Coherent,
        }
    }
}

/// `A..B`, `A..=B` or `A`, all inclusive.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (s, s),
    };
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad range start in {s:?}"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad range end in {s:?}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("range {s:?} must satisfy 1 ≤ A ≤ B"));
    }
    Ok(lo..=hi)
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("tolerance must be positive, got {s}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..6").unwrap(), 2..=6);
        assert_eq!(parse_range("2..=6").unwrap(), 2..=6);
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert!(parse_range("6..2").is_err());
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("a..2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        assert!(Cli::try_parse_from(["unsharp", "luders-verify", "--tol", "0"]).is_err());
        assert!(Cli::try_parse_from(["unsharp", "luders-verify", "--trials", "0"]).is_err());
    }
}
