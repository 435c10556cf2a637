//! Command parameters: flag structs (every field optional), their resolved
//! counterparts recorded in manifests, and config-file loading.
//!
//! Precedence is flag, then config file, then built-in default. A config file
//! is a TOML table of parameters, either at top level or under a table named
//! after the command. A run manifest is also accepted; its `params` table is
//! used.

use std::path::Path;

use clap::{Args, ValueEnum};
use gardner_core::montecarlo::EnsembleKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

macro_rules! overlay {
    ($flags:expr, $file:expr; $($field:ident),+ $(,)?) => {{
        let mut merged = $file;
        $(
            if $flags.$field.is_some() {
                merged.$field = $flags.$field.clone();
            }
        )+
        merged
    }};
}

// TOML integers are signed 64-bit, so seeds stop at i64::MAX to stay
// representable in manifests.
fn seed_parser() -> clap::builder::RangedU64ValueParser<u64> {
    clap::value_parser!(u64).range(0..=i64::MAX as u64)
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

pub fn load_config(path: &Path, command: &str) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let (Some(toml::Value::String(cmd)), Some(_)) = (table.get("command"), table.get("params")) {
        if cmd != command {
            return Err(CliError::Usage(format!(
                "{} is a manifest for `{cmd}`, not `{command}`",
                path.display()
            )));
        }
        return match table.remove("params") {
            Some(toml::Value::Table(t)) => Ok(t),
            _ => Err(CliError::Usage(format!(
                "{}: params must be a table",
                path.display()
            ))),
        };
    }
    match table.remove(command) {
        Some(toml::Value::Table(t)) => Ok(t),
        Some(_) => Err(CliError::Usage(format!(
            "{}: `{command}` must be a table",
            path.display()
        ))),
        None => Ok(table),
    }
}

pub fn from_table<T: DeserializeOwned + Default>(
    table: Option<toml::Table>,
) -> Result<T, CliError> {
    match table {
        None => Ok(T::default()),
        Some(t) => t
            .try_into()
            .map_err(|e| CliError::Usage(format!("config: {e}"))),
    }
}

pub fn to_table<T: Serialize>(params: &T) -> toml::Table {
    toml::Table::try_from(params).expect("parameter structs serialize to a table")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleArg {
    Gaussian,
    Bernoulli,
    Asymmetric,
}

fn ensemble_kind(ensemble: EnsembleArg, ma: Option<f64>) -> Result<EnsembleKind, CliError> {
    let kind = match (ensemble, ma) {
        (EnsembleArg::Asymmetric, Some(m_a)) => EnsembleKind::BernoulliAsymmetric { m_a },
        (EnsembleArg::Asymmetric, None) => {
            return Err(CliError::Usage("the asymmetric ensemble needs --ma".into()))
        }
        (_, Some(_)) => {
            return Err(CliError::Usage(
                "--ma only applies to the asymmetric ensemble".into(),
            ))
        }
        (EnsembleArg::Gaussian, None) => EnsembleKind::Gaussian,
        (EnsembleArg::Bernoulli, None) => EnsembleKind::BernoulliSymmetric,
    };
    kind.validate()?;
    Ok(kind)
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityArgs {
    /// Margin κ.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Pattern bias m_a in [0, 1); omit for the uncorrelated formula.
    #[arg(long)]
    pub ma: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityParams {
    pub kappa: f64,
    pub ma: Option<f64>,
}

impl CapacityArgs {
    pub fn resolve(&self, file: CapacityArgs) -> Result<CapacityParams, CliError> {
        let a = overlay!(self, file; kappa, ma);
        let kappa = required(a.kappa, "kappa")?;
        if !kappa.is_finite() {
            return Err(CliError::Usage("--kappa must be finite".into()));
        }
        Ok(CapacityParams { kappa, ma: a.ma })
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureArgs {
    /// First κ of the grid [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_lo: Option<f64>,
    /// Last κ of the grid [default: 2].
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_hi: Option<f64>,
    /// Grid spacing [default: 0.01].
    #[arg(long)]
    pub step: Option<f64>,
    /// Comma-separated m_a values [default: 0,0.5,0.8].
    #[arg(long, value_delimiter = ',')]
    pub ma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FigureParams {
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub step: f64,
    pub ma: Vec<f64>,
}

impl FigureParams {
    /// `kappa_lo + i·step` up to `kappa_hi`, end included when it lands on the grid.
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.kappa_hi - self.kappa_lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.kappa_lo + i as f64 * self.step)
            .collect()
    }
}

impl FigureArgs {
    pub fn resolve(&self, file: FigureArgs) -> Result<FigureParams, CliError> {
        let a = overlay!(self, file; kappa_lo, kappa_hi, step, ma);
        let p = FigureParams {
            kappa_lo: a.kappa_lo.unwrap_or(0.0),
            kappa_hi: a.kappa_hi.unwrap_or(2.0),
            step: a.step.unwrap_or(0.01),
            ma: a.ma.unwrap_or_else(|| vec![0.0, 0.5, 0.8]),
        };
        if !(p.kappa_lo.is_finite() && p.kappa_hi.is_finite() && p.kappa_lo < p.kappa_hi) {
            return Err(CliError::Usage(
                "need finite --kappa-lo < --kappa-hi".into(),
            ));
        }
        if !(p.step > 0.0) {
            return Err(CliError::Usage("--step must be > 0".into()));
        }
        if (p.kappa_hi - p.kappa_lo) / p.step > 1e6 {
            return Err(CliError::Usage(
                "grid has more than a million points".into(),
            ));
        }
        if p.ma.is_empty() {
            return Err(CliError::Usage("--ma needs at least one value".into()));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    /// Dimension n [default: 200].
    #[arg(long)]
    pub n: Option<usize>,
    /// Margin κ [default: 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Pattern ensemble [default: gaussian].
    #[arg(long, value_enum)]
    pub ensemble: Option<EnsembleArg>,
    /// Bias m_a of the asymmetric ensemble.
    #[arg(long)]
    pub ma: Option<f64>,
    /// Smallest α [default: 0.5].
    #[arg(long)]
    pub alpha_lo: Option<f64>,
    /// Largest α [default: 1.5].
    #[arg(long)]
    pub alpha_hi: Option<f64>,
    /// Number of evenly spaced α values [default: 21].
    #[arg(long)]
    pub alpha_points: Option<usize>,
    /// Trials per grid point [default: 200].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed (required).
    #[arg(long, value_parser = seed_parser())]
    pub seed: Option<u64>,
    /// Solver gap tolerance [default: 1e-6].
    #[arg(long)]
    pub solver_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepParams {
    pub n: usize,
    pub kappa: f64,
    pub ensemble: EnsembleArg,
    pub ma: Option<f64>,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub alpha_points: usize,
    pub trials: usize,
    pub seed: u64,
    pub solver_tol: f64,
}

impl SweepParams {
    pub fn grid(&self) -> Vec<f64> {
        if self.alpha_points == 1 {
            return vec![self.alpha_lo];
        }
        let last = (self.alpha_points - 1) as f64;
        (0..self.alpha_points)
            .map(|i| self.alpha_lo + (self.alpha_hi - self.alpha_lo) * i as f64 / last)
            .collect()
    }

    pub fn ensemble_kind(&self) -> Result<EnsembleKind, CliError> {
        ensemble_kind(self.ensemble, self.ma)
    }
}

impl SweepArgs {
    pub fn resolve(&self, file: SweepArgs) -> Result<SweepParams, CliError> {
        let a = overlay!(self, file; n, kappa, ensemble, ma, alpha_lo, alpha_hi, alpha_points, trials, seed, solver_tol);
        let p = SweepParams {
            n: a.n.unwrap_or(200),
            kappa: a.kappa.unwrap_or(0.5),
            ensemble: a.ensemble.unwrap_or(EnsembleArg::Gaussian),
            ma: a.ma,
            alpha_lo: a.alpha_lo.unwrap_or(0.5),
            alpha_hi: a.alpha_hi.unwrap_or(1.5),
            alpha_points: a.alpha_points.unwrap_or(21),
            trials: a.trials.unwrap_or(200),
            seed: required(a.seed, "seed")?,
            solver_tol: a.solver_tol.unwrap_or(1e-6),
        };
        if p.alpha_points == 0 {
            return Err(CliError::Usage("--alpha-points must be >= 1".into()));
        }
        if !(p.alpha_lo > 0.0 && p.alpha_lo.is_finite() && p.alpha_hi.is_finite()) {
            return Err(CliError::Usage(
                "need finite alpha values with --alpha-lo > 0".into(),
            ));
        }
        if p.alpha_points > 1 && !(p.alpha_lo < p.alpha_hi) {
            return Err(CliError::Usage("need --alpha-lo < --alpha-hi".into()));
        }
        p.ensemble_kind()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaHatArgs {
    /// Dimension n [default: 200].
    #[arg(long)]
    pub n: Option<usize>,
    /// Margin κ [default: 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Pattern ensemble [default: gaussian].
    #[arg(long, value_enum)]
    pub ensemble: Option<EnsembleArg>,
    /// Bias m_a of the asymmetric ensemble.
    #[arg(long)]
    pub ma: Option<f64>,
    /// Independent trials [default: 100].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed (required).
    #[arg(long, value_parser = seed_parser())]
    pub seed: Option<u64>,
    /// Solver gap tolerance [default: 1e-6].
    #[arg(long)]
    pub solver_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaHatParams {
    pub n: usize,
    pub kappa: f64,
    pub ensemble: EnsembleArg,
    pub ma: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub solver_tol: f64,
}

impl AlphaHatParams {
    pub fn ensemble_kind(&self) -> Result<EnsembleKind, CliError> {
        ensemble_kind(self.ensemble, self.ma)
    }
}

impl AlphaHatArgs {
    pub fn resolve(&self, file: AlphaHatArgs) -> Result<AlphaHatParams, CliError> {
        let a = overlay!(self, file; n, kappa, ensemble, ma, trials, seed, solver_tol);
        let p = AlphaHatParams {
            n: a.n.unwrap_or(200),
            kappa: a.kappa.unwrap_or(0.5),
            ensemble: a.ensemble.unwrap_or(EnsembleArg::Gaussian),
            ma: a.ma,
            trials: a.trials.unwrap_or(100),
            seed: required(a.seed, "seed")?,
            solver_tol: a.solver_tol.unwrap_or(1e-6),
        };
        p.ensemble_kind()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsArgs {
    /// Number of spins [default: 60].
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of patterns [default: 12].
    #[arg(long)]
    pub m: Option<usize>,
    /// Required margin κ ≥ 0 [default: 0.1].
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Seed for the patterns and the flip experiment (required).
    #[arg(long, value_parser = seed_parser())]
    pub seed: Option<u64>,
    /// Solver gap tolerance [default: 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    /// One-bit-flip trials per pattern [default: 10].
    #[arg(long)]
    pub flip_trials: Option<usize>,
    /// Step limit per recovery trial [default: 10].
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub n: usize,
    pub m: usize,
    pub kappa: f64,
    pub seed: u64,
    pub tol: f64,
    pub flip_trials: usize,
    pub max_steps: usize,
}

impl DynamicsArgs {
    pub fn resolve(&self, file: DynamicsArgs) -> Result<DynamicsParams, CliError> {
        let a = overlay!(self, file; n, m, kappa, seed, tol, flip_trials, max_steps);
        Ok(DynamicsParams {
            n: a.n.unwrap_or(60),
            m: a.m.unwrap_or(12),
            kappa: a.kappa.unwrap_or(0.1),
            seed: required(a.seed, "seed")?,
            tol: a.tol.unwrap_or(1e-9),
            flip_trials: a.flip_trials.unwrap_or(10),
            max_steps: a.max_steps.unwrap_or(10),
        })
    }
}
