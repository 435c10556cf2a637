//! Command bodies. Each returns what to print and, separately, what to write
//! when `--output` is given.

use std::fmt::Write as _;
use std::sync::atomic::AtomicBool;

use gardner_core::capacity::{
    alpha_c_correlated, alpha_c_uncorrelated, default_root_tol, kappa_critical, CapacityResult,
    CorrelationParams,
};
use gardner_core::dynamics::{one_flip_recovery, store_patterns, verify_fixed_points, PatternSet};
use gardner_core::montecarlo::{self, format_float, SweepOptions, SweepResult};
use serde::Serialize;

use crate::params::{AlphaHatParams, CapacityParams, DynamicsParams, FigureParams, SweepParams};
use crate::CliError;

pub struct Emitted {
    /// Shown on stdout. When empty and no output file is given, `file` is printed instead.
    pub display: String,
    pub file: String,
    pub interrupted: bool,
}

impl Emitted {
    fn data(file: String) -> Self {
        Self {
            display: String::new(),
            file,
            interrupted: false,
        }
    }
}

fn correlation(ma: f64) -> Result<CorrelationParams, CliError> {
    CorrelationParams::new(ma).map_err(|e| CliError::Usage(e.to_string()))
}

fn opt_float(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), format_float)
}

pub fn capacity(p: &CapacityParams) -> Result<Emitted, CliError> {
    let r: CapacityResult = match p.ma {
        None => alpha_c_uncorrelated(p.kappa),
        Some(ma) => alpha_c_correlated(p.kappa, correlation(ma)?)?,
    };
    let mut display = String::new();
    let _ = writeln!(display, "kappa      {}", r.kappa);
    if let Some(ma) = p.ma {
        let _ = writeln!(display, "m_a        {ma}");
    }
    let _ = writeln!(display, "f_value    {}", r.f_value);
    let _ = writeln!(display, "alpha_c    {}", r.alpha_c);
    let _ = writeln!(display, "exactness  {}", r.exactness);
    if let (Some(v), Some(k)) = (r.v_opt, r.kappa_adj) {
        let _ = writeln!(display, "v_opt      {v}");
        let _ = writeln!(display, "kappa_adj  {k}");
    }
    Ok(Emitted {
        display,
        file: toml::to_string(&r).expect("capacity result serializes"),
        interrupted: false,
    })
}

struct SeriesRow {
    kappa: f64,
    result: CapacityResult,
    critical: bool,
}

/// Rows for one `m_a`, in increasing `κ`, with the critical margin inserted
/// when it falls inside the grid range.
fn series(p: &FigureParams, ma: f64) -> Result<Vec<SeriesRow>, CliError> {
    let params = correlation(ma)?;
    let mut kappas: Vec<(f64, bool)> = p.grid().into_iter().map(|k| (k, false)).collect();
    if ma > 0.0 {
        let kc = kappa_critical(params, default_root_tol())?;
        if kc >= p.kappa_lo && kc <= p.kappa_hi {
            let at = kappas.partition_point(|&(k, _)| k < kc);
            kappas.insert(at, (kc, true));
        }
    }
    kappas
        .into_iter()
        .map(|(kappa, critical)| {
            Ok(SeriesRow {
                kappa,
                result: alpha_c_correlated(kappa, params)?,
                critical,
            })
        })
        .collect()
}

pub fn figure_alpha(p: &FigureParams) -> Result<Emitted, CliError> {
    let mut csv = String::from("kappa,ma,alpha_c,exactness,kappa_adj,critical\n");
    for &ma in &p.ma {
        for row in series(p, ma)? {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                format_float(row.kappa),
                format_float(ma),
                format_float(row.result.alpha_c),
                row.result.exactness,
                opt_float(row.result.kappa_adj),
                u8::from(row.critical)
            );
        }
    }
    Ok(Emitted::data(csv))
}

pub fn figure_kadj(p: &FigureParams) -> Result<Emitted, CliError> {
    let mut csv = String::from("kappa,ma,kappa_adj,critical\n");
    for &ma in &p.ma {
        for row in series(p, ma)? {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                format_float(row.kappa),
                format_float(ma),
                opt_float(row.result.kappa_adj),
                u8::from(row.critical)
            );
        }
    }
    Ok(Emitted::data(csv))
}

pub fn sweep(p: &SweepParams, stop: &AtomicBool) -> Result<(Emitted, SweepResult), CliError> {
    let grid = p.grid();
    let options = SweepOptions {
        solver_tol: p.solver_tol,
    };
    let r = montecarlo::sweep_alpha_until(
        p.n,
        p.kappa,
        p.ensemble_kind()?,
        &grid,
        p.trials,
        p.seed,
        &options,
        stop,
    )?;
    let interrupted =
        r.n_trials.first().is_some_and(|&t| t < p.trials) || (r.is_empty() && p.trials > 0);
    Ok((
        Emitted {
            display: String::new(),
            file: r.to_csv(),
            interrupted,
        },
        r,
    ))
}

#[derive(Serialize)]
struct AlphaHatRecord {
    alpha_hat: f64,
    ci: f64,
    std_error: f64,
    n_undecided: usize,
    per_trial: Vec<f64>,
}

pub fn alpha_hat(p: &AlphaHatParams) -> Result<Emitted, CliError> {
    let options = SweepOptions {
        solver_tol: p.solver_tol,
    };
    let a = montecarlo::estimate_alpha_hat_with(
        p.n,
        p.kappa,
        p.ensemble_kind()?,
        p.trials,
        p.seed,
        &options,
    )?;
    let mut display = String::new();
    let _ = writeln!(display, "alpha_hat  {}", a.alpha_hat);
    let _ = writeln!(display, "ci95       {}", a.ci);
    let _ = writeln!(display, "std_error  {}", a.std_error);
    let _ = writeln!(display, "undecided  {}", a.n_undecided);
    let record = AlphaHatRecord {
        alpha_hat: a.alpha_hat,
        ci: a.ci,
        std_error: a.std_error,
        n_undecided: a.n_undecided,
        per_trial: a.per_trial,
    };
    Ok(Emitted {
        display,
        file: toml::to_string(&record).expect("record serializes"),
        interrupted: false,
    })
}

pub fn dynamics_demo(p: &DynamicsParams) -> Result<Emitted, CliError> {
    let patterns = PatternSet::random(p.m, p.n, p.seed)?;
    let storage = store_patterns(&patterns, p.kappa, p.tol)?;
    let report = verify_fixed_points(&patterns, &storage.interactions, p.kappa)?;
    let recovery = one_flip_recovery(
        &patterns,
        &storage.interactions,
        p.flip_trials,
        p.max_steps,
        p.seed,
    )?;

    let margins = &storage.per_site_margin;
    let mean = margins.iter().sum::<f64>() / margins.len() as f64;
    let max = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "stored {} patterns on {} spins at kappa {}",
        p.m, p.n, p.kappa
    );
    let _ = writeln!(
        out,
        "per-site margin  min {:.6}  mean {:.6}  max {:.6}",
        storage.min_margin(),
        mean,
        max
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "pattern  violated_sites  fixed_point");
    for i in 0..p.m {
        let violated = (0..p.n).filter(|&k| !report.is_satisfied(i, k)).count();
        let _ = writeln!(
            out,
            "{i:>7}  {violated:>14}  {}",
            if violated == 0 { "yes" } else { "no" }
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "fixed points: {}/{} patterns, {} violated conditions",
        report.fixed_patterns(),
        p.m,
        report.violations
    );
    let _ = writeln!(
        out,
        "one-bit-flip recovery: {}/{} ({:.3}), mean steps {:.2}",
        recovery.recovered,
        recovery.trials,
        recovery.fraction(),
        recovery.mean_steps
    );
    Ok(Emitted::data(out))
}
