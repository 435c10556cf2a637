//! Monte Carlo feasibility experiments over random pattern ensembles.
//!
//! Every matrix is drawn row-major from a ChaCha8 stream seeded by a 64-bit
//! trial seed, so the first `m` rows of a larger draw equal an `m`-row draw.
//! Sweeps exploit this: each trial samples one matrix with the largest row
//! count on the grid and tests its prefixes, which makes each trial's
//! decisions monotone in `m`.
//!
//! Trial seeds come from [`mix_seed`]; trials are independent, run on the
//! current rayon pool and are aggregated by index, so results do not depend on
//! the worker count.

use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::margin::{
    self, decide_from_certificate, Feasibility, PatternMatrix, SphereSearch, DEFAULT_MAX_ITERS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnsembleKind {
    Gaussian,
    BernoulliSymmetric,
    /// ±1 entries with `P(+1) = (1 + m_a)/2`.
    BernoulliAsymmetric {
        m_a: f64,
    },
}

impl EnsembleKind {
    pub fn validate(&self) -> Result<()> {
        if let EnsembleKind::BernoulliAsymmetric { m_a } = *self {
            if !m_a.is_finite() || !(0.0..1.0).contains(&m_a) {
                return Err(invalid(format!(
                    "asymmetric ensemble needs 0 <= m_a < 1, got {m_a}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::BernoulliSymmetric => "bernoulli",
            EnsembleKind::BernoulliAsymmetric { .. } => "asymmetric",
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            EnsembleKind::Gaussian => rng.sample(StandardNormal),
            EnsembleKind::BernoulliSymmetric => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EnsembleKind::BernoulliAsymmetric { m_a } => {
                if rng.random::<f64>() < 0.5 * (1.0 + m_a) {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// One feasibility experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub ensemble: EnsembleKind,
    pub seed: u64,
    pub solver_tol: f64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !self.kappa.is_finite() {
            return Err(invalid("kappa must be finite"));
        }
        if !(self.solver_tol > 0.0) {
            return Err(invalid("solver_tol must be > 0"));
        }
        self.ensemble.validate()?;
        if self.rows() < 1 {
            return Err(invalid("alpha * n rounds to zero rows"));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        rows_for(self.alpha, self.n)
    }
}

/// `m = round(α·n)`, halves rounded up.
pub fn rows_for(alpha: f64, n: usize) -> usize {
    (alpha * n as f64 + 0.5).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Alpha,
    Kappa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub p_feasible: Vec<f64>,
    pub n_trials: Vec<usize>,
    pub n_undecided: Vec<usize>,
    pub wilson_halfwidth: Vec<f64>,
}

pub const CSV_HEADER: &str = "axis_value,p_feasible,n_trials,n_undecided,wilson_halfwidth";

/// 17 significant digits; `parse(format(x)) == x`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepResult {
    fn empty(axis: SweepAxis) -> Self {
        Self {
            axis,
            grid: Vec::new(),
            p_feasible: Vec::new(),
            n_trials: Vec::new(),
            n_undecided: Vec::new(),
            wilson_halfwidth: Vec::new(),
        }
    }

    fn from_counts(
        axis: SweepAxis,
        grid: &[f64],
        feasible: &[usize],
        undecided: &[usize],
        trials: usize,
    ) -> Self {
        let mut out = Self::empty(axis);
        for (i, &g) in grid.iter().enumerate() {
            let p = feasible[i] as f64 / trials as f64;
            out.grid.push(g);
            out.p_feasible.push(p);
            out.n_trials.push(trials);
            out.n_undecided.push(undecided[i]);
            out.wilson_halfwidth.push(wilson_halfwidth(p, trials));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                format_float(self.grid[i]),
                format_float(self.p_feasible[i]),
                self.n_trials[i],
                self.n_undecided[i],
                format_float(self.wilson_halfwidth[i])
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    /// Axis value where `p_feasible` first falls through `level`, by linear
    /// interpolation between neighbouring grid points.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        if self.p_feasible[0] < level {
            return Some(self.grid[0]);
        }
        for i in 1..self.len() {
            let (p0, p1) = (self.p_feasible[i - 1], self.p_feasible[i]);
            if p0 >= level && p1 < level {
                let t = (p0 - level) / (p0 - p1);
                return Some(self.grid[i - 1] + t * (self.grid[i] - self.grid[i - 1]));
            }
        }
        None
    }
}

/// Half-width of the 95% Wilson score interval.
pub fn wilson_halfwidth(p: f64, trials: usize) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit seed for `(stream, index)` under `master`:
/// `splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)`.
pub fn mix_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

// stream tags for mix_seed
const STREAM_SWEEP_ALPHA: u64 = 0x5357_4541_4c50;
const STREAM_SWEEP_KAPPA: u64 = 0x5357_4b41_5050;
const STREAM_ALPHA_HAT: u64 = 0x4148_4154;
const STREAM_LABELS: u64 = 0x4c41_4245_4c53;

fn sample_rows(ensemble: EnsembleKind, rows: usize, n: usize, seed: u64) -> Result<PatternMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * n).map(|_| ensemble.draw(&mut rng)).collect();
    PatternMatrix::new(rows, n, data)
}

/// Draws the `m × n` pattern matrix of a trial. Same seed, same bits.
pub fn sample_matrix(config: &TrialConfig) -> Result<PatternMatrix> {
    config.validate()?;
    sample_rows(config.ensemble, config.rows(), config.n, config.seed)
}

/// Constraint rows of the feasibility problem for `rows` patterns.
///
/// Symmetric ensembles use the patterns directly. For biased patterns, the
/// constraint at a site multiplies each pattern row by that pattern's own
/// (equally biased) spin at the site, `diag(q)H`; the labels `q` come from a
/// separate stream so prefixes stay consistent.
fn constraint_matrix(
    ensemble: EnsembleKind,
    rows: usize,
    n: usize,
    seed: u64,
) -> Result<PatternMatrix> {
    let h = sample_rows(ensemble, rows, n, seed)?;
    match ensemble {
        EnsembleKind::BernoulliAsymmetric { .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, STREAM_LABELS, 0));
            let mut data = h.data().to_vec();
            for row in data.chunks_mut(n) {
                let q = ensemble.draw(&mut rng);
                row.iter_mut().for_each(|v| *v *= q);
            }
            PatternMatrix::new(rows, n, data)
        }
        _ => Ok(h),
    }
}

fn decide_kappa(h: &PatternMatrix, kappa: f64, tol: f64, seed: u64) -> Result<Feasibility> {
    if kappa >= 0.0 {
        Ok(margin::decide(h, kappa, tol, DEFAULT_MAX_ITERS)?.0)
    } else {
        Ok(
            match margin::sphere_heuristic(h, kappa, margin::DEFAULT_RESTARTS, seed) {
                SphereSearch::FeasibleWitness(_) => Feasibility::Feasible,
                SphereSearch::NoWitnessFound => Feasibility::Undecided,
            },
        )
    }
}

/// Feasibility of a freshly sampled instance. For `κ < 0` only witnesses are
/// reported: the result is `Feasible` or `Undecided`, never `Infeasible`.
pub fn run_trial(config: &TrialConfig) -> Result<Feasibility> {
    config.validate()?;
    let h = constraint_matrix(config.ensemble, config.rows(), config.n, config.seed)?;
    decide_kappa(&h, config.kappa, config.solver_tol, config.seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub solver_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { solver_tol: 1e-6 }
    }
}

/// Per-trial decisions along an increasing `alpha_grid`, coupled through
/// prefixes of one matrix.
///
/// Once a prefix is certified infeasible, its dual weights certify every
/// longer prefix; once a prefix is feasible, its witness satisfies every
/// shorter prefix. Both facts are applied, so the sequence is
/// `Feasible* Undecided* Infeasible*`.
pub fn coupled_trial(
    n: usize,
    kappa: f64,
    ensemble: EnsembleKind,
    alpha_grid: &[f64],
    seed: u64,
    solver_tol: f64,
) -> Result<Vec<Feasibility>> {
    let ms: Vec<usize> = alpha_grid.iter().map(|&a| rows_for(a, n)).collect();
    let m_max = *ms.iter().max().unwrap_or(&0);
    if m_max == 0 {
        return Ok(Vec::new());
    }
    let h = constraint_matrix(ensemble, m_max, n, seed)?;
    let mut out = Vec::with_capacity(ms.len());
    let mut blocked = false;
    for &m in &ms {
        if blocked {
            out.push(Feasibility::Infeasible);
            continue;
        }
        let d = if m == 0 {
            Feasibility::Feasible
        } else {
            decide_kappa(&h.prefix(m)?, kappa, solver_tol, seed)?
        };
        if d == Feasibility::Infeasible {
            blocked = true;
        }
        out.push(d);
    }
    if let Some(last) = out.iter().rposition(|&d| d == Feasibility::Feasible) {
        out[..last]
            .iter_mut()
            .for_each(|d| *d = Feasibility::Feasible);
    }
    Ok(out)
}

fn validate_sweep(n: usize, ensemble: EnsembleKind, grid: &[f64]) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("n must be >= 2, got {n}")));
    }
    ensemble.validate()?;
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("grid must be strictly increasing"));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(invalid("grid values must be finite"));
    }
    Ok(())
}

fn tally(
    axis: SweepAxis,
    grid: &[f64],
    decisions: &[Vec<Feasibility>],
    trials: usize,
) -> SweepResult {
    let mut feasible = vec![0usize; grid.len()];
    let mut undecided = vec![0usize; grid.len()];
    for trial in decisions {
        for (i, d) in trial.iter().enumerate() {
            match d {
                Feasibility::Feasible => feasible[i] += 1,
                Feasibility::Undecided => undecided[i] += 1,
                Feasibility::Infeasible => {}
            }
        }
    }
    SweepResult::from_counts(axis, grid, &feasible, &undecided, trials)
}

/// Empirical feasibility probability along `alpha_grid` with default options.
pub fn sweep_alpha(
    n: usize,
    kappa: f64,
    ensemble: EnsembleKind,
    alpha_grid: &[f64],
    trials_per_point: usize,
    master_seed: u64,
) -> Result<SweepResult> {
    sweep_alpha_with(
        n,
        kappa,
        ensemble,
        alpha_grid,
        trials_per_point,
        master_seed,
        &SweepOptions::default(),
    )
}

pub fn sweep_alpha_with(
    n: usize,
    kappa: f64,
    ensemble: EnsembleKind,
    alpha_grid: &[f64],
    trials_per_point: usize,
    master_seed: u64,
    options: &SweepOptions,
) -> Result<SweepResult> {
    sweep_alpha_until(
        n,
        kappa,
        ensemble,
        alpha_grid,
        trials_per_point,
        master_seed,
        options,
        &AtomicBool::new(false),
    )
}

/// [`sweep_alpha_with`] that skips trials not yet started once `stop` is set.
/// The result then covers only the completed trials.
#[allow(clippy::too_many_arguments)]
pub fn sweep_alpha_until(
    n: usize,
    kappa: f64,
    ensemble: EnsembleKind,
    alpha_grid: &[f64],
    trials_per_point: usize,
    master_seed: u64,
    options: &SweepOptions,
    stop: &AtomicBool,
) -> Result<SweepResult> {
    validate_sweep(n, ensemble, alpha_grid)?;
    if alpha_grid.iter().any(|&a| !(a > 0.0)) {
        return Err(invalid("alpha grid values must be > 0"));
    }
    if trials_per_point == 0 || alpha_grid.is_empty() {
        return Ok(SweepResult::empty(SweepAxis::Alpha));
    }
    let decisions = (0..trials_per_point)
        .into_par_iter()
        .map(|t| {
            if stop.load(Ordering::Relaxed) {
                return Ok(None);
            }
            let seed = mix_seed(master_seed, STREAM_SWEEP_ALPHA, t as u64);
            coupled_trial(n, kappa, ensemble, alpha_grid, seed, options.solver_tol).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    let done: Vec<Vec<Feasibility>> = decisions.into_iter().flatten().collect();
    if done.is_empty() {
        return Ok(SweepResult::empty(SweepAxis::Alpha));
    }
    Ok(tally(SweepAxis::Alpha, alpha_grid, &done, done.len()))
}

/// Empirical feasibility probability along a nonnegative `kappa_grid` at fixed
/// `alpha`. One solve per trial; every grid point reads the same certificate.
pub fn sweep_kappa(
    n: usize,
    alpha: f64,
    ensemble: EnsembleKind,
    kappa_grid: &[f64],
    trials_per_point: usize,
    master_seed: u64,
    options: &SweepOptions,
) -> Result<SweepResult> {
    validate_sweep(n, ensemble, kappa_grid)?;
    if kappa_grid.iter().any(|&k| k < 0.0) {
        return Err(invalid("kappa sweep needs kappa >= 0"));
    }
    let m = rows_for(alpha, n);
    if m == 0 {
        return Err(invalid("alpha * n rounds to zero rows"));
    }
    if trials_per_point == 0 || kappa_grid.is_empty() {
        return Ok(SweepResult::empty(SweepAxis::Kappa));
    }
    let decisions = (0..trials_per_point)
        .into_par_iter()
        .map(|t| {
            let seed = mix_seed(master_seed, STREAM_SWEEP_KAPPA, t as u64);
            let h = constraint_matrix(ensemble, m, n, seed)?;
            let cert = match margin::max_margin(&h, options.solver_tol, DEFAULT_MAX_ITERS) {
                Ok(c) => c,
                Err(crate::Error::IterationLimit(c)) => *c,
                Err(e) => return Err(e),
            };
            Ok(kappa_grid
                .iter()
                .map(|&k| decide_from_certificate(&cert, k, options.solver_tol))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally(
        SweepAxis::Kappa,
        kappa_grid,
        &decisions,
        trials_per_point,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaHat {
    pub alpha_hat: f64,
    /// 1.96 standard errors of the mean; 0 for a single trial.
    pub ci: f64,
    pub std_error: f64,
    pub per_trial: Vec<f64>,
    pub n_undecided: usize,
}

/// Largest feasible row count of one trial, by bisection over prefixes of a
/// matrix that grows by doubling. Undecided prefixes count as not feasible.
fn largest_feasible_rows(
    n: usize,
    kappa: f64,
    ensemble: EnsembleKind,
    seed: u64,
    tol: f64,
) -> Result<(usize, usize)> {
    let mut undecided = 0;
    let mut decide_prefix = |h: &PatternMatrix, m: usize| -> Result<bool> {
        let d = decide_kappa(&h.prefix(m)?, kappa, tol, seed)?;
        if d == Feasibility::Undecided {
            undecided += 1;
        }
        Ok(d == Feasibility::Feasible)
    };
    let mut lo = 0usize;
    let mut hi = n;
    let mut h = constraint_matrix(ensemble, hi, n, seed)?;
    while decide_prefix(&h, hi)? {
        lo = hi;
        if hi >= 64 * n {
            return Ok((hi, undecided));
        }
        hi *= 2;
        h = constraint_matrix(ensemble, hi, n, seed)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if decide_prefix(&h, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, undecided))
}

/// Empirical capacity: mean over trials of the largest feasible `m/n`.
pub fn estimate_alpha_hat(
    n: usize,
    kappa: f64,
    ensemble: EnsembleKind,
    trials: usize,
    master_seed: u64,
) -> Result<AlphaHat> {
    estimate_alpha_hat_with(
        n,
        kappa,
        ensemble,
        trials,
        master_seed,
        &SweepOptions::default(),
    )
}

pub fn estimate_alpha_hat_with(
    n: usize,
    kappa: f64,
    ensemble: EnsembleKind,
    trials: usize,
    master_seed: u64,
    options: &SweepOptions,
) -> Result<AlphaHat> {
    if n < 2 {
        return Err(invalid(format!("n must be >= 2, got {n}")));
    }
    if trials < 1 {
        return Err(invalid("alpha_hat needs at least one trial"));
    }
    ensemble.validate()?;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = mix_seed(master_seed, STREAM_ALPHA_HAT, t as u64);
            largest_feasible_rows(n, kappa, ensemble, seed, options.solver_tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let per_trial: Vec<f64> = results.iter().map(|&(m, _)| m as f64 / n as f64).collect();
    let n_undecided = results.iter().map(|&(_, u)| u).sum();
    let k = trials as f64;
    let mean = per_trial.iter().sum::<f64>() / k;
    let std_error = if trials > 1 {
        let var = per_trial.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    Ok(AlphaHat {
        alpha_hat: mean,
        ci: 1.96 * std_error,
        std_error,
        per_trial,
        n_undecided,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, alpha: f64, kappa: f64, ensemble: EnsembleKind, seed: u64) -> TrialConfig {
        TrialConfig {
            n,
            alpha,
            kappa,
            ensemble,
            seed,
            solver_tol: 1e-6,
        }
    }

    #[test]
    fn rows_round_half_up() {
        assert_eq!(rows_for(0.25, 10), 3);
        assert_eq!(rows_for(0.24, 10), 2);
        assert_eq!(rows_for(1.0, 7), 7);
    }

    #[test]
    fn config_validation() {
        assert!(config(1, 1.0, 0.0, EnsembleKind::Gaussian, 0)
            .validate()
            .is_err());
        assert!(config(4, 0.0, 0.0, EnsembleKind::Gaussian, 0)
            .validate()
            .is_err());
        assert!(config(4, 0.1, 0.0, EnsembleKind::Gaussian, 0)
            .validate()
            .is_err());
        assert!(config(
            4,
            1.0,
            0.0,
            EnsembleKind::BernoulliAsymmetric { m_a: 1.0 },
            0
        )
        .validate()
        .is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = config(4, 1.0, 0.0, EnsembleKind::Gaussian, 7);
        assert_eq!(sample_matrix(&c).unwrap(), sample_matrix(&c).unwrap());
        let other = TrialConfig { seed: 8, ..c };
        assert_ne!(sample_matrix(&c).unwrap(), sample_matrix(&other).unwrap());
    }

    #[test]
    fn larger_draw_extends_smaller() {
        let small = sample_rows(EnsembleKind::Gaussian, 3, 5, 11).unwrap();
        let big = sample_rows(EnsembleKind::Gaussian, 9, 5, 11).unwrap();
        assert_eq!(big.prefix(3).unwrap(), small);
    }

    #[test]
    fn symmetric_bernoulli_entries() {
        let c = config(50, 2.0, 0.0, EnsembleKind::BernoulliSymmetric, 3);
        let h = sample_matrix(&c).unwrap();
        assert!(h.data().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn asymmetric_bias() {
        // 10^6 entries; 4 sigma of the binomial mean is 4*sqrt(0.75)/1000 < 0.0035
        let c = config(
            1000,
            1.0,
            0.0,
            EnsembleKind::BernoulliAsymmetric { m_a: 0.5 },
            5,
        );
        let h = sample_matrix(&c).unwrap();
        let mean = h.data().iter().sum::<f64>() / h.data().len() as f64;
        assert!((mean - 0.5).abs() < 0.002, "{mean}");
    }

    #[test]
    fn seed_mixing_separates_streams() {
        assert_ne!(mix_seed(1, 0, 0), mix_seed(1, 0, 1));
        assert_ne!(mix_seed(1, 0, 0), mix_seed(1, 1, 0));
        assert_ne!(mix_seed(1, 0, 0), mix_seed(2, 0, 0));
        assert_eq!(mix_seed(9, 4, 2), mix_seed(9, 4, 2));
    }

    #[test]
    fn wilson_interval() {
        assert_eq!(wilson_halfwidth(0.5, 0), 0.0);
        let w = wilson_halfwidth(0.5, 100);
        assert!((w - 0.0961).abs() < 1e-3, "{w}");
        assert!(wilson_halfwidth(0.0, 100) > 0.0);
    }

    #[test]
    fn deep_phases_at_zero_margin() {
        let mut feasible = 0;
        let mut infeasible = 0;
        for s in 0..100 {
            if run_trial(&config(50, 0.2, 0.0, EnsembleKind::Gaussian, s)).unwrap()
                == Feasibility::Feasible
            {
                feasible += 1;
            }
            if run_trial(&config(50, 6.0, 0.0, EnsembleKind::Gaussian, 1000 + s)).unwrap()
                == Feasibility::Infeasible
            {
                infeasible += 1;
            }
        }
        assert!(feasible >= 99, "{feasible}");
        assert!(infeasible >= 99, "{infeasible}");
    }

    #[test]
    fn trial_is_repeatable() {
        let c = config(30, 1.0, 0.3, EnsembleKind::BernoulliSymmetric, 42);
        assert_eq!(run_trial(&c).unwrap(), run_trial(&c).unwrap());
    }

    #[test]
    fn negative_margin_never_infeasible() {
        for s in 0..5 {
            let d = run_trial(&config(20, 3.0, -0.5, EnsembleKind::Gaussian, s)).unwrap();
            assert_ne!(d, Feasibility::Infeasible);
        }
    }

    #[test]
    fn coupled_decisions_are_monotone() {
        let grid: Vec<f64> = (1..=12).map(|i| 0.25 * i as f64).collect();
        for s in 0..10 {
            let d = coupled_trial(30, 0.2, EnsembleKind::Gaussian, &grid, s, 1e-6).unwrap();
            let rank = |f: &Feasibility| match f {
                Feasibility::Feasible => 0,
                Feasibility::Undecided => 1,
                Feasibility::Infeasible => 2,
            };
            assert!(d.windows(2).all(|w| rank(&w[0]) <= rank(&w[1])), "{d:?}");
        }
    }

    #[test]
    fn empty_sweep() {
        let r = sweep_alpha(10, 0.5, EnsembleKind::Gaussian, &[0.5, 1.0], 0, 1).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn sweep_rejects_unsorted_grid() {
        assert!(sweep_alpha(10, 0.5, EnsembleKind::Gaussian, &[1.0, 0.5], 3, 1).is_err());
    }

    #[test]
    fn kappa_sweep_is_monotone() {
        let grid: Vec<f64> = (0..10).map(|i| 0.1 * i as f64).collect();
        let r = sweep_kappa(
            40,
            1.0,
            EnsembleKind::Gaussian,
            &grid,
            20,
            3,
            &SweepOptions::default(),
        )
        .unwrap();
        assert!(r.p_feasible.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn single_trial_alpha_hat_has_zero_ci() {
        let a = estimate_alpha_hat(20, 0.5, EnsembleKind::Gaussian, 1, 9).unwrap();
        assert_eq!(a.ci, 0.0);
        assert!(a.alpha_hat > 0.0);
    }

    #[test]
    fn csv_floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0, 1e-300, 123456.789, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
