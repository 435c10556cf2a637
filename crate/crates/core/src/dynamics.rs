//! Pattern storage in a network of `n` ±1 spins with synchronous sign
//! dynamics
//!
//! ```text
//! s_k ← sign(Σ_{j≠k} s_j X_jk − T_k)
//! ```
//!
//! A pattern `H_i` is a margin-κ fixed point when
//! `H_ik (Σ_{j≠k} H_ij X_jk − T_k) > κ` at every site. The conditions on
//! column `k` of `X` only involve that column, so storage splits into `n`
//! independent perceptron problems with rows `H_ik · H_{i,j≠k}`.
//!
//! Conventions: `sign(0) = +1` and `X_kk = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::margin::{self, MarginCertificate, PatternMatrix, DEFAULT_MAX_ITERS};

const OFFSET_SWEEPS: usize = 20_000;

/// `m` patterns over `n` spins, row-major, entries exactly ±1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSet {
    m: usize,
    n: usize,
    spins: Vec<i8>,
}

impl PatternSet {
    pub fn new(m: usize, n: usize, spins: Vec<i8>) -> Result<Self> {
        if m == 0 || n < 2 {
            return Err(invalid(format!(
                "pattern set needs m >= 1 and n >= 2, got {m}x{n}"
            )));
        }
        if spins.len() != m * n {
            return Err(invalid(format!(
                "expected {} spins, got {}",
                m * n,
                spins.len()
            )));
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(invalid(format!("spins must be +1 or -1, found {bad}")));
        }
        Ok(Self { m, n, spins })
    }

    pub fn from_rows<R: AsRef<[i8]>>(rows: &[R]) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != n) {
            return Err(invalid("pattern rows have different lengths"));
        }
        let spins = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(rows.len(), n, spins)
    }

    /// Unbiased random spins from a ChaCha8 stream.
    pub fn random(m: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spins = (0..m * n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        Self::new(m, n, spins)
    }

    pub fn count(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pattern(&self, i: usize) -> &[i8] {
        &self.spins[i * self.n..(i + 1) * self.n]
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn with_flipped_row(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.spins[i * self.n..(i + 1) * self.n]
            .iter_mut()
            .for_each(|s| *s = -*s);
        out
    }

    /// Constraint rows for site `k`: `H_ik · H_{i,j}` for `j ≠ k`.
    fn site_rows(&self, k: usize) -> PatternMatrix {
        let mut data = Vec::with_capacity(self.m * (self.n - 1));
        for i in 0..self.m {
            let p = self.pattern(i);
            let hk = p[k] as f64;
            data.extend(
                p.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &s)| hk * s as f64),
            );
        }
        PatternMatrix::new(self.m, self.n - 1, data).expect("site rows are well formed")
    }
}

/// Couplings `X` (n × n, zero diagonal) and per-site thresholds `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    n: usize,
    x: Vec<f64>,
    thresholds: Vec<f64>,
}

impl InteractionMatrix {
    /// Row-major `X`; the diagonal is forced to zero.
    pub fn new(n: usize, mut x: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        if x.len() != n * n || thresholds.len() != n {
            return Err(invalid("interaction matrix shape mismatch"));
        }
        if x.iter().chain(&thresholds).any(|v| !v.is_finite()) {
            return Err(invalid("interaction matrix entries must be finite"));
        }
        for k in 0..n {
            x[k * n + k] = 0.0;
        }
        Ok(Self { n, x, thresholds })
    }

    /// Random Gaussian columns scaled to unit norm, zero thresholds.
    pub fn random_unit_columns(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..n * n)
            .map(|_| rng.sample(rand_distr::StandardNormal))
            .collect();
        for k in 0..n {
            x[k * n + k] = 0.0;
            let norm = (0..n).map(|j| x[j * n + k].powi(2)).sum::<f64>().sqrt();
            for j in 0..n {
                x[j * n + k] /= norm;
            }
        }
        Self::new(n, x, vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.x[j * self.n + k]
    }

    pub fn data(&self) -> &[f64] {
        &self.x
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn column_norm(&self, k: usize) -> f64 {
        (0..self.n)
            .map(|j| self.get(j, k).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ_{j≠k} s_j X_jk − T_k`.
    pub fn local_field(&self, state: &[i8], k: usize) -> f64 {
        let sum: f64 = state
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(j, &s)| s as f64 * self.get(j, k))
            .sum();
        sum - self.thresholds[k]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Storage {
    pub interactions: InteractionMatrix,
    /// Smallest `H_ik · field` over patterns at each site, for the stored column.
    pub per_site_margin: Vec<f64>,
    pub certificates: Vec<MarginCertificate>,
}

impl Storage {
    pub fn min_margin(&self) -> f64 {
        self.per_site_margin
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn store_site(
    patterns: &PatternSet,
    k: usize,
    threshold: f64,
    kappa: f64,
    tol: f64,
) -> Result<(Vec<f64>, f64, MarginCertificate)> {
    let rows = patterns.site_rows(k);
    let cert = if threshold == 0.0 {
        margin::max_margin_unless_blocked(&rows, kappa, tol, DEFAULT_MAX_ITERS)?
    } else {
        let offsets: Vec<f64> = (0..patterns.count())
            .map(|i| patterns.pattern(i)[k] as f64 * threshold)
            .collect();
        margin::offset_margin(&rows, &offsets, kappa, tol, OFFSET_SWEEPS)
    };
    // the achieved margin of the unit column, not the clamped ball bound
    let achieved = cert.sphere_margin;
    if !(achieved > kappa) {
        return Err(Error::StorageFailed {
            site: k,
            certificate: Box::new(cert),
        });
    }
    Ok((cert.x.clone(), achieved, cert))
}

/// Stores `patterns` as margin-`kappa` fixed points with zero thresholds.
pub fn store_patterns(patterns: &PatternSet, kappa: f64, tol: f64) -> Result<Storage> {
    store_patterns_with_thresholds(patterns, &vec![0.0; patterns.n()], kappa, tol)
}

/// Stores `patterns` with per-site thresholds `T`.
///
/// Site `k` succeeds only if the solver finds a unit column whose margin is
/// strictly above `kappa`. A site whose upper bound is below `kappa` is
/// certified infeasible; a site left undecided within `tol` also fails. The
/// lowest failing site is reported.
pub fn store_patterns_with_thresholds(
    patterns: &PatternSet,
    thresholds: &[f64],
    kappa: f64,
    tol: f64,
) -> Result<Storage> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(invalid(format!("storage needs kappa >= 0, got {kappa}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol must be > 0"));
    }
    let n = patterns.n();
    if thresholds.len() != n || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(invalid("thresholds must be n finite values"));
    }
    let sites: Vec<Result<_>> = (0..n)
        .into_par_iter()
        .map(|k| store_site(patterns, k, thresholds[k], kappa, tol))
        .collect();
    let mut x = vec![0.0; n * n];
    let mut per_site_margin = Vec::with_capacity(n);
    let mut certificates = Vec::with_capacity(n);
    for (k, site) in sites.into_iter().enumerate() {
        let (column, achieved, cert) = site?;
        for (c, j) in (0..n).filter(|&j| j != k).enumerate() {
            x[j * n + k] = column[c];
        }
        per_site_margin.push(achieved);
        certificates.push(cert);
    }
    Ok(Storage {
        interactions: InteractionMatrix::new(n, x, thresholds.to_vec())?,
        per_site_margin,
        certificates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub m: usize,
    pub n: usize,
    /// Row-major `m × n`; entry `(i, k)` holds `H_ik (Σ_{j≠k} H_ij X_jk − T_k) > κ`.
    pub satisfied: Vec<bool>,
    pub violations: usize,
}

impl FixedPointReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn is_satisfied(&self, i: usize, k: usize) -> bool {
        self.satisfied[i * self.n + k]
    }

    /// Patterns with no violated site.
    pub fn fixed_patterns(&self) -> usize {
        self.satisfied
            .chunks(self.n)
            .filter(|row| row.iter().all(|&s| s))
            .count()
    }
}

pub fn verify_fixed_points(
    patterns: &PatternSet,
    x: &InteractionMatrix,
    kappa: f64,
) -> Result<FixedPointReport> {
    if patterns.n() != x.n() {
        return Err(invalid(format!(
            "patterns have {} spins but X is {}x{}",
            patterns.n(),
            x.n(),
            x.n()
        )));
    }
    let (m, n) = (patterns.count(), patterns.n());
    let mut satisfied = Vec::with_capacity(m * n);
    for i in 0..m {
        let p = patterns.pattern(i);
        for k in 0..n {
            satisfied.push(p[k] as f64 * x.local_field(p, k) > kappa);
        }
    }
    let violations = satisfied.iter().filter(|&&s| !s).count();
    Ok(FixedPointReport {
        m,
        n,
        satisfied,
        violations,
    })
}

/// One synchronous update of every site; `sign(0) = +1`.
pub fn step_dynamics(state: &[i8], x: &InteractionMatrix) -> Result<Vec<i8>> {
    if state.len() != x.n() {
        return Err(invalid(format!(
            "state has {} spins, X has {}",
            state.len(),
            x.n()
        )));
    }
    if state.iter().any(|&s| s != 1 && s != -1) {
        return Err(invalid("state entries must be +1 or -1"));
    }
    Ok((0..x.n())
        .map(|k| {
            if x.local_field(state, k) >= 0.0 {
                1
            } else {
                -1
            }
        })
        .collect())
}

/// Iterates the dynamics until a fixed point or `max_steps`. Returns the
/// final state and the number of steps taken.
pub fn run_dynamics(
    state: &[i8],
    x: &InteractionMatrix,
    max_steps: usize,
) -> Result<(Vec<i8>, usize)> {
    let mut s = state.to_vec();
    for t in 0..max_steps {
        let next = step_dynamics(&s, x)?;
        if next == s {
            return Ok((s, t));
        }
        s = next;
    }
    Ok((s, max_steps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStats {
    pub trials: usize,
    pub recovered: usize,
    /// Mean steps to reach the pattern over recovered trials.
    pub mean_steps: f64,
}

impl RecoveryStats {
    pub fn fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.recovered as f64 / self.trials as f64
        }
    }
}

/// Flips one random bit of each pattern `trials_per_pattern` times and counts
/// how often the dynamics returns to the pattern within `max_steps`.
pub fn one_flip_recovery(
    patterns: &PatternSet,
    x: &InteractionMatrix,
    trials_per_pattern: usize,
    max_steps: usize,
    seed: u64,
) -> Result<RecoveryStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recovered = 0;
    let mut steps_total = 0usize;
    let mut trials = 0;
    for i in 0..patterns.count() {
        let p = patterns.pattern(i);
        for _ in 0..trials_per_pattern {
            let mut s = p.to_vec();
            let bit = rng.random_range(0..s.len());
            s[bit] = -s[bit];
            trials += 1;
            let mut cur = s;
            for t in 1..=max_steps {
                cur = step_dynamics(&cur, x)?;
                if cur == p {
                    recovered += 1;
                    steps_total += t;
                    break;
                }
            }
        }
    }
    let mean_steps = if recovered > 0 {
        steps_total as f64 / recovered as f64
    } else {
        0.0
    };
    Ok(RecoveryStats {
        trials,
        recovered,
        mean_steps,
    })
}
