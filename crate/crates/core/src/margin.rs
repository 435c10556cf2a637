//! Certified max-margin solver for `Hx ≥ κ·1`, `‖x‖₂ ≤ 1`.
//!
//! The optimum `max_{‖x‖≤1} minᵢ hᵢᵀx` is, when positive, the distance from
//! the origin to the convex hull of the rows. The dual is the minimum-norm
//! point `p = Hᵀλ` over the probability simplex. Any simplex weights `λ` give
//! the upper bound `‖Hᵀλ‖₂` and any unit `x` gives the lower bound
//! `minᵢ hᵢᵀx`, so every iterate carries a certificate.
//!
//! The dual is solved with Wolfe's minimum-norm-point method: a Frank–Wolfe
//! vertex oracle that keeps an active set ("corral") and jumps to the affine
//! minimizer of that set, dropping vertices whose weights would go negative.
//! The affine subproblem is solved through an incrementally updated Cholesky
//! factor of `11ᵀ + SSᵀ` (S = corral rows), with Givens downdates on removal.

// triangular solves read more clearly with explicit indices
#![allow(clippy::needless_range_loop)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Row-major `m × n` matrix; row `i` is the constraint vector `hᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PatternMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("entry {bad} is not finite")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(invalid("rows have unequal lengths"));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// The first `m` rows.
    pub fn prefix(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.rows {
            return Err(invalid(format!(
                "prefix length {m} outside 1..={}",
                self.rows
            )));
        }
        Ok(Self {
            rows: m,
            cols: self.cols,
            data: self.data[..m * self.cols].to_vec(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// `Hx`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Hᵀλ`
    pub fn mul_transpose(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &w) in lambda.iter().enumerate() {
            if w != 0.0 {
                axpy(w, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| norm(self.row(i)))
            .fold(0.0, f64::max)
    }
}

/// Primal/dual bounds on `max_{‖x‖≤1} minᵢ hᵢᵀx`.
///
/// `margin_lower = max(sphere_margin, 0)` is the ball lower bound (the origin
/// attains 0); `sphere_margin = minᵢ hᵢᵀx` is the value at the unit vector
/// `x`; `margin_upper = ‖Hᵀλ‖₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCertificate {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub margin_lower: f64,
    pub margin_upper: f64,
    pub gap: f64,
    pub sphere_margin: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feasibility {
    Feasible,
    Infeasible,
    Undecided,
}

impl Feasibility {
    pub fn as_str(&self) -> &'static str {
        match self {
            Feasibility::Feasible => "Feasible",
            Feasibility::Infeasible => "Infeasible",
            Feasibility::Undecided => "Undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SphereSearch {
    FeasibleWitness(Vec<f64>),
    NoWitnessFound,
}

pub const DEFAULT_MAX_ITERS: usize = 100_000;
pub const DEFAULT_RESTARTS: usize = 16;
const SPHERE_ITERS: usize = 2000;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Active set of Wolfe's method with a Cholesky factor `RᵀR = 11ᵀ + SSᵀ`.
struct Corral {
    members: Vec<usize>,
    weights: Vec<f64>,
    // dense upper-triangular factor, row-major, r[i][j] for j >= i
    r: Vec<Vec<f64>>,
}

impl Corral {
    fn new(h: &PatternMatrix, start: usize) -> Self {
        let d = 1.0 + dot(h.row(start), h.row(start));
        Self {
            members: vec![start],
            weights: vec![1.0],
            r: vec![vec![d.sqrt()]],
        }
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    /// Appends row `j`; returns false if it is affinely dependent on the corral.
    fn add(&mut self, h: &PatternMatrix, j: usize) -> bool {
        let k = self.len();
        let hj = h.row(j);
        let col: Vec<f64> = self
            .members
            .iter()
            .map(|&i| 1.0 + dot(h.row(i), hj))
            .collect();
        let mut y = vec![0.0; k];
        for i in 0..k {
            let mut acc = col[i];
            for l in 0..i {
                acc -= self.r[l][i] * y[l];
            }
            y[i] = acc / self.r[i][i];
        }
        let diag = 1.0 + dot(hj, hj);
        let d = diag - dot(&y, &y);
        if !(d > 1e-13 * diag) {
            return false;
        }
        for (row, yi) in self.r.iter_mut().zip(&y) {
            row.push(*yi);
        }
        let mut last = vec![0.0; k];
        last.push(d.sqrt());
        self.r.push(last);
        self.members.push(j);
        self.weights.push(0.0);
        true
    }

    fn remove(&mut self, p: usize) {
        let k = self.len();
        self.members.remove(p);
        self.weights.remove(p);
        for row in self.r.iter_mut() {
            row.remove(p);
        }
        // rows p+1..k now carry one subdiagonal entry each
        for i in p..k - 1 {
            let a = self.r[i][i];
            let b = self.r[i + 1][i];
            let hyp = a.hypot(b);
            if hyp == 0.0 {
                continue;
            }
            let (c, s) = (a / hyp, b / hyp);
            for j in i..k - 1 {
                let x = self.r[i][j];
                let y = self.r[i + 1][j];
                self.r[i][j] = c * x + s * y;
                self.r[i + 1][j] = -s * x + c * y;
            }
            self.r[i + 1][i] = 0.0;
        }
        self.r.pop();
    }

    /// Weights of the minimum-norm point of the affine hull of the corral.
    fn affine_minimizer(&self) -> Vec<f64> {
        let k = self.len();
        let mut z = vec![0.0; k];
        for i in 0..k {
            let mut acc = 1.0;
            for l in 0..i {
                acc -= self.r[l][i] * z[l];
            }
            z[i] = acc / self.r[i][i];
        }
        let mut mu = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = z[i];
            for j in i + 1..k {
                acc -= self.r[i][j] * mu[j];
            }
            mu[i] = acc / self.r[i][i];
        }
        let total: f64 = mu.iter().sum();
        mu.iter_mut().for_each(|v| *v /= total);
        mu
    }

    fn point(&self, h: &PatternMatrix) -> Vec<f64> {
        let mut p = vec![0.0; h.cols()];
        for (&i, &w) in self.members.iter().zip(&self.weights) {
            axpy(w, h.row(i), &mut p);
        }
        p
    }

    fn lambda(&self, m: usize) -> Vec<f64> {
        let mut lambda = vec![0.0; m];
        for (&i, &w) in self.members.iter().zip(&self.weights) {
            lambda[i] = w.max(0.0);
        }
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|v| *v /= total);
        lambda
    }
}

/// Best bounds seen so far; primal and dual sides may come from different iterates.
struct Bounds {
    x: Vec<f64>,
    sphere: f64,
    lambda: Vec<f64>,
    upper: f64,
}

impl Bounds {
    fn lower(&self) -> f64 {
        self.sphere.max(0.0)
    }

    fn gap(&self) -> f64 {
        self.upper - self.lower()
    }

    fn certificate(&self, iterations: usize) -> MarginCertificate {
        MarginCertificate {
            x: self.x.clone(),
            lambda: self.lambda.clone(),
            margin_lower: self.lower(),
            margin_upper: self.upper,
            gap: self.gap(),
            sphere_margin: self.sphere,
            iterations,
        }
    }
}

fn solve<F>(h: &PatternMatrix, tol: f64, max_iters: usize, stop: F) -> Result<MarginCertificate>
where
    F: Fn(&Bounds) -> bool,
{
    if !(tol > 0.0) {
        return Err(invalid("solver tol must be > 0"));
    }
    let m = h.rows();
    let n = h.cols();
    let norms2: Vec<f64> = (0..m).map(|i| dot(h.row(i), h.row(i))).collect();
    let max_norm2 = norms2.iter().copied().fold(0.0, f64::max);
    let start = norms2
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("matrix has at least one row");

    let mut corral = Corral::new(h, start);
    let mut p = h.row(start).to_vec();
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let mut last_dir = e1;
    let mut bounds = Bounds {
        x: last_dir.clone(),
        sphere: f64::NEG_INFINITY,
        lambda: corral.lambda(m),
        upper: f64::INFINITY,
    };

    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let hp = h.mul_vec(&p);
        let pn2 = dot(&p, &p);
        let pn = pn2.sqrt();
        let (jmin, hmin) = hp
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("matrix has at least one row");

        if pn < bounds.upper {
            bounds.upper = pn;
            bounds.lambda = corral.lambda(m);
        }
        if pn > 0.0 && pn.is_finite() {
            let sphere = hmin / pn;
            last_dir = p.iter().map(|v| v / pn).collect();
            if sphere > bounds.sphere {
                bounds.sphere = sphere;
                bounds.x = last_dir.clone();
            }
        } else if bounds.sphere == f64::NEG_INFINITY {
            let hx = h.mul_vec(&last_dir);
            bounds.sphere = hx.iter().copied().fold(f64::INFINITY, f64::min);
            bounds.x = last_dir.clone();
        }

        if bounds.gap() <= tol || stop(&bounds) {
            return Ok(bounds.certificate(iterations));
        }
        // Wolfe's optimality test at floating-point resolution
        if pn2 - hmin <= 1e-15 * max_norm2.max(f64::MIN_POSITIVE) {
            break;
        }
        if corral.members.contains(&jmin) || !corral.add(h, jmin) {
            break;
        }

        // minor cycles
        loop {
            let mu = corral.affine_minimizer();
            if mu.iter().all(|&v| v > 1e-15) {
                corral.weights = mu;
                break;
            }
            let mut theta = 1.0;
            let mut drop_at = 0;
            for (i, (&w, &u)) in corral.weights.iter().zip(&mu).enumerate() {
                if u <= 1e-15 {
                    let t = if w - u > 0.0 { w / (w - u) } else { 0.0 };
                    if t < theta {
                        theta = t;
                        drop_at = i;
                    }
                }
            }
            for (w, u) in corral.weights.iter_mut().zip(&mu) {
                *w = (1.0 - theta) * *w + theta * u;
            }
            corral.weights[drop_at] = 0.0;
            let mut i = corral.len();
            while i > 0 {
                i -= 1;
                if corral.weights[i] <= 1e-15 && corral.len() > 1 {
                    corral.remove(i);
                }
            }
            let total: f64 = corral.weights.iter().sum();
            corral.weights.iter_mut().for_each(|w| *w /= total);
            if corral.len() == 1 {
                corral.weights[0] = 1.0;
                break;
            }
        }
        p = corral.point(h);
    }

    let cert = bounds.certificate(iterations);
    if cert.gap <= tol || stop(&bounds) {
        Ok(cert)
    } else {
        Err(Error::IterationLimit(Box::new(cert)))
    }
}

/// `max_{‖x‖≤1} minᵢ hᵢᵀx` with a certificate whose gap is at most `tol`.
pub fn max_margin(h: &PatternMatrix, tol: f64, max_iters: usize) -> Result<MarginCertificate> {
    solve(h, tol, max_iters, |_| false)
}

/// Feasibility decision implied by a certificate.
///
/// For `κ > 0` the ball and sphere problems coincide: feasible iff the lower
/// bound reaches `κ`, infeasible iff the upper bound is below it. At `κ = 0`
/// the ball problem is trivially feasible (x = 0), so the decision is made on
/// the sphere: a unit witness with margin above `tol` is feasible, and an
/// upper bound below `tol` (origin in the hull) is infeasible.
pub fn decide_from_certificate(cert: &MarginCertificate, kappa: f64, tol: f64) -> Feasibility {
    if kappa > 0.0 {
        if cert.margin_lower >= kappa {
            Feasibility::Feasible
        } else if cert.margin_upper < kappa {
            Feasibility::Infeasible
        } else {
            Feasibility::Undecided
        }
    } else if cert.sphere_margin > tol {
        Feasibility::Feasible
    } else if cert.margin_upper < tol {
        Feasibility::Infeasible
    } else {
        Feasibility::Undecided
    }
}

/// Runs the solver only until the decision at `kappa` is settled.
pub fn decide(
    h: &PatternMatrix,
    kappa: f64,
    tol: f64,
    max_iters: usize,
) -> Result<(Feasibility, MarginCertificate)> {
    if !(kappa >= 0.0) {
        return Err(invalid(format!(
            "certified feasibility needs kappa >= 0, got {kappa}; use sphere_heuristic"
        )));
    }
    let settled = |b: &Bounds| {
        if kappa > 0.0 {
            b.lower() >= kappa || b.upper < kappa
        } else {
            b.sphere > tol || b.upper < tol
        }
    };
    let cert = match solve(h, tol, max_iters, settled) {
        Ok(c) => c,
        Err(Error::IterationLimit(c)) => *c,
        Err(e) => return Err(e),
    };
    Ok((decide_from_certificate(&cert, kappa, tol), cert))
}

/// Full max-margin solve that stops early once the upper bound drops below
/// `kappa`.
pub(crate) fn max_margin_unless_blocked(
    h: &PatternMatrix,
    kappa: f64,
    tol: f64,
    max_iters: usize,
) -> Result<MarginCertificate> {
    match solve(h, tol, max_iters, |b: &Bounds| b.upper < kappa) {
        Ok(c) => Ok(c),
        Err(Error::IterationLimit(c)) => Ok(*c),
        Err(e) => Err(e),
    }
}

pub fn is_feasible(h: &PatternMatrix, kappa: f64, tol: f64) -> Result<Feasibility> {
    decide(h, kappa, tol, DEFAULT_MAX_ITERS).map(|(f, _)| f)
}

fn verified_witness(h: &PatternMatrix, x: &[f64], kappa: f64) -> bool {
    let nx = norm(x);
    (nx - 1.0).abs() <= 1e-9 && h.mul_vec(x).iter().all(|&v| v >= kappa)
}

/// Projected subgradient ascent of `minᵢ hᵢᵀx` on the unit sphere.
///
/// Step size `c/√t` with `c = 1/maxᵢ‖hᵢ‖`. Returns only verified witnesses;
/// it never claims infeasibility since the sphere problem is nonconvex for
/// `κ < 0`.
pub fn sphere_heuristic(h: &PatternMatrix, kappa: f64, restarts: usize, seed: u64) -> SphereSearch {
    let n = h.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_norm = h.max_row_norm();
    let c = if max_norm > 0.0 { 1.0 / max_norm } else { 1.0 };
    for _ in 0..restarts.max(1) {
        let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nx = norm(&x);
        if nx == 0.0 {
            continue;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        for t in 1..=SPHERE_ITERS {
            let hx = h.mul_vec(&x);
            let (imin, vmin) = hx
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("matrix has at least one row");
            if vmin >= kappa && verified_witness(h, &x, kappa) {
                return SphereSearch::FeasibleWitness(x);
            }
            axpy(c / (t as f64).sqrt(), h.row(imin), &mut x);
            let nx = norm(&x);
            if nx == 0.0 {
                break;
            }
            x.iter_mut().for_each(|v| *v /= nx);
        }
        if verified_witness(h, &x, kappa) {
            return SphereSearch::FeasibleWitness(x);
        }
    }
    SphereSearch::NoWitnessFound
}

/// Bounds on `max_{‖x‖≤1} minᵢ (hᵢᵀx − cᵢ)` for fixed offsets `c`, used when
/// thresholds shift the constraints.
///
/// Dual coordinate ascent (Hildreth) on the minimum-norm point of
/// `{x : hᵢᵀx ≥ κ + cᵢ}`. The primal side reports the value at the
/// normalized iterate; for normalized `λ̄` the dual side
/// `‖Hᵀλ̄‖ − cᵀλ̄` is a valid upper bound. Stops once `κ` is settled.
/// Unlike [`max_margin`], `margin_lower` here is the unclamped sphere value.
pub(crate) fn offset_margin(
    h: &PatternMatrix,
    offsets: &[f64],
    kappa: f64,
    tol: f64,
    max_sweeps: usize,
) -> MarginCertificate {
    let m = h.rows();
    let n = h.cols();
    let norms2: Vec<f64> = (0..m).map(|i| dot(h.row(i), h.row(i))).collect();
    let target: Vec<f64> = offsets.iter().map(|c| kappa + c).collect();
    let mut lambda = vec![0.0; m];
    let mut x = vec![0.0; n];

    let evaluate = |x: &[f64], lambda: &[f64]| -> MarginCertificate {
        let total: f64 = lambda.iter().sum();
        let (weights, p) = if total > 0.0 {
            (
                lambda.iter().map(|v| v / total).collect::<Vec<_>>(),
                x.iter().map(|v| v / total).collect::<Vec<_>>(),
            )
        } else {
            let w = vec![1.0 / m as f64; m];
            let p = h.mul_transpose(&w);
            (w, p)
        };
        let upper = norm(&p) - dot(&weights, offsets);
        let dir_src = if norm(x) > 0.0 { x.to_vec() } else { p.clone() };
        let nd = norm(&dir_src);
        let dir = if nd > 0.0 {
            dir_src.iter().map(|v| v / nd).collect()
        } else {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        };
        let lower = h
            .mul_vec(&dir)
            .iter()
            .zip(offsets)
            .map(|(v, c)| v - c)
            .fold(f64::INFINITY, f64::min);
        MarginCertificate {
            x: dir,
            lambda: weights,
            margin_lower: lower,
            margin_upper: upper,
            gap: upper - lower,
            sphere_margin: lower,
            iterations: 0,
        }
    };

    let mut best = evaluate(&x, &lambda);
    for sweep in 0..max_sweeps {
        for i in 0..m {
            if norms2[i] == 0.0 {
                continue;
            }
            let delta = (target[i] - dot(h.row(i), &x)) / norms2[i];
            let updated = (lambda[i] + delta).max(0.0);
            if updated != lambda[i] {
                axpy(updated - lambda[i], h.row(i), &mut x);
                lambda[i] = updated;
            }
        }
        let cert = evaluate(&x, &lambda);
        if cert.margin_lower > best.margin_lower {
            best.x = cert.x;
            best.margin_lower = cert.margin_lower;
            best.sphere_margin = cert.sphere_margin;
        }
        if cert.margin_upper < best.margin_upper {
            best.lambda = cert.lambda;
            best.margin_upper = cert.margin_upper;
        }
        best.gap = best.margin_upper - best.margin_lower;
        best.iterations = sweep + 1;
        if best.margin_lower >= kappa || best.margin_upper < kappa || best.gap <= tol {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> PatternMatrix {
        PatternMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(PatternMatrix::new(0, 2, vec![]).is_err());
        assert!(PatternMatrix::new(1, 2, vec![1.0]).is_err());
        assert!(PatternMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn single_row() {
        let c = max_margin(&mat(&[&[3.0, 4.0]]), 1e-9, 100).unwrap();
        assert!((c.margin_lower - 5.0).abs() < 1e-12);
        assert!((c.margin_upper - 5.0).abs() < 1e-12);
        assert!((c.x[0] - 0.6).abs() < 1e-12 && (c.x[1] - 0.8).abs() < 1e-12);
        assert_eq!(c.lambda, vec![1.0]);
    }

    #[test]
    fn two_orthogonal_rows() {
        let c = max_margin(&mat(&[&[1.0, 0.0], &[0.0, 1.0]]), 1e-9, 100).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c.margin_lower - r).abs() < 1e-9);
        assert!((c.x[0] - r).abs() < 1e-9 && (c.x[1] - r).abs() < 1e-9);
        assert!((c.lambda[0] - 0.5).abs() < 1e-9);
        // brute force over unit vectors
        let best = (0..200_000)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 200_000.0;
                t.cos().min(t.sin())
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - c.margin_lower).abs() < 1e-6);
    }

    #[test]
    fn opposite_rows_put_origin_in_hull() {
        let c = max_margin(&mat(&[&[1.0, 0.0], &[-1.0, 0.0]]), 1e-9, 100).unwrap();
        assert!(c.margin_upper <= 1e-9);
        assert!(c.gap <= 1e-9);
    }

    #[test]
    fn feasibility_decisions() {
        let h = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(is_feasible(&h, 0.5, 1e-9).unwrap(), Feasibility::Feasible);
        assert_eq!(is_feasible(&h, 0.8, 1e-9).unwrap(), Feasibility::Infeasible);
        assert!(is_feasible(&h, -0.1, 1e-9).is_err());
        let opposite = mat(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        assert_eq!(
            is_feasible(&opposite, 0.0, 1e-9).unwrap(),
            Feasibility::Infeasible
        );
    }

    #[test]
    fn zero_margin_with_coarse_tol_can_be_undecided() {
        // hull touches the origin only in the limit: rows (1, e), (-1, e)
        let e = 1e-7;
        let h = mat(&[&[1.0, e], &[-1.0, e]]);
        let (d, c) = decide(&h, 0.0, 1e-3, 1000).unwrap();
        assert!(c.margin_upper < 1e-3 || d == Feasibility::Undecided);
    }

    #[test]
    fn sphere_heuristic_cases() {
        let h = mat(&[&[1.0, -2.0, 3.0], &[-3.0, 0.5, 1.0], &[2.0, 2.0, -1.0]]);
        assert!(matches!(
            sphere_heuristic(&h, -10.0, 4, 1),
            SphereSearch::FeasibleWitness(_)
        ));

        let h = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        match sphere_heuristic(&h, 0.5, DEFAULT_RESTARTS, 3) {
            SphereSearch::FeasibleWitness(x) => {
                let margin = h.mul_vec(&x).into_iter().fold(f64::INFINITY, f64::min);
                assert!((0.5..=std::f64::consts::FRAC_1_SQRT_2 + 1e-9).contains(&margin));
            }
            SphereSearch::NoWitnessFound => panic!("convex case has a witness"),
        }

        let h = mat(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        assert_eq!(
            sphere_heuristic(&h, 0.1, DEFAULT_RESTARTS, 5),
            SphereSearch::NoWitnessFound
        );
    }

    #[test]
    fn offsets_reduce_to_plain_margin() {
        let h = mat(&[&[1.0, 0.0], &[0.0, 1.0], &[0.6, 0.9]]);
        let plain = max_margin(&h, 1e-12, 1000).unwrap();
        let off = offset_margin(&h, &[0.0; 3], plain.margin_lower + 0.5, 1e-9, 50_000);
        assert!(off.margin_upper < plain.margin_lower + 0.5);
        assert!(off.margin_lower <= plain.margin_upper + 1e-12);
    }

    #[test]
    fn offsets_shift_the_margin() {
        // shifting every offset by c lowers the margin by exactly c
        let h = mat(&[&[1.0, 0.2], &[0.1, 1.0]]);
        let plain = max_margin(&h, 1e-12, 1000).unwrap();
        let off = offset_margin(
            &h,
            &[0.25, 0.25],
            plain.margin_lower - 0.25 - 1e-6,
            1e-12,
            100_000,
        );
        assert!(off.margin_lower >= plain.margin_lower - 0.25 - 1e-6);
        assert!(off.margin_upper >= off.margin_lower - 1e-12);
    }
}
