//! Analytic storage capacity of the spherical perceptron.
//!
//! Uncorrelated patterns: `α_c(κ) = 1 / f_gar(κ)`, exact for `κ ≥ 0` and a
//! rigorous upper bound for `κ < 0`.
//!
//! Correlated (biased ±1) patterns with bias `m_a`: with `s = √(1 − m_a²)`,
//!
//! ```text
//! F(v) = (1+m_a)/2 · f_gar((κ − v·m_a)/s) + (1−m_a)/2 · f_gar((κ + v·m_a)/s)
//! f_cor(κ) = min_v F(v),    α_c = 1 / f_cor(κ)
//! ```
//!
//! The value is exact when `κ ≥ v_opt·m_a` (equivalently `κ_adj ≥ 0`) and an
//! upper bound otherwise. `F` is convex in `v` (a positive combination of a
//! convex increasing function of affine maps), so its minimizer is unique.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{f_gar, f_gar_derivative};

/// Bias of the ±1 pattern entries: `P(+1) = (1 + m_a)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationParams {
    m_a: f64,
}

impl CorrelationParams {
    pub fn new(m_a: f64) -> Result<Self> {
        if !m_a.is_finite() || !(0.0..1.0).contains(&m_a) {
            return Err(invalid(format!("m_a must satisfy 0 <= m_a < 1, got {m_a}")));
        }
        Ok(Self { m_a })
    }

    pub fn uncorrelated() -> Self {
        Self { m_a: 0.0 }
    }

    pub fn m_a(&self) -> f64 {
        self.m_a
    }

    /// √(1 − m_a²)
    pub fn scale(&self) -> f64 {
        (1.0 - self.m_a * self.m_a).sqrt()
    }

    /// Arguments `(a₋, a₊)` of the two `f_gar` terms.
    pub fn shifted_margins(&self, kappa: f64, v: f64) -> (f64, f64) {
        let s = self.scale();
        ((kappa - v * self.m_a) / s, (kappa + v * self.m_a) / s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exactness {
    Exact,
    UpperBoundOnly,
}

impl Exactness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Exactness::Exact => "Exact",
            Exactness::UpperBoundOnly => "UpperBoundOnly",
        }
    }
}

impl std::fmt::Display for Exactness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub kappa: f64,
    pub f_value: f64,
    pub alpha_c: f64,
    pub exactness: Exactness,
    pub v_opt: Option<f64>,
    pub kappa_adj: Option<f64>,
}

/// Bracket and stopping rule for the one-dimensional minimization over `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMinimizeSpec {
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ScalarMinimizeSpec {
    fn default() -> Self {
        Self {
            bracket_lo: -50.0,
            bracket_hi: 50.0,
            tol: 1e-10,
            max_iters: 200,
        }
    }
}

impl ScalarMinimizeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.bracket_lo < self.bracket_hi)
            || !self.bracket_lo.is_finite()
            || !self.bracket_hi.is_finite()
        {
            return Err(invalid(format!(
                "bracket must satisfy lo < hi, got [{}, {}]",
                self.bracket_lo, self.bracket_hi
            )));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("minimizer tol must be > 0"));
        }
        Ok(())
    }
}

/// Minimum of the correlated objective and its minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatedMinimum {
    pub f_value: f64,
    pub v_opt: f64,
}

const COARSE_POINTS: usize = 401;
const ROOT_TOL: f64 = 1e-8;
const CRITICAL_SEARCH: (f64, f64) = (-5.0, 5.0);
const MAX_BRACKET_DOUBLINGS: usize = 8;

pub fn alpha_c_uncorrelated(kappa: f64) -> CapacityResult {
    let f_value = f_gar(kappa);
    CapacityResult {
        kappa,
        f_value,
        alpha_c: 1.0 / f_value,
        exactness: if kappa >= 0.0 {
            Exactness::Exact
        } else {
            Exactness::UpperBoundOnly
        },
        v_opt: None,
        kappa_adj: None,
    }
}

/// The bracketed objective `F(v)` before minimization over `v`.
pub fn f_gar_cor_objective(kappa: f64, v: f64, params: CorrelationParams) -> f64 {
    let m = params.m_a();
    let (a_minus, a_plus) = params.shifted_margins(kappa, v);
    0.5 * (1.0 + m) * f_gar(a_minus) + 0.5 * (1.0 - m) * f_gar(a_plus)
}

/// dF/dv; nondecreasing in `v`.
fn objective_slope(kappa: f64, v: f64, params: CorrelationParams) -> f64 {
    let m = params.m_a();
    let (a_minus, a_plus) = params.shifted_margins(kappa, v);
    (m / params.scale())
        * (0.5 * (1.0 - m) * f_gar_derivative(a_plus) - 0.5 * (1.0 + m) * f_gar_derivative(a_minus))
}

/// Minimizes `F(v)` over the bracket.
///
/// A coarse scan locates the basin and rejects brackets whose smallest value
/// sits at an endpoint. Golden-section search then narrows the basin, and the
/// result is polished by bisection on the analytic slope, which resolves
/// `v_opt` well below the resolution that value comparisons allow.
pub fn f_gar_cor(
    kappa: f64,
    params: CorrelationParams,
    spec: &ScalarMinimizeSpec,
) -> Result<CorrelatedMinimum> {
    spec.validate()?;
    if !kappa.is_finite() {
        return Err(invalid("kappa must be finite"));
    }
    if params.m_a() == 0.0 {
        return Ok(CorrelatedMinimum {
            f_value: f_gar(kappa),
            v_opt: 0.0,
        });
    }
    let objective = |v: f64| f_gar_cor_objective(kappa, v, params);

    let (lo, hi) = (spec.bracket_lo, spec.bracket_hi);
    let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let samples: Vec<f64> = (0..COARSE_POINTS)
        .map(|i| objective(lo + step * i as f64))
        .collect();
    let (best, _) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("coarse scan is nonempty");
    let interior_min = samples[1..COARSE_POINTS - 1]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if samples[0] < interior_min || samples[COARSE_POINTS - 1] < interior_min {
        return Err(Error::BracketNotMinimizing { lo, hi });
    }

    let mut a = lo + step * best.saturating_sub(1) as f64;
    let mut b = lo + step * (best + 1).min(COARSE_POINTS - 1) as f64;

    // golden section
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    let mut iters = 0;
    while (b - a) > spec.tol && iters < spec.max_iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
        iters += 1;
    }
    let mut v_opt = if fc <= fd { c } else { d };
    let mut f_value = fc.min(fd);

    // slope polish: widen until the slope changes sign, then bisect
    let mut width = (b - a).max(spec.tol);
    let (mut left, mut right) = (v_opt - width, v_opt + width);
    let mut widened = 0;
    while !(objective_slope(kappa, left, params) <= 0.0
        && objective_slope(kappa, right, params) >= 0.0)
        && widened < 60
    {
        width *= 2.0;
        left = v_opt - width;
        right = v_opt + width;
        widened += 1;
    }
    if widened < 60 {
        for _ in 0..200 {
            let mid = 0.5 * (left + right);
            if mid <= left || mid >= right {
                break;
            }
            if objective_slope(kappa, mid, params) > 0.0 {
                right = mid;
            } else {
                left = mid;
            }
        }
        let polished = 0.5 * (left + right);
        let fp = objective(polished);
        if fp <= f_value + 4.0 * f64::EPSILON * f_value.abs() {
            v_opt = polished;
            f_value = fp.min(f_value);
        }
    }
    Ok(CorrelatedMinimum { f_value, v_opt })
}

/// `κ_adj = (κ − v_opt·m_a)/√(1 − m_a²)`.
pub fn kappa_adj(kappa: f64, params: CorrelationParams) -> Result<f64> {
    let min = f_gar_cor(kappa, params, &ScalarMinimizeSpec::default())?;
    Ok(adjusted(kappa, min.v_opt, params))
}

fn adjusted(kappa: f64, v_opt: f64, params: CorrelationParams) -> f64 {
    (kappa - v_opt * params.m_a()) / params.scale()
}

/// The margin `κ^(c)` at which `κ_adj` vanishes, found by bisection on
/// `κ ↦ κ_adj(κ)`. The search interval starts at [-5, 5] and doubles until
/// the sign changes.
pub fn kappa_critical(params: CorrelationParams, tol: f64) -> Result<f64> {
    if params.m_a() <= 0.0 {
        return Err(invalid("kappa_critical requires 0 < m_a < 1"));
    }
    if !(tol > 0.0) {
        return Err(invalid("root tol must be > 0"));
    }
    let (mut lo, mut hi) = CRITICAL_SEARCH;
    let mut f_lo = kappa_adj(lo, params)?;
    let mut f_hi = kappa_adj(hi, params)?;
    let mut doublings = 0;
    while f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        if doublings == MAX_BRACKET_DOUBLINGS {
            return Err(Error::NoSignChange { lo, hi });
        }
        lo *= 2.0;
        hi *= 2.0;
        f_lo = kappa_adj(lo, params)?;
        f_hi = kappa_adj(hi, params)?;
        doublings += 1;
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let increasing = f_hi > 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let f_mid = kappa_adj(mid, params)?;
        if f_mid.abs() <= tol && (hi - lo) <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if (f_mid > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Default root tolerance used by [`kappa_critical`] callers.
pub fn default_root_tol() -> f64 {
    ROOT_TOL
}

pub fn alpha_c_correlated(kappa: f64, params: CorrelationParams) -> Result<CapacityResult> {
    if params.m_a() == 0.0 {
        let mut r = alpha_c_uncorrelated(kappa);
        r.v_opt = Some(0.0);
        r.kappa_adj = Some(kappa);
        return Ok(r);
    }
    let min = f_gar_cor(kappa, params, &ScalarMinimizeSpec::default())?;
    let k_adj = adjusted(kappa, min.v_opt, params);
    Ok(CapacityResult {
        kappa,
        f_value: min.f_value,
        alpha_c: 1.0 / min.f_value,
        exactness: if k_adj >= 0.0 {
            Exactness::Exact
        } else {
            Exactness::UpperBoundOnly
        },
        v_opt: Some(min.v_opt),
        kappa_adj: Some(k_adj),
    })
}
