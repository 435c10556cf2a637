//! Standard-normal special functions and the Gardner second-moment integral.
//!
//! `f_gar(κ) = E[(G + κ)_+²]` for `G ~ N(0, 1)` is evaluated two ways: the
//! closed form `(1 + κ²)Φ(κ) + κφ(κ)` used in production, and adaptive
//! quadrature of the defining integral, which shares nothing with the closed
//! form beyond [`std_normal_pdf`].

// erfc coefficients are kept digit for digit as published
#![allow(clippy::excessive_precision)]

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::Result;
pub use crate::quadrature::{integrate, Integral, QuadratureSpec};

/// 1/√(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_87;

pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Φ(z), computed from a rational-approximation `erfc` with sub-ulp
/// relative error, so lower-tail values keep full relative precision.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Closed form of `(1/√(2π)) ∫_{-κ}^{∞} (g + κ)² e^{-g²/2} dg`.
pub fn f_gar(kappa: f64) -> f64 {
    (1.0 + kappa * kappa) * std_normal_cdf(kappa) + kappa * std_normal_pdf(kappa)
}

/// d/dκ f_gar(κ) = 2(κΦ(κ) + φ(κ)).
pub fn f_gar_derivative(kappa: f64) -> f64 {
    2.0 * (kappa * std_normal_cdf(kappa) + std_normal_pdf(kappa))
}

/// Upper integration limit `U ≥ max(lower, 0) + 1` such that the discarded tail
/// `∫_U^∞ (g + κ)² φ(g) dg = (1 + κ²)Q(U) + (U + 2κ)φ(U)` is provably below
/// `budget`, using the Mills bound `Q(U) ≤ φ(U)/U`.
fn tail_cutoff(kappa: f64, lower: f64, budget: f64) -> f64 {
    let mut upper = lower.max(0.0) + 1.0;
    loop {
        let phi = std_normal_pdf(upper);
        let bound = phi * ((1.0 + kappa * kappa) / upper + (upper + 2.0 * kappa).abs());
        if bound < budget || phi == 0.0 {
            return upper;
        }
        upper += 0.5;
    }
}

/// Adaptive-quadrature evaluation of the Gardner integral.
///
/// The upper limit is truncated where the analytic Gaussian tail bound drops
/// below `abs_tol / 2`; the remaining half of the budget goes to quadrature.
pub fn f_gar_quadrature(kappa: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let lower = -kappa;
    let upper = tail_cutoff(kappa, lower, 0.5 * spec.abs_tol);
    let inner = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol,
        ..*spec
    };
    let r = integrate(
        |g| {
            let t = g + kappa;
            t * t * std_normal_pdf(g)
        },
        lower,
        upper,
        &inner,
    )?;
    Ok(r.value)
}

// ---------------------------------------------------------------------------
// erfc: rational approximations from FreeBSD msun s_erf.c.
//
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
// Developed at SunPro, a Sun Microsystems, Inc. business.
// Permission to use, copy, modify, and distribute this software is freely
// granted, provided that this notice is preserved.
//
//  |x| < 0.84375:        erfc = 1 - (x + x·P/Q), P/Q rational in x²
//  0.84375 ≤ |x| < 1.25: erfc = 1 - erx - P1(s)/Q1(s), s = |x| - 1
//  1.25 ≤ |x| < 28:      erfc = exp(-x² - 0.5625 + R/S)/x, R/S rational in 1/x²
// Error bounds of the rational pieces are below 2^-57.
// ---------------------------------------------------------------------------

const ERX: f64 = 8.450_629_115_104_675_292_97e-01;
const PP0: f64 = 1.283_791_670_955_125_585_61e-01;
const PP1: f64 = -3.250_421_072_470_014_993_70e-01;
const PP2: f64 = -2.848_174_957_559_851_047_66e-02;
const PP3: f64 = -5.770_270_296_489_441_591_57e-03;
const PP4: f64 = -2.376_301_665_665_016_260_84e-05;
const QQ1: f64 = 3.979_172_239_591_553_528_19e-01;
const QQ2: f64 = 6.502_224_998_876_729_444_85e-02;
const QQ3: f64 = 5.081_306_281_875_765_627_76e-03;
const QQ4: f64 = 1.324_947_380_043_216_445_26e-04;
const QQ5: f64 = -3.960_228_278_775_368_123_20e-06;

const PA0: f64 = -2.362_118_560_752_659_440_77e-03;
const PA1: f64 = 4.148_561_186_837_483_316_66e-01;
const PA2: f64 = -3.722_078_760_357_013_238_47e-01;
const PA3: f64 = 3.183_466_199_011_617_536_74e-01;
const PA4: f64 = -1.108_946_942_823_966_774_76e-01;
const PA5: f64 = 3.547_830_432_561_823_593_71e-02;
const PA6: f64 = -2.166_375_594_868_790_843_00e-03;
const QA1: f64 = 1.064_208_804_008_442_282_86e-01;
const QA2: f64 = 5.403_979_177_021_710_489_37e-01;
const QA3: f64 = 7.182_865_441_419_626_628_68e-02;
const QA4: f64 = 1.261_712_198_087_616_421_12e-01;
const QA5: f64 = 1.363_708_391_202_905_073_62e-02;
const QA6: f64 = 1.198_449_984_679_910_741_70e-02;

const RA0: f64 = -9.864_944_034_847_148_227_05e-03;
const RA1: f64 = -6.938_585_727_071_817_643_72e-01;
const RA2: f64 = -1.055_862_622_532_329_098_14e+01;
const RA3: f64 = -6.237_533_245_032_600_603_96e+01;
const RA4: f64 = -1.623_966_694_625_734_703_55e+02;
const RA5: f64 = -1.846_050_929_067_110_359_94e+02;
const RA6: f64 = -8.128_743_550_630_659_342_46e+01;
const RA7: f64 = -9.814_329_344_169_145_485_92e+00;
const SA1: f64 = 1.965_127_166_743_925_712_92e+01;
const SA2: f64 = 1.376_577_541_435_190_426_00e+02;
const SA3: f64 = 4.345_658_774_752_292_288_21e+02;
const SA4: f64 = 6.453_872_717_332_678_803_36e+02;
const SA5: f64 = 4.290_081_400_275_678_333_86e+02;
const SA6: f64 = 1.086_350_055_417_794_351_34e+02;
const SA7: f64 = 6.570_249_770_319_281_701_35e+00;
const SA8: f64 = -6.042_441_521_485_809_874_38e-02;

const RB0: f64 = -9.864_942_924_700_099_285_97e-03;
const RB1: f64 = -7.992_832_376_805_230_065_74e-01;
const RB2: f64 = -1.775_795_491_775_475_198_89e+01;
const RB3: f64 = -1.606_363_848_558_219_160_62e+02;
const RB4: f64 = -6.375_664_433_683_896_277_22e+02;
const RB5: f64 = -1.025_095_131_611_077_249_54e+03;
const RB6: f64 = -4.835_191_916_086_513_970_19e+02;
const SB1: f64 = 3.033_806_074_348_245_829_24e+01;
const SB2: f64 = 3.257_925_129_965_739_188_26e+02;
const SB3: f64 = 1.536_729_586_084_436_959_94e+03;
const SB4: f64 = 3.199_858_219_508_595_539_08e+03;
const SB5: f64 = 2.553_050_406_433_164_425_83e+03;
const SB6: f64 = 4.745_285_412_069_553_672_15e+02;
const SB7: f64 = -2.244_095_244_658_581_833_62e+01;

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    let negative = x < 0.0;
    let ax = x.abs();
    if ax < 0.84375 {
        let t = if ax < 1.387_778_780_781_445_7e-17 {
            ax
        } else {
            let z = ax * ax;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            if ax < 0.25 {
                ax + ax * y
            } else {
                0.5 + (ax * y + (ax - 0.5))
            }
        };
        return if negative { 1.0 + t } else { 1.0 - t };
    }
    if ax < 1.25 {
        let s = ax - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if negative {
            1.0 + ERX + p / q
        } else {
            1.0 - ERX - p / q
        };
    }
    if ax >= 28.0 {
        return if negative { 2.0 } else { 0.0 };
    }
    let s = 1.0 / (ax * ax);
    let (r, ss) = if ax < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s
                * (SA1
                    + s * (SA2
                        + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        if negative && ax > 6.0 {
            return 2.0;
        }
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    // split x so that exp(-x²) is formed without cancellation
    let z = f64::from_bits(ax.to_bits() & 0xffff_ffff_0000_0000);
    let e = (-z * z - 0.5625).exp() * ((z - ax) * (z + ax) + r / ss).exp();
    if negative {
        2.0 - e / ax
    } else {
        e / ax
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_values() {
        assert_eq!(std_normal_pdf(0.0), 0.398_942_280_401_432_7);
        let independent = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((std_normal_pdf(1.0) - independent).abs() <= 1e-15);
        for z in [0.3, 1.7, 4.2, 9.0] {
            assert_eq!(std_normal_pdf(z), std_normal_pdf(-z));
        }
    }

    #[test]
    fn cdf_symmetry_and_tails() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!(std_normal_cdf(8.0) >= 1.0 - 1e-15);
        let mut z = -10.0;
        while z <= 10.0 {
            let s = std_normal_cdf(z) + std_normal_cdf(-z);
            assert!((s - 1.0).abs() <= 1e-14, "z={z}: {s}");
            z += 0.037;
        }
    }

    #[test]
    fn cdf_matches_quadrature_of_pdf() {
        let spec = QuadratureSpec::tight();
        let q = integrate(std_normal_pdf, -40.0, 1.0, &spec).unwrap();
        assert!((std_normal_cdf(1.0) - q.value).abs() <= 1e-12);
    }

    #[test]
    fn erfc_reference_points() {
        // erfc(0.5), erfc(1), erfc(2), erfc(3) to 17 digits
        let cases = [
            (0.5, 0.479_500_122_186_953_46),
            (1.0, 0.157_299_207_050_285_13),
            (2.0, 4.677_734_981_047_265_8e-3),
            (3.0, 2.209_049_699_858_544e-5),
        ];
        for (x, expected) in cases {
            let rel = (erfc(x) - expected).abs() / expected;
            assert!(rel < 1e-15, "erfc({x}) rel err {rel}");
        }
    }

    #[test]
    fn f_gar_at_zero_is_half() {
        assert!((f_gar(0.0) - 0.5).abs() < 1e-16);
        let q = f_gar_quadrature(0.0, &QuadratureSpec::default()).unwrap();
        assert!((q - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn f_gar_matches_quadrature_at_named_points() {
        let spec = QuadratureSpec::tight();
        for k in [-3.0, -2.0, -1.0, 0.0, 0.5, 1.0, 3.0] {
            let q = f_gar_quadrature(k, &spec).unwrap();
            assert!(
                (f_gar(k) - q).abs() <= 1e-10,
                "kappa={k}: {} vs {q}",
                f_gar(k)
            );
        }
        assert!(f_gar(-2.0) > 0.0 && f_gar(-2.0) < 0.01);
    }

    #[test]
    fn forced_quadrature_failure() {
        let spec = QuadratureSpec {
            abs_tol: 1e-15,
            max_subdivisions: 1,
            ..QuadratureSpec::default()
        };
        assert!(matches!(
            f_gar_quadrature(0.0, &spec),
            Err(crate::Error::ToleranceNotMet { .. })
        ));
    }

    #[test]
    fn asymptotics() {
        let k: f64 = 10.0;
        assert!((f_gar(k) / (1.0 + k * k) - 1.0).abs() < 1e-3);
        assert!(f_gar(-8.0) < 1e-12);
        assert!(f_gar(-8.0) > 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for k in [-2.0, -0.3, 0.0, 0.7, 2.5] {
            let h = 1e-5;
            let fd = (f_gar(k + h) - f_gar(k - h)) / (2.0 * h);
            assert!((fd - f_gar_derivative(k)).abs() < 1e-8);
        }
    }
}
