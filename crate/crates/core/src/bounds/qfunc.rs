//! Gaussian tail function and its inverse.
//!
//! `erfc` follows the SunPro/FreeBSD `s_erf.c` rational approximations
//! (relative error below 2^-57 on each interval).
//!
//! Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//! Developed at SunPro, a Sun Microsystems, Inc. business.
//! Permission to use, copy, modify, and distribute this software is freely
//! granted, provided that this notice is preserved.

use crate::error::{Error, Result};

const ERX: f64 = 8.45062911510467529297e-01;

// coefficients for approximation to  erf in [0, 0.84375]
const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;

// coefficients for approximation to  erf  in [0.84375, 1.25]
const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;

// coefficients for approximation to  erfc in [1.25, 1/0.35]
const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;

// coefficients for approximation to  erfc in [1/.35, 28]
const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

// 2**-56
const TINY: f64 = 1.387_778_780_781_445_7e-17;

/// Complementary error function.
#[allow(clippy::excessive_precision)]
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
    let x = x.abs();
    if x < 0.84375 {
        let y = if x < TINY {
            0.0
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            r / s
        };
        if negative {
            return 1.0 + (x + x * y);
        }
        if x < 0.25 {
            return 1.0 - (x + x * y);
        }
        return 0.5 - (x * y + (x - 0.5));
    }
    if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if negative { 1.0 + ERX + p / q } else { 1.0 - ERX - p / q };
    }
    if x >= 28.0 {
        return if negative { 2.0 } else { 0.0 };
    }
    if negative && x > 6.0 {
        return 2.0;
    }
    let s = 1.0 / (x * x);
    let (r, big_s) = if x < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s * (SA1 + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    let v = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + r / big_s).exp() / x;
    if negative {
        2.0 - v
    } else {
        v
    }
}

/// `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`q_function`] on `(0, 1)`: safeguarded Newton on `ln Q`
/// inside a bisection bracket of `[-40, 40]`.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("q_inverse needs 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        return Ok(-upper_tail_inverse(1.0 - p));
    }
    Ok(upper_tail_inverse(p))
}

fn upper_tail_inverse(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let target = p.ln();
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    // tail asymptote as the starting point
    let mut x = (-2.0 * target).sqrt().clamp(lo, hi);
    for _ in 0..200 {
        let q = q_function(x);
        if q == p {
            return x;
        }
        if q > p {
            lo = x;
        } else {
            hi = x;
        }
        let pdf = gaussian_pdf(x);
        let mut next = if q > 0.0 && pdf > 0.0 { x + (q.ln() - target) * q / pdf } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) || hi - lo <= 1e-15 * hi.max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_reference_values() {
        // high-precision reference values
        let table = [
            (0.0, 1.0),
            (0.1, 0.887_537_083_981_715_1),
            (0.5, 0.479_500_122_186_953_5),
            (1.0, 0.157_299_207_050_285_13),
            (2.0, 0.004_677_734_981_047_266),
            (3.0, 2.209_049_699_858_544e-5),
            (5.0, 1.537_459_794_428_035e-12),
            (-1.0, 1.842_700_792_949_715),
        ];
        for (x, want) in table {
            let got = erfc(x);
            assert!((got - want).abs() < 1e-15_f64.max(1e-14 * want), "erfc({x}) = {got}, want {want}");
        }
        assert_eq!(erfc(f64::INFINITY), 0.0);
        assert_eq!(erfc(f64::NEG_INFINITY), 2.0);
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_function(0.0), 0.5);
        assert_eq!(q_inverse(0.5).unwrap(), 0.0);
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!(q_inverse(0.0).is_err());
        assert!(q_inverse(1.0).is_err());
    }

    #[test]
    fn q_round_trip() {
        use rand::Rng;
        let mut rng = crate::rng::SeedStream::new(3).rng();
        for _ in 0..10 {
            let p: f64 = rng.random_range(1e-6..1.0 - 1e-6);
            let x = q_inverse(p).unwrap();
            assert!((q_function(x) - p).abs() < 1e-12, "p={p}");
        }
        for p in [1e-300, 1e-100, 1e-20, 1e-9, 0.3, 0.7, 1.0 - 1e-12] {
            let x = q_inverse(p).unwrap();
            assert!((q_function(x) - p).abs() <= 1e-12 * p.max(1e-12), "p={p}");
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn inverse_of_q(x in -6.0f64..6.0) {
                let p = q_function(x);
                let back = q_inverse(p).unwrap();
                // rounding of p itself moves the exact preimage by ulp(p) / pdf(x)
                let ulp = f64::EPSILON * p;
                let tol = 1e-9 + 2.0 * ulp / gaussian_pdf(x);
                prop_assert!((back - x).abs() < tol, "{} -> {}", x, back);
            }

            #[test]
            fn q_is_decreasing(a in -30.0f64..30.0, b in -30.0f64..30.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(q_function(lo) >= q_function(hi));
            }
        }
    }
}
