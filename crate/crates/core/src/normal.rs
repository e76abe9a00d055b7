//! Standard normal density, distribution function and quantile function.
//!
//! The quantile function is Wichura's AS 241 (PPND16) rational approximation,
//! accurate to roughly 1e-16 relative over the open unit interval. Arguments are
//! clamped to `[MIN_PROB, 1 - MIN_PROB]` so callers never see infinities.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Smallest probability handed to the quantile function; smaller arguments are clamped.
pub const MIN_PROB: f64 = 1e-15;

#[inline]
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Quantile function of N(0, 1).
pub fn inv_cdf(p: f64) -> f64 {
    let p = p.clamp(MIN_PROB, 1.0 - MIN_PROB);
    let q = p - 0.5;

    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }

    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };

    if q < 0.0 {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent route: bisection on erfc, working in whichever tail is smaller.
    fn bisect_quantile(p: f64) -> f64 {
        let upper = p > 0.5;
        let target = if upper { 1.0 - p } else { p };
        let (mut lo, mut hi) = (-40.0_f64, 0.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 0.5 * libm::erfc(-mid * FRAC_1_SQRT_2) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        if upper {
            -x
        } else {
            x
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(inv_cdf(0.5), 0.0);
        assert!((inv_cdf(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((inv_cdf(0.025) + 1.959_963_984_540_054).abs() < 1e-14);
        assert!((inv_cdf(0.841_344_746_068_542_9) - 1.0).abs() < 1e-12);
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn matches_bisection_oracle() {
        let mut probes = vec![1e-15, 1e-12, 1e-9, 1e-6, 1e-3, 0.02425, 0.075, 0.2, 0.5];
        let upper: Vec<f64> = probes.iter().map(|p| 1.0 - p).collect();
        probes.extend(upper);
        for k in 1..200 {
            probes.push(k as f64 / 200.0);
        }
        for &p in &probes {
            let oracle = bisect_quantile(p);
            let got = inv_cdf(p);
            assert!(
                (got - oracle).abs() <= 1e-9,
                "p = {p}: inv_cdf {got} vs bisection {oracle}"
            );
        }
    }

    #[test]
    fn clamped_outside_unit_interval() {
        assert_eq!(inv_cdf(0.0), inv_cdf(MIN_PROB));
        assert_eq!(inv_cdf(1.0), inv_cdf(1.0 - MIN_PROB));
        assert!(inv_cdf(0.0).is_finite());
    }

    #[test]
    fn odd_symmetry() {
        for k in 1..100 {
            let p = k as f64 / 100.0 * 0.5;
            assert!((inv_cdf(p) + inv_cdf(1.0 - p)).abs() < 1e-12);
        }
    }
}
