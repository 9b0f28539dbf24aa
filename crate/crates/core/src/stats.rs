//! Sample statistics, the standard normal law and a one-sample KS statistic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::compensated_sum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("log-log fit needs positive data, got ({0}, {1})")]
    NonPositiveData(f64, f64),
    #[error("x and y lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("all x values are equal; slope is undefined")]
    DegenerateDesign,
}

fn require(samples: &[f64], needed: usize) -> Result<(), StatsError> {
    if samples.len() < needed {
        Err(StatsError::TooFewSamples {
            needed,
            got: samples.len(),
        })
    } else {
        Ok(())
    }
}

pub fn mean(samples: &[f64]) -> Result<f64, StatsError> {
    require(samples, 1)?;
    Ok(compensated_sum(samples.iter().copied()) / samples.len() as f64)
}

/// Unbiased variance (divisor `R - 1`).
pub fn sample_variance(samples: &[f64]) -> Result<f64, StatsError> {
    require(samples, 2)?;
    let m = mean(samples)?;
    let ss = compensated_sum(samples.iter().map(|x| (x - m) * (x - m)));
    Ok(ss / (samples.len() - 1) as f64)
}

/// Central moments `m_k` with divisor `R`, for k = 2, 3, 4.
fn central_moments(samples: &[f64]) -> Result<(f64, f64, f64), StatsError> {
    let m = mean(samples)?;
    let r = samples.len() as f64;
    let m2 = compensated_sum(samples.iter().map(|x| (x - m).powi(2))) / r;
    let m3 = compensated_sum(samples.iter().map(|x| (x - m).powi(3))) / r;
    let m4 = compensated_sum(samples.iter().map(|x| (x - m).powi(4))) / r;
    Ok((m2, m3, m4))
}

/// `m_3 / m_2^{3/2}`.
pub fn skewness(samples: &[f64]) -> Result<f64, StatsError> {
    require(samples, 2)?;
    let (m2, m3, _) = central_moments(samples)?;
    if !(m2 > 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    Ok(m3 / m2.powf(1.5))
}

/// `m_4 / m_2^2 - 3`.
pub fn excess_kurtosis(samples: &[f64]) -> Result<f64, StatsError> {
    require(samples, 4)?;
    let (m2, _, m4) = central_moments(samples)?;
    if !(m2 > 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Moment summary; a field is `None` when its statistic is undefined for
/// the sample (too short or constant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryMoments {
    pub mean: f64,
    pub variance: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

pub fn summary_moments(samples: &[f64]) -> Result<SummaryMoments, StatsError> {
    Ok(SummaryMoments {
        mean: mean(samples)?,
        variance: sample_variance(samples).ok(),
        skewness: skewness(samples).ok(),
        excess_kurtosis: excess_kurtosis(samples).ok(),
    })
}

/// `(x - center) / sigma`, elementwise.
pub fn standardize(samples: &[f64], center: f64, sigma: f64) -> Result<Vec<f64>, StatsError> {
    if !(sigma > 0.0) {
        return Err(StatsError::NonPositiveScale(sigma));
    }
    Ok(samples.iter().map(|x| (x - center) / sigma).collect())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation polished by
/// one Halley step against [`normal_cdf`].
pub fn normal_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - P_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - u;
    let g = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - g / (1.0 + x * g / 2.0)
}

/// Kolmogorov–Smirnov distance between the sample ECDF and `N(0, 1)`.
/// Returns 0 for an empty sample.
pub fn ks_statistic(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let cdf = normal_cdf(x);
            ((k + 1) as f64 / r - cdf).abs().max((cdf - k as f64 / r).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 5% critical value of the one-sample KS statistic.
pub fn ks_critical_5pct(r: usize) -> f64 {
    1.358 / (r as f64).sqrt()
}

/// Least squares fit of `ln y = slope * ln x + intercept`.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    require(xs, 2)?;
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0) {
            return Err(StatsError::NonPositiveData(x, y));
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = mean(&lx)?;
    let my = mean(&ly)?;
    let sxx = compensated_sum(lx.iter().map(|x| (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return Err(StatsError::DegenerateDesign);
    }
    let sxy = compensated_sum(lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Pearson correlation coefficient.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    require(xs, 2)?;
    let mx = mean(xs)?;
    let my = mean(ys)?;
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let syy = compensated_sum(ys.iter().map(|y| (y - my) * (y - my)));
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson integration of the standard normal density.
    fn cdf_by_quadrature(x: f64) -> f64 {
        let density = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let (a, steps) = (-12.0, 20_000);
        let h = (x - a) / steps as f64;
        let mut s = density(a) + density(x);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * density(a + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn normal_cdf_table_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.8413447).abs() < 1e-7);
        assert!((normal_cdf(-1.96) - 0.0249979).abs() < 1e-7);
    }

    #[test]
    fn normal_cdf_matches_quadrature() {
        let mut x = -8.0;
        while x <= 8.0 {
            assert!((normal_cdf(x) - cdf_by_quadrature(x)).abs() < 1e-7, "x = {x}");
            x += 0.37;
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            assert!((normal_cdf(normal_quantile(u)) - u).abs() < 1e-12);
        }
        for &u in &[1e-10, 1e-5, 0.01, 0.99, 1.0 - 1e-9] {
            assert!((normal_cdf(normal_quantile(u)) - u).abs() / u.min(1.0 - u) < 1e-8);
        }
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize(&[1.0, 2.0, 3.0], 2.0, 1.0).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(standardize(&[5.0], 5.0, 2.0).unwrap(), vec![0.0]);
        assert_eq!(standardize(&[0.0, 10.0], 5.0, 5.0).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(standardize(&[1.0], 0.0, 0.0), Err(StatsError::NonPositiveScale(0.0)));
        assert!(standardize(&[1.0], 0.0, -1.0).is_err());
    }

    #[test]
    fn moment_examples() {
        let s = summary_moments(&[-1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.variance, Some(2.0));
        assert_eq!(s.skewness, Some(0.0));

        let s = summary_moments(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.variance, Some(0.0));
        assert_eq!(s.skewness, None);
        assert_eq!(skewness(&[0.0, 0.0, 0.0]), Err(StatsError::ZeroVariance));
        assert_eq!(excess_kurtosis(&[0.0; 4]), Err(StatsError::ZeroVariance));

        let s = summary_moments(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.variance.unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!(s.skewness.unwrap().abs() < 1e-15);
        assert!((s.excess_kurtosis.unwrap() + 1.36).abs() < 1e-12);

        assert!(sample_variance(&[1.0]).is_err());
        assert!(mean(&[]).is_err());
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[0.0]), 0.5);
        assert!((ks_statistic(&[-1.0, 1.0]) - 0.3413447).abs() < 1e-7);
        let r = 100;
        let q: Vec<f64> = (1..=r)
            .map(|k| normal_quantile((k as f64 - 0.5) / r as f64))
            .collect();
        assert!((ks_statistic(&q) - 0.005).abs() < 1e-12);
    }

    #[test]
    fn log_slope_examples() {
        let xs = [1.0, 2.0, 5.0, 10.0];
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((fit_log_slope(&xs, &sq).unwrap().0 - 2.0).abs() < 1e-12);
        assert!(fit_log_slope(&xs, &[3.0; 4]).unwrap().0.abs() < 1e-12);
        let e = std::f64::consts::E;
        assert!((fit_log_slope(&[1.0, e], &[1.0, e.powi(3)]).unwrap().0 - 3.0).abs() < 1e-12);
        assert!(fit_log_slope(&[1.0], &[1.0]).is_err());
        assert!(fit_log_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn standardized_empirical_center_has_zero_mean(xs in proptest::collection::vec(-1e6f64..1e6, 2..200)) {
            let m = mean(&xs).unwrap();
            let z = standardize(&xs, m, 3.0).unwrap();
            let spread = xs.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
            prop_assert!(mean(&z).unwrap().abs() < 1e-12 * spread);
        }

        #[test]
        fn ks_is_a_probability_distance(xs in proptest::collection::vec(-10f64..10.0, 1..100)) {
            let d = ks_statistic(&xs);
            prop_assert!(d >= 1.0 / (2.0 * xs.len() as f64) - 1e-12 && d <= 1.0);
        }
    }
}
