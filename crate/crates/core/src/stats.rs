//! Small statistical helpers shared by campaigns, audits and the oracle.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    pub fn shift(&self, by: f64) -> Interval {
        Interval { low: self.low + by, high: self.high + by }
    }
}

/// Wilson score interval at 95% for `successes` out of `trials`.
/// With no trials the interval is `[0, 1]`.
pub fn wilson_interval(successes: u64, trials: u64) -> Interval {
    if trials == 0 {
        return Interval { low: 0.0, high: 1.0 };
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    Interval { low, high }
}

/// `Pr[X < low or X > high]` for `X ~ Bin(n, p)`.
pub fn binomial_two_tail(n: u64, p: f64, low: u64, high: u64) -> f64 {
    let bin = Binomial::new(p, n).expect("valid binomial");
    let below = if low == 0 { 0.0 } else { bin.cdf(low - 1) };
    let above = if high >= n { 0.0 } else { bin.sf(high) };
    below + above
}

/// Quantile `q` of the chi-squared law with `df` degrees of freedom.
pub fn chi_squared_quantile(df: f64, q: f64) -> f64 {
    ChiSquared::new(df).expect("positive df").inverse_cdf(q)
}

/// DKW half-width: with probability at least `1 - alpha`, every empirical CDF
/// value from `trials` samples is within this distance of the true one.
pub fn dkw_band(trials: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * trials as f64)).sqrt()
}

/// Standard deviation of a binomial proportion.
pub fn proportion_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_estimate() {
        let ci = wilson_interval(30, 100);
        assert!(ci.contains(0.3));
        assert!(ci.low > 0.2 && ci.high < 0.4);
        let zero = wilson_interval(0, 1000);
        assert_eq!(zero.low, 0.0);
        assert!(zero.high < 0.005);
    }

    #[test]
    fn binomial_tail_is_symmetric_at_half() {
        let t = binomial_two_tail(100, 0.5, 30, 70);
        let one_side = Binomial::new(0.5, 100).unwrap().cdf(29);
        assert!((t - 2.0 * one_side).abs() < 1e-15);
        assert_eq!(binomial_two_tail(10, 0.5, 0, 10), 0.0);
    }

    #[test]
    fn chi_squared_median_of_two_df() {
        // For two degrees of freedom the CDF is 1 - exp(-x/2).
        let x = chi_squared_quantile(2.0, 0.5);
        assert!((x - 2.0 * 2f64.ln()).abs() < 1e-9);
    }
}
