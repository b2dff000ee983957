//! Small statistical helpers shared by the checks and experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// A chi-square goodness-of-fit statistic with its degrees of freedom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u64,
}

impl ChiSquare {
    /// Statistic of observed counts against the uniform null.
    pub fn from_counts_uniform(counts: &[u64], total: u64) -> Self {
        let expected = total as f64 / counts.len() as f64;
        let statistic = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        Self {
            statistic,
            df: counts.len() as u64 - 1,
        }
    }

    /// Statistic of observed counts against given cell probabilities.
    ///
    /// `probs` need not be normalized; they are rescaled to sum to one.
    pub fn from_counts_weighted(counts: &[u64], probs: &[f64], total: u64) -> Self {
        assert_eq!(counts.len(), probs.len());
        let mass: f64 = probs.iter().sum();
        let statistic = counts
            .iter()
            .zip(probs)
            .map(|(&c, &p)| {
                let expected = total as f64 * p / mass;
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        Self {
            statistic,
            df: counts.len() as u64 - 1,
        }
    }

    /// True when the statistic stays below the critical value at `level`.
    pub fn passes(&self, level: f64) -> bool {
        self.statistic <= chi_square_critical(self.df, level)
    }
}

/// Critical value of the chi-square distribution at cumulative `level`.
pub fn chi_square_critical(df: u64, level: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(level)
}

/// Sample mean, unbiased sample variance, and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl SampleStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n >= 1, "need at least one sample");
        let mean = samples.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)
        } else {
            0.0
        };
        Self {
            n,
            mean,
            variance,
            std_error: (variance / n as f64).sqrt(),
        }
    }
}

/// Least-squares slope of log(y) against log(x).
///
/// Pairs with non-positive y are skipped; returns NaN when fewer than
/// two usable pairs remain.
pub fn log_log_slope(pairs: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
