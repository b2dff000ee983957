//! Convergence experiments: replicated variance of quadrature rules
//! across a range of sample sizes, with a plain Monte Carlo control.
//!
//! For each resolution m the scrambled-net method rebuilds the base
//! point set with n = b^m points and measures the sample variance of
//! the estimate over independently keyed replicates. The Monte Carlo
//! control draws n points per replicate by descending the same split
//! trees along uniformly random digit strings, so both methods share
//! the sampling geometry and differ only in how digits are produced.
//! Empirical rates are summarized by the log-log slope of variance
//! against n over the larger half of the resolutions.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::default_depth;
use crate::nets::{faure_net, vdc_points, NetError, PointSet};
use crate::quad::catalog::by_name;
use crate::quad::{replicate_variance, Integrand, QuadError};
use crate::regions::transform::descend;
use crate::regions::{ProductSpace, RegionError, RegionPoint};
use crate::scramble::{absorb, mix};
use crate::stats::{log_log_slope, SampleStats};

/// Domain separator for the Monte Carlo digit stream, so control
/// replicates never share randomness with scramble keys.
const MC_TAG: u64 = 0x4d43_5f43_4f4e_5452;

/// Cap on points per net.
const MAX_POINTS: u128 = 1 << 22;
/// Cap on total point evaluations across a run.
const MAX_EVALS: u128 = 1 << 31;

/// Estimation strategy being profiled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "scrambled-geometric-net")]
    ScrambledNet,
    #[serde(rename = "plain-MC")]
    MonteCarlo,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ScrambledNet => "scrambled-geometric-net",
            Method::MonteCarlo => "plain-MC",
        }
    }
}

/// Full description of one convergence run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub integrand: String,
    pub base: u32,
    pub m_min: u32,
    pub m_max: u32,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("unknown integrand {0:?}")]
    UnknownIntegrand(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("resolution range {m_min}..={m_max} is empty")]
    BadRange { m_min: u32, m_max: u32 },
    #[error("run needs {0} point evaluations, over the budget of {MAX_EVALS}")]
    BudgetExceeded(u128),
}

/// One (method, resolution) cell of a convergence run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub method: Method,
    pub m: u32,
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

/// Rows for every (method, resolution) pair plus fitted rates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub slopes: Vec<(Method, f64)>,
}

/// Draws one digit uniformly from 0..base, rejecting draws past the
/// largest exact multiple of the base.
fn uniform_digit(rng: &mut ChaCha8Rng, base: u32) -> u8 {
    let zone = u64::MAX - u64::MAX % base as u64;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % base as u64) as u8;
        }
    }
}

/// Mean of the integrand over n independent uniform points, produced by
/// descending each factor's split tree along random digit strings.
fn monte_carlo_estimate(
    f: &Integrand,
    space: &ProductSpace,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64, ExperimentError> {
    let base = space.base();
    let depth = default_depth(base);
    let mut digits = vec![0u8; depth];
    let mut coords = vec![RegionPoint::one(0.0); space.s()];
    let mut sum = 0.0;
    for _ in 0..n {
        for (j, c) in coords.iter_mut().enumerate() {
            for d in digits.iter_mut() {
                *d = uniform_digit(rng, base);
            }
            let factor = space.factor(j);
            *c = descend(&factor.root, factor.rule.as_ref(), &digits)?;
        }
        sum += f.eval(&coords);
    }
    Ok(sum / n as f64)
}

fn monte_carlo_stats(
    f: &Integrand,
    space: &ProductSpace,
    n: usize,
    seed: u64,
    m: u32,
    replicates: usize,
) -> Result<SampleStats, ExperimentError> {
    let estimates = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let stream = absorb(absorb(absorb(mix(seed), MC_TAG), m as u64), r as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            monte_carlo_estimate(f, space, n, &mut rng)
        })
        .collect::<Result<Vec<f64>, ExperimentError>>()?;
    Ok(SampleStats::from_samples(&estimates))
}

/// Builds the base point set for resolution m: a radical-inverse
/// sequence when there is a single coordinate, a digital net otherwise.
pub fn base_point_set(base: u32, s: usize, m: u32) -> Result<PointSet, NetError> {
    if s == 1 {
        vdc_points(base, (base as usize).pow(m))
    } else {
        faure_net(base, s, m)
    }
}

/// Runs the full convergence experiment described by `config`.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport, ExperimentError> {
    let f = by_name(&config.integrand)
        .ok_or_else(|| ExperimentError::UnknownIntegrand(config.integrand.clone()))?;
    let space = f.space(config.base)?;
    if config.m_min > config.m_max {
        return Err(ExperimentError::BadRange {
            m_min: config.m_min,
            m_max: config.m_max,
        });
    }
    if config.replicates < 2 {
        return Err(QuadError::TooFewReplicates(config.replicates).into());
    }
    let n_max = (config.base as u128).pow(config.m_max);
    if n_max > MAX_POINTS {
        return Err(ExperimentError::BudgetExceeded(n_max));
    }
    let evals =
        n_max * config.replicates as u128 * space.s() as u128 * config.methods.len() as u128;
    if evals > MAX_EVALS {
        return Err(ExperimentError::BudgetExceeded(evals));
    }

    let mut rows = Vec::new();
    for m in config.m_min..=config.m_max {
        let n = (config.base as usize).pow(m);
        for &method in &config.methods {
            let stats = match method {
                Method::ScrambledNet => {
                    let net = base_point_set(config.base, space.s(), m)?;
                    let report =
                        replicate_variance(&f, &space, &net, config.seed, config.replicates)?;
                    SampleStats {
                        n: report.replicates,
                        mean: report.mean,
                        variance: report.variance,
                        std_error: report.std_error,
                    }
                }
                Method::MonteCarlo => {
                    monte_carlo_stats(&f, &space, n, config.seed, m, config.replicates)?
                }
            };
            rows.push(ConvergenceRow {
                method,
                m,
                n: n as u64,
                mean: stats.mean,
                variance: stats.variance,
                std_error: stats.std_error,
            });
        }
    }

    let mut slopes = Vec::new();
    for &method in &config.methods {
        let pairs: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| (r.n as f64, r.variance))
            .collect();
        let keep = pairs.len().div_ceil(2).max(2).min(pairs.len());
        slopes.push((method, log_log_slope(&pairs[pairs.len() - keep..])));
    }
    Ok(ConvergenceReport { rows, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            integrand: "interval-x".into(),
            base: 2,
            m_min: 2,
            m_max: 6,
            replicates: 16,
            seed: 7,
            methods: vec![Method::ScrambledNet, Method::MonteCarlo],
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = config();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("scrambled-geometric-net"));
        assert!(text.contains("plain-MC"));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn report_has_one_row_per_method_and_resolution() {
        let report = run_convergence(&config()).unwrap();
        assert_eq!(report.rows.len(), 2 * 5);
        assert_eq!(report.slopes.len(), 2);
        for row in &report.rows {
            assert_eq!(row.n, 1u64 << row.m);
            assert!(row.variance >= 0.0);
        }
    }

    #[test]
    fn run_is_deterministic_in_the_seed() {
        let a = run_convergence(&config()).unwrap();
        let b = run_convergence(&config()).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.mean, rb.mean);
            assert_eq!(ra.variance, rb.variance);
        }
        let mut other = config();
        other.seed = 8;
        let c = run_convergence(&other).unwrap();
        assert!(a.rows.iter().zip(&c.rows).any(|(x, y)| x.mean != y.mean));
    }

    #[test]
    fn monte_carlo_mean_is_unbiased_on_the_interval() {
        let f = by_name("interval-x").unwrap();
        let space = f.space(2).unwrap();
        let stats = monte_carlo_stats(&f, &space, 256, 11, 0, 200).unwrap();
        // Var(mean of 256 uniforms) = 1/(12*256); allow four sigmas of
        // the replicate average.
        let se = (1.0f64 / (12.0 * 256.0 * 200.0)).sqrt();
        assert!((stats.mean - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn scrambled_net_beats_monte_carlo_on_a_smooth_integrand() {
        let report = run_convergence(&config()).unwrap();
        let var = |method: Method, m: u32| {
            report
                .rows
                .iter()
                .find(|r| r.method == method && r.m == m)
                .unwrap()
                .variance
        };
        assert!(var(Method::ScrambledNet, 6) < var(Method::MonteCarlo, 6));
    }

    #[test]
    fn validation_errors() {
        let mut c = config();
        c.integrand = "nope".into();
        assert!(matches!(
            run_convergence(&c),
            Err(ExperimentError::UnknownIntegrand(_))
        ));
        let mut c = config();
        c.m_min = 5;
        c.m_max = 3;
        assert!(matches!(
            run_convergence(&c),
            Err(ExperimentError::BadRange { .. })
        ));
        let mut c = config();
        c.m_max = 30;
        assert!(matches!(
            run_convergence(&c),
            Err(ExperimentError::BudgetExceeded(_))
        ));
        let mut c = config();
        c.replicates = 1;
        assert!(matches!(
            run_convergence(&c),
            Err(ExperimentError::Quad(QuadError::TooFewReplicates(1)))
        ));
    }
}
