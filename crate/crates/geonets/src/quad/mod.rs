//! Quadrature estimators over product regions.
//!
//! An [`Integrand`] couples an evaluation closure with the kinds of
//! regions it expects; [`estimate`] averages it over the mapped points
//! of a digit point set, and [`replicate_variance`] repeats that with
//! independently scrambled copies of a base net to measure the variance
//! of the estimate. All integrals are normalized to means, so a perfect
//! estimate of f = c is c regardless of region volumes.

pub mod anova;
pub mod catalog;
pub mod gains;

use rayon::prelude::*;
use thiserror::Error;

use crate::nets::{NetError, PointSet};
use crate::regions::schemes::lookup;
use crate::regions::transform::{descend, validate_transform};
use crate::regions::{ProductSpace, RegionError, RegionPoint};
use crate::scramble::{scramble_digits_in_place, ScrambleKey};
use crate::stats::SampleStats;
use catalog::FactorKind;

/// Errors from estimator construction and evaluation.
#[derive(Debug, Error)]
pub enum QuadError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("no convergent split rule for {kind:?} in base {base}")]
    NoRuleForBase { kind: FactorKind, base: u32 },
    #[error("point set has {points} coordinates but the space has {space} factors")]
    FactorCountMismatch { points: usize, space: usize },
    #[error("point set base {points} does not match space base {space}")]
    FactorBaseMismatch { points: u32, space: u32 },
    #[error("integrand takes {integrand} factors but the space has {space}")]
    IntegrandArity { integrand: usize, space: usize },
    #[error("projection is empty, out of range, or not strictly increasing")]
    BadProjection,
    #[error("projection has {u} coordinates but the level vector has {kappa}")]
    ProjectionArity { u: usize, kappa: usize },
    #[error("digit level {level} exceeds stored depth {depth}")]
    LevelTooDeep { level: usize, depth: usize },
    #[error("variance estimation needs at least 2 replicates, got {0}")]
    TooFewReplicates(usize),
    #[error("grid of {0} leaf cells exceeds the supported budget")]
    GridTooLarge(u128),
}

/// Boxed evaluation closure: one [`RegionPoint`] per factor, in factor order.
type EvalFn = Box<dyn Fn(&[RegionPoint]) -> f64 + Send + Sync>;

/// A function on a product of regions, with optional known moments.
///
/// The closure receives one [`RegionPoint`] per factor, in factor order.
/// Known mean and variance are carried for verification only; estimators
/// never read them.
pub struct Integrand {
    name: String,
    factors: Vec<FactorKind>,
    eval: EvalFn,
    mean: Option<f64>,
    variance: Option<f64>,
}

impl Integrand {
    pub fn new(
        name: impl Into<String>,
        factors: Vec<FactorKind>,
        eval: impl Fn(&[RegionPoint]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            factors,
            eval: Box::new(eval),
            mean: None,
            variance: None,
        }
    }

    /// Attaches the exact mean and variance for use as test oracles.
    pub fn with_moments(mut self, mean: f64, variance: f64) -> Self {
        self.mean = Some(mean);
        self.variance = Some(variance);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn factors(&self) -> &[FactorKind] {
        &self.factors
    }

    /// Number of factors s.
    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn mean(&self) -> Option<f64> {
        self.mean
    }

    pub fn variance(&self) -> Option<f64> {
        self.variance
    }

    pub fn eval(&self, point: &[RegionPoint]) -> f64 {
        (self.eval)(point)
    }

    /// Builds the product space for this integrand in the given base,
    /// using each factor's canonical split rule.
    pub fn space(&self, base: u32) -> Result<ProductSpace, QuadError> {
        let mut factors = Vec::with_capacity(self.factors.len());
        for &kind in &self.factors {
            let rule_name = kind
                .rule_name(base)
                .ok_or(QuadError::NoRuleForBase { kind, base })?;
            factors.push((kind.root(), lookup(rule_name, base)?));
        }
        Ok(ProductSpace::new(factors)?)
    }
}

fn check_inputs(f: &Integrand, space: &ProductSpace, points: &PointSet) -> Result<(), QuadError> {
    if f.arity() != space.s() {
        return Err(QuadError::IntegrandArity {
            integrand: f.arity(),
            space: space.s(),
        });
    }
    if points.dimension() != space.s() {
        return Err(QuadError::FactorCountMismatch {
            points: points.dimension(),
            space: space.s(),
        });
    }
    if points.base() != space.base() {
        return Err(QuadError::FactorBaseMismatch {
            points: points.base(),
            space: space.base(),
        });
    }
    for factor in space.factors() {
        validate_transform(&factor.root, factor.rule.as_ref())?;
    }
    Ok(())
}

/// Mean of the integrand over the mapped points of a digit point set.
pub fn estimate(f: &Integrand, space: &ProductSpace, points: &PointSet) -> Result<f64, QuadError> {
    check_inputs(f, space, points)?;
    let s = space.s();
    let mut coords = vec![RegionPoint::one(0.0); s];
    let mut sum = 0.0;
    for i in 0..points.n() {
        for (j, c) in coords.iter_mut().enumerate() {
            let factor = space.factor(j);
            *c = descend(
                &factor.root,
                factor.rule.as_ref(),
                points.coordinate_digits(i, j),
            )?;
        }
        sum += f.eval(&coords);
    }
    Ok(sum / points.n() as f64)
}

/// One estimate from a scrambled copy of the base net.
///
/// Scrambling, mapping, and evaluation are fused per point; the
/// scrambled point set is never materialized.
pub fn scrambled_estimate(
    f: &Integrand,
    space: &ProductSpace,
    base_net: &PointSet,
    key: ScrambleKey,
) -> Result<f64, QuadError> {
    check_inputs(f, space, base_net)?;
    let s = space.s();
    let base = base_net.base();
    let mut buf = vec![0u8; base_net.depth()];
    let mut coords = vec![RegionPoint::one(0.0); s];
    let mut sum = 0.0;
    for i in 0..base_net.n() {
        for (j, c) in coords.iter_mut().enumerate() {
            buf.copy_from_slice(base_net.coordinate_digits(i, j));
            scramble_digits_in_place(&key, base, j, &mut buf);
            let factor = space.factor(j);
            *c = descend(&factor.root, factor.rule.as_ref(), &buf)?;
        }
        sum += f.eval(&coords);
    }
    Ok(sum / base_net.n() as f64)
}

/// Replicated scrambled-net estimation.
#[derive(Clone, Debug)]
pub struct EstimateReport {
    /// Points per replicate.
    pub n: usize,
    pub replicates: usize,
    /// Mean of the replicate estimates.
    pub mean: f64,
    /// Unbiased sample variance of the replicate estimates — the
    /// empirical variance of a single n-point estimate.
    pub variance: f64,
    /// Standard error of `mean`.
    pub std_error: f64,
    /// The per-replicate estimates, in replicate order.
    pub estimates: Vec<f64>,
}

/// Estimates the integral with `replicates` independently scrambled
/// copies of `base_net` and reports the spread of the estimates.
///
/// Replicate r uses `ScrambleKey::new(seed, r)`, so the full report is a
/// pure function of (inputs, seed) regardless of thread count.
pub fn replicate_variance(
    f: &Integrand,
    space: &ProductSpace,
    base_net: &PointSet,
    seed: u64,
    replicates: usize,
) -> Result<EstimateReport, QuadError> {
    if replicates < 2 {
        return Err(QuadError::TooFewReplicates(replicates));
    }
    check_inputs(f, space, base_net)?;
    let estimates = (0..replicates)
        .into_par_iter()
        .map(|r| scrambled_estimate(f, space, base_net, ScrambleKey::new(seed, r as u64)))
        .collect::<Result<Vec<f64>, QuadError>>()?;
    let stats = SampleStats::from_samples(&estimates);
    Ok(EstimateReport {
        n: base_net.n(),
        replicates,
        mean: stats.mean,
        variance: stats.variance,
        std_error: stats.std_error,
        estimates,
    })
}
