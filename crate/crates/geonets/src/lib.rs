//! Quadrature over products of geometric regions via scrambled digital nets.
//!
//! The pipeline, bottom to top:
//!
//! * [`digits`] — base-b digit vectors and radical inverses.
//! * [`nets`] — digital (t, m, s)-net construction and exhaustive
//!   verification of the equidistribution property.
//! * [`scramble`] — nested uniform digit scrambling with a counter-based
//!   keyed permutation family, deterministic in (seed, replicate).
//! * [`regions`] — integration domains (intervals, triangles, disks,
//!   spherical triangles), recursive equal-measure split rules behind a
//!   name-keyed registry, and the digit-vector-to-point transform.
//! * [`quad`] — integrand catalog, estimators, replicated variance
//!   studies, gain coefficients, and variance decompositions.
//! * [`experiment`] — configurable convergence studies comparing
//!   scrambled-net and plain Monte Carlo estimators.
//! * [`stats`] — chi-square, sample statistics, log-log slopes.
//!
//! Integrals are always normalized: an estimator targets the mean of the
//! integrand over its product region, and reported variances are
//! variances of that mean estimate.

pub mod digits;
pub mod experiment;
pub mod nets;
pub mod quad;
pub mod regions;
pub mod scramble;
pub mod stats;

pub use digits::DigitVector;
pub use experiment::{run_convergence, ConvergenceReport, ExperimentConfig, Method};
pub use nets::{faure_net, vdc_points, verify_net, PointSet};
pub use quad::anova::{leaf_grid, variance_identity_check, LeafGrid};
pub use quad::catalog::{by_name, FactorKind, INTEGRAND_NAMES};
pub use quad::gains::{gain_coefficient, gain_table};
pub use quad::{replicate_variance, Integrand};
pub use regions::schemes::{lookup, SplitRule, RULE_NAMES};
pub use regions::transform::{measure_preservation_check, phi, sphericity_probe};
pub use regions::{ProductSpace, Region, RegionPoint};
pub use scramble::{scramble_point_set, ScrambleKey};
