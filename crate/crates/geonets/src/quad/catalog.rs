//! Named test integrands with exactly known moments.
//!
//! Every entry's mean and variance are closed forms, written out as
//! expressions rather than decimals so the unit tests can cross-check
//! them against independently frozen digits. Means and variances are
//! with respect to the normalized (probability) measure on each factor.

use super::Integrand;
use crate::regions::{Region, RegionError};

/// The kinds of factor regions the catalog builds on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactorKind {
    UnitInterval,
    UnitRightTriangle,
    UnitDisk,
    SphericalOctant,
}

impl FactorKind {
    /// The canonical root region of this kind.
    pub fn root(self) -> Region {
        match self {
            FactorKind::UnitInterval => Region::unit_interval(),
            FactorKind::UnitRightTriangle => Region::unit_right_triangle(),
            FactorKind::UnitDisk => Region::unit_disk(),
            FactorKind::SphericalOctant => Region::spherical_octant(),
        }
    }

    /// The canonical convergent split rule for this kind in `base`,
    /// or None when no such rule is registered.
    pub fn rule_name(self, base: u32) -> Option<&'static str> {
        match self {
            FactorKind::UnitInterval => Some("interval"),
            FactorKind::UnitRightTriangle => match base {
                2 => Some("triangle-b2"),
                4 => Some("triangle-b4"),
                _ => None,
            },
            FactorKind::UnitDisk => (base == 2).then_some("disk-aspect-b2"),
            FactorKind::SphericalOctant => (base == 2).then_some("sphertri-b2"),
        }
    }

    /// Parses the names used by configs and the command line.
    pub fn parse(name: &str) -> Result<Self, RegionError> {
        match name {
            "interval" => Ok(FactorKind::UnitInterval),
            "triangle" => Ok(FactorKind::UnitRightTriangle),
            "disk" => Ok(FactorKind::UnitDisk),
            "sphertri" => Ok(FactorKind::SphericalOctant),
            other => Err(RegionError::UnknownRule(other.to_string())),
        }
    }
}

/// Names of all catalog integrands, in display order.
pub const INTEGRAND_NAMES: &[&str] = &[
    "const-7",
    "interval-x",
    "square-xy",
    "square-additive",
    "tri-xy",
    "tri2-xy",
    "disk-xy",
    "ind-interval-half",
    "ind-tri-half",
    "ind-disk-half",
    "ind-interval-deep",
    "cusp-tri",
];

/// Mean and variance of |x + y - t0|^(-1/4) on the unit right triangle
/// with t0 = sqrt(2) - 1.
///
/// With u = x + y, the normalized measure has density 2u on [0, 1];
/// splitting the integral at t0 and substituting w = |u - t0| gives
/// incomplete power integrals with the closed forms below.
fn cusp_moments() -> (f64, f64) {
    let t0 = 2f64.sqrt() - 1.0;
    let c = 1.0 - t0;
    let mean = 2.0
        * ((16.0 / 21.0) * t0.powf(1.75)
            + (4.0 / 3.0) * t0 * c.powf(0.75)
            + (4.0 / 7.0) * c.powf(1.75));
    let second =
        2.0 * ((4.0 / 3.0) * t0.powf(1.5) + 2.0 * t0 * c.sqrt() + (2.0 / 3.0) * c.powf(1.5));
    (mean, second - mean * mean)
}

/// Builds a catalog integrand by name.
pub fn by_name(name: &str) -> Option<Integrand> {
    use FactorKind::*;
    let f = match name {
        "const-7" => Integrand::new(name, vec![UnitInterval], |_| 7.0).with_moments(7.0, 0.0),
        "interval-x" => {
            Integrand::new(name, vec![UnitInterval], |p| p[0].x()).with_moments(0.5, 1.0 / 12.0)
        }
        "square-xy" => Integrand::new(name, vec![UnitInterval, UnitInterval], |p| {
            p[0].x() * p[1].x()
        })
        .with_moments(0.25, 7.0 / 144.0),
        "square-additive" => Integrand::new(name, vec![UnitInterval, UnitInterval], |p| {
            p[0].x() + p[1].x()
        })
        .with_moments(1.0, 1.0 / 6.0),
        "tri-xy" => Integrand::new(name, vec![UnitRightTriangle], |p| p[0].x() * p[0].y())
            .with_moments(1.0 / 12.0, 1.0 / 240.0),
        "tri2-xy" => Integrand::new(name, vec![UnitRightTriangle, UnitRightTriangle], |p| {
            p[0].x() * p[0].y() * p[1].x() * p[1].y()
        })
        .with_moments(1.0 / 144.0, 1.0 / 8100.0 - 1.0 / 20736.0),
        "disk-xy" => Integrand::new(name, vec![UnitDisk], |p| p[0].x() * p[0].y())
            .with_moments(0.0, 1.0 / 24.0),
        "ind-interval-half" => Integrand::new(name, vec![UnitInterval], |p| {
            if p[0].x() < 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .with_moments(0.5, 0.25),
        "ind-tri-half" => {
            // The digit-0 child of the planar halving rule on the unit
            // right triangle: vertices (1/2,1/2), (0,0), (1,0).
            let half = Region::Triangle {
                a: crate::regions::Point2::new(0.5, 0.5),
                b: crate::regions::Point2::new(0.0, 0.0),
                c: crate::regions::Point2::new(1.0, 0.0),
            };
            Integrand::new(name, vec![UnitRightTriangle], move |p| {
                if half.contains(&p[0]) {
                    1.0
                } else {
                    0.0
                }
            })
            .with_moments(0.5, 0.25)
        }
        "ind-disk-half" => Integrand::new(name, vec![UnitDisk], |p| {
            if p[0].y() >= 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .with_moments(0.5, 0.25),
        "ind-interval-deep" => {
            // Indicator of one level-7 dyadic cell, [37/128, 38/128).
            let lo = 37.0 / 128.0;
            let hi = 38.0 / 128.0;
            Integrand::new(name, vec![UnitInterval], move |p| {
                if (lo..hi).contains(&p[0].x()) {
                    1.0
                } else {
                    0.0
                }
            })
            .with_moments(1.0 / 128.0, 127.0 / 16384.0)
        }
        "cusp-tri" => {
            let t0 = 2f64.sqrt() - 1.0;
            let (mean, variance) = cusp_moments();
            Integrand::new(name, vec![UnitRightTriangle], move |p| {
                (p[0].x() + p[0].y() - t0).abs().powf(-0.25)
            })
            .with_moments(mean, variance)
        }
        _ => return None,
    };
    Some(f)
}

/// All catalog integrands.
pub fn catalog() -> Vec<Integrand> {
    INTEGRAND_NAMES
        .iter()
        .map(|n| by_name(n).expect("listed names exist"))
        .collect()
}
