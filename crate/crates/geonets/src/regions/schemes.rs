//! Recursive equal-measure split rules, registered by name.
//!
//! Every rule divides a compatible cell into `base` children of equal
//! measure (to within the stated tolerances) and is addressed through
//! the [`SplitRule`] trait object, so the CLI and experiment configs can
//! select geometry by string name. Convergent rules also shrink cell
//! diameters at the b^(-k/d) rate required by the point transform;
//! `triangle-b3` deliberately does not and is kept as a diagnostic
//! counterexample.

use std::sync::Arc;

use super::{aspect_ratio, spherical, Point2, Region, RegionError};

/// A rule for splitting one geometry into `base` equal-measure children.
pub trait SplitRule: Send + Sync {
    /// Registry name, e.g. "triangle-b4".
    fn name(&self) -> &'static str;

    /// Number of children per split; also the digit base it consumes.
    fn base(&self) -> u32;

    /// Intrinsic dimension of the cells this rule splits.
    fn dim(&self) -> u32;

    /// Whether cell diameters shrink like base^(-k/dim) under recursion.
    fn convergent(&self) -> bool;

    /// Whether this rule can split the given region.
    fn compatible(&self, region: &Region) -> bool;

    /// The child selected by `digit` in 0..base.
    fn split(&self, cell: &Region, digit: u8) -> Result<Region, RegionError>;
}

fn check_digit(rule: &dyn SplitRule, digit: u8) -> Result<(), RegionError> {
    if u32::from(digit) < rule.base() {
        Ok(())
    } else {
        Err(RegionError::DigitOutOfRange {
            digit,
            base: rule.base(),
        })
    }
}

fn incompatible(rule: &dyn SplitRule) -> RegionError {
    RegionError::IncompatibleRegion { rule: rule.name() }
}

/// Splits an interval into `base` equal subintervals, low digit first.
#[derive(Clone, Copy, Debug)]
pub struct IntervalSplit {
    base: u32,
}

impl IntervalSplit {
    pub fn new(base: u32) -> Result<Self, RegionError> {
        if !(2..=crate::digits::MAX_BASE).contains(&base) {
            return Err(RegionError::BaseMismatch {
                rule: "interval",
                expected: 2,
                got: base,
            });
        }
        Ok(Self { base })
    }
}

impl SplitRule for IntervalSplit {
    fn name(&self) -> &'static str {
        "interval"
    }

    fn base(&self) -> u32 {
        self.base
    }

    fn dim(&self) -> u32 {
        1
    }

    fn convergent(&self) -> bool {
        true
    }

    fn compatible(&self, region: &Region) -> bool {
        matches!(region, Region::Interval { .. })
    }

    fn split(&self, cell: &Region, digit: u8) -> Result<Region, RegionError> {
        check_digit(self, digit)?;
        let Region::Interval { lo, hi } = *cell else {
            return Err(incompatible(self));
        };
        let w = (hi - lo) / self.base as f64;
        Ok(Region::Interval {
            lo: lo + digit as f64 * w,
            hi: lo + (digit as f64 + 1.0) * w,
        })
    }
}

/// Halves a triangle through the midpoint of edge (b, c).
///
/// With vertices stacked as a column (a, b, c), digit 0 applies the
/// matrix [[0, 1/2, 1/2], [1, 0, 0], [0, 1, 0]] — the child containing
/// the old b — and digit 1 its mirror, (m, c, a) with m the midpoint.
/// The relabeling puts the new apex first so the recursion always cuts
/// the most recently created edge.
#[derive(Clone, Copy, Debug)]
pub struct TriangleHalving;

impl SplitRule for TriangleHalving {
    fn name(&self) -> &'static str {
        "triangle-b2"
    }

    fn base(&self) -> u32 {
        2
    }

    fn dim(&self) -> u32 {
        2
    }

    fn convergent(&self) -> bool {
        true
    }

    fn compatible(&self, region: &Region) -> bool {
        matches!(region, Region::Triangle { .. })
    }

    fn split(&self, cell: &Region, digit: u8) -> Result<Region, RegionError> {
        check_digit(self, digit)?;
        let Region::Triangle { a, b, c } = *cell else {
            return Err(incompatible(self));
        };
        let m = b.midpoint(c);
        Ok(match digit {
            0 => Region::Triangle { a: m, b: a, c: b },
            _ => Region::Triangle { a: m, b: c, c: a },
        })
    }
}

/// Splits a triangle into the three centroid wedges (g, b, c), (g, c, a),
/// (g, a, b). Equal areas, but the wedges elongate without bound, so the
/// rule is non-convergent and rejected by the point transform.
#[derive(Clone, Copy, Debug)]
pub struct TriangleCentroidSplit;

impl SplitRule for TriangleCentroidSplit {
    fn name(&self) -> &'static str {
        "triangle-b3"
    }

    fn base(&self) -> u32 {
        3
    }

    fn dim(&self) -> u32 {
        2
    }

    fn convergent(&self) -> bool {
        false
    }

    fn compatible(&self, region: &Region) -> bool {
        matches!(region, Region::Triangle { .. })
    }

    fn split(&self, cell: &Region, digit: u8) -> Result<Region, RegionError> {
        check_digit(self, digit)?;
        let Region::Triangle { a, b, c } = *cell else {
            return Err(incompatible(self));
        };
        let g = Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
        Ok(match digit {
            0 => Region::Triangle { a: g, b, c },
            1 => Region::Triangle { a: g, b: c, c: a },
            _ => Region::Triangle { a: g, b: a, c: b },
        })
    }
}

/// Splits a triangle into the medial triangle (digit 0) and the three
/// half-scale corner copies at a, b, c (digits 1-3). All four children
/// are similar to the parent, so cell shapes are constant at all depths;
/// the all-zeros digit path contracts onto the centroid.
#[derive(Clone, Copy, Debug)]
pub struct TriangleQuadrisect;

impl SplitRule for TriangleQuadrisect {
    fn name(&self) -> &'static str {
        "triangle-b4"
    }

    fn base(&self) -> u32 {
        4
    }

    fn dim(&self) -> u32 {
        2
    }

    fn convergent(&self) -> bool {
        true
    }

    fn compatible(&self, region: &Region) -> bool {
        matches!(region, Region::Triangle { .. })
    }

    fn split(&self, cell: &Region, digit: u8) -> Result<Region, RegionError> {
        check_digit(self, digit)?;
        let Region::Triangle { a, b, c } = *cell else {
            return Err(incompatible(self));
        };
        let mab = a.midpoint(b);
        let mbc = b.midpoint(c);
        let mca = c.midpoint(a);
        Ok(match digit {
            0 => Region::Triangle {
                a: mbc,
                b: mca,
                c: mab,
            },
            1 => Region::Triangle { a, b: mab, c: mca },
            2 => Region::Triangle { a: mab, b, c: mbc },
            _ => Region::Triangle { a: mca, b: mbc, c },
        })
    }
}

/// Halves a polar cell along whichever direction it is long in:
/// elongated cells (aspect ratio above one) split at the angular
/// midpoint, compact ones at the equal-area radius
/// sqrt((r_lo^2 + r_hi^2) / 2). Digit 0 takes the low-angle or inner
/// child.
#[derive(Clone, Copy, Debug)]
pub struct DiskAspectSplit;

/// Angular halving of a polar cell, exposed for direct testing.
pub fn split_polar_angular(cell: &Region, digit: u8) -> Result<Region, RegionError> {
    let Region::PolarCell {
        r_lo,
        r_hi,
        theta_lo,
        theta_hi,
    } = *cell
    else {
        return Err(RegionError::IncompatibleRegion {
            rule: "disk-aspect-b2",
        });
    };
    let mid = 0.5 * (theta_lo + theta_hi);
    Ok(if digit == 0 {
        Region::PolarCell {
            r_lo,
            r_hi,
            theta_lo,
            theta_hi: mid,
        }
    } else {
        Region::PolarCell {
            r_lo,
            r_hi,
            theta_lo: mid,
            theta_hi,
        }
    })
}

/// Equal-area radial halving of a polar cell, exposed for direct testing.
pub fn split_polar_radial(cell: &Region, digit: u8) -> Result<Region, RegionError> {
    let Region::PolarCell {
        r_lo,
        r_hi,
        theta_lo,
        theta_hi,
    } = *cell
    else {
        return Err(RegionError::IncompatibleRegion {
            rule: "disk-aspect-b2",
        });
    };
    let r_mid = (0.5 * (r_lo * r_lo + r_hi * r_hi)).sqrt();
    Ok(if digit == 0 {
        Region::PolarCell {
            r_lo,
            r_hi: r_mid,
            theta_lo,
            theta_hi,
        }
    } else {
        Region::PolarCell {
            r_lo: r_mid,
            r_hi,
            theta_lo,
            theta_hi,
        }
    })
}

impl SplitRule for DiskAspectSplit {
    fn name(&self) -> &'static str {
        "disk-aspect-b2"
    }

    fn base(&self) -> u32 {
        2
    }

    fn dim(&self) -> u32 {
        2
    }

    fn convergent(&self) -> bool {
        true
    }

    fn compatible(&self, region: &Region) -> bool {
        matches!(region, Region::PolarCell { .. })
    }

    fn split(&self, cell: &Region, digit: u8) -> Result<Region, RegionError> {
        check_digit(self, digit)?;
        if aspect_ratio(cell)? > 1.0 {
            split_polar_angular(cell, digit)
        } else {
            split_polar_radial(cell, digit)
        }
    }
}

/// Halves a spherical triangle by the arc from vertex a to the point p
/// on arc (b, c) at which the two sides have equal spherical area.
/// Children are relabeled (p, a, b) and (p, c, a), mirroring the planar
/// halving convention.
#[derive(Clone, Copy, Debug)]
pub struct SphericalHalving;

impl SplitRule for SphericalHalving {
    fn name(&self) -> &'static str {
        "sphertri-b2"
    }

    fn base(&self) -> u32 {
        2
    }

    fn dim(&self) -> u32 {
        2
    }

    fn convergent(&self) -> bool {
        true
    }

    fn compatible(&self, region: &Region) -> bool {
        matches!(region, Region::SphericalTriangle { .. })
    }

    fn split(&self, cell: &Region, digit: u8) -> Result<Region, RegionError> {
        check_digit(self, digit)?;
        let Region::SphericalTriangle { a, b, c } = *cell else {
            return Err(incompatible(self));
        };
        let p = spherical::area_bisection_point(a, b, c);
        Ok(match digit {
            0 => Region::SphericalTriangle { a: p, b: a, c: b },
            _ => Region::SphericalTriangle { a: p, b: c, c: a },
        })
    }
}

/// Names of all registered split rules.
pub const RULE_NAMES: &[&str] = &[
    "interval",
    "triangle-b2",
    "triangle-b3",
    "triangle-b4",
    "disk-aspect-b2",
    "sphertri-b2",
];

/// The base a named rule works in, or None when it accepts any base
/// (only "interval" does).
pub fn rule_base(name: &str) -> Option<Option<u32>> {
    match name {
        "interval" => Some(None),
        "triangle-b2" => Some(Some(2)),
        "triangle-b3" => Some(Some(3)),
        "triangle-b4" => Some(Some(4)),
        "disk-aspect-b2" => Some(Some(2)),
        "sphertri-b2" => Some(Some(2)),
        _ => None,
    }
}

/// Looks up a split rule by registry name for the given base.
///
/// Fixed-base rules reject a mismatched base; "interval" accepts any
/// supported base.
pub fn lookup(name: &str, base: u32) -> Result<Arc<dyn SplitRule>, RegionError> {
    let rule: Arc<dyn SplitRule> = match name {
        "interval" => Arc::new(IntervalSplit::new(base)?),
        "triangle-b2" => Arc::new(TriangleHalving),
        "triangle-b3" => Arc::new(TriangleCentroidSplit),
        "triangle-b4" => Arc::new(TriangleQuadrisect),
        "disk-aspect-b2" => Arc::new(DiskAspectSplit),
        "sphertri-b2" => Arc::new(SphericalHalving),
        other => return Err(RegionError::UnknownRule(other.to_string())),
    };
    if rule.base() != base {
        return Err(RegionError::BaseMismatch {
            rule: rule.name(),
            expected: rule.base(),
            got: base,
        });
    }
    Ok(rule)
}

/// The canonical root region for a named rule, used by the CLI.
pub fn default_root(name: &str) -> Option<Region> {
    match name {
        "interval" => Some(Region::unit_interval()),
        "triangle-b2" | "triangle-b3" | "triangle-b4" => Some(Region::unit_right_triangle()),
        "disk-aspect-b2" => Some(Region::unit_disk()),
        "sphertri-b2" => Some(Region::spherical_octant()),
        _ => None,
    }
}
