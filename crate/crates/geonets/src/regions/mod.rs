//! Geometric integration domains and their recursive equal-measure splits.
//!
//! A [`Region`] is one cell of one of four supported geometries: an
//! interval, a planar triangle, a polar (annular-sector) cell of a disk,
//! or a spherical triangle on the unit sphere. Split rules that divide a
//! cell into `b` children of equal measure live in [`schemes`], behind a
//! common trait so geometries can be selected by name at runtime; the
//! digit-vector-to-region transform and its diagnostics live in
//! [`transform`].

pub mod schemes;
pub mod spherical;
pub mod transform;

use std::sync::Arc;

use schemes::SplitRule;
use thiserror::Error;

/// Errors from region construction, splitting, and the product space.
#[derive(Debug, Error)]
pub enum RegionError {
    #[error("interval [{lo}, {hi}) is empty or inverted")]
    BadInterval { lo: f64, hi: f64 },
    #[error("triangle is degenerate (zero area)")]
    DegenerateTriangle,
    #[error("polar cell has empty radial or angular extent")]
    BadPolarCell,
    #[error("polar cell spans more than a full turn")]
    PolarSpanTooWide,
    #[error("spherical triangle vertex is not a unit vector (|v| = {0})")]
    NotUnitVector(f64),
    #[error("spherical triangle is degenerate or has an interior angle >= pi")]
    DegenerateSphericalTriangle,
    #[error("split digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: u8, base: u32 },
    #[error("rule '{rule}' cannot split this region kind")]
    IncompatibleRegion { rule: &'static str },
    #[error("no split rule named '{0}' is registered")]
    UnknownRule(String),
    #[error("rule '{rule}' works in base {expected}, not base {got}")]
    BaseMismatch {
        rule: &'static str,
        expected: u32,
        got: u32,
    },
    #[error("rule '{0}' does not shrink cells; it cannot drive the point transform")]
    NonConvergentRule(&'static str),
    #[error("digit vector base {digits} does not match rule base {rule}")]
    DigitBaseMismatch { digits: u32, rule: u32 },
    #[error("product space needs at least one factor")]
    EmptyProduct,
    #[error("product factors must share one base (found {0} and {1})")]
    MixedBases(u32, u32),
    #[error("point dimension {got} does not match factor count {want}")]
    PointDimension { got: usize, want: usize },
    #[error("enumeration of {0} cells exceeds the supported budget")]
    EnumerationTooLarge(u128),
}

/// A point in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A vector in three-dimensional space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalize(self) -> Self {
        self.scale(1.0 / self.norm())
    }
}

impl std::ops::Add for Vec3 {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

/// A point of some region, carried as up to three Cartesian coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionPoint {
    coords: [f64; 3],
    ndim: usize,
}

impl RegionPoint {
    pub fn one(x: f64) -> Self {
        Self {
            coords: [x, 0.0, 0.0],
            ndim: 1,
        }
    }

    pub fn two(x: f64, y: f64) -> Self {
        Self {
            coords: [x, y, 0.0],
            ndim: 2,
        }
    }

    pub fn three(x: f64, y: f64, z: f64) -> Self {
        Self {
            coords: [x, y, z],
            ndim: 3,
        }
    }

    /// Cartesian coordinates; length is the ambient dimension.
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.ndim]
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn z(&self) -> f64 {
        self.coords[2]
    }
}

/// One cell of a supported geometry.
///
/// Triangle and spherical-triangle vertices are ordered: split rules
/// relabel children so that the recursion sees a consistent convention.
/// Polar angles are stored unwrapped (theta_hi may exceed 2*pi); they are
/// reduced only when emitting Cartesian points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Interval {
        lo: f64,
        hi: f64,
    },
    Triangle {
        a: Point2,
        b: Point2,
        c: Point2,
    },
    PolarCell {
        r_lo: f64,
        r_hi: f64,
        theta_lo: f64,
        theta_hi: f64,
    },
    SphericalTriangle {
        a: Vec3,
        b: Vec3,
        c: Vec3,
    },
}

impl Region {
    pub fn interval(lo: f64, hi: f64) -> Result<Self, RegionError> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(RegionError::BadInterval { lo, hi });
        }
        Ok(Region::Interval { lo, hi })
    }

    pub fn triangle(a: Point2, b: Point2, c: Point2) -> Result<Self, RegionError> {
        let t = Region::Triangle { a, b, c };
        if t.volume() <= 0.0 {
            return Err(RegionError::DegenerateTriangle);
        }
        Ok(t)
    }

    pub fn polar_cell(
        r_lo: f64,
        r_hi: f64,
        theta_lo: f64,
        theta_hi: f64,
    ) -> Result<Self, RegionError> {
        if ![r_lo, r_hi, theta_lo, theta_hi]
            .iter()
            .all(|v| v.is_finite())
            || r_lo < 0.0
            || r_lo >= r_hi
            || theta_lo >= theta_hi
        {
            return Err(RegionError::BadPolarCell);
        }
        if theta_hi - theta_lo > 2.0 * std::f64::consts::PI + 1e-12 {
            return Err(RegionError::PolarSpanTooWide);
        }
        Ok(Region::PolarCell {
            r_lo,
            r_hi,
            theta_lo,
            theta_hi,
        })
    }

    pub fn spherical_triangle(a: Vec3, b: Vec3, c: Vec3) -> Result<Self, RegionError> {
        for v in [a, b, c] {
            let n = v.norm();
            if (n - 1.0).abs() > 1e-12 {
                return Err(RegionError::NotUnitVector(n));
            }
        }
        let angles = spherical::vertex_angles(a, b, c);
        if angles
            .iter()
            .any(|&ang| !(ang > 1e-12 && ang < std::f64::consts::PI - 1e-9))
        {
            return Err(RegionError::DegenerateSphericalTriangle);
        }
        if spherical::area(a, b, c) <= 0.0 {
            return Err(RegionError::DegenerateSphericalTriangle);
        }
        Ok(Region::SphericalTriangle { a, b, c })
    }

    /// The unit interval [0, 1).
    pub fn unit_interval() -> Self {
        Region::Interval { lo: 0.0, hi: 1.0 }
    }

    /// The right triangle with vertices (0,0), (1,0), (0,1).
    pub fn unit_right_triangle() -> Self {
        Region::Triangle {
            a: Point2::new(0.0, 0.0),
            b: Point2::new(1.0, 0.0),
            c: Point2::new(0.0, 1.0),
        }
    }

    /// The unit disk as the full polar cell.
    pub fn unit_disk() -> Self {
        Region::PolarCell {
            r_lo: 0.0,
            r_hi: 1.0,
            theta_lo: 0.0,
            theta_hi: 2.0 * std::f64::consts::PI,
        }
    }

    /// The positive octant of the unit sphere.
    pub fn spherical_octant() -> Self {
        Region::SphericalTriangle {
            a: Vec3::new(1.0, 0.0, 0.0),
            b: Vec3::new(0.0, 1.0, 0.0),
            c: Vec3::new(0.0, 0.0, 1.0),
        }
    }

    /// Intrinsic dimension d of the geometry (1 or 2).
    pub fn dim(&self) -> u32 {
        match self {
            Region::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Dimension of the Cartesian coordinates of points in this region.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            Region::Triangle { .. } | Region::PolarCell { .. } => 2,
            Region::SphericalTriangle { .. } => 3,
        }
    }

    /// Length, area, or spherical area of the cell.
    pub fn volume(&self) -> f64 {
        match *self {
            Region::Interval { lo, hi } => hi - lo,
            Region::Triangle { a, b, c } => {
                0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).abs()
            }
            Region::PolarCell {
                r_lo,
                r_hi,
                theta_lo,
                theta_hi,
            } => 0.5 * (theta_hi - theta_lo) * (r_hi * r_hi - r_lo * r_lo),
            Region::SphericalTriangle { a, b, c } => spherical::area(a, b, c),
        }
    }

    /// Diameter of the cell. Spherical cells use the largest geodesic
    /// distance between vertices, which is the diameter for the
    /// well-shaped cells the splits produce.
    pub fn diameter(&self) -> f64 {
        match *self {
            Region::Interval { lo, hi } => hi - lo,
            Region::Triangle { a, b, c } => a.distance(b).max(b.distance(c)).max(c.distance(a)),
            Region::PolarCell {
                r_lo,
                r_hi,
                theta_lo,
                theta_hi,
            } => {
                let dt = theta_hi - theta_lo;
                if dt >= std::f64::consts::PI {
                    2.0 * r_hi
                } else {
                    let outer_chord = 2.0 * r_hi * (0.5 * dt).sin();
                    let diagonal =
                        (r_hi * r_hi + r_lo * r_lo - 2.0 * r_hi * r_lo * dt.cos()).sqrt();
                    outer_chord.max(diagonal).max(r_hi - r_lo)
                }
            }
            Region::SphericalTriangle { a, b, c } => spherical::arc_length(a, b)
                .max(spherical::arc_length(b, c))
                .max(spherical::arc_length(c, a)),
        }
    }

    /// Canonical interior point: interval midpoint, triangle centroid,
    /// polar centroid-radius at the angular midpoint, or the normalized
    /// vertex sum on the sphere.
    pub fn representative(&self) -> RegionPoint {
        match *self {
            Region::Interval { lo, hi } => RegionPoint::one(0.5 * (lo + hi)),
            Region::Triangle { a, b, c } => {
                RegionPoint::two((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
            }
            Region::PolarCell {
                r_lo,
                r_hi,
                theta_lo,
                theta_hi,
            } => {
                let r_c = centroid_radius(r_lo, r_hi);
                let theta = 0.5 * (theta_lo + theta_hi) % (2.0 * std::f64::consts::PI);
                RegionPoint::two(r_c * theta.cos(), r_c * theta.sin())
            }
            Region::SphericalTriangle { a, b, c } => {
                let m = (a + b + c).normalize();
                RegionPoint::three(m.x, m.y, m.z)
            }
        }
    }

    /// Signed containment margin: positive inside, negative outside,
    /// roughly a distance to the nearest boundary.
    pub fn containment_margin(&self, p: &RegionPoint) -> f64 {
        match *self {
            Region::Interval { lo, hi } => (p.x() - lo).min(hi - p.x()),
            Region::Triangle { a, b, c } => {
                let edge = |u: Point2, v: Point2, w: Point2| {
                    // Signed distance of p from line (u, v), positive on w's side.
                    let nx = v.y - u.y;
                    let ny = u.x - v.x;
                    let len = nx.hypot(ny);
                    let side = (w.x - u.x) * nx + (w.y - u.y) * ny;
                    let val = (p.x() - u.x) * nx + (p.y() - u.y) * ny;
                    val * side.signum() / len
                };
                edge(a, b, c).min(edge(b, c, a)).min(edge(c, a, b))
            }
            Region::PolarCell {
                r_lo,
                r_hi,
                theta_lo,
                theta_hi,
            } => {
                let r = p.x().hypot(p.y());
                let mut theta = p.y().atan2(p.x());
                if theta < 0.0 {
                    theta += 2.0 * std::f64::consts::PI;
                }
                if theta < theta_lo {
                    theta += 2.0 * std::f64::consts::PI;
                }
                let radial = (r - r_lo).min(r_hi - r);
                let angular = (theta - theta_lo).min(theta_hi - theta).max(-1e3) * r.max(1e-300);
                radial.min(angular)
            }
            Region::SphericalTriangle { a, b, c } => {
                let v = Vec3::new(p.x(), p.y(), p.z());
                let edge = |u: Vec3, w: Vec3, opposite: Vec3| {
                    let n = u.cross(w);
                    let side = n.dot(opposite).signum();
                    n.dot(v) * side / n.norm()
                };
                edge(a, b, c).min(edge(b, c, a)).min(edge(c, a, b))
            }
        }
    }

    /// Membership with a small boundary tolerance.
    pub fn contains(&self, p: &RegionPoint) -> bool {
        self.containment_margin(p) >= -1e-12
    }
}

/// Mean radius of the annulus slice [r_lo, r_hi]: the radial coordinate
/// of its centroid, (2/3)(r_hi^3 - r_lo^3)/(r_hi^2 - r_lo^2).
pub fn centroid_radius(r_lo: f64, r_hi: f64) -> f64 {
    (2.0 / 3.0) * (r_hi * r_hi * r_hi - r_lo * r_lo * r_lo) / (r_hi * r_hi - r_lo * r_lo)
}

/// Elongation measure of a polar cell: arc length of the centroid-radius
/// circle across the cell, divided by the radial extent. Drives the
/// choice between angular and radial splits.
pub fn aspect_ratio(cell: &Region) -> Result<f64, RegionError> {
    match *cell {
        Region::PolarCell {
            r_lo,
            r_hi,
            theta_lo,
            theta_hi,
        } => {
            let dr = r_hi - r_lo;
            let dt = theta_hi - theta_lo;
            if dr <= 0.0 || dt <= 0.0 {
                return Err(RegionError::BadPolarCell);
            }
            Ok(dt * centroid_radius(r_lo, r_hi) / dr)
        }
        _ => Err(RegionError::IncompatibleRegion {
            rule: "aspect-ratio",
        }),
    }
}

/// One factor of a product space: a root region with its split rule.
#[derive(Clone)]
pub struct Factor {
    pub root: Region,
    pub rule: Arc<dyn SplitRule>,
}

/// An s-fold product of regions sharing one base b, the integration
/// domain of the estimators. Estimation treats each factor's measure as
/// normalized to one, so integrals are means.
#[derive(Clone)]
pub struct ProductSpace {
    factors: Vec<Factor>,
}

impl ProductSpace {
    pub fn new(factors: Vec<(Region, Arc<dyn SplitRule>)>) -> Result<Self, RegionError> {
        if factors.is_empty() {
            return Err(RegionError::EmptyProduct);
        }
        let base = factors[0].1.base();
        for (root, rule) in &factors {
            if rule.base() != base {
                return Err(RegionError::MixedBases(base, rule.base()));
            }
            if !rule.compatible(root) {
                return Err(RegionError::IncompatibleRegion { rule: rule.name() });
            }
        }
        Ok(Self {
            factors: factors
                .into_iter()
                .map(|(root, rule)| Factor { root, rule })
                .collect(),
        })
    }

    pub fn s(&self) -> usize {
        self.factors.len()
    }

    pub fn base(&self) -> u32 {
        self.factors[0].rule.base()
    }

    pub fn factor(&self, j: usize) -> &Factor {
        &self.factors[j]
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }
}
