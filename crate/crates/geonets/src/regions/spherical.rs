//! Spherical-triangle geometry on the unit sphere.

use super::Vec3;

/// Geodesic distance between two unit vectors, robust for small and
/// near-antipodal separations.
pub fn arc_length(a: Vec3, b: Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Spherical area (excess) of the triangle (a, b, c).
///
/// Uses the half-side tangent formula, which keeps full relative
/// precision as triangles shrink; the excess of a cell at depth k decays
/// like 2^-k and the naive angle sum would lose it to cancellation.
pub fn area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let la = arc_length(b, c);
    let lb = arc_length(c, a);
    let lc = arc_length(a, b);
    let s = 0.5 * (la + lb + lc);
    let prod =
        (0.5 * s).tan() * (0.5 * (s - la)).tan() * (0.5 * (s - lb)).tan() * (0.5 * (s - lc)).tan();
    if prod <= 0.0 {
        return 0.0;
    }
    4.0 * prod.sqrt().atan()
}

/// Interior angles at the three vertices.
pub fn vertex_angles(a: Vec3, b: Vec3, c: Vec3) -> [f64; 3] {
    let angle_at = |v: Vec3, p: Vec3, q: Vec3| {
        // Angle between the tangents at v toward p and toward q.
        let tp = p + v.scale(-v.dot(p));
        let tq = q + v.scale(-v.dot(q));
        tp.cross(tq).norm().atan2(tp.dot(tq))
    };
    [angle_at(a, b, c), angle_at(b, c, a), angle_at(c, a, b)]
}

/// Point on the great-circle arc from `a` to `b` at parameter t in [0,1].
pub fn slerp(a: Vec3, b: Vec3, t: f64) -> Vec3 {
    let omega = arc_length(a, b);
    let so = omega.sin();
    if so < 1e-300 {
        return a;
    }
    (a.scale(((1.0 - t) * omega).sin() / so) + b.scale((t * omega).sin() / so)).normalize()
}

/// The point P on arc (b, c) at which area(a, b, P) is exactly half of
/// area(a, b, c), found by bisection on the arc parameter.
///
/// The area function is monotone along the arc, so bisection converges
/// unconditionally; iteration stops when the split is balanced to a
/// relative 1e-12 or the parameter interval is exhausted.
pub fn area_bisection_point(a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let total = area(a, b, c);
    let target = 0.5 * total;
    let tol = 1e-12 * total;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut p = slerp(b, c, 0.5);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        p = slerp(b, c, mid);
        let diff = area(a, b, p) - target;
        if diff.abs() <= tol || hi - lo < 1e-16 {
            break;
        }
        if diff > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn octant() -> (Vec3, Vec3, Vec3) {
        (
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        )
    }

    #[test]
    fn octant_area_is_an_eighth_of_the_sphere() {
        let (a, b, c) = octant();
        assert!((area(a, b, c) - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn octant_angles_are_right_angles() {
        let (a, b, c) = octant();
        for ang in vertex_angles(a, b, c) {
            assert!((ang - FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn area_of_tiny_triangle_matches_planar_limit() {
        // A triangle with legs ~1e-4 around the pole: spherical area must
        // approach the planar area of the projected triangle.
        let eps = 1e-4;
        let a = Vec3::new(0.0, 0.0, 1.0);
        let b = Vec3::new(eps, 0.0, 1.0).normalize();
        let c = Vec3::new(0.0, eps, 1.0).normalize();
        let planar = 0.5 * eps * eps;
        let sph = area(a, b, c);
        assert!((sph - planar).abs() < 1e-12 * planar.max(1e-30) + 1e-16);
    }

    #[test]
    fn area_via_monte_carlo_rejection() {
        // Independent estimate: fraction of uniform sphere points landing
        // in a mid-sized sliver triangle, scaled by 4*pi.
        let a = Vec3::new(1.0, 0.0, 0.0);
        let b = Vec3::new(1.0, 0.35, 0.0).normalize();
        let c = Vec3::new(1.0, 0.0, 0.28).normalize();
        let analytic = area(a, b, c);

        let inside = |p: Vec3| {
            let edge = |u: Vec3, w: Vec3, opp: Vec3| {
                let n = u.cross(w);
                n.dot(p) * n.dot(opp).signum() >= 0.0
            };
            edge(a, b, c) && edge(b, c, a) && edge(c, a, b)
        };
        // Deterministic low-budget generator for the oracle.
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut next_f64 = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 4_000_000usize;
        let mut hits = 0u64;
        for _ in 0..n {
            // Marsaglia: uniform on the sphere via a normal triple.
            let (u1, u2, u3) = (next_f64(), next_f64(), next_f64());
            let (r1, r2) = ((-2.0 * u1.max(1e-300).ln()).sqrt(), 2.0 * PI * u2);
            let z0 = r1 * r2.cos();
            let z1 = r1 * r2.sin();
            let (u4, _) = (next_f64(), 0.0);
            let r3 = (-2.0 * u3.max(1e-300).ln()).sqrt();
            let z2 = r3 * (2.0 * PI * u4).cos();
            let v = Vec3::new(z0, z1, z2);
            if v.norm() > 1e-12 && inside(v.normalize()) {
                hits += 1;
            }
        }
        let est = 4.0 * PI * hits as f64 / n as f64;
        let sigma = 4.0 * PI * (analytic / (4.0 * PI) / n as f64).sqrt();
        assert!(
            (est - analytic).abs() < 3.0 * sigma,
            "mc {est} vs analytic {analytic} (3sigma {})",
            3.0 * sigma
        );
    }

    #[test]
    fn bisection_point_halves_the_octant() {
        let (a, b, c) = octant();
        let p = area_bisection_point(a, b, c);
        assert!((area(a, b, p) - FRAC_PI_4).abs() < 1e-9);
        assert!((area(a, p, c) - FRAC_PI_4).abs() < 1e-9);
        // P stays on the arc from b to c: orthogonal to their cross product.
        assert!(p.dot(b.cross(c)).abs() < 1e-12);
        assert!((p.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let (_, b, c) = octant();
        assert!((slerp(b, c, 0.0) + b.scale(-1.0)).norm() < 1e-12);
        assert!((slerp(b, c, 1.0) + c.scale(-1.0)).norm() < 1e-12);
        let mid = slerp(b, c, 0.5);
        assert!((arc_length(b, mid) - arc_length(mid, c)).abs() < 1e-12);
    }
}
