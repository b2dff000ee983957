//! Gain coefficients of a digit point set.
//!
//! The variance of a scrambled-net estimate decomposes as
//! Var = (1/n) * sum over (u, kappa) of Gamma[u, kappa] * sigma2[u, kappa],
//! where sigma2 are the multiresolution components of the integrand (see
//! [`super::anova`]) and the gain coefficients Gamma depend only on the
//! unscrambled point set. Per coordinate j in u at level k, a pair of
//! points contributes
//!
//!   w_k(x, y) = ( b * [k+1 digits shared] - [k digits shared] ) / (b - 1),
//!
//! which is 1 on pairs sharing at least k+1 digits, -1/(b-1) on pairs
//! sharing exactly k, and 0 otherwise; Gamma[u, kappa] is the average
//! over ordered pairs of the product over j in u. Expanding the product
//! over subsets turns Gamma into a signed sum of joint prefix-match pair
//! counts, each a sum of squared group sizes — exact integers — so zero
//! and nonnegativity are decided exactly.

use crate::nets::PointSet;

use super::QuadError;

/// Validates a projection/level pair against a point set.
fn check_projection(points: &PointSet, u: &[usize], kappa: &[u32]) -> Result<(), QuadError> {
    if u.is_empty() || u.windows(2).any(|w| w[0] >= w[1]) {
        return Err(QuadError::BadProjection);
    }
    if *u.last().expect("nonempty") >= points.dimension() {
        return Err(QuadError::BadProjection);
    }
    if u.len() != kappa.len() {
        return Err(QuadError::ProjectionArity {
            u: u.len(),
            kappa: kappa.len(),
        });
    }
    let deepest = kappa.iter().map(|&k| k as usize + 1).max().unwrap_or(0);
    if deepest > points.depth() {
        return Err(QuadError::LevelTooDeep {
            level: deepest,
            depth: points.depth(),
        });
    }
    Ok(())
}

/// Number of ordered point pairs agreeing on the first depths[j] digits
/// of coordinate u[j], for every j simultaneously: the sum of squared
/// sizes of the joint prefix groups.
fn prefix_pair_count(points: &PointSet, u: &[usize], depths: &[usize]) -> i128 {
    let b = points.base() as u128;
    let mut keys: Vec<u128> = Vec::with_capacity(points.n());
    for i in 0..points.n() {
        let mut key = 0u128;
        let mut stride = 1u128;
        for (&j, &d) in u.iter().zip(depths) {
            key += points.prefix_index(i, j, d) as u128 * stride;
            stride *= b.pow(d as u32);
        }
        keys.push(key);
    }
    keys.sort_unstable();
    let mut total: i128 = 0;
    let mut run = 1i128;
    for w in keys.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * run;
            run = 1;
        }
    }
    total + run * run
}

/// The gain coefficient Gamma[u, kappa] of a point set, computed exactly.
///
/// `u` lists coordinate indices (0-based, strictly increasing) and
/// `kappa` the digit level of each. The result is a ratio of exact
/// integers, so a structural zero returns exactly 0.0.
pub fn gain_coefficient(points: &PointSet, u: &[usize], kappa: &[u32]) -> Result<f64, QuadError> {
    check_projection(points, u, kappa)?;
    let b = points.base() as i128;
    let r = u.len();
    // Product over j of (b*A_j - B_j) expanded over subsets v of u, where
    // A_j matches k_j+1 digits and B_j matches k_j.
    let mut numerator: i128 = 0;
    let mut depths = vec![0usize; r];
    for v in 0..(1u32 << r) {
        for (j, d) in depths.iter_mut().enumerate() {
            *d = kappa[j] as usize + usize::from(v >> j & 1 == 1);
        }
        let pairs = prefix_pair_count(points, u, &depths);
        let picked = v.count_ones();
        let sign = if (r as u32 - picked).is_multiple_of(2) {
            1
        } else {
            -1
        };
        numerator += sign * b.pow(picked) * pairs;
    }
    let denominator = points.n() as i128 * (b - 1).pow(r as u32);
    Ok(numerator as f64 / denominator as f64)
}

/// One row of a gain table.
#[derive(Clone, Debug, PartialEq)]
pub struct GainEntry {
    pub u: Vec<usize>,
    pub kappa: Vec<u32>,
    pub gamma: f64,
}

/// Gain coefficients for every nonempty projection and every level
/// vector with |kappa| <= max_total_level.
pub fn gain_table(points: &PointSet, max_total_level: u32) -> Result<Vec<GainEntry>, QuadError> {
    let s = points.dimension();
    assert!(s <= 16, "projection enumeration is exponential in s");
    let mut entries = Vec::new();
    for mask in 1u32..(1 << s) {
        let u: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
        let mut kappa = vec![0u32; u.len()];
        loop {
            if kappa.iter().sum::<u32>() <= max_total_level {
                entries.push(GainEntry {
                    gamma: gain_coefficient(points, &u, &kappa)?,
                    u: u.clone(),
                    kappa: kappa.clone(),
                });
            }
            // Odometer over level vectors bounded by the total budget.
            let mut pos = 0;
            loop {
                if pos == kappa.len() {
                    break;
                }
                kappa[pos] += 1;
                if kappa.iter().sum::<u32>() <= max_total_level {
                    break;
                }
                kappa[pos] = 0;
                pos += 1;
            }
            if pos == kappa.len() {
                break;
            }
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::{faure_net, vdc_points};

    /// Direct O(n^2) evaluation of the pair-kernel definition, kept
    /// independent of the grouped implementation.
    fn naive_gain(points: &PointSet, u: &[usize], kappa: &[u32]) -> f64 {
        let b = points.base() as f64;
        let n = points.n();
        let mut total = 0.0;
        for i in 0..n {
            for i2 in 0..n {
                let mut prod = 1.0;
                for (&j, &k) in u.iter().zip(kappa) {
                    let a = points.coordinate_digits(i, j);
                    let c = points.coordinate_digits(i2, j);
                    let k = k as usize;
                    let eq_k = a[..k] == c[..k];
                    let eq_k1 = a[..k + 1] == c[..k + 1];
                    prod *=
                        (b * f64::from(u8::from(eq_k1)) - f64::from(u8::from(eq_k))) / (b - 1.0);
                }
                total += prod;
            }
        }
        total / n as f64
    }

    #[test]
    fn grouped_computation_matches_the_pair_loop() {
        let cases: Vec<PointSet> = vec![
            vdc_points(2, 8).unwrap(),
            faure_net(2, 2, 3).unwrap(),
            faure_net(3, 2, 2).unwrap(),
            faure_net(5, 3, 1).unwrap(),
        ];
        for points in &cases {
            let s = points.dimension();
            for mask in 1u32..(1 << s) {
                let u: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
                for k0 in 0..4u32 {
                    for k1 in 0..3u32 {
                        let kappa: Vec<u32> = std::iter::once(k0)
                            .chain(std::iter::repeat(k1))
                            .take(u.len())
                            .collect();
                        let exact = gain_coefficient(points, &u, &kappa).unwrap();
                        let naive = naive_gain(points, &u, &kappa);
                        assert!(
                            (exact - naive).abs() < 1e-10,
                            "b={} u={u:?} kappa={kappa:?}: {exact} vs {naive}",
                            points.base()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gains_vanish_exactly_on_resolved_levels() {
        // For a (0,m,s)-net, Gamma[u,kappa] is 0 precisely when
        // m >= |u| + |kappa|, and nonnegative everywhere.
        for base in [2u32, 3] {
            for s in 1..=2usize {
                for m in 0..=4u32 {
                    let net = faure_net(base, s, m).unwrap();
                    for entry in gain_table(&net, 5).unwrap() {
                        let weight = entry.u.len() as u32 + entry.kappa.iter().sum::<u32>();
                        if m >= weight {
                            assert_eq!(
                                entry.gamma, 0.0,
                                "b={base} s={s} m={m} u={:?} kappa={:?}",
                                entry.u, entry.kappa
                            );
                        } else {
                            assert!(
                                entry.gamma > 0.0,
                                "b={base} s={s} m={m} u={:?} kappa={:?}: {}",
                                entry.u,
                                entry.kappa,
                                entry.gamma
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn deep_levels_of_a_small_net_have_unit_gain() {
        // Beyond the net's resolution all prefixes are distinct, so only
        // diagonal pairs survive and the kernel averages to exactly 1.
        let net = vdc_points(2, 4).unwrap();
        for k in 2..6u32 {
            assert_eq!(gain_coefficient(&net, &[0], &[k]).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_point_set_has_unit_gains_everywhere() {
        let net = vdc_points(2, 1).unwrap();
        for k in 0..4u32 {
            assert_eq!(gain_coefficient(&net, &[0], &[k]).unwrap(), 1.0);
        }
    }

    #[test]
    fn projection_validation() {
        let net = faure_net(2, 2, 2).unwrap();
        assert!(matches!(
            gain_coefficient(&net, &[], &[]),
            Err(QuadError::BadProjection)
        ));
        assert!(matches!(
            gain_coefficient(&net, &[1, 0], &[0, 0]),
            Err(QuadError::BadProjection)
        ));
        assert!(matches!(
            gain_coefficient(&net, &[2], &[0]),
            Err(QuadError::BadProjection)
        ));
        assert!(matches!(
            gain_coefficient(&net, &[0], &[0, 1]),
            Err(QuadError::ProjectionArity { u: 1, kappa: 2 })
        ));
        assert!(matches!(
            gain_coefficient(&net, &[0], &[60]),
            Err(QuadError::LevelTooDeep { .. })
        ));
    }

    #[test]
    fn gain_table_covers_the_level_budget() {
        let net = faure_net(2, 2, 2).unwrap();
        let table = gain_table(&net, 3).unwrap();
        // Projections {0}, {1}: 4 levels each; {0,1}: C(3+2,2) = 10 pairs.
        assert_eq!(table.len(), 4 + 4 + 10);
        assert!(table
            .iter()
            .all(|e| e.kappa.iter().sum::<u32>() <= 3 && !e.u.is_empty()));
    }
}
