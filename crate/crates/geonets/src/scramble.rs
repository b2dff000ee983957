//! Nested uniform digit scrambling.
//!
//! Every node of the base-b digit tree carries its own uniformly random
//! permutation of {0..b-1}; the permutation applied to digit k+1 of a
//! coordinate depends on the coordinate index and on the first k
//! *unscrambled* digits, never on the point index. Two points that agree
//! through digit k therefore pass through identical permutations up to
//! that depth, which is what preserves the net property.
//!
//! Permutations are not materialized as a tree. Each node's permutation
//! is regenerated on demand from a keyed hash of (seed, replicate,
//! coordinate, level, prefix index) feeding a Fisher-Yates shuffle, so a
//! full scramble is O(n s K) with O(1) state. The same key always
//! reproduces the same output, independent of thread count or platform;
//! randomness quality is that of the underlying mixer, the standard
//! trade-off for counter-based scrambling.

use crate::digits::DigitVector;
use crate::nets::PointSet;
use crate::stats::ChiSquare;
use thiserror::Error;

/// Errors from scrambling and its statistical self-checks.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScrambleError {
    #[error("{got} trials are too few: need at least {need} for {cells} cells")]
    TooFewTrials { got: u64, need: u64, cells: u64 },
    #[error("digit level {level} exceeds stored depth {depth}")]
    LevelTooDeep { level: usize, depth: usize },
    #[error("point has no coordinates")]
    EmptyPoint,
}

/// A coherent family of digit permutations indexed by tree node.
///
/// Implementors must return the image of `digit` under the permutation
/// at node (coordinate, level, prefix); the result must only depend on
/// those indices and must be a bijection of {0..base-1} in `digit`.
pub trait PermutationFamily: Sync {
    fn permute(&self, base: u32, coordinate: usize, level: u32, prefix: u64, digit: u8) -> u8;
}

/// Keyed pseudo-random permutation family: seed plus replicate number.
///
/// Distinct replicate ids give statistically independent scrambles of
/// the same point set; identical keys give bit-identical output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScrambleKey {
    pub seed: u64,
    pub replicate: u64,
}

impl ScrambleKey {
    pub fn new(seed: u64, replicate: u64) -> Self {
        Self { seed, replicate }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a full-avalanche 64-bit mixer.
#[inline]
pub(crate) fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Absorbs one word into a running hash state.
#[inline]
pub(crate) fn absorb(state: u64, word: u64) -> u64 {
    mix(state.wrapping_add(GOLDEN).wrapping_add(word))
}

/// A tiny counter-based generator seeded from the node hash.
struct NodeRng(u64);

impl NodeRng {
    #[inline]
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(GOLDEN);
        mix(self.0)
    }

    /// Uniform draw from 0..n via the multiply-shift reduction; the bias
    /// of n/2^64 is far below anything observable here.
    #[inline]
    fn below(&mut self, n: u64) -> u64 {
        ((self.next() as u128 * n as u128) >> 64) as u64
    }
}

impl PermutationFamily for ScrambleKey {
    #[inline]
    fn permute(&self, base: u32, coordinate: usize, level: u32, prefix: u64, digit: u8) -> u8 {
        let mut h = mix(self.seed);
        h = absorb(h, self.replicate);
        h = absorb(h, ((coordinate as u64) << 8) | level as u64);
        h = absorb(h, prefix);
        let mut rng = NodeRng(h);
        // Fisher-Yates over {0..b-1}; base is capped at 64.
        let b = base as usize;
        let mut table = [0u8; 64];
        for (v, slot) in table.iter_mut().enumerate().take(b) {
            *slot = v as u8;
        }
        for k in (1..b).rev() {
            let r = rng.below(k as u64 + 1) as usize;
            table.swap(k, r);
        }
        table[digit as usize]
    }
}

/// Scrambles every digit of one coordinate in place.
///
/// `digits` holds the original digits on entry (most significant first)
/// and the scrambled digits on exit. The permutation path is keyed by
/// the original digits.
pub(crate) fn scramble_digits_in_place(
    family: &dyn PermutationFamily,
    base: u32,
    coordinate: usize,
    digits: &mut [u8],
) {
    let b = base as u64;
    let mut prefix = 0u64;
    let mut scale = 1u64;
    for (k, d) in digits.iter_mut().enumerate() {
        let original = *d;
        *d = family.permute(base, coordinate, k as u32, prefix, original);
        prefix += original as u64 * scale;
        scale = scale.wrapping_mul(b);
    }
}

/// Applies a nested uniform scramble to every point of a set.
///
/// The output has the same base, resolution, and depth; with a keyed
/// family the result is again a net of the same quality with
/// probability one.
pub fn scramble_point_set(points: &PointSet, family: &dyn PermutationFamily) -> PointSet {
    let base = points.base();
    let s = points.dimension();
    let depth = points.depth();
    let mut digits = points.raw_digits().to_vec();
    for chunk in 0..(points.n() * s) {
        let j = chunk % s;
        let start = chunk * depth;
        scramble_digits_in_place(family, base, j, &mut digits[start..start + depth]);
    }
    points.with_replaced_digits(digits)
}

/// Scrambles a single multi-coordinate point given as digit vectors.
pub fn scramble_point(point: &[DigitVector], family: &dyn PermutationFamily) -> Vec<DigitVector> {
    point
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut d = v.digits().to_vec();
            scramble_digits_in_place(family, v.base(), j, &mut d);
            DigitVector::new(v.base(), d).expect("permuted digits stay valid")
        })
        .collect()
}

/// Chi-square check that repeated scrambles of one fixed point land
/// uniformly across the b^(level*s) digit cells at the given level.
///
/// `family_for(r)` supplies the permutation family for trial r; trials
/// must number at least 50 per cell.
pub fn uniformity_check<F, M>(
    point: &[DigitVector],
    trials: u64,
    level: usize,
    mut family_for: M,
) -> Result<ChiSquare, ScrambleError>
where
    F: PermutationFamily,
    M: FnMut(u64) -> F,
{
    let s = point.len();
    if s == 0 {
        return Err(ScrambleError::EmptyPoint);
    }
    let base = point[0].base();
    for v in point {
        if level > v.depth() {
            return Err(ScrambleError::LevelTooDeep {
                level,
                depth: v.depth(),
            });
        }
    }
    let cells_per_coord = (base as u64).pow(level as u32);
    let cells = cells_per_coord.pow(s as u32);
    if trials < 50 * cells {
        return Err(ScrambleError::TooFewTrials {
            got: trials,
            need: 50 * cells,
            cells,
        });
    }
    let mut counts = vec![0u64; cells as usize];
    for r in 0..trials {
        let family = family_for(r);
        let scrambled = scramble_point(point, &family);
        let mut index = 0u64;
        let mut stride = 1u64;
        for v in &scrambled {
            index += v.prefix_index(level) * stride;
            stride *= cells_per_coord;
        }
        counts[index as usize] += 1;
    }
    Ok(ChiSquare::from_counts_uniform(&counts, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::{faure_net_with_depth, vdc_points_with_depth, verify_net};
    use crate::stats::chi_square_critical;

    /// Leaves every digit unchanged; for invariance tests.
    struct IdentityFamily;
    impl PermutationFamily for IdentityFamily {
        fn permute(&self, _b: u32, _j: usize, _k: u32, _p: u64, digit: u8) -> u8 {
            digit
        }
    }

    /// Forces the root-level permutation to the identity but scrambles
    /// deeper levels; deliberately breaks uniformity at level 1.
    struct PinnedRoot(ScrambleKey);
    impl PermutationFamily for PinnedRoot {
        fn permute(&self, b: u32, j: usize, k: u32, p: u64, digit: u8) -> u8 {
            if k == 0 {
                digit
            } else {
                self.0.permute(b, j, k, p, digit)
            }
        }
    }

    #[test]
    fn identity_family_is_a_no_op() {
        let net = faure_net_with_depth(2, 2, 3, 8).unwrap();
        let out = scramble_point_set(&net, &IdentityFamily);
        for i in 0..net.n() {
            for j in 0..2 {
                assert_eq!(out.coordinate_digits(i, j), net.coordinate_digits(i, j));
            }
        }
    }

    #[test]
    fn scramble_is_deterministic_in_the_key() {
        let net = faure_net_with_depth(3, 2, 2, 10).unwrap();
        let key = ScrambleKey::new(7, 3);
        let a = scramble_point_set(&net, &key);
        let b = scramble_point_set(&net, &key);
        assert_eq!(a.raw_digits(), b.raw_digits());
        let c = scramble_point_set(&net, &ScrambleKey::new(7, 4));
        assert_ne!(a.raw_digits(), c.raw_digits());
    }

    #[test]
    fn scramble_preserves_net_property() {
        for seed in 0..20u64 {
            let net = vdc_points_with_depth(2, 4, 8).unwrap();
            let out = scramble_point_set(&net, &ScrambleKey::new(seed, 0));
            assert!(verify_net(&out, 0).unwrap(), "seed {seed}");
        }
        for seed in 0..10u64 {
            let net = faure_net_with_depth(3, 3, 3, 8).unwrap();
            let out = scramble_point_set(&net, &ScrambleKey::new(seed, 1));
            assert!(verify_net(&out, 0).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn shared_prefixes_stay_shared_and_split_digits_stay_split() {
        // Points 0.00 and 0.01 in base 2 share one leading digit.
        let a = DigitVector::new(2, vec![0, 0, 1, 0]).unwrap();
        let b = DigitVector::new(2, vec![0, 1, 1, 0]).unwrap();
        for seed in 0..50u64 {
            let key = ScrambleKey::new(seed, 0);
            let sa = scramble_point(std::slice::from_ref(&a), &key);
            let sb = scramble_point(std::slice::from_ref(&b), &key);
            // Same level-1 permutation of the same digit: equal first digits.
            assert_eq!(sa[0].digits()[0], sb[0].digits()[0]);
            // Same level-2 permutation of different digits: they must differ.
            assert_ne!(sa[0].digits()[1], sb[0].digits()[1]);
        }
    }

    #[test]
    fn permutation_ignores_point_identity() {
        // The same (coordinate, level, prefix) node must produce the same
        // image no matter which point visits it.
        let key = ScrambleKey::new(11, 2);
        let img1 = key.permute(5, 0, 3, 17, 4);
        let img2 = key.permute(5, 0, 3, 17, 4);
        assert_eq!(img1, img2);
        // A bijection on {0..b-1}.
        let mut seen = [false; 5];
        for d in 0..5u8 {
            let img = key.permute(5, 1, 2, 9, d) as usize;
            assert!(!seen[img]);
            seen[img] = true;
        }
    }

    #[test]
    fn first_digit_of_scrambled_zero_is_balanced() {
        // Prop check: the scrambled point is uniform, so the first digit
        // of 0.000.. in base 2 is 1 with probability 1/2.
        let zero = DigitVector::zeros(2, 8).unwrap();
        let trials = 10_000u64;
        let ones: u64 = (0..trials)
            .map(|r| {
                let out = scramble_point(std::slice::from_ref(&zero), &ScrambleKey::new(123, r));
                out[0].digits()[0] as u64
            })
            .sum();
        let freq = ones as f64 / trials as f64;
        // 3-sigma band around 1/2 for a binomial proportion.
        assert!((freq - 0.5).abs() < 3.0 * (0.25f64 / trials as f64).sqrt());
    }

    #[test]
    fn uniformity_check_passes_for_keyed_family() {
        let zero = vec![DigitVector::zeros(2, 8).unwrap()];
        for level in 1..=3usize {
            let trials = 100 * 2u64.pow(level as u32);
            let report =
                uniformity_check(&zero, trials, level, |r| ScrambleKey::new(42, r)).unwrap();
            let threshold = chi_square_critical(report.df, 0.999);
            assert!(
                report.statistic <= threshold,
                "level {level}: {} > {threshold}",
                report.statistic
            );
        }
    }

    #[test]
    fn uniformity_check_rejects_pinned_root() {
        let zero = vec![DigitVector::zeros(2, 8).unwrap()];
        let report =
            uniformity_check(&zero, 200, 1, |r| PinnedRoot(ScrambleKey::new(42, r))).unwrap();
        let threshold = chi_square_critical(report.df, 0.999);
        // Digit 0 never moves, so all mass is in one cell.
        assert!(report.statistic > threshold);
    }

    #[test]
    fn uniformity_check_guards_trial_count() {
        let zero = vec![DigitVector::zeros(2, 8).unwrap()];
        let err = uniformity_check(&zero, 80, 1, |r| ScrambleKey::new(1, r)).unwrap_err();
        assert_eq!(
            err,
            ScrambleError::TooFewTrials {
                got: 80,
                need: 100,
                cells: 2
            }
        );
    }
}
