//! The digit-vector-to-region transform and its diagnostics.
//!
//! A digit vector addresses a nested cell of a split-rule tree; the
//! transform descends that tree and returns the final cell's
//! representative point. Because every split preserves measure, a
//! uniformly scrambled digit vector maps to a uniformly distributed
//! point of the region — the property the checks in this module verify
//! empirically.

use thiserror::Error;

use super::schemes::SplitRule;
use super::{Region, RegionError, RegionPoint};
use crate::digits::{default_depth, DigitVector};
use crate::scramble::{scramble_digits_in_place, ScrambleError, ScrambleKey};
use crate::stats::ChiSquare;

/// Cap on cells produced by full-level enumeration.
const MAX_CELLS: u128 = 1 << 22;

/// Everything that can go wrong in the measure-preservation check.
#[derive(Debug, Error)]
pub enum MeasureCheckError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Scramble(#[from] ScrambleError),
}

/// Checks that a rule can drive the point transform on this root.
pub(crate) fn validate_transform(root: &Region, rule: &dyn SplitRule) -> Result<(), RegionError> {
    if !rule.convergent() {
        return Err(RegionError::NonConvergentRule(rule.name()));
    }
    if !rule.compatible(root) {
        return Err(RegionError::IncompatibleRegion { rule: rule.name() });
    }
    Ok(())
}

/// Follows the digits down the split tree and returns the final cell's
/// representative. Assumes the rule/root pair is already validated.
pub(crate) fn descend(
    root: &Region,
    rule: &dyn SplitRule,
    digits: &[u8],
) -> Result<RegionPoint, RegionError> {
    let mut cell = *root;
    for &d in digits {
        cell = rule.split(&cell, d)?;
    }
    Ok(cell.representative())
}

/// Maps a digit vector to a point of the region.
///
/// The digits select one cell per level; the returned point is the
/// representative of the cell at the vector's full depth. Rejects
/// non-convergent rules, incompatible roots, and base mismatches.
pub fn phi(
    digits: &DigitVector,
    root: &Region,
    rule: &dyn SplitRule,
) -> Result<RegionPoint, RegionError> {
    validate_transform(root, rule)?;
    if digits.base() != rule.base() {
        return Err(RegionError::DigitBaseMismatch {
            digits: digits.base(),
            rule: rule.base(),
        });
    }
    descend(root, rule, digits.digits())
}

/// All cells of the split tree at the given level, indexed by digit
/// prefix: the cell reached by digits a_1..a_k sits at index
/// sum_j a_j b^(j-1).
pub fn enumerate_cells(
    root: &Region,
    rule: &dyn SplitRule,
    level: usize,
) -> Result<Vec<Region>, RegionError> {
    if !rule.compatible(root) {
        return Err(RegionError::IncompatibleRegion { rule: rule.name() });
    }
    let b = rule.base() as usize;
    let n = (b as u128)
        .checked_pow(level as u32)
        .filter(|&n| n <= MAX_CELLS)
        .ok_or(RegionError::EnumerationTooLarge(
            (b as u128).saturating_pow(level as u32),
        ))?;
    let mut cells = vec![*root];
    for _ in 0..level {
        let width = cells.len();
        let mut next = vec![*root; width * b];
        for (t, cell) in cells.iter().enumerate() {
            for d in 0..b {
                next[t + d * width] = rule.split(cell, d as u8)?;
            }
        }
        cells = next;
    }
    debug_assert_eq!(cells.len() as u128, n);
    Ok(cells)
}

/// Scale factor b^(k/d), exact when d divides k.
fn level_scale(base: u32, dim: u32, k: u32) -> f64 {
    let whole = (base as f64).powi((k / dim) as i32);
    let rem = k % dim;
    if rem == 0 {
        whole
    } else {
        whole * (base as f64).powf(rem as f64 / dim as f64)
    }
}

/// Worst-case cell elongation per level under a split rule.
///
/// `per_level[k]` is max diam(cell) * b^(k/d) over level-k cells; for a
/// rule whose cells stay well shaped this is bounded in k (constant for
/// exactly self-similar rules), while degenerate rules let it grow
/// without bound.
#[derive(Clone, Debug)]
pub struct SphericityReport {
    pub per_level: Vec<f64>,
    pub c_hat: f64,
}

/// Measures cell elongation level by level down to `depth`.
///
/// Works for non-convergent rules too; that is the point — the probe is
/// how such rules are detected empirically.
pub fn sphericity_probe(
    root: &Region,
    rule: &dyn SplitRule,
    depth: u32,
) -> Result<SphericityReport, RegionError> {
    if !rule.compatible(root) {
        return Err(RegionError::IncompatibleRegion { rule: rule.name() });
    }
    let b = rule.base();
    (b as u128)
        .checked_pow(depth)
        .filter(|&n| n <= MAX_CELLS)
        .ok_or(RegionError::EnumerationTooLarge(
            (b as u128).saturating_pow(depth),
        ))?;
    let mut cells = vec![*root];
    let mut per_level = Vec::with_capacity(depth as usize + 1);
    for k in 0..=depth {
        let max_diam = cells.iter().map(Region::diameter).fold(0.0, f64::max);
        per_level.push(max_diam * level_scale(b, rule.dim(), k));
        if k < depth {
            let mut next = Vec::with_capacity(cells.len() * b as usize);
            for cell in &cells {
                for d in 0..b as u8 {
                    next.push(rule.split(cell, d)?);
                }
            }
            cells = next;
        }
    }
    let c_hat = per_level.iter().copied().fold(0.0, f64::max);
    Ok(SphericityReport { per_level, c_hat })
}

/// Finds the index of the level-k cell containing a point by greedy
/// descent on the containment margin. Indexing matches
/// [`enumerate_cells`].
fn locate(
    root: &Region,
    rule: &dyn SplitRule,
    level: usize,
    point: &RegionPoint,
) -> Result<usize, RegionError> {
    let b = rule.base() as u8;
    let mut cell = *root;
    let mut index = 0usize;
    let mut scale = 1usize;
    for _ in 0..level {
        let mut best = rule.split(&cell, 0)?;
        let mut best_digit = 0u8;
        let mut best_margin = best.containment_margin(point);
        for d in 1..b {
            let child = rule.split(&cell, d)?;
            let margin = child.containment_margin(point);
            if margin > best_margin {
                best = child;
                best_digit = d;
                best_margin = margin;
            }
        }
        index += best_digit as usize * scale;
        scale *= b as usize;
        cell = best;
    }
    Ok(index)
}

/// Empirical check that the transform carries the uniform measure.
///
/// One fixed point is scrambled `samples` times with independent keys
/// derived from `seed`, mapped into the region, and classified
/// geometrically into the level-k cells. The returned chi-square
/// statistic compares cell counts against each cell's share of the
/// region's measure, so a rule with unequal children fails even though
/// its own digit addressing is self-consistent. Requires at least 50
/// samples per cell.
pub fn measure_preservation_check(
    root: &Region,
    rule: &dyn SplitRule,
    level: usize,
    samples: u64,
    seed: u64,
) -> Result<ChiSquare, MeasureCheckError> {
    assert!(level >= 1, "classification needs at least one level");
    validate_transform(root, rule)?;
    let base = rule.base();
    if level > default_depth(base) {
        return Err(ScrambleError::LevelTooDeep {
            level,
            depth: default_depth(base),
        }
        .into());
    }
    let cells = enumerate_cells(root, rule, level)?;
    let need = 50 * cells.len() as u64;
    if samples < need {
        return Err(ScrambleError::TooFewTrials {
            got: samples,
            need,
            cells: cells.len() as u64,
        }
        .into());
    }
    // A few extra digits past the counting level keep the mapped point
    // strictly interior to its level-k cell.
    let depth = default_depth(base).min(level + 16);
    let mut counts = vec![0u64; cells.len()];
    let mut digits = vec![0u8; depth];
    for r in 0..samples {
        digits.fill(0);
        let key = ScrambleKey::new(seed, r);
        scramble_digits_in_place(&key, base, 0, &mut digits);
        let point = descend(root, rule, &digits)?;
        let t = locate(root, rule, level, &point)?;
        counts[t] += 1;
    }
    let volumes: Vec<f64> = cells.iter().map(Region::volume).collect();
    Ok(ChiSquare::from_counts_weighted(&counts, &volumes, samples))
}
