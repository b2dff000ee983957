//! Variance decompositions on leaf-cell tensor grids.
//!
//! A [`LeafGrid`] discretizes an integrand by the representative values
//! of all level-D cells of each factor, giving a uniform discrete
//! measure on b^(D*s) leaves (every leaf cell has measure b^-D in its
//! factor). On that grid the multiresolution and ANOVA identities are
//! exact: components are computed by averaging operators along each
//! axis, and their sums reproduce the grid variance to rounding error.
//! Discretization is the only approximation, and it vanishes at rate
//! b^(-2D/d) for smooth integrands.

use super::gains::gain_coefficient;
use super::{replicate_variance, Integrand, QuadError};
use crate::nets::PointSet;
use crate::regions::transform::enumerate_cells;
use crate::regions::{ProductSpace, Region, RegionPoint};

/// Cap on the number of leaves a grid may hold.
const MAX_GRID: u128 = 1 << 22;

/// Integrand values on the tensor grid of level-D leaf cells.
pub struct LeafGrid {
    base: u32,
    s: usize,
    depth: usize,
    axis_len: usize,
    values: Vec<f64>,
}

/// Tabulates the integrand on all leaf-cell representatives.
pub fn leaf_grid(f: &Integrand, space: &ProductSpace, depth: usize) -> Result<LeafGrid, QuadError> {
    if f.arity() != space.s() {
        return Err(QuadError::IntegrandArity {
            integrand: f.arity(),
            space: space.s(),
        });
    }
    let base = space.base();
    let s = space.s();
    let axis_u128 = (base as u128).pow(depth as u32);
    let total_u128 = axis_u128.checked_pow(s as u32).unwrap_or(u128::MAX);
    if total_u128 > MAX_GRID {
        return Err(QuadError::GridTooLarge(total_u128));
    }
    let axis_len = axis_u128 as usize;
    let total = total_u128 as usize;
    let mut reps: Vec<Vec<RegionPoint>> = Vec::with_capacity(s);
    for factor in space.factors() {
        let cells = enumerate_cells(&factor.root, factor.rule.as_ref(), depth)?;
        reps.push(cells.iter().map(Region::representative).collect());
    }
    let mut values = Vec::with_capacity(total);
    let mut coords = vec![RegionPoint::one(0.0); s];
    for flat in 0..total {
        let mut rest = flat;
        for (j, c) in coords.iter_mut().enumerate() {
            *c = reps[j][rest % axis_len];
            rest /= axis_len;
        }
        values.push(f.eval(&coords));
    }
    Ok(LeafGrid {
        base,
        s,
        depth,
        axis_len,
        values,
    })
}

/// Replaces every value with the mean of its group along one axis,
/// where two axis positions share a group when they agree modulo `p`
/// (i.e. share their first log_b(p) digits; positions index cells with
/// the first digit in the low place).
fn average_axis_groups(values: &mut [f64], axis_len: usize, stride: usize, p: usize) {
    let group_size = axis_len / p;
    let inv = 1.0 / group_size as f64;
    let outer_stride = stride * axis_len;
    for block in (0..values.len()).step_by(outer_stride) {
        for lo in 0..stride {
            let start = block + lo;
            for r in 0..p {
                let mut sum = 0.0;
                for t in 0..group_size {
                    sum += values[start + (r + t * p) * stride];
                }
                let mean = sum * inv;
                for t in 0..group_size {
                    values[start + (r + t * p) * stride] = mean;
                }
            }
        }
    }
}

impl LeafGrid {
    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Mean over all leaves.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population variance over all leaves.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / self.values.len() as f64
    }

    fn stride(&self, axis: usize) -> usize {
        self.axis_len.pow(axis as u32)
    }

    fn check_projection(&self, u: &[usize]) -> Result<(), QuadError> {
        if u.is_empty() || u.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QuadError::BadProjection);
        }
        if *u.last().expect("nonempty") >= self.s {
            return Err(QuadError::BadProjection);
        }
        Ok(())
    }

    /// Applies the level-k detail operator (difference of the level-k+1
    /// and level-k averaging projections) along one axis.
    fn detail_axis(&self, values: &mut [f64], axis: usize, k: usize) {
        let fine_p = (self.base as usize).pow(k as u32 + 1);
        let coarse_p = (self.base as usize).pow(k as u32);
        let mut fine = values.to_vec();
        average_axis_groups(&mut fine, self.axis_len, self.stride(axis), fine_p);
        average_axis_groups(values, self.axis_len, self.stride(axis), coarse_p);
        for (v, f) in values.iter_mut().zip(&fine) {
            *v = f - *v;
        }
    }

    /// The multiresolution variance component sigma2[u, kappa]: detail at
    /// level kappa[j] along each axis in u, full average along the rest.
    pub fn component(&self, u: &[usize], kappa: &[u32]) -> Result<f64, QuadError> {
        self.check_projection(u)?;
        if u.len() != kappa.len() {
            return Err(QuadError::ProjectionArity {
                u: u.len(),
                kappa: kappa.len(),
            });
        }
        if let Some(&k) = kappa.iter().max() {
            if k as usize + 1 > self.depth {
                return Err(QuadError::LevelTooDeep {
                    level: k as usize + 1,
                    depth: self.depth,
                });
            }
        }
        let mut g = self.values.clone();
        let mut level = vec![None; self.s];
        for (&j, &k) in u.iter().zip(kappa) {
            level[j] = Some(k as usize);
        }
        for (axis, lv) in level.iter().enumerate() {
            match lv {
                Some(k) => self.detail_axis(&mut g, axis, *k),
                None => average_axis_groups(&mut g, self.axis_len, self.stride(axis), 1),
            }
        }
        Ok(g.iter().map(|v| v * v).sum::<f64>() / g.len() as f64)
    }

    /// The ANOVA variance component sigma2[u]: centering along each axis
    /// in u, full average along the rest.
    pub fn anova_component(&self, u: &[usize]) -> Result<f64, QuadError> {
        self.check_projection(u)?;
        let mut g = self.values.clone();
        for axis in 0..self.s {
            if u.contains(&axis) {
                let mut avg = g.clone();
                average_axis_groups(&mut avg, self.axis_len, self.stride(axis), 1);
                for (v, a) in g.iter_mut().zip(&avg) {
                    *v -= a;
                }
            } else {
                average_axis_groups(&mut g, self.axis_len, self.stride(axis), 1);
            }
        }
        Ok(g.iter().map(|v| v * v).sum::<f64>() / g.len() as f64)
    }

    /// All ANOVA components, one per nonempty subset of coordinates.
    pub fn anova_table(&self) -> Result<Vec<(Vec<usize>, f64)>, QuadError> {
        assert!(self.s <= 16, "subset enumeration is exponential in s");
        let mut out = Vec::new();
        for mask in 1u32..(1 << self.s) {
            let u: Vec<usize> = (0..self.s).filter(|j| mask >> j & 1 == 1).collect();
            let sigma2 = self.anova_component(&u)?;
            out.push((u, sigma2));
        }
        Ok(out)
    }

    /// All multiresolution components with |kappa| <= max_total_level.
    pub fn mr_table(&self, max_total_level: u32) -> Result<Vec<MrEntry>, QuadError> {
        assert!(self.s <= 16, "subset enumeration is exponential in s");
        if max_total_level as usize + 1 > self.depth {
            return Err(QuadError::LevelTooDeep {
                level: max_total_level as usize + 1,
                depth: self.depth,
            });
        }
        let mut entries = Vec::new();
        for mask in 1u32..(1 << self.s) {
            let u: Vec<usize> = (0..self.s).filter(|j| mask >> j & 1 == 1).collect();
            let mut kappa = vec![0u32; u.len()];
            loop {
                if kappa.iter().sum::<u32>() <= max_total_level {
                    entries.push(MrEntry {
                        sigma2: self.component(&u, &kappa)?,
                        u: u.clone(),
                        kappa: kappa.clone(),
                    });
                }
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
}

/// One multiresolution variance component.
#[derive(Clone, Debug, PartialEq)]
pub struct MrEntry {
    pub u: Vec<usize>,
    pub kappa: Vec<u32>,
    pub sigma2: f64,
}

/// Outcome of comparing replicated empirical variance against the gain
/// decomposition.
#[derive(Clone, Copy, Debug)]
pub struct VarianceIdentityReport {
    /// Sample variance of the replicate estimates.
    pub empirical: f64,
    /// (1/n) * sum of Gamma[u,kappa] * sigma2[u,kappa] over the
    /// truncated component set.
    pub theoretical: f64,
    /// Acceptance band: three relative standard deviations of a
    /// chi-square variance estimate plus a worst-case bound on the
    /// truncated tail.
    pub tolerance: f64,
    /// Fraction of the (deep-grid) variance captured by the truncation.
    pub truncated_mass_ratio: f64,
    pub pass: bool,
}

/// Verifies Var(estimate) = (1/n) * sum Gamma[u,kappa] * sigma2[u,kappa]
/// empirically for one integrand and one base net.
///
/// Components are truncated at |kappa| <= 4 + (m - t); their mass is
/// compared against a grid two levels deeper to bound what the
/// truncation discards. The tail bound uses the worst-case gain
/// b^t ((b+1)/(b-1))^s; mass below the deeper grid's resolution is not
/// represented, which is negligible for integrands whose components
/// decay geometrically.
pub fn variance_identity_check(
    f: &Integrand,
    space: &ProductSpace,
    net: &PointSet,
    seed: u64,
    replicates: usize,
) -> Result<VarianceIdentityReport, QuadError> {
    let base = net.base();
    let s = space.s();
    let m = net.resolution();
    let t = net.quality();
    let kmax = 4 + (m - t);
    let depth_comp = kmax as usize + 1;
    // Deepest per-axis depth within the leaf budget.
    let mut depth_budget = depth_comp;
    while (base as u128).pow((depth_budget + 1) as u32 * s as u32) <= MAX_GRID {
        depth_budget += 1;
    }
    let depth_total = (depth_comp + 2).min(depth_budget);

    let grid = leaf_grid(f, space, depth_comp)?;
    let entries = grid.mr_table(kmax)?;
    let n = net.n() as f64;
    let mut theoretical = 0.0;
    let mut mass = 0.0;
    for e in &entries {
        let gamma = gain_coefficient(net, &e.u, &e.kappa)?;
        theoretical += gamma * e.sigma2;
        mass += e.sigma2;
    }
    theoretical /= n;

    let sigma_total = if depth_total > depth_comp {
        leaf_grid(f, space, depth_total)?.variance()
    } else {
        grid.variance()
    };
    let tail = (sigma_total - mass).max(0.0);
    let truncated_mass_ratio = if sigma_total > 0.0 {
        mass / sigma_total
    } else {
        1.0
    };
    let gamma_max =
        (base as f64).powi(t as i32) * ((base as f64 + 1.0) / (base as f64 - 1.0)).powi(s as i32);

    let report = replicate_variance(f, space, net, seed, replicates)?;
    let tolerance =
        3.0 * theoretical * (2.0 / (replicates as f64 - 1.0)).sqrt() + gamma_max * tail / n;
    let pass = (report.variance - theoretical).abs() <= tolerance;
    Ok(VarianceIdentityReport {
        empirical: report.variance,
        theoretical,
        tolerance,
        truncated_mass_ratio,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::vdc_points;
    use crate::quad::catalog::by_name;

    #[test]
    fn grid_moments_of_the_identity_function() {
        let f = by_name("interval-x").unwrap();
        let space = f.space(2).unwrap();
        let grid = leaf_grid(&f, &space, 6).unwrap();
        assert_eq!(grid.mean(), 0.5);
        // Variance of 64 equispaced midpoints: (1 - 4^-6)/12.
        let expect = (1.0 - 4f64.powi(-6)) / 12.0;
        assert!((grid.variance() - expect).abs() < 1e-15);
    }

    #[test]
    fn multiresolution_components_of_the_identity_function() {
        let f = by_name("interval-x").unwrap();
        let space = f.space(2).unwrap();
        let grid = leaf_grid(&f, &space, 6).unwrap();
        let mut sum = 0.0;
        for k in 0..6u32 {
            let sigma2 = grid.component(&[0], &[k]).unwrap();
            let expect = 2f64.powi(-2 * k as i32 - 4);
            assert!(
                (sigma2 - expect).abs() < 1e-15,
                "level {k}: {sigma2} vs {expect}"
            );
            sum += sigma2;
        }
        // Completeness: the levels the grid resolves account for all of
        // its variance.
        assert!((sum - grid.variance()).abs() < 1e-12);
        // The first five levels carry at least 99% of the mass.
        let head: f64 = (0..5).map(|k| 2f64.powi(-2 * k - 4)).sum();
        assert!(head >= 0.99 * (1.0 / 12.0));
    }

    #[test]
    fn indicator_concentrates_on_level_zero() {
        let f = by_name("ind-interval-half").unwrap();
        let space = f.space(2).unwrap();
        let grid = leaf_grid(&f, &space, 5).unwrap();
        assert_eq!(grid.component(&[0], &[0]).unwrap(), 0.25);
        for k in 1..5u32 {
            assert_eq!(grid.component(&[0], &[k]).unwrap(), 0.0);
        }
    }

    #[test]
    fn anova_of_the_product_function_matches_closed_forms() {
        let f = by_name("square-xy").unwrap();
        let space = f.space(2).unwrap();
        let grid = leaf_grid(&f, &space, 8).unwrap();
        let s1 = grid.anova_component(&[0]).unwrap();
        let s2 = grid.anova_component(&[1]).unwrap();
        let s12 = grid.anova_component(&[0, 1]).unwrap();
        assert!((s1 - 1.0 / 48.0).abs() < 1e-4 / 48.0);
        assert!((s2 - 1.0 / 48.0).abs() < 1e-4 / 48.0);
        assert!((s12 - 1.0 / 144.0).abs() < 1e-4 / 144.0);
        // The decomposition identity is exact on the grid itself.
        let total: f64 = grid
            .anova_table()
            .unwrap()
            .iter()
            .map(|(_, sigma2)| sigma2)
            .sum();
        assert!((total - grid.variance()).abs() < 1e-12);
    }

    #[test]
    fn additive_function_has_no_interaction() {
        let f = by_name("square-additive").unwrap();
        let space = f.space(2).unwrap();
        let grid = leaf_grid(&f, &space, 6).unwrap();
        assert_eq!(grid.anova_component(&[0, 1]).unwrap(), 0.0);
        let s1 = grid.anova_component(&[0]).unwrap();
        let expect = (1.0 - 4f64.powi(-6)) / 12.0;
        assert!((s1 - expect).abs() < 1e-14);
    }

    #[test]
    fn identity_check_is_exact_for_the_level_one_indicator() {
        // Gamma vanishes on every live component and the empirical
        // variance is exactly zero: 0 = 0 with zero tolerance.
        let f = by_name("ind-interval-half").unwrap();
        let space = f.space(2).unwrap();
        let net = vdc_points(2, 2).unwrap();
        let report = variance_identity_check(&f, &space, &net, 5, 100).unwrap();
        assert_eq!(report.empirical, 0.0);
        assert_eq!(report.theoretical, 0.0);
        assert!(report.pass);
        assert!(report.truncated_mass_ratio > 0.999_999);
    }

    #[test]
    fn identity_check_holds_for_a_smooth_function() {
        let f = by_name("interval-x").unwrap();
        let space = f.space(2).unwrap();
        let net = vdc_points(2, 4).unwrap();
        let report = variance_identity_check(&f, &space, &net, 42, 400).unwrap();
        assert!(
            report.pass,
            "empirical {} vs theoretical {} (tolerance {})",
            report.empirical, report.theoretical, report.tolerance
        );
        assert!(report.theoretical > 0.0);
        assert!(report.truncated_mass_ratio > 0.99);
    }

    #[test]
    fn grid_budget_is_enforced() {
        let f = by_name("square-xy").unwrap();
        let space = f.space(2).unwrap();
        assert!(matches!(
            leaf_grid(&f, &space, 12),
            Err(QuadError::GridTooLarge(_))
        ));
    }

    #[test]
    fn component_validation() {
        let f = by_name("interval-x").unwrap();
        let space = f.space(2).unwrap();
        let grid = leaf_grid(&f, &space, 4).unwrap();
        assert!(matches!(
            grid.component(&[], &[]),
            Err(QuadError::BadProjection)
        ));
        assert!(matches!(
            grid.component(&[0], &[4]),
            Err(QuadError::LevelTooDeep { .. })
        ));
        assert!(matches!(
            grid.component(&[1], &[0]),
            Err(QuadError::BadProjection)
        ));
    }
}
