//! Digital net constructions and exhaustive equidistribution checking.
//!
//! A point set with n = b^m points in [0,1)^s is a (t,m,s)-net in base b
//! when every b-adic box of volume b^(t-m) contains exactly b^t points.
//! `verify_net` checks that definition directly on digit prefixes; no
//! float comparisons are involved.

use crate::digits::{self, DigitError, DigitVector};
use thiserror::Error;

/// Errors from net construction and verification.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetError {
    #[error(transparent)]
    Digits(#[from] DigitError),
    #[error("base {0} is not prime; the built-in construction needs a prime base")]
    BaseNotPrime(u32),
    #[error("dimension {s} exceeds base {base}; no generator matrices available")]
    DimensionTooLarge { s: usize, base: u32 },
    #[error("point count {0} is not a power of the base")]
    NotPowerOfBase(usize),
    #[error("quality parameter t={t} exceeds resolution m={m}")]
    QualityTooLarge { t: u32, m: u32 },
    #[error("resolution m={m} exceeds digit depth {depth}")]
    DepthTooSmall { m: u32, depth: usize },
    #[error("generator matrix count {got} does not match dimension {want}")]
    GeneratorCount { got: usize, want: usize },
}

/// Square matrix over Z_b used to generate one coordinate of a digital net.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMatrix {
    base: u32,
    size: usize,
    /// Row-major entries, each reduced mod base.
    entries: Vec<u8>,
}

impl GeneratorMatrix {
    pub fn identity(base: u32, size: usize) -> Self {
        let mut entries = vec![0u8; size * size];
        for r in 0..size {
            entries[r * size + r] = 1;
        }
        Self {
            base,
            size,
            entries,
        }
    }

    /// The upper-triangular Pascal matrix: entry (r, c) = C(c, r) mod b.
    pub fn pascal(base: u32, size: usize) -> Self {
        let b = base as u64;
        let mut entries = vec![0u8; size * size];
        for c in 0..size {
            // Row of binomial coefficients C(c, r) built by the additive rule.
            let mut coeff = 1u64;
            for r in 0..=c {
                entries[r * size + c] = (coeff % b) as u8;
                // C(c, r+1) = C(c, r) * (c - r) / (r + 1), exact in u64 for
                // the sizes used here (m <= 64 keeps C(c, r) < 2^62).
                coeff = coeff * ((c - r) as u64) / (r as u64 + 1);
            }
        }
        Self {
            base,
            size,
            entries,
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.size + col]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Product of two matrices over Z_b.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.size, other.size);
        assert_eq!(self.base, other.base);
        let n = self.size;
        let b = self.base as u64;
        let mut entries = vec![0u8; n * n];
        for r in 0..n {
            for c in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc += self.entry(r, k) as u64 * other.entry(k, c) as u64;
                }
                entries[r * n + c] = (acc % b) as u8;
            }
        }
        Self {
            base: self.base,
            size: n,
            entries,
        }
    }

    /// y = M a mod b, where `a` is least-significant-first input digits.
    fn apply(&self, a: &[u8], out: &mut [u8]) {
        let b = self.base as u64;
        for (r, slot) in out.iter_mut().enumerate().take(self.size) {
            let mut acc = 0u64;
            for (c, &ac) in a.iter().enumerate() {
                acc += self.entry(r, c) as u64 * ac as u64;
            }
            *slot = (acc % b) as u8;
        }
    }
}

/// Construction recipe for a digital net: base, dimension, resolution,
/// declared quality t, and one generator matrix per coordinate.
#[derive(Clone, Debug)]
pub struct NetSpec {
    pub base: u32,
    pub dimension: usize,
    pub resolution: u32,
    pub quality: u32,
    pub generators: Vec<GeneratorMatrix>,
}

/// A finite point set held in digit form: n points, s coordinates,
/// `depth` base-b digits per coordinate (resolution digits, zero-padded).
#[derive(Clone, Debug)]
pub struct PointSet {
    base: u32,
    dimension: usize,
    resolution: u32,
    quality: u32,
    depth: usize,
    n: usize,
    /// Digits in point-major, coordinate-major, most-significant-first order.
    digits: Vec<u8>,
}

impl PointSet {
    pub fn base(&self) -> u32 {
        self.base
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of coordinates per point.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Digit resolution m of the construction (meaningful digits).
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Quality parameter t declared by the construction.
    pub fn quality(&self) -> u32 {
        self.quality
    }

    /// Stored digit depth K (>= resolution; tail is zero padding).
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Digits of coordinate `j` of point `i`, most significant first.
    pub fn coordinate_digits(&self, i: usize, j: usize) -> &[u8] {
        let start = (i * self.dimension + j) * self.depth;
        &self.digits[start..start + self.depth]
    }

    pub fn digit_vector(&self, i: usize, j: usize) -> DigitVector {
        DigitVector::new(self.base, self.coordinate_digits(i, j).to_vec())
            .expect("stored digits are valid")
    }

    /// Float value of coordinate `j` of point `i`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        digits::digits_to_value(self.base, self.coordinate_digits(i, j))
    }

    /// Integer index of the first `k` digits of coordinate `j` of point `i`.
    pub fn prefix_index(&self, i: usize, j: usize, k: usize) -> u64 {
        digits::prefix_index(self.base, &self.coordinate_digits(i, j)[..k])
    }

    /// Builds a point set from explicit per-point digit vectors (row = point).
    pub fn from_digit_vectors(
        base: u32,
        resolution: u32,
        quality: u32,
        points: &[Vec<DigitVector>],
    ) -> Result<Self, NetError> {
        let dimension = points.first().map_or(0, Vec::len);
        let depth = points
            .first()
            .and_then(|p| p.first())
            .map_or(0, DigitVector::depth);
        let mut digits = Vec::with_capacity(points.len() * dimension * depth);
        for p in points {
            assert_eq!(p.len(), dimension, "ragged point rows");
            for v in p {
                assert_eq!(v.base(), base, "mixed bases");
                assert_eq!(v.depth(), depth, "mixed depths");
                digits.extend_from_slice(v.digits());
            }
        }
        Ok(Self {
            base,
            dimension,
            resolution,
            quality,
            depth,
            n: points.len(),
            digits,
        })
    }

    pub(crate) fn with_replaced_digits(&self, digits: Vec<u8>) -> Self {
        assert_eq!(digits.len(), self.digits.len());
        Self {
            digits,
            ..self.clone()
        }
    }

    pub(crate) fn raw_digits(&self) -> &[u8] {
        &self.digits
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn resolution_for(n: usize, base: u32) -> Result<u32, NetError> {
    let b = base as u128;
    let mut m = 0u32;
    let mut pow = 1u128;
    while pow < n as u128 {
        pow *= b;
        m += 1;
    }
    if pow == n as u128 {
        Ok(m)
    } else {
        Err(NetError::NotPowerOfBase(n))
    }
}

/// First `n` points of the van der Corput sequence in base `base`,
/// at the default digit depth. Point i is radical_inverse(i-1).
pub fn vdc_points(base: u32, n: usize) -> Result<PointSet, NetError> {
    vdc_points_with_depth(base, n, digits::default_depth(base))
}

/// `vdc_points` with an explicit stored digit depth.
pub fn vdc_points_with_depth(base: u32, n: usize, depth: usize) -> Result<PointSet, NetError> {
    let resolution = resolution_for(n, base)?;
    if (resolution as usize) > depth {
        return Err(NetError::DepthTooSmall {
            m: resolution,
            depth,
        });
    }
    let mut digits = Vec::with_capacity(n * depth);
    for i in 0..n {
        // Mirroring about the radix point: the LSB-first integer digits
        // are exactly the MSB-first fractional digits.
        digits.extend_from_slice(&digits::int_to_digits(i as u64, base, depth)?);
    }
    Ok(PointSet {
        base,
        dimension: 1,
        resolution,
        quality: 0,
        depth,
        n,
        digits,
    })
}

/// Generator matrices of the classical prime-base construction: coordinate
/// j uses the (j-1)-th power of the Pascal matrix mod b.
pub fn power_of_pascal_generators(
    base: u32,
    s: usize,
    m: u32,
) -> Result<Vec<GeneratorMatrix>, NetError> {
    if !is_prime(base) {
        return Err(NetError::BaseNotPrime(base));
    }
    if s > base as usize {
        return Err(NetError::DimensionTooLarge { s, base });
    }
    let size = m as usize;
    let pascal = GeneratorMatrix::pascal(base, size);
    let mut generators = Vec::with_capacity(s);
    let mut current = GeneratorMatrix::identity(base, size);
    for _ in 0..s {
        generators.push(current.clone());
        current = current.mul(&pascal);
    }
    Ok(generators)
}

/// The prime-base (0,m,s)-net construction at the default digit depth.
pub fn faure_net(base: u32, s: usize, m: u32) -> Result<PointSet, NetError> {
    faure_net_with_depth(base, s, m, digits::default_depth(base))
}

/// `faure_net` with an explicit stored digit depth.
pub fn faure_net_with_depth(
    base: u32,
    s: usize,
    m: u32,
    depth: usize,
) -> Result<PointSet, NetError> {
    let generators = power_of_pascal_generators(base, s, m)?;
    let spec = NetSpec {
        base,
        dimension: s,
        resolution: m,
        quality: 0,
        generators,
    };
    digital_net(&spec, depth)
}

/// Generic digital net: all b^m points produced by the given generator
/// matrices, stored at digit depth `depth`.
pub fn digital_net(spec: &NetSpec, depth: usize) -> Result<PointSet, NetError> {
    if spec.generators.len() != spec.dimension {
        return Err(NetError::GeneratorCount {
            got: spec.generators.len(),
            want: spec.dimension,
        });
    }
    if spec.quality > spec.resolution {
        return Err(NetError::QualityTooLarge {
            t: spec.quality,
            m: spec.resolution,
        });
    }
    let m = spec.resolution as usize;
    if m > depth {
        return Err(NetError::DepthTooSmall {
            m: spec.resolution,
            depth,
        });
    }
    for g in &spec.generators {
        assert_eq!(g.size(), m, "generator size must equal resolution");
    }
    let n = (spec.base as u64)
        .checked_pow(spec.resolution)
        .expect("b^m fits in u64") as usize;
    let mut digits = vec![0u8; n * spec.dimension * depth];
    let mut a = vec![0u8; m];
    for i in 0..n {
        a.copy_from_slice(&digits::int_to_digits(i as u64, spec.base, m)?);
        for (j, g) in spec.generators.iter().enumerate() {
            let start = (i * spec.dimension + j) * depth;
            g.apply(&a, &mut digits[start..start + m]);
        }
    }
    Ok(PointSet {
        base: spec.base,
        dimension: spec.dimension,
        resolution: spec.resolution,
        quality: spec.quality,
        depth,
        n,
        digits,
    })
}

/// Enumerates all compositions of `total` into `parts` nonnegative parts.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; parts];
    fn rec(
        remaining: u32,
        idx: u32,
        parts: usize,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if idx as usize == parts - 1 {
            current[parts - 1] = remaining;
            out.push(current.clone());
            return;
        }
        for k in 0..=remaining {
            current[idx as usize] = k;
            rec(remaining - k, idx + 1, parts, current, out);
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, 0, parts, &mut current, &mut out);
    out
}

/// Checks the (t,m,s)-net property exhaustively on digit prefixes.
///
/// Every b-adic box with side exponents (k_1..k_s) summing to m-t must
/// contain exactly b^t points. Returns Ok(false) on the first violation.
pub fn verify_net(points: &PointSet, t: u32) -> Result<bool, NetError> {
    let m = resolution_for(points.n(), points.base())?;
    if t > m {
        return Err(NetError::QualityTooLarge { t, m });
    }
    if (m as usize) > points.depth() {
        return Err(NetError::DepthTooSmall {
            m,
            depth: points.depth(),
        });
    }
    let b = points.base() as u64;
    let s = points.dimension();
    let boxes = b.pow(m - t) as usize;
    let expected = b.pow(t);
    let mut counts = vec![0u64; boxes];
    for shape in compositions(m - t, s) {
        counts.iter_mut().for_each(|c| *c = 0);
        for i in 0..points.n() {
            let mut index = 0u64;
            let mut stride = 1u64;
            for (j, &k) in shape.iter().enumerate() {
                index += points.prefix_index(i, j, k as usize) * stride;
                stride *= b.pow(k);
            }
            counts[index as usize] += 1;
        }
        if counts.iter().any(|&c| c != expected) {
            return Ok(false);
        }
    }
    Ok(true)
}
