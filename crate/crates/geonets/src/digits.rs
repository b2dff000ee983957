//! Base-b digit expansions of integers and fractions.
//!
//! Points are manipulated as digit vectors rather than floats so that
//! prefix comparisons, box counting, and digit permutations are exact.
//! Floats only appear at the final conversion step.

use thiserror::Error;

/// Largest supported base for digit expansions.
pub const MAX_BASE: u32 = 64;

/// Errors from digit-expansion operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DigitError {
    #[error("base {0} out of supported range 2..={MAX_BASE}")]
    BadBase(u32),
    #[error("integer {n} needs more than {depth} base-{base} digits")]
    Overflow { n: u64, base: u32, depth: usize },
    #[error("digit {digit} not in 0..{base}")]
    BadDigit { digit: u8, base: u32 },
}

fn check_base(base: u32) -> Result<(), DigitError> {
    if (2..=MAX_BASE).contains(&base) {
        Ok(())
    } else {
        Err(DigitError::BadBase(base))
    }
}

/// Default digit depth: as many base-b digits as fit in an f64 mantissa.
pub fn default_depth(base: u32) -> usize {
    (52.0 / (base as f64).log2()).floor() as usize
}

/// Digits of `n` in base `base`, least-significant first, padded to `depth`.
///
/// Errors if `n` does not fit in `depth` digits.
pub fn int_to_digits(n: u64, base: u32, depth: usize) -> Result<Vec<u8>, DigitError> {
    check_base(base)?;
    let b = base as u64;
    let mut digits = vec![0u8; depth];
    let mut rest = n;
    for d in digits.iter_mut() {
        *d = (rest % b) as u8;
        rest /= b;
    }
    if rest != 0 {
        return Err(DigitError::Overflow { n, base, depth });
    }
    Ok(digits)
}

/// Radical inverse: mirrors the base-b digits of `n` about the radix point.
pub fn radical_inverse(n: u64, base: u32) -> f64 {
    debug_assert!(check_base(base).is_ok());
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let (mut value, mut scale, mut rest) = (0.0_f64, inv, n);
    while rest > 0 {
        value += (rest % b) as f64 * scale;
        scale *= inv;
        rest /= b;
    }
    value
}

/// A fraction in [0,1) held as base-b digits, most significant first.
///
/// The canonical form of a terminating expansion pads with zeros; no
/// constructor ever produces a trailing tail of (b-1)s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitVector {
    base: u32,
    digits: Vec<u8>,
}

impl DigitVector {
    /// Wraps explicit digits (most significant first), validating each.
    pub fn new(base: u32, digits: Vec<u8>) -> Result<Self, DigitError> {
        check_base(base)?;
        for &d in &digits {
            if u32::from(d) >= base {
                return Err(DigitError::BadDigit { digit: d, base });
            }
        }
        Ok(Self { base, digits })
    }

    /// The all-zeros fraction (the point 0) at the given depth.
    pub fn zeros(base: u32, depth: usize) -> Result<Self, DigitError> {
        check_base(base)?;
        Ok(Self {
            base,
            digits: vec![0; depth],
        })
    }

    /// Digit vector of `radical_inverse(n, base)`, padded to `depth`.
    ///
    /// Mirroring about the radix point sends the integer's j-th
    /// least-significant digit to the j-th fractional position, so the
    /// LSB-first integer digits are already in fractional order.
    pub fn from_radical_inverse(n: u64, base: u32, depth: usize) -> Result<Self, DigitError> {
        let digits = int_to_digits(n, base, depth)?;
        Ok(Self { base, digits })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// Digits, most significant first.
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// The fraction these digits denote, rounding only in this conversion.
    pub fn value(&self) -> f64 {
        digits_to_value(self.base, &self.digits)
    }

    /// Integer index of the first `k` digits: sum of a_j * b^(j-1).
    ///
    /// Exact for every supported (base, depth) pair.
    pub fn prefix_index(&self, k: usize) -> u64 {
        prefix_index(self.base, &self.digits[..k])
    }
}

/// Value of fractional digits (most significant first) in base `base`.
pub fn digits_to_value(base: u32, digits: &[u8]) -> f64 {
    let inv = 1.0 / base as f64;
    // Horner from the least-significant end keeps the rounding to one step
    // per digit and is exact for base 2 at supported depths.
    let mut value = 0.0_f64;
    for &d in digits.iter().rev() {
        value = (value + d as f64) * inv;
    }
    value
}

/// Integer index of a digit prefix, first digit in the low position.
pub fn prefix_index(base: u32, prefix: &[u8]) -> u64 {
    let b = base as u64;
    let mut index = 0u64;
    let mut scale = 1u64;
    for &d in prefix {
        index += d as u64 * scale;
        scale *= b;
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn int_to_digits_known_values() {
        assert_eq!(int_to_digits(0, 2, 3).unwrap(), vec![0, 0, 0]);
        assert_eq!(int_to_digits(5, 2, 3).unwrap(), vec![1, 0, 1]);
        assert_eq!(int_to_digits(7, 3, 2).unwrap(), vec![1, 2]);
        assert_eq!(int_to_digits(63, 64, 1).unwrap(), vec![63]);
    }

    #[test]
    fn int_to_digits_rejects_overflow_and_bad_base() {
        assert_eq!(
            int_to_digits(8, 2, 3),
            Err(DigitError::Overflow {
                n: 8,
                base: 2,
                depth: 3
            })
        );
        assert_eq!(int_to_digits(1, 1, 3), Err(DigitError::BadBase(1)));
        assert_eq!(int_to_digits(1, 65, 3), Err(DigitError::BadBase(65)));
    }

    #[test]
    fn radical_inverse_known_values() {
        assert_eq!(radical_inverse(0, 2), 0.0);
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(6, 2), 0.375);
        assert_eq!(radical_inverse(1, 3), 1.0 / 3.0);
    }

    #[test]
    fn digits_to_value_known_values() {
        assert_eq!(digits_to_value(2, &[0, 0, 0]), 0.0);
        assert_eq!(digits_to_value(2, &[1, 1]), 0.75);
        assert_eq!(digits_to_value(2, &[0, 1, 1]), 0.375);
        let third = digits_to_value(3, &[2]);
        assert!((third - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn digit_vector_validates_digits() {
        assert!(DigitVector::new(2, vec![0, 1, 1]).is_ok());
        assert_eq!(
            DigitVector::new(2, vec![0, 2]),
            Err(DigitError::BadDigit { digit: 2, base: 2 })
        );
    }

    #[test]
    fn default_depth_matches_mantissa_budget() {
        assert_eq!(default_depth(2), 52);
        assert_eq!(default_depth(3), 32);
        assert_eq!(default_depth(4), 26);
        assert_eq!(default_depth(5), 22);
    }

    #[test]
    fn prefix_index_uses_low_digit_first() {
        let v = DigitVector::new(2, vec![1, 0, 1]).unwrap();
        assert_eq!(v.prefix_index(0), 0);
        assert_eq!(v.prefix_index(1), 1);
        assert_eq!(v.prefix_index(3), 1 + 4);
    }

    #[test]
    fn round_trip_exhaustive_small_bases() {
        for base in [2u32, 3, 5] {
            for depth in 0..=6usize {
                let n_max = (base as u64).pow(depth as u32);
                for n in 0..n_max {
                    let v = DigitVector::from_radical_inverse(n, base, depth).unwrap();
                    let direct = radical_inverse(n, base);
                    assert!(
                        (v.value() - direct).abs() < 1e-12,
                        "base {base} n {n}: {} vs {direct}",
                        v.value()
                    );
                }
            }
        }
    }

    #[test]
    fn radical_inverse_is_a_bijection_on_each_block() {
        for base in [2u32, 3, 5] {
            for m in 1..=4u32 {
                let n = (base as u64).pow(m);
                // For i < b^m the inverse has at most m digits, so scaling
                // by b^m gives an exact integer; round() undoes the float
                // rounding of the non-dyadic digit sums.
                let mut cells: Vec<u64> = (0..n)
                    .map(|i| (radical_inverse(i, base) * n as f64).round() as u64)
                    .collect();
                cells.sort_unstable();
                assert!(cells.iter().enumerate().all(|(k, &c)| k as u64 == c));
            }
        }
    }

    proptest! {
        #[test]
        fn prop_round_trip(base in 2u32..=16, n in 0u64..10_000) {
            let depth = default_depth(base);
            let v = DigitVector::from_radical_inverse(n, base, depth).unwrap();
            let direct = radical_inverse(n, base);
            prop_assert!((v.value() - direct).abs() < 1e-12);
        }

        #[test]
        fn prop_values_stay_in_unit_interval(base in 2u32..=16, n in 0u64..100_000) {
            let x = radical_inverse(n, base);
            prop_assert!((0.0..1.0).contains(&x));
        }
    }
}
