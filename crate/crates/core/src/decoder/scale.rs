//! Fixed-point ranges and the shift-add scaling unit.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bit widths of the two's-complement, symmetrically saturated value
/// ranges: exchanged messages live in `[-msg_max, msg_max]`, a-posteriori
/// LLRs in `[-llr_max, llr_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointParams {
    pub msg_bits: u32,
    pub llr_bits: u32,
}

impl Default for FixedPointParams {
    fn default() -> Self {
        Self {
            msg_bits: 6,
            llr_bits: 8,
        }
    }
}

impl FixedPointParams {
    pub fn msg_max(&self) -> i32 {
        (1 << (self.msg_bits - 1)) - 1
    }

    pub fn llr_max(&self) -> i32 {
        (1 << (self.llr_bits - 1)) - 1
    }

    pub fn validate(&self) -> Result<()> {
        for (name, bits) in [("msg_bits", self.msg_bits), ("llr_bits", self.llr_bits)] {
            if !(2..=24).contains(&bits) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in 2..=24, got {bits}"
                )));
            }
        }
        Ok(())
    }
}

/// Normalization factor applied to check-node magnitudes, realized as a
/// signed sum of right shifts (e.g. `0.875`: `x - (x >> 3)`), with each
/// shift truncating toward zero. Factors must be dyadic rationals in
/// `(0, 1]` with resolution `2^-8`.
#[derive(Debug, Clone, PartialEq)]
pub struct NmsScale {
    factor: f64,
    /// `(negative, shift)` terms; the scaled value is `sum of ±(x >> shift)`.
    terms: Vec<(bool, u32)>,
}

impl NmsScale {
    pub fn from_factor(factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "scaling factor must lie in (0, 1], got {factor}"
            )));
        }
        for k in 0..=8u32 {
            let scaled = factor * (1u64 << k) as f64;
            if (scaled - scaled.round()).abs() < 1e-9 {
                let m = scaled.round() as i64;
                if m >= 1 {
                    return Ok(Self {
                        factor,
                        terms: csd_terms(m, k)?,
                    });
                }
            }
        }
        Err(Error::InvalidConfig(format!(
            "scaling factor {factor} is not a sum of powers of two with 2^-8 resolution"
        )))
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// Scales a non-negative magnitude.
    #[inline]
    pub fn apply(&self, magnitude: i32) -> i32 {
        debug_assert!(magnitude >= 0);
        let mut acc = 0i32;
        for &(negative, shift) in &self.terms {
            let v = magnitude >> shift;
            acc = if negative { acc - v } else { acc + v };
        }
        debug_assert!(acc >= 0 && acc <= magnitude);
        acc
    }
}

/// Canonical signed-digit decomposition of `m / 2^k` into shift terms.
/// This is the minimal-adder form hardware uses: `7/8` becomes
/// `x - (x >> 3)` rather than three positive shifts.
fn csd_terms(mut m: i64, k: u32) -> Result<Vec<(bool, u32)>> {
    let mut terms = Vec::new();
    let mut position = 0i64;
    while m != 0 {
        if m & 1 == 1 {
            let digit: i64 = if m & 3 == 1 { 1 } else { -1 };
            let shift = k as i64 - position;
            if shift < 0 {
                return Err(Error::InvalidConfig(
                    "scaling factor exceeds 1 after rounding".into(),
                ));
            }
            terms.push((digit < 0, shift as u32));
            m -= digit;
        }
        m >>= 1;
        position += 1;
    }
    terms.sort_by_key(|&(_, shift)| shift);
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_defaults() {
        let fp = FixedPointParams::default();
        assert_eq!(fp.msg_max(), 31);
        assert_eq!(fp.llr_max(), 127);
        assert!(fp.validate().is_ok());
    }

    #[test]
    fn seven_eighths_is_single_subtractive_shift() {
        let s = NmsScale::from_factor(0.875).unwrap();
        assert_eq!(s.apply(8), 7); // 8 - (8 >> 3)
        assert_eq!(s.apply(7), 7); // 7 - (7 >> 3) = 7 - 0
        assert_eq!(s.apply(16), 14);
        assert_eq!(s.apply(31), 28);
        assert_eq!(s.apply(0), 0);
    }

    #[test]
    fn fifteen_sixteenths() {
        let s = NmsScale::from_factor(0.9375).unwrap();
        assert_eq!(s.apply(16), 15); // 16 - (16 >> 4)
        assert_eq!(s.apply(15), 15);
        assert_eq!(s.apply(31), 30);
    }

    #[test]
    fn unit_factor_is_identity() {
        let s = NmsScale::from_factor(1.0).unwrap();
        for x in 0..64 {
            assert_eq!(s.apply(x), x);
        }
    }

    #[test]
    fn additive_decompositions() {
        let s = NmsScale::from_factor(0.625).unwrap(); // 1/2 + 1/8
        assert_eq!(s.apply(8), 5);
        assert_eq!(s.apply(16), 10);
        let s = NmsScale::from_factor(0.5).unwrap();
        assert_eq!(s.apply(9), 4);
    }

    #[test]
    fn rejects_non_dyadic_and_out_of_range() {
        assert!(NmsScale::from_factor(0.3).is_err());
        assert!(NmsScale::from_factor(0.0).is_err());
        assert!(NmsScale::from_factor(1.5).is_err());
    }

    #[test]
    fn scaled_value_never_exceeds_input() {
        for f in [0.5, 0.625, 0.75, 0.875, 0.9375, 1.0] {
            let s = NmsScale::from_factor(f).unwrap();
            for x in 0..=127 {
                let y = s.apply(x);
                assert!(y >= 0 && y <= x, "factor {f}, input {x}, output {y}");
            }
        }
    }
}
