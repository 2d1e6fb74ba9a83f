//! Reduced-precision IEEE-754-style float formats with `exp_bits` exponent bits
//! and `man_bits` explicit mantissa bits (plus one sign bit).
//!
//! Encoding rounds to nearest, ties to even. Exponent overflow produces ±Inf,
//! values below half the smallest subnormal flush to a signed zero, and target
//! subnormals are produced when in range. Every NaN encodes to one canonical
//! quiet NaN (sign clear, top mantissa bit set). A format without mantissa bits
//! cannot represent NaN; there NaN encodes to +Inf.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloatFormat {
    exp_bits: u32,
    man_bits: u32,
}

impl FloatFormat {
    pub const HALF: FloatFormat = FloatFormat { exp_bits: 5, man_bits: 10 };
    pub const SINGLE: FloatFormat = FloatFormat { exp_bits: 8, man_bits: 23 };
    pub const DOUBLE: FloatFormat = FloatFormat { exp_bits: 11, man_bits: 52 };

    pub fn new(exp_bits: u32, man_bits: u32) -> Result<Self> {
        if exp_bits < 1 || 1 + exp_bits + man_bits > 64 {
            return Err(Error::InvalidBitCount(format!(
                "float format needs E >= 1 and 1 + E + M <= 64, got E={exp_bits} M={man_bits}"
            )));
        }
        Ok(FloatFormat { exp_bits, man_bits })
    }

    pub fn exp_bits(self) -> u32 {
        self.exp_bits
    }

    pub fn man_bits(self) -> u32 {
        self.man_bits
    }

    /// Total stored width, `1 + E + M`.
    pub fn bits(self) -> u32 {
        1 + self.exp_bits + self.man_bits
    }

    fn bias(self) -> i128 {
        (1i128 << (self.exp_bits - 1)) - 1
    }

    fn exp_all_ones(self) -> u64 {
        ((1u128 << self.exp_bits) - 1) as u64
    }

    fn sign_bit(self) -> u64 {
        1u64 << (self.exp_bits + self.man_bits)
    }

    pub fn inf_pattern(self, negative: bool) -> u64 {
        (self.exp_all_ones() << self.man_bits) | if negative { self.sign_bit() } else { 0 }
    }

    pub fn nan_pattern(self) -> u64 {
        if self.man_bits == 0 {
            self.inf_pattern(false)
        } else {
            (self.exp_all_ones() << self.man_bits) | (1u64 << (self.man_bits - 1))
        }
    }

    pub fn encode(self, value: f64) -> u64 {
        if value.is_nan() {
            return self.nan_pattern();
        }
        let negative = value.is_sign_negative();
        let sign = if negative { self.sign_bit() } else { 0 };
        if value.is_infinite() {
            return self.inf_pattern(negative);
        }
        if value == 0.0 {
            return sign;
        }

        // value = sig * 2^(exp - 52), with sig normalized to have bit 52 set
        let bits = value.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i128;
        let raw_man = bits & ((1u64 << 52) - 1);
        let (mut sig, mut exp) =
            if raw_exp == 0 { (raw_man, -1022i128) } else { (raw_man | (1u64 << 52), raw_exp - 1023) };
        while sig & (1u64 << 52) == 0 {
            sig <<= 1;
            exp -= 1;
        }

        let m = self.man_bits as i128;
        let bias = self.bias();
        let emin = 1 - bias;
        let emax = bias;
        if exp > emax + 1 {
            return sign | self.inf_pattern(false);
        }

        let magnitude = if exp >= emin {
            // normal: keep m fraction bits; a rounding carry propagates into the exponent
            let rounded = shift_round(sig as u128, 52 - m);
            (((exp + bias) as u128) << m) + rounded - (1u128 << m)
        } else {
            // subnormal: the field counts units of 2^(emin - m)
            shift_round(sig as u128, 52 - m + emin - exp)
        };
        if magnitude >= (self.exp_all_ones() as u128) << m {
            return sign | self.inf_pattern(false);
        }
        sign | magnitude as u64
    }

    pub fn decode(self, pattern: u64) -> f64 {
        let m = self.man_bits;
        let negative = pattern & self.sign_bit() != 0;
        let exp_field = (pattern >> m) & self.exp_all_ones();
        let frac = pattern & super::bits::mask(m);
        let magnitude = if exp_field == self.exp_all_ones() {
            if frac == 0 {
                f64::INFINITY
            } else {
                f64::NAN
            }
        } else if exp_field == 0 {
            scale(frac as f64, 1 - self.bias() - m as i128)
        } else {
            scale(((1u128 << m) + frac as u128) as f64, exp_field as i128 - self.bias() - m as i128)
        };
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

/// `value >> shift` rounded to nearest, ties to even; a negative shift is exact.
fn shift_round(value: u128, shift: i128) -> u128 {
    if shift <= 0 {
        return value << (-shift) as u32;
    }
    if shift >= 127 {
        return 0;
    }
    let s = shift as u32;
    let q = value >> s;
    let rem = value & ((1u128 << s) - 1);
    let half = 1u128 << (s - 1);
    if rem > half || (rem == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

/// Exact power of two for a normal exponent.
fn pow2(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// `x * 2^e` for a nonnegative finite `x`, rounded once.
fn scale(x: f64, e: i128) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // x = y * 2^xe with y in [1, 2)
    let xe = ((x.to_bits() >> 52) & 0x7ff) as i128 - 1023;
    let y = x * pow2(-xe as i32);
    let t = xe + e;
    if t > 1023 {
        f64::INFINITY
    } else if t >= -1022 {
        y * pow2(t as i32)
    } else if t >= -1022 - 1022 {
        y * pow2(-1022) * pow2((t + 1022) as i32)
    } else {
        0.0
    }
}

/// Encodes with a runtime format; convenience for callers holding raw bit counts.
pub fn float_encode(value: f64, exp_bits: u32, man_bits: u32) -> Result<u64> {
    Ok(FloatFormat::new(exp_bits, man_bits)?.encode(value))
}

pub fn float_decode(pattern: u64, exp_bits: u32, man_bits: u32) -> Result<f64> {
    Ok(FloatFormat::new(exp_bits, man_bits)?.decode(pattern))
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: FloatFormat = FloatFormat::HALF;

    #[test]
    fn half_examples() {
        assert_eq!(H.encode(1.0), 0x3C00);
        assert_eq!(H.decode(0x3C00), 1.0);
        assert_eq!(H.encode(1e30), 0x7C00);
        assert_eq!(H.encode(-1e30), 0xFC00);
        assert!(H.decode(H.encode(f64::NAN)).is_nan());
        assert_eq!(H.decode(0).to_bits(), 0.0f64.to_bits());
        assert_eq!(H.decode(0x8000).to_bits(), (-0.0f64).to_bits());
        assert_eq!(H.encode(65504.0), 0x7BFF);
        assert_eq!(H.encode(65519.99), 0x7BFF);
        assert_eq!(H.encode(65520.0), 0x7C00);
        // smallest subnormal 2^-24, and ties around half of it
        assert_eq!(H.encode(2f64.powi(-24)), 1);
        assert_eq!(H.encode(2f64.powi(-25)), 0);
        assert_eq!(H.encode(2f64.powi(-25) * 1.0001), 1);
        assert_eq!(H.decode(1), 2f64.powi(-24));
        assert_eq!(H.decode(0x0400), 2f64.powi(-14));
    }

    #[test]
    fn single_matches_native() {
        for v in [1.0f32, -2.5, 1e-40, f32::MAX, f32::MIN_POSITIVE, 3.4e38, -0.0, 7e-46] {
            assert_eq!(FloatFormat::SINGLE.encode(v as f64), v.to_bits() as u64, "{v}");
            assert_eq!(FloatFormat::SINGLE.decode(v.to_bits() as u64) as f32, v);
        }
        for v in [0.1f64, 1e300, 123456.789, -1e-310] {
            assert_eq!(FloatFormat::SINGLE.encode(v), (v as f32).to_bits() as u64, "{v}");
        }
    }

    #[test]
    fn double_is_identity() {
        for v in [0.1f64, 1e300, f64::MIN_POSITIVE, 5e-324, -3.25, f64::MAX] {
            assert_eq!(FloatFormat::DOUBLE.encode(v), v.to_bits());
            assert_eq!(FloatFormat::DOUBLE.decode(v.to_bits()), v);
        }
    }

    #[test]
    fn format_validation() {
        assert!(FloatFormat::new(0, 10).is_err());
        assert!(FloatFormat::new(11, 53).is_err());
        assert!(FloatFormat::new(63, 0).is_ok());
        assert!(FloatFormat::new(1, 62).is_ok());
    }

    #[test]
    fn no_mantissa_formats() {
        let f = FloatFormat::new(4, 0).unwrap();
        assert_eq!(f.encode(f64::NAN), f.inf_pattern(false));
        assert_eq!(f.decode(f.encode(2.0)), 2.0);
        // 3 = 1.1b * 2^1 ties; the odd implicit significand rounds up into the exponent
        assert_eq!(f.decode(f.encode(3.0)), 4.0);
    }

    #[test]
    fn wide_formats() {
        let f = FloatFormat::new(1, 62).unwrap();
        // bias 0: the only normal exponent is 0, i.e. values in [1, 2)
        assert_eq!(f.decode(f.encode(1.5)), 1.5);
        assert_eq!(f.encode(2.0), f.inf_pattern(false));
        assert_eq!(f.decode(f.encode(0.75)), 0.75);
        let f = FloatFormat::new(20, 43).unwrap();
        let v = 1.5 * 2f64.powi(-900);
        assert_eq!(f.decode(f.encode(v)), v);
        let r = f.decode(f.encode(1e-300));
        assert!(((r - 1e-300) / 1e-300).abs() <= 2f64.powi(-44));
    }
}
