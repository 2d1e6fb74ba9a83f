//! Leaf values: a dynamically typed [`Value`] and the statically typed [`Scalar`] trait.
//!
//! All physical storage is little-endian.

use std::fmt;

use crate::record::ScalarType;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    I8(i8),
    I16(i16),
    I32(i32),
    I64(i64),
    U8(u8),
    U16(u16),
    U32(u32),
    U64(u64),
    F32(f32),
    F64(f64),
    Bool(bool),
}

impl Value {
    /// The zero value of a scalar type (`0`, `0.0`, `false`).
    pub fn zero(ty: ScalarType) -> Value {
        Value::from_bits(ty, 0)
    }

    pub fn ty(&self) -> ScalarType {
        match self {
            Value::I8(_) => ScalarType::I8,
            Value::I16(_) => ScalarType::I16,
            Value::I32(_) => ScalarType::I32,
            Value::I64(_) => ScalarType::I64,
            Value::U8(_) => ScalarType::U8,
            Value::U16(_) => ScalarType::U16,
            Value::U32(_) => ScalarType::U32,
            Value::U64(_) => ScalarType::U64,
            Value::F32(_) => ScalarType::F32,
            Value::F64(_) => ScalarType::F64,
            Value::Bool(_) => ScalarType::Bool,
        }
    }

    /// Raw bit pattern, zero-extended to 64 bits.
    pub fn to_bits(&self) -> u64 {
        match *self {
            Value::I8(x) => x as u8 as u64,
            Value::I16(x) => x as u16 as u64,
            Value::I32(x) => x as u32 as u64,
            Value::I64(x) => x as u64,
            Value::U8(x) => x as u64,
            Value::U16(x) => x as u64,
            Value::U32(x) => x as u64,
            Value::U64(x) => x,
            Value::F32(x) => x.to_bits() as u64,
            Value::F64(x) => x.to_bits(),
            Value::Bool(x) => x as u64,
        }
    }

    /// Reinterprets the low `ty.size()` bytes of `bits`. Booleans are true when nonzero.
    pub fn from_bits(ty: ScalarType, bits: u64) -> Value {
        match ty {
            ScalarType::I8 => Value::I8(bits as u8 as i8),
            ScalarType::I16 => Value::I16(bits as u16 as i16),
            ScalarType::I32 => Value::I32(bits as u32 as i32),
            ScalarType::I64 => Value::I64(bits as i64),
            ScalarType::U8 => Value::U8(bits as u8),
            ScalarType::U16 => Value::U16(bits as u16),
            ScalarType::U32 => Value::U32(bits as u32),
            ScalarType::U64 => Value::U64(bits),
            ScalarType::F32 => Value::F32(f32::from_bits(bits as u32)),
            ScalarType::F64 => Value::F64(f64::from_bits(bits)),
            ScalarType::Bool => Value::Bool(bits as u8 != 0),
        }
    }

    pub fn read_le(ty: ScalarType, bytes: &[u8]) -> Value {
        let n = ty.size();
        let mut buf = [0u8; 8];
        buf[..n].copy_from_slice(&bytes[..n]);
        Value::from_bits(ty, u64::from_le_bytes(buf))
    }

    pub fn write_le(&self, bytes: &mut [u8]) {
        let n = self.ty().size();
        bytes[..n].copy_from_slice(&self.to_bits().to_le_bytes()[..n]);
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::F32(x) => x as f64,
            Value::F64(x) => x,
            v => v.as_i128() as f64,
        }
    }

    /// Integer value; floats truncate toward zero (saturating).
    pub fn as_i128(&self) -> i128 {
        match *self {
            Value::I8(x) => x as i128,
            Value::I16(x) => x as i128,
            Value::I32(x) => x as i128,
            Value::I64(x) => x as i128,
            Value::U8(x) => x as i128,
            Value::U16(x) => x as i128,
            Value::U32(x) => x as i128,
            Value::U64(x) => x as i128,
            Value::F32(x) => x as i128,
            Value::F64(x) => x as i128,
            Value::Bool(x) => x as i128,
        }
    }

    /// Numeric conversion with `as`-cast semantics (float narrowing rounds to nearest,
    /// integer narrowing keeps the low bits, booleans are `x != 0`).
    pub fn cast(&self, ty: ScalarType) -> Value {
        if self.ty() == ty {
            return *self;
        }
        if self.ty().is_float() {
            let x = self.as_f64();
            return match ty {
                ScalarType::F32 => Value::F32(x as f32),
                ScalarType::F64 => Value::F64(x),
                ScalarType::Bool => Value::Bool(x != 0.0),
                ScalarType::I8 => Value::I8(x as i8),
                ScalarType::I16 => Value::I16(x as i16),
                ScalarType::I32 => Value::I32(x as i32),
                ScalarType::I64 => Value::I64(x as i64),
                ScalarType::U8 => Value::U8(x as u8),
                ScalarType::U16 => Value::U16(x as u16),
                ScalarType::U32 => Value::U32(x as u32),
                ScalarType::U64 => Value::U64(x as u64),
            };
        }
        let i = self.as_i128();
        match ty {
            ScalarType::F32 => Value::F32(i as f32),
            ScalarType::F64 => Value::F64(i as f64),
            ScalarType::Bool => Value::Bool(i != 0),
            t => Value::from_bits(t, i as u64),
        }
    }

    /// Bitwise equality; distinguishes `-0.0` from `0.0` and compares NaN payloads.
    pub fn bit_eq(&self, other: &Value) -> bool {
        self.ty() == other.ty() && self.to_bits() == other.to_bits()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::F32(x) => write!(f, "{x}"),
            Value::F64(x) => write!(f, "{x}"),
            v => write!(f, "{}", v.as_i128()),
        }
    }
}

/// A statically typed leaf value.
pub trait Scalar: Copy + Default + PartialEq + fmt::Debug + Send + Sync + 'static {
    const TYPE: ScalarType;

    fn read_le(bytes: &[u8]) -> Self;
    fn write_le(self, bytes: &mut [u8]);
    /// # Safety
    ///
    /// `p` must be valid for reading `size_of::<Self>()` bytes.
    unsafe fn read_ptr(p: *const u8) -> Self;
    /// # Safety
    ///
    /// `p` must be valid for writing `size_of::<Self>()` bytes.
    unsafe fn write_ptr(self, p: *mut u8);
    fn to_value(self) -> Value;
    /// Converts with [`Value::cast`] semantics when the types differ.
    fn from_value(v: Value) -> Self;
}

macro_rules! impl_scalar {
    ($($t:ty => $variant:ident),* $(,)?) => {$(
        impl Scalar for $t {
            const TYPE: ScalarType = ScalarType::$variant;

            #[inline(always)]
            fn read_le(bytes: &[u8]) -> Self {
                <$t>::from_le_bytes(bytes[..std::mem::size_of::<$t>()].try_into().unwrap())
            }

            #[inline(always)]
            fn write_le(self, bytes: &mut [u8]) {
                bytes[..std::mem::size_of::<$t>()].copy_from_slice(&self.to_le_bytes());
            }

            #[inline(always)]
            unsafe fn read_ptr(p: *const u8) -> Self {
                <$t>::from_le_bytes(std::ptr::read_unaligned(p.cast()))
            }

            #[inline(always)]
            unsafe fn write_ptr(self, p: *mut u8) {
                std::ptr::write_unaligned(p.cast(), self.to_le_bytes())
            }

            #[inline(always)]
            fn to_value(self) -> Value {
                Value::$variant(self)
            }

            #[inline]
            fn from_value(v: Value) -> Self {
                match v.cast(ScalarType::$variant) {
                    Value::$variant(x) => x,
                    _ => unreachable!(),
                }
            }
        }
    )*};
}

impl_scalar!(
    i8 => I8, i16 => I16, i32 => I32, i64 => I64,
    u8 => U8, u16 => U16, u32 => U32, u64 => U64,
    f32 => F32, f64 => F64,
);

impl Scalar for bool {
    const TYPE: ScalarType = ScalarType::Bool;

    fn read_le(bytes: &[u8]) -> Self {
        bytes[0] != 0
    }

    fn write_le(self, bytes: &mut [u8]) {
        bytes[0] = self as u8;
    }

    unsafe fn read_ptr(p: *const u8) -> Self {
        *p != 0
    }

    unsafe fn write_ptr(self, p: *mut u8) {
        *p = self as u8;
    }

    fn to_value(self) -> Value {
        Value::Bool(self)
    }

    fn from_value(v: Value) -> Self {
        match v.cast(ScalarType::Bool) {
            Value::Bool(x) => x,
            _ => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_values() {
        assert_eq!(Value::zero(ScalarType::F64), Value::F64(0.0));
        assert_eq!(Value::zero(ScalarType::I32), Value::I32(0));
        assert_eq!(Value::zero(ScalarType::Bool), Value::Bool(false));
    }

    #[test]
    fn le_round_trip() {
        let mut buf = [0u8; 8];
        Value::I16(-2).write_le(&mut buf);
        assert_eq!(&buf[..2], &[0xfe, 0xff]);
        assert_eq!(Value::read_le(ScalarType::I16, &buf), Value::I16(-2));
        1.5f64.write_le(&mut buf);
        assert_eq!(f64::read_le(&buf), 1.5);
    }

    #[test]
    fn casts() {
        assert_eq!(Value::F64(0.1).cast(ScalarType::F32), Value::F32(0.1f32));
        assert_eq!(Value::I64(300).cast(ScalarType::I8), Value::I8(44));
        assert_eq!(Value::U8(7).cast(ScalarType::U64), Value::U64(7));
        assert_eq!(i64::from_value(Value::I32(-5)), -5);
    }
}
