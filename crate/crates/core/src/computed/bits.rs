//! Bit-level storage helpers and integer packing.
//!
//! Bit `p` of a blob lives in byte `p / 8` at bit `p % 8`, i.e. LSB first within
//! little-endian storage words. Values may straddle word boundaries.

/// Low `bits` bits of `value`'s two's-complement representation.
#[inline]
pub fn pack_int(value: i128, bits: u32) -> u64 {
    debug_assert!((1..=64).contains(&bits));
    (value as u64) & mask(bits)
}

/// Zero- or sign-extends a `bits`-wide pattern.
#[inline]
pub fn unpack_int(pattern: u64, bits: u32, signed: bool) -> i128 {
    debug_assert!((1..=64).contains(&bits));
    let p = pattern & mask(bits);
    if signed && (p >> (bits - 1)) & 1 == 1 {
        p as i128 - (1i128 << bits)
    } else {
        p as i128
    }
}

#[inline(always)]
pub fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Reads a `bits`-wide field starting at bit `bit_offset`.
#[inline]
pub fn read_bits(bytes: &[u8], bit_offset: usize, bits: u32) -> u64 {
    let first = bit_offset / 8;
    let shift = (bit_offset % 8) as u32;
    let n = (shift + bits).div_ceil(8) as usize;
    let mut buf = [0u8; 16];
    buf[..n].copy_from_slice(&bytes[first..first + n]);
    ((u128::from_le_bytes(buf) >> shift) as u64) & mask(bits)
}

/// Writes the low `bits` bits of `pattern` starting at bit `bit_offset`,
/// leaving all neighbouring bits untouched.
#[inline]
pub fn write_bits(bytes: &mut [u8], bit_offset: usize, bits: u32, pattern: u64) {
    let first = bit_offset / 8;
    let shift = (bit_offset % 8) as u32;
    let n = (shift + bits).div_ceil(8) as usize;
    let mut buf = [0u8; 16];
    buf[..n].copy_from_slice(&bytes[first..first + n]);
    let field = (mask(bits) as u128) << shift;
    let word = (u128::from_le_bytes(buf) & !field) | (((pattern & mask(bits)) as u128) << shift);
    bytes[first..first + n].copy_from_slice(&word.to_le_bytes()[..n]);
}

/// Storage word used to size bit-packed blobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StorageWord {
    #[default]
    U32,
    U64,
}

impl StorageWord {
    pub const fn bits(self) -> usize {
        match self {
            StorageWord::U32 => 32,
            StorageWord::U64 => 64,
        }
    }

    pub const fn bytes(self) -> usize {
        self.bits() / 8
    }

    /// Bytes needed for `count` values of `bits` bits, rounded up to whole words.
    pub const fn blob_size(self, count: usize, bits: u32) -> usize {
        (count * bits as usize).div_ceil(self.bits()) * self.bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_examples() {
        assert_eq!(pack_int(5, 3), 0b101);
        assert_eq!(pack_int(-3, 4), 0b1101);
        assert_eq!(pack_int(9, 3), 0b001);
    }

    #[test]
    fn unpack_examples() {
        assert_eq!(unpack_int(0b101, 3, false), 5);
        assert_eq!(unpack_int(0b1101, 4, true), -3);
        assert_eq!(unpack_int(0b0111, 4, true), 7);
        assert_eq!(unpack_int(u64::MAX, 64, true), -1);
        assert_eq!(unpack_int(u64::MAX, 64, false), u64::MAX as i128);
    }

    #[test]
    fn bit_fields_do_not_disturb_neighbours() {
        let mut bytes = [0xffu8; 16];
        write_bits(&mut bytes, 13, 7, 0);
        assert_eq!(read_bits(&bytes, 13, 7), 0);
        assert_eq!(read_bits(&bytes, 0, 13), mask(13));
        assert_eq!(read_bits(&bytes, 20, 44), mask(44));
        write_bits(&mut bytes, 7, 64, 0x0123_4567_89ab_cdef);
        assert_eq!(read_bits(&bytes, 7, 64), 0x0123_4567_89ab_cdef);
        assert_eq!(read_bits(&bytes, 0, 7), mask(7));
        assert_eq!(read_bits(&bytes, 71, 57), mask(57));
    }

    #[test]
    fn blob_sizes() {
        assert_eq!(StorageWord::U32.blob_size(5, 7), 8);
        assert_eq!(StorageWord::U64.blob_size(5, 7), 8);
        assert_eq!(StorageWord::U32.blob_size(10, 32), 40);
        assert_eq!(StorageWord::U32.blob_size(0, 3), 0);
    }
}
