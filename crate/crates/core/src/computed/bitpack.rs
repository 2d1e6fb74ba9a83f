//! Bit-packed struct-of-arrays mappings for integer and floating-point leaves.
//!
//! Each leaf gets its own blob holding a dense bit stream of `bits` wide values;
//! element `i` occupies bits `[i * bits, (i + 1) * bits)`. Blobs are rounded up
//! to whole storage words.
//!
//! Concurrent writes to values sharing a storage word race (read-modify-write);
//! callers must partition such writes by word.

use super::bits::{pack_int, read_bits, unpack_int, write_bits, StorageWord};
use super::float_bits::FloatFormat;
use crate::blob::Blob;
use crate::extents::ArrayExtents;
use crate::mapping::{Mapping, NrAndOffset};
use crate::record::{FlatSchema, RecordSchema};
use crate::value::Value;
use crate::{Error, Result};

/// Bit stream location of a value: blob number and bit offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NrAndBitOffset {
    pub blob: usize,
    pub bit_offset: usize,
}

#[derive(Debug, Clone)]
struct BitSoA {
    schema: FlatSchema,
    extents: ArrayExtents,
    bits: Vec<u32>,
    word: StorageWord,
}

impl BitSoA {
    fn locate(&self, lin: usize, leaf: usize) -> NrAndBitOffset {
        NrAndBitOffset { blob: leaf, bit_offset: lin * self.bits[leaf] as usize }
    }

    fn blob_sizes(&self) -> Vec<usize> {
        let n = self.extents.len();
        self.bits.iter().map(|&b| self.word.blob_size(n, b)).collect()
    }

    fn read(&self, blobs: &[Blob], lin: usize, leaf: usize) -> u64 {
        let p = self.locate(lin, leaf);
        read_bits(blobs[p.blob].as_bytes(), p.bit_offset, self.bits[leaf])
    }

    fn write(&self, blobs: &mut [Blob], lin: usize, leaf: usize, pattern: u64) {
        let p = self.locate(lin, leaf);
        write_bits(blobs[p.blob].as_bytes_mut(), p.bit_offset, self.bits[leaf], pattern)
    }

    fn touched(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        let p = self.locate(lin, leaf);
        let start = p.bit_offset / 8;
        let end = (p.bit_offset + self.bits[leaf] as usize).div_ceil(8);
        f(p.blob, start, end - start)
    }

    fn word_suffix(&self) -> &'static str {
        match self.word {
            StorageWord::U32 => "",
            StorageWord::U64 => "@u64",
        }
    }
}

fn bits_list(bits: &[u32]) -> String {
    if bits.windows(2).all(|w| w[0] == w[1]) {
        bits.first().map_or_else(String::new, |b| b.to_string())
    } else {
        bits.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Integer leaves stored with a chosen bit count each.
///
/// Stores keep the low `bits` bits of the two's-complement value; loads zero- or
/// sign-extend according to the leaf's signedness.
#[derive(Debug, Clone)]
pub struct BitpackIntSoA {
    inner: BitSoA,
}

impl BitpackIntSoA {
    /// One bit count per leaf, in flat leaf order.
    pub fn new(schema: RecordSchema, extents: ArrayExtents, bits: Vec<u32>, word: StorageWord) -> Result<Self> {
        let schema = FlatSchema::new(schema)?;
        if bits.len() != schema.leaf_count() {
            return Err(Error::InvalidBitCount(format!(
                "{} bit counts for {} leaves",
                bits.len(),
                schema.leaf_count()
            )));
        }
        for (l, &b) in schema.leaves().iter().zip(&bits) {
            if !l.ty.is_integer() {
                return Err(Error::InvalidBitCount(format!("leaf {} of type {} is not an integer", l.path, l.ty)));
            }
            if b < 1 || b > l.ty.bits() {
                return Err(Error::InvalidBitCount(format!("{b} bits for {} leaf {}", l.ty, l.path)));
            }
        }
        Ok(BitpackIntSoA { inner: BitSoA { schema, extents, bits, word } })
    }

    /// The same bit count for every leaf.
    pub fn uniform(schema: RecordSchema, extents: ArrayExtents, bits: u32, word: StorageWord) -> Result<Self> {
        let n = schema.leaf_count();
        Self::new(schema, extents, vec![bits; n], word)
    }

    pub fn bits(&self, leaf: usize) -> u32 {
        self.inner.bits[leaf]
    }

    pub fn locate(&self, lin: usize, leaf: usize) -> NrAndBitOffset {
        self.inner.locate(lin, leaf)
    }
}

// SAFETY: all leaves are computed.
unsafe impl Mapping for BitpackIntSoA {
    fn flat_schema(&self) -> &FlatSchema {
        &self.inner.schema
    }

    fn extents(&self) -> &ArrayExtents {
        &self.inner.extents
    }

    fn blob_sizes(&self) -> Vec<usize> {
        self.inner.blob_sizes()
    }

    fn name(&self) -> String {
        format!("bitpack-int:{}{}", bits_list(&self.inner.bits), self.inner.word_suffix())
    }

    fn is_computed(&self, _leaf: usize) -> bool {
        true
    }

    fn resolve(&self, _lin: usize, _leaf: usize) -> Option<NrAndOffset> {
        None
    }

    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        let ty = self.inner.schema.leaf(leaf).ty;
        let v = unpack_int(self.inner.read(blobs, lin, leaf), self.inner.bits[leaf], ty.is_signed());
        Value::from_bits(ty, v as u64)
    }

    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        let ty = self.inner.schema.leaf(leaf).ty;
        let pattern = pack_int(value.cast(ty).as_i128(), self.inner.bits[leaf]);
        self.inner.write(blobs, lin, leaf, pattern)
    }

    fn touched_bytes(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        self.inner.touched(lin, leaf, f)
    }
}

/// Floating-point leaves stored in a reduced-precision format each.
#[derive(Debug, Clone)]
pub struct BitpackFloatSoA {
    inner: BitSoA,
    formats: Vec<FloatFormat>,
}

impl BitpackFloatSoA {
    pub fn new(
        schema: RecordSchema,
        extents: ArrayExtents,
        formats: Vec<FloatFormat>,
        word: StorageWord,
    ) -> Result<Self> {
        let schema = FlatSchema::new(schema)?;
        if formats.len() != schema.leaf_count() {
            return Err(Error::InvalidBitCount(format!(
                "{} float formats for {} leaves",
                formats.len(),
                schema.leaf_count()
            )));
        }
        if let Some(l) = schema.leaves().iter().find(|l| !l.ty.is_float()) {
            return Err(Error::InvalidBitCount(format!("leaf {} of type {} is not a float", l.path, l.ty)));
        }
        let bits = formats.iter().map(|f| f.bits()).collect();
        Ok(BitpackFloatSoA { inner: BitSoA { schema, extents, bits, word }, formats })
    }

    pub fn uniform(
        schema: RecordSchema,
        extents: ArrayExtents,
        exp_bits: u32,
        man_bits: u32,
        word: StorageWord,
    ) -> Result<Self> {
        let f = FloatFormat::new(exp_bits, man_bits)?;
        let n = schema.leaf_count();
        Self::new(schema, extents, vec![f; n], word)
    }

    pub fn format(&self, leaf: usize) -> FloatFormat {
        self.formats[leaf]
    }

    pub fn locate(&self, lin: usize, leaf: usize) -> NrAndBitOffset {
        self.inner.locate(lin, leaf)
    }
}

// SAFETY: all leaves are computed.
unsafe impl Mapping for BitpackFloatSoA {
    fn flat_schema(&self) -> &FlatSchema {
        &self.inner.schema
    }

    fn extents(&self) -> &ArrayExtents {
        &self.inner.extents
    }

    fn blob_sizes(&self) -> Vec<usize> {
        self.inner.blob_sizes()
    }

    fn name(&self) -> String {
        let list: Vec<String> = self.formats.iter().map(|f| format!("{},{}", f.exp_bits(), f.man_bits())).collect();
        let list = if list.windows(2).all(|w| w[0] == w[1]) { list[..1].to_vec() } else { list };
        format!("bitpack-float:{}{}", list.join(";"), self.inner.word_suffix())
    }

    fn is_computed(&self, _leaf: usize) -> bool {
        true
    }

    fn resolve(&self, _lin: usize, _leaf: usize) -> Option<NrAndOffset> {
        None
    }

    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        let ty = self.inner.schema.leaf(leaf).ty;
        Value::F64(self.formats[leaf].decode(self.inner.read(blobs, lin, leaf))).cast(ty)
    }

    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        let pattern = self.formats[leaf].encode(value.as_f64());
        self.inner.write(blobs, lin, leaf, pattern)
    }

    fn touched_bytes(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        self.inner.touched(lin, leaf, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_locations_and_sizes() {
        let m = BitpackIntSoA::uniform("u16".parse().unwrap(), ArrayExtents::linear(10), 3, StorageWord::U32).unwrap();
        assert_eq!(m.locate(5, 0), NrAndBitOffset { blob: 0, bit_offset: 15 });
        assert_eq!(m.blob_sizes(), vec![4]);
        let m = BitpackIntSoA::uniform("u8".parse().unwrap(), ArrayExtents::linear(5), 7, StorageWord::U32).unwrap();
        assert_eq!(m.blob_sizes(), vec![8]);
    }

    #[test]
    fn int_store_truncates() {
        let m = BitpackIntSoA::uniform(
            "Record{a:u32,b:i16}".parse().unwrap(),
            ArrayExtents::linear(4),
            3,
            StorageWord::U32,
        )
        .unwrap();
        let mut blobs: Vec<Blob> = m.blob_sizes().into_iter().map(Blob::zeroed).collect();
        m.store(&mut blobs, 1, 0, Value::U32(9));
        m.store(&mut blobs, 2, 0, Value::U32(5));
        m.store(&mut blobs, 1, 1, Value::I16(-3));
        m.store(&mut blobs, 2, 1, Value::I16(5));
        assert_eq!(m.load(&blobs, 1, 0), Value::U32(1));
        assert_eq!(m.load(&blobs, 2, 0), Value::U32(5));
        assert_eq!(m.load(&blobs, 1, 1), Value::I16(-3));
        // 5 = 0b101 reads back sign-extended in 3 bits
        assert_eq!(m.load(&blobs, 2, 1), Value::I16(-3));
        assert_eq!(m.load(&blobs, 0, 0), Value::U32(0));
    }

    #[test]
    fn int_spec_validation() {
        let s: RecordSchema = "Record{a:u8,b:f32}".parse().unwrap();
        assert!(BitpackIntSoA::uniform(s, ArrayExtents::linear(1), 3, StorageWord::U32).is_err());
        let s: RecordSchema = "u8".parse().unwrap();
        assert!(BitpackIntSoA::uniform(s.clone(), ArrayExtents::linear(1), 9, StorageWord::U32).is_err());
        assert!(BitpackIntSoA::uniform(s.clone(), ArrayExtents::linear(1), 0, StorageWord::U32).is_err());
        assert!(BitpackIntSoA::new(s, ArrayExtents::linear(1), vec![1, 2], StorageWord::U32).is_err());
    }

    #[test]
    fn float_half_storage() {
        let m = BitpackFloatSoA::uniform(
            "Record{x:f64,y:f32}".parse().unwrap(),
            ArrayExtents::linear(3),
            5,
            10,
            StorageWord::U32,
        )
        .unwrap();
        assert_eq!(m.blob_sizes(), vec![8, 8]);
        let mut blobs: Vec<Blob> = m.blob_sizes().into_iter().map(Blob::zeroed).collect();
        m.store(&mut blobs, 2, 0, Value::F64(1.0));
        m.store(&mut blobs, 1, 1, Value::F32(1e30));
        assert_eq!(m.load(&blobs, 2, 0), Value::F64(1.0));
        assert_eq!(m.load(&blobs, 1, 1), Value::F32(f32::INFINITY));
        assert_eq!(read_bits(blobs[0].as_bytes(), 32, 16), 0x3C00);
        assert!(
            BitpackFloatSoA::uniform("u8".parse().unwrap(), ArrayExtents::linear(1), 5, 10, StorageWord::U32).is_err()
        );
    }
}
