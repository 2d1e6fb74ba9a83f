use crate::blob::Blob;
use crate::extents::ArrayExtents;
use crate::mapping::{Mapping, MappingFactory, NrAndOffset};
use crate::record::{FlatSchema, RecordSchema, ScalarType};
use crate::value::Value;
use crate::Result;

/// Splits every leaf into its little-endian bytes and lays out the resulting
/// record dimension (each leaf of size `s` becomes `[u8; s]`) with an inner mapping.
///
/// Under an SoA inner mapping, equal-significance bytes of all elements end up
/// next to each other, so small integers produce long runs of zero bytes.
#[derive(Debug, Clone)]
pub struct Bytesplit<M> {
    schema: FlatSchema,
    // first inner leaf of each logical leaf
    byte_base: Vec<usize>,
    inner: M,
}

/// The byte-exploded record dimension.
pub fn split_schema(schema: &RecordSchema) -> RecordSchema {
    schema.map_leaves(&mut |_, t| RecordSchema::Array(t.size(), Box::new(RecordSchema::Leaf(ScalarType::U8))))
}

impl<M: Mapping> Bytesplit<M> {
    pub fn new(schema: RecordSchema, extents: ArrayExtents, make_inner: impl MappingFactory<M>) -> Result<Self> {
        let schema = FlatSchema::new(schema)?;
        let inner = make_inner.build(split_schema(schema.schema()), extents)?;
        let byte_base = schema.leaves().iter().map(|l| l.packed_offset).collect();
        Ok(Bytesplit { schema, byte_base, inner })
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// Inner leaf holding byte `byte` of `leaf`.
    pub fn byte_leaf(&self, leaf: usize, byte: usize) -> usize {
        debug_assert!(byte < self.schema.leaf(leaf).ty.size());
        self.byte_base[leaf] + byte
    }
}

// SAFETY: all leaves are computed.
unsafe impl<M: Mapping> Mapping for Bytesplit<M> {
    fn flat_schema(&self) -> &FlatSchema {
        &self.schema
    }

    fn extents(&self) -> &ArrayExtents {
        self.inner.extents()
    }

    fn blob_sizes(&self) -> Vec<usize> {
        self.inner.blob_sizes()
    }

    fn blob_count(&self) -> usize {
        self.inner.blob_count()
    }

    fn name(&self) -> String {
        format!("bytesplit:{}", self.inner.name())
    }

    fn is_computed(&self, _leaf: usize) -> bool {
        true
    }

    fn resolve(&self, _lin: usize, _leaf: usize) -> Option<NrAndOffset> {
        None
    }

    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        let ty = self.schema.leaf(leaf).ty;
        let mut bytes = [0u8; 8];
        for (k, b) in bytes[..ty.size()].iter_mut().enumerate() {
            *b = self.inner.read::<u8>(blobs, lin, self.byte_base[leaf] + k);
        }
        Value::from_bits(ty, u64::from_le_bytes(bytes))
    }

    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        let ty = self.schema.leaf(leaf).ty;
        let bytes = value.cast(ty).to_bits().to_le_bytes();
        for (k, &b) in bytes[..ty.size()].iter().enumerate() {
            self.inner.write::<u8>(blobs, lin, self.byte_base[leaf] + k, b);
        }
    }

    fn touched_bytes(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        for k in 0..self.schema.leaf(leaf).ty.size() {
            self.inner.touched_bytes(lin, self.byte_base[leaf] + k, f);
        }
    }

    fn runtime_state_bytes(&self) -> usize {
        self.inner.runtime_state_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::SoA;

    #[test]
    fn small_u32_values_leave_high_planes_zero() {
        let m = Bytesplit::new("u32".parse().unwrap(), ArrayExtents::linear(3), SoA::multi_blob).unwrap();
        assert_eq!(m.blob_count(), 4);
        let mut blobs: Vec<Blob> = m.blob_sizes().into_iter().map(Blob::zeroed).collect();
        for (i, v) in [1u32, 2, 3].into_iter().enumerate() {
            m.store(&mut blobs, i, 0, Value::U32(v));
        }
        assert_eq!(blobs[0].as_bytes(), &[1, 2, 3]);
        for plane in &blobs[1..] {
            assert_eq!(plane.as_bytes(), &[0, 0, 0]);
        }
        assert_eq!(m.load(&blobs, 2, 0), Value::U32(3));
    }

    #[test]
    fn f64_round_trips_bit_exactly() {
        let m =
            Bytesplit::new("Record{a:f64,b:u8}".parse().unwrap(), ArrayExtents::linear(2), SoA::single_blob).unwrap();
        let mut blobs: Vec<Blob> = m.blob_sizes().into_iter().map(Blob::zeroed).collect();
        let nan = f64::from_bits(0x7ff8_dead_beef_0001);
        m.store(&mut blobs, 1, 0, Value::F64(nan));
        m.store(&mut blobs, 1, 1, Value::U8(200));
        assert_eq!(m.load(&blobs, 1, 0).to_bits(), nan.to_bits());
        assert_eq!(m.load(&blobs, 1, 1), Value::U8(200));
        assert_eq!(m.inner().flat_schema().schema().to_string(), "Record{a:[u8;8],b:[u8;1]}");
    }
}
