use crate::blob::Blob;
use crate::extents::ArrayExtents;
use crate::mapping::{Mapping, NrAndOffset};
use crate::record::{FlatSchema, RecordSchema};
use crate::value::Value;
use crate::Result;

/// Maps nothing: stores are discarded and loads return the zero value.
#[derive(Debug, Clone)]
pub struct Null {
    schema: FlatSchema,
    extents: ArrayExtents,
}

impl Null {
    pub fn new(schema: RecordSchema, extents: ArrayExtents) -> Result<Self> {
        Ok(Null { schema: FlatSchema::new(schema)?, extents })
    }
}

// SAFETY: all leaves are computed.
unsafe impl Mapping for Null {
    fn flat_schema(&self) -> &FlatSchema {
        &self.schema
    }

    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn blob_sizes(&self) -> Vec<usize> {
        Vec::new()
    }

    fn blob_count(&self) -> usize {
        0
    }

    fn name(&self) -> String {
        "null".into()
    }

    fn is_computed(&self, _leaf: usize) -> bool {
        true
    }

    fn resolve(&self, _lin: usize, _leaf: usize) -> Option<NrAndOffset> {
        None
    }

    fn load(&self, _blobs: &[Blob], _lin: usize, leaf: usize) -> Value {
        Value::zero(self.schema.leaf(leaf).ty)
    }

    fn store(&self, _blobs: &mut [Blob], _lin: usize, _leaf: usize, _value: Value) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discards_writes() {
        let m = Null::new("Record{a:i32,b:f64}".parse().unwrap(), ArrayExtents::linear(4)).unwrap();
        assert!(m.blob_sizes().is_empty());
        m.store(&mut [], 1, 0, Value::I32(42));
        assert_eq!(m.load(&[], 1, 0), Value::I32(0));
        assert_eq!(m.load(&[], 3, 1), Value::F64(0.0));
    }
}
