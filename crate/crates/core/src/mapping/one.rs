use super::{Mapping, NrAndOffset};
use crate::extents::{ArrayExtents, IndexType};
use crate::record::{FlatSchema, RecordSchema};
use crate::Result;

/// Storage for exactly one record, leaves packed in flat order.
#[derive(Debug, Clone)]
pub struct One {
    schema: FlatSchema,
    extents: ArrayExtents,
}

impl One {
    pub fn new(schema: RecordSchema) -> Result<Self> {
        Ok(One { schema: FlatSchema::new(schema)?, extents: ArrayExtents::fixed(IndexType::U64, &[])? })
    }
}

// SAFETY: the single record spans the whole blob.
unsafe impl Mapping for One {
    fn flat_schema(&self) -> &FlatSchema {
        &self.schema
    }

    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn blob_sizes(&self) -> Vec<usize> {
        vec![self.schema.size_packed()]
    }

    fn blob_count(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        "one".into()
    }

    #[inline(always)]
    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        debug_assert_eq!(lin, 0);
        Some(NrAndOffset::new(0, self.schema.leaf(leaf).packed_offset))
    }
}
