use super::{Mapping, NrAndOffset};
use crate::extents::ArrayExtents;
use crate::record::{FlatSchema, RecordSchema};
use crate::Result;

/// Array of structs: one blob, records stored back to back.
///
/// The packed variant places leaves without padding; the aligned variant pads
/// every leaf to its natural alignment and rounds the record size up to the
/// largest leaf alignment.
#[derive(Debug, Clone)]
pub struct AoS {
    schema: FlatSchema,
    extents: ArrayExtents,
    aligned: bool,
    record_size: usize,
    offsets: Vec<usize>,
}

impl AoS {
    pub fn packed(schema: RecordSchema, extents: ArrayExtents) -> Result<Self> {
        Self::new(schema, extents, false)
    }

    pub fn aligned(schema: RecordSchema, extents: ArrayExtents) -> Result<Self> {
        Self::new(schema, extents, true)
    }

    pub fn new(schema: RecordSchema, extents: ArrayExtents, aligned: bool) -> Result<Self> {
        let schema = FlatSchema::new(schema)?;
        let (record_size, offsets) = if aligned {
            (schema.size_aligned(), schema.leaves().iter().map(|l| l.aligned_offset).collect())
        } else {
            (schema.size_packed(), schema.leaves().iter().map(|l| l.packed_offset).collect())
        };
        Ok(AoS { schema, extents, aligned, record_size, offsets })
    }

    pub fn is_aligned(&self) -> bool {
        self.aligned
    }

    pub fn record_size(&self) -> usize {
        self.record_size
    }
}

// SAFETY: records are `record_size` apart and every leaf ends within its record.
unsafe impl Mapping for AoS {
    fn flat_schema(&self) -> &FlatSchema {
        &self.schema
    }

    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn blob_sizes(&self) -> Vec<usize> {
        vec![self.extents.len() * self.record_size]
    }

    fn blob_count(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        if self.aligned { "aos-aligned" } else { "aos-packed" }.into()
    }

    #[inline(always)]
    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        Some(NrAndOffset::new(0, lin * self.record_size + self.offsets[leaf]))
    }

    fn contiguous_run(&self, lin: usize, leaf: usize, n: usize) -> Option<NrAndOffset> {
        (n <= 1 || self.record_size == self.schema.leaf(leaf).ty.size()).then(|| self.resolve(lin, leaf).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle() -> RecordSchema {
        "Record{Pos:Record{x:f64,y:f64,z:f64},Mass:f32}".parse().unwrap()
    }

    #[test]
    fn packed_offsets() {
        let m = AoS::packed(particle(), ArrayExtents::linear(10)).unwrap();
        assert_eq!(m.resolve(2, 3), Some(NrAndOffset::new(0, 80)));
        assert_eq!(m.resolve(0, 0), Some(NrAndOffset::new(0, 0)));
        assert_eq!(m.blob_sizes(), vec![280]);
    }

    #[test]
    fn aligned_offsets() {
        let m = AoS::aligned(particle(), ArrayExtents::linear(10)).unwrap();
        assert_eq!(m.resolve(1, 0), Some(NrAndOffset::new(0, 32)));
        assert_eq!(m.blob_sizes(), vec![320]);
        let m = AoS::aligned("Record{a:u8,b:u32}".parse().unwrap(), ArrayExtents::linear(3)).unwrap();
        assert_eq!(m.resolve(1, 1), Some(NrAndOffset::new(0, 12)));
    }
}
