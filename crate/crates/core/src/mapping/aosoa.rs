use super::{Mapping, NrAndOffset};
use crate::extents::ArrayExtents;
use crate::record::{FlatSchema, RecordSchema};
use crate::{Error, Result};

/// Array of structs of arrays: records are grouped into blocks of `lanes`
/// consecutive elements, and each block stores its leaves field by field.
///
/// The in-block layout is packed. The blob is rounded up to whole blocks; the
/// padding lanes of a partial tail block are never addressed.
#[derive(Debug, Clone)]
pub struct AoSoA {
    schema: FlatSchema,
    extents: ArrayExtents,
    lanes: usize,
    block_size: usize,
    // packed offset * lanes, per leaf
    leaf_bases: Vec<usize>,
    sizes: Vec<usize>,
}

impl AoSoA {
    pub fn new(schema: RecordSchema, extents: ArrayExtents, lanes: usize) -> Result<Self> {
        if lanes == 0 {
            return Err(Error::InvalidSchema("AoSoA lane count must be >= 1".into()));
        }
        let schema = FlatSchema::new(schema)?;
        let leaf_bases = schema.leaves().iter().map(|l| l.packed_offset * lanes).collect();
        let sizes = schema.leaves().iter().map(|l| l.ty.size()).collect();
        Ok(AoSoA { block_size: schema.size_packed() * lanes, schema, extents, lanes, leaf_bases, sizes })
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    /// Location of lane `lane` of block `block`, skipping the div/mod of [`Mapping::resolve`].
    #[inline(always)]
    pub fn resolve_block_lane(&self, block: usize, lane: usize, leaf: usize) -> NrAndOffset {
        NrAndOffset::new(0, block * self.block_size + self.leaf_bases[leaf] + lane * self.sizes[leaf])
    }
}

// SAFETY: blocks are padded to whole multiples of the lane count.
unsafe impl Mapping for AoSoA {
    fn flat_schema(&self) -> &FlatSchema {
        &self.schema
    }

    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn blob_sizes(&self) -> Vec<usize> {
        vec![self.extents.len().div_ceil(self.lanes) * self.block_size]
    }

    fn blob_count(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        format!("aosoa:{}", self.lanes)
    }

    #[inline(always)]
    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        Some(self.resolve_block_lane(lin / self.lanes, lin % self.lanes, leaf))
    }

    fn contiguous_run(&self, lin: usize, leaf: usize, n: usize) -> Option<NrAndOffset> {
        (n == 0 || lin / self.lanes == (lin + n - 1) / self.lanes).then(|| self.resolve(lin, leaf).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets() {
        let s: RecordSchema = "Record{Pos:Record{x:f64,y:f64,z:f64},Mass:f32}".parse().unwrap();
        let m = AoSoA::new(s, ArrayExtents::linear(10), 4).unwrap();
        assert_eq!(m.resolve(5, 1), Some(NrAndOffset::new(0, 152)));
        assert_eq!(m.resolve(0, 0), Some(NrAndOffset::new(0, 0)));
        // 10 elements round up to 3 blocks of 4 * 28 bytes
        assert_eq!(m.blob_sizes(), vec![336]);
        assert!(m.contiguous_run(4, 0, 4).is_some());
        assert!(m.contiguous_run(2, 0, 4).is_none());
    }

    #[test]
    fn zero_lanes_rejected() {
        assert!(AoSoA::new("f32".parse().unwrap(), ArrayExtents::linear(1), 0).is_err());
    }
}
