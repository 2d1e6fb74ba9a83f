use super::{Mapping, NrAndOffset};
use crate::extents::ArrayExtents;
use crate::record::{FlatSchema, RecordSchema};
use crate::Result;

/// Struct of arrays: each leaf is stored as a contiguous array.
///
/// With `multi_blob` every leaf gets its own blob (blob number = flat leaf index).
/// Otherwise all leaf arrays share one blob, one after another in flat order.
#[derive(Debug, Clone)]
pub struct SoA {
    schema: FlatSchema,
    extents: ArrayExtents,
    multi_blob: bool,
    sizes: Vec<usize>,
    // start of each leaf's array inside the single blob
    bases: Vec<usize>,
}

impl SoA {
    pub fn multi_blob(schema: RecordSchema, extents: ArrayExtents) -> Result<Self> {
        Self::new(schema, extents, true)
    }

    pub fn single_blob(schema: RecordSchema, extents: ArrayExtents) -> Result<Self> {
        Self::new(schema, extents, false)
    }

    pub fn new(schema: RecordSchema, extents: ArrayExtents, multi_blob: bool) -> Result<Self> {
        let schema = FlatSchema::new(schema)?;
        let n = extents.len();
        let sizes: Vec<usize> = schema.leaves().iter().map(|l| l.ty.size()).collect();
        let bases = sizes
            .iter()
            .scan(0, |acc, s| {
                let base = *acc;
                *acc += n * s;
                Some(base)
            })
            .collect();
        Ok(SoA { schema, extents, multi_blob, sizes, bases })
    }

    pub fn is_multi_blob(&self) -> bool {
        self.multi_blob
    }
}

// SAFETY: each leaf owns `len * size` bytes, in its own blob or its own region.
unsafe impl Mapping for SoA {
    fn flat_schema(&self) -> &FlatSchema {
        &self.schema
    }

    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn blob_sizes(&self) -> Vec<usize> {
        let n = self.extents.len();
        if self.multi_blob {
            self.sizes.iter().map(|s| n * s).collect()
        } else {
            vec![n * self.schema.size_packed()]
        }
    }

    fn blob_count(&self) -> usize {
        if self.multi_blob {
            self.sizes.len()
        } else {
            1
        }
    }

    fn name(&self) -> String {
        if self.multi_blob { "soa-mb" } else { "soa-sb" }.into()
    }

    #[inline(always)]
    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        let within = lin * self.sizes[leaf];
        Some(if self.multi_blob {
            NrAndOffset::new(leaf, within)
        } else {
            NrAndOffset::new(0, self.bases[leaf] + within)
        })
    }

    fn contiguous_run(&self, lin: usize, leaf: usize, _n: usize) -> Option<NrAndOffset> {
        self.resolve(lin, leaf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets() {
        let s: RecordSchema = "Record{x:f64,y:f64}".parse().unwrap();
        let mb = SoA::multi_blob(s.clone(), ArrayExtents::linear(100)).unwrap();
        assert_eq!(mb.resolve(5, 1), Some(NrAndOffset::new(1, 40)));
        assert_eq!(mb.resolve(0, 0), Some(NrAndOffset::new(0, 0)));
        assert_eq!(mb.blob_sizes(), vec![800, 800]);
        let sb = SoA::single_blob(s, ArrayExtents::linear(100)).unwrap();
        assert_eq!(sb.resolve(5, 1), Some(NrAndOffset::new(0, 840)));
        assert_eq!(sb.blob_sizes(), vec![1600]);
    }
}
