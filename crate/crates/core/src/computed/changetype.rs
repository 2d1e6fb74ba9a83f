use crate::blob::Blob;
use crate::extents::ArrayExtents;
use crate::mapping::{Mapping, MappingFactory, NrAndOffset};
use crate::record::{FlatSchema, RecordSchema, ScalarType};
use crate::value::Value;
use crate::{Error, Result};

/// Stores selected leaves with a different scalar type, converting on every
/// load and store. The rewritten record dimension is laid out by an inner mapping.
///
/// Supported conversions: identity, `f32` <-> `f64`, and integer widening or
/// narrowing within the same signedness (narrowing keeps the low bits).
/// Leaves whose storage type equals the logical type stay physical.
#[derive(Debug, Clone)]
pub struct ChangeType<M> {
    schema: FlatSchema,
    storage: Vec<ScalarType>,
    inner: M,
}

pub fn conversion_supported(from: ScalarType, to: ScalarType) -> bool {
    from == to
        || (from.is_float() && to.is_float())
        || (from.is_integer() && to.is_integer() && from.is_signed() == to.is_signed())
}

impl<M: Mapping> ChangeType<M> {
    /// `storage` holds one storage type per leaf, in flat leaf order.
    pub fn new(
        schema: RecordSchema,
        extents: ArrayExtents,
        storage: Vec<ScalarType>,
        make_inner: impl MappingFactory<M>,
    ) -> Result<Self> {
        let schema = FlatSchema::new(schema)?;
        if storage.len() != schema.leaf_count() {
            return Err(Error::UnsupportedConversion(format!(
                "{} storage types for {} leaves",
                storage.len(),
                schema.leaf_count()
            )));
        }
        for (l, &to) in schema.leaves().iter().zip(&storage) {
            if !conversion_supported(l.ty, to) {
                return Err(Error::UnsupportedConversion(format!("{} -> {to} for leaf {}", l.ty, l.path)));
            }
        }
        let mut k = 0;
        let rewritten = schema.schema().map_leaves(&mut |_, _| {
            k += 1;
            RecordSchema::Leaf(storage[k - 1])
        });
        let inner = make_inner.build(rewritten, extents)?;
        Ok(ChangeType { schema, storage, inner })
    }

    /// Storage types given for selected leaf paths (`*` matches every leaf);
    /// unlisted leaves keep their type.
    pub fn with_paths(
        schema: RecordSchema,
        extents: ArrayExtents,
        map: &[(&str, ScalarType)],
        make_inner: impl MappingFactory<M>,
    ) -> Result<Self> {
        let flat = FlatSchema::new(schema.clone())?;
        let mut storage: Vec<ScalarType> = flat.leaves().iter().map(|l| l.ty).collect();
        for (path, ty) in map {
            if *path == "*" {
                storage.iter_mut().for_each(|s| *s = *ty);
                continue;
            }
            let coord = flat.schema().coord_of(path)?;
            for leaf in flat.leaf_range(&coord)? {
                storage[leaf] = *ty;
            }
        }
        Self::new(schema, extents, storage, make_inner)
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn storage_type(&self, leaf: usize) -> ScalarType {
        self.storage[leaf]
    }

    #[inline(always)]
    fn is_identity(&self, leaf: usize) -> bool {
        self.storage[leaf] == self.schema.leaf(leaf).ty
    }
}

// SAFETY: physical leaves are exactly the inner mapping's, with the same type.
unsafe impl<M: Mapping> Mapping for ChangeType<M> {
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
        let changed: Vec<String> = self
            .schema
            .leaves()
            .iter()
            .zip(&self.storage)
            .filter(|(l, s)| l.ty != **s)
            .map(|(l, s)| format!("{}={s}", l.path))
            .collect();
        let map = if changed.is_empty() {
            // keep the name parseable for the identity map
            format!("{}={}", self.schema.leaf(0).path, self.storage[0])
        } else {
            changed.join(",")
        };
        format!("changetype:{map}:{}", self.inner.name())
    }

    #[inline(always)]
    fn is_computed(&self, leaf: usize) -> bool {
        !self.is_identity(leaf) || self.inner.is_computed(leaf)
    }

    #[inline(always)]
    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        if self.is_identity(leaf) {
            self.inner.resolve(lin, leaf)
        } else {
            None
        }
    }

    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        self.inner.load(blobs, lin, leaf).cast(self.schema.leaf(leaf).ty)
    }

    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        let logical = value.cast(self.schema.leaf(leaf).ty);
        self.inner.store(blobs, lin, leaf, logical.cast(self.storage[leaf]))
    }

    fn touched_bytes(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        self.inner.touched_bytes(lin, leaf, f)
    }

    fn contiguous_run(&self, lin: usize, leaf: usize, n: usize) -> Option<NrAndOffset> {
        if self.is_identity(leaf) {
            self.inner.contiguous_run(lin, leaf, n)
        } else {
            None
        }
    }

    fn runtime_state_bytes(&self) -> usize {
        self.inner.runtime_state_bytes()
    }
}
