//! The mapping contract and the physical layouts.
//!
//! A mapping translates a (linear array index, flat leaf index) pair either to a
//! physical byte location inside one of its blobs, or, for computed leaves, to a
//! load/store routine that transforms the value on the way in and out.

mod aos;
mod aosoa;
mod one;
mod soa;
mod split;

pub use aos::AoS;
pub use aosoa::AoSoA;
pub use one::One;
pub use soa::SoA;
pub use split::Split;

use std::fmt;

use crate::blob::Blob;
use crate::extents::ArrayExtents;
use crate::record::{FlatSchema, RecordSchema};
use crate::value::{Scalar, Value};
use crate::Result;

/// Physical location of a leaf value: blob number and byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NrAndOffset {
    pub blob: usize,
    pub offset: usize,
}

impl NrAndOffset {
    pub const fn new(blob: usize, offset: usize) -> Self {
        NrAndOffset { blob, offset }
    }
}

/// # Safety
///
/// Views skip bounds checks on the typed fast path, so implementations must
/// guarantee that for every `lin < extents().len()` and every leaf that is not
/// computed, `resolve` returns `Some(p)` with `p.blob < blob_sizes().len()` and
/// `p.offset + leaf size <= blob_sizes()[p.blob]`. `blob_sizes`, `is_computed`
/// and `resolve` must return the same answers for the lifetime of the mapping.
pub unsafe trait Mapping: fmt::Debug + Send + Sync {
    fn flat_schema(&self) -> &FlatSchema;

    fn extents(&self) -> &ArrayExtents;

    fn blob_sizes(&self) -> Vec<usize>;

    fn blob_count(&self) -> usize {
        self.blob_sizes().len()
    }

    /// Textual layout name, as accepted by [`crate::layout::parse_layout`].
    fn name(&self) -> String;

    /// Whether accesses to `leaf` go through [`load`](Self::load)/[`store`](Self::store)
    /// instead of direct byte access.
    fn is_computed(&self, _leaf: usize) -> bool {
        false
    }

    /// Physical location of a leaf value; `None` when the leaf is computed.
    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset>;

    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        let ty = self.flat_schema().leaf(leaf).ty;
        let p = self.resolve(lin, leaf).expect("physical leaf must resolve");
        Value::read_le(ty, &blobs[p.blob].as_bytes()[p.offset..])
    }

    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        let ty = self.flat_schema().leaf(leaf).ty;
        let p = self.resolve(lin, leaf).expect("physical leaf must resolve");
        value.cast(ty).write_le(&mut blobs[p.blob].as_bytes_mut()[p.offset..]);
    }

    /// Reports every storage byte range `(blob, start, len)` one access to
    /// `(lin, leaf)` touches. Fractional bit ranges are rounded outward to bytes.
    fn touched_bytes(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        if let Some(p) = self.resolve(lin, leaf) {
            f(p.blob, p.offset, self.flat_schema().leaf(leaf).ty.size());
        }
    }

    /// Start of `n` values of `leaf` beginning at `lin`, when they are stored back to
    /// back with a stride of the leaf size.
    fn contiguous_run(&self, _lin: usize, _leaf: usize, _n: usize) -> Option<NrAndOffset> {
        None
    }

    /// Bytes of runtime parameters beyond the blobs (dynamic extents, counters, tables
    /// that depend on runtime values). Zero for a stateless mapping.
    fn runtime_state_bytes(&self) -> usize {
        self.extents().runtime_state_bytes()
    }

    /// Typed read. `T` must be the leaf's scalar type.
    #[inline(always)]
    fn read<T: Scalar>(&self, blobs: &[Blob], lin: usize, leaf: usize) -> T
    where
        Self: Sized,
    {
        if self.is_computed(leaf) {
            T::from_value(self.load(blobs, lin, leaf))
        } else {
            debug_assert_eq!(T::TYPE, self.flat_schema().leaf(leaf).ty);
            let p = self.resolve(lin, leaf).unwrap();
            T::read_le(&blobs[p.blob].as_bytes()[p.offset..])
        }
    }

    /// Typed write. `T` must be the leaf's scalar type.
    #[inline(always)]
    fn write<T: Scalar>(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: T)
    where
        Self: Sized,
    {
        if self.is_computed(leaf) {
            self.store(blobs, lin, leaf, value.to_value())
        } else {
            debug_assert_eq!(T::TYPE, self.flat_schema().leaf(leaf).ty);
            let p = self.resolve(lin, leaf).unwrap();
            value.write_le(&mut blobs[p.blob].as_bytes_mut()[p.offset..])
        }
    }

    /// [`read`](Self::read) without bounds checks.
    ///
    /// # Safety
    ///
    /// `blobs` must have exactly the sizes from [`blob_sizes`](Self::blob_sizes),
    /// `lin` and `leaf` must be in range, and `T` must be the leaf's type unless
    /// the leaf is computed.
    #[inline(always)]
    unsafe fn read_unchecked<T: Scalar>(&self, blobs: &[Blob], lin: usize, leaf: usize) -> T
    where
        Self: Sized,
    {
        if self.is_computed(leaf) {
            T::from_value(self.load(blobs, lin, leaf))
        } else {
            let p = self.resolve(lin, leaf).unwrap_unchecked();
            T::read_ptr(blobs.get_unchecked(p.blob).as_ptr().add(p.offset))
        }
    }

    /// [`write`](Self::write) without bounds checks.
    ///
    /// # Safety
    ///
    /// As for [`read_unchecked`](Self::read_unchecked).
    #[inline(always)]
    unsafe fn write_unchecked<T: Scalar>(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: T)
    where
        Self: Sized,
    {
        if self.is_computed(leaf) {
            self.store(blobs, lin, leaf, value.to_value())
        } else {
            let p = self.resolve(lin, leaf).unwrap_unchecked();
            value.write_ptr(blobs.get_unchecked_mut(p.blob).as_mut_ptr().add(p.offset))
        }
    }
}

// SAFETY: forwards every method to the boxed mapping.
unsafe impl<M: Mapping + ?Sized> Mapping for Box<M> {
    fn flat_schema(&self) -> &FlatSchema {
        (**self).flat_schema()
    }
    fn extents(&self) -> &ArrayExtents {
        (**self).extents()
    }
    fn blob_sizes(&self) -> Vec<usize> {
        (**self).blob_sizes()
    }
    fn blob_count(&self) -> usize {
        (**self).blob_count()
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn is_computed(&self, leaf: usize) -> bool {
        (**self).is_computed(leaf)
    }
    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        (**self).resolve(lin, leaf)
    }
    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        (**self).load(blobs, lin, leaf)
    }
    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        (**self).store(blobs, lin, leaf, value)
    }
    fn touched_bytes(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        (**self).touched_bytes(lin, leaf, f)
    }
    fn contiguous_run(&self, lin: usize, leaf: usize, n: usize) -> Option<NrAndOffset> {
        (**self).contiguous_run(lin, leaf, n)
    }
    fn runtime_state_bytes(&self) -> usize {
        (**self).runtime_state_bytes()
    }
}

/// A type-erased mapping, as produced by the layout parser.
pub type DynMapping = Box<dyn Mapping>;

/// Builds a mapping over a given schema and extents; used by mappings that wrap an
/// inner mapping over a rewritten record dimension.
pub trait MappingFactory<M> {
    fn build(self, schema: RecordSchema, extents: ArrayExtents) -> Result<M>;
}

impl<M, F> MappingFactory<M> for F
where
    F: FnOnce(RecordSchema, ArrayExtents) -> Result<M>,
{
    fn build(self, schema: RecordSchema, extents: ArrayExtents) -> Result<M> {
        self(schema, extents)
    }
}
