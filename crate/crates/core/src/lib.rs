//! Logical views of multidimensional arrays of nested records, decoupled from
//! their physical layout by exchangeable mappings.
//!
//! A [`RecordSchema`] describes one record, [`ArrayExtents`] the array shape.
//! A [`Mapping`] places every (array index, leaf) pair in a set of blobs, either
//! at a byte location or through a computed load/store. [`View`] owns the blobs.

pub mod blob;
pub mod computed;
mod error;
pub mod extents;
pub mod instrument;
pub mod layout;
pub mod mapping;
pub mod nbody;
pub mod record;
pub mod simd;
pub mod value;
pub mod view;

pub use blob::Blob;
pub use error::{Error, Result};
pub use extents::{ArrayExtents, Extent, IndexType};
pub use layout::{parse_layout, LayoutSpec};
pub use mapping::{DynMapping, Mapping, NrAndOffset};
pub use record::{FlatSchema, LeafInfo, RecordCoord, RecordSchema, ScalarType};
pub use value::{Scalar, Value};
pub use view::{copy_view, RecordRef, RecordRefMut, View};
