//! Mappings whose loads and stores compute: bit packing, reduced-precision
//! floats, storage type changes, byte splitting and the discarding null mapping.

mod bitpack;
pub mod bits;
mod bytesplit;
mod changetype;
pub mod float_bits;
mod null;

pub use bitpack::{BitpackFloatSoA, BitpackIntSoA, NrAndBitOffset};
pub use bits::{pack_int, unpack_int, StorageWord};
pub use bytesplit::{split_schema, Bytesplit};
pub use changetype::{conversion_supported, ChangeType};
pub use float_bits::{float_decode, float_encode, FloatFormat};
pub use null::Null;
