//! Instrumentation mappings: per-field access counts and per-block heatmaps.
//!
//! Both wrap an arbitrary inner mapping and keep their counters outside the
//! mapped blobs, so stored data is identical to the uninstrumented run.
//! Increments are atomic with relaxed ordering; only totals are observed.

mod field_count;
mod heatmap;

pub use field_count::{FieldAccessCount, FieldAccessCounters, FieldAccessReport, FieldRow};
pub use heatmap::{Heatmap, HeatmapCounters};
