use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::blob::Blob;
use crate::extents::ArrayExtents;
use crate::mapping::{Mapping, NrAndOffset};
use crate::record::FlatSchema;
use crate::value::{Scalar, Value};

/// Per-leaf read and write counters: `2 * leaf_count` 64-bit counters in total.
#[derive(Debug)]
pub struct FieldAccessCounters {
    reads: Vec<AtomicU64>,
    writes: Vec<AtomicU64>,
}

impl FieldAccessCounters {
    pub fn new(leaf_count: usize) -> Self {
        FieldAccessCounters {
            reads: (0..leaf_count).map(|_| AtomicU64::new(0)).collect(),
            writes: (0..leaf_count).map(|_| AtomicU64::new(0)).collect(),
        }
    }

    pub fn reads(&self, leaf: usize) -> u64 {
        self.reads[leaf].load(Ordering::Relaxed)
    }

    pub fn writes(&self, leaf: usize) -> u64 {
        self.writes[leaf].load(Ordering::Relaxed)
    }

    pub fn counter_count(&self) -> usize {
        self.reads.len() + self.writes.len()
    }

    pub fn counter_bytes(&self) -> usize {
        self.counter_count() * std::mem::size_of::<AtomicU64>()
    }

    pub fn total(&self) -> u64 {
        (0..self.reads.len()).map(|f| self.reads(f) + self.writes(f)).sum()
    }

    pub fn reset(&self) {
        self.reads.iter().chain(&self.writes).for_each(|c| c.store(0, Ordering::Relaxed));
    }
}

/// Counts reads and writes per record field, forwarding all storage to `M`.
///
/// Every leaf is exposed as computed so that each access passes through the counters.
#[derive(Debug)]
pub struct FieldAccessCount<M> {
    inner: M,
    counters: Arc<FieldAccessCounters>,
}

impl<M: Mapping> FieldAccessCount<M> {
    pub fn new(inner: M) -> Self {
        let counters = Arc::new(FieldAccessCounters::new(inner.flat_schema().leaf_count()));
        FieldAccessCount { inner, counters }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// Shared handle to the counters; stays valid after the mapping moves into a view.
    pub fn counters(&self) -> Arc<FieldAccessCounters> {
        Arc::clone(&self.counters)
    }

    pub fn report(&self) -> FieldAccessReport {
        FieldAccessReport::new(&self.counters, self.inner.flat_schema())
    }
}

// SAFETY: forwards layout questions to the inner mapping.
unsafe impl<M: Mapping> Mapping for FieldAccessCount<M> {
    fn flat_schema(&self) -> &FlatSchema {
        self.inner.flat_schema()
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
        format!("trace:{}", self.inner.name())
    }

    fn is_computed(&self, _leaf: usize) -> bool {
        true
    }

    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        self.inner.resolve(lin, leaf)
    }

    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        let v = self.inner.load(blobs, lin, leaf);
        self.counters.reads[leaf].fetch_add(1, Ordering::Relaxed);
        v
    }

    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        self.inner.store(blobs, lin, leaf, value);
        self.counters.writes[leaf].fetch_add(1, Ordering::Relaxed);
    }

    fn touched_bytes(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        self.inner.touched_bytes(lin, leaf, f)
    }

    fn runtime_state_bytes(&self) -> usize {
        self.inner.runtime_state_bytes() + self.counters.counter_bytes()
    }

    #[inline(always)]
    fn read<T: Scalar>(&self, blobs: &[Blob], lin: usize, leaf: usize) -> T {
        let v = self.inner.read::<T>(blobs, lin, leaf);
        self.counters.reads[leaf].fetch_add(1, Ordering::Relaxed);
        v
    }

    #[inline(always)]
    fn write<T: Scalar>(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: T) {
        self.inner.write::<T>(blobs, lin, leaf, value);
        self.counters.writes[leaf].fetch_add(1, Ordering::Relaxed);
    }

    #[inline(always)]
    unsafe fn read_unchecked<T: Scalar>(&self, blobs: &[Blob], lin: usize, leaf: usize) -> T {
        let v = self.inner.read_unchecked::<T>(blobs, lin, leaf);
        self.counters.reads[leaf].fetch_add(1, Ordering::Relaxed);
        v
    }

    #[inline(always)]
    unsafe fn write_unchecked<T: Scalar>(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: T) {
        self.inner.write_unchecked::<T>(blobs, lin, leaf, value);
        self.counters.writes[leaf].fetch_add(1, Ordering::Relaxed);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldRow {
    pub path: String,
    pub reads: u64,
    pub writes: u64,
}

impl FieldRow {
    pub fn total(&self) -> u64 {
        self.reads + self.writes
    }
}

/// One row per leaf in flat order, followed by a grand total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldAccessReport {
    pub rows: Vec<FieldRow>,
}

impl FieldAccessReport {
    pub fn new(counters: &FieldAccessCounters, schema: &FlatSchema) -> Self {
        let rows = schema
            .leaves()
            .iter()
            .map(|l| FieldRow {
                path: l.path.clone(),
                reads: counters.reads(l.flat_index),
                writes: counters.writes(l.flat_index),
            })
            .collect();
        FieldAccessReport { rows }
    }

    pub fn row(&self, path: &str) -> Option<&FieldRow> {
        self.rows.iter().find(|r| r.path == path)
    }

    pub fn grand_total(&self) -> FieldRow {
        FieldRow {
            path: "total".into(),
            reads: self.rows.iter().map(|r| r.reads).sum(),
            writes: self.rows.iter().map(|r| r.writes).sum(),
        }
    }

    /// All rows including the trailing total row.
    pub fn table(&self) -> Vec<FieldRow> {
        let mut t = self.rows.clone();
        t.push(self.grand_total());
        t
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("field,reads,writes,total\n");
        for r in self.table() {
            s += &format!("{},{},{},{}\n", r.path, r.reads, r.writes, r.total());
        }
        s
    }
}

impl fmt::Display for FieldAccessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let table = self.table();
        let w = table.iter().map(|r| r.path.len()).max().unwrap_or(5).max(5);
        writeln!(f, "{:<w$} {:>14} {:>14} {:>14}", "field", "reads", "writes", "total")?;
        for r in &table {
            writeln!(f, "{:<w$} {:>14} {:>14} {:>14}", r.path, r.reads, r.writes, r.total())?;
        }
        Ok(())
    }
}
