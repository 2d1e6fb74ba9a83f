use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::blob::Blob;
use crate::extents::ArrayExtents;
use crate::mapping::{Mapping, NrAndOffset};
use crate::record::FlatSchema;
use crate::value::{Scalar, Value};
use crate::{Error, Result};

/// Per-blob block counters: `ceil(blob_size / granularity)` 64-bit counters per blob.
#[derive(Debug)]
pub struct HeatmapCounters {
    granularity: usize,
    blocks: Vec<Vec<AtomicU64>>,
}

impl HeatmapCounters {
    pub fn new(blob_sizes: &[usize], granularity: usize) -> Self {
        HeatmapCounters {
            granularity,
            blocks: blob_sizes
                .iter()
                .map(|s| (0..s.div_ceil(granularity)).map(|_| AtomicU64::new(0)).collect())
                .collect(),
        }
    }

    pub fn granularity(&self) -> usize {
        self.granularity
    }

    /// Adds one to every block overlapping `[start, start + len)` of `blob`.
    #[inline]
    pub fn touch(&self, blob: usize, start: usize, len: usize) {
        if len == 0 {
            return;
        }
        let first = start / self.granularity;
        let last = (start + len - 1) / self.granularity;
        for c in &self.blocks[blob][first..=last] {
            c.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn counts(&self, blob: usize) -> Vec<u64> {
        self.blocks[blob].iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }

    pub fn blob_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn counter_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn counter_bytes(&self) -> usize {
        self.counter_count() * std::mem::size_of::<AtomicU64>()
    }

    pub fn total(&self) -> u64 {
        (0..self.blocks.len()).map(|b| self.counts(b).iter().sum::<u64>()).sum()
    }

    /// `blockIndex,byteStart,count` rows for one blob.
    pub fn to_csv(&self, blob: usize) -> String {
        let mut s = String::from("blockIndex,byteStart,count\n");
        for (i, c) in self.counts(blob).into_iter().enumerate() {
            s += &format!("{i},{},{c}\n", i * self.granularity);
        }
        s
    }

    /// Writes `heatmap_blob<k>.csv` for every blob into `dir`.
    pub fn write_csvs(&self, dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        (0..self.blocks.len())
            .map(|b| {
                let p = dir.join(format!("heatmap_blob{b}.csv"));
                std::fs::write(&p, self.to_csv(b))?;
                Ok(p)
            })
            .collect()
    }

    pub fn reset(&self) {
        self.blocks.iter().flatten().for_each(|c| c.store(0, Ordering::Relaxed));
    }
}

/// Counts accesses per storage block of the inner mapping's blobs.
///
/// Each access adds one to every block its byte range overlaps. Bit-packed
/// values count the whole bytes they straddle; leaves without storage count nothing.
#[derive(Debug)]
pub struct Heatmap<M> {
    inner: M,
    counters: Arc<HeatmapCounters>,
}

impl<M: Mapping> Heatmap<M> {
    pub fn new(inner: M, granularity: usize) -> Result<Self> {
        if granularity == 0 {
            return Err(Error::Parse("heatmap granularity must be >= 1".into()));
        }
        let counters = Arc::new(HeatmapCounters::new(&inner.blob_sizes(), granularity));
        Ok(Heatmap { inner, counters })
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn counters(&self) -> Arc<HeatmapCounters> {
        Arc::clone(&self.counters)
    }

    #[inline]
    fn count(&self, lin: usize, leaf: usize) {
        self.inner.touched_bytes(lin, leaf, &mut |blob, start, len| self.counters.touch(blob, start, len));
    }
}

// SAFETY: forwards layout questions to the inner mapping.
unsafe impl<M: Mapping> Mapping for Heatmap<M> {
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
        format!("heatmap:{}:{}", self.counters.granularity, self.inner.name())
    }

    fn is_computed(&self, _leaf: usize) -> bool {
        true
    }

    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        self.inner.resolve(lin, leaf)
    }

    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        let v = self.inner.load(blobs, lin, leaf);
        self.count(lin, leaf);
        v
    }

    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        self.inner.store(blobs, lin, leaf, value);
        self.count(lin, leaf);
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
        self.count(lin, leaf);
        v
    }

    #[inline(always)]
    fn write<T: Scalar>(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: T) {
        self.inner.write::<T>(blobs, lin, leaf, value);
        self.count(lin, leaf);
    }

    #[inline(always)]
    unsafe fn read_unchecked<T: Scalar>(&self, blobs: &[Blob], lin: usize, leaf: usize) -> T {
        let v = self.inner.read_unchecked::<T>(blobs, lin, leaf);
        self.count(lin, leaf);
        v
    }

    #[inline(always)]
    unsafe fn write_unchecked<T: Scalar>(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: T) {
        self.inner.write_unchecked::<T>(blobs, lin, leaf, value);
        self.count(lin, leaf);
    }
}
