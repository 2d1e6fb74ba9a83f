//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use recordlayout::{ArrayExtents, Extent, IndexType, Mapping, RecordSchema, ScalarType};

pub const SCALARS: [ScalarType; 11] = [
    ScalarType::I8,
    ScalarType::I16,
    ScalarType::I32,
    ScalarType::I64,
    ScalarType::U8,
    ScalarType::U16,
    ScalarType::U32,
    ScalarType::U64,
    ScalarType::F32,
    ScalarType::F64,
    ScalarType::Bool,
];

/// A random schema with at most `max_leaves` leaves and nesting depth at most `depth`.
pub fn random_schema(rng: &mut impl Rng, max_leaves: usize, depth: usize) -> RecordSchema {
    let mut budget = rng.gen_range(1..=max_leaves);
    let s = node(rng, &mut budget, depth);
    match s {
        RecordSchema::Leaf(_) => RecordSchema::record([("v", s)]).unwrap(),
        s => s,
    }
}

fn node(rng: &mut impl Rng, budget: &mut usize, depth: usize) -> RecordSchema {
    let kind = if depth == 0 || *budget <= 1 { 0 } else { rng.gen_range(0..4) };
    match kind {
        0 | 1 => {
            *budget = budget.saturating_sub(1);
            RecordSchema::Leaf(*SCALARS.choose(rng).unwrap())
        }
        2 if *budget >= 2 => {
            let count = rng.gen_range(1..=(*budget).min(3));
            let per = (*budget / count).max(1);
            let mut b = per;
            let elem = node(rng, &mut b, depth - 1);
            let used = per - b;
            *budget = budget.saturating_sub(used.max(1) * count);
            RecordSchema::array(count, elem).unwrap()
        }
        _ => {
            let n = rng.gen_range(1..=(*budget).min(4));
            let mut fields = Vec::new();
            for k in 0..n {
                if *budget == 0 {
                    break;
                }
                fields.push((format!("f{k}"), node(rng, budget, depth - 1)));
            }
            RecordSchema::record(fields).unwrap()
        }
    }
}

/// Random extents of rank 1..=3 with at most `max_total` elements.
pub fn random_extents(rng: &mut impl Rng, max_total: u64) -> ArrayExtents {
    let rank = rng.gen_range(1..=3);
    let mut sizes = Vec::new();
    let mut left = max_total;
    for _ in 0..rank {
        let s = rng.gen_range(1..=left.clamp(1, 8));
        sizes.push(s);
        left = (left / s).max(1);
    }
    let types = [IndexType::I16, IndexType::I32, IndexType::I64, IndexType::U16, IndexType::U32, IndexType::U64];
    let mut dims = Vec::new();
    let mut dynamic = Vec::new();
    for &s in &sizes {
        if rng.gen_bool(0.5) {
            dims.push(Extent::Dynamic);
            dynamic.push(s);
        } else {
            dims.push(Extent::Static(s));
        }
    }
    ArrayExtents::new(*types.choose(rng).unwrap(), dims, dynamic).unwrap()
}

/// Checks that every physical (index, leaf) byte range lies inside its blob and
/// that no two ranges overlap.
pub fn check_disjoint_total<M: Mapping>(m: &M) -> Result<usize, String> {
    let sizes = m.blob_sizes();
    let mut ranges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); sizes.len()];
    let leaves = m.flat_schema().leaf_count();
    let mut checked = 0;
    for lin in 0..m.extents().len() {
        for f in 0..leaves {
            if m.is_computed(f) {
                continue;
            }
            let p = m.resolve(lin, f).ok_or_else(|| format!("({lin},{f}) unresolved"))?;
            let size = m.flat_schema().leaf(f).ty.size();
            if p.blob >= sizes.len() || p.offset + size > sizes[p.blob] {
                return Err(format!("({lin},{f}) -> {p:?} outside blobs {sizes:?}"));
            }
            ranges[p.blob].push((p.offset, p.offset + size));
            checked += 1;
        }
    }
    for r in &mut ranges {
        r.sort_unstable();
        if let Some(w) = r.windows(2).find(|w| w[0].1 > w[1].0) {
            return Err(format!("overlap {:?} / {:?}", w[0], w[1]));
        }
    }
    Ok(checked)
}

/// Packed leaf offsets by walking the leaves and summing sizes.
pub fn packed_offsets(schema: &RecordSchema) -> Vec<usize> {
    let mut off = 0;
    schema
        .flatten()
        .into_iter()
        .map(|(_, t)| {
            let o = off;
            off += t.size();
            o
        })
        .collect()
}

/// Reference binary16 codec by table lookup over all 2^16 patterns.
pub struct HalfOracle {
    /// (value, pattern) for all finite non-negative patterns, ascending.
    table: Vec<(f64, u16)>,
}

impl HalfOracle {
    pub fn new() -> Self {
        let table = (0u16..0x7C00).map(|p| (Self::decode(p), p)).collect();
        HalfOracle { table }
    }

    pub fn decode(p: u16) -> f64 {
        let sign = if p & 0x8000 != 0 { -1.0 } else { 1.0 };
        let e = ((p >> 10) & 0x1f) as i32;
        let m = (p & 0x3ff) as f64;
        sign * match e {
            0 => m * 2f64.powi(-24),
            31 if m == 0.0 => f64::INFINITY,
            31 => f64::NAN,
            _ => (1.0 + m / 1024.0) * 2f64.powi(e - 15),
        }
    }

    /// Nearest pattern, ties to the even pattern; at or above 65520 rounds to infinity.
    pub fn encode(&self, v: f64) -> Option<u16> {
        if v.is_nan() {
            return None;
        }
        let sign = if v.is_sign_negative() { 0x8000 } else { 0 };
        let a = v.abs();
        if a >= 65520.0 {
            return Some(sign | 0x7C00);
        }
        let i = self.table.partition_point(|&(x, _)| x < a);
        if i == self.table.len() {
            return Some(sign | 0x7BFF);
        }
        if self.table[i].0 == a {
            return Some(sign | self.table[i].1);
        }
        let (lo, hi) = (self.table[i - 1], self.table[i]);
        let p = match (a - lo.0).partial_cmp(&(hi.0 - a)).unwrap() {
            std::cmp::Ordering::Less => lo.1,
            std::cmp::Ordering::Greater => hi.1,
            std::cmp::Ordering::Equal => {
                if lo.1 % 2 == 0 {
                    lo.1
                } else {
                    hi.1
                }
            }
        };
        Some(sign | p)
    }
}

/// Byte-oriented run-length encoding: one (count, byte) pair per run of up to 255.
pub fn rle_len(bytes: &[u8]) -> usize {
    let mut n = 0;
    let mut i = 0;
    while i < bytes.len() {
        let mut j = i + 1;
        while j < bytes.len() && bytes[j] == bytes[i] && j - i < 255 {
            j += 1;
        }
        n += 2;
        i = j;
    }
    n
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
