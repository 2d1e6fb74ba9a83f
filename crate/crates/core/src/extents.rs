//! Array extents mixing static and dynamic dimensions, with a configurable
//! index integer type.
//!
//! Only dynamic dimensions carry runtime values. Extents whose dimensions are
//! all static carry no runtime state at all, see [`ArrayExtents::is_fully_static`].
//!
//! Textual form: `<itype>:[d0,d1,...]` where each `d` is a number or `dyn`,
//! e.g. `i32:[3,dyn,4,4]`. Dynamic values are supplied separately.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexType {
    I16,
    I32,
    I64,
    U16,
    U32,
    U64,
}

impl IndexType {
    pub const fn max_value(self) -> u64 {
        match self {
            IndexType::I16 => i16::MAX as u64,
            IndexType::I32 => i32::MAX as u64,
            IndexType::I64 => i64::MAX as u64,
            IndexType::U16 => u16::MAX as u64,
            IndexType::U32 => u32::MAX as u64,
            IndexType::U64 => u64::MAX,
        }
    }

    pub const fn size(self) -> usize {
        match self {
            IndexType::I16 | IndexType::U16 => 2,
            IndexType::I32 | IndexType::U32 => 4,
            IndexType::I64 | IndexType::U64 => 8,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            IndexType::I16 => "i16",
            IndexType::I32 => "i32",
            IndexType::I64 => "i64",
            IndexType::U16 => "u16",
            IndexType::U32 => "u32",
            IndexType::U64 => "u64",
        }
    }
}

impl FromStr for IndexType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "i16" => IndexType::I16,
            "i32" => IndexType::I32,
            "i64" => IndexType::I64,
            "u16" => IndexType::U16,
            "u32" => IndexType::U32,
            "u64" => IndexType::U64,
            other => return Err(Error::Parse(format!("unknown index type `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extent {
    Static(u64),
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArrayExtents {
    index_type: IndexType,
    dims: Vec<Extent>,
    dynamic: Vec<u64>,
    // resolved sizes, cached for linearization
    sizes: Vec<u64>,
    total: u64,
}

impl ArrayExtents {
    pub fn new(index_type: IndexType, dims: Vec<Extent>, dynamic: Vec<u64>) -> Result<Self> {
        let expected = dims.iter().filter(|d| matches!(d, Extent::Dynamic)).count();
        if expected != dynamic.len() {
            return Err(Error::Arity { expected, got: dynamic.len() });
        }
        let max = index_type.max_value();
        let mut dyn_iter = dynamic.iter();
        let mut sizes = Vec::with_capacity(dims.len());
        for d in &dims {
            let n = match d {
                Extent::Static(n) => *n,
                Extent::Dynamic => *dyn_iter.next().unwrap(),
            };
            if n > max {
                return Err(Error::IndexTypeOverflow(format!("extent {n} exceeds {} range", index_type.name())));
            }
            sizes.push(n);
        }
        let total = if sizes.contains(&0) {
            0
        } else {
            sizes
                .iter()
                .try_fold(1u64, |t, &n| t.checked_mul(n).filter(|t| *t <= max))
                .ok_or_else(|| Error::IndexTypeOverflow(format!("element count exceeds {} range", index_type.name())))?
        };
        Ok(ArrayExtents { index_type, dims, dynamic, sizes, total })
    }

    /// Fully dynamic extents of the given sizes.
    pub fn dynamic(index_type: IndexType, sizes: &[u64]) -> Result<Self> {
        Self::new(index_type, vec![Extent::Dynamic; sizes.len()], sizes.to_vec())
    }

    /// Fully static extents of the given sizes.
    pub fn fixed(index_type: IndexType, sizes: &[u64]) -> Result<Self> {
        Self::new(index_type, sizes.iter().map(|&n| Extent::Static(n)).collect(), Vec::new())
    }

    /// One dynamic dimension of `n` elements, `u64` indices.
    pub fn linear(n: usize) -> Self {
        Self::dynamic(IndexType::U64, &[n as u64]).expect("usize fits u64")
    }

    pub fn index_type(&self) -> IndexType {
        self.index_type
    }

    pub fn dims(&self) -> &[Extent] {
        &self.dims
    }

    pub fn dynamic_values(&self) -> &[u64] {
        &self.dynamic
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn extent(&self, i: usize) -> u64 {
        self.sizes[i]
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.total as usize
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn is_fully_static(&self) -> bool {
        self.dynamic.is_empty()
    }

    /// Bytes of runtime state: one index-type value per dynamic extent.
    pub fn runtime_state_bytes(&self) -> usize {
        self.dynamic.len() * self.index_type.size()
    }

    /// Row-major flat index, checked against the extents.
    pub fn linearize(&self, index: &[u64]) -> Result<u64> {
        if index.len() != self.sizes.len() {
            return Err(Error::IndexOutOfRange(format!(
                "index rank {} for extents of rank {}",
                index.len(),
                self.sizes.len()
            )));
        }
        if let Some(d) = index.iter().zip(&self.sizes).position(|(i, n)| i >= n) {
            return Err(Error::IndexOutOfRange(format!("component {d} = {} >= extent {}", index[d], self.sizes[d])));
        }
        Ok(self.linearize_unchecked(index))
    }

    /// Row-major flat index without bounds checks. Out-of-range components yield
    /// an unspecified value; every later access through a view is still bounds checked.
    #[inline]
    pub fn linearize_unchecked(&self, index: &[u64]) -> u64 {
        let mut lin: u64 = 0;
        for (i, n) in index.iter().zip(&self.sizes) {
            lin = lin.wrapping_mul(*n).wrapping_add(*i);
        }
        lin
    }

    /// Inverse of [`linearize`](Self::linearize).
    pub fn delinearize(&self, mut lin: u64) -> Vec<u64> {
        let mut idx = vec![0; self.sizes.len()];
        for d in (0..self.sizes.len()).rev() {
            let n = self.sizes[d];
            if n > 0 {
                idx[d] = lin % n;
                lin /= n;
            }
        }
        idx
    }

    /// Every index in ascending row-major order.
    pub fn indices(&self) -> IndexIter<'_> {
        IndexIter { sizes: &self.sizes, next: if self.total == 0 { None } else { Some(vec![0; self.sizes.len()]) } }
    }
}

pub struct IndexIter<'a> {
    sizes: &'a [u64],
    next: Option<Vec<u64>>,
}

impl Iterator for IndexIter<'_> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        for d in (0..succ.len()).rev() {
            succ[d] += 1;
            if succ[d] < self.sizes[d] {
                self.next = Some(succ);
                break;
            }
            succ[d] = 0;
        }
        Some(cur)
    }
}

impl fmt::Display for ArrayExtents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.index_type.name())?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match d {
                Extent::Static(n) => write!(f, "{n}")?,
                Extent::Dynamic => write!(f, "dyn")?,
            }
        }
        write!(f, "]")
    }
}

/// Parses `<itype>:[d0,d1,...]` into the index type and dimension list.
pub fn parse_extents_shape(s: &str) -> Result<(IndexType, Vec<Extent>)> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (ty, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("expected `<itype>:[...]`, got `{s}`")))?;
    let inner = rest
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected bracketed dimensions in `{s}`")))?;
    let dims = if inner.is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|d| match d {
                "dyn" => Ok(Extent::Dynamic),
                n => n.parse().map(Extent::Static).map_err(|_| Error::Parse(format!("bad extent `{n}`"))),
            })
            .collect::<Result<_>>()?
    };
    Ok((ty.parse()?, dims))
}

impl ArrayExtents {
    pub fn parse(shape: &str, dynamic: &[u64]) -> Result<Self> {
        let (ty, dims) = parse_extents_shape(shape)?;
        Self::new(ty, dims, dynamic.to_vec())
    }
}
