//! N-wide batches of scalars and records, and layout-aware transfers between
//! them and a view.
//!
//! Batches are portable arrays with lane-wise arithmetic; the optimizer is free
//! to map them onto vector registers. A width of one is the plain scalar type,
//! so width-generic code compiled for `W<1>` contains no batch types at all.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::mapping::{Mapping, One};
use crate::record::{FlatSchema, RecordCoord, RecordSchema, ScalarType};
use crate::value::{Scalar, Value};
use crate::view::{RecordRef, RecordRefMut, View};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
#[repr(transparent)]
pub struct SimdBatch<T, const N: usize>(pub [T; N]);

impl<T: Scalar, const N: usize> SimdBatch<T, N> {
    #[inline(always)]
    pub fn splat(x: T) -> Self {
        SimdBatch([x; N])
    }

    #[inline(always)]
    pub fn from_fn(f: impl FnMut(usize) -> T) -> Self {
        SimdBatch(std::array::from_fn(f))
    }

    #[inline(always)]
    pub fn lanes(&self) -> &[T; N] {
        &self.0
    }

    #[inline(always)]
    pub fn map(self, f: impl Fn(T) -> T) -> Self {
        SimdBatch(self.0.map(f))
    }
}

impl<T: Scalar, const N: usize> Default for SimdBatch<T, N> {
    fn default() -> Self {
        SimdBatch([T::default(); N])
    }
}

impl<T: fmt::Debug, const N: usize> fmt::Debug for SimdBatch<T, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

macro_rules! lanewise_op {
    ($($trait:ident $method:ident),*) => {$(
        impl<T: Copy + $trait<Output = T>, const N: usize> $trait for SimdBatch<T, N> {
            type Output = Self;

            #[inline(always)]
            fn $method(self, rhs: Self) -> Self {
                SimdBatch(std::array::from_fn(|k| self.0[k].$method(rhs.0[k])))
            }
        }
    )*};
}

lanewise_op!(Add add, Sub sub, Mul mul, Div div);

impl<T: Copy + Neg<Output = T>, const N: usize> Neg for SimdBatch<T, N> {
    type Output = Self;

    #[inline(always)]
    fn neg(self) -> Self {
        SimdBatch(self.0.map(|x| -x))
    }
}

/// A scalar (width 1) or a batch of lanes of one scalar type.
pub trait Lanes: Copy + fmt::Debug + Send + Sync + 'static {
    type Elem: Scalar;
    const WIDTH: usize;

    fn splat(x: Self::Elem) -> Self;
    fn from_fn(f: impl FnMut(usize) -> Self::Elem) -> Self;
    fn lane(&self, k: usize) -> Self::Elem;
}

macro_rules! scalar_lanes {
    ($($t:ty),*) => {$(
        impl Lanes for $t {
            type Elem = $t;
            const WIDTH: usize = 1;

            #[inline(always)]
            fn splat(x: $t) -> Self {
                x
            }

            #[inline(always)]
            fn from_fn(mut f: impl FnMut(usize) -> $t) -> Self {
                f(0)
            }

            #[inline(always)]
            fn lane(&self, k: usize) -> $t {
                debug_assert_eq!(k, 0);
                *self
            }
        }
    )*};
}

scalar_lanes!(i8, i16, i32, i64, u8, u16, u32, u64, f32, f64, bool);

impl<T: Scalar, const N: usize> Lanes for SimdBatch<T, N> {
    type Elem = T;
    const WIDTH: usize = N;

    #[inline(always)]
    fn splat(x: T) -> Self {
        SimdBatch::splat(x)
    }

    #[inline(always)]
    fn from_fn(f: impl FnMut(usize) -> T) -> Self {
        SimdBatch::from_fn(f)
    }

    #[inline(always)]
    fn lane(&self, k: usize) -> T {
        self.0[k]
    }
}

/// Floating-point lanes with the arithmetic the n-body kernel needs.
pub trait Vector<T>:
    Lanes<Elem = T> + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn sqrt(self) -> Self;
}

/// `f32` or `f64`.
pub trait Real: Scalar + Vector<Self> + PartialOrd {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

macro_rules! real {
    ($($t:ty),*) => {$(
        impl Vector<$t> for $t {
            #[inline(always)]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
        }

        impl Real for $t {
            #[inline(always)]
            fn from_f64(x: f64) -> Self {
                x as $t
            }

            #[inline(always)]
            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    )*};
}

real!(f32, f64);

impl<T: Real, const N: usize> Vector<T> for SimdBatch<T, N> {
    #[inline(always)]
    fn sqrt(self) -> Self {
        self.map(|x| x.sqrt())
    }
}

/// Compile-time SIMD width. `Of<T>` is `T` itself for width 1 and
/// `SimdBatch<T, N>` otherwise.
pub trait SimdWidth {
    const N: usize;
    type Of<T: Real>: Vector<T>;
}

pub struct W<const N: usize>;

impl SimdWidth for W<1> {
    const N: usize = 1;
    type Of<T: Real> = T;
}

macro_rules! widths {
    ($($n:literal),*) => {$(
        impl SimdWidth for W<$n> {
            const N: usize = $n;
            type Of<T: Real> = SimdBatch<T, $n>;
        }
    )*};
}

widths!(2, 4, 8, 16);

/// What simdizing a scalar or a record at a runtime width produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Simdized {
    /// Width 1 on a scalar: the scalar itself.
    Scalar(ScalarType),
    Batch {
        ty: ScalarType,
        width: usize,
    },
    /// Width 1 on a record: a single plain record.
    Record(RecordSchema),
    /// A single record whose leaves are `width`-wide batches.
    SimdRecord {
        schema: RecordSchema,
        width: usize,
    },
}

pub fn simd_n(schema: &RecordSchema, width: usize) -> Result<Simdized> {
    if width < 1 {
        return Err(Error::InvalidWidth(format!("SIMD width must be >= 1, got {width}")));
    }
    Ok(match (schema, width) {
        (RecordSchema::Leaf(t), 1) => Simdized::Scalar(*t),
        (RecordSchema::Leaf(t), n) => Simdized::Batch { ty: *t, width: n },
        (s, 1) => Simdized::Record(s.clone()),
        (s, n) => Simdized::SimdRecord { schema: s.clone(), width: n },
    })
}

/// A single record holding `width` lanes per leaf, stored through the `One`
/// mapping. For width > 1 each leaf becomes a `[T; width]` array, so lane `k`
/// of leaf `f` is inner leaf `f * width + k` and a leaf's lanes are contiguous.
#[derive(Debug, Clone)]
pub struct SimdizedRecord {
    schema: FlatSchema,
    width: usize,
    storage: View<One>,
}

impl SimdizedRecord {
    pub fn new(schema: RecordSchema, width: usize) -> Result<Self> {
        let stored = match simd_n(&schema, width)? {
            Simdized::SimdRecord { schema, width } => {
                schema.map_leaves(&mut |_, t| RecordSchema::array(width, RecordSchema::Leaf(t)).unwrap())
            }
            _ => schema.clone(),
        };
        Ok(SimdizedRecord { schema: FlatSchema::new(schema)?, width, storage: View::new(One::new(stored)?)? })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn schema(&self) -> &FlatSchema {
        &self.schema
    }

    /// The underlying single-record view.
    pub fn storage(&self) -> &View<One> {
        &self.storage
    }

    #[inline(always)]
    fn slot(&self, leaf: usize, lane: usize) -> usize {
        debug_assert!(lane < self.width);
        leaf * self.width + lane
    }

    pub fn get(&self, leaf: usize, lane: usize) -> Value {
        self.storage.load(0, self.slot(leaf, lane))
    }

    pub fn set(&mut self, leaf: usize, lane: usize, value: Value) {
        let s = self.slot(leaf, lane);
        self.storage.store(0, s, value)
    }

    pub fn lane_as<T: Scalar>(&self, leaf: usize, lane: usize) -> T {
        self.storage.read::<T>(0, self.slot(leaf, lane))
    }

    pub fn lanes(&self, leaf: usize) -> Vec<Value> {
        (0..self.width).map(|k| self.get(leaf, k)).collect()
    }

    /// The whole record, as a source for [`store_simd`].
    pub fn all(&self) -> SimdSlice<'_> {
        SimdSlice { record: self, coord: RecordCoord::root() }
    }

    /// The subtree at a dotted path, as a source for [`store_simd`].
    pub fn narrow(&self, path: &str) -> Result<SimdSlice<'_>> {
        Ok(SimdSlice { record: self, coord: self.schema.schema().coord_of(path)? })
    }

    fn lane_bytes(&self, leaf: usize) -> std::ops::Range<usize> {
        let start = self.storage.mapping().resolve(0, self.slot(leaf, 0)).unwrap().offset;
        start..start + self.width * self.schema.leaf(leaf).ty.size()
    }
}

/// A simdized record narrowed to a subtree.
#[derive(Clone)]
pub struct SimdSlice<'a> {
    record: &'a SimdizedRecord,
    coord: RecordCoord,
}

/// How a batch transfer of one leaf was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    /// One block copy: the mapping stores the lanes back to back.
    Contiguous,
    /// One scalar access per lane.
    PerLane,
}

/// The strategy [`load_simd`]/[`store_simd`] use for `n` lanes of `leaf` at `lin`.
pub fn transfer_strategy<M: Mapping>(mapping: &M, lin: usize, leaf: usize, n: usize) -> Transfer {
    if !mapping.is_computed(leaf) && mapping.contiguous_run(lin, leaf, n).is_some() {
        Transfer::Contiguous
    } else {
        Transfer::PerLane
    }
}

fn check_range<M: Mapping>(view: &View<M>, lin: usize, n: usize) -> Result<()> {
    if lin + n > view.len() {
        return Err(Error::IndexOutOfRange(format!("{n} lanes from {lin} exceed {} elements", view.len())));
    }
    Ok(())
}

fn check_schema(a: &FlatSchema, b: &FlatSchema) -> Result<()> {
    if a.schema() != b.schema() {
        return Err(Error::IncompatibleViews("simdized record has a different record dimension".into()));
    }
    Ok(())
}

/// Loads the leaves below `src` for `dst.width()` consecutive elements starting
/// at `src`'s array index.
pub fn load_simd<M: Mapping>(src: &RecordRef<'_, M>, dst: &mut SimdizedRecord) -> Result<()> {
    let view = src.view();
    let (lin, n) = (src.index(), dst.width);
    check_schema(view.mapping().flat_schema(), &dst.schema)?;
    check_range(view, lin, n)?;
    for f in view.mapping().flat_schema().leaf_range(src.coord())? {
        match (transfer_strategy(view.mapping(), lin, f, n), view.mapping().contiguous_run(lin, f, n)) {
            (Transfer::Contiguous, Some(p)) => {
                let r = dst.lane_bytes(f);
                let bytes = &view.blobs()[p.blob].as_bytes()[p.offset..p.offset + r.len()];
                dst.storage.blob_mut(0)[r].copy_from_slice(bytes);
            }
            _ => {
                for k in 0..n {
                    let v = view.load(lin + k, f);
                    dst.set(f, k, v);
                }
            }
        }
    }
    Ok(())
}

/// Stores the leaves of `src` into `dst.width()` consecutive elements. The source
/// and destination must be narrowed to the same subtree; other leaves are untouched.
pub fn store_simd<M: Mapping>(src: SimdSlice<'_>, dst: &mut RecordRefMut<'_, M>) -> Result<()> {
    if &src.coord != dst.coord() {
        return Err(Error::IncompatibleViews(format!("storing subtree {} into {}", src.coord, dst.coord())));
    }
    let (lin, coord) = (dst.index(), dst.coord().clone());
    let rec = src.record;
    let n = rec.width;
    let view = dst.view_mut();
    check_schema(view.mapping().flat_schema(), &rec.schema)?;
    check_range(view, lin, n)?;
    for f in view.mapping().flat_schema().leaf_range(&coord)? {
        match (transfer_strategy(view.mapping(), lin, f, n), view.mapping().contiguous_run(lin, f, n)) {
            (Transfer::Contiguous, Some(p)) => {
                let r = rec.lane_bytes(f);
                let len = r.len();
                let bytes = &rec.storage.blobs()[0].as_bytes()[r];
                view.blob_mut(p.blob)[p.offset..p.offset + len].copy_from_slice(bytes);
            }
            _ => {
                for k in 0..n {
                    view.store(lin + k, f, rec.get(f, k));
                }
            }
        }
    }
    Ok(())
}

/// Loads `V::WIDTH` consecutive values of one leaf. The caller guarantees the range
/// is in bounds (checked by `debug_assert!` and blob slicing only).
#[inline(always)]
pub fn load_lanes<M: Mapping, V: Lanes>(view: &View<M>, lin: usize, leaf: usize) -> V {
    let n = V::WIDTH;
    if n > 1 && !view.mapping().is_computed(leaf) {
        if let Some(p) = view.mapping().contiguous_run(lin, leaf, n) {
            let size = <V::Elem as Scalar>::TYPE.size();
            let bytes = &view.blobs()[p.blob].as_bytes()[p.offset..p.offset + n * size];
            return V::from_fn(|k| V::Elem::read_le(&bytes[k * size..]));
        }
    }
    V::from_fn(|k| view.read::<V::Elem>(lin + k, leaf))
}

#[inline(always)]
pub fn store_lanes<M: Mapping, V: Lanes>(view: &mut View<M>, lin: usize, leaf: usize, value: V) {
    let n = V::WIDTH;
    if n > 1 && !view.mapping().is_computed(leaf) {
        if let Some(p) = view.mapping().contiguous_run(lin, leaf, n) {
            let size = <V::Elem as Scalar>::TYPE.size();
            let bytes = &mut view.blob_mut(p.blob)[p.offset..p.offset + n * size];
            for k in 0..n {
                value.lane(k).write_le(&mut bytes[k * size..]);
            }
            return;
        }
    }
    for k in 0..n {
        view.write::<V::Elem>(lin + k, leaf, value.lane(k));
    }
}

/// Checked variant of [`load_lanes`]; `V::Elem` must be the leaf type.
pub fn load_batch<M: Mapping, V: Lanes>(view: &View<M>, lin: usize, leaf: usize) -> Result<V> {
    check_batch::<M, V>(view, lin, leaf)?;
    Ok(load_lanes(view, lin, leaf))
}

/// Checked variant of [`store_lanes`].
pub fn store_batch<M: Mapping, V: Lanes>(view: &mut View<M>, lin: usize, leaf: usize, value: V) -> Result<()> {
    check_batch::<M, V>(view, lin, leaf)?;
    store_lanes(view, lin, leaf, value);
    Ok(())
}

fn check_batch<M: Mapping, V: Lanes>(view: &View<M>, lin: usize, leaf: usize) -> Result<()> {
    check_range(view, lin, V::WIDTH)?;
    let schema = view.mapping().flat_schema();
    if leaf >= schema.leaf_count() {
        return Err(Error::NoSuchField(format!("leaf {leaf}")));
    }
    let ty = schema.leaf(leaf).ty;
    if ty != V::Elem::TYPE {
        return Err(Error::UnsupportedConversion(format!("leaf is {ty}, batch is {}", V::Elem::TYPE)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extents::ArrayExtents;
    use crate::mapping::{AoS, SoA};

    fn schema() -> RecordSchema {
        "Record{Pos:Record{x:f32,y:f32},Vel:Record{x:f32,y:f32},Mass:f32}".parse().unwrap()
    }

    fn filled<M: Mapping>(m: M) -> View<M> {
        let mut v = View::new(m).unwrap();
        for i in 0..v.len() {
            for f in 0..5 {
                v.write::<f32>(i, f, (i * 10 + f) as f32);
            }
        }
        v
    }

    #[test]
    fn lanewise_arithmetic() {
        let a = SimdBatch([1.0f32, 2.0, 3.0, 4.0]);
        let b = SimdBatch([0.5f32, 0.25, 2.0, -1.0]);
        assert_eq!((a + b).0, [1.5, 2.25, 5.0, 3.0]);
        assert_eq!((a * b - a / b).0, [0.5 - 2.0, 0.5 - 8.0, 6.0 - 1.5, -4.0 + 4.0]);
        assert_eq!((-a).0, [-1.0, -2.0, -3.0, -4.0]);
        assert_eq!(Vector::sqrt(SimdBatch([4.0f64, 9.0])).0, [2.0, 3.0]);
    }

    #[test]
    fn width_types() {
        fn of<Wd: SimdWidth>() -> usize {
            <Wd::Of<f32> as Lanes>::WIDTH
        }
        assert_eq!(of::<W<1>>(), 1);
        assert_eq!(of::<W<8>>(), 8);
        let one: <W<1> as SimdWidth>::Of<f64> = 2.0;
        assert_eq!(one, 2.0f64);
    }

    #[test]
    fn simd_n_table() {
        let s = schema();
        assert_eq!(
            simd_n(&RecordSchema::Leaf(ScalarType::F32), 4).unwrap(),
            Simdized::Batch { ty: ScalarType::F32, width: 4 }
        );
        assert_eq!(simd_n(&RecordSchema::Leaf(ScalarType::F32), 1).unwrap(), Simdized::Scalar(ScalarType::F32));
        assert_eq!(simd_n(&s, 1).unwrap(), Simdized::Record(s.clone()));
        assert!(matches!(simd_n(&s, 8).unwrap(), Simdized::SimdRecord { width: 8, .. }));
        assert!(matches!(simd_n(&s, 0), Err(Error::InvalidWidth(_))));
        let r = SimdizedRecord::new(s.clone(), 8).unwrap();
        assert_eq!(r.storage().mapping().flat_schema().leaf_count(), 40);
        let r = SimdizedRecord::new(s, 1).unwrap();
        assert_eq!(r.storage().mapping().flat_schema().leaf_count(), 5);
    }

    #[test]
    fn load_strategies_agree() {
        let soa = filled(SoA::multi_blob(schema(), ArrayExtents::linear(16)).unwrap());
        let aos = filled(AoS::packed(schema(), ArrayExtents::linear(16)).unwrap());
        assert_eq!(transfer_strategy(soa.mapping(), 0, 0, 4), Transfer::Contiguous);
        assert_eq!(transfer_strategy(aos.mapping(), 0, 0, 4), Transfer::PerLane);
        let mut a = SimdizedRecord::new(schema(), 4).unwrap();
        let mut b = SimdizedRecord::new(schema(), 4).unwrap();
        load_simd(&soa.record(4).unwrap(), &mut a).unwrap();
        load_simd(&aos.record(4).unwrap(), &mut b).unwrap();
        for f in 0..5 {
            for k in 0..4 {
                assert_eq!(a.get(f, k), Value::F32(((4 + k) * 10 + f) as f32));
                assert_eq!(b.get(f, k), a.get(f, k));
            }
        }
        let x: SimdBatch<f32, 4> = load_batch(&aos, 4, 0).unwrap();
        assert_eq!(x.0, [40.0, 50.0, 60.0, 70.0]);
        assert!(load_simd(&aos.record(13).unwrap(), &mut a).is_err());
        assert!(load_batch::<_, SimdBatch<f64, 2>>(&aos, 0, 0).is_err());
    }

    #[test]
    fn narrowed_store_leaves_other_fields() {
        let mut v = filled(AoS::packed(schema(), ArrayExtents::linear(8)).unwrap());
        let before = v.blobs()[0].clone();
        let mut r = SimdizedRecord::new(schema(), 4).unwrap();
        load_simd(&v.record(0).unwrap(), &mut r).unwrap();
        for k in 0..4 {
            r.set(0, k, Value::F32(-1.0));
            r.set(2, k, Value::F32(-2.0));
        }
        store_simd(r.narrow("Vel").unwrap(), &mut v.record_mut(0).unwrap().field("Vel").unwrap()).unwrap();
        for i in 0..8 {
            assert_eq!(v.read::<f32>(i, 0), (i * 10) as f32);
            let vx = if i < 4 { -2.0 } else { (i * 10 + 2) as f32 };
            assert_eq!(v.read::<f32>(i, 2), vx);
        }
        let mut w = filled(AoS::packed(schema(), ArrayExtents::linear(8)).unwrap());
        load_simd(&w.record(4).unwrap(), &mut r).unwrap();
        store_simd(r.all(), &mut w.record_mut(4).unwrap()).unwrap();
        assert_eq!(w.blobs()[0], before);
        assert!(store_simd(r.all(), &mut w.record_mut(0).unwrap().field("Vel").unwrap()).is_err());
    }
}
