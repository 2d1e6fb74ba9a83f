//! Views bind a mapping to the blobs it describes.
//!
//! Blob sizes are checked against the mapping once, when a view is built, and
//! cannot change afterwards. The typed fast paths ([`View::read`], [`View::write`])
//! then check only the linear index, leaf and type, and access blob memory directly.

use std::fs;
use std::path::{Path, PathBuf};

use crate::blob::Blob;
use crate::extents::{parse_extents_shape, ArrayExtents};
use crate::layout::parse_layout;
use crate::mapping::{DynMapping, Mapping};
use crate::record::{RecordCoord, RecordSchema, ScalarType};
use crate::value::{Scalar, Value};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct View<M> {
    mapping: M,
    blobs: Vec<Blob>,
}

impl<M: Mapping> View<M> {
    /// Allocates zero-initialized, cache-line aligned blobs for `mapping`.
    pub fn new(mapping: M) -> Result<Self> {
        let blobs = mapping
            .blob_sizes()
            .into_iter()
            .map(|s| Blob::try_zeroed(s).map_err(|e| Error::Alloc(format!("{s} bytes: {e}"))))
            .collect::<Result<_>>()?;
        Ok(View { mapping, blobs })
    }

    /// Adopts existing blobs, which must match the mapping's blob sizes.
    pub fn from_blobs(mapping: M, blobs: Vec<Blob>) -> Result<Self> {
        let expected = mapping.blob_sizes();
        let got: Vec<usize> = blobs.iter().map(Blob::len).collect();
        if expected != got {
            return Err(Error::IncompatibleViews(format!("blob sizes {got:?}, mapping expects {expected:?}")));
        }
        Ok(View { mapping, blobs })
    }

    pub fn mapping(&self) -> &M {
        &self.mapping
    }

    pub fn blobs(&self) -> &[Blob] {
        &self.blobs
    }

    /// Mutable bytes of one blob. Blobs cannot be replaced or resized in place.
    pub fn blob_mut(&mut self, nr: usize) -> &mut [u8] {
        self.blobs[nr].as_bytes_mut()
    }

    pub fn into_parts(self) -> (M, Vec<Blob>) {
        (self.mapping, self.blobs)
    }

    pub fn extents(&self) -> &ArrayExtents {
        self.mapping.extents()
    }

    /// Number of records.
    pub fn len(&self) -> usize {
        self.mapping.extents().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of the leaf at a dotted path.
    pub fn leaf(&self, path: &str) -> Result<usize> {
        Ok(self.mapping.flat_schema().leaf_by_path(path)?.flat_index)
    }

    pub fn linearize(&self, index: &[u64]) -> Result<usize> {
        Ok(self.mapping.extents().linearize(index)? as usize)
    }

    /// Bytes held in blobs.
    pub fn storage_bytes(&self) -> usize {
        self.blobs.iter().map(Blob::len).sum()
    }

    /// Blob bytes plus any runtime mapping state (dynamic extents, counters, ...).
    pub fn accounted_state_bytes(&self) -> usize {
        self.storage_bytes() + self.mapping.runtime_state_bytes()
    }

    /// True when the view's entire state is its blobs: fully static extents and a
    /// mapping without runtime parameters. Such a view can be moved by copying blobs.
    pub fn is_trivially_relocatable(&self) -> bool {
        self.mapping.runtime_state_bytes() == 0
    }

    #[inline(always)]
    pub fn read<T: Scalar>(&self, lin: usize, leaf: usize) -> T {
        self.check_access::<T>(lin, leaf);
        // SAFETY: blob sizes match the mapping (checked on construction, immutable
        // since), and index, leaf and type were checked above.
        unsafe { self.mapping.read_unchecked::<T>(&self.blobs, lin, leaf) }
    }

    #[inline(always)]
    pub fn write<T: Scalar>(&mut self, lin: usize, leaf: usize, value: T) {
        self.check_access::<T>(lin, leaf);
        // SAFETY: as in `read`.
        unsafe { self.mapping.write_unchecked::<T>(&mut self.blobs, lin, leaf, value) }
    }

    #[inline(always)]
    fn check_access<T: Scalar>(&self, lin: usize, leaf: usize) {
        let ty = self.mapping.flat_schema().leaf(leaf).ty;
        if lin >= self.len() || (ty != T::TYPE && !self.mapping.is_computed(leaf)) {
            access_failed(lin, self.len(), ty, T::TYPE);
        }
    }

    pub fn load(&self, lin: usize, leaf: usize) -> Value {
        debug_assert!(lin < self.len());
        self.mapping.load(&self.blobs, lin, leaf)
    }

    pub fn store(&mut self, lin: usize, leaf: usize, value: Value) {
        debug_assert!(lin < self.len());
        self.mapping.store(&mut self.blobs, lin, leaf, value)
    }

    fn checked(&self, index: &[u64], coord: &RecordCoord) -> Result<(usize, usize)> {
        let lin = self.linearize(index)?;
        let leaf = self.mapping.flat_schema().leaf_info(coord)?.flat_index;
        Ok((lin, leaf))
    }

    pub fn get(&self, index: &[u64], coord: &RecordCoord) -> Result<Value> {
        let (lin, leaf) = self.checked(index, coord)?;
        Ok(self.load(lin, leaf))
    }

    pub fn set(&mut self, index: &[u64], coord: &RecordCoord, value: Value) -> Result<()> {
        let (lin, leaf) = self.checked(index, coord)?;
        self.store(lin, leaf, value);
        Ok(())
    }

    /// Typed checked read; `T` must match the leaf type.
    pub fn get_as<T: Scalar>(&self, index: &[u64], coord: &RecordCoord) -> Result<T> {
        let (lin, leaf) = self.checked(index, coord)?;
        let ty = self.mapping.flat_schema().leaf(leaf).ty;
        if ty != T::TYPE {
            return Err(Error::UnsupportedConversion(format!("leaf is {ty}, accessed as {}", T::TYPE)));
        }
        Ok(self.read::<T>(lin, leaf))
    }

    pub fn set_as<T: Scalar>(&mut self, index: &[u64], coord: &RecordCoord, value: T) -> Result<()> {
        let (lin, leaf) = self.checked(index, coord)?;
        let ty = self.mapping.flat_schema().leaf(leaf).ty;
        if ty != T::TYPE {
            return Err(Error::UnsupportedConversion(format!("leaf is {ty}, accessed as {}", T::TYPE)));
        }
        self.write::<T>(lin, leaf, value);
        Ok(())
    }

    /// Reference to the whole record at a linear index.
    pub fn record(&self, lin: usize) -> Result<RecordRef<'_, M>> {
        self.check_lin(lin)?;
        Ok(RecordRef { view: self, lin, coord: RecordCoord::root() })
    }

    pub fn record_mut(&mut self, lin: usize) -> Result<RecordRefMut<'_, M>> {
        self.check_lin(lin)?;
        Ok(RecordRefMut { view: self, lin, coord: RecordCoord::root() })
    }

    pub fn record_at(&self, index: &[u64]) -> Result<RecordRef<'_, M>> {
        let lin = self.linearize(index)?;
        self.record(lin)
    }

    fn check_lin(&self, lin: usize) -> Result<()> {
        if lin >= self.len() {
            return Err(Error::IndexOutOfRange(format!("linear index {lin} >= {}", self.len())));
        }
        Ok(())
    }
}

fn narrow_coord(schema: &RecordSchema, coord: &RecordCoord, tag: &str) -> Result<RecordCoord> {
    let node = schema.node(coord)?;
    let i = node
        .child_index(tag)
        .ok_or_else(|| Error::NoSuchField(format!("{tag} below {}", schema.path_of(coord).unwrap_or_default())))?;
    Ok(coord.child(i))
}

fn narrow_path(schema: &RecordSchema, coord: &RecordCoord, path: &str) -> Result<RecordCoord> {
    path.split('.').filter(|t| !t.is_empty()).try_fold(coord.clone(), |c, tag| narrow_coord(schema, &c, tag))
}

/// Reference to a record, or a sub-record, of a view.
pub struct RecordRef<'a, M> {
    view: &'a View<M>,
    lin: usize,
    coord: RecordCoord,
}

impl<'a, M: Mapping> RecordRef<'a, M> {
    pub fn view(&self) -> &'a View<M> {
        self.view
    }

    pub fn index(&self) -> usize {
        self.lin
    }

    pub fn coord(&self) -> &RecordCoord {
        &self.coord
    }

    /// Descends along a tag, or a dotted path of tags; an empty path returns the same node.
    pub fn field(&self, path: &str) -> Result<RecordRef<'a, M>> {
        let coord = narrow_path(self.view.mapping.flat_schema().schema(), &self.coord, path)?;
        Ok(RecordRef { view: self.view, lin: self.lin, coord })
    }

    /// Descends into child `i` (array element or i-th field).
    pub fn at(&self, i: usize) -> Result<RecordRef<'a, M>> {
        let node = self.view.mapping.flat_schema().schema().node(&self.coord)?;
        if i >= node.child_count() {
            return Err(Error::NoSuchField(format!("child {i} of {}", self.coord)));
        }
        Ok(RecordRef { view: self.view, lin: self.lin, coord: self.coord.child(i) })
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.view.mapping.flat_schema().schema().node(&self.coord), Ok(RecordSchema::Leaf(_)))
    }

    fn leaf(&self) -> Result<usize> {
        Ok(self.view.mapping.flat_schema().leaf_info(&self.coord)?.flat_index)
    }

    pub fn value(&self) -> Result<Value> {
        Ok(self.view.load(self.lin, self.leaf()?))
    }

    pub fn get<T: Scalar>(&self) -> Result<T> {
        self.view.get_as::<T>(&self.view.extents().delinearize(self.lin as u64), &self.coord)
    }

    /// All leaf values below this node, in flat order.
    pub fn values(&self) -> Result<Vec<Value>> {
        let range = self.view.mapping.flat_schema().leaf_range(&self.coord)?;
        Ok(range.map(|f| self.view.load(self.lin, f)).collect())
    }
}

/// Mutable reference to a record, or a sub-record, of a view.
pub struct RecordRefMut<'a, M> {
    view: &'a mut View<M>,
    lin: usize,
    coord: RecordCoord,
}

impl<'a, M: Mapping> RecordRefMut<'a, M> {
    pub fn index(&self) -> usize {
        self.lin
    }

    pub fn coord(&self) -> &RecordCoord {
        &self.coord
    }

    pub fn view_mut(&mut self) -> &mut View<M> {
        self.view
    }

    pub fn field(self, path: &str) -> Result<RecordRefMut<'a, M>> {
        let coord = narrow_path(self.view.mapping.flat_schema().schema(), &self.coord, path)?;
        Ok(RecordRefMut { view: self.view, lin: self.lin, coord })
    }

    pub fn at(self, i: usize) -> Result<RecordRefMut<'a, M>> {
        let node = self.view.mapping.flat_schema().schema().node(&self.coord)?;
        if i >= node.child_count() {
            return Err(Error::NoSuchField(format!("child {i} of {}", self.coord)));
        }
        let coord = self.coord.child(i);
        Ok(RecordRefMut { view: self.view, lin: self.lin, coord })
    }

    pub fn value(&self) -> Result<Value> {
        let leaf = self.view.mapping.flat_schema().leaf_info(&self.coord)?.flat_index;
        Ok(self.view.load(self.lin, leaf))
    }

    pub fn set(&mut self, value: Value) -> Result<()> {
        let leaf = self.view.mapping.flat_schema().leaf_info(&self.coord)?.flat_index;
        self.view.store(self.lin, leaf, value);
        Ok(())
    }

    /// Assigns all leaves below this node, in flat order.
    pub fn set_values(&mut self, values: &[Value]) -> Result<()> {
        let range = self.view.mapping.flat_schema().leaf_range(&self.coord)?;
        if range.len() != values.len() {
            return Err(Error::IncompatibleViews(format!("{} values for {} leaves", values.len(), range.len())));
        }
        for (f, v) in range.zip(values) {
            self.view.store(self.lin, f, *v);
        }
        Ok(())
    }
}

/// Copies every value of `src` into `dst`. Both views must have the same record
/// dimension and extents. Equal, fully physical mappings are copied blob by blob;
/// anything else is copied field by field through the mappings.
pub fn copy_view<A: Mapping, B: Mapping>(src: &View<A>, dst: &mut View<B>) -> Result<()> {
    let (sm, dm) = (src.mapping(), dst.mapping());
    if sm.flat_schema().schema() != dm.flat_schema().schema() {
        return Err(Error::IncompatibleViews("record dimensions differ".into()));
    }
    if sm.extents().sizes() != dm.extents().sizes() {
        return Err(Error::IncompatibleViews("extents differ".into()));
    }
    if blobwise_compatible(sm, dm) {
        for (d, s) in dst.blobs.iter_mut().zip(&src.blobs) {
            d.as_bytes_mut().copy_from_slice(s.as_bytes());
        }
        return Ok(());
    }
    let leaves = sm.flat_schema().leaf_count();
    for lin in 0..src.len() {
        for f in 0..leaves {
            let v = src.load(lin, f);
            dst.store(lin, f, v);
        }
    }
    Ok(())
}

/// Whether [`copy_view`] takes the blob-by-blob path.
pub fn blobwise_compatible<A: Mapping, B: Mapping>(a: &A, b: &B) -> bool {
    let leaves = a.flat_schema().leaf_count();
    a.name() == b.name()
        && a.blob_sizes() == b.blob_sizes()
        && (0..leaves).all(|f| !a.is_computed(f) && !b.is_computed(f))
}

/// Writes `<stem>.header` plus one raw `<stem>.blob<k>.bin` file per blob.
///
/// The header is plain `key=value` text holding the schema, extents shape,
/// dynamic extent values, mapping name and blob sizes.
pub fn dump_view<M: Mapping>(view: &View<M>, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let m = view.mapping();
    let dynamic: Vec<String> = m.extents().dynamic_values().iter().map(u64::to_string).collect();
    let sizes: Vec<String> = view.blobs.iter().map(|b| b.len().to_string()).collect();
    let header = format!(
        "schema={}\nextents={}\ndynamic={}\nmapping={}\nblobs={}\n",
        m.flat_schema().schema(),
        m.extents(),
        dynamic.join(","),
        m.name(),
        sizes.join(","),
    );
    let mut written = vec![dir.join(format!("{stem}.header"))];
    fs::write(&written[0], header)?;
    for (k, b) in view.blobs.iter().enumerate() {
        let p = dir.join(format!("{stem}.blob{k}.bin"));
        fs::write(&p, b.as_bytes())?;
        written.push(p);
    }
    Ok(written)
}

/// Restores a view written by [`dump_view`].
pub fn restore_view(dir: &Path, stem: &str) -> Result<View<DynMapping>> {
    let header = fs::read_to_string(dir.join(format!("{stem}.header")))?;
    let field = |key: &str| -> Result<&str> {
        header
            .lines()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| Error::Parse(format!("header lacks `{key}`")))
    };
    let schema: RecordSchema = field("schema")?.parse()?;
    let (index_type, dims) = parse_extents_shape(field("extents")?)?;
    let dynamic = field("dynamic")?
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad dynamic extent `{s}`"))))
        .collect::<Result<Vec<_>>>()?;
    let extents = ArrayExtents::new(index_type, dims, dynamic)?;
    let mapping = parse_layout(field("mapping")?, schema, extents)?;
    let blobs = (0..mapping.blob_count())
        .map(|k| Ok(Blob::from_bytes(&fs::read(dir.join(format!("{stem}.blob{k}.bin")))?)))
        .collect::<Result<Vec<_>>>()?;
    View::from_blobs(mapping, blobs)
}

#[cold]
#[inline(never)]
#[track_caller]
fn access_failed(lin: usize, len: usize, ty: ScalarType, accessed: ScalarType) -> ! {
    if lin >= len {
        panic!("linear index {lin} out of range for {len} records");
    }
    panic!("leaf is {ty}, accessed as {accessed}");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::computed::{BitpackIntSoA, Null, StorageWord};
    use crate::mapping::{AoS, SoA};

    fn particle() -> RecordSchema {
        "Record{Pos:Record{x:f64,y:f64,z:f64},Vel:Record{x:f64,y:f64,z:f64},Mass:f32}".parse().unwrap()
    }

    #[test]
    fn allocation() {
        let s: RecordSchema = "Record{x:f64,y:f64}".parse().unwrap();
        let v = View::new(AoS::packed(s, ArrayExtents::linear(10)).unwrap()).unwrap();
        assert_eq!(v.blobs().len(), 1);
        assert_eq!(v.blobs()[0].len(), 160);
        let v = View::new(Null::new(particle(), ArrayExtents::linear(10)).unwrap()).unwrap();
        assert!(v.blobs().is_empty());
        let s: RecordSchema = "Record{a:u8,b:u16,c:f32,d:f64}".parse().unwrap();
        let v = View::new(SoA::multi_blob(s, ArrayExtents::linear(3)).unwrap()).unwrap();
        assert_eq!(v.blobs().len(), 4);
    }

    #[test]
    fn write_read_and_differing_bytes() {
        let ext = ArrayExtents::linear(4);
        let mut aos = View::new(AoS::packed(particle(), ext.clone()).unwrap()).unwrap();
        let mut soa = View::new(SoA::multi_blob(particle(), ext).unwrap()).unwrap();
        let x: RecordCoord = [0, 0].into();
        aos.set(&[2], &x, Value::F64(3.5)).unwrap();
        soa.set(&[2], &x, Value::F64(3.5)).unwrap();
        assert_eq!(aos.get(&[2], &x).unwrap(), Value::F64(3.5));
        assert_eq!(soa.get(&[2], &x).unwrap(), Value::F64(3.5));
        let pos_in = |v: &[u8]| v.windows(8).position(|w| w == 3.5f64.to_le_bytes());
        assert_eq!(pos_in(aos.blobs()[0].as_bytes()), Some(2 * 52));
        assert_eq!(pos_in(soa.blobs()[0].as_bytes()), Some(16));
    }

    #[test]
    fn checked_errors() {
        let v = View::new(AoS::packed(particle(), ArrayExtents::linear(4)).unwrap()).unwrap();
        assert!(matches!(v.get(&[4], &[0, 0].into()), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(v.get(&[0], &[0].into()), Err(Error::NotALeaf(_))));
        assert!(matches!(v.get_as::<f32>(&[0], &[0, 0].into()), Err(Error::UnsupportedConversion(_))));
        assert!(matches!(v.record(0).unwrap().field("Acc"), Err(Error::NoSuchField(_))));
    }

    #[test]
    fn record_navigation() {
        let mut v = View::new(SoA::single_blob(particle(), ArrayExtents::linear(4)).unwrap()).unwrap();
        v.record_mut(1).unwrap().field("Vel").unwrap().field("x").unwrap().set(Value::F64(2.0)).unwrap();
        let r = v.record(1).unwrap();
        assert_eq!(r.field("Vel").unwrap().field("x").unwrap().value().unwrap(), Value::F64(2.0));
        assert_eq!(r.field("Vel.x").unwrap().get::<f64>().unwrap(), 2.0);
        assert_eq!(r.field("").unwrap().coord(), r.coord());
        assert_eq!(r.at(1).unwrap().at(0).unwrap().value().unwrap(), Value::F64(2.0));
        assert!(!r.field("Vel").unwrap().is_leaf());
        assert_eq!(r.field("Vel").unwrap().values().unwrap().len(), 3);

        let s: RecordSchema = "Record{A:[f32;3],B:u8}".parse().unwrap();
        let mut v = View::new(AoS::packed(s, ArrayExtents::linear(2)).unwrap()).unwrap();
        v.record_mut(0).unwrap().field("A").unwrap().at(2).unwrap().set(Value::F32(1.5)).unwrap();
        assert_eq!(v.get(&[0], &[0, 2].into()).unwrap(), Value::F32(1.5));
    }

    #[test]
    fn copy_paths() {
        let ext = ArrayExtents::linear(5);
        let mut a = View::new(AoS::packed(particle(), ext.clone()).unwrap()).unwrap();
        for lin in 0..5 {
            for f in 0..7 {
                a.store(lin, f, Value::F64((lin * 10 + f) as f64 + 0.25));
            }
        }
        let mut b = View::new(AoS::packed(particle(), ext.clone()).unwrap()).unwrap();
        assert!(blobwise_compatible(a.mapping(), b.mapping()));
        copy_view(&a, &mut b).unwrap();
        assert_eq!(a.blobs(), b.blobs());
        let mut c = View::new(SoA::multi_blob(particle(), ext.clone()).unwrap()).unwrap();
        copy_view(&a, &mut c).unwrap();
        for lin in 0..5 {
            for f in 0..7 {
                assert_eq!(a.load(lin, f), c.load(lin, f));
            }
        }
        let mut d = View::new(AoS::packed(particle(), ArrayExtents::linear(6)).unwrap()).unwrap();
        assert!(matches!(copy_view(&a, &mut d), Err(Error::IncompatibleViews(_))));
    }

    #[test]
    fn dump_and_restore() {
        let dir = tempfile::tempdir().unwrap();
        let s: RecordSchema = "Record{a:u16,b:i32}".parse().unwrap();
        let ext = ArrayExtents::parse("u32:[2,dyn]", &[3]).unwrap();
        let mut v = View::new(BitpackIntSoA::uniform(s, ext, 5, StorageWord::U32).unwrap()).unwrap();
        v.set(&[1, 2], &[1].into(), Value::I32(-7)).unwrap();
        v.set(&[0, 1], &[0].into(), Value::U16(17)).unwrap();
        dump_view(&v, dir.path(), "golden").unwrap();
        let r = restore_view(dir.path(), "golden").unwrap();
        assert_eq!(r.mapping().name(), "bitpack-int:5");
        assert_eq!(r.get(&[1, 2], &[1].into()).unwrap(), Value::I32(-7));
        assert_eq!(r.get(&[0, 1], &[0].into()).unwrap(), Value::U16(17));
        assert_eq!(r.blobs(), v.blobs());
    }
}
