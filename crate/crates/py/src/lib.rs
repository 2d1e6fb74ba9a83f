//! Python bindings: schemas, views over any named layout, the bit-packing codecs
//! and the n-body benchmark.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyBytes, PyDict, PyFloat};

use recordlayout::computed::{float_decode, float_encode, pack_int, unpack_int};
use recordlayout::nbody::{run_benchmark, BenchConfig};
use recordlayout::view::{dump_view, restore_view};
use recordlayout::{copy_view, parse_layout, ArrayExtents, DynMapping, Error, IndexType, RecordSchema, Value};

create_exception!(pyrecordlayout, LayoutError, PyValueError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::IndexOutOfRange(_) => PyIndexError::new_err(e.to_string()),
        e => LayoutError::new_err(e.to_string()),
    }
}

/// A record schema, e.g. `Record{Pos:Record{x:f32,y:f32},Mass:f64}`.
#[pyclass(name = "Schema", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySchema(RecordSchema);

#[pymethods]
impl PySchema {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(PySchema).map_err(py_err)
    }

    #[getter]
    fn leaf_count(&self) -> usize {
        self.0.leaf_count()
    }

    #[getter]
    fn size_packed(&self) -> usize {
        self.0.size_packed()
    }

    #[getter]
    fn size_aligned(&self) -> usize {
        self.0.size_aligned()
    }

    /// `(path, type)` for every leaf in flat order.
    fn leaves(&self) -> PyResult<Vec<(String, String)>> {
        self.0.flatten().iter().map(|(c, t)| Ok((self.0.path_of(c).map_err(py_err)?, t.to_string()))).collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Schema('{}')", self.0)
    }
}

fn schema_arg(obj: &Bound<'_, PyAny>) -> PyResult<RecordSchema> {
    if let Ok(s) = obj.cast::<PySchema>() {
        return Ok(s.get().0.clone());
    }
    let text: String = obj.extract()?;
    text.parse().map_err(py_err)
}

fn to_py<'py>(py: Python<'py>, v: Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Bool(b) => PyBool::new(py, b).to_owned().into_any(),
        Value::F32(_) | Value::F64(_) => PyFloat::new(py, v.as_f64()).into_any(),
        Value::U64(x) => x.into_pyobject(py)?.into_any(),
        v => (v.as_i128() as i64).into_pyobject(py)?.into_any(),
    })
}

fn from_py(obj: &Bound<'_, PyAny>, ty: recordlayout::ScalarType) -> PyResult<Value> {
    use recordlayout::ScalarType as S;
    Ok(match ty {
        S::Bool => Value::Bool(obj.extract()?),
        S::F32 | S::F64 => Value::F64(obj.extract()?).cast(ty),
        S::U64 => Value::U64(obj.extract()?),
        _ => Value::I64(obj.extract()?).cast(ty),
    })
}

/// An array of records stored in one of the named layouts.
#[pyclass(name = "View")]
struct PyView(recordlayout::View<DynMapping>);

#[pymethods]
impl PyView {
    /// `View(schema, shape, layout="aos-packed", dynamic=False, index_type="u64")`
    #[new]
    #[pyo3(signature = (schema, shape, layout = "aos-packed", dynamic = false, index_type = "u64"))]
    fn new(
        schema: &Bound<'_, PyAny>,
        shape: Vec<u64>,
        layout: &str,
        dynamic: bool,
        index_type: &str,
    ) -> PyResult<Self> {
        let schema = schema_arg(schema)?;
        let it: IndexType = index_type.parse().map_err(py_err)?;
        let ext = if dynamic { ArrayExtents::dynamic(it, &shape) } else { ArrayExtents::fixed(it, &shape) }
            .map_err(py_err)?;
        let mapping = parse_layout(layout, schema, ext).map_err(py_err)?;
        recordlayout::View::new(mapping).map(PyView).map_err(py_err)
    }

    /// Reads back a view written by `dump`.
    #[staticmethod]
    fn restore(dir: PathBuf, stem: &str) -> PyResult<Self> {
        restore_view(&dir, stem).map(PyView).map_err(py_err)
    }

    #[getter]
    fn layout(&self) -> String {
        self.0.mapping().name()
    }

    #[getter]
    fn schema(&self) -> PySchema {
        PySchema(self.0.mapping().flat_schema().schema().clone())
    }

    #[getter]
    fn shape(&self) -> Vec<u64> {
        self.0.extents().sizes().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn get<'py>(&self, py: Python<'py>, index: Vec<u64>, path: &str) -> PyResult<Bound<'py, PyAny>> {
        let lin = self.0.linearize(&index).map_err(py_err)?;
        let leaf = self.0.leaf(path).map_err(py_err)?;
        to_py(py, self.0.load(lin, leaf))
    }

    fn set(&mut self, index: Vec<u64>, path: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        let lin = self.0.linearize(&index).map_err(py_err)?;
        let leaf = self.0.leaf(path).map_err(py_err)?;
        let ty = self.0.mapping().flat_schema().leaf(leaf).ty;
        let v = from_py(value, ty)?;
        self.0.store(lin, leaf, v);
        Ok(())
    }

    /// All leaf values of the record at `index`, in flat order.
    fn record<'py>(&self, py: Python<'py>, index: Vec<u64>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let lin = self.0.linearize(&index).map_err(py_err)?;
        (0..self.0.mapping().flat_schema().leaf_count()).map(|f| to_py(py, self.0.load(lin, f))).collect()
    }

    fn blob_sizes(&self) -> Vec<usize> {
        self.0.blobs().iter().map(|b| b.len()).collect()
    }

    fn blob<'py>(&self, py: Python<'py>, nr: usize) -> PyResult<Bound<'py, PyBytes>> {
        let b = self.0.blobs().get(nr).ok_or_else(|| PyIndexError::new_err(format!("no blob {nr}")))?;
        Ok(PyBytes::new(py, b.as_bytes()))
    }

    #[getter]
    fn storage_bytes(&self) -> usize {
        self.0.storage_bytes()
    }

    #[getter]
    fn accounted_state_bytes(&self) -> usize {
        self.0.accounted_state_bytes()
    }

    #[getter]
    fn trivially_relocatable(&self) -> bool {
        self.0.is_trivially_relocatable()
    }

    /// Copies all values from another view with the same schema and shape.
    fn copy_from(&mut self, other: PyRef<'_, PyView>) -> PyResult<()> {
        copy_view(&other.0, &mut self.0).map_err(py_err)
    }

    /// Writes a header and one file per blob; returns the written paths.
    fn dump(&self, dir: PathBuf, stem: &str) -> PyResult<Vec<PathBuf>> {
        dump_view(&self.0, &dir, stem).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("View(layout='{}', shape={:?})", self.0.mapping().name(), self.0.extents().sizes())
    }
}

/// Two's complement truncation of `value` to `bits` bits.
#[pyfunction(name = "pack_int")]
fn py_pack_int(value: i128, bits: u32) -> PyResult<u64> {
    if !(1..=64).contains(&bits) {
        return Err(py_err(Error::InvalidBitCount(format!("{bits}"))));
    }
    Ok(pack_int(value, bits))
}

#[pyfunction(name = "unpack_int")]
#[pyo3(signature = (pattern, bits, signed = true))]
fn py_unpack_int(pattern: u64, bits: u32, signed: bool) -> PyResult<i128> {
    if !(1..=64).contains(&bits) {
        return Err(py_err(Error::InvalidBitCount(format!("{bits}"))));
    }
    Ok(unpack_int(pattern, bits, signed))
}

/// Bit pattern of `value` in a float format with `exp_bits` and `man_bits`.
#[pyfunction(name = "float_encode")]
fn py_float_encode(value: f64, exp_bits: u32, man_bits: u32) -> PyResult<u64> {
    float_encode(value, exp_bits, man_bits).map_err(py_err)
}

#[pyfunction(name = "float_decode")]
fn py_float_decode(pattern: u64, exp_bits: u32, man_bits: u32) -> PyResult<f64> {
    float_decode(pattern, exp_bits, man_bits).map_err(py_err)
}

/// Runs the n-body benchmark and returns `{"rows": [...], "checksum": float}`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (layout = "aos-packed", n = 1024, steps = 5, simd_width = 1, precision = "f32", seed = 42, warmup = 1))]
fn run_nbody<'py>(
    py: Python<'py>,
    layout: &str,
    n: usize,
    steps: usize,
    simd_width: usize,
    precision: &str,
    seed: u64,
    warmup: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = BenchConfig {
        layout: layout.into(),
        n,
        steps,
        warmup,
        simd_width,
        precision: precision.parse().map_err(py_err)?,
        seed,
        ..Default::default()
    };
    let result = py.detach(|| run_benchmark(&cfg)).map_err(py_err)?;
    let rows: Vec<(String, &str, usize, f64, f64)> =
        result.rows.iter().map(|r| (r.layout.clone(), r.phase, r.simd_width, r.seconds_per_step, r.checksum)).collect();
    let d = PyDict::new(py);
    d.set_item("rows", rows)?;
    d.set_item("checksum", result.checksum)?;
    Ok(d)
}

#[pymodule]
pub fn pyrecordlayout(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchema>()?;
    m.add_class::<PyView>()?;
    m.add("LayoutError", m.py().get_type::<LayoutError>())?;
    m.add_function(wrap_pyfunction!(py_pack_int, m)?)?;
    m.add_function(wrap_pyfunction!(py_unpack_int, m)?)?;
    m.add_function(wrap_pyfunction!(py_float_encode, m)?)?;
    m.add_function(wrap_pyfunction!(py_float_decode, m)?)?;
    m.add_function(wrap_pyfunction!(run_nbody, m)?)?;
    Ok(())
}
