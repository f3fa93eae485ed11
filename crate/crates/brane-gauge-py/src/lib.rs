use pyo3::prelude::*;
#[pymodule]
fn brane_gauge_py(_m: &Bound<'_, PyModule>) -> PyResult<()> { Ok(()) }
