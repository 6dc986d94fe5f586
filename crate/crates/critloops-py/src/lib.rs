use pyo3::prelude::*;

#[pymodule]
fn critloops(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
