//! Runs the Python smoke script against the module in an embedded interpreter.

use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyModule;

#[test]
fn smoke_script_passes() {
    Python::attach(|py| {
        let m = PyModule::new(py, "mazur").unwrap();
        mazur::mazur(&m).unwrap();
        py.import("sys")
            .unwrap()
            .getattr("modules")
            .unwrap()
            .set_item("mazur", &m)
            .unwrap();
        let script = CString::new(include_str!("../python/smoke_test.py")).unwrap();
        if let Err(e) = py.run(&script, None, None) {
            e.display(py);
            panic!("smoke script failed");
        }
    });
}

#[test]
fn errors_map_to_python_exceptions() {
    Python::attach(|py| {
        let m = PyModule::new(py, "mazur").unwrap();
        mazur::mazur(&m).unwrap();
        let bad_mode = m.getattr("enumerate").unwrap().call1((3, "sideways"));
        assert!(bad_mode
            .unwrap_err()
            .is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let op = m.getattr("MazurOperator").unwrap().call1((5, 3)).unwrap();
        let out_of_frame = op.call_method1("section", (9,));
        let err = out_of_frame.unwrap_err();
        assert!(err
            .get_type(py)
            .name()
            .unwrap()
            .to_string()
            .contains("MazurError"));
    });
}
