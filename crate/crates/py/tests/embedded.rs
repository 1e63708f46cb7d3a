use pyo3::ffi::c_str;
use gaudin::gaudin;
use pyo3::prelude::*;

#[test]
fn module_works_in_embedded_interpreter() {
    pyo3::append_to_inittab!(gaudin);
    Python::attach(|py| {
        py.run(
            c_str!(
                r#"
import gaudin, json
d = lambda x: [[x, 0], [0, -x]]
m = gaudin.Model.rational(2, [0j, 1+0j, 0.4+0.9j], [d(0.6), d(0.5), d(0.8)], [(2+0.5j, 2), (-1+1j, 2)])
s = m.random_state(1)
assert abs(m.poisson_bracket(s, 0, 1)) < 1e-9
t = m.evolve(s, [[0, 0], [0.2, 0]], 0.01)
assert len(t) == 21
assert json.loads(gaudin.verify_suite("weierstrass"))["passed"]
try:
    m.step(s, 5, 0.1)
    raise AssertionError("bad flow index accepted")
except ValueError:
    pass
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
