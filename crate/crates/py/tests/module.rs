use pyo3::ffi::c_str;
use confinium_py::confinium_py;
use pyo3::prelude::*;

fn with_module(code: &std::ffi::CStr) {
    pyo3::append_to_inittab!(confinium_py);
    Python::initialize();
    Python::attach(|py| {
        py.run(code, None, None).map_err(|e| e.display(py)).unwrap();
    });
}

// the interpreter can be set up once per process, so all checks share it
#[test]
fn python_surface() {
    with_module(c_str!(
        r#"
import confinium as c

sys = c.SystemSpec("CHA", rc=1.0)
assert sys.kind == "CHA" and sys.ell == 0
s = c.solve(sys, "1s")
assert abs(s.energy - 2.3739908660) < 1e-7 * 2.374, s.energy
assert s.label == "1s" and s.node_count == 0
assert len(s.psi) == len(s.nodes)
r = c.virial_report(sys, s)
assert abs(r.dV2 - r.dT2) <= 1e-6 * r.dV2
assert set(r.to_dict()) == set(c.VirialReport.fields)
x = c.expectation_set(sys, s)
assert abs(x["tv"] - x["vt"]) < 1e-6

free = c.SystemSpec("CHO1D")
assert free.to_dict()["x_c"] == "inf"
a, b = c.solve_bound_states(free, 2)
mix = c.virial_report(free, c.superpose(a, b, 0.01))
assert abs(mix.dH2 - 1e-4 / 1.0001**2) < 0.05e-4

t = c.reproduce_table("IV")
assert len(t["rows"]) == 75 and t["summary"]["fail"] == 0
pts = c.sweep(c.SystemSpec("CHO3D"), "rc", [1.0, 2.0], ["1s"])
assert [p["value"] for p in pts] == [1.0, 2.0]
assert all(row["pass"] for row in c.selftest())

for bad in (lambda: c.SystemSpec("XX"), lambda: c.SystemSpec("CHA", rc=-1.0), lambda: c.solve(sys, "2p")):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
try:
    c.solve(c.SystemSpec("SPCHA", v0=0.1, rc=1.0), "4s")
except c.ConfiniumError as e:
    assert "bound state" in str(e)
else:
    raise AssertionError("expected ConfiniumError")
assert c.main(["solve", "--system", "nope"]) == 2
"#
    ));
}
