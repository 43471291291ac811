"""Smoke test for the compiled extension.

Build first:  cargo build --release -p confinium-py --features extension-module
Then run:     python3 python/smoke_test.py
The script imports an installed `confinium` if there is one, otherwise the
freshly built library under target/.
"""

import importlib.machinery
import importlib.util
import pathlib
import sys


def load():
    try:
        import confinium

        return confinium
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libconfinium_py.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("confinium", str(lib))
            spec = importlib.util.spec_from_file_location("confinium", lib, loader=loader)
            mod = importlib.util.module_from_spec(spec)
            loader.exec_module(mod)
            sys.modules["confinium"] = mod
            return mod
    sys.exit("confinium extension not found; build it first")


def main():
    c = load()
    sys_ = c.SystemSpec("CHA", rc=1.0)
    s = c.solve(sys_, "1s")
    r = c.virial_report(sys_, s)
    print(f"CHA 1s r_c=1: E = {s.energy:.10f}, dV2 = {r.dV2:.10f}, dT2 = {r.dT2:.10f}")
    assert abs(s.energy - 2.3739908660) < 1e-7 * 2.374
    assert abs(r.dT2 - r.dV2) < 1e-6 * r.dV2

    free = c.SystemSpec("CHO1D", xc=float("inf"))
    r = c.virial_report(free, c.solve(free, "0"))
    assert abs(r.dV2 - 0.125) < 1e-8

    checks = c.selftest()
    failed = [row["check"] for row in checks if not row["pass"]]
    print(f"selftest: {len(checks) - len(failed)}/{len(checks)} pass")
    assert not failed, failed
    print("ok")


if __name__ == "__main__":
    main()
