"""Smoke test for the extension module.

Build and copy first:
    cargo build -p qmultiple-py --release --features extension-module
    cp target/release/libqmultiple_py.so python/qmultiple.so
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import qmultiple  # noqa: E402

TOL = 1e-9


def main():
    w = qmultiple.Connection.dynkin(3)
    assert w.check_biunitarity()["pass"]
    y = w.composite()
    assert y.is_self_composable()
    assert y.check_gybe(TOL)["residual"] < TOL
    assert y.check_renorm_invariance(TOL)["pass"]
    t = y.check_transport(4)
    assert t["routes"] == 16 and t["pass"], t

    again = qmultiple.Connection.from_json(y.to_json())
    assert again.cell_count == y.cell_count

    control = qmultiple.Connection.control(0)
    report = control.check_gybe(TOL)
    assert report["residual"] > 0.01 and report["location"] is not None

    a = qmultiple.StringAlgebra(y)
    assert a.commuting_square([1, 0], 0, 1) < TOL
    assert a.multileg(1, 2) < TOL
    assert a.floor(0, 2, 3) < TOL
    assert a.flatness() < TOL
    assert qmultiple.StringAlgebra(control).flatness() > 0.01

    fib = qmultiple.FusionRing.builtin("fib")
    assert fib.validate() == []
    assert fib.multi_fusion(["tau", "tau", "tau"]) == [1, 2]
    omega = (5 + math.sqrt(5)) / 2
    assert abs(fib.global_index() - omega) < 1e-12
    pf = fib.check_pf(3)
    assert pf["pass"] and abs(pf["beta_L"] - omega) < TOL
    assert abs(qmultiple.FusionRing.builtin("z2").index(3) - 4) < 1e-12
    assert fib.identity_residual(4, "tau") < TOL

    assert qmultiple.reduced_word_count([3, 2, 1, 0]) == 16

    try:
        qmultiple.Connection.from_json("{")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed JSON accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
