#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds the extension module if needed, loads the fixture corpus, and checks
a handful of known values end to end.

Usage: python3 python/smoke_test.py
"""

import pathlib
import shutil
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def ensure_module() -> None:
    """Build the cdylib and expose it as an importable module."""
    so = ROOT / "target" / "debug" / "libsrk.so"
    if not so.exists():
        subprocess.run(
            ["cargo", "build", "-p", "srk-python"], cwd=ROOT, check=True
        )
    target = ROOT / "python" / "srk.so"
    if not target.exists() or so.stat().st_mtime > target.stat().st_mtime:
        shutil.copy2(so, target)
    sys.path.insert(0, str(ROOT / "python"))


def main() -> int:
    ensure_module()
    import srk

    fixtures = ROOT / "fixtures"

    # arithmetic fixture: addition and multiplication
    plus = srk.Problem.load(str(fixtures / "plus-times.srk"))
    assert plus.check() == []
    assert plus.eval_omega("fhat(3, 2)") == 5
    assert plus.eval_omega("ghat(n, m)", at=[("n", 2), ("m", 3)]) == 6

    # term evaluation fixture
    ev = srk.Problem.load(str(fixtures / "fhat-eval.srk"))
    rendered = ev.eval_term("fhat2(X, Y, n, m)", at=[("n", 1), ("m", 2)])
    assert rendered == "g(X(1,1),g(X(1,0),Y()))", rendered

    # two-parameter schema: variable counts, refuter, and normalization
    qhat = srk.Problem.load(str(fixtures / "qhat.srk"))
    assert qhat.check() == []
    for alpha in range(5):
        assert qhat.distinct_variables("QF", at=[("n", alpha)]) == alpha + 2
    assert qhat.refute("QF", at=[("n", 2), ("m", 1)]) is not None
    derivation_json = qhat.normalize(at=[("n", 2), ("m", 2)])
    assert '"srk-json":1' in derivation_json.replace(" ", "")

    # call-graph trace of the accumulator example
    cg = srk.Problem.load(str(fixtures / "callgraphex.srk"))
    size, depth, sink = cg.trace_sink("G", "P1", at=[("n", 3)])
    assert (size, depth) == (13, 13), (size, depth)
    assert sink == "(deltap,3,0,0,9)", sink

    # s-unifier verification
    graded = srk.Problem.load(str(fixtures / "graded.srk"))
    verdict = graded.verify_unifier(
        "{ X1(0, m) <- Shat(X3(m), n), X2(0, m) <- Shat(X3(m), n) }",
        "X1(0, m)",
        "X2(0, m)",
    )
    assert verdict == "verified", verdict

    # printer round-trip through the parser
    reparsed = srk.Problem.parse(qhat.pretty())
    assert reparsed.check() == []

    print("python smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
