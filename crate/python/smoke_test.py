"""Smoke test for the Python bindings.

Builds the extension with cargo when it is not importable, then runs the conic
scenario and a Hefer identity check.

    python3 python/smoke_test.py
"""

import json
import os
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    try:
        import hodge_currents_py  # noqa: F401

        return hodge_currents_py
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "--release", "-p", "hodge-currents-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = pathlib.Path(os.environ.get("CARGO_TARGET_DIR", ROOT / "target"))
    build = pathlib.Path(tempfile.mkdtemp(prefix="hodge-py-"))
    shutil.copy(target / "release" / "libhodge_currents_py.so", build / "hodge_currents_py.so")
    sys.path.insert(0, str(build))
    import hodge_currents_py

    return hodge_currents_py


def main():
    hc = load_module()
    cache = tempfile.mkdtemp(prefix="hodge-cache-")
    text = (ROOT / "scenarios" / "conic-structural-zero.toml").read_text()
    report = json.loads(hc.run(text, workers=1, cache_dir=cache))
    values = report["values"]
    assert values["pass"], values
    assert values["variety"]["structural_zero"]
    assert values["quadrature"]["levels"] == []
    project = values["operations"][1]["result"]
    assert project["output"]["structural_zero"]

    # cold and warm cache agree
    again = json.loads(hc.run(text, workers=1, cache_dir=cache))
    assert again["cache"]["hefer_hits"] == [True]
    assert again["values"] == values

    try:
        hc.run(text.replace("schema = 1", "schema = 1\nbogus = 3"))
    except ValueError as e:
        assert "bogus" in str(e), e
    else:
        raise AssertionError("unknown field accepted")

    lhs, rhs = hc.hefer_identity(
        [([3, 0, 0], (1.0, 0.0)), ([1, 1, 1], (0.5, -2.0)), ([0, 0, 3], (1.0, 0.0))],
        [(0.3, 0.1), (-0.2, 0.4), (0.7, 0.0)],
        [(0.1, -0.5), (0.6, 0.2), (-0.3, 0.3)],
    )
    assert abs(complex(*lhs) - complex(*rhs)) < 1e-12, (lhs, rhs)
    assert hc.PROJECTOR_SIGMA == -1 and hc.SOLVER_SIGMA == -1
    assert len(json.loads(hc.cache_inspect(cache))) == 1
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
