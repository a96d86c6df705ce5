"""One test per acceptance criterion; each records a PASS/FAIL line."""
import subprocess
import sys
import time

import pytest

from eventloc import reproduce as rp

try:
    from conftest import ACCEPTANCE
except ImportError:  # run as a script
    ACCEPTANCE = []

LIMITS = {1: 1, 2: 1, 3: 1, 4: 1, 5: 1, 6: 60, 7: 300, 8: 300, 9: 600, 10: 30, 11: 60, 12: 30}


def _record(n, rows, elapsed, limit):
    ok = all(r[4] in ("PASS", "INFO") for r in rows) and elapsed < limit
    detail = "; ".join(f"{r[0]}={r[2]:.4g} (ref {r[1]:.3g}) {r[4]}" for r in rows)
    line = f"C{n} {'PASS' if ok else 'FAIL'} [{elapsed:.2f}s < {limit}s] {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def _check(n, fn, select=None):
    t = time.perf_counter()
    rows = fn()
    elapsed = time.perf_counter() - t
    if select:
        rows = [r for r in rows if r[0] in select]
    assert _record(n, rows, elapsed, LIMITS[n]), rows


def test_c01_time_width():
    _check(1, rp.check_time_width, {"Delta_t"})


def test_c02_passage_ratio():
    _check(2, rp.check_time_width, {"Delta_t_over_passage"})


def test_c03_thermal_coherence():
    _check(3, rp.check_coherence)


def test_c04_classical_range():
    _check(4, rp.check_classical_range)


def test_c05_thermal_packet():
    _check(5, rp.check_thermal_packet)


def test_c06_gap_width_law():
    _check(6, lambda: rp.check_gap_width("strict"))


def test_c07_rate_consistency():
    _check(7, lambda: rp.check_rate("strict"))


def test_c08_filaments():
    _check(8, rp.check_filaments)


def test_c09_second_order():
    _check(9, rp.check_second_order)


def test_c10_histories():
    import numpy as np
    _check(10, lambda: rp.check_histories(np.random.default_rng([0, 10])))


def test_c11_chsh():
    import numpy as np
    _check(11, lambda: rp.check_chsh(np.random.default_rng([0, 11])))


def test_c12_gaussian_equality():
    import numpy as np
    _check(12, lambda: rp.check_gaussian(np.random.default_rng([0, 12])))


def test_c13_determinism(tmp_path):
    t = time.perf_counter()
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        proc = subprocess.run([sys.executable, "-m", "eventloc.cli", "reproduce", "--all", "--seed", "42",
                               "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append((out / "summary.csv").read_bytes())
    same = outs[0] == outs[1]
    n_rows = outs[0].count(b"\n") - 1
    line = (f"C13 {'PASS' if same else 'FAIL'} [{time.perf_counter() - t:.2f}s] "
            f"reproduce --all twice, seed 42: summary CSV ({n_rows} rows) byte-identical={same}")
    ACCEPTANCE.append(line)
    print(line)
    assert same


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
