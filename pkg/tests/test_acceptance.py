"""Acceptance criteria 1-9, driven by one run of ``weyl3 suite``."""
import json
import time

import pytest

from weyl3.cli import main

from conftest import ACCEPTANCE

# per-block runtime limits in seconds
BLOCK_LIMITS = {1: ("flat", 1.0), 2: ("table", 30.0)}
SUITE_LIMIT = 60.0


@pytest.fixture(scope="module")
def suite_run(tmp_path_factory):
    path = tmp_path_factory.mktemp("suite") / "suite.json"
    t0 = time.perf_counter()
    code = main(["suite", "--json", str(path)])
    elapsed = time.perf_counter() - t0
    return code, elapsed, json.loads(path.read_text())


def _record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def _summarise(checks) -> tuple[bool, str]:
    failed = [c for c in checks if not c["pass"]]
    if not failed:
        worst = max(checks, key=lambda c: (c["residual"] or 0.0) / max(c["tol"], 1e-300))
        return True, f"{len(checks)} checks; tightest '{worst['name']}' {worst['residual']:.2e} <= {worst['tol']:.0e}"
    names = "; ".join(f"'{c['name']}' {c['residual'] if c['residual'] is None else format(c['residual'], '.3g')}"
                      f" > {c['tol']:.0e}" for c in failed)
    return False, f"{len(failed)} of {len(checks)} checks fail: {names}"


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(suite_run, n):
    _, _, rep = suite_run
    checks = [c for c in rep["checks"] if c["criterion"] == n]
    assert checks, f"no records for criterion {n}"
    ok, detail = _summarise(checks)
    if n in BLOCK_LIMITS:
        block, limit = BLOCK_LIMITS[n]
        took = rep["meta"]["wall_time"][block]
        detail += f"; runtime {took:.2f} s (limit {limit:g} s)"
        ok = ok and took < limit
    _record(n, ok, detail)
    assert ok, detail


def test_criterion_9_full_suite(suite_run):
    code, elapsed, rep = suite_run
    ok = code == 0 and elapsed < SUITE_LIMIT
    _record(9, ok, f"exit code {code}, {elapsed:.1f} s (limit {SUITE_LIMIT:g} s), verdict {rep['verdict']}")
    assert ok
