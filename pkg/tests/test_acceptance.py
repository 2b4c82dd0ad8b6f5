"""The ten acceptance checks, each at its stated tolerance and time budget.

Each test prints one ``PASS``/``FAIL`` line straight to the terminal; the
individual report summaries are shown with ``-s`` or on failure.
"""

import time

import pytest

from eftsim.suites import CRITERIA

LIMITS = {
    "criterion-1": 10, "criterion-2": 60, "criterion-3": 10, "criterion-4": 60,
    "criterion-5": 60, "criterion-6": 10, "criterion-7": 60, "criterion-8": 120,
    "criterion-9": 120, "criterion-10": 10,
}
SEED = 20240611


@pytest.mark.parametrize("key", list(CRITERIA))
def test_criterion(key, capsys):
    title, suite = CRITERIA[key]
    t0 = time.perf_counter()
    reports = suite([SEED, int(key.split("-")[1])])
    elapsed = time.perf_counter() - t0
    ok = all(r.verdict for r in reports) and elapsed < LIMITS[key]
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {key} ({title}): {len(reports)} checks, "
              f"{elapsed:.1f}s of {LIMITS[key]}s")
    for r in reports:
        print("   ", r.summary())
    assert reports
    assert all(r.verdict for r in reports), [r.summary() for r in reports if not r.verdict]
    assert elapsed < LIMITS[key]
