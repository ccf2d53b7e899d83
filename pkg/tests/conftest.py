"""Collects acceptance results and prints one PASS/FAIL line per criterion."""
from collections import defaultdict

import pytest

_RESULTS = defaultdict(list)
TITLES = {
    1: "block-encoding correctness",
    2: "gate-level fidelity",
    3: "QSP response",
    4: "phase finding",
    5: "QSVT = QSP on one singular value",
    6: "end-to-end spectral accuracy (kappa=50)",
    7: "failure-mode reproduction (kappa=10)",
    8: "singular-value condition",
    9: "Mott scan",
    10: "DMFT fixed point",
    11: "oracle identity",
}


class Recorder:
    def __call__(self, criterion: int, check: str, ok: bool, detail: str = ""):
        _RESULTS[criterion].append((check, bool(ok), detail))
        return bool(ok)


@pytest.fixture(scope="session")
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(TITLES):
        checks = _RESULTS.get(n)
        if not checks:
            tr.write_line(f"criterion {n:2d} {TITLES[n]}: NOT RUN")
            continue
        status = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        tr.write_line(f"criterion {n:2d} {TITLES[n]}: {status}")
        for check, ok, detail in checks:
            tr.write_line(f"    [{'ok' if ok else 'FAIL'}] {check}: {detail}")
