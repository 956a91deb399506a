import re

import numpy as np
import pytest

from tentmle import kernels

KERNEL_NAMES = ("dd_exp", "simplex_values", "simplex_derivatives")


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    mod = kernels.backends()[request.param]
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture
def rng(request):
    # one independent stream per test, stable across runs
    key = [ord(c) for c in request.node.nodeid][-32:]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


_ACCEPTANCE = re.compile(r"test_criterion_(\d+)_")


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _ACCEPTANCE.search(getattr(rep, "nodeid", ""))
            if m and rep.when in ("call", "setup"):
                n = int(m.group(1))
                if outcome != "passed" or n not in rows:
                    rows[n] = (outcome, rep.nodeid.split("::")[-1])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(rows):
        outcome, name = rows[n]
        verdict = "PASS" if outcome == "passed" else "FAIL" if outcome in ("failed", "error") else "SKIP"
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {name}")
