import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pdtlab import kernels
from pdtlab.core import BooleanFunction

settings.register_profile(
    "pdtlab",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("pdtlab")


@pytest.fixture(params=["numba", "numpy"])
def variant(request):
    """Pick one implementation of every kernel: variant('fwht') -> callable."""
    idx = 0 if request.param == "numba" else 1
    return lambda name: kernels.VARIANTS[name][idx]


def table_fn(n, bits):
    return BooleanFunction(n, np.asarray(bits, dtype=np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- one summary line per acceptance criterion ------------------------------

_CRITERION = re.compile(r"test_criterion_(\d+)")
_acceptance: dict[int, list[tuple[str, str, str]]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            status = "xfail"
            detail = report.wasxfail
        else:
            status = report.outcome
            detail = ""
        name = report.nodeid.split("::", 1)[1]
        _acceptance.setdefault(int(m.group(1)), []).append((name, status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_acceptance):
        parts = _acceptance[num]
        bad = [p for p in parts if p[1] != "passed"]
        if not bad:
            tr.write_line(f"criterion {num:2d}: PASS ({len(parts)} checks)")
            continue
        why = "; ".join(f"{name} {status}" + (f" [{detail}]" if detail else "") for name, status, detail in bad)
        tr.write_line(f"criterion {num:2d}: FAIL ({len(parts) - len(bad)}/{len(parts)} checks pass; {why})")
