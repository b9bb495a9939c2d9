import numpy as np
import pytest

from cfinsler.core import SamplePlan
from cfinsler.jet import WirtingerPoint
from cfinsler.zoo import builtin

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}

BUILTIN_TEXTS = ["euclidean", "disk:eps=-1", "disk:eps=-0.5", "hartogs-alpha", "hartogs-randers"]


@pytest.fixture(scope="session")
def metrics():
    return {t: builtin(t, dim=2) for t in BUILTIN_TEXTS + ["randers-z2"]}


@pytest.fixture(scope="session")
def E(metrics):
    return metrics["euclidean"]


@pytest.fixture(scope="session")
def D1(metrics):
    return metrics["disk:eps=-1"]


@pytest.fixture(scope="session")
def HA(metrics):
    return metrics["hartogs-alpha"]


@pytest.fixture(scope="session")
def HR(metrics):
    return metrics["hartogs-randers"]


@pytest.fixture(scope="session")
def RZ(metrics):
    return metrics["randers-z2"]


@pytest.fixture
def small_plan():
    return SamplePlan(8, 3)


def point(z, eta):
    return WirtingerPoint(np.asarray(z, complex), np.asarray(eta, complex))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
