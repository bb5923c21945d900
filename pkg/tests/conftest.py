import numpy as np
import pytest

from kgmradial import ModelParams, PotentialSpec, RadialGrid

# criterion number -> list of (name, passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def record_acceptance(number, name, passed, detail):
    ACCEPTANCE.setdefault(number, []).append((name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{n}: {'ok' if p else 'FAILED'} ({d})" for n, p, d in parts)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def base_params():
    return ModelParams(0.5, 0.0, 4.0, 0.3, PotentialSpec.constant(1.0))


@pytest.fixture(scope="session")
def grid511():
    return RadialGrid(20.0, 511)


@pytest.fixture(scope="session")
def grid127():
    return RadialGrid(20.0, 127)


@pytest.fixture(scope="session")
def oscillator():
    return ModelParams(0.5, 0.0, 4.0, 0.3, PotentialSpec.coercive("r**2", v0=0.0))
