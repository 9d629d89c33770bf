import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qdiode import BathSpec, SystemSpec

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

omegas = st.floats(0.1, 5.0)
couplings = st.floats(0.0, 3.0)
temperatures = st.floats(0.05, 20.0)
kappas = st.floats(1e-3, 0.1)


@st.composite
def systems(draw):
    return SystemSpec(draw(omegas), draw(omegas), draw(couplings))


@st.composite
def local_baths(draw, kind=st.sampled_from(["flat", "ohmic"])):
    return BathSpec(draw(temperatures), draw(temperatures), draw(kappas), draw(kappas), kind=draw(kind))


@st.composite
def any_baths(draw):
    cross = draw(st.booleans())
    klr = draw(kappas) if cross else 0.0
    krl = draw(kappas) if cross else 0.0
    return BathSpec(draw(temperatures), draw(temperatures), draw(kappas), draw(kappas), klr, krl,
                    draw(st.sampled_from(["flat", "ohmic"])))


def random_density(rng, n=4):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def golden():
    """w_L = w_R = g = 1, flat kappa = 0.01, T_L = 3, T_R = 0.5."""
    return SystemSpec(1.0, 1.0, 1.0), BathSpec(3.0, 0.5, 0.01, 0.01)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)
