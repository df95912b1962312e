import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sfid import linalg as la
from sfid.supports import SupportMatrix

settings.register_profile("sfid", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("sfid")


def exact(rows):
    return la.as_matrix(rows, la.EXACT)


def supp(rows):
    return SupportMatrix.from_array(np.array(rows, dtype=bool))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def assert_factor_witness(witness, tol=la.EXACT):
    """Same product, not equivalent up to scaling and permutation."""
    from sfid.lifting import pairs_equivalent
    a, b = witness.original, witness.alternative
    Z, Z2 = a.X @ a.Y.T, b.X @ b.Y.T
    if tol.exact:
        assert np.array_equal(Z, Z2)
    else:
        assert np.abs(Z - Z2).max() <= 1e-9 * max(1.0, np.abs(Z).max())
    assert not pairs_equivalent(a, b, tol)


# PASS/FAIL lines from the acceptance tests, repeated in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
