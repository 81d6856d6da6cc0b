from __future__ import annotations

import os

import mpmath
import pytest
from hypothesis import HealthCheck, settings
from mpmath import mpc, mpf

settings.register_profile(
    "partheta",
    max_examples=int(os.environ.get("PARTHETA_EXAMPLES", "25")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("partheta")


def theta_oracle(q, z, dps: int = 60, terms: int | None = None) -> mpc:
    """Plain sum of q^(j(j+1)/2) z^j with a generous fixed term count."""
    with mpmath.workdps(dps):
        q, z = mpc(q), mpc(z)
        aq, az = abs(q), abs(z)
        if terms is None:
            # stop well past the point where terms become negligible
            j = 1
            while not (aq ** (j + 1) * az < mpf(1) / 4 and abs(q) ** (j * (j + 1) // 2) * az ** j < mpf(10) ** (-dps - 5)):
                j += 1
            terms = j + 5
        return mpmath.fsum(q ** (j * (j + 1) // 2) * z ** j for j in range(terms))


def jacobi_oracle(q, z, dps: int = 60) -> mpc:
    """Two-sided sum over all integers j via mpmath's Jacobi theta_3.

    With nome n = sqrt(q) and e^(2 i w) = n z, theta_3(w, n) = sum n^(j^2) (n z)^j,
    and n^(j^2 + j) = q^(j(j+1)/2) for either branch of the square root.
    """
    with mpmath.workdps(dps):
        n = mpmath.sqrt(mpc(q))
        w = mpmath.log(n * mpc(z)) / (2j)
        return mpmath.jtheta(3, w, n)


@pytest.fixture
def dps40():
    with mpmath.workdps(40):
        yield


# lines collected by test_acceptance.py, repeated in the terminal summary so they
# show up even when output capturing is on
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
