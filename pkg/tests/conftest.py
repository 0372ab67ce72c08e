"""Shared fixtures and slow-but-obvious oracles.

The oracles below are written straight from the definitions with plain
Python loops and share no code with the package's enumeration kernels.
"""
import itertools
import math

import pytest

from pspchain import CouplingFamily

ACCEPTANCE_LINES: list[str] = []


def sullivan_coupling(k: int) -> int:
    return k if k > 0 else 1 - k


def oracle_energy(spins, coupling, left, right):
    """Disagreeing-bond energy of spins on [-n, n] between fixed boundary spins."""
    n = (len(spins) - 1) // 2
    ext = [left, *spins, right]
    # ext[j] sits at site j - n - 1; bond (x-1, x) costs coupling(x)
    return sum(coupling(j - n - 1) for j in range(1, len(ext)) if ext[j] != ext[j - 1])


def oracle_psp(spins):
    """Phase separation point (as a float) straight from the definition."""
    n = (len(spins) - 1) // 2
    site = lambda x: -1 if x < -n else (1 if x > n else spins[x + n])  # noqa: E731
    candidates = [k - n - 0.5 for k in range(2 * n + 2)]
    points = [t for t in candidates if site(round(t - 0.5)) != site(round(t + 0.5))]
    norms = {}
    for t in points:
        l_minus = sum(1 for x in range(-n, n + 1) if x < t and spins[x + n] == -1)
        r_plus = sum(1 for x in range(-n, n + 1) if x > t and spins[x + n] == 1)
        norms[t] = l_minus + r_plus
    best = max(norms.values())
    maxima = [t for t in points if norms[t] == best]
    plus_count = sum(1 for s in spins if s == 1)
    return min(maxima) if plus_count >= n + 1 else max(maxima)


def oracle_configs(n):
    return itertools.product((-1, 1), repeat=2 * n + 1)


def oracle_log_z(n, beta, coupling, left, right):
    return math.log(sum(math.exp(-beta * oracle_energy(s, coupling, left, right))
                        for s in oracle_configs(n)))


@pytest.fixture
def sullivan():
    return CouplingFamily.sullivan()


@pytest.fixture
def sym_table():
    return CouplingFamily.from_table(
        {1: 0.7, 2: 1.3, 3: 0.4, 4: 2.2, 5: 0.9, 6: 1.7, 7: 1.1, 8: 0.6}, symmetric=True)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
