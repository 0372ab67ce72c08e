import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pspchain import (
    MINUS,
    MP,
    PLUS,
    PM,
    CapExceededError,
    CouplingFamily,
    PartitionValue,
    SymmetryConditionError,
    brute_force_partition,
    closed_form_partition,
    crystal_partitions,
    ising_ratio,
    rarefied_left,
    rarefied_right,
    recursive_partition,
)
from pspchain.partition import (
    block_partition,
    brute_force_pair,
    ising_ratio_excess,
    rarefied_left_recursive,
    rarefied_right_recursive,
)

from conftest import oracle_log_z, sullivan_coupling

E = math.exp


def block_oracle(bonds, beta, left_spin, right_spin):
    """Direct sum over the free spins of a block with len(bonds) - 1 sites."""
    total = 0.0
    for inner in itertools.product((-1, 1), repeat=len(bonds) - 1):
        spins = (left_spin, *inner, right_spin)
        total += E(-beta * sum(b for b, s, t in zip(bonds, spins, spins[1:]) if s != t))
    return total


def test_single_site_values(sullivan):
    pair = closed_form_partition(sullivan, 1.0, 0)
    assert pair.plus.value == pytest.approx(1 + E(-2), rel=1e-14)
    assert pair.mixed.value == pytest.approx(2 * E(-1), rel=1e-14)


@pytest.mark.parametrize("n", range(11))
@pytest.mark.parametrize("coupling", [0.2, 1.0, 3.0])
def test_constant_family_against_binomial_form(n, coupling):
    tau = E(-coupling)
    y, x = (1 + tau) ** (2 * n + 2), (1 - tau) ** (2 * n + 2)
    pair = closed_form_partition(CouplingFamily.constant(coupling), 1.0, n)
    assert pair.plus.value == pytest.approx((y + x) / 2, rel=1e-12)
    assert pair.mixed.value == pytest.approx((y - x) / 2, rel=1e-12)


def test_large_beta_limits(sullivan):
    pair = closed_form_partition(sullivan, 60.0, 5)
    assert abs(pair.plus.log_value) < 1e-20
    # cheapest mixed configuration pays a single unit bond
    assert pair.mixed.log_value == pytest.approx(-60.0 + math.log(2), abs=1e-12)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_recursion_matches_closed_form(sullivan, sym_table, beta):
    for family in (sullivan, sym_table, CouplingFamily.constant(0.8)):
        for m, pair in enumerate(recursive_partition(family, beta, 7)):
            closed = closed_form_partition(family, beta, m)
            assert pair.plus.log_value == pytest.approx(closed.plus.log_value, abs=1e-12)
            assert pair.mixed.log_value == pytest.approx(closed.mixed.log_value, abs=1e-12)


def test_difference_shrinks_geometrically(sullivan):
    # Z^+ - Z^{+-} = X_n, and X_n / X_{n-1} = (1 - tau_{n+1})^2
    beta = 0.7
    pairs = recursive_partition(sullivan, beta, 6)
    x = [p.plus.value - p.mixed.value for p in pairs]
    for m in range(1, 7):
        assert x[m] / x[m - 1] == pytest.approx((1 - E(-beta * sullivan(m + 1))) ** 2, rel=1e-9)


@pytest.mark.parametrize("n", range(4))
@pytest.mark.parametrize("beta", [0.25, 1.0, 4.0])
def test_enumeration_matches_pure_python_oracle(sullivan, n, beta):
    for bc in (PLUS, MINUS, PM, MP):
        fast = brute_force_partition(sullivan, beta, n, bc).log_value
        slow = oracle_log_z(n, beta, sullivan_coupling, bc.left, bc.right)
        assert fast == pytest.approx(slow, abs=1e-12)


def test_enumeration_matches_closed_form(sullivan, sym_table):
    for family, n, beta in itertools.product((sullivan, sym_table), range(7), (0.25, 1.0, 4.0)):
        closed = closed_form_partition(family, beta, n)
        brute = brute_force_pair(family, beta, n)
        assert abs(closed.plus.log_value - brute.plus.log_value) <= 1e-10
        assert abs(closed.mixed.log_value - brute.mixed.log_value) <= 1e-10


def test_boundary_swaps(sullivan):
    for n, beta in itertools.product(range(5), (0.5, 2.0)):
        assert brute_force_partition(sullivan, beta, n, MINUS).log_value == pytest.approx(
            brute_force_partition(sullivan, beta, n, PLUS).log_value, abs=1e-12)
        assert brute_force_partition(sullivan, beta, n, MP).log_value == pytest.approx(
            brute_force_partition(sullivan, beta, n, PM).log_value, abs=1e-12)


@pytest.mark.parametrize("family", [CouplingFamily.absolute_value(), CouplingFamily.constant(0.4)])
def test_enumeration_single_site(family):
    beta = 1.3
    i0, i1 = family(0), family(1)
    plus = brute_force_partition(family, beta, 0, PLUS).value
    mixed = brute_force_partition(family, beta, 0, PM).value
    assert plus == pytest.approx(1 + E(-beta * (i0 + i1)), rel=1e-14)
    assert mixed == pytest.approx(E(-beta * i0) + E(-beta * i1), rel=1e-14)


def test_log_domain_survives_huge_beta(sullivan):
    pair = closed_form_partition(sullivan, 500.0, 12)
    assert math.isfinite(pair.plus.log_value) and math.isfinite(pair.mixed.log_value)
    brute = brute_force_partition(sullivan, 500.0, 6, PM)
    closed = closed_form_partition(sullivan, 500.0, 6)
    assert brute.log_value == pytest.approx(closed.mixed.log_value, abs=1e-9)


def test_closed_form_refuses_asymmetric_family():
    with pytest.raises(SymmetryConditionError):
        closed_form_partition(CouplingFamily.absolute_value(), 1.0, 2)


def test_cap_is_enforced(sullivan, monkeypatch):
    with pytest.raises(CapExceededError):
        brute_force_partition(sullivan, 1.0, 5, PLUS, cap=4)
    monkeypatch.setenv("PSPCHAIN_CAP", "3")
    with pytest.raises(CapExceededError):
        brute_force_partition(sullivan, 1.0, 4, PLUS)


def test_ising_ratio():
    fam = CouplingFamily.constant(1.0)
    tau = E(-1.0)
    y, x = (1 + tau) ** 4, (1 - tau) ** 4
    assert ising_ratio(fam, 1.0, 1) == pytest.approx((y + x) / (y - x), rel=1e-13)
    ratios = [ising_ratio(fam, 1.0, n) for n in range(41)]
    assert all(a >= b for a, b in zip(ratios, ratios[1:]))
    assert abs(ratios[-1] - 1) < 1e-3
    excess = [ising_ratio_excess(fam, 1.0, n) for n in range(41)]
    assert all(a > b > 0 for a, b in zip(excess, excess[1:]))
    for n in range(15):
        assert excess[n] == pytest.approx(ratios[n] - 1, rel=1e-6)
    assert ising_ratio(fam, 50.0, 3) > 1e20
    with pytest.raises(ValueError):
        ising_ratio(CouplingFamily.sullivan(), 1.0, 2)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_partition_value_arithmetic(a, b):
    x, y = PartitionValue(a), PartitionValue(b)
    assert (x * y).log_value == pytest.approx(a + b)
    assert (x / y).log_value == pytest.approx(a - b)
    assert (x + y).value == pytest.approx(E(a) + E(b), rel=1e-12)


def test_partition_value_overflow_guard():
    assert PartitionValue(800.0).value is None
    assert PartitionValue(-math.inf).is_zero
    assert PartitionValue.from_value(0.0).is_zero


# ---------------------------------------------------------------------------
# half-chain blocks
# ---------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 3), min_size=1, max_size=7), st.floats(0.1, 3))
def test_block_partition_matches_enumeration(bonds, beta):
    pair = block_partition(np.array(bonds), beta)
    assert pair.aligned.value == pytest.approx(block_oracle(bonds, beta, 1, 1), rel=1e-11)
    flipped = block_oracle(bonds, beta, 1, -1)
    assert pair.flipped.value == pytest.approx(flipped, rel=1e-9, abs=1e-300)


def test_left_block_small_case(sullivan):
    # n = 1, theta = 1/2: one free site at -1 with bonds I_{-1} = 2 and I_0 = 1
    pair = rarefied_left(sullivan, 1.0, 1, 0.5)
    assert pair.aligned.value == pytest.approx(1 + E(-3), rel=1e-14)
    assert pair.flipped.value == pytest.approx(E(-2) + E(-1), rel=1e-14)


def test_right_block_base_case(sullivan):
    # n = theta + 1/2: no free sites, one outer bond I_{theta+3/2}
    pair = rarefied_right_recursive(sullivan, 1.0, 2, 1.5)
    assert pair.aligned.value == 1.0
    assert pair.flipped.value == pytest.approx(E(-3), rel=1e-14)
    empty = rarefied_right(sullivan, 1.0, 2, 2.5)
    assert empty.aligned.value == 1.0 and empty.flipped.is_zero
    with pytest.raises(ValueError):
        rarefied_right_recursive(sullivan, 1.0, 1, 2.5)


def test_left_block_folds_under_symmetry(sullivan):
    beta = 0.9
    for n in range(1, 8):
        for tw in range(1, 2 * n + 2, 2):
            m = (tw - 1) // 2
            tau = [E(-beta * sullivan(j)) for j in range(n + 2)]
            aligned = (math.prod((1 + tau[j]) ** 2 for j in range(1, m + 1))
                       * math.prod(1 + tau[j] for j in range(m + 1, n + 2)))
            flipped = (math.prod((1 - tau[j]) ** 2 for j in range(1, m + 1))
                       * math.prod(1 - tau[j] for j in range(m + 1, n + 2)))
            pair = rarefied_left(sullivan, beta, n, tw / 2)
            assert pair.aligned.value == pytest.approx((aligned + flipped) / 2, rel=1e-12)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_block_recursions_agree(sullivan, sym_table, beta):
    for family in (sullivan, sym_table):
        for n in range(1, 7):
            for tw in range(1, 2 * n + 2, 2):
                a, b = rarefied_left(family, beta, n, tw / 2), rarefied_left_recursive(family, beta, n, tw / 2)
                assert a.aligned.log_value == pytest.approx(b.aligned.log_value, abs=1e-12)
                assert a.flipped.log_value == pytest.approx(b.flipped.log_value, abs=1e-12)
                if tw <= 2 * n - 1:
                    a, b = rarefied_right(family, beta, n, tw / 2), rarefied_right_recursive(family, beta, n, tw / 2)
                    assert a.aligned.log_value == pytest.approx(b.aligned.log_value, abs=1e-12)
                    assert a.flipped.log_value == pytest.approx(b.flipped.log_value, abs=1e-12)


def test_blocks_reject_negative_theta(sullivan):
    with pytest.raises(ValueError):
        rarefied_left(sullivan, 1.0, 2, -0.5)
    with pytest.raises(ValueError):
        rarefied_right(sullivan, 1.0, 2, 3.5)


def test_crystal_small_case(sullivan):
    # n = 1, theta = 3/2: spin -1 at site 1; left configs with PSP 3/2 are
    # (-,-), (+,-), (-,+) at sites (-1, 0), with block energies 0, 3 and 2
    cr = crystal_partitions(sullivan, 1.0, 1, 1.5)
    expected = 1 + E(-3) + E(-2)
    assert cr.joint.value == pytest.approx(expected, rel=1e-14)
    assert cr.left.value == pytest.approx(expected, rel=1e-14)
    assert cr.right.value == pytest.approx(1.0, rel=1e-14)


def test_crystal_joint_sums_to_mixed_partition(sullivan):
    beta = 1.2
    for n in range(5):
        total = []
        for tw in range(-2 * n - 1, 2 * n + 2, 2):
            cr = crystal_partitions(sullivan, beta, n, tw / 2)
            if cr.joint is not None:
                total.append(cr.joint.log_value - beta * sullivan((tw + 1) // 2))
        log_total = float(np.logaddexp.reduce(total))
        assert log_total == pytest.approx(closed_form_partition(sullivan, beta, n).mixed.log_value, abs=1e-12)


def test_crystal_below_block_bound(sullivan):
    for n, beta in itertools.product(range(1, 6), (0.5, 2.0)):
        for tw in range(1, 2 * n + 2, 2):
            cr = crystal_partitions(sullivan, beta, n, tw / 2)
            assert cr.left.log_value <= rarefied_left(sullivan, beta, n, tw / 2).aligned.log_value + 1e-12
            assert cr.right.log_value <= rarefied_right(sullivan, beta, n, tw / 2).aligned.log_value + 1e-12
