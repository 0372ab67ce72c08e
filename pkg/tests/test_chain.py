import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pspchain import (
    MINUS,
    MP,
    PLUS,
    PM,
    CapExceededError,
    CouplingFamily,
    InterfaceIndex,
    SpinConfiguration,
    Volume,
    energy,
    energy_pm,
    map_S,
    map_U,
    map_V,
)
from pspchain.chain import (
    all_configurations,
    bond_couplings,
    chunk_energies,
    chunk_psp,
    map_chunks,
    resolve_cap,
    unpack_bits,
)

from conftest import oracle_configs, oracle_energy, oracle_psp, sullivan_coupling

BOUNDARIES = [PLUS, MINUS, PM, MP]


def test_energy_examples(sullivan):
    assert energy(SpinConfiguration((1,)), CouplingFamily.constant(1.0), PLUS) == 0
    # sigma(0) = -1 disagrees with both boundary spins: I_0 + I_1
    assert energy(SpinConfiguration((-1,)), sullivan, PLUS) == 2
    assert energy(SpinConfiguration((1, -1, 1)), CouplingFamily.constant(1.0), PLUS) == 2


def test_energy_pm_examples(sullivan):
    assert energy_pm(SpinConfiguration((1,)), sullivan) == 1
    assert energy_pm(SpinConfiguration((-1,)), sullivan) == 1


@pytest.mark.parametrize("s", [-1, 1])
def test_indicator_identity(s):
    assert (s != -1) - (s != 1) == s


def test_energy_pm_is_mixed_boundary_energy(sullivan):
    # H^+ + I_{-n} sigma(-n) reproduces the -/+ boundary energy exactly
    for n in range(5):
        for c in all_configurations(n):
            assert energy_pm(c, sullivan) == energy(c, sullivan, PM)


def test_energy_matches_oracle(sullivan):
    for n in range(4):
        for spins in oracle_configs(n):
            c = SpinConfiguration(spins)
            for bc in BOUNDARIES:
                assert energy(c, sullivan, bc) == oracle_energy(spins, sullivan_coupling, bc.left, bc.right)


def test_map_S_example():
    sigma = SpinConfiguration((-1, -1, 1, -1, 1))
    assert map_S(sigma).spins == (-1, 1, -1, 1, 1)


@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=15).filter(lambda s: len(s) % 2 == 1))
def test_maps_are_involutions(spins):
    c = SpinConfiguration(tuple(spins))
    assert map_S(map_S(c)) == c
    assert map_U(map_U(c)) == c
    assert map_V(map_V(c)) == c
    assert map_S(c) == map_U(map_V(c)) == map_V(map_U(c))


def test_symmetry_invariances_exhaustive(sullivan):
    for n in range(5):
        for c in all_configurations(n):
            assert energy_pm(map_S(c), sullivan) == energy_pm(c, sullivan)
            for bc in BOUNDARIES:
                h = energy(c, sullivan, bc)
                assert energy(map_U(c), sullivan, bc.flipped()) == h
                assert energy(map_V(c), sullivan, bc.reflected()) == h


def test_reflection_needs_symmetric_couplings():
    fam = CouplingFamily.absolute_value()
    c = SpinConfiguration((1, 1, -1))
    assert energy(c, fam, PLUS) == 3
    assert energy(map_V(c), fam, PLUS) == 1


@given(st.integers(0, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << (2 * n + 1)) - 1))))
def test_packed_round_trip(case):
    n, index = case
    c = SpinConfiguration.from_packed(index, n)
    assert c.packed == index
    assert c.n == n
    # bit i is the spin at site i - n
    for i in range(2 * n + 1):
        assert (c[i - n] == 1) == bool((index >> i) & 1)


def test_configuration_validation():
    with pytest.raises(ValueError):
        SpinConfiguration((1, -1))
    with pytest.raises(ValueError):
        SpinConfiguration((1, 0, 1))
    with pytest.raises(IndexError):
        SpinConfiguration((1,))[1]


def test_extension_under_pm():
    c = SpinConfiguration((1, 1, 1))
    assert c.extended(-2) == -1
    assert c.extended(2) == 1
    assert c.extended(0, PLUS) == 1


@pytest.mark.parametrize("family", [CouplingFamily.sullivan(), CouplingFamily.absolute_value(),
                                    CouplingFamily.constant(0.3)])
def test_vectorised_energies_match_scalar(family):
    for n in range(4):
        bits = unpack_bits(0, 1 << (2 * n + 1), n)
        couplings = bond_couplings(family, n)
        for bc in BOUNDARIES:
            fast = chunk_energies(bits, couplings, bc)
            slow = [energy(c, family, bc) for c in all_configurations(n)]
            np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-13)


def test_vectorised_psp_matches_oracle():
    for n in range(5):
        fast = chunk_psp(unpack_bits(0, 1 << (2 * n + 1), n))
        slow = [round(2 * oracle_psp(s)) for s in
                (SpinConfiguration.from_packed(i, n).spins for i in range(1 << (2 * n + 1)))]
        np.testing.assert_array_equal(fast, slow)


def test_map_chunks_order_is_worker_independent():
    def fn(start, bits):
        return start, int(bits.sum())

    serial = map_chunks(fn, 4, workers=1, chunk_size=16)
    threaded = map_chunks(fn, 4, workers=4, chunk_size=16)
    assert serial == threaded
    assert [s for s, _ in serial] == list(range(0, 1 << 9, 16))


def test_volume_and_cap(monkeypatch):
    v = Volume(3)
    assert v.size == 7
    assert list(v.sites) == [-3, -2, -1, 0, 1, 2, 3]
    with pytest.raises(CapExceededError) as info:
        Volume(13).check_cap()
    assert info.value.cap == 12
    monkeypatch.setenv("PSPCHAIN_CAP", "5")
    assert resolve_cap() == 5
    assert resolve_cap(7) == 7
    with pytest.raises(ValueError):
        Volume(-1)


def test_interface_index():
    t = InterfaceIndex.from_value(-1.5)
    assert t.twice_value == -3
    assert (-t).value == 1.5
    assert t.in_range(1) and not t.in_range(0)
    with pytest.raises(ValueError):
        InterfaceIndex(2)
    with pytest.raises(ValueError):
        InterfaceIndex.from_value(0.25)
