"""Spin configurations on Lambda_n = [-n, n], boundary conditions and energies.

Packed form: bit i of an integer holds the spin at site x = i - n, bit set
meaning +1. The enumeration kernels below work on whole blocks of packed
indices at once and are what every exact (brute force) computation uses.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .couplings import CouplingFamily
from .errors import CapExceededError

DEFAULT_CAP = 12
CAP_ENV = "PSPCHAIN_CAP"
CHUNK_BITS = 16
CHUNK_SIZE = 1 << CHUNK_BITS

T = TypeVar("T")


def resolve_cap(cap: int | None = None) -> int:
    """Explicit cap, else $PSPCHAIN_CAP, else 12."""
    if cap is not None:
        return int(cap)
    env = os.environ.get(CAP_ENV)
    if env:
        return int(env)
    return DEFAULT_CAP


@dataclass(frozen=True)
class Volume:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"half-width must be non-negative, got {self.n}")

    @property
    def size(self) -> int:
        return 2 * self.n + 1

    @property
    def sites(self) -> range:
        return range(-self.n, self.n + 1)

    @property
    def n_configs(self) -> int:
        return 1 << self.size

    def check_cap(self, cap: int | None = None) -> None:
        cap = resolve_cap(cap)
        if self.n > cap:
            raise CapExceededError(self.n, cap)


@dataclass(frozen=True)
class BoundaryCondition:
    left: int
    right: int

    def __post_init__(self):
        if self.left not in (-1, 1) or self.right not in (-1, 1):
            raise ValueError("boundary spins must be -1 or +1")

    def flipped(self) -> BoundaryCondition:
        return BoundaryCondition(-self.left, -self.right)

    def reflected(self) -> BoundaryCondition:
        return BoundaryCondition(self.right, self.left)


PLUS = BoundaryCondition(1, 1)
MINUS = BoundaryCondition(-1, -1)
PM = BoundaryCondition(-1, 1)
MP = BoundaryCondition(1, -1)


@dataclass(frozen=True)
class SpinConfiguration:
    """Spins on Lambda_n listed from site -n to site n."""

    spins: tuple[int, ...]

    def __post_init__(self):
        spins = tuple(int(s) for s in self.spins)
        if len(spins) % 2 != 1:
            raise ValueError("a configuration on [-n, n] has an odd number of spins")
        if any(s not in (-1, 1) for s in spins):
            raise ValueError("spins must be -1 or +1")
        object.__setattr__(self, "spins", spins)

    @classmethod
    def from_packed(cls, index: int, n: int) -> SpinConfiguration:
        size = 2 * n + 1
        if not 0 <= index < (1 << size):
            raise ValueError(f"packed index {index} out of range for n={n}")
        return cls(tuple(1 if (index >> i) & 1 else -1 for i in range(size)))

    @classmethod
    def uniform(cls, n: int, spin: int) -> SpinConfiguration:
        return cls((spin,) * (2 * n + 1))

    @property
    def n(self) -> int:
        return (len(self.spins) - 1) // 2

    @property
    def volume(self) -> Volume:
        return Volume(self.n)

    @property
    def packed(self) -> int:
        return sum(1 << i for i, s in enumerate(self.spins) if s == 1)

    def __getitem__(self, x: int) -> int:
        n = self.n
        if not -n <= x <= n:
            raise IndexError(f"site {x} outside [-{n}, {n}]")
        return self.spins[x + n]

    def extended(self, x: int, bc: BoundaryCondition = PM) -> int:
        """Spin at any integer site, with ``bc`` filling the complement of Lambda_n."""
        n = self.n
        if x < -n:
            return bc.left
        if x > n:
            return bc.right
        return self.spins[x + n]

    @property
    def n_plus(self) -> int:
        return sum(1 for s in self.spins if s == 1)


@dataclass(frozen=True, order=True)
class InterfaceIndex:
    """A half-integer t stored exactly as the odd integer 2t."""

    twice_value: int

    def __post_init__(self):
        if self.twice_value % 2 != 1:
            raise ValueError(f"interface index needs an odd doubled value, got {self.twice_value}")

    @classmethod
    def from_value(cls, t: float) -> InterfaceIndex:
        twice = round(2 * t)
        if abs(2 * t - twice) > 1e-9:
            raise ValueError(f"{t} is not a half-integer")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice_value / 2

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> InterfaceIndex:
        return InterfaceIndex(-self.twice_value)

    def in_range(self, n: int) -> bool:
        return abs(self.twice_value) <= 2 * n + 1

    def check(self, n: int) -> None:
        if not self.in_range(n):
            raise ValueError(f"interface point {self.value} outside T_{n}")

    def __str__(self) -> str:
        return f"{self.twice_value}/2"


def as_interface(theta) -> InterfaceIndex:
    if isinstance(theta, InterfaceIndex):
        return theta
    return InterfaceIndex.from_value(float(theta))


def interface_range(n: int) -> list[InterfaceIndex]:
    """T_n = {-n-1/2, ..., n+1/2} in increasing order."""
    return [InterfaceIndex(tw) for tw in range(-2 * n - 1, 2 * n + 2, 2)]


def all_configurations(n: int) -> Iterable[SpinConfiguration]:
    for index in range(1 << (2 * n + 1)):
        yield SpinConfiguration.from_packed(index, n)


def energy(config: SpinConfiguration, family: CouplingFamily, bc: BoundaryCondition) -> float:
    """Sum of I_x over disagreeing bonds (x-1, x), boundary bonds included.

    The bond into site -n costs I_{-n}, the bond out of site n costs I_{n+1}.
    """
    n = config.n
    total = 0.0
    if config.extended(-n) != bc.left:
        total += family(-n)
    for x in range(-n + 1, n + 1):
        if config[x - 1] != config[x]:
            total += family(x)
    if config.extended(n) != bc.right:
        total += family(n + 1)
    return total


def energy_pm(config: SpinConfiguration, family: CouplingFamily) -> float:
    """H^+ plus I_{-n} * sigma(-n): the mixed-boundary Hamiltonian."""
    n = config.n
    return energy(config, family, PLUS) + family(-n) * config[-n]


def map_U(config: SpinConfiguration) -> SpinConfiguration:
    return SpinConfiguration(tuple(-s for s in config.spins))


def map_V(config: SpinConfiguration) -> SpinConfiguration:
    return SpinConfiguration(config.spins[::-1])


def map_S(config: SpinConfiguration) -> SpinConfiguration:
    """sigma -> -sigma(-x); keeps the -/+ boundary extension invariant."""
    return SpinConfiguration(tuple(-s for s in reversed(config.spins)))


# ---------------------------------------------------------------------------
# Vectorised enumeration kernels
# ---------------------------------------------------------------------------

def bond_couplings(family: CouplingFamily, n: int) -> np.ndarray:
    """I_{-n}, ..., I_{n+1}: the 2n+2 bonds touching Lambda_n, left to right."""
    return family.values(-n, n + 1)


def unpack_bits(start: int, stop: int, n: int) -> np.ndarray:
    """Rows of 0/1 spins (1 = +1) for packed indices start..stop-1."""
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(2 * n + 1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def chunk_energies(bits: np.ndarray, couplings: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    m = bits.shape[0]
    left = np.full((m, 1), 1 if bc.left == 1 else 0, dtype=np.int8)
    right = np.full((m, 1), 1 if bc.right == 1 else 0, dtype=np.int8)
    ext = np.concatenate([left, bits, right], axis=1)
    disagree = (ext[:, 1:] != ext[:, :-1]).astype(float)
    return disagree @ couplings


def chunk_psp(bits: np.ndarray) -> np.ndarray:
    """Twice the phase separation point of each row, under -/+ extension.

    Column k of the working arrays is the interface candidate
    t = k - n - 1/2, k = 0..2n+1.
    """
    m, size = bits.shape
    n = (size - 1) // 2
    cum_plus = np.zeros((m, size + 1), dtype=np.int32)
    np.cumsum(bits, axis=1, out=cum_plus[:, 1:])
    n_plus = cum_plus[:, -1:]
    k = np.arange(size + 1, dtype=np.int32)
    # l^-_t = k - cum_plus[k], r^+_t = n_plus - cum_plus[k]
    norm = k + n_plus - 2 * cum_plus
    left_nb = np.concatenate([np.zeros((m, 1), np.int8), bits], axis=1)
    right_nb = np.concatenate([bits, np.ones((m, 1), np.int8)], axis=1)
    norm = np.where(left_nb != right_nb, norm, -1)
    best = norm == norm.max(axis=1, keepdims=True)
    first = np.argmax(best, axis=1)
    last = size - np.argmax(best[:, ::-1], axis=1)
    plus_class = n_plus[:, 0] >= n + 1
    kk = np.where(plus_class, first, last)
    return 2 * kk - 2 * n - 1


def chunk_ranges(n: int, chunk_size: int = CHUNK_SIZE) -> list[tuple[int, int]]:
    total = 1 << (2 * n + 1)
    return [(s, min(s + chunk_size, total)) for s in range(0, total, chunk_size)]


def map_chunks(fn: Callable[[int, np.ndarray], T], n: int, workers: int = 1,
               chunk_size: int = CHUNK_SIZE) -> list[T]:
    """Apply ``fn(start, bits)`` to every chunk; results in chunk order.

    Ordering is fixed by the chunk grid, so any reduction over the returned
    list is independent of ``workers``.
    """
    ranges = chunk_ranges(n, chunk_size)

    def run(r: tuple[int, int]) -> T:
        return fn(r[0], unpack_bits(r[0], r[1], n))

    if workers <= 1 or len(ranges) == 1:
        return [run(r) for r in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, ranges))


def spins_from_bits(row: Sequence[int]) -> SpinConfiguration:
    return SpinConfiguration(tuple(1 if b else -1 for b in row))
