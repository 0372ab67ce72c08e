"""Partition functions of the chain, held as natural logs.

Three independent routes to Z^+_n and Z^{+-}_n: the product closed form,
the two-term recursion in n, and brute-force enumeration. The block
("rarefied") partition functions of a half-chain and the PSP-restricted
("crystal") sums are here too.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .chain import (
    PLUS,
    PM,
    BoundaryCondition,
    InterfaceIndex,
    Volume,
    as_interface,
    bond_couplings,
    chunk_energies,
    chunk_psp,
    map_chunks,
)
from .couplings import CONSTANT, CouplingFamily, validate_reflection_symmetry
from .errors import SymmetryConditionError

LOG2 = math.log(2.0)


@dataclass(frozen=True, order=True)
class PartitionValue:
    """A positive quantity stored as its natural log (``-inf`` encodes zero)."""

    log_value: float

    @property
    def value(self) -> float | None:
        """Linear value, or None when it would not fit comfortably in a double."""
        if self.log_value == -math.inf:
            return 0.0
        if abs(self.log_value) < 700:
            return math.exp(self.log_value)
        return None

    @property
    def is_zero(self) -> bool:
        return self.log_value == -math.inf

    def __mul__(self, other: PartitionValue) -> PartitionValue:
        return PartitionValue(self.log_value + other.log_value)

    def __truediv__(self, other: PartitionValue) -> PartitionValue:
        return PartitionValue(self.log_value - other.log_value)

    def __add__(self, other: PartitionValue) -> PartitionValue:
        return PartitionValue(float(np.logaddexp(self.log_value, other.log_value)))

    @classmethod
    def from_value(cls, x: float) -> PartitionValue:
        if x < 0:
            raise ValueError("partition values are non-negative")
        return cls(math.log(x) if x > 0 else -math.inf)


@dataclass(frozen=True)
class PartitionPair:
    """Z^+_n (plus boundary) and Z^{+-}_n (mixed boundary)."""

    n: int
    plus: PartitionValue
    mixed: PartitionValue


@dataclass(frozen=True)
class RarefiedPair:
    """Block partition function with matching (aligned) and opposite (flipped)
    outer boundary spin."""

    aligned: PartitionValue
    flipped: PartitionValue


@dataclass(frozen=True)
class CrystalPartitions:
    """PSP-restricted block sums for one theta; ``None`` marks an empty sum.

    ``joint`` filters left and right blocks together; ``left`` and ``right``
    filter one block while the other is held at its pure phase (all -1 on the
    left, all +1 on the right).
    """

    theta: InterfaceIndex
    left: PartitionValue | None
    right: PartitionValue | None
    joint: PartitionValue | None


def _half_sum_and_diff(log_big: float, log_ratio: float) -> tuple[float, float]:
    """log((B + S)/2), log((B - S)/2) given log B and log(S/B) <= 0."""
    if log_ratio > 0:
        raise ValueError("log_ratio must be non-positive")
    plus = log_big - LOG2 + math.log1p(math.exp(log_ratio))
    if log_ratio == 0.0:
        minus = -math.inf
    else:
        minus = log_big - LOG2 + math.log(-math.expm1(log_ratio))
    return plus, minus


def _atanh_sum(taus: np.ndarray) -> float:
    """sum atanh(tau) with tau folded into [0, 1]; log|1-t| - log(1+t) = -2 atanh."""
    with np.errstate(divide="ignore"):
        folded = np.minimum(taus, 1.0 / taus)
        return float(np.sum(np.arctanh(folded)))


def require_symmetry(family: CouplingFamily, n: int) -> None:
    """Check I_k == I_{1-k} for k = 1..n+1, i.e. on the bonds touching Lambda_n."""
    report = validate_reflection_symmetry(family, (1, n + 1))
    if not report.ok:
        raise SymmetryConditionError(
            f"closed form needs I_k == I_(1-k) on [-{n}, {n + 1}]; "
            f"violated at k={report.violations or report.undefined}")


def closed_form_partition(family: CouplingFamily, beta: float, n: int) -> PartitionPair:
    """Z^+ = (Y + X)/2 and Z^{+-} = (Y - X)/2 with
    Y = prod (1 + e^{-beta I_k})^2, X = prod (1 - e^{-beta I_k})^2, k = 1..n+1."""
    require_symmetry(family, n)
    scaled = -beta * family.values(1, n + 1)
    log_y = 2.0 * float(np.sum(np.logaddexp(0.0, scaled)))
    log_x_minus_y = -4.0 * _atanh_sum(np.exp(scaled))
    plus, mixed = _half_sum_and_diff(log_y, log_x_minus_y)
    if mixed == -math.inf:
        raise ValueError("Y_n == X_n: mixed partition function vanishes (infinite coupling?)")
    return PartitionPair(n, PartitionValue(plus), PartitionValue(mixed))


def recursive_partition(family: CouplingFamily, beta: float, n: int) -> list[PartitionPair]:
    """Pairs for m = 0..n from the two-term recursion
    Z^+_m = (1 + e^{-2bI}) Z^+_{m-1} + 2 e^{-bI} Z^{+-}_{m-1}, I = I_{m+1}
    (and the same with the roles swapped for Z^{+-})."""
    require_symmetry(family, n)
    i0, i1 = family(0), family(1)
    plus = float(np.logaddexp(0.0, -beta * (i0 + i1)))
    mixed = float(np.logaddexp(-beta * i0, -beta * i1))
    pairs = [PartitionPair(0, PartitionValue(plus), PartitionValue(mixed))]
    for m in range(1, n + 1):
        coupling = family(m + 1)
        stay = float(np.logaddexp(0.0, -2.0 * beta * coupling))
        cross = LOG2 - beta * coupling
        plus, mixed = (float(np.logaddexp(stay + plus, cross + mixed)),
                       float(np.logaddexp(stay + mixed, cross + plus)))
        pairs.append(PartitionPair(m, PartitionValue(plus), PartitionValue(mixed)))
    return pairs


def _combine(logs: list[float]) -> float:
    return functools.reduce(lambda a, b: float(np.logaddexp(a, b)), logs, -math.inf)


def brute_force_partition(family: CouplingFamily, beta: float, n: int, bc: BoundaryCondition,
                          cap: int | None = None, workers: int = 1) -> PartitionValue:
    """log sum over all 2^(2n+1) configurations of exp(-beta H(sigma; bc))."""
    Volume(n).check_cap(cap)
    couplings = bond_couplings(family, n)

    def chunk(start: int, bits: np.ndarray) -> float:
        return float(logsumexp(-beta * chunk_energies(bits, couplings, bc)))

    return PartitionValue(_combine(map_chunks(chunk, n, workers)))


def brute_force_pair(family: CouplingFamily, beta: float, n: int,
                     cap: int | None = None, workers: int = 1) -> PartitionPair:
    return PartitionPair(n,
                         brute_force_partition(family, beta, n, PLUS, cap, workers),
                         brute_force_partition(family, beta, n, PM, cap, workers))


def ising_ratio(family: CouplingFamily, beta: float, n: int) -> float:
    """Z^+_n / Z^{+-}_n for a constant family."""
    if family.kind != CONSTANT:
        raise ValueError("ising_ratio is defined for constant families only")
    pair = closed_form_partition(family, beta, n)
    diff = pair.plus.log_value - pair.mixed.log_value
    return math.exp(diff) if diff < 709 else math.inf


def ising_ratio_excess(family: CouplingFamily, beta: float, n: int) -> float:
    """Z^+_n / Z^{+-}_n - 1 = 2X / (Y - X), resolved well below double epsilon."""
    if family.kind != CONSTANT:
        raise ValueError("ising_ratio_excess is defined for constant families only")
    tau = math.exp(-beta * family.value)
    if tau >= 1.0:
        return math.inf
    log_x_over_y = -4.0 * (n + 1) * math.atanh(tau)
    return 2.0 / math.expm1(-log_x_over_y)


# ---------------------------------------------------------------------------
# Half-chain blocks
# ---------------------------------------------------------------------------

def block_partition(couplings: np.ndarray, beta: float) -> RarefiedPair:
    """Partition pair of a block between two fixed spins.

    ``couplings`` lists every bond of the block, both outer bonds included
    (m + 1 values for m free sites). Domain walls on those bonds must have
    even (aligned ends) or odd (flipped ends) parity, giving
    (prod(1 + w) +- prod(1 - w)) / 2 with w = exp(-beta I).
    """
    couplings = np.asarray(couplings, dtype=float)
    if np.any(couplings < 0):
        raise ValueError("block partition needs non-negative couplings")
    if couplings.size == 0:
        return RarefiedPair(PartitionValue(0.0), PartitionValue(-math.inf))
    scaled = -beta * couplings
    log_v = float(np.sum(np.logaddexp(0.0, scaled)))
    log_u_minus_v = -2.0 * _atanh_sum(np.exp(scaled))
    aligned, flipped = _half_sum_and_diff(log_v, log_u_minus_v)
    return RarefiedPair(PartitionValue(aligned), PartitionValue(flipped))


def _right_bonds(family: CouplingFamily, n: int, theta: InterfaceIndex) -> np.ndarray:
    # sites theta+3/2 .. n, bonds I_{theta+3/2} .. I_{n+1}
    first = (theta.twice_value + 3) // 2
    return family.values(first, n + 1)


def _left_bonds(family: CouplingFamily, n: int, theta: InterfaceIndex) -> np.ndarray:
    # sites -n .. theta-3/2, bonds I_{-n} .. I_{theta-1/2}
    last = (theta.twice_value - 1) // 2
    return family.values(-n, last)


def _check_rarefied_theta(n: int, theta) -> InterfaceIndex:
    theta = as_interface(theta)
    theta.check(n)
    if theta.twice_value < 1:
        raise ValueError("rarefied blocks are computed for theta >= 1/2; use the reflection symmetry")
    return theta


def rarefied_right(family: CouplingFamily, beta: float, n: int, theta) -> RarefiedPair:
    """Right block [theta+3/2, n] with spin +1 at theta+1/2.

    ``aligned`` has the +1 boundary at n+1, ``flipped`` the -1 boundary.
    For theta = n+1/2 the block and its outer bond are empty: (1, 0).
    """
    theta = _check_rarefied_theta(n, theta)
    return block_partition(_right_bonds(family, n, theta), beta)


def rarefied_left(family: CouplingFamily, beta: float, n: int, theta) -> RarefiedPair:
    """Left block [-n, theta-3/2] with spin -1 at theta-1/2.

    ``aligned`` has the -1 boundary at -n-1, ``flipped`` the +1 boundary.
    """
    theta = _check_rarefied_theta(n, theta)
    return block_partition(_left_bonds(family, n, theta), beta)


def rarefied_right_recursive(family: CouplingFamily, beta: float, n: int, theta) -> RarefiedPair:
    """Same pair as :func:`rarefied_right`, grown one site at a time from the
    empty block at n = theta + 1/2."""
    theta = _check_rarefied_theta(n, theta)
    start = (theta.twice_value + 1) // 2
    if n < start:
        raise ValueError("recursion starts at n = theta + 1/2")
    aligned = 0.0
    flipped = -beta * family(start + 1)
    for m in range(start + 1, n + 1):
        step = -beta * family(m + 1)
        aligned, flipped = (float(np.logaddexp(aligned, step + flipped)),
                            float(np.logaddexp(flipped, step + aligned)))
    return RarefiedPair(PartitionValue(aligned), PartitionValue(flipped))


def rarefied_left_recursive(family: CouplingFamily, beta: float, n: int, theta) -> RarefiedPair:
    """Same pair as :func:`rarefied_left`, grown leftwards from the empty block
    whose only bond is (theta-3/2, theta-1/2)."""
    theta = _check_rarefied_theta(n, theta)
    edge = (theta.twice_value - 1) // 2
    aligned = 0.0
    flipped = -beta * family(edge)
    for a in range(edge - 1, -n - 1, -1):
        step = -beta * family(a)
        aligned, flipped = (float(np.logaddexp(aligned, step + flipped)),
                            float(np.logaddexp(flipped, step + aligned)))
    return RarefiedPair(PartitionValue(aligned), PartitionValue(flipped))


def crystal_partitions(family: CouplingFamily, beta: float, n: int, theta,
                       cap: int | None = None, workers: int = 1) -> CrystalPartitions:
    """PSP-restricted block sums at theta by filtered enumeration of Lambda_n.

    Every configuration with PSP theta has spin -1 at theta-1/2 and +1 at
    theta+1/2, so its mixed-boundary energy splits as
    H_left + I_{theta+1/2} + H_right.
    """
    theta = as_interface(theta)
    theta.check(n)
    Volume(n).check_cap(cap)
    couplings = bond_couplings(family, n)
    tw = theta.twice_value
    # column of site x is x + n
    minus_col = (tw - 1) // 2 + n
    plus_col = (tw + 1) // 2 + n
    size = 2 * n + 1
    bridge = family((tw + 1) // 2)

    def chunk(start: int, bits: np.ndarray) -> tuple[float, float, float]:
        hit = chunk_psp(bits) == tw
        if minus_col >= 0:
            hit &= bits[:, minus_col] == 0
        if plus_col < size:
            hit &= bits[:, plus_col] == 1
        left_pure = np.all(bits[:, :max(minus_col, 0)] == 0, axis=1)
        right_pure = np.all(bits[:, min(plus_col + 1, size):] == 1, axis=1)
        log_w = -beta * (chunk_energies(bits, couplings, PM) - bridge)
        out = []
        for mask in (hit & right_pure, hit & left_pure, hit):
            out.append(float(logsumexp(log_w[mask])) if mask.any() else -math.inf)
        return tuple(out)

    parts = map_chunks(chunk, n, workers)
    left, right, joint = (_combine([p[i] for p in parts]) for i in range(3))

    def wrap(x: float) -> PartitionValue | None:
        return None if x == -math.inf else PartitionValue(x)

    return CrystalPartitions(theta, wrap(left), wrap(right), wrap(joint))


def check_symmetry_or_warn(family: CouplingFamily, n: int) -> bool:
    report = validate_reflection_symmetry(family, (1, n + 1))
    if not report.ok:
        warnings.warn(f"family {family.label} breaks I_k == I_(1-k) on [-{n}, {n + 1}]; "
                      "the PSP distribution need not be symmetric", stacklevel=3)
    return report.ok
