"""Interface points, the phase separation point (PSP) and its exact law.

Configurations here always carry the -/+ extension: spin -1 left of
Lambda_n and +1 right of it, so at least one interface point exists.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .chain import (
    PLUS,
    PM,
    InterfaceIndex,
    SpinConfiguration,
    Volume,
    as_interface,
    bond_couplings,
    chunk_energies,
    chunk_psp,
    interface_range,
    map_chunks,
)
from .couplings import CouplingFamily
from .partition import (
    PartitionValue,
    _combine,
    check_symmetry_or_warn,
    crystal_partitions,
    rarefied_left,
    rarefied_right,
)


class MajorityClass(enum.Enum):
    PLUS_CLASS = "+"
    MINUS_CLASS = "-"


def majority_class(config: SpinConfiguration) -> MajorityClass:
    if config.n_plus >= config.n + 1:
        return MajorityClass.PLUS_CLASS
    return MajorityClass.MINUS_CLASS


@dataclass(frozen=True)
class InterfaceStats:
    """Spin counts on either side of a candidate separation point.

    l_minus: -1 spins left of t; r_plus: +1 spins right of t; l_plus and
    r_minus are the complements on each side.
    """

    l_minus: int
    r_plus: int
    l_plus: int
    r_minus: int

    @property
    def norm(self) -> int:
        return self.l_minus + self.r_plus


def interface_points(config: SpinConfiguration) -> list[InterfaceIndex]:
    n = config.n
    points = []
    for t in interface_range(n):
        left = (t.twice_value - 1) // 2
        if config.extended(left) != config.extended(left + 1):
            points.append(t)
    return points


def interface_stats(config: SpinConfiguration, t) -> InterfaceStats:
    t = as_interface(t)
    n = config.n
    t.check(n)
    left_sites = [x for x in range(-n, n + 1) if 2 * x < t.twice_value]
    right_sites = [x for x in range(-n, n + 1) if 2 * x > t.twice_value]
    l_minus = sum(1 for x in left_sites if config[x] == -1)
    r_plus = sum(1 for x in right_sites if config[x] == 1)
    return InterfaceStats(l_minus, r_plus, len(left_sites) - l_minus, len(right_sites) - r_plus)


def norm_maximizers(config: SpinConfiguration) -> list[InterfaceIndex]:
    """Interface points where l_minus + r_plus is largest, in increasing order."""
    points = interface_points(config)
    norms = [interface_stats(config, t).norm for t in points]
    best = max(norms)
    return [t for t, v in zip(points, norms) if v == best]


def psp(config: SpinConfiguration) -> InterfaceIndex:
    """Phase separation point: the leftmost maximizer for a +1 majority, the
    rightmost for a -1 majority."""
    best = norm_maximizers(config)
    if majority_class(config) is MajorityClass.PLUS_CLASS:
        return best[0]
    return best[-1]


@dataclass(frozen=True)
class NecessaryConditionVerdict:
    t: InterfaceIndex
    position: str  # "first", "last", "only" or "interior"
    stats: InterfaceStats
    satisfied: bool


def psp_necessary_conditions(config: SpinConfiguration, t) -> NecessaryConditionVerdict:
    """Check the conditions every PSP must meet at an interface point t.

    First interface: l_minus >= l_plus == 0 and r_plus > r_minus.
    Last interface: l_minus > l_plus and r_plus >= r_minus == 0.
    Interior: l_minus > l_plus and r_plus > r_minus.
    When t is the only interface either boundary form is accepted.
    """
    t = as_interface(t)
    points = interface_points(config)
    if t not in points:
        raise ValueError(f"{t.value} is not an interface point of this configuration")
    s = interface_stats(config, t)
    first_ok = s.l_minus >= s.l_plus == 0 and s.r_plus > s.r_minus
    last_ok = s.l_minus > s.l_plus and s.r_plus >= s.r_minus == 0
    if len(points) == 1:
        return NecessaryConditionVerdict(t, "only", s, first_ok or last_ok)
    if t == points[0]:
        return NecessaryConditionVerdict(t, "first", s, first_ok)
    if t == points[-1]:
        return NecessaryConditionVerdict(t, "last", s, last_ok)
    interior_ok = s.l_minus > s.l_plus and s.r_plus > s.r_minus
    return NecessaryConditionVerdict(t, "interior", s, interior_ok)


# ---------------------------------------------------------------------------
# Exact distribution under the mixed-boundary Gibbs measure
# ---------------------------------------------------------------------------

@dataclass
class PspDistribution:
    """Exact P_n(theta) for theta in T_n, as log bucket weights.

    ``log_weights[k]`` is log sum exp(-beta H) over configurations whose PSP is
    ``twice_theta[k] / 2``; ``log_z`` is the log of their total.
    """

    n: int
    beta: float
    family: CouplingFamily
    twice_theta: np.ndarray
    log_weights: np.ndarray
    log_z: float
    probabilities: np.ndarray = field(init=False)

    def __post_init__(self):
        self.probabilities = np.exp(self.log_weights - self.log_z)

    @property
    def theta(self) -> np.ndarray:
        return self.twice_theta / 2.0

    def __getitem__(self, theta) -> float:
        tw = as_interface(theta).twice_value
        k = (tw + 2 * self.n + 1) // 2
        if not 0 <= k < len(self.twice_theta):
            return 0.0
        return float(self.probabilities[k])

    def as_dict(self) -> dict[InterfaceIndex, float]:
        return {InterfaceIndex(int(tw)): float(p) for tw, p in zip(self.twice_theta, self.probabilities)}


def _bucket_logsumexp(log_w: np.ndarray, bucket: np.ndarray, n_buckets: int) -> np.ndarray:
    peak = np.full(n_buckets, -np.inf)
    np.maximum.at(peak, bucket, log_w)
    shift = np.where(np.isfinite(peak), peak, 0.0)
    sums = np.bincount(bucket, weights=np.exp(log_w - shift[bucket]), minlength=n_buckets)
    with np.errstate(divide="ignore"):
        return np.log(sums) + shift


def psp_distribution(family: CouplingFamily, beta: float, n: int,
                     cap: int | None = None, workers: int = 1) -> PspDistribution:
    """Exact PSP law by enumerating all 2^(2n+1) configurations."""
    Volume(n).check_cap(cap)
    check_symmetry_or_warn(family, n)
    couplings = bond_couplings(family, n)
    n_buckets = 2 * n + 2

    def chunk(start: int, bits: np.ndarray) -> np.ndarray:
        bucket = (chunk_psp(bits) + 2 * n + 1) // 2
        log_w = -beta * chunk_energies(bits, couplings, PM)
        return _bucket_logsumexp(log_w, bucket, n_buckets)

    parts = map_chunks(chunk, n, workers)
    log_weights = parts[0]
    for p in parts[1:]:
        log_weights = np.logaddexp(log_weights, p)
    log_z = float(logsumexp(log_weights))
    twice = np.arange(-2 * n - 1, 2 * n + 2, 2)
    return PspDistribution(n, beta, family, twice, log_weights, log_z)


class Moments(NamedTuple):
    mean: float
    variance: float
    second_moment: float


def psp_moments(dist: PspDistribution) -> Moments:
    """Mean and variance from the full two-sided sum.

    ``second_moment`` is E[theta^2], which is at least 1/4 for every law on
    half-integers; the variance inherits that floor only when the mean is 0.
    """
    theta = dist.theta
    p = dist.probabilities
    mean = float(np.sum(theta * p))
    # theta^2 - 1/4 >= 0 termwise, so the floor survives rounding
    second = 0.25 + float(np.sum((theta ** 2 - 0.25) * p))
    return Moments(mean, second - mean ** 2, second)


def folded_variance(dist: PspDistribution) -> float:
    """2 * sum over theta > 0 of theta^2 P(theta); equals the variance only for
    a symmetric law."""
    theta = dist.theta
    right = theta > 0
    return float(2.0 * np.sum(theta[right] ** 2 * dist.probabilities[right]))


@dataclass(frozen=True)
class VarianceEnvelope:
    beta: float
    lower: float
    upper: float
    asymptotic: bool


def variance_envelope(beta: float, asymptotic_beta: float = 5.0) -> VarianceEnvelope:
    """Large-beta bounds on the PSP variance for I_n = n (n > 0), 1 - n (n <= 0).

    With tau = exp(-beta) and
        A = cosh(tau^2/(1-tau)) cosh(tau(1+tau)) - sinh(tau^2) sinh(tau(1+tau)),
    the upper bound is
        tau A cosh(tau^2/(1-tau)) / (2 sinh 2tau) * (1 + 3tau(tau+3)/(1-tau)^2).
    It is only asymptotic; ``asymptotic`` flags beta >= asymptotic_beta.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    tau = math.exp(-beta)
    c = math.cosh(tau * tau / (1 - tau))
    a = c * math.cosh(tau * (1 + tau)) - math.sinh(tau * tau) * math.sinh(tau * (1 + tau))
    upper = tau * a * c / (2 * math.sinh(2 * tau)) * (1 + 3 * tau * (tau + 3) / (1 - tau) ** 2)
    return VarianceEnvelope(beta, 0.25, upper, beta >= asymptotic_beta)


class TailSeries(NamedTuple):
    partial: float
    closed_bound_form: float
    closed_exact: float


def tail_series(tau: float, m_max: int) -> TailSeries:
    """sum_{m=1}^{m_max} (m + 1/2)^2 tau^m next to two closed forms.

    ``closed_bound_form`` is 3 tau (tau + 3) / (4 (1 - tau)^2), the expression
    used in the variance upper bound; ``closed_exact`` is the infinite sum
    tau(1+tau)/(1-tau)^3 + tau/(1-tau)^2 + tau/(4(1-tau)). They differ.
    """
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    m = np.arange(1, m_max + 1, dtype=float)
    partial = float(np.sum((m + 0.5) ** 2 * tau ** m))
    bound_form = 3 * tau * (tau + 3) / (4 * (1 - tau) ** 2)
    exact = tau * (1 + tau) / (1 - tau) ** 3 + tau / (1 - tau) ** 2 + tau / (4 * (1 - tau))
    return TailSeries(partial, bound_form, exact)


# ---------------------------------------------------------------------------
# Contours under the plus boundary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourQuery:
    """A run of sites [left, right] that should form a maximal -1 cluster."""

    left: int
    right: int

    def __post_init__(self):
        if self.left > self.right:
            raise ValueError("empty contour interval")

    def check(self, n: int) -> None:
        if self.left < -n or self.right > n:
            raise ValueError(f"contour [{self.left}, {self.right}] not inside [-{n}, {n}]")


class ContourResult(NamedTuple):
    p_plus: float
    bound: float


def contour_probability(family: CouplingFamily, beta: float, n: int, query: ContourQuery,
                        cap: int | None = None, workers: int = 1) -> ContourResult:
    """Plus-boundary probability that ``query`` is a maximal -1 cluster, and the
    bound exp(-beta (I_left + I_{right+1}))."""
    Volume(n).check_cap(cap)
    query.check(n)
    couplings = bond_couplings(family, n)
    lo, hi = query.left + n, query.right + n
    size = 2 * n + 1

    def chunk(start: int, bits: np.ndarray) -> tuple[float, float]:
        log_w = -beta * chunk_energies(bits, couplings, PLUS)
        mask = np.all(bits[:, lo:hi + 1] == 0, axis=1)
        if lo > 0:
            mask &= bits[:, lo - 1] == 1
        if hi < size - 1:
            mask &= bits[:, hi + 1] == 1
        hit = float(logsumexp(log_w[mask])) if mask.any() else -math.inf
        return hit, float(logsumexp(log_w))

    parts = map_chunks(chunk, n, workers)
    log_hit = _combine([p[0] for p in parts])
    log_z = _combine([p[1] for p in parts])
    bound = math.exp(-beta * (family(query.left) + family(query.right + 1)))
    return ContourResult(math.exp(log_hit - log_z), bound)


# ---------------------------------------------------------------------------
# Splitting P_n(theta) into left and right blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionRow:
    theta: InterfaceIndex
    exact: float
    joint: float
    product: float
    rarefied_bound: float

    @property
    def product_gap(self) -> float:
        return self.exact - self.product


@dataclass
class DecompositionReport:
    n: int
    beta: float
    rows: list[DecompositionRow]
    total_probability: float
    tol: float = 1e-12

    @property
    def joint_matches(self) -> bool:
        return all(abs(r.exact - r.joint) <= self.tol for r in self.rows)

    @property
    def bounded(self) -> bool:
        return all(r.exact <= r.rarefied_bound * (1 + self.tol) for r in self.rows)

    @property
    def max_product_gap(self) -> float:
        return max(abs(r.product_gap) for r in self.rows)

    @property
    def ok(self) -> bool:
        return self.joint_matches and self.bounded


def decomposition_check(family: CouplingFamily, beta: float, n: int,
                        cap: int | None = None, workers: int = 1) -> DecompositionReport:
    """For each theta >= 1/2 compare
    exact P_n(theta), the jointly filtered block sum, the product of separately
    filtered block sums and the unrestricted block bound, all normalised by
    the mixed-boundary partition function."""
    dist = psp_distribution(family, beta, n, cap, workers)
    log_z = dist.log_z
    rows = []
    for theta in interface_range(n):
        if theta.twice_value < 1:
            continue
        bridge = -beta * family((theta.twice_value + 1) // 2)
        crystal = crystal_partitions(family, beta, n, theta, cap, workers)

        def prob(*parts: PartitionValue | None) -> float:
            if any(p is None for p in parts):
                return 0.0
            return math.exp(bridge + sum(p.log_value for p in parts) - log_z)

        left = rarefied_left(family, beta, n, theta).aligned
        right = rarefied_right(family, beta, n, theta).aligned
        rows.append(DecompositionRow(
            theta=theta,
            exact=dist[theta],
            joint=prob(crystal.joint),
            product=prob(crystal.left, crystal.right),
            rarefied_bound=prob(left, right),
        ))
    return DecompositionReport(n, beta, rows, float(np.sum(dist.probabilities)))

