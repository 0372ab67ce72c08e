"""Built-in invariant suite behind ``pspchain verify``.

Each check returns (passed, detail). ``CHECKS`` is the coverage manifest:
every property the package promises at small volume appears here once.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chain import (
    MINUS,
    MP,
    PLUS,
    PM,
    SpinConfiguration,
    all_configurations,
    energy,
    energy_pm,
    map_S,
    map_U,
    map_V,
    chunk_psp,
    unpack_bits,
)
from .couplings import CouplingFamily, validate_growth_condition, validate_reflection_symmetry
from .partition import (
    brute_force_partition,
    closed_form_partition,
    crystal_partitions,
    rarefied_left,
    rarefied_left_recursive,
    rarefied_right,
    rarefied_right_recursive,
    recursive_partition,
)
from .psp import (
    ContourQuery,
    contour_probability,
    decomposition_check,
    majority_class,
    norm_maximizers,
    psp,
    psp_distribution,
    psp_moments,
    psp_necessary_conditions,
)

BETAS = (0.5, 1.0, 2.0)
SAMPLE_CONFIG = SpinConfiguration((-1, -1, 1, -1, 1))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


class Context:
    def __init__(self, n_max: int = 4, family: CouplingFamily | None = None):
        self.n_max = n_max
        self.family = family or CouplingFamily.sullivan()

    @property
    def volumes(self) -> range:
        return range(self.n_max + 1)

    def configs(self):
        for n in self.volumes:
            yield from all_configurations(n)


def check_coupling_conditions(ctx: Context):
    growth = validate_growth_condition(ctx.family, (-10, 10), 10)
    sym = validate_reflection_symmetry(ctx.family, (-10, 10))
    return growth.ok and sym.ok, f"growth violations {len(growth.violations)}, symmetry violations {len(sym.violations)}"


def check_mixed_energy_identity(ctx: Context):
    worst = max(abs(energy_pm(c, ctx.family) - energy(c, ctx.family, PM)) for c in ctx.configs())
    return worst == 0.0, f"max |H+- - H(PM)| = {worst:g}"


def check_reflection_flip_invariance(ctx: Context):
    bad = 0
    for c in ctx.configs():
        e = energy_pm(c, ctx.family)
        bad += energy_pm(map_S(c), ctx.family) != e
        for bc in (PLUS, MINUS, PM, MP):
            h = energy(c, ctx.family, bc)
            bad += energy(map_U(c), ctx.family, bc.flipped()) != h
            bad += energy(map_V(c), ctx.family, bc.reflected()) != h
    return bad == 0, f"{bad} configurations break the symmetry"


def check_psp_antisymmetry(ctx: Context):
    bad = sum(psp(map_S(c)) != -psp(c) for c in ctx.configs())
    swaps = sum(majority_class(map_S(c)) == majority_class(c) for c in ctx.configs())
    return bad == 0 and swaps == 0, f"{bad} antisymmetry failures, {swaps} class non-swaps"


def check_vector_psp_kernel(ctx: Context):
    bad = 0
    for n in ctx.volumes:
        fast = chunk_psp(unpack_bits(0, 1 << (2 * n + 1), n))
        slow = [psp(c).twice_value for c in all_configurations(n)]
        bad += int(np.sum(fast != np.array(slow)))
    return bad == 0, f"{bad} mismatches between vectorised and direct PSP"


def check_psp_law_symmetry(ctx: Context):
    worst = 0.0
    for n, beta in itertools.product(ctx.volumes, BETAS):
        p = psp_distribution(ctx.family, beta, n).probabilities
        worst = max(worst, float(np.max(np.abs(p - p[::-1]))))
    return worst <= 1e-12, f"max |P(t) - P(-t)| = {worst:.3g}"


def check_psp_zero_mean(ctx: Context):
    worst = max(abs(psp_moments(psp_distribution(ctx.family, beta, n)).mean)
                for n, beta in itertools.product(ctx.volumes, BETAS))
    return worst <= 1e-12, f"max |mean| = {worst:.3g}"


def check_normalisation(ctx: Context):
    worst = max(abs(psp_distribution(ctx.family, beta, n).probabilities.sum() - 1.0)
                for n, beta in itertools.product(ctx.volumes, BETAS))
    return worst <= 1e-12, f"max |sum P - 1| = {worst:.3g}"


def check_necessary_conditions(ctx: Context):
    bad = sum(not psp_necessary_conditions(c, psp(c)).satisfied for c in ctx.configs())
    maxima = [t.value for t in norm_maximizers(SAMPLE_CONFIG)]
    sample_ok = maxima == [-0.5, 1.5] and psp(SAMPLE_CONFIG).value == 1.5
    return bad == 0 and sample_ok, f"{bad} failures; sample maximizers {maxima}"


def check_contour_bound(ctx: Context):
    worst = -math.inf
    for n, beta in itertools.product(ctx.volumes, BETAS):
        for a in range(-n, n + 1):
            for b in range(a, n + 1):
                p, bound = contour_probability(ctx.family, beta, n, ContourQuery(a, b))
                worst = max(worst, p - bound)
    return worst <= 0.0, f"max p - bound = {worst:.3g}"


def check_crystal_below_rarefied(ctx: Context):
    bad = 0
    for n, beta in itertools.product(ctx.volumes, BETAS):
        for tw in range(1, 2 * n + 2, 2):
            cr = crystal_partitions(ctx.family, beta, n, tw / 2)
            left = rarefied_left(ctx.family, beta, n, tw / 2).aligned
            right = rarefied_right(ctx.family, beta, n, tw / 2).aligned
            bad += cr.left is not None and cr.left.log_value > left.log_value + 1e-12
            bad += cr.right is not None and cr.right.log_value > right.log_value + 1e-12
    return bad == 0, f"{bad} crystal sums above their block bound"


def check_decomposition(ctx: Context):
    reports = [decomposition_check(ctx.family, beta, n)
               for n, beta in itertools.product(ctx.volumes, BETAS)]
    ok = all(r.ok for r in reports)
    gap = max(r.max_product_gap for r in reports)
    return ok, f"joint sums exact and bounded; largest product-form gap {gap:.3g}"


def check_partition_oracles(ctx: Context):
    worst = 0.0
    for n, beta in itertools.product(ctx.volumes, (0.25, 1.0, 4.0)):
        closed = closed_form_partition(ctx.family, beta, n)
        rec = recursive_partition(ctx.family, beta, n)[-1]
        plus = brute_force_partition(ctx.family, beta, n, PLUS)
        mixed = brute_force_partition(ctx.family, beta, n, PM)
        worst = max(worst,
                    abs(closed.plus.log_value - plus.log_value),
                    abs(closed.mixed.log_value - mixed.log_value),
                    abs(closed.plus.log_value - rec.plus.log_value),
                    abs(closed.mixed.log_value - rec.mixed.log_value))
    return worst <= 1e-10, f"max log disagreement {worst:.3g}"


def check_boundary_swap(ctx: Context):
    worst = 0.0
    for n, beta in itertools.product(ctx.volumes, BETAS):
        worst = max(worst,
                    abs(brute_force_partition(ctx.family, beta, n, MINUS).log_value
                        - brute_force_partition(ctx.family, beta, n, PLUS).log_value),
                    abs(brute_force_partition(ctx.family, beta, n, MP).log_value
                        - brute_force_partition(ctx.family, beta, n, PM).log_value))
    return worst <= 1e-12, f"max log difference {worst:.3g}"


def check_rarefied_recursions(ctx: Context):
    worst = 0.0
    for n, beta in itertools.product(ctx.volumes, BETAS):
        for tw in range(1, 2 * n + 2, 2):
            pairs = [(rarefied_left(ctx.family, beta, n, tw / 2),
                      rarefied_left_recursive(ctx.family, beta, n, tw / 2))]
            if tw <= 2 * n - 1:
                pairs.append((rarefied_right(ctx.family, beta, n, tw / 2),
                              rarefied_right_recursive(ctx.family, beta, n, tw / 2)))
            for a, b in pairs:
                worst = max(worst, abs(a.aligned.log_value - b.aligned.log_value),
                            abs(a.flipped.log_value - b.flipped.log_value))
    return worst <= 1e-12, f"max log disagreement {worst:.3g}"


def check_variance_floor(ctx: Context):
    symmetric = [ctx.family, CouplingFamily.constant(1.0),
                 CouplingFamily.from_table({1: 0.5, 2: 1.5, 3: 0.75, 4: 2.0, 5: 1.0}, symmetric=True)]
    worst_var = min(psp_moments(psp_distribution(fam, beta, n)).variance
                    for fam, n, beta in itertools.product(symmetric, ctx.volumes, BETAS + (10.0,)))
    with warnings.catch_warnings():
        # the |n| family is asymmetric at the centre: only E[theta^2] keeps the floor
        warnings.simplefilter("ignore")
        worst_second = min(psp_moments(psp_distribution(CouplingFamily.absolute_value(), beta, n)).second_moment
                           for n, beta in itertools.product(ctx.volumes, BETAS + (10.0,)))
    ok = worst_var >= 0.25 - 1e-12 and worst_second >= 0.25 - 1e-12
    return ok, f"smallest variance (symmetric couplings) {worst_var:.6g}, smallest E[theta^2] (|n|) {worst_second:.6g}"


CHECKS: list[tuple[str, Callable[[Context], tuple[bool, str]]]] = [
    ("coupling-conditions", check_coupling_conditions),
    ("mixed-energy-identity", check_mixed_energy_identity),
    ("reflection-flip-invariance", check_reflection_flip_invariance),
    ("psp-antisymmetry", check_psp_antisymmetry),
    ("vectorised-psp-kernel", check_vector_psp_kernel),
    ("psp-law-symmetry", check_psp_law_symmetry),
    ("psp-zero-mean", check_psp_zero_mean),
    ("psp-normalisation", check_normalisation),
    ("psp-necessary-conditions", check_necessary_conditions),
    ("contour-bound", check_contour_bound),
    ("crystal-below-rarefied", check_crystal_below_rarefied),
    ("psp-block-decomposition", check_decomposition),
    ("partition-oracles", check_partition_oracles),
    ("boundary-swap-symmetry", check_boundary_swap),
    ("rarefied-recursions", check_rarefied_recursions),
    ("variance-floor", check_variance_floor),
]


def run_checks(n_max: int = 4, only: list[str] | None = None) -> list[CheckResult]:
    ctx = Context(n_max)
    results = []
    for name, fn in CHECKS:
        if only and name not in only:
            continue
        try:
            passed, detail = fn(ctx)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail))
    return results
