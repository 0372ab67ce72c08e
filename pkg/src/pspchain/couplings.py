"""Coupling families n -> I_n and checks on them.

A family maps every bond index to the energy penalty paid when the two spins
joined by bond ``(n - 1, n)`` disagree.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import CouplingRangeError

CONSTANT = "constant"
ABSOLUTE = "absolute-value"
SULLIVAN = "sullivan"
TABLE = "table"


@dataclass(frozen=True)
class CouplingFamily:
    """Nearest-neighbour couplings on the integer chain.

    Use the constructors (:meth:`constant`, :meth:`absolute_value`,
    :meth:`sullivan`, :meth:`from_table`) rather than building one directly.
    """

    kind: str
    value: float = 0.0
    entries: tuple[tuple[int, float], ...] = ()
    symmetric: bool = False
    _lookup: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in (CONSTANT, ABSOLUTE, SULLIVAN, TABLE):
            raise ValueError(f"unknown coupling family kind {self.kind!r}")
        if self.kind == TABLE:
            object.__setattr__(self, "_lookup", dict(self.entries))

    @classmethod
    def constant(cls, value: float) -> CouplingFamily:
        return cls(CONSTANT, value=float(value))

    @classmethod
    def absolute_value(cls) -> CouplingFamily:
        return cls(ABSOLUTE)

    @classmethod
    def sullivan(cls) -> CouplingFamily:
        """I_n = n for n > 0 and 1 - n for n <= 0."""
        return cls(SULLIVAN)

    @classmethod
    def from_table(cls, entries: Mapping[int, float], symmetric: bool = False) -> CouplingFamily:
        """Build a table family.

        With ``symmetric=True`` a missing index k falls back to the stored
        value at ``1 - k``; otherwise a missing index raises
        :class:`CouplingRangeError`.
        """
        items = tuple(sorted((int(k), float(v)) for k, v in entries.items()))
        return cls(TABLE, entries=items, symmetric=symmetric)

    def __call__(self, index: int) -> float:
        index = int(index)
        if self.kind == CONSTANT:
            return self.value
        if self.kind == ABSOLUTE:
            return float(abs(index))
        if self.kind == SULLIVAN:
            return float(index if index > 0 else 1 - index)
        table = self._lookup
        if index in table:
            return table[index]
        if self.symmetric and (1 - index) in table:
            return table[1 - index]
        raise CouplingRangeError(f"coupling index {index} outside table")

    def values(self, lo: int, hi: int) -> np.ndarray:
        """Couplings I_lo, ..., I_hi (inclusive) as a float array."""
        return np.array([self(k) for k in range(lo, hi + 1)], dtype=float)

    @property
    def label(self) -> str:
        if self.kind == CONSTANT:
            return f"const:{self.value:g}"
        if self.kind == ABSOLUTE:
            return "abs"
        if self.kind == SULLIVAN:
            return "sullivan25"
        return "table" + (";sym8" if self.symmetric else "")


def coupling_value(family: CouplingFamily, index: int) -> float:
    return family(index)


def parse_family(spec: str) -> CouplingFamily:
    """Parse a family spec string: ``const:<I>``, ``abs``, ``sullivan25`` or
    ``table:<path>[;sym8]``."""
    spec = spec.strip()
    if spec == "abs":
        return CouplingFamily.absolute_value()
    if spec == "sullivan25":
        return CouplingFamily.sullivan()
    if spec.startswith("const:"):
        try:
            value = float(spec[len("const:"):])
        except ValueError:
            raise ValueError(f"bad constant in family spec {spec!r}") from None
        if not math.isfinite(value):
            raise ValueError(f"constant coupling must be finite: {spec!r}")
        return CouplingFamily.constant(value)
    if spec.startswith("table:"):
        body = spec[len("table:"):]
        symmetric = body.endswith(";sym8")
        if symmetric:
            body = body[: -len(";sym8")]
        return CouplingFamily.from_table(read_table(body), symmetric=symmetric)
    raise ValueError(f"unrecognised family spec {spec!r}")


def read_table(path: str | Path) -> dict[int, float]:
    """Read a two-column (index, value) CSV; a non-numeric first row is a header."""
    entries: dict[int, float] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno + 1}: expected 2 columns, got {len(row)}")
            try:
                index, value = int(row[0]), float(row[1])
            except ValueError:
                if lineno == 0:
                    continue
                raise ValueError(f"{path}:{lineno + 1}: non-numeric row {row}") from None
            if index in entries:
                raise ValueError(f"{path}:{lineno + 1}: duplicate index {index}")
            entries[index] = value
    if not entries:
        raise ValueError(f"{path}: empty coupling table")
    return entries


@dataclass
class ValidationReport:
    condition: str
    window: tuple[int, int]
    violations: list = field(default_factory=list)
    undefined: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.undefined


def _safe(family: CouplingFamily, k: int, undefined: list[int]) -> float | None:
    try:
        return family(k)
    except CouplingRangeError:
        if k not in undefined:
            undefined.append(k)
        return None


def validate_growth_condition(family: CouplingFamily, n_range: tuple[int, int], r_max: int) -> ValidationReport:
    """Scan for pairs (n, r) with ``I_n + I_{n+r} < r``, 1 <= r <= r_max."""
    lo, hi = n_range
    report = ValidationReport("I_n + I_{n+r} >= r", (lo, hi))
    for n in range(lo, hi + 1):
        a = _safe(family, n, report.undefined)
        for r in range(1, r_max + 1):
            b = _safe(family, n + r, report.undefined)
            if a is not None and b is not None and a + b < r:
                report.violations.append((n, r))
    return report


def validate_reflection_symmetry(family: CouplingFamily, n_range: tuple[int, int]) -> ValidationReport:
    """Scan for indices n with ``I_n != I_{1-n}``."""
    lo, hi = n_range
    report = ValidationReport("I_n == I_{1-n}", (lo, hi))
    for n in range(lo, hi + 1):
        a = _safe(family, n, report.undefined)
        b = _safe(family, 1 - n, report.undefined)
        if a is not None and b is not None and a != b:
            report.violations.append(n)
    return report


@dataclass
class SummabilityReport:
    beta: float
    partial_sums: np.ndarray
    tail_ratio: float
    converges: bool
    limit_estimate: float

    def __str__(self) -> str:
        verdict = "converges" if self.converges else "diverges"
        return (f"sum exp(-2 beta I_n), n<={len(self.partial_sums)}: "
                f"{self.partial_sums[-1]:.12g} ({verdict}, tail ratio {self.tail_ratio:.6g})")


def summability_diagnostic(family: CouplingFamily, beta: float, N: int, ratio_tol: float = 1e-9) -> SummabilityReport:
    """Partial sums of exp(-2*beta*I_n) for n = 1..N with a ratio-test verdict.

    The tail ratio is the geometric mean of the last few successive term
    ratios; below ``1 - ratio_tol`` the series is flagged convergent and the
    limit is extrapolated as a geometric tail.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    terms = np.exp(-2.0 * beta * family.values(1, N))
    partial = np.cumsum(terms)
    window = terms[-min(N, 6):]
    positive = window[window > 0]
    if len(positive) >= 2:
        ratio = float(np.exp(np.mean(np.diff(np.log(positive)))))
    else:
        # all tail terms underflowed: treat as summable
        ratio = 0.0
    converges = ratio < 1.0 - ratio_tol
    if converges:
        limit = float(partial[-1] + terms[-1] * ratio / (1.0 - ratio))
    else:
        limit = math.inf
    return SummabilityReport(beta, partial, ratio, converges, limit)

