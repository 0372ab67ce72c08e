"""Exact and Monte Carlo tools for the one-dimensional Ising chain with
site-dependent nearest-neighbour couplings and its phase separation point."""

__version__ = "0.1.0"

from .chain import (
    MINUS,
    MP,
    PLUS,
    PM,
    BoundaryCondition,
    InterfaceIndex,
    SpinConfiguration,
    Volume,
    energy,
    energy_pm,
    map_S,
    map_U,
    map_V,
)
from .couplings import (
    CouplingFamily,
    coupling_value,
    parse_family,
    summability_diagnostic,
    validate_growth_condition,
    validate_reflection_symmetry,
)
from .errors import CapExceededError, CouplingRangeError, SymmetryConditionError
from .partition import (
    PartitionPair,
    PartitionValue,
    RarefiedPair,
    brute_force_partition,
    closed_form_partition,
    crystal_partitions,
    ising_ratio,
    ising_ratio_excess,
    rarefied_left,
    rarefied_right,
    recursive_partition,
)
from .psp import (
    ContourQuery,
    MajorityClass,
    PspDistribution,
    contour_probability,
    decomposition_check,
    interface_points,
    interface_stats,
    psp,
    psp_distribution,
    psp_moments,
    psp_necessary_conditions,
    tail_series,
    variance_envelope,
)
from .sampler import ChainState, estimate_psp_distribution, heat_bath_sweep
