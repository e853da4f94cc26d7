"""Maximum-entropy occupancy of connectivity/energy levels and the NE^2 metrics.

A level is a pair ``(k, e)``: a connectivity level k holding nodes that each
spent energy e. The most probable occupancy under fixed node count N and
fixed total energy U is the Gibbs form ``N_i = A k_i exp(-beta e_i)`` with
``A = N / Z(beta)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import mpmath

from .core import DomainError, RadioParams, energy_cost


class InfeasibleError(DomainError):
    """The requested total energy cannot be reached by any occupancy."""


class BoundaryError(DomainError):
    """The requested total energy sits on the feasibility boundary (|beta| -> inf)."""


class UndefinedQError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class EnergyLevel:
    k: float
    e: float

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"connectivity level k must be > 0, got {self.k}")
        if not self.e >= 0:
            raise DomainError(f"level energy must be >= 0, got {self.e}")

    @classmethod
    def from_radio(cls, k: float, d: float, params: RadioParams) -> EnergyLevel:
        """Level whose energy is k single-connection transmissions over d meters."""
        return cls(k, k * energy_cost(params.msg_bits, d, params))


@dataclass(frozen=True)
class MaxEntProblem:
    levels: tuple[EnergyLevel, ...]
    n_total: float
    u_total: float

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise DomainError("at least one level is required")
        if not self.n_total > 0:
            raise DomainError(f"n_total must be > 0, got {self.n_total}")


@dataclass(frozen=True)
class MaxEntSolution:
    a: float
    beta: float
    z: float
    occupancies: tuple[float, ...]


@dataclass(frozen=True)
class ClassStats:
    n_total: int
    n_ch: int
    n_normal: int
    e_total: float
    e_ch: float
    e_normal: float

    def __post_init__(self):
        if min(self.n_total, self.n_ch, self.n_normal) < 0:
            raise DomainError("class counts must be >= 0")
        if min(self.e_total, self.e_ch, self.e_normal) < 0:
            raise DomainError("class energies must be >= 0")


class QMode(enum.Enum):
    AS_WRITTEN = "as-written"
    TABLE_CONVENTION = "table"


@lru_cache(maxsize=4096)
def log_factorial(n: int) -> float:
    """Exact ln(n!) as a compensated sum of logarithms."""
    if n < 0 or int(n) != n:
        raise DomainError(f"log_factorial needs a non-negative integer, got {n}")
    return math.fsum(math.log(i) for i in range(2, int(n) + 1))


@lru_cache(maxsize=4096)
def _log_factorial_mp(n: int, precision: int):
    with mpmath.workdps(precision):
        return +mpmath.log(mpmath.mpf(math.factorial(n)))


def _check_aligned(levels, occupancies):
    if len(levels) != len(occupancies):
        raise DomainError(f"{len(levels)} levels but {len(occupancies)} occupancies")


def microstate_count(levels: Sequence[EnergyLevel], occupancies: Sequence[int], precision: int | None = None):
    """ln of the number of ways to place N_i nodes on k_i connections per level.

    With ``precision`` (decimal digits) the sum is carried out in mpmath from
    exact integer factorials and an ``mpf`` is returned; float64 cannot
    resolve differences below ~1e-11 once ln(Omega) reaches 1e5.
    """
    _check_aligned(levels, occupancies)
    for n in occupancies:
        if n < 0 or int(n) != n:
            raise DomainError(f"occupancies must be non-negative integers, got {n}")
    if precision is not None:
        with mpmath.workdps(precision):
            return mpmath.fsum(
                int(n) * mpmath.log(mpmath.mpf(lv.k)) - _log_factorial_mp(int(n), precision)
                for lv, n in zip(levels, occupancies)
            )
    return math.fsum(n * math.log(lv.k) - log_factorial(int(n)) for lv, n in zip(levels, occupancies))


def log_omega_stirling(levels: Sequence[EnergyLevel], occupancies: Sequence[float], precision: int | None = None):
    """Crude Stirling form ``sum N_i ln(k_i/N_i) + N``."""
    _check_aligned(levels, occupancies)
    if any(not n > 0 for n in occupancies):
        raise DomainError("Stirling form is singular for empty levels")
    if precision is not None:
        with mpmath.workdps(precision):
            occ = [mpmath.mpf(n) for n in occupancies]
            return mpmath.fsum(n * mpmath.log(mpmath.mpf(lv.k) / n) for lv, n in zip(levels, occ)) + mpmath.fsum(occ)
    return math.fsum(n * math.log(lv.k / n) for lv, n in zip(levels, occupancies)) + math.fsum(occupancies)


def gibbs_occupancy(a: float, beta: float, level: EnergyLevel) -> float:
    return a * level.k * math.exp(-beta * level.e)


def partition_discrete(levels: Sequence[EnergyLevel], beta: float) -> float:
    if not math.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta}")
    return math.fsum(lv.k * math.exp(-beta * lv.e) for lv in levels)


def partition_continuum(beta: float, e_unit: float) -> float:
    """Closed form of the integral of k exp(-beta k e_unit) over k in [0, inf)."""
    if not beta > 0:
        raise DomainError(f"continuum partition function diverges for beta={beta}")
    if not e_unit > 0:
        raise DomainError(f"continuum partition function diverges for e_unit={e_unit}")
    return 1.0 / (beta * e_unit) ** 2


def mean_level_energy(levels: Sequence[EnergyLevel], beta: float) -> float:
    """Gibbs-weighted mean energy per node; U(beta) = N * this."""
    # shift by the energy that dominates at this sign of beta to avoid overflow
    ref = min(lv.e for lv in levels) if beta >= 0 else max(lv.e for lv in levels)
    weights = [lv.k * math.exp(-beta * (lv.e - ref)) for lv in levels]
    return math.fsum(w * lv.e for w, lv in zip(weights, levels)) / math.fsum(weights)


def solve_multipliers(problem: MaxEntProblem, max_iter: int = 2000) -> MaxEntSolution:
    """Find (A, beta) meeting both the node-count and energy constraints.

    U(beta) is strictly decreasing, so beta is located by bisection on a
    bracket grown geometrically from [-64, 64].
    """
    levels = problem.levels
    energies = [lv.e for lv in levels]
    e_min, e_max = min(energies), max(energies)
    if e_min == e_max:
        raise DomainError("need at least two distinct level energies")
    n, u = problem.n_total, problem.u_total
    if u < e_min * n or u > e_max * n:
        raise InfeasibleError(f"U={u} outside feasible range [{e_min * n}, {e_max * n}]")
    if u == e_min * n or u == e_max * n:
        raise BoundaryError(f"U={u} is on the feasibility boundary; beta diverges")

    def excess(beta):
        return n * mean_level_energy(levels, beta) - u

    tol = 1e-9 * max(1.0, abs(u))
    lo, hi = -64.0, 64.0
    while excess(lo) < 0:
        lo *= 2
        if lo < -1e300:
            raise BoundaryError("bracket growth failed (target too close to boundary)")
    while excess(hi) > 0:
        hi *= 2
        if hi > 1e300:
            raise BoundaryError("bracket growth failed (target too close to boundary)")

    beta = 0.5 * (lo + hi)
    for _ in range(max_iter):
        beta = 0.5 * (lo + hi)
        f = excess(beta)
        if abs(f) <= tol or beta in (lo, hi):
            break
        if f > 0:
            lo = beta
        else:
            hi = beta

    z = partition_discrete(levels, beta)
    a = n / z
    occupancies = tuple(gibbs_occupancy(a, beta, lv) for lv in levels)
    return MaxEntSolution(a=a, beta=beta, z=z, occupancies=occupancies)


def ne2_product(n: float, e: float) -> float:
    if n < 0 or e < 0:
        raise DomainError("ne2_product needs n >= 0 and e >= 0")
    return n * e * e


def _class_sum(stats: ClassStats) -> float:
    return ne2_product(stats.n_ch, stats.e_ch) + ne2_product(stats.n_normal, stats.e_normal)


def conservation_residual(stats: ClassStats) -> float:
    """Whole-network N E^2 minus the sum of the per-class N E^2 terms."""
    return ne2_product(stats.n_total, stats.e_total) - _class_sum(stats)


def q_factor(stats: ClassStats, mode: QMode = QMode.TABLE_CONVENTION) -> float:
    """Ratio of class-wise to whole-network N E^2.

    ``AS_WRITTEN`` divides the class sum by the whole-network product;
    ``TABLE_CONVENTION`` is its reciprocal, which is the orientation of the
    published Q columns.
    """
    whole = ne2_product(stats.n_total, stats.e_total)
    parts = _class_sum(stats)
    if stats.n_total == 0:
        raise UndefinedQError("Q undefined: n_total is zero")
    if stats.e_total == 0:
        raise UndefinedQError("Q undefined: e_total is zero")
    if mode is QMode.AS_WRITTEN:
        return parts / whole
    if parts == 0:
        raise UndefinedQError("Q undefined: class-wise N*E^2 sum is zero")
    return whole / parts
