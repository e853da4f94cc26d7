"""Self-checks of the max-ent machinery against independent oracles.

Used by the ``maxent-check`` command. Each check returns a :class:`CheckResult`.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

import mpmath
from scipy import integrate

from .statmech import (
    EnergyLevel,
    MaxEntProblem,
    gibbs_occupancy,
    log_omega_stirling,
    microstate_count,
    partition_continuum,
    partition_discrete,
    solve_multipliers,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def continuum_quadrature(beta: float, e_unit: float) -> float:
    """Numerically integrate k exp(-beta k e_unit) over [0, inf)."""
    rate = beta * e_unit
    # cut where the integrand drops below 1e-18
    upper = 1.0
    while upper * math.exp(-rate * upper) >= 1e-18 or upper * rate < 1:
        upper *= 2
    value, _ = integrate.quad(lambda k: k * math.exp(-rate * k), 0.0, upper, epsabs=0, epsrel=1e-12, limit=500)
    return value


def check_quadrature(grid=(0.1, 1.0, 10.0), rtol=1e-6) -> CheckResult:
    worst = 0.0
    for beta, e in itertools.product(grid, grid):
        exact = partition_continuum(beta, e)
        worst = max(worst, abs(continuum_quadrature(beta, e) - exact) / exact)
    return CheckResult("continuum-quadrature", worst <= rtol, f"max relative error {worst:.3e}")


def check_normalization(trials=200, seed=0, rtol=1e-12) -> CheckResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        levels = [EnergyLevel(rng.uniform(0.1, 10), rng.uniform(0, 5)) for _ in range(rng.randint(1, 12))]
        beta = rng.uniform(-3, 3)
        n = rng.uniform(1, 1e4)
        a = n / partition_discrete(levels, beta)
        total = math.fsum(gibbs_occupancy(a, beta, lv) for lv in levels)
        worst = max(worst, abs(total - n) / n)
    return CheckResult("gibbs-normalization", worst <= rtol, f"max relative error {worst:.3e}")


def compositions(n: int, parts: int):
    for cuts in itertools.combinations(range(n + parts - 1), parts - 1):
        bounds = (-1,) + cuts + (n + parts - 1,)
        yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(parts))


def omega_maximizers(levels, n: int, u: float) -> list[tuple[int, ...]]:
    """All integer compositions of n with energy u that maximize ln(Omega)."""
    feasible = [c for c in compositions(n, len(levels)) if math.isclose(sum(x * lv.e for x, lv in zip(c, levels)), u, abs_tol=1e-9)]
    scores = {c: microstate_count(levels, c) for c in feasible}
    best = max(scores.values())
    return [c for c, s in scores.items() if s >= best - 1e-12]


def enumeration_cases(ks=(1, 2, 3), energies=(0.0, 1.0, 2.0), node_counts=(4, 6, 8)):
    """Every 3-level instance and every interior integer energy total."""
    for k in itertools.product(ks, repeat=len(energies)):
        levels = [EnergyLevel(ki, ei) for ki, ei in zip(k, energies)]
        for n in node_counts:
            totals = sorted({sum(x * e for x, e in zip(c, energies)) for c in compositions(n, len(energies))})
            for u in totals[1:-1]:
                yield levels, n, u


def check_enumeration() -> CheckResult:
    bad = []
    count = 0
    for levels, n, u in enumeration_cases():
        count += 1
        sol = solve_multipliers(MaxEntProblem(levels, n, u))
        rounded = [round(x) for x in sol.occupancies]
        best = omega_maximizers(levels, n, u)
        if not any(all(abs(r - b) <= 1 for r, b in zip(rounded, c)) for c in best):
            bad.append((tuple(lv.k for lv in levels), n, u))
    return CheckResult("enumeration-oracle", not bad, f"{count - len(bad)}/{count} instances agree" + (f"; first mismatch {bad[0]}" if bad else ""))


def stirling_gap(levels, occupancies, precision=40):
    """Stirling form minus the dropped sqrt(2 pi N) terms minus the exact count."""
    with mpmath.workdps(precision):
        sqrt_terms = mpmath.fsum(mpmath.log(2 * mpmath.pi * x) / 2 for x in occupancies)
        bound = mpmath.fsum(mpmath.mpf(1) / (12 * x) for x in occupancies)
        gap = log_omega_stirling(levels, occupancies, precision) - sqrt_terms - microstate_count(levels, occupancies, precision)
        return gap, bound


def check_stirling(trials=100, seed=1) -> CheckResult:
    rng = random.Random(seed)
    failures = 0
    for _ in range(trials):
        m = rng.randint(1, 5)
        levels = [EnergyLevel(rng.uniform(0.5, 50), 0.0) for _ in range(m)]
        occ = [rng.randint(1, 10_000) for _ in range(m)]
        gap, bound = stirling_gap(levels, occ)
        if not 0 < gap < bound:
            failures += 1
    return CheckResult("stirling-remainder", failures == 0, f"{trials - failures}/{trials} instances inside bounds")


def run_all() -> list[CheckResult]:
    return [check_quadrature(), check_normalization(), check_enumeration(), check_stirling()]
