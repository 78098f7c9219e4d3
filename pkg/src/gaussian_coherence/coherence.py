"""Bures and Hellinger coherence of one-mode Gaussian states.

The coherence of a state is one minus the largest square-root fidelity (or
square-root affinity) it attains against any thermal state. The thermal
family is one-dimensional, parametrized by its occupation ``ni >= 0``, so the
maximization is a scalar search: a log-spaced scan followed by golden-section
refinement of every promising bracket.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import metrics
from .errors import NonMonotoneError
from .states import (
    Family,
    GaussianState,
    estimated_thermal_occupation,
    family_state,
    require_physical,
    thermal_state,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

#: Number of local maxima of the coarse scan that get refined.
MAX_BRACKETS = 3


class Measure(str, enum.Enum):
    BURES = "bures"
    HELLINGER = "hellinger"


@dataclass(frozen=True)
class OptimizerOptions:
    grid_lo: float = 1e-8
    grid_hi: float = 1e12
    points_per_decade: int = 8
    value_tol: float = 1e-12
    domain_tol: float = 1e-10
    max_iters: int = 200

    def __post_init__(self):
        if not 0 < self.grid_lo < self.grid_hi:
            raise ValueError("need 0 < grid_lo < grid_hi")
        if self.points_per_decade < 1 or self.max_iters < 1:
            raise ValueError("points_per_decade and max_iters must be positive")
        if self.value_tol <= 0 or self.domain_tol <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_OPTIONS = OptimizerOptions()


@dataclass(frozen=True)
class CoherenceResult:
    value: float
    argmax_ni: float
    objective_at_max: float
    evaluations: int
    converged: bool


def objective(s: GaussianState, ni: float, m: Measure) -> float:
    """sqrt(F) or sqrt(A) between ``s`` and the thermal state of occupation ``ni``."""
    reference = thermal_state(ni)
    if Measure(m) is Measure.BURES:
        return math.sqrt(metrics.fidelity(s, reference))
    return math.sqrt(metrics.affinity(s, reference))


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, xtol: float, max_iters: int
) -> tuple[float, float, bool]:
    """Maximize ``f`` on [lo, hi] assuming unimodality.

    Returns (x, f(x), converged); converged means the bracket shrank below
    ``xtol`` within ``max_iters`` iterations.
    """
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iters):
        if hi - lo <= xtol:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    converged = hi - lo <= xtol
    return (c, fc, converged) if fc >= fd else (d, fd, converged)


def _scan_points(s: GaussianState, opts: OptimizerOptions) -> list[float]:
    guess = estimated_thermal_occupation(s)
    hi = max(opts.grid_hi, 10.0 * guess)
    decades = math.log10(hi) - math.log10(opts.grid_lo)
    count = int(math.ceil(decades * opts.points_per_decade)) + 1
    grid = np.logspace(math.log10(opts.grid_lo), math.log10(hi), count)
    return sorted({0.0, guess, *map(float, grid)})


def _local_maxima(values: Sequence[float], value_tol: float) -> list[int]:
    # Runs of values equal within value_tol count as one plateau; its middle
    # index stands for it.
    peaks = []
    i, n = 0, len(values)
    while i < n:
        j = i
        while j + 1 < n and abs(values[j + 1] - values[i]) <= value_tol:
            j += 1
        left_ok = i == 0 or values[i - 1] < values[i]
        right_ok = j == n - 1 or values[j + 1] < values[j]
        if left_ok and right_ok:
            peaks.append((i + j) // 2)
        i = j + 1
    peaks.sort(key=lambda k: values[k], reverse=True)
    return peaks[:MAX_BRACKETS]


def maximize_over_thermal(
    s: GaussianState, m: Measure, opts: OptimizerOptions = DEFAULT_OPTIONS
) -> CoherenceResult:
    """Largest objective over thermal occupations ni >= 0.

    The scan covers 0, a log grid on [grid_lo, grid_hi] (stretched upward to
    ten times the state's own thermal occupation when that is larger), and
    the occupation (a + b - 1)/2 read off the covariance matrix. Each of the
    best local maxima is refined by golden section on its neighbouring grid
    points, in log(ni) when the bracket excludes zero.
    """
    require_physical(s)
    m = Measure(m)
    evaluations = 0

    def f(ni: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return objective(s, ni, m)

    xs = _scan_points(s, opts)
    values = [f(x) for x in xs]
    best = max(range(len(xs)), key=values.__getitem__)
    best_x, best_f = xs[best], values[best]
    converged = True

    for k in _local_maxima(values, opts.value_tol):
        lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
        if lo > 0.0:
            t, ft, ok = golden_section_max(
                lambda t: f(math.exp(t)),
                math.log(lo),
                math.log(hi),
                opts.domain_tol,
                opts.max_iters,
            )
            x = math.exp(t)
        else:
            x, ft, ok = golden_section_max(f, lo, hi, opts.domain_tol * hi, opts.max_iters)
        converged = converged and ok
        if ft > best_f:
            best_x, best_f = x, ft

    return CoherenceResult(
        value=max(0.0, 1.0 - best_f),
        argmax_ni=best_x,
        objective_at_max=best_f,
        evaluations=evaluations,
        converged=converged,
    )


def coherence(
    s: GaussianState, m: Measure, opts: OptimizerOptions = DEFAULT_OPTIONS
) -> CoherenceResult:
    """Coherence 1 - max sqrt(F) (Bures) or 1 - max sqrt(A) (Hellinger)."""
    return maximize_over_thermal(s, m, opts)


#: Varied parameters that are bisected in log scale.
LOG_SCALE_PARAMETERS = {"n_sq", "n_coh"}
THRESHOLD_REL_TOL = 1e-3
MONOTONE_SLACK = 1e-12


def threshold_search(
    family: Family | str,
    m: Measure,
    target: float,
    fixed: Mapping[str, complex],
    vary: str,
    lo: float,
    hi: float,
    opts: OptimizerOptions = DEFAULT_OPTIONS,
    rel_tol: float = THRESHOLD_REL_TOL,
) -> float | None:
    """Parameter value at which the coherence of a family member reaches ``target``.

    Bisects ``vary`` over [lo, hi] until the bracket's relative width drops
    below ``rel_tol``. Returns None when neither endpoint reaches the target
    and ``lo`` when both already exceed it. Raises NonMonotoneError if an
    interior value falls outside the range spanned by the endpoints.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")
    if not lo < hi:
        raise ValueError("need lo < hi")
    log_scale = vary in LOG_SCALE_PARAMETERS and lo > 0.0

    def c_at(x: float) -> float:
        return coherence(family_state(family, **{**fixed, vary: x}), m, opts).value

    c_lo, c_hi = c_at(lo), c_at(hi)
    if c_lo < target and c_hi < target:
        return None
    if c_lo >= target and c_hi >= target:
        return lo
    increasing = c_hi > c_lo
    floor, ceiling = min(c_lo, c_hi) - MONOTONE_SLACK, max(c_lo, c_hi) + MONOTONE_SLACK

    a, b = lo, hi
    while b - a > rel_tol * b:
        mid = math.sqrt(a * b) if log_scale else 0.5 * (a + b)
        c_mid = c_at(mid)
        if not floor <= c_mid <= ceiling:
            raise NonMonotoneError(
                f"coherence {c_mid!r} at {vary}={mid!r} leaves the endpoint range "
                f"[{c_lo!r}, {c_hi!r}]"
            )
        if (c_mid >= target) == increasing:
            b = mid
        else:
            a = mid
    return math.sqrt(a * b) if log_scale else 0.5 * (a + b)


DEFAULT_LADDER = (1e2, 1e3, 1e4, 1e5, 1e6, 1e7)
PLATEAU_TOL = 1e-6


@dataclass(frozen=True)
class AsymptoteResult:
    ladder: tuple[float, ...]
    values: tuple[float, ...]
    plateau: float
    is_plateau: bool
    converged: bool = field(default=True)


def asymptote(
    family: Family | str,
    params: Mapping[str, complex],
    m: Measure,
    ladder: Sequence[float] = DEFAULT_LADDER,
    opts: OptimizerOptions = DEFAULT_OPTIONS,
) -> AsymptoteResult:
    """Coherence along increasing thermal occupations with the other
    parameters held fixed; a plateau is declared when the last two values
    agree to PLATEAU_TOL."""
    ladder = tuple(float(n) for n in ladder)
    if len(ladder) < 4:
        raise ValueError("the ladder needs at least four points")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("the ladder must be strictly increasing")
    params = {k: v for k, v in params.items() if k != "n_th"}
    results = [coherence(family_state(family, **params, n_th=n), m, opts) for n in ladder]
    values = tuple(res.value for res in results)
    return AsymptoteResult(
        ladder=ladder,
        values=values,
        plateau=values[-1],
        is_plateau=abs(values[-1] - values[-2]) < PLATEAU_TOL,
        converged=all(res.converged for res in results),
    )
