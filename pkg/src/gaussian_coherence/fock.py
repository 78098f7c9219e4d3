"""Brute-force Fock-basis counterpart of the closed-form metrics.

States are built as dense density matrices on a truncated number basis,
D S nu S^dag D^dag, with D and S exponentiated from their truncated
anti-Hermitian generators (so they are exactly unitary on the truncated
space). Fidelity and affinity then follow from Hermitian eigendecompositions.
The only probability discarded outright is the thermal tail beyond the
cutoff; squeezing and displacement truncation effects are caught by
re-evaluating at larger cutoffs (``converged_value``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg

from . import metrics
from .errors import ConvergenceError, TruncationError
from .states import StateParams, from_params

NEGATIVITY_TOL = 1e-10
CONVERGENCE_TOL = 1e-7


@dataclass(frozen=True)
class TruncationSpec:
    dim: int = 160
    tail_tol: float = 1e-10

    def __post_init__(self):
        if self.dim < 8:
            raise ValueError("dim must be at least 8")
        if self.tail_tol <= 0:
            raise ValueError("tail_tol must be positive")

    def scaled(self, factor: int) -> TruncationSpec:
        return TruncationSpec(self.dim * factor, self.tail_tol)


@dataclass(frozen=True, eq=False)
class FockDensity:
    entries: np.ndarray
    tail_mass: float = 0.0

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.entries)
        if w[0] < -NEGATIVITY_TOL:
            raise ConvergenceError(f"density has eigenvalue {w[0]!r} < -{NEGATIVITY_TOL}")
        return np.clip(w, 0.0, None), v

    @cached_property
    def sqrt(self) -> np.ndarray:
        w, v = self.eigh
        return (v * np.sqrt(w)) @ v.conj().T


def annihilation(dim: int | TruncationSpec) -> np.ndarray:
    if isinstance(dim, TruncationSpec):
        dim = dim.dim
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_operator(dim: int | TruncationSpec) -> np.ndarray:
    a = annihilation(dim)
    return a.conj().T @ a


def _required_dim(ratio: float, tail_tol: float) -> int:
    return int(math.ceil(math.log(tail_tol) / math.log(ratio)))


def thermal_populations(n_th: float, spec: TruncationSpec) -> tuple[np.ndarray, float]:
    """Renormalized geometric populations on ``spec.dim`` levels and the
    discarded tail (n/(1+n))^dim."""
    if not (math.isfinite(n_th) and n_th >= 0):
        raise ValueError(f"n_th must be finite and >= 0, got {n_th!r}")
    if n_th == 0:
        pops = np.zeros(spec.dim)
        pops[0] = 1.0
        return pops, 0.0
    ratio = n_th / (1.0 + n_th)
    tail = ratio**spec.dim
    if tail > spec.tail_tol:
        need = _required_dim(ratio, spec.tail_tol)
        raise TruncationError(
            f"thermal tail {tail:.3g} at dim={spec.dim} exceeds {spec.tail_tol:g}; "
            f"n_th={n_th:g} needs dim >= {need}",
            required_dim=need,
        )
    pops = ratio ** np.arange(spec.dim) / (1.0 + n_th)
    return pops / pops.sum(), tail


def thermal_density(n_th: float, spec: TruncationSpec = TruncationSpec()) -> FockDensity:
    pops, tail = thermal_populations(n_th, spec)
    return FockDensity(np.diag(pops).astype(complex), tail)


def displacement_op(beta: complex, spec: TruncationSpec = TruncationSpec()) -> np.ndarray:
    a = annihilation(spec)
    beta = complex(beta)
    return scipy.linalg.expm(beta * a.conj().T - beta.conjugate() * a)


def squeeze_op(r: float, psi: float = 0.0, spec: TruncationSpec = TruncationSpec()) -> np.ndarray:
    """exp((xi/2) a^dag^2 - (xi*/2) a^2) with xi = r e^{i psi}."""
    a = annihilation(spec)
    ad = a.conj().T
    xi = r * complex(math.cos(psi), math.sin(psi))
    return scipy.linalg.expm(0.5 * xi * (ad @ ad) - 0.5 * xi.conjugate() * (a @ a))


def gaussian_density(p: StateParams, spec: TruncationSpec = TruncationSpec()) -> FockDensity:
    pops, tail = thermal_populations(p.n_th, spec)
    u = displacement_op(p.beta, spec) @ squeeze_op(p.r, p.psi, spec)
    rho = (u * pops) @ u.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return FockDensity(rho, tail)


def _check_pair(rho: FockDensity, sigma: FockDensity) -> None:
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")


def uhlmann_fidelity(rho: FockDensity, sigma: FockDensity) -> float:
    """(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    _check_pair(rho, sigma)
    s = rho.sqrt
    inner = s @ sigma.entries @ s
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    if w[0] < -NEGATIVITY_TOL:
        raise ConvergenceError(f"sqrt(rho) sigma sqrt(rho) has eigenvalue {w[0]!r}")
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)


def affinity_fock(rho: FockDensity, sigma: FockDensity) -> float:
    """Tr[sqrt(rho) sqrt(sigma)]."""
    _check_pair(rho, sigma)
    value = np.sum(rho.sqrt * sigma.sqrt.T)
    if abs(value.imag) > 1e-10:
        raise ConvergenceError(f"affinity has imaginary part {value.imag!r}")
    return float(value.real)


def converged_value(
    computation: Callable[[TruncationSpec], float],
    spec: TruncationSpec = TruncationSpec(),
    tol: float = CONVERGENCE_TOL,
) -> float:
    """Evaluate at dim and 2 dim; if they disagree by ``tol`` or more, try
    4 dim once and accept it if it agrees with the 2 dim value."""
    previous = computation(spec)
    for factor in (2, 4):
        current = computation(spec.scaled(factor))
        if abs(current - previous) < tol:
            return current
        previous = current
    raise ConvergenceError(
        f"no agreement to {tol:g} between dims {2 * spec.dim} and {4 * spec.dim}"
    )


# Oracle-equivalence suite -------------------------------------------------

DEFAULT_GRID_AXES = {
    "beta": (0.0, 0.5, 1.0, 2.0),
    "r": (0.0, 0.3, 1.0),
    "n_th": (0.0, 1.0, 2.0),
    "psi": (0.0, math.pi / 2),
}

#: Partners each grid state is compared against: two thermal states and a
#: displaced, rotated-squeezed, mixed state.
DEFAULT_REFERENCES = (
    StateParams(),
    StateParams(n_th=1.0),
    StateParams(beta=0.5 + 0.25j, r=0.3, psi=math.pi / 4, n_th=0.5),
)


def parameter_grid(
    beta: Iterable[complex], r: Iterable[float], n_th: Iterable[float], psi: Iterable[float]
) -> list[StateParams]:
    return [
        StateParams(beta=b, r=rr, psi=ps, n_th=n)
        for b, rr, n, ps in product(beta, r, n_th, psi)
    ]


def default_grid() -> list[StateParams]:
    return parameter_grid(**DEFAULT_GRID_AXES)


@dataclass
class OracleReport:
    max_deviation: dict[str, float] = field(default_factory=dict)
    worst_case: dict[str, tuple[StateParams, StateParams]] = field(default_factory=dict)
    max_dim: int = 0
    comparisons: int = 0

    def passed(self, tol: float = 1e-6) -> bool:
        return all(dev < tol for dev in self.max_deviation.values())


QUANTITIES = {
    "fidelity": (metrics.fidelity, uhlmann_fidelity),
    "affinity": (metrics.affinity, affinity_fock),
}


def oracle_equivalence(
    grid: Sequence[StateParams],
    references: Sequence[StateParams] = DEFAULT_REFERENCES,
    spec: TruncationSpec = TruncationSpec(),
    quantities: Sequence[str] = ("fidelity", "affinity"),
) -> OracleReport:
    """Compare closed-form values with Fock-space values for every
    (grid state, reference) pair. Fock values go through ``converged_value``."""
    report = OracleReport()
    for name in quantities:
        report.max_deviation[name] = -1.0
    ref_cache: dict[tuple[StateParams, int], FockDensity] = {}

    def density(p: StateParams, s: TruncationSpec, cache: dict) -> FockDensity:
        key = (p, s.dim)
        if key not in cache:
            cache[key] = gaussian_density(p, s)
            report.max_dim = max(report.max_dim, s.dim)
        return cache[key]

    for p in grid:
        own_cache: dict[tuple[StateParams, int], FockDensity] = {}
        for q in references:
            for name in quantities:
                closed_form, spectral = QUANTITIES[name]
                exact = closed_form(from_params(p), from_params(q))
                fock = converged_value(
                    lambda s: spectral(density(p, s, own_cache), density(q, s, ref_cache)),
                    spec,
                )
                dev = abs(exact - fock)
                report.comparisons += 1
                if dev > report.max_deviation[name]:
                    report.max_deviation[name] = dev
                    report.worst_case[name] = (p, q)
    return report
