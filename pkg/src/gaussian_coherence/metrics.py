"""Closed-form fidelity, affinity and squared distances between one-mode
Gaussian states.

Everything here is scalar float arithmetic on the three covariance entries;
2x2 inverses and determinants are written out by hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError
from .states import CovarianceMatrix, GaussianState, require_physical

BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class FidelityIngredients:
    """delta = det(s1 + s2), lam = 4 det(s1 + i/2 Omega) det(s2 + i/2 Omega),
    exponent = -1/2 dR^T (s1 + s2)^{-1} dR."""

    delta: float
    lam: float
    exponent: float


def _symplectic_excess(cov: CovarianceMatrix) -> float:
    # det(sigma + i/2 Omega) = det sigma - 1/4 for real symmetric 2x2 sigma.
    # Excesses inside the rounding error of det are pure states; keeping the
    # residue would leak ~sqrt(ulp) into sqrt(lam).
    excess = cov.det - 0.25
    return excess if excess > cov.det_rounding else 0.0


def _exponent(s1: GaussianState, s2: GaussianState) -> tuple[float, float]:
    a = s1.cov.a + s2.cov.a
    b = s1.cov.b + s2.cov.b
    c = s1.cov.c + s2.cov.c
    det = a * b - c * c
    dx = s1.mean.x - s2.mean.x
    dp = s1.mean.p - s2.mean.p
    quad = (b * dx * dx - 2.0 * c * dx * dp + a * dp * dp) / det
    return det, -0.5 * quad


def fidelity_ingredients(s1: GaussianState, s2: GaussianState) -> FidelityIngredients:
    require_physical(s1, "s1")
    require_physical(s2, "s2")
    delta, exponent = _exponent(s1, s2)
    lam = 4.0 * _symplectic_excess(s1.cov) * _symplectic_excess(s2.cov)
    return FidelityIngredients(delta, lam, exponent)


def _clamp_unit(value: float, what: str) -> float:
    if value > 1.0 + BOUND_SLACK or value < -BOUND_SLACK or math.isnan(value):
        raise ConvergenceError(f"{what} = {value!r} lies outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def fidelity(s1: GaussianState, s2: GaussianState) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.

    Uses the rationalized form e^{exponent} (sqrt(delta + lam) + sqrt(lam)) / delta,
    which equals e^{exponent} / (sqrt(delta + lam) - sqrt(lam)) but does not
    cancel when lam >> delta (highly mixed or highly squeezed states).
    """
    ing = fidelity_ingredients(s1, s2)
    value = math.exp(ing.exponent) * (math.sqrt(ing.delta + ing.lam) + math.sqrt(ing.lam)) / ing.delta
    return _clamp_unit(value, "fidelity")


def affinity(s1: GaussianState, s2: GaussianState) -> float:
    """2 e^{exponent} (det s1 det s2)^{1/4} / sqrt(det(s1 + s2)).

    For a pair of pure states this is Tr[rho1 rho2] = Tr[sqrt(rho1) sqrt(rho2)].
    For mixed pairs it is the Bhattacharyya overlap of the two covariance
    ellipses and differs from Tr[sqrt(rho1) sqrt(rho2)]; e.g. vacuum against
    a one-photon thermal state gives (9/16)^{1/4} ~ 0.866 instead of 1/sqrt(2).
    """
    require_physical(s1, "s1")
    require_physical(s2, "s2")
    delta, exponent = _exponent(s1, s2)
    value = 2.0 * math.exp(exponent) * (s1.cov.det * s2.cov.det) ** 0.25 / math.sqrt(delta)
    return _clamp_unit(value, "affinity")


def bures_distance_sq(s1: GaussianState, s2: GaussianState) -> float:
    return 2.0 * (1.0 - math.sqrt(fidelity(s1, s2)))


def hellinger_distance_sq(s1: GaussianState, s2: GaussianState) -> float:
    return 2.0 * (1.0 - math.sqrt(affinity(s1, s2)))
