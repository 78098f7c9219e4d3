"""Single-mode Gaussian states in phase space.

Conventions: hbar = 1, quadratures X = (a + a^dag)/sqrt(2) and
P = (a - a^dag)/(i sqrt(2)), so the vacuum covariance matrix is I/2 and a
coherent amplitude beta shifts the mean to sqrt(2) (Re beta, Im beta).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidStateError

#: Symplectic form [[0, 1], [-1, 0]].
OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])

PHYSICALITY_SLACK = 1e-12
_EPS = float(np.finfo(float).eps)


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidStateError(f"{name} must be finite, got {value!r}")
    return value


def _non_negative(name: str, value: float) -> float:
    value = _finite(name, value)
    if value < 0:
        raise InvalidStateError(f"{name} must be >= 0, got {value!r}")
    return value


def _amplitude(beta: complex) -> complex:
    beta = complex(beta)
    if not (math.isfinite(beta.real) and math.isfinite(beta.imag)):
        raise InvalidStateError(f"beta must be finite, got {beta!r}")
    return beta


@dataclass(frozen=True)
class StateParams:
    """Physical parameters of D(beta) S(r e^{i psi}) nu_th S^dag D^dag.

    ``psi`` is reduced into [0, 2 pi).
    """

    beta: complex = 0j
    r: float = 0.0
    psi: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "beta", _amplitude(self.beta))
        object.__setattr__(self, "r", _non_negative("r", self.r))
        object.__setattr__(self, "n_th", _non_negative("n_th", self.n_th))
        psi = _finite("psi", self.psi) % (2 * math.pi)
        object.__setattr__(self, "psi", psi)


@dataclass(frozen=True)
class PhaseSpaceVector:
    x: float = 0.0
    p: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p])


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric 2x2 covariance matrix [[a, c], [c, b]]."""

    a: float
    b: float
    c: float = 0.0

    @property
    def det(self) -> float:
        return self.a * self.b - self.c * self.c

    @property
    def det_rounding(self) -> float:
        """Bound on the rounding error of ``det``.

        Scaled by the squared trace rather than ab + c^2 so the bound is
        unchanged under phase-space rotations, whose own rounding perturbs
        the entries by ~ulp(a + b).
        """
        return 8.0 * _EPS * (self.a + self.b) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.c], [self.c, self.b]])

    def __add__(self, other: CovarianceMatrix) -> CovarianceMatrix:
        return CovarianceMatrix(self.a + other.a, self.b + other.b, self.c + other.c)


@dataclass(frozen=True)
class GaussianState:
    mean: PhaseSpaceVector
    cov: CovarianceMatrix

    @classmethod
    def from_arrays(cls, mean, cov) -> GaussianState:
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        if mean.shape != (2,) or cov.shape != (2, 2):
            raise InvalidStateError("expected a 2-vector and a 2x2 matrix")
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=0.0):
            raise InvalidStateError("covariance matrix must be symmetric")
        return cls(
            PhaseSpaceVector(float(mean[0]), float(mean[1])),
            CovarianceMatrix(float(cov[0, 0]), float(cov[1, 1]), float(cov[0, 1])),
        )


def from_params(p: StateParams) -> GaussianState:
    """Mean and covariance of the state described by ``p``.

    The entries are the standard ones,

        a = u/2 (cosh 2r + cos psi sinh 2r)
        b = u/2 (cosh 2r - cos psi sinh 2r)
        c = u/2 sin psi sinh 2r,        u = 1 + 2 n_th,

    evaluated as sums of non-negative terms in e^{+-2r} so that the
    squeezed quadrature keeps full relative precision at large r.
    """
    u = 1.0 + 2.0 * p.n_th
    grow = math.exp(2.0 * p.r)
    shrink = math.exp(-2.0 * p.r)
    cos_half_sq = math.cos(p.psi / 2.0) ** 2
    sin_half_sq = math.sin(p.psi / 2.0) ** 2
    a = 0.5 * u * (grow * cos_half_sq + shrink * sin_half_sq)
    b = 0.5 * u * (grow * sin_half_sq + shrink * cos_half_sq)
    c = 0.5 * u * math.sin(p.psi) * math.sinh(2.0 * p.r)
    mean = PhaseSpaceVector(math.sqrt(2.0) * p.beta.real, math.sqrt(2.0) * p.beta.imag)
    return GaussianState(mean, CovarianceMatrix(a, b, c))


def thermal_state(n: float) -> GaussianState:
    n = _non_negative("n", n)
    v = 0.5 * (1.0 + 2.0 * n)
    return GaussianState(PhaseSpaceVector(), CovarianceMatrix(v, v, 0.0))


def sts(r: float, n_th: float, beta: complex = 0j) -> GaussianState:
    """Squeezed thermal state with real squeezing (psi = 0), optionally displaced."""
    return from_params(StateParams(beta=beta, r=r, psi=0.0, n_th=n_th))


def cts(beta: complex, n_th: float) -> GaussianState:
    """Displaced (coherent) thermal state."""
    return from_params(StateParams(beta=beta, r=0.0, psi=0.0, n_th=n_th))


def tss(r: float, n_th: float) -> GaussianState:
    """Thermal squeezed state with covariance diag(n_th + e^{2r}, n_th + e^{-2r}).

    These entries are used as written. Note that r = n_th = 0 gives the
    identity, not the vacuum covariance I/2, so this family is offset from
    the thermal family by half a photon of noise in each quadrature.
    """
    r = _non_negative("r", r)
    n_th = _non_negative("n_th", n_th)
    return GaussianState(
        PhaseSpaceVector(),
        CovarianceMatrix(n_th + math.exp(2.0 * r), n_th + math.exp(-2.0 * r), 0.0),
    )


def is_physical(s: GaussianState) -> bool:
    cov = s.cov
    values = (s.mean.x, s.mean.p, cov.a, cov.b, cov.c)
    if not all(math.isfinite(v) for v in values):
        return False
    slack = max(PHYSICALITY_SLACK, cov.det_rounding)
    return cov.a > 0 and cov.b > 0 and cov.det >= 0.25 - slack


def require_physical(s: GaussianState, name: str = "state") -> None:
    if not is_physical(s):
        raise InvalidStateError(
            f"{name} is not a physical Gaussian state (a={s.cov.a!r}, "
            f"b={s.cov.b!r}, det={s.cov.det!r})"
        )


def is_incoherent(s: GaussianState, eps: float = 1e-9) -> bool:
    """True when ``s`` is a thermal state to within ``eps``: no displacement,
    no off-diagonal covariance, equal quadrature variances."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return (
        abs(s.mean.x) <= eps
        and abs(s.mean.p) <= eps
        and abs(s.cov.c) <= eps
        and abs(s.cov.a - s.cov.b) <= eps
    )


def rotate(s: GaussianState, theta: float) -> GaussianState:
    """Apply the phase-space rotation R -> O R, sigma -> O sigma O^T."""
    o = np.array([[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]])
    mean = o @ s.mean.as_array()
    cov = o @ s.cov.as_array() @ o.T
    cov = 0.5 * (cov + cov.T)
    return GaussianState.from_arrays(mean, cov)


def estimated_thermal_occupation(s: GaussianState) -> float:
    """(a + b - 1) / 2 clamped at zero; exact for thermal states."""
    return max(0.0, 0.5 * (s.cov.a + s.cov.b - 1.0))


class Family(str, enum.Enum):
    STS = "sts"
    CTS = "cts"
    TSS = "tss"
    GENERIC = "generic"


REQUIRED = {
    Family.STS: ("r", "n_th"),
    Family.CTS: ("beta", "n_th"),
    Family.TSS: ("r", "n_th"),
    Family.GENERIC: ("r", "n_th"),
}
DEFAULTS = {
    Family.STS: {"beta": 0.0},
    Family.CTS: {},
    Family.TSS: {},
    Family.GENERIC: {"beta": 0.0, "psi": 0.0},
}
ALLOWED = {
    Family.STS: {"r", "n_th", "beta"},
    Family.CTS: {"beta", "n_th"},
    Family.TSS: {"r", "n_th"},
    Family.GENERIC: {"beta", "r", "psi", "n_th"},
}

#: Photon-number aliases: mean photons from squeezing and from displacement.
PHOTON_ALIASES = {"n_sq": "r", "n_coh": "beta"}


def n_sq_to_r(n_sq: float) -> float:
    return math.asinh(math.sqrt(_non_negative("n_sq", n_sq)))


def n_coh_to_beta(n_coh: float) -> float:
    return math.sqrt(_non_negative("n_coh", n_coh))


def resolve_params(family: Family | str, bindings: Mapping[str, complex]) -> dict:
    """Normalize parameter bindings for ``family``.

    Converts ``n_sq`` to ``r`` and ``n_coh`` to a real ``beta``, fills family
    defaults, and rejects missing or foreign parameters.
    """
    family = Family(family)
    out = dict(DEFAULTS[family])
    for key, value in bindings.items():
        if key == "n_sq":
            if "r" in bindings:
                raise InvalidStateError("give either r or n_sq, not both")
            out["r"] = n_sq_to_r(float(value))
        elif key == "n_coh":
            if "beta" in bindings:
                raise InvalidStateError("give either beta or n_coh, not both")
            out["beta"] = n_coh_to_beta(float(value))
        else:
            out[key] = value
    unknown = set(out) - ALLOWED[family]
    if unknown:
        raise InvalidStateError(f"{family.value} does not take {sorted(unknown)}")
    missing = [k for k in REQUIRED[family] if k not in out]
    if missing:
        raise InvalidStateError(f"{family.value} needs values for {missing}")
    return out


def family_state(family: Family | str, **bindings) -> GaussianState:
    """Build a member of one of the named state families."""
    family = Family(family)
    p = resolve_params(family, bindings)
    if family is Family.STS:
        return sts(p["r"], p["n_th"], p["beta"])
    if family is Family.CTS:
        return cts(p["beta"], p["n_th"])
    if family is Family.TSS:
        return tss(p["r"], p["n_th"])
    return from_params(StateParams(beta=p["beta"], r=p["r"], psi=p["psi"], n_th=p["n_th"]))
