"""Hamiltonian family: potentials, Jacobi transform, closed-form energies.

Four models share the structure H = kinetic + (harmonic) + V with V built
from inverse-square (or inverse-sin-square) pair terms:

  sutherland        N particles, V = sum_{i<j} hbar^2 l(l-1)/(x_i-x_j)^2
  three_body        N=3, adds 3 hbar^2 a(a-1)/y_ij^2, y_ij = x_i+x_j-2x_k
  jacobi_calogero   the N-1 relative Jacobi coordinates of the Calogero
                    model; configurations are the y_i, the pair terms are
                    evaluated through the inverse coordinate map
  trigonometric     free particles on a circle of length L*sqrt(hbar),
                    V = (hbar l(l-1) pi^2/L^2) sum 1/sin^2(pi (x_i-x_j)/(L sqrt(hbar)))

potential_eval returns the mutual interaction V only; kinetic and harmonic
parts belong to the verification module's Hamiltonian application.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ParameterError, SingularConfigurationError, UnsupportedConstructionError

MODEL_KINDS = ("sutherland", "three_body", "jacobi_calogero", "trigonometric")

# potential_eval raises once any squared denominator falls below this
_SINGULAR_SQ = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    n_particles: int
    lam: float
    alpha: float | None = None
    circle_length: float | None = None
    hbar: float = 1.0
    allow_weak_coupling: bool = False
    exclusion_radius: float = 1e-6  # sampler guard, units of sqrt(hbar)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ParameterError(f"unknown model kind {self.kind!r}")
        if self.hbar <= 0:
            raise ParameterError("hbar must be positive")
        n = self.n_particles
        if self.kind == "three_body":
            if n != 3:
                raise ParameterError("three_body is defined for exactly 3 particles")
            if self.alpha is None:
                raise ParameterError("three_body requires the alpha coupling")
        elif self.alpha is not None:
            raise ParameterError(f"alpha coupling is not part of {self.kind}")
        if self.kind == "trigonometric":
            if self.circle_length is None or self.circle_length <= 0:
                raise ParameterError("trigonometric requires circle_length > 0")
        elif self.circle_length is not None:
            raise ParameterError(f"circle_length is not part of {self.kind}")
        if self.kind == "jacobi_calogero" and n < 2:
            raise ParameterError("jacobi_calogero needs at least 2 particles")
        # N=1 is admitted for sutherland/trigonometric: no pairs, so the
        # interaction vanishes and the model degenerates to one body.
        if n < 1:
            raise ParameterError("n_particles must be at least 1")
        couplings = [("lambda", self.lam)]
        if self.alpha is not None:
            couplings.append(("alpha", self.alpha))
        for name, value in couplings:
            if value < 1.0:
                if not self.allow_weak_coupling:
                    raise ParameterError(
                        f"{name}={value} below 1 needs allow_weak_coupling "
                        "(amplitudes stop being continuous at coincidences)"
                    )
                warnings.warn(
                    f"{name}={value} < 1: no correctness claim is made in the "
                    "weak-coupling window", stacklevel=2)

    @property
    def coordinate_count(self) -> int:
        if self.kind == "jacobi_calogero":
            return self.n_particles - 1
        return self.n_particles

    @property
    def trig_wavenumber(self) -> float:
        return math.pi / (self.circle_length * math.sqrt(self.hbar))

    def check_dimension(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.shape[-1] != self.coordinate_count:
            raise ParameterError(
                f"{self.kind} expects {self.coordinate_count} coordinates, "
                f"got {coords.shape[-1]}"
            )
        return coords


@lru_cache(maxsize=32)
def _jacobi_matrix(n: int) -> np.ndarray:
    j = np.zeros((n, n))
    for i in range(1, n):
        norm = 1.0 / math.sqrt(i * (i + 1))
        j[i - 1, :i] = norm
        j[i - 1, i] = -i * norm
    j[n - 1, :] = 1.0 / math.sqrt(n)
    return j


def jacobi_forward(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if n < 2:
        raise ParameterError("jacobi transform needs dimension >= 2")
    return x @ _jacobi_matrix(n).T


def jacobi_inverse(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    if n < 2:
        raise ParameterError("jacobi transform needs dimension >= 2")
    return y @ _jacobi_matrix(n)


def relative_to_particles(model: ModelSpec, y: np.ndarray) -> np.ndarray:
    """Embed jacobi configurations (N-1 relative coords, CM dropped) into x."""
    y = np.asarray(y, dtype=float)
    full = np.zeros(y.shape[:-1] + (model.n_particles,))
    full[..., : model.n_particles - 1] = y
    return jacobi_inverse(full)


def interaction_terms(model: ModelSpec, coords: np.ndarray) -> dict[str, np.ndarray]:
    """Batched raw pair reductions used by potentials and amplitudes.

    coords has shape (B, coordinate_count). Returns per-family arrays of
    shape (B,): log-modulus sums, minimum squared denominators, inverse
    sums, and negative-factor counts.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if model.kind == "sutherland":
        t = kernels.sutherland_terms(coords)
        return {"pair_log": t[:, 0], "pair_min_sq": t[:, 1],
                "pair_inv": t[:, 2], "pair_neg": t[:, 3]}
    if model.kind == "three_body":
        t = kernels.threebody_terms(coords)
        return {"pair_log": t[:, 0], "pair_min_sq": t[:, 1],
                "pair_inv": t[:, 2], "pair_neg": t[:, 3],
                "y_log": t[:, 4], "y_min_sq": t[:, 5],
                "y_inv": t[:, 6], "y_neg": t[:, 7]}
    if model.kind == "jacobi_calogero":
        x = relative_to_particles(model, coords)
        t = kernels.sutherland_terms(x)
        return {"pair_log": t[:, 0], "pair_min_sq": t[:, 1],
                "pair_inv": t[:, 2], "pair_neg": t[:, 3]}
    t = kernels.trig_terms(coords, model.trig_wavenumber)
    return {"pair_log": t[:, 0], "pair_min_sq": t[:, 1],
            "pair_inv": t[:, 2], "pair_neg": t[:, 3]}


def potential_batch(model: ModelSpec, coords: np.ndarray) -> np.ndarray:
    """V at every row; singular rows give +/-inf or nan, caller's business."""
    coords = np.atleast_2d(model.check_dimension(coords))
    terms = interaction_terms(model, coords)
    hbar, lam = model.hbar, model.lam
    if model.kind == "trigonometric":
        prefactor = hbar * lam * (lam - 1.0) * (math.pi / model.circle_length) ** 2
        return prefactor * terms["pair_inv"]
    v = hbar * hbar * lam * (lam - 1.0) * terms["pair_inv"]
    if model.kind == "three_body":
        v = v + 3.0 * hbar * hbar * model.alpha * (model.alpha - 1.0) * terms["y_inv"]
    return v


def _guarded_min_sq(model: ModelSpec, terms: dict[str, np.ndarray]) -> np.ndarray:
    """Smallest squared denominator among families with nonzero coupling."""
    mins = np.full_like(terms["pair_min_sq"], np.inf)
    if model.lam * (model.lam - 1.0) != 0.0:
        mins = np.minimum(mins, terms["pair_min_sq"])
    if model.kind == "three_body" and model.alpha * (model.alpha - 1.0) != 0.0:
        mins = np.minimum(mins, terms["y_min_sq"])
    return mins


def potential_eval(model: ModelSpec, x: np.ndarray) -> float:
    """Mutual interaction V at a single configuration."""
    coords = model.check_dimension(x)
    if coords.ndim != 1:
        raise ParameterError("potential_eval takes a single configuration")
    batch = coords[None, :]
    terms = interaction_terms(model, batch)
    min_sq = float(_guarded_min_sq(model, terms)[0])
    if min_sq < _SINGULAR_SQ:
        raise SingularConfigurationError(
            f"configuration within {_SINGULAR_SQ:g} (squared) of a singular hyperplane"
        )
    return float(potential_batch(model, batch)[0])


def homogeneity_defect(model: ModelSpec, x: np.ndarray, a: float) -> float:
    """|V(a x) - a^-2 V(x)|; zero for the inverse-square family."""
    if a == 0.0:
        raise ParameterError("scale factor a must be nonzero")
    x = np.asarray(x, dtype=float)
    return abs(potential_eval(model, a * x) - potential_eval(model, x) / (a * a))


def translation_defect(model: ModelSpec, x: np.ndarray, a: float) -> float:
    """|V(x + a*ones) - V(x)| in the model's native coordinates."""
    x = np.asarray(x, dtype=float)
    return abs(potential_eval(model, x + a) - potential_eval(model, x))


def energy_of(model: ModelSpec, n: int = 0) -> float:
    """Closed-form eigen-energy (units hbar/timescale)."""
    if n < 0:
        raise ParameterError("quantum number must be nonnegative")
    hbar, lam, npart = model.hbar, model.lam, model.n_particles
    if model.kind == "jacobi_calogero":
        return hbar * (calogero_b(model) + 1.0 + 2.0 * n)
    if n > 0:
        raise UnsupportedConstructionError(
            f"{model.kind} exposes only its ground state (n=0)"
        )
    if model.kind == "sutherland":
        return hbar * npart * (1.0 + lam * (npart - 1)) / 2.0
    if model.kind == "three_body":
        return 3.0 * hbar * (0.5 + lam + model.alpha)
    # trigonometric: apply H to the product-of-sines ground state; the
    # cross terms reduce by the cotangent triple identity, leaving
    # E0 = hbar (pi/L)^2 lam^2 N(N^2-1)/6.
    length = model.circle_length
    return hbar * (math.pi / length) ** 2 * lam * lam \
        * npart * (npart * npart - 1) / 6.0


def calogero_b(model: ModelSpec) -> float:
    """Laguerre parameter b of the jacobi_calogero eigenfunctions."""
    if model.kind != "jacobi_calogero":
        raise ParameterError("b is defined for jacobi_calogero only")
    npart = model.n_particles
    return 0.5 * (npart - 3) + 0.5 * model.lam * npart * (npart - 1)


def min_separation(model: ModelSpec, coords: np.ndarray) -> np.ndarray:
    """Per-row distance proxy to the nearest guarded singular hyperplane.

    Pairs measure |x_i - x_j| (three_body also |y_ij|); the trigonometric
    model uses |sin(k d)|/k, which coincides with the arc distance near a
    hyperplane. Families with vanishing coupling still count here: samplers
    keep away from nodes of the amplitude, too.
    """
    coords = np.atleast_2d(model.check_dimension(coords))
    terms = interaction_terms(model, coords)
    sep = np.sqrt(terms["pair_min_sq"])
    if model.kind == "three_body":
        sep = np.minimum(sep, np.sqrt(terms["y_min_sq"]))
    if model.kind == "trigonometric":
        sep = sep / model.trig_wavenumber
    return sep
