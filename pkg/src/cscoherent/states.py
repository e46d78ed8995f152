"""Stationary eigenstates and their coherent-state constructions.

Amplitudes live in the log domain as (log-modulus, phase) pairs so that
N ~ 12, lambda ~ 8 products of pair factors neither overflow nor lose the
branch of the complex powers. ``StateEvaluator.amplitude`` exponentiates on
demand.

The coherent construction is one closed formula for every harmonic model:

    psi(t, x) = (W/rho^2)^(D/4)
                * exp(-i (E/hbar) theta(t)) * exp(i D delta(t)/hbar)
                * prod_i exp[(i/2hbar) M (rho'/rho) (x_i - u_f)^2
                             + (i/hbar) M u_f' x_i]
                * phi_s(sqrt(W/rho^2) (x - u_f))

with D the coordinate count, W the Wronskian, theta the continuous polar
angle of (u, v), and phi_s the stationary amplitude. With constant
parameters it collapses to exp(-iEt/hbar) phi_s; the displacement pieces
vanish when u_f = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .classical import DisplacementSolution
from .errors import (
    ParameterError,
    SingularConfigurationError,
    UnsupportedConstructionError,
)
from .models import (
    ModelSpec,
    calogero_b,
    energy_of,
    interaction_terms,
)

KNOWN_FAULTS = frozenset({"zero_delta", "drop_chirp", "principal_phase"})


def laguerre(n: int, b: float, x):
    """Associated Laguerre polynomial L_n^b(x) by the three-term recurrence."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ParameterError(f"quantum number n must be a nonnegative integer, got {n}")
    if n > 50:
        raise ParameterError("recurrence evaluation is supported for n <= 50")
    if b <= -1.0:
        raise ParameterError(f"Laguerre parameter b must exceed -1, got {b}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ParameterError("Laguerre argument must be nonnegative")
    prev = np.ones_like(x_arr)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = b + 1.0 - x_arr
    for k in range(1, n):
        prev, cur = cur, ((2 * k + b + 1.0 - x_arr) * cur - (k + b) * prev) / (k + 1.0)
    return cur if cur.ndim else float(cur)


@dataclass(frozen=True)
class Envelope:
    """Sampling envelope for quadrature and Monte-Carlo drivers.

    Gaussian states report a per-coordinate center and standard deviation as
    functions of time; periodic (trigonometric) states report the box period
    instead.
    """

    kind: str  # "gaussian" | "box"
    center: Callable[[float], float]
    width: Callable[[float], float]
    period: float | None = None


@dataclass(frozen=True)
class StateEvaluator:
    """Pure map (t, configuration) -> complex amplitude, with metadata."""

    model: ModelSpec
    energy: float
    chain: tuple[str, ...]
    time_dependent: bool
    exchange_symmetric: bool
    envelope: Envelope
    _log_amplitude: Callable = field(repr=False)

    @property
    def coordinate_count(self) -> int:
        return self.model.coordinate_count

    def log_amplitude(self, t: float, coords):
        """(log-modulus, phase) at scalar time t; coords (D,) or (B, D)."""
        coords = self.model.check_dimension(coords)
        single = coords.ndim == 1
        logmod, phase = self._log_amplitude(float(t), np.atleast_2d(coords))
        if single:
            return float(logmod[0]), float(phase[0])
        return logmod, phase

    def amplitude(self, t: float, coords):
        logmod, phase = self.log_amplitude(t, coords)
        return np.exp(logmod + 1j * np.asarray(phase))

    def __call__(self, t: float, coords):
        return self.amplitude(t, coords)


def _check_coincidences(model: ModelSpec, terms: dict) -> None:
    # Exact coincidences: continuous zero for lam > 1, error otherwise.
    checks = [("lambda", model.lam, terms["pair_min_sq"])]
    if model.kind == "three_body":
        checks.append(("alpha", model.alpha, terms["y_min_sq"]))
    for name, coupling, min_sq in checks:
        if np.any(min_sq < 1e-280) and coupling <= 1.0:
            raise SingularConfigurationError(
                f"coincident coordinates with {name}<=1: amplitude has no continuous value"
            )


def _stationary_log_amplitude(model: ModelSpec, n: int) -> Callable:
    hbar, lam = model.hbar, model.lam

    if model.kind == "jacobi_calogero":
        b = calogero_b(model)

        def evaluate(_t, ys):
            terms = interaction_terms(model, ys)
            _check_coincidences(model, terms)
            r2 = np.sum(ys * ys, axis=1)
            lag = np.asarray(laguerre(n, b, r2 / hbar))
            with np.errstate(divide="ignore"):
                lag_log = np.log(np.abs(lag))
            logmod = lam * terms["pair_log"] - r2 / (2.0 * hbar) + lag_log
            phase = lam * math.pi * terms["pair_neg"] + math.pi * (lag < 0)
            return logmod, phase

        return evaluate

    if model.kind == "trigonometric":

        def evaluate(_t, xs):
            terms = interaction_terms(model, xs)
            _check_coincidences(model, terms)
            logmod = lam * terms["pair_log"]
            phase = lam * math.pi * terms["pair_neg"]
            return logmod, phase

        return evaluate

    def evaluate(_t, xs):
        terms = interaction_terms(model, xs)
        _check_coincidences(model, terms)
        logmod = lam * terms["pair_log"] - np.sum(xs * xs, axis=1) / (2.0 * hbar)
        if model.kind == "three_body":
            logmod = logmod + model.alpha * terms["y_log"]
        return logmod, np.zeros_like(logmod)

    return evaluate


def _stationary_envelope(model: ModelSpec, energy: float) -> Envelope:
    if model.kind == "trigonometric":
        period = model.circle_length * math.sqrt(model.hbar)
        return Envelope(kind="box", center=lambda t: 0.5 * period,
                        width=lambda t: period / math.sqrt(12.0), period=period)
    # Virial theorem for the +2/-2 homogeneous parts: <sum x^2> = E, so the
    # per-coordinate spread of the unit-frequency eigenstate is sqrt(E/D).
    width = math.sqrt(energy / model.coordinate_count)
    return Envelope(kind="gaussian", center=lambda t: 0.0, width=lambda t: width)


def stationary_state(model: ModelSpec, n: int = 0) -> StateEvaluator:
    """Unnormalized eigen-amplitude; the time argument is ignored."""
    energy = energy_of(model, n)
    evaluate = _stationary_log_amplitude(model, n)
    return StateEvaluator(
        model=model,
        energy=energy,
        chain=("stationary",) if n == 0 else ("stationary", f"n={n}"),
        time_dependent=False,
        exchange_symmetric=model.kind != "jacobi_calogero",
        envelope=_stationary_envelope(model, energy),
        _log_amplitude=evaluate,
    )


def boosted_trig_state(model: ModelSpec, a: float) -> StateEvaluator:
    """Plane-wave boost of the trigonometric ground state; eigenstate with
    energy E0 + N a^2/2 (unit mass)."""
    if model.kind != "trigonometric":
        raise UnsupportedConstructionError("boost states exist for the trigonometric model")
    base = stationary_state(model, 0)
    a = float(a)
    shift = model.n_particles * a * a / 2.0
    hbar = model.hbar
    base_eval = base._log_amplitude

    def evaluate(t, xs):
        logmod, phase = base_eval(t, xs)
        return logmod, phase + (a / hbar) * np.sum(xs, axis=1)

    return replace(base, energy=base.energy + shift,
                   chain=base.chain + ("boost",), _log_amplitude=evaluate)


def with_phase_evolution(state: StateEvaluator) -> StateEvaluator:
    """Attach the trivial exp(-iEt/hbar) evolution to a stationary amplitude."""
    if state.time_dependent:
        raise ParameterError("state already evolves in time")
    rate = state.energy / state.model.hbar
    base_eval = state._log_amplitude

    def evaluate(t, xs):
        logmod, phase = base_eval(t, xs)
        return logmod, phase - rate * t

    return replace(state, time_dependent=True,
                   chain=state.chain + ("phase_evolution",), _log_amplitude=evaluate)


def phase_angle(classical, t: float) -> float:
    """Continuous theta(t) = arg(u + iv) of a classical solution."""
    return classical.frame_at(float(t)).theta


def coherent_state(classical, model: ModelSpec, n: int = 0,
                   displacement: DisplacementSolution | None = None,
                   faults: frozenset[str] = frozenset()) -> StateEvaluator:
    """Closed-form time-dependent state built on a classical solution.

    ``classical`` is any frame provider (a ClassicalSolution or a
    CanonicalSolution). ``faults`` deliberately corrupts the construction
    (see KNOWN_FAULTS) so verification tests can prove their own sensitivity;
    production callers leave it empty.
    """
    unknown = set(faults) - KNOWN_FAULTS
    if unknown:
        raise ParameterError(f"unknown fault injections: {sorted(unknown)}")
    if model.kind == "trigonometric":
        raise UnsupportedConstructionError(
            "the squeeze construction needs the harmonic family; the "
            "trigonometric model only supports boost states"
        )
    if displacement is not None and model.kind == "jacobi_calogero":
        raise UnsupportedConstructionError(
            "displacement requires a translation-invariant potential in the "
            "native coordinates; jacobi_calogero admits only the squeeze"
        )
    energy = energy_of(model, n)
    hbar = model.hbar
    dim = model.coordinate_count
    stationary_eval = _stationary_log_amplitude(model, n)
    zero_delta = "zero_delta" in faults
    drop_chirp = "drop_chirp" in faults
    principal = "principal_phase" in faults

    def evaluate(t, xs):
        frame = classical.frame_at(t)
        if displacement is not None:
            u_f = float(displacement.value(t))
            u_f_dot = float(displacement.velocity(t))
            delta = 0.0 if zero_delta else float(displacement.delta(t))
        else:
            u_f = u_f_dot = delta = 0.0
        wr, rho = frame.omega, frame.rho
        scale = math.sqrt(wr) / rho
        shifted = xs - u_f
        slog, sphase = stationary_eval(t, scale * shifted)
        theta = frame.theta
        if principal:
            theta = math.remainder(theta, 2.0 * math.pi)
        logmod = 0.5 * dim * math.log(scale) + slog
        phase = (sphase
                 - (energy / hbar) * theta
                 + dim * delta / hbar
                 + (frame.mass * u_f_dot / hbar) * np.sum(xs, axis=1))
        if not drop_chirp:
            chirp = frame.mass * frame.rhodot / (2.0 * hbar * rho)
            phase = phase + chirp * np.sum(shifted * shifted, axis=1)
        return logmod, phase

    chain = ("squeeze",)
    if displacement is not None:
        chain += (displacement.kind,)
    if faults:
        chain += tuple(sorted(f"fault:{f}" for f in faults))

    base_width = math.sqrt(energy / dim)

    def env_center(t):
        return float(displacement.value(t)) if displacement is not None else 0.0

    def env_width(t):
        frame = classical.frame_at(t)
        return base_width * frame.rho / math.sqrt(frame.omega)

    return StateEvaluator(
        model=model,
        energy=energy,
        chain=chain,
        time_dependent=True,
        exchange_symmetric=model.kind != "jacobi_calogero",
        envelope=Envelope(kind="gaussian", center=env_center, width=env_width),
        _log_amplitude=evaluate,
    )


def closed_form_density(model: ModelSpec, frame, u_f_value: float, x):
    """Large-N semicircle density of the sutherland coherent state.

    sigma(x) = sqrt(2 N W/(lam hbar))/(pi rho) * sqrt(1 - W (x-u_f)^2/(2 N lam hbar rho^2))
    inside the support, 0 outside; integrates to N exactly. ``frame=None``
    selects the rest frame (rho = 1, W = 1), i.e. the stationary density.
    """
    if model.kind != "sutherland":
        raise UnsupportedConstructionError("the semicircle form belongs to the sutherland model")
    wr, rho = (1.0, 1.0) if frame is None else (frame.omega, frame.rho)
    n, lam, hbar = model.n_particles, model.lam, model.hbar
    x = np.asarray(x, dtype=float)
    amp = math.sqrt(2.0 * n * wr / (lam * hbar)) / (math.pi * rho)
    arg = 1.0 - wr * (x - u_f_value) ** 2 / (2.0 * n * lam * hbar * rho * rho)
    out = amp * np.sqrt(np.clip(arg, 0.0, None))
    return out if out.ndim else float(out)


def semicircle_support(model: ModelSpec, frame=None, u_f_value: float = 0.0) -> tuple[float, float]:
    """Support interval of closed_form_density (``frame=None``: rest frame)."""
    wr, rho = (1.0, 1.0) if frame is None else (frame.omega, frame.rho)
    radius = rho * math.sqrt(
        2.0 * model.n_particles * model.lam * model.hbar / wr)
    return u_f_value - radius, u_f_value + radius


def transform_density(sigma_s: Callable, frame, u_f_value: float) -> Callable:
    """Pushforward of a stationary density map under squeeze + displacement:
    sigma(x) = (sqrt(W)/rho) sigma_s(sqrt(W)/rho (x - u_f))."""
    factor = math.sqrt(frame.omega) / frame.rho

    def sigma(x):
        x = np.asarray(x, dtype=float)
        out = factor * np.asarray(sigma_s(factor * (x - u_f_value)))
        return out if out.ndim else float(out)

    return sigma
