"""Time-dependent oscillator parameters: mass M(t), frequency w(t), drive F(t).

A schedule component is a deterministic callable of time; evaluating it twice
at the same t gives bit-identical results. Components accept scalars or numpy
arrays and broadcast.

The frequency may be supplied either as w(t) or directly as w^2(t); the
squared form is what every consumer actually needs and it permits transient
inverted regimes (w^2 < 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ScheduleError

Component = Callable[[np.ndarray | float], np.ndarray | float]


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, float(self.value))
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Sinusoid:
    """base + amplitude * trig(rate * t + phase), trig in {sin, cos}."""

    base: float
    amplitude: float
    rate: float
    phase: float = 0.0
    function: str = "cos"

    def __post_init__(self):
        if self.function not in ("sin", "cos"):
            raise ScheduleError(f"sinusoid function must be sin or cos, got {self.function!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        trig = np.sin if self.function == "sin" else np.cos
        out = self.base + self.amplitude * trig(self.rate * t + self.phase)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Local polynomials in (t - breakpoints[k]) on [breakpoints[k], breakpoints[k+1]).

    coefficients[k] are low-to-high degree. Evaluation clamps to the first and
    last pieces outside the breakpoint range so stencil probes just past the
    span edges stay defined.
    """

    breakpoints: tuple[float, ...]
    coefficients: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.breakpoints) < 2:
            raise ScheduleError("piecewise polynomial needs at least two breakpoints")
        if len(self.coefficients) != len(self.breakpoints) - 1:
            raise ScheduleError(
                f"got {len(self.coefficients)} coefficient rows for "
                f"{len(self.breakpoints) - 1} intervals"
            )
        bp = np.asarray(self.breakpoints, dtype=float)
        if not np.all(np.diff(bp) > 0):
            raise ScheduleError("breakpoints must be strictly increasing")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        bp = np.asarray(self.breakpoints, dtype=float)
        idx = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, len(self.coefficients) - 1)
        out = np.zeros(t.shape)
        for k, coeffs in enumerate(self.coefficients):
            mask = idx == k
            if not np.any(mask):
                continue
            local = t[mask] - bp[k]
            acc = np.zeros(local.shape)
            for c in reversed(coeffs):
                acc = acc * local + c
            out[mask] = acc
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class TableInterpolant:
    """Cubic-spline interpolation through (times, values) nodes."""

    times: tuple[float, ...]
    values: tuple[float, ...]
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ts = np.asarray(self.times, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        if ts.size < 4:
            raise ScheduleError("table interpolant needs at least 4 nodes")
        if ts.size != vs.size:
            raise ScheduleError("table times and values must have equal length")
        if not np.all(np.diff(ts) > 0):
            raise ScheduleError("table times must be strictly increasing")
        object.__setattr__(self, "_spline", CubicSpline(ts, vs, extrapolate=True))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self._spline(t)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class ParameterSchedule:
    """Bundle of M(t), the frequency component, and optional F(t).

    If ``frequency_is_squared`` the ``frequency`` component is interpreted as
    w^2(t) and may go negative; otherwise it is w(t) and w^2 = w*w.
    """

    mass: Component
    frequency: Component
    force: Component | None = None
    frequency_is_squared: bool = False

    def mass_at(self, t):
        return self.mass(t)

    def omega_sq_at(self, t):
        w = self.frequency(t)
        return w if self.frequency_is_squared else w * w

    def force_at(self, t):
        if self.force is None:
            t = np.asarray(t, dtype=float)
            out = np.zeros(t.shape)
            return out if out.ndim else 0.0
        return self.force(t)

    def validate_on(self, span: tuple[float, float], samples: int = 2048) -> None:
        """Check M(t) > 0 on a dense sampling of the span."""
        t0, t1 = span
        if not np.isfinite(t0) or not np.isfinite(t1) or t1 <= t0:
            raise ScheduleError(f"invalid span ({t0}, {t1})")
        ts = np.linspace(t0, t1, samples)
        m = np.asarray(self.mass_at(ts), dtype=float)
        if not np.all(np.isfinite(m)):
            raise ScheduleError("mass schedule is not finite on the span")
        if np.any(m <= 0):
            bad = float(ts[np.argmin(m)])
            raise ScheduleError(f"mass schedule is non-positive near t={bad:.6g}")
        w2 = np.asarray(self.omega_sq_at(ts), dtype=float)
        if not np.all(np.isfinite(w2)):
            raise ScheduleError("frequency schedule is not finite on the span")
        if self.force is not None:
            f = np.asarray(self.force_at(ts), dtype=float)
            if not np.all(np.isfinite(f)):
                raise ScheduleError("force schedule is not finite on the span")


def constant_schedule(mass: float = 1.0, omega: float = 1.0,
                      force: float | None = None) -> ParameterSchedule:
    f = None if force is None else Constant(force)
    return ParameterSchedule(mass=Constant(mass), frequency=Constant(omega), force=f)


def component_from_config(kind: str, params: dict[str, float],
                          arrays: dict[str, Sequence[float]] | None = None) -> Component:
    """Build a component from scenario-file fields. Raises ScheduleError."""
    arrays = arrays or {}
    if kind == "constant":
        return Constant(value=params["value"])
    if kind == "sinusoid":
        return Sinusoid(
            base=params.get("base", 0.0),
            amplitude=params.get("amplitude", 0.0),
            rate=params.get("rate", 1.0),
            phase=params.get("phase", 0.0),
            function=str(params.get("function", "cos")),
        )
    if kind == "piecewise":
        return PiecewisePolynomial(
            breakpoints=tuple(arrays["breakpoints"]),
            coefficients=tuple(tuple(row) for row in arrays["coefficients"]),
        )
    if kind == "table":
        return TableInterpolant(times=tuple(arrays["times"]), values=tuple(arrays["values"]))
    raise ScheduleError(f"unknown schedule component kind {kind!r}")
