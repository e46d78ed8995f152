"""Classical layer: the auxiliary oscillator pair (u, v) and derived quantities.

Everything quantum in this package is built on two linearly independent
solutions of

    d/dt(M(t) x') + M(t) w(t)^2 x = 0,

their envelope rho = sqrt(u^2 + v^2), the conserved Wronskian
W = M (u v' - v u'), the rescaled time tau with dtau = W dt / rho^2, and the
continuous polar angle theta = arg(u + i v) with theta' = W / (M rho^2).

The equation of motion is integrated in momentum form (p = M x'), so mass
schedules never need a derivative. tau, theta, and the six bilinear
quadratures used by displacement phases ride along in one augmented state,
which keeps them on the integrator's own error control instead of a separate
quadrature pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    CSCoherentError,
    DegenerateSolutionError,
    ParameterError,
    ScheduleError,
    SpanError,
)
from .schedules import Component, ParameterSchedule, constant_schedule

DEFAULT_RTOL = 1e-10

# Augmented state layout.
_IU, _IPU, _IV, _IPV, _ITAU, _ITHETA = 0, 1, 2, 3, 4, 5
_IQW = 6   # integrals of M w^2 {uu, uv, vv}
_IQD = 9   # integrals of {pu pu, pu pv, pv pv} / M


class IntegrationError(CSCoherentError):
    """The integrator failed to meet its accuracy contract."""


@dataclass(frozen=True)
class TrajectoryFrame:
    """Snapshot of the classical pair at one time."""

    t: float
    u: float
    v: float
    udot: float
    vdot: float
    rho: float
    rhodot: float
    tau: float
    theta: float
    omega: float
    mass: float


@dataclass(frozen=True)
class ClassicalSolution:
    """Dense solution of the auxiliary pair over a span.

    ``omega`` is the Wronskian evaluated from the (possibly swapped) initial
    conditions; ``swapped`` records whether the u/v roles were exchanged to
    make it positive.
    """

    schedule: ParameterSchedule
    span: tuple[float, float]
    omega: float
    swapped: bool
    rtol: float
    _dense: Callable = None
    _node_times: np.ndarray = None

    def _check_span(self, t) -> None:
        t0, t1 = self.span
        slack = 1e-9 * (t1 - t0)
        ts = np.asarray(t, dtype=float)
        if np.any(ts < t0 - slack) or np.any(ts > t1 + slack):
            raise SpanError(f"t={t} outside solved span [{t0}, {t1}]")

    def state_at(self, t):
        """Raw augmented state (12 components) at scalar or array t."""
        self._check_span(t)
        return self._dense(t)

    def frame_at(self, t: float) -> TrajectoryFrame:
        y = self.state_at(float(t))
        m = float(self.schedule.mass_at(t))
        u, pu, v, pv = y[_IU], y[_IPU], y[_IV], y[_IPV]
        udot, vdot = pu / m, pv / m
        rho = math.hypot(u, v)
        rhodot = (u * udot + v * vdot) / rho
        return TrajectoryFrame(
            t=float(t), u=u, v=v, udot=udot, vdot=vdot, rho=rho,
            rhodot=rhodot, tau=y[_ITAU], theta=y[_ITHETA],
            omega=self.omega, mass=m,
        )

    def sample(self, ts: np.ndarray) -> dict[str, np.ndarray]:
        """Columns for CSV export at the given times."""
        ts = np.asarray(ts, dtype=float)
        y = self.state_at(ts)
        m = np.asarray(self.schedule.mass_at(ts), dtype=float)
        u, pu, v, pv = y[_IU], y[_IPU], y[_IV], y[_IPV]
        udot, vdot = pu / m, pv / m
        rho = np.hypot(u, v)
        return {
            "t": ts, "u": u, "v": v, "udot": udot, "vdot": vdot,
            "rho": rho, "rhodot": (u * udot + v * vdot) / rho,
            "tau": y[_ITAU], "theta": y[_ITHETA],
        }

    def wronskian_drift(self, samples: int = 2048) -> float:
        """max_t |W(t) - W(t0)| / W(t0) over a dense sampling of the span."""
        ts = np.linspace(self.span[0], self.span[1], samples)
        y = self.state_at(ts)
        wr = y[_IU] * y[_IPV] - y[_IV] * y[_IPU]
        return float(np.max(np.abs(wr - self.omega)) / self.omega)


def solve_classical(schedule: ParameterSchedule,
                    init: tuple[float, float, float, float],
                    span: tuple[float, float],
                    rtol: float = DEFAULT_RTOL) -> ClassicalSolution:
    """Integrate the pair (u, v) from init = (u0, udot0, v0, vdot0) over span.

    The Wronskian sign convention is enforced up front: if
    M(t0) (u0 vdot0 - v0 udot0) < 0 the two solutions are swapped so the
    stored solution always has positive Wronskian.
    """
    t0, t1 = float(span[0]), float(span[1])
    if not (np.isfinite(t0) and np.isfinite(t1)) or t1 <= t0:
        raise SpanError(f"span must be a finite increasing pair, got {span}")
    schedule.validate_on((t0, t1))

    u0, du0, v0, dv0 = (float(c) for c in init)
    m0 = float(schedule.mass_at(t0))
    wr0 = m0 * (u0 * dv0 - v0 * du0)
    scale = max(1.0, m0 * (abs(u0) + abs(v0)) * (abs(du0) + abs(dv0)))
    if abs(wr0) < 1e-12 * scale:
        raise DegenerateSolutionError(
            f"initial conditions give Wronskian {wr0:.3e}; the pair is "
            "numerically linearly dependent"
        )
    swapped = wr0 < 0
    if swapped:
        u0, du0, v0, dv0 = v0, dv0, u0, du0
        wr0 = -wr0

    y0 = np.zeros(12)
    y0[_IU], y0[_IPU] = u0, m0 * du0
    y0[_IV], y0[_IPV] = v0, m0 * dv0
    y0[_ITHETA] = math.atan2(v0, u0)

    mass_at = schedule.mass_at
    omega_sq_at = schedule.omega_sq_at

    def rhs(t, y):
        m = float(mass_at(t))
        w2 = float(omega_sq_at(t))
        u, pu, v, pv = y[_IU], y[_IPU], y[_IV], y[_IPV]
        du, dv = pu / m, pv / m
        rho2 = u * u + v * v
        wr = u * pv - v * pu
        mw2 = m * w2
        return (du, -mw2 * u, dv, -mw2 * v,
                wr / rho2, wr / (m * rho2),
                mw2 * u * u, mw2 * u * v, mw2 * v * v,
                pu * du, pu * dv, pv * dv)

    # Scale-aware absolute tolerances per state block.
    probe = np.linspace(t0, t1, 257)
    w_ref = math.sqrt(max(1e-4, float(np.max(np.abs(omega_sq_at(probe))))))
    m_ref = float(np.max(mass_at(probe)))
    r0 = max(abs(u0), abs(v0), (abs(du0) + abs(dv0)) / w_ref, 1e-6)
    p_scale = m_ref * w_ref * r0
    q_scale = max(1.0, m_ref * w_ref ** 2 * r0 ** 2 * (t1 - t0))
    atol = 1e-12 * np.array([r0, p_scale, r0, p_scale, 1.0, 1.0] + [q_scale] * 6)

    max_step = min(t1 - t0, 0.25 * 2.0 * math.pi / w_ref)
    sol = None
    for _ in range(8):
        sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=rtol,
                        atol=atol, dense_output=True, max_step=max_step)
        if not sol.success:
            raise IntegrationError(f"classical integration failed: {sol.message}")
        # Branch-continuity requirement: theta moves less than pi/2 between
        # accepted nodes, so no dense-output query can cross a branch cut.
        if np.all(np.abs(np.diff(sol.y[_ITHETA])) < 0.5 * math.pi):
            break
        max_step *= 0.5
    else:
        raise IntegrationError("could not bound theta steps below pi/2")

    solution = ClassicalSolution(
        schedule=schedule, span=(t0, t1), omega=wr0, swapped=swapped,
        rtol=rtol, _dense=sol.sol, _node_times=sol.t,
    )

    ts = np.linspace(t0, t1, 4096)
    yd = solution.state_at(ts)
    rho = np.hypot(yd[_IU], yd[_IV])
    if float(np.min(rho)) < 1e-12:
        raise DegenerateSolutionError("envelope rho collapsed below 1e-12 on the span")
    # Budget floor: at rtol near 1e-12 the solve sits on the accumulation
    # roundoff floor (~1e-11 drift over tens of time units), which a pure
    # multiple of rtol would misreport as an integration failure.
    budget = max(100.0 * rtol, 1e-10)
    drift = solution.wronskian_drift()
    if drift > budget:
        raise IntegrationError(
            f"Wronskian drift {drift:.3e} exceeds budget {budget:.1e}"
        )
    return solution


def frame_at(solution: ClassicalSolution, t: float) -> TrajectoryFrame:
    return solution.frame_at(t)


def ermakov_residual(solution: ClassicalSolution, t: float,
                     step: float = 1e-4) -> float:
    """|d/dt(M rho') - W^2/(M rho^3) + M w^2 rho| by central differences."""
    t = float(t)
    t0, t1 = solution.span
    if t - step < t0 or t + step > t1:
        raise SpanError(f"stencil [{t - step}, {t + step}] exits span [{t0}, {t1}]")
    f0 = solution.frame_at(t)
    fp = solution.frame_at(t + step)
    fm = solution.frame_at(t - step)
    deriv = (fp.mass * fp.rhodot - fm.mass * fm.rhodot) / (2.0 * step)
    w2 = float(solution.schedule.omega_sq_at(t))
    wr = solution.omega
    return abs(deriv - wr * wr / (f0.mass * f0.rho ** 3) + f0.mass * w2 * f0.rho)


@dataclass(frozen=True)
class DisplacementSolution:
    """Center trajectory u_f (or x_p) and its accumulated phase delta.

    delta(t_start) = 0; the phase satisfies
    delta' = M (w^2 u_f^2 - u_f'^2) / 2 for both kinds.
    """

    kind: str
    span: tuple[float, float]
    _value: Callable
    _velocity: Callable
    _delta: Callable

    def value(self, t):
        return self._value(t)

    def velocity(self, t):
        return self._velocity(t)

    def delta(self, t):
        return self._delta(t)


def solve_displacement(solution: ClassicalSolution, kind: str, *,
                       c_u: float = 0.0, c_v: float = 0.0,
                       force: Component | None = None,
                       xp0: float = 0.0, xpdot0: float = 0.0,
                       rtol: float = DEFAULT_RTOL) -> DisplacementSolution:
    """Build the displacement data for a coherent-state center.

    kind "homogeneous": u_f = c_u u + c_v v assembled exactly from the stored
    pair; its delta comes from the bilinear quadratures carried in the
    augmented state, so no second integration happens.

    kind "forced": integrates d/dt(M x_p') + M w^2 x_p = F(t) from
    (xp0, xpdot0) with delta on the same grid. F defaults to the schedule's
    force component; F identically absent is allowed and reduces to the
    homogeneous motion of those initial conditions.
    """
    schedule = solution.schedule
    t0, t1 = solution.span

    if kind == "homogeneous":
        cu, cv = float(c_u), float(c_v)

        def value(t):
            y = solution.state_at(t)
            return cu * y[_IU] + cv * y[_IV]

        def velocity(t):
            y = solution.state_at(t)
            m = schedule.mass_at(t)
            return (cu * y[_IPU] + cv * y[_IPV]) / m

        def delta(t):
            y = solution.state_at(t)
            qw = (cu * cu * y[_IQW] + 2 * cu * cv * y[_IQW + 1]
                  + cv * cv * y[_IQW + 2])
            qd = (cu * cu * y[_IQD] + 2 * cu * cv * y[_IQD + 1]
                  + cv * cv * y[_IQD + 2])
            return 0.5 * (qw - qd)

        return DisplacementSolution(kind=kind, span=(t0, t1),
                                    _value=value, _velocity=velocity, _delta=delta)

    if kind != "forced":
        raise ParameterError(f"displacement kind must be homogeneous or forced, got {kind!r}")

    if force is None:
        force_at = schedule.force_at
    elif isinstance(force, ParameterSchedule):
        force_at = force.force_at
    else:
        force_at = force
    mass_at = schedule.mass_at
    omega_sq_at = schedule.omega_sq_at

    def rhs(t, y):
        m = float(mass_at(t))
        w2 = float(omega_sq_at(t))
        xp, pxp = y[0], y[1]
        xdot = pxp / m
        return (xdot, float(force_at(t)) - m * w2 * xp,
                0.5 * (m * w2 * xp * xp - pxp * xdot))

    m0 = float(mass_at(t0))
    y0 = np.array([float(xp0), m0 * float(xpdot0), 0.0])
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=rtol,
                    atol=1e-14, dense_output=True)
    if not sol.success:
        raise IntegrationError(f"forced-center integration failed: {sol.message}")
    dense = sol.sol

    def value(t):
        return dense(t)[0]

    def velocity(t):
        return dense(t)[1] / np.asarray(mass_at(t), dtype=float)

    def delta(t):
        return dense(t)[2]

    return DisplacementSolution(kind=kind, span=(t0, t1),
                                _value=value, _velocity=velocity, _delta=delta)


@dataclass(frozen=True)
class CanonicalParameters:
    """Five-parameter family for the unit-mass, unit-frequency oscillator:
    u = cos(t + t0), v = A sin(t + alpha + t0), u_f = B cos(t + beta)."""

    amplitude: float            # A
    alpha: float
    t0: float = 0.0
    displacement_amplitude: float = 0.0  # B
    beta: float = 0.0

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ParameterError(f"amplitude A must be positive, got {self.amplitude}")
        if abs(self.alpha) >= math.pi:
            raise ParameterError(f"|alpha| must be below pi, got {self.alpha}")
        if self.amplitude * math.cos(self.alpha) <= 1e-12:
            raise DegenerateSolutionError(
                "canonical pair has non-positive Wronskian A cos(alpha)"
            )


def _canonical_angle_offset(params: CanonicalParameters, s):
    # Continuous offset D(s) = arg(cos s + i A sin(s+alpha)) - s, which stays
    # strictly inside (-pi, pi) whenever A cos(alpha) > 0 because both phasors
    # share the real part cos s. A principal-value wrap is therefore exact.
    a, al = params.amplitude, params.alpha
    raw = np.arctan2(a * np.sin(s + al), np.cos(s)) - s
    return np.remainder(raw + math.pi, 2.0 * math.pi) - math.pi


def canonical_frame(params: CanonicalParameters, t: float):
    """Closed-form frame of the canonical pair, plus the center value u_f(t).

    theta is the continuous branch anchored at the principal value at t=0;
    tau(0) = 0. No integration is involved.
    """
    a, al, t0 = params.amplitude, params.alpha, params.t0
    t = float(t)
    s = t + t0
    u = math.cos(s)
    v = a * math.sin(s + al)
    udot = -math.sin(s)
    vdot = a * math.cos(s + al)
    rho = math.hypot(u, v)
    wr = a * math.cos(al)
    d_now = float(_canonical_angle_offset(params, s))
    d_ref = float(_canonical_angle_offset(params, t0))
    theta0 = math.atan2(a * math.sin(t0 + al), math.cos(t0))
    theta = theta0 + t + d_now - d_ref
    tau = t + d_now - d_ref
    frame = TrajectoryFrame(
        t=t, u=u, v=v, udot=udot, vdot=vdot, rho=rho,
        rhodot=(u * udot + v * vdot) / rho, tau=tau, theta=theta,
        omega=wr, mass=1.0,
    )
    u_f = params.displacement_amplitude * math.cos(t + params.beta)
    return frame, u_f


@dataclass(frozen=True)
class CanonicalSolution:
    """Frame provider over the canonical closed forms (unit M, unit w)."""

    params: CanonicalParameters
    span: tuple[float, float] = (-np.inf, np.inf)

    @property
    def schedule(self) -> ParameterSchedule:
        return constant_schedule(1.0, 1.0)

    @property
    def omega(self) -> float:
        return self.params.amplitude * math.cos(self.params.alpha)

    def frame_at(self, t: float) -> TrajectoryFrame:
        return canonical_frame(self.params, t)[0]

    def displacement(self) -> DisplacementSolution:
        b, beta = self.params.displacement_amplitude, self.params.beta

        def value(t):
            return b * np.cos(np.asarray(t, dtype=float) + beta)

        def velocity(t):
            return -b * np.sin(np.asarray(t, dtype=float) + beta)

        def delta(t):
            # antiderivative of (B^2/2) cos(2(t+beta)), zeroed at t=0
            t = np.asarray(t, dtype=float)
            return 0.25 * b * b * (np.sin(2.0 * (t + beta)) - math.sin(2.0 * beta))

        return DisplacementSolution(kind="homogeneous", span=self.span,
                                    _value=value, _velocity=velocity, _delta=delta)


def canonical_initial_conditions(params: CanonicalParameters):
    """(u0, udot0, v0, vdot0) at t=0 for feeding the generic solver."""
    a, al, t0 = params.amplitude, params.alpha, params.t0
    return (math.cos(t0), -math.sin(t0),
            a * math.sin(t0 + al), a * math.cos(t0 + al))


def canonical_center_coefficients(params: CanonicalParameters):
    """(c_u, c_v) such that c_u u + c_v v = B cos(t + beta) for the canonical pair."""
    a, al, t0 = params.amplitude, params.alpha, params.t0
    b, beta = params.displacement_amplitude, params.beta
    # Solve the 2x2 system matching value and velocity at t=0.
    mat = np.array([
        [math.cos(t0), a * math.sin(t0 + al)],
        [-math.sin(t0), a * math.cos(t0 + al)],
    ])
    rhs = np.array([b * math.cos(beta), -b * math.sin(beta)])
    c = np.linalg.solve(mat, rhs)
    return float(c[0]), float(c[1])
