"""Numerical verification of constructed states.

Everything here treats the state as a black-box amplitude map. Derivatives
are second-order central differences; Hamiltonians are applied as amplitude
*ratios* against the stencil center, which keeps the arithmetic safe for
log-domain amplitudes whose absolute scale spans hundreds of orders.

The Hamiltonian family is

    H = sum_i p_i^2 / 2M(t) + (1/2) M(t) w(t)^2 sum_i x_i^2
        + V(x)/M(t) - F(t) sum_i x_i

with the harmonic term absent for the trigonometric model and the force term
present only when the schedule carries one. With no schedule the stationary
Hamiltonian (M = 1, w = 1, F = 0) is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamplesError, MethodError, ParameterError, SpanError
from .models import ModelSpec, min_separation, potential_batch
from .schedules import ParameterSchedule
from .states import StateEvaluator

DEFAULT_BUFFER = 0.3  # units of sqrt(hbar)
_REL_FLOOR = 1e-12
_SKIP_MODULUS = 1e-12


def typical_schedule_values(schedule: ParameterSchedule | None,
                            span: tuple[float, float] | None) -> tuple[float, float]:
    """(M_bar, w_bar) used for default stencil steps."""
    if schedule is None or span is None:
        return 1.0, 1.0
    ts = np.linspace(span[0], span[1], 129)
    m_bar = float(np.mean(schedule.mass_at(ts)))
    w_bar = math.sqrt(max(1e-2, float(np.mean(np.abs(schedule.omega_sq_at(ts))))))
    return m_bar, w_bar


def default_steps(schedule: ParameterSchedule | None,
                  span: tuple[float, float] | None,
                  hbar: float = 1.0) -> tuple[float, float]:
    m_bar, w_bar = typical_schedule_values(schedule, span)
    return 1e-3 * 2.0 * math.pi / w_bar, 1e-3 * math.sqrt(hbar / (m_bar * w_bar))


def suggested_steps(schedule: ParameterSchedule | None,
                    span: tuple[float, float] | None,
                    energy: float, hbar: float = 1.0) -> tuple[float, float]:
    """Steps tightened for high-energy states.

    The time-stencil truncation on an exact state is dominated by the phase
    curvature (E/hbar)^2, giving relative error ~ (E h_t / hbar)^2 / 6; this
    picks h_t so that term sits at 1e-6.
    """
    h_t, h_x = default_steps(schedule, span, hbar)
    h_t_energy = math.sqrt(6e-6) * hbar / abs(energy)
    return min(h_t, h_t_energy), h_x


def _amp_log(state: StateEvaluator, t: float, xs: np.ndarray):
    return state._log_amplitude(float(t), np.atleast_2d(np.asarray(xs, dtype=float)))


def _ratios(logmod, phase, logmod_ref: float, phase_ref: float) -> np.ndarray:
    return np.exp(logmod - logmod_ref + 1j * (phase - phase_ref))


def hamiltonian_ratio(state: StateEvaluator, model: ModelSpec, t: float,
                      x: np.ndarray, h_x: float,
                      schedule: ParameterSchedule | None = None) -> complex:
    """(H psi)(t, x) / psi(t, x) with a central second-difference Laplacian."""
    x = np.asarray(x, dtype=float)
    dim = x.size
    stencil = np.tile(x, (2 * dim + 1, 1))
    for i in range(dim):
        stencil[1 + 2 * i, i] += h_x
        stencil[2 + 2 * i, i] -= h_x
    logmod, phase = _amp_log(state, t, stencil)
    if not np.isfinite(logmod[0]):
        raise ParameterError("amplitude vanishes at the stencil center")
    r = _ratios(logmod, phase, logmod[0], phase[0])
    lap = np.sum(r[1::2] + r[2::2] - 2.0) / (h_x * h_x)

    hbar = model.hbar
    if schedule is None:
        m, w2, force = 1.0, 1.0, 0.0
    else:
        m = float(schedule.mass_at(t))
        w2 = float(schedule.omega_sq_at(t))
        force = float(schedule.force_at(t))
    value = -hbar * hbar / (2.0 * m) * lap
    value += float(potential_batch(model, x[None, :])[0]) / m
    if model.kind != "trigonometric":
        value += 0.5 * m * w2 * float(np.sum(x * x))
    if force != 0.0:
        value -= force * float(np.sum(x))
    return complex(value)


def schrodinger_residual(state: StateEvaluator, model: ModelSpec,
                         schedule: ParameterSchedule | None,
                         t: float, x: np.ndarray,
                         steps: tuple[float, float] | None = None) -> complex:
    """i hbar dpsi/dt - H psi at (t, x), complex."""
    if steps is None:
        steps = default_steps(schedule, (t - 3.0, t + 3.0))
    h_t, h_x = steps
    x = np.asarray(x, dtype=float)
    sep = float(min_separation(model, x[None, :])[0])
    if sep <= h_x:
        raise SpanError(
            f"stencil of width {h_x:g} crosses a singular hyperplane "
            f"(separation {sep:g})"
        )
    logmod_c, phase_c = (float(v[0]) for v in _amp_log(state, t, x[None, :]))
    lm_p, ph_p = _amp_log(state, t + h_t, x[None, :])
    lm_m, ph_m = _amp_log(state, t - h_t, x[None, :])
    r_p = complex(_ratios(lm_p, ph_p, logmod_c, phase_c)[0])
    r_m = complex(_ratios(lm_m, ph_m, logmod_c, phase_c)[0])
    hbar = model.hbar
    dt_ratio = (r_p - r_m) / (2.0 * h_t)
    h_ratio = hamiltonian_ratio(state, model, t, x, h_x, schedule)
    psi_c = np.exp(logmod_c + 1j * phase_c)
    return complex((1j * hbar * dt_ratio - h_ratio) * psi_c)


def sample_configurations(state: StateEvaluator, t: float, count: int,
                          rng: np.random.Generator,
                          buffer: float = DEFAULT_BUFFER) -> np.ndarray:
    """Draw envelope-distributed configurations respecting the singularity buffer."""
    model = state.model
    env = state.envelope
    dim = state.coordinate_count
    min_sep = max(buffer, model.exclusion_radius) * math.sqrt(model.hbar)
    rows = []
    have = 0
    for _ in range(200):
        batch = max(2 * count, 32)
        if env.kind == "box":
            xs = rng.uniform(0.0, env.period, size=(batch, dim))
        else:
            xs = rng.normal(env.center(t), env.width(t), size=(batch, dim))
        keep = xs[min_separation(model, xs) > min_sep]
        if keep.size:
            rows.append(keep)
            have += keep.shape[0]
        if have >= count:
            break
    else:
        raise InsufficientSamplesError(
            f"could not draw {count} buffered configurations (buffer {buffer} sqrt(hbar))"
        )
    return np.concatenate(rows, axis=0)[:count]


@dataclass(frozen=True)
class ResidualReport:
    points: list[tuple[float, tuple[float, ...]]]
    residual_abs: np.ndarray = field(repr=False)
    residual_rel: np.ndarray = field(repr=False)
    amplitude_mod: np.ndarray = field(repr=False)
    steps: tuple[float, float]
    buffer: float

    @property
    def max_abs(self) -> float:
        return float(np.max(self.residual_abs))

    @property
    def max_rel(self) -> float:
        return float(np.max(self.residual_rel))

    @property
    def mean_abs(self) -> float:
        return float(np.mean(self.residual_abs))

    def to_dict(self) -> dict:
        return {
            "count": len(self.points),
            "steps": {"h_t": self.steps[0], "h_x": self.steps[1]},
            "buffer": self.buffer,
            "residual_abs_max": self.max_abs,
            "residual_rel_max": self.max_rel,
            "residual_abs_mean": self.mean_abs,
        }

    def rows(self):
        """Per-point CSV rows: t, x1..xD, abs_psi, residual_abs, residual_rel."""
        for (t, x), mod, r_abs, r_rel in zip(
                self.points, self.amplitude_mod, self.residual_abs, self.residual_rel):
            yield (t, *x, mod, r_abs, r_rel)


def residual_scan(state: StateEvaluator, schedule: ParameterSchedule | None,
                  times, count: int = 50,
                  steps: tuple[float, float] | None = None,
                  buffer: float = DEFAULT_BUFFER,
                  seed: int = 0,
                  energy_scale: float | None = None) -> ResidualReport:
    """Residuals at ``count`` buffered random points per time.

    residual_rel divides by max(|E psi|, floor) taken over the points sharing
    the same scan time: the states are unnormalized, so the only meaningful
    scale is the amplitude the scan actually saw. Excited states have nodal
    surfaces where a pointwise |E psi(x)| denominator would demand unbounded
    stencil accuracy; the per-time scale keeps the metric finite there without
    hiding genuine phase or envelope faults, which perturb the residual at
    full amplitude scale.
    """
    model = state.model
    times_arr = np.atleast_1d(np.asarray(times, dtype=float))
    if steps is None:
        span = (float(np.min(times_arr)) - 1.0, float(np.max(times_arr)) + 1.0)
        steps = suggested_steps(schedule, span, state.energy, model.hbar)
    rng = np.random.default_rng([seed, 0x5ca1ab1e])
    energy = abs(state.energy if energy_scale is None else energy_scale)
    points: list[tuple[float, tuple[float, ...]]] = []
    res_abs: list[float] = []
    rel_chunks: list[np.ndarray] = []
    mods: list[float] = []
    for t in times_arr:
        xs = sample_configurations(state, float(t), count, rng, buffer)
        abs_here: list[float] = []
        mods_here: list[float] = []
        for x in xs:
            value = schrodinger_residual(state, model, schedule, float(t), x, steps)
            logmod, _ = state.log_amplitude(float(t), x)
            points.append((float(t), tuple(float(c) for c in x)))
            abs_here.append(abs(value))
            mods_here.append(math.exp(logmod))
        abs_arr = np.asarray(abs_here)
        scale = float(np.max(mods_here))
        denom = max(energy * scale, _REL_FLOOR * scale, 1e-300)
        rel_chunks.append(abs_arr / denom)
        res_abs.extend(abs_here)
        mods.extend(mods_here)
    return ResidualReport(points=points, residual_abs=np.asarray(res_abs),
                          residual_rel=np.concatenate(rel_chunks),
                          amplitude_mod=np.asarray(mods), steps=steps, buffer=buffer)


def eigen_check(state: StateEvaluator, model: ModelSpec | None,
                samples, step: float | None = None) -> tuple[float, float]:
    """(E_est, spread) from local energies Re[(H psi)/psi] at the samples.

    Uses the stationary Hamiltonian (M = 1, w = 1). Samples with |psi| below
    1e-12 are skipped; spread is the maximum deviation from the median.
    """
    if model is None:
        model = state.model
    if state.time_dependent:
        raise ParameterError("eigen_check expects a stationary amplitude")
    if step is None:
        step = 2.5e-4 * math.sqrt(model.hbar)
    locals_: list[float] = []
    for x in np.atleast_2d(np.asarray(samples, dtype=float)):
        logmod, _ = state.log_amplitude(0.0, x)
        if math.exp(logmod) < _SKIP_MODULUS:
            continue
        locals_.append(hamiltonian_ratio(state, model, 0.0, x, step).real)
    if not locals_:
        raise InsufficientSamplesError("all samples were skipped (amplitude below 1e-12)")
    values = np.asarray(locals_)
    est = float(np.median(values))
    return est, float(np.max(np.abs(values - est)))


@dataclass(frozen=True)
class NormEstimate:
    value: float
    std_error: float
    method: str
    sample_count: int
    t: float

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error,
                "method": self.method, "sample_count": self.sample_count,
                "t": self.t}


def _grid_axes(state: StateEvaluator, t: float, resolution: int):
    env = state.envelope
    dim = state.coordinate_count
    if env.kind == "box":
        axis = np.linspace(0.0, env.period, resolution)
    else:
        c, s = env.center(t), env.width(t)
        axis = np.linspace(c - 6.0 * s, c + 6.0 * s, resolution)
    return [axis] * dim


def _integrate_grid(state: StateEvaluator, t: float, axes,
                    chunk: int = 1 << 15) -> float:
    """Trapezoid integral of |psi|^2 over the tensor grid, overflow-shifted."""
    mesh_shape = tuple(len(a) for a in axes)
    weights = []
    for a in axes:
        w = np.full(len(a), a[1] - a[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        weights.append(w)
    total_pts = int(np.prod(mesh_shape))
    dim = len(axes)
    # shift tracks the running max log-modulus to keep exp() in range
    shift = -np.inf
    sums = 0.0
    for start in range(0, total_pts, chunk):
        idx = np.unravel_index(np.arange(start, min(start + chunk, total_pts)),
                               mesh_shape)
        xs = np.stack([axes[d][idx[d]] for d in range(dim)], axis=1)
        logmod, _ = _amp_log(state, t, xs)
        w = np.ones(xs.shape[0])
        for d in range(dim):
            w *= weights[d][idx[d]]
        m = float(np.max(2.0 * logmod))
        if m > shift:
            # rescale accumulated sum to the new shift
            if np.isfinite(shift):
                sums *= math.exp(shift - m)
            shift = m
        sums += float(np.sum(w * np.exp(2.0 * logmod - shift)))
    if not np.isfinite(shift):
        return 0.0
    return sums * math.exp(shift)


def norm_estimate(state: StateEvaluator, t: float, method: str = "grid",
                  resolution: int = 200, seed: int = 0,
                  samples: int = 1_000_000) -> NormEstimate:
    """Integral of |psi|^2 at fixed t."""
    dim = state.coordinate_count
    t = float(t)
    if method == "grid":
        if dim > 3:
            raise MethodError("grid quadrature is limited to 3 coordinates; use monte_carlo")
        value = _integrate_grid(state, t, _grid_axes(state, t, resolution))
        coarse = _integrate_grid(state, t, _grid_axes(state, t, resolution // 2))
        return NormEstimate(value=value, std_error=abs(value - coarse),
                            method="grid", sample_count=resolution ** dim, t=t)
    if method != "monte_carlo":
        raise MethodError(f"unknown norm method {method!r}")
    if dim > 12:
        raise MethodError("monte_carlo norm supported up to 12 coordinates")
    env = state.envelope
    rng = np.random.default_rng([seed, 0x0e57a])
    chunk = 1 << 16
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        take = min(chunk, samples - done)
        if env.kind == "box":
            xs = rng.uniform(0.0, env.period, size=(take, dim))
            log_q = -dim * math.log(env.period) * np.ones(take)
        else:
            c, s = env.center(t), env.width(t)
            xs = rng.normal(c, s, size=(take, dim))
            z = (xs - c) / s
            log_q = -0.5 * np.sum(z * z, axis=1) - dim * math.log(
                s * math.sqrt(2.0 * math.pi))
        logmod, _ = _amp_log(state, t, xs)
        w = np.exp(2.0 * logmod - log_q)
        total += float(np.sum(w))
        total_sq += float(np.sum(w * w))
        done += take
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return NormEstimate(value=mean, std_error=math.sqrt(var / samples),
                        method="monte_carlo", sample_count=samples, t=t)


def marginal_scan(state: StateEvaluator, t: float, xq,
                  method: str = "grid", resolution: int = 200, seed: int = 0,
                  samples: int = 1_000_000):
    """Particle density sigma at query positions xq.

    sigma(x) = N * (inner integral of |psi(x, .)|^2) / norm; the first
    coordinate hosts the query (exchange symmetry makes the choice
    irrelevant for the particle models).

    Returns (sigma, err) arrays matching xq.
    """
    xq = np.atleast_1d(np.asarray(xq, dtype=float))
    dim = state.coordinate_count
    n_part = state.model.n_particles
    t = float(t)
    if dim < 2:
        # One coordinate: the marginal is |psi|^2 itself, normalized.
        norm = norm_estimate(state, t, method=method, resolution=resolution,
                             seed=seed, samples=samples)
        logmod, _ = _amp_log(state, t, xq[:, None])
        sigma = n_part * np.exp(2.0 * logmod) / norm.value
        return sigma, np.full_like(sigma, norm.std_error / max(norm.value, 1e-300))

    if method == "grid":
        if dim > 3:
            raise MethodError("grid marginals are limited to 3 coordinates")
        norm = _integrate_grid(state, t, _grid_axes(state, t, resolution))
        axes = _grid_axes(state, t, resolution)[: dim - 1]
        fine = _inner_integral(state, t, xq, axes)
        coarse_axes = _grid_axes(state, t, resolution // 2)[: dim - 1]
        coarse = _inner_integral(state, t, xq, coarse_axes)
        sigma = n_part * fine / norm
        return sigma, n_part * np.abs(fine - coarse) / norm

    if method != "monte_carlo":
        raise MethodError(f"unknown marginal method {method!r}")
    env = state.envelope
    rng = np.random.default_rng([seed, 0x3a91e])
    if env.kind == "box":
        inner = rng.uniform(0.0, env.period, size=(samples, dim - 1))
        log_q = -(dim - 1) * math.log(env.period) * np.ones(samples)
    else:
        c, s = env.center(t), env.width(t)
        inner = rng.normal(c, s, size=(samples, dim - 1))
        z = (inner - c) / s
        log_q = -0.5 * np.sum(z * z, axis=1) - (dim - 1) * math.log(
            s * math.sqrt(2.0 * math.pi))
    norm = norm_estimate(state, t, method="monte_carlo", seed=seed + 1,
                         samples=samples)
    sigma = np.empty(xq.shape)
    err = np.empty(xq.shape)
    chunk = 1 << 15
    for qi, x_val in enumerate(xq):
        total = 0.0
        total_sq = 0.0
        for start in range(0, samples, chunk):
            sl = slice(start, min(start + chunk, samples))
            xs = np.concatenate(
                [np.full((inner[sl].shape[0], 1), x_val), inner[sl]], axis=1)
            logmod, _ = _amp_log(state, t, xs)
            w = np.exp(2.0 * logmod - log_q[sl])
            total += float(np.sum(w))
            total_sq += float(np.sum(w * w))
        mean = total / samples
        var = max(total_sq / samples - mean * mean, 0.0)
        sigma[qi] = n_part * mean / norm.value
        err[qi] = n_part * math.sqrt(var / samples) / norm.value
    return sigma, err


def _inner_integral(state: StateEvaluator, t: float, xq: np.ndarray, axes,
                    chunk: int = 1 << 15) -> np.ndarray:
    """integral over the last dim-1 coordinates of |psi(x_q, .)|^2, per x_q."""
    weights = []
    for a in axes:
        w = np.full(len(a), a[1] - a[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        weights.append(w)
    mesh_shape = tuple(len(a) for a in axes)
    total_pts = int(np.prod(mesh_shape))
    inner_dim = len(axes)
    out = np.zeros(xq.shape[0])
    for start in range(0, total_pts, chunk):
        idx = np.unravel_index(np.arange(start, min(start + chunk, total_pts)),
                               mesh_shape)
        inner = np.stack([axes[d][idx[d]] for d in range(inner_dim)], axis=1)
        w = np.ones(inner.shape[0])
        for d in range(inner_dim):
            w *= weights[d][idx[d]]
        for qi, x_val in enumerate(xq):
            xs = np.concatenate(
                [np.full((inner.shape[0], 1), x_val), inner], axis=1)
            logmod, _ = _amp_log(state, t, xs)
            out[qi] += float(np.sum(w * np.exp(2.0 * logmod)))
    return out


def marginal_density(state: StateEvaluator, t: float, x,
                     method: str = "grid", resolution: int = 200,
                     seed: int = 0, samples: int = 1_000_000):
    """sigma(x) at scalar or array x (normalized so its integral is N)."""
    sigma, _ = marginal_scan(state, t, x, method=method, resolution=resolution,
                             seed=seed, samples=samples)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(sigma[0])
    return sigma


def exchange_defect(state: StateEvaluator, t: float, x, i: int, j: int) -> float:
    """|psi(t, x) - psi(t, x with coordinates i and j swapped)|."""
    x = np.asarray(x, dtype=float)
    dim = x.size
    if not (0 <= i < dim and 0 <= j < dim):
        raise ParameterError(f"indices ({i}, {j}) out of range for dimension {dim}")
    swapped = x.copy()
    swapped[[i, j]] = swapped[[j, i]]
    pair = np.stack([x, swapped])
    logmod, phase = _amp_log(state, t, pair)
    amps = np.exp(logmod + 1j * phase)
    return float(abs(amps[0] - amps[1]))
