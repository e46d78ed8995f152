"""Scenario files: parsing and validation for the command-line runner.

Format: INI-style sections of ``key = value`` lines. ``#`` or ``;`` start a
full-line comment; inline comments are not supported (values may legally
contain any character). Keys are case-sensitive. Unknown sections or keys are
errors, every diagnostic carries a line number, and validation collects all
problems before failing so a bad file is reported in one pass.

Sections:
    [model]                 kind, particles, lambda, + family-specific keys
    [schedule.mass]         component (kind = constant | sinusoid | table)
    [schedule.frequency]    component; extra key ``squared`` (bool)
    [schedule.force]        component, optional
    [classical]             span, initial, rtol -- or canonical parameters
    [displacement]          kind = homogeneous | forced + its fields
    [faults]                deliberate corruptions, for sensitivity demos
    [task.<name>]           one section per task; ``type`` selects the kind

The piecewise-polynomial schedule component has nested per-segment
coefficients that do not fit a flat key=value line, so scenario files support
constant/sinusoid/table; piecewise schedules remain library-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .classical import CanonicalParameters
from .errors import ParameterError, ScenarioError, ScheduleError
from .models import MODEL_KINDS, ModelSpec
from .schedules import Constant, ParameterSchedule, component_from_config
from .states import KNOWN_FAULTS

TASK_TYPES = ("residual_scan", "norm_drift", "density", "trajectory", "eigen_check")

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_lines(text: str, problems: list[str]):
    """Raw pass: {section: {key: (value, lineno)}} plus section line numbers."""
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    section_lines: dict[str, int] = {}
    current: dict[str, tuple[str, int]] | None = None
    current_name = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                problems.append(f"line {lineno}: empty section name")
                current = None
                continue
            if name in sections:
                problems.append(
                    f"line {lineno}: duplicate section [{name}] "
                    f"(first defined at line {section_lines[name]})")
                current = sections[name]
                current_name = name
                continue
            current = sections[name] = {}
            section_lines[name] = lineno
            current_name = name
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value' or '[section]', got {line!r}")
            continue
        if current is None:
            problems.append(f"line {lineno}: key outside of any section")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            problems.append(f"line {lineno}: empty key")
            continue
        if key in current:
            problems.append(
                f"line {lineno}: duplicate key {key!r} in [{current_name}] "
                f"(first set at line {current[key][1]})")
            continue
        current[key] = (value, lineno)
    return sections, section_lines


class _Section:
    """Typed, consumption-tracked access to one parsed section."""

    def __init__(self, name: str, data: dict[str, tuple[str, int]],
                 lineno: int, problems: list[str]):
        self.name = name
        self.lineno = lineno
        self._data = data
        self._problems = problems
        self._seen: set[str] = set()

    def _fetch(self, key, convert, required, default, choices, kindname):
        self._seen.add(key)
        if key not in self._data:
            if required:
                self._problems.append(
                    f"line {self.lineno}: [{self.name}] is missing required key {key!r}")
            return default
        value, lineno = self._data[key]
        try:
            out = convert(value)
        except ValueError:
            self._problems.append(
                f"line {lineno}: {key!r} must be {kindname}, got {value!r}")
            return default
        if choices is not None and out not in choices:
            self._problems.append(
                f"line {lineno}: {key!r} must be one of {', '.join(map(str, sorted(choices)))}, "
                f"got {value!r}")
            return default
        return out

    def line_of(self, key: str) -> int:
        return self._data[key][1] if key in self._data else self.lineno

    def has(self, key: str) -> bool:
        return key in self._data

    def string(self, key, required=False, default=None, choices=None):
        return self._fetch(key, str, required, default, choices, "a string")

    def number(self, key, required=False, default=None):
        return self._fetch(key, float, required, default, None, "a number")

    def integer(self, key, required=False, default=None):
        return self._fetch(key, lambda v: int(v, 0), required, default, None, "an integer")

    def boolean(self, key, required=False, default=None):
        def convert(v):
            low = v.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(v)
        return self._fetch(key, convert, required, default, None, "a boolean")

    def numbers(self, key, required=False, default=None):
        def convert(v):
            parts = [p for p in (s.strip() for s in v.split(",")) if p]
            if not parts:
                raise ValueError(v)
            return tuple(float(p) for p in parts)
        return self._fetch(key, convert, required, default, None,
                           "a comma-separated list of numbers")

    def reject_unknown(self):
        for key, (_, lineno) in self._data.items():
            if key not in self._seen:
                self._problems.append(f"line {lineno}: unknown key {key!r} in [{self.name}]")


@dataclass(frozen=True)
class ClassicalConfig:
    span: tuple[float, float]
    initial: tuple[float, float, float, float] | None
    rtol: float
    canonical: CanonicalParameters | None


@dataclass(frozen=True)
class DisplacementConfig:
    kind: str
    c_u: float = 0.0
    c_v: float = 0.0
    xp0: float = 0.0
    xpdot0: float = 0.0


@dataclass(frozen=True)
class TaskConfig:
    name: str
    type: str
    options: dict = field(repr=False)


@dataclass(frozen=True)
class Scenario:
    name: str
    model: ModelSpec
    level: int
    boost: float | None
    schedule: ParameterSchedule
    classical: ClassicalConfig | None
    displacement: DisplacementConfig | None
    faults: frozenset[str]
    tasks: tuple[TaskConfig, ...]


def _read_component(sec: _Section, problems: list[str]):
    kind = sec.string("kind", required=True, choices={"constant", "sinusoid", "table"})
    params: dict = {}
    arrays: dict = {}
    if kind == "constant":
        params["value"] = sec.number("value", required=True, default=1.0)
    elif kind == "sinusoid":
        params["base"] = sec.number("base", default=0.0)
        params["amplitude"] = sec.number("amplitude", default=0.0)
        params["rate"] = sec.number("rate", default=1.0)
        params["phase"] = sec.number("phase", default=0.0)
        params["function"] = sec.string("function", default="cos", choices={"sin", "cos"})
    elif kind == "table":
        arrays["times"] = sec.numbers("times", required=True, default=(0.0, 1.0))
        arrays["values"] = sec.numbers("values", required=True, default=(1.0, 1.0))
        if len(arrays["times"]) != len(arrays["values"]):
            problems.append(
                f"line {sec.lineno}: [{sec.name}] times and values differ in length")
    if kind is None:
        return None
    try:
        return component_from_config(kind, params, arrays)
    except (ScheduleError, ValueError) as exc:
        problems.append(f"line {sec.lineno}: [{sec.name}]: {exc}")
        return None


def _read_model(sec: _Section, problems: list[str]):
    kind = sec.string("kind", required=True, choices=set(MODEL_KINDS))
    particles = sec.integer("particles", required=True, default=2)
    lam = sec.number("lambda", required=True, default=2.0)
    fields = {
        "kind": kind,
        "n_particles": particles,
        "lam": lam,
        "hbar": sec.number("hbar", default=1.0),
        "allow_weak_coupling": sec.boolean("allow_weak_coupling", default=False),
    }
    if sec.has("alpha"):
        fields["alpha"] = sec.number("alpha")
    if sec.has("circle_length"):
        fields["circle_length"] = sec.number("circle_length")
    if sec.has("exclusion_radius"):
        fields["exclusion_radius"] = sec.number("exclusion_radius")
    level = sec.integer("level", default=0)
    boost = sec.number("boost") if sec.has("boost") else None
    if kind is None:
        return None, 0, None
    try:
        model = ModelSpec(**fields)
    except ParameterError as exc:
        problems.append(f"line {sec.lineno}: [model]: {exc}")
        return None, 0, None
    if level and kind != "jacobi_calogero":
        problems.append(
            f"line {sec.line_of('level')}: excited levels exist only for "
            f"jacobi_calogero (the other families ship ground states only)")
    if level < 0:
        problems.append(f"line {sec.line_of('level')}: level must be >= 0")
    if boost is not None and kind != "trigonometric":
        problems.append(
            f"line {sec.line_of('boost')}: boost applies only to the trigonometric model")
    return model, level, boost


def _read_tasks(name: str, sec: _Section, problems: list[str]):
    ttype = sec.string("type", required=True, choices=set(TASK_TYPES))
    if ttype is None:
        sec.reject_unknown()
        return None
    opts: dict = {"tolerance": sec.number("tolerance") if sec.has("tolerance") else None}
    if ttype == "residual_scan":
        opts["times"] = sec.numbers("times", required=True, default=(0.5,))
        opts["count"] = sec.integer("count", default=50)
        opts["buffer"] = sec.number("buffer", default=0.3)
        h_t = sec.number("h_t") if sec.has("h_t") else None
        h_x = sec.number("h_x") if sec.has("h_x") else None
        if (h_t is None) != (h_x is None):
            problems.append(
                f"line {sec.lineno}: [task.{name}] h_t and h_x must be given together")
        opts["steps"] = None if h_t is None or h_x is None else (h_t, h_x)
    elif ttype == "norm_drift":
        opts["times"] = sec.numbers("times", required=True, default=(0.0, 1.0))
        opts["method"] = sec.string("method", default="grid",
                                    choices={"grid", "monte_carlo"})
        opts["resolution"] = sec.integer("resolution", default=200)
        opts["samples"] = sec.integer("samples", default=1_000_000)
    elif ttype == "density":
        opts["time"] = sec.number("time", default=0.0)
        opts["method"] = sec.string("method", default="grid",
                                    choices={"grid", "monte_carlo"})
        opts["resolution"] = sec.integer("resolution", default=200)
        opts["samples"] = sec.integer("samples", default=1_000_000)
        opts["queries"] = sec.integer("queries", default=41)
        opts["compare"] = sec.string("compare", default="none",
                                     choices={"none", "semicircle", "pushforward"})
    elif ttype == "trajectory":
        opts["samples"] = sec.integer("samples", default=201)
    elif ttype == "eigen_check":
        opts["count"] = sec.integer("count", default=24)
        opts["buffer"] = sec.number("buffer", default=0.35)
        opts["step"] = sec.number("step") if sec.has("step") else None
        opts["seed_offset"] = sec.integer("seed_offset", default=0)
    for key, value in list(opts.items()):
        if value is None and key not in ("tolerance", "steps", "step"):
            sec.reject_unknown()
            return None
    sec.reject_unknown()
    return TaskConfig(name=name, type=ttype, options=opts)


def parse_scenario(path) -> Scenario:
    """Parse and validate a scenario file; raises ScenarioError listing every
    problem (with line numbers) on any syntax, type, or consistency failure."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError([f"cannot read {path}: {exc}"])
    problems: list[str] = []
    sections, section_lines = _parse_lines(text, problems)

    def section(name):
        if name not in sections:
            return None
        return _Section(name, sections[name], section_lines[name], problems)

    known = {"model", "scenario", "schedule.mass", "schedule.frequency",
             "schedule.force", "classical", "displacement", "faults"}
    for name in sections:
        if name not in known and not name.startswith("task."):
            problems.append(f"line {section_lines[name]}: unknown section [{name}]")

    meta = section("scenario")
    scenario_name = path.stem
    if meta is not None:
        scenario_name = meta.string("name", default=path.stem)
        meta.reject_unknown()

    model_sec = section("model")
    if model_sec is None:
        problems.append("missing required section [model]")
        model, level, boost = None, 0, None
    else:
        model, level, boost = _read_model(model_sec, problems)
        model_sec.reject_unknown()

    # Schedule: all-or-nothing on mass/frequency; force optional.
    mass_sec = section("schedule.mass")
    freq_sec = section("schedule.frequency")
    force_sec = section("schedule.force")
    squared = False
    if (mass_sec is None) != (freq_sec is None):
        missing = "schedule.frequency" if freq_sec is None else "schedule.mass"
        problems.append(f"section [{missing}] is required when the other schedule "
                        f"component is given")
    mass_comp = freq_comp = force_comp = None
    if mass_sec is not None:
        mass_comp = _read_component(mass_sec, problems)
        mass_sec.reject_unknown()
    if freq_sec is not None:
        squared = freq_sec.boolean("squared", default=False)
        freq_comp = _read_component(freq_sec, problems)
        freq_sec.reject_unknown()
    if force_sec is not None:
        force_comp = _read_component(force_sec, problems)
        force_sec.reject_unknown()
    if mass_comp is not None and freq_comp is not None:
        schedule = ParameterSchedule(mass=mass_comp, frequency=freq_comp,
                                     force=force_comp,
                                     frequency_is_squared=bool(squared))
    else:
        schedule = ParameterSchedule(mass=Constant(1.0), frequency=Constant(1.0),
                                     force=force_comp)

    classical = _read_classical(section("classical"), schedule,
                                mass_sec is not None, problems)

    disp_sec = section("displacement")
    displacement = None
    if disp_sec is not None:
        kind = disp_sec.string("kind", required=True,
                               choices={"homogeneous", "forced"})
        displacement = DisplacementConfig(
            kind=kind or "homogeneous",
            c_u=disp_sec.number("c_u", default=0.0),
            c_v=disp_sec.number("c_v", default=0.0),
            xp0=disp_sec.number("xp0", default=0.0),
            xpdot0=disp_sec.number("xpdot0", default=0.0),
        )
        disp_sec.reject_unknown()
        if model is not None and model.kind == "jacobi_calogero":
            problems.append(
                f"line {disp_sec.lineno}: [displacement] is not available for "
                f"jacobi_calogero: in relative coordinates the interaction is not "
                f"translation invariant, so only the squeeze-type unitary applies")
        if model is not None and model.kind == "trigonometric":
            problems.append(
                f"line {disp_sec.lineno}: [displacement] is not available for the "
                f"trigonometric model (free motion on a circle; boost only)")
        if kind == "forced" and force_comp is None:
            problems.append(
                f"line {disp_sec.lineno}: forced displacement needs a "
                f"[schedule.force] component")
        if classical is None:
            problems.append(
                f"line {disp_sec.lineno}: [displacement] needs a [classical] section")
        elif classical.canonical is not None:
            problems.append(
                f"line {disp_sec.lineno}: the canonical classical form carries its "
                f"own displacement (displacement_amplitude/beta); drop [displacement]")

    faults_sec = section("faults")
    faults: set[str] = set()
    if faults_sec is not None:
        for key in KNOWN_FAULTS:
            if faults_sec.boolean(key, default=False):
                faults.add(key)
        faults_sec.reject_unknown()

    tasks = []
    for name in sections:
        if not name.startswith("task."):
            continue
        task_name = name[len("task."):]
        if not task_name:
            problems.append(f"line {section_lines[name]}: empty task name")
            continue
        task = _read_tasks(task_name, section(name), problems)
        if task is not None:
            tasks.append(task)
    if not any(name.startswith("task.") for name in sections):
        problems.append("a scenario needs at least one [task.<name>] section")

    _check_consistency(model, schedule, classical, displacement, tasks,
                       section_lines, problems)

    if problems:
        raise ScenarioError(problems)
    return Scenario(name=scenario_name, model=model, level=level, boost=boost,
                    schedule=schedule, classical=classical,
                    displacement=displacement, faults=frozenset(faults),
                    tasks=tuple(tasks))


def _read_classical(sec: _Section | None, schedule: ParameterSchedule,
                    schedule_given: bool, problems: list[str]):
    if sec is None:
        return None
    canonical = None
    if sec.boolean("canonical", default=False):
        amplitude = sec.number("amplitude", required=True, default=1.0)
        alpha = sec.number("alpha", default=0.0)
        t0 = sec.number("t0", default=0.0)
        b_amp = sec.number("displacement_amplitude", default=0.0)
        beta = sec.number("beta", default=0.0)
        if schedule_given:
            problems.append(
                f"line {sec.lineno}: the canonical closed form assumes the constant "
                f"unit schedule; drop the [schedule.*] sections")
        span = sec.numbers("span", default=(0.0, 10.0))
        sec.reject_unknown()
        try:
            canonical = CanonicalParameters(amplitude=amplitude, alpha=alpha, t0=t0,
                                            displacement_amplitude=b_amp, beta=beta)
        except ParameterError as exc:
            problems.append(f"line {sec.lineno}: [classical]: {exc}")
            return None
        if len(span) != 2 or span[0] >= span[1]:
            problems.append(f"line {sec.line_of('span')}: span must be two "
                            f"increasing numbers")
            return None
        return ClassicalConfig(span=(span[0], span[1]), initial=None,
                               rtol=1e-10, canonical=canonical)
    span = sec.numbers("span", required=True, default=(0.0, 1.0))
    initial = sec.numbers("initial", default=(1.0, 0.0, 0.0, 1.0))
    rtol = sec.number("rtol", default=1e-10)
    sec.reject_unknown()
    if len(span) != 2 or span[0] >= span[1]:
        problems.append(f"line {sec.line_of('span')}: span must be two increasing numbers")
        return None
    if len(initial) != 4:
        problems.append(f"line {sec.line_of('initial')}: initial must be "
                        f"u0, udot0, v0, vdot0")
        return None
    if not (rtol and 0 < rtol <= 1e-4):
        problems.append(f"line {sec.line_of('rtol')}: rtol must be in (0, 1e-4]")
        return None
    return ClassicalConfig(span=(span[0], span[1]),
                           initial=tuple(initial), rtol=rtol, canonical=None)


def _check_consistency(model, schedule, classical, displacement, tasks,
                       section_lines, problems):
    if model is None:
        return
    needs_classical = {"residual_scan", "norm_drift", "density", "trajectory"}
    time_tasks = [t for t in tasks if t.type in needs_classical]
    if model.kind == "trigonometric":
        for t in tasks:
            if t.type != "eigen_check":
                problems.append(
                    f"line {section_lines.get('task.' + t.name, 0)}: task "
                    f"{t.name!r} ({t.type}) is not available for the trigonometric "
                    f"model; it supports eigen_check only")
        if classical is not None:
            problems.append(
                f"line {section_lines['classical']}: the trigonometric model has no "
                f"harmonic confinement, so no classical squeeze data applies")
        return
    if classical is None:
        # Stationary fallback: residual/norm/density run on the phase-evolved
        # stationary state under the constant schedule; trajectory cannot.
        for t in tasks:
            if t.type == "trajectory":
                problems.append(
                    f"line {section_lines.get('task.' + t.name, 0)}: trajectory "
                    f"task {t.name!r} needs a [classical] section")
    else:
        lo, hi = classical.span
        try:
            schedule.validate_on((lo, hi))
        except ScheduleError as exc:
            lineno = section_lines.get("schedule.mass", section_lines.get("classical", 0))
            problems.append(f"line {lineno}: {exc}")
        for t in time_tasks:
            times = t.options.get("times")
            if times is None:
                single = t.options.get("time")
                times = (single,) if single is not None else ()
            # Only the residual scan differentiates in time, so only it needs
            # stencil clearance from the span endpoints.
            margin = 0.01 * (hi - lo) if t.type == "residual_scan" else 0.0
            for value in times:
                if not (lo + margin <= value <= hi - margin):
                    problems.append(
                        f"line {section_lines.get('task.' + t.name, 0)}: task "
                        f"{t.name!r} time {value:g} is outside the classical span "
                        f"({lo:g}, {hi:g})"
                        + (" with stencil margin" if margin else ""))
    for t in tasks:
        if t.type == "density":
            if t.options["compare"] == "semicircle" and model.kind != "sutherland":
                problems.append(
                    f"line {section_lines.get('task.' + t.name, 0)}: semicircle "
                    f"comparison exists only for the sutherland model")
            if t.options["compare"] == "pushforward" and classical is None:
                problems.append(
                    f"line {section_lines.get('task.' + t.name, 0)}: pushforward "
                    f"comparison needs a [classical] section")
            if t.options["method"] == "grid" and model.coordinate_count > 3:
                problems.append(
                    f"line {section_lines.get('task.' + t.name, 0)}: grid "
                    f"quadrature is limited to 3 coordinates; use monte_carlo")
        if t.type == "norm_drift":
            if t.options["method"] == "grid" and model.coordinate_count > 3:
                problems.append(
                    f"line {section_lines.get('task.' + t.name, 0)}: grid "
                    f"quadrature is limited to 3 coordinates; use monte_carlo")
