import textwrap

import pytest

import cscoherent as cs

BASE = """\
[scenario]
name = demo

[model]
kind = sutherland
particles = 2
lambda = 2

[classical]
span = 0, 5
initial = 1, 0, 0, 1

[task.res]
type = residual_scan
times = 1.0
count = 8
"""


def parse_text(tmp_path, text, filename="case.ini"):
    path = tmp_path / filename
    path.write_text(textwrap.dedent(text))
    return cs.parse_scenario(path)


def problems_of(tmp_path, text):
    with pytest.raises(cs.ScenarioError) as excinfo:
        parse_text(tmp_path, text)
    return excinfo.value.problems


def assert_problem(problems, fragment, line=None):
    hits = [p for p in problems if fragment in p]
    assert hits, f"no problem mentions {fragment!r}; got {problems}"
    if line is not None:
        assert any(p.startswith(f"line {line}:") for p in hits), \
            f"expected {fragment!r} at line {line}, got {hits}"


def test_minimal_scenario_parses(tmp_path):
    sc = parse_text(tmp_path, BASE)
    assert sc.name == "demo"
    assert sc.model.kind == "sutherland"
    assert sc.model.n_particles == 2
    assert sc.classical.span == (0.0, 5.0)
    assert sc.classical.initial == (1.0, 0.0, 0.0, 1.0)
    assert sc.level == 0 and sc.boost is None
    assert sc.faults == frozenset()
    assert len(sc.tasks) == 1
    task = sc.tasks[0]
    assert task.name == "res" and task.type == "residual_scan"
    assert task.options["times"] == (1.0,)
    assert task.options["count"] == 8
    # no schedule sections: constant unit schedule
    assert sc.schedule.mass_at(2.0) == 1.0
    assert sc.schedule.omega_sq_at(2.0) == 1.0


def test_name_defaults_to_file_stem(tmp_path):
    text = BASE.replace("[scenario]\nname = demo\n\n", "")
    path = tmp_path / "fallback.ini"
    path.write_text(text)
    assert cs.parse_scenario(path).name == "fallback"


def test_missing_file_is_one_problem(tmp_path):
    with pytest.raises(cs.ScenarioError) as excinfo:
        cs.parse_scenario(tmp_path / "absent.ini")
    assert "cannot read" in excinfo.value.problems[0]


def test_syntax_problems_carry_line_numbers(tmp_path):
    text = "what is this\n" + BASE + "[model]\nkind = sutherland\n"
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "expected 'key = value'", line=1)
    # the prefix line shifts BASE down one; the second [model] opens line 18
    assert_problem(problems, "duplicate section [model]", line=18)


def test_duplicate_key_reported(tmp_path):
    text = BASE + "\n[task.extra]\ntype = trajectory\ntype = trajectory\n"
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "duplicate key 'type'", line=20)


def test_key_outside_section(tmp_path):
    problems = problems_of(tmp_path, "orphan = 1\n" + BASE)
    assert_problem(problems, "key outside of any section", line=1)


def test_unknown_section_and_key(tmp_path):
    text = BASE + "\n[warp]\nfactor = 9\n"
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "unknown section [warp]", line=18)

    text = BASE.replace("lambda = 2", "lambda = 2\ncolour = blue")
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "unknown key 'colour'", line=8)


def test_missing_model_and_missing_tasks(tmp_path):
    text = "[task.res]\ntype = trajectory\n"
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "missing required section [model]")

    text = "[model]\nkind = sutherland\nparticles = 2\nlambda = 2\n"
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "at least one [task.<name>] section")


def test_typed_value_diagnostics(tmp_path):
    text = BASE.replace("lambda = 2", "lambda = fast")
    assert_problem(problems_of(tmp_path, text), "'lambda' must be a number", line=7)

    text = BASE.replace("kind = sutherland", "kind = quartic")
    assert_problem(problems_of(tmp_path, text), "'kind' must be one of", line=5)

    text = BASE.replace("particles = 2", "particles = 2.5")
    assert_problem(problems_of(tmp_path, text), "'particles' must be an integer")


def test_model_construction_errors_surface(tmp_path):
    text = BASE.replace("kind = sutherland\nparticles = 2",
                        "kind = three_body\nparticles = 4\nalpha = 2")
    assert_problem(problems_of(tmp_path, text), "exactly 3 particles", line=4)


def test_level_and_boost_gates(tmp_path):
    text = BASE.replace("lambda = 2", "lambda = 2\nlevel = 1")
    assert_problem(problems_of(tmp_path, text),
                   "excited levels exist only for", line=8)

    text = BASE.replace("lambda = 2", "lambda = 2\nboost = 0.5")
    assert_problem(problems_of(tmp_path, text),
                   "boost applies only to the trigonometric", line=8)


def test_step_keys_must_pair(tmp_path):
    text = BASE + "h_t = 1e-4\n"
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "h_t and h_x must be given together")
    # the lone key must not additionally be reported as unknown
    assert not any("unknown key" in p for p in problems)

    sc = parse_text(tmp_path, BASE + "h_t = 1e-4\nh_x = 2e-4\n")
    assert sc.tasks[0].options["steps"] == (1e-4, 2e-4)


def test_displacement_gates(tmp_path):
    jacobi = BASE.replace("kind = sutherland\nparticles = 2",
                          "kind = jacobi_calogero\nparticles = 3")
    text = jacobi + "\n[displacement]\nkind = homogeneous\nc_u = 0.5\n"
    assert_problem(problems_of(tmp_path, text), "squeeze", line=18)

    text = BASE + "\n[displacement]\nkind = forced\n"
    assert_problem(problems_of(tmp_path, text),
                   "forced displacement needs a", line=18)

    no_classical = BASE.replace(
        "[classical]\nspan = 0, 5\ninitial = 1, 0, 0, 1\n\n", "")
    text = no_classical + "\n[displacement]\nkind = homogeneous\nc_u = 1\n"
    assert_problem(problems_of(tmp_path, text),
                   "[displacement] needs a [classical] section")


def test_canonical_exclusions(tmp_path):
    canonical = BASE.replace("span = 0, 5\ninitial = 1, 0, 0, 1",
                             "canonical = true\namplitude = 1.3\nalpha = 0.4")
    text = canonical + "\n[schedule.mass]\nkind = constant\nvalue = 1\n" \
        + "\n[schedule.frequency]\nkind = constant\nvalue = 1\n"
    assert_problem(problems_of(tmp_path, text), "drop the [schedule.*]")

    text = canonical + "\n[displacement]\nkind = homogeneous\nc_u = 1\n"
    assert_problem(problems_of(tmp_path, text), "carries its own displacement")

    sc = parse_text(tmp_path, canonical)
    assert sc.classical.canonical is not None
    assert sc.classical.canonical.amplitude == 1.3


def test_trigonometric_restrictions(tmp_path):
    trig = BASE.replace("kind = sutherland\nparticles = 2",
                        "kind = trigonometric\nparticles = 2\ncircle_length = 6.28")
    problems = problems_of(tmp_path, trig)
    assert_problem(problems, "supports eigen_check only")
    assert_problem(problems, "no classical squeeze data")

    good = """\
    [model]
    kind = trigonometric
    particles = 3
    lambda = 2
    circle_length = 6.28
    boost = 0.5

    [task.eig]
    type = eigen_check
    count = 12
    """
    sc = parse_text(tmp_path, good)
    assert sc.boost == 0.5
    assert sc.tasks[0].type == "eigen_check"


def test_mass_positivity_checked_on_span(tmp_path):
    text = BASE + ("\n[schedule.mass]\nkind = sinusoid\nbase = 0.5\n"
                   "amplitude = 1\nrate = 1\n"
                   "\n[schedule.frequency]\nkind = constant\nvalue = 1\n")
    assert_problem(problems_of(tmp_path, text),
                   "mass schedule is non-positive")


def test_schedule_components_pair_up(tmp_path):
    text = BASE + "\n[schedule.mass]\nkind = constant\nvalue = 1\n"
    assert_problem(problems_of(tmp_path, text),
                   "section [schedule.frequency] is required")


def test_table_component_validation(tmp_path):
    text = BASE + ("\n[schedule.mass]\nkind = table\ntimes = 0, 1, 2\n"
                   "values = 1, 1\n"
                   "\n[schedule.frequency]\nkind = constant\nvalue = 1\n")
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "times and values differ in length")

    text = BASE + ("\n[schedule.mass]\nkind = table\ntimes = 0, 1, 2\n"
                   "values = 1, 1, 1\n"
                   "\n[schedule.frequency]\nkind = constant\nvalue = 1\n")
    assert_problem(problems_of(tmp_path, text), "at least 4 nodes")


def test_classical_field_validation(tmp_path):
    text = BASE.replace("span = 0, 5", "span = 5, 0")
    assert_problem(problems_of(tmp_path, text),
                   "span must be two increasing numbers", line=10)

    text = BASE.replace("initial = 1, 0, 0, 1", "initial = 1, 0")
    assert_problem(problems_of(tmp_path, text), "u0, udot0, v0, vdot0", line=11)

    text = BASE.replace("initial = 1, 0, 0, 1", "initial = 1, 0, 0, 1\nrtol = 0.5")
    assert_problem(problems_of(tmp_path, text), "rtol must be in (0, 1e-4]")


def test_task_times_must_fit_the_span(tmp_path):
    # residual scans differentiate in time: endpoints are excluded
    text = BASE.replace("times = 1.0", "times = 0.0")
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "outside the classical span")
    assert_problem(problems, "with stencil margin")

    # containment-only tasks accept the endpoint but not beyond
    text = BASE + "\n[task.norms]\ntype = norm_drift\ntimes = 0.0, 5.0\n"
    parse_text(tmp_path, text)
    text = BASE + "\n[task.norms]\ntype = norm_drift\ntimes = 0.0, 7.5\n"
    assert_problem(problems_of(tmp_path, text), "time 7.5 is outside")


def test_trajectory_needs_classical(tmp_path):
    text = ("[model]\nkind = sutherland\nparticles = 2\nlambda = 2\n"
            "\n[task.orbit]\ntype = trajectory\n")
    assert_problem(problems_of(tmp_path, text),
                   "trajectory task 'orbit' needs a [classical] section")


def test_density_gates(tmp_path):
    text = BASE.replace("particles = 2", "particles = 5") \
        + "\n[task.dens]\ntype = density\ncompare = semicircle\n"
    problems = problems_of(tmp_path, text)
    assert_problem(problems, "grid quadrature is limited to 3 coordinates")

    three = BASE.replace("kind = sutherland\nparticles = 2",
                         "kind = three_body\nparticles = 3\nalpha = 2")
    text = three + "\n[task.dens]\ntype = density\ncompare = semicircle\n"
    assert_problem(problems_of(tmp_path, text),
                   "semicircle comparison exists only")

    no_classical = ("[model]\nkind = sutherland\nparticles = 2\nlambda = 2\n"
                    "\n[task.dens]\ntype = density\ncompare = pushforward\n")
    assert_problem(problems_of(tmp_path, no_classical),
                   "pushforward comparison needs a [classical] section")


def test_faults_parse_and_reject_unknown(tmp_path):
    text = BASE + "\n[faults]\nzero_delta = true\n"
    sc = parse_text(tmp_path, text)
    assert sc.faults == frozenset({"zero_delta"})

    text = BASE + "\n[faults]\nswap_sign = true\n"
    assert_problem(problems_of(tmp_path, text), "unknown key 'swap_sign'")


def test_all_problems_collected_in_one_pass(tmp_path):
    text = """\
    [model]
    kind = sutherland
    particles = 2
    lambda = soft
    boost = 1

    [classical]
    span = 5, 0

    [task.res]
    type = residual_scan
    times = 9.0
    h_t = 1e-4
    """
    problems = problems_of(tmp_path, text)
    assert len(problems) >= 4
    assert_problem(problems, "'lambda' must be a number")
    assert_problem(problems, "boost applies only")
    assert_problem(problems, "span must be two increasing numbers")
    assert_problem(problems, "h_t and h_x must be given together")


def test_empty_task_name_rejected(tmp_path):
    text = BASE + "\n[task.]\ntype = trajectory\n"
    assert_problem(problems_of(tmp_path, text), "empty task name")
