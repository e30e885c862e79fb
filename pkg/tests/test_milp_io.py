import math
import os
import sys
import tempfile

import numpy as np
import pytest

from cies.ccp import ReserveContext, build_chance_rows
from cies.milp import CommandBackend, ModelError, ModelIR, ScipyBackend, SolverError, lsum, make_backend
from cies.milp.lpformat import (ExportError, SolutionParseError, export_lp, format_solution,
                                parse_solution)
from cies.uncertainty import ProbSeq

from conftest import needs_highs


def one_var():
    m = ModelIR("one")
    x = m.add_var("x", 0.0, 10.0)
    m.add_constraint("c1", x, ">=", 1.0)
    m.minimize(x)
    return m


def toy_chance():
    m = ModelIR("toy")
    r = m.add_var("R", 0.0, 50.0)
    build_chance_rows(m, ReserveContext([ProbSeq(10.0, [0.2, 0.3, 0.5])], 50.0, 0.9), [r])
    m.minimize(2.5 * r + 1.0)
    return m


def test_expression_arithmetic():
    m = ModelIR()
    x, y = m.add_var("x"), m.add_var("y")
    e = 2 * x - (y - 3) + 0.5 * x
    assert e.terms == {0: 2.5, 1: -1.0} and e.const == 3.0
    assert lsum([x, y, 4]).value(np.array([1.0, 2.0])) == 7.0
    with pytest.raises(ModelError):
        x * y


def test_model_rejects_bad_definitions():
    m = ModelIR()
    x = m.add_var("x")
    with pytest.raises(ModelError):
        m.add_var("x")
    with pytest.raises(ModelError):
        m.add_var("y", 2.0, 1.0)
    with pytest.raises(ModelError):
        m.add_constraint("c", x, "<", 1.0)
    m.add_constraint("c", x, "<=", 1.0)
    with pytest.raises(ModelError):
        m.add_constraint("c", x, "<=", 2.0)
    with pytest.raises(ModelError):
        m.add_constraint("d", x * math.nan, "<=", 1.0)


def test_export_single_variable_model():
    text = export_lp(one_var())
    assert "Minimize" in text
    assert "x >= 1" in text
    assert "x <= 10" in text
    assert text.rstrip().endswith("End")


def test_export_binaries_and_fixed_bounds():
    m = ModelIR()
    m.add_var("z", binary=True)
    m.add_var("f", 3.0, 3.0)
    m.add_var("u", -math.inf, math.inf)
    m.add_constraint("c", m.v("z") + m.v("f") + m.v("u"), "=", 4.0)
    text = export_lp(m)
    assert "Binary\n z" in text and " f = 3" in text and " u free" in text


@pytest.mark.parametrize("name", ["1x", "a b", "e1", "x:y"])
def test_export_rejects_bad_names(name):
    m = ModelIR()
    m.add_var(name)
    with pytest.raises(ExportError):
        export_lp(m)


def test_export_rejects_case_collisions():
    m = ModelIR()
    m.add_var("x")
    m.add_var("X")
    with pytest.raises(ExportError):
        export_lp(m)


def test_export_is_deterministic():
    assert export_lp(toy_chance()) == export_lp(toy_chance())


def test_parse_solution_examples():
    m = one_var()
    raw = parse_solution("x 1.0\n", m)
    assert raw.values[0] == 1.0
    with pytest.raises(SolutionParseError, match="'x'"):
        parse_solution("# status Optimal\n", m)
    raw = parse_solution("# status Optimal\n", m, partial_output=True)
    assert raw.values[0] == 0.0 and raw.warnings


def test_parse_rounds_near_integral_binaries():
    m = ModelIR()
    m.add_var("z", binary=True)
    assert parse_solution("z 0.9999999", m).values[0] == 1.0
    with pytest.raises(SolutionParseError):
        parse_solution("z 0.9", m)


@pytest.mark.parametrize("text,msg", [("x 1 2", "line 1"), ("y 1", "unknown"), ("\n\nx abc", "line 3"),
                                      ("x 11", "outside"), ("x nan", "non-finite")])
def test_parse_errors(text, msg):
    with pytest.raises(SolutionParseError, match=msg):
        parse_solution(text, one_var())


def test_format_parse_roundtrip():
    m = toy_chance()
    x = ScipyBackend().solve(m).values
    raw = parse_solution(format_solution(m.names(), x, "Optimal", 1.0), m)
    np.testing.assert_array_equal(raw.values, x)
    assert raw.status == "Optimal" and raw.objective == 1.0


def test_scipy_backend_toy():
    raw = ScipyBackend().solve(toy_chance())
    assert raw.objective == pytest.approx(2.5 * 13 + 1)


def test_make_backend():
    assert isinstance(make_backend({"kind": "scipy"}), ScipyBackend)
    assert isinstance(make_backend({}), CommandBackend)
    b = ScipyBackend()
    assert make_backend(b) is b
    with pytest.raises(ValueError):
        make_backend({"kind": "cplex"})
    with pytest.raises(ValueError):
        CommandBackend("solve {model}")


@needs_highs
def test_command_backend_roundtrip():
    m = toy_chance()
    raw = CommandBackend().solve(m)
    assert raw.status == "Optimal"
    assert m.objective_value(raw.values) == pytest.approx(raw.objective, abs=1e-6)
    assert raw.values[m.index("R")] == pytest.approx(13.0, abs=1e-7)


@needs_highs
def test_export_is_lossless_to_twelve_digits():
    import highspy

    m = ModelIR("digits")
    rng = np.random.default_rng(4)
    xs = [m.add_var(f"x{i}", 0.0, 100.0) for i in range(5)]
    coefs = rng.uniform(-1e3, 1e3, (4, 5))
    for r in range(4):
        m.add_constraint(f"r{r}", lsum(float(c) * x for c, x in zip(coefs[r], xs)), "<=", 123.456789012345)
    m.minimize(lsum(xs))
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "m.lp")
        open(path, "w").write(export_lp(m))
        h.readModel(path)
    lp = h.getLp()
    a = lp.a_matrix_
    dense = np.zeros((lp.num_row_, lp.num_col_))
    for j in range(lp.num_col_):
        for k in range(a.start_[j], a.start_[j + 1]):
            dense[a.index_[k], j] = a.value_[k]
    order = [list(lp.col_names_).index(f"x{i}") for i in range(5)]
    np.testing.assert_allclose(dense[:, order], coefs, rtol=1e-11)
    np.testing.assert_allclose(lp.row_upper_, 123.456789012345, rtol=1e-11)


def test_command_backend_reports_failures(tmp_path):
    fail = CommandBackend(f"{sys.executable} -c 'import sys; sys.stderr.write(\"boom\"); sys.exit(3)' {{model}} {{solution}}")
    with pytest.raises(SolverError) as exc:
        fail.solve(one_var())
    assert "boom" in exc.value.log_text
    slow = CommandBackend(f"{sys.executable} -c 'import time; time.sleep(5)' {{model}} {{solution}}", timeout=0.5)
    with pytest.raises(SolverError, match="timed out"):
        slow.solve(one_var())


def test_command_backend_with_scripted_solver(tmp_path):
    script = tmp_path / "fake.py"
    script.write_text("import sys\nopen(sys.argv[2], 'w').write('# status Optimal\\n# objective 1\\nx 1\\n')\n")
    raw = CommandBackend(f"{sys.executable} {script} {{model}} {{solution}}").solve(one_var())
    assert raw.values[0] == 1.0 and raw.objective == 1.0
