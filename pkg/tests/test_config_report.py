import json
import math

import pytest

from conftest import exponential
from pfold import config as cfgmod
from pfold import report
from pfold.branch import Branch
from pfold.errors import ConfigError

MINIMAL = {"problem": {"p": 1.5, "n": 3, "nonlinearity": {"kind": "exponential"}}}


def test_defaults_fill_in():
    cfg = cfgmod.from_dict(MINIMAL)
    assert cfg.problem.p == 1.5 and cfg.grid.N == 1024 and cfg.sweep.steps == 32
    assert cfg.tolerances.solver_kwargs() == {"solver_tol": 1e-9, "root_tol": 1e-10}
    assert cfgmod.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


@pytest.mark.parametrize("data,path", [
    ({"problem": {"p": 1.5, "n": 3}}, "problem.nonlinearity"),
    ({"problem": {"p": 1.5, "n": 3, "nonlinearity": {"kind": "exponential"}, "q": 1}}, "problem.q"),
    ({**MINIMAL, "grid": {"N": "big"}}, "grid.N"),
    ({**MINIMAL, "grid": {"N": 10.5}}, "grid.N"),
    ({**MINIMAL, "sweep": {"a_min": 2.0, "a_max": 1.0}}, "sweep.a_max"),
    ({**MINIMAL, "outputs": {"formats": ["json", "xml"]}}, "outputs.formats[1]"),
    ({**MINIMAL, "outputs": {"paths": {"movie": "x"}}}, "outputs.paths.movie"),
    ({"problem": {"p": 1.5, "n": 3, "nonlinearity": {}}}, "problem.nonlinearity.kind"),
    ({}, "problem"),
])
def test_errors_name_key_path(data, path):
    with pytest.raises(ConfigError) as info:
        cfgmod.from_dict(data)
    assert str(info.value).startswith(path + ":")


def test_problem_errors_are_config_errors():
    with pytest.raises(ConfigError):
        cfgmod.from_dict({"problem": {"p": 3.0, "n": 3, "nonlinearity": {"kind": "exponential"}}})


def test_load_toml_and_json(tmp_path):
    toml = tmp_path / "s.toml"
    toml.write_text('seed = 4\n[problem]\np = 2.0\nn = 2\n[problem.nonlinearity]\nkind = "power"\nm = 3.0\n'
                    '[grid]\nN = 512\n')
    cfg = cfgmod.load(toml)
    assert cfg.seed == 4 and cfg.grid.N == 512 and cfg.problem.nonlinearity.kind == "power"
    js = tmp_path / "s.json"
    js.write_text(json.dumps(MINIMAL))
    assert cfgmod.load(js).problem.n == 3.0
    bad = tmp_path / "bad.toml"
    bad.write_text("[problem\n")
    with pytest.raises(ConfigError):
        cfgmod.load(bad)


def test_float_round_trip():
    for x in (0.1, 1.0 / 3.0, 15.309310892394862, 2.0**-1074, 1e300):
        assert float(report.fmt_float(x)) == x
    assert report.fmt_float(math.nan) == "nan"


def test_json_is_deterministic_and_strict():
    obj = {"b": [1, 2.5, None, True], "a": {"x": math.nan, "y": math.inf}, "c": []}
    text = report.dumps(obj)
    assert text == report.dumps(obj)
    back = json.loads(text)
    assert list(back) == ["b", "a", "c"]
    assert back["a"] == {"x": None, "y": None}
    with pytest.raises(TypeError):
        report.dumps({"x": object()})


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "sub" / "out.json"
    report.atomic_write(target, "one")
    report.atomic_write(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]


def test_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    report.atomic_write(path, report.csv_text(("x", "y"), [(0.1, None), (1.0 / 3.0, 2.0)]))
    rows = report.read_csv(path)
    assert rows == [{"x": 0.1, "y": None}, {"x": 1.0 / 3.0, "y": 2.0}]


def test_empty_branch_outputs():
    branch = Branch(exponential(1.5, 3.0), [])
    assert report.branch_csv(branch) == ",".join(report.BRANCH_COLUMNS) + "\n"
    assert json.loads(report.dumps(branch.to_dict()))["points"] == []


def test_gnuplot_scripts():
    for kind in ("branch", "profile", "eigenfunction"):
        assert "plot 'data.csv'" in report.gnuplot_script(kind, "data.csv")
    with pytest.raises(ValueError):
        report.gnuplot_script("surface", "x")
