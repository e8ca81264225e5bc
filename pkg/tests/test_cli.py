import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from lcmkms import cli
from lcmkms.config import ConfigError, parse_config
from lcmkms.errors import InconsistencyError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = """\
family = "axb"
params = { primes = [2, 3] }
beta = [1, 3]

[cutoffs]
class_cutoff = 12
zeta_cutoff = 500
kms_cutoff = 500
kernel_depth = 3
ladder_height = 4

[[traces]]
type = "character"
z = [-1, 0]

[kms]
pairs = [["(2,2)", "(0,2)"]]

[boundary]
sets = [["(0,2)", "(1,2)"]]
"""


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def small(tmp_path):
    p = tmp_path / "small.toml"
    p.write_text(SMALL)
    return str(p)


def test_analyze_is_deterministic(small, capsys):
    code, first, _ = run(["analyze", "--config", small], capsys)
    assert code == 0
    _, second, _ = run(["analyze", "--config", small], capsys)
    assert first == second
    rep = json.loads(first)
    assert rep["schema"] == "kms-lcm/1"
    assert set(rep) >= {"structure", "existence", "zeta", "uniqueness", "boundary", "kms_residuals"}
    verdicts = {r["beta"]: r["verdict"] for r in rep["uniqueness"]}
    assert verdicts == {1: "unique", 3: "not unique"}
    assert [r["residual"] for r in rep["boundary"]] == [0.0, 0.75]
    for key in ("existence", "zeta", "uniqueness", "boundary", "kms_residuals"):
        for row in rep[key]:
            assert "cutoff" in row and "exact" in row, key


def test_json_and_toml_configs_agree(tmp_path, capsys):
    doc = {"family": "free", "beta": [1], "cutoffs": {"class_cutoff": 8}}
    js = tmp_path / "c.json"
    js.write_text(json.dumps(doc))
    tm = tmp_path / "c.toml"
    tm.write_text('family = "free"\nbeta = [1]\n[cutoffs]\nclass_cutoff = 8\n')
    _, a, _ = run(["existence", "--config", str(js)], capsys)
    _, b, _ = run(["existence", "--config", str(tm)], capsys)
    assert a == b and json.loads(a)["rows"][0]["pass"]


def test_kms_eval(small, capsys):
    code, out, _ = run(["kms-eval", "--config", small, "--beta", "3", "--s", "(1,1)", "--t", "(0,1)"], capsys)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 2 and all(r["regime"] == "finite type" for r in rows)
    _, out, _ = run(["kms-eval", "--config", small, "--beta", "inf", "--s", "(1,1)", "--t", "(0,1)"], capsys)
    rows = json.loads(out)["rows"]
    assert rows[-1]["beta"] == "inf" and rows[-1]["value"] == [-1.0, 0.0]
    code, _, err = run(["kms-eval", "--config", small, "--s", "(1,1)"], capsys)
    assert code == 2 and "--s and --t" in err


def test_csv_output(small, capsys):
    code, out, _ = run(["zeta", "--config", small, "--csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["beta"] for r in rows] == ["1", "3"]
    assert rows[0]["closed_form"] == "inf"


def test_output_file(small, tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run(["boundary", "--config", small, "-o", str(target)], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "boundary"


def test_negative_and_empty_beta(small, capsys):
    code, out, _ = run(["existence", "--config", small, "--beta", "-1"], capsys)
    row = json.loads(out)["rows"][0]
    assert code == 0 and not row["pass"] and any("beta >= 0" in n for n in row["notes"])
    code, out, _ = run(["analyze", "--config", small, "--beta", ""], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["existence"] == [] and rep["uniqueness"] == []


def test_config_errors_carry_line_numbers(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('family = "axb"\nbogus = 1\n')
    code, _, err = run(["analyze", "--config", str(bad)], capsys)
    assert code == 2 and f"{bad}:2: unknown key 'bogus'" in err
    bad.write_text('family = "axb"\n\n[cutoffs]\nclass_cutof = 3\n')
    code, _, err = run(["zeta", "--config", str(bad)], capsys)
    assert code == 2 and ":4:" in err
    bad.write_text('family = "c3"\n[weights]\nx1 = 2\nx2 = 3\n')
    code, _, err = run(["zeta", "--config", str(bad)], capsys)
    assert code == 2 and "invalid scale" in err
    code, _, err = run(["zeta", "--config", str(tmp_path / "missing.toml")], capsys)
    assert code == 2 and "cannot read" in err
    with pytest.raises(ConfigError) as exc:
        parse_config('family = "axb"\nbeta = "x"\n')
    assert exc.value.line == 2
    with pytest.raises(ConfigError):
        parse_config('schema = "other"\nfamily = "axb"\n')


def test_inconsistency_exit_code(small, capsys, monkeypatch):
    def boom(cfg, args):
        raise InconsistencyError("no kernel pair")

    monkeypatch.setitem(cli.COMMANDS, "zeta", boom)
    code, _, err = run(["zeta", "--config", small], capsys)
    assert code == 3 and "internal inconsistency" in err


def test_families(capsys):
    code, out, _ = run(["families"], capsys)
    rows = json.loads(out)["rows"]
    assert code == 0 and {r["family"] for r in rows} == {"free", "free_abelian", "axb", "c3", "lamplighter"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lcmkms", "families", "--csv"], capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("family,")


@pytest.mark.parametrize("name", ["axb.toml", "lamplighter.toml"])
def test_shipped_configs_parse(name):
    cfg = parse_config((CONFIGS / name).read_text())
    assert cfg.betas
