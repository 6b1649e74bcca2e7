import csv
import io
from pathlib import Path

import pytest

from psifrac import reduce
from psifrac.cli import COLUMNS, main
from psifrac.config import IDENTITIES, parse_config, parse_resolutions
from psifrac.errors import ConfigError

SMOKE = Path(__file__).resolve().parent.parent / "configs" / "smoke.cfg"

SPHERE = """\
sphere.identity = sphere-moment
sphere.radius = 1
sphere.resolutions = 0 16 0 0; 0 32 0 0; 0 64 0 0
sphere.tol = 1e-3
sphere.min_order = 1.9
sphere.monotone = true
"""


def _write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_sphere_config_passes_and_writes_rows(tmp_path, capsys):
    cfg = _write(tmp_path, SPHERE)
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    rows = _rows(tmp_path / "out" / "exp.csv")
    assert [int(r["m_surf"]) for r in rows] == [16, 32, 64]
    assert float(rows[-1]["residual"]) < 1e-3
    assert rows[0]["order"] == ""
    assert all(float(r["order"]) >= 1.9 for r in rows[1:])
    assert "sphere (sphere-moment): PASS" in capsys.readouterr().out


def test_csv_header_is_stable(tmp_path):
    cfg = _write(tmp_path, SPHERE)
    main(["run", str(cfg), "--out", str(tmp_path)])
    header = (tmp_path / "exp.csv").read_text().splitlines()[0]
    assert tuple(header.split(",")) == COLUMNS


def test_failed_contract_exits_one(tmp_path, capsys):
    cfg = _write(tmp_path, SPHERE.replace("tol = 1e-3", "tol = 1e-9"))
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_tol_scale_loosens_contracts(tmp_path):
    cfg = _write(tmp_path, SPHERE.replace("tol = 1e-3", "tol = 1e-5"))
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 1
    assert main(["run", str(cfg), "--out", str(tmp_path), "--tol-scale", "100"]) == 0


def test_empty_resolutions_exit_two(tmp_path, capsys):
    cfg = _write(tmp_path, "e.identity = stokes\ne.resolutions = ;\n")
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "e.resolutions" in err


def test_missing_file_exits_two(tmp_path):
    assert main(["run", str(tmp_path / "absent.cfg")]) == 2


def test_unknown_identity_lists_valid_names(tmp_path, capsys):
    cfg = _write(tmp_path, "e.identity = stoke\ne.resolutions = 4 4 0 0\n")
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert all(name in err for name in IDENTITIES)


def test_runtime_error_is_recorded_per_row(tmp_path, capsys):
    text = "bp.identity = frac-bp\nbp.x = 1 0.5 0.5\nbp.resolutions = 6 6 16 0; 8 8 16 0\n"
    cfg = _write(tmp_path, text)
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 1
    rows = _rows(tmp_path / "exp.csv")
    assert len(rows) == 2
    assert all(r["status"].startswith("error: DomainError") for r in rows)
    assert all(r["residual"] == "" for r in rows)


def test_list_prints_catalogue_in_fixed_order(capsys):
    assert main(["list"]) == 0
    first = capsys.readouterr().out
    main(["list"])
    assert capsys.readouterr().out == first
    lines = first.splitlines()
    assert [line.split(":")[0] for line in lines] == list(IDENTITIES)
    assert all("\u2014" not in line for line in lines)


def test_jobs_must_be_positive(tmp_path):
    cfg = _write(tmp_path, SPHERE)
    assert main(["run", str(cfg), "--jobs", "0"]) == 2


def test_csv_is_byte_identical_across_job_counts(tmp_path, monkeypatch):
    outputs = []
    for jobs in ("1", "8"):
        out = tmp_path / jobs
        assert main(["run", str(SMOKE), "--out", str(out), "--jobs", jobs]) == 0
        outputs.append((out / "smoke.csv").read_bytes())
    monkeypatch.setenv("VERIFY_JOBS", "4")
    reduce.set_jobs(None)
    out = tmp_path / "env"
    assert main(["run", str(SMOKE), "--out", str(out)]) == 0
    outputs.append((out / "smoke.csv").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


# --- configuration parsing -----------------------------------------------------


def test_complex_orders_parse_with_i_suffix():
    (cfg,) = parse_config("e.identity = fund-theorem\ne.alpha = 0.5+0.2i\ne.resolutions = 0 0 64 0\n")
    assert cfg.alpha == (0.5 + 0.2j,) * 3


def test_config_defaults_and_order_of_experiments():
    cfgs = parse_config("b.identity = stokes\na.identity = sphere-moment\nb.resolutions = 4 4 0 0\na.resolutions = 0 8 0 0\n")
    assert [c.name for c in cfgs] == ["b", "a"]
    assert cfgs[0].f.family == "trig" and cfgs[0].y == (0.5, 0.5, 0.5)


@pytest.mark.parametrize(
    "text, line, field",
    [
        ("e.identity = stokes\ne.identity = stokes\n", 2, "e.identity"),
        ("e.identity = stokes\ne.colour = red\n", 2, "e.colour"),
        ("e.identity = stokes\ne.resolutions = 4 4 0 0\ne.alpha = 0.5 0.5\n", 3, "e.alpha"),
        ("e.identity = stokes\n", 1, "e.resolutions"),
    ],
)
def test_config_errors_carry_line_and_field(text, line, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.field == field


def test_empty_config_is_rejected():
    with pytest.raises(ConfigError):
        parse_config("# only a comment\n")


@pytest.mark.parametrize("raw", ["8 8 0 0; 8 8 0 0", "16 8 0 0; 8 16 0 0", "8 8 0"])
def test_resolutions_must_refine(raw):
    with pytest.raises(ValueError):
        parse_resolutions(raw)
