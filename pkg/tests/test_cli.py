import io
import json
import subprocess
import sys

import pytest

from henon_basins import cli
from henon_basins.verify import CATALOG


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def test_classify_examples():
    code, text = run("classify", "--henon", "0.1", "2", "--point", "0.5", "0.1")
    assert code == 0 and text.startswith("fate=ToAlpha ")
    code, text = run("classify", "--henon", "0.1", "2", "--point", "0", "0")
    assert text == "fate=ToOrigin iters=0 witness=none\n"
    code, text = run("classify", "--henon", "0.1", "2", "--point", "2", "0.1")
    assert text.endswith("witness=RightWedge\n")
    code, text = run("classify", "--henon", "0.1", "2", "--point", "0", "1", "--backward")
    assert text.startswith("fate=ToInfinity") and "WDelta" in text


def test_zero_delta_is_a_usage_error(capsys):
    code, _ = run("classify", "--henon", "0", "2", "--point", "1", "1")
    assert code == 2
    assert "delta" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "--henon", "0.1"],
        ["classify", "--henon", "0.1", "2"],
        ["classify", "--henon", "a", "2", "--point", "0", "0"],
        ["frobnicate"],
        ["classify", "--general", "cubic(1)", "linear(0.1)", "--point", "0", "0"],
    ],
)
def test_malformed_arguments(argv, capsys):
    assert run(*argv)[0] == 2


def test_general_map_classify():
    code, text = run("classify", "--general", "logistic(2)", "linear_plus_sine(0.1,0.001)", "--point", "0.5", "0.1")
    assert code == 0 and text.startswith("fate=ToAlpha")


def test_basin_outputs_are_reproducible(tmp_path):
    files = []
    for k in range(2):
        ppm, csv = tmp_path / f"b{k}.ppm", tmp_path / f"b{k}.csv"
        code, text = run("basin", "--henon", "0.1", "2", "--grid", "-1", "2", "-0.5", "0.5", "60", "40",
                         "--ppm", str(ppm), "--boundary", str(csv), "--workers", str(k + 1))
        assert code == 0 and "ToAlpha=" in text
        files.append((ppm.read_bytes(), csv.read_text()))
    assert files[0] == files[1]
    assert files[0][0].startswith(b"P6\n60 40\n255\n")
    assert files[0][1].startswith("x,y\n")


def test_manifold_command(tmp_path):
    out = tmp_path / "ws.csv"
    code, _ = run("manifold", "--henon", "0.1", "2", "--kind", "stable", "--branch", "minus",
                  "--arclength", "1", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "s,x,y" and lines[1] == "0,0,0"


def test_manifold_requires_saddle(capsys):
    code, _ = run("manifold", "--henon", "1.5", "0.5", "--arclength", "1")
    assert code == 3


def test_verify_pass_and_fail(tmp_path):
    out = tmp_path / "r.json"
    code, text = run("verify", "--henon", "0.1", "2", "--checks", "conjugacy_flip", "lemma5_beta_cone",
                     "--samples", "50", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert [d["verdict"] for d in data] == ["Pass", "Pass"]
    assert "conjugacy_flip Pass" in text
    code, _ = run("verify", "--henon", "0.9", "2", "--checks", "prop7_polydisk", "--samples", "20")
    assert code == 1


def test_verify_unknown_check(capsys):
    assert run("verify", "--henon", "0.1", "2", "--checks", "nope")[0] == 2


def test_sweep_examples(tmp_path, capsys):
    code, text = run("sweep", "--mu", "2", "--delta", "0.05", "0.1", "0.2", "0.4", "--samples", "100")
    assert code == 0
    header, row = text.splitlines()
    assert header == "mu,delta_star,prefix_length,n_tested"
    mu, star, prefix, n = row.split(",")
    assert float(mu) == 2 and int(n) == 4 and int(prefix) >= 1
    assert float(star) == [0.05, 0.1, 0.2, 0.4][int(prefix) - 1]
    code, text = run("sweep", "--mu", "2", "--delta")
    assert (code, text) == (0, "mu,delta_star,prefix_length,n_tested\n")
    assert run("sweep", "--mu", "0.5", "--delta", "0.1")[0] == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# reference parameters\nhenon = 0.1 2\npoint = 0.5 0.1\n")
    code, text = run("classify", "--config", str(cfg))
    assert text.startswith("fate=ToAlpha")
    code, text = run("classify", "--config", str(cfg), "--point", "-1", "0")
    assert text.startswith("fate=ToInfinity")
    code, text = run("classify", "--config", str(cfg), "--general", "logistic(2)", "linear(0.1)")
    assert code == 0
    cfg.write_text("colour = blue\n")
    assert run("classify", "--config", str(cfg))[0] == 2


def test_run_config_round_trip():
    cfg = cli.load_config(["basin", "--henon", "0.1", "2", "--grid", "-1", "2", "-0.5", "0.5", "40", "30",
                           "--max-iter", "500", "--ppm", "x.ppm"])
    text = cfg.to_text()
    again = cli.RunConfig.from_text(text)
    assert again == cfg
    assert again.to_text() == text


def test_help_lists_catalog(capsys):
    assert run("--help")[0] == 0
    text = capsys.readouterr().out
    for cid, entry in CATALOG.items():
        assert cid in text and entry.label in text
    assert "linear_plus_sine" in text


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "henon_basins", "classify", "--henon", "0.1", "2", "--point", "0", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "fate=ToOrigin iters=0 witness=none\n"
