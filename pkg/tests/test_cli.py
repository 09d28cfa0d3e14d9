import csv
import io
import json

import pytest

from spinlab.cli import COMMANDS, EXIT_CONFIG, EXIT_OK, EXIT_REGIME, HANDLERS, run

REG = ["--beta", "0.5", "--h", "0.3", "--p", "3"]


def call(argv):
    buf = io.StringIO()
    code = run(argv, buf)
    return code, buf.getvalue()


def split(text):
    header = [l[2:] for l in text.splitlines() if l.startswith("# ")]
    body = [l for l in text.splitlines() if not l.startswith("#")]
    return header, body


def test_every_command_has_a_handler():
    assert set(COMMANDS) == set(HANDLERS)


def test_classify_json():
    code, text = call(["classify"] + REG)
    assert code == EXIT_OK
    header, body = split(text)
    doc = json.loads("\n".join(body))
    assert doc["classification"] == "regular"
    keys = [h.split(":")[0] for h in header]
    assert {"config_hash", "seed", "timestamp", "rng", "command"} <= set(keys)
    assert header[0].startswith("spinlab ")


def test_special_round_trip():
    code, text = call(["special", "--p", "3"])
    row = next(csv.DictReader(split(text)[1]))
    code, text = call(["classify", "--beta", row["beta"], "--h", row["h"], "--p", "3"])
    assert code == EXIT_OK and json.loads("\n".join(split(text)[1]))["classification"] == "special"


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "--beta", "-1", "--h", "0", "--p", "3"],
        ["classify", "--beta", "0.5", "--h", "0.3"],
        ["be"] + REG + ["--bogus", "1"],
        ["be"] + REG + ["--n-list", "a,b"],
        ["be"] + REG,
        ["sample"] + REG + ["--n-list", "10", "--threads", "0"],
        ["md-ratio"] + REG + ["--n-list", "100", "--r", "3"],
        ["mpl", "--beta", "0.5", "--h", "0", "--p", "3", "--n-list", "100,200,400"],
    ],
)
def test_config_errors_exit_2(argv):
    assert call(argv)[0] == EXIT_CONFIG


def test_regime_mismatch_exit_4():
    assert call(["be"] + REG + ["--n-list", "100", "--regime", "special"])[0] == EXIT_REGIME


def test_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"beta": 0.5, "h": 0.3, "p": 3, "n_list": [100, 200], "seed": 9}))
    code, text = call(["be", "--config", str(cfg)])
    assert code == EXIT_OK and "# seed: 9" in text
    # command line wins over the file
    code, text2 = call(["be", "--config", str(cfg), "--h", "0.25"])
    assert split(text)[1] != split(text2)[1]
    cfg.write_text(json.dumps({"beta": 0.5, "typo": 1}))
    assert call(["be", "--config", str(cfg)])[0] == EXIT_CONFIG
    cfg.write_text(json.dumps({"beta": "x"}))
    assert call(["be", "--config", str(cfg)])[0] == EXIT_CONFIG
    cfg.write_text("{not json")
    assert call(["be", "--config", str(cfg)])[0] == EXIT_CONFIG


def test_rows_sorted_and_reproducible():
    argv = ["be"] + REG + ["--n-list", "400,100,200"]
    _, a = call(argv)
    _, b = call(argv + ["--threads", "3"])
    ha, ra = split(a)
    hb, rb = split(b)
    assert ra == rb
    assert [int(r.split(",")[0]) for r in ra[1:]] == [100, 200, 400]
    # thread count does not change the config hash
    assert [h for h in ha if h.startswith("config_hash")] == [h for h in hb if h.startswith("config_hash")]
    assert any(h.startswith("slope") for h in ha)


def test_sample_deterministic_under_seed():
    argv = ["sample"] + REG + ["--n-list", "10", "--n-chains", "20", "--n-samples", "20", "--burn-in", "10", "--seed", "3"]
    assert split(call(argv)[1])[1] == split(call(argv)[1])[1]
    other = split(call(argv[:-1] + ["4"])[1])[1]
    assert other != split(call(argv)[1])[1]


def test_numbers_round_trip():
    _, text = call(["beta-star", "--p", "3"])
    row = next(csv.DictReader(split(text)[1]))
    from spinlab.landscape import beta_star

    assert float(row["beta_star"]) == beta_star(3)


def test_phase_diagram_changes_class_across_curve():
    _, text = call(["phase-diagram", "--p", "3", "--beta-grid", "0.6", "--h-grid", "0.06,0.07"])
    rows = list(csv.DictReader(split(text)[1]))
    assert [r["class"] for r in rows] == ["regular", "regular"]
    m = [float(r["m_list"]) for r in rows]
    assert m[0] < 0.5 < m[1]
    assert all(1 <= len(r["m_list"].split(";")) <= 3 for r in rows)


def test_out_file(tmp_path):
    path = tmp_path / "o.csv"
    code, text = call(["beta-star", "--p", "4", "--out", str(path)])
    assert code == EXIT_OK and text == ""
    assert path.read_text().splitlines()[-1].startswith("4,")


@pytest.mark.parametrize(
    "argv",
    [
        ["stein"] + REG + ["--n-list", "200"],
        ["laplace", "--beta", "0.4330127018922193", "--h", "0.2254662465701891", "--p", "3", "--n-list", "500", "--x-grid", "0,1"],
        ["md-ratio"] + REG + ["--n-list", "200", "--x-grid", "0,0.5"],
        ["critical-curve", "--p", "3", "--beta-grid", "0.5,0.6"],
    ],
)
def test_smoke(argv):
    code, text = call(argv)
    assert code == EXIT_OK
    assert len(split(text)[1]) >= 2
