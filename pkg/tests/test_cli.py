"""Config parsing and CLI subcommand tests (driven through main())."""

import json

import numpy as np
import pytest

from lpwanleak import (
    SWEEP_CSV_HEADER,
    COST_CSV_HEADER,
    IntervalModel,
    bin_timestamps,
    chi_square_threshold,
    cost_curves,
    gen_run,
    run_dispersion,
    run_from_csv,
    to_timestamps,
)
from lpwanleak.cli import (
    Config,
    ConfigError,
    DataError,
    main,
    parse_config,
    read_trace_csv,
    write_trace_csv,
)

GOOD_CONFIG = """\
# comment line
[model]
slots = 10
base_rate = 1.5

[sweep]
anomaly_rates = 0.1,0.2,0.3
intensities = 10:40:10
detector = "idealized"

[run]
seed = 7
run.format = csv
"""


def test_parse_config_values():
    sections = parse_config(GOOD_CONFIG)
    assert sections["model"]["slots"] == 10
    assert sections["model"]["base_rate"] == 1.5
    assert sections["sweep"]["anomaly_rates"] == (0.1, 0.2, 0.3)
    assert sections["sweep"]["intensities"] == (10.0, 20.0, 30.0, 40.0)
    assert sections["sweep"]["detector"] == "idealized"
    assert sections["run"]["seed"] == 7
    assert sections["run"]["format"] == "csv"


def test_parse_config_dotted_keys_outside_section():
    sections = parse_config("model.slots = 12\n")
    assert sections["model"]["slots"] == 12


@pytest.mark.parametrize("text,fragment", [
    ("[magic]\n", "unknown section"),
    ("[model]\nflux = 1\n", "unknown config key"),
    ("[model]\nslots = 10\nslots = 12\n", "duplicate"),
    ("slots = 10\n", "outside any section"),
    ("[model]\nslots =\n", "empty value"),
    ("[sweep]\nanomaly_rates = 0.1:0.95:0.2\n", "off the step grid"),
    ("[sweep]\nintensities = 1:2:0\n", "step must be positive"),
    ("[model]\nslots\n", "expected key = value"),
])
def test_parse_config_errors(text, fragment):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert fragment in str(err.value)
    assert "line" in str(err.value)


def test_config_typed_getters():
    cfg = Config(parse_config(GOOD_CONFIG))
    assert cfg.get_int("model", "slots") == 10
    assert cfg.get_float("model", "base_rate") == 1.5
    assert cfg.get_floats("model", "base_rate") == (1.5,)
    assert cfg.get_floats("sweep", "anomaly_rates") == (0.1, 0.2, 0.3)
    assert cfg.get_str("sweep", "detector") == "idealized"
    assert cfg.get("model", "intensity", None) is None
    with pytest.raises(ConfigError):
        cfg.get("model", "intensity")
    with pytest.raises(ConfigError):
        cfg.get_int("model", "base_rate")
    with pytest.raises(ConfigError):
        cfg.get_float("sweep", "detector")
    with pytest.raises(ConfigError):
        cfg.get_str("model", "slots")


def test_config_hash_is_stable_and_sensitive():
    a = Config(parse_config(GOOD_CONFIG))
    b = Config(parse_config(GOOD_CONFIG))
    c = Config(parse_config(GOOD_CONFIG.replace("seed = 7", "seed = 8")))
    assert a.hash() == b.hash()
    assert a.hash() != c.hash()
    assert len(a.hash()) == 12
    int(a.hash(), 16)


def test_trace_csv_roundtrip(tmp_path):
    path = tmp_path / "trace.csv"
    ts = [1.5, 2.25, 7.125]
    write_trace_csv(path, ts, device="sensor-1", comment="prov")
    trace = read_trace_csv(path)
    assert trace.device == "sensor-1"
    assert np.array_equal(trace.timestamps, np.array(ts))
    trace = read_trace_csv(path, device="sensor-1")
    assert trace.timestamps.size == 3
    with pytest.raises(DataError):
        read_trace_csv(path, device="other")


def test_trace_csv_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,dev\n1.0,a\n")
    with pytest.raises(DataError):
        read_trace_csv(bad)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DataError):
        read_trace_csv(empty)
    multi = tmp_path / "multi.csv"
    multi.write_text("timestamp_s,device_id\n1.0,a\n2.0,b\n")
    with pytest.raises(DataError) as err:
        read_trace_csv(multi)
    assert "multiple devices" in str(err.value)
    disorder = tmp_path / "disorder.csv"
    disorder.write_text("timestamp_s,device_id\n2.0,a\n1.0,a\n")
    with pytest.raises(DataError) as err:
        read_trace_csv(disorder)
    assert "line 3" in str(err.value)
    nonnum = tmp_path / "nonnum.csv"
    nonnum.write_text("timestamp_s,device_id\nzap,a\n")
    with pytest.raises(DataError):
        read_trace_csv(nonnum)
    wide = tmp_path / "wide.csv"
    wide.write_text("timestamp_s,device_id\n1.0,a,extra\n")
    with pytest.raises(DataError):
        read_trace_csv(wide)
    with pytest.raises(DataError):
        read_trace_csv(tmp_path / "missing.csv")


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_solve_command(tmp_path):
    cfg = _write(tmp_path, "solve.cfg", """\
[model]
slots = 10
base_rate = 1.0
intensity = 10
anomaly_rate = 0.5
""")
    out = tmp_path / "strategy.json"
    assert main(["solve", "--config", cfg, "--seed", "5", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"P_wf", "P_f", "epsilon", "cost", "feasible_optimal",
                        "degenerate", "model", "knowledge", "meta"}
    assert (doc["P_wf"], doc["P_f"]) == (0.0, 1.0)
    assert doc["feasible_optimal"] is True
    assert doc["meta"]["seed"] == 5
    assert doc["meta"]["tool"] == "lpwanleak"
    assert len(doc["meta"]["config_hash"]) == 12


def test_solve_format_handling(tmp_path):
    # a config-level format preference is ignored by the json-only command;
    # an explicit contradictory flag is an error
    cfg = _write(tmp_path, "solve.cfg", """\
[model]
intensity = 10
anomaly_rate = 0.5
[run]
seed = 2
format = csv
""")
    out = tmp_path / "s.json"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["meta"]["seed"] == 2
    assert main(["solve", "--config", cfg, "--format", "csv"]) == 2


def test_solve_rejects_multi_cell_grid(tmp_path):
    cfg = _write(tmp_path, "multi.cfg", """\
[model]
slots = 10
[sweep]
anomaly_rates = 0.1,0.2
intensities = 10
""")
    assert main(["solve", "--config", cfg, "--seed", "1"]) == 2


def test_sweep_command_csv(tmp_path):
    cfg = _write(tmp_path, "sweep.cfg", """\
[sweep]
anomaly_rates = 0.2,0.5
intensities = 10
n_intervals = 1000
""")
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(["sweep", "--config", cfg, "--seed", "9", "--out", str(out1)]) == 0
    assert main(["sweep", "--config", cfg, "--seed", "9", "--out", str(out2)]) == 0
    text = out1.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# lpwanleak ")
    assert "config_hash=" in lines[0] and "seed=9" in lines[0]
    assert lines[1] == SWEEP_CSV_HEADER
    assert len(lines) == 4
    assert out1.read_bytes() == out2.read_bytes()


def test_sweep_command_json(tmp_path):
    cfg = _write(tmp_path, "sweep.cfg", """\
[sweep]
anomaly_rates = 0.5
intensities = 10
n_intervals = 1000
[run]
seed = 3
""")
    out = tmp_path / "sweep.json"
    assert main(["sweep", "--config", cfg, "--format", "json",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["seed"] == 3  # config seed used when flag is absent
    assert len(doc["rows"]) == 1
    row = doc["rows"][0]
    assert row["R_p"] == 0.5 and row["I"] == 10.0
    assert row["feasible_optimal"] is True
    assert main(["sweep", "--config", cfg, "--seed", "4", "--out",
                 str(out)]) == 0  # flag wins over config
    assert "seed=4" in out.read_text().splitlines()[0]


def test_sweep_rejects_impossible_cell(tmp_path):
    cfg = _write(tmp_path, "bad.cfg", """\
[sweep]
anomaly_rates = 0.2,1.5
intensities = 10
n_intervals = 1000
""")
    assert main(["sweep", "--config", cfg, "--seed", "1"]) == 2


def test_simulate_command_with_dump(tmp_path):
    dump = tmp_path / "run.csv"
    cfg = _write(tmp_path, "sim.cfg", f"""\
[sweep]
anomaly_rates = 0.5
intensities = 10
n_intervals = 1000
[simulate]
dump_run = "{dump}"
[run]
seed = 11
""")
    out = tmp_path / "cell.csv"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1] == SWEEP_CSV_HEADER
    run = run_from_csv(str(dump))
    assert len(run) == 1000
    assert dump.read_text().startswith("# lpwanleak ")
    # simulate insists on a single cell
    multi = _write(tmp_path, "sim2.cfg", """\
[sweep]
anomaly_rates = 0.2,0.5
intensities = 10
n_intervals = 1000
""")
    assert main(["simulate", "--config", multi, "--seed", "1"]) == 2


def test_analyze_command(tmp_path):
    run = gen_run(IntervalModel(10, 1.0, 40.0, 0.3), 50, 21)
    ts = to_timestamps(run, slot_width=2.0)
    trace = tmp_path / "trace.csv"
    write_trace_csv(trace, ts, device="node-7")
    cfg = _write(tmp_path, "an.cfg", """\
[analyze]
slot_width = 2.0
slots = 10
alpha = 0.05
""")
    out = tmp_path / "verdicts.csv"
    assert main(["analyze", str(trace), "--config", cfg, "--seed", "0",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# lpwanleak ")
    assert lines[1] == "interval,D,flagged,threshold"
    counts = bin_timestamps(ts, 2.0, 10)
    _, _, d = run_dispersion(counts)
    thr = chi_square_threshold(10, 0.05)
    want = np.where(np.isnan(d), False, (10 - 1) * d > thr)
    got = [row.split(",") for row in lines[2:]]
    assert [int(r[2]) for r in got] == [int(v) for v in want]
    assert float(got[0][3]) == pytest.approx(thr)
    # json variant carries the same verdicts
    out_json = tmp_path / "verdicts.json"
    assert main(["analyze", str(trace), "--config", cfg, "--seed", "0",
                 "--format", "json", "--out", str(out_json)]) == 0
    doc = json.loads(out_json.read_text())
    assert [r["flagged"] for r in doc["rows"]] == [bool(v) for v in want]


def test_analyze_data_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,trace\n")
    assert main(["analyze", str(bad), "--seed", "0"]) == 3
    disorder = tmp_path / "d.csv"
    disorder.write_text("timestamp_s,device_id\n5.0,a\n1.0,a\n")
    assert main(["analyze", str(disorder), "--seed", "0"]) == 3
    short = tmp_path / "s.csv"
    short.write_text("timestamp_s,device_id\n1.0,a\n")
    # one message cannot fill an interval
    assert main(["analyze", str(short), "--seed", "0"]) == 3


def test_posterior_command(tmp_path, repo_root):
    fixture = repo_root / "fixtures" / "fillto_two_messages.json"
    out = tmp_path / "post.json"
    assert main(["posterior", str(fixture), "--seed", "0",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    tables = doc["tables"]
    assert len(tables) == 1
    assert tables[0]["observed"] == [1.0, 2.0]
    post = {tuple(e["trace"]): e["p"] for e in tables[0]["posterior"]}
    assert post[(1.0,)] == pytest.approx(0.6)
    assert post[(1.0, 2.0)] == pytest.approx(0.4)
    out_csv = tmp_path / "post.csv"
    assert main(["posterior", str(fixture), "--seed", "0", "--format", "csv",
                 "--out", str(out_csv)]) == 0
    lines = out_csv.read_text().splitlines()
    assert lines[1] == "observed,candidate,posterior"
    assert lines[2].startswith("1.0;2.0,1.0,")


def test_posterior_inconsistent_observation(tmp_path, repo_root):
    fixture = repo_root / "fixtures" / "fillto_two_messages.json"
    cfg = _write(tmp_path, "post.cfg", """\
[posterior]
observed = 0.5
""")
    assert main(["posterior", str(fixture), "--config", cfg, "--seed", "0"]) == 3
    assert main(["posterior", str(tmp_path / "nope.json"), "--seed", "0"]) == 3


def test_costs_command(tmp_path):
    cfg = _write(tmp_path, "costs.cfg", """\
[costs]
shifts = 1:3:1
base_rates = 1.0
intensities = 10
slots = 10
""")
    out = tmp_path / "costs.csv"
    assert main(["costs", "--config", cfg, "--seed", "0", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == COST_CSV_HEADER
    assert len(lines) == 5
    pts = cost_curves([IntervalModel(10, 1.0, 10.0, 0.0)], [1.0, 2.0, 3.0])
    row = lines[3].split(",")
    assert float(row[1]) == pytest.approx(pts[1].fake_cost)
    assert float(row[2]) == pytest.approx(pts[1].waterfill_cost)


def test_missing_config_is_config_error(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "nope.cfg"), "--seed", "1"]) == 2


def test_random_seed_fallback(tmp_path, capsys):
    cfg = _write(tmp_path, "solve.cfg", """\
[model]
intensity = 10
anomaly_rate = 0.5
""")
    out = tmp_path / "s.json"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    assert "no seed given" in capsys.readouterr().err
    assert isinstance(json.loads(out.read_text())["meta"]["seed"], int)


def test_argparse_level_errors():
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
