import csv

import pytest

from agentft.cli import main


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_auto_campaign(tmp_path, capsys):
    rc = main(["simulate", "--leaves", "8", "--trials", "30", "--seed", "42", "--grid", "4x5",
               "--out", str(tmp_path), "--no-traces"])
    assert rc == 0
    data = rows(tmp_path / "campaign.csv")
    assert len(data) == 210
    assert {r["survived"] for r in data} == {"1"}
    assert sorted({int(r["node_id"]) for r in data}) == list(range(9, 16))
    assert (tmp_path / "config.json").exists()


def test_simulate_without_faults(tmp_path):
    rc = main(["simulate", "--schedule", "none", "--trials", "2", "--out", str(tmp_path)])
    assert rc == 0
    text = (tmp_path / "campaign.csv").read_text()
    assert text == "trial_id,seed,node_id,level,t_start_ms,t_end_ms,rebinds,survived\n"
    assert len(list((tmp_path / "traces").iterdir())) == 2


def test_grid_too_small(tmp_path, capsys):
    assert main(["simulate", "--grid", "2x2", "--out", str(tmp_path)]) == 1
    assert "cannot host" in capsys.readouterr().err


def test_failed_trials_exit_two(tmp_path):
    rc = main(["simulate", "--trials", "1", "--spawn-cost", "2000", "--out", str(tmp_path), "--no-traces"])
    assert rc == 2
    assert {r["survived"] for r in rows(tmp_path / "campaign.csv")} == {"0"}


def write_samples(path, means):
    lines = ["node_id,trial_id,level,duration"]
    levels = {9: 2, 10: 2, 11: 2, 12: 2, 13: 3, 14: 3, 15: 4}
    for n, v in means.items():
        lines.append(f"{n},0,{levels[n]},{v}")
    path.write_text("\n".join(lines) + "\n")


def test_report_on_reference_means(tmp_path, capsys):
    src = tmp_path / "s.csv"
    write_samples(src, {9: 0.339, 10: 0.349, 11: 0.352, 12: 0.345, 13: 0.347, 14: 0.340, 15: 0.341})
    assert main(["report", str(src), "--units", "s", "--out", str(tmp_path / "r")]) == 0
    table = {(r["row"], r["level"]): float(r["value_s"]) for r in rows(tmp_path / "r" / "table1.csv")}
    assert table[("MT_Lp", "2")] == pytest.approx(0.346, abs=1e-3)
    assert table[("MT_Lp", "3")] == pytest.approx(0.343, abs=1e-3)
    assert table[("MT_Lp", "4")] == pytest.approx(0.341, abs=1e-3)
    assert table[("MT_NN_by_node", "")] == pytest.approx(0.344, abs=2e-3)
    out = capsys.readouterr().out
    assert "MT_Nn (sec)" in out and "0.3390" in out
    assert sorted(p.name for p in (tmp_path / "r").iterdir()) == [
        "level_2.csv", "level_3.csv", "level_4.csv", "table1.csv", "table1.txt"]


def test_report_on_empty_csv(tmp_path, capsys):
    src = tmp_path / "empty.csv"
    src.write_text("trial_id,seed,node_id,level,t_start_ms,t_end_ms,rebinds,survived\n")
    assert main(["report", str(src)]) == 1
    assert "no samples" in capsys.readouterr().err


def test_report_is_repeatable(tmp_path):
    main(["simulate", "--trials", "3", "--out", str(tmp_path / "sim"), "--no-traces"])
    csv_path = str(tmp_path / "sim" / "campaign.csv")
    assert main(["report", csv_path, "--out", str(tmp_path / "a")]) == 0
    assert main(["report", csv_path, "--out", str(tmp_path / "b")]) == 0
    for name in ("table1.txt", "table1.csv", "level_2.csv", "level_3.csv", "level_4.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--fan-in", "2..4", "--trials", "2", "--out", str(out)]) == 0
    data = rows(out)
    assert [int(r["fan_in"]) for r in data] == [2, 3, 4]
    assert [int(r["total_dependencies"]) for r in data] == [3, 4, 5]
    assert main(["sweep", "--fan-in", "4..2"]) == 1


def test_validate_config(tmp_path, capsys):
    assert main(["validate-config", "--grid", "4x5"]) == 0
    assert '"rows": 4' in capsys.readouterr().out
    bad = tmp_path / "sched.json"
    bad.write_text('{"entries": [{"task": 99, "ramp_start": 100}]}')
    assert main(["validate-config", "--schedule", str(bad)]) == 1
    overlap = tmp_path / "overlap.json"
    overlap.write_text('{"entries": [{"task": 9, "ramp_start": 100}, {"task": 10, "ramp_start": 150}]}')
    assert main(["validate-config", "--schedule", str(overlap)]) == 1
    assert main(["validate-config", "--schedule", str(overlap), "--allow-concurrent-faults"]) == 0
