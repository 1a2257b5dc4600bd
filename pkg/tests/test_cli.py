import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from brwgibbs.cli import instance_seed, main
from brwgibbs.records import parse_csv, read_csv
from brwgibbs.sampler import running_time

FIXTURE = Path(__file__).parent / "fixtures" / "kl_scan_golden.csv"
GOLDEN_ARGS = ["kl-scan", "gaussian:d=2", "--beta", "0.8", "--N", "12", "--M", "1,2,3,4,6,12",
               "--seeds", "0:100", "--deterministic"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_process(argv, threads):
    env = dict(os.environ, BRWGIBBS_THREADS=str(threads))
    proc = subprocess.run([sys.executable, "-m", "brwgibbs", *argv], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_critical_gaussian(capsys):
    code, out, _ = run(capsys, "critical", "gaussian:d=2")
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("beta_c="))
    assert f"{float(line.split('=')[1]):.6f}" == "1.177410"
    code, out, _ = run(capsys, "critical", "--model", "gaussian:d=3")
    value = float(next(l for l in out.splitlines() if l.startswith("beta_c=")).split("=")[1])
    assert f"{value:.6f}" == f"{math.sqrt(2 * math.log(3)):.6f}"


def test_critical_degenerate(capsys):
    code, out, _ = run(capsys, "critical", "finite:d=2,support=[(0,1.0)]")
    assert code == 0 and "beta_c=inf" in out.splitlines()


def test_usage_errors(capsys):
    assert run(capsys, "critical")[0] == 1
    assert run(capsys, "critical", "weird:d=2")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["kl-scan", "gaussian:d=2", "--N", "x"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["kl-scan", "gaussian:d=2", "--cap", str(2**27)])
    assert exc.value.code == 1


def test_kl_scan_zero_beta_and_single_block(capsys):
    code, out, _ = run(capsys, "kl-scan", "gaussian:d=2", "--beta", "0", "--N", "6,8", "--M", "2,3",
                       "--seeds", "0:5", "--deterministic")
    assert code == 0
    _, cols, rows = parse_csv(out)
    for row in rows:
        assert all(float(row[cols.index(c)]) == 0.0 for c in ("mean", "std", "p1", "p2", "p4"))
    code, out, _ = run(capsys, "kl-scan", "gaussian:d=2", "--N", "5,9", "--M", "5,9", "--seeds", "0:4",
                       "--deterministic", "--format", "json")
    payload = json.loads(out)
    finished = [p for p in payload if "error" not in p]
    assert {(p["N"], p["M"]) for p in finished} == {(5, 5), (9, 5), (9, 9)}
    assert all(p["mean"] < 1e-8 for p in finished if p["M"] == p["N"])
    assert code == 2  # (N=5, M=9) is an error row


def test_kl_scan_cap_error_row(capsys):
    code, out, _ = run(capsys, "kl-scan", "gaussian:d=2", "--N", "12,8", "--M", "2", "--seeds", "0:2",
                       "--cap", "1024", "--deterministic")
    assert code == 2
    _, cols, rows = parse_csv(out)
    assert rows[0][cols.index("error")].startswith("CapExceeded")
    assert rows[1][cols.index("error")] == "" and float(rows[1][cols.index("mean")]) > 0


def test_grid_seeds_do_not_shift(capsys):
    _, small, _ = run(capsys, "kl-scan", "gaussian:d=2", "--N", "8", "--M", "2", "--seeds", "0:6", "--deterministic")
    _, big, _ = run(capsys, "kl-scan", "gaussian:d=2", "--beta", "0.3,0.8", "--N", "6,8", "--M", "2,4",
                    "--seeds", "0:6", "--deterministic")
    row = parse_csv(small)[2][0]
    assert row in parse_csv(big)[2]
    assert instance_seed(0, 8, 3) != instance_seed(0, 9, 3)


def test_golden_fixture_in_process(capsys, tmp_path):
    out = tmp_path / "scan.csv"
    assert main(GOLDEN_ARGS + ["--out", str(out)]) == 0
    assert out.read_bytes() == FIXTURE.read_bytes()
    kind, _, rows = read_csv(out)
    assert kind == "kl-scan" and len(rows) == 6


def test_non_deterministic_header(capsys):
    code, out, _ = run(capsys, "kl-scan", "gaussian:d=2", "--N", "4", "--M", "2", "--seeds", "0:2")
    assert out.splitlines()[0].startswith("#brwgibbs-csv,v1,kl-scan,generated=")


def test_sample_output(capsys):
    code, out, _ = run(capsys, "sample", "gaussian:d=2", "--N", "5", "--M", "2", "--seeds", "3", "--algo-seed", "4")
    assert code == 0 and out.strip().endswith("tau=14")
    again = run(capsys, "sample", "gaussian:d=2", "--N", "5", "--M", "2", "--seeds", "3", "--algo-seed", "4")[1]
    assert again == out
    _, zero, _ = run(capsys, "sample", "gaussian:d=3", "--beta", "0", "--N", "7", "--seeds", "0:3")
    taus = {int(l.rsplit("tau=", 1)[1]) for l in zero.splitlines()}
    assert taus == {running_time(7, 3, 3)}


def test_sample_csv(capsys):
    code, out, _ = run(capsys, "sample", "gaussian:d=2", "--N", "6", "--M", "3", "--seeds", "0:3",
                       "--format", "csv", "--deterministic")
    kind, cols, rows = parse_csv(out)
    assert kind == "runs" and len(rows) == 3
    assert {r[cols.index("tau")] for r in rows} == {str(running_time(6, 3, 2))}


def test_entropy_scan(capsys):
    code, out, _ = run(capsys, "entropy-scan", "gaussian:d=2", "--beta", "0,3", "--N", "4,6", "--seeds", "0:3",
                       "--deterministic")
    assert code == 0
    _, cols, rows = parse_csv(out)
    first = rows[0]
    assert float(first[cols.index("mean_H")]) == pytest.approx(4 * math.log(2))
    assert float(first[cols.index("rate")]) == pytest.approx(math.log(2))
    assert rows[-1][cols.index("rate")] == "nan"


def test_hardness_zero_trials(capsys, tmp_path):
    code, _, _ = run(capsys, "hardness", "gaussian:d=2", "--N", "8,10", "--z", "0.5", "--trials", "0",
                     "--searches", "0", "--out", str(tmp_path), "--deterministic")
    assert code == 0
    kind, _, rows = read_csv(tmp_path / "exceptional.csv")
    assert kind == "exceptional"
    assert all(r[3] == "0" for r in rows)
    for name, kind in (("search.csv", "search"), ("max_tail.csv", "max-tail")):
        assert read_csv(tmp_path / name)[0] == kind
        assert read_csv(tmp_path / name)[2] == []


def test_hardness_epilogue(capsys, tmp_path):
    code, _, _ = run(capsys, "hardness", "gaussian:d=2", "--N", "8,12,16", "--z", "0.0,0.5", "--trials", "400",
                     "--searches", "20", "--search-N", "12", "--tail-trials", "40", "--tail-N", "10",
                     "--out", str(tmp_path), "--deterministic")
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert all(m["ok"] for m in summary["monotone_in_z"])
    assert summary["sqrt_fit"]["0.0"]["slope"] < 0
    assert "domination" in summary and "max_tail_fit" in summary
    _, _, rows = read_csv(tmp_path / "search.csv")
    assert len(rows) == 20 and all(int(r[4]) >= int(r[3]) for r in rows)


def test_hardness_prints_sections(capsys):
    code, out, _ = run(capsys, "hardness", "gaussian:d=2", "--N", "8", "--z", "0", "--trials", "10",
                       "--searches", "2", "--deterministic")
    assert code == 0
    assert "== exceptional.csv" in out and "== summary.json" in out


@pytest.mark.parametrize("threads", [1, 8])
def test_golden_fixture_across_threads(threads):
    assert run_process(GOLDEN_ARGS, threads) == FIXTURE.read_text()
