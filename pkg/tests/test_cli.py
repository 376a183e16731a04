import math
import subprocess
import sys

import numpy as np
import pytest

from pureextract import experiments
from pureextract.cli import main
from pureextract.experiments import (
    CsvTable,
    SweepGrid,
    cmd_groundstate,
    cmd_quench,
    cmd_search,
    cmd_supersinglet,
    cmd_sweep,
    diametric_regions,
    format_value,
    grid_values,
    ring_midpoint,
    two_flip_ground_state,
)
from pureextract.spinbasis import FullBasis, PureState, format_state
from pureextract.states import supersinglet


def rows(text):
    lines = text.strip().split("\n")
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_value_formatting():
    assert format_value(1) == "1"
    assert format_value(True) == "1"
    assert format_value(2.0) == "2.0"
    assert format_value(-0.0) == "0.0"
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value("x") == "x"


def test_csv_table():
    table = CsvTable(["a", "b"])
    table.add(1, 0.5)
    assert table.to_csv() == "a,b\n1,0.5\n"
    assert table.column("b") == [0.5]
    with pytest.raises(ValueError):
        table.add(1)


def test_grid_values_hit_endpoints():
    g = grid_values(-2.0, 2.0, 0.05)
    assert len(g) == 81 and g[0] == -2.0 and g[-1] == 2.0 and g[40] == 0.0
    with pytest.raises(ValueError):
        SweepGrid((0, 1, 0), (0, 1, 0.5))


def test_region_placement():
    assert ring_midpoint(24, 10, 14) == 12.0
    assert ring_midpoint(24, 2, 22) == 24.0
    a, b = diametric_regions(24, 12, 12.0)
    assert a == tuple(range(1, 13)) and b == tuple(range(13, 25))
    a, b = diametric_regions(24, 2, 12.0)
    assert a == (6, 7) and b == (18, 19)


def test_supersinglet_rows():
    assert rows(cmd_supersinglet(3).to_csv())[1] == [
        ["3", "0.333333333333", "0.333333333333", "1.0"]
    ]
    assert rows(cmd_supersinglet(2).to_csv())[1] == [["2", "1.0", "1.0", "1.0"]]
    for n in (1, 6):
        with pytest.raises(ValueError):
            cmd_supersinglet(n)


def test_quench_rows():
    table = cmd_quench(t_max=0.1, dt=0.05, blocks=[12, 2])
    assert table.header == ["t", "delta_A", "delta_B", "entropy", "probability", "epp"]
    assert [r[1] for r in table.rows] == [2, 2, 2, 12, 12, 12]
    first_half = table.rows[3]
    assert first_half[0] == 0.0 and first_half[3] == 0.0 and first_half[4] == 1.0
    with pytest.raises(ValueError):
        cmd_quench(t_max=0.1, placement=((1, 2), (2, 3)))


def test_groundstate_rows_against_masked_sum():
    table = cmd_groundstate(delta_max=3)
    assert table.column("delta_A") == [2, 3]
    assert set(table.column("warning")) == {""}
    state = two_flip_ground_state(24)
    a, b = diametric_regions(24, 2, 12.0)
    mask = [(j in a and k in b) or (j in b and k in a) for j, k in state.basis.pairs()]
    expected = float(np.sum(np.abs(state.amplitudes[mask]) ** 2))
    assert abs(table.column("probability")[0] - expected) < 1e-12
    assert cmd_groundstate(h=0.5, delta_max=2).column("warning") == ["h_outside_m2_window"]
    with pytest.raises(ValueError):
        cmd_groundstate(delta_max=13)


def test_small_sweep():
    grid = SweepGrid((0.0, 0.0, 0.1), (0.0, 10.0, 10.0))
    text = cmd_sweep(grid).to_csv()
    header, body = rows(text)
    assert header == ["gamma", "h", "parity", "degeneracy", "max_entropy", "max_probability", "epp"]
    assert body[0][6] == "0.0555555555556"
    assert body[1][6] == "0.0"
    assert cmd_sweep(grid, workers=2).to_csv() == text


def write_state(tmp_path, state, name="state.txt"):
    path = tmp_path / name
    path.write_text(format_state(state))
    return path


def test_search_supersinglet_table():
    table = cmd_search(supersinglet(3), (1,), (2,))
    best = table.rows[-1]
    assert best[0] == "best" and abs(best[-1] - 1 / 3) < 1e-12
    assert table.column("kind").count("best") == 1


def test_search_product_and_bell_states():
    amps = np.zeros(16)
    amps[0b0011] = 1.0
    best = cmd_search(PureState(FullBasis(4), amps), (1,), (3,)).rows[-1]
    assert best == ["best", "", "", "", "", 0.0, 0.0, 0.0]
    amps = np.zeros(16)
    amps[0b0000] = amps[0b0101] = 1 / math.sqrt(2)
    best = cmd_search(PureState(FullBasis(4), amps), (1,), (3,)).rows[-1]
    assert best[3] == "1;2" and abs(best[-1] - 1.0) < 1e-12


def test_cli_writes_csv(tmp_path, capsys):
    assert main(["supersinglet", "--n", "3"]) == 0
    out = capsys.readouterr().out
    assert out == "N,best_epp,probability,entropy\n3,0.333333333333,0.333333333333,1.0\n"
    target = tmp_path / "s.csv"
    assert main(["supersinglet", "--n", "3", "--out", str(target)]) == 0
    assert target.read_text() == out
    assert main(["--out", str(target), "supersinglet", "--n", "2"]) == 0
    assert target.read_text().endswith("2,1.0,1.0,1.0\n")


def test_cli_negative_ranges(capsys):
    argv = ["sweep", "--gamma", "-0.1:0:0.1", "--field", "-10:-10:1", "--workers", "1"]
    assert main(argv) == 0
    _, body = rows(capsys.readouterr().out)
    assert [r[:2] for r in body] == [["-0.1", "-10.0"], ["0.0", "-10.0"]]


def test_cli_search_file(tmp_path, capsys):
    path = write_state(tmp_path, supersinglet(3))
    assert main(["search", "--state", str(path), "--region-a", "1", "--region-b", "2"]) == 0
    assert capsys.readouterr().out.strip().split("\n")[-1].startswith("best,")


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["supersinglet", "--n", "7"]) == 2
    assert "usage" in capsys.readouterr().err
    assert main(["quench", "--placement", "1,2"]) == 2
    with pytest.raises(SystemExit) as err:
        main(["quench", "--flips", "1"])
    assert err.value.code == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("basis full 2\n0 1 0\nx 0 0\n")
    assert main(["search", "--state", str(bad), "--region-a", "1", "--region-b", "2"]) == 3
    assert "line 3" in capsys.readouterr().err
    missing = tmp_path / "missing.txt"
    assert main(["search", "--state", str(missing), "--region-a", "1", "--region-b", "2"]) == 3


def test_reruns_are_byte_identical(tmp_path):
    outputs = []
    for i in range(2):
        target = tmp_path / f"run{i}.csv"
        cmd = [sys.executable, "-m", "pureextract", "quench", "--t-max", "0.5", "--blocks", "4,12"]
        subprocess.run(cmd + ["--out", str(target)], check=True)
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1] and len(outputs[0]) > 100
    assert experiments.cmd_quench(t_max=0.5, blocks=[4, 12]).to_csv().encode() == outputs[0]
