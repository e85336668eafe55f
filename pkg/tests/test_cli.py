from __future__ import annotations

import numpy as np

from metric_lab.cli import main


def test_gen_writes_integer_rows(tmp_path):
    out = tmp_path / "syn.txt"
    assert main(["gen", "--n", "30", "--dim", "6", "--free", "2", "--out", str(out)]) == 0
    arr = np.loadtxt(out)
    assert arr.shape == (30, 6) and np.all(arr == np.round(arr))


def test_build_and_query_dna(tmp_path, capsys):
    idx = tmp_path / "dna.idx"
    assert main(["build", "dna", "--index", "mtree", "--out", str(idx)]) == 0
    capsys.readouterr()
    assert main(["query", str(idx), "CAATCTGT", "--r", "2"]) == 0
    out = capsys.readouterr().out
    for word in ("AATCTGA", "AATCTGT", "CATCTGT"):
        assert word in out
    assert "results=3" in out
    assert main(["query", str(idx), "CAATCTGT", "--k", "2", "--strategy", "seeded"]) == 0
    assert "results=2" in capsys.readouterr().out


def test_vector_query_and_dimension_error(tmp_path, capsys):
    data = tmp_path / "v.txt"
    data.write_text("0 0\n1 1\n5 5\n")
    idx = tmp_path / "v.idx"
    assert main(["build", f"vectors:{data}:2:L1", "--index", "laesa", "--l", "2", "--out", str(idx)]) == 0
    assert main(["query", str(idx), "0,0", "--r", "2", "--no-validate"]) == 0
    assert "results=2" in capsys.readouterr().out
    try:
        main(["query", str(idx), "0 0 0", "--k", "1"])
    except SystemExit as exc:
        assert "2 coordinates" in str(exc)


def test_bench_command(tmp_path, capsys):
    plan = tmp_path / "plan.txt"
    plan.write_text("dataset = dna\nindex = lc\nindex = bkt\nl = 2\nradius = 20\nk = 2\nqueries = 2\n")
    csv_path, md = tmp_path / "out.csv", tmp_path / "out.md"
    assert main(["bench", str(plan), "--csv", str(csv_path), "--markdown", str(md)]) == 0
    assert csv_path.read_text().startswith("index,dataset,query,param,compdists,pa,time_ns")
    assert md.read_text().startswith("| index |")


def test_errors_return_exit_code_2(tmp_path, capsys):
    assert main(["query", str(tmp_path / "missing.idx"), "x", "--k", "1"]) == 2
    assert main(["build", "nonsense:1", "--index", "lc", "--out", str(tmp_path / "a")]) == 2
    assert "error" in capsys.readouterr().err
