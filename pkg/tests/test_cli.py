import json
from pathlib import Path

import numpy as np
import pytest

from comimp.cli import main

D1_CSV = """person,height,weight,BSL
1,120,80,80
2,150,70,90
3,140,80,85
4,135,85,95
"""

D2_CSV = """person,weight,calo/meal,BSL
5,90,100,100
6,85,150,95
7,92,170,82
"""


@pytest.fixture
def motivating_files(tmp_path):
    p1, p2 = tmp_path / "d1.csv", tmp_path / "d2.csv"
    p1.write_text(D1_CSV, encoding="utf-8")
    p2.write_text(D2_CSV, encoding="utf-8")
    return p1, p2


class TestMergeCommand:
    def test_worked_example_csv(self, motivating_files, tmp_path, capsys):
        p1, p2 = motivating_files
        out = tmp_path / "merged.csv"
        code = main([
            "merge", str(p1), str(p2),
            "--label", "BSL", "--imputer", "mean",
            "--id-columns", "person", "--output", str(out),
        ])
        assert code == 0
        expected = (
            "person,height,weight,calo/meal,BSL\n"
            "1,120,80,140,80\n"
            "2,150,70,140,90\n"
            "3,140,80,140,85\n"
            "4,135,85,140,95\n"
            "5,136.25,90,100,100\n"
            "6,136.25,85,150,95\n"
            "7,136.25,92,170,82\n"
        )
        assert out.read_text(encoding="utf-8") == expected
        report = json.loads(Path(f"{out}.report.json").read_text())
        assert report["union_features"] == ["height", "weight", "calo/meal"]
        assert report["cells_created"] == 7
        assert report["cells_imputed"] == 7
        assert report["row_ranges"] == [[0, 4], [4, 7]]
        assert report["imputer"]["method"] == "mean"

    def test_merge_file_with_itself(self, motivating_files, tmp_path):
        p1, _ = motivating_files
        out = tmp_path / "double.csv"
        code = main(["merge", str(p1), str(p1), "--label", "BSL",
                     "--output", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 8
        report = json.loads(Path(f"{out}.report.json").read_text())
        assert report["cells_imputed"] == 0

    def test_missing_header_exits_2(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("", encoding="utf-8")
        out = tmp_path / "merged.csv"
        code = main(["merge", str(bad), str(bad), "--label", "y",
                     "--output", str(out)])
        assert code == 2

    def test_unknown_label_exits_2(self, motivating_files, tmp_path, capsys):
        p1, p2 = motivating_files
        code = main(["merge", str(p1), str(p2), "--label", "nope",
                     "--output", str(tmp_path / "m.csv")])
        assert code == 2
        assert "nope" in capsys.readouterr().err

    def test_ragged_row_exits_2(self, tmp_path):
        bad = tmp_path / "ragged.csv"
        bad.write_text("a,b,y\n1,2,3\n4,5\n", encoding="utf-8")
        code = main(["merge", str(bad), str(bad), "--label", "y",
                     "--output", str(tmp_path / "m.csv")])
        assert code == 2

    def test_all_missing_column_exits_3(self, tmp_path):
        f1 = tmp_path / "a.csv"
        f1.write_text("x,z,y\n1,NA,0\n2,NA,1\n", encoding="utf-8")
        code = main(["merge", str(f1), str(f1), "--label", "y",
                     "--output", str(tmp_path / "m.csv")])
        assert code == 3

    def test_id_columns_nullable_when_absent(self, tmp_path):
        f1 = tmp_path / "with_id.csv"
        f1.write_text("tag,x,y\nr1,1,0\nr2,2,1\n", encoding="utf-8")
        f2 = tmp_path / "without_id.csv"
        f2.write_text("x,y\n5,0\n", encoding="utf-8")
        out = tmp_path / "m.csv"
        code = main(["merge", str(f1), str(f2), "--label", "y",
                     "--id-columns", "tag", "--output", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "tag,x,y"
        assert lines[3] == "NA,5,0"

    def test_fewer_than_two_inputs_is_usage_error(self, motivating_files, tmp_path):
        p1, _ = motivating_files
        code = main(["merge", str(p1), "--label", "BSL",
                     "--output", str(tmp_path / "m.csv")])
        assert code == 64

    def test_csv_round_trip_is_byte_identical(self, tmp_path):
        canonical = "a,b,y\n1,2.5,0\n2,,1\n-3.25,4,0\n"
        src = tmp_path / "canon.csv"
        src.write_text(canonical, encoding="utf-8")
        from comimp import csvio

        table = csvio.read_table(src, label="y")
        dst = tmp_path / "copy.csv"
        csvio.write_table(dst, table.dataset)
        assert dst.read_text(encoding="utf-8") == canonical


SHARED_TRAIN = """s1,s2,y
0.1,1.0,0
0.9,2.0,1
0.4,3.0,0
0.7,4.0,1
0.2,5.0,0
"""

SHARED_TEST = """s1,s2,y
0.3,1.5,0
0.8,2.5,1
"""


def six_feature_pair(tmp_path, rng):
    def write(path, names, rows):
        lines = [",".join(names + ["y"])]
        for r in rows:
            lines.append(",".join(f"{v:.4f}" for v in r) + ",0")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    n1, n2 = 8, 7
    names1 = ["sh1", "sh2", "a1", "a2", "a3", "a4"]
    names2 = ["sh1", "sh2", "b1", "b2", "b3", "b4"]
    write(tmp_path / "t1.csv", names1, rng.normal(size=(n1, 6)))
    write(tmp_path / "s1.csv", names1, rng.normal(size=(4, 6)))
    write(tmp_path / "t2.csv", names2, rng.normal(size=(n2, 6)))
    write(tmp_path / "s2.csv", names2, rng.normal(size=(3, 6)))


class TestPcaMergeCommand:
    def test_no_exclusive_features_reduces_to_plain_merge(self, tmp_path):
        (tmp_path / "tr1.csv").write_text(SHARED_TRAIN, encoding="utf-8")
        (tmp_path / "ts1.csv").write_text(SHARED_TEST, encoding="utf-8")
        prefix = tmp_path / "out"
        code = main([
            "pca-merge",
            "--train1", str(tmp_path / "tr1.csv"), "--test1", str(tmp_path / "ts1.csv"),
            "--train2", str(tmp_path / "tr1.csv"), "--test2", str(tmp_path / "ts1.csv"),
            "--label", "y", "--output-prefix", str(prefix),
        ])
        assert code == 0
        train_lines = Path(f"{prefix}_train.csv").read_text().splitlines()
        assert train_lines[0] == "s1,s2,y"
        assert len(train_lines) == 11
        summary = Path(f"{prefix}_pca_summary.csv").read_text().splitlines()
        assert len(summary) == 1  # header only: no reduced blocks

    def test_fixed_one_component_width(self, tmp_path):
        six_feature_pair(tmp_path, np.random.default_rng(0))
        prefix = tmp_path / "red"
        code = main([
            "pca-merge",
            "--train1", str(tmp_path / "t1.csv"), "--test1", str(tmp_path / "s1.csv"),
            "--train2", str(tmp_path / "t2.csv"), "--test2", str(tmp_path / "s2.csv"),
            "--label", "y", "--components", "1", "--output-prefix", str(prefix),
        ])
        assert code == 0
        header = Path(f"{prefix}_train.csv").read_text().splitlines()[0]
        assert header == "sh1,sh2,q1_pc1,q2_pc1,y"

    def test_full_variance_reconstruction_check_passes(self, tmp_path):
        six_feature_pair(tmp_path, np.random.default_rng(1))
        prefix = tmp_path / "full"
        code = main([
            "pca-merge",
            "--train1", str(tmp_path / "t1.csv"), "--test1", str(tmp_path / "s1.csv"),
            "--train2", str(tmp_path / "t2.csv"), "--test2", str(tmp_path / "s2.csv"),
            "--label", "y", "--var-explained", "1.0", "--output-prefix", str(prefix),
        ])
        assert code == 0
        rows = Path(f"{prefix}_pca_summary.csv").read_text().splitlines()[1:]
        assert rows, "expected per-component summary rows"
        for row in rows:
            assert row.endswith(",pass")
        # full retention keeps every supportable component per 4-wide block
        assert sum(r.startswith("q1,") for r in rows) == 4
        assert sum(r.startswith("q2,") for r in rows) == 4

    def test_missing_cell_in_pca_block_exits_4(self, tmp_path):
        (tmp_path / "t1.csv").write_text("s,q\n1,2\n2,\n3,4\n", encoding="utf-8")
        # reuse as test file too; second dataset has no exclusive block
        (tmp_path / "t2.csv").write_text("s,q2\n1,0\n2,1\n3,0\n", encoding="utf-8")
        code = main([
            "pca-merge",
            "--train1", str(tmp_path / "t1.csv"), "--test1", str(tmp_path / "t1.csv"),
            "--train2", str(tmp_path / "t2.csv"), "--test2", str(tmp_path / "t2.csv"),
            "--label", "s", "--output-prefix", str(tmp_path / "x"),
        ])
        assert code == 4


class TestBenchCommand:
    def test_regression_sim_deterministic_csv(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            code = main([
                "bench", "regression-sim",
                "--repeats", "3", "--seed", "42", "--output", str(out),
            ])
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_merge_study_with_config(self, tmp_path, capsys):
        cfg = tmp_path / "study.cfg"
        cfg.write_text(
            "dataset = seed\nrepeats = 2\nimputer = mean\nseed = 7\n",
            encoding="utf-8",
        )
        out = tmp_path / "summary.csv"
        code = main(["bench", "merge-study", "--config", str(cfg),
                     "--output", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.startswith("metric,model,partition,mean,variance,repeats,seed")
        assert "accuracy,f," in text
        table = capsys.readouterr().out
        assert "accuracy over 2 repeats" in table

    def test_failing_repeat_exits_5(self, tmp_path):
        bad = tmp_path / "oneclass.csv"
        rows = "\n".join(f"{i},{i+1},only" for i in range(20))
        bad.write_text("u,v,y\n" + rows + "\n", encoding="utf-8")
        cfg = tmp_path / "study.cfg"
        cfg.write_text(
            f"dataset = {bad}\nlabel = y\nlabel_kind = categorical\n"
            "ratios = 0.5,0.5\ndrops = -|-\nrepeats = 2\nimputer = mean\n",
            encoding="utf-8",
        )
        code = main(["bench", "merge-study", "--config", str(cfg),
                     "--output", str(tmp_path / "s.csv")])
        assert code == 5

    def test_bad_config_line_is_usage_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("this is not a key value pair\n", encoding="utf-8")
        code = main(["bench", "merge-study", "--config", str(cfg),
                     "--output", str(tmp_path / "s.csv")])
        assert code == 64


class TestCheckTheoremCommand:
    def test_small_run_exits_zero(self, capsys):
        code = main(["check-theorem", "--trials", "5", "--seed", "0"])
        assert code == 0
        out = capsys.readouterr().out
        assert "trials=5 violations=0" in out

    def test_single_trial_prints_matching_sse_triple(self, capsys):
        from comimp.bench import check_theorem

        report = check_theorem(1, seed=9)
        code = main(["check-theorem", "--trials", "1", "--seed", "9"])
        assert code == 0
        out = capsys.readouterr().out
        sse_d, sse_d1, sse_d2 = report.first_trial_sse
        assert f"sse_d={sse_d!r}" in out
        assert f"sse_d1={sse_d1!r}" in out
        assert f"sse_d2={sse_d2!r}" in out

    def test_zero_trials_is_usage_error(self, capsys):
        assert main(["check-theorem", "--trials", "0"]) == 64
        assert "trials" in capsys.readouterr().err
