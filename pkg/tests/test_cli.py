import json

import pytest

from eprnet.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRates:
    def test_prints_every_channel(self, capsys):
        code, out, err = run(capsys, "rates", "--channels", "8")
        assert code == 0
        lines = [l for l in out.splitlines() if l and not l.startswith(" ")]
        assert len([l for l in out.splitlines() if l.strip()]) >= 9

    def test_anchor_values_present(self, capsys):
        code, out, _ = run(capsys, "rates")
        assert code == 0
        assert "1530.1" in out
        assert "1569.9" in out


class TestRoute:
    def test_pair_table(self, capsys):
        code, out, _ = run(capsys, "route", "--topology", "simple6",
                           "--source", "A", "--wss-db", "8")
        assert code == 0
        assert out.count("\n") >= 15

    def test_single_pair_detail(self, capsys):
        code, out, _ = run(capsys, "route", "--topology", "simple6",
                           "--source", "A", "--pair", "B", "C")
        assert code == 0
        assert "->" in out

    def test_infeasible_pair_fails(self, capsys, tmp_path):
        doc = {
            "name": "chain3",
            "nodes": [{"id": "s", "x_km": 0.0, "y_km": 0.0},
                      {"id": "a", "x_km": 1.0, "y_km": 0.0},
                      {"id": "b", "x_km": 2.0, "y_km": 0.0}],
            "links": [{"a": "s", "b": "a", "distance_km": 1.0},
                      {"a": "a", "b": "b", "distance_km": 1.0}],
        }
        path = tmp_path / "chain3.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run(capsys, "route", "--topology", str(path),
                           "--source", "s", "--pair", "a", "b")
        assert code == 1

    def test_unknown_topology_reports_error(self, capsys):
        code, _, err = run(capsys, "route", "--topology", "missing9",
                           "--source", "A")
        assert code == 1
        assert err.startswith("error:")

    def test_unknown_source_reports_error(self, capsys):
        code, _, err = run(capsys, "route", "--topology", "simple6",
                           "--source", "ZZ")
        assert code == 1
        assert err.startswith("error:")


class TestAllocate:
    def test_lpt_smoke(self, capsys):
        code, out, _ = run(capsys, "allocate", "--topology", "simple6",
                           "--source", "A", "--strategy", "lpt",
                           "--channels", "32")
        assert code == 0
        assert "minimum rate:" in out
        assert "jain index:" in out

    def test_random_needs_seed(self, capsys):
        code, _, err = run(capsys, "allocate", "--topology", "simple6",
                           "--source", "A", "--strategy", "random",
                           "--channels", "16")
        assert code == 1
        assert "seed" in err

    def test_random_with_seed(self, capsys):
        code, out, _ = run(capsys, "allocate", "--topology", "simple6",
                           "--source", "A", "--strategy", "random",
                           "--seed", "3", "--channels", "16")
        assert code == 0

    def test_unknown_strategy_is_usage_error(self, capsys):
        with pytest.raises(SystemExit):
            main(["allocate", "--topology", "simple6", "--source", "A",
                  "--strategy", "greedy"])


class TestSweep:
    def test_seed_required_without_config(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "--topology", "simple6",
                           "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "--seed" in err

    def test_topology_or_config_required(self, capsys):
        code, _, err = run(capsys, "sweep", "--seed", "1")
        assert code == 1
        assert "error:" in err

    def test_flag_driven_sweep(self, capsys, tmp_path):
        out_csv = tmp_path / "sweep.csv"
        plot = tmp_path / "sweep.svg"
        code, out, _ = run(
            capsys, "sweep", "--topology", "simple6", "--seed", "9",
            "--runs", "2", "--wss-db", "8", "--strategies",
            "lpt,round-robin", "--sources", "A,B", "--channels", "16",
            "--out", str(out_csv), "--plot", str(plot),
        )
        assert code == 0
        assert f"wrote 4 rows to {out_csv}" in out
        assert out_csv.read_text().startswith("# eprnet sweep:")
        assert plot.read_text().startswith("<svg")

    def test_config_driven_sweep(self, capsys, tmp_path):
        config = {
            "topology_path": "simple6",
            "seed": 21,
            "wss_losses": [8.0],
            "strategies": ["lpt"],
            "runs": 1,
            "sources": ["A"],
            "channels": 16,
            "output_path": str(tmp_path / "from_config.csv"),
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        code, out, _ = run(capsys, "sweep", "--config", str(path))
        assert code == 0
        assert (tmp_path / "from_config.csv").exists()

    def test_config_seed_override(self, capsys, tmp_path):
        config = {
            "topology_path": "simple6", "seed": 21, "wss_losses": [8.0],
            "strategies": ["lpt"], "runs": 1, "sources": ["A"],
            "channels": 16,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        out_csv = tmp_path / "o.csv"
        code, _, _ = run(capsys, "sweep", "--config", str(path),
                         "--seed", "5", "--out", str(out_csv))
        assert code == 0
        assert "seed=5" in out_csv.read_text().splitlines()[0]

    def test_bad_strategy_flag(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "--topology", "simple6",
                           "--seed", "1", "--strategies", "warp",
                           "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "warp" in err


class TestUsage:
    def test_no_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
