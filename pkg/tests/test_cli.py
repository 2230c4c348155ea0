import csv
import os

import numpy as np
import pytest

from acl0lms.channel import load_channel
from acl0lms.cli import ConfigError, build_parser, fmt, main, parse_config, read_config_file

FAST = ["--n-r", "2", "--n-t", "2", "--n", "4", "--iterations", "60", "--runs", "2"]


def parse(argv):
    return parse_config(build_parser().parse_args(["run", *argv]))


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestParseConfig:
    def test_defaults(self):
        cfg = parse([])
        exp = cfg.experiment
        assert cfg.mode == "single"
        assert (exp.n_r, exp.n_t, exp.n, exp.k, exp.snr_db, exp.delta) == (24, 8, 16, 1, 10.0, 0.5)
        assert exp.mu1 == 1 / 132
        assert exp.beta_coeff == 0.02 and exp.alpha == 10.0 and exp.mu_lambda == 1.0

    def test_overrides(self):
        exp = parse(["--snr-db", "20", "--k", "4"]).experiment
        assert exp.snr_db == 20.0 and exp.k == 4
        assert exp.n_r == 24 and exp.delta == 0.5

    @pytest.mark.parametrize("argv", [
        ["--delta", "1.5"],
        ["--k", "17"],
        ["--mode", "sweep-delta"],
        ["--mode", "sweep-k", "--deltas", "0.1,0.2"],
        ["--deltas", "0.1"],
        ["--mode", "sweep-delta", "--deltas", "0.5,1.0"],
        ["--mode", "bogus"],
        ["--algorithms", "rls"],
        ["--iterations", "ten"],
        ["--window-fraction", "0"],
        ["--workers", "0"],
    ])
    def test_invalid(self, argv):
        with pytest.raises(ConfigError):
            parse(argv)

    def test_config_file_and_precedence(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("# small run\nk = 3\nsnr-db = 20  # dB\nruns=5\n")
        cfg = parse(["--config", str(path), "--k", "2"])
        assert cfg.experiment.k == 2
        assert cfg.experiment.snr_db == 20.0
        assert cfg.experiment.runs == 5

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("speed = 3\n")
        with pytest.raises(ConfigError):
            read_config_file(path)

    def test_malformed_config_line(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("k 3\n")
        with pytest.raises(ConfigError):
            read_config_file(path)

    def test_raw_combiner_switch(self):
        assert parse(["--combiner-reg", "none"]).experiment.combiner_reg is None
        assert parse(["--combiner-reg", "0.5"]).experiment.combiner_reg == 0.5

    def test_sweep_values(self):
        cfg = parse(["--mode", "sweep-snr", "--snrs", "10,20"])
        assert cfg.sweep_values == (10.0, 20.0)

    def test_mapping_input(self):
        cfg = parse_config({"k": "2", "mode": "single"})
        assert cfg.experiment.k == 2
        with pytest.raises(ConfigError):
            parse_config({"speed": "1"})


class TestFormatting:
    @pytest.mark.parametrize("x", [0.1, 1 / 3, 1e-300, 123456789.125, 2.0**-1074])
    def test_round_trip(self, x):
        assert float(fmt(x)) == x


class TestRun:
    def test_single_mode_outputs(self, tmp_path, capsys):
        assert main(["run", *FAST, "--out", str(tmp_path)]) == 0
        curves = rows(tmp_path / "curves.csv")
        assert curves[0] == ["iteration", "algorithm", "mse", "lambda"]
        assert len(curves) == 1 + 4 * 60
        by_alg = {}
        for it, alg, mse, lam in curves[1:]:
            by_alg.setdefault(alg, []).append((int(it), float(mse), lam))
            assert (lam != "") == alg.startswith("ac-")
        assert sorted(by_alg) == ["ac-l0lms", "ac-lms", "l0lms", "lms"]
        assert [i for i, _, _ in by_alg["lms"]] == list(range(60))
        summary = rows(tmp_path / "summary.csv")
        assert summary[0] == ["algorithm", "param_value", "steady_state_mse", "convergence_iterations"]
        assert len(summary) == 5
        assert "ac-l0lms" in capsys.readouterr().out

    def test_summary_matches_curves(self, tmp_path):
        main(["run", *FAST, "--algorithms", "lms", "--out", str(tmp_path)])
        mse = np.array([float(r[2]) for r in rows(tmp_path / "curves.csv")[1:]])
        (row,) = rows(tmp_path / "summary.csv")[1:]
        assert float(row[2]) == pytest.approx(np.mean(mse[-6:]), rel=1e-12)

    def test_sweep_delta_files(self, tmp_path):
        deltas = "0.1,0.3,0.5,0.7,0.9"
        argv = ["run", *FAST, "--mode", "sweep-delta", "--deltas", deltas,
                "--algorithms", "ac-l0lms", "--out", str(tmp_path)]
        assert main(argv) == 0
        names = sorted(os.listdir(tmp_path))
        assert names == sorted([f"curves_delta={d}.csv" for d in deltas.split(",")] + ["summary.csv"])
        summary = rows(tmp_path / "summary.csv")[1:]
        assert [r[1] for r in summary] == deltas.split(",")

    def test_byte_identical_reruns(self, tmp_path):
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        assert main(["run", *FAST, "--out", str(a)]) == 0
        assert main(["run", *FAST, "--out", str(b)]) == 0
        assert main(["run", *FAST, "--workers", "2", "--out", str(c)]) == 0
        for name in ("curves.csv", "summary.csv"):
            ref = (a / name).read_bytes()
            assert (b / name).read_bytes() == ref
            assert (c / name).read_bytes() == ref

    def test_seed_changes_output(self, tmp_path):
        main(["run", *FAST, "--out", str(tmp_path / "a")])
        main(["run", *FAST, "--seed", "1", "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "curves.csv").read_bytes() != (tmp_path / "b" / "curves.csv").read_bytes()

    def test_invalid_flag_exit_code(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--delta", "1.5", "--out", str(tmp_path)])
        assert exc.value.code == 2
        assert "delta" in capsys.readouterr().err

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["run", *FAST, "--out", str(blocker / "sub")]) != 0
        assert "error" in capsys.readouterr().err


class TestChannelCommand:
    def test_writes_loadable_channel(self, tmp_path):
        path = tmp_path / "h.txt"
        assert main(["channel", "--n-r", "4", "--n-t", "2", "--n", "8", "--k", "2",
                     "--seed", "3", "--out", str(path)]) == 0
        h, seed = load_channel(path)
        assert seed == 3
        assert h.matrix.shape == (4, 16)
        assert all(np.count_nonzero(h.sub_channel(r, t)) == 2 for r in range(4) for t in range(2))

    def test_matches_harness_channel(self, tmp_path):
        from acl0lms.harness import ExperimentConfig, trial_data
        path = tmp_path / "h.txt"
        main(["channel", "--seed", "9", "--trial", "2", "--out", str(path)])
        h, _ = load_channel(path)
        ref, *_ = trial_data(ExperimentConfig(base_seed=9, iterations=1), 2)
        np.testing.assert_array_equal(h.matrix, ref.matrix)
