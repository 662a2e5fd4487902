"""Command-line interface: exit codes, file outputs, determinism."""

import numpy as np

from cmlab.cli import main


def run(argv):
    return main(argv)


class TestVerify:
    def test_default_passes(self, tmp_path):
        code = run(["--out", str(tmp_path), "--no-plots", "verify"])
        assert code == 0
        assert (tmp_path / "identities.csv").exists()
        assert (tmp_path / "morawetz.csv").exists()

    def test_threshold_override_fails_everything(self, tmp_path):
        code = run(["--out", str(tmp_path), "--no-plots", "verify",
                    "--threshold", "1e-20"])
        assert code == 1

    def test_only_filter(self, tmp_path):
        code = run(["--out", str(tmp_path), "--no-plots", "verify",
                    "--only", "conjugation"])
        assert code == 0
        body = (tmp_path / "identities.csv").read_text().strip().splitlines()
        assert len(body) == 2 and "conjugation" in body[1]

    def test_deterministic_reruns(self, tmp_path):
        run(["--out", str(tmp_path / "a"), "--no-plots", "verify"])
        run(["--out", str(tmp_path / "b"), "--no-plots", "verify"])
        assert ((tmp_path / "a" / "identities.csv").read_bytes()
                == (tmp_path / "b" / "identities.csv").read_bytes())

    def test_renders_figure(self, tmp_path):
        run(["--out", str(tmp_path), "verify", "--only", "dq_q"])
        assert (tmp_path / "identities.png").exists()


class TestEvolve:
    def test_gaussian_preset(self, tmp_path):
        code = run(["--out", str(tmp_path), "--no-plots", "evolve",
                    "--preset", "gaussian"])
        assert code == 0
        diag = np.genfromtxt(tmp_path / "diagnostics.csv", delimiter=",",
                             names=True)
        drift = abs(diag["mass"][-1] - diag["mass"][0]) / diag["mass"][0]
        assert drift < 1e-8

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[simulation]\nequation = gauged\nn = 1024\n"
                       "length = 100.0\ndt = 1e-3\nt_end = 0.02\n"
                       "stride = 5\ninit = gaussian\n")
        code = run(["--out", str(tmp_path), "--no-plots", "evolve", str(cfg)])
        assert code == 0

    def test_bad_config_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[simulation]\ndt = -3\n")
        assert run(["--out", str(tmp_path), "--no-plots", "evolve", str(cfg)]) == 2

    def test_missing_config_exits_2(self, tmp_path):
        assert run(["--out", str(tmp_path), "--no-plots", "evolve",
                    str(tmp_path / "none.ini")]) == 2

    def test_resolution_lost_exits_3(self, tmp_path):
        cfg = tmp_path / "hot.ini"
        cfg.write_text("[simulation]\nn = 1024\nlength = 100.0\ndt = 1e-3\n"
                       "t_end = 1.0\nstride = 5\ninit = gaussian\n"
                       "dealias = false\ntail_fraction_limit = 1e-30\n")
        assert run(["--out", str(tmp_path), "--no-plots", "evolve", str(cfg)]) == 3

    def test_snapshots_written(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[simulation]\nn = 1024\nlength = 100.0\ndt = 1e-3\n"
                       "t_end = 0.01\nstride = 5\ninit = gaussian\n")
        run(["--out", str(tmp_path), "--no-plots", "evolve", str(cfg),
             "--snapshots"])
        snaps = sorted((tmp_path / "snapshots").glob("*.bin"))
        assert snaps
        from cmlab.evolution import read_snapshot
        grid, t, vals = read_snapshot(snaps[0])
        assert grid.n == 1024 and t == 0.0


class TestModlaw:
    def test_closed_form_query(self, tmp_path, capsys):
        code = run(["--out", str(tmp_path), "--no-plots", "modlaw",
                    "--ell", "1.0", "--eta0", "0.0", "--t-collapse", "1.0",
                    "--t", "0.0"])
        assert code == 0
        out = capsys.readouterr().out
        lam = float(out.splitlines()[0].split("=")[1])
        assert np.isclose(lam, 0.25)

    def test_nonpositive_ell_usage_error(self, tmp_path):
        assert run(["--out", str(tmp_path), "--no-plots", "modlaw",
                    "--ell", "-1.0"]) == 2

    def test_scan_emits_table(self, tmp_path):
        code = run(["--out", str(tmp_path), "--no-plots", "modlaw", "--scan",
                    "--scan-points", "21"])
        assert code == 0
        lines = (tmp_path / "scan.csv").read_text().strip().splitlines()
        assert len(lines) == 21 * 21 + 1


class TestChiral:
    def test_profile_round_trip(self, tmp_path):
        code = run(["--out", str(tmp_path), "--no-plots", "chiral",
                    "--b", "1e-3", "--radius", "40.0"])
        assert code == 0
        assert (tmp_path / "profile.bin").exists()

    def test_out_of_range_params(self, tmp_path):
        assert run(["--out", str(tmp_path), "--no-plots", "chiral",
                    "--b", "0.5", "--radius", "160.0"]) == 2


class TestBlowup:
    def test_short_profile_run(self, tmp_path):
        code = run(["--out", str(tmp_path), "--no-plots", "blowup",
                    "--n", "4096", "--length", "100.0", "--dt", "4e-4",
                    "--t-end", "0.02", "--stride", "10"])
        assert code == 0
        mod = np.genfromtxt(tmp_path / "modulation.csv", delimiter=",",
                            names=True)
        pred = np.genfromtxt(tmp_path / "modlaw_prediction.csv", delimiter=",",
                             names=True)
        assert mod["t"].shape == pred["t"].shape
        assert np.all(np.diff(mod["lam"]) < 0)
