import json
import math
from pathlib import Path

import numpy as np
import pytest

from besov_wip import cli
from besov_wip.core import BesovParams
from besov_wip.diagnostics import necessity_statistic
from besov_wip.mc import replicate_values
from besov_wip.processes import GeneratorSpec, read_series_csv, sample_increments

DATA = Path(__file__).parent / "data"


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def gen_file(tmp_path):
    def make(name="x.csv", *extra):
        f = tmp_path / name
        assert run("gen", "--output", f, *extra) == 0
        return f
    return make


class TestGen:
    def test_rademacher(self, gen_file):
        f = gen_file("r.csv", "--family", "rademacher", "--n", 8, "--seed", 1)
        s = read_series_csv(f)
        assert s.n == 8 and set(np.abs(s.values)) == {1.0}

    def test_identical_files(self, gen_file):
        first = gen_file("a.csv", "--family", "arch", "--n", 50, "--seed", 3).read_bytes()
        again = gen_file("a.csv", "--family", "arch", "--n", 50, "--seed", 3).read_bytes()
        assert first == again

    @pytest.mark.parametrize("flags", [["--family", "pareto", "--beta", "1.5"], ["--family", "arch", "--a1", "1"],
                                       ["--n", "0"]])
    def test_invalid(self, flags, tmp_path, capsys):
        assert run("gen", "--output", tmp_path / "z.csv", *flags) == cli.EXIT_USAGE
        assert "besov-wip gen" in capsys.readouterr().err

    def test_bad_choice(self):
        with pytest.raises(SystemExit) as info:
            run("gen", "--family", "cauchy")
        assert info.value.code == 2

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# increments\nfamily = pareto\nbeta = 3\nn = 20\nseed = 9\n")
        assert run("gen", "--config", cfg, "--seed", 10, "--output", tmp_path / "o.csv") == 0
        s = read_series_csv(tmp_path / "o.csv")
        want = sample_increments(GeneratorSpec.pareto(3.0), 20, 10)
        assert s.values.tobytes() == want.values.tobytes()

    def test_provenance_replay(self, tmp_path):
        f = tmp_path / "p.csv"
        assert run("gen", "--family", "gaussian", "--sigma", 2, "--n", 30, "--seed", 4, "--output", f) == 0
        first = f.read_bytes()
        header = json.loads(f.read_text().splitlines()[0][1:])
        cfg = tmp_path / "replay.json"
        cfg.write_text(json.dumps(header["config"]))
        f.unlink()
        assert run("gen", "--config", cfg) == 0
        assert f.read_bytes() == first


class TestBesov:
    def report(self, path, tmp_path, *extra):
        out = tmp_path / (path.stem + ".json")
        assert run("besov", "--input", path, "--p", 4, "--alpha", 0.35, "--output", out, *extra) == 0
        return json.loads(out.read_text())

    def test_zero_series(self, tmp_path):
        f = tmp_path / "zero.csv"
        f.write_text("value\n" + "0\n" * 16)
        r = self.report(f, tmp_path)
        assert r["lp"] == r["seminorm"] == r["total"] == r["sequential_norm"] == 0
        assert r["level_statistics"] == [0.0] * 5

    def test_scaled_by_two(self, gen_file, tmp_path):
        f = gen_file("x.csv", "--n", 64, "--seed", 2)
        g = tmp_path / "x2.csv"
        g.write_text("\n".join(repr(float(2 * v)) for v in read_series_csv(f).values) + "\n")
        a, b = self.report(f, tmp_path), self.report(g, tmp_path)
        for key in ("lp", "seminorm", "total", "sequential_norm"):
            assert b[key] == pytest.approx(2 * a[key], rel=1e-12)
        np.testing.assert_allclose(b["level_statistics"], 2 * np.array(a["level_statistics"]), rtol=1e-12)

    def test_fixture_matches_library(self, tmp_path):
        f = DATA / "sixteen.csv"
        r = self.report(f, tmp_path)
        want = cli.besov_report(read_series_csv(f).values, BesovParams(4, 0.35))
        for key in ("lp", "seminorm", "total", "sequential_norm", "level_statistics", "n"):
            assert r[key] == want[key]
        assert len(r["level_statistics"]) == 5
        assert r["config"]["p"] == 4.0 and r["config"]["command"] == "besov"

    def test_round_trip_exact(self, gen_file, tmp_path):
        f = gen_file("y.csv", "--family", "pareto", "--beta", 3, "--n", 128, "--seed", 6)
        r = self.report(f, tmp_path)
        mem = cli.besov_report(sample_increments(GeneratorSpec.pareto(3.0), 128, 6).values, BesovParams(4, 0.35))
        assert all(r[k] == mem[k] for k in ("lp", "seminorm", "total", "sequential_norm", "level_statistics"))

    def test_parse_error(self, tmp_path, capsys):
        f = tmp_path / "bad.csv"
        f.write_text("value\n1\n2\nthree\n")
        assert run("besov", "--input", f) == cli.EXIT_DATA
        assert "bad.csv:4" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        assert run("besov", "--input", tmp_path / "nope.csv") == cli.EXIT_DATA
        assert run("besov") == cli.EXIT_USAGE

    def test_bad_params(self, gen_file):
        assert run("besov", "--input", gen_file(), "--alpha", 0.6) == cli.EXIT_USAGE

    def test_replay(self, gen_file, tmp_path):
        f = gen_file("z.csv", "--n", 40)
        out = tmp_path / "rep.json"
        assert run("besov", "--input", f, "--p", 3, "--alpha", 0.2, "--output", out) == 0
        first = out.read_bytes()
        cfg = tmp_path / "cfg.json"
        cfg.write_bytes(first)
        out.unlink()
        assert run("besov", "--config", cfg) == 0
        assert out.read_bytes() == first


@pytest.fixture(scope="module")
def critvals(tmp_path_factory):
    prefix = tmp_path_factory.mktemp("cv") / "law"
    assert run("critvals", "--p", 4, "--alpha", 0.3, "--resolution", 1024, "--reps", 400, "--seed", 5,
               "--centered", "--output", prefix) == 0
    return prefix


class TestCritvals:
    def test_outputs(self, critvals):
        lines = Path(f"{critvals}.quantiles.csv").read_text().splitlines()
        assert lines[1] == "u,value" and [l.split(",")[0] for l in lines[2:]] == ["0.9", "0.95", "0.99"]
        vals = [float(l.split(",")[1]) for l in lines[2:]]
        assert vals == sorted(vals)
        meta = json.loads(Path(f"{critvals}.json").read_text())
        assert meta["config"]["reps"] == 400 and meta["centered"] is True
        sample = np.loadtxt(f"{critvals}.sample.csv", skiprows=1)
        assert sample.size == 400

    def test_deterministic_dump(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for pre in (a, b):
            assert run("critvals", "--reps", 10, "--resolution", 128, "--seed", 3, "--output", pre) == 0
        da = Path(f"{a}.sample.csv").read_bytes()
        assert da == Path(f"{b}.sample.csv").read_bytes()
        assert len(da.splitlines()) == 11

    def test_b_superset(self, tmp_path):
        q = {}
        for b in (0.5, 1.0):
            pre = tmp_path / f"b{b}"
            assert run("critvals", "--b", b, "--reps", 200, "--resolution", 256, "--seed", 8, "--output", pre) == 0
            q[b] = [float(l.split(",")[1]) for l in Path(f"{pre}.quantiles.csv").read_text().splitlines()[2:]]
        assert all(x >= y for x, y in zip(q[1.0], q[0.5]))

    def test_resolution_stability(self, tmp_path):
        q95 = []
        for m in (2 ** 12, 2 ** 13):
            pre = tmp_path / f"m{m}"
            assert run("critvals", "--resolution", m, "--reps", 1000, "--seed", 21, "--output", pre) == 0
            q95.append(json.loads(Path(f"{pre}.json").read_text())["quantiles"]["0.95"])
        assert abs(q95[1] - q95[0]) / q95[1] <= 0.05

    def test_regime(self, tmp_path, capsys):
        assert run("critvals", "--p", 2, "--alpha", 0.3, "--output", tmp_path / "r") == cli.EXIT_REGIME
        assert "1/p" in capsys.readouterr().err

    def test_needs_output(self):
        assert run("critvals", "--reps", 2) == cli.EXIT_USAGE


class TestScan:
    def scan(self, f, cv, tmp_path, *extra):
        out = tmp_path / "scan.json"
        code = run("scan", "--input", f, "--critvals", f"{cv}.sample.csv", "--output", out, *extra)
        return code, (json.loads(out.read_text()) if code == 0 else None)

    def test_constant(self, tmp_path, critvals):
        f = tmp_path / "c.csv"
        f.write_text("value\n" + "2.5\n" * 30)
        assert self.scan(f, critvals, tmp_path)[0] == cli.EXIT_DATA

    def test_missing_critvals(self, gen_file, tmp_path):
        assert run("scan", "--input", gen_file(), "--critvals", tmp_path / "none.csv") == cli.EXIT_DATA

    def test_regime(self, gen_file):
        assert run("scan", "--input", gen_file(), "--p", 2, "--alpha", 0.3) == cli.EXIT_REGIME

    def test_planted_epidemic(self, tmp_path, critvals):
        n, h = 1024, 128
        x = sample_increments(GeneratorSpec.gaussian(), n, 12).values.copy()
        x[(n - h) // 2:(n - h) // 2 + h] += 2.0
        f = tmp_path / "epi.csv"
        f.write_text("value\n" + "\n".join(repr(float(v)) for v in x) + "\n")
        code, res = self.scan(f, critvals, tmp_path)
        assert code == 0 and res["reject"] is True
        assert res["n"] == n and res["config"]["command"] == "scan"

    def test_null_golden(self, tmp_path, critvals):
        code, res = self.scan(DATA / "null_gaussian.csv", critvals, tmp_path)
        golden = json.loads((DATA / "null_scan_golden.json").read_text())
        assert code == 0
        for key in ("reject", "statistic", "argmax_k", "argmax_i", "critical_value", "p_value"):
            assert res[key] == golden[key]

    def test_mc_flags(self, gen_file, tmp_path):
        f = gen_file("m.csv", "--n", 200, "--seed", 1)
        out = tmp_path / "s.json"
        assert run("scan", "--input", f, "--resolution", 128, "--mc-reps", 50, "--mc-seed", 4, "--output", out) == 0
        res = json.loads(out.read_text())
        assert res["mc"] == {"m": 128, "reps": 50, "seed": 4}


class TestSweep:
    def rows(self, tmp_path, *flags):
        out = tmp_path / "sweep.csv"
        assert run("sweep", "--output", out, *flags) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# ") and lines[1] == "beta,N,j,statistic,stderr"
        return [l.split(",") for l in lines[2:]]

    def test_single_point_equals_direct(self, tmp_path):
        rows = self.rows(tmp_path, "--statistic", "necessity", "--N-values", 8, "--reps", 30, "--seed", 5)
        prm = BesovParams(4, 0.3)
        vals = replicate_values(lambda s: necessity_statistic(sample_increments(GeneratorSpec.gaussian(), 256, s),
                                                              prm), 30, 5)
        assert len(rows) == 1 and float(rows[0][3]) == float(np.median(vals))

    def test_gaussian_decreasing(self, tmp_path):
        rows = self.rows(tmp_path, "--statistic", "necessity", "--N-values", "8,10,12", "--reps", 50)
        med = [float(r[3]) for r in rows]
        assert med[0] > med[1] > med[2]

    def test_pareto_nondecreasing(self, tmp_path):
        rows = self.rows(tmp_path, "--statistic", "necessity", "--beta-values", "2.2", "--p", 4, "--alpha", 0.35,
                         "--N-values", "10,16", "--reps", 100, "--seed", 15)
        med = [float(r[3]) for r in rows]
        assert rows[0][0] == "2.2" and med[1] >= med[0]

    def test_tightness_and_lln(self, tmp_path):
        rows = self.rows(tmp_path, "--statistic", "tightness", "--family", "rademacher", "--N-values", 4,
                         "--reps", 5)
        assert float(rows[0][3]) == pytest.approx(2 ** 4 * 2 ** (-4 * 4 / (1 / 0.45)) / 4, rel=1e-12)
        rows = self.rows(tmp_path, "--statistic", "lln", "--N-values", "6,7", "--reps", 10)
        assert len(rows) == 2 and all(math.isfinite(float(r[4])) for r in rows)


class TestConvergence:
    def test_single_criterion(self, tmp_path):
        out = tmp_path / "conv.json"
        assert run("convergence", "--only", 2, "--output", out) == 0
        r = json.loads(out.read_text())
        assert r["all_passed"] is True and r["criteria"][0]["criterion"] == "2"

    def test_unknown(self):
        assert run("convergence", "--only", 42) == cli.EXIT_USAGE
