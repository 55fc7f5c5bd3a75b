import json
from fractions import Fraction as F

import numpy as np
import pytest

from tverflat import io
from tverflat.certificate import verify
from tverflat.cli import known_certificate_path, main
from tverflat.geometry import subspace_distance
from tverflat.instances import DEGENERACIES, GadgetSpec, gen_degenerate, gen_gadget, gen_random
from tverflat.solver import SolverConfig, solve
from tverflat.sweep import derive_seed, parse_cells, run_sweep


def _same_instance(a, b):
    return a.d == b.d and a.k == b.k and all(
        x.shape == y.shape and all(u == v and type(u) is type(v) for u, v in zip(x.ravel(), y.ravel()))
        for x, y in zip(a.sets, b.sets)
    )


class TestFormats:
    @pytest.mark.parametrize("seed", range(5))
    def test_instance_round_trip_exact(self, seed):
        inst = gen_random(4, 2, "gaussian", seed=seed)
        assert _same_instance(io.load_instance(io.dump_instance(inst)), inst)

    @pytest.mark.parametrize("kind", DEGENERACIES)
    def test_degenerate_round_trip(self, kind):
        inst = gen_degenerate(3, 1, kind, seed=1)
        assert _same_instance(io.load_instance(io.dump_instance(inst)), inst)

    def test_decimal_strings_are_exact(self):
        text = '{"d": 2, "k": 1, "sets": [[["0.1", "1/3"], [0.5, 2], ["-7", "1e-3"]], ' \
               '[["0", "0"], ["1", "0"], ["0", "1"]]]}'
        inst = io.load_instance(text)
        assert list(inst.sets[0][0]) == [F(1, 10), F(1, 3)]
        assert list(inst.sets[0][1]) == [F(1, 2), 2]
        assert inst.sets[0][2][1] == F(1, 1000)

    @pytest.mark.parametrize("d,k", [(2, 1), (4, 2)])
    def test_gadget_certificate_round_trip(self, d, k):
        inst, cert = gen_gadget(GadgetSpec(d, k))
        back = io.load_certificate(io.dump_certificate(cert))
        assert back.bipartitions == cert.bipartitions
        assert np.all(back.L.basis == cert.L.basis)
        assert np.all(back.flat.anchor == cert.flat.anchor)
        rep = verify(inst, back)
        assert rep.exact and rep.accepted

    def test_float_certificate_survives_text(self):
        inst, known = gen_gadget(GadgetSpec(3, 1))
        cert = solve(inst)
        back = io.load_certificate(io.dump_certificate(cert))
        rep = verify(inst, back)
        assert rep.accepted and not rep.exact
        assert subspace_distance(back.L, known.L) <= 1e-6

    def test_malformed(self):
        for text in ["", "[]", '{"d": 2}', '{"d": "x", "k": 1, "sets": []}',
                     '{"d": 2, "k": 1, "sets": [[["a", "b"]]]}']:
            with pytest.raises(ValueError):
                io.load_instance(text)

    def test_points(self):
        assert io.load_points('{"points": [[1, 2], ["1/2", 0]]}')[1][0] == F(1, 2)
        with pytest.raises(io.FormatError):
            io.load_points("[[1, 2], [1]]")


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCli:
    def test_gen_gadget_writes_pair(self, tmp_path, capsys):
        path = tmp_path / "inst.json"
        code, _, _ = _run(capsys, "gen", "--gadget", "-d", "2", "-k", "1", "-o", str(path))
        assert code == 0
        assert path.exists() and known_certificate_path(str(path)).exists()
        assert known_certificate_path(str(path)).name == "inst.cert.json"

    def test_gen_random_reproducible(self, capsys):
        a = _run(capsys, "gen", "--random", "-d", "3", "-k", "1", "--seed", "7")[1]
        b = _run(capsys, "gen", "--random", "-d", "3", "-k", "1", "--seed", "7")[1]
        assert a == b and json.loads(a)["d"] == 3

    def test_gen_usage_error(self, capsys):
        code, _, err = _run(capsys, "gen", "--random", "-d", "3", "-k", "5")
        assert code == 1 and "k" in err

    def test_solve_and_verify_gadget(self, tmp_path, capsys):
        inst = tmp_path / "g.json"
        sol = tmp_path / "sol.json"
        _run(capsys, "gen", "--gadget", "-d", "3", "-k", "2", "-o", str(inst))
        code, _, _ = _run(capsys, "solve", str(inst), "-o", str(sol), "--threads", "1")
        assert code == 0
        known = io.load_certificate(known_certificate_path(str(inst)).read_text())
        found = io.load_certificate(sol.read_text())
        assert subspace_distance(found.L, known.L) <= 1e-6
        code, out, _ = _run(capsys, "verify", str(inst), str(sol))
        assert code == 0 and "verdict: ACCEPT" in out and "mode: approx" in out
        code, out, _ = _run(capsys, "verify", str(inst), str(known_certificate_path(str(inst))), "--exact")
        assert code == 0
        assert out.splitlines()[:3] == ["verdict: ACCEPT", "mode: exact", "residual: 0.000000e+00"]

    def test_solve_k0_exact(self, tmp_path, capsys):
        inst = tmp_path / "k0.json"
        sol = tmp_path / "k0c.json"
        _run(capsys, "gen", "--random", "-d", "3", "-k", "0", "-o", str(inst))
        assert _run(capsys, "solve", str(inst), "-o", str(sol))[0] == 0
        assert io.load_certificate(sol.read_text()).exact
        code, out, _ = _run(capsys, "verify", str(inst), str(sol), "--exact")
        assert code == 0 and "mode: exact" in out

    def test_solve_truncated(self, tmp_path, capsys):
        inst = tmp_path / "t.json"
        _run(capsys, "gen", "--gadget", "-d", "2", "-k", "1", "-o", str(inst))
        inst.write_text(inst.read_text()[:40])
        assert _run(capsys, "solve", str(inst))[0] == 1

    def test_solve_failure_exit(self, tmp_path, capsys):
        inst = tmp_path / "r.json"
        _run(capsys, "gen", "--random", "-d", "3", "-k", "1", "-o", str(inst))
        code, out, _ = _run(capsys, "solve", str(inst), "--restarts", "1", "--max-iters", "1",
                            "--tol", "1e-300", "--strategy", "radon-trace")
        assert code == 2 and json.loads(out)["status"] == "failed"

    def test_verify_perturbed_rejected(self, tmp_path, capsys):
        inst = tmp_path / "g.json"
        _run(capsys, "gen", "--gadget", "-d", "2", "-k", "1", "-o", str(inst))
        cpath = known_certificate_path(str(inst))
        obj = json.loads(cpath.read_text())
        obj["p"] = ["1"]
        cpath.write_text(json.dumps(obj))
        code, out, _ = _run(capsys, "verify", str(inst), str(cpath))
        assert code == 2 and out.startswith("verdict: REJECT")

    def test_verify_malformed_certificate(self, tmp_path, capsys):
        inst = tmp_path / "g.json"
        _run(capsys, "gen", "--gadget", "-d", "2", "-k", "1", "-o", str(inst))
        cpath = known_certificate_path(str(inst))
        obj = json.loads(cpath.read_text())
        obj["weights"][0][0] = ["-1", "2"]
        cpath.write_text(json.dumps(obj))
        code, out, _ = _run(capsys, "verify", str(inst), str(cpath))
        assert code == 1 and "problem: weights[0][0]" in out

    def test_verify_missing_file(self, tmp_path, capsys):
        assert _run(capsys, "verify", str(tmp_path / "a"), str(tmp_path / "b"))[0] == 1

    def test_radon_square(self, tmp_path, capsys):
        f = tmp_path / "sq.json"
        f.write_text("[[0,0],[1,0],[1,1],[0,1]]")
        code, out, _ = _run(capsys, "radon", str(f))
        assert code == 0
        assert out.splitlines() == [
            "partition: {0,2} | {1,3}",
            "zeros: {}",
            "radon point: (1/2, 1/2)",
            "dependence: (1/4, -1/4, 1/4, -1/4)",
        ]

    def test_radon_singleton(self, tmp_path, capsys):
        f = tmp_path / "t.json"
        f.write_text('{"points": [[0,0],[4,0],[0,4],[1,1]]}')
        out = _run(capsys, "radon", str(f))[1]
        assert out.splitlines()[0] == "partition: {0,1,2} | {3}"
        assert "radon point: (1, 1)" in out

    def test_radon_too_few(self, tmp_path, capsys):
        f = tmp_path / "f.json"
        f.write_text("[[0,0],[1,0],[1,1]]")
        assert _run(capsys, "radon", str(f))[0] == 1

    def test_bad_subcommand(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["frob"])
        assert err.value.code == 1


class TestSweep:
    def test_parse_cells(self):
        assert parse_cells("2:1, 3:2") == [(2, 1), (3, 2)]
        for bad in ["2", "2:2", "a:b"]:
            with pytest.raises(ValueError):
                parse_cells(bad)

    def test_derived_seeds_distinct(self):
        seeds = {derive_seed(42, 3, 1, "random", t) for t in range(200)}
        assert len(seeds) == 200

    def test_empty(self, capsys):
        code, out, _ = _run(capsys, "sweep", "--cells", "2:1", "--trials", "0")
        assert code == 0 and "total failures: 0" in out

    def test_report_shape_and_determinism(self):
        cfg = SolverConfig(threads=1)
        a = run_sweep([(2, 1), (3, 1)], 3, seed=5, config=cfg, degenerate=1)
        b = run_sweep([(2, 1), (3, 1)], 3, seed=5, config=cfg, degenerate=1)
        assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
        assert a.failures == 0
        cell = a.to_json()["cells"][0]
        assert cell["trials"] == 3 + len(DEGENERACIES)
        assert cell["successes"] + cell["failures"] == cell["trials"]
        assert set(cell["restarts"]) == {"min", "mean", "max", "total"}
        assert len(a.rows) == 2 * (3 + len(DEGENERACIES))

    def test_cli_json(self, tmp_path, capsys):
        out = tmp_path / "rep.json"
        code, text, _ = _run(capsys, "sweep", "--cells", "2:1", "--trials", "2", "--threads", "1",
                             "--json", str(out))
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["cells"][0]["trials"] == 2 and "mean_time" not in rep["cells"][0]
        assert text.splitlines()[0].startswith("sweep seed=42")
