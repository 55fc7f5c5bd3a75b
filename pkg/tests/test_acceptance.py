"""Acceptance criteria 1-7; each test prints one PASS/FAIL line."""

import json
import time
from fractions import Fraction as F

import numpy as np
import pytest

from tverflat.certificate import Certificate, verify
from tverflat.feasibility import HullSystem, common_point_gap, feasible_exact
from tverflat.geometry import (
    Subspace,
    complement_basis,
    exact_array,
    flat_from,
    orthonormalize,
    project,
    projection_residual,
    subspace_distance,
)
from tverflat.instances import DEGENERACIES, GadgetSpec, gen_gadget, gen_random
from tverflat.radon import radon_partition
from tverflat.solver import SolverConfig, all_bipartitions, brute_oracle, solve
from tverflat.sweep import run_sweep

GADGET_CELLS = [(2, 1), (3, 1), (3, 2), (4, 2), (4, 3)]
SWEEP_CELLS = [(2, 1), (3, 1), (3, 2)]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_gadget_exactness(report):
    t0 = time.perf_counter()
    bad = []
    for d, k in GADGET_CELLS:
        inst, cert = gen_gadget(GadgetSpec(d, k))
        rep = verify(inst, cert)
        split = (tuple(range(d - k + 1)), (d - k + 1,))
        if not (rep.accepted and rep.exact and rep.residual == 0
                and all(p == split for p in cert.bipartitions)):
            bad.append((d, k))
    dt = time.perf_counter() - t0
    report(1, not bad and dt < 1.0,
           f"gadget exactness, {len(GADGET_CELLS) - len(bad)}/{len(GADGET_CELLS)} cells exact, {dt:.3f} s")


def test_criterion_2_gadget_recovery(report):
    rows = []
    ok = True
    for d, k in GADGET_CELLS:
        inst, known = gen_gadget(GadgetSpec(d, k))
        t0 = time.perf_counter()
        cert = solve(inst, SolverConfig(seed=42))
        dt = time.perf_counter() - t0
        dist = subspace_distance(cert.L, known.L)
        good = dist <= 1e-6 and cert.bipartitions == known.bipartitions and dt < 10
        ok &= good
        rows.append(f"{d}:{k} dist={dist:.1e} t={dt:.2f}s")
    report(2, ok, "gadget recovery, " + ", ".join(rows))


def _feasible_splits(X):
    out = []
    for a, b in all_bipartitions(X.shape[0]):
        if feasible_exact(HullSystem.from_points([X[list(a)], X[list(b)]]))[0]:
            out.append((a, b))
    return out


def test_criterion_3_radon_correctness(report):
    t0 = time.perf_counter()
    failures = 0
    total = 0
    for d in (2, 3, 4):
        for seed in range(200):
            X = gen_random(d, 0, seed=seed).sets[0]
            R = radon_partition(X)
            total += 1
            ok, _ = feasible_exact(HullSystem.from_points([X[list(R.part_pos)], X[list(R.part_neg)]]))
            good = ok and np.all(R.weights_pos @ X[list(R.part_pos)] == R.point)
            if d == 2:
                good &= _feasible_splits(X) == [R.parts]
            failures += not good
    dt = time.perf_counter() - t0
    report(3, failures == 0 and dt < 30,
           f"radon correctness, {total - failures}/{total} exact, d=2 enumeration agrees, {dt:.1f} s")


def test_criterion_4_solve_sweep(report):
    t0 = time.perf_counter()
    rep = run_sweep(SWEEP_CELLS, 100, seed=42, config=SolverConfig(time_budget=30.0), degenerate=20)
    dt = time.perf_counter() - t0
    rows = rep.rows
    worst = max(r.residual for r in rows)
    slow = max(r.elapsed for r in rows)
    ok = (rep.failures == 0 and all(r.residual <= 1e-6 for r in rows)
          and slow <= 30 and dt < 20 * 60)
    expected = len(SWEEP_CELLS) * (100 + 20 * len(DEGENERACIES))
    ok &= len(rows) == expected
    report(4, ok, f"solve sweep, {len(rows) - rep.failures}/{len(rows)} solved, "
                  f"max residual {worst:.1e}, slowest {slow:.2f} s, total {dt:.0f} s")


def test_criterion_5_oracle_agreement(report):
    t0 = time.perf_counter()
    ok = True
    worst_gap = 0.0
    for seed in range(25):
        inst = gen_random(2, 1, seed=1000 + seed)
        orc = brute_oracle(inst, grid_resolution=4096)
        cert = solve(inst)
        worst_gap = max(worst_gap, orc.gap)
        ok &= orc.gap <= 1e-4 and cert.residual <= orc.gap + 1e-6
    dt = time.perf_counter() - t0
    report(5, ok and dt < 300, f"oracle agreement, 25 instances, worst oracle gap {worst_gap:.1e}, {dt:.1f} s")


def _rotated(cert: Certificate, inst, theta):
    """Tilt L by ``theta`` toward the direction along F where the witnesses spread most."""
    B = np.asarray(cert.L.basis, float)
    C = complement_basis(Subspace(B)).basis
    W = []
    for S, parts, ws in zip(inst.sets, cert.bipartitions, cert.weights):
        S = np.asarray(S, float)
        for part, w in zip(parts, ws):
            W.append(np.asarray(w, float) @ S[list(part)])
    W = np.array(W) @ C
    _, _, Vt = np.linalg.svd(W - W.mean(axis=0))
    v = C @ Vt[0]
    u = B[:, 0]
    B2 = B.copy()
    B2[:, 0] = np.cos(theta) * u + np.sin(theta) * v
    return Certificate(cert.bipartitions, flat_from(Subspace(B2), cert.flat.anchor), cert.weights)


def test_criterion_6_verifier_discrimination(report):
    t0 = time.perf_counter()
    accepted = rejected = 0
    for i in range(100):
        d, k = SWEEP_CELLS[i % 3]
        inst = gen_random(d, k, seed=500 + i).as_float()
        cert = solve(inst)
        accepted += verify(inst, cert, tol=1e-6).accepted
        rejected += not verify(inst, _rotated(cert, inst, 1e-2), tol=1e-6).accepted
    dt = time.perf_counter() - t0
    report(6, accepted == 100 and rejected == 100 and dt < 60,
           f"verifier discrimination, {accepted}/100 accepted, {rejected}/100 perturbed rejected, {dt:.1f} s")


def _random_rotation(rng, d):
    Q, R = np.linalg.qr(rng.normal(size=(d, d)))
    return Q * np.sign(np.diag(R))


def test_criterion_7_property_suites(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    results = {}

    # projection idempotence and Pythagoras
    ok = True
    for _ in range(10_000):
        d = int(rng.integers(1, 7))
        m = int(rng.integers(1, d + 1))
        L = orthonormalize(rng.normal(size=(m, d)))
        x = rng.normal(size=d) * 10
        c = project(L, x)
        ok &= np.allclose(project(L, L.basis @ c), c, atol=1e-10)
        cc = project(complement_basis(L), x) if m < d else np.zeros(0)
        ok &= abs(x @ x - c @ c - cc @ cc) <= 1e-9 * max(1.0, x @ x)
        ok &= projection_residual(complement_basis(complement_basis(L)), L) <= 1e-10
    results["projection"] = ok

    # Radon two-sided identity, exact
    ok = True
    for _ in range(1000):
        m = int(rng.integers(1, 5))
        X = exact_array([[F(int(v), 32) for v in row] for row in rng.integers(-32, 33, size=(m + 2, m))])
        R = radon_partition(X)
        lam = R.dependence.coefficients
        pos = sum(lam[i] * X[i] for i in R.part_pos) / sum(lam[i] for i in R.part_pos)
        neg = sum(-lam[i] * X[i] for i in R.part_neg) / sum(-lam[i] for i in R.part_neg)
        ok &= bool(np.all(pos == neg) and np.all(pos == R.point))
    results["radon"] = ok

    # feasibility gap: monotone in the hulls, translation equivariant
    mono = trans = True
    for _ in range(1000):
        m = int(rng.integers(1, 4))
        hulls = [rng.normal(size=(int(rng.integers(1, 5)), m)) for _ in range(int(rng.integers(2, 4)))]
        base = common_point_gap(HullSystem.from_points(hulls))
        t = rng.normal(size=m) * 5
        moved = common_point_gap(HullSystem.from_points(hulls).translated(t))
        trans &= abs(moved.gap - base.gap) <= 1e-8 * (1 + base.gap)
        j = int(rng.integers(len(hulls)))
        hulls[j] = np.vstack([hulls[j], rng.normal(size=(1, m)) * 2])
        mono &= common_point_gap(HullSystem.from_points(hulls)).gap <= base.gap + 1e-9
    results["monotone"] = mono
    results["translation"] = trans

    # solver rigid-motion equivariance: the moved certificate stays valid and
    # the solver succeeds on the moved instance
    ok = True
    for i in range(50):
        d, k = SWEEP_CELLS[i % 3]
        inst = gen_random(d, k, seed=9000 + i).as_float()
        Q, t = _random_rotation(rng, d), rng.normal(size=d) * 3
        moved = inst.transformed(Q, t)
        cert = solve(inst)
        B = Q @ np.asarray(cert.L.basis, float)
        image = Certificate(cert.bipartitions,
                            flat_from(Subspace(B), np.asarray(cert.flat.anchor, float) + B.T @ t),
                            cert.weights)
        ok &= verify(moved, image).accepted and solve(moved).residual <= 1e-6
    results["rigid-motion"] = ok

    # sweep determinism
    cfg = SolverConfig(threads=2)
    dumps = [json.dumps(run_sweep([(2, 1), (3, 1), (3, 2)], 4, seed=7, config=cfg, degenerate=1).to_json(),
                        sort_keys=True) for _ in range(3)]
    results["sweep-determinism"] = len(set(dumps)) == 1

    dt = time.perf_counter() - t0
    passed = [k for k, v in results.items() if v]
    failed = [k for k, v in results.items() if not v]
    detail = f"property suites, passed {', '.join(passed)}"
    if failed:
        detail += f"; FAILED {', '.join(failed)}"
    report(7, not failed, detail + f", {dt:.1f} s")
