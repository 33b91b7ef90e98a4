"""One test per acceptance criterion; each prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the lines are also
collected in the terminal summary.
"""

import time

import numpy as np

from wfwitness import serialize
from wfwitness.bipartite import (
    TSIRELSON,
    check_no_signalling,
    eval_P0_P1_PS,
    joint_table,
    nom_violating_strategy,
    random_bipartite_scenario,
)
from wfwitness.cli import main
from wfwitness.optimize import maximize_witness
from wfwitness.oracle import oracle_joint_table, oracle_single_party
from wfwitness.qlinalg import derive_seed, make_rng
from wfwitness.sampling import random_scenario
from wfwitness.scenario import AOM, NOM, matching_nom_scenario, probability_table, run_trial
from wfwitness.sweep import bound_falsification_sweep
from wfwitness.witnesses import eval_T, eval_Tq, saturating_aom_realization, violating_nom_realization

COS2 = np.cos(np.pi / 8) ** 2


def test_criterion_1_single_party_construction(record_criterion, fixtures_dir):
    start = time.perf_counter()
    nom = serialize.load(fixtures_dir / "nom_T.json")
    aom = serialize.load(fixtures_dir / "aom_T.json")
    t_nom, t_aom = eval_T(nom).value, eval_T(aom).value
    elapsed = time.perf_counter() - start
    ok = abs(t_nom - 1) <= 1e-9 and abs(t_aom - 0.5) <= 1e-9 and elapsed < 1.0
    record_criterion(1, ok, f"T_NoM={t_nom:.12f} T_AoM={t_aom:.12f} time={elapsed:.3f}s")
    assert ok


def test_criterion_2_bound_falsification(record_criterion):
    start = time.perf_counter()
    rep = bound_falsification_sweep("T", AOM, 100_000, seed=2, dims=(2, 3, 4), inject=False)
    elapsed = time.perf_counter() - start
    t_rows = [r for r in rep.rows if r.witness == "T"]
    max_t = max(r.value for r in t_rows)
    rank1 = [r for r in rep.rows if "rank1" in r.failed_checks]
    ok = max_t <= 0.5 + 1e-9 and rep.max_margin <= 1e-9 and not rep.flags and not rank1 and elapsed < 120
    record_criterion(
        2, ok,
        f"samples={len(rep.rows)} (d=2: {len(t_rows)}) max T={max_t:.12f} max margin={rep.max_margin:.3e} "
        f"violations={len(rep.flags)} rank-one failures={len(rank1)} time={elapsed:.1f}s",
    )
    assert ok


def test_criterion_3_tq_constructions_and_optimizer(record_criterion):
    start = time.perf_counter()
    sat_err = nom_err = opt_excess = 0.0
    for i in range(100):
        rng = make_rng(303, i)
        d = int(rng.integers(2, 5))
        q = rng.dirichlet(np.ones(d))
        sat_err = max(sat_err, abs(eval_Tq(saturating_aom_realization(d, q), 1, q).value - q.max()))
        nom_err = max(nom_err, abs(eval_Tq(violating_nom_realization(d, q), 1, q).value - 1.0))
        res = maximize_witness("Tq", AOM, d, budget=2, seed=i, q=q, max_evals=4000)
        opt_excess = max(opt_excess, res.best_value - q.max())
    elapsed = time.perf_counter() - start
    ok = sat_err <= 1e-9 and nom_err <= 1e-9 and opt_excess <= 1e-6 and elapsed < 300
    record_criterion(
        3, ok,
        f"saturating err={sat_err:.2e} NoM err={nom_err:.2e} optimizer excess={opt_excess:.2e} time={elapsed:.1f}s",
    )
    assert ok


def test_criterion_4_unital_channels(record_criterion):
    start = time.perf_counter()
    rep = bound_falsification_sweep("T", AOM, 1000, seed=4, channel=True, inject=False)
    elapsed = time.perf_counter() - start
    rank1 = [r for r in rep.rows if r.failed_checks]
    ok = rep.max_value <= 0.5 + 1e-9 and not rep.flags and not rank1 and elapsed < 60
    record_criterion(4, ok, f"channels={len(rep.rows)} max T={rep.max_value:.12f} time={elapsed:.1f}s")
    assert ok


def test_criterion_5_matching_nom_unitary(record_criterion):
    worst = 0.0
    for i in range(100):
        rng = make_rng(505, i)
        d, n, m = int(rng.integers(2, 5)), int(rng.integers(1, 3)), int(rng.integers(2, 4))
        s = random_scenario(rng, d=d, n=n, m=m, dynamics=AOM)
        worst = max(worst, float(np.max(np.abs(probability_table(s) - probability_table(matching_nom_scenario(s))))))
    ok = worst <= 1e-9
    record_criterion(5, ok, f"100 scenarios, max |p_AoM - p_NoM| = {worst:.2e}")
    assert ok


def test_criterion_6_bipartite_strategy(record_criterion):
    t = joint_table(nom_violating_strategy())
    rep = eval_P0_P1_PS(t)
    p0, p1, ps = rep.details["P0"], rep.details["P1"], rep.value
    ns = check_no_signalling(t)
    ok = abs(p0 - 0.75) <= 1e-9 and abs(p1 - COS2) <= 1e-9 and abs(ps - TSIRELSON) <= 1e-9 and ns
    record_criterion(6, ok, f"P0={p0:.9f} P1={p1:.9f} PS={ps:.9f} no-signalling={ns}")
    assert ok


def test_criterion_7_bipartite_aom_sweep(record_criterion):
    start = time.perf_counter()
    rep = bound_falsification_sweep("PS", AOM, 10_000, seed=7, inject=False)
    elapsed = time.perf_counter() - start
    ok = rep.max_value <= 0.75 + 1e-9 and not rep.flags and not rep.aux_failures and elapsed < 300
    record_criterion(
        7, ok,
        f"samples={len(rep.rows)} max PS={rep.max_value:.12f} P1-bound/enumeration/no-signalling failures="
        f"{len(rep.aux_failures)} time={elapsed:.1f}s",
    )
    assert ok


def test_criterion_8_oracle_equivalence(record_criterion):
    single = bip = 0.0
    for i in range(1000):
        rng = make_rng(808, i)
        op = ("block", "channel", "unitary")[i % 3]
        s = random_scenario(rng, d=int(rng.integers(2, 5)), n=int(rng.integers(1, 3)), m=2,
                            dynamics=(AOM, NOM)[i % 2], op=op)
        for x in range(s.n):
            for w in range(s.m):
                a, b = run_trial(s, x, w), oracle_single_party(s, x, w)
                single = max(single, float(np.max(np.abs(a.probs - b.probs))), abs(a.null - b.null))
        bs = random_bipartite_scenario(derive_seed(808, i), (AOM, NOM)[i % 2], op=("block", "channel")[i % 2])
        bip = max(bip, float(np.max(np.abs(joint_table(bs).probs - oracle_joint_table(bs).probs))))
    ok = single <= 1e-12 and bip <= 1e-12
    record_criterion(8, ok, f"single-party max dev={single:.2e} bipartite max dev={bip:.2e}")
    assert ok


def test_criterion_9_determinism(record_criterion, tmp_path, monkeypatch, capsys):
    outputs = {}
    for threads in ("1", "2", "4"):
        monkeypatch.setenv("WFS_THREADS", threads)
        for witness in ("T", "Tq", "PS"):
            path = tmp_path / f"{witness}_{threads}.csv"
            assert main(["sweep", "--witness", witness, "--samples", "2000", "--seed", "11", "--out", str(path)]) == 0
            outputs.setdefault(witness, set()).add(path.read_bytes())
        region = tmp_path / f"region_{threads}.csv"
        assert main(["region", "--resolution", "20", "--seed", "11", "--out", str(region)]) == 0
        outputs.setdefault("region", set()).add(region.read_bytes())
    capsys.readouterr()
    ok = all(len(v) == 1 for v in outputs.values())
    record_criterion(9, ok, f"distinct outputs per command across 1/2/4 threads: { {k: len(v) for k, v in outputs.items()} }")
    assert ok
