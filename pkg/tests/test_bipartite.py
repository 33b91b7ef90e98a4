import json

import numpy as np
import pytest

from wfwitness.bipartite import (
    TSIRELSON,
    BipartiteScenario,
    JointTable,
    extremal_report,
    extremal_enumeration_check,
    bob_from_basis,
    check_no_signalling,
    chsh_coefficients,
    chsh_value,
    deterministic_strategies,
    deterministic_table,
    eval_bipartite,
    eval_P0_P1_PS,
    feasible_region_sweep,
    joint_table,
    nom_violating_strategy,
    random_bipartite_scenario,
    region_csv,
    relabeled_chsh_values,
)
from wfwitness.qlinalg import ValidationError
from wfwitness.scenario import AOM, NOM, FriendMeasurement, SuperObserverOp

C2 = np.cos(np.pi / 8) ** 2


def test_coefficients():
    c = chsh_coefficients()
    assert c[0, 0, 1, 1] == 0 and c[0, 1, 1, 1] == 0.25 and c[1, 1, 0, 1] == 0.25
    assert np.isclose(c.sum(), 2.0)


def test_strategy_values():
    t = joint_table(nom_violating_strategy())
    rep = eval_P0_P1_PS(t)
    assert abs(rep.details["P0"] - 0.75) < 1e-9
    assert abs(rep.details["P1"] - C2) < 1e-9
    assert abs(rep.value - TSIRELSON) < 1e-9
    assert rep.violated and rep.details["P1_violated"]
    assert check_no_signalling(t)


def test_strategy_slices():
    t = joint_table(nom_violating_strategy())
    for x, y in [(0, 0), (0, 1), (1, 0)]:
        assert abs(np.trace(t.slice(x, y, 1)) - C2) < 1e-12
    assert abs(np.trace(t.slice(1, 1, 1)) - np.sin(np.pi / 8) ** 2) < 1e-12
    assert abs(np.trace(t.slice(0, 1, 1)) - (1 + np.sin(np.pi / 4)) / 2) < 1e-12


def test_strategy_under_aom_respects_bound():
    rep = eval_bipartite(nom_violating_strategy(AOM))
    assert rep.value <= 0.75 + 1e-9 and not rep.violated


def _product_scenario(op=None):
    z = np.eye(2)
    ops = (SuperObserverOp.identity(), op or SuperObserverOp.block([np.eye(2), np.eye(2)]))
    bob = np.array([bob_from_basis(z, 1)] * 2)
    return BipartiteScenario(np.array([1, 0, 0, 0]), (FriendMeasurement(z),) * 2, bob, ops, NOM)


def test_product_state():
    t = joint_table(_product_scenario())
    assert t.p(0, 0, 0, 0, 0) == pytest.approx(1.0)


def test_identity_op_gives_P1_equal_P0():
    rep = eval_bipartite(random_bipartite_scenario(4, NOM).replace(ops=_product_scenario().ops))
    assert abs(rep.details["P0"] - rep.details["P1"]) < 1e-12
    assert rep.value <= 0.75 + 1e-12


def test_classical_all_zero_strategy():
    rep = eval_P0_P1_PS(deterministic_table((0, 0), (0, 0), (0, 0)))
    assert (rep.details["P0"], rep.details["P1"], rep.value) == pytest.approx((0.75, 0.75, 0.75))


def test_deterministic_tables_are_no_signalling_and_bounded():
    count = 0
    for _, t in deterministic_strategies():
        count += 1
        assert check_no_signalling(t)
        assert eval_P0_P1_PS(t).value <= 0.75 + 1e-12
    assert count == 64


def test_signalling_table_detected():
    probs = np.array(deterministic_table((0, 0), (0, 0), (0, 0)).probs)
    probs[:, :, 0, 1, 0] = [[0, 0], [1, 0]]
    assert not check_no_signalling(JointTable(probs))
    probs = np.array(deterministic_table((0, 0), (0, 0), (0, 0)).probs)
    probs[:, :, 1, 0, 1] = [[0, 1], [0, 0]]
    probs[:, :, 1, 1, 1] = [[0, 1], [0, 0]]
    assert not check_no_signalling(JointTable(probs))


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("op", ["block", "channel"])
def test_tables_no_signalling(seed, op):
    for mode in (AOM, NOM):
        assert check_no_signalling(joint_table(random_bipartite_scenario(seed, mode, d_B=2 + seed % 2, op=op)))


@pytest.mark.parametrize("seed", range(20))
def test_w0_identical_across_modes(seed):
    a = joint_table(random_bipartite_scenario(seed, AOM))
    n = joint_table(random_bipartite_scenario(seed, NOM))
    assert np.allclose(a.probs[..., 0], n.probs[..., 0], atol=1e-14)


@pytest.mark.parametrize("seed", range(30))
def test_extremal_enumeration(seed):
    bs = random_bipartite_scenario(seed, AOM)
    rep = extremal_report(bs)
    assert rep["ok"], rep
    e = relabeled_chsh_values(joint_table(bs))
    assert abs(e[1] - (1 - e[0])) < 1e-12


def test_extremal_check_on_strategy_and_mode_guard():
    assert extremal_enumeration_check(nom_violating_strategy(AOM))
    with pytest.raises(ValidationError):
        extremal_enumeration_check(nom_violating_strategy(NOM))


def test_flip_both_relabeling_exact():
    t = deterministic_table((1, 0), (0, 1), (0, 0))
    e = relabeled_chsh_values(t)
    assert e[1] == 1 - e[0]


def test_table_json_round_trip():
    t = joint_table(nom_violating_strategy())
    data = json.loads(t.to_json())
    assert len(data["probabilities"]) == 32
    assert "p(a=0,b=1|x=1,y=0,w=1)" in data["probabilities"]
    assert np.array_equal(JointTable.from_dict(data).probs, t.probs)


def test_validation():
    bs = nom_violating_strategy()
    with pytest.raises(ValidationError, match="completeness"):
        bs.replace(bob=np.array([[np.eye(2), np.eye(2)]] * 2))
    with pytest.raises(ValidationError, match="psi_AB"):
        bs.replace(psi=np.ones(6) / np.sqrt(6))


def test_bob_rank_zero_and_full():
    bs = random_bipartite_scenario(1, AOM)
    bob = np.array([bob_from_basis(np.eye(2), 0), bob_from_basis(np.eye(2), 2)])
    t = joint_table(bs.replace(bob=bob))
    assert np.allclose(t.probs[:, 0, :, 0, :], 0) and check_no_signalling(t)


def test_region_sweep_contents():
    pts = feasible_region_sweep(10, 3)
    modes = {p.mode for p in pts}
    assert {"aom", "nom", "classical", "boundary_aom"} <= modes
    assert any(abs(p.P0 - 0.75) < 1e-9 and abs(p.P1 - C2) < 1e-9 for p in pts if p.mode == "nom")
    assert any(abs(p.P0 - 0.75) < 1e-12 and abs(p.P1 - 0.75) < 1e-12 for p in pts if p.mode == "classical")
    assert any(abs(p.P0 - TSIRELSON) < 1e-12 and abs(p.P1 - TSIRELSON) < 1e-12 for p in pts if p.mode.startswith("boundary"))
    for p in pts:
        if p.mode in ("aom", "classical"):
            assert p.P1 <= min(TSIRELSON, max(p.P0, 1.5 - p.P0)) + 1e-9
    assert region_csv(pts) == region_csv(feasible_region_sweep(10, 3))
    with pytest.raises(ValidationError):
        feasible_region_sweep(1)
