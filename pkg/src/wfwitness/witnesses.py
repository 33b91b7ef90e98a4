"""Single-party witnesses ``T`` and ``T(q)`` with their AoM bounds.

Only outcome tables produced by :func:`run_trial` enter the formulas, never
the internal states.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .qlinalg import EPS_PROB, ValidationError, as_complex, complete_to_unitary, dagger
from .reports import WitnessReport, digest, make_report
from .scenario import AOM, NOM, FriendMeasurement, Scenario, SuperObserverOp, trial_probabilities

T_AOM_BOUND = 0.5


def validate_q(q: Sequence[float], d: int | None = None, tol: float = EPS_PROB) -> np.ndarray:
    """Check ``q`` is a probability vector with every entry in ``[0, 1)``."""
    arr = np.asarray(q, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("q must be a non-empty 1-D vector")
    if d is not None and arr.size != d:
        raise ValidationError(f"q must have length d={d}, got {arr.size}")
    if np.any(~np.isfinite(arr)) or np.any(arr < -tol):
        raise ValidationError("q entries must be non-negative")
    if np.any(arr >= 1.0):
        raise ValidationError("q entries must be strictly below 1")
    if abs(arr.sum() - 1.0) > tol:
        raise ValidationError(f"q must sum to 1 (got {arr.sum():.12g})")
    return arr


def t_value(p_identity, p_op) -> float:
    """``p(+1|U) - |p(+1|1) - 1/2| - |p(-1|1) - 1/2|`` with ``+1`` as outcome 0."""
    return float(p_op[0] - abs(p_identity[0] - 0.5) - abs(p_identity[1] - 0.5))


def tq_value(p_identity, p_op, q) -> float:
    """``p(0|A,U) - sum_i |p(i|A,1) - q_i|``."""
    return float(p_op[0] - np.sum(np.abs(np.asarray(p_identity) - np.asarray(q))))


def natural_q(scenario: Scenario, x: int = 0) -> np.ndarray:
    """The observed ``p(.|A,1)``; choosing it as ``q`` zeroes the penalty term."""
    return trial_probabilities(scenario, x, 0)


def eval_T(scenario: Scenario, U_index: int = 1, *, seed=None, tolerance: float = EPS_PROB) -> WitnessReport:
    if scenario.d != 2:
        raise ValidationError(f"T is defined for d = 2 (got d = {scenario.d})")
    if scenario.n != 1:
        raise ValidationError("T is defined for a single Friend input (n = 1)")
    p_id = trial_probabilities(scenario, 0, 0)
    p_u = trial_probabilities(scenario, 0, U_index)
    return make_report(
        "T",
        t_value(p_id, p_u),
        T_AOM_BOUND,
        digest=digest(scenario),
        seed=seed,
        tolerance=tolerance,
        details={"p_identity": p_id.tolist(), "p_op": p_u.tolist(), "op_index": U_index},
    )


def eval_Tq(
    scenario: Scenario, U_index: int, q, *, seed=None, tolerance: float = EPS_PROB
) -> WitnessReport:
    if scenario.n != 1:
        raise ValidationError("T(q) is defined for a single Friend input (n = 1)")
    q = validate_q(q, scenario.d)
    p_id = trial_probabilities(scenario, 0, 0)
    p_u = trial_probabilities(scenario, 0, U_index)
    return make_report(
        "Tq",
        tq_value(p_id, p_u, q),
        float(q.max()),
        digest=digest(scenario),
        seed=seed,
        tolerance=tolerance,
        details={"q": q.tolist(), "p_identity": p_id.tolist(), "p_op": p_u.tolist(), "op_index": U_index},
    )


def _basis(d: int, basis) -> FriendMeasurement:
    if basis is None:
        return FriendMeasurement.computational(d)
    return basis if isinstance(basis, FriendMeasurement) else FriendMeasurement(basis)


def _sqrt_q_state(meas: FriendMeasurement, q: np.ndarray) -> np.ndarray:
    return meas.basis @ np.sqrt(q).astype(np.complex128)


def saturating_aom_realization(d: int, q, basis=None) -> Scenario:
    """AoM scenario reaching ``T(q) = max_i q_i``.

    ``psi = sum_i sqrt(q_i) |psi_i>`` and the block op swaps ``|F_{i_m}>`` with
    ``|F_0>`` where ``q_{i_m}`` is the largest entry.
    """
    q = validate_q(q, d)
    meas = _basis(d, basis)
    i_max = int(np.argmax(q))
    perm = np.eye(d, dtype=np.complex128)
    perm[:, [0, i_max]] = perm[:, [i_max, 0]]
    ops = (SuperObserverOp.identity(), SuperObserverOp.block([perm]))
    return Scenario(d, 1, _sqrt_q_state(meas, q), (meas,), ops, AOM)


def violating_nom_realization(d: int, q, basis=None) -> Scenario:
    """NoM scenario reaching ``T(q) = 1``: the block op rotates ``sum_i sqrt(q_i)|F_i>`` onto ``|F_0>``."""
    q = validate_q(q, d)
    meas = _basis(d, basis)
    block = dagger(complete_to_unitary(np.sqrt(q).astype(np.complex128)))
    ops = (SuperObserverOp.identity(), SuperObserverOp.block([block]))
    return Scenario(d, 1, _sqrt_q_state(meas, q), (meas,), ops, NOM)


def worked_example(dynamics: str = NOM) -> Scenario:
    """Qubit example: equal superposition and the 45-degree rotation on span{F+, F-}."""
    u = as_complex([[1, 1], [-1, 1]]) / np.sqrt(2)
    psi = as_complex([1, 1]) / np.sqrt(2)
    ops = (SuperObserverOp.identity(), SuperObserverOp.block([u]))
    return Scenario(2, 1, psi, (FriendMeasurement.computational(2),), ops, dynamics)


def rank1_margin(scenario: Scenario, U_index: int) -> float:
    """``max_x [max_a p(a|A_x,U) - max_i p(i|A_x,1)]``; non-positive under AoM."""
    worst = -np.inf
    for x in range(scenario.n):
        p_id = trial_probabilities(scenario, x, 0)
        p_u = trial_probabilities(scenario, x, U_index)
        worst = max(worst, float(p_u.max() - p_id.max()))
    return worst


def check_rank1_bound(scenario: Scenario, U_index: int, tolerance: float = EPS_PROB) -> bool:
    return rank1_margin(scenario, U_index) <= tolerance
