"""Multi-restart Nelder-Mead search over scenario parameters.

A parameter vector concatenates a state (hyperspherical amplitudes plus
relative phases), optional Friend bases and the block unitaries, each unitary
in the Givens form of ``qlinalg.decode_unitary``. The analytic construction
for the requested witness is always the first restart.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bipartite import (
    ALICE_ENCODING,
    PS_AOM_BOUND,
    BipartiteScenario,
    bob_from_basis,
    chsh_value,
    joint_table,
    nom_violating_strategy,
    ps_value,
)
from .qlinalg import (
    EPS_PROB,
    UnitaryParams,
    ValidationError,
    complete_to_unitary,
    decode_unitary,
    encode_unitary,
    make_rng,
    n_unitary_params,
)
from .scenario import AOM, NOM, BLOCK, FriendMeasurement, Scenario, SuperObserverOp, normalize_dynamics, trial_probabilities
from .witnesses import (
    T_AOM_BOUND,
    saturating_aom_realization,
    t_value,
    tq_value,
    validate_q,
    violating_nom_realization,
)

OBJECTIVES = ("T", "Tq", "PS")
XATOL = 1e-8
MAX_EVALS = 20_000


def n_state_params(dim: int) -> int:
    return 2 * (dim - 1)


def decode_state(params) -> np.ndarray:
    """Unit vector from ``dim-1`` hyperspherical angles followed by ``dim-1`` phases."""
    params = np.asarray(params, dtype=float)
    k = params.size // 2
    angles, phases = params[:k], params[k:]
    amp = np.ones(k + 1)
    for j, a in enumerate(angles):
        amp[j] *= np.cos(a)
        amp[j + 1 :] *= np.sin(a)
    return amp * np.exp(1j * np.concatenate([[0.0], phases]))


def encode_state(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    v = v / np.linalg.norm(v)
    lead = np.flatnonzero(np.abs(v) > 1e-15)
    if lead.size:
        v = v * np.exp(-1j * np.angle(v[lead[0]]))
    amp = np.abs(v)
    angles = []
    for j in range(v.size - 1):
        tail = np.linalg.norm(amp[j:])
        angles.append(float(np.arccos(np.clip(amp[j] / tail, -1.0, 1.0))) if tail > 0 else 0.0)
    phases = np.angle(v[1:])
    phases[amp[1:] == 0] = 0.0
    return np.concatenate([angles, phases])


def _unitary(vec, dim: int) -> np.ndarray:
    return decode_unitary(UnitaryParams(dim, tuple(vec)))


def _unitary_params(u) -> list[float]:
    return list(encode_unitary(u).angles)


class SinglePartyParametrization:
    """State, optional Friend basis, one block unitary; ``n = 1``, ops ``(1, U)``."""

    def __init__(self, d: int, mode: str, free_basis: bool = False):
        self.d = d
        self.mode = normalize_dynamics(mode)
        self.free_basis = free_basis
        self.nu = n_unitary_params(d)
        self.size = n_state_params(d) + self.nu * (2 if free_basis else 1)

    def decode(self, vec) -> Scenario:
        vec = np.asarray(vec, dtype=float)
        ns = n_state_params(self.d)
        psi = decode_state(vec[:ns])
        pos = ns
        if self.free_basis:
            basis = _unitary(vec[pos : pos + self.nu], self.d)
            pos += self.nu
        else:
            basis = np.eye(self.d)
        block = _unitary(vec[pos : pos + self.nu], self.d)
        ops = (SuperObserverOp.identity(), SuperObserverOp.block([block]))
        return Scenario(self.d, 1, psi, (FriendMeasurement(basis),), ops, self.mode)

    def encode(self, scenario: Scenario) -> np.ndarray:
        basis = scenario.measurements[0].basis
        if self.free_basis:
            alpha = basis.conj().T @ scenario.psi
            psi, parts = scenario.psi, [_unitary_params(basis)]
        else:
            # Express everything in the computational basis: psi -> alpha.
            psi, parts = basis.conj().T @ scenario.psi, []
        block = scenario.ops[1].blocks[0]
        return np.concatenate([encode_state(psi), *parts, _unitary_params(block)])

    def random(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 2 * np.pi, self.size)


class BipartiteParametrization:
    """State of ``2 x d_B``, two Alice bases, two rank-one Bob projectors, two blocks."""

    def __init__(self, mode: str, d_B: int = 2):
        self.mode = normalize_dynamics(mode)
        self.d_B = d_B
        self.nb = n_unitary_params(d_B)
        self.size = n_state_params(2 * d_B) + 4 * 3 + 2 * self.nb

    def decode(self, vec) -> BipartiteScenario:
        vec = np.asarray(vec, dtype=float)
        ns = n_state_params(2 * self.d_B)
        psi = decode_state(vec[:ns])
        pos = ns
        alice = []
        for _ in range(2):
            alice.append(FriendMeasurement(_unitary(vec[pos : pos + 3], 2)))
            pos += 3
        bob = []
        for _ in range(2):
            bob.append(bob_from_basis(_unitary(vec[pos : pos + self.nb], self.d_B), 1))
            pos += self.nb
        blocks = []
        for _ in range(2):
            blocks.append(_unitary(vec[pos : pos + 3], 2))
            pos += 3
        ops = (SuperObserverOp.identity(), SuperObserverOp.block(blocks))
        return BipartiteScenario(psi, tuple(alice), np.array(bob), ops, self.mode)

    def encode(self, bs: BipartiteScenario) -> np.ndarray:
        parts = [encode_state(bs.psi)]
        parts += [_unitary_params(m.basis) for m in bs.alice]
        for y in range(2):
            vals, vecs = np.linalg.eigh(bs.bob[y, 0])
            if abs(vals.sum() - 1.0) > 1e-9:
                raise ValidationError("Bob's outcome-0 projector must be rank one to encode")
            parts.append(_unitary_params(complete_to_unitary(vecs[:, -1])))
        op = bs.ops[1]
        blocks = op.blocks if op.kind == BLOCK else (np.eye(2), np.eye(2))
        parts += [_unitary_params(b) for b in blocks]
        return np.concatenate(parts)

    def random(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 2 * np.pi, self.size)


def single_party_value(objective: str, scenario: Scenario, q=None) -> float:
    p_id = trial_probabilities(scenario, 0, 0)
    p_u = trial_probabilities(scenario, 0, 1)
    if objective == "T":
        return t_value(p_id, p_u)
    return tq_value(p_id, p_u, q)


def bipartite_value(bs: BipartiteScenario) -> float:
    t = joint_table(bs)
    return ps_value(chsh_value(t, 0), chsh_value(t, 1))


def analytic_seed(objective: str, mode: str, d: int = 2, q=None):
    """The known construction for the objective: saturating under AoM, violating under NoM."""
    if objective == "PS":
        bs = nom_violating_strategy(mode)
        if mode == AOM:
            bs = bs.replace(ops=(SuperObserverOp.identity(), SuperObserverOp.block([np.eye(2), np.eye(2)])))
        return bs
    if objective == "T":
        q = np.full(2, 0.5)
    build = saturating_aom_realization if mode == AOM else violating_nom_realization
    return build(d, q)


@dataclass
class OptimizationResult:
    witness: str
    mode: str
    best_value: float
    bound: float
    params: list
    seed: int | None
    evals: int
    best_scenario: object = None
    trace: list = field(default_factory=list)
    restart_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "witness": self.witness,
            "mode": self.mode,
            "best_value": self.best_value,
            "bound": self.bound,
            "params": list(self.params),
            "seed": self.seed,
            "evals": self.evals,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def maximize_witness(
    objective: str,
    mode: str,
    d: int = 2,
    budget: int = 10,
    seed: int | None = 0,
    *,
    q=None,
    d_B: int = 2,
    max_evals: int = MAX_EVALS,
    free_basis: bool = False,
    inject: bool = True,
) -> OptimizationResult:
    """Maximize ``objective`` with ``budget`` Nelder-Mead restarts.

    Restart 0 starts from the analytic construction when ``inject`` is set;
    the others start from ``make_rng(seed, r)``. Exhausting ``max_evals`` in a
    restart simply ends it, keeping the best point found.
    """
    if objective not in OBJECTIVES:
        raise ValidationError(f"objective must be one of {OBJECTIVES}")
    if budget < 1:
        raise ValidationError("budget must be at least one restart")
    mode = normalize_dynamics(mode)
    if objective == "T" and d != 2:
        raise ValidationError("T is defined for d = 2")
    if objective == "Tq":
        if q is None:
            raise ValidationError("Tq needs q")
        q = validate_q(q, d)

    if objective == "PS":
        param = BipartiteParametrization(mode, d_B)
        bound = PS_AOM_BOUND

        def value(vec):
            return bipartite_value(param.decode(vec))
    else:
        param = SinglePartyParametrization(d, mode, free_basis)
        bound = T_AOM_BOUND if objective == "T" else float(q.max())

        def value(vec):
            return single_party_value(objective, param.decode(vec), q)

    best_val, best_vec = -np.inf, None
    evals = 0
    trace: list[float] = []
    restart_values: list[float] = []
    for r in range(budget):
        if r == 0 and inject:
            x0 = param.encode(analytic_seed(objective, mode, d, q))
        else:
            x0 = param.random(make_rng(seed, r))
        start_val = value(x0)
        res = minimize(
            lambda v: -value(v),
            x0,
            method="Nelder-Mead",
            options={"xatol": XATOL, "fatol": 1e-13, "maxfev": max_evals, "adaptive": param.size > 10},
        )
        evals += int(res.nfev) + 1
        # Nelder-Mead keeps the best simplex vertex, but guard against the start being better.
        cand_val, cand_vec = (-float(res.fun), res.x) if -res.fun >= start_val else (start_val, x0)
        restart_values.append(cand_val)
        if cand_val > best_val:
            best_val, best_vec = cand_val, np.asarray(cand_vec, dtype=float)
        trace.append(best_val)

    best_scenario = param.decode(best_vec)
    # Report the pipeline value of the decoded scenario, not the optimizer's float.
    if objective == "PS":
        best_val = bipartite_value(best_scenario)
    else:
        best_val = single_party_value(objective, best_scenario, q)
    return OptimizationResult(
        witness=objective,
        mode=mode,
        best_value=float(best_val),
        bound=float(bound),
        params=[float(v) for v in best_vec],
        seed=seed,
        evals=evals,
        best_scenario=best_scenario,
        trace=trace,
        restart_values=restart_values,
    )
