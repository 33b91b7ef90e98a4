"""Two-party extension: Alice is the Friend, Bob measures his share directly,
and the super-observer acts on Alice's Lab before opening it.

Index conventions: ``psi_AB[a * d_B + b]``; Alice's combined space is
``Q_A ⊗ Lab_A`` with the single-party encoding for ``d = 2``, ``n = 2``; the
full space is ``(Q_A ⊗ Lab_A) ⊗ Q_B``. Bob's measurement ``y`` is a pair of
orthogonal projectors ``bob[y, b]`` of any rank.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .qlinalg import (
    EPS_PROB,
    EPS_UNITARY,
    ValidationError,
    as_complex,
    frozen,
    is_projector,
    make_rng,
    random_state,
    random_unitary,
    require_normalized,
)
from .reports import WitnessReport, digest, make_report
from .scenario import (
    AOM,
    BLOCK,
    CHANNEL,
    IDENTITY,
    NOM,
    UNITARY,
    FriendMeasurement,
    LabEncoding,
    SuperObserverOp,
    embed_F,
    normalize_dynamics,
)

TSIRELSON = 0.5 * (1.0 + 1.0 / np.sqrt(2.0))
PS_AOM_BOUND = 0.75
ALICE_ENCODING = LabEncoding(2, 2)
ALICE_DIM = 2 * ALICE_ENCODING.lab_dim


def bob_measurement(outcome0_vectors: Sequence, d_B: int) -> np.ndarray:
    """Projector pair ``(P0, 1 - P0)`` with ``P0`` spanned by orthonormal ``outcome0_vectors``."""
    p0 = np.zeros((d_B, d_B), dtype=np.complex128)
    for v in outcome0_vectors:
        v = as_complex(v)
        p0 += np.outer(v, v.conj())
    return np.array([p0, np.eye(d_B) - p0])


def bob_from_basis(basis, rank: int) -> np.ndarray:
    """Outcome 0 projects onto the first ``rank`` columns of ``basis``."""
    basis = as_complex(basis)
    return bob_measurement([basis[:, k] for k in range(rank)], basis.shape[0])


@dataclass(frozen=True, eq=False)
class BipartiteScenario:
    psi: np.ndarray
    alice: tuple
    bob: np.ndarray
    ops: tuple
    dynamics: str = NOM

    def __post_init__(self):
        object.__setattr__(self, "dynamics", normalize_dynamics(self.dynamics))
        bob = np.array(self.bob, dtype=np.complex128)
        if bob.ndim != 4 or bob.shape[:2] != (2, 2) or bob.shape[2] != bob.shape[3]:
            raise ValidationError("bob must have shape (2 settings, 2 outcomes, d_B, d_B)")
        d_B = bob.shape[2]
        for y in range(2):
            for b in range(2):
                if not is_projector(bob[y, b]):
                    raise ValidationError(f"projector check failed: Bob setting {y} outcome {b}")
            if np.max(np.abs(bob[y, 0] + bob[y, 1] - np.eye(d_B))) > EPS_UNITARY:
                raise ValidationError(f"completeness check failed: Bob setting {y}")
        bob.setflags(write=False)
        object.__setattr__(self, "bob", bob)
        psi = frozen(self.psi)
        if psi.shape != (2 * d_B,):
            raise ValidationError(f"psi_AB must have dimension {2 * d_B}")
        require_normalized(psi, "psi_AB")
        object.__setattr__(self, "psi", psi)
        alice = tuple(m if isinstance(m, FriendMeasurement) else FriendMeasurement(m) for m in self.alice)
        if len(alice) != 2 or any(m.d != 2 for m in alice):
            raise ValidationError("Alice needs two qubit measurements")
        object.__setattr__(self, "alice", alice)
        ops = tuple(self.ops)
        if len(ops) != 2 or ops[0].kind != IDENTITY:
            raise ValidationError("bipartite ops must be (identity, op)")
        op = ops[1]
        if op.kind == BLOCK and (len(op.blocks) != 2 or any(b.shape != (2, 2) for b in op.blocks)):
            raise ValidationError("bipartite block op needs two 2x2 blocks")
        if op.kind == CHANNEL and op.kraus[0].shape != (ALICE_DIM, ALICE_DIM):
            raise ValidationError(f"Kraus operators must act on Alice's {ALICE_DIM}-dim Lab space")
        if op.kind == UNITARY and op.matrix.shape != (ALICE_DIM, ALICE_DIM):
            raise ValidationError(f"unitary must act on Alice's {ALICE_DIM}-dim Lab space")
        object.__setattr__(self, "ops", ops)

    @property
    def d_B(self) -> int:
        return self.bob.shape[2]

    @cached_property
    def sector_bases(self) -> tuple:
        out = []
        for x, meas in enumerate(self.alice):
            f = np.column_stack([embed_F(x, i, meas, ALICE_ENCODING) for i in range(2)])
            f.setflags(write=False)
            out.append(f)
        return tuple(out)

    @cached_property
    def op_matrix(self) -> np.ndarray | None:
        op = self.ops[1]
        if op.kind == UNITARY:
            return op.matrix
        if op.kind != BLOCK:
            return None
        u = np.eye(ALICE_DIM, dtype=np.complex128)
        for f, b in zip(self.sector_bases, op.blocks):
            u += f @ (b - np.eye(2)) @ f.conj().T
        return u

    def replace(self, **changes) -> BipartiteScenario:
        import dataclasses

        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class JointTable:
    """``probs[a, b, x, y, w] = p(a, b | x, y, U_w)``; ``null[b, x, y, w]`` is Omega's empty outcome."""

    probs: np.ndarray
    null: np.ndarray = field(default_factory=lambda: np.zeros((2, 2, 2, 2)))

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.shape != (2, 2, 2, 2, 2):
            raise ValidationError("joint table must have shape (2, 2, 2, 2, 2)")
        n = np.array(self.null, dtype=float)
        p.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "null", n)

    def p(self, a: int, b: int, x: int, y: int, w: int) -> float:
        return float(self.probs[a, b, x, y, w])

    def slice(self, x: int, y: int, w: int) -> np.ndarray:
        return self.probs[:, :, x, y, w]

    def to_dict(self) -> dict:
        entries = {
            f"p(a={a},b={b}|x={x},y={y},w={w})": float(self.probs[a, b, x, y, w])
            for w, x, y, a, b in itertools.product(range(2), repeat=5)
        }
        out = {"probabilities": entries}
        if np.any(self.null != 0):
            out["null"] = {
                f"p(null,b={b}|x={x},y={y},w={w})": float(self.null[b, x, y, w])
                for w, x, y, b in itertools.product(range(2), repeat=4)
            }
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> JointTable:
        probs = np.zeros((2, 2, 2, 2, 2))
        for w, x, y, a, b in itertools.product(range(2), repeat=5):
            probs[a, b, x, y, w] = data["probabilities"][f"p(a={a},b={b}|x={x},y={y},w={w})"]
        null = np.zeros((2, 2, 2, 2))
        for w, x, y, b in itertools.product(range(2), repeat=4):
            null[b, x, y, w] = data.get("null", {}).get(f"p(null,b={b}|x={x},y={y},w={w})", 0.0)
        return cls(probs, null)


def _branches(bs: BipartiteScenario, x: int) -> list[np.ndarray]:
    """Alice-Lab x Bob amplitude matrices (ALICE_DIM x d_B) after Friend's measurement."""
    psi = bs.psi.reshape(2, bs.d_B)
    f = bs.sector_bases[x]
    cond = bs.alice[x].basis.conj().T @ psi  # row i: Bob's unnormalized state given outcome i
    if bs.dynamics == NOM:
        return [f @ cond]
    return [np.outer(f[:, i], cond[i]) for i in range(2)]


def _evolve(bs: BipartiteScenario, branches: list[np.ndarray], w: int) -> list[np.ndarray]:
    op = bs.ops[w]
    if op.kind == IDENTITY:
        return branches
    if op.kind == CHANNEL:
        return [k @ m for m in branches for k in op.kraus]
    u = bs.op_matrix
    return [u @ m for m in branches]


def _sector_table(bs: BipartiteScenario) -> JointTable:
    """Identity and block ops never leave ``span{|F^x_i>}``, so work in that 2-dim basis."""
    psi = bs.psi.reshape(2, bs.d_B)
    probs = np.zeros((2, 2, 2, 2, 2))
    op = bs.ops[1]
    for x in range(2):
        cond = bs.alice[x].basis.conj().T @ psi
        bob_q = np.einsum("ij,ybjk,ik->iyb", cond.conj(), bs.bob, cond).real
        probs[:, :, x, :, 0] = bob_q.transpose(0, 2, 1)
        if op.kind == IDENTITY:
            probs[:, :, x, :, 1] = probs[:, :, x, :, 0]
        elif bs.dynamics == NOM:
            rot = op.blocks[x] @ cond
            probs[:, :, x, :, 1] = np.einsum("ij,ybjk,ik->iby", rot.conj(), bs.bob, rot).real
        else:
            weights = np.abs(op.blocks[x]) ** 2
            probs[:, :, x, :, 1] = np.einsum("ai,iyb->aby", weights, bob_q)
    return JointTable(probs)


def joint_table(bs: BipartiteScenario) -> JointTable:
    """All 32 probabilities ``p(a,b|x,y,U_w)`` (plus the empty-outcome mass)."""
    if bs.ops[1].kind in (IDENTITY, BLOCK):
        return _sector_table(bs)
    probs = np.zeros((2, 2, 2, 2, 2))
    null = np.zeros((2, 2, 2, 2))
    for x in range(2):
        f = bs.sector_bases[x]
        initial = _branches(bs, x)
        for w in range(2):
            evolved = _evolve(bs, initial, w)
            for y in range(2):
                for b in range(2):
                    proj = bs.bob[y, b]
                    total_b = 0.0
                    for m in evolved:
                        rows = f.conj().T @ m
                        probs[:, b, x, y, w] += np.einsum("aj,jk,ak->a", rows.conj(), proj, rows).real
                        total_b += np.einsum("ij,jk,ik->", m.conj(), proj, m).real
                    null[b, x, y, w] = total_b - probs[:, b, x, y, w].sum()
    return JointTable(probs, null)


def check_no_signalling(t: JointTable, tol: float = EPS_PROB) -> bool:
    """Alice/Wigner marginals independent of ``y``; Bob's marginal independent of ``x`` and ``w``."""
    alice = t.probs.sum(axis=1)  # [a, x, y, w]
    if np.max(np.abs(alice[:, :, 0, :] - alice[:, :, 1, :])) > tol:
        return False
    bob = t.probs.sum(axis=0) + t.null  # [b, x, y, w]
    ref = bob[:, :1, :, :1]
    return bool(np.max(np.abs(bob - ref)) <= tol)


def chsh_coefficients() -> np.ndarray:
    """``c[a, b, x, y] = 1/4`` when ``a xor b == x*y``, else 0."""
    c = np.zeros((2, 2, 2, 2))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        if a ^ b == x * y:
            c[a, b, x, y] = 0.25
    return c


def chsh_value(t: JointTable, w: int) -> float:
    return float(np.sum(chsh_coefficients() * t.probs[..., w]))


def p1_aom_bound(p0: float) -> float:
    return float(min(TSIRELSON, max(p0, 1.5 - p0)))


def ps_value(p0: float, p1: float) -> float:
    return float(p1 - abs(p0 - 0.75))


def eval_P0_P1_PS(t: JointTable, *, digest_: str = "", seed=None, tolerance: float = EPS_PROB) -> WitnessReport:
    """Report on ``P_S = P_1 - |P_0 - 3/4|`` (bound 3/4) with ``P_0``, ``P_1`` and the ``P_1`` bound in details."""
    p0, p1 = chsh_value(t, 0), chsh_value(t, 1)
    p1_bound = p1_aom_bound(p0)
    return make_report(
        "PS",
        ps_value(p0, p1),
        PS_AOM_BOUND,
        digest=digest_,
        seed=seed,
        tolerance=tolerance,
        details={
            "P0": p0,
            "P1": p1,
            "P1_bound": p1_bound,
            "P1_violated": bool(p1 > p1_bound + tolerance),
        },
    )


def eval_bipartite(bs: BipartiteScenario, *, seed=None, tolerance: float = EPS_PROB) -> WitnessReport:
    return eval_P0_P1_PS(joint_table(bs), digest_=digest(bs), seed=seed, tolerance=tolerance)


# -- extremal enumeration -------------------------------------------------

# Output relabelings of Alice per input x: (flip for x=0, flip for x=1).
RELABELINGS = ((0, 0), (1, 1), (1, 0), (0, 1))


def relabeled_chsh_values(t: JointTable, w: int = 0) -> np.ndarray:
    """CHSH success with Alice's output flipped for the inputs marked in ``RELABELINGS``.

    The four entries are the extreme points of ``P_1`` as a function of the
    block-unitary weights. The second is ``1 - P_0`` exactly.
    """
    vals = []
    for flips in RELABELINGS:
        total = 0.0
        for a, b, x, y in itertools.product(range(2), repeat=4):
            if a ^ b == (x * y) ^ flips[x]:
                total += t.probs[a, b, x, y, w]
        vals.append(total / 4)
    return np.array(vals)


def extremal_report(bs: BipartiteScenario, tol: float = EPS_PROB) -> dict:
    if bs.dynamics != AOM:
        raise ValidationError("the extremal enumeration bound applies to AoM scenarios")
    t = joint_table(bs)
    p0, p1 = chsh_value(t, 0), chsh_value(t, 1)
    e = relabeled_chsh_values(t, 0)
    checks = {
        "P1_le_max_extremal": bool(p1 <= e.max() + tol),
        "second_is_one_minus_P0": bool(abs(e[1] - (1 - p0)) <= tol),
        "third_le_3/2-P0": bool(e[2] <= 1.5 - p0 + tol),
        "fourth_le_3/2-P0": bool(e[3] <= 1.5 - p0 + tol),
        "all_le_tsirelson": bool(np.all(e <= TSIRELSON + tol)),
    }
    return {"P0": p0, "P1": p1, "extremal": e.tolist(), "checks": checks, "ok": all(checks.values())}


def extremal_enumeration_check(bs: BipartiteScenario, tol: float = EPS_PROB) -> bool:
    """Verify ``P_1 <= max`` of the four relabeled CHSH values and their individual bounds."""
    return extremal_report(bs, tol)["ok"]


# -- constructions ---------------------------------------------------------


def _pauli_bases():
    z = np.eye(2, dtype=np.complex128)
    xb = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)  # columns |+>, |->
    return z, xb


def nom_violating_strategy(dynamics: str = NOM) -> BipartiteScenario:
    """Maximally entangled pair, sigma_z / sigma_x on both sides, pi/8 rotation in each sector.

    Alice's sigma_x outcome 0 is assigned to ``|->``; with this labeling the
    untouched statistics give ``P_0 = 3/4`` and the rotation
    ``[[cos, sin], [-sin, cos]](pi/8)`` lifts ``P_1`` to Tsirelson's value.
    """
    z, xb = _pauli_bases()
    psi = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    alice = (FriendMeasurement(z), FriendMeasurement(xb[:, ::-1]))
    bob = np.array([bob_from_basis(z, 1), bob_from_basis(xb, 1)])
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    rot = np.array([[c, s], [-s, c]], dtype=np.complex128)
    ops = (SuperObserverOp.identity(), SuperObserverOp.block([rot, rot]))
    return BipartiteScenario(psi, alice, bob, ops, dynamics)


def random_bipartite_scenario(
    seed=None, dynamics: str = AOM, d_B: int = 2, op: str = BLOCK
) -> BipartiteScenario:
    """Haar-random state, Alice bases and blocks; Bob projectors of random rank."""
    rng = make_rng(seed)
    psi = random_state(2 * d_B, rng)
    alice = tuple(FriendMeasurement(random_unitary(2, rng)) for _ in range(2))
    bob = np.array(
        [bob_from_basis(random_unitary(d_B, rng), int(rng.integers(0, d_B + 1))) for _ in range(2)]
    )
    if op == BLOCK:
        second = SuperObserverOp.block([random_unitary(2, rng) for _ in range(2)])
    elif op == CHANNEL:
        from .channels import random_unital_op

        second = random_unital_op(ALICE_DIM, rng)
    else:
        raise ValueError(f"unsupported op kind {op!r}")
    return BipartiteScenario(psi, alice, bob, (SuperObserverOp.identity(), second), dynamics)


def deterministic_table(alice_out: Sequence[int], bob_out: Sequence[int], flips: Sequence[int]) -> JointTable:
    """Local deterministic strategy; for ``w = 1`` Alice's output is flipped per input ``x``."""
    probs = np.zeros((2, 2, 2, 2, 2))
    for x, y in itertools.product(range(2), repeat=2):
        probs[alice_out[x], bob_out[y], x, y, 0] = 1.0
        probs[alice_out[x] ^ flips[x], bob_out[y], x, y, 1] = 1.0
    return JointTable(probs)


def deterministic_strategies():
    """All 16 response-function pairs times the 4 bit-flip choices for ``w = 1``."""
    for fa, gb, flips in itertools.product(
        itertools.product(range(2), repeat=2),
        itertools.product(range(2), repeat=2),
        itertools.product(range(2), repeat=2),
    ):
        yield (fa, gb, flips), deterministic_table(fa, gb, flips)


# -- (P0, P1) region ---------------------------------------------------------


@dataclass(frozen=True)
class RegionPoint:
    P0: float
    P1: float
    mode: str
    seed: int | str = ""


REGION_COLUMNS = ("P0", "P1", "mode", "seed")


def _point(t: JointTable, mode: str, seed) -> RegionPoint:
    return RegionPoint(chsh_value(t, 0), chsh_value(t, 1), mode, seed)


def _rotation_strategy(theta: float, dynamics: str) -> BipartiteScenario:
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, s], [-s, c]], dtype=np.complex128)
    base = nom_violating_strategy(dynamics)
    return base.replace(ops=(SuperObserverOp.identity(), SuperObserverOp.block([rot, rot])))


def feasible_region_sweep(resolution: int = 50, seed: int = 0) -> list[RegionPoint]:
    """Achievable ``(P0, P1)`` pairs per mode plus the analytic boundary curves.

    Modes: ``aom`` and ``nom`` (random quantum scenarios, plus the rotation
    family of the violating strategy for ``nom``), ``classical`` (deterministic
    strategies and random mixtures of them), and ``boundary_*`` rows sampled
    on ``P0`` in ``[1 - Tsirelson, Tsirelson]``.
    """
    from .qlinalg import derive_seed

    if resolution < 2:
        raise ValidationError("resolution must be at least 2")
    points: list[RegionPoint] = []
    for k, (mode, dyn) in enumerate((("aom", AOM), ("nom", NOM))):
        for i in range(resolution):
            s = derive_seed(seed, k, i)
            points.append(_point(joint_table(random_bipartite_scenario(s, dyn)), mode, s))
    for theta in np.linspace(0.0, np.pi / 4, resolution):
        points.append(_point(joint_table(_rotation_strategy(theta, NOM)), "nom", "analytic"))
    points.append(_point(joint_table(nom_violating_strategy(NOM)), "nom", "analytic"))

    tables = [t for _, t in deterministic_strategies()]
    points.extend(_point(t, "classical", "deterministic") for t in tables)
    stack = np.array([t.probs for t in tables])
    for i in range(resolution):
        s = derive_seed(seed, 2, i)
        weights = make_rng(s).dirichlet(np.ones(len(tables)))
        points.append(_point(JointTable(np.tensordot(weights, stack, axes=1)), "classical", s))

    grid = np.linspace(1.0 - TSIRELSON, TSIRELSON, resolution)
    for p0 in grid:
        p0 = float(p0)
        points.append(RegionPoint(p0, p0, "boundary_p1_eq_p0"))
        points.append(RegionPoint(p0, 1.5 - p0, "boundary_p1_eq_3/2-p0"))
        points.append(RegionPoint(p0, float(TSIRELSON), "boundary_tsirelson"))
        points.append(RegionPoint(p0, p1_aom_bound(p0), "boundary_aom"))
    return points


def region_csv(points: Sequence[RegionPoint]) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REGION_COLUMNS)
    for p in points:
        writer.writerow([repr(float(p.P0)), repr(float(p.P1)), p.mode, p.seed])
    return buf.getvalue()
