"""Extended Wigner's Friend scenario: Lab encoding, Friend's measurement,
post-measurement states under both dynamics, super-observer operations and
the final (dn+1)-outcome measurement.

Conventions
-----------
* Combined space is ``Q_s ⊗ Lab`` with ``dim = d * lab_dim``.
* Lab pointer ``|f^x_i>`` is the Lab basis vector with index ``x*d + i``;
  index ``d*n`` (and any padding after it) is junk.
* ``|F^x_i> = |psi^x_i> ⊗ |f^x_i>``.
* A block op stores ``blocks[x][a, i] = <F^x_a| U |F^x_i>``, i.e. the usual
  column convention in the ordered basis ``(|F^x_0>, ..., |F^x_{d-1}>)``.
  On the orthogonal complement of all sectors it acts as the identity.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .qlinalg import (
    EPS_NORM,
    EPS_PROB,
    EPS_UNITARY,
    ValidationError,
    as_complex,
    basis_vector,
    frozen,
    is_orthonormal,
    require_normalized,
    require_unitary,
    tensor,
    unitary_mapping,
)

AOM = "AoM"
NOM = "NoM"
DYNAMICS = (AOM, NOM)

IDENTITY = "identity"
BLOCK = "block"
CHANNEL = "channel"
UNITARY = "unitary"
OP_KINDS = (IDENTITY, BLOCK, CHANNEL, UNITARY)


def normalize_dynamics(mode: str) -> str:
    for canonical in DYNAMICS:
        if str(mode).lower() == canonical.lower():
            return canonical
    raise ValidationError(f"dynamics must be one of {DYNAMICS}, got {mode!r}")


@dataclass(frozen=True, eq=False)
class FriendMeasurement:
    """Rank-one projective measurement given by the columns of ``basis``."""

    basis: np.ndarray

    def __post_init__(self):
        b = frozen(self.basis)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValidationError(f"measurement basis must be square, got shape {b.shape}")
        if not is_orthonormal(b):
            raise ValidationError("orthonormality check failed: measurement basis")
        object.__setattr__(self, "basis", b)

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    def vector(self, i: int) -> np.ndarray:
        return self.basis[:, i]

    @classmethod
    def computational(cls, d: int) -> FriendMeasurement:
        return cls(np.eye(d))

    @classmethod
    def from_vectors(cls, vectors: Sequence) -> FriendMeasurement:
        return cls(np.column_stack([as_complex(v) for v in vectors]))


@dataclass(frozen=True)
class LabEncoding:
    d: int
    n: int
    padding: int = 0

    def __post_init__(self):
        if self.d < 1 or self.n < 1 or self.padding < 0:
            raise ValidationError(f"bad Lab encoding d={self.d} n={self.n} padding={self.padding}")

    @property
    def lab_dim(self) -> int:
        return self.d * self.n + 1 + self.padding

    @property
    def junk_index(self) -> int:
        return self.d * self.n

    def index(self, x: int, i: int) -> int:
        if not (0 <= x < self.n and 0 <= i < self.d):
            raise IndexError(f"(x={x}, i={i}) outside n={self.n}, d={self.d}")
        return x * self.d + i

    def pointer(self, x: int, i: int) -> np.ndarray:
        return basis_vector(self.lab_dim, self.index(x, i))


@dataclass(frozen=True, eq=False)
class SuperObserverOp:
    """What the super-observer does at t3 for one value of ``w``."""

    kind: str
    blocks: tuple = ()
    kraus: tuple = ()
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise ValidationError(f"unknown op kind {self.kind!r}")
        if self.kind == BLOCK:
            blocks = tuple(frozen(b) for b in self.blocks)
            if not blocks:
                raise ValidationError("block op needs at least one block")
            for x, b in enumerate(blocks):
                require_unitary(b, f"block {x}")
            object.__setattr__(self, "blocks", blocks)
        elif self.kind == CHANNEL:
            kraus = tuple(frozen(k) for k in self.kraus)
            check_unital_channel(kraus)
            object.__setattr__(self, "kraus", kraus)
        elif self.kind == UNITARY:
            object.__setattr__(self, "matrix", frozen(require_unitary(self.matrix, "op matrix")))

    @classmethod
    def identity(cls) -> SuperObserverOp:
        return cls(IDENTITY)

    @classmethod
    def block(cls, blocks: Sequence) -> SuperObserverOp:
        return cls(BLOCK, blocks=tuple(blocks))

    @classmethod
    def channel(cls, kraus: Sequence) -> SuperObserverOp:
        return cls(CHANNEL, kraus=tuple(kraus))

    @classmethod
    def unitary(cls, matrix) -> SuperObserverOp:
        return cls(UNITARY, matrix=matrix)


def check_unital_channel(kraus: Sequence, tol: float = EPS_UNITARY) -> None:
    """Raise unless ``kraus`` is trace preserving and unital."""
    if not kraus:
        raise ValidationError("unital channel check failed: no Kraus operators")
    shape = np.shape(kraus[0])
    if len(shape) != 2 or shape[0] != shape[1] or any(np.shape(k) != shape for k in kraus):
        raise ValidationError("unital channel check failed: Kraus operators must be equal square matrices")
    ks = np.asarray(kraus, dtype=np.complex128)
    eye = np.eye(shape[0])
    tp = np.einsum("kji,kjl->il", ks.conj(), ks)
    un = np.einsum("kij,klj->il", ks, ks.conj())
    if np.max(np.abs(tp - eye)) > tol:
        raise ValidationError("unital channel check failed: sum K^dag K != 1 (not trace preserving)")
    if np.max(np.abs(un - eye)) > tol:
        raise ValidationError("unital channel check failed: sum K K^dag != 1 (not unital)")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Complete description of one single-party experiment."""

    d: int
    n: int
    psi: np.ndarray
    measurements: tuple
    ops: tuple
    dynamics: str = NOM
    padding: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dynamics", normalize_dynamics(self.dynamics))
        psi = frozen(self.psi)
        if psi.shape != (self.d,):
            raise ValidationError(f"psi must have dimension d={self.d}, got shape {psi.shape}")
        require_normalized(psi, "psi")
        object.__setattr__(self, "psi", psi)
        meas = tuple(m if isinstance(m, FriendMeasurement) else FriendMeasurement(m) for m in self.measurements)
        if len(meas) != self.n:
            raise ValidationError(f"expected n={self.n} measurements, got {len(meas)}")
        if any(m.d != self.d for m in meas):
            raise ValidationError("all Friend measurements must share d")
        object.__setattr__(self, "measurements", meas)
        ops = tuple(self.ops)
        if not ops or ops[0].kind != IDENTITY:
            raise ValidationError("ops[0] must be the identity (w = 0 means no operation)")
        total = self.total_dim
        for w, op in enumerate(ops):
            if op.kind == BLOCK:
                if len(op.blocks) != self.n or any(b.shape != (self.d, self.d) for b in op.blocks):
                    raise ValidationError(f"op {w}: expected {self.n} blocks of shape {self.d}x{self.d}")
            elif op.kind == CHANNEL and op.kraus[0].shape != (total, total):
                raise ValidationError(f"op {w}: Kraus operators must be {total}x{total}")
            elif op.kind == UNITARY and op.matrix.shape != (total, total):
                raise ValidationError(f"op {w}: unitary must be {total}x{total}")
        object.__setattr__(self, "ops", ops)

    @property
    def m(self) -> int:
        return len(self.ops)

    @property
    def encoding(self) -> LabEncoding:
        return LabEncoding(self.d, self.n, self.padding)

    @property
    def total_dim(self) -> int:
        return self.d * (self.d * self.n + 1 + self.padding)

    @cached_property
    def sector_bases(self) -> tuple:
        """``F_x`` matrices whose columns are ``|F^x_0>, ..., |F^x_{d-1}>``."""
        enc = self.encoding
        out = []
        for x, meas in enumerate(self.measurements):
            f = np.zeros((self.total_dim, self.d), dtype=np.complex128)
            for i in range(self.d):
                f[:, i] = tensor(meas.vector(i), enc.pointer(x, i))
            f.setflags(write=False)
            out.append(f)
        return tuple(out)

    @cached_property
    def _op_matrices(self) -> tuple:
        return tuple(_full_matrix(self, op) for op in self.ops)

    def op_matrix(self, w: int) -> np.ndarray | None:
        """Full-space unitary of op ``w`` (``None`` for identity and channels)."""
        return self._op_matrices[w]

    def replace(self, **changes) -> Scenario:
        return dataclasses.replace(self, **changes)


def _full_matrix(scenario: Scenario, op: SuperObserverOp) -> np.ndarray | None:
    if op.kind == UNITARY:
        return op.matrix
    if op.kind != BLOCK:
        return None
    u = np.eye(scenario.total_dim, dtype=np.complex128)
    for f, b in zip(scenario.sector_bases, op.blocks):
        u += f @ (b - np.eye(scenario.d)) @ f.conj().T
    return u


@dataclass(frozen=True, eq=False)
class CombinedState:
    """State of ``Q_s ⊗ Lab``: either a pure vector or a density matrix."""

    encoding: LabEncoding
    vector: np.ndarray | None = None
    rho: np.ndarray | None = None
    ancilla: bool = False

    def __post_init__(self):
        if (self.vector is None) == (self.rho is None):
            raise ValidationError("CombinedState needs exactly one of vector / rho")
        dim = self.encoding.d * self.encoding.lab_dim
        if self.vector is not None:
            v = frozen(self.vector)
            if v.shape != (dim,):
                raise ValidationError(f"state vector must have dimension {dim}")
            object.__setattr__(self, "vector", v)
        else:
            r = frozen(self.rho)
            if r.shape != (dim, dim):
                raise ValidationError(f"density matrix must be {dim}x{dim}")
            object.__setattr__(self, "rho", r)

    @property
    def kind(self) -> str:
        return "pure" if self.vector is not None else "mixed"

    def density(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        return np.outer(self.vector, self.vector.conj())

    def check(self, tol: float = EPS_NORM) -> None:
        """Full invariant check (normalization, Hermiticity, positivity, trace)."""
        if self.vector is not None:
            require_normalized(self.vector, "combined state", tol)
            return
        r = self.rho
        if np.max(np.abs(r - r.conj().T)) > tol:
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(r).real - 1.0) > tol:
            raise ValidationError(f"density matrix has trace {np.trace(r).real:.12g}")
        if np.min(np.linalg.eigvalsh(r)) < -EPS_UNITARY:
            raise ValidationError("density matrix is not positive semi-definite")


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probabilities of Omega: ``probs[x, i]`` for outcome (i, x) plus ``null``."""

    probs: np.ndarray
    null: float
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float, copy=True)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "null", float(self.null))
        if not self.labels:
            n, d = p.shape
            labels = tuple(f"(i={i},x={x})" for x in range(n) for i in range(d)) + ("null",)
            object.__setattr__(self, "labels", labels)

    def sector(self, x: int) -> np.ndarray:
        return self.probs[x]

    @property
    def total(self) -> float:
        return float(self.probs.sum() + self.null)

    def as_dict(self) -> dict:
        return dict(zip(self.labels, [*self.probs.ravel().tolist(), self.null]))


# -- operations ------------------------------------------------------------


def embed_F(x: int, i: int, meas: FriendMeasurement, enc: LabEncoding) -> np.ndarray:
    """``|F^x_i> = |psi^x_i> ⊗ |f^x_i>``."""
    if not 0 <= i < meas.d:
        raise IndexError(f"outcome {i} out of range for d={meas.d}")
    return tensor(meas.vector(i), enc.pointer(x, i))


def post_measurement_state(psi, x: int, scenario: Scenario) -> CombinedState:
    """Combined state after Friend measures ``A_x`` on ``psi``.

    AoM gives the dephased mixture ``sum_i |alpha_i|^2 |F_i><F_i|``; NoM gives
    the coherent ``sum_i alpha_i |F_i>``.
    """
    psi = as_complex(psi)
    if psi.shape != (scenario.d,):
        raise ValidationError(f"psi must have dimension {scenario.d}")
    require_normalized(psi, "psi")
    f = scenario.sector_bases[x]
    alpha = scenario.measurements[x].basis.conj().T @ psi
    if scenario.dynamics == NOM:
        return CombinedState(scenario.encoding, vector=f @ alpha, ancilla=True)
    rho = (f * np.abs(alpha) ** 2) @ f.conj().T
    return CombinedState(scenario.encoding, rho=rho, ancilla=True)


def apply_op(state: CombinedState, op: SuperObserverOp, scenario: Scenario) -> CombinedState:
    """Evolve ``state`` by ``op``; channels promote pure states to density matrices."""
    if op.kind == IDENTITY:
        return state
    dim = scenario.total_dim
    if state.encoding.d * state.encoding.lab_dim != dim:
        raise ValidationError("op dimension does not match state")
    if op.kind == CHANNEL:
        rho = state.density()
        out = sum(k @ rho @ k.conj().T for k in op.kraus)
        return CombinedState(state.encoding, rho=out, ancilla=state.ancilla)
    owned = [w for w, o in enumerate(scenario.ops) if o is op]
    u = scenario.op_matrix(owned[0]) if owned else _full_matrix(scenario, op)
    if state.vector is not None:
        return CombinedState(state.encoding, vector=u @ state.vector, ancilla=state.ancilla)
    return CombinedState(state.encoding, rho=u @ state.rho @ u.conj().T, ancilla=state.ancilla)


def measure_omega(state: CombinedState, scenario: Scenario) -> OutcomeDistribution:
    """Born probabilities of the (dn+1)-outcome measurement; null is the remainder."""
    probs = np.empty((scenario.n, scenario.d))
    for x, f in enumerate(scenario.sector_bases):
        if state.vector is not None:
            probs[x] = np.abs(f.conj().T @ state.vector) ** 2
        else:
            probs[x] = np.einsum("ji,jk,ki->i", f.conj(), state.rho, f).real
    if state.vector is not None:
        total = np.vdot(state.vector, state.vector).real
    else:
        total = np.trace(state.rho).real
    return OutcomeDistribution(probs, total - probs.sum())


def _sector_trial(scenario: Scenario, x: int, op: SuperObserverOp) -> OutcomeDistribution:
    # Block ops keep span{|F^x_i>} invariant, so only the d amplitudes matter.
    alpha = scenario.measurements[x].basis.conj().T @ scenario.psi
    if op.kind == IDENTITY:
        p = np.abs(alpha) ** 2
    elif scenario.dynamics == NOM:
        p = np.abs(op.blocks[x] @ alpha) ** 2
    else:
        p = np.abs(op.blocks[x]) ** 2 @ np.abs(alpha) ** 2
    probs = np.zeros((scenario.n, scenario.d))
    probs[x] = p
    return OutcomeDistribution(probs, max(0.0, 1.0 - p.sum()))


def run_trial(scenario: Scenario, x: int, w: int) -> OutcomeDistribution:
    """Full protocol for inputs ``(x, w)``: measure, apply ``ops[w]``, measure Omega."""
    if not (0 <= x < scenario.n and 0 <= w < scenario.m):
        raise IndexError(f"(x={x}, w={w}) outside n={scenario.n}, m={scenario.m}")
    op = scenario.ops[w]
    if op.kind in (IDENTITY, BLOCK):
        return _sector_trial(scenario, x, op)
    state = post_measurement_state(scenario.psi, x, scenario)
    if op.kind == UNITARY:
        u = scenario.op_matrix(w)
        if state.vector is not None:
            state = CombinedState(state.encoding, vector=u @ state.vector, ancilla=True)
        else:
            state = CombinedState(state.encoding, rho=u @ state.rho @ u.conj().T, ancilla=True)
    else:
        state = apply_op(state, op, scenario)
    return measure_omega(state, scenario)


def trial_probabilities(scenario: Scenario, x: int, w: int) -> np.ndarray:
    """``p(a | A_x, U_w)`` for ``a = 0..d-1``."""
    return run_trial(scenario, x, w).sector(x)


def probability_table(scenario: Scenario) -> np.ndarray:
    """Array ``p[x, w, a] = p(a | A_x, U_w)``."""
    return np.array(
        [[trial_probabilities(scenario, x, w) for w in range(scenario.m)] for x in range(scenario.n)]
    )


def off_block_norm(scenario: Scenario, w: int) -> float:
    """Largest leakage ``||(1 - Pi_x) U Pi_x||`` out of any sector span."""
    op = scenario.ops[w]
    if op.kind == IDENTITY:
        return 0.0
    if op.kind == CHANNEL:
        raise ValueError("sector invariance is defined for unitary ops only")
    u = scenario.op_matrix(w)
    worst = 0.0
    for f in scenario.sector_bases:
        image = u @ f
        leak = image - f @ (f.conj().T @ image)
        worst = max(worst, float(np.linalg.norm(leak, 2)))
    return worst


def friend_consistency_check(scenario: Scenario, w: int, tol: float = EPS_UNITARY) -> bool:
    """True when ``ops[w]`` keeps every ``span{|F^x_i>}_i`` invariant."""
    return off_block_norm(scenario, w) <= tol


def matching_nom_unitary(scenario: Scenario, w: int) -> SuperObserverOp:
    """NoM block op that reproduces the AoM statistics of ``ops[w]``.

    Per sector, the NoM state ``sum_i alpha_i |F_i>`` is rotated onto
    ``sum_a sqrt(beta_a) |F_a>`` with ``beta_a = sum_i |alpha_i U_ai|^2``.
    """
    op = scenario.ops[w]
    if op.kind == IDENTITY:
        return op
    if op.kind != BLOCK:
        raise ValidationError("matching NoM construction needs block-unitary ops")
    blocks = []
    for x, meas in enumerate(scenario.measurements):
        alpha = meas.basis.conj().T @ scenario.psi
        beta = np.abs(op.blocks[x] * alpha[np.newaxis, :]) ** 2 @ np.ones(scenario.d)
        target = np.sqrt(beta / beta.sum())
        blocks.append(unitary_mapping(alpha / np.linalg.norm(alpha), target))
    return SuperObserverOp.block(blocks)


def matching_nom_scenario(scenario: Scenario) -> Scenario:
    """NoM scenario with the same preparation and measurements reproducing every AoM table."""
    if scenario.dynamics != AOM:
        raise ValidationError("matching NoM construction expects an AoM scenario")
    ops = tuple(matching_nom_unitary(scenario, w) for w in range(scenario.m))
    return scenario.replace(ops=ops, dynamics=NOM)
