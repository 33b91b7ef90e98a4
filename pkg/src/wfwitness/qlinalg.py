"""Small dense complex linear algebra used by every other module.

States are 1-D ``complex128`` arrays and operators are 2-D ``complex128``
arrays. Tensor products follow the row-major Kronecker convention: for
``a`` of dimension ``m`` and ``b`` of dimension ``n``, entry ``(i, j)`` of
``a ⊗ b`` lives at index ``i * n + j``. This is exactly ``numpy.kron``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_UNITARY = 1e-9
EPS_NORM = 1e-9
EPS_PROB = 1e-9


class ValidationError(ValueError):
    """An input violates a structural invariant (unitarity, normalization, ...)."""


def as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=np.complex128)


def frozen(a) -> np.ndarray:
    """Return a read-only complex copy of ``a``."""
    out = np.array(a, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two vectors or two matrices (row-major indices)."""
    a, b = as_complex(a), as_complex(b)
    if a.ndim != b.ndim:
        raise ValueError("tensor() needs two vectors or two matrices")
    return np.kron(a, b)


def dagger(m) -> np.ndarray:
    return as_complex(m).conj().T


def basis_vector(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def is_normalized(v, tol: float = EPS_NORM) -> bool:
    v = as_complex(v)
    return bool(abs(np.vdot(v, v).real - 1.0) <= tol)


def is_unitary(m, tol: float = EPS_UNITARY) -> bool:
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def is_projector(m, tol: float = EPS_UNITARY) -> bool:
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    hermitian = np.max(np.abs(m - m.conj().T)) <= tol
    idempotent = np.max(np.abs(m @ m - m)) <= tol
    return bool(hermitian and idempotent)


def is_orthonormal(columns, tol: float = EPS_UNITARY) -> bool:
    """True when the columns of ``columns`` form an orthonormal family."""
    c = as_complex(columns)
    gram = c.conj().T @ c
    return bool(np.max(np.abs(gram - np.eye(c.shape[1]))) <= tol)


def require_unitary(m, what: str = "matrix", tol: float = EPS_UNITARY) -> np.ndarray:
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"unitarity check failed: {what} is not square (shape {m.shape})")
    if not is_unitary(m, tol):
        err = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        raise ValidationError(f"unitarity check failed: {what} has max |U^dag U - 1| = {err:.3e}")
    return m


def require_normalized(v, what: str = "state", tol: float = EPS_NORM) -> np.ndarray:
    v = as_complex(v)
    if v.ndim != 1:
        raise ValidationError(f"normalization check failed: {what} is not a vector")
    if not is_normalized(v, tol):
        raise ValidationError(
            f"normalization check failed: {what} has norm^2 = {np.vdot(v, v).real:.12g}"
        )
    return v


def projector(v) -> np.ndarray:
    """Rank-one projector |v><v| of a normalized vector."""
    v = require_normalized(v, "projector input")
    return np.outer(v, v.conj())


def complete_to_unitary(v, tol: float = 1e-8) -> np.ndarray:
    """Unitary whose first column is the unit vector ``v``.

    The remaining columns come from Gram-Schmidt over the canonical basis in
    index order, so the completion is deterministic.
    """
    v = require_normalized(v, "vector to complete")
    dim = v.shape[0]
    cols = [v]
    for k in range(dim):
        if len(cols) == dim:
            break
        w = basis_vector(dim, k)
        for _ in range(2):
            for c in cols:
                w = w - np.vdot(c, w) * c
        norm = np.linalg.norm(w)
        if norm > tol:
            cols.append(w / norm)
    return np.column_stack(cols)


def unitary_mapping(source, target) -> np.ndarray:
    """A unitary ``W`` with ``W @ source == target`` for unit vectors."""
    return complete_to_unitary(target) @ dagger(complete_to_unitary(source))


# -- random sampling -------------------------------------------------------


def make_rng(seed=None, *stream: int) -> np.random.Generator:
    """Generator for ``seed``, optionally split into an independent stream.

    ``make_rng(s, i)`` and ``make_rng(s, j)`` are independent for ``i != j`` and
    reproducible across processes and thread counts.
    """
    if isinstance(seed, np.random.Generator):
        if stream:
            raise ValueError("cannot derive a stream from a live Generator")
        return seed
    if stream:
        base = [] if seed is None else list(np.atleast_1d(seed).astype(np.int64))
        return np.random.default_rng([*base, *stream])
    return np.random.default_rng(seed)


def derive_seed(seed: int, *stream: int) -> int:
    """Single integer seed for sample ``stream`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([int(seed), *map(int, stream)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def random_state(dim: int, seed=None) -> np.ndarray:
    """Haar-random pure state with the global phase fixed (first amplitude real >= 0)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    phase = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0
    return v / phase


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase-fixed R."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


# -- Givens parametrization of SU(d) --------------------------------------


def givens_pairs(dim: int) -> list[tuple[int, int]]:
    """Row pairs touched by the rotations, in product order (left to right)."""
    return [(i - 1, i) for j in range(dim - 1) for i in range(dim - 1, j, -1)]


def n_unitary_params(dim: int) -> int:
    return dim * dim - 1


@dataclass(frozen=True)
class UnitaryParams:
    """Angles for ``decode_unitary``.

    Layout: ``(theta_1, phi_1, ..., theta_K, phi_K, delta_0, ..., delta_{d-2})``
    with ``K = d(d-1)/2`` two-level rotations followed by ``d-1`` free diagonal
    phases (the last phase is fixed by ``det = 1``).
    """

    dim: int
    angles: tuple[float, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if len(self.angles) != n_unitary_params(self.dim):
            raise ValueError(
                f"SU({self.dim}) needs {n_unitary_params(self.dim)} angles, got {len(self.angles)}"
            )


def _givens(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * phi) * s], [np.exp(-1j * phi) * s, c]], dtype=np.complex128
    )


def decode_unitary(p: UnitaryParams) -> np.ndarray:
    """SU(d) element ``G_1 G_2 ... G_K D`` built from Givens angles and phases.

    Each ``G_k`` acts on rows ``(i-1, i)`` as
    ``[[cos(t/2), -e^{i f} sin(t/2)], [e^{-i f} sin(t/2), cos(t/2)]]``.
    """
    dim = p.dim
    angles = np.asarray(p.angles, dtype=float)
    pairs = givens_pairs(dim)
    k = len(pairs)
    deltas = angles[2 * k :]
    phases = np.append(deltas, -np.sum(deltas)) if dim > 1 else np.zeros(1)
    u = np.diag(np.exp(1j * phases))
    # Apply right to left so only two rows change per step.
    for idx in range(k - 1, -1, -1):
        r0, r1 = pairs[idx]
        g = _givens(angles[2 * idx], angles[2 * idx + 1])
        u[[r0, r1], :] = g @ u[[r0, r1], :]
    return u


def encode_unitary(u) -> UnitaryParams:
    """Inverse of ``decode_unitary``, up to the global phase of ``u``.

    A general unitary is first rescaled by ``det(u)^{-1/d}`` so the result is
    special unitary; this only changes a global phase.
    """
    u = require_unitary(u, "matrix to encode")
    dim = u.shape[0]
    det = np.linalg.det(u)
    m = u * np.exp(-1j * np.angle(det) / dim)
    angles: list[float] = []
    for j in range(dim - 1):
        for i in range(dim - 1, j, -1):
            a, b = m[i - 1, j], m[i, j]
            ra, rb = abs(a), abs(b)
            theta = 2.0 * np.arctan2(rb, ra)
            if rb == 0.0:
                phi = 0.0
            elif ra == 0.0:
                phi = -np.angle(b)
            else:
                phi = np.angle(a) - np.angle(b)
            g = _givens(theta, phi)
            m[[i - 1, i], :] = g.conj().T @ m[[i - 1, i], :]
            angles.extend([theta, phi])
    phases = np.angle(np.diagonal(m))
    angles.extend(phases[: dim - 1].tolist())
    return UnitaryParams(dim, tuple(angles))
