"""Brute-force density-matrix reference for every pipeline.

Nothing here calls the simulator's state or measurement code: the Friend's
measurement is an explicit isometry, AoM is an explicit dephasing channel,
block ops are re-assembled from their matrix elements, and outcomes come from
``tr(P rho)``. Only the result containers are shared.
"""

from __future__ import annotations

import itertools

import numpy as np

from .scenario import OutcomeDistribution

_AOM = "aom"


def _lab_dim(d: int, n: int, padding: int = 0) -> int:
    return d * n + 1 + padding


def _F_vectors(basis: np.ndarray, x: int, n: int, padding: int = 0) -> list[np.ndarray]:
    d = basis.shape[0]
    lab = np.eye(_lab_dim(d, n, padding))
    return [np.kron(basis[:, i], lab[x * d + i]) for i in range(d)]


def _rank_one(v: np.ndarray) -> np.ndarray:
    return np.outer(v, np.conj(v))


def _isometry(basis: np.ndarray, fs: list[np.ndarray]) -> np.ndarray:
    """``W = sum_i |F_i><psi_i|`` from the system into system ⊗ Lab."""
    return sum(np.outer(f, basis[:, i].conj()) for i, f in enumerate(fs))


def _block_unitary(blocks, sectors: list[list[np.ndarray]], dim: int) -> np.ndarray:
    """``1 - sum_x Pi_x + sum_x sum_{a,i} B^x[a,i] |F^x_a><F^x_i|``."""
    u = np.eye(dim, dtype=np.complex128)
    for b, fs in zip(blocks, sectors):
        for a, i in itertools.product(range(len(fs)), repeat=2):
            u += (b[a, i] - (1.0 if a == i else 0.0)) * np.outer(fs[a], fs[i].conj())
    return u


def _evolve(rho: np.ndarray, op, sectors, dim: int, extra: int = 1) -> np.ndarray:
    """Apply ``op ⊗ 1_extra`` to ``rho`` by conjugation."""
    kind = op.kind
    if kind == "identity":
        return rho
    if kind == "channel":
        ks = [np.kron(k, np.eye(extra)) for k in op.kraus]
        return sum(k @ rho @ k.conj().T for k in ks)
    u = op.matrix if kind == "unitary" else _block_unitary(op.blocks, sectors, dim)
    u = np.kron(u, np.eye(extra))
    return u @ rho @ u.conj().T


def _prepare(psi: np.ndarray, basis: np.ndarray, fs, dynamics: str, extra: int = 1) -> np.ndarray:
    w = np.kron(_isometry(basis, fs), np.eye(extra))
    rho = w @ _rank_one(np.asarray(psi, dtype=np.complex128)) @ w.conj().T
    if dynamics.lower() == _AOM:
        projs = [np.kron(_rank_one(f), np.eye(extra)) for f in fs]
        rho = sum(p @ rho @ p for p in projs)
    return rho


def oracle_single_party(scenario, x: int, w: int) -> OutcomeDistribution:
    """Outcome distribution of the final measurement, via full density matrices."""
    d, n, pad = scenario.d, scenario.n, scenario.padding
    dim = d * _lab_dim(d, n, pad)
    sectors = [_F_vectors(m.basis, xx, n, pad) for xx, m in enumerate(scenario.measurements)]
    rho = _prepare(scenario.psi, scenario.measurements[x].basis, sectors[x], scenario.dynamics)
    rho = _evolve(rho, scenario.ops[w], sectors, dim)
    probs = np.array([[np.trace(_rank_one(f) @ rho).real for f in fs] for fs in sectors])
    return OutcomeDistribution(probs, np.trace(rho).real - probs.sum())


def oracle_bipartite(bs, x: int, y: int, w: int) -> np.ndarray:
    """``p[a, b]`` for one ``(x, y, w)``, with the empty outcome dropped."""
    d_B = bs.bob.shape[2]
    sectors = [_F_vectors(m.basis, xx, 2) for xx, m in enumerate(bs.alice)]
    dim_a = 2 * _lab_dim(2, 2)
    rho = _prepare(bs.psi, bs.alice[x].basis, sectors[x], bs.dynamics, extra=d_B)
    rho = _evolve(rho, bs.ops[w], sectors, dim_a, extra=d_B)
    out = np.zeros((2, 2))
    for a, b in itertools.product(range(2), repeat=2):
        out[a, b] = np.trace(np.kron(_rank_one(sectors[x][a]), bs.bob[y, b]) @ rho).real
    return out


def oracle_joint_table(bs):
    from .bipartite import JointTable

    probs = np.zeros((2, 2, 2, 2, 2))
    for x, y, w in itertools.product(range(2), repeat=3):
        probs[:, :, x, y, w] = oracle_bipartite(bs, x, y, w)
    return JointTable(probs)


def alpha_matrix(bs, x: int, w: int = 1) -> np.ndarray:
    """``alpha[i, j] = <F^x_j| U |F^x_i>`` for Alice's sector ``x``."""
    sectors = [_F_vectors(m.basis, xx, 2) for xx, m in enumerate(bs.alice)]
    dim_a = 2 * _lab_dim(2, 2)
    op = bs.ops[w]
    u = op.matrix if op.kind == "unitary" else _block_unitary(op.blocks, sectors, dim_a)
    fs = sectors[x]
    return np.array([[np.vdot(fs[j], u @ fs[i]) for j in range(2)] for i in range(2)])


def alpha_decomposition_error(bs, w: int = 1) -> dict:
    """Residuals of the block decomposition of an AoM table.

    ``p(a,b|x,y,U) = |alpha_aa|^2 p(a,b|x,y,1) + |alpha_{a+1,a}|^2 p(a+1,b|x,y,1)``,
    together with normalization ``sum_j |alpha_ij|^2 = 1`` and orthogonality
    ``sum_j alpha_0j conj(alpha_1j) = 0`` of the coefficient rows.
    """
    decomposition = normalization = orthogonality = 0.0
    for x in range(2):
        alpha = alpha_matrix(bs, x, w)
        normalization = max(normalization, float(np.max(np.abs(np.sum(np.abs(alpha) ** 2, axis=1) - 1))))
        orthogonality = max(orthogonality, float(abs(np.vdot(alpha[1], alpha[0]))))
        for y in range(2):
            p_id = oracle_bipartite(bs, x, y, 0)
            p_u = oracle_bipartite(bs, x, y, w)
            for a in range(2):
                pred = abs(alpha[a, a]) ** 2 * p_id[a] + abs(alpha[1 - a, a]) ** 2 * p_id[1 - a]
                decomposition = max(decomposition, float(np.max(np.abs(pred - p_u[a]))))
    return {"decomposition": decomposition, "normalization": normalization, "orthogonality": orthogonality}
