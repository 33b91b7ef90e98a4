"""Random unital channels for the super-observer.

Two generators:

* ``random_unitary_mixture``: ``K_k = sqrt(p_k) U_k`` with Haar ``U_k``;
  unital by construction.
* ``random_unital_kraus``: generic Kraus sets pushed onto the
  trace-preserving and unital constraints by alternating operator scaling
  (``K <- K S^{-1/2}`` then ``K <- T^{-1/2} K``); rejected if it fails to
  converge.
"""

from __future__ import annotations

import numpy as np

from .qlinalg import EPS_UNITARY, make_rng, random_unitary
from .scenario import SuperObserverOp, check_unital_channel


def random_unitary_mixture(dim: int, n_terms: int, seed=None) -> list[np.ndarray]:
    """Kraus operators of a random convex mixture of ``n_terms`` Haar unitaries."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    rng = make_rng(seed)
    weights = rng.dirichlet(np.ones(n_terms))
    return [np.sqrt(p) * random_unitary(dim, rng) for p in weights]


def _inv_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def random_unital_kraus(
    dim: int, n_kraus: int, seed=None, max_iter: int = 500, max_tries: int = 20
) -> list[np.ndarray]:
    """Generic (not necessarily mixed-unitary) unital channel."""
    rng = make_rng(seed)
    eye = np.eye(dim)
    for _ in range(max_tries):
        ks = rng.standard_normal((n_kraus, dim, dim)) + 1j * rng.standard_normal((n_kraus, dim, dim))
        for _ in range(max_iter):
            s = np.einsum("kji,kjl->il", ks.conj(), ks)
            ks = ks @ _inv_sqrt(s)
            t = np.einsum("kij,klj->il", ks, ks.conj())
            ks = _inv_sqrt(t) @ ks
            tp_err = np.max(np.abs(np.einsum("kji,kjl->il", ks.conj(), ks) - eye))
            if tp_err < EPS_UNITARY / 10:
                break
        try:
            check_unital_channel(list(ks))
        except ValueError:
            continue
        return list(ks)
    raise RuntimeError("operator scaling did not converge to a unital channel")


def random_unital_op(dim: int, seed=None, max_terms: int = 8) -> SuperObserverOp:
    """Channel op mixing between 1 and ``max_terms`` Haar unitaries."""
    rng = make_rng(seed)
    n_terms = int(rng.integers(1, max_terms + 1))
    return SuperObserverOp.channel(random_unitary_mixture(dim, n_terms, rng))
