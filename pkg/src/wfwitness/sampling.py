"""Haar-random single-party scenarios for sweeps and property tests."""

from __future__ import annotations

import numpy as np

from .channels import random_unital_op
from .qlinalg import make_rng, random_state, random_unitary
from .scenario import AOM, BLOCK, CHANNEL, FriendMeasurement, Scenario, SuperObserverOp


def random_block_op(d: int, n: int, rng: np.random.Generator) -> SuperObserverOp:
    return SuperObserverOp.block([random_unitary(d, rng) for _ in range(n)])


def random_scenario(
    seed=None,
    d: int = 2,
    n: int = 1,
    m: int = 2,
    dynamics: str = AOM,
    op: str = BLOCK,
    padding: int = 0,
    max_terms: int = 8,
) -> Scenario:
    """Haar ``psi`` and Friend bases; ``m - 1`` random ops of the given kind after the identity."""
    rng = make_rng(seed)
    psi = random_state(d, rng)
    meas = tuple(FriendMeasurement(random_unitary(d, rng)) for _ in range(n))
    dim = d * (d * n + 1 + padding)
    ops = [SuperObserverOp.identity()]
    for _ in range(m - 1):
        if op == BLOCK:
            ops.append(random_block_op(d, n, rng))
        elif op == CHANNEL:
            ops.append(random_unital_op(dim, rng, max_terms))
        elif op == "unitary":
            ops.append(SuperObserverOp.unitary(random_unitary(dim, rng)))
        else:
            raise ValueError(f"unsupported op kind {op!r}")
    return Scenario(d, n, psi, meas, tuple(ops), dynamics, padding)
