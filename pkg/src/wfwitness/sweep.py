"""Bound-falsification sweeps over Haar-random scenarios.

Sample ``i`` of a run with seed ``s`` is generated from
``derive_seed(s, i)``, recorded in the ``seed`` column, so any row can be
rebuilt with :func:`sample_row` alone. Work is split across threads but
merged in sample order, so output does not depend on the thread count.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bipartite import (
    PS_AOM_BOUND,
    extremal_report,
    check_no_signalling,
    chsh_value,
    joint_table,
    nom_violating_strategy,
    p1_aom_bound,
    ps_value,
    random_bipartite_scenario,
)
from .qlinalg import EPS_PROB, ValidationError, derive_seed, make_rng
from .sampling import random_scenario
from .scenario import AOM, BLOCK, CHANNEL, NOM, Scenario, SuperObserverOp, normalize_dynamics, trial_probabilities
from .witnesses import T_AOM_BOUND, saturating_aom_realization, t_value, tq_value, violating_nom_realization

WITNESSES = ("T", "Tq", "PS")
CSV_COLUMNS = ("witness", "value", "bound", "violated", "seed")
THREADS_ENV = "WFS_THREADS"
ANALYTIC = "analytic"
_CHUNK = 512


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


@dataclass(frozen=True)
class SweepRow:
    witness: str
    value: float
    bound: float
    violated: bool
    seed: int | str
    failed_checks: tuple = ()

    @property
    def margin(self) -> float:
        return self.value - self.bound


@dataclass
class SweepReport:
    witness: str
    mode: str
    seed: int
    rows: list
    tolerance: float = EPS_PROB
    extras: dict = field(default_factory=dict)

    @property
    def max_value(self) -> float:
        return max(r.value for r in self.rows)

    @property
    def max_margin(self) -> float:
        return max(r.margin for r in self.rows)

    @property
    def flags(self) -> list:
        return [r for r in self.rows if r.violated]

    @property
    def aux_failures(self) -> list:
        return [r for r in self.rows if r.failed_checks]

    @property
    def defects(self) -> list:
        """Violations that contradict the AoM bound (none are expected)."""
        return self.flags if self.mode == AOM else []

    def summary(self) -> dict:
        return {
            "witness": self.witness,
            "mode": self.mode,
            "samples": len(self.rows),
            "seed": self.seed,
            "max": self.max_value,
            "margin": self.max_margin,
            "violations": len(self.flags),
            "defects": [r.seed for r in self.defects],
            "aux_failures": [{"seed": r.seed, "checks": list(r.failed_checks)} for r in self.aux_failures],
            **self.extras,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.witness, repr(r.value), repr(r.bound), str(r.violated).lower(), r.seed])
        return buf.getvalue()

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def _single_party_row(s: Scenario, witness: str, seed, q=None, tol: float = EPS_PROB) -> SweepRow:
    p_id = trial_probabilities(s, 0, 0)
    p_u = trial_probabilities(s, 0, 1)
    failed = []
    if s.dynamics == AOM and p_u.max() > p_id.max() + tol:
        failed.append("rank1")
    if witness == "T" and s.d == 2:
        name, value, bound = "T", t_value(p_id, p_u), T_AOM_BOUND
    else:
        q = np.full(s.d, 1.0 / s.d) if q is None else q
        name, value, bound = "Tq", tq_value(p_id, p_u, q), float(np.max(q))
    return SweepRow(name, value, bound, bool(value > bound + tol), seed, tuple(failed))


def _bipartite_row(bs, seed, tol: float = EPS_PROB) -> SweepRow:
    t = joint_table(bs)
    p0, p1 = chsh_value(t, 0), chsh_value(t, 1)
    value = ps_value(p0, p1)
    failed = []
    if not check_no_signalling(t, tol):
        failed.append("no_signalling")
    if bs.dynamics == AOM:
        if p1 > p1_aom_bound(p0) + tol:
            failed.append("P1_bound")
        if bs.ops[1].kind in ("identity", BLOCK):
            rep = extremal_report(bs, tol)
            failed.extend(name for name, ok in rep["checks"].items() if not ok)
    return SweepRow("PS", value, PS_AOM_BOUND, bool(value > PS_AOM_BOUND + tol), seed, tuple(failed))


def sample_row(witness: str, mode: str, sample_seed: int, *, channel: bool = False, dims=(2, 3, 4)) -> SweepRow:
    """Evaluate one random scenario; fully determined by ``sample_seed``."""
    rng = make_rng(sample_seed)
    op = CHANNEL if channel else BLOCK
    if witness == "PS":
        return _bipartite_row(random_bipartite_scenario(rng, mode, 2, op), sample_seed)
    d = int(dims[rng.integers(len(dims))])
    q = rng.dirichlet(np.ones(d)) if witness == "Tq" else None
    if q is not None and q.max() >= 1.0:
        q = np.full(d, 1.0 / d)
    s = random_scenario(rng, d=d, n=1, m=2, dynamics=mode, op=op)
    return _single_party_row(s, witness, sample_seed, q)


def analytic_row(witness: str, mode: str) -> SweepRow:
    """Row for the known construction: saturating under AoM, violating under NoM."""
    if witness == "PS":
        bs = nom_violating_strategy(mode)
        if mode == AOM:
            bs = bs.replace(ops=(SuperObserverOp.identity(), SuperObserverOp.block([np.eye(2), np.eye(2)])))
        return _bipartite_row(bs, ANALYTIC)
    q = np.array([0.5, 0.5]) if witness == "T" else np.array([0.6, 0.3, 0.1])
    build = saturating_aom_realization if mode == AOM else violating_nom_realization
    return _single_party_row(build(q.size, q), witness, ANALYTIC, q)


def bound_falsification_sweep(
    witness: str,
    mode: str = AOM,
    samples: int = 1000,
    seed: int = 0,
    *,
    channel: bool = False,
    dims=None,
    threads: int | None = None,
    inject: bool = True,
) -> SweepReport:
    """Evaluate ``samples`` random scenarios against the AoM bound of ``witness``.

    ``dims`` defaults to ``(2,)`` for ``T`` and ``(2, 3, 4)`` for ``Tq``; in a
    ``T`` sweep, samples with ``d > 2`` are scored with the uniform-``q``
    witness whose bound ``1/d`` is tighter. With ``inject`` the first row is
    the analytic construction instead of a random draw.
    """
    if witness not in WITNESSES:
        raise ValidationError(f"witness must be one of {WITNESSES}")
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    mode = normalize_dynamics(mode)
    if dims is None:
        dims = (2,) if witness == "T" else (2, 3, 4)
    dims = tuple(int(d) for d in dims)
    threads = default_threads() if threads is None else max(1, int(threads))

    start = 1 if inject else 0
    indices = list(range(start, samples))
    chunks = [indices[k : k + _CHUNK] for k in range(0, len(indices), _CHUNK)]

    def run(chunk):
        return [sample_row(witness, mode, derive_seed(seed, i), channel=channel, dims=dims) for i in chunk]

    rows: list[SweepRow] = [analytic_row(witness, mode)] if inject else []
    if threads == 1:
        for chunk in chunks:
            rows.extend(run(chunk))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(run, chunks):
                rows.extend(part)
    return SweepReport(witness, mode, seed, rows, extras={"channel": channel, "dims": list(dims)})
