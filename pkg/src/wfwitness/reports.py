from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .qlinalg import EPS_PROB


@dataclass(frozen=True)
class WitnessReport:
    """Value of one witness next to its AoM bound.

    ``violated`` is ``value > aom_bound + tolerance``.
    """

    witness: str
    value: float
    aom_bound: float
    violated: bool
    inputs_digest: str = ""
    seed: int | None = None
    tolerance: float = EPS_PROB
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "witness": self.witness,
            "value": self.value,
            "bound": self.aom_bound,
            "violated": self.violated,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "tolerance": self.tolerance,
        }
        if self.details:
            out["details"] = dict(self.details)
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def make_report(
    witness: str,
    value: float,
    bound: float,
    *,
    digest: str = "",
    seed: int | None = None,
    tolerance: float = EPS_PROB,
    details: dict | None = None,
) -> WitnessReport:
    value, bound = float(value), float(bound)
    return WitnessReport(
        witness=witness,
        value=value,
        aom_bound=bound,
        violated=bool(value > bound + tolerance),
        inputs_digest=digest,
        seed=seed,
        tolerance=tolerance,
        details=details or {},
    )


def digest(obj) -> str:
    """sha256 of the canonical JSON form of a scenario (single-party or bipartite)."""
    from .serialize import to_dict

    payload = json.dumps(to_dict(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
