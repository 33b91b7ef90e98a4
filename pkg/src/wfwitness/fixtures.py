"""Regenerate the shipped scenario files: ``python -m wfwitness.fixtures DIR``."""

from __future__ import annotations

import json
import sys
from pathlib import Path

from . import serialize
from .bipartite import nom_violating_strategy
from .scenario import AOM, NOM
from .witnesses import saturating_aom_realization, violating_nom_realization, worked_example


def fixture_documents() -> dict[str, dict]:
    docs = {
        "nom_T.json": serialize.to_dict(worked_example(NOM)),
        "aom_T.json": serialize.to_dict(worked_example(AOM)),
        "aom_Tq_saturating.json": serialize.to_dict(saturating_aom_realization(3, (0.5, 0.3, 0.2))),
        "nom_Tq_violating.json": serialize.to_dict(violating_nom_realization(3, (0.5, 0.3, 0.2))),
        "bipartite_nom.json": serialize.to_dict(nom_violating_strategy(NOM)),
        "bipartite_aom.json": serialize.to_dict(nom_violating_strategy(AOM)),
    }
    bad = json.loads(json.dumps(docs["nom_T.json"]))
    bad["ops"][1]["blocks"][0] = [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    docs["bad.json"] = bad
    return docs


def render(doc: dict) -> str:
    return json.dumps(doc, indent=1) + "\n"


def write_fixtures(directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, doc in fixture_documents().items():
        path = out / name
        path.write_text(render(doc))
        written.append(path)
    return written


if __name__ == "__main__":
    for p in write_fixtures(sys.argv[1] if len(sys.argv) > 1 else "fixtures"):
        print(p)
