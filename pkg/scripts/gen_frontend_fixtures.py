#!/usr/bin/env python3
"""Regenerate the frontend's cross-implementation graph fixtures.

Writes frontend/tests/fixtures/graph_cases.json: a batch of valid random
graphs, one deliberately broken graph per violation code, and the default
taxonomy. The frontend's invariant mirror must accept every valid case
and flag every broken one with the same code, which keeps the two
validators from drifting apart silently.

Deterministic for a fixed seed; rerun after changing the invariants:

    python3 scripts/gen_frontend_fixtures.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from easg_kit.core import default_taxonomy, validate_graph
from easg_kit.formats import graph_to_jsonable
from easg_kit.synth import MUTATIONS, random_graph

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"
SEED = 20240816
VALID_COUNT = 60
MUTATED_PER_CODE = 4


def main() -> None:
    rng = random.Random(SEED)
    tax = default_taxonomy()

    valid = []
    for i in range(VALID_COUNT):
        g = random_graph(rng, tax, clip_id=f"fix-{i:03d}", timestep=rng.randrange(1, 9))
        report = validate_graph(g, tax)
        assert report.ok, report.summary()
        valid.append(graph_to_jsonable(g))

    mutated = []
    for code, fn in MUTATIONS:
        for i in range(MUTATED_PER_CODE):
            g = random_graph(rng, tax, clip_id=f"mut-{code.lower()}-{i}", timestep=2)
            broken = fn(g, rng, tax)
            report = validate_graph(broken, tax)
            assert code in report.codes(), (code, report.summary())
            mutated.append({"code": code, "graph": graph_to_jsonable(broken)})

    doc = {
        "seed": SEED,
        "taxonomy": {
            "verbs": list(tax.verbs),
            "nouns": list(tax.nouns),
            "relations": list(tax.relations),
        },
        "valid": valid,
        "mutated": mutated,
    }
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / "graph_cases.json"
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(valid)} valid, {len(mutated)} mutated)")


if __name__ == "__main__":
    main()
