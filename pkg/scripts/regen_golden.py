"""Rewrite the shipped golden reports from the current code."""

import json
from pathlib import Path

from bridgelab.consequence import Relation
from bridgelab.proofs import BUILTIN_PROOFS, builtin_proof, check_relations, proof_report
from bridgelab.scenarios import SCENARIOS, run_scenario

GOLDEN = Path(__file__).resolve().parent.parent / "src" / "bridgelab" / "data" / "golden"


def proof_golden(name: str) -> str:
    p = builtin_proof(name)
    relations = list(Relation)
    report = proof_report(p, check_relations(p, relations), relations)
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name in SCENARIOS:
        (GOLDEN / f"{name}.json").write_text(run_scenario(name).dumps())
    for name in BUILTIN_PROOFS:
        (GOLDEN / f"proof-{name}.json").write_text(proof_golden(name))


if __name__ == "__main__":
    main()
