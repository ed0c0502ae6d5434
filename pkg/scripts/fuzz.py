"""Fuzz the SMILES validators for a fixed wall-clock budget.

Three generators feed validate_syntax and validate_chemistry: raw random
bytes, random strings over the SMILES alphabet, and single/multi-character
edits of the bundled drug set. A fault is any exception, or a verdict that
breaks the layering contract. Every chemically valid input also has its SA
score checked against [1, 10].

    python3 scripts/fuzz.py --seconds 3600 --out fuzz_result.json
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
import traceback
from dataclasses import asdict, dataclass, field
from importlib import resources

from validmol.properties import sa_score
from validmol.smiles import validate_chemistry, validate_syntax
from validmol.smiles.syntax import VALID_CHARACTERS

ALPHABET = "".join(sorted(VALID_CHARACTERS))


@dataclass
class FuzzReport:
    seconds: float = 0.0
    inputs: int = 0
    valid_molecules: int = 0
    faults: list[dict] = field(default_factory=list)
    sa_min: float | None = None
    sa_max: float | None = None
    sa_out_of_range: int = 0


def _drugs() -> list[str]:
    text = resources.files("validmol.data").joinpath("drugs50.smi").read_text()
    return [line.split("\t")[0] for line in text.splitlines() if line.strip()]


def _random_bytes(rng: random.Random) -> str:
    return bytes(rng.randrange(256) for _ in range(rng.randrange(1, 48))).decode("latin-1")


def _random_alphabet(rng: random.Random) -> str:
    return "".join(rng.choice(ALPHABET) for _ in range(rng.randrange(1, 40)))


def _edited_drug(rng: random.Random, drugs: list[str]) -> str:
    s = list(rng.choice(drugs))
    for _ in range(rng.randrange(1, 4)):
        pos = rng.randrange(len(s) + 1)
        op = rng.randrange(3)
        if op == 0 and pos < len(s):
            del s[pos]
        elif op == 1 and pos < len(s):
            s[pos] = rng.choice(ALPHABET)
        else:
            s.insert(pos, rng.choice(ALPHABET))
    return "".join(s)


def check_one(text: str, report: FuzzReport) -> None:
    report.inputs += 1
    try:
        syn = validate_syntax(text)
        chem = validate_chemistry(text)
        problem = None
        if chem.ok != (chem.molecule is not None):
            problem = "verdict/molecule mismatch"
        elif chem.ok and not syn.ok:
            problem = "chemistry accepted a syntax failure"
        elif not chem.ok and not chem.message:
            problem = "rejection without message"
        elif chem.message and chem.message.startswith("Unexpected error"):
            problem = chem.message
        if problem:
            report.faults.append({"input": text, "problem": problem})
            return
        if chem.ok:
            report.valid_molecules += 1
            sa = sa_score(chem.molecule)
            report.sa_min = sa if report.sa_min is None else min(report.sa_min, sa)
            report.sa_max = sa if report.sa_max is None else max(report.sa_max, sa)
            if not 1.0 <= sa <= 10.0:
                report.sa_out_of_range += 1
    except Exception:  # noqa: BLE001 - any exception is a fault by definition
        report.faults.append({"input": text, "problem": traceback.format_exc(limit=3)})


def run_fuzz(seconds: float, seed: int = 0) -> FuzzReport:
    rng = random.Random(seed)
    drugs = _drugs()
    report = FuzzReport()
    start = time.monotonic()
    gens = (_random_bytes, _random_alphabet, lambda r: _edited_drug(r, drugs))
    while time.monotonic() - start < seconds:
        for gen in gens:
            check_one(gen(rng), report)
    report.seconds = round(time.monotonic() - start, 3)
    return report


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seconds", type=float, default=60.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="write the JSON report here")
    args = ap.parse_args(argv)
    report = run_fuzz(args.seconds, args.seed)
    text = json.dumps(asdict(report), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if not report.faults and not report.sa_out_of_range else 1


if __name__ == "__main__":
    sys.exit(main())
