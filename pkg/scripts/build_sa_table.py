"""Rebuild validmol/data/sa_fragments.txt from a SMILES corpus.

    python3 scripts/build_sa_table.py data/corpora/nci_first5k.smi

Molecules that fail chemical validation are skipped and counted.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from validmol.properties.sa import corpus_fragment_counts, fragment_scores_from_counts
from validmol.smiles import validate_chemistry

OUT = Path(__file__).resolve().parents[1] / "src" / "validmol" / "data" / "sa_fragments.txt"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus", type=Path)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()

    mols, skipped = [], 0
    for line in args.corpus.read_text().splitlines():
        if not line.strip():
            continue
        verdict = validate_chemistry(line.split()[0])
        if verdict.ok:
            mols.append(verdict.molecule)
        else:
            skipped += 1
    scores = fragment_scores_from_counts(corpus_fragment_counts(mols), len(mols))
    with args.out.open("w") as fh:
        fh.write(f"# fragment contributions from {args.corpus.name}: {len(mols)} molecules, {skipped} skipped\n")
        fh.write("# identifier<TAB>log10(count scaled to 1e6 molecules / n80)\n")
        for ident, score in scores.items():
            fh.write(f"{ident}\t{score:.4f}\n")
    print(f"{len(scores)} fragments from {len(mols)} molecules ({skipped} skipped) -> {args.out}")


if __name__ == "__main__":
    main()
