"""Regenerate the bundled fixtures under fixtures/.

    python3 scripts/build_fixtures.py

Outputs (all deterministic):
  fixtures/cassettes/cases.jsonl   replay cassette for the design tasks below
  fixtures/tasks.jsonl             design tasks with the status each should reach
  fixtures/rates_corpus.jsonl     1000 responses: 907 adherent, 2495 of 2721 SMILES valid
  fixtures/valid_corpus.jsonl      200 clean, anchored, fully valid responses
  fixtures/adversarial.jsonl       labelled faulty and clean strings
"""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path

from validmol.evaluation import EvalRecord, chemistry_fault, dump_corpus, syntax_fault
from validmol.llm_client import DEFAULT_MODEL, ChatRequest, cassette_record
from validmol.pipeline import DesignTask, ObjectiveKind
from validmol.prompts import get_template, render_prompt
from validmol.response_parser import render_bullets

ROOT = Path(__file__).resolve().parents[1] / "fixtures"

CELECOXIB = "CC1=CC=C(C=C1)C2=CC(=NN2C3=CC=C(C=C3)S(=O)(=O)N)CF"
CELECOXIB_MOD = "CC1=CC=C(C=C1)C2=CC(=NN2C3=CC=C(C=C3)S(=O)(=O)NC(C)C)CF"
JAK2 = "CC1=C(C=C(C=C1)NC(=O)C2=CC=C(C=C2)CN3CCN(CC3)C)NC4=NC=CC(=N4)C5=CN=CC=C5"
JAK2_BR = "CC1=C(C=C(C=C1)NC(=O)C2=CC=C(C=C2)CN3CCN(CC3)C)NC4=NC=CC(=N4)C5=CN=C(C=C5)Br"
JAK2_MOD = "CC1=C(C=C(C=C1)NC(=O)C2=CC=C(C=C2)CN3CCN(CC3)C)NC4=NC=CC(=N4)C5=CN=C(C=C5)O"

REACTIONS = [
    "N-alkylation with methyl iodide and potassium carbonate in DMF",
    "Amide coupling with HATU and DIPEA in DMF",
    "Suzuki coupling with the arylboronic acid, Pd(PPh3)4, K2CO3",
    "Reductive amination with sodium triacetoxyborohydride",
    "Boc deprotection with TFA in dichloromethane",
    "Ester hydrolysis with lithium hydroxide in THF/water",
    "Williamson ether synthesis with the alkyl bromide and NaH",
    "Nitro reduction with iron powder and ammonium chloride",
    "Friedel-Crafts acylation with acetyl chloride and AlCl3",
    "Mitsunobu reaction with DIAD and triphenylphosphine",
]

PROSE = [
    "Sure! To address this objective you could add a hydroxyl group to the aromatic ring. "
    "This usually improves polarity. Let me know if you want more ideas.",
    "The starting molecule is a good lead. A reasonable modification would be replacing the methyl "
    "group with a trifluoromethyl group, which can be done through a radical trifluoromethylation.",
    "I am not able to propose a synthesis route with confidence, but introducing a morpholine ring "
    "is a common strategy for this kind of objective.",
    "Here is my suggestion: convert the ester to an amide. Amides are more stable to hydrolysis. "
    "First hydrolyse the ester, then couple with the amine.",
    "Modified molecule: take the parent scaffold and add a fluorine para to the sulfonamide. "
    "Synthesis: start from the fluorinated aniline and follow the original route.",
]

OBJECTIVES = [
    ("improve target binding affinity", ObjectiveKind.TARGET_AFFINITY),
    ("increase aqueous solubility", ObjectiveKind.SOLUBILITY),
    ("improve metabolic stability", ObjectiveKind.METABOLIC_STABILITY),
    ("improve blood-brain barrier penetration", ObjectiveKind.BBB_PENETRATION),
    ("improve selectivity over the off-target isoform", ObjectiveKind.SELECTIVITY),
    ("make the molecule easier to synthesise", ObjectiveKind.SYNTHETIC_ACCESSIBILITY),
]


def drugs() -> list[tuple[str, str]]:
    text = resources.files("validmol.data").joinpath("drugs50.smi").read_text()
    return [tuple(line.split("\t")) for line in text.splitlines() if line.strip()]  # type: ignore[misc]


def bullets(items: list[str], brackets: bool = False) -> str:
    return render_bullets([f"[{x}]" if brackets and i % 2 == 0 else x for i, x in enumerate(items)])


def json_response(start: str, steps: list[str], objective: str) -> str:
    pathway = []
    for i, item in enumerate(steps):
        if i % 2 == 0:
            pathway.append({"step_type": "reaction", "details": item})
        else:
            pathway.append({"step_type": "product", "smiles": item})
    return json.dumps(
        {"starting_material": start, "objective_achieved": objective, "pathway": pathway}, indent=2
    )


def design_cases() -> list[tuple[str, DesignTask, str, str]]:
    """(name, task, response text, expected status)."""
    aspirin, ibuprofen, paracetamol, caffeine = (d[0] for d in drugs()[:4])
    cel = "improve COX-2 selectivity while maintaining drug-like properties"
    jak = "improve aqueous solubility while maintaining JAK2 affinity"
    return [
        (
            "celecoxib",
            DesignTask(CELECOXIB, cel, ObjectiveKind.SELECTIVITY, "V4"),
            bullets([CELECOXIB, "Treatment with isopropyl iodide under basic conditions (K₂CO₃ in DMF)", CELECOXIB_MOD]),
            "Accepted",
        ),
        (
            "jak2",
            DesignTask(JAK2, jak, ObjectiveKind.SOLUBILITY, "V4"),
            bullets(
                [
                    JAK2,
                    "Bromination at the 2-position of the pyridine ring (NBS, TFA)",
                    JAK2_BR,
                    "Oxidation using mCPBA in DCM, followed by hydrolysis",
                    JAK2_MOD,
                ]
            ),
            "Accepted",
        ),
        (
            "celecoxib_json",
            DesignTask(CELECOXIB, cel, ObjectiveKind.SELECTIVITY, "V5"),
            json_response(
                CELECOXIB,
                ["Treatment with isopropyl iodide under basic conditions (K₂CO₃ in DMF)", CELECOXIB_MOD],
                "yes",
            ),
            "Accepted",
        ),
        (
            "bracketed_template_echo",
            DesignTask(paracetamol, "improve metabolic stability", ObjectiveKind.METABOLIC_STABILITY, "V3"),
            bullets([paracetamol, "O-methylation with methyl iodide and K2CO3 in acetone", "CC(=O)Nc1ccc(OC)cc1"], brackets=True),
            "Accepted",
        ),
        (
            "mix_reaction",
            DesignTask(aspirin, "increase aqueous solubility", ObjectiveKind.SOLUBILITY, "V4"),
            bullets([aspirin, "mix", "CC(=O)Oc1ccccc1C(=O)[O-].[Na+]"]),
            "RejectedPathway",
        ),
        (
            "conversational",
            DesignTask(ibuprofen, "improve target binding affinity", ObjectiveKind.TARGET_AFFINITY, "V1"),
            PROSE[0],
            "RejectedFormat",
        ),
        (
            "pentavalent_carbon",
            DesignTask(paracetamol, "increase aqueous solubility", ObjectiveKind.SOLUBILITY, "V4"),
            bullets([paracetamol, "Hydroxymethylation with formaldehyde", "CC(=O)Nc1ccc(O)cc1C(C)(C)(C)(C)O"]),
            "RejectedChemistry",
        ),
        (
            "not_anchored",
            DesignTask(caffeine, "improve blood-brain barrier penetration", ObjectiveKind.BBB_PENETRATION, "V4"),
            bullets(["Cn1cnc2c1c(=O)n(C)c(=O)n2CC", "N-demethylation with chloroformate", "Cn1cnc2c1c(=O)[nH]c(=O)n2CC"]),
            "RejectedPathway",
        ),
    ]


def build_cases() -> None:
    (ROOT / "cassettes").mkdir(parents=True, exist_ok=True)
    with open(ROOT / "cassettes" / "cases.jsonl", "w") as cas, open(ROOT / "tasks.jsonl", "w") as tasks:
        for name, task, response, expected in design_cases():
            prompt = render_prompt(get_template(task.prompt_version), task.start_smiles, task.objective)
            req = ChatRequest(prompt, DEFAULT_MODEL, 0.0)
            cas.write(json.dumps(cassette_record(req, response), ensure_ascii=False) + "\n")
            tasks.write(
                json.dumps({"name": name, "task": task.to_json(), "expected_status": expected}, ensure_ascii=False) + "\n"
            )


def _pathway(rng: random.Random, smiles: list[str], start: str, n_mol: int) -> list[str]:
    items = [start]
    for _ in range(n_mol - 1):
        items.append(rng.choice(REACTIONS))
        items.append(rng.choice(smiles))
    return items


def _task(rng: random.Random, start: str) -> DesignTask:
    objective, kind = rng.choice(OBJECTIVES)
    return DesignTask(start, objective, kind, "V4")


def build_rates_corpus() -> None:
    """907 adherent records with 3 SMILES each (2721), 226 carrying one valence fault."""
    rng = random.Random(1907)
    smiles = [d[0] for d in drugs()]
    records = []
    adherent, invalid = 907, 226
    for i in range(1000):
        start = smiles[i % len(smiles)]
        task = _task(rng, start)
        if i < adherent:
            items = _pathway(rng, smiles, start, 3)
            if i < invalid:
                items[-1] = chemistry_fault(items[-1])
            text = bullets(items)
        else:
            text = PROSE[i % len(PROSE)]
        records.append(EvalRecord(f"t1-{i:04d}", task, text))
    dump_corpus(records, ROOT / "rates_corpus.jsonl")


def build_valid() -> None:
    rng = random.Random(2024)
    smiles = [d[0] for d in drugs()]
    records = []
    for i in range(200):
        start = smiles[i % len(smiles)]
        items = _pathway(rng, smiles, start, 1 + i % 3)
        records.append(EvalRecord(f"valid-{i:03d}", _task(rng, start), bullets(items, brackets=i % 4 == 0)))
    dump_corpus(records, ROOT / "valid_corpus.jsonl")


SMALL_VALID = [
    "C", "CCO", "c1ccccc1", "c1ccncc1", "c1cc[nH]c1", "O=C(O)C", "C#N", "[NH4+]", "CC(=O)[O-]", "c1ccc2ccccc2c1",
    "C1CCCCC1", "OC1CCCCC1", "Fc1ccccc1", "CS(C)=O", "O=[N+]([O-])c1ccccc1",
]
KEKULE_BAD = ["c1cccc1", "c1ccccc1c1cccc1", "c1ccc2ccccc2c1c1cccc1"] + [
    pattern.format(sub) for sub in ["C", "O", "N", "F", "Cl", "CC", "OC"] for pattern in ("{}c1cccc1", "c1ccc({})c1")
]
VALENCE_BAD = [
    "C(C)(C)(C)(C)C", "FC(F)(F)(F)F", "N(C)(C)(C)(C)C", "O(C)(C)C", "CC(=O)(=O)C", "C=C=C=C(=C)C",
    "ClCl(Cl)Cl", "F(F)F", "CN(=O)(=O)=O",
]
INVALID_CHARS = "!$&?^~{}|;<>'\"JQ"
SHORT_REACTIONS = ["", "mix", "heat", "add", "stir", "rxn", "go", "Pd", "H2", "done", "N/A", "?", "...", "hv", "Δ", "rfx", "mix", "cool", "—", "ok"]


def build_adversarial() -> None:
    rng = random.Random(7)
    smiles = [d[0] for d in drugs()]
    rows: list[tuple[str, str, str]] = []  # kind, text, label
    for s in smiles + SMALL_VALID:
        rows.append(("smiles", s, "valid"))
    for s in smiles[:25]:
        rows.append(("smiles", syntax_fault(s), "unbalanced_parentheses"))
    for i, s in enumerate(smiles[25:45]):
        rows.append(("smiles", ("[" + s) if i % 2 == 0 else (s + "]"), "unbalanced_brackets"))
    for s in smiles[:25]:
        pos = rng.randrange(1, len(s) + 1)
        rows.append(("smiles", s[:pos] + rng.choice(INVALID_CHARS) + s[pos:], "invalid_character"))
    for i, s in enumerate(smiles[20:45]):
        label = "%99" if i % 3 == 0 else "9"
        rows.append(("smiles", s + label, "unmatched_ring_closure"))
    for s in VALENCE_BAD + [chemistry_fault(s) for s in smiles[30:46]]:
        rows.append(("smiles", s, "valence_exceeded"))
    five_ring_nh = [s for s in smiles if "[nH]" in s]
    for s in KEKULE_BAD + [s.replace("[nH]", "n", 1) for s in five_ring_nh]:
        rows.append(("smiles", s, "kekulization_impossible"))
    for r in SHORT_REACTIONS:
        rows.append(("reaction", r, "short_reaction"))
    for r in REACTIONS + ["Reflux in ethanol", "Acetylation with acetic anhydride", "Catalytic hydrogenation (H2, Pd/C)"]:
        rows.append(("reaction", r, "valid"))
    with open(ROOT / "adversarial.jsonl", "w") as fh:
        for n, (kind, text, label) in enumerate(rows):
            fh.write(json.dumps({"id": f"adv-{n:03d}", "kind": kind, "text": text, "label": label}, ensure_ascii=False) + "\n")


def main() -> None:
    ROOT.mkdir(exist_ok=True)
    build_cases()
    build_rates_corpus()
    build_valid()
    build_adversarial()
    for p in sorted(ROOT.rglob("*.jsonl")):
        print(p.relative_to(ROOT.parent), sum(1 for _ in p.open()))


if __name__ == "__main__":
    main()
