"""Reliability metrics over response corpora, fault injection and validator ablation."""

from __future__ import annotations

import enum
import json
import random
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from validmol.pathway import SynthesisPathway, check_anchoring, validate_pathway
from validmol.pipeline import DesignTask
from validmol.response_parser import (
    FormatFailure,
    Protocol,
    check_format,
    extract_pathway,
    parse_bullets,
    render_bullets,
    strip_template_brackets,
)
from validmol.smiles import TokenKind, tokenize, validate_chemistry, validate_syntax
from validmol.smiles.sanitize import AROMATIC_NOT_IN_RING, HUCKEL_VIOLATION, KEKULIZATION_IMPOSSIBLE, VALENCE_EXCEEDED


class Fault(enum.Enum):
    NONE = "None"
    SYNTAX = "Syntax"
    CHEMISTRY = "Chemistry"
    FORMAT = "Format"


class ValidationConfig(enum.Enum):
    FULL = "Full"
    SYNTAX_ONLY = "SyntaxOnly"
    CHEMISTRY_ONLY = "ChemistryOnly"
    NONE = "None"


class FailureCategory(enum.Enum):
    CONVERSATIONAL_NOISE = "ConversationalNoise"
    SYNTAX_ERROR = "SyntaxError"
    VALENCE_VIOLATION = "ValenceViolation"
    AROMATICITY_FAILURE = "AromaticityFailure"
    PATHWAY_SHAPE = "PathwayShape"
    SHORT_REACTION = "ShortReaction"
    NOT_ANCHORED = "NotAnchored"


class EmptyCorpus(ValueError):
    pass


class MissingLabels(ValueError):
    pass


class CorpusFormatError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


@dataclass(frozen=True)
class Labels:
    format_ok: bool
    chem_valid: bool
    injected_fault: Fault = Fault.NONE


@dataclass(frozen=True)
class EvalRecord:
    id: str
    task: DesignTask
    response_text: str
    labels: Labels | None = None

    def to_json(self) -> dict:
        labels = None
        if self.labels is not None:
            labels = {**asdict(self.labels), "injected_fault": self.labels.injected_fault.value}
        return {"id": self.id, "task": self.task.to_json(), "response_text": self.response_text, "labels": labels}

    @classmethod
    def from_json(cls, obj: dict) -> "EvalRecord":
        lab = obj.get("labels")
        labels = None
        if lab is not None:
            labels = Labels(bool(lab["format_ok"]), bool(lab["chem_valid"]), Fault(lab.get("injected_fault", "None")))
        return cls(str(obj["id"]), DesignTask.from_json(obj["task"]), obj["response_text"], labels)


def load_corpus(path: str | Path) -> list[EvalRecord]:
    """One JSON EvalRecord per line; blank lines skipped. Raises CorpusFormatError with the line number."""
    records = []
    seen: set[str] = set()
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = EvalRecord.from_json(json.loads(line))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(n, f"malformed record ({type(exc).__name__})") from exc
        if rec.id in seen:
            raise CorpusFormatError(n, f"duplicate id {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)
    return records


def dump_corpus(records: Iterable[EvalRecord], path: str | Path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


@dataclass(frozen=True)
class MetricsReport:
    n: int
    format_adherence: float
    chemical_validity: float
    synthesis_validity: float
    combined_success: float
    detected_invalid: float | None = None
    false_positive: float | None = None
    n_smiles: int = 0
    n_faulty: int = 0

    def to_json(self) -> dict:
        return asdict(self)

    def to_table(self) -> str:
        cols = [
            ("N", str(self.n)),
            ("Format Adherence (%)", f"{self.format_adherence:.1f}"),
            ("Chemical Validity (%)", f"{self.chemical_validity:.1f}"),
            ("Synthesis Validity (%)", f"{self.synthesis_validity:.1f}"),
            ("Combined Success (%)", f"{self.combined_success:.1f}"),
        ]
        if self.detected_invalid is not None:
            cols.append(("Invalid Detected (%)", f"{self.detected_invalid:.1f}"))
            cols.append(("False Positive (%)", f"{self.false_positive:.1f}"))
        widths = [max(len(h), len(v)) for h, v in cols]
        head = "  ".join(h.rjust(w) for (h, _), w in zip(cols, widths))
        body = "  ".join(v.rjust(w) for (_, v), w in zip(cols, widths))
        return head + "\n" + body


def _pct(num: int, den: int) -> float:
    return 100.0 * num / den if den else 0.0


def _parsed(text: str, protocol: Protocol) -> SynthesisPathway | None:
    if not check_format(text, protocol).adherent:
        return None
    pathway, _ = extract_pathway(text, protocol)
    return pathway


def eval_corpus(corpus: Sequence[EvalRecord], protocol: Protocol = Protocol.BULLETS) -> MetricsReport:
    """Format adherence over records; chemical validity over every SMILES in adherent responses;
    synthesis validity over adherent pathways; combined = adherence x validity / 100."""
    if not corpus:
        raise EmptyCorpus("corpus has no records")
    adherent = smiles_total = smiles_valid = pathways_valid = 0
    for rec in corpus:
        pathway = _parsed(rec.response_text, protocol)
        if pathway is None:
            continue
        adherent += 1
        for smi in pathway.molecules:
            smiles_total += 1
            smiles_valid += validate_chemistry(smi).ok
        pathways_valid += validate_pathway(pathway).valid
    fa = _pct(adherent, len(corpus))
    cv = _pct(smiles_valid, smiles_total)
    return MetricsReport(
        n=len(corpus),
        format_adherence=fa,
        chemical_validity=cv,
        synthesis_validity=_pct(pathways_valid, adherent),
        combined_success=fa * cv / 100.0,
        n_smiles=smiles_total,
    )


# ---- fault injection ------------------------------------------------------

_VALENCE_BOMB = "(F)" * 7  # more bonds than any supported element allows


def _after_first_atom(smiles: str) -> int:
    """Insertion offset just past the first atom and its ring-closure labels."""
    toks = tokenize(smiles)
    k = next(i for i, t in enumerate(toks) if t.kind in (TokenKind.ORGANIC_ATOM, TokenKind.BRACKET_ATOM))
    end = toks[k].position + len(toks[k].text)
    k += 1
    while k < len(toks):
        t = toks[k]
        if t.kind is TokenKind.RING_CLOSURE:
            end = t.position + len(t.text)
            k += 1
        elif t.kind is TokenKind.BOND and k + 1 < len(toks) and toks[k + 1].kind is TokenKind.RING_CLOSURE:
            k += 1
        else:
            break
    return end


def syntax_fault(smiles: str) -> str:
    """Unbalance the parentheses by opening a branch that never closes."""
    cut = _after_first_atom(smiles)
    return smiles[:cut] + "(" + smiles[cut:]


def chemistry_fault(smiles: str) -> str:
    """Overload the first atom with fluorines; the string stays syntactically legal."""
    cut = _after_first_atom(smiles)
    return smiles[:cut] + _VALENCE_BOMB + smiles[cut:]


def format_fault(text: str) -> str:
    """Strip the bullet markers."""
    return "\n".join(ln.strip().lstrip("*").strip() for ln in text.splitlines())


def _mutate_molecule(text: str, rng: random.Random, edit) -> str | None:
    items = parse_bullets(text)
    slots = [i for i in range(0, len(items), 2) if validate_syntax(strip_template_brackets(items[i])).ok]
    if not slots:
        return None
    i = rng.choice(slots)
    items[i] = edit(strip_template_brackets(items[i]))
    return render_bullets(items)


def inject_failures(
    corpus: Sequence[EvalRecord], rates: Mapping[Fault, float], seed: int
) -> list[EvalRecord]:
    """Seeded fault injection, at most one fault per record.

    Kinds are tried in the order Syntax, Chemistry, Format; each fires with
    its own probability. Unlabelled input records are taken to be clean.
    """
    for kind, p in rates.items():
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"rate for {kind.value} outside [0, 1]")
    rng = random.Random(seed)
    out = []
    for rec in corpus:
        base = rec.labels or Labels(True, True)
        fault, text = Fault.NONE, rec.response_text
        for kind in (Fault.SYNTAX, Fault.CHEMISTRY, Fault.FORMAT):
            if rng.random() >= rates.get(kind, 0.0):
                continue
            if kind is Fault.FORMAT:
                mutated = format_fault(text) if parse_bullets(text) else None
            else:
                mutated = _mutate_molecule(text, rng, syntax_fault if kind is Fault.SYNTAX else chemistry_fault)
            if mutated is not None:
                fault, text = kind, mutated
                break
        labels = Labels(
            base.format_ok and fault is not Fault.FORMAT,
            base.chem_valid and fault not in (Fault.SYNTAX, Fault.CHEMISTRY),
            fault if fault is not Fault.NONE else base.injected_fault,
        )
        out.append(replace(rec, response_text=text, labels=labels))
    return out


# ---- validator ablation ---------------------------------------------------


def _lenient_molecules(text: str) -> list[str]:
    items = parse_bullets(text)
    return [strip_template_brackets(items[i]) for i in range(0, len(items), 2)]


def flagged(text: str, config: ValidationConfig, protocol: Protocol = Protocol.BULLETS) -> bool:
    """Whether a validator subset rejects a response.

    SyntaxOnly and ChemistryOnly look at the bullet items leniently; Full is
    their union plus strict format and pathway checks, so it never detects
    less than either.
    """
    if config is ValidationConfig.NONE:
        return False
    molecules = _lenient_molecules(text)
    syntax_bad = any(not validate_syntax(m).ok for m in molecules)
    if config is ValidationConfig.SYNTAX_ONLY:
        return syntax_bad
    chem_bad = any(not validate_chemistry(m).ok for m in molecules)
    if config is ValidationConfig.CHEMISTRY_ONLY:
        return chem_bad
    if syntax_bad or chem_bad:
        return True
    pathway = _parsed(text, protocol)
    return pathway is None or not validate_pathway(pathway).valid


def ablation_validation(
    corpus: Sequence[EvalRecord], config: ValidationConfig, protocol: Protocol = Protocol.BULLETS
) -> MetricsReport:
    """Detection rate on injected faults and false-positive rate on clean records."""
    if any(r.labels is None for r in corpus):
        raise MissingLabels("every record needs labels")
    base = eval_corpus(corpus, protocol)
    faulty = [r for r in corpus if r.labels.injected_fault is not Fault.NONE]  # type: ignore[union-attr]
    clean = [r for r in corpus if r.labels.injected_fault is Fault.NONE]  # type: ignore[union-attr]
    hit = sum(flagged(r.response_text, config, protocol) for r in faulty)
    false = sum(flagged(r.response_text, config, protocol) for r in clean)
    return replace(
        base,
        detected_invalid=_pct(hit, len(faulty)),
        false_positive=_pct(false, len(clean)),
        n_faulty=len(faulty),
    )


# ---- failure taxonomy -----------------------------------------------------


def _chem_category(message: str) -> FailureCategory:
    if VALENCE_EXCEEDED in message:
        return FailureCategory.VALENCE_VIOLATION
    if any(r in message for r in (KEKULIZATION_IMPOSSIBLE, HUCKEL_VIOLATION, AROMATIC_NOT_IN_RING)):
        return FailureCategory.AROMATICITY_FAILURE
    return FailureCategory.SYNTAX_ERROR


def classify_failure(rec: EvalRecord, protocol: Protocol = Protocol.BULLETS) -> FailureCategory | None:
    """First failure of a response in stage order, or None when it passes everything."""
    text = rec.response_text
    try:
        pathway, _ = extract_pathway(text, protocol)
    except FormatFailure as exc:
        if exc.reason in ("no bullets", "empty response") or exc.reason.startswith("invalid JSON"):
            return FailureCategory.CONVERSATIONAL_NOISE
        if exc.reason == "expected a SMILES string":
            items = parse_bullets(text)
            item = items[exc.position] if exc.position < len(items) else ""
            if any(c.isspace() for c in strip_template_brackets(item)):
                return FailureCategory.CONVERSATIONAL_NOISE
            return FailureCategory.SYNTAX_ERROR
        return FailureCategory.PATHWAY_SHAPE
    for smi in pathway.molecules:
        verdict = validate_chemistry(smi)
        if not verdict.ok:
            return _chem_category(verdict.message or "")
    pv = validate_pathway(pathway)
    if not pv.valid:
        if any("shape" in m for m in pv.messages):
            return FailureCategory.PATHWAY_SHAPE
        return FailureCategory.SHORT_REACTION
    start = validate_chemistry(rec.task.start_smiles)
    if start.ok and not check_anchoring(pathway, start.molecule):  # type: ignore[arg-type]
        return FailureCategory.NOT_ANCHORED
    return None


def failure_taxonomy(corpus: Iterable[EvalRecord], protocol: Protocol = Protocol.BULLETS) -> dict[str, int]:
    counts: Counter[str] = Counter()
    for rec in corpus:
        cat = classify_failure(rec, protocol)
        if cat is not None:
            counts[cat.value] += 1
    return dict(sorted(counts.items()))


# ---- single-string classification ---------------------------------------

LABEL_VALID = "valid"
_SYNTAX_LABELS = {
    "Invalid character detected": "invalid_character",
    "Unbalanced parentheses": "unbalanced_parentheses",
    "Unbalanced brackets": "unbalanced_brackets",
    "Unmatched ring closure": "unmatched_ring_closure",
}


def classify_string(text: str, kind: str = "smiles") -> str:
    """Label a lone SMILES string or reaction description the way the validators see it.

    SMILES labels: valid, invalid_character, unbalanced_parentheses,
    unbalanced_brackets, unmatched_ring_closure, valence_exceeded,
    kekulization_impossible, huckel_violation, aromatic_not_in_ring,
    unsupported_element, unparseable. Reaction labels: valid, short_reaction.
    """
    if kind == "reaction":
        verdict = validate_pathway(SynthesisPathway.from_items(["C", text, "C"]))
        return LABEL_VALID if verdict.valid else "short_reaction"
    syntax = validate_syntax(text)
    if not syntax.ok:
        return _SYNTAX_LABELS[syntax.message]  # type: ignore[index]
    verdict = validate_chemistry(text)
    if verdict.ok:
        return LABEL_VALID
    msg = verdict.message or ""
    for reason in (VALENCE_EXCEEDED, KEKULIZATION_IMPOSSIBLE, HUCKEL_VIOLATION, AROMATIC_NOT_IN_RING, "unsupported element"):
        if reason in msg:
            return {"Hückel violation": "huckel_violation"}.get(reason, reason.replace(" ", "_"))
    return "unparseable"
