"""Turn raw LLM text into pathways: the '*' bullet protocol and the JSON schema protocol."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from validmol.pathway import PathwayStep, SynthesisPathway
from validmol.smiles import LexError, tokenize, validate_syntax


class Protocol(enum.Enum):
    FREEFORM = "Freeform"
    BULLETS = "Bullets"
    JSON = "Json"


@dataclass(frozen=True)
class RawResponse:
    text: str
    transport_meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FormatVerdict:
    adherent: bool
    reason: str | None = None


class FormatFailure(ValueError):
    def __init__(self, position: int, reason: str):
        super().__init__(f"position {position}: {reason}")
        self.position = position
        self.reason = reason


def _text(t: RawResponse | str) -> str:
    return t.text if isinstance(t, RawResponse) else t


def parse_bullets(t: RawResponse | str) -> list[str]:
    """Items of every line that starts with '*', marker removed and trimmed.

    Lines without the marker are dropped.

    >>> parse_bullets("* [C]\\n* alkylation reaction\\n* [CC]")
    ['[C]', 'alkylation reaction', '[CC]']
    """
    items = []
    for line in _text(t).splitlines():
        clean = line.strip()
        if clean.startswith("*"):
            items.append(clean[1:].strip())
    return items


def render_bullets(items: list[str]) -> str:
    return "\n".join(f"* {item}" for item in items)


def _bullet_blocks(text: str) -> list[list[str]]:
    """Runs of bullet lines separated by blank lines."""
    blocks: list[list[str]] = []
    current: list[str] = []
    gap = False
    for line in text.splitlines():
        clean = line.strip()
        if clean.startswith("*"):
            if gap and current:
                blocks.append(current)
                current = []
            gap = False
            current.append(clean[1:].strip())
        elif not clean:
            gap = True
    if current:
        blocks.append(current)
    return blocks


def _lexable(s: str) -> bool:
    if not validate_syntax(s).ok:
        return False
    try:
        tokenize(s)
    except LexError:
        return False
    return True


def strip_template_brackets(item: str) -> str:
    """Drop the decorative '[...]' the prompt template puts around SMILES.

    Stripped only when the interior contains spaces, or when the whole item
    does not lex as SMILES but the interior does. Real bracket atoms such as
    ``[NH4+]`` are left alone.
    """
    if len(item) > 2 and item.startswith("[") and item.endswith("]"):
        inner = item[1:-1].strip()
        if " " in inner:
            return inner
        if not _lexable(item) and _lexable(inner):
            return inner
    return item


def is_smiles_like(item: str) -> bool:
    """Syntax-level test used for classification: no spaces, valid alphabet and balance, lexable."""
    return bool(item) and not any(c.isspace() for c in item) and _lexable(item)


def classify_items(items: list[str]) -> SynthesisPathway:
    """Even positions must be syntactically valid SMILES, odd ones non-empty text.

    Chemistry is deliberately not consulted here.
    """
    if not items:
        raise FormatFailure(0, "empty response")
    steps = []
    for i, item in enumerate(items):
        if i % 2 == 0:
            smiles = strip_template_brackets(item)
            if not is_smiles_like(smiles):
                raise FormatFailure(i, "expected a SMILES string")
            steps.append(PathwayStep.molecule(smiles))
        else:
            if not item:
                raise FormatFailure(i, "empty reaction description")
            steps.append(PathwayStep.reaction(item))
    if len(items) % 2 == 0:
        raise FormatFailure(len(items) - 1, "pathway ends on a reaction")
    return SynthesisPathway(tuple(steps))


_STEP_KEYS = {"reaction": "details", "product": "smiles"}


def parse_json_response(t: RawResponse | str) -> SynthesisPathway:
    """Parse the JSON schema protocol into a pathway (starting material first)."""
    text = _text(t).strip()
    # tolerate a fenced code block around the object
    if text.startswith("```"):
        text = text.strip("`")
        if text.startswith("json"):
            text = text[4:]
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatFailure(0, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise FormatFailure(0, "top level must be an object")
    for key in ("starting_material", "objective_achieved", "pathway"):
        if key not in obj:
            raise FormatFailure(0, f"missing key {key!r}")
    if not isinstance(obj["starting_material"], str):
        raise FormatFailure(0, "starting_material must be a string")
    if not isinstance(obj["objective_achieved"], str):
        raise FormatFailure(0, "objective_achieved must be a string")
    if not isinstance(obj["pathway"], list):
        raise FormatFailure(0, "pathway must be an array")
    steps = [PathwayStep.molecule(obj["starting_material"])]
    for i, entry in enumerate(obj["pathway"], start=1):
        if not isinstance(entry, dict):
            raise FormatFailure(i, "pathway entries must be objects")
        kind = entry.get("step_type")
        if kind not in _STEP_KEYS:
            raise FormatFailure(i, "unknown step_type")
        key = _STEP_KEYS[kind]
        if not isinstance(entry.get(key), str):
            raise FormatFailure(i, f"missing {key!r} for {kind} step")
        if kind == "reaction":
            steps.append(PathwayStep.reaction(entry[key]))
        else:
            steps.append(PathwayStep.molecule(entry[key]))
    return SynthesisPathway(tuple(steps))


def extract_pathway(t: RawResponse | str, protocol: Protocol) -> tuple[SynthesisPathway, str | None]:
    """Parse + classify under a protocol; returns the pathway and an optional note.

    Raises FormatFailure when the response does not follow the protocol.
    """
    text = _text(t)
    if protocol is Protocol.JSON:
        pathway = parse_json_response(text)
        if not pathway.well_shaped:
            raise FormatFailure(len(pathway) - 1, "steps do not alternate")
        for i, step in enumerate(pathway.steps):
            if i % 2 == 0 and not is_smiles_like(step.smiles or ""):
                raise FormatFailure(i, "expected a SMILES string")
        return pathway, None
    blocks = _bullet_blocks(text)
    if not blocks:
        raise FormatFailure(0, "no bullets")
    note = None
    if len(blocks) > 1:
        note = f"ignored {len(blocks) - 1} trailing bullet block(s)"
    return classify_items(blocks[0]), note


def check_format(t: RawResponse | str, protocol: Protocol = Protocol.BULLETS) -> FormatVerdict:
    """Strict adherence: the response must parse and classify end to end."""
    if protocol is Protocol.FREEFORM:
        protocol = Protocol.BULLETS
    try:
        _, note = extract_pathway(t, protocol)
    except FormatFailure as exc:
        return FormatVerdict(False, exc.reason if exc.position == 0 and exc.reason in (
            "no bullets", "empty response") else f"position {exc.position}: {exc.reason}")
    return FormatVerdict(True, note)
