"""Synthesis pathway checks: alternating molecule/reaction shape, per-step validity, anchoring."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from validmol.smiles import Molecule, canonical_smiles, validate_chemistry

MIN_REACTION_LENGTH = 5


class StepKind(enum.Enum):
    MOLECULE = "MoleculeStep"
    REACTION = "ReactionStep"


@dataclass(frozen=True)
class PathwayStep:
    kind: StepKind
    smiles: str | None = None
    description: str | None = None

    def __post_init__(self) -> None:
        if self.kind is StepKind.MOLECULE and (self.smiles is None or self.description is not None):
            raise ValueError("MoleculeStep carries smiles only")
        if self.kind is StepKind.REACTION and (self.description is None or self.smiles is not None):
            raise ValueError("ReactionStep carries description only")

    @classmethod
    def molecule(cls, smiles: str) -> "PathwayStep":
        return cls(StepKind.MOLECULE, smiles=smiles)

    @classmethod
    def reaction(cls, description: str) -> "PathwayStep":
        return cls(StepKind.REACTION, description=description)

    @property
    def text(self) -> str:
        return self.smiles if self.kind is StepKind.MOLECULE else self.description  # type: ignore[return-value]

    def to_json(self) -> dict:
        if self.kind is StepKind.MOLECULE:
            return {"kind": self.kind.value, "smiles": self.smiles}
        return {"kind": self.kind.value, "description": self.description}

    @classmethod
    def from_json(cls, obj: dict) -> "PathwayStep":
        if obj["kind"] == StepKind.MOLECULE.value:
            return cls.molecule(obj["smiles"])
        return cls.reaction(obj["description"])


@dataclass(frozen=True)
class SynthesisPathway:
    """Ordered steps; well-formed pathways alternate and start/end on molecules.

    Shape is not enforced on construction because pathways come straight
    from LLM output; :func:`validate_pathway` reports violations instead.
    """

    steps: tuple[PathwayStep, ...]

    @classmethod
    def from_items(cls, items: list[str]) -> "SynthesisPathway":
        """Even positions are molecules, odd positions reactions."""
        return cls(
            tuple(
                PathwayStep.molecule(t) if i % 2 == 0 else PathwayStep.reaction(t)
                for i, t in enumerate(items)
            )
        )

    @property
    def molecules(self) -> list[str]:
        return [s.smiles for s in self.steps if s.kind is StepKind.MOLECULE]  # type: ignore[misc]

    @property
    def well_shaped(self) -> bool:
        if not self.steps:
            return False
        for i, step in enumerate(self.steps):
            expected = StepKind.MOLECULE if i % 2 == 0 else StepKind.REACTION
            if step.kind is not expected:
                return False
        return self.steps[-1].kind is StepKind.MOLECULE

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]

    @classmethod
    def from_json(cls, data: list[dict]) -> "SynthesisPathway":
        return cls(tuple(PathwayStep.from_json(d) for d in data))

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class PathwayVerdict:
    valid: bool
    messages: tuple[str, ...] = field(default_factory=tuple)


def validate_pathway(pathway: SynthesisPathway) -> PathwayVerdict:
    """Check every step and accumulate all failures.

    Step numbers are ``i // 2``. Even slots must hold chemically valid
    molecules; odd slots need a reaction description of at least five
    characters. Steps of the wrong kind, empty pathways and pathways ending
    on a reaction are reported as shape violations.
    """
    messages: list[str] = []
    steps = pathway.steps
    if not steps:
        return PathwayVerdict(False, ("Step 0: pathway shape violation",))
    for i, step in enumerate(steps):
        k = i // 2
        if i % 2 == 0:
            if step.kind is not StepKind.MOLECULE:
                messages.append(f"Step {k}: pathway shape violation")
                continue
            if not validate_chemistry(step.smiles).ok:  # type: ignore[arg-type]
                messages.append(f"Step {k}: Invalid molecule - {step.smiles}")
        else:
            if step.kind is not StepKind.REACTION:
                messages.append(f"Step {k}: pathway shape violation")
                continue
            if len(step.description) < MIN_REACTION_LENGTH:  # type: ignore[arg-type]
                messages.append(f"Step {k}: Insufficient reaction description")
    if len(steps) % 2 == 0:
        messages.append(f"Step {(len(steps) - 1) // 2}: pathway shape violation")
    return PathwayVerdict(not messages, tuple(messages))


def check_anchoring(pathway: SynthesisPathway, start: Molecule) -> bool:
    """True when the first pathway molecule is the same compound as ``start``."""
    if not pathway.steps or pathway.steps[0].kind is not StepKind.MOLECULE:
        return False
    first = validate_chemistry(pathway.steps[0].smiles)  # type: ignore[arg-type]
    if not first.ok:
        return False
    return canonical_smiles(first.molecule) == canonical_smiles(start)  # type: ignore[arg-type]
