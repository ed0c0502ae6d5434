"""Prompt templates (versions V1-V5, ablations, custom files) and rendering."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from validmol.response_parser import Protocol
from validmol.smiles import validate_chemistry

SMILES_SLOT = "[SMILES]"
OBJECTIVE_SLOT = "[OBJECTIVE]"
# "[[SMILES]]" in a template file is an escaped literal "[SMILES]" (an output slot, not an input)
_TOKEN = re.compile(r"\[\[(SMILES|OBJECTIVE)\]\]|\[(SMILES|OBJECTIVE)\]")


class PromptVersion(enum.Enum):
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"
    V4 = "V4"
    V5 = "V5"
    CUSTOM = "Custom"


_PROTOCOLS = {
    PromptVersion.V1: Protocol.FREEFORM,
    PromptVersion.V2: Protocol.BULLETS,
    PromptVersion.V3: Protocol.BULLETS,
    PromptVersion.V4: Protocol.BULLETS,
    PromptVersion.V5: Protocol.JSON,
}

ABLATIONS = ("no_role", "no_format", "no_constraints", "no_synthesis_guidance")


class InvalidInput(ValueError):
    pass


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    version: PromptVersion
    body: str
    protocol: Protocol
    name: str = ""

    def __post_init__(self) -> None:
        counts = {"SMILES": 0, "OBJECTIVE": 0}
        for m in _TOKEN.finditer(self.body):
            if m.group(2):
                counts[m.group(2)] += 1
        for slot, n in counts.items():
            if n != 1:
                raise TemplateError(f"template {self.name or self.version.value} has {n} [{slot}] placeholders")


def _read(rel: str) -> str:
    return resources.files("validmol.data").joinpath("prompts/" + rel).read_text().rstrip("\n")


@lru_cache(maxsize=None)
def builtin_templates() -> dict[PromptVersion, PromptTemplate]:
    return {
        v: PromptTemplate(v, _read(f"{v.value.lower()}.txt"), p, name=v.value)
        for v, p in _PROTOCOLS.items()
    }


def ablation_template(name: str) -> PromptTemplate:
    """One of the reconstructed V4 ablations (component deleted)."""
    if name not in ABLATIONS:
        raise KeyError(name)
    return PromptTemplate(PromptVersion.CUSTOM, _read(f"ablations/{name}.txt"), Protocol.BULLETS, name=name)


def load_template(path: str | Path, protocol: Protocol = Protocol.BULLETS) -> PromptTemplate:
    p = Path(path)
    return PromptTemplate(PromptVersion.CUSTOM, p.read_text().rstrip("\n"), protocol, name=p.stem)


def get_template(version: str | PromptVersion) -> PromptTemplate:
    if isinstance(version, PromptVersion):
        return builtin_templates()[version]
    key = version.upper()
    for v in PromptVersion:
        if v.value.upper() == key and v is not PromptVersion.CUSTOM:
            return builtin_templates()[v]
    if version in ABLATIONS:
        return ablation_template(version)
    return load_template(version)


def render_prompt(template: PromptTemplate, smiles: str, objective: str) -> str:
    """Substitute the input SMILES and objective in a single pass.

    The SMILES must pass chemical validation and the objective must be
    non-empty; otherwise InvalidInput is raised before anything is sent.
    """
    if not objective or not objective.strip():
        raise InvalidInput("objective must be non-empty")
    verdict = validate_chemistry(smiles)
    if not verdict.ok:
        raise InvalidInput(verdict.message)

    def sub(m: re.Match) -> str:
        if m.group(1):
            return f"[{m.group(1)}]"
        return smiles if m.group(2) == "SMILES" else objective

    return _TOKEN.sub(sub, template.body)
