"""End-to-end design task: input check, prompt, LLM call, parsing, validation, properties.

Stages run strictly in order and a rejection stops the run at that stage.
Transport failures are raised as :class:`TransportError`, never turned into
rejections, so they can be excluded from rate denominators.
"""

from __future__ import annotations

import enum
import json
import subprocess
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from validmol.llm_client import DEFAULT_MODEL, ChatRequest, LlmClient, TransportConfig, TransportError
from validmol.pathway import PathwayVerdict, SynthesisPathway, check_anchoring, validate_pathway
from validmol.prompts import InvalidInput, get_template, render_prompt
from validmol.properties import PropertyProfile, morgan_fingerprint, property_profile, tanimoto
from validmol.response_parser import FormatVerdict, Protocol, RawResponse, check_format, extract_pathway
from validmol.smiles import validate_chemistry

__all__ = [
    "CandidateResult",
    "DesignTask",
    "Direction",
    "NonPositiveValue",
    "ObjectiveKind",
    "PredictorOutcome",
    "PredictorSpec",
    "PropertyDelta",
    "Status",
    "TransportError",
    "property_delta",
    "run_external_predictors",
    "run_task",
    "run_tasks",
]

NOT_ANCHORED = "first molecule is not the starting molecule"


class ObjectiveKind(enum.Enum):
    TARGET_AFFINITY = "TargetAffinity"
    SELECTIVITY = "Selectivity"
    SOLUBILITY = "Solubility"
    METABOLIC_STABILITY = "MetabolicStability"
    BBB_PENETRATION = "BbbPenetration"
    SYNTHETIC_ACCESSIBILITY = "SyntheticAccessibility"


class Status(enum.Enum):
    ACCEPTED = "Accepted"
    REJECTED_FORMAT = "RejectedFormat"
    REJECTED_CHEMISTRY = "RejectedChemistry"
    REJECTED_PATHWAY = "RejectedPathway"
    REJECTED_INPUT = "RejectedInput"


@dataclass(frozen=True)
class DesignTask:
    start_smiles: str
    objective: str
    objective_kind: ObjectiveKind = ObjectiveKind.TARGET_AFFINITY
    prompt_version: str = "V4"

    def __post_init__(self) -> None:
        if not self.objective or not self.objective.strip():
            raise ValueError("objective must be non-empty")

    def to_json(self) -> dict:
        return {
            "start_smiles": self.start_smiles,
            "objective": self.objective,
            "objective_kind": self.objective_kind.value,
            "prompt_version": self.prompt_version,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DesignTask":
        return cls(
            obj["start_smiles"],
            obj["objective"],
            ObjectiveKind(obj.get("objective_kind", ObjectiveKind.TARGET_AFFINITY.value)),
            obj.get("prompt_version", "V4"),
        )


@dataclass(frozen=True)
class CandidateResult:
    """Outcome of one task, rejected or not, with diagnostics from every stage reached.

    ``start_profile`` is None only for RejectedInput (no valid molecule to describe).
    """

    task: DesignTask
    raw: RawResponse
    format: FormatVerdict
    status: Status
    pathway: SynthesisPathway | None = None
    pathway_verdict: PathwayVerdict | None = None
    anchored: bool | None = None
    start_profile: PropertyProfile | None = None
    final_profile: PropertyProfile | None = None
    similarity: float | None = None
    external: dict[str, float] = field(default_factory=dict)
    external_errors: dict[str, str] = field(default_factory=dict)
    diagnostics: tuple[str, ...] = ()

    @property
    def final_smiles(self) -> str | None:
        if self.pathway is None or not self.pathway.molecules:
            return None
        return self.pathway.molecules[-1]

    def to_json(self) -> dict:
        return {
            "task": self.task.to_json(),
            "raw": {"text": self.raw.text, "transport_meta": self.raw.transport_meta},
            "format": {"adherent": self.format.adherent, "reason": self.format.reason},
            "status": self.status.value,
            "pathway": None if self.pathway is None else self.pathway.to_json(),
            "pathway_verdict": None
            if self.pathway_verdict is None
            else {"valid": self.pathway_verdict.valid, "messages": list(self.pathway_verdict.messages)},
            "anchored": self.anchored,
            "start_profile": None if self.start_profile is None else self.start_profile.to_json(),
            "final_profile": None if self.final_profile is None else self.final_profile.to_json(),
            "similarity": self.similarity,
            "external": dict(self.external),
            "external_errors": dict(self.external_errors),
            "diagnostics": list(self.diagnostics),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, obj: dict) -> "CandidateResult":
        pv = obj.get("pathway_verdict")
        return cls(
            task=DesignTask.from_json(obj["task"]),
            raw=RawResponse(obj["raw"]["text"], obj["raw"].get("transport_meta", {})),
            format=FormatVerdict(obj["format"]["adherent"], obj["format"].get("reason")),
            status=Status(obj["status"]),
            pathway=None if obj.get("pathway") is None else SynthesisPathway.from_json(obj["pathway"]),
            pathway_verdict=None if pv is None else PathwayVerdict(pv["valid"], tuple(pv["messages"])),
            anchored=obj.get("anchored"),
            start_profile=None if obj.get("start_profile") is None else PropertyProfile.from_json(obj["start_profile"]),
            final_profile=None if obj.get("final_profile") is None else PropertyProfile.from_json(obj["final_profile"]),
            similarity=obj.get("similarity"),
            external=dict(obj.get("external", {})),
            external_errors=dict(obj.get("external_errors", {})),
            diagnostics=tuple(obj.get("diagnostics", ())),
        )


class Direction(enum.Enum):
    LOWER_IS_BETTER = "LowerIsBetter"
    HIGHER_IS_BETTER = "HigherIsBetter"


class NonPositiveValue(ValueError):
    pass


@dataclass(frozen=True)
class PropertyDelta:
    name: str
    start: float
    modified: float
    fold: float
    direction: Direction


def property_delta(start: float, modified: float, direction: Direction, name: str = "") -> PropertyDelta:
    """Fold improvement: start/modified when lower is better, modified/start otherwise.

    >>> round(property_delta(250, 15, Direction.LOWER_IS_BETTER).fold, 1)
    16.7
    """
    if start <= 0 or modified <= 0:
        raise NonPositiveValue(f"fold needs positive values, got {start} and {modified}")
    fold = start / modified if direction is Direction.LOWER_IS_BETTER else modified / start
    return PropertyDelta(name, start, modified, fold, direction)


@dataclass(frozen=True)
class PredictorSpec:
    """External property predictor: a command reading SMILES lines on stdin and
    writing ``{"smiles": ..., "value": ...}`` JSON lines on stdout."""

    name: str
    command: tuple[str, ...]
    timeout: float = 30.0


class PredictorTimeout(RuntimeError):
    pass


class PredictorProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class PredictorOutcome:
    values: dict[str, float]
    errors: dict[str, str]


def _call_predictor(spec: PredictorSpec, smiles: str) -> float:
    try:
        proc = subprocess.run(
            list(spec.command), input=smiles + "\n", capture_output=True, text=True, timeout=spec.timeout
        )
    except subprocess.TimeoutExpired as exc:
        raise PredictorTimeout(f"no reply within {spec.timeout} s") from exc
    except OSError as exc:
        raise PredictorProtocolError(f"cannot start: {exc.strerror}") from exc
    if proc.returncode != 0:
        raise PredictorProtocolError(f"exit status {proc.returncode}")
    lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
    if len(lines) != 1:
        raise PredictorProtocolError(f"expected 1 output line, got {len(lines)}")
    try:
        obj = json.loads(lines[0])
        value = float(obj["value"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise PredictorProtocolError("output is not a {smiles, value} object") from exc
    if obj.get("smiles") != smiles:
        raise PredictorProtocolError("output SMILES does not echo the input")
    return value


def run_external_predictors(smiles: str, predictors: Sequence[PredictorSpec]) -> PredictorOutcome:
    """Run each predictor in isolation; failures are recorded, never raised."""
    values: dict[str, float] = {}
    errors: dict[str, str] = {}
    for spec in predictors:
        try:
            values[spec.name] = _call_predictor(spec, smiles)
        except (PredictorTimeout, PredictorProtocolError) as exc:
            errors[spec.name] = f"{type(exc).__name__}: {exc}"
    return PredictorOutcome(values, errors)


_NOT_EVALUATED = FormatVerdict(False, "not evaluated")


def run_task(
    task: DesignTask,
    transport: TransportConfig | LlmClient,
    *,
    predictors: Sequence[PredictorSpec] = (),
    model: str = DEFAULT_MODEL,
    temperature: float = 0.0,
    observer: Callable[[str], None] | None = None,
) -> CandidateResult:
    """Run one task through every stage; ``observer`` is told each stage name as it starts."""
    note = observer or (lambda stage: None)
    if isinstance(transport, LlmClient):
        return _run(task, transport, predictors, model, temperature, note)
    with LlmClient(transport) as client:
        return _run(task, client, predictors, model, temperature, note)


def _run(task, client, predictors, model, temperature, note) -> CandidateResult:
    note("validate_input")
    start = validate_chemistry(task.start_smiles)
    if not start.ok:
        return CandidateResult(task, RawResponse(""), _NOT_EVALUATED, Status.REJECTED_INPUT, diagnostics=(start.message,))
    start_mol = start.molecule

    note("render_prompt")
    template = get_template(task.prompt_version)
    try:
        prompt = render_prompt(template, task.start_smiles, task.objective)
    except InvalidInput as exc:
        return CandidateResult(task, RawResponse(""), _NOT_EVALUATED, Status.REJECTED_INPUT, diagnostics=(str(exc),))

    note("complete")
    reply = client.complete(ChatRequest(prompt, model, temperature))
    raw = RawResponse(reply.text, {"attempt": reply.attempt, "latency": round(reply.latency, 6)})
    start_profile = property_profile(start_mol)

    note("check_format")
    protocol = template.protocol if template.protocol is not Protocol.FREEFORM else Protocol.BULLETS
    fmt = check_format(raw, protocol)
    if not fmt.adherent:
        return CandidateResult(task, raw, fmt, Status.REJECTED_FORMAT, start_profile=start_profile, diagnostics=(fmt.reason,))
    pathway, _ = extract_pathway(raw, protocol)

    note("validate_pathway")
    verdict = validate_pathway(pathway)
    anchored = check_anchoring(pathway, start_mol)

    final = validate_chemistry(pathway.molecules[-1]) if pathway.molecules else None
    final_profile = similarity = None
    external: dict[str, float] = {}
    external_errors: dict[str, str] = {}
    if final is not None and final.ok:
        note("properties")
        final_profile = property_profile(final.molecule)
        similarity = tanimoto(morgan_fingerprint(start_mol), morgan_fingerprint(final.molecule))
        if predictors:
            note("external_predictors")
            outcome = run_external_predictors(pathway.molecules[-1], predictors)
            external, external_errors = outcome.values, outcome.errors

    diagnostics = list(verdict.messages)
    if not anchored:
        diagnostics.append(NOT_ANCHORED)
    if any("Invalid molecule" in m for m in verdict.messages):
        status = Status.REJECTED_CHEMISTRY
    elif diagnostics:
        status = Status.REJECTED_PATHWAY
    else:
        status = Status.ACCEPTED
    return CandidateResult(
        task,
        raw,
        fmt,
        status,
        pathway=pathway,
        pathway_verdict=verdict,
        anchored=anchored,
        start_profile=start_profile,
        final_profile=final_profile,
        similarity=similarity,
        external=external,
        external_errors=external_errors,
        diagnostics=tuple(diagnostics),
    )


def run_tasks(
    tasks: Sequence[DesignTask], transport: TransportConfig, workers: int | None = None, **kwargs
) -> list[CandidateResult | TransportError]:
    """Run tasks concurrently on one shared client; results keep input order.

    A task whose transport failed yields the TransportError in its slot.
    """

    def one(task: DesignTask) -> CandidateResult | TransportError:
        try:
            return run_task(task, client, **kwargs)
        except TransportError as exc:
            return exc

    with LlmClient(transport) as client:
        with ThreadPoolExecutor(max_workers=workers or transport.max_in_flight) as pool:
            return list(pool.map(one, tasks))
