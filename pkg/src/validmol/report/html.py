"""Self-contained XHTML report for one validated candidate."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from xml.sax.saxutils import escape

from validmol.pathway import StepKind, SynthesisPathway
from validmol.pipeline import CandidateResult, PropertyDelta
from validmol.properties import PropertyProfile
from validmol.report.depict import depict_molecule
from validmol.smiles import mol_from_smiles

_STYLE = (
    "body{font-family:sans-serif;margin:2em;max-width:60em}"
    "table{border-collapse:collapse}td,th{border:1px solid #999;padding:.3em .6em;text-align:right}"
    "th:first-child,td:first-child{text-align:left}"
    ".step{margin:1em 0;padding:.5em;border-left:3px solid #4060a0}"
    ".reaction{margin:.5em 0 .5em 2em;font-style:italic}"
    ".smiles{font-family:monospace;word-break:break-all}"
)

_COLUMNS = ("MW", "logP", "HBD", "HBA", "SA score", "Lipinski violations", "Tanimoto to start")


@dataclass(frozen=True)
class ReportDocument:
    html: str
    images: tuple[str, ...]
    step_count: int


def _row(label: str, p: PropertyProfile, tanimoto: float | None) -> str:
    cells = [
        f"{p.mw:.2f}",
        f"{p.logp:.2f}",
        str(p.hbd),
        str(p.hba),
        f"{p.sa_score:.2f}",
        str(p.lipinski_violations),
        "" if tanimoto is None else f"{tanimoto:.3f}",
    ]
    return "<tr><td>" + escape(label) + "</td>" + "".join(f"<td>{c}</td>" for c in cells) + "</tr>"


def _change_row(a: PropertyProfile, b: PropertyProfile) -> str:
    diffs = [b.mw - a.mw, b.logp - a.logp, b.hbd - a.hbd, b.hba - a.hba, b.sa_score - a.sa_score]
    cells = [f"{d:+.2f}" for d in diffs] + [f"{b.lipinski_violations - a.lipinski_violations:+d}", ""]
    return "<tr><td>Change</td>" + "".join(f"<td>{c}</td>" for c in cells) + "</tr>"


def _property_table(
    start: PropertyProfile | None, final: PropertyProfile | None, similarity: float | None
) -> str:
    head = "<tr><th>Molecule</th>" + "".join(f"<th>{escape(c)}</th>" for c in _COLUMNS) + "</tr>"
    rows = []
    if start is not None:
        rows.append(_row("Starting molecule", start, 1.0))
    if final is not None:
        rows.append(_row("Final molecule", final, similarity))
    if start is not None and final is not None:
        rows.append(_change_row(start, final))
    return f'<table class="properties">{head}{"".join(rows)}</table>'


def _delta_table(deltas: Sequence[PropertyDelta]) -> str:
    if not deltas:
        return ""
    head = "<tr><th>Property</th><th>Start</th><th>Modified</th><th>Fold improvement</th></tr>"
    rows = "".join(
        f"<tr><td>{escape(d.name)}</td><td>{d.start:g}</td><td>{d.modified:g}</td><td>{d.fold:.1f}x</td></tr>"
        for d in deltas
    )
    return f'<table class="deltas">{head}{rows}</table>'


def render_report(
    pathway: SynthesisPathway,
    start: PropertyProfile | None,
    final: PropertyProfile | None,
    similarity: float | None = None,
    deltas: Sequence[PropertyDelta] = (),
    title: str = "Candidate report",
    objective: str | None = None,
) -> ReportDocument:
    """Header, property table, then the pathway: molecules get a numbered
    step with a picture and their SMILES, reactions get their description."""
    images: list[str] = []
    body: list[str] = []
    counter = 0
    for step in pathway.steps:
        if step.kind is StepKind.MOLECULE:
            counter += 1
            svg = depict_molecule(mol_from_smiles(step.smiles))  # type: ignore[arg-type]
            images.append(svg)
            body.append(
                f'<div class="step"><h3>Step {counter}</h3>{svg}'
                f'<p class="smiles">{escape(step.smiles)}</p></div>'  # type: ignore[arg-type]
            )
        else:
            body.append(f'<p class="reaction">{escape(step.description)}</p>')  # type: ignore[arg-type]
    header = f"<h1>{escape(title)}</h1>"
    if objective:
        header += f'<p class="objective">Objective: {escape(objective)}</p>'
    html = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<html xmlns="http://www.w3.org/1999/xhtml"><head><meta charset="UTF-8"/>'
        f"<title>{escape(title)}</title><style>{_STYLE}</style></head><body>"
        f"{header}<h2>Predicted properties</h2>{_property_table(start, final, similarity)}"
        f"{_delta_table(deltas)}<h2>Synthesis pathway</h2>{''.join(body)}</body></html>\n"
    )
    return ReportDocument(html, tuple(images), counter)


def render_candidate(result: CandidateResult, deltas: Sequence[PropertyDelta] = ()) -> ReportDocument:
    if result.pathway is None:
        raise ValueError(f"candidate has no pathway to render (status {result.status.value})")
    return render_report(
        result.pathway,
        result.start_profile,
        result.final_profile,
        result.similarity,
        deltas,
        title=f"Candidate for {result.task.start_smiles}",
        objective=result.task.objective,
    )
