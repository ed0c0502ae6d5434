"""Command-line entry point.

Every command prints exactly one JSON document on stdout; human-readable
detail goes to stderr. Exit codes: 0 success, 1 validly rejected input,
2 usage or malformed input, 3 transport or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from validmol.evaluation import (
    CorpusFormatError,
    EmptyCorpus,
    Fault,
    ValidationConfig,
    ablation_validation,
    eval_corpus,
    failure_taxonomy,
    inject_failures,
    load_corpus,
)
from validmol.ga_baseline import GaConfig, InfeasibleSeed, logp_target_fitness, run_ga, write_trace
from validmol.llm_client import DEFAULT_MODEL, TransportConfig, TransportError
from validmol.pathway import SynthesisPathway, validate_pathway
from validmol.pipeline import CandidateResult, DesignTask, ObjectiveKind, Status, run_task, run_tasks
from validmol.properties import morgan_fingerprint, property_profile, tanimoto
from validmol.report import render_candidate
from validmol.response_parser import FormatFailure, Protocol, check_format, extract_pathway
from validmol.smiles import validate_chemistry, validate_syntax

EXIT_OK, EXIT_REJECTED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("validmol")


class UsageError(Exception):
    pass


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True, ensure_ascii=False) + "\n")


def _read_smi(path: str) -> list[tuple[int, str, str | None]]:
    """(line number, SMILES, optional name) per non-blank line."""
    out = []
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        smiles, _, name = line.partition("\t")
        out.append((n, smiles.strip(), name.strip() or None))
    return out


def _inputs(args) -> list[tuple[int | None, str, str | None]]:
    if args.smiles is not None:
        return [(None, args.smiles, None)]
    return _read_smi(args.file)


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    if args.level == "pathway":
        if args.smiles is not None:
            pathway = SynthesisPathway.from_items([p.strip() for p in args.smiles.split(">>")])
        else:
            text = Path(args.file).read_text()
            protocol = Protocol.JSON if text.lstrip().startswith("{") else Protocol.BULLETS
            try:
                pathway, _ = extract_pathway(text, protocol)
            except FormatFailure as exc:
                _emit({"level": "pathway", "valid": False, "messages": [f"format: {exc.reason}"]})
                return EXIT_REJECTED
        verdict = validate_pathway(pathway)
        _emit({"level": "pathway", "valid": verdict.valid, "messages": list(verdict.messages)})
        return EXIT_OK if verdict.valid else EXIT_REJECTED

    def check(item):
        line, smiles, name = item
        verdict = validate_syntax(smiles) if args.level == "syntax" else validate_chemistry(smiles)
        return {"line": line, "name": name, "smiles": smiles, "valid": verdict.ok, "message": verdict.message}

    items = _inputs(args)
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(check, items))
    for r in results:
        if not r["valid"]:
            where = f"line {r['line']}: " if r["line"] else ""
            print(f"{where}{r['smiles']}: {r['message']}", file=sys.stderr)
    ok = all(r["valid"] for r in results)
    _emit({"level": args.level, "all_valid": ok, "results": results})
    return EXIT_OK if ok else EXIT_REJECTED


def cmd_parse(args) -> int:
    text = Path(args.file).read_text() if args.file != "-" else sys.stdin.read()
    protocol = Protocol(args.protocol)
    verdict = check_format(text, protocol)
    doc = {"adherent": verdict.adherent, "reason": verdict.reason, "pathway": None}
    if verdict.adherent:
        pathway, _ = extract_pathway(text, protocol)
        doc["pathway"] = pathway.to_json()
    _emit(doc)
    return EXIT_OK if verdict.adherent else EXIT_REJECTED


def cmd_props(args) -> int:
    ref = None
    if args.against:
        v = validate_chemistry(args.against)
        if not v.ok:
            raise UsageError(f"--against: {v.message}")
        ref = morgan_fingerprint(v.molecule)
    results = []
    for line, smiles, name in _inputs(args):
        v = validate_chemistry(smiles)
        row = {"line": line, "name": name, "smiles": smiles, "valid": v.ok}
        if v.ok:
            try:
                row["profile"] = property_profile(v.molecule).to_json()
            except ValueError as exc:
                row.update(valid=False, message=str(exc))
            else:
                if ref is not None:
                    row["tanimoto"] = tanimoto(ref, morgan_fingerprint(v.molecule))
        else:
            row["message"] = v.message
        results.append(row)
    _emit({"results": results})
    return EXIT_OK if all(r["valid"] for r in results) else EXIT_REJECTED


def _write_outputs(result: CandidateResult, args) -> None:
    if args.out:
        Path(args.out).write_text(json.dumps(result.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    if args.report:
        if result.status is Status.ACCEPTED:
            Path(args.report).write_text(render_candidate(result).html)
        else:
            print(f"no report: candidate was {result.status.value}", file=sys.stderr)


def cmd_run(args) -> int:
    transport = TransportConfig.parse(args.transport, max_in_flight=args.workers)
    kwargs = {"model": args.model, "temperature": args.temperature}
    if args.tasks:
        tasks = [
            DesignTask.from_json(json.loads(line).get("task", json.loads(line)))
            for line in Path(args.tasks).read_text().splitlines()
            if line.strip()
        ]
        outcomes = run_tasks(tasks, transport, **kwargs)
        docs = []
        worst = EXIT_OK
        for out in outcomes:
            if isinstance(out, TransportError):
                docs.append({"error": str(out)})
                worst = EXIT_IO
            else:
                docs.append(out.to_json())
                if out.status is not Status.ACCEPTED and worst == EXIT_OK:
                    worst = EXIT_REJECTED
        if args.out:
            Path(args.out).write_text("".join(json.dumps(d, sort_keys=True, ensure_ascii=False) + "\n" for d in docs))
        _emit({"results": docs})
        return worst
    if args.smiles is None or args.objective is None:
        raise UsageError("run needs --smiles and --objective, or --tasks")
    task = DesignTask(args.smiles, args.objective, ObjectiveKind(args.objective_kind), args.prompt_version)
    result = run_task(task, transport, **kwargs)
    _write_outputs(result, args)
    print(f"status: {result.status.value}", file=sys.stderr)
    for d in result.diagnostics:
        print(f"  {d}", file=sys.stderr)
    _emit(result.to_json())
    return EXIT_OK if result.status is Status.ACCEPTED else EXIT_REJECTED


_FAULT_NAMES = {"syntax": Fault.SYNTAX, "chemistry": Fault.CHEMISTRY, "format": Fault.FORMAT}
_ABLATIONS = {
    "full": ValidationConfig.FULL,
    "syntax": ValidationConfig.SYNTAX_ONLY,
    "chemistry": ValidationConfig.CHEMISTRY_ONLY,
    "none": ValidationConfig.NONE,
}


def _parse_inject(spec: str) -> dict[Fault, float]:
    """``syntax=0.1,chemistry=0.05`` -> rates."""
    rates = {}
    for part in spec.split(","):
        name, _, value = part.partition("=")
        if name.strip() not in _FAULT_NAMES:
            raise UsageError(f"--inject: unknown fault kind {name!r}")
        try:
            rates[_FAULT_NAMES[name.strip()]] = float(value)
        except ValueError as exc:
            raise UsageError(f"--inject: bad rate in {part!r}") from exc
    return rates


def cmd_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    protocol = Protocol(args.protocol)
    if args.inject:
        corpus = inject_failures(corpus, _parse_inject(args.inject), args.seed)
    if args.ablation:
        report = ablation_validation(corpus, _ABLATIONS[args.ablation], protocol)
    else:
        report = eval_corpus(corpus, protocol)
    doc = report.to_json()
    if args.taxonomy:
        doc["failure_taxonomy"] = failure_taxonomy(corpus, protocol)
    print(report.to_table(), file=sys.stderr)
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _emit(doc)
    return EXIT_OK


def _default_seeds() -> list[str]:
    text = resources.files("validmol.data").joinpath("drugs50.smi").read_text()
    return [line.split("\t")[0] for line in text.splitlines() if line.strip()]


def cmd_ga(args) -> int:
    cfg = GaConfig.load(args.config) if args.config else GaConfig()
    overrides = {
        k: v
        for k, v in {"population_size": args.population, "generations": args.generations, "seed": args.seed}.items()
        if v is not None
    }
    if overrides:
        cfg = GaConfig.from_json({**cfg.to_json(), **overrides})
    seeds = [s for _, s, _ in _read_smi(args.seeds)] if args.seeds else _default_seeds()

    def progress(stats, _pop):
        print(f"gen {stats.generation:3d}  best {stats.best:.4f}  mean {stats.mean:.4f}  div {stats.diversity:.3f}", file=sys.stderr)

    try:
        result = run_ga(seeds, logp_target_fitness(args.target_logp), cfg, on_generation=progress)
    except InfeasibleSeed as exc:
        print(str(exc), file=sys.stderr)
        _emit({"error": str(exc)})
        return EXIT_REJECTED
    if args.trace:
        write_trace(result.trace, args.trace)
    top = result.population[: args.top]
    _emit(
        {
            "config": cfg.to_json(),
            "best": [{"smiles": i.smiles, "fitness": i.fitness, "profile": i.profile.to_json()} for i in top],
            "trace": [vars(t) for t in result.trace],
        }
    )
    return EXIT_OK


def cmd_report(args) -> int:
    result = CandidateResult.from_json(json.loads(Path(args.result).read_text()))
    if result.status is not Status.ACCEPTED:
        print(f"only Accepted candidates are rendered (got {result.status.value})", file=sys.stderr)
        _emit({"rendered": False, "status": result.status.value})
        return EXIT_REJECTED
    doc = render_candidate(result)
    Path(args.out).write_text(doc.html)
    _emit({"rendered": True, "path": str(args.out), "step_count": doc.step_count, "images": len(doc.images)})
    return EXIT_OK


# ---------------------------------------------------------------- wiring


def _source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--smiles", help="a single SMILES string")
    g.add_argument("--file", help=".smi file: one SMILES per line, optional tab-separated name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="validmol", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check SMILES strings or a pathway")
    _source(p)
    p.add_argument("--level", choices=("syntax", "chem", "pathway"), default="chem")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("parse", help="parse an LLM response into a pathway")
    p.add_argument("--file", required=True, help="response text file, or - for stdin")
    p.add_argument("--protocol", choices=[x.value for x in (Protocol.BULLETS, Protocol.JSON)], default=Protocol.BULLETS.value)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("props", help="property profile for molecules")
    _source(p)
    p.add_argument("--against", help="reference SMILES for Tanimoto similarity")
    p.set_defaults(func=cmd_props)

    p = sub.add_parser("run", help="run design task(s) through the pipeline")
    p.add_argument("--smiles")
    p.add_argument("--objective")
    p.add_argument("--objective-kind", choices=[k.value for k in ObjectiveKind], default=ObjectiveKind.TARGET_AFFINITY.value)
    p.add_argument("--prompt-version", default="V4", help="V1..V5, an ablation name, or a template file")
    p.add_argument("--tasks", help="JSON-lines file of tasks (batch mode)")
    p.add_argument("--transport", required=True, help="http | replay:<cassette> | record:<cassette>")
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--out", help="write the result JSON here")
    p.add_argument("--report", help="write an HTML report here when Accepted")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="corpus metrics, fault injection and validator ablation")
    p.add_argument("--corpus", required=True)
    p.add_argument("--inject", help="fault rates, e.g. syntax=0.1,chemistry=0.1,format=0.05")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ablation", choices=sorted(_ABLATIONS))
    p.add_argument("--protocol", choices=[x.value for x in (Protocol.BULLETS, Protocol.JSON)], default=Protocol.BULLETS.value)
    p.add_argument("--taxonomy", action="store_true", help="include failure taxonomy counts")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ga", help="genetic-algorithm baseline")
    p.add_argument("--seeds", help=".smi file of seed molecules (default: bundled drug set)")
    p.add_argument("--config", help="GA config JSON")
    p.add_argument("--population", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--target-logp", type=float, default=2.5)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--trace", help="write per-generation CSV trace here")
    p.set_defaults(func=cmd_ga)

    p = sub.add_parser("report", help="render an Accepted result as HTML")
    p.add_argument("--result", required=True, help="CandidateResult JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        _emit({"error": str(exc), "kind": "usage"})
        return EXIT_USAGE
    except CorpusFormatError as exc:
        print(f"{args.corpus}: {exc}", file=sys.stderr)
        _emit({"error": str(exc), "kind": "corpus", "line": exc.line})
        return EXIT_USAGE
    except EmptyCorpus as exc:
        print(f"empty corpus: {exc}", file=sys.stderr)
        _emit({"error": "empty corpus", "kind": "corpus"})
        return EXIT_USAGE
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        _emit({"error": str(exc), "kind": "usage"})
        return EXIT_USAGE
    except TransportError as exc:
        print(f"transport failure: {exc}", file=sys.stderr)
        _emit({"error": str(exc), "kind": "transport"})
        return EXIT_IO
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        _emit({"error": str(exc), "kind": "io"})
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
