"""SMILES-string genetic algorithm used as a comparison baseline.

Per generation: keep the elites, breed the rest by tournament selection,
string crossover and per-position mutation, discard chemically invalid
offspring (bounded retries, then a parent copy), merge near-duplicates by
Tanimoto clustering and refill to the configured population size.
"""

from __future__ import annotations

import csv
import json
import math
import random
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

from validmol.properties import (
    Fingerprint,
    PropertyProfile,
    morgan_fingerprint,
    property_profile,
    tanimoto,
)
from validmol.smiles import (
    LexError,
    Molecule,
    SmilesToken,
    TokenKind,
    canonical_smiles,
    tokenize,
    validate_chemistry,
)

MAX_OFFSPRING_ATTEMPTS = 10
SUBSTITUTES = ("C", "N", "O", "S", "F", "Cl")
_AROMATIC_FORMS = {"C": "c", "N": "n", "O": "o", "S": "s"}
MUTATION_OPS = ("substitute", "bond", "append", "delete", "ring")


class InfeasibleSeed(ValueError):
    pass


class FitnessError(RuntimeError):
    pass


class NoBalancedCut(ValueError):
    pass


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 500
    mutation_rate: float = 0.02
    crossover_rate: float = 0.8
    tournament_size: int = 3
    generations: int = 50
    elite_count: int = 10
    seed: int = 0
    diversity_threshold: float = 0.9

    def __post_init__(self) -> None:
        if self.population_size < 1 or self.tournament_size < 1 or self.generations < 0:
            raise ValueError("population, tournament and generation counts must be positive")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [0, population_size)")
        for name in ("mutation_rate", "crossover_rate", "diversity_threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "GaConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown GA config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "GaConfig":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Individual:
    smiles: str
    fitness: float
    profile: PropertyProfile
    fingerprint: Fingerprint = field(repr=False, compare=False)


FitnessFn = Callable[[Molecule, PropertyProfile], float]


def logp_target_fitness(target: float = 2.5, w_property: float = 0.7, w_sa: float = 0.3) -> FitnessFn:
    """``w_property / (1 + |logP - target|) - w_sa * SA``."""

    def score(_mol: Molecule, profile: PropertyProfile) -> float:
        return w_property / (1.0 + abs(profile.logp - target)) - w_sa * profile.sa_score

    return score


# ---------------------------------------------------------------- string edits


def _join(tokens: Sequence[SmilesToken | str]) -> str:
    return "".join(t if isinstance(t, str) else t.text for t in tokens)


def _is_atom(tok: SmilesToken | str) -> bool:
    return isinstance(tok, SmilesToken) and tok.kind in (TokenKind.ORGANIC_ATOM, TokenKind.BRACKET_ATOM)


def _atom_positions(tokens: Sequence[SmilesToken | str]) -> list[int]:
    return [k for k, t in enumerate(tokens) if _is_atom(t)]


def _label_text(n: int) -> str:
    return str(n) if n < 10 else f"%{n}"


def _ring_label(tok: SmilesToken | str) -> int | None:
    if isinstance(tok, SmilesToken) and tok.kind is TokenKind.RING_CLOSURE:
        return tok.ring_label
    if isinstance(tok, str) and tok and (tok.isdigit() or tok.startswith("%")):
        return int(tok.lstrip("%"))
    return None


def _substitute(tokens: list, k: int, rng: random.Random) -> None:
    old = tokens[k].text if isinstance(tokens[k], SmilesToken) else tokens[k]
    new = rng.choice([s for s in SUBSTITUTES if s != old.strip("[]")] or list(SUBSTITUTES))
    aromatic = old[:1].islower() or (old.startswith("[") and old[1:2].islower())
    tokens[k] = _AROMATIC_FORMS.get(new, new) if aromatic else new


def _toggle_bond(tokens: list, k: int, rng: random.Random) -> None:
    prev = tokens[k - 1] if k > 0 else None
    if prev is None or (isinstance(prev, SmilesToken) and prev.kind is TokenKind.DOT):
        return
    if _text(prev) in _BOND_TEXT:
        # "=" -> single, "#" -> "=", "-" or ":" -> "="
        tokens[k - 1] = {"=": "", "#": "="}.get(_text(prev), "=")
    else:
        tokens.insert(k, rng.choice(("=", "#")) if rng.random() < 0.1 else "=")


def _append(tokens: list, k: int, rng: random.Random) -> None:
    tokens.insert(k + 1, f"({rng.choice(SUBSTITUTES)})")


def _delete(tokens: list, k: int) -> None:
    """Remove the atom at token ``k`` when it is terminal in the string layout."""
    if len(_atom_positions(tokens)) <= 1:
        return
    before = tokens[k - 1] if k > 0 else None
    after = tokens[k + 1] if k + 1 < len(tokens) else None

    def text(t):
        return None if t is None else _text(t)

    if text(before) == "(" and text(after) == ")":
        del tokens[k - 1 : k + 2]
    elif after is None and before is not None:
        drop = k - 1 if text(before) in _BOND_TEXT else k
        del tokens[drop:]
    elif before is None and after is not None and _is_atom(after):
        del tokens[0]
    elif before is None and text(after) in _BOND_TEXT:
        del tokens[0:2]


def _ring_edit(tokens: list, k: int, rng: random.Random) -> None:
    labels = [(j, _ring_label(t)) for j, t in enumerate(tokens) if _ring_label(t) is not None]
    if labels and rng.random() < 0.5:
        target = rng.choice(labels)[1]
        for j in sorted((j for j, lab in labels if lab == target), reverse=True):
            del tokens[j]
            if j > 0 and _text(tokens[j - 1]) in _BOND_TEXT:
                del tokens[j - 1]
        return
    atoms = _atom_positions(tokens)
    idx = atoms.index(k)
    if idx + 2 >= len(atoms):
        return
    other = atoms[min(len(atoms) - 1, idx + rng.randint(2, 5))]
    used = {lab for _, lab in labels}
    label = next(n for n in range(1, 100) if n not in used)
    tokens.insert(other + 1, _label_text(label))
    tokens.insert(k + 1, _label_text(label))


def _apply(tokens: list, op: str, k: int, rng: random.Random) -> None:
    if op == "substitute":
        _substitute(tokens, k, rng)
    elif op == "bond":
        _toggle_bond(tokens, k, rng)
    elif op == "append":
        _append(tokens, k, rng)
    elif op == "delete":
        _delete(tokens, k)
    elif op == "ring":
        _ring_edit(tokens, k, rng)
    else:
        raise ValueError(f"unknown mutation op {op!r}")


def mutate_smiles(
    s: str,
    rng: random.Random,
    rate: float | None = None,
    op: str | None = None,
    index: int | None = None,
) -> str:
    """Edit a SMILES string; the result is not validated.

    With ``rate=None`` exactly one edit is made, at atom ``index`` (random
    when omitted) using ``op`` (random when omitted). With a rate, every atom
    position is independently edited with that probability, so ``rate=0``
    returns ``s`` unchanged.
    """
    try:
        tokens: list = list(tokenize(s))
    except LexError:
        return s
    atoms = _atom_positions(tokens)
    if not atoms:
        return s
    if rate is None:
        chosen = [index if index is not None else rng.randrange(len(atoms))]
    else:
        chosen = [i for i in range(len(atoms)) if rng.random() < rate]
    # edit right to left so earlier token indices stay valid
    for i in sorted(chosen, reverse=True):
        positions = _atom_positions(tokens)
        if i >= len(positions):
            continue
        _apply(tokens, op or rng.choice(MUTATION_OPS), positions[i], rng)
    return _join(tokens) or s


def _balanced_cuts(tokens: Sequence[SmilesToken]) -> list[int]:
    """Token indices where a cut leaves both halves balanced and non-empty."""
    cuts = []
    depth = 0
    seen_atom = False
    for k, tok in enumerate(tokens):
        if depth == 0 and seen_atom and (
            _is_atom(tok) or (tok.kind is TokenKind.BOND and k + 1 < len(tokens) and _is_atom(tokens[k + 1]))
        ):
            cuts.append(k)
        if tok.kind is TokenKind.BRANCH_OPEN:
            depth += 1
        elif tok.kind is TokenKind.BRANCH_CLOSE:
            depth -= 1
        elif tok.kind is TokenKind.DOT:
            return []
        seen_atom = seen_atom or _is_atom(tok)
    return cuts


def _text(t: SmilesToken | str) -> str:
    return t if isinstance(t, str) else t.text


_BOND_TEXT = ("-", "=", "#", ":")


def repair_ring_labels(prefix: Sequence[SmilesToken | str], suffix: Sequence[SmilesToken | str]) -> str:
    """Join two token runs cut from different strings.

    A ring bond that crossed the cut leaves an odd occurrence of its label:
    the last one in a prefix, the first one in a suffix. Those are dropped
    (with any bond symbol in front), then labels are renumbered so the two
    runs cannot collide.
    """
    out: list = []
    for part, run in enumerate((list(prefix), list(suffix))):
        where: dict[int, list[int]] = {}
        for j, t in enumerate(run):
            lab = _ring_label(t)
            if lab is not None:
                where.setdefault(lab, []).append(j)
        orphans = {(pos[-1] if part == 0 else pos[0]) for pos in where.values() if len(pos) % 2}
        for j, t in enumerate(run):
            lab = _ring_label(t)
            if j in orphans:
                if out and _text(out[-1]) in _BOND_TEXT:
                    out.pop()
                continue
            out.append((part, lab) if lab is not None else t)
    # each opening takes the lowest free label
    open_map: dict[tuple, int] = {}
    final = []
    for t in out:
        if isinstance(t, tuple):
            if t in open_map:
                n = open_map.pop(t)
            else:
                n = next(m for m in range(1, 100) if m not in open_map.values())
                open_map[t] = n
            final.append(_label_text(n))
        else:
            final.append(t)
    return _join(final)


def crossover_smiles(a: str, b: str, rng: random.Random) -> tuple[str, str]:
    """Exchange suffixes at balanced cut points; parents come back when either
    string has no usable cut."""
    try:
        ta, tb = tokenize(a), tokenize(b)
        ca, cb = _balanced_cuts(ta), _balanced_cuts(tb)
        if not ca or not cb:
            raise NoBalancedCut(f"{a!r} / {b!r}")
    except (LexError, NoBalancedCut):
        return a, b
    p, q = rng.choice(ca), rng.choice(cb)
    return cut_and_swap(ta, tb, p, q)


def cut_and_swap(ta: Sequence[SmilesToken], tb: Sequence[SmilesToken], p: int, q: int) -> tuple[str, str]:
    return (
        repair_ring_labels(ta[:p], tb[q:]),
        repair_ring_labels(tb[:q], ta[p:]),
    )


def balanced_cut_points(s: str) -> list[int]:
    return _balanced_cuts(tokenize(s))


# ---------------------------------------------------------------- evolution


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: float
    mean: float
    diversity: float


@dataclass
class GaResult:
    population: list[Individual]
    trace: list[GenerationStats]


class _Scorer:
    """Validates, canonicalizes and scores SMILES, memoized by canonical form."""

    def __init__(self, fitness: FitnessFn):
        self.fitness = fitness
        self.by_input: dict[str, Individual | None] = {}
        self.by_canonical: dict[str, Individual] = {}

    def __call__(self, s: str) -> Individual | None:
        if s in self.by_input:
            return self.by_input[s]
        verdict = validate_chemistry(s)
        ind = None
        if verdict.ok:
            mol = verdict.molecule
            can = canonical_smiles(mol)
            ind = self.by_canonical.get(can)
            if ind is None:
                ind = self._score(can, mol)
        self.by_input[s] = ind
        return ind

    def _score(self, can: str, mol: Molecule) -> Individual | None:
        try:
            profile = property_profile(mol)
        except ValueError:
            return None  # outside the property model's domain
        try:
            value = float(self.fitness(mol, profile))
        except Exception as exc:
            raise FitnessError(f"fitness failed on {can}: {exc}") from exc
        if math.isnan(value):
            raise FitnessError(f"fitness is NaN on {can}")
        ind = Individual(can, value, profile, morgan_fingerprint(mol))
        self.by_canonical[can] = ind
        return ind


def _rank_key(ind: Individual) -> tuple[float, str]:
    return (-ind.fitness, ind.smiles)


def _tournament(pop: list[Individual], k: int, rng: random.Random) -> Individual:
    picks = [pop[rng.randrange(len(pop))] for _ in range(k)]
    return min(picks, key=_rank_key)


def _offspring(pop: list[Individual], cfg: GaConfig, rng: random.Random, score: _Scorer) -> list[Individual]:
    a = _tournament(pop, cfg.tournament_size, rng)
    b = _tournament(pop, cfg.tournament_size, rng)
    children = []
    for slot, parent in enumerate((a, b)):
        for _ in range(MAX_OFFSPRING_ATTEMPTS):
            s = parent.smiles
            if rng.random() < cfg.crossover_rate:
                s = crossover_smiles(a.smiles, b.smiles, rng)[slot]
            s = mutate_smiles(s, rng, rate=cfg.mutation_rate)
            child = score(s)
            if child is not None:
                break
        else:
            child = parent
        children.append(child)
    return children


def _merge_similar(pop: list[Individual], protected: int, threshold: float) -> list[Individual]:
    """Greedy clustering in rank order; the first ``protected`` members always stay."""
    reps: list[Individual] = list(pop[:protected])
    for ind in pop[protected:]:
        if all(tanimoto(ind.fingerprint, r.fingerprint) <= threshold for r in reps):
            reps.append(ind)
    return reps


def population_diversity(pop: Sequence[Individual]) -> float:
    """One minus the mean pairwise Tanimoto similarity."""
    n = len(pop)
    if n < 2:
        return 0.0
    fps = [ind.fingerprint.bits for ind in pop]
    counts = [f.bit_count() for f in fps]
    total = 0.0
    for i in range(n):
        fi, ci = fps[i], counts[i]
        for j in range(i + 1, n):
            inter = (fi & fps[j]).bit_count()
            union = ci + counts[j] - inter
            total += inter / union if union else 1.0
    return 1.0 - total / (n * (n - 1) / 2)


def _stats(gen: int, pop: list[Individual]) -> GenerationStats:
    fits = [i.fitness for i in pop]
    return GenerationStats(gen, max(fits), sum(fits) / len(fits), population_diversity(pop))


def run_ga(
    seed_pop: Sequence[str],
    fitness: FitnessFn | None = None,
    cfg: GaConfig = GaConfig(),
    on_generation: Callable[[GenerationStats, list[Individual]], None] | None = None,
) -> GaResult:
    fitness = fitness or logp_target_fitness()
    rng = random.Random(cfg.seed)
    score = _Scorer(fitness)
    seeds = [ind for ind in (score(s) for s in seed_pop) if ind is not None]
    if not seeds:
        raise InfeasibleSeed("no chemically valid seed molecule")
    pop = sorted((seeds[i % len(seeds)] for i in range(cfg.population_size)), key=_rank_key)
    trace = [_stats(0, pop)]
    if on_generation:
        on_generation(trace[-1], pop)
    for gen in range(1, cfg.generations + 1):
        elites = pop[: cfg.elite_count]
        children: list[Individual] = []
        while len(elites) + len(children) < cfg.population_size:
            children.extend(_offspring(pop, cfg, rng, score))
        children = children[: cfg.population_size - len(elites)]
        merged = _merge_similar(elites + sorted(children, key=_rank_key), len(elites), cfg.diversity_threshold)
        while len(merged) < cfg.population_size:
            merged.extend(_offspring(pop, cfg, rng, score))
        new_pop = elites + sorted(merged[len(elites) : cfg.population_size], key=_rank_key)
        pop = sorted(new_pop, key=_rank_key)
        trace.append(_stats(gen, pop))
        if on_generation:
            on_generation(trace[-1], pop)
    return GaResult(pop, trace)


def write_trace(trace: Sequence[GenerationStats], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "best", "mean", "diversity"])
        for row in trace:
            w.writerow([row.generation, f"{row.best:.6f}", f"{row.mean:.6f}", f"{row.diversity:.6f}"])
