import csv
import itertools
import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import load_drugs
from validmol.ga_baseline import (
    MUTATION_OPS,
    FitnessError,
    GaConfig,
    InfeasibleSeed,
    balanced_cut_points,
    crossover_smiles,
    cut_and_swap,
    logp_target_fitness,
    mutate_smiles,
    population_diversity,
    repair_ring_labels,
    run_ga,
    write_trace,
)
from validmol.properties import PropertyProfile
from validmol.smiles import tokenize, validate_chemistry, validate_syntax

DRUGS = [s for s, _ in load_drugs()]
TEN = DRUGS[:10]
SEEDS = ["CCO", "c1ccccc1O", "CC(=O)Nc1ccc(O)cc1", "CCN(CC)CC", "OC(=O)c1ccccc1"]


def test_cut_and_swap_example():
    assert cut_and_swap(tokenize("CC"), tokenize("OO"), 1, 1) == ("CO", "OC")


def test_trivial_cuts_return_parents():
    assert crossover_smiles("C", "OO", random.Random(0)) == ("C", "OO")
    assert crossover_smiles("[Na+].[Cl-]", "CCO", random.Random(0)) == ("[Na+].[Cl-]", "CCO")


def test_crossover_brute_force_balance():
    # every cut pair on a 10-drug set yields balanced, lexable children
    checked = 0
    for a, b in itertools.permutations(TEN, 2):
        ta, tb = tokenize(a), tokenize(b)
        for p in balanced_cut_points(a):
            for q in balanced_cut_points(b):
                for child in cut_and_swap(ta, tb, p, q):
                    v = validate_syntax(child)
                    assert v.ok, (a, b, p, q, child, v.message)
                    checked += 1
    assert checked > 10_000


def test_ring_labels_are_renumbered():
    assert repair_ring_labels(tokenize("C1CC")[:3], ["C", "C"]) == "CCCC"
    child = repair_ring_labels(tokenize("C1CCC1C2CC"), tokenize("C2"))
    assert validate_chemistry(child).ok


def test_mutate_examples():
    rng = random.Random(0)
    assert mutate_smiles("CCO", rng, op="substitute", index=2) in {"CCC", "CCN", "CCS", "CCF", "CCCl"}
    assert mutate_smiles("C", rng, op="delete") == "C"
    assert mutate_smiles("c1ccccc1CCO", rng, rate=0.0) == "c1ccccc1CCO"


@given(st.sampled_from(DRUGS), st.integers(0, 10_000), st.sampled_from(MUTATION_OPS))
def test_mutation_never_empties(s, seed, op):
    out = mutate_smiles(s, random.Random(seed), op=op)
    assert out and any(t.kind.name.endswith("ATOM") for t in tokenize(out))


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        GaConfig(population_size=10, elite_count=10)
    with pytest.raises(ValueError):
        GaConfig(mutation_rate=1.5)
    cfg = GaConfig(population_size=20, generations=2, seed=4)
    path = tmp_path / "ga.json"
    path.write_text(json.dumps(cfg.to_json()))
    assert GaConfig.load(path) == cfg
    with pytest.raises(ValueError):
        GaConfig.from_json({"population": 3})


def test_infeasible_seed():
    with pytest.raises(InfeasibleSeed):
        run_ga(["C1CC(", "C(C)(C)(C)(C)C"], cfg=GaConfig(population_size=20, generations=1, elite_count=2))


def test_fitness_errors_propagate():
    def broken(mol, profile):
        raise RuntimeError("boom")

    with pytest.raises(FitnessError):
        run_ga(["CCO"], broken, GaConfig(population_size=20, generations=1, elite_count=2))


SMALL = GaConfig(population_size=30, generations=5, elite_count=3, seed=9)


def test_small_run_properties():
    sizes: list[int] = []

    def watch(stats, pop):
        sizes.append(len(pop))
        assert all(validate_chemistry(ind.smiles).ok for ind in pop)

    result = run_ga(SEEDS, cfg=SMALL, on_generation=watch)
    assert sizes == [30] * 6
    best = [row.best for row in result.trace]
    assert all(a <= b for a, b in zip(best, best[1:]))
    assert [row.generation for row in result.trace] == list(range(6))
    assert result.population[0].fitness == best[-1]


def test_seeded_determinism():
    a, b = run_ga(SEEDS, cfg=SMALL), run_ga(SEEDS, cfg=SMALL)
    assert a.trace == b.trace
    assert [i.smiles for i in a.population] == [i.smiles for i in b.population]


def test_fitness_shape():
    f = logp_target_fitness(target=2.5)
    p = PropertyProfile(mw=100, logp=2.5, hbd=0, hba=0, heavy_atoms=5, sa_score=1.0)
    assert f(None, p) == pytest.approx(0.7 - 0.3)


def test_diversity_and_trace_file(tmp_path):
    result = run_ga(SEEDS, cfg=SMALL)
    assert 0.0 <= population_diversity(result.population) <= 1.0
    path = tmp_path / "trace.csv"
    write_trace(result.trace, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["generation", "best", "mean", "diversity"]
    assert len(rows) == 1 + len(result.trace)
