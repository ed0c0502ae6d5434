import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CELECOXIB, CELECOXIB_MOD, load_drugs
from validmol.smiles import (
    INVALID_CHARACTER,
    UNBALANCED_BRACKETS,
    UNBALANCED_PARENTHESES,
    UNMATCHED_RING_CLOSURE,
    LexError,
    TokenKind,
    canonical_smiles,
    canonicalize,
    parse_to_mol,
    perceive_aromaticity,
    tokenize,
    validate_chemistry,
    validate_syntax,
    write_smiles,
)
from validmol.smiles.elements import allowed_valences
from validmol.smiles.syntax import VALID_CHARACTERS

DRUGS = [s for s, _ in load_drugs()]


def as_graph(mol):
    mol = perceive_aromaticity(mol)
    g = nx.Graph()
    for a in mol.atoms:
        g.add_node(a.index, key=(a.element, a.charge, a.isotope, mol.total_h(a.index), a.aromatic))
    for b in mol.bonds:
        g.add_edge(b.a, b.b, order=int(b.order))
    return g


def isomorphic(m1, m2) -> bool:
    return nx.is_isomorphic(
        as_graph(m1),
        as_graph(m2),
        node_match=lambda x, y: x["key"] == y["key"],
        edge_match=lambda x, y: x["order"] == y["order"],
    )


# ---- syntax ---------------------------------------------------------------


@pytest.mark.parametrize(
    "s, message, position",
    [
        ("C1CC(", UNBALANCED_PARENTHESES, None),
        ("C$C", INVALID_CHARACTER, 1),
        ("C[NH2", UNBALANCED_BRACKETS, None),
        ("C1CC", UNMATCHED_RING_CLOSURE, None),
        ("CC)", UNBALANCED_PARENTHESES, None),
    ],
)
def test_syntax_failures(s, message, position):
    v = validate_syntax(s)
    assert not v.ok
    assert v.message == message
    if position is not None:
        assert v.position == position


def test_syntax_accepts_case_study_molecules():
    assert validate_syntax(CELECOXIB).ok
    assert validate_syntax(CELECOXIB_MOD).ok


def test_whitespace_is_ignored():
    assert validate_syntax(" C C\tO\n").ok


def test_tokenize_examples():
    toks = tokenize("CCO")
    assert [(t.kind, t.text) for t in toks] == [(TokenKind.ORGANIC_ATOM, x) for x in "CCO"]
    rings = [t for t in tokenize("C%12CC%12") if t.kind is TokenKind.RING_CLOSURE]
    assert [t.ring_label for t in rings] == [12, 12]
    (atom,) = tokenize("[13CH4]")
    assert atom.kind is TokenKind.BRACKET_ATOM and atom.text == "[13CH4]"


def test_tokenize_rejects_empty_bracket():
    with pytest.raises(LexError):
        tokenize("[]")


@given(st.sampled_from(DRUGS))
def test_tokens_are_lossless_and_ordered(s):
    toks = tokenize(s)
    assert "".join(t.text for t in toks) == s
    positions = [t.position for t in toks]
    assert positions == sorted(set(positions))


# ---- parsing --------------------------------------------------------------


def test_parse_examples():
    m = parse_to_mol("CCO")
    assert len(m.atoms) == 3 and len(m.bonds) == 2
    ring = parse_to_mol("C1CC1")
    assert len(ring.bonds) == 3 and [len(r) for r in ring.rings] == [3]
    (n,) = parse_to_mol("[NH4+]").atoms
    assert (n.element, n.charge, n.explicit_h) == (7, 1, 4)


def test_dot_gives_disconnected_components():
    m = parse_to_mol("[Na+].[Cl-]")
    assert len(m.atoms) == 2 and not m.bonds


# ---- sanitization ---------------------------------------------------------


def test_methane_gets_four_hydrogens():
    v = validate_chemistry("C")
    assert v.ok and v.molecule.total_h(0) == 4


@pytest.mark.parametrize(
    "s, reason",
    [
        ("C(C)(C)(C)(C)C", "valence exceeded"),
        ("c1ccc1", "Hückel violation"),
        ("c1cccc1", "kekulization impossible"),
        ("Cc", "aromatic atom not in ring"),
        ("[Xx]", "unsupported element"),
    ],
)
def test_chemistry_failures(s, reason):
    v = validate_chemistry(s)
    assert not v.ok and v.molecule is None
    assert v.message == f"Chemical validation failed: {reason}"


def test_benzene_is_kekulized():
    m = validate_chemistry("c1ccccc1").molecule
    orders = sorted(b.kekule for b in m.bonds)
    assert orders == [1, 1, 1, 2, 2, 2]
    for i in range(6):
        assert sum(m.bonds[k].kekule == 2 for _, k in m.neighbors(i)) == 1


def test_modified_celecoxib_is_valid():
    assert validate_chemistry(CELECOXIB_MOD).ok


@pytest.mark.parametrize("s", ["", "C1CC", "(", "[]"])
def test_invalid_inputs_return_verdicts(s):
    v = validate_chemistry(s)
    assert not v.ok and v.message


def test_charged_valences():
    for s in ["C[N+](C)(C)C", "C[O-]", "C[O+](C)C", "[CH3-]", "C[S+](C)C", "C[N-]C"]:
        assert validate_chemistry(s).ok, s
    assert not validate_chemistry("C[N+](C)(C)(C)C").ok


def test_bracket_hydrogens_are_authoritative():
    m = validate_chemistry("[CH2]C").molecule
    assert m.total_h(0) == 2  # radical carbon keeps the written count
    assert not validate_chemistry("[CH5]").ok


# ---- canonical form -------------------------------------------------------


def test_canonical_examples():
    assert canonicalize("OCC") == canonicalize("CCO")
    ring = validate_chemistry(canonicalize("C1CC1")).molecule
    assert [len(r) for r in ring.rings] == [3]


def test_kekule_and_aromatic_benzene_agree():
    a = validate_chemistry("c1ccccc1").molecule
    k = validate_chemistry("C1=CC=C-C=C1").molecule
    assert isomorphic(a, k)  # oracle: graph isomorphism after aromaticity perception
    assert canonical_smiles(a) == canonical_smiles(k)


@pytest.mark.parametrize("s", DRUGS)
def test_canonical_round_trip_is_isomorphic(s):
    m = validate_chemistry(s).molecule
    back = validate_chemistry(canonical_smiles(m))
    assert back.ok
    assert isomorphic(m, back.molecule)


@given(st.sampled_from(DRUGS), st.randoms(use_true_random=False), st.booleans())
def test_canonical_is_invariant_under_rewriting(s, rnd, aromatic_form):
    m = validate_chemistry(s).molecule
    order = list(range(len(m.atoms)))
    rnd.shuffle(order)
    written = write_smiles(perceive_aromaticity(m) if aromatic_form else m, order)
    v = validate_chemistry(written)
    assert v.ok, written
    assert canonical_smiles(v.molecule) == canonical_smiles(m)


# ---- totality and layering -----------------------------------------------

ALPHABET = "".join(sorted(VALID_CHARACTERS)) + " $!?\x00é"


@given(st.text(alphabet=ALPHABET, max_size=40))
def test_validators_are_total_and_layered(s):
    syn = validate_syntax(s)
    chem = validate_chemistry(s)
    assert isinstance(syn.ok, bool) and isinstance(chem.ok, bool)
    assert syn.ok or syn.message
    assert chem.ok == (chem.molecule is not None)
    if chem.ok:
        assert syn.ok
    assert not (chem.message or "").startswith("Unexpected error")


@given(st.binary(max_size=64))
def test_validators_accept_any_bytes(raw):
    s = raw.decode("latin-1")
    validate_syntax(s)
    validate_chemistry(s)


@given(st.sampled_from(DRUGS), st.integers(0, 10_000))
def test_sanitized_valences_are_allowed(s, seed):
    # mutate one character, then check soundness on whatever still validates
    rng = random.Random(seed)
    pos = rng.randrange(len(s))
    mutated = s[:pos] + rng.choice("CNOSc=()1") + s[pos + 1 :]
    v = validate_chemistry(mutated)
    if not v.ok:
        return
    m = v.molecule
    for i, atom in enumerate(m.atoms):
        total = m.bond_order_sum(i) + m.total_h(i)
        assert total in allowed_valences(atom.element, atom.charge) or atom.bracket
