"""Element symbols, average weights and the default-valence rules used by sanitization."""

from __future__ import annotations

from importlib import resources

ORGANIC_SUBSET = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_SUBSET = ("b", "c", "n", "o", "p", "s")
AROMATIC_ELEMENTS = frozenset({5, 6, 7, 8, 15, 16})


def _load() -> tuple[dict[str, int], dict[int, str], dict[int, float]]:
    by_symbol: dict[str, int] = {}
    by_number: dict[int, str] = {}
    weights: dict[int, float] = {}
    text = resources.files("validmol.data").joinpath("elements.txt").read_text()
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        z, sym, w = line.split()
        by_symbol[sym] = int(z)
        by_number[int(z)] = sym
        weights[int(z)] = float(w)
    return by_symbol, by_number, weights


SYMBOL_TO_Z, Z_TO_SYMBOL, ATOMIC_WEIGHT = _load()

# letters that occur in at least one element symbol
ELEMENT_LETTERS = frozenset("".join(SYMBOL_TO_Z) + "".join(SYMBOL_TO_Z).lower())

# Neutral default valences. Elements absent here are "unsupported" for sanitization.
DEFAULT_VALENCE: dict[int, tuple[int, ...]] = {
    1: (1,),
    2: (0,), 10: (0,), 18: (0,), 36: (0,), 54: (0,),
    3: (1,), 11: (1,), 19: (1,), 37: (1,), 55: (1,),
    4: (2,), 12: (2,), 20: (2,), 38: (2,), 56: (2,),
    5: (3,),
    6: (4,),
    7: (3,),
    8: (2,),
    9: (1,), 17: (1,), 35: (1,), 53: (1,),
    13: (3,),
    14: (4,),
    15: (3, 5),
    16: (2, 4, 6),
    33: (3, 5),
    34: (2, 4, 6),
}

# Explicit charge adjustments; other charged atoms fall back to the isoelectronic neighbour.
CHARGED_VALENCE: dict[tuple[int, int], tuple[int, ...]] = {
    (7, 1): (4,),
    (7, -1): (2,),
    (8, 1): (3,),
    (8, -1): (1,),
    (16, 1): (3,),
    (6, -1): (3,),
    (6, 1): (3,),
}

# outer-shell electron counts, used for pi-electron bookkeeping
VALENCE_ELECTRONS: dict[int, int] = {5: 3, 6: 4, 7: 5, 8: 6, 15: 5, 16: 6}


def allowed_valences(z: int, charge: int) -> tuple[int, ...] | None:
    """Allowed total valences for an element/charge pair, ``None`` if unsupported."""
    if charge == 0:
        return DEFAULT_VALENCE.get(z)
    if (z, charge) in CHARGED_VALENCE:
        return CHARGED_VALENCE[(z, charge)]
    shifted = z - charge
    if shifted <= 0 or shifted not in DEFAULT_VALENCE or z not in DEFAULT_VALENCE:
        return None
    return DEFAULT_VALENCE[shifted]
