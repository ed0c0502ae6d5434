"""Character-level SMILES checks and the lexer."""

from __future__ import annotations

import re

from validmol.smiles.elements import ELEMENT_LETTERS
from validmol.smiles.types import LexError, SmilesToken, SyntaxVerdict, TokenKind

VALID_SYMBOLS = frozenset("()[]=#-+%/\\@:.*")
VALID_CHARACTERS = ELEMENT_LETTERS | frozenset("0123456789") | VALID_SYMBOLS

INVALID_CHARACTER = "Invalid character detected"
UNBALANCED_PARENTHESES = "Unbalanced parentheses"
UNBALANCED_BRACKETS = "Unbalanced brackets"
UNMATCHED_RING_CLOSURE = "Unmatched ring closure"

_BOND_CHARS = "-=#:/\\"
_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = "BCNOPSFI"
_AROMATIC_ONE = "bcnops"
_BRACKET_RE = re.compile(
    r"""
    (?P<isotope>\d+)?
    (?P<symbol>\*|[A-Z][a-z]?|[a-z]{1,2})
    (?P<chiral>@(?:@|TH[12]|AL[12]|SP[1-3]|TB\d{1,2}|OH\d{1,2})?)?
    (?P<hcount>H\d?)?
    (?P<charge>\+\+?|--?|[+-]\d{1,2})?
    (?P<klass>:\d+)?
    $""",
    re.VERBOSE,
)


def strip_whitespace(s: str) -> tuple[str, list[int]]:
    """Remove all whitespace, returning the cleaned string and original offsets."""
    kept = [(i, c) for i, c in enumerate(s) if not c.isspace()]
    return "".join(c for _, c in kept), [i for i, _ in kept]


def validate_syntax(s: str) -> SyntaxVerdict:
    """Alphabet, parenthesis, bracket and ring-closure balance checks.

    Positions in failing verdicts refer to the original (un-stripped) string.
    """
    if not isinstance(s, str):
        return SyntaxVerdict(False, INVALID_CHARACTER, 0)
    clean, offsets = strip_whitespace(s)
    for i, c in enumerate(clean):
        if c not in VALID_CHARACTERS:
            return SyntaxVerdict(False, INVALID_CHARACTER, offsets[i])

    depth = 0
    opens: list[int] = []
    for i, c in enumerate(clean):
        if c == "(":
            opens.append(i)
            depth += 1
        elif c == ")":
            if depth == 0:
                return SyntaxVerdict(False, UNBALANCED_PARENTHESES, offsets[i])
            opens.pop()
            depth -= 1
    if depth:
        return SyntaxVerdict(False, UNBALANCED_PARENTHESES, offsets[opens[-1]])

    inside = None
    for i, c in enumerate(clean):
        if c == "[":
            if inside is not None:
                return SyntaxVerdict(False, UNBALANCED_BRACKETS, offsets[i])
            inside = i
        elif c == "]":
            if inside is None:
                return SyntaxVerdict(False, UNBALANCED_BRACKETS, offsets[i])
            inside = None
    if inside is not None:
        return SyntaxVerdict(False, UNBALANCED_BRACKETS, offsets[inside])

    open_labels: dict[int, int] = {}
    in_bracket = False
    i = 0
    while i < len(clean):
        c = clean[i]
        if c == "[":
            in_bracket = True
        elif c == "]":
            in_bracket = False
        elif not in_bracket and (c.isdigit() or c == "%"):
            if c == "%":
                if not clean[i + 1 : i + 3].isdigit() or len(clean[i + 1 : i + 3]) != 2:
                    return SyntaxVerdict(False, INVALID_CHARACTER, offsets[i])
                label, width = int(clean[i + 1 : i + 3]), 3
            else:
                label, width = int(c), 1
            if label in open_labels:
                del open_labels[label]
            else:
                open_labels[label] = i
            i += width
            continue
        i += 1
    if open_labels:
        first = min(open_labels.values())
        return SyntaxVerdict(False, UNMATCHED_RING_CLOSURE, offsets[first])
    return SyntaxVerdict(True)


def tokenize(s: str) -> list[SmilesToken]:
    """Split a SMILES string into tokens; whitespace is dropped first.

    Token positions index into the whitespace-stripped string, so token texts
    concatenate back to it exactly.
    """
    clean, _ = strip_whitespace(s)
    tokens: list[SmilesToken] = []
    i = 0
    n = len(clean)
    while i < n:
        c = clean[i]
        if c == "[":
            j = clean.find("]", i + 1)
            if j < 0:
                raise LexError("unterminated bracket atom", i)
            body = clean[i + 1 : j]
            if not _BRACKET_RE.match(body):
                raise LexError(f"malformed bracket atom [{body}]", i)
            tokens.append(SmilesToken(TokenKind.BRACKET_ATOM, clean[i : j + 1], i))
            i = j + 1
        elif clean.startswith(_ORGANIC_TWO, i):
            tokens.append(SmilesToken(TokenKind.ORGANIC_ATOM, clean[i : i + 2], i))
            i += 2
        elif c in _ORGANIC_ONE or c in _AROMATIC_ONE or c == "*":
            tokens.append(SmilesToken(TokenKind.ORGANIC_ATOM, c, i))
            i += 1
        elif c in _BOND_CHARS:
            tokens.append(SmilesToken(TokenKind.BOND, c, i))
            i += 1
        elif c.isdigit():
            tokens.append(SmilesToken(TokenKind.RING_CLOSURE, c, i))
            i += 1
        elif c == "%":
            digits = clean[i + 1 : i + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise LexError("'%' must be followed by two digits", i)
            tokens.append(SmilesToken(TokenKind.RING_CLOSURE, clean[i : i + 3], i))
            i += 3
        elif c == "(":
            tokens.append(SmilesToken(TokenKind.BRANCH_OPEN, c, i))
            i += 1
        elif c == ")":
            tokens.append(SmilesToken(TokenKind.BRANCH_CLOSE, c, i))
            i += 1
        elif c == ".":
            tokens.append(SmilesToken(TokenKind.DOT, c, i))
            i += 1
        else:
            raise LexError(f"unexpected character {c!r}", i)
    return tokens


def parse_bracket_body(body: str) -> dict:
    m = _BRACKET_RE.match(body)
    if m is None:  # tokenize already rejected these
        raise ValueError(body)
    return m.groupdict()
