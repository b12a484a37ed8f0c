"""Core types for [0,1]-valued first-order logic.

Symbols, vocabularies, terms, and the formula AST over a fixed
rational-preserving basis of continuous connectives.  Truth values are
exact ``fractions.Fraction`` rationals in [0,1]; floats are rejected
everywhere so that all downstream checks are bit-exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Union


class LogicError(Exception):
    """Base class for every error raised by this package."""


class FormulaError(LogicError):
    """Malformed symbol, term, or formula (arity mismatch, bad constant...)."""


class VocabularyError(LogicError):
    """Symbol name clashes, missing symbols, or vocabulary mismatches."""


#: Names that may not be used for symbols, variables, or universe elements:
#: the text formats treat them as keywords and could not round-trip them.
RESERVED_WORDS = frozenset({
    "sup", "inf", "min", "max",
    "structure", "universe", "pred", "func", "dist", "end",
    "lipschitz", "pseudometric", "family", "include", "level",
})

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_RATIONAL_RE = re.compile(r"[+-]?\d+(/\d+)?\Z")

PREDICATE = "predicate"
FUNCTION = "function"


def as_fraction(value: Union[Fraction, int, str]) -> Fraction:
    """Coerce an int, a ``p/q`` string, or a Fraction to an exact Fraction.

    Floats and decimal strings are rejected: accepting them would silently
    lose precision.
    """
    if isinstance(value, bool):
        raise FormulaError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RATIONAL_RE.match(value.strip()):
            raise FormulaError(f"not a rational (use INT or INT/INT): {value!r}")
        try:
            return Fraction(value)
        except ZeroDivisionError as exc:
            raise FormulaError(f"zero denominator in rational: {value!r}") from exc
    raise FormulaError(f"not a rational: {value!r}")


def check_name(name: str, what: str = "symbol") -> None:
    """Reject names that are not identifiers or that collide with keywords."""
    if not isinstance(name, str) or not _IDENT_RE.match(name):
        raise FormulaError(f"{what} name must be an identifier: {name!r}")
    if name in RESERVED_WORDS:
        raise FormulaError(f"{what} name {name!r} is a reserved word")


@dataclass(frozen=True)
class Symbol:
    """A predicate or function symbol.

    ``modulus`` is an optional Lipschitz constant consumed by the structure
    checker.  It is metadata, not identity: symbols compare equal by
    (name, kind, arity) so that vocabularies assembled from different
    sources still intersect as expected.
    """

    name: str
    kind: str
    arity: int
    modulus: Optional[Fraction] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_name(self.name)
        if self.kind not in (PREDICATE, FUNCTION):
            raise FormulaError(f"symbol kind must be predicate or function: {self.kind!r}")
        if not isinstance(self.arity, int) or isinstance(self.arity, bool) or self.arity < 0:
            raise FormulaError(f"symbol arity must be a nonnegative integer: {self.arity!r}")
        if self.name == "d" and (self.kind != PREDICATE or self.arity != 2):
            raise FormulaError("the distance symbol d must be a binary predicate")
        if self.modulus is not None:
            m = as_fraction(self.modulus)
            if m < 0:
                raise FormulaError(f"Lipschitz constant must be nonnegative: {m}")
            object.__setattr__(self, "modulus", m)


def predicate(name: str, arity: int, lipschitz=None) -> Symbol:
    return Symbol(name, PREDICATE, arity, lipschitz)


def function(name: str, arity: int, lipschitz=None) -> Symbol:
    return Symbol(name, FUNCTION, arity, lipschitz)


#: The distance predicate, present in every vocabulary.
DISTANCE = Symbol("d", PREDICATE, 2)


@dataclass(frozen=True, init=False)
class Vocabulary:
    """A set of symbols with unique names, always containing the distance
    predicate d (it is adjoined automatically when absent)."""

    symbols: frozenset[Symbol]

    def __init__(self, symbols: Iterable[Symbol] = ()) -> None:
        pool = set(symbols)
        for sym in pool:
            if not isinstance(sym, Symbol):
                raise VocabularyError(f"not a symbol: {sym!r}")
        if not any(s.name == "d" for s in pool):
            pool.add(DISTANCE)
        by_name: dict[str, Symbol] = {}
        for sym in sorted(pool, key=lambda s: s.name):
            if sym.name in by_name:
                raise VocabularyError(f"duplicate symbol name: {sym.name!r}")
            by_name[sym.name] = sym
        object.__setattr__(self, "symbols", frozenset(pool))
        object.__setattr__(self, "_by_name", by_name)

    def lookup(self, name: str) -> Optional[Symbol]:
        return self._by_name.get(name)

    def __contains__(self, item) -> bool:
        if isinstance(item, Symbol):
            return item in self.symbols
        return item in self._by_name

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self._by_name.values())

    def __len__(self) -> int:
        return len(self.symbols)

    def __le__(self, other: "Vocabulary") -> bool:
        return self.symbols <= other.symbols

    def __and__(self, other: "Vocabulary") -> "Vocabulary":
        return Vocabulary(self.symbols & other.symbols)

    def __or__(self, other: "Vocabulary") -> "Vocabulary":
        return Vocabulary(self.symbols | other.symbols)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class Term:
    """Base class for terms (variables and function applications)."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __post_init__(self) -> None:
        check_name(self.name, "variable")


@dataclass(frozen=True)
class App(Term):
    """Application of a function symbol; 0-ary applications are constants."""

    func: Symbol
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.func, Symbol) or self.func.kind != FUNCTION:
            raise FormulaError(f"term head must be a function symbol: {self.func!r}")
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.func.arity:
            raise FormulaError(
                f"function {self.func.name!r} takes {self.func.arity} arguments, got {len(self.args)}")
        for arg in self.args:
            if not isinstance(arg, Term):
                raise FormulaError(f"not a term: {arg!r}")


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

class Formula:
    """Base class for formulas.  A sentence is a formula with no free
    variables; see :func:`is_sentence` / :func:`ensure_sentence`."""

    __slots__ = ()


def _check_formula(f, role: str = "operand") -> None:
    if not isinstance(f, Formula):
        raise FormulaError(f"{role} must be a formula: {f!r}")


@dataclass(frozen=True)
class Const(Formula):
    """A rational constant in [0,1]."""

    value: Fraction

    def __post_init__(self) -> None:
        v = as_fraction(self.value)
        if not 0 <= v <= 1:
            raise FormulaError(f"constant out of range [0,1]: {v}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Atom(Formula):
    pred: Symbol
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.pred, Symbol) or self.pred.kind != PREDICATE:
            raise FormulaError(f"atom head must be a predicate symbol: {self.pred!r}")
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.pred.arity:
            raise FormulaError(
                f"predicate {self.pred.name!r} takes {self.pred.arity} arguments, got {len(self.args)}")
        for arg in self.args:
            if not isinstance(arg, Term):
                raise FormulaError(f"not a term: {arg!r}")


@dataclass(frozen=True)
class Neg(Formula):
    """1 - x.  Stored as its own node for printing fidelity."""

    body: Formula

    def __post_init__(self) -> None:
        _check_formula(self.body)


@dataclass(frozen=True)
class Min(Formula):
    left: Formula
    right: Formula

    def __post_init__(self) -> None:
        _check_formula(self.left)
        _check_formula(self.right)


@dataclass(frozen=True)
class Max(Formula):
    left: Formula
    right: Formula

    def __post_init__(self) -> None:
        _check_formula(self.left)
        _check_formula(self.right)


@dataclass(frozen=True)
class DotMinus(Formula):
    """Truncated subtraction: max(left - right, 0)."""

    left: Formula
    right: Formula

    def __post_init__(self) -> None:
        _check_formula(self.left)
        _check_formula(self.right)


@dataclass(frozen=True)
class DotPlus(Formula):
    """Truncated addition: min(left + right, 1)."""

    left: Formula
    right: Formula

    def __post_init__(self) -> None:
        _check_formula(self.left)
        _check_formula(self.right)


@dataclass(frozen=True)
class Prod(Formula):
    left: Formula
    right: Formula

    def __post_init__(self) -> None:
        _check_formula(self.left)
        _check_formula(self.right)


@dataclass(frozen=True)
class ScaleDiv(Formula):
    """Clamped division by a positive rational: min(body / divisor, 1)."""

    body: Formula
    divisor: Fraction

    def __post_init__(self) -> None:
        _check_formula(self.body)
        q = as_fraction(self.divisor)
        if q <= 0:
            raise FormulaError(f"scale divisor must be positive: {q}")
        object.__setattr__(self, "divisor", q)


@dataclass(frozen=True)
class Sup(Formula):
    var: str
    body: Formula

    def __post_init__(self) -> None:
        check_name(self.var, "variable")
        _check_formula(self.body)


@dataclass(frozen=True)
class Inf(Formula):
    var: str
    body: Formula

    def __post_init__(self) -> None:
        check_name(self.var, "variable")
        _check_formula(self.body)


FormulaLike = Union[Formula, Fraction, int, str]


def as_formula(f: FormulaLike) -> Formula:
    """Wrap a bare rational as a constant; pass formulas through."""
    if isinstance(f, Formula):
        return f
    return Const(as_fraction(f))


def const(value) -> Const:
    return Const(as_fraction(value))


def neg(f: FormulaLike) -> Neg:
    """1 - f."""
    return Neg(as_formula(f))


def dot_minus(f: FormulaLike, g: FormulaLike) -> DotMinus:
    """Truncated subtraction node: evaluates to max(f - g, 0)."""
    return DotMinus(as_formula(f), as_formula(g))


def dot_plus(f: FormulaLike, g: FormulaLike) -> DotPlus:
    """Truncated addition node: evaluates to min(f + g, 1)."""
    return DotPlus(as_formula(f), as_formula(g))


def scale_div_clamp(f: FormulaLike, q) -> ScaleDiv:
    """Clamped division node: evaluates to min(f / q, 1) for q > 0."""
    return ScaleDiv(as_formula(f), as_fraction(q))


# Exact value-level counterparts of the derived connectives.  The evaluator
# and several tests share these so there is a single source of truth.

def truncated_sub(x: Fraction, y: Fraction) -> Fraction:
    return max(x - y, Fraction(0))


def truncated_add(x: Fraction, y: Fraction) -> Fraction:
    return min(x + y, Fraction(1))


def div_clamp(x: Fraction, q: Fraction) -> Fraction:
    return min(x / q, Fraction(1))


def free_variables(f: Formula) -> frozenset[str]:
    """Variables occurring outside the scope of a binding sup/inf.

    Inner binders shadow outer ones, so ``sup x . P(x)`` has no free
    variables while ``min(P(x), sup x . Q(x))`` has exactly {x}.
    """
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Atom):
        out: set[str] = set()
        for arg in f.args:
            _term_vars(arg, out)
        return frozenset(out)
    if isinstance(f, Neg):
        return free_variables(f.body)
    if isinstance(f, (Min, Max, DotMinus, DotPlus, Prod)):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, ScaleDiv):
        return free_variables(f.body)
    if isinstance(f, (Sup, Inf)):
        return free_variables(f.body) - {f.var}
    raise FormulaError(f"not a formula: {f!r}")


def _term_vars(t: Term, out: set[str]) -> None:
    if isinstance(t, Var):
        out.add(t.name)
    else:
        for arg in t.args:
            _term_vars(arg, out)


def vocabulary_of(f: Formula) -> Vocabulary:
    """The set of symbols occurring in f, with d adjoined."""
    symbols: set[Symbol] = set()
    _collect_symbols(f, symbols)
    return Vocabulary(symbols)


def _collect_symbols(f: Formula, out: set[Symbol]) -> None:
    if isinstance(f, Const):
        return
    if isinstance(f, Atom):
        out.add(f.pred)
        for arg in f.args:
            _term_symbols(arg, out)
    elif isinstance(f, (Neg, ScaleDiv)):
        _collect_symbols(f.body, out)
    elif isinstance(f, (Min, Max, DotMinus, DotPlus, Prod)):
        _collect_symbols(f.left, out)
        _collect_symbols(f.right, out)
    elif isinstance(f, (Sup, Inf)):
        _collect_symbols(f.body, out)
    else:
        raise FormulaError(f"not a formula: {f!r}")


def _term_symbols(t: Term, out: set[Symbol]) -> None:
    if isinstance(t, App):
        out.add(t.func)
        for arg in t.args:
            _term_symbols(arg, out)


def is_sentence(f: Formula) -> bool:
    return not free_variables(f)


def ensure_sentence(f: Formula, what: str = "sentence") -> Formula:
    """Return f unchanged, raising if it has free variables."""
    _check_formula(f, what)
    fv = free_variables(f)
    if fv:
        names = ", ".join(sorted(fv))
        raise FormulaError(f"{what} has free variables: {names}")
    return f


def formula_size(f: Formula) -> int:
    """Number of formula nodes; atoms and constants count 1."""
    if isinstance(f, (Const, Atom)):
        return 1
    if isinstance(f, (Neg, ScaleDiv)):
        body = f.body
        return 1 + formula_size(body)
    if isinstance(f, (Min, Max, DotMinus, DotPlus, Prod)):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if isinstance(f, (Sup, Inf)):
        return 1 + formula_size(f.body)
    raise FormulaError(f"not a formula: {f!r}")
