"""Exact evaluation of sentences in finite structures, metric and Lipschitz
validation, reducts, and consequence relative to a finite model family.

All consequence checks here are relativized to an explicit
:class:`ModelFamily`: the unrestricted relation quantifies over a proper
class of structures and is not decidable.  Certificates therefore record
family-relative verdicts, with an explicit ``vacuous`` flag when no member
satisfies the hypothesis side of a clause.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Optional

from .logic import (
    Atom, App, Const, DotMinus, DotPlus, Formula, FormulaError, Inf,
    LogicError, Max, Min, Neg, PREDICATE, Prod, ScaleDiv, Sup, Symbol, Term,
    Var, Vocabulary, VocabularyError, as_fraction, check_name, div_clamp,
    ensure_sentence, truncated_add, truncated_sub, vocabulary_of,
)


class EvaluationError(LogicError):
    """Missing symbol or unbound variable during evaluation."""


# ---------------------------------------------------------------------------
# Structures, families, theories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Structure:
    """A finite [0,1]-valued structure.

    ``pred_tables`` maps each predicate name to a total table from element
    tuples to rationals in [0,1]; ``func_tables`` maps function names to
    total tables into the universe.  ``pseudo_metric`` marks the structure
    as a general [0,1]-valued structure: the checker then allows
    d(x,y) = 0 for x != y.
    """

    name: str
    vocabulary: Vocabulary
    universe: tuple[str, ...]
    pred_tables: Mapping[str, Mapping[tuple[str, ...], Fraction]]
    func_tables: Mapping[str, Mapping[tuple[str, ...], str]]
    pseudo_metric: bool = False

    def __post_init__(self) -> None:
        check_name(self.name, "structure")
        universe = tuple(self.universe)
        if not universe:
            raise VocabularyError("universe must be nonempty")
        if len(set(universe)) != len(universe):
            raise VocabularyError("universe elements must be distinct")
        for elem in universe:
            check_name(elem, "universe element")
        elements = frozenset(universe)
        preds: dict[str, dict[tuple[str, ...], Fraction]] = {}
        funcs: dict[str, dict[tuple[str, ...], str]] = {}
        for sym in self.vocabulary:
            source = self.pred_tables if sym.kind == PREDICATE else self.func_tables
            raw = source.get(sym.name) if hasattr(source, "get") else None
            if raw is None:
                raise VocabularyError(f"missing table for symbol {sym.name!r}")
            table = {}
            for key, value in raw.items():
                key = tuple(key)
                if len(key) != sym.arity or any(e not in elements for e in key):
                    raise VocabularyError(
                        f"bad table key for {sym.name!r}: {key!r}")
                if sym.kind == PREDICATE:
                    value = as_fraction(value)
                    if not 0 <= value <= 1:
                        raise VocabularyError(
                            f"value out of range for {sym.name!r}{key!r}: {value}")
                else:
                    if value not in elements:
                        raise VocabularyError(
                            f"function {sym.name!r}{key!r} maps outside the universe: {value!r}")
                table[key] = value
            for key in product(universe, repeat=sym.arity):
                if key not in table:
                    raise VocabularyError(f"table for {sym.name!r} is missing entry {key!r}")
            if sym.kind == PREDICATE:
                preds[sym.name] = table
            else:
                funcs[sym.name] = table
        extra = (set(self.pred_tables) | set(self.func_tables)) - {s.name for s in self.vocabulary}
        if extra:
            raise VocabularyError(f"tables for undeclared symbols: {sorted(extra)}")
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "pred_tables", preds)
        object.__setattr__(self, "func_tables", funcs)
        object.__setattr__(self, "_elements", elements)

    def distance(self, x: str, y: str) -> Fraction:
        return self.pred_tables["d"][(x, y)]


def complete_distance(universe: Iterable[str],
                      entries: Mapping[tuple[str, str], object] = (),
                      default=Fraction(1)) -> dict[tuple[str, str], Fraction]:
    """Build a total d table from sparse entries.

    d(x,x) = 0 always; each given entry populates both orders; any other
    pair defaults to ``default`` (1 unless overridden).
    """
    universe = tuple(universe)
    default = as_fraction(default)
    table: dict[tuple[str, str], Fraction] = {}
    for x in universe:
        table[(x, x)] = Fraction(0)
    if hasattr(entries, "items"):
        entries = entries.items()
    for (x, y), value in entries:
        value = as_fraction(value)
        if x == y:
            if value != 0:
                raise VocabularyError(f"d({x},{x}) must be 0, got {value}")
            continue
        table[(x, y)] = value
        table[(y, x)] = value
    for x in universe:
        for y in universe:
            table.setdefault((x, y), default)
    return table


def make_structure(name: str, vocabulary: Vocabulary, universe: Iterable[str],
                   preds: Mapping[str, object] = (), funcs: Mapping[str, object] = (),
                   distances: Mapping[tuple[str, str], object] = (),
                   pseudo_metric: bool = False) -> Structure:
    """Convenience builder: applies the d completion rule and accepts scalar
    shorthand for 0-ary tables."""
    universe = tuple(universe)
    pred_tables: dict[str, Mapping] = {"d": complete_distance(universe, distances)}
    func_tables: dict[str, Mapping] = {}
    preds = dict(preds) if preds else {}
    funcs = dict(funcs) if funcs else {}
    for source, sink in ((preds, pred_tables), (funcs, func_tables)):
        for sym_name, table in source.items():
            if not hasattr(table, "items"):
                table = {(): table}
            sink[sym_name] = {tuple(k) if isinstance(k, tuple) else (k,) if k != () else ():
                              v for k, v in table.items()}
    return Structure(name, vocabulary, universe, pred_tables, func_tables,
                     pseudo_metric=pseudo_metric)


@dataclass(frozen=True)
class ModelFamily:
    """A named finite family of structures over a common vocabulary: the
    universe of discourse for all consequence checks."""

    name: str
    vocabulary: Vocabulary
    members: tuple[Structure, ...]

    def __post_init__(self) -> None:
        members = tuple(self.members)
        names = [m.name for m in members]
        if len(set(names)) != len(names):
            raise VocabularyError(f"duplicate structure names in family {self.name!r}")
        for member in members:
            if member.vocabulary != self.vocabulary:
                raise VocabularyError(
                    f"structure {member.name!r} does not match the family vocabulary")
        object.__setattr__(self, "members", members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True, init=False)
class Theory:
    """An ordered set of sentences over one vocabulary."""

    sentences: tuple[Formula, ...]

    def __init__(self, sentences: Iterable[Formula] = ()) -> None:
        ordered: dict[Formula, None] = {}
        for s in sentences:
            ordered.setdefault(ensure_sentence(s), None)
        object.__setattr__(self, "sentences", tuple(ordered))

    @property
    def vocabulary(self) -> Vocabulary:
        symbols: set[Symbol] = set()
        for s in self.sentences:
            symbols |= vocabulary_of(s).symbols
        return Vocabulary(symbols)

    def extended(self, *more: Formula) -> "Theory":
        return Theory(self.sentences + more)

    def union(self, other: "Theory") -> "Theory":
        return Theory(self.sentences + other.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __len__(self) -> int:
        return len(self.sentences)


EMPTY_THEORY = Theory()


def _as_theory(theory: Optional[Theory]) -> Theory:
    if theory is None:
        return EMPTY_THEORY
    if not isinstance(theory, Theory):
        return Theory(theory)
    return theory


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(structure: Structure, formula: Formula,
             assignment: Optional[Mapping[str, str]] = None) -> Fraction:
    """Truth value of ``formula`` in ``structure`` under ``assignment``.

    sup/inf range over the finite universe as max/min; connectives follow
    their exact rational contracts.  The result is always in [0,1].
    Shared subformulas (the limit-sequence constructions reuse whole
    subtrees) are evaluated once per environment.
    """
    env = dict(assignment or {})
    for var, elem in env.items():
        if elem not in structure._elements:
            raise EvaluationError(f"assignment maps {var!r} to unknown element {elem!r}")
    return _eval(structure, formula, env, {})


def _eval(structure: Structure, f: Formula, env: dict[str, str], memo: dict) -> Fraction:
    key = (id(f), frozenset(env.items()))
    cached = memo.get(key)
    if cached is not None:
        return cached
    if isinstance(f, Const):
        value = f.value
    elif isinstance(f, Atom):
        table = structure.pred_tables.get(f.pred.name)
        if table is None:
            raise EvaluationError(f"structure {structure.name!r} has no predicate {f.pred.name!r}")
        args = tuple(_eval_term(structure, t, env) for t in f.args)
        try:
            value = table[args]
        except KeyError:
            raise EvaluationError(
                f"predicate {f.pred.name!r} has no entry for {args!r} "
                f"(arity mismatch with the structure?)") from None
    elif isinstance(f, Neg):
        value = 1 - _eval(structure, f.body, env, memo)
    elif isinstance(f, Min):
        value = min(_eval(structure, f.left, env, memo), _eval(structure, f.right, env, memo))
    elif isinstance(f, Max):
        value = max(_eval(structure, f.left, env, memo), _eval(structure, f.right, env, memo))
    elif isinstance(f, DotMinus):
        value = truncated_sub(_eval(structure, f.left, env, memo),
                              _eval(structure, f.right, env, memo))
    elif isinstance(f, DotPlus):
        value = truncated_add(_eval(structure, f.left, env, memo),
                              _eval(structure, f.right, env, memo))
    elif isinstance(f, Prod):
        value = _eval(structure, f.left, env, memo) * _eval(structure, f.right, env, memo)
    elif isinstance(f, ScaleDiv):
        value = div_clamp(_eval(structure, f.body, env, memo), f.divisor)
    elif isinstance(f, (Sup, Inf)):
        pick = max if isinstance(f, Sup) else min
        value = None
        for elem in structure.universe:
            inner = dict(env)
            inner[f.var] = elem
            v = _eval(structure, f.body, inner, memo)
            value = v if value is None else pick(value, v)
    else:
        raise EvaluationError(f"not a formula: {f!r}")
    memo[key] = value
    return value


def _eval_term(structure: Structure, t: Term, env: dict[str, str]) -> str:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise EvaluationError(f"unbound variable {t.name!r}") from None
    table = structure.func_tables.get(t.func.name)
    if table is None:
        raise EvaluationError(f"structure {structure.name!r} has no function {t.func.name!r}")
    args = tuple(_eval_term(structure, a, env) for a in t.args)
    try:
        return table[args]
    except KeyError:
        raise EvaluationError(
            f"function {t.func.name!r} has no entry for {args!r}") from None


# ---------------------------------------------------------------------------
# Metric and Lipschitz checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str  # reflexivity | separation | symmetry | triangle | lipschitz
    witness: tuple[str, ...]
    values: tuple[Fraction, ...]


@dataclass(frozen=True)
class StructureReport:
    metric_ok: bool
    lipschitz_ok: bool
    violations: tuple[Violation, ...]


def check_structure(structure: Structure) -> StructureReport:
    """Check the metric axioms of d and the declared Lipschitz bounds.

    Finite metrics are automatically complete, so only the axioms are
    checked.  Violations are data, not errors; they are enumerated with
    witnesses in a fixed order (universe order for element tuples, sorted
    symbol names), so the first violation of each kind has the
    lexicographically least witness.
    """
    universe = structure.universe
    d = structure.pred_tables["d"]
    violations: list[Violation] = []

    for x in universe:
        if d[(x, x)] != 0:
            violations.append(Violation("reflexivity", (x,), (d[(x, x)],)))
    if not structure.pseudo_metric:
        for i, x in enumerate(universe):
            for y in universe[i + 1:]:
                if d[(x, y)] == 0:
                    violations.append(Violation("separation", (x, y), (Fraction(0),)))
    for i, x in enumerate(universe):
        for y in universe[i + 1:]:
            if d[(x, y)] != d[(y, x)]:
                violations.append(Violation("symmetry", (x, y), (d[(x, y)], d[(y, x)])))
    for x, y, z in product(universe, repeat=3):
        if len({x, y, z}) < 3:
            continue
        if d[(x, z)] > d[(x, y)] + d[(y, z)]:
            violations.append(Violation("triangle", (x, y, z),
                                        (d[(x, z)], d[(x, y)], d[(y, z)])))
    metric_ok = not violations

    index = {elem: k for k, elem in enumerate(universe)}
    lipschitz: list[Violation] = []
    for sym in structure.vocabulary:
        if sym.modulus is None or sym.arity == 0:
            continue
        bound = sym.modulus
        table = (structure.pred_tables if sym.kind == PREDICATE else structure.func_tables)[sym.name]
        for coord in range(sym.arity):
            for base in product(universe, repeat=sym.arity):
                for repl in universe:
                    if index[repl] <= index[base[coord]]:
                        continue
                    other = base[:coord] + (repl,) + base[coord + 1:]
                    dist = d[(base[coord], repl)]
                    if sym.kind == PREDICATE:
                        gap = abs(table[base] - table[other])
                    else:
                        gap = d[(table[base], table[other])]
                    if gap > bound * dist:
                        lipschitz.append(Violation(
                            "lipschitz", (sym.name, str(coord)) + base + (repl,),
                            (gap, dist)))
    lipschitz_ok = not lipschitz
    return StructureReport(metric_ok, lipschitz_ok, tuple(violations + lipschitz))


# ---------------------------------------------------------------------------
# Reducts and family-relative consequence
# ---------------------------------------------------------------------------

def reduct(structure: Structure, vocabulary: Vocabulary) -> Structure:
    """Restrict a structure to the symbols of ``vocabulary`` (d is always
    retained).  Lipschitz metadata is inherited from the structure."""
    selected = []
    for sym in vocabulary:
        own = structure.vocabulary.lookup(sym.name)
        if own is None or own != sym:
            raise VocabularyError(
                f"symbol {sym.name!r} is not present in structure {structure.name!r}")
        selected.append(own)
    names = {s.name for s in selected}
    return Structure(
        structure.name, Vocabulary(selected), structure.universe,
        {k: v for k, v in structure.pred_tables.items() if k in names},
        {k: v for k, v in structure.func_tables.items() if k in names},
        pseudo_metric=structure.pseudo_metric)


def _require_vocab(family: ModelFamily, *parts: Vocabulary) -> None:
    for part in parts:
        if not part <= family.vocabulary:
            missing = sorted(s.name for s in part.symbols - family.vocabulary.symbols)
            raise VocabularyError(
                f"family {family.name!r} does not interpret: {', '.join(missing)}")


def family_models(family: ModelFamily, theory: Optional[Theory]) -> ModelFamily:
    """The sub-family of members in which every sentence of the theory is
    true (has value 0), in the original order."""
    theory = _as_theory(theory)
    _require_vocab(family, theory.vocabulary)
    kept = tuple(m for m in family.members
                 if all(evaluate(m, s) == 0 for s in theory))
    return ModelFamily(family.name, family.vocabulary, kept)


def family_consistent(family: ModelFamily, theory: Optional[Theory]) -> bool:
    """True iff the theory has at least one model within the family."""
    return len(family_models(family, theory)) > 0


@dataclass(frozen=True)
class Counterexample:
    model: str
    values: tuple[tuple[str, Fraction], ...]

    def render(self) -> str:
        pairs = " ".join(f"{k}={v}" for k, v in self.values)
        return f"{self.model} {pairs}" if pairs else self.model


@dataclass(frozen=True)
class EntailsVerdict:
    holds: bool
    vacuous: bool
    counterexample: Optional[Counterexample]

    def __bool__(self) -> bool:
        return self.holds


def family_entails_ge(family: ModelFamily, theory: Optional[Theory],
                      lhs: Formula, rhs: Formula) -> EntailsVerdict:
    """Does lhs >= rhs hold in every member satisfying the theory?

    Returns the first violating member (family order) with both values.
    """
    theory = _as_theory(theory)
    ensure_sentence(lhs)
    ensure_sentence(rhs)
    _require_vocab(family, theory.vocabulary, vocabulary_of(lhs), vocabulary_of(rhs))
    models = family_models(family, theory)
    for member in models:
        left = evaluate(member, lhs)
        right = evaluate(member, rhs)
        if left < right:
            witness = Counterexample(member.name, (("lhs", left), ("rhs", right)))
            return EntailsVerdict(False, False, witness)
    return EntailsVerdict(True, len(models) == 0, None)


# ---------------------------------------------------------------------------
# Interpolant certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClauseCheck:
    label: str
    holds: bool
    vacuous: bool
    counterexamples: tuple[Counterexample, ...]

    def render(self) -> str:
        line = f"{'PASS' if self.holds else 'FAIL'} {self.label}"
        if self.holds and self.vacuous:
            line += " vacuous"
        if not self.holds:
            line += " " + self.counterexamples[0].render()
        return line


@dataclass(frozen=True)
class InterpolantCertificate:
    """Verdict of an interpolant check over a family, one clause per
    required inequality, with all counterexamples per clause."""

    kind: str
    epsilon: Optional[Fraction]
    passed: bool
    clauses: tuple[ClauseCheck, ...]

    def report(self) -> str:
        lines = [c.render() for c in self.clauses]
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def _clause(label: str, models: Iterable[Structure], bad) -> ClauseCheck:
    counterexamples = []
    count = 0
    for member in models:
        count += 1
        found = bad(member)
        if found is not None:
            counterexamples.append(Counterexample(member.name, found))
    return ClauseCheck(label, not counterexamples, count == 0, tuple(counterexamples))


def _side_vocab(theory: Theory, sentence: Formula,
                declared: Optional[Vocabulary]) -> Vocabulary:
    if declared is not None:
        return declared
    return theory.vocabulary | vocabulary_of(sentence)


def _check_common(candidate: Formula, left: Vocabulary, right: Vocabulary) -> None:
    used = vocabulary_of(candidate)
    outside = sorted(s.name for s in used.symbols
                     if s not in left.symbols or s not in right.symbols)
    if outside:
        raise VocabularyError(
            "interpolant mentions symbols outside the common vocabulary: "
            + ", ".join(outside))


def is_weak_interpolant(family: ModelFamily, premise: Formula, conclusion: Formula,
                        candidate: Formula, eps, *,
                        premise_theory: Optional[Theory] = None,
                        conclusion_theory: Optional[Theory] = None,
                        premise_vocab: Optional[Vocabulary] = None,
                        conclusion_vocab: Optional[Vocabulary] = None) -> InterpolantCertificate:
    """Certificate that ``candidate`` is a weak eps-interpolant over the family.

    Clause c1: every member satisfying the premise theory in which the
    premise is true (value 0) makes the candidate true.  Clause c2: every
    member satisfying the conclusion theory in which the candidate is true
    keeps the conclusion at or below eps.
    """
    eps = _check_eps(eps)
    ensure_sentence(premise)
    ensure_sentence(conclusion)
    ensure_sentence(candidate)
    tv = _as_theory(premise_theory)
    tw = _as_theory(conclusion_theory)
    _check_common(candidate,
                  _side_vocab(tv, premise, premise_vocab),
                  _side_vocab(tw, conclusion, conclusion_vocab))

    def c1_bad(member):
        value = evaluate(member, candidate)
        if value != 0:
            return (("premise", Fraction(0)), ("candidate", value))
        return None

    def c2_bad(member):
        value = evaluate(member, conclusion)
        if value > eps:
            return (("candidate", Fraction(0)), ("conclusion", value))
        return None

    c1 = _clause("c1", family_models(family, tv.extended(premise)), c1_bad)
    c2 = _clause("c2", family_models(family, tw.extended(candidate)), c2_bad)
    return InterpolantCertificate("weak", eps, c1.holds and c2.holds, (c1, c2))


def is_strong_interpolant(family: ModelFamily, premise: Formula, conclusion: Formula,
                          candidate: Formula, eps, *,
                          premise_theory: Optional[Theory] = None,
                          conclusion_theory: Optional[Theory] = None,
                          premise_vocab: Optional[Vocabulary] = None,
                          conclusion_vocab: Optional[Vocabulary] = None) -> InterpolantCertificate:
    """Certificate that ``candidate`` is a strong eps-interpolant over the
    family: (i) premise >= candidate in all premise-theory models, and (ii)
    candidate >= conclusion - eps (truncated) in all conclusion-theory
    models."""
    eps = _check_eps(eps)
    ensure_sentence(premise)
    ensure_sentence(conclusion)
    ensure_sentence(candidate)
    tv = _as_theory(premise_theory)
    tw = _as_theory(conclusion_theory)
    _check_common(candidate,
                  _side_vocab(tv, premise, premise_vocab),
                  _side_vocab(tw, conclusion, conclusion_vocab))

    def i_bad(member):
        upper = evaluate(member, premise)
        value = evaluate(member, candidate)
        if upper < value:
            return (("premise", upper), ("candidate", value))
        return None

    def ii_bad(member):
        value = evaluate(member, candidate)
        lower = truncated_sub(evaluate(member, conclusion), eps)
        if value < lower:
            return (("candidate", value), ("conclusion_minus_eps", lower))
        return None

    ci = _clause("i", family_models(family, tv), i_bad)
    cii = _clause("ii", family_models(family, tw), ii_bad)
    return InterpolantCertificate("strong", eps, ci.holds and cii.holds, (ci, cii))


def FormulaErrorRange(eps: Fraction):
    from .logic import FormulaError
    return FormulaError(f"eps must satisfy 0 < eps <= 1: {eps}")
