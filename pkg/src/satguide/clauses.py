"""First-order terms, literals, clauses, and the shared interned signature.

Every symbol that appears in a term or literal is registered in a
:class:`Signature`, which hands out dense, stable integer ids.  Four marker
symbols are reserved at ids 0-3: one standing for all variables, one for all
Skolem functions, and one for each literal polarity.  The featurizer relies
on these ids being fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

KIND_FUNCTION = "function"
KIND_PREDICATE = "predicate"
KIND_VARIABLE_MARKER = "variable-marker"
KIND_SKOLEM_MARKER = "skolem-marker"
KIND_POS_MARKER = "pos-marker"
KIND_NEG_MARKER = "neg-marker"

# Reserved ids of the marker symbols.
VAR_MARKER = 0
SKOLEM_MARKER = 1
POS_MARKER = 2
NEG_MARKER = 3

DEFAULT_SKOLEM_PREFIXES = ("sko", "esk")

EQUALITY = "="

ROLE_INPUT = "input"
ROLE_DERIVED = "derived"


class ArityClash(Exception):
    """A symbol name was re-registered with a different arity or kind."""


@dataclass(frozen=True)
class Symbol:
    id: int
    name: str
    arity: int
    kind: str


_MARKERS = (
    Symbol(VAR_MARKER, "$var", 0, KIND_VARIABLE_MARKER),
    Symbol(SKOLEM_MARKER, "$sko", 0, KIND_SKOLEM_MARKER),
    Symbol(POS_MARKER, "$pos", 0, KIND_POS_MARKER),
    Symbol(NEG_MARKER, "$neg", 0, KIND_NEG_MARKER),
)

# How the marker symbols and the padding slot render in debug output.
MARKER_DISPLAY = {VAR_MARKER: "⊛", SKOLEM_MARKER: "⊙",
                  POS_MARKER: "⊕", NEG_MARKER: "⊖"}


@dataclass(frozen=True)
class FrozenSignature:
    """Immutable snapshot of a signature, taken when a model is trained.

    The feature space of a model is fixed by this snapshot: symbols
    registered later do not get feature indices.
    """

    symbols: tuple[Symbol, ...]

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def base(self) -> int:
        # one extra slot for the padding symbol
        return len(self.symbols) + 1

    @property
    def dimension(self) -> int:
        return self.base ** 3


class Signature:
    """Append-only symbol table with stable dense ids.

    A signature is single-writer while clauses are being read or generated;
    once frozen into a :class:`FrozenSignature` the snapshot is immutable and
    can be shared freely.
    """

    def __init__(self, skolem_prefixes: tuple[str, ...] = DEFAULT_SKOLEM_PREFIXES):
        self.skolem_prefixes = tuple(skolem_prefixes)
        self._symbols: list[Symbol] = []
        self._lookup: dict[str, int] = {}
        # per-symbol label used in feature trees (Skolem functions collapse
        # to the Skolem marker, everything else labels as itself)
        self._feature_labels: list[int] = []
        for marker in _MARKERS:
            self._append(marker.name, marker.arity, marker.kind)

    def _append(self, name: str, arity: int, kind: str) -> int:
        sym_id = len(self._symbols)
        self._symbols.append(Symbol(sym_id, name, arity, kind))
        self._lookup[name] = sym_id
        if kind == KIND_FUNCTION and self.is_skolem(name):
            self._feature_labels.append(SKOLEM_MARKER)
        else:
            self._feature_labels.append(sym_id)
        return sym_id

    @property
    def size(self) -> int:
        return len(self._symbols)

    def intern_symbol(self, name: str, arity: int, kind: str) -> int:
        """Return the id for ``name``, registering it on first sight."""
        if not name:
            raise ValueError("symbol name must be nonempty")
        existing = self._lookup.get(name)
        if existing is not None:
            sym = self._symbols[existing]
            if sym.arity != arity or sym.kind != kind:
                raise ArityClash(
                    f"symbol {name!r} already registered as {sym.kind}/{sym.arity}, "
                    f"cannot re-register as {kind}/{arity}")
            return existing
        return self._append(name, arity, kind)

    def is_skolem(self, name: str) -> bool:
        """Whether ``name`` looks like a Skolem symbol (by name prefix)."""
        return name.startswith(self.skolem_prefixes)

    def symbol(self, sym_id: int) -> Symbol:
        return self._symbols[sym_id]

    def name_of(self, sym_id: int) -> str:
        return self._symbols[sym_id].name

    def feature_label(self, sym_id: int) -> int:
        return self._feature_labels[sym_id]

    def display_name(self, sym_id: int) -> str:
        """Name used in debug output; markers render as their glyphs."""
        return MARKER_DISPLAY.get(sym_id, self._symbols[sym_id].name)

    def freeze(self) -> FrozenSignature:
        return FrozenSignature(tuple(self._symbols))

    @classmethod
    def from_frozen(cls, frozen: FrozenSignature,
                    skolem_prefixes: tuple[str, ...] = DEFAULT_SKOLEM_PREFIXES) -> "Signature":
        """A live signature whose ids extend the frozen snapshot."""
        sig = cls(skolem_prefixes)
        for sym in frozen.symbols[len(_MARKERS):]:
            got = sig.intern_symbol(sym.name, sym.arity, sym.kind)
            if got != sym.id:
                raise ArityClash(f"snapshot ids are not dense at {sym.name!r}")
        return sig


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class App:
    symbol: int
    args: tuple = ()


Term = Var | App


@dataclass(frozen=True, slots=True)
class Literal:
    positive: bool
    predicate: int
    args: tuple = ()


@dataclass(eq=False)
class Clause:
    """A disjunction of literals.

    ``id`` is assigned per context (file order when parsed, creation order
    inside a proof search) and ``age`` equals ``id``; ``parents`` only ever
    reference smaller ids.  Clauses are not mutated after construction.
    """

    id: int
    literals: tuple[Literal, ...]
    parents: tuple[int, ...] = ()
    age: int = 0
    role: str = ROLE_INPUT


def term_len(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_len(a) for a in t.args)


def literal_len(lit: Literal) -> int:
    """Symbol occurrences in a literal; the polarity is not a symbol."""
    return 1 + sum(term_len(a) for a in lit.args)


def clause_len(clause: Clause) -> int:
    """Number of symbol occurrences in the clause (its "length")."""
    return sum(literal_len(lit) for lit in clause.literals)


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 1
    return 1 + max(term_depth(a) for a in t.args)


def clause_depth(clause: Clause) -> int:
    depths = [term_depth(a) for lit in clause.literals for a in lit.args]
    return 1 + max(depths, default=0)


def weighted_symbol_count(clause: Clause, var_weight: float = 0.5) -> float:
    """Like :func:`clause_len` but variable occurrences count ``var_weight``."""

    def term_count(t: Term) -> float:
        if isinstance(t, Var):
            return var_weight
        return 1.0 + sum(term_count(a) for a in t.args)

    return sum(1.0 + sum(term_count(a) for a in lit.args)
               for lit in clause.literals)
