"""Clause evaluation functions and the weighted round-robin strategy.

A strategy is an ordered list of (frequency, CEF) pairs.  Selection step k
uses the CEF whose block contains position k mod (sum of frequencies): the
first CEF runs for its frequency's worth of consecutive picks, then the
next, and so on.  Each CEF ranks unprocessed clauses by its own weight;
lower weights are selected first.

The learned CEF scores a clause as gamma * len(C) + 1 if the model
classifies it positive, gamma * len(C) + 10 otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .clauses import Clause, Signature, clause_len, weighted_symbol_count
from .svm import Model, POS, load_model, predict

LEARNED = "learned"
CLAUSE_LEN = "clause_len"
FIFO = "fifo"
SYMBOL_COUNT = "symbol_count"

POSITIVE_WEIGHT = 1.0
NEGATIVE_WEIGHT = 10.0

# Stand-in for the usual hand-tuned prover heuristics: mostly smallest
# clause first, with a FIFO pick every sixth selection.
BASELINE_SPEC = "5*ClauseLen,1*Fifo"


@dataclass(frozen=True)
class CEF:
    kind: str
    gamma: float = 0.0
    model_path: str = ""
    model: Model | None = field(default=None, compare=False)

    @property
    def name(self) -> str:
        if self.kind == LEARNED:
            return f"Learned({self.model_path},gamma={self.gamma!r})"
        return {CLAUSE_LEN: "ClauseLen", FIFO: "Fifo",
                SYMBOL_COUNT: "SymbolCount"}[self.kind]


@dataclass(frozen=True)
class Strategy:
    entries: tuple[tuple[int, CEF], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("a strategy needs at least one CEF")
        if any(freq < 1 for freq, _ in self.entries):
            raise ValueError("frequencies must be >= 1")

    @property
    def cycle_length(self) -> int:
        return sum(freq for freq, _ in self.entries)


def clause_len_cef() -> CEF:
    return CEF(CLAUSE_LEN)


def fifo_cef() -> CEF:
    return CEF(FIFO)


def symbol_count_cef() -> CEF:
    return CEF(SYMBOL_COUNT)


def learned_cef(model: Model, gamma: float, model_path: str = "<memory>") -> CEF:
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return CEF(LEARNED, gamma, model_path, model)


def preweight(clause: Clause, model: Model, sig: Signature,
              stats: dict | None = None) -> float:
    """1 for positively classified clauses, 10 otherwise."""
    if predict(clause, model, sig, stats) == POS:
        return POSITIVE_WEIGHT
    return NEGATIVE_WEIGHT


def weight(clause: Clause, model: Model, gamma: float, sig: Signature,
           stats: dict | None = None) -> float:
    """gamma * len(C) + preweight(C, M); lower is better."""
    return gamma * clause_len(clause) + preweight(clause, model, sig, stats)


def next_entry_index(strategy: Strategy, step: int) -> int:
    """Index of the strategy entry that owns selection ``step``."""
    r = step % strategy.cycle_length
    for k, (freq, _) in enumerate(strategy.entries):
        if r < freq:
            return k
        r -= freq
    raise AssertionError("unreachable: cycle position out of range")


def next_cef(strategy: Strategy, step: int) -> CEF:
    return strategy.entries[next_entry_index(strategy, step)][1]


def evaluate(clause: Clause, cef: CEF, sig: Signature,
             stats: dict | None = None) -> float:
    """The CEF's weight for a clause; lower means selected earlier."""
    if cef.kind == LEARNED:
        return weight(clause, cef.model, cef.gamma, sig, stats)
    if cef.kind == CLAUSE_LEN:
        return float(clause_len(clause))
    if cef.kind == FIFO:
        return float(clause.age)
    if cef.kind == SYMBOL_COUNT:
        return weighted_symbol_count(clause)
    raise ValueError(f"unknown CEF kind {cef.kind!r}")


_ENTRY_RE = re.compile(r"(\d+)\*(.+)", re.DOTALL)
_LEARNED_RE = re.compile(r"Learned\((.*),gamma=([^,()]+)\)")
_PLAIN_CEFS = {"ClauseLen": clause_len_cef, "Fifo": fifo_cef,
               "SymbolCount": symbol_count_cef}


def _split_entries(text: str) -> list[str]:
    parts = []
    depth = 0
    current = []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        current.append(ch)
    parts.append("".join(current))
    return parts


def parse_strategy(text: str, model_loader=load_model) -> Strategy:
    """Parse a strategy description string.

    Grammar::

        strategy  := "baseline" | entries | entries "+baseline"
        entries   := entry ("," entry)*
        entry     := FREQ "*" cef                  (FREQ a positive integer)
        cef       := "ClauseLen" | "Fifo" | "SymbolCount"
                   | "Learned(" PATH ",gamma=" GAMMA ")"

    ``baseline`` expands to ``5*ClauseLen,1*Fifo``; the ``+baseline`` suffix
    appends those entries.  Model files are loaded once per distinct path.
    """
    spec = text.strip()
    append_baseline = False
    if spec == "baseline":
        spec = BASELINE_SPEC
    elif spec.endswith("+baseline"):
        spec = spec[: -len("+baseline")]
        append_baseline = True
    models: dict[str, Model] = {}
    entries = []
    for part in _split_entries(spec):
        part = part.strip()
        m = _ENTRY_RE.fullmatch(part)
        if m is None:
            raise ValueError(f"bad strategy entry {part!r} (expected FREQ*CEF)")
        freq = int(m.group(1))
        cef_text = m.group(2).strip()
        if cef_text in _PLAIN_CEFS:
            cef = _PLAIN_CEFS[cef_text]()
        else:
            lm = _LEARNED_RE.fullmatch(cef_text)
            if lm is None:
                raise ValueError(f"bad CEF {cef_text!r} in strategy")
            path = lm.group(1).strip()
            try:
                gamma = float(lm.group(2))
            except ValueError:
                raise ValueError(f"bad gamma {lm.group(2)!r} in {cef_text!r}") from None
            if path not in models:
                models[path] = model_loader(path)
            cef = learned_cef(models[path], gamma, path)
        entries.append((freq, cef))
    if append_baseline:
        entries.extend(parse_strategy(BASELINE_SPEC).entries)
    return Strategy(tuple(entries))


def format_strategy(strategy: Strategy) -> str:
    """Canonical description string; parse_strategy round-trips it."""
    return ",".join(f"{freq}*{cef.name}" for freq, cef in strategy.entries)


def baseline_strategy() -> Strategy:
    return parse_strategy(BASELINE_SPEC)
