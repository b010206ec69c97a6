"""Linear clause classifier: L2-regularized squared-hinge SVM.

The trainer minimizes  (1/2) w'w + c * sum_i max(1 - y_i w'x_i, 0)^2  by
coordinate descent on the dual, where each alpha_i has the diagonal term
D = 1/(2c) added and no upper bound.  A clause is classified positive iff
w'x > 0, strictly; ties fall to negative.  There is no bias term.

Defaults for c, the stopping tolerance, and the epoch cap are this
implementation's own choices and are exposed as flags.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .clauses import Clause, FrozenSignature, Signature, Symbol
from .features import FormatError, SparseVector, clause_features, vectorize

POS = "pos"
NEG = "neg"

MODEL_FORMAT = "linear-clause-model v1"

# |pg| below this is treated as zero, as in standard coordinate descent
# implementations, to avoid chasing rounding noise.
_PG_FLOOR = 1e-12


class EmptyClass(Exception):
    """Training requires at least one example of each class."""


class NonFinite(Exception):
    """The optimization produced non-finite values (bad input scaling)."""


class SignatureTooLarge(Exception):
    """The signature exceeds the configured cap; prune it before training."""


@dataclass
class SolverConfig:
    c: float = 1.0
    tolerance: float = 1e-3
    max_epochs: int = 1000
    seed: int = 0
    # (size+1)^3 weights are stored densely; refuse absurd signatures
    # instead of silently hashing.
    max_signature: int = 200

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("penalty c must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class TrainingSet:
    examples: list[tuple[SparseVector, int]]
    dimension: int


@dataclass
class SolverInfo:
    epochs: int
    final_violation: float
    converged: bool
    # dual objective (maximization form) after each epoch, starting at 0.0
    dual_objectives: list[float] = field(default_factory=list)


@dataclass(eq=False)
class Model:
    w: np.ndarray
    dimension: int
    signature: FrozenSignature
    c: float
    epochs: int
    final_violation: float
    seed: int


def solve_l2svm(vectors, labels, dimension: int,
                cfg: SolverConfig) -> tuple[np.ndarray, SolverInfo]:
    """Dual coordinate descent on raw vectors; returns the weight vector.

    Stops when the largest projected-gradient violation seen in an epoch
    drops below the tolerance, or after ``max_epochs`` epochs.  Example
    order is reshuffled each epoch from the configured seed.
    """
    n = len(vectors)
    d_diag = 1.0 / (2.0 * cfg.c)
    idxs = []
    vals = []
    qdiag = np.empty(n)
    for k, vec in enumerate(vectors):
        idx = np.array([i - 1 for i, _ in vec.entries], dtype=np.intp)
        val = np.array([v for _, v in vec.entries], dtype=np.float64)
        idxs.append(idx)
        vals.append(val)
        qdiag[k] = float(val @ val) + d_diag
        if not np.isfinite(val).all() or not np.isfinite(qdiag[k]):
            raise NonFinite(f"example {k} has non-finite or overflowing "
                            "feature values; rescale the input")
    y = np.array(labels, dtype=np.float64)

    w = np.zeros(dimension)
    alpha = np.zeros(n)
    rng = np.random.default_rng(cfg.seed)
    duals = [0.0]
    converged = False
    violation = float("inf")
    epochs = 0
    for _ in range(cfg.max_epochs):
        violation = 0.0
        for i in rng.permutation(n):
            xi, vi = idxs[i], vals[i]
            g = y[i] * float(w[xi] @ vi) - 1.0 + d_diag * alpha[i]
            pg = min(g, 0.0) if alpha[i] == 0.0 else g
            if abs(pg) > violation:
                violation = abs(pg)
            if abs(pg) > _PG_FLOOR:
                old = alpha[i]
                new = old - g / qdiag[i]
                if new < 0.0:
                    new = 0.0
                alpha[i] = new
                if new != old:
                    w[xi] += (new - old) * y[i] * vi
        epochs += 1
        dual = float(alpha.sum()) - 0.5 * float(w @ w) \
            - 0.5 * d_diag * float(alpha @ alpha)
        duals.append(dual)
        if not np.isfinite(dual):
            raise NonFinite("dual objective diverged; rescale the input")
        if violation < cfg.tolerance:
            converged = True
            break
    if not np.isfinite(w).all():
        raise NonFinite("weight vector contains non-finite values")
    return w, SolverInfo(epochs, float(violation), converged, duals)


def train_vectors(ts: TrainingSet, frozen: FrozenSignature,
                  cfg: SolverConfig | None = None) -> Model:
    """Train on an already-vectorized example set."""
    cfg = cfg or SolverConfig()
    labels = [label for _, label in ts.examples]
    if 1 not in labels or -1 not in labels:
        raise EmptyClass("empty class: need at least one example of each label")
    vectors = [vec for vec, _ in ts.examples]
    w, info = solve_l2svm(vectors, labels, ts.dimension, cfg)
    return Model(w, ts.dimension, frozen, cfg.c, info.epochs,
                 info.final_violation, cfg.seed)


def train(pos, neg, sig: Signature, cfg: SolverConfig | None = None) -> Model:
    """Train a clause classifier from positive and negative clause sets.

    Freezes the signature, so the model's feature space is fixed at the
    current symbol table.
    """
    cfg = cfg or SolverConfig()
    if not pos or not neg:
        raise EmptyClass("empty class: need both positive and negative clauses")
    if sig.size > cfg.max_signature:
        raise SignatureTooLarge(
            f"signature has {sig.size} symbols (cap {cfg.max_signature}); "
            "prune the signature or raise the cap")
    frozen = sig.freeze()
    examples = []
    for clause in pos:
        examples.append((vectorize(clause_features(clause, sig), frozen), 1))
    for clause in neg:
        examples.append((vectorize(clause_features(clause, sig), frozen), -1))
    return train_vectors(TrainingSet(examples, frozen.dimension), frozen, cfg)


def score_vector(model: Model, vec: SparseVector) -> float:
    w = model.w
    total = 0.0
    for i, v in vec.entries:
        total += w[i - 1] * v
    return float(total)


def predict_vector(model: Model, vec: SparseVector) -> str:
    return POS if score_vector(model, vec) > 0.0 else NEG


def score(clause: Clause, model: Model, sig: Signature,
          stats: dict | None = None) -> float:
    return score_vector(model, vectorize(clause_features(clause, sig),
                                         model.signature, stats))


def predict(clause: Clause, model: Model, sig: Signature,
            stats: dict | None = None) -> str:
    """Classify a clause: positive iff w'x > 0 (strict), else negative."""
    return POS if score(clause, model, sig, stats) > 0.0 else NEG


@dataclass
class AccuracyReport:
    accuracy: float
    positive_recall: float | None
    negative_recall: float | None
    positives: int
    negatives: int


def accuracy(model: Model, ts: TrainingSet) -> AccuracyReport:
    """Fraction classified correctly, plus per-class recall.

    A recall is None when the example set has no examples of that class.
    """
    correct = 0
    pos_total = pos_correct = 0
    neg_total = neg_correct = 0
    for vec, label in ts.examples:
        got = predict_vector(model, vec)
        hit = (got == POS) == (label > 0)
        correct += hit
        if label > 0:
            pos_total += 1
            pos_correct += hit
        else:
            neg_total += 1
            neg_correct += hit
    n = len(ts.examples)
    return AccuracyReport(
        accuracy=correct / n if n else 0.0,
        positive_recall=pos_correct / pos_total if pos_total else None,
        negative_recall=neg_correct / neg_total if neg_total else None,
        positives=pos_total,
        negatives=neg_total,
    )


def save_model(model: Model, path: str) -> None:
    """Text serialization: header, symbol table, sparse nonzero weights."""
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(MODEL_FORMAT + "\n")
        fp.write(f"dimension {model.dimension}\n")
        fp.write(f"c {model.c!r}\n")
        fp.write(f"epochs {model.epochs}\n")
        fp.write(f"violation {model.final_violation!r}\n")
        fp.write(f"seed {model.seed}\n")
        fp.write(f"symbols {model.signature.size}\n")
        for sym in model.signature.symbols:
            fp.write(f"{sym.id} {sym.name} {sym.arity} {sym.kind}\n")
        nonzero = np.nonzero(model.w)[0]
        fp.write(f"weights {len(nonzero)}\n")
        for j in nonzero:
            fp.write(f"{j + 1} {float(model.w[j])!r}\n")
        fp.write("end\n")


def _header_value(line: str, key: str, path: str) -> str:
    parts = line.split(maxsplit=1)
    if len(parts) != 2 or parts[0] != key:
        raise FormatError(f"{path}: expected '{key} ...', found {line!r}")
    return parts[1]


def load_model(path: str) -> Model:
    """Inverse of :func:`save_model`; raises FormatError on corrupt files."""
    try:
        with open(path, "r", encoding="utf-8") as fp:
            return _parse_model(fp, path)
    except (EOFError, ValueError) as exc:
        raise FormatError(f"{path}: corrupt model file ({exc})") from exc


def _read_line(fp, path: str) -> str:
    line = fp.readline()
    if not line:
        raise FormatError(f"{path}: truncated model file")
    return line.rstrip("\n")


def _parse_model(fp: io.TextIOBase, path: str) -> Model:
    if _read_line(fp, path) != MODEL_FORMAT:
        raise FormatError(f"{path}: not a model file")
    dimension = int(_header_value(_read_line(fp, path), "dimension", path))
    c = float(_header_value(_read_line(fp, path), "c", path))
    epochs = int(_header_value(_read_line(fp, path), "epochs", path))
    violation = float(_header_value(_read_line(fp, path), "violation", path))
    seed = int(_header_value(_read_line(fp, path), "seed", path))
    n_symbols = int(_header_value(_read_line(fp, path), "symbols", path))
    symbols = []
    for _ in range(n_symbols):
        cells = _read_line(fp, path).split()
        if len(cells) != 4:
            raise FormatError(f"{path}: bad symbol row {cells!r}")
        symbols.append(Symbol(int(cells[0]), cells[1], int(cells[2]), cells[3]))
        if symbols[-1].id != len(symbols) - 1:
            raise FormatError(f"{path}: symbol ids must be dense")
    frozen = FrozenSignature(tuple(symbols))
    if frozen.dimension != dimension:
        raise FormatError(
            f"{path}: dimension {dimension} does not match signature "
            f"({frozen.dimension} expected)")
    nnz = int(_header_value(_read_line(fp, path), "weights", path))
    w = np.zeros(dimension)
    for _ in range(nnz):
        cells = _read_line(fp, path).split()
        if len(cells) != 2:
            raise FormatError(f"{path}: bad weight row {cells!r}")
        index = int(cells[0])
        if not 1 <= index <= dimension:
            raise FormatError(f"{path}: weight index {index} out of range")
        w[index - 1] = float(cells[1])
    if _read_line(fp, path) != "end":
        raise FormatError(f"{path}: missing end marker")
    if not np.isfinite(w).all():
        raise FormatError(f"{path}: non-finite weights")
    return Model(w, dimension, frozen, c, epochs, violation, seed)
