"""Command-line interface for the whole pipeline.

Subcommands: featurize, prove, extract, train, eval, grid, loop.  Exit code
0 on success, 1 on a usage error, 2 on a runtime failure.  The ENIGMA_LOG
environment variable (quiet, info, debug) controls stderr verbosity; all
randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import pipeline, saturation, svm, tptp
from .clauses import DEFAULT_SKOLEM_PREFIXES, Signature
from .features import (
    FormatError, clause_features, format_multiset, read_examples,
    write_examples,
)
from .guidance import parse_strategy
from .svm import EmptyClass, SolverConfig

log = logging.getLogger("satguide")

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class UsageError(Exception):
    pass


def _setup_logging() -> None:
    level = os.environ.get("ENIGMA_LOG", "quiet").lower()
    levels = {"quiet": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}
    if level not in levels:
        raise UsageError(f"ENIGMA_LOG must be quiet, info or debug, not {level!r}")
    logging.basicConfig(stream=sys.stderr, level=levels[level],
                        format="%(levelname)s %(message)s")


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            return fp.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _solver_config(args) -> SolverConfig:
    return SolverConfig(c=args.c, tolerance=args.tolerance,
                        max_epochs=args.max_epochs, seed=args.seed,
                        max_signature=args.max_signature)


def _limits(args) -> saturation.Limits:
    return saturation.Limits(
        max_processed=args.max_processed, max_generated=args.max_generated,
        timeout=args.timeout, max_literals=args.max_literals,
        max_depth=args.max_depth)


def _strategy(spec: str):
    try:
        return parse_strategy(spec)
    except (ValueError, FormatError) as exc:
        raise UsageError(f"bad --strategy {spec!r}: {exc}") from exc


def cmd_featurize(args) -> int:
    sig = Signature(tuple(args.skolem_prefixes.split(",")))
    clauses = tptp.parse_problem(_read_text(args.problem), sig, args.problem)
    for clause in clauses:
        counts = clause_features(clause, sig)
        print(f"% clause {clause.id}: {tptp.format_clause(clause, sig)}")
        print(format_multiset(counts, sig))
    return 0


def cmd_prove(args) -> int:
    strategy = _strategy(args.strategy)
    sig = pipeline.signature_for_strategy(strategy)
    clauses = tptp.parse_problem(_read_text(args.problem), sig, args.problem)
    if not clauses:
        raise UsageError(f"{args.problem}: no clauses found")
    record = saturation.prove(clauses, strategy, _limits(args), sig,
                              problem_id=args.problem,
                              inject_equality=not args.no_equality_axioms)
    print(f"{record.outcome} problem={args.problem} "
          f"processed={record.stats['processed']} "
          f"generated={record.stats['generated']}")
    if args.record:
        saturation.save_record(record, args.record)
        log.info("record written to %s", args.record)
    return 0


def cmd_extract(args) -> int:
    sig = Signature(tuple(args.skolem_prefixes.split(",")))
    pools = []
    for path in args.records:
        try:
            record = saturation.load_record(path)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load record {path}: {exc}") from exc
        if record.outcome != saturation.OUTCOME_PROOF:
            raise UsageError(
                f"record {path} has outcome {record.outcome}, not a proof")
        pools.append(record)
    examples = pipeline.pool_examples(pools, sig)
    if args.boost > 1:
        examples = pipeline.boost(examples, args.boost)
    ts = pipeline.training_set(examples, sig)
    with open(args.output, "w", encoding="utf-8") as fp:
        write_examples(fp, ((label, vec) for vec, label in ts.examples))
    sig_path = args.signature or args.output + ".sig"
    _write_signature(sig.freeze(), sig_path)
    print(f"wrote {len(ts.examples)} examples "
          f"({len(examples.positives)} positive, {len(examples.negatives)} negative) "
          f"to {args.output}; signature to {sig_path}")
    return 0


def _write_signature(frozen, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(f"symbols {frozen.size}\n")
        for sym in frozen.symbols:
            fp.write(f"{sym.id} {sym.name} {sym.arity} {sym.kind}\n")


def _read_signature(path: str):
    from .clauses import FrozenSignature, Symbol
    try:
        with open(path, "r", encoding="utf-8") as fp:
            header = fp.readline().split()
            if len(header) != 2 or header[0] != "symbols":
                raise FormatError(f"{path}: expected 'symbols <n>' header")
            symbols = []
            for _ in range(int(header[1])):
                cells = fp.readline().split()
                if len(cells) != 4:
                    raise FormatError(f"{path}: truncated symbol table")
                symbols.append(Symbol(int(cells[0]), cells[1],
                                      int(cells[2]), cells[3]))
        return FrozenSignature(tuple(symbols))
    except OSError as exc:
        raise UsageError(f"cannot read signature {path}: {exc.strerror}") from exc


def cmd_train(args) -> int:
    sig_path = args.signature or args.examples + ".sig"
    frozen = _read_signature(sig_path)
    with open(args.examples, "r", encoding="utf-8") as fp:
        rows = read_examples(fp, frozen.dimension, args.examples)
    ts = svm.TrainingSet(rows, frozen.dimension)
    try:
        model = svm.train_vectors(ts, frozen, _solver_config(args))
    except EmptyClass as exc:
        raise UsageError(f"{args.examples}: {exc}") from exc
    svm.save_model(model, args.output)
    print(f"trained on {len(rows)} examples; model written to {args.output} "
          f"(epochs {model.epochs}, final violation {model.final_violation:.2e})")
    return 0


def cmd_eval(args) -> int:
    model = svm.load_model(args.model)
    with open(args.examples, "r", encoding="utf-8") as fp:
        rows = read_examples(fp, model.dimension, args.examples)
    report = svm.accuracy(model, svm.TrainingSet(rows, model.dimension))

    def fmt(value):
        return "n/a" if value is None else f"{value:.4f}"

    print(f"examples: {len(rows)} ({report.positives} positive, "
          f"{report.negatives} negative)")
    print(f"accuracy: {report.accuracy:.4f}")
    print(f"positive recall: {fmt(report.positive_recall)}")
    print(f"negative recall: {fmt(report.negative_recall)}")
    return 0


def _parse_gammas(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise UsageError(f"bad --gammas {text!r}: {exc}") from exc


def _parse_frequencies(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise UsageError(f"bad --frequencies {text!r}: {exc}") from exc


def cmd_grid(args) -> int:
    problems = pipeline.load_manifest(args.manifest)
    model = svm.load_model(args.model)
    base = _strategy(args.base_strategy)
    grid = pipeline.GridSpec(_parse_gammas(args.gammas),
                             _parse_frequencies(args.frequencies))
    result = pipeline.run_grid(problems, model, base, grid, _limits(args),
                               jobs=args.jobs, model_path=args.model)
    table = pipeline.grid_table_text(result)
    print(table, end="")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fp:
            fp.write(pipeline.grid_table_csv(result))
    cover = pipeline.greedy_cover((row.key, row.solved) for row in result.rows)
    union = set()
    for row in result.rows:
        union |= row.solved
    print(f"solved {len(union)}/{len(problems)}; greedy cover: "
          f"{', '.join(cover) if cover else '(nothing solved)'}")
    return 0


def cmd_loop(args) -> int:
    problems = pipeline.load_manifest(args.manifest)
    base = _strategy(args.base_strategy)
    grid = pipeline.GridSpec(_parse_gammas(args.gammas),
                             _parse_frequencies(args.frequencies))
    report = pipeline.loop(problems, base, args.rounds, grid,
                           boost_k=args.boost, limits=_limits(args),
                           cfg=_solver_config(args), jobs=args.jobs)
    os.makedirs(args.output_dir, exist_ok=True)
    for i, model in enumerate(report.models):
        svm.save_model(model, os.path.join(args.output_dir, f"model_round{i}.bin"))

    def fmt(value):
        return "n/a" if value is None else f"{value:.4f}"

    for rr in report.rounds:
        line = (f"round {rr.round}: solved {len(rr.solved)}/{len(problems)} "
                f"(+{len(rr.new_solved)} new), cover [{', '.join(rr.cover)}]")
        if rr.n_positive:
            line += (f", examples {rr.n_positive}+/{rr.n_negative}-, "
                     f"accuracy {rr.accuracy:.4f}, "
                     f"pos recall {fmt(rr.positive_recall)}, "
                     f"neg recall {fmt(rr.negative_recall)}")
        else:
            line += ", no new proofs to train on"
        print(line)
        if rr.grid_csv:
            with open(os.path.join(args.output_dir,
                                   f"grid_round{rr.round}.csv"),
                      "w", encoding="utf-8") as fp:
                fp.write(rr.grid_csv)
    if report.stalled:
        print("loop stalled: no new proofs")
    print(f"models written to {args.output_dir}")
    return 0


STRATEGY_GRAMMAR = """\
strategy grammar:
  strategy  := "baseline" | entries | entries "+baseline"
  entries   := entry ("," entry)*
  entry     := FREQ "*" cef                  (FREQ a positive integer)
  cef       := "ClauseLen" | "Fifo" | "SymbolCount"
             | "Learned(" PATH ",gamma=" GAMMA ")"
"baseline" stands for 5*ClauseLen,1*Fifo; "+baseline" appends those entries.
Each frequency says how many consecutive selections its CEF makes per
round-robin cycle.
"""


def _add_limit_flags(parser) -> None:
    parser.add_argument("--max-processed", type=int, default=1000,
                        help="stop after this many given-clause selections")
    parser.add_argument("--max-generated", type=int, default=100000,
                        help="stop after this many generated clauses")
    parser.add_argument("--timeout", type=float, default=None,
                        help="wall-clock limit per problem in seconds")
    parser.add_argument("--max-literals", type=int, default=8,
                        help="discard generated clauses with more literals")
    parser.add_argument("--max-depth", type=int, default=6,
                        help="discard generated clauses with deeper terms")


def _add_solver_flags(parser) -> None:
    parser.add_argument("-c", type=float, default=1.0,
                        help="SVM penalty parameter (must be > 0)")
    parser.add_argument("--tolerance", type=float, default=1e-3,
                        help="stop when the largest dual violation drops below this")
    parser.add_argument("--max-epochs", type=int, default=1000,
                        help="cap on coordinate-descent epochs")
    parser.add_argument("--max-signature", type=int, default=200,
                        help="refuse to train past this many symbols")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satguide",
        description="Saturation prover with learned clause-selection guidance.")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for all randomized steps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize",
                       help="print the feature multiset of every clause in a file")
    p.add_argument("problem", help="a CNF problem file")
    p.add_argument("--skolem-prefixes", default=",".join(DEFAULT_SKOLEM_PREFIXES),
                   help="comma-separated name prefixes treated as Skolem symbols")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("prove", help="run the given-clause loop on a problem",
                       epilog=STRATEGY_GRAMMAR,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("problem", help="a CNF problem file")
    p.add_argument("--strategy", default="baseline",
                   help="strategy description, e.g. 'baseline' or "
                        "'1*Learned(model.bin,gamma=0.2)+baseline'")
    p.add_argument("--record", default=None,
                   help="write the proof-search record to this JSON file")
    p.add_argument("--no-equality-axioms", action="store_true",
                   help="do not inject equality axioms when '=' occurs")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("extract",
                       help="turn proof records into labeled training examples")
    p.add_argument("records", nargs="+", help="proof-search record JSON files")
    p.add_argument("-o", "--output", required=True,
                   help="examples file to write (sparse text format)")
    p.add_argument("--signature", default=None,
                   help="signature table to write (default: <output>.sig)")
    p.add_argument("--boost", type=int, default=1,
                   help="repeat positive examples this many times")
    p.add_argument("--skolem-prefixes", default=",".join(DEFAULT_SKOLEM_PREFIXES),
                   help="comma-separated name prefixes treated as Skolem symbols")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a clause classifier")
    p.add_argument("examples", help="examples file in the sparse text format")
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.add_argument("--signature", default=None,
                   help="signature table written by extract (default: <examples>.sig)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval",
                       help="report accuracy and per-class recall of a model")
    p.add_argument("model", help="model file written by train")
    p.add_argument("examples", help="examples file in the sparse text format")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid",
                       help="evaluate a grid of guided strategies on a corpus",
                       epilog=STRATEGY_GRAMMAR,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("manifest", help="corpus manifest: one '<id> <path>' per line")
    p.add_argument("--model", required=True, help="model file written by train")
    p.add_argument("--base-strategy", default="baseline",
                   help="strategy the learned CEF is added to")
    p.add_argument("--gammas", default="0,0.1,0.2,0.4,0.7,1,2,4,8",
                   help="comma-separated gamma values")
    p.add_argument("--frequencies", default="1,5,6,7,8,9,10,15,20,30,40,50",
                   help="comma-separated frequencies for the learned CEF")
    p.add_argument("--csv", default=None, help="also write the table as CSV")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for corpus runs")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("loop",
                       help="train, grid, cover and retrain for several rounds",
                       epilog=STRATEGY_GRAMMAR,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("manifest", help="corpus manifest: one '<id> <path>' per line")
    p.add_argument("--rounds", type=int, default=1,
                   help="number of grid-and-retrain rounds")
    p.add_argument("--boost", type=int, default=1,
                   help="repeat positive examples this many times")
    p.add_argument("--base-strategy", default="baseline",
                   help="strategy used for the initial solves")
    p.add_argument("--gammas", default="0,0.2,8",
                   help="comma-separated gamma values")
    p.add_argument("--frequencies", default="1,5,10,30,50",
                   help="comma-separated frequencies for the learned CEF")
    p.add_argument("-o", "--output-dir", default="loop-out",
                   help="directory for models and per-round tables")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for corpus runs")
    _add_limit_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_loop)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return 0 if exc.code == 0 else USAGE_ERROR
    try:
        _setup_logging()
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (FormatError, tptp.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except Exception as exc:  # runtime failures map to exit code 2
        log.debug("unhandled failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
