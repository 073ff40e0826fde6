"""
Command surface.

`eicsr eval | search | gen | compare | bench | pairs`. Command output goes to
stdout (or --out); logs and error payloads go to stderr. Any EicsrError is
reported as an ErrorResponse with exit status 1.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from eicsr.core.config import settings
from eicsr.core.dataset import Dataset
from eicsr.core.exceptions import DatasetError, EicsrError
from eicsr.core.expression import Expression, iter_nodes, node_at, path_to_str, to_string
from eicsr.core.parser import parse
from eicsr.schemas.config import (
    BenchConfig,
    Budget,
    EicConfig,
    FilterConfig,
    FitnessConfig,
    GeneratorConfig,
    GpConfig,
    MctsConfig,
)
from eicsr.schemas.response import (
    CandidateRecord,
    CorpusRecord,
    EicReport,
    ErrorResponse,
    SearchResponse,
)
from eicsr.search.gp import GeneticProgramming
from eicsr.search.mcts import MonteCarloTreeSearch
from eicsr.services.bench import BenchProblem, builtin_suite, run_bench, write_csv
from eicsr.services.eic import calculate_eic
from eicsr.services.genfilter import build_corpus, compare_corpora
from eicsr.services.logger import configure_logger, get_logger
from eicsr.services.ranking import select_pairs
from eicsr.services.reference import reference_corpus

logger = get_logger(__name__)

PROBE_LOW = 1.0
PROBE_HIGH = 5.0
GP_ALPHA = 0.002
MCTS_ALPHA = 0.01


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text + "\n")


def _budget(text: str) -> Budget:
    try:
        return Budget.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _read_jsonl(path: str) -> list[CorpusRecord]:
    records = []
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(CorpusRecord.model_validate_json(line))
        except ValidationError as e:
            raise DatasetError(f"invalid corpus line {number} in {path}", error=str(e)) from e
    return records


def _corpus(path: str) -> list[Expression]:
    return [parse(record.formula) for record in _read_jsonl(path)]


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def render_tree(e: Expression, report: EicReport) -> str:
    """One line per node, indented by depth: path, node EIC, subformula."""
    lines = [f"overall EIC = {report.overall:.4f}  (sigma_r={report.sigma_r:g})"]
    for path, _ in iter_nodes(e):
        key = path_to_str(path)
        node = report.per_node.get(key)
        indent = "  " * len(path)
        if node is None:
            lines.append(f"{indent}{key:<10} {'leaf':>8}  {to_string(node_at(e, path))}")
        else:
            flag = " (capped)" if node.capped else ""
            lines.append(f"{indent}{key:<10} {node.eic:>8.4f}  {node.formula}{flag}")
    return "\n".join(lines)


def cmd_eval(args: argparse.Namespace) -> int:
    if args.data:
        data = Dataset.from_csv(args.data, target=args.target)
    else:
        rng = np.random.default_rng(args.seed)
        data = Dataset.uniform(args.vars, args.rows, PROBE_LOW, PROBE_HIGH, rng)
    expr = parse(args.formula, names=data.names)
    cfg = EicConfig(sigma_r=args.sigma, repeats=args.repeats, seed=args.seed)
    report = calculate_eic(expr, data, cfg)
    if args.json:
        if not args.per_node:
            report = report.model_copy(update={"per_node": {}})
        _emit(report.model_dump_json(indent=2), args.out)
    elif args.per_node:
        _emit(render_tree(expr, report), args.out)
    else:
        _emit(f"{report.overall:.6f}", args.out)
    return 0


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

def cmd_search(args: argparse.Namespace) -> int:
    data = Dataset.from_csv(args.data, target=args.target)
    eic_cfg = EicConfig(sigma_r=args.sigma, seed=args.seed)
    search: GeneticProgramming | MonteCarloTreeSearch
    if args.method == "gp":
        alpha = GP_ALPHA if args.alpha is None else args.alpha
        gp_cfg = GpConfig(
            budget=args.budget or Budget.parse("200gen"),
            seed=args.seed,
            population_size=args.population,
            fitness_cfg=FitnessConfig(eta=args.eta, alpha=alpha),
            eic_cfg=eic_cfg,
        )
        search = GeneticProgramming(data, gp_cfg)
    else:
        alpha = MCTS_ALPHA if args.alpha is None else args.alpha
        mcts_cfg = MctsConfig(
            ucb_c=args.ucb_c,
            max_children=args.max_children,
            budget=args.budget or Budget.parse("5000it"),
            seed=args.seed,
            fitness_cfg=FitnessConfig(eta=args.eta, alpha=alpha),
            eic_cfg=eic_cfg,
        )
        search = MonteCarloTreeSearch(data, mcts_cfg)

    archive = search.run()
    best = search.archive.best()
    steps = search.generations if isinstance(search, GeneticProgramming) else search.iterations
    response = SearchResponse(
        method=args.method,
        seed=args.seed,
        alpha=alpha,
        eta=args.eta,
        budget=str(search.cfg.budget),
        steps=steps,
        evaluations=search.evaluator.evaluations,
        best=best.to_record() if best is not None else None,
        archive=[c.to_record() for c in archive],
    )
    _emit(response.model_dump_json(indent=2), args.out)
    return 0


# ---------------------------------------------------------------------------
# gen / compare
# ---------------------------------------------------------------------------

def cmd_gen(args: argparse.Namespace) -> int:
    gcfg = GeneratorConfig(
        n_vars=args.vars,
        min_binary_ops=min(args.min_binary, args.max_binary),
        max_binary_ops=args.max_binary,
        max_unary_ops=args.max_unary,
        seed=args.seed,
    )
    fcfg = None
    if args.filter_eic is not None:
        fcfg = FilterConfig(theta=args.filter_eic, max_retries=args.max_retries)
    records = build_corpus(args.count, gcfg, fcfg, seed=args.seed)
    _emit("\n".join(r.model_dump_json() for r in records), args.out)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    corpora = {path: _corpus(path) for path in args.corpus}
    reference = _corpus(args.reference) if args.reference else list(reference_corpus())
    rows = [r.model_dump() for r in compare_corpora(corpora, reference)]
    if args.csv:
        _emit(pd.DataFrame(rows).to_csv(index=False).rstrip(), args.out)
    else:
        _emit(json.dumps(rows, indent=2), args.out)
    return 0


# ---------------------------------------------------------------------------
# bench / pairs
# ---------------------------------------------------------------------------

def bench_config(args: argparse.Namespace) -> BenchConfig:
    base = BenchConfig()
    search_cfg: GpConfig | MctsConfig = base.gp if args.method == "gp" else base.mcts
    update: dict[str, Any] = {}
    if args.alpha is not None:
        update["fitness_cfg"] = search_cfg.fitness_cfg.model_copy(update={"alpha": args.alpha})
    if args.budget is not None:
        update["budget"] = args.budget
    searches: dict[str, Any] = {"gp": base.gp, "mcts": base.mcts}
    searches[args.method] = search_cfg.model_copy(update=update)
    return BenchConfig(
        method=args.method,
        noise_eta=args.noise,
        trials=args.trials,
        record_runtime=args.timing,
        seed=args.seed,
        **searches,
    )


def cmd_bench(args: argparse.Namespace) -> int:
    if args.data:
        problems = [
            BenchProblem.from_dataset(Path(path).stem, Dataset.from_csv(path)) for path in args.data
        ]
    else:
        problems = builtin_suite("all" if args.suite == "builtin" else args.suite)

    report = run_bench(problems, bench_config(args), threads=args.threads)
    _emit(report.model_dump_json(indent=2), args.out)
    if args.csv:
        write_csv(report, args.csv)
    return 0


def _front(path: str) -> list[CandidateRecord]:
    return SearchResponse.model_validate_json(Path(path).read_text(encoding="utf-8")).archive


def cmd_pairs(args: argparse.Namespace) -> int:
    front_a, front_b = (_front(path) for path in args.front)
    selection = select_pairs(front_a, front_b)
    _emit(json.dumps([p.to_record().model_dump() for p in selection.pairs], indent=2), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eicsr",
        description="Numerical-stability (EIC) scoring and EIC-aware symbolic regression.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)
    seed = settings.default_seed

    p = sub.add_parser("eval", help="EIC of one formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--data", help="CSV with a header row; random probe inputs when omitted")
    p.add_argument("--target", help="Target column (default: last)")
    p.add_argument("--vars", type=int, default=1, help="Probe input count without --data")
    p.add_argument("--rows", type=int, default=256, help="Probe rows without --data")
    p.add_argument("--sigma", type=float, default=1e-6, help="Relative noise std sigma_r")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--per-node", action="store_true", help="Annotated per-node tree")
    p.add_argument("--json", action="store_true")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("search", help="GP or MCTS symbolic regression")
    p.add_argument("--method", choices=["gp", "mcts"], default="mcts")
    p.add_argument("--data", required=True)
    p.add_argument("--target")
    p.add_argument("--alpha", type=float, help="EIC penalty (default 0.002 gp, 0.01 mcts)")
    p.add_argument("--eta", type=float, default=0.999)
    p.add_argument("--budget", type=_budget, help="e.g. 60s, 200gen, 5000it")
    p.add_argument("--population", type=int, default=256)
    p.add_argument("--ucb-c", type=float, default=2**0.5)
    p.add_argument("--max-children", type=int, default=16)
    p.add_argument("--sigma", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("gen", help="Random formula corpus as JSONL")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--vars", type=int, default=2)
    p.add_argument("--min-binary", type=int, default=2)
    p.add_argument("--max-binary", type=int, default=8)
    p.add_argument("--max-unary", type=int, default=4)
    p.add_argument("--filter-eic", type=float, help="Keep formulas with EIC <= this")
    p.add_argument("--max-retries", type=int, default=1000)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("compare", help="JS/KL divergence of corpora against a reference")
    p.add_argument("--corpus", action="append", required=True)
    p.add_argument("--reference", help="Reference JSONL (default: built-in physics formulas)")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("bench", help="Multi-trial benchmark")
    p.add_argument("--suite", choices=["builtin", "physics", "pathological"], default="builtin")
    p.add_argument("--data", action="append", help="CSV problem(s) instead of the built-in suite")
    p.add_argument("--method", choices=["gp", "mcts"], default="mcts")
    p.add_argument("--alpha", type=float)
    p.add_argument("--budget", type=_budget)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--threads", type=int)
    p.add_argument(
        "--timing",
        action="store_true",
        help="Record wall-clock runtimes; reports are then not byte-reproducible",
    )
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("pairs", help="Select formula pairs across two search archives")
    p.add_argument("--front", action="append", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_pairs)

    return parser


def _fail(error: str, message: str, details: dict[str, Any] | None = None) -> int:
    payload = ErrorResponse(error=error, message=message, details=details)
    sys.stderr.write(payload.model_dump_json() + "\n")
    return 1


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run one command.

    Returns:
        0 on success, 1 on any reported error (argparse exits 2 on usage errors)
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "pairs" and len(args.front) != 2:
        parser.error("pairs needs exactly two --front files")
    if args.verbose or args.quiet:
        configure_logger("DEBUG" if args.verbose else "WARNING")

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except EicsrError as e:
        logger.error(f"{args.command} failed: {e.message}")
        return _fail(e.error, e.message, e.details or None)
    except ValidationError as e:
        return _fail("ValidationError", str(e))
    except Exception as e:
        logger.opt(exception=True).error(f"Unhandled error in {args.command}: {e}")
        return _fail("InternalError", "An unexpected error occurred", {"error": str(e)})


if __name__ == "__main__":
    sys.exit(main())
