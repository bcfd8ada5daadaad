"""
SHUFFLE_POSETS - posets of shuffles, their chain labelings and flag functions
Command-line front end; every result goes to stdout, logs go to stderr.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

# Add project root to Python path for imports
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

# App metadata
APP_VERSION = "0.2.0"
APP_TITLE = "SHUFFLE_POSETS"

from core.algebra.series import (
    MultiplicativeFunction, convolve_closed_form, epsilon_split, type_census, zeta_polynomial_gf, zeta_values,
)
from core.algebra.symfunc import flag_qsym, is_symmetric
from core.errors import InvariantViolation, SizeLimitExceeded
from core.export import ExportEngine, rational
from core.schemas import MultiplicativeTableSchema, RunLimits, ShuffleContext
from core.shuffles.action import LocalAction
from core.shuffles.labeling import ShuffleLabeling
from core.shuffles.words import mobius_formula, shuffle_poset
from core.verify import SUITES, VerificationEngine

logger = logging.getLogger("shuffles")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_SIZE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shuffles",
        description="Posets of shuffles W_{M,N}: construction, chain labels, orbits, flag functions and series.",
    )
    parser.add_argument("--version", action="version", version=f"{APP_TITLE} {APP_VERSION}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def sized(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--lower", "-M", type=int, required=True, help="size M of the deleted alphabet")
        sub.add_argument("--upper", "-N", type=int, required=True, help="size N of the inserted alphabet")
        sub.add_argument("--json", action="store_true", help="machine-readable output")
        sub.add_argument("--output", "-o", type=Path, help="write to a file instead of stdout")
        return sub

    build = sized("build", "Construct W_{M,N} and summarize it")
    build.add_argument("--dot", type=Path, help="also write the Hasse diagram in DOT format")

    sized("flag", "Flag f-vector and h-vector table and the flag function")

    chains = sized("chains", "Maximal chains with their labels")
    chains.add_argument("--limit", type=int, default=None, help="print at most this many chains")

    sized("orbits", "Orbits of the local symmetric group action on maximal chains")
    sized("mobius", "Möbius function μ(0̂, 1̂)")

    zeta = sized("zeta", "Number of k-step multichains from 0̂ to 1̂ (ζ^k(0̂, 1̂))")
    zeta.add_argument("--k", type=int, required=True)

    sized("types", "Census of elements by interval type")

    convolve = subparsers.add_parser("convolve", help="Convolution of multiplicative functions")
    convolve.add_argument("--input", type=Path, required=True, help="JSON table of f")
    convolve.add_argument("--input2", type=Path, help="JSON table of g (default: ζ)")
    convolve.add_argument("--trunc", type=int, nargs=2, metavar=("TX", "TY"), help="override the truncation")
    convolve.add_argument("--split", action="store_true", help="also print the three ε-parts")
    convolve.add_argument("--json", action="store_true")
    convolve.add_argument("--output", "-o", type=Path)

    verify = subparsers.add_parser("verify", help="Run the consistency suites")
    verify.add_argument("--max-sum", type=int, default=7, help="largest M + N swept")
    verify.add_argument("--suite", type=int, action="append", choices=sorted(SUITES), help="run only these suites")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--json", action="store_true")
    verify.add_argument("--output", "-o", type=Path)
    return parser


def _context(args, limits: RunLimits) -> ShuffleContext:
    ctx = ShuffleContext(lower_size=args.lower, upper_size=args.upper)
    if ctx.total_rank > limits.max_rank:
        raise SizeLimitExceeded(
            f"M+N = {ctx.total_rank} exceeds the cap {limits.max_rank} (set SHUFFLES_MAX_RANK to raise it)"
        )
    return ctx


def _load_table(path: Path) -> MultiplicativeFunction:
    schema = MultiplicativeTableSchema.model_validate_json(path.read_text(encoding="utf-8"))
    return MultiplicativeFunction.from_schema(schema)


def run(args, limits: RunLimits, exporter: ExportEngine) -> tuple[str, int]:
    """Execute one subcommand; returns (stdout text, exit code)."""
    if args.command == "convolve":
        return _run_convolve(args, limits, exporter)
    if args.command == "verify":
        engine = VerificationEngine(max_sum=args.max_sum, limits=limits, seed=args.seed)
        report, findings = engine.run_all(args.suite)
        failed = [f for f in findings if not f.passed]
        if args.json:
            text = exporter.to_json({
                "checks": len(findings),
                "failed": exporter.findings(failed),
                "passed": len(findings) - len(failed),
            })
        else:
            text = exporter.to_text(report)
            for f in failed:
                text += f"FAILED {f.id}: {f.description}\n  witness: {exporter.to_json(f.witness).strip()}\n"
            text += f"{len(findings) - len(failed)}/{len(findings)} checks passed\n"
        return text, EXIT_FAILED if failed else EXIT_OK

    ctx = _context(args, limits)
    M, N = ctx.lower_size, ctx.upper_size
    P = shuffle_poset(ctx)

    if args.command == "build":
        summary = exporter.poset_summary(P)
        if args.dot:
            args.dot.write_text(exporter.to_dot(P), encoding="utf-8")
            logger.info(f"Wrote {args.dot}")
        if args.json:
            return exporter.to_json(summary), EXIT_OK
        return (
            f"{summary['name']}: {summary['elements']} elements, rank {summary['rank']}, "
            f"{summary['covers']} covers\nrank sizes: {' '.join(map(str, summary['rank_sizes']))}\n"
        ), EXIT_OK

    if args.command == "flag":
        F = flag_qsym(P)
        basis = "m" if is_symmetric(F) else "M"
        if args.json:
            return exporter.to_json({"table": exporter.flag_records(P), "flag": exporter.sympoly(F, basis)}), EXIT_OK
        terms = exporter.sympoly(F, basis)["terms"]
        expansion = " + ".join(f"{c}*{basis}[{key}]" for key, c in terms.items())
        return exporter.to_text(P.flag_table()) + f"F = {expansion}\n", EXIT_OK

    if args.command == "chains":
        rows = exporter.chains(ShuffleLabeling(P), args.limit)
        if args.json:
            return exporter.to_json(rows), EXIT_OK
        return "".join(
            f"{' '.join(r['labels'])}\t| " + " < ".join(" ".join(w) or "∅" for w in r["chain"]) + "\n" for r in rows
        ), EXIT_OK

    if args.command == "orbits":
        action = LocalAction(P, ShuffleLabeling(P))
        rows = exporter.orbits(action)
        if args.json:
            return exporter.to_json(rows), EXIT_OK
        return "".join(
            f"size {r['size']}\ttype {r['type']}\tmultiset {' '.join(r['multiset'])}\n" for r in rows
        ), EXIT_OK

    if args.command == "mobius":
        value = P.mobius(P.bottom, P.top)
        if value != mobius_formula(M, N):
            raise InvariantViolation(f"μ(0̂, 1̂) = {value} differs from {mobius_formula(M, N)}")
        if args.json:
            return exporter.to_json({"M": M, "N": N, "mobius": value}), EXIT_OK
        return f"{value}\n", EXIT_OK

    if args.command == "zeta":
        value = zeta_values(M, N, args.k)
        series_value = zeta_polynomial_gf(args.k, (M, N))[M, N]
        if value != series_value:
            raise InvariantViolation(f"ζ^{args.k} = {value} but the generating function gives {series_value}")
        if args.json:
            return exporter.to_json({"M": M, "N": N, "k": args.k, "value": value}), EXIT_OK
        return f"{rational(value)}\n", EXIT_OK

    if args.command == "types":
        census = type_census(M, N)
        if (census["observed"] != census["formula"]).any():
            raise InvariantViolation(f"Type counts of W_{M},{N} disagree with the closed form")
        if args.json:
            return exporter.to_json(census.to_dict(orient="records")), EXIT_OK
        return exporter.to_text(census), EXIT_OK

    raise ValueError(f"Unknown command {args.command!r}")


def _run_convolve(args, limits: RunLimits, exporter: ExportEngine) -> tuple[str, int]:
    f = _load_table(args.input)
    g = _load_table(args.input2) if args.input2 else MultiplicativeFunction.zeta(f.trunc)
    known = (min(f.trunc[0], g.trunc[0]), min(f.trunc[1], g.trunc[1]))
    trunc = tuple(args.trunc) if args.trunc else known
    if max(trunc) > limits.max_rank:
        raise SizeLimitExceeded(
            f"truncation {list(trunc)} exceeds the cap {limits.max_rank} (set SHUFFLES_MAX_RANK to raise it)"
        )
    if min(trunc) < 0 or trunc[0] > known[0] or trunc[1] > known[1]:
        raise ValueError(f"--trunc {list(trunc)} must lie within the tables' truncation {list(known)}")
    F, G = f.to_series().truncate(trunc), g.to_series().truncate(trunc)
    result = convolve_closed_form(F, G)
    if args.json:
        payload = {"trunc": list(result.trunc), "product": exporter.series(result)}
        if args.split:
            payload.update(zip(("plus", "zero", "minus"), map(exporter.series, epsilon_split(F, G))))
        return exporter.to_json(payload), EXIT_OK
    text = exporter.series_text(result)
    if args.split:
        for name, part in zip(("ε = +1", "ε = 0", "ε = -1"), epsilon_split(F, G)):
            text += f"{name}\n" + exporter.series_text(part)
    return text, EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the `shuffles` console script."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        limits = RunLimits.from_env()
        text, code = run(args, limits, ExportEngine())
    except SizeLimitExceeded as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_SIZE
    except InvariantViolation as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    output = getattr(args, "output", None)
    if output:
        output.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {output}")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
