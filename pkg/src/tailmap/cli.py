"""Command-line entry point: ``tailmap <subcommand> [flags]``.

Exit status is 0 on success, 1 when the work itself fails and 2 for flag
errors (argparse's convention).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import bench, seqio, tailsim, trim
from .align import AlignConfig, pairs_from_strings
from .errors import FormatError, TailmapError
from .mapframe import ExecConfig, build_refdb, edit_distance_mapper, load_refdb, run_linear, run_linearlinear
from .rng import DistributionSpec, TruncationWindow

log = logging.getLogger("tailmap")

# Simulator-only options kept for command-line compatibility; they are ignored.
SIMULATOR_ONLY_FLAGS = ("--fraglen", "--fragsd", "--numreps", "--strandspec", "--readlen", "--paired")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _env_threads() -> int:
    raw = os.environ.get("SEQMAP_THREADS")
    if raw is None:
        return 1
    try:
        return _positive_int(raw)
    except (ValueError, argparse.ArgumentTypeError):
        log.warning("ignoring invalid SEQMAP_THREADS=%r", raw)
        return 1


def split_distparams(name: str, values: list[float]) -> tuple[DistributionSpec, TruncationWindow]:
    """Shape parameters first, then optionally the left and right truncation limits."""
    spec = DistributionSpec(name, ())
    if not values:
        return spec, TruncationWindow()
    arity = spec.arity
    if len(values) == arity:
        return DistributionSpec(name, tuple(values)), TruncationWindow()
    if len(values) == arity + 2:
        return DistributionSpec(name, tuple(values[:arity])), TruncationWindow(values[arity], values[arity + 1])
    raise TailmapError(
        f"--distparams for {spec.name} takes {arity} value(s), optionally followed by "
        f"left and right truncation limits; got {len(values)}")


def cmd_simulate_tails(args) -> int:
    for flag in SIMULATOR_ONLY_FLAGS:
        if getattr(args, flag[2:]) is not None:
            log.warning("%s is accepted for compatibility and ignored", flag)
    spec, window = split_distparams(args.taildist, args.distparams)
    config = tailsim.TailingConfig(spec.validated(), window, args.seed, args.rng)
    paths, ledger = tailsim.simulate_tails_pipeline(
        args.fastafile, config, args.maxseqs, args.modformat, args.outdir)
    for p in paths:
        print(p)
    print(ledger)
    return 0


def cmd_trim(args) -> int:
    records = seqio.read_fasta(args.input)
    if not records:
        raise FormatError(f"{args.input} holds no sequences")
    if args.algorithm == "all":
        algorithms = list(trim.SCAN_ALGORITHMS)
    else:
        algorithms = [trim.TrimAlgorithm(args.algorithm)]
    params = trim.ChangepointParams(args.p_tail, args.p_header, args.odds)
    outdir = Path(args.outdir or Path(args.input).parent)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem

    by_id: dict[str, list[trim.TrimResult]] = {r.id: [] for r in records}
    report_path = outdir / f"{stem}.trim.tsv"
    with open(report_path, "w") as report:
        report.write("id\talgorithm\ttail_length\tstatistic\n")
        for alg in algorithms:
            trimmed = []
            for rec in records:
                res = trim.run_trimmer(alg, rec.seq, params)
                by_id[rec.id].append(res)
                trimmed.append(seqio.SeqRecord(rec.id, res.apply(rec.seq), rec.description))
                report.write(f"{rec.id}\t{alg.value}\t{res.tail_length}\t{res.statistic:.6g}\n")
            fasta_path = outdir / f"{stem}.{alg.value}.trimmed.fasta"
            seqio.write_fasta(trimmed, fasta_path)
            print(f"[{alg.value}] trimmed {len(trimmed)} sequences -> {fasta_path}")
    print(f"report -> {report_path}")

    if args.ledger:
        ledger = seqio.load_modifications(args.ledger)
        summary = trim.evaluate_against_ledger(by_id, ledger)
        print("algorithm\tn\texact_match_rate\tmean_abs_error")
        for alg in algorithms:
            s = summary[alg]
            print(f"{alg.value}\t{s.count}\t{s.exact_match_rate:.4f}\t{s.mean_abs_error:.4f}")
    return 0


def cmd_makedb(args) -> int:
    records = seqio.read_fasta(args.fasta)
    if not records:
        raise FormatError(f"{args.fasta} holds no sequences")
    db = build_refdb(records, args.location, args.name, per_file=args.per_file)
    print(f"{db.name}: {len(db)} sequences at {args.location}")
    return 0


def cmd_map(args) -> int:
    queries = seqio.read_fasta(args.queries)
    db = load_refdb(args.location, args.name)
    equalities = pairs_from_strings(args.equal) if args.equal else frozenset()
    config = AlignConfig(args.mode, args.max_distance, equalities)
    mapper = edit_distance_mapper(db, config, flow=args.flow)
    exec_config = ExecConfig(args.workers, args.chunk_size, True, args.threads)
    run = run_linear if args.flow == "linear" else run_linearlinear
    results = run(mapper, queries, exec_config)
    lines = "".join(r.tsv() + "\n" for r in results)
    if args.output:
        Path(args.output).write_text(lines)
    else:
        sys.stdout.write(lines)
    return 0


def cmd_bench(args) -> int:
    if args.kind == "grid":
        data = bench.synth_dataset(args.count, args.length, args.seed)
        cells, _ = bench.grid_benchmark(data, args.workers, args.threads, args.repetitions, args.csv)
        print(f"wrote {len(cells)} cells -> {args.csv}")
        print(bench.grid_summary(cells))
    else:
        rows = bench.trim_benchmark(args.lengths, args.tail_fraction, args.repetitions,
                                    seed=args.seed, tsv_path=args.tsv)
        for r in rows:
            print(f"{r.algorithm.value}\t{r.length}\t{r.mean_us:.2f}\t{r.sd_us:.2f}")
        print(f"wrote {len(rows)} rows -> {args.tsv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailmap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-tails", help="append simulated polyA tails and record them")
    p.add_argument("--fastafile", required=True)
    p.add_argument("--taildist", default="flat")
    p.add_argument("--distparams", nargs="*", type=float, default=[])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rng", choices=["xoshiro", "standard"], default="xoshiro")
    p.add_argument("--maxseqs", type=_positive_int, default=1000)
    p.add_argument("--modformat", type=str.lower, choices=["yaml", "json", "messagepack"], default="json")
    p.add_argument("--outdir", default=".")
    for flag in SIMULATOR_ONLY_FLAGS:
        p.add_argument(flag, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_simulate_tails)

    p = sub.add_parser("trim", help="trim polyA tails")
    p.add_argument("--input", required=True)
    p.add_argument("--algorithm", default="all",
                   choices=["classic", "modified", "regex", "changepoint", "all"])
    p.add_argument("--ledger")
    p.add_argument("--outdir")
    p.add_argument("--p-tail", type=float, default=0.9)
    p.add_argument("--p-header", type=float, default=0.25)
    p.add_argument("--odds", type=float, default=1000.0)
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("makedb", help="build a reference database")
    p.add_argument("--fasta", required=True)
    p.add_argument("--location", required=True)
    p.add_argument("--name", required=True)
    p.add_argument("--per-file", action="store_true", help="one FASTA file per reference")
    p.set_defaults(func=cmd_makedb)

    p = sub.add_parser("map", help="map queries to their closest reference")
    p.add_argument("--queries", required=True)
    p.add_argument("--location", required=True)
    p.add_argument("--name", required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--threads", type=_positive_int, default=None)
    p.add_argument("--chunk-size", type=_positive_int, default=1)
    p.add_argument("--mode", default="NW", choices=["NW"])
    p.add_argument("--max-distance", type=int, default=-1)
    p.add_argument("--equal", nargs="*", metavar="XY", help="character pairs that match each other")
    p.add_argument("--flow", choices=["linear", "linearlinear"], default="linear")
    p.add_argument("--output")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("bench", help="timing harnesses")
    bsub = p.add_subparsers(dest="kind", required=True)
    g = bsub.add_parser("grid", help="workers x threads self-mapping grid")
    g.add_argument("--count", type=_positive_int, default=200)
    g.add_argument("--length", type=_positive_int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=_positive_int, nargs="+", default=[1, 2, 4, 8])
    g.add_argument("--threads", type=_positive_int, nargs="+", default=[1, 2, 4, 8])
    g.add_argument("--repetitions", type=_positive_int, default=1)
    g.add_argument("--csv", default="grid.csv")
    g.set_defaults(func=cmd_bench)
    t = bsub.add_parser("trim", help="per-algorithm trimming times")
    t.add_argument("--lengths", type=_positive_int, nargs="+", default=[100, 1000, 2000, 10000])
    t.add_argument("--tail-fraction", type=float, default=0.2)
    t.add_argument("--repetitions", type=_positive_int, default=2000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--tsv", default="trim_bench.tsv")
    t.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 0) is None:
        args.threads = _env_threads()
    try:
        return args.func(args)
    except (TailmapError, OSError, ValueError) as exc:
        print(f"tailmap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
