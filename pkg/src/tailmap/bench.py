"""Synthetic datasets and timing harnesses for mapping and trimming."""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .align import AlignConfig
from .mapframe import ExecConfig, MapResult, RefDB, edit_distance_mapper, run_linear
from .seqio import SeqRecord
from .trim import SCAN_ALGORITHMS, TrimAlgorithm, run_trimmer

log = logging.getLogger(__name__)

_BASES = np.frombuffer(b"ACGT", dtype=np.uint8)
_NON_A = np.frombuffer(b"CGT", dtype=np.uint8)


def synth_dataset(count: int, length: int, seed: int = 0) -> list[SeqRecord]:
    """``count`` distinct random ACGT sequences of ``length`` residues."""
    if count < 1 or length < 1:
        raise ValueError("count and length must be positive")
    if count > 4 ** min(length, 31):
        raise ValueError(f"cannot draw {count} distinct sequences of length {length}")
    rng = np.random.Generator(np.random.PCG64(seed))
    seen: set[str] = set()
    out = []
    while len(out) < count:
        seq = _BASES[rng.integers(0, 4, size=length)].tobytes().decode("ascii")
        if seq in seen:
            continue
        seen.add(seq)
        out.append(SeqRecord(f"seq{len(out):05d}", seq))
    return out


@dataclass(frozen=True)
class GridCell:
    workers: int
    threads: int
    wall_seconds: float
    repetitions: int


def self_map(records: Sequence[SeqRecord], workers: int = 1, threads: int = 1,
             chunk_size: int = 1, db: RefDB | None = None) -> list[MapResult]:
    """Map ``records`` against a database built from themselves."""
    db = db or RefDB.from_records(records, "self")
    mapper = edit_distance_mapper(db, AlignConfig(), flow="linear")
    return run_linear(mapper, list(records),
                      ExecConfig(max_workers=workers, chunk_size=chunk_size, inner_threads=threads))


def top_fraction(cells: Sequence[GridCell], fraction: float = 0.05) -> list[GridCell]:
    """Fastest ``ceil(fraction * len(cells))`` cells (at least one)."""
    keep = max(1, math.ceil(fraction * len(cells)))
    return sorted(cells, key=lambda c: c.wall_seconds)[:keep]


def grid_benchmark(dataset: Sequence[SeqRecord], workers_set: Iterable[int], threads_set: Iterable[int],
                   repetitions: int = 1, csv_path: str | Path | None = None,
                   ) -> tuple[list[GridCell], list[MapResult]]:
    """Time a self-map of ``dataset`` for every (workers, threads) pair.

    Each cell runs one discarded warm-up and then ``repetitions`` timed runs;
    ``wall_seconds`` is their mean.  Returns the cells and the mapping output,
    which must be identical for every cell.
    """
    workers_set, threads_set = list(workers_set), list(threads_set)
    if not workers_set or not threads_set or repetitions < 1:
        raise ValueError("need non-empty worker/thread sets and repetitions >= 1")
    db = RefDB.from_records(dataset, "bench")
    reference = None
    cells = []
    for w in workers_set:
        for t in threads_set:
            self_map(dataset, w, t, db=db)
            times = []
            for _ in range(repetitions):
                start = time.perf_counter()
                out = self_map(dataset, w, t, db=db)
                times.append(time.perf_counter() - start)
            if reference is None:
                reference = out
            elif out != reference:
                raise RuntimeError(f"mapping output changed at workers={w}, threads={t}")
            cells.append(GridCell(w, t, statistics.fmean(times), repetitions))
            log.info("workers=%d threads=%d mean %.3fs", w, t, cells[-1].wall_seconds)
    if csv_path is not None:
        write_grid_csv(cells, csv_path)
    return cells, reference


def write_grid_csv(cells: Sequence[GridCell], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["workers", "threads", "wall_seconds", "repetitions"])
        for c in cells:
            writer.writerow([c.workers, c.threads, f"{c.wall_seconds:.6f}", c.repetitions])
    return path


def grid_summary(cells: Sequence[GridCell]) -> str:
    best = top_fraction(cells)
    marks = ", ".join(f"({c.workers},{c.threads}) {c.wall_seconds:.3f}s" for c in best)
    return f"top 5% cells (workers,threads): {marks}"


def tailed_sequence(length: int, tail_fraction: float, seed: int = 0) -> str:
    """A-free body followed by ``round(tail_fraction * length)`` A's."""
    tail = round(tail_fraction * length)
    rng = np.random.Generator(np.random.PCG64(seed))
    body = _NON_A[rng.integers(0, 3, size=length - tail)].tobytes().decode("ascii")
    return body + "A" * tail


@dataclass(frozen=True)
class TrimTiming:
    algorithm: TrimAlgorithm
    length: int
    mean_us: float
    sd_us: float
    tail_length: int


def trim_benchmark(lengths: Sequence[int], tail_fraction: float = 0.2, repetitions: int = 2000,
                   algorithms: Sequence[TrimAlgorithm] = SCAN_ALGORITHMS, seed: int = 0,
                   tsv_path: str | Path | None = None) -> list[TrimTiming]:
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must lie in (0, 1)")
    if repetitions < 2:
        raise ValueError("need at least two repetitions for a standard deviation")
    rows = []
    for algorithm in algorithms:
        for n in lengths:
            seq = tailed_sequence(n, tail_fraction, seed)
            result = run_trimmer(algorithm, seq)  # warm-up
            samples = []
            for _ in range(repetitions):
                start = time.perf_counter_ns()
                run_trimmer(algorithm, seq)
                samples.append((time.perf_counter_ns() - start) / 1000.0)
            rows.append(TrimTiming(TrimAlgorithm(algorithm), n, statistics.fmean(samples),
                                   statistics.stdev(samples), result.tail_length))
    if tsv_path is not None:
        write_trim_tsv(rows, tsv_path)
    return rows


def write_trim_tsv(rows: Sequence[TrimTiming], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["algorithm", "length", "mean_us", "sd_us"])
        for r in rows:
            writer.writerow([r.algorithm.value, r.length, f"{r.mean_us:.3f}", f"{r.sd_us:.3f}"])
    return path
