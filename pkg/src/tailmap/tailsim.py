"""Attach simulated polyA tails to sequences and record the ground truth."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DuplicateId, InvalidParams
from .rng import DistributionSpec, TruncationWindow, UniformEngine, simulate_trunc
from .seqio import (
    ModificationLedger,
    SeqRecord,
    TailRecord,
    normalize_format,
    read_fasta,
    split_fasta,
    store_modifications,
    write_fasta,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TailingConfig:
    spec: DistributionSpec
    window: TruncationWindow = field(default_factory=TruncationWindow)
    seed: int = 0
    algorithm: str = "xoshiro"

    def __post_init__(self):
        if self.window.right is not None and self.window.right < 0:
            raise InvalidParams("tail length window must not lie below zero")

    def engine(self) -> UniformEngine:
        return UniformEngine(self.algorithm, self.seed)


def tail_lengths_from_samples(samples) -> np.ndarray:
    """Round half up, then clamp at zero."""
    return np.maximum(np.floor(np.asarray(samples, dtype=np.float64) + 0.5), 0).astype(np.int64)


def add_polyA(records: Sequence[SeqRecord], config: TailingConfig,
              sampler: Callable[[int], Sequence[float]] | None = None,
              ) -> tuple[list[SeqRecord], ModificationLedger]:
    """Append ``"A" * L_i`` to each record and log ``L_i`` in a ledger.

    ``sampler(count)`` overrides the configured distribution; by default the
    lengths come from one engine seeded with ``config.seed``, drawn in record
    order.
    """
    if not records:
        raise ValueError("no records to tail")
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise DuplicateId(f"duplicate sequence id {rec.id!r}")
        seen.add(rec.id)

    if sampler is None:
        samples = simulate_trunc(config.engine(), config.spec, config.window, [len(records)])
    else:
        samples = sampler(len(records))
    tails = tail_lengths_from_samples(samples)
    if tails.shape != (len(records),):
        raise ValueError(f"sampler returned {tails.shape} values for {len(records)} records")

    spec = config.spec.validated()
    modified, ledger = [], ModificationLedger()
    for rec, tail in zip(records, tails.tolist()):
        modified.append(SeqRecord(rec.id, rec.seq + "A" * tail, rec.description))
        ledger.entries[rec.id] = TailRecord(tail, spec, config.window, config.seed)
    return modified, ledger


def simulate_tails_pipeline(fasta_in: str | Path, config: TailingConfig, max_seqs: int = 1000,
                            mod_format: str = "JSON", out_dir: str | Path = ".",
                            ) -> tuple[list[Path], Path]:
    """Read, tail, write split FASTA files and the ledger; return the paths written.

    Output names derive from the input stem: ``<stem>_polyA_<k>.fasta`` for
    ``k = 1..`` and ``<stem>_polyA_mods.<ext>`` for the ledger.
    """
    fasta_in = Path(fasta_in)
    mod_format = normalize_format(mod_format)
    records = read_fasta(fasta_in)
    if not records:
        raise ValueError(f"{fasta_in} holds no sequences")
    modified, ledger = add_polyA(records, config)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = fasta_in.stem
    paths = []
    batches = split_fasta(modified, max_seqs)
    width = max(1, int(math.log10(len(batches))) + 1)
    for k, batch in enumerate(batches, start=1):
        path = out_dir / f"{stem}_polyA_{k:0{width}d}.fasta"
        write_fasta(batch, path)
        paths.append(path)
    ledger_path = store_modifications(ledger, mod_format, out_dir / f"{stem}_polyA_mods")
    log.info("wrote %d FASTA file(s) and ledger %s", len(paths), ledger_path)
    return paths, ledger_path
