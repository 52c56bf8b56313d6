"""FASTA reading and writing, batching, and the tail-modification ledger."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import msgpack
import yaml

from .errors import FormatError
from .rng import DistributionSpec, TruncationWindow

log = logging.getLogger(__name__)

STANDARD_RESIDUES = frozenset("ACGTN")
_WS = re.compile(r"\s")


@dataclass
class SeqRecord:
    id: str
    seq: str
    description: str = ""

    def __post_init__(self):
        if not self.id or _WS.search(self.id):
            raise ValueError(f"sequence id must be a non-empty token without whitespace: {self.id!r}")

    @property
    def nonstandard(self) -> set[str]:
        """Residues outside ACGTN (case-insensitive)."""
        return set(self.seq.upper()) - STANDARD_RESIDUES


def read_fasta(path: str | Path) -> list[SeqRecord]:
    """Read every record of a FASTA file, in file order.

    The header is split at its first whitespace run into id and description.
    Bodies may span several lines; CRLF line ends are accepted.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        FormatError: text before the first header, a ``;`` comment line, or
            a record without residues.
    """
    records: list[SeqRecord] = []
    header: tuple[str, str, int] | None = None
    body: list[str] = []

    def flush():
        ident, desc, lineno = header
        seq = "".join(body)
        if not seq:
            raise FormatError(f"record {ident!r} has an empty sequence", line=lineno)
        rec = SeqRecord(ident, seq, desc)
        if rec.nonstandard:
            log.warning("record %s contains non-ACGTN residues: %s", ident, "".join(sorted(rec.nonstandard)))
        records.append(rec)

    with open(path, "r", newline=None) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if line.startswith(">"):
                if header is not None:
                    flush()
                parts = line[1:].strip().split(None, 1)
                if not parts:
                    raise FormatError("header without an id", line=lineno)
                header = (parts[0], parts[1] if len(parts) > 1 else "", lineno)
                body = []
            elif line.startswith(";"):
                raise FormatError("FASTA comment lines are not supported", line=lineno)
            elif not line.strip():
                continue
            elif header is None:
                raise FormatError("sequence data before the first header", line=lineno)
            else:
                body.append(line.strip())
    if header is not None:
        flush()
    return records


def write_fasta(records: Iterable[SeqRecord], path: str | Path, line_width: int = 60) -> int:
    """Write records with bodies wrapped at ``line_width``; returns the count."""
    if line_width < 1:
        raise ValueError("line_width must be positive")
    count = 0
    with open(path, "w", newline="\n") as fh:
        for rec in records:
            head = f">{rec.id} {rec.description}" if rec.description else f">{rec.id}"
            fh.write(head + "\n")
            seq = rec.seq
            for i in range(0, len(seq), line_width):
                fh.write(seq[i:i + line_width] + "\n")
            count += 1
    return count


def split_fasta(records: Sequence[SeqRecord], max_seqs: int) -> list[list[SeqRecord]]:
    if max_seqs < 1:
        raise ValueError("max_seqs must be >= 1")
    return [list(records[i:i + max_seqs]) for i in range(0, len(records), max_seqs)]


# --------------------------------------------------------------------------
# Modification ledger
# --------------------------------------------------------------------------


@dataclass
class TailRecord:
    tail_length: int
    distribution: DistributionSpec
    window: TruncationWindow = field(default_factory=TruncationWindow)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "tail_length": int(self.tail_length),
            "distribution": self.distribution.name,
            "params": [float(p) for p in self.distribution.params],
            "left": None if self.window.left is None else float(self.window.left),
            "right": None if self.window.right is None else float(self.window.right),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TailRecord":
        try:
            tail = data["tail_length"]
            if isinstance(tail, bool) or not isinstance(tail, int) or tail < 0:
                raise FormatError(f"tail_length must be a non-negative integer, got {tail!r}")
            left, right = data.get("left"), data.get("right")
            return cls(
                tail_length=tail,
                distribution=DistributionSpec(str(data["distribution"]), tuple(data["params"])),
                window=TruncationWindow(None if left is None else float(left),
                                        None if right is None else float(right)),
                seed=int(data["seed"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"malformed ledger entry: {exc!r}") from exc


@dataclass
class ModificationLedger:
    """Ground truth of the simulated tails, keyed by sequence id."""

    entries: dict[str, TailRecord] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, seq_id):
        return seq_id in self.entries

    def __getitem__(self, seq_id) -> TailRecord:
        return self.entries[seq_id]

    def tail_lengths(self) -> dict[str, int]:
        return {k: v.tail_length for k, v in self.entries.items()}

    def to_document(self) -> dict:
        return {k: v.to_dict() for k, v in self.entries.items()}

    @classmethod
    def from_document(cls, doc) -> "ModificationLedger":
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise FormatError(f"ledger document must be a mapping, got {type(doc).__name__}")
        for key, value in doc.items():
            if not isinstance(key, str) or not isinstance(value, dict):
                raise FormatError(f"malformed ledger entry for {key!r}")
        return cls({k: TailRecord.from_dict(v) for k, v in doc.items()})


LEDGER_FORMATS = {
    "yaml": (".yaml", ".yml"),
    "json": (".json",),
    "messagepack": (".msgpack", ".mpk"),
}


def normalize_format(fmt: str) -> str:
    key = fmt.lower().replace("_", "")
    if key in ("msgpack", "mp"):
        key = "messagepack"
    if key == "yml":
        key = "yaml"
    if key not in LEDGER_FORMATS:
        raise ValueError(f"unknown ledger format {fmt!r}; choose one of YAML, JSON, MessagePack")
    return key


def format_for_path(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    for fmt, suffixes in LEDGER_FORMATS.items():
        if suffix in suffixes:
            return fmt
    raise FormatError(f"cannot tell the ledger format from extension {suffix!r}")


def store_modifications(ledger: ModificationLedger, fmt: str, path: str | Path) -> Path:
    """Persist ``ledger``; the format's extension is appended if ``path`` lacks it."""
    fmt = normalize_format(fmt)
    path = Path(path)
    if path.suffix.lower() not in LEDGER_FORMATS[fmt]:
        path = path.with_name(path.name + LEDGER_FORMATS[fmt][0])
    doc = ledger.to_document()
    if fmt == "json":
        path.write_text(json.dumps(doc, indent=1) + "\n")
    elif fmt == "yaml":
        path.write_text(yaml.safe_dump(doc, sort_keys=False))
    else:
        path.write_bytes(msgpack.packb(doc, use_bin_type=True))
    return path


def load_modifications(path: str | Path) -> ModificationLedger:
    fmt = format_for_path(path)
    path = Path(path)
    try:
        if fmt == "json":
            doc = json.loads(path.read_text())
        elif fmt == "yaml":
            doc = yaml.safe_load(path.read_text())
        else:
            doc = msgpack.unpackb(path.read_bytes(), raw=False, strict_map_key=False)
    except (ValueError, yaml.YAMLError, msgpack.ExtraData, msgpack.FormatError,
            msgpack.StackError) as exc:
        raise FormatError(f"{path}: cannot decode {fmt} ledger: {exc}") from exc
    return ModificationLedger.from_document(doc)
