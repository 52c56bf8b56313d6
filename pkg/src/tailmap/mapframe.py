"""Reference databases and the generic, hook-driven sequence mapper.

A :class:`GenericMapper` carries user hooks (``seq_align``,
``extract_sim_metric``, ``reduce_sim_metric``, ``cleanup``, ...) plus
free-form parameter bags.  Each hook is called with the mapper as its first
argument, so a plain function can be written as if it were a method::

    def seq_align(mapper, query):
        db = mapper.refDB_access_params["DB"]
        ...

Two data flows drive the hooks over a workload:

* LinearLinear: ``seq_align -> extract_sim_metric -> reduce_sim_metric``
* Linear: ``seq_align`` aligns, extracts and reduces in one step.

``reduce_sim_metric`` (or the Linear ``seq_align``) returns a list of
results per work element; lists are concatenated in workload order no matter
how many workers ran or how the workload was chunked.
"""

from __future__ import annotations

import functools
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import msgpack

from .align import AlignConfig, PackedSeqs, Pattern, block_bounds, distance_profile
from .errors import ContractError, DuplicateId, FormatError, HookError, NoFiniteMetric
from .seqio import SeqRecord, read_fasta, write_fasta

INDEX_VERSION = 1


@dataclass(frozen=True)
class MapResult:
    query_id: str
    best_ref_id: str
    best_metric: float

    def tsv(self) -> str:
        metric = self.best_metric
        if math.isinf(metric):
            value = "inf"
        elif float(metric).is_integer():
            value = str(int(metric))
        else:
            value = repr(float(metric))
        return f"{self.query_id}\t{self.best_ref_id}\t{value}"


@dataclass(frozen=True)
class ExecConfig:
    max_workers: int = 1
    chunk_size: int = 1
    cleanup: bool = True
    inner_threads: int = 1

    def __post_init__(self):
        for name in ("max_workers", "chunk_size", "inner_threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


# --------------------------------------------------------------------------
# Reference database
# --------------------------------------------------------------------------


@dataclass
class RefDB:
    name: str
    ids: list[str]
    sequences: list[str]
    file_to_id: dict[str, str] | None = None
    lengths: list[int] = field(init=False)
    index_to_id: dict[int, str] = field(init=False)
    id_to_index: dict[str, int] = field(init=False)

    def __post_init__(self):
        if len(self.ids) != len(self.sequences):
            raise ValueError("ids and sequences differ in length")
        self.lengths = [len(s) for s in self.sequences]
        self.index_to_id = dict(enumerate(self.ids))
        self.id_to_index = {}
        for i, seq_id in enumerate(self.ids):
            if seq_id in self.id_to_index:
                raise DuplicateId(f"duplicate reference id {seq_id!r}")
            self.id_to_index[seq_id] = i
        self._packed = None

    def __len__(self):
        return len(self.ids)

    @classmethod
    def from_records(cls, records: Sequence[SeqRecord], name: str = "refdb") -> "RefDB":
        return cls(name, [r.id for r in records], [r.seq for r in records])

    @property
    def packed(self) -> PackedSeqs:
        if self._packed is None:
            self._packed = PackedSeqs(self.sequences)
        return self._packed


def _index_path(location: Path, name: str) -> Path:
    return location / f"{name}.idx"


def build_refdb(records: Sequence[SeqRecord], location: str | Path, name: str,
                per_file: bool = False) -> RefDB:
    """Create a reference database on disk and return it loaded.

    The index ``<name>.idx`` is a zlib-compressed MessagePack map.  Sequences
    go to ``<name>.fasta``, or with ``per_file`` to one ``<name>.<k>.fasta``
    per reference (the layout a single-target command-line aligner needs).
    """
    location = Path(location)
    location.mkdir(parents=True, exist_ok=True)
    db = RefDB.from_records(records, name)
    files = None
    if per_file:
        files = []
        for k, rec in enumerate(records):
            fname = f"{name}.{k}.fasta"
            write_fasta([rec], location / fname)
            files.append(fname)
        db.file_to_id = dict(zip(files, db.ids))
    else:
        write_fasta(records, location / f"{name}.fasta")
    index = {
        "version": INDEX_VERSION,
        "name": name,
        "ids": db.ids,
        "lengths": db.lengths,
        "files": files,
    }
    _index_path(location, name).write_bytes(zlib.compress(msgpack.packb(index, use_bin_type=True)))
    return db


def load_refdb(location: str | Path, name: str) -> RefDB:
    location = Path(location)
    path = _index_path(location, name)
    try:
        index = msgpack.unpackb(zlib.decompress(path.read_bytes()), raw=False)
        ids, lengths, files = index["ids"], index["lengths"], index.get("files")
    except FileNotFoundError as exc:
        raise FormatError(f"no reference index at {path}") from exc
    except (zlib.error, ValueError, KeyError, TypeError, msgpack.ExtraData,
            msgpack.FormatError, msgpack.StackError) as exc:
        raise FormatError(f"corrupt reference index {path}: {exc!r}") from exc

    if files:
        seqs = []
        for fname in files:
            recs = read_fasta(location / fname)
            if len(recs) != 1:
                raise FormatError(f"{fname} should hold exactly one sequence")
            seqs.append(recs[0])
    else:
        seqs = read_fasta(location / f"{name}.fasta")
    if [r.id for r in seqs] != list(ids) or [len(r.seq) for r in seqs] != list(lengths):
        raise FormatError(f"reference sequences under {location} do not match index {path}")
    db = RefDB(name, list(ids), [r.seq for r in seqs])
    if files:
        db.file_to_id = dict(zip(files, db.ids))
    return db


# --------------------------------------------------------------------------
# Reduction and per-query mapping
# --------------------------------------------------------------------------


def reduce_min_metric(profile: Sequence[float], db: RefDB) -> tuple[str, float]:
    """Reference with the smallest metric; ties go to the lowest ordinal."""
    if len(profile) != len(db):
        raise ValueError(f"profile has {len(profile)} entries for {len(db)} references")
    best_idx = -1
    best = math.inf
    for i, value in enumerate(profile):
        if value < best:
            best, best_idx = value, i
    if best_idx < 0:
        raise NoFiniteMetric("no reference lies within the distance bound")
    return db.index_to_id[best_idx], best


def map_query_minimizing(query: SeqRecord, db: RefDB, config: AlignConfig = AlignConfig(),
                         inner_threads: int = 1) -> MapResult:
    """Closest reference to ``query``, scanning ``inner_threads`` blocks concurrently.

    Block ``t`` covers ordinals ``[t*n//T, (t+1)*n//T)``; each block finds its
    local minimum and the blocks are then reduced in ordinal order, so the
    answer does not depend on ``inner_threads``.
    """
    if len(db) == 0:
        raise ValueError("reference database is empty")
    pattern = Pattern(query.seq, config)
    packed = db.packed
    bounds = [b for b in block_bounds(len(db), max(1, inner_threads)) if b[1] > b[0]]
    if len(bounds) == 1:
        local = [packed.argmin(pattern, *bounds[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
            local = list(pool.map(lambda b: packed.argmin(pattern, *b), bounds))
    best = None
    for hit in local:
        if hit is not None and (best is None or hit < best):
            best = hit
    if best is None:
        raise NoFiniteMetric(f"no reference within distance {config.max_distance} of {query.id}")
    distance, idx = best
    return MapResult(query.id, db.index_to_id[idx], float(distance))


# --------------------------------------------------------------------------
# Generic mapper
# --------------------------------------------------------------------------


class _Hook:
    """Stores a plain callable; reading it back binds the mapper as first argument."""

    def __set_name__(self, owner, name):
        self.name = name
        self.slot = "_hook_" + name

    def __get__(self, obj, objtype=None):
        if obj is None:
            return self
        fn = obj.__dict__.get(self.slot)
        return None if fn is None else functools.partial(fn, obj)

    def __set__(self, obj, fn):
        if fn is not None and not callable(fn):
            raise ContractError(f"hook {self.name!r} must be callable")
        obj.__dict__[self.slot] = fn


HOOK_NAMES = ("create_refDB", "use_refDB", "init_sim_search", "seq_align",
              "extract_sim_metric", "reduce_sim_metric", "cleanup")

REQUIRED_HOOKS = {
    "linearlinear": ("seq_align", "extract_sim_metric", "reduce_sim_metric", "cleanup"),
    "linear": ("seq_align", "cleanup"),
}


class GenericMapper:
    create_refDB = _Hook()
    use_refDB = _Hook()
    init_sim_search = _Hook()
    seq_align = _Hook()
    extract_sim_metric = _Hook()
    reduce_sim_metric = _Hook()
    cleanup = _Hook()

    def __init__(self, *, refDB_access_params=None, sim_search_params=None,
                 extract_sim_metric_params=None, seqmap_params=None, **hooks: Callable):
        unknown = set(hooks) - set(HOOK_NAMES)
        if unknown:
            raise ContractError(f"unknown hook(s): {sorted(unknown)}")
        for name in HOOK_NAMES:
            setattr(self, name, hooks.get(name))
        self.refDB_access_params: dict[str, Any] = dict(refDB_access_params or {})
        self.sim_search_params: dict[str, Any] = dict(sim_search_params or {})
        self.extract_sim_metric_params: dict[str, Any] = dict(extract_sim_metric_params or {})
        self.seqmap_params: dict[str, Any] = dict(seqmap_params or {})
        self.exec_config = ExecConfig()

    def sim_seq_search(self, workload, flow: str = "linearlinear", **exec_args) -> list:
        """Run the chosen data flow; keyword arguments build the :class:`ExecConfig`."""
        exec_config = ExecConfig(**exec_args)
        if flow == "linearlinear":
            return run_linearlinear(self, workload, exec_config)
        if flow == "linear":
            return run_linear(self, workload, exec_config)
        raise ValueError(f"unknown data flow {flow!r}")


def _check_flow(mapper: GenericMapper, workload, flow: str):
    if not isinstance(workload, (list, tuple)):
        raise ContractError("expect an array(ref) as workload")
    missing = [h for h in REQUIRED_HOOKS[flow] if getattr(mapper, h) is None]
    if missing:
        raise ContractError(f"{flow} flow requires hooks: {', '.join(missing)}")


def _call(hook_name, fn, position, *args):
    try:
        return fn(*args)
    except Exception as exc:
        raise HookError(hook_name, position, exc) from exc


def _process_linearlinear(mapper, element, position, do_cleanup):
    aligned = _call("seq_align", mapper.seq_align, position, element)
    metric = _call("extract_sim_metric", mapper.extract_sim_metric, position, aligned)
    reduced = _call("reduce_sim_metric", mapper.reduce_sim_metric, position, metric)
    out = list(reduced)
    if do_cleanup:
        _call("cleanup", mapper.cleanup, position, aligned, metric, reduced)
    return out


def _process_linear(mapper, element, position, do_cleanup):
    reduced = _call("seq_align", mapper.seq_align, position, element)
    out = list(reduced)
    if do_cleanup:
        _call("cleanup", mapper.cleanup, position, reduced)
    return out


def _drive(mapper, workload, exec_config: ExecConfig, step) -> list:
    mapper.exec_config = exec_config
    if mapper.init_sim_search is not None:
        mapper.init_sim_search()
    results: list = []
    if exec_config.max_workers == 1:
        for pos, element in enumerate(workload):
            results.extend(step(mapper, element, pos, exec_config.cleanup))
        return results

    def run_chunk(start):
        out = []
        for pos in range(start, min(start + exec_config.chunk_size, len(workload))):
            out.extend(step(mapper, workload[pos], pos, exec_config.cleanup))
        return out

    starts = range(0, len(workload), exec_config.chunk_size)
    with ThreadPoolExecutor(max_workers=exec_config.max_workers) as pool:
        futures = [pool.submit(run_chunk, s) for s in starts]
        try:
            for fut in futures:  # gather in chunk order
                results.extend(fut.result())
        except BaseException:
            for fut in futures:
                fut.cancel()
            raise
    return results


def run_linearlinear(mapper: GenericMapper, workload: Sequence, exec_config: ExecConfig = ExecConfig()) -> list:
    _check_flow(mapper, workload, "linearlinear")
    return _drive(mapper, workload, exec_config, _process_linearlinear)


def run_linear(mapper: GenericMapper, workload: Sequence, exec_config: ExecConfig = ExecConfig()) -> list:
    _check_flow(mapper, workload, "linear")
    return _drive(mapper, workload, exec_config, _process_linear)


# --------------------------------------------------------------------------
# Ready-made edit-distance mappers
# --------------------------------------------------------------------------


def _noop_cleanup(mapper, *stages):
    return None


def _hook_create_refdb(mapper, location, name, records):
    return build_refdb(records, location, name, per_file=mapper.refDB_access_params.get("per_file", False))


def _hook_use_refdb(mapper, location, name):
    db = load_refdb(location, name)
    mapper.refDB_access_params["DB"] = db
    return db


def _unmapped(query_id):
    return MapResult(query_id, "*", math.inf)


def _linear_seq_align(mapper, query):
    db = mapper.refDB_access_params["DB"]
    config = mapper.sim_search_params.get("config", AlignConfig())
    try:
        return [map_query_minimizing(query, db, config, mapper.exec_config.inner_threads)]
    except NoFiniteMetric:
        return [_unmapped(query.id)]


def _ll_seq_align(mapper, query):
    db = mapper.refDB_access_params["DB"]
    config = mapper.sim_search_params.get("config", AlignConfig())
    return query.id, distance_profile(query.seq, db.packed, config, mapper.exec_config.inner_threads)


def _ll_extract(mapper, aligned):
    return aligned


def _ll_reduce(mapper, metric):
    query_id, profile = metric
    try:
        best_id, best = reduce_min_metric(profile, mapper.refDB_access_params["DB"])
    except NoFiniteMetric:
        return [_unmapped(query_id)]
    return [MapResult(query_id, best_id, best)]


def edit_distance_mapper(db: RefDB | None = None, config: AlignConfig = AlignConfig(),
                         flow: str = "linear") -> GenericMapper:
    """Mapper that assigns each query to its minimum-edit-distance reference.

    Queries with no reference inside ``config.max_distance`` come back as
    ``MapResult(query_id, "*", inf)``.
    """
    hooks = dict(create_refDB=_hook_create_refdb, use_refDB=_hook_use_refdb, cleanup=_noop_cleanup)
    if flow == "linear":
        hooks["seq_align"] = _linear_seq_align
    elif flow == "linearlinear":
        hooks.update(seq_align=_ll_seq_align, extract_sim_metric=_ll_extract,
                     reduce_sim_metric=_ll_reduce)
    else:
        raise ValueError(f"unknown data flow {flow!r}")
    access = {} if db is None else {"DB": db}
    return GenericMapper(refDB_access_params=access, sim_search_params={"config": config}, **hooks)


def default_threads() -> int:
    """Inner thread count from ``SEQMAP_THREADS``, read at call time."""
    try:
        return max(1, int(os.environ.get("SEQMAP_THREADS", "1")))
    except ValueError:
        return 1
