"""PolyA tail simulation, trimming and edit-distance mapping."""

from .align import AlignConfig, AlignResult, distance_profile, edit_distance_bitparallel, edit_distance_dp
from .errors import TailmapError
from .mapframe import ExecConfig, GenericMapper, MapResult, RefDB, build_refdb, load_refdb
from .rng import DistributionSpec, TruncationWindow, UniformEngine, simulate_trunc
from .seqio import ModificationLedger, SeqRecord, load_modifications, read_fasta, store_modifications, write_fasta
from .tailsim import TailingConfig, add_polyA
from .trim import TrimAlgorithm, TrimResult, run_trimmer

__version__ = "0.1.0"

__all__ = [
    "AlignConfig", "AlignResult", "DistributionSpec", "ExecConfig", "GenericMapper", "MapResult",
    "ModificationLedger", "RefDB", "SeqRecord", "TailingConfig", "TailmapError", "TrimAlgorithm",
    "TrimResult", "TruncationWindow", "UniformEngine", "add_polyA", "build_refdb", "distance_profile",
    "edit_distance_bitparallel", "edit_distance_dp", "load_modifications", "load_refdb", "read_fasta",
    "run_trimmer", "simulate_trunc", "store_modifications", "write_fasta",
]
