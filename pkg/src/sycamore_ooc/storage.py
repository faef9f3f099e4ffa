"""Disk-backed slice store.

Each logical file holds the amplitudes of one assignment of the index
qubits, stored as little-endian interleaved (re, im) pairs. A write cycle
(or read cycle) ends once every file id has been touched exactly once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

PRECISIONS = {"single": np.dtype("<c8"), "double": np.dtype("<c16")}
MANIFEST = "manifest.json"
SUFFIX = ".slice"


class StorageError(OSError):
    pass


class DisciplineError(StorageError):
    """A file was accessed twice in one cycle, or read after being rewritten."""


@dataclass(frozen=True)
class FileIndexScheme:
    index_qubits: tuple[int, ...]
    local_qubits: tuple[int, ...]
    root: Path

    def __post_init__(self):
        object.__setattr__(self, "index_qubits", tuple(self.index_qubits))
        object.__setattr__(self, "local_qubits", tuple(self.local_qubits))
        object.__setattr__(self, "root", Path(self.root))
        both = self.index_qubits + self.local_qubits
        if len(set(both)) != len(both):
            raise ValueError("index and local qubits must be distinct and disjoint")

    @property
    def n_files(self) -> int:
        return 2 ** len(self.index_qubits)

    @property
    def amps_per_file(self) -> int:
        return 2 ** len(self.local_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.index_qubits) + len(self.local_qubits)

    def path(self, fid: int) -> Path:
        width = max(1, -(-len(self.index_qubits) // 4))
        return self.root / f"{fid:0{width}x}{SUFFIX}"


def file_id(scheme: FileIndexScheme, assignment: Mapping[int, int]) -> int:
    """Pack index-qubit bits into an id; ``index_qubits[0]`` is the low bit."""
    if set(assignment) != set(scheme.index_qubits):
        missing = set(scheme.index_qubits) - set(assignment)
        extra = set(assignment) - set(scheme.index_qubits)
        raise ValueError(f"assignment mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
    fid = 0
    for pos, q in enumerate(scheme.index_qubits):
        bit = assignment[q]
        if bit not in (0, 1):
            raise ValueError(f"qubit {q} assigned non-bit {bit!r}")
        fid |= bit << pos
    return fid


def id_assignment(scheme: FileIndexScheme, fid: int) -> dict[int, int]:
    if not 0 <= fid < scheme.n_files:
        raise ValueError(f"file id {fid} out of range")
    return {q: (fid >> pos) & 1 for pos, q in enumerate(scheme.index_qubits)}


class SliceStore:
    def __init__(self, scheme: FileIndexScheme, precision: str = "single", n_qubits: Optional[int] = None):
        if precision not in PRECISIONS:
            raise ValueError(f"unknown precision {precision!r}")
        self.scheme = scheme
        self.precision = precision
        self.dtype = PRECISIONS[precision]
        self.write_cycles = 0
        self.read_cycles = 0
        self._writing: set[int] = set()
        self._reading: set[int] = set()
        try:
            scheme.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create storage root {scheme.root}: {exc}") from exc
        self._save_manifest()

    @classmethod
    def open(cls, root: str | Path) -> "SliceStore":
        root = Path(root)
        try:
            data = json.loads((root / MANIFEST).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageError(f"no readable manifest under {root}: {exc}") from exc
        store = cls.__new__(cls)
        store.scheme = FileIndexScheme(tuple(data["index_qubits"]), tuple(data["local_qubits"]), root)
        store.precision = data["precision"]
        store.dtype = PRECISIONS[store.precision]
        store.write_cycles = data["write_cycles"]
        store.read_cycles = data["read_cycles"]
        store._writing, store._reading = set(), set()
        return store

    @property
    def bytes_per_amp(self) -> int:
        return self.dtype.itemsize

    def manifest(self) -> dict:
        return {
            "index_qubits": list(self.scheme.index_qubits),
            "local_qubits": list(self.scheme.local_qubits),
            "precision": self.precision,
            "bytes_per_amplitude": self.bytes_per_amp,
            "n_files": self.scheme.n_files,
            "write_cycles": self.write_cycles,
            "read_cycles": self.read_cycles,
        }

    def _save_manifest(self):
        (self.scheme.root / MANIFEST).write_text(json.dumps(self.manifest(), indent=1) + "\n")

    def _check_id(self, fid: int):
        if not 0 <= fid < self.scheme.n_files:
            raise StorageError(f"file id {fid} out of range for {self.scheme.n_files} files")

    def write_slice(self, fid: int, amps: np.ndarray) -> None:
        self._check_id(fid)
        amps = np.asarray(amps)
        if amps.shape != (self.scheme.amps_per_file,):
            raise ValueError(f"slice has {amps.size} amplitudes, expected {self.scheme.amps_per_file}")
        if fid in self._writing:
            raise DisciplineError(f"file {fid:#x} written twice in write cycle {self.write_cycles}")
        try:
            amps.astype(self.dtype).tofile(self.scheme.path(fid))
        except OSError as exc:
            raise StorageError(f"cannot write file {fid:#x}: {exc}") from exc
        self._writing.add(fid)
        if len(self._writing) == self.scheme.n_files:
            self._writing.clear()
            self.write_cycles += 1
            self._save_manifest()

    def read_slice(self, fid: int) -> np.ndarray:
        self._check_id(fid)
        if fid in self._reading:
            raise DisciplineError(f"file {fid:#x} read twice in read cycle {self.read_cycles}")
        if fid in self._writing:
            raise DisciplineError(f"file {fid:#x} read after being rewritten in an open write cycle")
        path = self.scheme.path(fid)
        try:
            raw = np.fromfile(path, dtype=self.dtype)
        except OSError as exc:
            raise StorageError(f"missing or unreadable file {path.name}: {exc}") from exc
        if raw.size != self.scheme.amps_per_file:
            raise StorageError(f"file {path.name} holds {raw.size} amplitudes, expected {self.scheme.amps_per_file}")
        self._reading.add(fid)
        if len(self._reading) == self.scheme.n_files:
            self._reading.clear()
            self.read_cycles += 1
            self._save_manifest()
        return raw.astype(np.complex128)

    def cycles_open(self) -> bool:
        return bool(self._writing or self._reading)


def load_state(store: SliceStore) -> np.ndarray:
    """Read every file once and assemble the full state, qubit 0 as LSB."""
    from ._tensorops import axes_view, flatten_axes

    s = store.scheme
    n = s.n_qubits
    order = s.local_qubits + s.index_qubits
    blocks = [store.read_slice(fid) for fid in range(s.n_files)]
    # file id bits sit above the local bits, matching ``order``
    t = axes_view(np.concatenate(blocks) if blocks else np.zeros(1, complex), n)
    perm = [order.index(q) for q in range(n)]
    return flatten_axes(t.transpose(perm))


def write_state(store: SliceStore, amps: np.ndarray) -> None:
    """Write a full state vector as one complete write cycle."""
    from ._tensorops import axes_view, flatten_axes

    s = store.scheme
    n = s.n_qubits
    if np.asarray(amps).shape != (2**n,):
        raise ValueError("state size does not match the scheme")
    order = s.local_qubits + s.index_qubits
    t = axes_view(np.asarray(amps), n).transpose(order)
    flat = flatten_axes(t)
    per = s.amps_per_file
    for fid in range(s.n_files):
        store.write_slice(fid, flat[fid * per:(fid + 1) * per])


def scheme_for(n_qubits: int, index_qubits: Sequence[int], root: str | Path) -> FileIndexScheme:
    index = tuple(index_qubits)
    local = tuple(q for q in range(n_qubits) if q not in set(index))
    return FileIndexScheme(index, local, Path(root))
