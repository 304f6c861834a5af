"""Shared population store and the hop-sample silo.

All operations are guarded by a single lock, which makes every interleaving
trivially linearizable; nothing here blocks beyond O(store size). The store
never evicts its best entry, so the best attained fitness is monotone over
any operation sequence.
"""

from __future__ import annotations

import json
import math
import struct
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .objectives import FitnessVector
from .polytope import Polytope, format_polytope_text, parse_polytope_text

LABEL_SUCCESS = "success"
LABEL_GEOM_REJECTED = "geomRejected"
LABEL_NO_SUCCESS = "feasibleNoSuccess"
LABELS = (LABEL_SUCCESS, LABEL_GEOM_REJECTED, LABEL_NO_SUCCESS)


@dataclass
class HopSample:
    """One labeled (polytope, hyperplane) pair for the scoring model."""

    vertices: list  # rows of strings "p/q" (exact snapshot)
    top: list
    bottom: list
    normal: list  # canonical integer normal
    offset: int
    deck: str  # "top" | "bottom"
    label: str
    defect: int

    def to_json(self) -> dict:
        return {
            "vertices": self.vertices,
            "top": self.top,
            "bottom": self.bottom,
            "plane": {"normal": [str(x) for x in self.normal], "offset": str(self.offset)},
            "deck": self.deck,
            "label": self.label,
            "defect": self.defect,
        }

    @staticmethod
    def from_json(obj: dict) -> "HopSample":
        plane = obj["plane"]
        return HopSample(
            vertices=obj["vertices"],
            top=list(obj["top"]),
            bottom=list(obj["bottom"]),
            normal=[int(x) for x in plane["normal"]],
            offset=int(plane["offset"]),
            deck=obj["deck"],
            label=obj["label"],
            defect=int(obj["defect"]),
        )

    def polytope(self) -> Polytope:
        rows = [[Fraction(tok) for tok in row] for row in self.vertices]
        return Polytope(rows, validate=False)


def reverify_sample(sample: HopSample) -> bool:
    """Exact re-verification of one silo record.

    Checks that the snapshot is a prismatoid whose decks match the recorded
    partition, that the recorded plane is spanned by d of the snapshot's own
    vertices, that the label is one of the three classes, and that the stored
    defect equals the exact recomputation.
    """
    from .analysis import defect as exact_defect
    from .analysis import detect_prismatoid
    from .hyperplanes import Hyperplane
    from .linalg import affine_rank

    if sample.label not in LABELS:
        return False
    P = sample.polytope()
    if set(sample.top) | set(sample.bottom) != set(range(P.n)):
        return False
    try:
        Q = detect_prismatoid(P, "exact")
    except Exception:
        return False
    recorded = {frozenset(sample.top), frozenset(sample.bottom)}
    if {Q.top, Q.bottom} != recorded:
        return False
    plane = Hyperplane(tuple(sample.normal), sample.offset)
    onset = [i for i in range(P.n) if plane.evaluate(P.vertices[i]) == 0]
    if len(onset) < P.d:
        return False
    V = P.int_vertices()
    if affine_rank([V[i] for i in onset]) != P.d:
        return False
    return exact_defect(Q, "exact") == sample.defect


def snapshot_vertices(P: Polytope) -> list:
    return [[_frac_str(x) for x in row] for row in P.vertices]


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class RepositoryEntry:
    """A stored polytope with its fitness, importance and improvement history."""

    polytope: Polytope
    fitness: FitnessVector
    importance: float = 0.0
    generation: int = 0
    improvement_history: list = field(default_factory=list)  # (generation, objective, scalar)
    failure_count: int = 0
    ascension_generation: Optional[int] = None
    lattice_key: Optional[str] = None

    def copied(self) -> "RepositoryEntry":
        return replace(self, improvement_history=list(self.improvement_history))


def lattice_hash(P: Polytope) -> str:
    """Relabeling-invariant hash of the exact facet lattice (WL hash of the
    vertex-facet incidence graph)."""
    import networkx as nx

    from .hull import facet_enumeration

    complex_ = facet_enumeration(P, "exact")
    G = nx.Graph()
    for i in range(P.n):
        G.add_node(("v", i), kind="v")
    for j, f in enumerate(complex_.facets):
        G.add_node(("f", j), kind="f")
        for i in f.vertices:
            G.add_edge(("f", j), ("v", i))
    return nx.weisfeiler_lehman_graph_hash(G, node_attr="kind", iterations=4)


class Repository:
    """Bounded, importance-scored population store with work-stealing reads."""

    def __init__(self, max_size=512, eviction_sample=8, p_read=0.9,
                 weights=(1.0, 0.5, 0.05), importance_tau=50.0):
        self.max_size = max_size
        self.eviction_sample = eviction_sample
        self.p_read = p_read
        self.weights = weights
        self.importance_tau = importance_tau
        self._entries = {}
        self._next_id = 0
        self._best_id = None
        self._dedup = {}  # lattice_key -> entry id
        self._lock = threading.Lock()
        self.generation_clock = 0

    # -- scoring --------------------------------------------------------------

    def _importance(self, entry: RepositoryEntry) -> float:
        w1, w2, w3 = self.weights
        primary = entry.fitness.scalar()
        last_improved = entry.improvement_history[-1][0] if entry.improvement_history else entry.generation
        age = max(0, self.generation_clock - last_improved)
        return w1 * primary + w2 * math.exp(-age / self.importance_tau) - w3 * entry.failure_count

    # -- operations -------------------------------------------------------------

    def insert(self, entry: RepositoryEntry) -> bool:
        """Insert (or dedup-merge) the entry; evict while over capacity.

        Returns True if the entry ended up stored.
        """
        with self._lock:
            self.generation_clock = max(self.generation_clock, entry.generation)
            if entry.lattice_key is None:
                entry.lattice_key = lattice_hash(entry.polytope)
            entry.importance = self._importance(entry)
            existing_id = self._dedup.get(entry.lattice_key)
            if existing_id is not None and existing_id in self._entries:
                other = self._entries[existing_id]
                if other.importance >= entry.importance:
                    return False
                self._entries.pop(existing_id)
            eid = self._next_id
            self._next_id += 1
            self._entries[eid] = entry
            self._dedup[entry.lattice_key] = eid
            if self._best_id is None or self._key(entry) > self._key(self._entries.get(self._best_id)):
                self._best_id = eid
            self._evict_locked()
            return True

    def _key(self, entry):
        if entry is None:
            return ()
        return entry.fitness.key

    def _evict_locked(self):
        import random as _random

        while len(self._entries) > self.max_size:
            ids = [i for i in self._entries if i != self._best_id]
            if not ids:
                return
            sample = _random.Random(self._next_id).sample(ids, min(self.eviction_sample, len(ids)))
            victim = min(sample, key=lambda i: self._entries[i].importance)
            entry = self._entries.pop(victim)
            if self._dedup.get(entry.lattice_key) == victim:
                self._dedup.pop(entry.lattice_key, None)

    def steal(self, rng) -> Optional[RepositoryEntry]:
        """A copy of an entry sampled by importance, or None (fresh-seed signal)."""
        with self._lock:
            if not self._entries or rng.random() >= self.p_read:
                return None
            ids = sorted(self._entries)
            # proportional to importance; non-positive scores get a small floor
            floor = 1e-9
            weights = [max(self._entries[i].importance, floor) for i in ids]
            total = sum(weights)
            r = rng.random() * total
            acc = 0.0
            for i, w in zip(ids, weights):
                acc += w
                if r <= acc:
                    return self._entries[i].copied()
            return self._entries[ids[-1]].copied()

    def record_failure(self, lattice_key) -> None:
        with self._lock:
            eid = self._dedup.get(lattice_key)
            if eid is not None and eid in self._entries:
                self._entries[eid].failure_count += 1
                self._entries[eid].importance = self._importance(self._entries[eid])

    def best(self) -> Optional[RepositoryEntry]:
        with self._lock:
            if self._best_id is None or self._best_id not in self._entries:
                return None
            return self._entries[self._best_id].copied()

    def size(self) -> int:
        with self._lock:
            return len(self._entries)

    def entries(self) -> list:
        with self._lock:
            return [e.copied() for e in self._entries.values()]


class SampleSilo:
    """Bounded FIFO of hop samples; full silo drops the oldest records."""

    def __init__(self, capacity=10**6):
        self.capacity = capacity
        self._records = []
        self._dropped = 0
        self._lock = threading.Lock()

    def append(self, records) -> int:
        with self._lock:
            self._records.extend(records)
            overflow = len(self._records) - self.capacity
            if overflow > 0:
                self._records = self._records[overflow:]
                self._dropped += overflow
            return len(self._records)

    def read_all(self) -> list:
        with self._lock:
            return list(self._records)

    def __len__(self):
        with self._lock:
            return len(self._records)

    @property
    def dropped(self):
        with self._lock:
            return self._dropped


# ---------------------------------------------------------------------------
# file formats

SILO_HEADER = b"polyhop-silo v1\n"
SNAPSHOT_HEADER = "polyhop-repo v1"


def write_silo_file(path, samples) -> None:
    """Append-only silo file: one-line header then length-prefixed JSON records."""
    with open(path, "wb") as fh:
        fh.write(SILO_HEADER)
        for s in samples:
            blob = json.dumps(s.to_json(), separators=(",", ":")).encode("utf-8")
            fh.write(struct.pack(">I", len(blob)))
            fh.write(blob)


def append_silo_file(path, samples) -> None:
    import os

    if not os.path.exists(path):
        write_silo_file(path, samples)
        return
    with open(path, "ab") as fh:
        for s in samples:
            blob = json.dumps(s.to_json(), separators=(",", ":")).encode("utf-8")
            fh.write(struct.pack(">I", len(blob)))
            fh.write(blob)


def read_silo_file(path) -> list:
    samples = []
    with open(path, "rb") as fh:
        header = fh.readline()
        if header != SILO_HEADER:
            from .errors import ParseError

            raise ParseError(f"bad silo header {header!r}")
        while True:
            raw = fh.read(4)
            if not raw:
                break
            (length,) = struct.unpack(">I", raw)
            blob = fh.read(length)
            samples.append(HopSample.from_json(json.loads(blob.decode("utf-8"))))
    return samples


def write_snapshot(path, entries) -> None:
    """Repository snapshot: metadata line plus a polytope block per entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SNAPSHOT_HEADER + "\n")
        for e in entries:
            asc = e.ascension_generation if e.ascension_generation is not None else "-"
            fh.write(
                f"entry importance={e.importance} generation={e.generation} "
                f"failures={e.failure_count} ascension={asc} "
                f"objective={e.fitness.active_objective} scalar={e.fitness.scalar()}\n"
            )
            fh.write(format_polytope_text(e.polytope))
            fh.write("\n")


def read_snapshot(path) -> list:
    """Snapshot entries as (metadata dict, Polytope) pairs."""
    from .errors import ParseError

    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SNAPSHOT_HEADER:
        raise ParseError("bad snapshot header")
    out = []
    i = 1
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        if not lines[i].startswith("entry "):
            raise ParseError(f"expected entry line at {i}")
        meta = {}
        for tok in lines[i].split()[1:]:
            k, v = tok.split("=", 1)
            meta[k] = v
        i += 1
        n, d = (int(x) for x in lines[i].split())
        block = "\n".join(lines[i : i + n + 1])
        out.append((meta, parse_polytope_text(block)))
        i += n + 1
    return out
