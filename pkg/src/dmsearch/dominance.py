"""Pareto dominance, the nondominated archive, and margin-based filtering.

The archive keeps (point, value, stepsize) triples with provenance links
(parent_id = the entry whose poll or stepsize update produced this one),
so a finished run can be unwound into generation chains.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .core import Array

__all__ = [
    "dominates",
    "ParetoEntry",
    "ParetoArchive",
    "in_margin_dominated",
    "filter_insert",
    "SelectionStrategy",
    "LargestStepsize",
    "Fifo",
    "RandomSelection",
    "make_selection",
    "write_archive_csv",
    "read_archive_csv",
]


def dominates(u: Array, v: Array) -> bool:
    """True iff u dominates v: v - u is componentwise >= 0 and not all zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"mismatched shapes {u.shape} vs {v.shape}")
    diff = v - u
    return bool(np.all(diff >= 0) and np.any(diff > 0))


@dataclass(frozen=True)
class ParetoEntry:
    """One archive member: where it is, what it scored, its poll radius.

    created_at is the first iteration index at which the entry is part of
    the list (the initial entry has created_at 0).  parent_id is None only
    for the initial entry.
    """

    id: int
    point: Array
    value: Array
    stepsize: float
    parent_id: Optional[int] = None
    created_at: int = 0

    def __post_init__(self):
        if not self.stepsize > 0:
            raise ValueError(f"entry stepsize must be positive, got {self.stepsize}")
        p = np.array(self.point, dtype=np.float64, copy=True)
        v = np.array(self.value, dtype=np.float64, copy=True)
        if not np.all(np.isfinite(v)):
            raise ValueError("archive entries need finite values")
        p.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "value", v)


class ParetoArchive:
    """An ordered list of mutually nondominated entries."""

    def __init__(self, entries: Iterable[ParetoEntry] = ()):
        self._entries: list[ParetoEntry] = list(entries)
        self._values: Optional[np.ndarray] = None

    @property
    def entries(self) -> list[ParetoEntry]:
        return list(self._entries)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self._entries)

    def values_matrix(self) -> np.ndarray:
        if self._values is None or self._values.shape[0] != len(self._entries):
            if self._entries:
                self._values = np.ascontiguousarray(
                    np.stack([e.value for e in self._entries])
                )
            else:
                self._values = np.zeros((0, 0))
        return self._values

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __contains__(self, entry_id: int) -> bool:
        return any(e.id == entry_id for e in self._entries)


def in_margin_dominated(u: Array, archive: ParetoArchive, a: float) -> bool:
    """Is value u inside the a-margin around the archive's dominated region?

    Membership means some entry w has u_i >= w_i - a for all i; with a = 0
    this is weak dominance by an archive member.  a must be nonnegative.
    """
    if a < 0:
        raise ValueError(f"margin must be nonnegative, got {a}")
    if len(archive) == 0:
        return False
    u = np.ascontiguousarray(np.asarray(u, dtype=np.float64))
    vals = archive.values_matrix()
    if u.shape != (vals.shape[1],):
        raise ValueError(f"value has shape {u.shape}, archive holds width {vals.shape[1]}")
    return kernels.margin_dominated(vals, u, float(a))


def filter_insert(
    archive: ParetoArchive, candidates: Sequence[ParetoEntry], a: float
) -> tuple[ParetoArchive, bool, list[int]]:
    """Insert candidates that clear the margin test, evicting what they beat.

    Candidates are processed in order, each tested against the current list
    including candidates accepted earlier in the same call.  An accepted
    candidate removes every entry it dominates outright (no margin).  Returns
    (new archive, changed flag, ids of accepted candidates).
    """
    if a < 0:
        raise ValueError(f"margin must be nonnegative, got {a}")
    current = archive.entries
    accepted: list[int] = []
    for cand in candidates:
        if current:
            vals = np.ascontiguousarray(np.stack([e.value for e in current]))
            u = np.ascontiguousarray(cand.value)
            if kernels.margin_dominated(vals, u, float(a)):
                continue
            evict = kernels.dominated_mask(vals, u)
            if evict.any():
                current = [e for e, dead in zip(current, evict) if not dead]
        current.append(cand)
        accepted.append(cand.id)
    changed = bool(accepted)
    return ParetoArchive(current), changed, accepted


class SelectionStrategy:
    """Picks the iterate entry for the next poll."""

    def select(self, archive: ParetoArchive) -> ParetoEntry:
        raise NotImplementedError


class LargestStepsize(SelectionStrategy):
    """Largest poll radius first; ties go to the lowest id."""

    def select(self, archive: ParetoArchive) -> ParetoEntry:
        if len(archive) == 0:
            raise ValueError("cannot select from an empty archive")
        return max(archive, key=lambda e: (e.stepsize, -e.id))


class Fifo(SelectionStrategy):
    """Oldest entry first; ties go to the lowest id."""

    def select(self, archive: ParetoArchive) -> ParetoEntry:
        if len(archive) == 0:
            raise ValueError("cannot select from an empty archive")
        return min(archive, key=lambda e: (e.created_at, e.id))


class RandomSelection(SelectionStrategy):
    """Seeded uniform choice; deterministic for a fixed seed and call order."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def select(self, archive: ParetoArchive) -> ParetoEntry:
        if len(archive) == 0:
            raise ValueError("cannot select from an empty archive")
        entries = archive.entries
        return entries[int(self._rng.integers(len(entries)))]


def make_selection(name: str, seed: int = 0) -> SelectionStrategy:
    if name == "largest-stepsize":
        return LargestStepsize()
    if name == "fifo":
        return Fifo()
    if name == "random":
        return RandomSelection(seed)
    raise ValueError(f"unknown selection strategy {name!r}")


def write_archive_csv(path, entries: Iterable[ParetoEntry]) -> None:
    """One row per entry: id, parent_id, created_at, stepsize, x..., F...."""
    entries = list(entries)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if not entries:
            w.writerow(["id", "parent_id", "created_at", "stepsize"])
            return
        n = entries[0].point.shape[0]
        m = entries[0].value.shape[0]
        w.writerow(
            ["id", "parent_id", "created_at", "stepsize"]
            + [f"x{j}" for j in range(n)]
            + [f"f{j}" for j in range(m)]
        )
        for e in entries:
            w.writerow(
                [e.id, "" if e.parent_id is None else e.parent_id, e.created_at, repr(e.stepsize)]
                + [repr(float(v)) for v in e.point]
                + [repr(float(v)) for v in e.value]
            )


def read_archive_csv(path) -> list[ParetoEntry]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    n = sum(1 for h in header if h.startswith("x"))
    m = sum(1 for h in header if h.startswith("f"))
    out = []
    for row in rows[1:]:
        out.append(
            ParetoEntry(
                id=int(row[0]),
                parent_id=None if row[1] == "" else int(row[1]),
                created_at=int(row[2]),
                stepsize=float(row[3]),
                point=np.array([float(v) for v in row[4 : 4 + n]]),
                value=np.array([float(v) for v in row[4 + n : 4 + n + m]]),
            )
        )
    return out
