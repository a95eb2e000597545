"""Signed graph container and edge-list I/O.

A signed network is stored as two sparse edge lists, one holding the
positive part A+ and one holding the magnitudes of the negative part A-,
so that A = A+ - A-.  Undirected graphs keep each edge once with i <= j
and are expanded to both orientations on demand.

Edge-list grammar (one edge per line)::

    # free comment
    #! directed            (or "#! undirected")
    #! vertex NAME         (declares a vertex; fixes index order)
    SRC DST WEIGHT

WEIGHT is a signed real; zero weights and repeated pairs are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp


class EdgeListError(ValueError):
    """Malformed edge-list input.  ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class Edges(NamedTuple):
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    def __len__(self) -> int:  # type: ignore[override]
        return int(self.src.shape[0])


def _empty_edges() -> Edges:
    return Edges(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0))


@dataclass(frozen=True, eq=False)
class SignedGraph:
    """Weighted signed network.

    Use :meth:`from_edges` or :func:`parse_edge_list` rather than the raw
    constructor; they enforce the storage invariants.

    Attributes:
        n: number of vertices.
        directed: whether (i, j) and (j, i) are distinct.
        pos: positive edges, weights > 0.
        neg: negative edges, stored as positive magnitudes.
        names: external vertex ids, index i <-> names[i].
    """

    n: int
    directed: bool
    pos: Edges = field(default_factory=_empty_edges)
    neg: Edges = field(default_factory=_empty_edges)
    names: tuple[str, ...] = ()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]], directed: bool = False,
                   names: Sequence[str] | None = None) -> "SignedGraph":
        """Build a graph from ``(i, j, signed_weight)`` triples."""
        if names is None:
            names = [str(i) for i in range(n)]
        if len(names) != n:
            raise ValueError(f"got {len(names)} names for {n} vertices")
        if len(set(names)) != n:
            raise ValueError("vertex names must be unique")
        seen = set()
        buckets: dict[bool, list[tuple[int, int, float]]] = {True: [], False: []}
        for i, j, w in edges:
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if w == 0 or not np.isfinite(w):
                raise ValueError(f"edge ({i}, {j}) has invalid weight {w}")
            if not directed and i > j:
                i, j = j, i
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            buckets[w > 0].append((i, j, abs(w)))
        return cls(n=n, directed=directed, pos=_pack(buckets[True]), neg=_pack(buckets[False]),
                   names=tuple(names))

    @property
    def m(self) -> int:
        """Number of stored edges (both signs)."""
        return len(self.pos) + len(self.neg)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(A+, A-)``, symmetric for undirected graphs."""
        mats = []
        for e in (self.pos, self.neg):
            a = np.zeros((self.n, self.n))
            a[e.src, e.dst] = e.weight
            if not self.directed:
                a[e.dst, e.src] = e.weight
            mats.append(a)
        return mats[0], mats[1]

    def adjacency(self) -> np.ndarray:
        ap, an = self.dense()
        return ap - an

    @cached_property
    def oriented(self) -> tuple[Edges, Edges]:
        """Edges in both orientations for undirected graphs; self-loops once."""
        if self.directed:
            return self.pos, self.neg
        return _symmetrize(self.pos), _symmetrize(self.neg)

    @cached_property
    def incidence(self) -> tuple[tuple[sp.csr_matrix, sp.csr_matrix], ...]:
        """``(n, m)`` 0/1 tail and head incidence matrices per sign.

        Column k of the tail matrix marks the source of oriented edge k,
        so ``tail @ x`` sums per-edge rows of ``x`` by source vertex.
        """
        out = []
        for e in self.oriented:
            cols = np.arange(len(e))
            ones = np.ones(len(e))
            out.append((sp.csr_matrix((ones, (e.src, cols)), shape=(self.n, len(e))),
                        sp.csr_matrix((ones, (e.dst, cols)), shape=(self.n, len(e)))))
        return tuple(out)

    def summary(self) -> dict:
        return {"n": self.n, "m_pos": len(self.pos), "m_neg": len(self.neg),
                "directed": self.directed}

    def summary_json(self) -> str:
        return json.dumps(self.summary())


def _pack(rows: list[tuple[int, int, float]]) -> Edges:
    if not rows:
        return _empty_edges()
    arr = np.array(rows, dtype=float)
    return Edges(arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2].copy())


def _symmetrize(e: Edges) -> Edges:
    off = e.src != e.dst
    return Edges(np.concatenate([e.src, e.dst[off]]),
                 np.concatenate([e.dst, e.src[off]]),
                 np.concatenate([e.weight, e.weight[off]]))


@dataclass(frozen=True, eq=False)
class Partition:
    """Hard assignment of every vertex to one of ``c`` groups.

    ``flagged`` marks vertices whose label is a placeholder (no edges on
    the relevant side).
    """

    labels: np.ndarray
    c: int
    flagged: np.ndarray | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.c):
            raise ValueError(f"labels must lie in 0..{self.c - 1}")

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Partition":
        """Relabel arbitrary hashable labels to 0..c-1 by first appearance."""
        index: dict = {}
        dense = [index.setdefault(x, len(index)) for x in labels]
        return cls(np.array(dense, dtype=np.int64), max(len(index), 1))

    def __len__(self) -> int:
        return int(self.labels.shape[0])


def parse_edge_list(text: str | Iterable[str], directed: bool | None = None) -> SignedGraph:
    """Parse the whitespace-separated signed edge-list format.

    Args:
        text: file contents or an iterable of lines.
        directed: overrides any ``#! directed`` directive; without either the
            graph is undirected.

    Raises:
        EdgeListError: malformed line, zero weight or duplicate pair.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    index: dict[str, int] = {}
    header_directed = None
    raw = []
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#!"):
            parts = s[2:].split()
            if parts == ["directed"]:
                header_directed = True
            elif parts == ["undirected"]:
                header_directed = False
            elif len(parts) == 2 and parts[0] == "vertex":
                index.setdefault(parts[1], len(index))
            else:
                raise EdgeListError(f"unknown directive {s!r}", lineno)
            continue
        if s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 3:
            raise EdgeListError(f"expected 'src dst weight', got {s!r}", lineno)
        try:
            w = float(parts[2])
        except ValueError:
            raise EdgeListError(f"weight {parts[2]!r} is not a number", lineno) from None
        if w == 0:
            raise EdgeListError("zero weight", lineno)
        if not np.isfinite(w):
            raise EdgeListError(f"non-finite weight {parts[2]!r}", lineno)
        i = index.setdefault(parts[0], len(index))
        j = index.setdefault(parts[1], len(index))
        raw.append((i, j, w, lineno))

    if directed is None:
        directed = bool(header_directed)
    seen = set()
    for i, j, _, lineno in raw:
        key = (i, j) if directed else (min(i, j), max(i, j))
        if key in seen:
            raise EdgeListError(f"duplicate edge {key}", lineno)
        seen.add(key)
    names = [None] * len(index)
    for name, i in index.items():
        names[i] = name
    return SignedGraph.from_edges(len(index), [(i, j, w) for i, j, w, _ in raw],
                                  directed=directed, names=names)


def emit_edge_list(g: SignedGraph) -> str:
    """Serialize ``g``; :func:`parse_edge_list` reads it back unchanged."""
    out = ["# signed edge list: src dst weight",
           "#! directed" if g.directed else "#! undirected"]
    out.extend(f"#! vertex {name}" for name in g.names)
    for e, sign in ((g.pos, 1.0), (g.neg, -1.0)):
        for i, j, w in zip(e.src, e.dst, e.weight):
            out.append(f"{g.names[i]} {g.names[j]} {format(sign * w, '.17g')}")
    return "\n".join(out) + "\n"


def read_edge_list(path, directed: bool | None = None) -> SignedGraph:
    with open(path) as fh:
        return parse_edge_list(fh.read(), directed=directed)


def write_edge_list(g: SignedGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(emit_edge_list(g))


def signed_degree_stats(g: SignedGraph) -> np.ndarray:
    """Per-vertex ``(positive strength, negative strength, total degree)``.

    Strengths are row sums of A+ and A- (out-strengths for directed
    graphs).  The total degree is the row sum of A+ + A-.
    Returns an ``(n, 3)`` array.
    """
    stats = np.zeros((g.n, 3))
    pos, neg = g.oriented
    np.add.at(stats[:, 0], pos.src, pos.weight)
    np.add.at(stats[:, 1], neg.src, neg.weight)
    stats[:, 2] = stats[:, 0] + stats[:, 1]
    return stats


def parse_labels(text: str, names: Sequence[str] | None = None) -> tuple[list[str], np.ndarray]:
    """Parse a ``name label`` file.  Returns names and raw labels in file order.

    If ``names`` is given the result is reordered to match it and any
    mismatch between the two vertex sets raises ``ValueError``.
    """
    got: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise EdgeListError(f"expected 'name label', got {s!r}", lineno)
        if parts[0] in got:
            raise EdgeListError(f"vertex {parts[0]!r} labelled twice", lineno)
        got[parts[0]] = parts[1]
    if names is None:
        return list(got), np.array(list(got.values()), dtype=object)
    if set(names) != set(got):
        missing = sorted(set(names) ^ set(got))[:5]
        raise ValueError(f"vertex sets differ (e.g. {missing})")
    return list(names), np.array([got[x] for x in names], dtype=object)


def read_labels(path, names: Sequence[str] | None = None) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        return parse_labels(fh.read(), names)


def format_labels(names: Sequence[str], labels: Sequence) -> str:
    return "".join(f"{a} {b}\n" for a, b in zip(names, labels))
