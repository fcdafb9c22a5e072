"""Graph, sensitive-attribute and assignment types, plus their on-disk formats.

Edge lists look like::

    # optional comments
    n 3
    0 1 1.0
    1 2 0.5

Label files are two-column CSV with header ``node,label``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised for malformed graph, label or attribute input."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph stored as a dense symmetric adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise GraphFormatError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise GraphFormatError("adjacency contains non-finite entries")
        if not np.array_equal(a, a.T):
            raise GraphFormatError("adjacency is not symmetric")
        if np.any(np.diag(a) != 0):
            raise GraphFormatError("adjacency must have a zero diagonal")
        if a.min() < 0 or a.max() > 1:
            raise GraphFormatError("edge weights must lie in [0, 1]")
        object.__setattr__(self, "adjacency", _frozen(a))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency, 1)))

    def is_binary(self) -> bool:
        a = self.adjacency
        return bool(np.all((a == 0) | (a == 1)))


@dataclass(frozen=True)
class SensitiveAttributes:
    """Per-node protected-group encoding.

    Exactly one of ``signs`` (binary attribute, entries in {-1, +1}) or
    ``indicators`` (m x n one-hot matrix, one row per attribute-level
    combination) is set.
    """

    signs: np.ndarray | None = None
    indicators: np.ndarray | None = None

    def __post_init__(self):
        if (self.signs is None) == (self.indicators is None):
            raise ValueError("exactly one of signs / indicators must be given")
        if self.signs is not None:
            s = np.asarray(self.signs, dtype=float)
            if s.ndim != 1 or s.size == 0:
                raise GraphFormatError("signs must be a non-empty vector")
            if not np.all((s == 1) | (s == -1)):
                raise GraphFormatError("binary sensitive attribute entries must be exactly -1 or +1")
            object.__setattr__(self, "signs", _frozen(s))
        else:
            ind = np.asarray(self.indicators, dtype=float)
            if ind.ndim != 2 or ind.shape[1] == 0:
                raise GraphFormatError("indicators must be an m x n matrix")
            if not np.all((ind == 0) | (ind == 1)) or not np.all(ind.sum(axis=0) == 1):
                raise GraphFormatError("each node must belong to exactly one attribute level")
            object.__setattr__(self, "indicators", _frozen(ind))

    @classmethod
    def binary(cls, signs: Sequence[float]) -> "SensitiveAttributes":
        return cls(signs=np.asarray(signs, dtype=float))

    @classmethod
    def from_levels(cls, levels: Sequence[int], num_levels: int | None = None) -> "SensitiveAttributes":
        """One-hot encoding from integer level ids 0..m-1."""
        levels = np.asarray(levels, dtype=int)
        m = int(levels.max()) + 1 if num_levels is None else num_levels
        if levels.min() < 0 or levels.max() >= m:
            raise GraphFormatError("level ids out of range")
        ind = np.zeros((m, levels.size))
        ind[levels, np.arange(levels.size)] = 1.0
        return cls(indicators=ind)

    @property
    def is_binary(self) -> bool:
        return self.signs is not None

    @property
    def n(self) -> int:
        return self.signs.size if self.is_binary else self.indicators.shape[1]

    @property
    def num_groups(self) -> int:
        return 2 if self.is_binary else self.indicators.shape[0]

    def vectors(self) -> list[np.ndarray]:
        """Penalty vectors: ``[s]`` for binary, one indicator per level otherwise."""
        if self.is_binary:
            return [self.signs]
        return [row for row in self.indicators]

    def group_labels(self) -> np.ndarray:
        """Integer group id per node (binary: -1 -> 0, +1 -> 1)."""
        if self.is_binary:
            return (self.signs > 0).astype(int)
        return np.argmax(self.indicators, axis=0)


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    k: int
    low_confidence: bool = field(default=False, compare=False)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 1 or lab.size == 0:
            raise ValueError("labels must be a non-empty vector")
        if not np.issubdtype(lab.dtype, np.integer):
            if not np.all(lab == np.round(lab)):
                raise ValueError("labels must be integers")
        lab = lab.astype(int)
        if self.k < 1 or lab.min() < 0 or lab.max() >= self.k:
            raise ValueError(f"labels must lie in 0..{self.k - 1}")
        object.__setattr__(self, "labels", _frozen(lab))

    @classmethod
    def from_signs(cls, y: Sequence[float]) -> "ClusterAssignment":
        """Binary view: -1 -> label 0, +1 (and 0) -> label 1."""
        y = np.asarray(y, dtype=float)
        return cls(labels=(y >= 0).astype(int), k=2)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "ClusterAssignment":
        labels = np.asarray(labels, dtype=int)
        return cls(labels=labels, k=int(labels.max()) + 1)

    @property
    def n(self) -> int:
        return self.labels.size

    def signs(self) -> np.ndarray:
        if self.k != 2:
            raise ValueError("sign view only exists for k=2")
        return np.where(self.labels == 1, 1.0, -1.0)

    @property
    def num_nonempty(self) -> int:
        return int(np.unique(self.labels).size)

    @property
    def is_degenerate(self) -> bool:
        return self.num_nonempty == 1


# --- edge lists -------------------------------------------------------------


def load_edge_list(path: str | Path) -> Graph:
    n = None
    adjacency = None
    seen = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 2 or parts[0] != "n":
                    raise GraphFormatError(f"line {lineno}: expected header 'n <count>'")
                try:
                    n = int(parts[1])
                except ValueError:
                    raise GraphFormatError(f"line {lineno}: bad node count {parts[1]!r}") from None
                if n < 1:
                    raise GraphFormatError(f"line {lineno}: node count must be positive")
                adjacency = np.zeros((n, n))
                continue
            if len(parts) != 3:
                raise GraphFormatError(f"line {lineno}: expected 'u v w'")
            try:
                u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: malformed edge {line!r}") from None
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"line {lineno}: node id out of range 0..{n - 1}")
            if u == v:
                raise GraphFormatError(f"line {lineno}: self-loops are not allowed")
            if not (math.isfinite(w) and 0.0 <= w <= 1.0):
                raise GraphFormatError(f"line {lineno}: weight {w} outside [0, 1]")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphFormatError(f"line {lineno}: duplicate edge {key}")
            seen.add(key)
            adjacency[u, v] = adjacency[v, u] = w
    if n is None:
        raise GraphFormatError("missing 'n <count>' header")
    return Graph(adjacency)


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    iu, ju = np.nonzero(np.triu(g.adjacency, 1))
    # np.nonzero returns row-major order, i.e. lexicographic (u, v)
    for u, v in zip(iu, ju):
        lines.append(f"{u} {v} {g.adjacency[u, v]:.17g}")
    return "\n".join(lines) + "\n"


def save_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))


# --- label / attribute CSVs -------------------------------------------------


def _read_node_column(path: str | Path, n: int) -> np.ndarray:
    out = [None] * n
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["node", "label"]:
            raise GraphFormatError(f"{path}: expected header 'node,label'")
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise GraphFormatError(f"{path}: malformed row {row!r}")
            try:
                node, label = int(row[0]), int(row[1])
            except ValueError:
                raise GraphFormatError(f"{path}: non-integer entry in row {row!r}") from None
            if not 0 <= node < n:
                raise GraphFormatError(f"{path}: node {node} out of range 0..{n - 1}")
            if out[node] is not None:
                raise GraphFormatError(f"{path}: duplicate node {node}")
            out[node] = label
    missing = [i for i, v in enumerate(out) if v is None]
    if missing:
        raise GraphFormatError(f"{path}: missing node(s) {missing[:5]}")
    return np.array(out, dtype=int)


def _write_node_column(values: Sequence[int], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("node,label\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{int(v)}\n")


def load_labels(path: str | Path, n: int) -> np.ndarray:
    return _read_node_column(path, n)


def save_labels(labels: Sequence[int] | ClusterAssignment, path: str | Path) -> None:
    if isinstance(labels, ClusterAssignment):
        labels = labels.labels
    _write_node_column(labels, path)


def count_csv_rows(path: str | Path) -> int:
    with open(path, newline="") as fh:
        return sum(1 for row in csv.reader(fh) if row) - 1


def load_sensitive(path: str | Path, n: int) -> SensitiveAttributes:
    """Read a sensitive-attribute CSV.

    At most two distinct values give a binary attribute (values -1/+1 are
    used as-is, otherwise the smaller value maps to -1). More than two
    values are treated as level ids and one-hot encoded.
    """
    values = _read_node_column(path, n)
    levels = np.unique(values)
    if levels.size > 2:
        _, inverse = np.unique(values, return_inverse=True)
        return SensitiveAttributes.from_levels(inverse, levels.size)
    if set(levels.tolist()) <= {-1, 1}:
        return SensitiveAttributes.binary(values)
    if levels.size == 1:
        return SensitiveAttributes.binary(np.ones(n))
    return SensitiveAttributes.binary(np.where(values == levels[1], 1.0, -1.0))


def save_sensitive(s: SensitiveAttributes, path: str | Path) -> None:
    if s.is_binary:
        _write_node_column(s.signs.astype(int), path)
    else:
        _write_node_column(s.group_labels(), path)


# --- point clouds -----------------------------------------------------------


def adjacency_from_points(points, mode: str = "inverse_distance", tau: float | None = None) -> Graph:
    """Similarity graph over points in R^d.

    ``inverse_distance`` uses 1/d(x_i, x_j) divided by its maximum so that
    weights land in (0, 1]. ``threshold`` connects pairs with d <= tau.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("need at least two points")
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt(np.sum(diff**2, axis=-1))
    off = ~np.eye(x.shape[0], dtype=bool)
    if mode == "threshold":
        if tau is None or tau <= 0:
            raise ValueError("threshold mode needs tau > 0")
        a = ((d <= tau) & off).astype(float)
    elif mode == "inverse_distance":
        if np.any(d[off] == 0):
            raise ValueError("coincident points have no finite inverse distance")
        inv = np.zeros_like(d)
        inv[off] = 1.0 / d[off]
        a = inv / inv.max()
        a = np.minimum(a, a.T)  # exact symmetry after floating division
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return Graph(a)
