from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..core import Clustering, Dataset
from .generators import Graph

DEFAULT_MISSING_TOKEN = "?"


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv(path, missing_token: str = DEFAULT_MISSING_TOKEN) -> Dataset:
    """One point per row; ``missing_token`` or an empty cell marks ⊗.

    A first row containing anything that is neither a number nor a missing
    marker is taken to be a header and skipped.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    def missing(cell):
        cell = cell.strip()
        return cell == "" or cell == missing_token

    if any(not missing(c) and not _is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: header but no data rows")
    d = len(rows[0])
    values = np.zeros((len(rows), d))
    mask = np.zeros((len(rows), d), dtype=bool)
    for r, row in enumerate(rows):
        if len(row) != d:
            raise ValueError(f"{path}: row {r + 1} has {len(row)} columns, expected {d}")
        for i, cell in enumerate(row):
            if missing(cell):
                continue
            try:
                values[r, i] = float(cell)
            except ValueError:
                raise ValueError(f"{path}: row {r + 1} column {i + 1}: not a number: {cell!r}") from None
            mask[r, i] = True
    return Dataset(values, mask)


def write_csv(data: Dataset, path, missing_token: str = DEFAULT_MISSING_TOKEN, header: bool = False):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow([f"x{i + 1}" for i in range(data.d)])
        for vals, mask in zip(data.values, data.mask):
            w.writerow([repr(float(v)) if m else missing_token for v, m in zip(vals, mask)])


def read_edges(path) -> Graph:
    """``u v`` per line, 1-indexed; ``#`` starts a comment.

    The vertex count is the largest id seen, unless a ``# vertices: N``
    comment says otherwise (for trailing isolated vertices).
    """
    edges = []
    declared = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        body, _, comment = line.partition("#")
        comment = comment.strip().lower()
        if comment.startswith("vertices:"):
            declared = int(comment.split(":", 1)[1])
        parts = body.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'u v'")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: vertex ids must be integers") from None
    if not edges:
        raise ValueError(f"{path}: no edges")
    n = max(max(e) for e in edges)
    if declared is not None:
        n = max(n, declared)
    return Graph(n, tuple(edges))


def write_edges(g: Graph, path):
    lines = [f"# vertices: {g.vertex_count}"] + [f"{u} {v}" for u, v in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def clustering_to_json(clustering: Clustering, seed=None, params=None) -> dict:
    centers = [[None if np.isnan(v) else float(v) for v in row] for row in clustering.centers]
    info = clustering.info or {}
    return {
        "centers": centers,
        "assignment": [int(a) for a in clustering.assignment],
        "cost": float(clustering.cost),
        "trials": [float(c) for c in info.get("trials", [])],
        "calls": int(info.get("calls", 0)),
        "seed": seed,
        "params": params or {},
    }


def dump_json(obj, path=None):
    # repr-based float output round-trips every double exactly
    text = json.dumps(obj, indent=2)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


def read_centers(path) -> np.ndarray:
    """Centers from a result JSON (``"centers"`` key) or a bare list of rows."""
    obj = json.loads(Path(path).read_text())
    rows = obj["centers"] if isinstance(obj, dict) else obj
    return np.array([[np.nan if v is None else float(v) for v in row] for row in rows])
