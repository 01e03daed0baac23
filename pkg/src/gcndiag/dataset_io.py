"""On-disk dataset container.

A dataset is a directory holding meta.json {name, n, d, num_classes},
edges.tsv (one undirected edge per line, tab-separated 0-based ids with
u < v), labels.tsv (line i = label of node i), and features.bin (little-endian
float32, row-major, exactly n*d values). A features.tsv of n rows with d
tab-separated reals is accepted in place of the binary file. Features are
widened to float64 once loaded.
"""

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph import Graph, build_graph


@dataclass(frozen=True)
class Dataset:
    name: str
    graph: Graph
    x: np.ndarray  # n x d float64
    y: np.ndarray  # length n int64
    num_classes: int

    def fingerprint(self) -> str:
        """Content hash over shapes, edges, labels, and features."""
        h = hashlib.blake2b(digest_size=16)
        h.update(f"{self.graph.n}:{self.x.shape[1]}:{self.num_classes}".encode())
        h.update(np.ascontiguousarray(self.graph.row_offsets).tobytes())
        h.update(np.ascontiguousarray(self.graph.col_indices).tobytes())
        h.update(np.ascontiguousarray(self.y, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.x, dtype="<f4").tobytes())
        return h.hexdigest()


def _read_meta(path: str) -> dict:
    meta_path = os.path.join(path, "meta.json")
    if not os.path.isfile(meta_path):
        raise InputError("meta.json not found", path=meta_path)
    with open(meta_path, "r", encoding="utf-8") as fh:
        try:
            meta = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"meta.json is not valid JSON: {exc}", path=meta_path)
    for key in ("name", "n", "d", "num_classes"):
        if key not in meta:
            raise InputError(f"meta.json missing required key {key!r}", path=meta_path)
    for key in ("n", "d", "num_classes"):
        if not isinstance(meta[key], int) or meta[key] <= 0:
            raise InputError(
                f"meta.json key {key!r} must be a positive integer, got {meta[key]!r}",
                path=meta_path,
            )
    return meta


def _read_edges(path: str, n: int):
    edges_path = os.path.join(path, "edges.tsv")
    if not os.path.isfile(edges_path):
        raise InputError("edges.tsv not found", path=edges_path)
    edges = []
    with open(edges_path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise InputError(
                    f"expected two tab-separated ids, got {len(parts)} fields",
                    path=edges_path, line=lineno,
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise InputError(
                    f"non-integer node id in {line!r}", path=edges_path, line=lineno)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(
                    f"node id out of range [0, {n}) in edge ({u}, {v})",
                    path=edges_path, line=lineno,
                )
            if u >= v:
                raise InputError(
                    f"edge ({u}, {v}) violates u < v ordering",
                    path=edges_path, line=lineno,
                )
            edges.append((u, v))
    return edges


def _read_labels(path: str, n: int, num_classes: int) -> np.ndarray:
    labels_path = os.path.join(path, "labels.tsv")
    if not os.path.isfile(labels_path):
        raise InputError("labels.tsv not found", path=labels_path)
    y = np.empty(n, dtype=np.int64)
    count = 0
    with open(labels_path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if count >= n:
                raise InputError(
                    f"more than the expected {n} labels", path=labels_path, line=lineno)
            try:
                label = int(line)
            except ValueError:
                raise InputError(
                    f"non-integer label {line!r}", path=labels_path, line=lineno)
            if not 0 <= label < num_classes:
                raise InputError(
                    f"label {label} outside [0, {num_classes})",
                    path=labels_path, line=lineno,
                )
            y[count] = label
            count += 1
    if count != n:
        raise InputError(
            f"expected {n} labels, found {count}", path=labels_path)
    return y


def _read_features(path: str, n: int, d: int) -> np.ndarray:
    bin_path = os.path.join(path, "features.bin")
    tsv_path = os.path.join(path, "features.tsv")
    if os.path.isfile(bin_path):
        expected = n * d * 4
        actual = os.path.getsize(bin_path)
        if actual != expected:
            raise InputError(
                f"features.bin holds {actual} bytes, expected n*d*4 = {expected}",
                path=bin_path,
            )
        flat = np.fromfile(bin_path, dtype="<f4")
        return flat.reshape(n, d).astype(np.float64)
    if os.path.isfile(tsv_path):
        x = np.empty((n, d), dtype=np.float64)
        count = 0
        with open(tsv_path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                if count >= n:
                    raise InputError(
                        f"more than the expected {n} feature rows",
                        path=tsv_path, line=lineno,
                    )
                parts = line.split("\t")
                if len(parts) != d:
                    raise InputError(
                        f"expected {d} values, got {len(parts)}",
                        path=tsv_path, line=lineno,
                    )
                try:
                    x[count] = [float(p) for p in parts]
                except ValueError:
                    raise InputError(
                        "non-numeric feature value", path=tsv_path, line=lineno)
                count += 1
        if count != n:
            raise InputError(
                f"expected {n} feature rows, found {count}", path=tsv_path)
        return x
    raise InputError(
        "neither features.bin nor features.tsv found", path=os.path.join(path, ""))


def load_dataset(path: str) -> Dataset:
    """Read and validate a container directory."""
    if not os.path.isdir(path):
        raise InputError("dataset directory not found", path=path)
    meta = _read_meta(path)
    n, d, num_classes = meta["n"], meta["d"], meta["num_classes"]
    edges = _read_edges(path, n)
    y = _read_labels(path, n, num_classes)
    x = _read_features(path, n, d)
    graph = build_graph(edges, n)
    return Dataset(name=str(meta["name"]), graph=graph, x=x, y=y,
                   num_classes=num_classes)


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write a container directory; features go out as float32 binary."""
    os.makedirs(path, exist_ok=True)
    meta = {
        "name": dataset.name,
        "n": int(dataset.graph.n),
        "d": int(dataset.x.shape[1]),
        "num_classes": int(dataset.num_classes),
    }
    with open(os.path.join(path, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    pairs = dataset.graph.edge_array()
    with open(os.path.join(path, "edges.tsv"), "w", encoding="utf-8") as fh:
        for u, v in pairs:
            fh.write(f"{u}\t{v}\n")
    with open(os.path.join(path, "labels.tsv"), "w", encoding="utf-8") as fh:
        for label in dataset.y:
            fh.write(f"{int(label)}\n")
    np.ascontiguousarray(dataset.x, dtype="<f4").tofile(
        os.path.join(path, "features.bin"))
