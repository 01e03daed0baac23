"""Label-scarcity experiment protocol: splits, masking, ablation, grid runs.

All randomness flows through named seeds derived from one base seed, so any
cell of a grid can be reproduced in isolation. Masking is nested: the visible
set at 90% masking is a subset of the visible set at 50%, which is a subset of
the full training labels. That keeps scarcity comparisons about quantity, not
about which particular nodes happened to be drawn.
"""

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .metrics import ModelScores, delta_f1, score

MASKING_RATES = (0.0, 0.5, 0.9)
FEATURE_MODES = ("original", "random")
VAL_FRACTION = 0.2
TRAIN_FRACTION = 0.8


def derive_seed(base_seed: int, *parts) -> int:
    """Stable named sub-seed: blake2b over a canonical string, not Python hash()."""
    text = ":".join([str(int(base_seed))] + [str(p) for p in parts])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % (2**63)


@dataclass(frozen=True)
class SplitSpec:
    """A fully materialized split. All index arrays are sorted and disjoint
    (except visible_idx = subtrain_idx | val_idx subset of train_idx)."""

    train_idx: np.ndarray
    test_idx: np.ndarray
    visible_idx: np.ndarray
    subtrain_idx: np.ndarray
    val_idx: np.ndarray
    masking_rate: float
    seed: int


def stratified_split(y, train_fraction: float = TRAIN_FRACTION, seed: int = 0):
    """Per-class split into (train_idx, test_idx), both sorted.

    Each class contributes floor(n_c * fraction + 0.5) training nodes, clamped
    so both sides keep at least one node. Classes with fewer than 2 members
    cannot satisfy that and are an input error.
    """
    y = np.asarray(y)
    if not 0.0 < train_fraction < 1.0:
        raise InputError(f"train fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_part, test_part = [], []
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if members.size < 2:
            raise InputError(
                f"class {int(c)} has {members.size} node(s); need at least 2 "
                "to appear on both sides of the split"
            )
        n_train = int(np.floor(members.size * train_fraction + 0.5))
        n_train = min(max(n_train, 1), members.size - 1)
        perm = rng.permutation(members)
        train_part.append(perm[:n_train])
        test_part.append(perm[n_train:])
    return np.sort(np.concatenate(train_part)), np.sort(np.concatenate(test_part))


def apply_masking(y, train_idx, masking_rate: float, seed: int) -> np.ndarray:
    """Visible subset of train_idx after hiding ``masking_rate`` of each class.

    Nested by construction: each class keeps a prefix of one fixed permutation
    whose seed does not depend on the rate, so raising the rate only shrinks
    the kept prefix. Every class keeps at least one visible node.
    """
    y = np.asarray(y)
    train_idx = np.asarray(train_idx)
    if not 0.0 <= masking_rate < 1.0:
        raise InputError(f"masking rate must be in [0, 1), got {masking_rate}")
    kept = []
    for c in np.unique(y[train_idx]):
        members = np.sort(train_idx[y[train_idx] == c])
        rng = np.random.default_rng(derive_seed(seed, "mask-class", int(c)))
        perm = rng.permutation(members)
        n_keep = max(1, int(np.floor((1.0 - masking_rate) * members.size + 0.5)))
        kept.append(perm[:n_keep])
    return np.sort(np.concatenate(kept))


def carve_validation(y, visible_idx, val_fraction: float = VAL_FRACTION,
                     seed: int = 0):
    """Split visible labels into (subtrain_idx, val_idx), stratified and sorted.

    A class with a single visible node keeps it for training and contributes
    nothing to validation.
    """
    y = np.asarray(y)
    visible_idx = np.asarray(visible_idx)
    rng = np.random.default_rng(seed)
    sub_part, val_part = [], []
    for c in np.unique(y[visible_idx]):
        members = np.sort(visible_idx[y[visible_idx] == c])
        perm = rng.permutation(members)
        if members.size == 1:
            n_val = 0
        else:
            n_val = min(members.size - 1,
                        max(1, int(np.floor(members.size * val_fraction + 0.5))))
        val_part.append(perm[:n_val])
        sub_part.append(perm[n_val:])
    return (np.sort(np.concatenate(sub_part)),
            np.sort(np.concatenate(val_part)) if val_part else np.empty(0, np.int64))


def make_split(y, masking_rate: float, seed: int, num_classes=None) -> SplitSpec:
    """Full pipeline: stratified 80/20, per-class masking, validation carve.

    Fails fast if the surviving visible set is too thin to train on (fewer
    than two visible nodes per class on average).
    """
    y = np.asarray(y)
    if num_classes is None:
        num_classes = int(y.max()) + 1
    train_idx, test_idx = stratified_split(y, TRAIN_FRACTION, derive_seed(seed, "split"))
    visible_idx = apply_masking(y, train_idx, masking_rate, derive_seed(seed, "mask"))
    if visible_idx.size < 2 * num_classes:
        raise InputError(
            f"only {visible_idx.size} visible labels for {num_classes} classes; "
            "need at least 2 per class on average"
        )
    subtrain_idx, val_idx = carve_validation(
        y, visible_idx, VAL_FRACTION, derive_seed(seed, "val"))
    return SplitSpec(
        train_idx=train_idx, test_idx=test_idx, visible_idx=visible_idx,
        subtrain_idx=subtrain_idx, val_idx=val_idx,
        masking_rate=masking_rate, seed=seed,
    )


def ablate_features(x: np.ndarray, seed: int) -> np.ndarray:
    """Replace the whole feature matrix with standard normal noise of the
    same shape. Used to isolate how much signal comes from the graph."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(np.asarray(x).shape)


@dataclass
class CellResult:
    model: str
    masking_rate: float
    feature_mode: str
    scores: ModelScores
    selected_hyper: dict = field(default_factory=dict)
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "masking_rate": self.masking_rate,
            "feature_mode": self.feature_mode,
            "scores": self.scores.to_dict() if self.scores is not None else None,
            "selected_hyper": dict(self.selected_hyper),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellResult":
        scores = ModelScores.from_dict(d["scores"]) if d["scores"] is not None else None
        return cls(model=d["model"], masking_rate=d["masking_rate"],
                   feature_mode=d["feature_mode"], scores=scores,
                   selected_hyper=dict(d["selected_hyper"]), error=d["error"])


def _cell_key(model: str, masking_rate: float, feature_mode: str) -> str:
    return f"{model}:{int(round(masking_rate * 100))}:{feature_mode}"


@dataclass
class ExperimentResult:
    """All cells of one grid run plus the ingredients to interpret them."""

    base_seed: int
    num_classes: int
    cells: dict  # key "model:pct:mode" -> CellResult

    def cell(self, model: str, masking_rate: float,
             feature_mode: str = "original") -> CellResult:
        key = _cell_key(model, masking_rate, feature_mode)
        if key not in self.cells:
            raise KeyError(f"no cell {key!r} in this run")
        return self.cells[key]

    def delta(self, masking_rate: float, feature_mode: str = "original") -> float:
        """GCN macro-F1 minus logistic regression macro-F1 for one column."""
        g = self.cell("gcn", masking_rate, feature_mode)
        l = self.cell("logreg", masking_rate, feature_mode)
        if g.scores is None or l.scores is None:
            raise InputError("cannot compute a delta from a failed cell")
        return delta_f1(g.scores, l.scores)[0]

    def to_dict(self) -> dict:
        return {
            "base_seed": self.base_seed,
            "num_classes": self.num_classes,
            "cells": {k: v.to_dict() for k, v in sorted(self.cells.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        return cls(
            base_seed=d["base_seed"], num_classes=d["num_classes"],
            cells={k: CellResult.from_dict(v) for k, v in d["cells"].items()},
        )


def _worker_count() -> int:
    env = os.environ.get("DIAGNOSE_THREADS", "")
    try:
        cap = int(env) if env else 4
    except ValueError:
        cap = 4
    return max(1, min(cap, os.cpu_count() or 1))


def run_grid(a, x, y, base_seed: int = 0, models=("gcn", "logreg", "svm"),
             masking_rates=MASKING_RATES, feature_modes=FEATURE_MODES,
             gcn_config=None, num_classes=None) -> ExperimentResult:
    """Run every (model, masking rate, feature mode) cell on one dataset.

    One stratified split per run; one random feature draw per run, shared by
    every "random" cell; one masking stream shared by all models so each
    model sees identical visible sets at a given rate. A failing cell records
    its error instead of aborting its siblings.
    """
    from .baselines import apply_scaler, fit_scaler, train_logreg, train_svm
    from .gcn import GcnConfig, gcn_predict, train_gcn

    y = np.asarray(y)
    x = np.asarray(x, dtype=np.float64)
    if num_classes is None:
        num_classes = int(y.max()) + 1
    if gcn_config is None:
        gcn_config = GcnConfig()

    feature_sets = {"original": x}
    if "random" in feature_modes:
        feature_sets["random"] = ablate_features(x, derive_seed(base_seed, "ablate"))

    splits = {m: make_split(y, m, base_seed, num_classes) for m in masking_rates}

    def run_cell(model, rate, mode):
        split = splits[rate]
        feats = feature_sets[mode]
        cell_seed = derive_seed(base_seed, model, int(round(rate * 100)), mode)
        if model == "gcn":
            cfg = GcnConfig(
                hidden=gcn_config.hidden, dropout_rate=gcn_config.dropout_rate,
                learning_rate=gcn_config.learning_rate,
                weight_decay=gcn_config.weight_decay,
                max_epochs=gcn_config.max_epochs, patience=gcn_config.patience,
                seed=cell_seed,
            )
            trained = train_gcn(cfg, a, feats, y, split, num_classes)
            pred = gcn_predict(trained.params, a, feats)
            hyper = {"best_epoch": trained.best_epoch,
                     "stopped_epoch": trained.stopped_epoch}
        else:
            scaler = fit_scaler(feats, split.visible_idx)
            feats_n = apply_scaler(scaler, feats)
            trainer = train_logreg if model == "logreg" else train_svm
            fitted = trainer(feats_n, y, split.visible_idx, seed=cell_seed,
                             num_classes=num_classes)
            pred = np.argmax(feats_n @ fitted.weights + fitted.bias, axis=1)
            hyper = {"selected_reg": fitted.selected_reg}
        scores = score(pred[split.test_idx], y[split.test_idx], num_classes)
        return scores, hyper

    tasks = [(m, r, f) for m in models for r in masking_rates for f in feature_modes]
    cells = {}

    def safe(task):
        model, rate, mode = task
        try:
            scores, hyper = run_cell(model, rate, mode)
            return CellResult(model=model, masking_rate=rate, feature_mode=mode,
                              scores=scores, selected_hyper=hyper)
        except Exception as exc:  # cell failure must not sink the grid
            return CellResult(model=model, masking_rate=rate, feature_mode=mode,
                              scores=None, error=f"{type(exc).__name__}: {exc}")

    workers = _worker_count()
    if workers == 1:
        results = [safe(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(safe, tasks))
    for task, res in zip(tasks, results):
        cells[_cell_key(*task)] = res

    return ExperimentResult(base_seed=base_seed, num_classes=num_classes, cells=cells)
