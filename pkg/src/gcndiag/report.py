"""Results report assembly and JSON serialization.

A report is a plain JSON-compatible dict: fingerprint, config echo, homophily
section, per-cell grid results, delta tables, optional quadrant section, and
the conventions the numbers depend on. Timestamps live under the "volatile"
key so two runs of the same experiment produce byte-identical files once that
key is dropped.
"""

import datetime
import json
import math

import numpy as np

from .errors import InputError
from .protocol import VAL_FRACTION, TRAIN_FRACTION, ExperimentResult

SCHEMA_VERSION = 1


def decisions_metadata() -> dict:
    """Conventions a reader needs to interpret the numbers."""
    return {
        "train_fraction": TRAIN_FRACTION,
        "validation_fraction": VAL_FRACTION,
        "argmax_tie_rule": "lowest class id wins",
        "grid_tie_rule": "smallest regularization value wins",
        "quadrant_boundary_rule": "values equal to a threshold count as low/weak",
        "masking_rule": "per-class nested prefixes of one seeded permutation",
        "undefined_value_rule": "NaN inputs serialize as null and flag the class",
    }


def jsonable(obj):
    """Recursively coerce to JSON-native types; NaN and inf become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if not math.isfinite(f) else f
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def build_report(fingerprint: str, config: dict, homophily: dict,
                 result: ExperimentResult, quadrants=None) -> dict:
    """Assemble the full report dict; every number traces to an input section."""
    deltas = {}
    for mode in ("original", "random"):
        per_rate = {}
        for key, cell in result.cells.items():
            model, pct, cell_mode = key.split(":")
            if model != "gcn" or cell_mode != mode:
                continue
            try:
                per_rate[pct] = result.delta(int(pct) / 100.0, mode)
            except (KeyError, InputError):
                per_rate[pct] = None
        if per_rate:
            deltas[mode] = per_rate

    report = {
        "schema_version": SCHEMA_VERSION,
        "dataset_fingerprint": fingerprint,
        "config": config,
        "homophily": homophily,
        "grid": result.to_dict(),
        "delta_f1": deltas,
        "quadrants": quadrants,
        "decisions": decisions_metadata(),
        "volatile": {
            "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    }
    return jsonable(report)


def save_report(report: dict, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise InputError(f"cannot write report: {exc}", path=path)


def load_report(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read report: {exc}", path=path)
    except json.JSONDecodeError as exc:
        raise InputError(f"report is not valid JSON: {exc}", path=path)


def stable_form(report: dict) -> dict:
    """The report minus its volatile section, for determinism comparisons."""
    return {k: v for k, v in report.items() if k != "volatile"}
