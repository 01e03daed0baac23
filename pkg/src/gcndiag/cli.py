"""Command-line surface.

Subcommands: analyze (homophily report), run (model x masking x feature grid),
quadrant (classify per-class results), synth (generate a dataset container),
gradcheck (finite-difference gradient audit), tune (hyperparameter search).
Exit codes: 0 success, 1 structured failure, 2 usage error.
"""

import argparse
import json
import sys

import numpy as np

from .baselines import (LOGREG_C_GRID, SVM_C_GRID, apply_scaler, fit_scaler,
                        train_logreg, train_svm)
from .dataset_io import Dataset, load_dataset, save_dataset
from .errors import GcnDiagError
from .gcn import GcnConfig, gradient_check, train_gcn
from .graph import normalized_adjacency
from .homophily import homophily_report
from .metrics import macro_f1_over_present
from .protocol import ExperimentResult, derive_seed, make_split, run_grid
from .quadrant import (F1_THRESHOLD, HOMOPHILY_THRESHOLD, assign_quadrants,
                       averaged_class_metrics, quadrant_summary)
from .report import build_report, jsonable, load_report, save_report
from .synth import SyntheticSpec, generate_features, generate_graph

# hyperparameter search spaces for `tune`
GCN_HIDDEN_GRID = (32, 64, 128)
GCN_DROPOUT_GRID = (0.2, 0.3, 0.5)
GCN_LR_GRID = (0.001, 0.01)
GCN_WD_GRID = (5e-4, 1e-4, 1e-5, 0.0)

MODEL_ALIASES = {"lr": "logreg", "logreg": "logreg", "gcn": "gcn", "svm": "svm"}


def _emit(payload: dict, out_path=None) -> None:
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _parse_models(raw: str):
    models = []
    for tok in raw.split(","):
        tok = tok.strip().lower()
        if tok not in MODEL_ALIASES:
            raise GcnDiagError(f"unknown model {tok!r}; choose from gcn, lr, svm")
        name = MODEL_ALIASES[tok]
        if name not in models:
            models.append(name)
    if not models:
        raise GcnDiagError("at least one model is required")
    return tuple(models)


def _parse_masking(raw: str):
    rates = []
    for tok in raw.split(","):
        tok = tok.strip()
        try:
            pct = float(tok)
        except ValueError:
            raise GcnDiagError(f"masking value {tok!r} is not a number")
        if not 0 <= pct < 100:
            raise GcnDiagError(f"masking percent {pct} outside [0, 100)")
        rates.append(pct / 100.0)
    return tuple(rates)


def _parse_features(raw: str):
    modes = []
    for tok in raw.split(","):
        tok = tok.strip().lower()
        if tok not in ("original", "random"):
            raise GcnDiagError(
                f"unknown feature mode {tok!r}; choose original or random")
        if tok not in modes:
            modes.append(tok)
    return tuple(modes)


def cmd_analyze(args) -> int:
    ds = load_dataset(args.dataset)
    rep = homophily_report(ds.graph, ds.y, ds.num_classes)
    _emit({
        "dataset": ds.name,
        "fingerprint": ds.fingerprint(),
        "n": ds.graph.n,
        "undirected_edges": ds.graph.num_edges,
        "directed_edges": 2 * ds.graph.num_edges,
        "homophily": rep.to_dict(),
    }, args.out)
    return 0


def cmd_run(args) -> int:
    ds = load_dataset(args.dataset)
    a = normalized_adjacency(ds.graph)
    models = _parse_models(args.models)
    masking = _parse_masking(args.masking)
    modes = _parse_features(args.features)
    cfg = GcnConfig(hidden=args.hidden, dropout_rate=args.dropout,
                    learning_rate=args.learning_rate,
                    weight_decay=args.weight_decay, max_epochs=args.epochs,
                    seed=args.seed)
    result = run_grid(a, ds.x, ds.y, base_seed=args.seed, models=models,
                      masking_rates=masking, feature_modes=modes,
                      gcn_config=cfg, num_classes=ds.num_classes)
    hom = homophily_report(ds.graph, ds.y, ds.num_classes).to_dict()
    quad = None
    try:
        lr_f1, delta = averaged_class_metrics(result, masking)
        assignment = assign_quadrants(hom["per_class"], lr_f1, delta)
        quad = quadrant_summary(assignment)
    except (GcnDiagError, KeyError):
        pass  # grid subset too small for the quadrant rule; section stays null
    config_echo = {
        "models": list(models),
        "masking_percent": [int(round(m * 100)) for m in masking],
        "feature_modes": list(modes),
        "seed": args.seed,
        "gcn": cfg.to_dict(),
        "undirected_edges": ds.graph.num_edges,
        "directed_edges": 2 * ds.graph.num_edges,
    }
    report = build_report(ds.fingerprint(), config_echo, hom, result, quad)
    if args.out:
        save_report(report, args.out)
    else:
        _emit(report)
    failures = [c for c in result.cells.values() if c.error]
    for cell in failures:
        print(f"cell {cell.model}:{cell.masking_rate}:{cell.feature_mode} "
              f"failed: {cell.error}", file=sys.stderr)
    return 1 if failures else 0


def cmd_quadrant(args) -> int:
    report = load_report(args.results)
    result = ExperimentResult.from_dict(report["grid"])
    rates = sorted({int(k.split(":")[1]) / 100.0 for k in result.cells})
    lr_f1, delta = averaged_class_metrics(result, tuple(rates))
    per_class_h = [np.nan if v is None else v
                   for v in report["homophily"]["per_class"]]
    assignment = assign_quadrants(
        per_class_h, lr_f1, delta,
        homophily_threshold=args.homophily_threshold,
        f1_threshold=args.f1_threshold,
    )
    summary = quadrant_summary(assignment)
    summary["thresholds"] = {"homophily": args.homophily_threshold,
                             "feature_f1": args.f1_threshold}
    summary["per_class"] = [
        {"class_id": a.class_id, "quadrant": a.quadrant,
         "homophily": a.homophily, "feature_f1": a.feature_f1,
         "delta_f1": a.delta_f1}
        for a in assignment.assignments
    ]
    _emit(summary, args.out)
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(n=args.n, num_classes=args.classes,
                         target_homophily=args.homophily,
                         avg_degree=args.degree, dim=args.dim,
                         signal=args.signal, seed=args.seed)
    graph, y = generate_graph(spec)
    x = generate_features(y, args.dim, args.signal,
                          seed=derive_seed(args.seed, "features"))
    name = (f"synth-n{args.n}-c{args.classes}-h{args.homophily}"
            f"-deg{args.degree}-d{args.dim}-s{args.signal}-seed{args.seed}")
    ds = Dataset(name=name, graph=graph, x=x, y=y, num_classes=args.classes)
    save_dataset(ds, args.out)
    _emit({"written": args.out, "n": graph.n, "undirected_edges": graph.num_edges,
           "fingerprint": ds.fingerprint()})
    return 0


def cmd_gradcheck(args) -> int:
    try:
        worst, count = gradient_check(num_instances=args.instances,
                                      seed=args.seed,
                                      tolerance=args.tolerance)
    except AssertionError as exc:
        print(f"gradient check failed: {exc}", file=sys.stderr)
        return 1
    print(f"gradient check passed: {count} instances, "
          f"worst relative error {worst:.3e}")
    return 0


def cmd_tune(args) -> int:
    ds = load_dataset(args.dataset)
    a = normalized_adjacency(ds.graph)
    split = make_split(ds.y, 0.0, args.seed, ds.num_classes)

    gcn_rows = []
    for hidden in GCN_HIDDEN_GRID:
        for dropout in GCN_DROPOUT_GRID:
            for lr in GCN_LR_GRID:
                for wd in GCN_WD_GRID:
                    cfg = GcnConfig(hidden=hidden, dropout_rate=dropout,
                                    learning_rate=lr, weight_decay=wd,
                                    max_epochs=args.epochs,
                                    seed=derive_seed(args.seed, "tune",
                                                     hidden, dropout, lr, wd))
                    trained = train_gcn(cfg, a, ds.x, ds.y, split,
                                        ds.num_classes)
                    val_f1 = max(v for _, v in trained.history)
                    gcn_rows.append({"hidden": hidden, "dropout": dropout,
                                     "learning_rate": lr, "weight_decay": wd,
                                     "val_f1": val_f1})
    best_gcn = max(gcn_rows, key=lambda r: r["val_f1"])

    scaler = fit_scaler(ds.x, split.visible_idx)
    x_norm = apply_scaler(scaler, ds.x)
    lr_model = train_logreg(x_norm, ds.y, split.visible_idx,
                            seed=derive_seed(args.seed, "tune", "logreg"),
                            num_classes=ds.num_classes)
    svm_model = train_svm(x_norm, ds.y, split.visible_idx,
                          seed=derive_seed(args.seed, "tune", "svm"),
                          num_classes=ds.num_classes)

    _emit({
        "search_spaces": {
            "gcn": {"hidden": list(GCN_HIDDEN_GRID),
                    "dropout": list(GCN_DROPOUT_GRID),
                    "learning_rate": list(GCN_LR_GRID),
                    "weight_decay": list(GCN_WD_GRID)},
            "logreg_c": list(LOGREG_C_GRID),
            "svm_c": list(SVM_C_GRID),
        },
        "best": {
            "gcn": best_gcn,
            "logreg_c": lr_model.selected_reg,
            "svm_c": svm_model.selected_reg,
        },
        "gcn_grid": gcn_rows,
        "logreg_grid": list(lr_model.grid_scores),
        "svm_grid": list(svm_model.grid_scores),
    }, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcndiag",
        description="Diagnostics for when graph convolution helps node "
                    "classification and when plain feature models win.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="homophily report for a dataset")
    p.add_argument("dataset")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("run", help="run the model x masking x feature grid")
    p.add_argument("dataset")
    p.add_argument("--models", default="gcn,lr,svm")
    p.add_argument("--masking", default="0,50,90",
                   help="comma-separated masking percents")
    p.add_argument("--features", default="original,random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--epochs", type=int, default=200)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("quadrant", help="quadrant assignment from results JSON")
    p.add_argument("results")
    p.add_argument("--homophily-threshold", type=float,
                   default=HOMOPHILY_THRESHOLD)
    p.add_argument("--f1-threshold", type=float, default=F1_THRESHOLD)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_quadrant)

    p = sub.add_parser("synth", help="generate a synthetic dataset container")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--homophily", type=float, required=True)
    p.add_argument("--degree", type=float, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--signal", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("gradcheck", help="finite-difference gradient audit")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("tune", help="hyperparameter search on one dataset")
    p.add_argument("dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tune)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GcnDiagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
