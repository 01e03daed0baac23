"""Feature-only linear baselines: multinomial logistic regression and OvR SVM.

Both models see z-score normalized features and balanced class weights, and
select their regularization strength from the fixed search grids below. The
logistic regression objective and gradient are defined here; minimization is
delegated to L-BFGS (deterministic, stops at gradient norm 1e-6 or 1000
iterations). The SVM minimizes the weighted hinge loss with a deterministic
full-batch AdaGrad subgradient loop.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InputError, ShapeError
from .metrics import score

LOGREG_C_GRID = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)
SVM_C_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0, 10.0, 100.0)

LOGREG_GTOL = 1e-6
LOGREG_MAX_ITER = 1000
SVM_ITERATIONS = 2000
SVM_STEP = 0.5


@dataclass(frozen=True)
class Scaler:
    """Per-feature mean/std fitted on the visible training rows.

    Constant features get std 1 so normalization maps them to zero instead of
    dividing by zero.
    """

    mean: np.ndarray
    std: np.ndarray


def fit_scaler(x: np.ndarray, visible_rows) -> Scaler:
    visible_rows = np.asarray(visible_rows)
    if visible_rows.size == 0:
        raise InputError("cannot fit a scaler on an empty visible set")
    sub = np.asarray(x, dtype=np.float64)[visible_rows]
    mean = sub.mean(axis=0)
    std = sub.std(axis=0)  # population std
    std = np.where(std == 0, 1.0, std)
    return Scaler(mean=mean, std=std)


def apply_scaler(scaler: Scaler, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != scaler.mean.size:
        raise ShapeError(
            f"scaler fitted on {scaler.mean.size} features, got {x.shape[1]}"
        )
    return (x - scaler.mean) / scaler.std


@dataclass
class LinearModel:
    kind: str  # "logreg" or "svm"
    weights: np.ndarray  # d x C
    bias: np.ndarray  # length C
    selected_reg: float
    grid_scores: tuple = ()  # (reg value, selection macro-F1) pairs


def linear_predict(model: LinearModel, x_norm: np.ndarray) -> np.ndarray:
    """Argmax of X W + b per row; ties break toward the lowest class id."""
    x_norm = np.asarray(x_norm, dtype=np.float64)
    if x_norm.shape[1] != model.weights.shape[0]:
        raise ShapeError(
            f"model expects {model.weights.shape[0]} features, got {x_norm.shape[1]}"
        )
    return np.argmax(x_norm @ model.weights + model.bias, axis=1)


def balanced_sample_weights(y, num_classes: int) -> np.ndarray:
    """Per-sample weights n / (C * count_{class}); always sums to n."""
    y = np.asarray(y)
    counts = np.bincount(y, minlength=num_classes)
    w = np.zeros(num_classes, dtype=np.float64)
    present = counts > 0
    w[present] = y.size / (num_classes * counts[present])
    return w[y]


def logreg_objective(wb, X, y, sample_w, reg_c, num_classes):
    """Weighted multinomial cross-entropy plus 1/(2 C_reg) ||W||^2; bias free.

    Returns (objective, flat gradient). ``wb`` packs W (d x C) then b (C).
    """
    d = X.shape[1]
    W = wb[: d * num_classes].reshape(d, num_classes)
    b = wb[d * num_classes:]
    z = X @ W + b
    z -= z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(X.shape[0])
    ce = logsum - z[rows, y]
    obj = float((sample_w * ce).sum() + (W * W).sum() / (2.0 * reg_c))

    p = np.exp(z - logsum[:, None])
    p[rows, y] -= 1.0
    p *= sample_w[:, None]
    grad_w = X.T @ p + W / reg_c
    grad_b = p.sum(axis=0)
    return obj, np.concatenate([grad_w.ravel(), grad_b])


def fit_logreg(X, y, sample_w, reg_c, num_classes, trace=None):
    """Minimize the logistic objective with L-BFGS from a zero start."""
    d = X.shape[1]
    x0 = np.zeros(d * num_classes + num_classes)
    callback = None
    if trace is not None:
        def callback(wb):
            trace.append(logreg_objective(wb, X, y, sample_w, reg_c, num_classes)[0])
    res = minimize(
        logreg_objective,
        x0,
        args=(X, y, sample_w, reg_c, num_classes),
        jac=True,
        method="L-BFGS-B",
        callback=callback,
        options={"maxiter": LOGREG_MAX_ITER, "gtol": LOGREG_GTOL, "ftol": 1e-14},
    )
    W = res.x[: d * num_classes].reshape(d, num_classes)
    b = res.x[d * num_classes:]
    return W, b


def stratified_kfold(y, indices, folds: int, rng: np.random.Generator):
    """Deterministic stratified folds over ``indices``; returns (train, val) pairs."""
    indices = np.asarray(indices)
    y = np.asarray(y)
    assignment = np.empty(indices.size, dtype=np.int64)
    for c in np.unique(y[indices]):
        members = np.flatnonzero(y[indices] == c)
        perm = rng.permutation(members)
        assignment[perm] = np.arange(perm.size) % folds
    out = []
    for f in range(folds):
        val = indices[assignment == f]
        train = indices[assignment != f]
        out.append((train, val))
    return out


def _check_visible(y, visible_rows):
    visible_rows = np.asarray(visible_rows)
    if visible_rows.size == 0:
        raise InputError("visible training set is empty")
    classes = np.unique(np.asarray(y)[visible_rows])
    if classes.size < 2:
        raise InputError("visible training set contains a single class")
    return visible_rows


def train_logreg(x_norm, y, visible_rows, grid=LOGREG_C_GRID, folds: int = 5,
                 seed: int = 0, num_classes=None) -> LinearModel:
    """Select C_reg by stratified k-fold CV macro-F1, then refit on all visible rows.

    Folds shrink to the smallest per-class count when classes are scarce;
    below 2 usable folds there is nothing to cross-validate and we fail fast.
    """
    y = np.asarray(y)
    visible_rows = _check_visible(y, visible_rows)
    if num_classes is None:
        num_classes = int(y.max()) + 1
    x_norm = np.asarray(x_norm, dtype=np.float64)

    counts = np.bincount(y[visible_rows], minlength=num_classes)
    folds_eff = min(folds, int(counts[counts > 0].min()))
    if folds_eff < 2:
        raise InputError(
            "cross-validation needs every visible class to have at least 2 "
            f"examples; smallest has {int(counts[counts > 0].min())}"
        )

    rng = np.random.default_rng(seed)
    fold_pairs = stratified_kfold(y, visible_rows, folds_eff, rng)
    grid_scores = []
    for reg_c in grid:
        fold_f1 = []
        for train_idx, val_idx in fold_pairs:
            sw = balanced_sample_weights(y[train_idx], num_classes)
            W, b = fit_logreg(x_norm[train_idx], y[train_idx], sw, reg_c, num_classes)
            pred = np.argmax(x_norm[val_idx] @ W + b, axis=1)
            fold_f1.append(score(pred, y[val_idx], num_classes).macro_f1)
        grid_scores.append((reg_c, float(np.mean(fold_f1))))

    best = max(range(len(grid_scores)), key=lambda i: grid_scores[i][1])
    selected = grid_scores[best][0]
    sw = balanced_sample_weights(y[visible_rows], num_classes)
    W, b = fit_logreg(x_norm[visible_rows], y[visible_rows], sw, selected, num_classes)
    return LinearModel(
        kind="logreg", weights=W, bias=b,
        selected_reg=selected, grid_scores=tuple(grid_scores),
    )


def _fit_svm_ovr(X, Y_signed, sample_w, reg_c, iterations=SVM_ITERATIONS):
    """All one-vs-rest hinge problems at once via full-batch AdaGrad subgradient.

    Objective per class c: (lambda/2)||w_c||^2 + sum_i s_ic hinge_ic with
    column-normalized weights and lambda = 1 / (C_reg * total weight); the
    bias is unregularized. Returns iterate averages over the tail.
    """
    n, d = X.shape
    C = Y_signed.shape[1]
    col_tot = sample_w.sum(axis=0)
    s_norm = sample_w / col_tot
    lam = 1.0 / (reg_c * col_tot)  # per-class, equal under balanced weights

    W = np.zeros((d, C))
    b = np.zeros(C)
    gw_acc = np.zeros_like(W)
    gb_acc = np.zeros_like(b)
    W_avg = np.zeros_like(W)
    b_avg = np.zeros_like(b)
    tail = max(1, iterations // 4)
    for t in range(iterations):
        margins = Y_signed * (X @ W + b)
        active = (margins < 1.0) * s_norm * Y_signed
        gw = lam * W - X.T @ active
        gb = -active.sum(axis=0)
        gw_acc += gw * gw
        gb_acc += gb * gb
        W -= SVM_STEP * gw / (np.sqrt(gw_acc) + 1e-12)
        b -= SVM_STEP * gb / (np.sqrt(gb_acc) + 1e-12)
        if t >= iterations - tail:
            W_avg += W
            b_avg += b
    return W_avg / tail, b_avg / tail


def _holdout(y, indices, fraction, rng):
    """Stratified holdout carve used for SVM grid selection."""
    indices = np.asarray(indices)
    y = np.asarray(y)
    fit_part, val_part = [], []
    for c in np.unique(y[indices]):
        members = np.sort(indices[y[indices] == c])
        perm = rng.permutation(members)
        n_val = min(max(1, int(np.floor(members.size * fraction + 0.5))),
                    members.size - 1) if members.size > 1 else 0
        val_part.append(perm[:n_val])
        fit_part.append(perm[n_val:])
    return np.sort(np.concatenate(fit_part)), np.sort(np.concatenate(val_part))


def train_svm(x_norm, y, visible_rows, grid=SVM_C_GRID, seed: int = 0,
              num_classes=None) -> LinearModel:
    """Grid search on a stratified holdout by macro-F1; refit on all visible rows."""
    y = np.asarray(y)
    visible_rows = _check_visible(y, visible_rows)
    if num_classes is None:
        num_classes = int(y.max()) + 1
    x_norm = np.asarray(x_norm, dtype=np.float64)

    rng = np.random.default_rng(seed)
    fit_idx, val_idx = _holdout(y, visible_rows, 0.2, rng)
    if val_idx.size == 0:
        raise InputError("too few visible examples to carve an SVM validation split")

    def signed_and_weights(idx):
        Y = -np.ones((idx.size, num_classes))
        Y[np.arange(idx.size), y[idx]] = 1.0
        pos = Y > 0
        n_pos = pos.sum(axis=0)
        n_neg = idx.size - n_pos
        s = np.where(pos, idx.size / (2.0 * np.maximum(n_pos, 1)),
                     idx.size / (2.0 * np.maximum(n_neg, 1)))
        return Y, s

    grid_scores = []
    Y_fit, s_fit = signed_and_weights(fit_idx)
    for reg_c in grid:
        W, b = _fit_svm_ovr(x_norm[fit_idx], Y_fit, s_fit, reg_c)
        pred = np.argmax(x_norm[val_idx] @ W + b, axis=1)
        grid_scores.append((reg_c, score(pred, y[val_idx], num_classes).macro_f1))

    best = max(range(len(grid_scores)), key=lambda i: grid_scores[i][1])
    selected = grid_scores[best][0]
    Y_all, s_all = signed_and_weights(visible_rows)
    W, b = _fit_svm_ovr(x_norm[visible_rows], Y_all, s_all, selected)
    return LinearModel(
        kind="svm", weights=W, bias=b,
        selected_reg=selected, grid_scores=tuple(grid_scores),
    )
