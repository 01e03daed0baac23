"""Two-layer graph convolutional classifier with hand-derived gradients.

Forward pass: Z = A_hat * ReLU(A_hat * X * W0) * W1, with inverted-scaling
dropout on the input features and on the hidden activations during training.
Training is full-batch Adam with early stopping on validation macro-F1.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ShapeError
from .graph import NormAdj, spmm
from .metrics import macro_f1_over_present

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class GcnConfig:
    hidden: int = 64
    dropout_rate: float = 0.5
    learning_rate: float = 0.01
    weight_decay: float = 0.0
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "hidden": self.hidden,
            "dropout_rate": self.dropout_rate,
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "seed": self.seed,
        }


@dataclass
class GcnParams:
    """Weight matrices of the two graph convolution layers (d x h and h x C)."""

    w0: np.ndarray
    w1: np.ndarray

    def copy(self) -> "GcnParams":
        return GcnParams(self.w0.copy(), self.w1.copy())

    def arrays(self):
        return [self.w0, self.w1]


@dataclass
class TrainedGcn:
    """Best-validation parameter snapshot plus the per-epoch trace."""

    params: GcnParams
    history: list  # (train_loss, val_macro_f1) per epoch
    stopped_epoch: int
    best_epoch: int
    warnings: tuple = field(default=())


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(rng: np.random.Generator, d: int, hidden: int, num_classes: int) -> GcnParams:
    return GcnParams(
        w0=glorot_uniform(rng, d, hidden),
        w1=glorot_uniform(rng, hidden, num_classes),
    )


def class_weights(y, labeled_idx, num_classes: int) -> np.ndarray:
    """Balanced weights w_c = N_labeled / (C * count_c) over the labeled set.

    Classes absent from the labeled set get weight 0 (they never enter the
    loss anyway).
    """
    labeled_idx = np.asarray(labeled_idx)
    counts = np.bincount(np.asarray(y)[labeled_idx], minlength=num_classes)
    w = np.zeros(num_classes, dtype=np.float64)
    present = counts > 0
    w[present] = labeled_idx.size / (num_classes * counts[present])
    return w


def log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def nll_from_logits(z, y, labeled_idx, weights=None) -> float:
    """Weighted mean of -w_{y_v} * log softmax(z_v)[y_v] over labeled nodes,
    normalized by the total weight of the labeled set."""
    labeled_idx = np.asarray(labeled_idx)
    if labeled_idx.size == 0:
        raise InputError("labeled set is empty")
    y = np.asarray(y)
    logp = log_softmax(z[labeled_idx])
    wl = (
        np.ones(labeled_idx.size)
        if weights is None
        else np.asarray(weights)[y[labeled_idx]]
    )
    picked = logp[np.arange(labeled_idx.size), y[labeled_idx]]
    return float(-(wl * picked).sum() / wl.sum())


def _check_dims(params: GcnParams, a: NormAdj, x: np.ndarray):
    if x.ndim != 2 or x.shape[0] != a.n:
        raise ShapeError(f"features must be {a.n} x d, got {x.shape}")
    if params.w0.shape[0] != x.shape[1]:
        raise ShapeError(
            f"W0 expects {params.w0.shape[0]} input features, x has {x.shape[1]}"
        )
    if params.w1.shape[0] != params.w0.shape[1]:
        raise ShapeError(
            f"W1 rows ({params.w1.shape[0]}) != W0 cols ({params.w0.shape[1]})"
        )


def _forward(params, a, x, dropout_rate, rng):
    """Returns logits plus the intermediates needed for the backward pass."""
    if not 0.0 <= dropout_rate < 1.0:
        raise InputError(f"dropout rate must be in [0, 1), got {dropout_rate}")
    if dropout_rate > 0.0 and rng is None:
        raise InputError("dropout needs an rng; pass rng or set the rate to 0")
    training = dropout_rate > 0.0
    if training:
        keep = 1.0 - dropout_rate
        x_in = x * ((rng.random(x.shape) < keep) / keep)
    else:
        x_in = x
    h_pre = spmm(a, x_in @ params.w0)
    h = np.maximum(h_pre, 0.0)
    if training:
        mask1 = (rng.random(h.shape) < keep) / keep
        h_drop = h * mask1
    else:
        mask1 = None
        h_drop = h
    z = spmm(a, h_drop @ params.w1)
    return z, x_in, h_pre, mask1, h_drop


def gcn_forward(params: GcnParams, a: NormAdj, x: np.ndarray,
                dropout_rate: float = 0.0, rng=None) -> np.ndarray:
    """Logits Z (n x C). Pass a Generator as ``rng`` to enable train-mode dropout."""
    x = np.asarray(x, dtype=np.float64)
    _check_dims(params, a, x)
    z, *_ = _forward(params, a, x, dropout_rate, rng)
    return z


def gcn_loss_and_grad(params: GcnParams, a: NormAdj, x: np.ndarray, y,
                      labeled_idx, weights=None, weight_decay: float = 0.0,
                      dropout_rate: float = 0.0, rng=None):
    """Class-weighted NLL over labeled nodes and exact analytic gradients.

    The returned loss is the data term; the gradients are of
    loss + (weight_decay / 2) * ||params||^2.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_dims(params, a, x)
    labeled_idx = np.asarray(labeled_idx)
    if labeled_idx.size == 0:
        raise InputError("labeled set is empty")
    y = np.asarray(y)

    z, x_in, h_pre, mask1, h_drop = _forward(params, a, x, dropout_rate, rng)
    logp = log_softmax(z[labeled_idx])
    wl = (
        np.ones(labeled_idx.size)
        if weights is None
        else np.asarray(weights)[y[labeled_idx]]
    )
    wsum = wl.sum()
    rows = np.arange(labeled_idx.size)
    loss = float(-(wl * logp[rows, y[labeled_idx]]).sum() / wsum)

    dz_labeled = np.exp(logp)
    dz_labeled[rows, y[labeled_idx]] -= 1.0
    dz_labeled *= (wl / wsum)[:, None]
    dz = np.zeros_like(z)
    dz[labeled_idx] = dz_labeled

    g1 = spmm(a, dz)  # A_hat is symmetric, so A_hat^T dZ = A_hat dZ
    gw1 = h_drop.T @ g1 + weight_decay * params.w1
    dh = g1 @ params.w1.T
    if mask1 is not None:
        dh = dh * mask1
    dh_pre = dh * (h_pre > 0)
    g0 = spmm(a, dh_pre)
    gw0 = x_in.T @ g0 + weight_decay * params.w0
    return loss, GcnParams(gw0, gw1)


def gcn_predict(params: GcnParams, a: NormAdj, x: np.ndarray) -> np.ndarray:
    """Argmax class per node in eval mode; ties break toward the lowest id."""
    return np.argmax(gcn_forward(params, a, x), axis=1)


class Adam:
    """Standard bias-corrected Adam updating arrays in place."""

    def __init__(self, learning_rate, beta1=ADAM_BETA1, beta2=ADAM_BETA2, eps=ADAM_EPS):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, arrays, grads):
        if self.m is None:
            self.m = [np.zeros_like(a) for a in arrays]
            self.v = [np.zeros_like(a) for a in arrays]
        self.t += 1
        for p, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * (g * g)
            m_hat = m / (1 - self.beta1 ** self.t)
            v_hat = v / (1 - self.beta2 ** self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train_gcn(cfg: GcnConfig, a: NormAdj, x: np.ndarray, y, split,
              num_classes=None) -> TrainedGcn:
    """Full-batch Adam with early stopping on validation macro-F1.

    ``split`` supplies disjoint ``subtrain_idx`` and ``val_idx``. Stops when
    the validation score fails to improve for ``patience`` consecutive epochs;
    the returned snapshot is the first epoch achieving the best score.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if num_classes is None:
        num_classes = int(y.max()) + 1
    sub = np.asarray(split.subtrain_idx)
    val = np.asarray(split.val_idx)
    if sub.size == 0:
        raise InputError("sub-train set is empty")
    if val.size == 0:
        raise InputError("validation set is empty")
    if np.intersect1d(sub, val).size:
        raise InputError("sub-train and validation sets overlap")

    rng = np.random.default_rng(cfg.seed)
    params = init_params(rng, x.shape[1], cfg.hidden, num_classes)
    weights = class_weights(y, sub, num_classes)

    warnings = []
    missing = np.setdiff1d(np.arange(num_classes), np.unique(y[val]))
    if missing.size:
        warnings.append(
            f"validation set missing classes {missing.tolist()}; "
            "early stopping uses macro-F1 over present classes"
        )

    adam = Adam(cfg.learning_rate)
    best_score = -np.inf
    best_params = params.copy()
    best_epoch = 0
    since_best = 0
    history = []
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        loss, grads = gcn_loss_and_grad(
            params, a, x, y, sub, weights,
            weight_decay=cfg.weight_decay,
            dropout_rate=cfg.dropout_rate,
            rng=rng,
        )
        adam.step(params.arrays(), grads.arrays())
        val_pred = gcn_predict(params, a, x)[val]
        val_f1 = macro_f1_over_present(val_pred, y[val], num_classes)
        history.append((loss, val_f1))
        if val_f1 > best_score:
            best_score = val_f1
            best_params = params.copy()
            best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
        if since_best >= cfg.patience:
            break

    return TrainedGcn(
        params=best_params,
        history=history,
        stopped_epoch=epoch,
        best_epoch=best_epoch,
        warnings=tuple(warnings),
    )


def finite_difference_grads(params: GcnParams, loss_fn, step: float = 1e-5) -> GcnParams:
    """Central-difference gradient of ``loss_fn(params)`` coordinate by coordinate."""
    out = GcnParams(np.zeros_like(params.w0), np.zeros_like(params.w1))
    for mat, gmat in zip(params.arrays(), out.arrays()):
        flat = mat.ravel()
        gflat = gmat.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            hi = loss_fn(params)
            flat[i] = orig - step
            lo = loss_fn(params)
            flat[i] = orig
            gflat[i] = (hi - lo) / (2 * step)
    return out


def gradient_check(num_instances: int = 50, seed: int = 0, step: float = 1e-5,
                   tolerance: float = 1e-5, min_magnitude: float = 1e-8):
    """Compare analytic gradients against central differences on random instances.

    A coordinate agrees when |analytic - numeric| is at most min_magnitude +
    tolerance * max(|analytic|, |numeric|), the same mixed bound numpy.allclose
    uses; the additive floor absorbs the oracle's own roundoff, which sits
    near eps * |loss| / (2 * step) regardless of the gradient's size.
    Coordinates where both gradients are below ``min_magnitude`` are skipped.
    Instances whose hidden pre-activations land within a few steps of the ReLU
    kink are redrawn: central differences straddle the kink there and stop
    being a valid oracle, while the analytic subgradient stays exact.
    Returns (max forgiven relative error over checked coordinates, instances).
    """
    from .synth import SyntheticSpec, generate_graph  # deferred to avoid cycle
    from .graph import normalized_adjacency

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_instances):
        C = int(rng.integers(2, 5))
        n = int(rng.integers(2 * C, 21))  # every class needs 2+ nodes
        d = int(rng.integers(1, 9))
        hidden = int(rng.integers(1, 7))
        spec = SyntheticSpec(
            n=n, num_classes=C, target_homophily=0.7,
            avg_degree=min(3.0, n - 1), dim=d, signal=1.0,
            seed=int(rng.integers(0, 2**32)),
        )
        g, y = generate_graph(spec)
        a = normalized_adjacency(g)
        kink_margin = 100.0 * step
        for _ in range(100):
            x = rng.standard_normal((n, d))
            params = GcnParams(
                w0=rng.standard_normal((d, hidden)) * 0.5,
                w1=rng.standard_normal((hidden, C)) * 0.5,
            )
            h_pre = spmm(a, x) @ params.w0
            if np.abs(h_pre).min() > kink_margin:
                break
        else:
            raise AssertionError("could not draw an instance clear of ReLU kinks")
        labeled = rng.choice(n, size=max(2, n // 2), replace=False)
        weights = class_weights(y, labeled, C)
        wd = float(rng.choice([0.0, 0.0, 1e-3]))

        _, analytic = gcn_loss_and_grad(
            params, a, x, y, labeled, weights, weight_decay=wd
        )

        def objective(p):
            loss, _ = gcn_loss_and_grad(p, a, x, y, labeled, weights)
            reg = 0.5 * wd * sum(float((m * m).sum()) for m in p.arrays())
            return loss + reg

        numeric = finite_difference_grads(params, objective, step=step)
        for ga, gn in zip(analytic.arrays(), numeric.arrays()):
            mag = np.maximum(np.abs(ga), np.abs(gn))
            excess = np.abs(ga - gn) - min_magnitude
            check = (mag > min_magnitude) & (excess > 0)
            if check.any():
                rel = (excess / mag)[check]
                worst = max(worst, float(rel.max()))
    if worst > tolerance:
        raise AssertionError(
            f"gradient check failed: max relative error {worst:.3e} > {tolerance:.0e}"
        )
    return worst, num_instances
