"""Logistic-regression trainers: full, intercept-only, 1-d, and jointly-orthogonal.

All trainers share one protocol: minibatch SGD with momentum and optional
weight decay, validation loss evaluated after every epoch, and early stopping
that returns the snapshot with the lowest validation loss (earliest epoch on
ties), stopping after ``early_stop_patience`` epochs without improvement.

The joint trainer solves the orthogonality-constrained problem through an
unconstrained reparameterization: the main-task head predicts with
``(I - P) w_mt`` where ``P = w_sp w_sp^T / (w_sp^T w_sp)``, recomputed at
every step, so the two effective coefficient vectors are orthogonal by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Direction, LabeledEmbeddings

BCE_EPS = 1e-7
PROJ_EPS = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.1
    weight_decay: float = 0.0
    momentum: float = 0.9
    batch_size: int = 128
    max_epochs: int = 50
    early_stop_patience: int = 5
    early_stop_metric: str = "accuracy"  # accuracy | bce
    seed: int = 0
    balance_sampling: str = "none"  # none | class-balanced | group-balanced

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be positive")
        if self.early_stop_patience > self.max_epochs:
            raise ValueError("early_stop_patience must be <= max_epochs")
        if self.early_stop_metric not in ("accuracy", "bce"):
            raise ValueError(f"unknown early_stop_metric {self.early_stop_metric!r}")
        if self.balance_sampling not in ("none", "class-balanced", "group-balanced"):
            raise ValueError(f"unknown balance_sampling {self.balance_sampling!r}")

    def reseeded(self, *entropy: int) -> "OptimizerConfig":
        """Derive a config whose seed is a deterministic function of (seed, *entropy)."""
        child = np.random.SeedSequence([self.seed, *entropy]).generate_state(1)[0]
        return replace(self, seed=int(child))


@dataclass(frozen=True)
class LinearModel:
    """Coefficients of one logistic regression: sigmoid(Z @ w + b)."""

    w: np.ndarray
    b: float
    warn: str | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=np.float64)
        if not np.all(np.isfinite(w)) or not np.isfinite(self.b):
            raise ValueError("model parameters must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    def predict(self, Z: np.ndarray) -> np.ndarray:
        return sigmoid(np.asarray(Z) @ self.w + self.b)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def bce(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-sample binary cross-entropy with probabilities clipped to [eps, 1-eps]."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y)
    if p.shape != y.shape:
        raise ValueError(f"length mismatch: p has shape {p.shape}, y has shape {y.shape}")
    p = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    return -(y * np.log(p) + (1 - y) * np.log1p(-p))


def _logit(q: float) -> float:
    q = min(max(q, BCE_EPS), 1.0 - BCE_EPS)
    return float(np.log(q / (1.0 - q)))


def fit_intercept_only(train: LabeledEmbeddings, target: str) -> LinearModel:
    """The 'random classifier': w = 0, b = logit of the class-1 frequency."""
    y = train.labels(target)
    return LinearModel(np.zeros(train.d), _logit(float(np.mean(y))))


def _epoch_batches(
    rng: np.random.Generator, n: int, batch_size: int, probs: np.ndarray | None
) -> list[np.ndarray]:
    """Index batches for one epoch.

    Uniform mode shuffles without replacement; balanced modes draw every batch
    with replacement under the given sampling probabilities.
    """
    n_batches = (n + batch_size - 1) // batch_size
    if probs is None:
        perm = rng.permutation(n)
        return [perm[i * batch_size : (i + 1) * batch_size] for i in range(n_batches)]
    idx = rng.choice(n, size=n_batches * batch_size, replace=True, p=probs)
    return [idx[i * batch_size : (i + 1) * batch_size] for i in range(n_batches)]


def _sampling_probs(data: LabeledEmbeddings, target: str, mode: str) -> np.ndarray | None:
    """Per-sample probabilities realizing class- or group-balanced batches."""
    if mode == "none":
        return None
    if mode == "class-balanced":
        codes = data.labels(target)
    else:
        codes = data.group
    _, inverse, counts = np.unique(codes, return_inverse=True, return_counts=True)
    w = 1.0 / counts[inverse]
    return w / w.sum()


class _EarlyStopper:
    """Track the best post-epoch snapshot; ties keep the earliest epoch."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_loss = np.inf
        self.best_state: tuple | None = None
        self.since = 0

    def update(self, loss: float, state: tuple) -> bool:
        """Record one epoch; returns True when training should stop."""
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_state = state
            self.since = 0
        else:
            self.since += 1
        return self.since >= self.patience


def _val_score(metric: str, p: np.ndarray, y: np.ndarray) -> float:
    """Early-stopping score, lower is better.

    'accuracy' uses the negative 0.5-threshold accuracy (coarse, so training
    halts once the decision boundary stops moving); 'bce' uses the mean loss.
    """
    if metric == "accuracy":
        return -float(np.mean((p >= 0.5) == y))
    return float(np.mean(bce(p, y)))


def fit_logreg(
    train: LabeledEmbeddings,
    target: str,
    val: LabeledEmbeddings,
    cfg: OptimizerConfig,
) -> LinearModel:
    """SGD-with-momentum logistic regression for one label, early-stopped on val BCE."""
    if train.n == 0:
        raise ValueError("empty training set")
    if train.d != val.d:
        raise ValueError("train and val must share d")
    y = train.labels(target).astype(np.float64)
    if y.min() == y.max():
        m = fit_intercept_only(train, target)
        return LinearModel(m.w, m.b, warn="single-class target; intercept-only fit")

    X, Xval = train.Z, val.Z
    yval = val.labels(target).astype(np.float64)
    probs = _sampling_probs(train, target, cfg.balance_sampling)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))

    w = np.zeros(train.d)
    b = 0.0
    vw = np.zeros(train.d)
    vb = 0.0
    stopper = _EarlyStopper(cfg.early_stop_patience)
    for _ in range(cfg.max_epochs):
        for idx in _epoch_batches(rng, train.n, cfg.batch_size, probs):
            Xb, yb = X[idx], y[idx]
            r = sigmoid(Xb @ w + b) - yb
            gw = Xb.T @ r / len(idx)
            gb = float(np.mean(r))
            if cfg.weight_decay:
                gw = gw + cfg.weight_decay * w
            vw = cfg.momentum * vw + gw
            vb = cfg.momentum * vb + gb
            w = w - cfg.learning_rate * vw
            b = b - cfg.learning_rate * vb
        score = _val_score(cfg.early_stop_metric, sigmoid(Xval @ w + b), yval)
        if stopper.update(score, (w.copy(), b)):
            break
    w, b = stopper.best_state  # type: ignore[misc]
    return LinearModel(w, b)


def fit_1d_logreg(
    Z: np.ndarray,
    v: np.ndarray,
    y: np.ndarray,
    cfg: OptimizerConfig,
    Z_val: np.ndarray | None = None,
    y_val: np.ndarray | None = None,
    solver: str = "sgd",
) -> Direction:
    """Fit scale gamma and intercept b on the projected feature s = Z @ v, v held fixed.

    With no validation split, early stopping falls back to the training loss.
    ``solver='newton'`` runs IRLS to the optimum instead of the SGD protocol.
    """
    v = np.asarray(v, dtype=np.float64)
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ValueError("v must be unit-norm")
    s = np.asarray(Z, dtype=np.float64) @ v
    y = np.asarray(y, dtype=np.float64)
    if s.std() < 1e-12:
        b = _logit(float(np.mean(y)))
        return Direction(v, 0.0, b, warn="constant projected feature; gamma undefined")
    s_val = s if Z_val is None else np.asarray(Z_val, dtype=np.float64) @ v
    yv = y if y_val is None else np.asarray(y_val, dtype=np.float64)

    if solver == "newton":
        gamma, b = _newton_1d(s, y)
        return Direction(v, gamma, b)
    if solver != "sgd":
        raise ValueError(f"unknown solver {solver!r}")

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    gamma, b = 0.0, 0.0
    vg, vb = 0.0, 0.0
    n = len(s)
    stopper = _EarlyStopper(cfg.early_stop_patience)
    for _ in range(cfg.max_epochs):
        for idx in _epoch_batches(rng, n, cfg.batch_size, None):
            sb, yb = s[idx], y[idx]
            r = sigmoid(gamma * sb + b) - yb
            gg = float(sb @ r / len(idx))
            gb = float(np.mean(r))
            if cfg.weight_decay:
                gg += cfg.weight_decay * gamma
            vg = cfg.momentum * vg + gg
            vb = cfg.momentum * vb + gb
            gamma -= cfg.learning_rate * vg
            b -= cfg.learning_rate * vb
        score = _val_score(cfg.early_stop_metric, sigmoid(gamma * s_val + b), yv)
        if stopper.update(score, (gamma, b)):
            break
    gamma, b = stopper.best_state  # type: ignore[misc]
    return Direction(v, gamma, b)


def _newton_1d(s: np.ndarray, y: np.ndarray, max_iter: int = 100, tol: float = 1e-10):
    """IRLS for the two-parameter logistic model sigmoid(gamma * s + b)."""
    gamma, b = 0.0, 0.0
    for _ in range(max_iter):
        p = sigmoid(gamma * s + b)
        r = p - y
        w = np.maximum(p * (1.0 - p), 1e-12)
        g0, g1 = float(np.mean(r * s)), float(np.mean(r))
        h00 = float(np.mean(w * s * s))
        h01 = float(np.mean(w * s))
        h11 = float(np.mean(w))
        det = h00 * h11 - h01 * h01
        if det < 1e-14:
            break
        dg = (h11 * g0 - h01 * g1) / det
        db = (h00 * g1 - h01 * g0) / det
        # cap the step; separable data would otherwise diverge
        step = max(abs(dg), abs(db))
        if step > 10.0:
            dg, db = dg * 10.0 / step, db * 10.0 / step
        gamma -= dg
        b -= db
        if max(abs(dg), abs(db)) < tol:
            break
    return gamma, b


def joint_loss_and_grad(
    params: np.ndarray,
    X: np.ndarray,
    y_sp: np.ndarray,
    y_mt: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Value and gradient of the joint objective at packed params.

    Packing is ``[w_sp (d), w_mt (d), b_sp, b_mt]``. The objective is the sum
    of the two per-task mean BCEs, the main-task head predicting through
    ``(I - P_{w_sp}) w_mt``. Exposed for the finite-difference gradient check.
    """
    d = X.shape[1]
    w_sp, w_mt = params[:d], params[d : 2 * d]
    b_sp, b_mt = params[2 * d], params[2 * d + 1]
    n = X.shape[0]

    u = X @ w_sp
    p_sp = sigmoid(u + b_sp)
    s = float(w_sp @ w_sp) + PROJ_EPS
    c = float(w_sp @ w_mt)
    logit_mt = X @ w_mt - u * (c / s) + b_mt
    p_mt = sigmoid(logit_mt)

    loss = float(np.mean(bce(p_sp, y_sp)) + np.mean(bce(p_mt, y_mt)))

    r_sp = (p_sp - y_sp) / n
    r_mt = (p_mt - y_mt) / n
    Xr_mt = X.T @ r_mt
    ru = float(r_mt @ u)
    g_wsp = X.T @ r_sp - (c / s) * Xr_mt - (ru / s) * w_mt + (2.0 * c * ru / s**2) * w_sp
    g_wmt = Xr_mt - (ru / s) * w_sp
    grad = np.concatenate([g_wsp, g_wmt, [float(np.sum(r_sp)), float(np.sum(r_mt))]])
    return loss, grad


def fit_joint_orthogonal(
    train: LabeledEmbeddings,
    cfg: OptimizerConfig,
    val: LabeledEmbeddings | None = None,
) -> tuple[LinearModel, LinearModel]:
    """Jointly fit the spurious and main-task logistic regressions with
    orthogonal coefficient vectors.

    Returns ``(sp_model, mt_model)`` where the main-task model stores the
    already-projected effective weights, so ``sp.w`` is orthogonal to ``mt.w``.
    Early stopping uses the sum of the two validation BCEs.
    """
    for target in ("sp", "mt"):
        y = train.labels(target)
        if y.min() == y.max():
            raise ValueError(f"target {target!r} has a single class in the training data")
    X = train.Z
    y_sp = train.y_sp.astype(np.float64)
    y_mt = train.y_mt.astype(np.float64)
    if val is None:
        val = train
    Xv = val.Z
    yv_sp = val.y_sp.astype(np.float64)
    yv_mt = val.y_mt.astype(np.float64)

    probs = _sampling_probs(train, "mt", cfg.balance_sampling)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    d = train.d
    # small random init: when the two labels correlate strongly the heads race
    # for the same directions, and the systematic label-feature asymmetry (not
    # init noise) should decide near-ties
    w_sp = rng.normal(0.0, 0.1 / np.sqrt(d), size=d)
    w_mt = rng.normal(0.0, 0.1 / np.sqrt(d), size=d)
    b_sp = 0.0
    b_mt = 0.0
    v_wsp = np.zeros(d)
    v_wmt = np.zeros(d)
    v_bsp = 0.0
    v_bmt = 0.0

    def val_score() -> float:
        u = Xv @ w_sp
        s = float(w_sp @ w_sp) + PROJ_EPS
        c = float(w_sp @ w_mt)
        p_sp = sigmoid(u + b_sp)
        p_mt = sigmoid(Xv @ w_mt - u * (c / s) + b_mt)
        return _val_score(cfg.early_stop_metric, p_sp, yv_sp) + _val_score(
            cfg.early_stop_metric, p_mt, yv_mt
        )

    stopper = _EarlyStopper(cfg.early_stop_patience)
    for _ in range(cfg.max_epochs):
        for idx in _epoch_batches(rng, train.n, cfg.batch_size, probs):
            Xb = X[idx]
            nb = len(idx)
            u = Xb @ w_sp
            p_sp = sigmoid(u + b_sp)
            s = float(w_sp @ w_sp) + PROJ_EPS
            c = float(w_sp @ w_mt)
            p_mt = sigmoid(Xb @ w_mt - u * (c / s) + b_mt)
            r_sp = (p_sp - y_sp[idx]) / nb
            r_mt = (p_mt - y_mt[idx]) / nb
            Xr_mt = Xb.T @ r_mt
            ru = float(r_mt @ u)
            g_wsp = Xb.T @ r_sp - (c / s) * Xr_mt - (ru / s) * w_mt + (2.0 * c * ru / s**2) * w_sp
            g_wmt = Xr_mt - (ru / s) * w_sp
            if cfg.weight_decay:
                g_wsp = g_wsp + cfg.weight_decay * w_sp
                g_wmt = g_wmt + cfg.weight_decay * w_mt
            v_wsp = cfg.momentum * v_wsp + g_wsp
            v_wmt = cfg.momentum * v_wmt + g_wmt
            v_bsp = cfg.momentum * v_bsp + float(np.sum(r_sp))
            v_bmt = cfg.momentum * v_bmt + float(np.sum(r_mt))
            w_sp = w_sp - cfg.learning_rate * v_wsp
            w_mt = w_mt - cfg.learning_rate * v_wmt
            b_sp = b_sp - cfg.learning_rate * v_bsp
            b_mt = b_mt - cfg.learning_rate * v_bmt
        if stopper.update(val_score(), (w_sp.copy(), w_mt.copy(), b_sp, b_mt)):
            break

    w_sp, w_mt, b_sp, b_mt = stopper.best_state  # type: ignore[misc]
    s = float(w_sp @ w_sp) + PROJ_EPS
    w_mt_eff = w_mt - (float(w_sp @ w_mt) / s) * w_sp
    return LinearModel(w_sp, b_sp), LinearModel(w_mt_eff, b_mt)
