"""Sum-of-ReLU ranking networks and their trainer.

The network maps n integers to m non-negative outputs.  Hidden neuron k
(0-based) feeds output k // h with weight fixed to 1, so each output is a
sum of h ReLU units and non-negativity holds by construction:

    o_g(x) = sum_{k in group g} relu(W[k] . x + b[k])

Training minimises the mean lexicographic hinge loss over observation pairs
with full-batch Adam and exact subgradients (0 at kinks).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .tracer import ObservationPair


class SorNetwork:
    def __init__(self, n: int, m: int, h: int, weights: np.ndarray, biases: np.ndarray):
        assert weights.shape == (m * h, n) and biases.shape == (m * h,)
        self.n = n
        self.m = m
        self.h = h
        self.weights = weights.astype(np.float64)
        self.biases = biases.astype(np.float64)

    @classmethod
    def initial(cls, n: int, m: int, h: int, rng: np.random.Generator, init_scale: float = 0.1) -> "SorNetwork":
        w = rng.normal(0.0, init_scale, size=(m * h, n))
        b = np.zeros(m * h)
        return cls(n, m, h, w, b)

    def group(self, neuron: int) -> int:
        return neuron // self.h

    def preactivations(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights.T + self.biases

    def forward(self, x) -> np.ndarray:
        """Outputs for one input vector (shape (m,)) or a batch (N, m)."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        acts = np.maximum(self.preactivations(x), 0.0)
        out = acts.reshape(x.shape[0], self.m, self.h).sum(axis=2)
        return out[0] if single else out

    def copy(self) -> "SorNetwork":
        return SorNetwork(self.n, self.m, self.h, self.weights.copy(), self.biases.copy())


@dataclass
class TrainConfig:
    delta: float = 1.0
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_iters: int = 20000
    loss_tol: float = 0.0
    init_scale: float = 0.1
    patience: int = 2000  # stop after this many iterations without progress; 0 disables
    seed: int = 0


@dataclass
class TrainingReport:
    final_loss: float
    iters_used: int
    loss_history: list[float]
    converged: bool
    best_max_pair_loss: float = float("inf")


def pair_loss(net: SorNetwork, x, y, lex_index: int, delta: float) -> float:
    """Hinge loss of one pair: the indexed output must drop by delta, all
    lower-indexed outputs must not increase.  With m = 1 this is exactly the
    single-output hinge max(o(y) - o(x) + delta, 0)."""
    ox = net.forward(np.asarray(x, dtype=np.float64))
    oy = net.forward(np.asarray(y, dtype=np.float64))
    j = lex_index - 1
    loss = max(oy[j] - ox[j] + delta, 0.0)
    for i in range(j):
        loss += max(oy[i] - ox[i], 0.0)
    return float(loss)


def _pack(pairs: list[ObservationPair], n: int):
    """Collapse duplicate rows; weighting keeps the mean/max loss and the
    gradient identical to the retained-duplicates multiset."""
    x = np.array([p.x for p in pairs], dtype=np.float64).reshape(len(pairs), n)
    y = np.array([p.y for p in pairs], dtype=np.float64).reshape(len(pairs), n)
    j = np.array([p.lex_index for p in pairs], dtype=np.int64)
    rows = np.concatenate([x, y, j[:, None].astype(np.float64)], axis=1)
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    xs = uniq[:, :n]
    ys = uniq[:, n : 2 * n]
    js = uniq[:, 2 * n].astype(np.int64)
    wts = counts.astype(np.float64) / len(pairs)
    return xs, ys, js, wts


def _losses(net: SorNetwork, xs, ys, js, delta: float):
    """Per-unique-pair losses plus the activation data the gradient needs."""
    ax = net.preactivations(xs)
    ay = net.preactivations(ys)
    ox = np.maximum(ax, 0.0).reshape(len(xs), net.m, net.h).sum(axis=2)
    oy = np.maximum(ay, 0.0).reshape(len(ys), net.m, net.h).sum(axis=2)
    d = oy - ox  # (N, m)
    gidx = np.arange(net.m)[None, :]
    target = (js - 1)[:, None]
    margin = np.where(gidx == target, delta, 0.0)
    relevant = gidx <= target
    terms = np.maximum(d + margin, 0.0) * relevant
    losses = terms.sum(axis=1)
    active = ((d + margin) > 0.0) & relevant  # dLoss/dD indicator
    return losses, active, ax, ay


def dataset_loss(net: SorNetwork, pairs: list[ObservationPair], delta: float) -> tuple[float, float]:
    """(mean loss, max per-pair loss) over the pair multiset."""
    if not pairs:
        return 0.0, 0.0
    xs, ys, js, wts = _pack(pairs, net.n)
    losses, _, _, _ = _losses(net, xs, ys, js, delta)
    return float(losses @ wts), float(losses.max())


def train(net: SorNetwork, pairs: list[ObservationPair], cfg: TrainConfig) -> TrainingReport:
    """Full-batch Adam on the lexicographic hinge loss, in place.

    Stops when the max per-pair loss drops to loss_tol (converged) or at
    max_iters / patience exhaustion, in which case the best iterate seen is
    restored into net.
    """
    if not pairs:
        return TrainingReport(0.0, 0, [], True, 0.0)
    xs, ys, js, wts = _pack(pairs, net.n)

    mw = np.zeros_like(net.weights)
    vw = np.zeros_like(net.weights)
    mb = np.zeros_like(net.biases)
    vb = np.zeros_like(net.biases)

    best = (float("inf"), float("inf"))
    best_params = (net.weights.copy(), net.biases.copy())
    best_mean = float("inf")
    best_mean_iter = 0
    history: list[float] = []
    converged = False
    iters = 0

    for t in range(cfg.max_iters + 1):
        losses, active, ax, ay = _losses(net, xs, ys, js, cfg.delta)
        mean_loss = float(losses @ wts)
        max_loss = float(losses.max())
        history.append(mean_loss)
        iters = t
        if (max_loss, mean_loss) < best:
            best = (max_loss, mean_loss)
            best_params = (net.weights.copy(), net.biases.copy())
        # Patience watches the mean (the descent objective); the max can
        # climb transiently while the mean still makes progress.
        if mean_loss < best_mean - 1e-12:
            best_mean = mean_loss
            best_mean_iter = t
        if max_loss <= cfg.loss_tol:
            converged = True
            break
        if t == cfg.max_iters:
            break
        if cfg.patience and t - best_mean_iter >= cfg.patience:
            break

        # dL/dA = weight * active[group] * relu'(A); relu' is 0 at the kink
        g = np.repeat(active.astype(np.float64), net.h, axis=1) * wts[:, None]
        gy = g * (ay > 0.0)
        gx = g * (ax > 0.0)
        dw = gy.T @ ys - gx.T @ xs
        db = gy.sum(axis=0) - gx.sum(axis=0)

        step = t + 1
        mw = cfg.beta1 * mw + (1 - cfg.beta1) * dw
        vw = cfg.beta2 * vw + (1 - cfg.beta2) * dw * dw
        mb = cfg.beta1 * mb + (1 - cfg.beta1) * db
        vb = cfg.beta2 * vb + (1 - cfg.beta2) * db * db
        mw_hat = mw / (1 - cfg.beta1**step)
        vw_hat = vw / (1 - cfg.beta2**step)
        mb_hat = mb / (1 - cfg.beta1**step)
        vb_hat = vb / (1 - cfg.beta2**step)
        net.weights -= cfg.lr * mw_hat / (np.sqrt(vw_hat) + cfg.eps)
        net.biases -= cfg.lr * mb_hat / (np.sqrt(vb_hat) + cfg.eps)

    if not converged:
        net.weights, net.biases = best_params
        return TrainingReport(best[1], iters, history, False, best[0])
    return TrainingReport(history[-1], iters, history, True, float(0.0))


def loss_gradient(net: SorNetwork, pairs: list[ObservationPair], delta: float):
    """Analytic gradient of the mean loss (used by the finite-difference
    property tests)."""
    xs, ys, js, wts = _pack(pairs, net.n)
    _, active, ax, ay = _losses(net, xs, ys, js, delta)
    g = np.repeat(active.astype(np.float64), net.h, axis=1) * wts[:, None]
    gy = g * (ay > 0.0)
    gx = g * (ax > 0.0)
    dw = gy.T @ ys - gx.T @ xs
    db = gy.sum(axis=0) - gx.sum(axis=0)
    return dw, db


# ---------------------------------------------------------------------------
# Integer candidates


@dataclass(frozen=True)
class RankingCandidate:
    """Integer-weight network plus the scaled margin it must decrease by.

    Produced by rounding a trained network at k binary digits and scaling
    by 2**k, so outputs are 2**k times the rounded-fraction network's and
    the margin scales along: delta_v = delta * 2**k.
    """

    n: int
    m: int
    h: int
    k: int
    delta_v: Fraction
    weights: tuple[tuple[int, ...], ...]  # (m*h) x n
    biases: tuple[int, ...]

    def group(self, neuron: int) -> int:
        return neuron // self.h

    def outputs(self, values) -> list[int]:
        """Exact integer forward pass."""
        out = [0] * self.m
        for kk in range(self.m * self.h):
            t = self.biases[kk]
            for w, v in zip(self.weights[kk], values):
                t += w * int(v)
            if t > 0:
                out[kk // self.h] += t
        return out


def _round_half_away(a: np.ndarray) -> np.ndarray:
    return np.copysign(np.floor(np.abs(a) + 0.5), a)


def round_parameters(net: SorNetwork, k: int, delta: Fraction | int = 1) -> RankingCandidate:
    """Round every first-layer parameter to k binary digits (ties away from
    zero), then scale the whole layer by 2**k to integers."""
    scale = 2**k
    w = _round_half_away(net.weights * scale).astype(np.int64)
    b = _round_half_away(net.biases * scale).astype(np.int64)
    return RankingCandidate(
        n=net.n,
        m=net.m,
        h=net.h,
        k=k,
        delta_v=Fraction(delta) * scale,
        weights=tuple(tuple(int(v) for v in row) for row in w),
        biases=tuple(int(v) for v in b),
    )


def format_candidate(cand: RankingCandidate) -> str:
    """First line `n m h k delta_v`, then per neuron: 1-based group index,
    the n integer weights, and the integer bias."""
    dv = cand.delta_v
    dv_text = str(dv.numerator) if dv.denominator == 1 else f"{dv.numerator}/{dv.denominator}"
    lines = [f"{cand.n} {cand.m} {cand.h} {cand.k} {dv_text}"]
    for kk in range(cand.m * cand.h):
        parts = [str(kk // cand.h + 1), *(str(w) for w in cand.weights[kk]), str(cand.biases[kk])]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def parse_candidate(text: str) -> RankingCandidate:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n, m, h, k = (int(v) for v in lines[0].split()[:4])
    dv_text = lines[0].split()[4]
    delta_v = Fraction(dv_text)
    weights = []
    biases = []
    for ln in lines[1:]:
        parts = [int(v) for v in ln.split()]
        weights.append(tuple(parts[1 : 1 + n]))
        biases.append(parts[1 + n])
    return RankingCandidate(n, m, h, k, delta_v, tuple(weights), tuple(biases))
