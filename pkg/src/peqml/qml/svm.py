"""C-SVC on a precomputed kernel, solved by SMO, one-vs-one for multiclass.

The solver follows the libsvm formulation: minimise 1/2 a^T Q a - sum(a)
with Q_ij = y_i y_j K_ij, 0 <= a_i <= C and y^T a = 0, choosing the working
pair by maximal violation for i and second-order gain for j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

TAU = 1e-12


@dataclass(frozen=True)
class BinarySvm:
    support: np.ndarray  # indices into the training set of the pair
    dual_coef: np.ndarray  # alpha_i * y_i for the support vectors
    alpha: np.ndarray  # all alphas of the sub-problem
    rho: float
    kkt_gap: float
    iterations: int


def smo(k: np.ndarray, y: np.ndarray, c: float = 1.0, tol: float = 1e-3,
        max_iter: int | None = None) -> BinarySvm:
    """Binary C-SVC dual with labels y in {+1, -1}."""
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float)
    m = len(y)
    if k.shape != (m, m):
        raise ValueError(f"kernel shape {k.shape} does not match {m} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if c <= 0:
        raise ValueError("C must be positive")
    max_iter = max(10_000_000, 100 * m) if max_iter is None else max_iter
    q = (y[:, None] * y[None, :]) * k
    qd = np.diag(q).copy()
    alpha = np.zeros(m)
    grad = -np.ones(m)
    it = 0
    gap = np.inf
    while it < max_iter:
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        score = -y * grad
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        gmax = score[i]
        gmin = score[low].min()
        gap = gmax - gmin
        if gap < tol:
            break
        cand = np.flatnonzero(low & (score < gmax))
        b = gmax - score[cand]
        a = qd[i] + qd[cand] - 2.0 * y[i] * y[cand] * q[i, cand]
        a = np.where(a > 0, a, TAU)
        j = int(cand[np.argmin(-(b * b) / a)])

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = qd[i] + qd[j] + 2.0 * q[i, j]
            delta = (-grad[i] - grad[j]) / (quad if quad > 0 else TAU)
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > c:
                    ni, nj = c, c - diff
            elif nj > c:
                nj, ni = c, c + diff
        else:
            quad = qd[i] + qd[j] - 2.0 * q[i, j]
            delta = (grad[i] - grad[j]) / (quad if quad > 0 else TAU)
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > c:
                if ni > c:
                    ni, nj = c, total - c
            elif nj < 0:
                nj, ni = 0.0, total
            if total > c:
                if nj > c:
                    nj, ni = c, total - c
            elif ni < 0:
                ni, nj = 0.0, total
        grad += q[:, i] * (ni - ai) + q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
        it += 1
    support = np.flatnonzero(alpha > 0)
    return BinarySvm(support, alpha[support] * y[support], alpha, _rho(alpha, grad, y, c), float(gap), it)


def _rho(alpha, grad, y, c) -> float:
    yg = y * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        return float(yg[free].mean())
    at_upper = alpha >= c
    ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
    lb_mask = ~ub_mask
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2)


@dataclass(frozen=True)
class SvmModel:
    classes: np.ndarray
    pairs: list  # (class index a, class index b, training indices, BinarySvm)
    c: float

    def decision(self, k_cross: np.ndarray) -> np.ndarray:
        """One column per pair; positive favours the first class of the pair."""
        k_cross = np.atleast_2d(np.asarray(k_cross, dtype=float))
        cols = []
        for _, _, idx, sub in self.pairs:
            sv = idx[sub.support]
            cols.append(k_cross[:, sv] @ sub.dual_coef - sub.rho)
        return np.column_stack(cols) if cols else np.zeros((len(k_cross), 0))


def svm_fit(k_train: np.ndarray, y, c: float = 1.0, tol: float = 1e-3) -> SvmModel:
    k_train = np.asarray(k_train, dtype=float)
    y = np.asarray(y)
    if k_train.shape != (len(y), len(y)):
        raise ValueError(f"Gram matrix shape {k_train.shape} does not match {len(y)} labels")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    pairs = []
    for a, b in itertools.combinations(range(len(classes)), 2):
        idx = np.flatnonzero((y == classes[a]) | (y == classes[b]))
        yy = np.where(y[idx] == classes[a], 1.0, -1.0)
        pairs.append((a, b, idx, smo(k_train[np.ix_(idx, idx)], yy, c, tol)))
    return SvmModel(classes, pairs, c)


def svm_predict(model: SvmModel, k_cross: np.ndarray) -> np.ndarray:
    """One-vs-one vote; ties go to the lower class index."""
    dec = model.decision(k_cross)
    votes = np.zeros((len(dec), len(model.classes)), dtype=np.int64)
    for col, (a, b, _, _) in enumerate(model.pairs):
        winner = np.where(dec[:, col] > 0, a, b)
        np.add.at(votes, (np.arange(len(dec)), winner), 1)
    return model.classes[np.argmax(votes, axis=1)]
