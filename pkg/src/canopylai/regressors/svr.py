"""Epsilon-insensitive support vector regression with an RBF kernel, solved
exactly in the dual by sequential pairwise optimization.

The dual has 2n box-bounded variables beta = [alpha; alpha*] with signs
q = [+1; -1] and one equality constraint q.beta = 0. Each iteration picks the
maximal violating pair (largest KKT violation), takes the analytic two-variable
step, and maintains u = K(alpha - alpha*). Convergence is declared when the
violation m - M drops below tolerance AND the duality gap is small; if the gap
check fails the tolerance is tightened and optimization resumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import LabeledSample
from ..errors import ComputationError, DataError
from .prepare import StandardizerParams, apply_standardizer, canonical_sort, fit_standardizer, samples_to_arrays

KKT_TOL = 1e-3
GAP_REL = 1e-3
SUPPORT_EPS = 1e-12
ETA_FLOOR = 1e-12


@dataclass(frozen=True)
class SvrModel:
    support_vectors: np.ndarray  # (m, d), standardized feature rows
    dual_coefs: np.ndarray       # (m,) values of alpha - alpha*
    bias: float
    gamma: float
    C: float
    epsilon: float
    standardizer: StandardizerParams
    extractor: str = ""


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = np.maximum(
        (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * sq)


def _duality_gap(u, y, theta, alpha, alpha_star, bias, C, epsilon):
    """Primal objective, dual objective and their gap at the current iterate."""
    reg = 0.5 * float(theta @ u)
    slack = np.maximum(np.abs(y - u - bias) - epsilon, 0.0)
    primal = reg + C * float(slack.sum())
    dual = -(reg + epsilon * float(alpha.sum() + alpha_star.sum()) - float(y @ theta))
    return primal, dual, primal - dual


def _bias_from_state(g_plus, g_minus, alpha, alpha_star, C, m, M):
    free = np.concatenate([(alpha > 0) & (alpha < C), (alpha_star > 0) & (alpha_star < C)])
    if free.any():
        return float(np.concatenate([g_plus, g_minus])[free].mean())
    return float((m + M) / 2.0)


def fit_svr(train: list[LabeledSample], C: float = 1.0, epsilon: float = 0.1,
            gamma: float | str = "auto", max_iter: int | None = None) -> SvrModel:
    """Train an RBF epsilon-SVR to KKT tolerance 1e-3 (gap-verified).

    gamma="auto" resolves to 1/(d * Var(Z)) over the standardized training
    matrix Z. Non-convergence within max_iter (default 10 n^2) raises
    ComputationError carrying the final duality gap.
    """
    if not (C > 0):
        raise DataError(f"C must be > 0, got {C}")
    if epsilon < 0:
        raise DataError(f"epsilon must be >= 0, got {epsilon}")
    X, y = samples_to_arrays(train)
    X, y = canonical_sort(X, y)
    standardizer = fit_standardizer(X)
    Z = apply_standardizer(standardizer, X)
    n, d = Z.shape
    if gamma == "auto":
        var = float(Z.var())
        gamma_val = 1.0 / (d * var) if var > 0 else 1.0 / d
    elif isinstance(gamma, str):
        raise DataError(f'gamma must be a positive number or "auto", got {gamma!r}')
    else:
        gamma_val = float(gamma)
        if not (gamma_val > 0):
            raise DataError(f"gamma must be > 0, got {gamma}")
    if max_iter is None:
        max_iter = max(10 * n * n, 1000)

    K = rbf_kernel(Z, Z, gamma_val)
    alpha = np.zeros(n)
    alpha_star = np.zeros(n)
    u = np.zeros(n)  # K @ (alpha - alpha*)
    tol = KKT_TOL
    snap = SUPPORT_EPS * max(C, 1.0)
    iters = 0
    while True:
        r = y - u
        g_plus = r - epsilon    # scores of the alpha block (q = +1)
        g_minus = r + epsilon   # scores of the alpha* block (q = -1)
        g = np.concatenate([g_plus, g_minus])
        up = np.concatenate([alpha < C, alpha_star > 0])
        low = np.concatenate([alpha > 0, alpha_star < C])
        gu = np.where(up, g, -np.inf)
        gl = np.where(low, g, np.inf)
        i = int(gu.argmax())
        j = int(gl.argmin())
        m, M = float(gu[i]), float(gl[j])

        if m - M <= tol:
            bias = _bias_from_state(g_plus, g_minus, alpha, alpha_star, C, m, M)
            theta = alpha - alpha_star
            primal, _, gap = _duality_gap(u, y, theta, alpha, alpha_star, bias, C, epsilon)
            if gap <= GAP_REL * (1.0 + abs(primal)):
                break
            tol /= 10.0
            if tol < 1e-10:
                raise ComputationError(
                    f"dual optimization stalled: duality gap {gap:.3e} at violation tolerance {tol:.1e}")
            continue
        if iters >= max_iter:
            bias = _bias_from_state(g_plus, g_minus, alpha, alpha_star, C, m, M)
            theta = alpha - alpha_star
            _, _, gap = _duality_gap(u, y, theta, alpha, alpha_star, bias, C, epsilon)
            raise ComputationError(
                f"no convergence in {max_iter} pair updates; violation {m - M:.3e}, duality gap {gap:.3e}")

        ii, jj = i % n, j % n
        qi = 1.0 if i < n else -1.0
        qj = 1.0 if j < n else -1.0
        bi = alpha[ii] if i < n else alpha_star[ii]
        bj = alpha[jj] if j < n else alpha_star[jj]
        eta = max(K[ii, ii] + K[jj, jj] - 2.0 * K[ii, jj], ETA_FLOOR)

        # analytic step along the feasible pair direction, then box clipping
        step = qi * (m - M) / eta
        lo, hi = -bi, C - bi
        if qi * qj > 0:
            lo, hi = max(lo, bj - C), min(hi, bj)
        else:
            lo, hi = max(lo, -bj), min(hi, C - bj)
        step = min(max(step, lo), hi)
        new_bi = bi + step
        new_bj = bj - qi * qj * step
        # snap only in the direction of motion so progress is never undone
        if step > 0 and new_bi > C - snap:
            new_bi = C
        elif step < 0 and new_bi < snap:
            new_bi = 0.0
        step_j = new_bj - bj
        if step_j > 0 and new_bj > C - snap:
            new_bj = C
        elif step_j < 0 and new_bj < snap:
            new_bj = 0.0

        u += K[:, ii] * (qi * (new_bi - bi)) + K[:, jj] * (qj * (new_bj - bj))
        if i < n:
            alpha[ii] = new_bi
        else:
            alpha_star[ii] = new_bi
        if j < n:
            alpha[jj] = new_bj
        else:
            alpha_star[jj] = new_bj
        iters += 1

    theta = alpha - alpha_star
    support = np.abs(theta) > SUPPORT_EPS
    if support.any():
        support_vectors = Z[support].copy()
        dual_coefs = theta[support].copy()
    else:
        # constant-like fit: keep one vector with zero weight so the kernel
        # expansion stays well-formed and prediction reduces to the bias
        support_vectors = Z[:1].copy()
        dual_coefs = np.zeros(1)
    return SvrModel(support_vectors=support_vectors, dual_coefs=dual_coefs, bias=bias,
                    gamma=gamma_val, C=float(C), epsilon=float(epsilon), standardizer=standardizer)


def predict_svr(model: SvrModel, X: np.ndarray) -> np.ndarray:
    Z = apply_standardizer(model.standardizer, np.atleast_2d(X))
    k = rbf_kernel(Z, model.support_vectors, model.gamma)
    return k @ model.dual_coefs + model.bias
