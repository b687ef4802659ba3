"""Logistic regression: unpenalized maximum likelihood and elastic net."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, ndtri

from adkg.errors import ConvergenceError, DataError

SEPARATION_BOUND = 30.0


def _design(X, y):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise DataError("X and y differ in row count")
    if np.isnan(X).any() or np.isnan(y).any():
        raise DataError("missing values in design")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0/1")
    if y.min() == y.max():
        raise DataError("labels contain a single class")
    return X, y


def _loglik(Xi, y, beta):
    eta = Xi @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


@dataclass
class LogisticFit:
    beta: np.ndarray  # intercept first
    se: np.ndarray
    n_iter: int
    loglik: float
    names: tuple = ()

    @property
    def odds_ratios(self) -> np.ndarray:
        return np.exp(self.beta)

    def conf_int(self, level: float = 0.95) -> np.ndarray:
        z = ndtri(0.5 + level / 2.0)
        return np.exp(np.column_stack([self.beta - z * self.se, self.beta + z * self.se]))

    @property
    def wald_p(self) -> np.ndarray:
        from scipy.special import ndtr
        z = np.abs(self.beta / self.se)
        return 2.0 * ndtr(-z)


def logistic_regression(X, y, *, tol: float = 1e-8, max_iter: int = 100, names=()) -> LogisticFit:
    """Newton-Raphson maximum likelihood with Wald standard errors.

    An intercept column is prepended. Raises ConvergenceError on perfect
    separation (a coefficient escaping past +-30) or a singular information
    matrix.
    """
    X, y = _design(X, y)
    n, p = X.shape
    if n <= p + 1:
        raise DataError(f"need n > p + 1 (n={n}, p={p})")
    Xi = np.column_stack([np.ones(n), X])
    beta = np.zeros(p + 1)
    ll = _loglik(Xi, y, beta)
    for it in range(1, max_iter + 1):
        mu = expit(Xi @ beta)
        grad = Xi.T @ (y - mu)
        info = Xi.T @ (Xi * (mu * (1 - mu))[:, None])
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError:
            if np.max(np.abs(beta)) > 10:
                raise ConvergenceError("perfect separation: information matrix became singular") from None
            raise ConvergenceError("singular information matrix") from None
        t = 1.0
        while t > 1e-10:
            cand = beta + t * step
            ll_new = _loglik(Xi, y, cand)
            if ll_new >= ll - 1e-12:
                break
            t /= 2
        delta = cand - beta
        beta, ll = cand, ll_new
        if np.max(np.abs(beta)) > SEPARATION_BOUND:
            raise ConvergenceError("perfect separation: coefficients diverge")
        if np.max(np.abs(delta)) < tol:
            break
    else:
        raise ConvergenceError(f"Newton iterations did not converge in {max_iter} steps")
    mu = expit(Xi @ beta)
    info = Xi.T @ (Xi * (mu * (1 - mu))[:, None])
    if np.linalg.cond(info) > 1e12:
        raise ConvergenceError("singular information matrix")
    cov = np.linalg.inv(info)
    se = np.sqrt(np.diag(cov))
    return LogisticFit(beta, se, it, ll, tuple(names))


@dataclass
class ElasticNetFit:
    beta: np.ndarray  # intercept first, original feature scale
    beta_std: np.ndarray  # intercept first, standardized feature scale
    n_iter: int
    objective_path: list = field(default_factory=list)


def _soft(x, a):
    return math.copysign(max(abs(x) - a, 0.0), x)


def _enet_objective(Z, y, b0, b, lam, mix):
    eta = b0 + Z @ b
    nll = float(np.mean(np.logaddexp(0.0, eta) - y * eta))
    return nll + lam * (mix * np.abs(b).sum() + 0.5 * (1 - mix) * float(b @ b))


def elastic_net_logistic(X, y, lam: float, mix: float = 0.5, *, tol: float = 1e-7,
                         max_iter: int = 500, inner_tol: float = 1e-10,
                         max_inner: int = 20000) -> ElasticNetFit:
    """Elastic-net penalized logistic regression by proximal Newton steps.

    Minimizes mean negative log-likelihood + lam * (mix * |b|_1 + (1 - mix)/2 * |b|_2^2)
    over standardized features; the intercept is not penalized. Each outer
    step solves the penalized weighted least-squares subproblem by
    coordinate descent and then backtracks until the true objective does not
    increase, so the objective path is monotone.
    """
    if lam < 0:
        raise DataError("lambda must be nonnegative")
    if not 0.0 <= mix <= 1.0:
        raise DataError("mix must lie in [0, 1]")
    X, y = _design(X, y)
    n, p = X.shape
    center = X.mean(axis=0)
    scale = X.std(axis=0)
    if np.any(scale == 0):
        raise DataError("constant feature cannot be standardized")
    Z = (X - center) / scale
    b0 = math.log(y.mean() / (1 - y.mean()))
    b = np.zeros(p)
    obj = _enet_objective(Z, y, b0, b, lam, mix)
    path = [obj]
    l1, l2 = lam * mix, lam * (1 - mix)
    for it in range(1, max_iter + 1):
        eta = b0 + Z @ b
        mu = expit(eta)
        w = np.maximum(mu * (1 - mu), 1e-10)
        z = eta + (y - mu) / w
        nb0, nb = b0, b.copy()
        r = z - nb0 - Z @ nb
        wn = w / n
        col_sq = (Z * Z).T @ wn
        for _ in range(max_inner):
            biggest = 0.0
            d0 = float(wn @ r) / float(wn.sum())
            nb0 += d0
            r -= d0
            biggest = abs(d0)
            for j in range(p):
                zj = Z[:, j]
                old = nb[j]
                rho = float((wn * zj) @ r) + col_sq[j] * old
                new = _soft(rho, l1) / (col_sq[j] + l2)
                if new != old:
                    r -= zj * (new - old)
                    nb[j] = new
                    biggest = max(biggest, abs(new - old))
            if biggest < inner_tol:
                break
        d0, d = nb0 - b0, nb - b
        t = 1.0
        while True:
            cb0, cb = b0 + t * d0, b + t * d
            cobj = _enet_objective(Z, y, cb0, cb, lam, mix)
            if cobj <= obj + 1e-15 or t < 1e-12:
                break
            t /= 2
        if cobj > obj + 1e-15:
            cb0, cb, cobj = b0, b, obj
        change = max(abs(cb0 - b0), float(np.max(np.abs(cb - b))) if p else 0.0)
        assert cobj <= path[-1] + 1e-12, "elastic net objective increased"
        b0, b, obj = cb0, cb, cobj
        path.append(obj)
        if change < tol:
            break
    else:
        raise ConvergenceError(f"elastic net did not converge in {max_iter} iterations "
                               f"(last max coefficient change {change:.3g})")
    beta_orig = np.concatenate([[b0 - float(b @ (center / scale))], b / scale])
    return ElasticNetFit(beta_orig, np.concatenate([[b0], b]), it, path)
