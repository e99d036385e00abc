"""Decoupled shrinkage and selection: sparsify the posterior mean fit.

Solves, by cyclic coordinate descent with exact soft-threshold updates,

    min_gamma  || Z beta_bar - Z gamma ||^2  +  lambda * sum_j |gamma_j|

so gamma reproduces the dense posterior-mean fit at lambda = 0 and zeroes
out columns as lambda grows. For orthonormal Z the solution is the
columnwise soft threshold S(beta_bar_j, lambda / 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._split import active_backend
from .errors import ConvergenceError, DataError, NumericError

try:
    from . import _dssc
except ImportError:
    _dssc = None

__all__ = ["DssSummary", "dss_summarize", "lambda_path"]


@dataclass
class DssSummary:
    lambda_dss: float
    gamma: np.ndarray  # standardized-scale coefficients
    gamma_original: np.ndarray  # rescaled to raw column units
    nonzero: np.ndarray  # indices of nonzero gamma entries
    fit_gap: float  # ||Z(gamma - beta_bar)||^2 / ||Z beta_bar||^2
    sweeps: int
    names: list[str]


def soft_threshold(x: float, t: float) -> float:
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def _cd_gram_py(q, G, colsq, gamma, v, half, tol, max_sweeps):
    """Sweeps tracking v = G @ gamma; the compiled kernel's twin. Reads
    Gram rows (G is symmetric up to its own rounding) exactly like the
    compiled version so iterates match bit for bit."""
    P = len(gamma)
    for sweep in range(1, max_sweeps + 1):
        delta = 0.0
        for j in range(P):
            gj = gamma[j]
            rho = q[j] - v[j] + colsq[j] * gj
            new = soft_threshold(rho, half) / colsq[j]
            if new != gj:
                v += G[j] * (new - gj)
                gamma[j] = new
                step = abs(new - gj)
                if step > delta:
                    delta = step
        if delta < tol:
            return sweep
    return -1


def _cd_resid_py(ZT, colsq, gamma, r, half, tol, max_sweeps):
    """Sweeps maintaining the residual r = target - Z @ gamma."""
    P = len(gamma)
    for sweep in range(1, max_sweeps + 1):
        delta = 0.0
        for j in range(P):
            zj = ZT[j]
            gj = gamma[j]
            rho = float(zj @ r) + colsq[j] * gj
            new = soft_threshold(rho, half) / colsq[j]
            if new != gj:
                r += zj * (gj - new)
                gamma[j] = new
                step = abs(new - gj)
                if step > delta:
                    delta = step
        if delta < tol:
            return sweep
    return -1


def dss_summarize(model, Z, lambda_dss: float, *, max_sweeps=200_000, tol=1e-8,
                  gamma0=None) -> DssSummary:
    """Sparse approximation of the posterior-mean regression function.

    Z must be the standardized training design (use
    inference.design_from_model on the training covariates). Starts at
    gamma = beta_bar, so lambda_dss = 0 returns the dense fit unchanged;
    gamma0 overrides the start (warm starts along a penalty path).

    Rule designs carry exact linear dependencies (nested rules), so the
    tail of the descent creeps; when P <= n the inner loop tracks the
    gradient through the Gram matrix, making no-op coordinate visits cheap.
    """
    if lambda_dss < 0:
        raise DataError("lambda_dss must be >= 0")
    Z = np.asarray(Z, dtype=np.float64)
    beta_bar = model.draws.beta.mean(axis=0)
    n, P = Z.shape
    if beta_bar.shape != (P,):
        raise DataError("design width does not match the model")

    target = Z @ beta_bar
    denom = float(target @ target)
    colsq = np.einsum("ij,ij->j", Z, Z)
    if np.any(colsq <= 0):
        raise NumericError("design has a zero column")

    gamma = beta_bar.copy() if gamma0 is None else np.array(gamma0, dtype=np.float64)
    if gamma.shape != (P,):
        raise DataError("gamma0 width does not match the design")
    half = 0.5 * lambda_dss
    use_gram = P <= n

    if lambda_dss == 0.0 and gamma0 is None:
        # beta_bar is already a minimizer of the unpenalized objective
        return _finish(model, Z, beta_bar, gamma, 0.0, denom, 0)

    compiled = _dssc is not None and active_backend() == "compiled"
    if use_gram:
        G = np.ascontiguousarray(Z.T @ Z)
        q = Z.T @ target
        v = G @ gamma  # gradient state: z_j' Z gamma
        if compiled:
            sweeps = _dssc.cd_gram(q, G, colsq, gamma, v, half, tol, max_sweeps)
        else:
            sweeps = _cd_gram_py(q, G, colsq, gamma, v, half, tol, max_sweeps)
    else:
        ZT = np.ascontiguousarray(Z.T)
        r = target - Z @ gamma  # exactly zero at the beta_bar start
        if compiled:
            sweeps = _dssc.cd_resid(ZT, colsq, gamma, r, half, tol, max_sweeps)
        else:
            sweeps = _cd_resid_py(ZT, colsq, gamma, r, half, tol, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(
            f"coordinate descent did not converge in {max_sweeps} sweeps",
            iterations=max_sweeps,
        )

    return _finish(model, Z, beta_bar, gamma, float(lambda_dss), denom, sweeps)


def _finish(model, Z, beta_bar, gamma, lambda_dss, denom, sweeps) -> DssSummary:
    diff = Z @ (gamma - beta_bar)
    fit_gap = float(diff @ diff) / denom if denom > 0 else 0.0
    sds = np.array([c.sd for c in model.columns])
    gamma_orig = gamma * (model.scaling.y_sd / sds)
    return DssSummary(
        lambda_dss=lambda_dss,
        gamma=gamma,
        gamma_original=gamma_orig,
        nonzero=np.flatnonzero(gamma != 0.0),
        fit_gap=fit_gap,
        sweeps=sweeps,
        names=[c.name for c in model.columns],
    )


def lambda_path(Z, beta_bar, n_points: int = 50, ratio: float = 1e-3) -> np.ndarray:
    """Log-spaced penalty grid, descending from
    lambda_max = max_j |Z'(Z beta_bar)|_j / n."""
    Z = np.asarray(Z, dtype=np.float64)
    beta_bar = np.asarray(beta_bar, dtype=np.float64)
    n = Z.shape[0]
    top = float(np.max(np.abs(Z.T @ (Z @ beta_bar)))) / n
    if not np.isfinite(top) or top <= 0:
        raise NumericError("cannot build a penalty path: the dense fit is zero")
    return np.geomspace(top, top * ratio, n_points)
