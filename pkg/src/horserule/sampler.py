"""Gibbs sampler for the rule-structured horseshoe regression.

Model, on the standardized design Z and standardized response ys:

    ys | beta, sigma2          ~ N(Z beta, sigma2 I)
    beta_j | lambda_j, tau, sigma ~ N(0, sigma2 tau2 lambda_j2)
    lambda_j ~ HalfCauchy(A_j),  tau ~ HalfCauchy(1),  p(sigma2) = 1/sigma2

A_j encodes rule structure: small support and long rules get smaller prior
scale. Half-Cauchy scales are sampled through the standard inverse-gamma
mixture (one auxiliary nu_j per lambda_j, one rho for tau), so every block
is a normal or inverse-gamma draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import blas as sblas

from .errors import DataError, NumericError

__all__ = [
    "PriorSpec",
    "AssembledPrior",
    "PosteriorDraws",
    "rule_prior_scale",
    "assemble_prior",
    "draw_beta",
    "draw_sigma2",
    "draw_lambda2",
    "draw_tau2",
    "draw_nu",
    "draw_rho",
    "gibbs_run",
]

_CLIP_LO = 1e-300
_CLIP_HI = 1e300


@dataclass
class PriorSpec:
    mu: float = 1.0  # support exponent
    eta: float = 2.0  # length exponent
    linear_A: float = 1.0  # half-Cauchy scale for linear terms
    unshrunk_linear: bool = False  # exclude linear terms from the horseshoe

    def validate(self):
        if self.mu < 0 or self.eta < 0:
            raise DataError("mu and eta must be nonnegative")
        if not self.linear_A > 0:
            raise DataError("linear_A must be positive")


@dataclass
class AssembledPrior:
    A: np.ndarray  # (P,) half-Cauchy scales (ignored where not shrunk)
    shrunk: np.ndarray  # (P,) bool; False columns get fixed unit prior scale


def rule_prior_scale(support, length, mu: float = 1.0, eta: float = 2.0):
    """Half-Cauchy scale for a rule column:

        A = (2 * min(1 - s, s)) ** mu / l ** eta

    equal to 1 at (s=0.5, l=1) and shrinking with imbalance and length.
    Accepts scalars or arrays.
    """
    s = np.asarray(support, dtype=np.float64)
    l = np.asarray(length, dtype=np.float64)
    if np.any((s <= 0) | (s >= 1)):
        raise DataError("rule support must lie strictly between 0 and 1")
    if np.any(l < 1):
        raise DataError("rule length must be >= 1")
    out = (2.0 * np.minimum(1.0 - s, s)) ** mu / l**eta
    return float(out) if out.ndim == 0 else out


def assemble_prior(design, spec: PriorSpec) -> AssembledPrior:
    """Per-column scales for a DesignMatrix: linear_A on linear terms and
    the support/length formula on rules. With unshrunk_linear the linear
    columns keep a fixed N(0, sigma2) prior outside the horseshoe."""
    spec.validate()
    P = len(design.columns)
    A = np.empty(P)
    shrunk = np.ones(P, dtype=bool)
    for j, meta in enumerate(design.columns):
        if meta.kind == "linear":
            A[j] = spec.linear_A
            if spec.unshrunk_linear:
                shrunk[j] = False
        else:
            A[j] = rule_prior_scale(meta.support, meta.length, spec.mu, spec.eta)
    return AssembledPrior(A=A, shrunk=shrunk)


@dataclass
class PosteriorDraws:
    beta: np.ndarray  # (D, P), standardized scale
    sigma2: np.ndarray  # (D,)
    tau2: np.ndarray  # (D,)
    lambda2: np.ndarray | None  # (D, p_shrunk) when kept
    niter: int
    burnin: int
    thin: int
    seed: int


def _invgamma(rng, shape, rate, size=None):
    """InverseGamma(shape, rate) via rate / Gamma(shape, 1)."""
    g = rng.gamma(shape, 1.0, size=size)
    return rate / g


def _gram_rows(B):
    """B @ B.T for C-contiguous B (n, P), lower triangle valid (dsyrk)."""
    # B.T is Fortran-contiguous, so no copy is made.
    return sblas.dsyrk(1.0, B.T, trans=1, lower=1)


def draw_beta(Z, ys, sigma2, lamstar, rng, *, Zty=None, ZtZ=None, method="auto"):
    """Draw beta | rest ~ N(A^-1 Z' ys, sigma2 A^-1), A = Z'Z + diag(1/lamstar).

    method "chol" factors the (P, P) system; "fast" solves an (n, n) system
    instead, cheaper when P >> n. "auto" picks chol iff P <= 2n.
    """
    n, P = Z.shape
    if method == "auto":
        method = "chol" if P <= 2 * n else "fast"
    sigma = np.sqrt(sigma2)
    if method == "chol":
        if ZtZ is None:
            ZtZ = Z.T @ Z
        if Zty is None:
            Zty = Z.T @ ys
        Amat = ZtZ.copy()
        Amat.flat[:: P + 1] += 1.0 / lamstar
        try:
            L = scipy.linalg.cholesky(Amat, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NumericError(f"coefficient draw failed: {exc}") from exc
        mu = scipy.linalg.cho_solve((L, True), Zty, check_finite=False)
        z = rng.standard_normal(P)
        pert = scipy.linalg.solve_triangular(L, z, trans="T", lower=True, check_finite=False)
        return mu + sigma * pert
    if method == "fast":
        sl = np.sqrt(lamstar)
        u = sigma * sl * rng.standard_normal(P)
        v = (Z @ u) / sigma + rng.standard_normal(n)
        M = _gram_rows(Z * sl)
        M.flat[:: n + 1] += 1.0
        try:
            L = scipy.linalg.cholesky(M, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NumericError(f"coefficient draw failed: {exc}") from exc
        w = scipy.linalg.cho_solve((L, True), ys / sigma - v, check_finite=False)
        return u + sigma * (lamstar * (Z.T @ w))
    raise DataError(f"unknown beta draw method {method!r}")


def draw_sigma2(rng, resid, beta, lamstar):
    """sigma2 | rest ~ InvGamma((n + P)/2, (||resid||^2 + sum beta^2/lamstar)/2)."""
    n = len(resid)
    P = len(beta)
    rate = 0.5 * (float(resid @ resid) + float(np.sum(beta * beta / lamstar)))
    return float(_invgamma(rng, 0.5 * (n + P), max(rate, _CLIP_LO)))


def draw_lambda2(rng, beta, nu, tau2, sigma2):
    """lambda_j2 | rest ~ InvGamma(1, 1/nu_j + beta_j^2 / (2 tau2 sigma2))."""
    rate = 1.0 / nu + beta * beta / (2.0 * tau2 * sigma2)
    out = _invgamma(rng, 1.0, np.maximum(rate, _CLIP_LO), size=len(beta))
    return np.clip(out, _CLIP_LO, _CLIP_HI)


def draw_tau2(rng, beta, lambda2, sigma2, rho):
    """tau2 | rest ~ InvGamma((p + 1)/2, 1/rho + sum(beta_j^2/lambda_j2) / (2 sigma2))."""
    p = len(beta)
    rate = 1.0 / rho + float(np.sum(beta * beta / lambda2)) / (2.0 * sigma2)
    out = float(_invgamma(rng, 0.5 * (p + 1), max(rate, _CLIP_LO)))
    return min(max(out, _CLIP_LO), _CLIP_HI)


def draw_nu(rng, lambda2, A):
    """nu_j | rest ~ InvGamma(1, 1/A_j^2 + 1/lambda_j2)."""
    rate = 1.0 / (A * A) + 1.0 / lambda2
    out = _invgamma(rng, 1.0, np.maximum(rate, _CLIP_LO), size=len(lambda2))
    return np.clip(out, _CLIP_LO, _CLIP_HI)


def draw_rho(rng, tau2):
    """rho | rest ~ InvGamma(1, 1 + 1/tau2)."""
    out = float(_invgamma(rng, 1.0, 1.0 + 1.0 / tau2))
    return min(max(out, _CLIP_LO), _CLIP_HI)


def gibbs_run(design, ys, prior: AssembledPrior, niter=1000, burnin=100, thin=1,
              seed=0, keep_lambda=False, progress=None) -> PosteriorDraws:
    """Run the blocked Gibbs sampler and return retained draws.

    design may be a DesignMatrix or a plain (n, P) array. Iterations
    burnin+thin, burnin+2*thin, ... are retained, floor((niter-burnin)/thin)
    in total. All state starts at 1 (beta at 0). progress, when given, is
    called as progress(iteration, niter) every 100 iterations.
    """
    Z = design.Z if hasattr(design, "Z") else np.asarray(design, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if Z.ndim != 2:
        raise DataError("design must be 2-dimensional")
    n, P = Z.shape
    if ys.shape != (n,):
        raise DataError("ys length does not match design rows")
    if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(ys))):
        raise NumericError("design or response contains non-finite values")
    if burnin < 0 or niter <= burnin:
        raise DataError("need niter > burnin >= 0")
    if thin < 1:
        raise DataError("thin must be >= 1")
    n_keep = (niter - burnin) // thin
    if n_keep < 1:
        raise DataError("no draws would be retained; lower thin or raise niter")
    A = np.asarray(prior.A, dtype=np.float64)
    shrunk = np.asarray(prior.shrunk, dtype=bool)
    if A.shape != (P,) or shrunk.shape != (P,):
        raise DataError("prior size does not match design columns")
    if not np.all(A[shrunk] > 0):
        raise DataError("prior scales must be positive")

    p_sh = int(shrunk.sum())
    A_sh = A[shrunk]
    unshrunk = ~shrunk

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    method = "chol" if P <= 2 * n else "fast"
    Zty = Z.T @ ys
    ZtZ = Z.T @ Z if method == "chol" else None

    beta = np.zeros(P)
    sigma2 = 1.0
    lam2 = np.ones(p_sh)
    tau2 = 1.0
    nu = np.ones(p_sh)
    rho = 1.0
    lamstar = np.empty(P)

    beta_out = np.empty((n_keep, P))
    sigma2_out = np.empty(n_keep)
    tau2_out = np.empty(n_keep)
    lam2_out = np.empty((n_keep, p_sh)) if keep_lambda else None

    d = 0
    for it in range(1, niter + 1):
        lamstar[shrunk] = np.clip(tau2 * lam2, _CLIP_LO, _CLIP_HI)
        if p_sh < P:
            lamstar[unshrunk] = 1.0
        beta = draw_beta(Z, ys, sigma2, lamstar, rng, Zty=Zty, ZtZ=ZtZ, method=method)
        resid = ys - Z @ beta
        sigma2 = draw_sigma2(rng, resid, beta, lamstar)
        b_sh = beta[shrunk]
        if p_sh:
            lam2 = draw_lambda2(rng, b_sh, nu, tau2, sigma2)
            tau2 = draw_tau2(rng, b_sh, lam2, sigma2, rho)
            nu = draw_nu(rng, lam2, A_sh)
            rho = draw_rho(rng, tau2)
        if it > burnin and (it - burnin) % thin == 0:
            beta_out[d] = beta
            sigma2_out[d] = sigma2
            tau2_out[d] = tau2
            if keep_lambda:
                lam2_out[d] = lam2
            d += 1
        if progress is not None and it % 100 == 0:
            progress(it, niter)

    if not (np.all(np.isfinite(beta_out)) and np.all(np.isfinite(sigma2_out))):
        raise NumericError("sampler produced non-finite draws")
    return PosteriorDraws(
        beta=beta_out, sigma2=sigma2_out, tau2=tau2_out, lambda2=lam2_out,
        niter=niter, burnin=burnin, thin=thin, seed=int(seed),
    )
