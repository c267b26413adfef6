"""Closed-form entanglement-growth models and least-squares fitting.

The three fit models are scikit-learn regressors: ``fit(n, S)`` takes kick
numbers and entropies, ``predict(n)`` evaluates the fitted curve, and
``get_params``/``set_params``/``clone`` work as usual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, column_or_1d

from .errors import DomainError


def regular_model(n, S_inf: float, alpha: float, N: int):
    """``S_inf (1 - exp(-alpha n^2 / N))``: entropy growth for regular dynamics."""
    n = np.asarray(n, dtype=float)
    return S_inf * (1.0 - np.exp(-alpha * n**2 / N))


def _spread(t, omega_prime, sigma):
    t = np.asarray(t, dtype=float)
    return sigma**2 * (omega_prime**2 * t**2 + 1.0)


def integrable_var(t, omega: float, omega_prime: float, sigma: float):
    """Variance of ``cos(theta)`` for a Gaussian cloud on sheared tori."""
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    t = np.asarray(t, dtype=float)
    e = np.exp(-_spread(t, omega_prime, sigma))
    return 0.5 * (1 - e) * (1 - e * np.cos(2 * omega * t))


def noisy_var(t, omega: float, omega_prime: float, sigma: float, D: float,
              second_sign: int = -1):
    """Variance of ``cos(theta)`` with accumulated angle noise of rate ``D``.

    ``second_sign=-1`` is the self-consistent form (it reduces to
    :func:`integrable_var` at ``D = 0`` and follows from the Fourier
    average). ``second_sign=+1`` evaluates the alternative with
    ``exp(+sigma^2 (1 + omega'^2 t^2))`` in the oscillating factor, kept for
    comparison against Monte Carlo; it is unbounded in ``t``.
    """
    if D < 0:
        raise DomainError("D must be >= 0")
    if second_sign not in (1, -1):
        raise DomainError("second_sign must be +1 or -1")
    t = np.asarray(t, dtype=float)
    s = _spread(t, omega_prime, sigma)
    noise = np.exp(-D * t)
    first = 1 - noise * np.exp(-s)
    second = 1 - noise * np.exp(second_sign * s) * np.cos(2 * omega * t)
    return 0.5 * first * second


def fourier_average(t, coeffs, omega: float, omega_prime: float, sigma: float,
                    D: float = 0.0, tol: float = 1e-12):
    """Ensemble average of ``f(theta) = sum_k f_k exp(-i k theta)``.

    Parameters
    ----------
    t : float or array
    coeffs : mapping ``{k: f_k}`` or sequence of length ``2K+1`` for ``k = -K..K``
    omega, omega_prime, sigma : rotor frequency, shear and cloud width
    D : angle diffusion per kick
    tol : tail tolerance for the convergence flag

    Returns
    -------
    value : complex array shaped like ``t``
    converged : bool
        ``True`` when the Gaussian-damped tail beyond the supplied modes,
        bounded with the largest supplied ``|f_k|``, is below ``tol``.
    """
    if isinstance(coeffs, dict):
        ks = np.array(sorted(coeffs), dtype=int)
        fk = np.array([coeffs[k] for k in ks], dtype=complex)
    else:
        fk = np.asarray(coeffs, dtype=complex)
        if fk.ndim != 1 or fk.size % 2 != 1:
            raise DomainError("coefficient sequence must have odd length 2K+1")
        K = fk.size // 2
        ks = np.arange(-K, K + 1)
    if not np.all(np.isfinite(fk)):
        raise DomainError("Fourier coefficients must be finite")
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    damping = np.exp(-0.5 * ks**2 * (_spread(tt, omega_prime, sigma) + D * tt))
    value = np.sum(fk * np.exp(-1j * ks * omega * tt) * damping, axis=-1)
    kmax = int(np.max(np.abs(ks)))
    bound = np.max(np.abs(fk)) if fk.size else 0.0
    tail_k = np.arange(kmax + 1, kmax + 1 + 10**5)
    tail = 2 * bound * np.sum(np.exp(-0.5 * tail_k**2 * sigma**2))
    return value, bool(tail <= tol)


def equilibration_time(omega_prime: float, sigma: float) -> float:
    """Time at which the first-harmonic envelope ``exp(-s/2)`` reaches ``1/e``."""
    return float(np.sqrt(max(2 / (sigma**2 * omega_prime**2) - 1 / omega_prime**2, 0.0)))


def chaotic_var(t, alpha: float, lam: float, sigma2: float):
    """``(1 - exp(-alpha sigma^2 e^{2 lambda t})) / 2``: chaotic equilibration."""
    t = np.asarray(t, dtype=float)
    # e^{2 lam t} may overflow to inf, which correctly saturates at 1/2
    with np.errstate(over="ignore"):
        return 0.5 * (1 - np.exp(-alpha * sigma2 * np.exp(2 * lam * t)))


def chaotic_saturation_time(alpha: float, lam: float, sigma2: float) -> float:
    """Time at which ``alpha sigma^2 e^{2 lambda t} = 1`` (the log-time)."""
    return float(np.log(1 / (alpha * sigma2)) / (2 * lam))


def noisy_growth_model(n, S0: float, D: float, alpha: float):
    """``S0 (1 - e^{-D n} e^{-alpha n^2})``."""
    n = np.asarray(n, dtype=float)
    return S0 * (1 - np.exp(-D * n) * np.exp(-alpha * n**2))


# ---- fitting ------------------------------------------------------------------

@dataclass
class FitResult:
    params: dict
    rss: float
    converged: bool
    n_iter: int
    max_residual: float = field(default=np.nan)


_MODELS = {
    "regular": (("S_inf", "alpha"), lambda n, S_inf, alpha, N: regular_model(n, S_inf, alpha, N)),
    "chaotic": (("alpha", "lam"), lambda n, alpha, lam, sigma2: chaotic_var(n, alpha, lam, sigma2)),
    "noisy": (("S0", "D", "alpha"), lambda n, S0, D, alpha: noisy_growth_model(n, S0, D, alpha)),
}


def fit_curve(kind: str, n, S, initial_guess: dict, fixed: dict | None = None,
              rtol: float = 1e-8, max_iter: int = 10**4) -> FitResult:
    """Least-squares fit of one of the growth models by Nelder-Mead.

    Parameters are searched relative to ``initial_guess`` so the simplex
    tolerance ``rtol`` acts as a relative parameter change. All points carry
    equal weight and parameters are kept nonnegative. Non-convergence is
    reported through ``converged``; the best point found is returned
    regardless.

    ``fixed`` supplies non-fitted constants: ``N`` for ``"regular"``,
    ``sigma2`` for ``"chaotic"``.
    """
    if kind not in _MODELS:
        raise DomainError(f"unknown model kind {kind!r}")
    names, func = _MODELS[kind]
    n = np.asarray(n, dtype=float)
    S = np.asarray(S, dtype=float)
    if n.size < 5 or n.shape != S.shape:
        raise DomainError("need at least 5 (n, S) pairs of matching shape")
    fixed = dict(fixed or {})
    scale = np.array([float(initial_guess[k]) for k in names])
    scale[scale == 0] = 1.0

    def cost(u):
        resid = func(n, *(u * scale), **fixed) - S
        return float(resid @ resid)

    # cost tolerance tied to the data scale; the relative step test decides
    fatol = 1e-16 * max(float(S @ S), 1e-300)
    # every model parameter is a rate or an amplitude, so the search stays >= 0
    res = minimize(cost, np.ones(len(names)), method="Nelder-Mead",
                   bounds=[(0.0, None)] * len(names), options={"xatol": rtol, "fatol": fatol, "maxiter": max_iter,
                            "maxfev": 4 * max_iter})
    best = res.x * scale
    params = dict(zip(names, best))
    resid = func(n, *best, **fixed) - S
    return FitResult(params=params, rss=float(resid @ resid), converged=bool(res.success),
                     n_iter=int(res.nit), max_residual=float(np.max(np.abs(resid))))


class _GrowthFit(RegressorMixin, BaseEstimator):
    _kind = ""

    def _fixed(self) -> dict:
        return {}

    def _guess(self) -> dict:
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_X_y(np.reshape(np.asarray(X, dtype=float), (-1, 1)), y, y_numeric=True)
        result = fit_curve(self._kind, X[:, 0], y, self._guess(), fixed=self._fixed(),
                           rtol=self.rtol, max_iter=self.max_iter)
        for name, value in result.params.items():
            setattr(self, name + "_", value)
        self.rss_ = result.rss
        self.converged_ = result.converged
        self.n_iter_ = result.n_iter
        self.max_residual_ = result.max_residual
        return self

    def predict(self, X):
        check_is_fitted(self, "rss_")
        n = column_or_1d(np.asarray(X, dtype=float).reshape(-1))
        return self._evaluate(n)


class RegularGrowth(_GrowthFit):
    """Fit ``S_inf (1 - exp(-alpha n^2/N))`` with ``N`` held fixed."""

    _kind = "regular"

    def __init__(self, N=100, S_inf=0.3, alpha=0.2, rtol=1e-8, max_iter=10**4):
        self.N = N
        self.S_inf = S_inf
        self.alpha = alpha
        self.rtol = rtol
        self.max_iter = max_iter

    def _fixed(self):
        return {"N": self.N}

    def _guess(self):
        return {"S_inf": self.S_inf, "alpha": self.alpha}

    def _evaluate(self, n):
        return regular_model(n, self.S_inf_, self.alpha_, self.N)


class ChaoticGrowth(_GrowthFit):
    """Fit ``(1 - exp(-alpha sigma2 e^{2 lam n}))/2``; ``sigma2`` defaults to ``1/N``."""

    _kind = "chaotic"

    def __init__(self, N=1000, sigma2=None, alpha=1.0, lam=0.5, rtol=1e-8, max_iter=10**4):
        self.N = N
        self.sigma2 = sigma2
        self.alpha = alpha
        self.lam = lam
        self.rtol = rtol
        self.max_iter = max_iter

    def _sigma2(self):
        return 1.0 / self.N if self.sigma2 is None else self.sigma2

    def _fixed(self):
        return {"sigma2": self._sigma2()}

    def _guess(self):
        return {"alpha": self.alpha, "lam": self.lam}

    def _evaluate(self, n):
        return chaotic_var(n, self.alpha_, self.lam_, self._sigma2())

    def saturation_time(self) -> float:
        check_is_fitted(self, "rss_")
        return chaotic_saturation_time(self.alpha_, self.lam_, self._sigma2())


class NoisyGrowth(_GrowthFit):
    """Fit ``S0 (1 - e^{-D n} e^{-alpha n^2})``."""

    _kind = "noisy"

    def __init__(self, S0=0.5, D=0.01, alpha=0.001, rtol=1e-8, max_iter=10**4):
        self.S0 = S0
        self.D = D
        self.alpha = alpha
        self.rtol = rtol
        self.max_iter = max_iter

    def _guess(self):
        return {"S0": self.S0, "D": self.D, "alpha": self.alpha}

    def _evaluate(self, n):
        return noisy_growth_model(n, self.S0_, self.D_, self.alpha_)
