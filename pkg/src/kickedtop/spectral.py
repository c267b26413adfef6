"""Quasienergy spectra, unfolding and nearest-neighbour spacing statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import kstest, unitary_group
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DomainError

POISSON = "poisson"
COE = "coe"

MIN_LEVELS = 50


def eigenangles(U: np.ndarray, atol: float = 1e-8) -> np.ndarray:
    """Sorted eigenphases in ``(-pi, pi]`` of a dense unitary."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DomainError("expected a square matrix")
    defect = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])), initial=0.0)
    if defect > atol:
        raise DomainError(f"matrix is not unitary (max |U^dag U - 1| = {defect:.2e})")
    lam = np.linalg.eigvals(U)
    if np.any(np.abs(np.abs(lam) - 1) > atol):
        raise DomainError("eigenvalue off the unit circle")
    theta = np.angle(lam)
    theta[theta <= -np.pi] += 2 * np.pi
    return np.sort(theta)


def _collapse(angles: np.ndarray, tol: float) -> np.ndarray:
    keep = np.concatenate(([True], np.diff(angles) > tol))
    return angles[keep]


def smoothed_staircase(angles: np.ndarray, at: np.ndarray, window: int = 10,
                       periodic: bool = True) -> np.ndarray:
    """Gaussian-smoothed level counting function evaluated at ``at``.

    Level ``j`` contributes ``Phi((x - theta_j) / h_j)`` where ``h_j`` is half
    the distance spanned by the ``window`` levels around it, so the kernel
    follows the local level density. With ``periodic`` the levels are
    continued by ``2 pi`` on both sides. The value at ``x`` is offset by a
    constant that cancels in differences.
    """
    theta = np.sort(np.asarray(angles, dtype=float))
    M = theta.size
    half = max(window // 2, 1)
    # levels further than ``span`` ranks away contribute a plain step
    span = 10 * half
    if periodic:
        pad = min(span + half, M)
        ext = np.concatenate((theta[M - pad:] - 2 * np.pi, theta, theta[:pad] + 2 * np.pi))
        first = pad
    else:
        ext = theta
        first = 0
    idx = np.arange(ext.size)
    lo = np.clip(idx - half, 0, ext.size - 1)
    hi = np.clip(idx + half, 0, ext.size - 1)
    width = 0.5 * (ext[hi] - ext[lo])
    positive = width[width > 0]
    floor = positive.min() if positive.size else 1.0
    width = np.maximum(width, 1e-3 * floor)

    at = np.asarray(at, dtype=float)
    # rank of each evaluation point among the extended levels
    rank = np.searchsorted(ext, at, side="right")
    out = rank.astype(float)
    for d in range(-span, span + 1):
        j = rank - 1 + d
        ok = (j >= 0) & (j < ext.size)
        jj = np.where(ok, j, 0)
        phi = ndtr((at - ext[jj]) / width[jj])
        step = (j < rank).astype(float)
        out += np.where(ok, phi - step, 0.0)
    return out - first


def unfold(angles, window: int = 10, periodic: bool = True,
           collapse_degenerate: bool = False, degenerate_tol: float = 1e-10) -> np.ndarray:
    """Unfolded nearest-neighbour spacings with unit mean.

    Angles are mapped through :func:`smoothed_staircase` and consecutive
    differences rescaled to mean one. With ``periodic`` the wrap-around
    spacing from the largest angle back to the smallest is included, so a
    spectrum of ``M`` levels gives ``M`` spacings; otherwise ``M - 1``.
    Near-degenerate levels are kept unless ``collapse_degenerate``.
    """
    theta = np.sort(np.asarray(angles, dtype=float).ravel())
    if collapse_degenerate:
        theta = _collapse(theta, degenerate_tol)
        if periodic and theta.size > 1 and theta[0] + 2 * np.pi - theta[-1] <= degenerate_tol:
            theta = theta[1:]
    if theta.size < MIN_LEVELS:
        raise DomainError(f"need at least {MIN_LEVELS} levels to unfold, got {theta.size}")
    points = np.append(theta, theta[0] + 2 * np.pi) if periodic else theta
    staircase = smoothed_staircase(theta, points, window=window, periodic=periodic)
    s = np.diff(staircase)
    if np.any(s < 0):
        s = np.maximum(s, 0.0)
    return s / s.mean()


class Unfolder(TransformerMixin, BaseEstimator):
    """Transformer wrapping :func:`unfold` for use in sklearn pipelines.

    ``transform`` takes a sequence of spectra (one array of angles each) and
    returns the pooled unit-mean spacings. Nothing is learned in ``fit``.
    """

    def __init__(self, window=10, periodic=True, collapse_degenerate=False):
        self.window = window
        self.periodic = periodic
        self.collapse_degenerate = collapse_degenerate

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        if isinstance(X, np.ndarray):
            spectra = [X] if X.ndim == 1 else list(X)
        else:
            # spectra may differ in length, so never stack them
            spectra = list(X)
            if spectra and np.isscalar(spectra[0]):
                spectra = [np.asarray(spectra, dtype=float)]
        return np.concatenate([
            unfold(a, window=self.window, periodic=self.periodic,
                   collapse_degenerate=self.collapse_degenerate)
            for a in spectra])


def reference_pdf(kind: str, s):
    """Spacing density: ``exp(-s)`` for Poisson, the Wigner surmise for COE."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("spacings must be >= 0")
    if kind == POISSON:
        return np.exp(-s)
    if kind == COE:
        return 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s**2)
    raise DomainError(f"unknown reference {kind!r}")


def reference_cdf(kind: str, s):
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    if kind == POISSON:
        return -np.expm1(-s)
    if kind == COE:
        return -np.expm1(-0.25 * np.pi * s**2)
    raise DomainError(f"unknown reference {kind!r}")


def ks_distance(samples, kind: str) -> float:
    """Kolmogorov-Smirnov distance between sample spacings and a reference."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise DomainError("no samples")
    return float(kstest(samples, lambda x: reference_cdf(kind, x)).statistic)


def eigenangle_density(angles, bins: int = 50):
    """Normalized histogram of eigenangles over ``(-pi, pi]``.

    Returns ``(edges, density)`` with ``sum(density * widths) = 1``.
    """
    if bins < 10:
        raise DomainError("bins must be >= 10")
    density, edges = np.histogram(np.asarray(angles, dtype=float).ravel(), bins=bins,
                                  range=(-np.pi, np.pi), density=True)
    return edges, density


@dataclass(frozen=True)
class SpacingHistogram:
    """Normalized spacing histogram (default 50 bins on ``[0, 4]``)."""

    edges: np.ndarray
    density: np.ndarray
    count: int
    mean_spacing: float

    @classmethod
    def from_spacings(cls, spacings, bins: int = 50, s_max: float = 4.0):
        s = np.asarray(spacings, dtype=float).ravel()
        if s.size == 0:
            raise DomainError("no spacings")
        edges = np.linspace(0.0, s_max, bins + 1)
        counts, _ = np.histogram(s, bins=edges)
        inside = counts.sum()
        density = counts / (inside * np.diff(edges)) if inside else np.zeros(bins)
        return cls(edges=edges, density=density, count=int(s.size), mean_spacing=float(s.mean()))

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def integral(self) -> float:
        return float(np.sum(self.density * np.diff(self.edges)))


def sample_coe(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a COE matrix as ``V^T V`` with ``V`` Haar-distributed."""
    V = unitary_group.rvs(dim, random_state=rng)
    return V.T @ V
