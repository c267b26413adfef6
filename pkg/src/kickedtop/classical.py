"""Classical kicked-top map, Gaussian ensembles, noisy rotor and cat maps.

Points on the unit sphere are arrays with a trailing axis of length 3
holding ``(X, Y, Z) = J / j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc, norm

from .errors import DomainError


def classical_map_step(points: np.ndarray, k: float) -> np.ndarray:
    """One application of the kicked-top map (rotation by pi/2 about y, then twist)."""
    x, y, z = np.moveaxis(np.asarray(points, dtype=float), -1, 0)
    c, s = np.cos(k * z), np.sin(k * z)
    return np.stack((z, y * c + x * s, -x * c + y * s), axis=-1)


def classical_map_inverse(points: np.ndarray, k: float) -> np.ndarray:
    xn, yn, zn = np.moveaxis(np.asarray(points, dtype=float), -1, 0)
    c, s = np.cos(k * xn), np.sin(k * xn)
    return np.stack((s * yn - c * zn, c * yn + s * zn, xn), axis=-1)


def iterate_map(points: np.ndarray, k: float, n: int) -> np.ndarray:
    for _ in range(n):
        points = classical_map_step(points, k)
    return points


def angles_to_point(theta, phi) -> np.ndarray:
    theta, phi = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    return np.stack((np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)), axis=-1)


def point_to_angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, y, z = np.moveaxis(np.asarray(points, dtype=float), -1, 0)
    return np.arccos(np.clip(z, -1, 1)), np.arctan2(y, x)


@dataclass(frozen=True)
class ClassicalEnsemble:
    points: np.ndarray
    center: tuple[float, float]
    sigma: float

    def evolve(self, k: float, n: int = 1) -> "ClassicalEnsemble":
        return ClassicalEnsemble(iterate_map(self.points, k, n), self.center, self.sigma)


def _gaussian_offsets(count: int, seed: int, method: str) -> np.ndarray:
    if method == "random":
        return np.random.default_rng(seed).standard_normal((count, 2))
    if method == "sobol":
        # scrambled Sobol points pushed through the normal quantile
        m = int(np.ceil(np.log2(count)))
        u = qmc.Sobol(d=2, scramble=True, seed=seed).random_base2(m)[:count]
        return norm.ppf(np.clip(u, 1e-16, 1 - 1e-16))
    raise DomainError(f"unknown sampling method {method!r}")


def sample_gaussian_ensemble(theta0: float, phi0: float, sigma: float, count: int,
                             seed: int = 0, method: str = "random",
                             frame: str = "tangent") -> ClassicalEnsemble:
    """Gaussian cloud of width ``sigma`` around ``(theta0, phi0)``.

    ``frame="tangent"`` draws offsets along the unit vectors ``e_theta`` and
    ``e_phi`` and maps them onto the sphere with the exponential map, giving
    an isotropic cloud (the classical image of a spin coherent state when
    ``sigma = 1/sqrt(2j)``). ``frame="angles"`` adds the offsets directly to
    ``theta`` (clipped to ``[0, pi]``) and ``phi`` (wrapped), which squeezes
    the cloud along ``e_phi`` by ``sin(theta0)``.

    ``method="sobol"`` replaces pseudo-random draws with a scrambled
    low-discrepancy design.
    """
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if count < 1:
        raise DomainError("count must be >= 1")
    off = sigma * _gaussian_offsets(count, seed, method)
    if frame == "angles":
        theta = np.clip(theta0 + off[:, 0], 0.0, np.pi)
        phi = np.angle(np.exp(1j * (phi0 + off[:, 1])))
        pts = angles_to_point(theta, phi)
    elif frame == "tangent":
        x0 = angles_to_point(theta0, phi0)
        e_theta = np.array([np.cos(theta0) * np.cos(phi0), np.cos(theta0) * np.sin(phi0),
                            -np.sin(theta0)])
        e_phi = np.array([-np.sin(phi0), np.cos(phi0), 0.0])
        v = off[:, :1] * e_theta + off[:, 1:] * e_phi
        r = np.linalg.norm(v, axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            direction = np.where(r > 0, v / r, 0.0)
        pts = np.cos(r) * x0 + np.sin(r) * direction
    else:
        raise DomainError(f"unknown frame {frame!r}")
    return ClassicalEnsemble(pts, (theta0, phi0), sigma)


def classical_linear_entropy(ensemble) -> float:
    """Half the summed coordinate variances of the ensemble."""
    pts = ensemble.points if isinstance(ensemble, ClassicalEnsemble) else np.asarray(ensemble)
    if pts.shape[0] == 0:
        raise DomainError("empty ensemble")
    return 0.5 * float(np.sum(np.var(pts, axis=0)))


def classical_entropy_trajectory(ensemble: ClassicalEnsemble, k: float, n: int) -> np.ndarray:
    """``S_cl`` after each of ``0..n`` map iterations."""
    pts = ensemble.points
    out = np.empty(n + 1)
    for t in range(n + 1):
        out[t] = classical_linear_entropy(pts)
        pts = classical_map_step(pts, k)
    return out


# ---- periodic orbits --------------------------------------------------------

def _tangent_frame(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(p, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(p, e1)


def find_periodic_orbit(k: float, theta: float, phi: float, period: int,
                        tol: float = 1e-10, max_nfev: int = 200):
    """Refine a guess into a periodic orbit of the given period.

    Solves ``F^period(x) = x`` by least squares in the tangent plane of the
    guess. Returns the ``period`` orbit points as a ``(period, 3)`` array, or
    ``None`` when the residual does not drop below ``tol``.
    """
    if period < 1:
        raise DomainError("period must be >= 1")
    x0 = angles_to_point(theta, phi)
    e1, e2 = _tangent_frame(x0)

    def lift(uv):
        x = x0 + uv[0] * e1 + uv[1] * e2
        return x / np.linalg.norm(x)

    def residual(uv):
        x = lift(uv)
        return iterate_map(x, k, period) - x

    if np.linalg.norm(residual(np.zeros(2))) < tol:
        x = x0
    else:
        sol = least_squares(residual, np.zeros(2), xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=max_nfev, method="lm")
        x = lift(sol.x)
    if np.linalg.norm(iterate_map(x, k, period) - x) >= tol:
        return None
    orbit = [x]
    for _ in range(period - 1):
        orbit.append(classical_map_step(orbit[-1], k))
    return np.array(orbit)


# ---- noisy rotor ------------------------------------------------------------

@dataclass(frozen=True)
class NoisyRotor:
    """Linearized rotor ``theta(t) = theta0 + (omega + omega' (I - I0)) t + eta(t)``.

    ``theta0`` and ``I - I0`` are Gaussian with width ``sigma``; ``eta`` is the
    sum of per-kick i.i.d. Gaussian increments of variance ``D``.
    """

    omega: float
    omega_prime: float
    sigma: float
    D: float = 0.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("sigma must be positive")
        if self.D < 0:
            raise DomainError("D must be >= 0")


def _variance_stderr(samples: np.ndarray) -> tuple[float, float]:
    n = samples.size
    c = samples - samples.mean()
    m2 = np.mean(c**2)
    m4 = np.mean(c**4)
    var = m2 * n / (n - 1)
    return float(var), float(np.sqrt(max(m4 - m2**2 * (n - 3) / (n - 1), 0.0) / n))


def noisy_rotor_mc(model: NoisyRotor, f: Callable[[np.ndarray], np.ndarray], t, trials: int,
                   seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of ``var f(theta(t))`` and its standard error.

    ``t`` may be a scalar or an array. With ``D > 0`` the times must be
    nonnegative integers (kick counts) since the noise accumulates per kick.
    """
    if trials < 2:
        raise DomainError("need at least two trials")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    rng = np.random.default_rng(seed)
    theta0 = model.sigma * rng.standard_normal(trials)
    freq = model.omega + model.omega_prime * model.sigma * rng.standard_normal(trials)
    est = np.empty(times.size)
    err = np.empty(times.size)
    if model.D == 0:
        for i, ti in enumerate(times):
            est[i], err[i] = _variance_stderr(f(theta0 + freq * ti))
    else:
        if np.any(times < 0) or np.any(times != np.round(times)):
            raise DomainError("with noise, times must be integer kick counts")
        order = np.argsort(times)
        eta = np.zeros(trials)
        step = 0
        for i in order:
            while step < times[i]:
                eta += np.sqrt(model.D) * rng.standard_normal(trials)
                step += 1
            est[i], err[i] = _variance_stderr(f(theta0 + freq * times[i] + eta))
    if np.ndim(t) == 0:
        return est[0], err[0]
    return est, err


# ---- cat maps ---------------------------------------------------------------

@dataclass(frozen=True)
class CatMap:
    """Integer torus automorphism ``[[a, b], [c, d]]`` with unit determinant."""

    a: int = 2
    b: int = 1
    c: int = 1
    d: int = 1

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise DomainError("cat map must have determinant 1")

    @property
    def chaotic(self) -> bool:
        return abs(self.a + self.d) > 2

    def power(self, n: int) -> tuple[int, int, int, int]:
        """Exact entries ``(a_n, b_n, c_n, d_n)`` of the ``n``-th matrix power."""
        if n < 0:
            raise DomainError("n must be >= 0")
        result = (1, 0, 0, 1)
        base = (self.a, self.b, self.c, self.d)
        while n:
            if n & 1:
                result = _matmul2(result, base)
            base = _matmul2(base, base)
            n >>= 1
        return result

    def step(self, q: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.mod(self.a * q + self.b * p, 1.0), np.mod(self.c * q + self.d * p, 1.0)


def _matmul2(m1, m2):
    a1, b1, c1, d1 = m1
    a2, b2, c2, d2 = m2
    return (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2, c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)


def cat_map_variance(cat: CatMap, n: int, sigma: float, q0: float) -> float:
    """Closed-form ``var cos(2 pi q_n)`` for a Gaussian cloud at ``(q0, 0)``.

    ``a_n`` and ``c_n`` are exact integers; ``2 q0 a_n mod 1`` is reduced in
    rational arithmetic so that large powers keep full precision.
    """
    a_n, _, c_n, _ = cat.power(n)
    growth = a_n * a_n + c_n * c_n
    expo = 4 * np.pi**2 * sigma**2 * growth if growth < 10**300 else np.inf
    damp = np.exp(-expo)
    phase = float((2 * Fraction(q0) * a_n) % 1)
    return 0.5 * (1 - damp) * (1 - np.cos(2 * np.pi * phase) * damp)


def cat_map_mc_variance(cat: CatMap, n: int, sigma: float, q0: float, count: int,
                        seed: int = 0, p0: float = 0.0) -> tuple[float, float]:
    """Monte Carlo ``var cos(2 pi q_n)`` with its standard error (map iterated mod 1)."""
    rng = np.random.default_rng(seed)
    q = np.mod(q0 + sigma * rng.standard_normal(count), 1.0)
    p = np.mod(p0 + sigma * rng.standard_normal(count), 1.0)
    for _ in range(n):
        q, p = cat.step(q, p)
    return _variance_stderr(np.cos(2 * np.pi * q))
