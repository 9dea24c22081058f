"""Synthetic long-range dependent series with an injected level shift.

Fractional Gaussian noise is drawn exactly by circulant embedding of its
autocovariance (Davies & Harte 1987; Wood & Chan 1994).  Non-Gaussian
margins are obtained by a pointwise transform of the Gaussian sequence.
"""

from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import log_ndtr

from .estimators import floor_frac

GAUSSIAN = "gaussian"
PARETO = "pareto"

# Relative tolerance for negative circulant eigenvalues caused by rounding.
_EIG_RTOL = 1e-10
_LOG_MAX = np.log(np.finfo(float).max)


def fgn_autocov(k, H):
    """Autocovariance of unit-variance fGn at lag ``k``.

    ``0.5 * (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})``; for large k this
    behaves like ``H(2H-1) k^{2H-2}``.
    """
    k = np.abs(np.asarray(k, dtype=float))
    h2 = 2.0 * H
    out = 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k ** h2 + np.abs(k - 1) ** h2)
    return float(out) if out.ndim == 0 else out


def _check_hurst(H):
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst index must lie in (0, 1), got {H}")


@lru_cache(maxsize=64)
def _circulant_sqrt(n, H):
    """sqrt(eigenvalues / m) of the 2n-circulant embedding of the fGn covariance."""
    m = 2 * n
    lags = np.arange(n + 1)
    gamma = fgn_autocov(lags, H)
    row = np.concatenate([gamma, gamma[-2:0:-1]])  # length 2n
    eig = np.fft.fft(row).real
    floor = -_EIG_RTOL * eig.max()
    if eig.min() < floor:
        j = int(np.argmin(eig))
        raise ArithmeticError(
            f"circulant embedding not nonnegative for n={n}, H={H}: "
            f"eigenvalue {j} = {eig[j]:.3e}"
        )
    scale = np.sqrt(np.maximum(eig, 0.0) / m)
    scale.setflags(write=False)
    return scale


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def generate_fgn(n, H, seed=None):
    """Draw ``n`` values of zero-mean, unit-variance fractional Gaussian noise.

    Parameters
    ----------
    n : int
        Length of the series.
    H : float
        Hurst index in (0, 1).
    seed : int, SeedSequence or Generator
        Anything accepted by ``numpy.random.PCG64``; the same seed always
        yields the same series.

    Returns
    -------
    numpy.ndarray of shape (n,)
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    _check_hurst(H)
    rng = _rng(seed)
    scale = _circulant_sqrt(int(n), float(H))
    m = scale.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    # real and imaginary parts are each exact draws; keep the real part
    return np.fft.fft(scale * z)[:n].real


def fbm_two_sided(M_steps, H, step, seed=None):
    """Two-sided fractional Brownian motion on ``step * [-M_steps, M_steps]``.

    One fGn path of length 2*M_steps is cumulated and re-anchored at the
    midpoint, so increments are stationary across s = 0.
    """
    increments = generate_fgn(2 * M_steps, H, seed) * step ** H
    path = np.concatenate([[0.0], np.cumsum(increments)])
    return path - path[M_steps]


def pareto_transform(t, beta=3.0, k=1.0):
    """Standardized Pareto(beta, k) value of a standard normal input.

    ``G(t) = sd^{-1} (k * Phi(t)^{-1/beta} - mean)`` with mean
    ``beta k / (beta - 1)`` and variance ``beta k^2 / ((beta-1)^2 (beta-2))``.
    G is strictly decreasing.  ``Phi(t)^{-1/beta}`` is evaluated as
    ``exp(-log Phi(t) / beta)`` with scipy's ``log_ndtr``, which switches to
    the asymptotic tail expansion for very negative t, so nothing underflows;
    the exponent is capped at log(float max) so extreme inputs saturate at a
    large finite value instead of inf.
    """
    if not beta > 2.0:
        raise ValueError(f"beta must exceed 2 for a finite variance, got {beta}")
    if not k > 0.0:
        raise ValueError(f"k must be positive, got {k}")
    sd = np.sqrt(beta * k * k / ((beta - 1.0) ** 2 * (beta - 2.0)))
    expo = np.minimum(-log_ndtr(np.asarray(t, dtype=float)) / beta, _LOG_MAX - np.log(k) - 1.0)
    # k * Phi^{-1/beta} - beta k / (beta - 1) == k * expm1(expo) - k / (beta - 1)
    out = (k * np.expm1(expo) - k / (beta - 1.0)) / sd
    return float(out) if out.ndim == 0 else out


def inject_change(y, tau, h):
    """Add ``h`` to every observation after ``k0 = floor(n * tau)`` (1-based)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    k0 = floor_frac(n, tau)
    if not 1 <= k0 <= n - 1:
        raise ValueError(f"tau={tau} gives k0={k0}, outside [1, {n - 1}] for n={n}")
    out = y.copy()
    out[k0:] += h
    return out


@dataclass(frozen=True)
class LrdSpec:
    """Recipe for one synthetic series."""

    n: int
    hurst: float
    margin: str = GAUSSIAN
    beta: float = 3.0
    k: float = 1.0
    tau: Optional[float] = None
    shift: float = 0.0
    seed: int = 0

    def __post_init__(self):
        _check_hurst(self.hurst)
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.margin not in (GAUSSIAN, PARETO):
            raise ValueError(f"unknown margin {self.margin!r}")
        if self.margin == PARETO and not (self.beta > 2.0 and self.k > 0.0):
            raise ValueError("pareto margin needs beta > 2 and k > 0")
        if self.tau is not None:
            k0 = floor_frac(self.n, self.tau)
            if not 1 <= k0 <= self.n - 1:
                raise ValueError(f"tau={self.tau} gives k0={k0} outside [1, {self.n - 1}]")

    @property
    def k0(self):
        return None if self.tau is None else floor_frac(self.n, self.tau)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def apply_margin(xi, margin=GAUSSIAN, beta=3.0, k=1.0):
    if margin == GAUSSIAN:
        return xi
    if margin == PARETO:
        return pareto_transform(xi, beta, k)
    raise ValueError(f"unknown margin {margin!r}")


def generate(spec: LrdSpec, seed=None):
    """Draw the series described by ``spec`` (``seed`` overrides ``spec.seed``)."""
    xi = generate_fgn(spec.n, spec.hurst, spec.seed if seed is None else seed)
    y = apply_margin(xi, spec.margin, spec.beta, spec.k)
    if spec.tau is not None and spec.shift != 0.0:
        y = inject_change(y, spec.tau, spec.shift)
    return y
