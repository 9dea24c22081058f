"""Normalizing constants, Gaussian-margin functionals and the limit law of
the Wilcoxon change-point estimator under local changes.

The slowly varying part of the covariance is taken to be a constant
``c_L``; with that choice the scaling function ``g(t) = t^{rD/2} c_L^{-r/2}``
has an exact inverse.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr
from scipy.stats import norm

from .lrd_synth import fbm_two_sided


def fgn_slowly_varying_constant(D):
    """Constant c_L for fGn: rho(k) ~ (1 - D/2)(1 - D) k^{-D}."""
    return (1.0 - D / 2.0) * (1.0 - D)


@dataclass(frozen=True)
class LrdParams:
    D: float
    r: int = 1
    c_L: float = None

    def __post_init__(self):
        if self.r < 1 or int(self.r) != self.r:
            raise ValueError(f"Hermite rank must be a positive integer, got {self.r}")
        if not 0.0 < self.D < 1.0 / self.r:
            raise ValueError(f"need 0 < D < 1/r = {1.0 / self.r}, got D={self.D}")
        if self.c_L is None:
            object.__setattr__(self, "c_L", fgn_slowly_varying_constant(self.D))
        if not self.c_L > 0.0:
            raise ValueError(f"c_L must be positive, got {self.c_L}")

    @property
    def H(self):
        return 1.0 - self.r * self.D / 2.0


def c_r(D, r=1):
    """sqrt(2 r! / ((1 - D r)(2 - D r)))."""
    if not D * r < 1.0:
        raise ValueError(f"need D*r < 1, got D={D}, r={r}")
    return math.sqrt(2.0 * math.factorial(r) / ((1.0 - D * r) * (2.0 - D * r)))


def g_scale(t, params: LrdParams):
    """g_{D,r}(t) = t^{rD/2} L(t)^{-r/2} with L == c_L."""
    r, D = params.r, params.D
    return t ** (r * D / 2.0) * params.c_L ** (-r / 2.0)


def d_n_r(n, params: LrdParams):
    """d_{n,r} = n / g_{D,r}(n) * c_r = n^{1 - rD/2} c_L^{r/2} c_r."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return n / g_scale(n, params) * c_r(params.D, params.r)


def m_n(h_n, params: LrdParams):
    """Local-change scale m_n = g^{-1}(1 / |h_n|) = (c_L^{r/2} / |h_n|)^{2/(rD)}."""
    if h_n == 0:
        raise ValueError("m_n is undefined for a zero shift height")
    r, D = params.r, params.D
    return (params.c_L ** (r / 2.0) / abs(h_n)) ** (2.0 / (r * D))


def shift_functional(h):
    """Delta(h) = int (F(x+h) - F(x)) dF(x) for standard normal F.

    X - X' ~ N(0, 2) for independent copies, so Delta(h) = Phi(h/sqrt 2) - 1/2.
    """
    return float(ndtr(h / math.sqrt(2.0)) - 0.5)


def shift_functional_quad(h):
    """Same as :func:`shift_functional`, by adaptive quadrature of the definition."""
    val, _ = integrate.quad(
        lambda x: (ndtr(x + h) - ndtr(x)) * norm.pdf(x),
        -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200,
    )
    return val


def delta_tau(lam, tau):
    """Tent function lam(1 - tau) for lam <= tau, (1 - lam) tau above."""
    if not (0.0 <= lam <= 1.0 and 0.0 <= tau <= 1.0):
        raise ValueError(f"lambda and tau must lie in [0, 1], got {lam}, {tau}")
    return lam * (1.0 - tau) if lam <= tau else (1.0 - lam) * tau


INT_F_SQ_NORMAL = 1.0 / (2.0 * math.sqrt(math.pi))


def normal_functionals():
    """(int f^2 dx, int J_1 dF) for a standard normal margin, by quadrature.

    For G(t) = t, J_1(x) = E[1{xi <= x} xi] = -phi(x), so both integrals
    reduce to +/- int phi^2 = 1/(2 sqrt(pi)).
    """
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    int_f_sq, _ = integrate.quad(lambda x: norm.pdf(x) ** 2, -np.inf, np.inf, **opts)

    def j1(x):
        # E[1{xi <= x} xi] by integrating u phi(u) over (-inf, x]
        val, _ = integrate.quad(lambda u: u * norm.pdf(u), -np.inf, x, **opts)
        return val

    int_j_df, _ = integrate.quad(lambda x: j1(x) * norm.pdf(x), -np.inf, np.inf, **opts)
    return int_f_sq, int_j_df


def h_drift(s, tau, int_f_sq=INT_F_SQ_NORMAL):
    """Drift of the limit process: s(1-tau)I for s <= 0, -s tau I for s > 0."""
    s = np.asarray(s, dtype=float)
    out = np.where(s <= 0.0, s * (1.0 - tau), -s * tau) * int_f_sq
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LimitLawSample:
    argmax_values: np.ndarray
    grid_M: float
    grid_step: float
    tau: float
    H: float
    int_J_dF: float
    int_f_sq: float

    def boundary_fraction(self):
        tol = 0.5 * self.grid_step
        return float(np.mean(np.abs(self.argmax_values) >= self.grid_M - tol))

    def to_csv(self, path):
        np.savetxt(path, self.argmax_values, fmt="%.17g")


def sample_limit_argmax(
    tau,
    H,
    reps,
    grid_M=50.0,
    grid_step=0.05,
    seed=0,
    int_J_dF=-INT_F_SQ_NORMAL,
    int_f_sq=INT_F_SQ_NORMAL,
):
    """Sample argmax_s { sign(s) B_H(s) int_J_dF + h(s; tau) } on a grid.

    Replication ``i`` draws from the stream ``SeedSequence(seed,
    spawn_key=(i,))`` so the sample does not depend on execution order.
    The smallest maximizing grid point is reported.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    if not (grid_M > 0 and 0 < grid_step <= grid_M):
        raise ValueError(f"need grid_M > 0 and 0 < grid_step <= grid_M, got {grid_M}, {grid_step}")
    if not int_f_sq > 0:
        raise ValueError("int_f_sq must be positive")
    half = int(round(grid_M / grid_step))
    s = np.arange(-half, half + 1) * grid_step
    drift = h_drift(s, tau, int_f_sq)
    sign = np.sign(s)
    out = np.empty(reps)
    for i in range(reps):
        ss = np.random.SeedSequence(seed, spawn_key=(i,))
        B = fbm_two_sided(half, H, grid_step, ss)
        G = sign * B * int_J_dF + drift
        out[i] = s[int(np.argmax(G))]
    out.setflags(write=False)
    return LimitLawSample(out, float(grid_M), float(grid_step), float(tau), float(H),
                          float(int_J_dF), float(int_f_sq))
