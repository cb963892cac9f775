"""Covariance functions, spectral densities, and normalization constants.

Process families are described by small frozen spec objects; covariance()
dispatches on their type and broadcasts over numpy arrays.  Two FBM
normalizations coexist: "standard" has unit variance at t = 1, "chain"
uses the spectral density whose value at lambda = 1 is
pi / (2^{1-2H} Gamma(1-H)^2).  The ratio of the two measures is
chain_scale(H), so a chain-normalized path is sqrt(chain_scale(H)) times
a standard one.

Martingale and bridge kinds carry a pi_scaled flag, default True, under
which the second moment of the even fundamental martingale is
pi * alpha_t exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .chain import StationaryChain, check_hurst, fbm_structure
from .specfun import gamma_fn

__all__ = [
    "AR",
    "AlphaWienerBridge",
    "BrownianBridge",
    "BrownianMotion",
    "CovarianceMatrix",
    "EvenBridge",
    "EvenMartingale",
    "FBM",
    "FBMEven",
    "FBMOdd",
    "OU",
    "OddBridge",
    "OddMartingale",
    "SingleSidedMartingale",
    "chain_scale",
    "covariance",
    "covariance_matrix",
    "spectral_density",
]


def _check_norm(normalization: str) -> str:
    if normalization not in ("standard", "chain"):
        raise ValueError(f"normalization must be 'standard' or 'chain', got {normalization!r}")
    return normalization


@dataclass(frozen=True)
class FBM:
    hurst: float
    normalization: str = "standard"

    def __post_init__(self):
        check_hurst(self.hurst)
        _check_norm(self.normalization)


@dataclass(frozen=True)
class FBMEven:
    """Even part (X_t + X_{-t})/2 of a double-sided FBM."""

    hurst: float
    normalization: str = "standard"

    def __post_init__(self):
        check_hurst(self.hurst)
        _check_norm(self.normalization)


@dataclass(frozen=True)
class FBMOdd:
    """Odd part (X_t - X_{-t})/2; a sub-fractional Brownian motion up to scale."""

    hurst: float
    normalization: str = "standard"

    def __post_init__(self):
        check_hurst(self.hurst)
        _check_norm(self.normalization)


@dataclass(frozen=True)
class OU:
    theta: float
    sigma2: float

    def __post_init__(self):
        if self.theta <= 0.0 or self.sigma2 <= 0.0:
            raise ValueError("OU needs theta > 0 and sigma2 > 0")


@dataclass(frozen=True)
class AR:
    """Stationary process with spectral density sigma2/(2 pi |Theta(i l)|^2)."""

    phi: tuple
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(p) for p in self.phi))
        StationaryChain(self.phi, self.sigma2)  # validates

    def chain(self) -> StationaryChain:
        return StationaryChain(self.phi, self.sigma2)


@dataclass(frozen=True)
class EvenMartingale:
    hurst: float
    pi_scaled: bool = True

    def __post_init__(self):
        check_hurst(self.hurst)


@dataclass(frozen=True)
class OddMartingale:
    hurst: float
    pi_scaled: bool = True

    def __post_init__(self):
        check_hurst(self.hurst)


@dataclass(frozen=True)
class EvenBridge:
    hurst: float
    r: float
    pi_scaled: bool = True

    def __post_init__(self):
        check_hurst(self.hurst)
        if self.r <= 0.0:
            raise ValueError("window r must be positive")


@dataclass(frozen=True)
class OddBridge:
    hurst: float
    r: float
    pi_scaled: bool = True

    def __post_init__(self):
        check_hurst(self.hurst)
        if self.r <= 0.0:
            raise ValueError("window r must be positive")


@dataclass(frozen=True)
class SingleSidedMartingale:
    hurst: float
    pi_scaled: bool = True

    def __post_init__(self):
        check_hurst(self.hurst)


@dataclass(frozen=True)
class AlphaWienerBridge:
    """Weighted Wiener integral bridge pinned at r; equal in law to the
    time-reversed even martingale bridge."""

    hurst: float
    r: float
    pi_scaled: bool = True

    def __post_init__(self):
        check_hurst(self.hurst)
        if self.r <= 0.0:
            raise ValueError("window r must be positive")


@dataclass(frozen=True)
class BrownianMotion:
    pass


@dataclass(frozen=True)
class BrownianBridge:
    r: float

    def __post_init__(self):
        if self.r <= 0.0:
            raise ValueError("window r must be positive")


def chain_mu1(H: float) -> float:
    """Chain spectral density at lambda = 1: pi / (2^{1-2H} Gamma(1-H)^2)."""
    H = check_hurst(H)
    return np.pi / (2.0 ** (1.0 - 2.0 * H) * gamma_fn(1.0 - H) ** 2)


def standard_c(H: float) -> float:
    """Standard FBM spectral constant Gamma(1+2H) sin(pi H) / (2 pi)."""
    H = check_hurst(H)
    return gamma_fn(1.0 + 2.0 * H) * np.sin(np.pi * H) / (2.0 * np.pi)


def chain_scale(H: float) -> float:
    """Variance ratio kappa(H) between chain and standard normalization.

    Chain-normalized FBM has v(t) = kappa(H) t^{2H}; kappa(1/2) = 2 pi.
    """
    return chain_mu1(H) / standard_c(H)


def _fbm_scale(spec) -> float:
    return chain_scale(spec.hurst) if spec.normalization == "chain" else 1.0


def _pi_scale(spec) -> float:
    return np.pi if spec.pi_scaled else 1.0


@lru_cache(maxsize=4096)
def _ar_cov_lag(phi: tuple, sigma2: float, tau: float) -> float:
    """AR covariance at lag tau by quadrature of the spectral density."""
    chain = StationaryChain(phi, sigma2)
    dens = lambda lam: chain.spectral_density(lam)
    if tau == 0.0:
        val, _ = integrate.quad(dens, 0.0, np.inf, limit=400)
    else:
        val, _ = integrate.quad(dens, 0.0, np.inf, weight="cos", wvar=tau, limit=400)
    return 2.0 * val


def covariance(spec, s, t):
    """E X_s X_t for the given process spec; broadcasts over arrays."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)

    if isinstance(spec, FBM):
        H2 = 2.0 * spec.hurst
        val = 0.5 * (np.abs(s) ** H2 + np.abs(t) ** H2 - np.abs(t - s) ** H2) * _fbm_scale(spec)
    elif isinstance(spec, FBMEven):
        H2 = 2.0 * spec.hurst
        val = 0.25 * (np.abs(s + t) ** H2 - np.abs(s - t) ** H2) * _fbm_scale(spec)
    elif isinstance(spec, FBMOdd):
        H2 = 2.0 * spec.hurst
        val = (
            0.25
            * (2.0 * np.abs(s) ** H2 + 2.0 * np.abs(t) ** H2 - np.abs(s + t) ** H2 - np.abs(s - t) ** H2)
            * _fbm_scale(spec)
        )
    elif isinstance(spec, OU):
        val = spec.sigma2 / (2.0 * spec.theta) * np.exp(-spec.theta * np.abs(t - s))
    elif isinstance(spec, AR):
        taus = np.abs(np.broadcast_to(t - s, np.broadcast_shapes(s.shape, t.shape)))
        flat = np.round(taus.ravel(), 14)
        # one quadrature per distinct lag; uniform grids have O(n) of them
        uniq, inv = np.unique(flat, return_inverse=True)
        per_lag = np.asarray([_ar_cov_lag(spec.phi, spec.sigma2, float(x)) for x in uniq])
        val = per_lag[inv].reshape(taus.shape)
    elif isinstance(spec, (EvenMartingale, SingleSidedMartingale)):
        st = fbm_structure(spec.hurst)
        val = _pi_scale(spec) * st.alpha(np.minimum(s, t))
    elif isinstance(spec, OddMartingale):
        st = fbm_structure(spec.hurst)
        val = _pi_scale(spec) * st.gamma(np.minimum(s, t))
    elif isinstance(spec, EvenBridge):
        _check_window(s, t, spec.r)
        st = fbm_structure(spec.hurst)
        a = st.alpha
        val = _pi_scale(spec) * (a(np.minimum(s, t)) - a(s) * a(t) / a(spec.r))
    elif isinstance(spec, OddBridge):
        _check_window(s, t, spec.r)
        st = fbm_structure(spec.hurst)
        g = st.gamma
        val = _pi_scale(spec) * (g(np.minimum(s, t)) - g(s) * g(t) / g(spec.r))
    elif isinstance(spec, AlphaWienerBridge):
        # moving-average closed form; an independent route to the
        # time-reversed even bridge covariance
        _check_window(s, t, spec.r)
        H, r = spec.hurst, spec.r
        p = 2.0 - 2.0 * H
        # the endpoint produces 0 * inf before the mask below
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (
                ((r - s) * (r - t)) ** p
                * ((r - np.minimum(s, t)) ** (-p) - r ** (-p))
                / p
            )
        val = np.where((s == r) | (t == r), 0.0, val) * _pi_scale(spec)
    elif isinstance(spec, BrownianMotion):
        val = np.minimum(s, t)
    elif isinstance(spec, BrownianBridge):
        _check_window(s, t, spec.r)
        val = np.minimum(s, t) - s * t / spec.r
    else:
        raise TypeError(f"unknown process spec {type(spec).__name__}")
    return float(val) if np.ndim(val) == 0 else val


def _check_window(s, t, r: float) -> None:
    if np.any(s < 0.0) or np.any(t < 0.0) or np.any(s > r) or np.any(t > r):
        raise ValueError(f"bridge kinds are defined on [0, {r}] only")


def spectral_density(spec, lam):
    """Density of the spectral measure at lam under the spec's normalization."""
    lam = np.asarray(lam, dtype=float)
    if isinstance(spec, (FBM, FBMEven, FBMOdd)):
        if np.any(lam == 0.0):
            raise ValueError("FBM spectral density is singular at lambda = 0")
        c = chain_mu1(spec.hurst) if spec.normalization == "chain" else standard_c(spec.hurst)
        val = c * np.abs(lam) ** (1.0 - 2.0 * spec.hurst)
    elif isinstance(spec, OU):
        val = spec.sigma2 / (2.0 * np.pi * (lam**2 + spec.theta**2))
    elif isinstance(spec, AR):
        val = spec.chain().spectral_density(lam)
    elif isinstance(spec, BrownianMotion):
        val = np.full_like(lam, 1.0 / (2.0 * np.pi))
    else:
        raise TypeError(f"no spectral density for {type(spec).__name__}")
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class CovarianceMatrix:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (grid.size, grid.size):
            raise ValueError("values must be square and match the grid")
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(f"{x:.17g}" for x in self.grid) + "\n")
        for row in self.values:
            buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "CovarianceMatrix":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        grid = np.asarray([float(x) for x in lines[0].split(",")])
        values = np.asarray([[float(x) for x in ln.split(",")] for ln in lines[1:]])
        return CovarianceMatrix(grid, values)


def covariance_matrix(spec, grid, psd_tol: float = 1e-8) -> CovarianceMatrix:
    """Covariance matrix on an ascending grid, with a PSD sanity check."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be 1-d strictly ascending")
    vals = covariance(spec, grid[:, None], grid[None, :])
    vals = np.asarray(vals, dtype=float)
    vals = 0.5 * (vals + vals.T)
    trace = float(np.trace(vals))
    if trace > 0.0:
        w = np.linalg.eigvalsh(vals)
        if w[0] < -psd_tol * trace:
            import warnings

            warnings.warn(
                f"covariance matrix has eigenvalue {w[0]:.3e} below -{psd_tol:.0e} * trace",
                stacklevel=2,
            )
    return CovarianceMatrix(grid, vals)
