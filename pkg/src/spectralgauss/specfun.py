"""Bessel functions of the first kind and bracketed root location.

Every frequency set used elsewhere in the package (sampling frequencies,
Karhunen-Loeve eigenfrequencies, determinantal roots) comes out of the two
root finders in this module, and every kernel evaluation reduces to J_nu.
Evaluation is delegated to scipy.special; this module adds the domain
checks, the derivative recurrence, and zero location with residual
reporting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp
from scipy.optimize import brentq

__all__ = [
    "RootList",
    "bessel_j",
    "bessel_j_prime",
    "bessel_zeros",
    "beta_fn",
    "find_roots",
    "gamma_fn",
]


@dataclass(frozen=True)
class RootList:
    """Ascending positive roots of a scalar function with their residuals."""

    roots: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        roots = np.atleast_1d(np.asarray(self.roots, dtype=float))
        residuals = np.atleast_1d(np.asarray(self.residuals, dtype=float))
        if roots.shape != residuals.shape:
            raise ValueError("roots and residuals must have equal length")
        if roots.size and roots[0] <= 0.0:
            raise ValueError("roots must be strictly positive")
        if roots.size > 1 and not np.all(np.diff(roots) > 0.0):
            raise ValueError("roots must be strictly increasing")
        roots.flags.writeable = False
        residuals.flags.writeable = False
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "residuals", residuals)

    def __len__(self) -> int:
        return self.roots.size


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not np.isfinite(nu) or nu <= -1.0:
        raise ValueError(f"Bessel order must be a finite real > -1, got {nu}")
    return nu


def bessel_j(nu: float, x):
    """J_nu(x) for order nu > -1 and finite x >= 0."""
    nu = _check_order(nu)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < 0.0):
        raise ValueError("argument must be finite and >= 0")
    out = sp.jv(nu, x)
    if out.ndim == 0:
        return float(out)
    return out


def bessel_j_prime(nu: float, x):
    """d/dx J_nu(x) via J_{nu-1}(x) - (nu/x) J_nu(x).

    The recurrence form keeps a single subtraction whose operands are the
    two adjacent orders already needed by the kernel formulas.  x = 0 is a
    domain error for nu < 1; for nu >= 1 the series limit is returned.
    """
    nu = _check_order(nu)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if not np.all(np.isfinite(x)) or np.any(x < 0.0):
        raise ValueError("argument must be finite and >= 0")
    if np.any((x == 0.0) & (nu < 1.0)):
        raise ValueError("derivative at x=0 undefined for nu < 1")
    out = np.empty_like(x)
    zero = x == 0.0
    if np.any(zero):
        out[zero] = 0.5 if nu == 1.0 else 0.0
    nz = ~zero
    xs = x[nz]
    out[nz] = sp.jv(nu - 1.0, xs) - (nu / xs) * sp.jv(nu, xs)
    return float(out[0]) if scalar else out


def gamma_fn(x: float) -> float:
    """Euler Gamma with an explicit pole check at non-positive integers."""
    x = float(x)
    if x <= 0.0 and x == np.floor(x):
        raise ValueError(f"Gamma pole at {x}")
    return float(sp.gamma(x))


def beta_fn(x: float, y: float) -> float:
    """Euler Beta B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)."""
    for v in (x, y):
        if float(v) <= 0.0 and float(v) == np.floor(v):
            raise ValueError(f"Beta pole at argument {v}")
    return float(sp.beta(float(x), float(y)))


def find_roots(f, lo: float, hi: float, scan_step: float, count: int | None = None) -> RootList:
    """Locate simple roots of f on (lo, hi) by sign scan plus Brent refinement.

    Scans at spacing <= scan_step, brackets every sign change, and refines
    each bracket to machine precision.  Points where f vanishes exactly on
    the scan grid are accepted as roots directly.  Returns an empty list
    when no sign change is found; raises if f is non-finite anywhere on the
    scan grid.
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    scan_step = float(scan_step)
    if scan_step <= 0.0:
        raise ValueError("scan_step must be positive")
    n = max(2, int(np.ceil((hi - lo) / scan_step)) + 1)
    grid = np.linspace(lo, hi, n)
    vals = np.asarray([f(x) for x in grid], dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = grid[~np.isfinite(vals)][0]
        raise ValueError(f"function is non-finite at scan point {bad}")
    roots: list[float] = []
    residuals: list[float] = []
    for i in range(n - 1):
        if count is not None and len(roots) >= count:
            break
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            if i == 0 or vals[i - 1] != 0.0:
                roots.append(float(a))
                residuals.append(0.0)
            continue
        if fb == 0.0 or fa * fb > 0.0:
            continue
        root = brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        roots.append(float(root))
        residuals.append(abs(float(f(root))))
    if count is not None:
        roots, residuals = roots[:count], residuals[:count]
    return RootList(np.asarray(roots), np.asarray(residuals))


def _mcmahon(nu: float, n: np.ndarray) -> np.ndarray:
    # large-index asymptotic for the n-th positive zero of J_nu
    beta = (n + 0.5 * nu - 0.25) * np.pi
    mu = 4.0 * nu * nu
    return beta - (mu - 1.0) / (8.0 * beta) - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta) ** 3)


def bessel_zeros(nu: float, r: float, count: int) -> RootList:
    """First `count` positive zeros of J_nu(r * lambda), ascending in lambda.

    The first few zeros come from a dense sign scan with step pi/4 in the
    Bessel argument; the remainder start from the McMahon estimate and are
    polished by vectorized Newton iteration, which converges in a handful
    of steps once the zeros are in their asymptotic regime.
    """
    nu = _check_order(nu)
    r = float(r)
    if r <= 0.0:
        raise ValueError("r must be positive")
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")

    n_scan = min(count, 8)
    f = lambda x: sp.jv(nu, x)
    # first zero sits below mcmahon(n=1) + pi for every nu > -1
    hi = float(_mcmahon(nu, np.asarray([n_scan + 1.0]))[0]) + np.pi
    scanned = find_roots(f, 1e-9, hi, np.pi / 4.0, count=n_scan)
    x = list(scanned.roots)
    if len(x) < n_scan:
        raise RuntimeError(f"zero scan found {len(x)} of {n_scan} requested zeros")

    if count > n_scan:
        idx = np.arange(n_scan + 1, count + 1, dtype=float)
        est = _mcmahon(nu, idx)
        for _ in range(50):
            fx = sp.jv(nu, est)
            dfx = sp.jv(nu - 1.0, est) - (nu / est) * sp.jv(nu, est)
            step = fx / dfx
            est = est - step
            if np.max(np.abs(step)) < 1e-14 * np.max(est):
                break
        fx = sp.jv(nu, est)
        dfx = sp.jv(nu - 1.0, est) - (nu / est) * sp.jv(nu, est)
        est = est - fx / dfx
        x.extend(est.tolist())

    x = np.asarray(x)
    if not np.all(np.diff(x) > 0.0):
        raise RuntimeError("Bessel zeros failed strict ordering check")
    lam = x / r
    res = np.abs(sp.jv(nu, r * lam))
    return RootList(lam, res)
