"""Chain components and reproducing kernels.

Two families are evaluated in closed form.  The Bessel-type homogeneous
chain attached to fractional Brownian motion with Hurst index H has

    A_t(z) =  Gamma(1-H) (tz/2)^H          J_{-H}(tz)
    B_t(z) =  Gamma(1-H) (tz/2)^H t^{1-2H} J_{1-H}(tz)
    C_t(z) = -Gamma(H)   (tz/2)^{1-H} t^{2H-1} J_H(tz)
    D_t(z) =  Gamma(H)   (tz/2)^{1-H}          J_{H-1}(tz)

normalized to the identity matrix at z = 0, with unit determinant
A D - B C = 1, and structure functions alpha_t = t^{2-2H}/(2-2H),
gamma_t = t^{2H}/(2H) satisfying alpha' gamma' = 1.  The exponential
polynomial chain for stationary processes with rational spectral density
sigma^2 / (2 pi |Theta(i lambda)|^2), Theta a monic polynomial with
positive real roots, has trigonometric components carried by
StationaryChain.

The reproducing kernel of the space attached to time r is

    K_r(w, z) = [B_r(z) A_r(w) - A_r(z) B_r(w)] / (pi (z - w))

whose diagonal fixes the coefficient variances of the sampling series,
and Q_r is the analogous kernel built from (C, D).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special as sp

from .specfun import gamma_fn

__all__ = [
    "ChainComponents",
    "StationaryChain",
    "StructureFn",
    "check_hurst",
    "fbm_components",
    "fbm_components_dz",
    "fbm_structure",
    "kernel_K",
    "kernel_Q_diag",
    "kernel_diag",
]

# switch to the analytic limit of difference quotients below this scaled gap
_DIAG_SWITCH = 1e-6


def check_hurst(H: float) -> float:
    H = float(H)
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst index must lie in (0, 1), got {H}")
    return H


@dataclass(frozen=True)
class StructureFn:
    """Monotone coordinate pair (alpha, gamma) of a chain, with derivatives."""

    alpha: Callable[[np.ndarray], np.ndarray]
    gamma: Callable[[np.ndarray], np.ndarray]
    alpha_prime: Callable[[np.ndarray], np.ndarray]
    gamma_prime: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ChainComponents:
    A: float
    B: float
    C: float
    D: float

    def det(self) -> float:
        return self.A * self.D - self.B * self.C


def fbm_structure(H: float) -> StructureFn:
    """alpha_t = t^{2-2H}/(2-2H) and gamma_t = t^{2H}/(2H)."""
    H = check_hurst(H)
    a, g = 2.0 - 2.0 * H, 2.0 * H
    return StructureFn(
        alpha=lambda t: np.asarray(t, dtype=float) ** a / a,
        gamma=lambda t: np.asarray(t, dtype=float) ** g / g,
        alpha_prime=lambda t: np.asarray(t, dtype=float) ** (a - 1.0),
        gamma_prime=lambda t: np.asarray(t, dtype=float) ** (g - 1.0),
    )


def _scaled_j(order: float, power: float, x):
    """(x/2)^power J_order(x) with the x = 0 limit filled in.

    For power == -order the product tends to 1/Gamma(order + 1); callers
    supply the matching Gamma prefactor.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    ax = np.abs(np.atleast_1d(x))
    out = np.empty_like(ax)
    nz = ax > 0.0
    out[nz] = (ax[nz] / 2.0) ** power * sp.jv(order, ax[nz])
    if np.any(~nz):
        # leading series term at x = 0
        out[~nz] = 1.0 / sp.gamma(order + 1.0) if power == -order else 0.0
    return out.reshape(shape) if shape else float(out[0])


def fbm_components(H: float, t, z) -> ChainComponents:
    """Evaluate (A, B, C, D) of the homogeneous chain at (t, z).

    Broadcasts over numpy arrays in t and z.  A and D are even in z, B and
    C odd; values at t = 0 or z = 0 are the normalization (1, 0, 0, 1).
    """
    H = check_hurst(H)
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    x = t * z
    sgn = np.sign(z) if z.ndim else float(np.sign(z))
    gH, g1H = gamma_fn(H), gamma_fn(1.0 - H)
    with np.errstate(divide="ignore", invalid="ignore"):
        A = g1H * _scaled_j(-H, H, x)
        B = g1H * t ** (1.0 - 2.0 * H) * _scaled_j(1.0 - H, H, x) * sgn
        D = gH * _scaled_j(H - 1.0, 1.0 - H, x)
        C = -gH * t ** (2.0 * H - 1.0) * _scaled_j(H, 1.0 - H, x) * sgn
    # t = 0 with z != 0 still means the identity; the t powers above can
    # produce 0 * inf there, so patch explicitly
    t0 = np.broadcast_to(t == 0.0, np.shape(A)) if np.shape(A) else t == 0.0
    if np.any(t0):
        A, B, C, D = (np.where(t0, v, w) for v, w in ((1.0, A), (0.0, B), (0.0, C), (1.0, D)))
    if np.ndim(A) == 0:
        return ChainComponents(float(A), float(B), float(C), float(D))
    return ChainComponents(np.asarray(A), np.asarray(B), np.asarray(C), np.asarray(D))


def fbm_components_dz(H: float, t, z) -> ChainComponents:
    """z-derivatives (dA/dz, dB/dz, dC/dz, dD/dz) at (t, z), z != 0.

    Closed forms follow from the J recurrences:
        dA/dz = -t^{2H} B
        dB/dz =  t^{2-2H} A + (2H-1)/z B
        dC/dz = -t^{2H} D  + (1-2H)/z C
        dD/dz =  t^{2-2H} C
    """
    H = check_hurst(H)
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(z == 0.0):
        raise ValueError("derivative formulas need z != 0; use the structure function limits")
    c = fbm_components(H, t, z)
    dA = -(t ** (2.0 * H)) * c.B
    dB = t ** (2.0 - 2.0 * H) * c.A + (2.0 * H - 1.0) / z * c.B
    dC = -(t ** (2.0 * H)) * c.D + (1.0 - 2.0 * H) / z * c.C
    dD = t ** (2.0 - 2.0 * H) * c.C
    if np.ndim(dA) == 0:
        return ChainComponents(float(dA), float(dB), float(dC), float(dD))
    return ChainComponents(dA, dB, dC, dD)


def kernel_diag(H: float, r: float, lam) -> float | np.ndarray:
    """K_r(lambda, lambda) for the homogeneous chain, positive for real lambda.

    Uses pi K = A B' - A' B expanded through the derivative closed forms:
    pi K_r = r^{2-2H} A^2 + r^{2H} B^2 + (2H-1)/lambda A B, with the
    lambda -> 0 limit alpha_r.
    """
    H = check_hurst(H)
    r = float(r)
    if r <= 0.0:
        raise ValueError("r must be positive")
    lam = np.asarray(lam, dtype=float)
    scalar = lam.ndim == 0
    lam = np.atleast_1d(lam)
    out = np.empty_like(lam)
    small = np.abs(lam) * r < 1e-8
    alpha_r = r ** (2.0 - 2.0 * H) / (2.0 - 2.0 * H)
    out[small] = alpha_r / np.pi
    if np.any(~small):
        el = lam[~small]
        c = fbm_components(H, r, el)
        piK = (
            r ** (2.0 - 2.0 * H) * c.A**2
            + r ** (2.0 * H) * c.B**2
            + (2.0 * H - 1.0) / el * c.A * c.B
        )
        out[~small] = piK / np.pi
    return float(out[0]) if scalar else out


def kernel_Q_diag(H: float, r: float, lam) -> float | np.ndarray:
    """Q_r(lambda, lambda), the (C, D)-side diagonal kernel; Q_r(0,0) = gamma_r/pi."""
    H = check_hurst(H)
    r = float(r)
    if r <= 0.0:
        raise ValueError("r must be positive")
    lam = np.asarray(lam, dtype=float)
    scalar = lam.ndim == 0
    lam = np.atleast_1d(lam)
    out = np.empty_like(lam)
    small = np.abs(lam) * r < 1e-8
    out[small] = r ** (2.0 * H) / (2.0 * H) / np.pi
    if np.any(~small):
        el = lam[~small]
        c = fbm_components(H, r, el)
        piQ = (
            r ** (2.0 * H) * c.D**2
            + r ** (2.0 - 2.0 * H) * c.C**2
            - (1.0 - 2.0 * H) / el * c.C * c.D
        )
        out[~small] = piQ / np.pi
    return float(out[0]) if scalar else out


def kernel_K(H: float, r: float, w: float, z: float) -> float:
    """Reproducing kernel K_r(w, z) of the homogeneous chain, real arguments.

    The removable singularity at z = w is filled from the diagonal formula
    once |z - w| falls under a scaled threshold; by symmetry the result is
    exchangeable in (w, z).
    """
    H = check_hurst(H)
    r = float(r)
    if r <= 0.0:
        raise ValueError("r must be positive")
    w, z = float(w), float(z)
    if abs(z - w) < _DIAG_SWITCH * (1.0 + abs(z)):
        return float(kernel_diag(H, r, 0.5 * (w + z)))
    cw = fbm_components(H, r, w)
    cz = fbm_components(H, r, z)
    return (cz.B * cw.A - cz.A * cw.B) / (np.pi * (z - w))


@dataclass(frozen=True)
class StationaryChain:
    """Exponential-polynomial chain for a rational spectral density.

    Parameters are the positive real roots phi_k of the monic polynomial
    Theta (so Theta(u) = prod_k (u - phi_k)) and the noise intensity
    sigma2.  The spectral density is sigma2 / (2 pi |Theta(i lambda)|^2).
    Components are normalized to A_t(0) = 1 by dividing out Theta(0).
    """

    phi: tuple
    sigma2: float
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        phi = tuple(float(p) for p in self.phi)
        if len(phi) < 1 or any(p <= 0.0 for p in phi):
            raise ValueError("phi must be one or more positive reals")
        if float(self.sigma2) <= 0.0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "_coeffs", np.poly(np.asarray(phi)))

    @property
    def order(self) -> int:
        return len(self.phi)

    def theta(self, lam) -> np.ndarray:
        """Theta(i lambda) as a complex value."""
        return np.polyval(self._coeffs, 1j * np.asarray(lam, dtype=float))

    def theta_prime(self, lam) -> np.ndarray:
        """dTheta/du evaluated at u = i lambda."""
        return np.polyval(np.polyder(self._coeffs), 1j * np.asarray(lam, dtype=float))

    def theta0(self) -> float:
        return float(np.polyval(self._coeffs, 0.0).real)

    def components(self, t, z) -> ChainComponents:
        """Normalized (A, B) of Theta(iz) e^{-izt}; C and D are not defined here."""
        th = self.theta(z) / self.theta0()
        t = np.asarray(t, dtype=float)
        z = np.asarray(z, dtype=float)
        ct, st = np.cos(t * z), np.sin(t * z)
        A = th.real * ct + th.imag * st
        B = th.real * st - th.imag * ct
        if np.ndim(A) == 0:
            return ChainComponents(float(A), float(B), np.nan, np.nan)
        return ChainComponents(A, B, np.full_like(A, np.nan), np.full_like(A, np.nan))

    def squared_oddcomp(self, r: float, z) -> np.ndarray:
        """Odd component of the twice-wound chain function at time r.

        (Re^2 - Im^2) Theta(iz) sin(rz) - 2 Re Im Theta(iz) cos(rz); the
        positive zeros are the eigenfrequencies of the stationary
        Karhunen-Loeve problem on [0, r].  For a single root theta this
        reduces to the classical equation tan(rz) = 2 theta z/(z^2 - theta^2).
        """
        th = self.theta(z)
        z = np.asarray(z, dtype=float)
        re, im = th.real, th.imag
        return (re**2 - im**2) * np.sin(r * z) - 2.0 * re * im * np.cos(r * z)

    def oddcomp_scaled(self, r: float, z) -> np.ndarray:
        """squared_oddcomp divided by |Theta(iz)|^2; unit amplitude, same zeros."""
        th = self.theta(z)
        z = np.asarray(z, dtype=float)
        re, im = th.real, th.imag
        mod2 = re**2 + im**2
        return ((re**2 - im**2) * np.sin(r * z) - 2.0 * re * im * np.cos(r * z)) / mod2

    def kernel0(self, lam) -> np.ndarray:
        """sigma2 * K_0(lambda, lambda): boundary value of the diagonal kernel.

        Equals -2 Re[Theta'(i lambda) conj(Theta(i lambda))]; reduces to
        2 theta for a single root theta.
        """
        th = self.theta(lam)
        dth = self.theta_prime(lam)
        return -2.0 * (dth * np.conj(th)).real

    def kernel_diag(self, t: float, lam) -> np.ndarray:
        """K_t(lambda, lambda) = (sigma2 K_0 + 2 t |Theta(i lambda)|^2)/sigma2."""
        th = self.theta(lam)
        return (self.kernel0(lam) + 2.0 * float(t) * np.abs(th) ** 2) / self.sigma2

    def spectral_density(self, lam) -> np.ndarray:
        return self.sigma2 / (2.0 * np.pi * np.abs(self.theta(lam)) ** 2)


def ar_components(phi, sigma2: float, t, z) -> ChainComponents:
    """(A, B) of the exponential-polynomial chain with roots phi at (t, z)."""
    return StationaryChain(tuple(phi), sigma2).components(t, z)


def ar_squared_oddcomp(phi, sigma2: float, r: float, z) -> np.ndarray:
    """Odd part of the squared chain function; see StationaryChain.squared_oddcomp."""
    return StationaryChain(tuple(phi), sigma2).squared_oddcomp(r, z)
