"""Unit-disk geometry, boundary Fourier series and the spectral Neumann solver.

Boundary functions are real trigonometric series on the unit circle,

    u(theta) = mean + sum_k (cos[k] cos(k theta) + sin[k] sin(k theta)),

stored with ``k = 1..K`` at array index ``k - 1``.  Internally the pair
``(cos[k], sin[k])`` is often handled as the complex number
``cos[k] + 1j * sin[k]``, for which ``u = mean + Re sum conj(z_k) e^{ik theta}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CompatibilityError, DomainError, ScrewDiskError

TRUNCATION_TOL = 1e-12
K_MAX = 4096
COMPAT_TOL = 1e-9


@dataclass(frozen=True)
class Domain:
    """The unit disk together with the concentric box disk ``B``."""

    radius: float = 1.0
    box_radius: float = 2.0

    def __post_init__(self):
        if self.radius != 1.0:
            raise DomainError("only the unit disk is supported")
        if not self.box_radius > self.radius:
            raise DomainError("box must compactly contain the disk")

    @staticmethod
    def normal(theta):
        theta = np.asarray(theta, dtype=float)
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


@dataclass(frozen=True, eq=False)
class FourierSeries:
    mean: float = 0.0
    cos_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sin_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.cos_coeffs, dtype=float))
        s = np.atleast_1d(np.asarray(self.sin_coeffs, dtype=float))
        K = max(c.size, s.size)
        c = np.pad(c, (0, K - c.size))
        s = np.pad(s, (0, K - s.size))
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "cos_coeffs", c)
        object.__setattr__(self, "sin_coeffs", s)
        if not (np.isfinite(self.mean) and np.all(np.isfinite(c)) and np.all(np.isfinite(s))):
            raise ScrewDiskError("Fourier coefficients must be finite")

    @property
    def K(self) -> int:
        return self.cos_coeffs.size

    @classmethod
    def constant(cls, value: float) -> FourierSeries:
        return cls(value)

    @classmethod
    def from_complex(cls, mean: float, z) -> FourierSeries:
        z = np.asarray(z, dtype=complex)
        return cls(mean, z.real, z.imag)

    @classmethod
    def from_samples(cls, values, K: int | None = None) -> FourierSeries:
        """Series of a periodic function sampled at ``theta_j = 2 pi j / N``."""
        values = np.asarray(values, dtype=float)
        N = values.size
        X = np.fft.rfft(values) / N
        if K is None:
            K = (N - 1) // 2
        X = X[: K + 1]
        return cls(X[0].real, 2 * X[1:].real, -2 * X[1:].imag)

    def to_complex(self) -> np.ndarray:
        return self.cos_coeffs + 1j * self.sin_coeffs

    def padded(self, K: int) -> FourierSeries:
        if K < self.K:
            return FourierSeries(self.mean, self.cos_coeffs[:K], self.sin_coeffs[:K])
        return FourierSeries(
            self.mean,
            np.pad(self.cos_coeffs, (0, K - self.K)),
            np.pad(self.sin_coeffs, (0, K - self.K)),
        )

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        k = np.arange(1, self.K + 1)
        kt = theta[..., None] * k
        return self.mean + np.cos(kt) @ self.cos_coeffs + np.sin(kt) @ self.sin_coeffs

    def integral(self) -> float:
        """Integral over the circle with respect to arc length."""
        return 2 * np.pi * self.mean

    def sup_bound(self) -> float:
        """An upper bound of the sup-norm (sum of absolute coefficients)."""
        return abs(self.mean) + float(np.sum(np.abs(self.cos_coeffs)) + np.sum(np.abs(self.sin_coeffs)))

    def _binary(self, other, op):
        K = max(self.K, other.K)
        a, b = self.padded(K), other.padded(K)
        return FourierSeries(
            op(a.mean, b.mean), op(a.cos_coeffs, b.cos_coeffs), op(a.sin_coeffs, b.sin_coeffs)
        )

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        return FourierSeries(self.mean * scalar, self.cos_coeffs * scalar, self.sin_coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"FourierSeries(mean={self.mean!r}, K={self.K})"


@dataclass(frozen=True)
class NeumannSolution:
    """Harmonic ``w`` with prescribed normal derivative, zero boundary mean.

    ``coeffs`` is the trace of ``w`` on the circle; ``w`` itself is
    ``sum_k r^k (cos[k] cos k theta + sin[k] sin k theta)``.
    """

    coeffs: FourierSeries
    dirichlet_energy: float

    def value(self, x, y):
        z = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
        acc = np.zeros_like(z)
        for ck in np.conj(self.coeffs.to_complex())[::-1]:
            acc = (acc + ck) * z
        return acc.real

    def gradient(self, x, y):
        """Gradient of ``w`` at interior points, summed termwise."""
        z = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
        c = self.coeffs.to_complex()
        k = np.arange(1, c.size + 1)
        # w = Re sum conj(c_k) z^k, so grad w = conj(sum k conj(c_k) z^{k-1}).
        deriv = np.zeros_like(z)
        for ck in (k * np.conj(c))[::-1]:
            deriv = deriv * z + ck
        g = np.conj(deriv)
        return g.real, g.imag


def _as_point(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (2,):
        raise ScrewDiskError(f"expected a planar point, got shape {a.shape}")
    return a


def dist_to_boundary(a) -> float:
    a = _as_point(a)
    r = float(np.hypot(*a))
    if r > 1.0:
        raise DomainError(f"point {a.tolist()} lies outside the closed unit disk")
    return 1.0 - r


def _interior_complex(a) -> complex:
    a = _as_point(a)
    z = complex(a[0], a[1])
    if not abs(z) < 1.0:
        raise DomainError(f"point {a.tolist()} is not inside the open unit disk")
    return z


def log_trace_coeffs(a, K: int) -> FourierSeries:
    """Series of ``theta -> log|e^{i theta} - a|`` truncated at order ``K``."""
    z = _interior_complex(a)
    k = np.arange(1, K + 1)
    return FourierSeries.from_complex(0.0, -(z**k) / k)


def normal_derivative_log_coeffs(a, K: int) -> FourierSeries:
    """Series of the outward normal derivative of ``log|x - a|`` on the circle.

    On the circle this is ``(1 - x.a) / |x - a|^2 = 1 + sum_k Re(conj(a^k) e^{ik theta})``.
    """
    z = _interior_complex(a)
    k = np.arange(1, K + 1)
    return FourierSeries.from_complex(1.0, z**k)


def pairing(u: FourierSeries, v: FourierSeries) -> float:
    """Circle integral of ``u * v`` by Parseval."""
    K = min(u.K, v.K)
    s = np.dot(u.cos_coeffs[:K], v.cos_coeffs[:K]) + np.dot(u.sin_coeffs[:K], v.sin_coeffs[:K])
    return float(2 * np.pi * u.mean * v.mean + np.pi * s)


def compatibility_tolerance(g: FourierSeries) -> float:
    return COMPAT_TOL * (1.0 + g.sup_bound())


def solve_neumann(g: FourierSeries) -> NeumannSolution:
    """Solve ``Lap w = 0`` in the disk with ``d_nu w = g`` on the circle."""
    tol = compatibility_tolerance(g)
    if abs(g.mean) > tol:
        raise CompatibilityError(f"Neumann datum has mean {g.mean:.3e} (tolerance {tol:.1e})")
    k = np.arange(1, g.K + 1)
    trace = FourierSeries(0.0, g.cos_coeffs / k, g.sin_coeffs / k)
    energy = 0.5 * np.pi * float(np.sum((g.cos_coeffs**2 + g.sin_coeffs**2) / k))
    return NeumannSolution(trace, energy)


def adaptive_order(r_max: float, tol: float = TRUNCATION_TOL, k_max: int = K_MAX) -> int:
    """Smallest K with ``r^(K+1) / ((K+1)(1-r)) <= tol``, capped at ``k_max``."""
    if not 0.0 <= r_max < 1.0:
        raise DomainError(f"radius {r_max} is not inside the open unit disk")
    if r_max == 0.0:
        return 1
    k = np.arange(1, k_max + 1)
    tail = np.exp((k + 1) * np.log(r_max)) / ((k + 1) * (1.0 - r_max))
    ok = np.nonzero(tail <= tol)[0]
    return int(k[ok[0]]) if ok.size else k_max
