"""Rescaled renormalized energy of n screw dislocations in the unit disk.

The energy is assembled from four terms,

    F = 1/2 int |grad w|^2 + <f, phi> - 1/2 <d_nu phi, phi> - pi sum_{i!=j} log|a_i - a_j| / n^2,

where ``phi`` is the mean of the logarithmic potentials of the points and
``w`` is the harmonic corrector with Neumann datum ``f - d_nu phi``.  All
boundary quantities are spectral.

:func:`closed_form_energy` sums the series analytically (for a datum with
finitely many modes nothing is truncated) and :func:`energy_and_gradient`
adds the exact gradient; the optimizer uses these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .disk import (
    FourierSeries,
    adaptive_order,
    pairing,
    solve_neumann,
)
from .errors import CollisionError, DomainError, ScrewDiskError, StencilError


@dataclass(frozen=True, eq=False)
class PointConfig:
    """n distinct dislocation positions in the open unit disk."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if pts.shape[0] < 1:
            raise ScrewDiskError("a configuration needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ScrewDiskError("point coordinates must be finite")
        r = np.hypot(pts[:, 0], pts[:, 1])
        if np.any(r >= 1.0):
            i = int(np.argmax(r))
            raise DomainError(f"point {i} at radius {r[i]!r} is not inside the unit disk")
        if pts.shape[0] > 1 and min_separation(pts) == 0.0:
            raise CollisionError("two dislocations coincide")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def complex(self) -> np.ndarray:
        return self.points[:, 0] + 1j * self.points[:, 1]

    @classmethod
    def from_complex(cls, z) -> PointConfig:
        z = np.asarray(z, dtype=complex).ravel()
        return cls(np.column_stack([z.real, z.imag]))

    def radii(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])

    def min_boundary_distance(self) -> float:
        return float(1.0 - self.radii().max())

    def min_separation(self) -> float:
        return min_separation(self.points) if self.n > 1 else np.inf

    def rotated(self, angle: float) -> PointConfig:
        return PointConfig.from_complex(self.complex * np.exp(1j * angle))

    def __eq__(self, other):
        return isinstance(other, PointConfig) and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"PointConfig(n={self.n})"


def min_separation(points) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return np.inf
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    return float(d[np.triu_indices(len(pts), 1)].min())


@dataclass(frozen=True)
class BoundaryDatum:
    """Normalized boundary strain ``f = f^n / n``; its mean must be 1."""

    f: FourierSeries

    def __post_init__(self):
        if abs(self.f.mean - 1.0) > 1e-12:
            raise ScrewDiskError(f"boundary datum must have mean 1, got {self.f.mean!r}")

    @classmethod
    def uniform(cls) -> BoundaryDatum:
        return cls(FourierSeries.constant(1.0))

    @classmethod
    def from_coeffs(cls, cos=(), sin=()) -> BoundaryDatum:
        return cls(FourierSeries(1.0, cos, sin))


@dataclass(frozen=True)
class EnergyBreakdown:
    w_term: float
    f_pairing: float
    phi_pairing: float
    log_term: float
    total: float

    def as_dict(self) -> dict:
        return {
            "w_term": self.w_term,
            "f_pairing": self.f_pairing,
            "phi_pairing": self.phi_pairing,
            "log_term": self.log_term,
            "total": self.total,
        }


def _moments(z: np.ndarray, K: int) -> np.ndarray:
    """``p_k = mean_i z_i^k`` for ``k = 1..K``."""
    k = np.arange(1, K + 1)
    return np.mean(z[:, None] ** k[None, :], axis=0)


def series_order(config: PointConfig, datum: BoundaryDatum | None = None) -> int:
    K = adaptive_order(float(config.radii().max()))
    if datum is not None:
        K = max(K, datum.f.K)
    return K


def phi_trace(config: PointConfig, K: int | None = None) -> FourierSeries:
    """Trace on the circle of ``phi = mean_i log|x - a_i|``."""
    K = series_order(config) if K is None else K
    k = np.arange(1, K + 1)
    return FourierSeries.from_complex(0.0, -_moments(config.complex, K) / k)


def phi_normal_derivative(config: PointConfig, K: int | None = None) -> FourierSeries:
    K = series_order(config) if K is None else K
    return FourierSeries.from_complex(1.0, _moments(config.complex, K))


def _pair_log_sum(config: PointConfig) -> float:
    """``sum_{i != j} log|a_i - a_j|`` in a fixed order."""
    if config.n == 1:
        return 0.0
    z = config.complex
    iu, ju = np.triu_indices(config.n, 1)
    d = np.abs(z[iu] - z[ju])
    if np.any(d == 0.0):
        raise CollisionError("two dislocations coincide")
    return 2.0 * float(np.sum(np.log(d)))


def log_interaction(config: PointConfig) -> float:
    """``-pi`` times the off-diagonal double sum of ``log|a_i - a_j|``, over ``n^2``."""
    return -np.pi * _pair_log_sum(config) / config.n**2


def renormalized_energy(
    config: PointConfig, datum: BoundaryDatum, K: int | None = None
) -> EnergyBreakdown:
    K = series_order(config, datum) if K is None else K
    f = datum.f.padded(K)
    phi = phi_trace(config, K)
    dphi = phi_normal_derivative(config, K)
    w = solve_neumann(f - dphi)
    w_term = w.dirichlet_energy
    f_pair = pairing(f, phi)
    phi_pair = -0.5 * pairing(dphi, phi)
    log_term = log_interaction(config)
    return EnergyBreakdown(w_term, f_pair, phi_pair, log_term, w_term + f_pair + phi_pair + log_term)


def _datum_complex(datum: BoundaryDatum) -> np.ndarray:
    return datum.f.to_complex()


def closed_form_energy(config: PointConfig, datum: BoundaryDatum) -> float:
    """Total energy with the spectral sums done analytically.

    Uses ``sum_k |p_k|^2 / k = -mean_{i,j} log|1 - a_i conj(a_j)|``; the
    remaining sums run over the finitely many modes of ``f``.
    """
    z = config.complex
    n = config.n
    fk = _datum_complex(datum)
    k = np.arange(1, fk.size + 1)
    const = 0.5 * np.pi * float(np.sum(np.abs(fk) ** 2 / k))
    cross = 0.0
    if fk.size:
        p = _moments(z, fk.size)
        cross = -2.0 * np.pi * float(np.sum((fk * np.conj(p)).real / k))
    image = -np.pi * float(np.sum(np.log(np.abs(1.0 - z[:, None] * np.conj(z)[None, :])))) / n**2
    return const + cross + image + log_interaction(config)


def energy_and_gradient(config: PointConfig, datum: BoundaryDatum) -> tuple[float, np.ndarray]:
    """Closed-form total energy and its exact gradient, shape ``(n, 2)``."""
    z = config.complex
    n = config.n
    energy = closed_form_energy(config, datum)
    one_minus = 1.0 - np.conj(z)[:, None] * z[None, :]
    g = (2 * np.pi / n**2) * np.sum(z[None, :] / one_minus, axis=1)
    if n > 1:
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        g -= (2 * np.pi / n**2) * np.sum(1.0 / np.conj(diff), axis=1)
    fk = _datum_complex(datum)
    if fk.size:
        # sum_k f_k conj(a)^(k-1) by Horner
        acc = np.zeros_like(z)
        zc = np.conj(z)
        for c in fk[::-1]:
            acc = acc * zc + c
        g -= (2 * np.pi / n) * acc
    return energy, np.column_stack([g.real, g.imag])


def default_step(config: PointConfig) -> float:
    return 1e-5 * min(config.min_boundary_distance(), config.min_separation())


def gradient(config: PointConfig, datum: BoundaryDatum, step: float | None = None) -> np.ndarray:
    """Central finite differences of the spectral total, shape ``(n, 2)``."""
    h = default_step(config) if step is None else float(step)
    if not h > 0:
        raise StencilError("finite-difference step must be positive")
    if config.min_boundary_distance() <= 2 * h or config.min_separation() <= 2 * h:
        raise StencilError(f"stencil of step {h:.3g} leaves the disk or crosses a core")
    K = series_order(config, datum)
    base = np.array(config.points)
    out = np.empty_like(base)
    for i in range(config.n):
        for c in range(2):
            vals = []
            for s in (h, -h):
                pts = base.copy()
                pts[i, c] += s
                vals.append(renormalized_energy(PointConfig(pts), datum, K).total)
            out[i, c] = (vals[0] - vals[1]) / (2 * h)
    return out
