"""Slow reference evaluation of the renormalized energy by 2-D quadrature.

The energy is rebuilt from per-dislocation self energies and pairwise
interaction energies, each an area integral of gradients of
``phi_a = log|x - a|`` and its harmonic corrector ``w_a``.  Only the
corrector's gradient is taken from the spectral Neumann solver; every
area integral is done by polar quadrature here.  Meant for n <= 3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .disk import adaptive_order, normal_derivative_log_coeffs, solve_neumann
from .energy import BoundaryDatum, PointConfig, renormalized_energy
from .errors import CollisionError, CostGuardError, DomainError, ScrewDiskError

MAX_ORACLE_N = 3


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor polar rule: Gauss-Legendre in the radius, trapezoid in the angle."""

    n_radial: int = 512
    n_angular: int = 1024

    def __post_init__(self):
        if self.n_radial < 2 or self.n_angular < 3:
            raise ScrewDiskError("quadrature grid too coarse")

    def radial_rule(self, n=None):
        t, w = np.polynomial.legendre.leggauss(n or self.n_radial)
        return 0.5 * (t + 1.0), 0.5 * w

    def angles(self):
        return 2 * np.pi * np.arange(self.n_angular) / self.n_angular

    def disk(self, center, radius):
        """Nodes and weights for the disk ``B_radius(center)``."""
        t, wt = self.radial_rule()
        psi = self.angles()
        rho = radius * t
        x = center[0] + rho[:, None] * np.cos(psi)[None, :]
        y = center[1] + rho[:, None] * np.sin(psi)[None, :]
        w = (radius * wt * rho)[:, None] * np.full(psi.size, 2 * np.pi / psi.size)[None, :]
        return x, y, w, rho[:, None] * np.ones_like(psi)[None, :], psi

    def integrate_disk(self, func, center=(0.0, 0.0), radius=1.0) -> float:
        x, y, w, _, _ = self.disk(center, radius)
        return float(np.sum(func(x, y) * w))


def _chord(center, psi):
    """Distance from an interior ``center`` to the unit circle along angle ``psi``."""
    c = np.asarray(center, dtype=float)
    b = c[0] * np.cos(psi) + c[1] * np.sin(psi)
    return -b + np.sqrt(b * b + 1.0 - c @ c)


def _corrector(a, datum: BoundaryDatum):
    """Zero-mean Neumann corrector for the single potential ``log|x - a|``."""
    K = max(adaptive_order(float(np.hypot(*a))), datum.f.K)
    return solve_neumann(datum.f.padded(K) - normal_derivative_log_coeffs(a, K))


def _grad_phi(a, x, y):
    dx, dy = x - a[0], y - a[1]
    r2 = dx * dx + dy * dy
    return dx / r2, dy / r2


def _check_point(a):
    a = np.asarray(a, dtype=float)
    if a.shape != (2,) or not np.hypot(*a) < 1.0:
        raise DomainError(f"point {np.asarray(a).tolist()} is not inside the unit disk")
    return a


def self_energy(a, datum: BoundaryDatum, n: int = 1, grid: QuadratureGrid | None = None) -> float:
    """Self energy of one dislocation at ``a``.

    ``n`` is accepted for symmetry with the energy's definition; the datum is
    already normalized by ``n``, so the value does not depend on it.
    """
    a = _check_point(a)
    if n < 1:
        raise ScrewDiskError("n must be positive")
    grid = grid or QuadratureGrid()
    d = 1.0 - float(np.hypot(*a))
    w = _corrector(a, datum)

    # disk B_d(a): only the corrector contributes
    x, y, wt, _, _ = grid.disk(a, d)
    gx, gy = w.gradient(x, y)
    inner = 0.5 * float(np.sum((gx * gx + gy * gy) * wt))

    # Omega minus B_d(a), polar around a with log-mapped radius d..R(psi)
    t, wr = grid.radial_rule()
    psi = grid.angles()
    R = _chord(a, psi)
    span = np.log(np.maximum(R, d) / d)
    rho = d * np.exp(np.outer(t, span))
    area = rho * rho * (wr[:, None] * span[None, :]) * (2 * np.pi / psi.size)
    x = a[0] + rho * np.cos(psi)[None, :]
    y = a[1] + rho * np.sin(psi)[None, :]
    px, py = _grad_phi(a, x, y)
    gx, gy = w.gradient(x, y)
    outer = 0.5 * float(np.sum(((px + gx) ** 2 + (py + gy) ** 2) * area))

    return np.pi * np.log(d) + outer + inner


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        e0 = np.where(t > 0, np.exp(-1.0 / t), 0.0)
        e1 = np.where(t < 1, np.exp(-1.0 / (1.0 - t)), 0.0)
    return e0 / (e0 + e1)


def _cutoff(center, s, x, y):
    """1 inside ``B_{s/2}(center)``, 0 outside ``B_s(center)``."""
    rho = np.hypot(x - center[0], y - center[1])
    return _smooth_step(2.0 * (s - rho) / s)


def interaction_energy(a, b, datum: BoundaryDatum, n: int = 1, grid: QuadratureGrid | None = None) -> float:
    """``int_Omega (grad phi_a + grad w_a) . (grad phi_b + grad w_b)``.

    A smooth partition of unity isolates the two logarithmic cores; each
    core piece is integrated in polar coordinates about its own centre (the
    Jacobian cancels the 1/rho singularity) and the remainder on a polar
    grid about the midpoint, radially graded so both short and long scales
    are resolved.
    """
    a, b = _check_point(a), _check_point(b)
    sep = float(np.hypot(*(a - b)))
    if sep == 0.0:
        raise CollisionError("interaction of coincident dislocations")
    if n < 1:
        raise ScrewDiskError("n must be positive")
    grid = grid or QuadratureGrid()
    wa, wb = _corrector(a, datum), _corrector(b, datum)
    s = 0.9 * min(0.5 * sep, 1.0 - np.hypot(*a), 1.0 - np.hypot(*b))

    def integrand(x, y):
        pax, pay = _grad_phi(a, x, y)
        pbx, pby = _grad_phi(b, x, y)
        gax, gay = wa.gradient(x, y)
        gbx, gby = wb.gradient(x, y)
        return (pax + gax) * (pbx + gbx) + (pay + gay) * (pby + gby)

    total = 0.0
    for c in (a, b):
        x, y, wt, _, _ = grid.disk(c, s)
        total += float(np.sum(integrand(x, y) * _cutoff(c, s, x, y) * wt))

    m = 0.5 * (a + b)
    t, wr = grid.radial_rule(grid.n_radial // 2)
    psi = grid.angles()
    R = _chord(m, psi)
    L = sep
    dpsi = 2 * np.pi / psi.size
    if L < 0.5 * R.min():
        # [0, L] uniform, [L, R(psi)] log-graded
        rho1 = np.outer(L * t, np.ones_like(psi))
        w1 = (L * wr)[:, None] * rho1 * dpsi
        span = np.log(R / L)
        rho2 = L * np.exp(np.outer(t, span))
        w2 = rho2 * rho2 * (wr[:, None] * span[None, :]) * dpsi
        rho, wt = np.vstack([rho1, rho2]), np.vstack([w1, w2])
    else:
        t, wr = grid.radial_rule()
        rho = np.outer(t, R)
        wt = (wr[:, None] * R[None, :]) * rho * dpsi
    x = m[0] + rho * np.cos(psi)[None, :]
    y = m[1] + rho * np.sin(psi)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = 1.0 - _cutoff(a, s, x, y) - _cutoff(b, s, x, y)
        vals = np.where(weight > 0, integrand(x, y) * weight, 0.0)
    total += float(np.sum(vals * wt))
    return total


def oracle_energy(config: PointConfig, datum: BoundaryDatum, grid: QuadratureGrid | None = None) -> float:
    """``(sum_i E_self(a_i) + sum_{i<j} E_int(a_i, a_j)) / n^2``.

    Expanding ``1/2 |sum_i grad(phi_i + w_i)|^2`` produces each unordered
    pair once, i.e. half of the ordered off-diagonal sum.
    """
    if config.n > MAX_ORACLE_N:
        raise CostGuardError(f"oracle limited to n <= {MAX_ORACLE_N}, got {config.n}")
    grid = grid or QuadratureGrid()
    n = config.n
    pts = config.points
    total = sum(self_energy(p, datum, n, grid) for p in pts)
    for i in range(n):
        for j in range(i + 1, n):
            total += interaction_energy(pts[i], pts[j], datum, n, grid)
    return total / n**2


def identity_check(config: PointConfig, datum: BoundaryDatum, grid: QuadratureGrid | None = None) -> float:
    """Gap between the quadrature energy and the spectral energy."""
    if config.n > MAX_ORACLE_N:
        raise CostGuardError(f"oracle limited to n <= {MAX_ORACLE_N}, got {config.n}")
    return abs(oracle_energy(config, datum, grid) - renormalized_energy(config, datum).total)
