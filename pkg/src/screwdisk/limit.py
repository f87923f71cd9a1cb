"""Continuum side: limit measures, their logarithmic potentials and the limit energy.

Supported probability measures on the closed unit disk:

* ``boundary`` - a density (Fourier series) with respect to arc length on the circle;
* ``grid``     - piecewise constant on the squares of an ``h``-lattice, vanishing on
  every square that meets the circle;
* ``ring``     - uniform on the circle of radius ``radius`` < 1;
* ``disk``     - uniform on the disk of radius ``radius`` <= 1.

Potentials are ``phi(x) = int log|x - y| dmu(y)``; every class has an exact
evaluation (series, radial closed forms, or the rectangle antiderivative of
``log|x|``).
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
from .energy import PointConfig
from .errors import HypothesisError, InfeasibleError, ScrewDiskError

MASS_TOL = 1e-12
KINDS = ("boundary", "grid", "ring", "disk")


# ---------------------------------------------------------------------------
# lattice cells


@dataclass(frozen=True, eq=False)
class CellGrid:
    """Squares ``[i h, (i+1) h] x [j h, (j+1) h]`` whose closure meets the open disk.

    Cells are stored in row-major order: by ``j`` (row, bottom to top) and
    then ``i`` (column, left to right).
    """

    h: float
    index: np.ndarray
    interior: np.ndarray

    @classmethod
    def covering(cls, h: float) -> CellGrid:
        if not h > 0:
            raise ScrewDiskError("cell size must be positive")
        lo, hi = int(np.floor(-1.0 / h)) - 1, int(np.ceil(1.0 / h)) + 1
        jj, ii = np.meshgrid(np.arange(lo, hi), np.arange(lo, hi), indexing="ij")
        idx = np.column_stack([ii.ravel(), jj.ravel()])
        x0, y0 = idx[:, 0] * h, idx[:, 1] * h
        # nearest and farthest point of the closed square from the origin
        nx = np.clip(0.0, x0, x0 + h)
        ny = np.clip(0.0, y0, y0 + h)
        near = np.hypot(nx, ny)
        far = np.hypot(np.maximum(np.abs(x0), np.abs(x0 + h)), np.maximum(np.abs(y0), np.abs(y0 + h)))
        keep = near < 1.0
        return cls(float(h), idx[keep], far[keep] < 1.0)

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def lower_left(self) -> np.ndarray:
        return self.index * self.h

    @property
    def centers(self) -> np.ndarray:
        return (self.index + 0.5) * self.h

    def locate(self, x, y) -> np.ndarray:
        """Cell number containing each point (-1 if none)."""
        i = np.floor(np.asarray(x) / self.h).astype(int)
        j = np.floor(np.asarray(y) / self.h).astype(int)
        lookup = {(a, b): k for k, (a, b) in enumerate(self.index.tolist())}
        return np.array([lookup.get((a, b), -1) for a, b in zip(np.ravel(i), np.ravel(j))])


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True, eq=False)
class LimitMeasure:
    kind: str
    density: FourierSeries | None = None
    grid: CellGrid | None = None
    alpha: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScrewDiskError(f"unknown measure kind {self.kind!r}")
        if self.kind == "boundary":
            if self.density is None:
                raise ScrewDiskError("boundary measure needs a density")
            if abs(self.mass - 1.0) > MASS_TOL:
                raise ScrewDiskError(f"boundary density has mass {self.mass!r}, expected 1")
            if _min_on_circle(self.density) < -1e-12:
                raise HypothesisError("boundary density is negative somewhere")
        elif self.kind == "grid":
            alpha = np.asarray(self.alpha, dtype=float)
            if self.grid is None or alpha.shape != (self.grid.size,):
                raise ScrewDiskError("grid measure needs one coefficient per cell")
            if np.any(alpha < 0):
                raise ScrewDiskError("grid coefficients must be nonnegative")
            if np.any(alpha[~self.grid.interior] != 0):
                raise ScrewDiskError("grid measure charges a cell meeting the boundary")
            alpha.setflags(write=False)
            object.__setattr__(self, "alpha", alpha)
            if abs(self.mass - 1.0) > MASS_TOL:
                raise ScrewDiskError(f"grid measure has mass {self.mass!r}, expected 1")
        elif self.kind == "ring":
            if self.radius is None or not 0.0 < self.radius < 1.0:
                raise ScrewDiskError("ring radius must lie in (0, 1)")
        elif self.kind == "disk":
            if self.radius is None or not 0.0 < self.radius <= 1.0:
                raise ScrewDiskError("disk radius must lie in (0, 1]")

    @property
    def mass(self) -> float:
        if self.kind == "boundary":
            return self.density.integral()
        if self.kind == "grid":
            return float(np.sum(self.alpha)) * self.grid.h**2
        return 1.0

    @classmethod
    def boundary(cls, density: FourierSeries) -> LimitMeasure:
        return cls("boundary", density=density)

    @classmethod
    def uniform_boundary(cls) -> LimitMeasure:
        return cls("boundary", density=FourierSeries.constant(1 / (2 * np.pi)))

    @classmethod
    def ring(cls, radius: float) -> LimitMeasure:
        return cls("ring", radius=float(radius))

    @classmethod
    def disk(cls, radius: float = 1.0) -> LimitMeasure:
        return cls("disk", radius=float(radius))

    @classmethod
    def on_grid(cls, grid: CellGrid, alpha) -> LimitMeasure:
        return cls("grid", grid=grid, alpha=np.asarray(alpha, dtype=float))

    @classmethod
    def uniform_square(cls, half_width: float, h: float) -> LimitMeasure:
        """Uniform measure on ``[-half_width, half_width]^2`` on the ``h``-lattice."""
        m = half_width / h
        if abs(m - round(m)) > 1e-9 or round(m) < 1:
            raise ScrewDiskError("square half-width must be a positive multiple of h")
        grid = CellGrid.covering(h)
        m = round(m)
        inside = np.all((grid.index >= -m) & (grid.index < m), axis=1)
        if not np.all(grid.interior[inside]):
            raise ScrewDiskError("square is not compactly contained in the disk")
        alpha = np.where(inside, 1.0 / (2 * half_width) ** 2, 0.0)
        # renormalize away the rounding in 1/(2w)^2 * h^2 * count
        alpha /= np.sum(alpha) * h**2
        return cls.on_grid(grid, alpha)

    def cell_masses(self) -> np.ndarray:
        return self.alpha * self.grid.h**2

    def support_quadrature(self, order: int = 64):
        """Nodes ``(x, y)`` and weights summing to 1 for integrals against the measure."""
        if self.kind == "boundary":
            N = max(256, 4 * order + 4 * self.density.K)
            th = 2 * np.pi * np.arange(N) / N
            return np.cos(th), np.sin(th), self.density(th) * (2 * np.pi / N)
        if self.kind == "ring":
            N = max(256, 4 * order)
            th = 2 * np.pi * np.arange(N) / N
            return self.radius * np.cos(th), self.radius * np.sin(th), np.full(N, 1.0 / N)
        if self.kind == "disk":
            t, wt = np.polynomial.legendre.leggauss(order)
            r = 0.5 * self.radius * (t + 1)
            wr = 0.5 * self.radius * wt * r
            N = max(256, 4 * order)
            th = 2 * np.pi * np.arange(N) / N
            x = (r[:, None] * np.cos(th)).ravel()
            y = (r[:, None] * np.sin(th)).ravel()
            w = (wr[:, None] * np.full(N, 2 * np.pi / N)).ravel() / (np.pi * self.radius**2)
            return x, y, w
        t, wt = np.polynomial.legendre.leggauss(8)
        h = self.grid.h
        t, wt = 0.5 * h * (t + 1), 0.5 * h * wt
        live = self.alpha > 0
        ll = self.grid.lower_left[live]
        x = (ll[:, 0, None, None] + t[None, :, None] + 0 * t[None, None, :]).ravel()
        y = (ll[:, 1, None, None] + 0 * t[None, :, None] + t[None, None, :]).ravel()
        w = (self.alpha[live, None, None] * wt[None, :, None] * wt[None, None, :]).ravel()
        return x, y, w


def _min_on_circle(f: FourierSeries) -> float:
    N = max(4096, 16 * f.K)
    return float(np.min(f(2 * np.pi * np.arange(N) / N)))


def limiting_boundary_measure(f: FourierSeries) -> LimitMeasure:
    """The measure ``f / (2 pi)`` times arc length on the circle."""
    if abs(f.mean - 1.0) > MASS_TOL:
        raise ScrewDiskError(f"boundary datum must have mean 1, got {f.mean!r}")
    if _min_on_circle(f) < 0.0:
        raise HypothesisError("boundary datum takes negative values")
    return LimitMeasure.boundary(f * (1 / (2 * np.pi)))


# ---------------------------------------------------------------------------
# potentials


def _rect_log_integral(u, v):
    """Antiderivative G with d2G/dudv = log|(u, v)|."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = u * u + v * v
        lg = np.where(r2 > 0, np.log(r2), 0.0)
        au = np.where(u != 0, u * u * np.arctan(v / np.where(u != 0, u, 1.0)), 0.0)
        av = np.where(v != 0, v * v * np.arctan(u / np.where(v != 0, v, 1.0)), 0.0)
    return 0.5 * (u * v * lg - 3 * u * v + au + av)


def _rect_log_grad(u, v):
    """``(dG/du, dG/dv)`` for :func:`_rect_log_integral`."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = u * u + v * v
        lg = np.where(r2 > 0, 0.5 * np.log(r2), 0.0)
        tu = np.where(u != 0, u * np.arctan(v / np.where(u != 0, u, 1.0)), 0.0)
        tv = np.where(v != 0, v * np.arctan(u / np.where(v != 0, v, 1.0)), 0.0)
    return tu + v * lg - v, tv + u * lg - u


def _laurent(coef, powers, z):
    """Value and derivative of ``sum coef_k z^{p_k}``."""
    zp = z[..., None] ** powers
    val = zp @ coef
    der = (z[..., None] ** (powers - 1)) @ (coef * powers)
    return val, der


class PotentialField:
    """Logarithmic potential of a :class:`LimitMeasure`."""

    def __init__(self, mu: LimitMeasure):
        self.mu = mu

    def value(self, x, y):
        raise NotImplementedError

    def gradient(self, x, y):
        raise NotImplementedError

    def trace(self) -> FourierSeries:
        """``phi`` on the unit circle."""
        raise NotImplementedError

    def outer_normal_trace(self) -> FourierSeries:
        """Normal derivative of ``phi`` on the circle taken from outside."""
        raise NotImplementedError


class _BoundaryPotential(PotentialField):
    def __init__(self, mu):
        super().__init__(mu)
        rho = mu.density
        self.K = rho.K
        self.k = np.arange(1, self.K + 1)
        self.R = rho.to_complex()
        self.c_in = -(np.pi / self.k) * self.R  # trace coefficients

    def _eval(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = x + 1j * y
        r = np.abs(z)
        out = r > 1.0
        zi = np.where(out, 0.0, z)
        zo = np.where(out, z, 1.0)
        # inside: Re sum conj(c_k) z^k
        v_in, d_in = _laurent(np.conj(self.c_in), self.k, zi)
        # outside: log|z| + Re sum c_k z^{-k}
        v_out, d_out = _laurent(self.c_in, -self.k, zo)
        with np.errstate(divide="ignore"):
            logr = np.log(np.where(out, r, 1.0))
        val = np.where(out, logr + v_out.real, v_in.real)
        grad = np.where(out, np.conj(d_out) + 1.0 / np.conj(zo), np.conj(d_in))
        return val, grad

    def value(self, x, y):
        return self._eval(x, y)[0]

    def gradient(self, x, y):
        g = self._eval(x, y)[1]
        return g.real, g.imag

    def trace(self):
        return FourierSeries.from_complex(0.0, self.c_in)

    def outer_normal_trace(self):
        return FourierSeries.from_complex(1.0, np.pi * self.R)


class _RadialPotential(PotentialField):
    """Ring and uniform-disk potentials; both equal ``log|x|`` outside radius ``s``."""

    def value(self, x, y):
        s = self.mu.radius
        r = np.hypot(x, y)
        with np.errstate(divide="ignore"):
            outside = np.log(np.maximum(r, s))
        if self.mu.kind == "ring":
            return outside
        return np.where(r < s, np.log(s) + 0.5 * (r * r / (s * s) - 1.0), outside)

    def gradient(self, x, y):
        s = self.mu.radius
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = x * x + y * y
        inside = r2 < s * s
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(inside, 0.0 if self.mu.kind == "ring" else 1.0 / (s * s), 1.0 / r2)
        return scale * x, scale * y

    def trace(self):
        return FourierSeries.constant(0.0)

    def outer_normal_trace(self):
        return FourierSeries.constant(1.0)


class _GridPotential(PotentialField):
    """Exact potential of a piecewise constant density via corner sums.

    For piecewise constant ``alpha`` the integral over the union of squares
    collapses to a signed sum of the rectangle antiderivative at lattice
    corners, with weight equal to the mixed second difference of ``alpha``.
    """

    CHUNK = 1 << 16

    def __init__(self, mu):
        super().__init__(mu)
        grid = mu.grid
        live = mu.alpha > 0
        idx = grid.index[live]
        lo = idx.min(axis=0)
        shape = idx.max(axis=0) - lo + 1
        A = np.zeros(tuple(shape + 2))
        A[idx[:, 0] - lo[0] + 1, idx[:, 1] - lo[1] + 1] = mu.alpha[live]
        W = A[1:, 1:] - A[:-1, 1:] - A[1:, :-1] + A[:-1, :-1]
        ci, cj = np.nonzero(W)
        self.weights = W[ci, cj]
        self.corners = np.column_stack([ci + lo[0], cj + lo[1]]) * grid.h
        ll = idx * grid.h
        far = np.hypot(
            np.maximum(np.abs(ll[:, 0]), np.abs(ll[:, 0] + grid.h)),
            np.maximum(np.abs(ll[:, 1]), np.abs(ll[:, 1] + grid.h)),
        )
        self.support_radius = float(far.max())
        self.K = adaptive_order(self.support_radius, tol=1e-14)

    def _apply(self, fn, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = x.shape
        xf, yf = x.ravel(), y.ravel()
        outs = None
        for s in range(0, xf.size, self.CHUNK):
            u = xf[s : s + self.CHUNK, None] - self.corners[None, :, 0]
            v = yf[s : s + self.CHUNK, None] - self.corners[None, :, 1]
            res = fn(u, v)
            res = res if isinstance(res, tuple) else (res,)
            part = [r @ self.weights for r in res]
            outs = [[p] for p in part] if outs is None else [o + [p] for o, p in zip(outs, part)]
        return [np.concatenate(o).reshape(shape) for o in outs]

    def value(self, x, y):
        return self._apply(_rect_log_integral, x, y)[0]

    def gradient(self, x, y):
        gx, gy = self._apply(_rect_log_grad, x, y)
        return gx, gy

    def _circle(self):
        N = 2 * self.K + 2
        th = 2 * np.pi * np.arange(N) / N
        return th, np.cos(th), np.sin(th)

    def trace(self):
        th, x, y = self._circle()
        return FourierSeries.from_samples(self.value(x, y), self.K)

    def outer_normal_trace(self):
        th, x, y = self._circle()
        gx, gy = self.gradient(x, y)
        return FourierSeries.from_samples(gx * x + gy * y, self.K)


def newtonian_potential(mu: LimitMeasure) -> PotentialField:
    if mu.kind == "boundary":
        return _BoundaryPotential(mu)
    if mu.kind == "grid":
        return _GridPotential(mu)
    return _RadialPotential(mu)


# ---------------------------------------------------------------------------
# limit energy


@dataclass(frozen=True)
class LimitSolution:
    """``U = phi + w`` for a measure and datum."""

    potential: PotentialField
    corrector: object  # NeumannSolution
    f: FourierSeries

    def value(self, x, y):
        return self.potential.value(x, y) + self.corrector.value(x, y)

    def gradient(self, x, y):
        px, py = self.potential.gradient(x, y)
        wx, wy = self.corrector.gradient(x, y)
        return px + wx, py + wy

    def trace(self) -> FourierSeries:
        return self.potential.trace() + self.corrector.coeffs


def solve_limit_problem(mu: LimitMeasure, f: FourierSeries) -> LimitSolution:
    """Split ``U = phi + w`` with ``d_nu w = f - d_nu phi_+``."""
    phi = newtonian_potential(mu)
    dphi = phi.outer_normal_trace()
    K = max(f.K, dphi.K)
    w = solve_neumann(f.padded(K) - dphi.padded(K))
    return LimitSolution(phi, w, f)


def limit_energy(mu: LimitMeasure, f: FourierSeries) -> float:
    """``1/2 int_Omega |grad U|^2`` via ``<f, U> - 2 pi int U dmu``.

    The circle mean of ``U`` is zero by construction; the identity itself is
    invariant under adding a constant to ``U`` because ``f`` and ``2 pi mu``
    both have total mass ``2 pi``.
    """
    sol = solve_limit_problem(mu, f)
    return _weak_energy(sol, mu, f)


def _weak_energy(sol: LimitSolution, mu: LimitMeasure, f: FourierSeries, shift: float = 0.0) -> float:
    trace = sol.trace()
    boundary_term = pairing(f, trace) + shift * f.integral()
    x, y, w = mu.support_quadrature(order=max(64, trace.K))
    if mu.kind == "boundary":
        # evaluate the interior trace exactly on the circle
        th = np.arctan2(y, x)
        vals = trace(th)
    else:
        vals = sol.value(x, y)
    bulk = float(np.sum((vals + shift) * w))
    return 0.5 * (boundary_term - 2 * np.pi * bulk)


def dirichlet_energy_quadrature(mu: LimitMeasure, f: FourierSeries, n_radial: int = 128, n_angular: int = 512) -> float:
    """``1/2 int_Omega |grad U|^2`` by direct polar quadrature (for cross-checks)."""
    sol = solve_limit_problem(mu, f)
    breaks = [0.0, 1.0]
    if mu.kind in ("ring", "disk") and mu.radius < 1.0:
        breaks.insert(1, mu.radius)
    x, y, w = _polar_rule(breaks, n_radial, n_angular)
    gx, gy = sol.gradient(x, y)
    return 0.5 * float(np.sum((gx * gx + gy * gy) * w))


def _polar_rule(breaks, n_radial, n_angular):
    t, wt = np.polynomial.legendre.leggauss(n_radial)
    rs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        rs.append(a + (b - a) * 0.5 * (t + 1))
        ws.append((b - a) * 0.5 * wt)
    r = np.concatenate(rs)
    wr = np.concatenate(ws) * r
    th = 2 * np.pi * (np.arange(n_angular) + 0.5) / n_angular
    x = (r[:, None] * np.cos(th)).ravel()
    y = (r[:, None] * np.sin(th)).ravel()
    w = (wr[:, None] * np.full(n_angular, 2 * np.pi / n_angular)).ravel()
    return x, y, w


# ---------------------------------------------------------------------------
# approximation machinery


def recovery_sequence(mu: LimitMeasure, n: int) -> PointConfig:
    """n points distributed over the cells of a compactly supported grid measure.

    Cell ``j`` receives ``floor(n m_j)`` points (``m_j`` its mass); the
    remaining points go to the largest fractional remainders, ties to the
    lower cell index.  Within a cell with ``c`` points they sit on a centred
    ``ceil(sqrt(c))``-square sublattice kept ``h / (4 sqrt(c))`` off the edges.
    """
    if mu.kind != "grid":
        raise ScrewDiskError("recovery sequences are built from grid measures")
    masses = mu.cell_masses()
    live = np.nonzero(masses > 0)[0]
    if n < live.size:
        raise InfeasibleError(f"n = {n} is below the number of charged cells ({live.size})")
    counts = _largest_remainder(n, masses)
    h = mu.grid.h
    pts = []
    for j in np.nonzero(counts)[0]:
        c = int(counts[j])
        m = int(np.ceil(np.sqrt(c)))
        margin = h / (4 * np.sqrt(c))
        t = margin + (np.arange(m) + 0.5) * (h - 2 * margin) / m
        gy, gx = np.meshgrid(t, t, indexing="ij")
        local = np.column_stack([gx.ravel(), gy.ravel()])[:c]
        pts.append(mu.grid.lower_left[j] + local)
    return PointConfig(np.vstack(pts))


def _largest_remainder(n: int, masses) -> np.ndarray:
    target = n * np.asarray(masses) / np.sum(masses)
    counts = np.floor(target).astype(int)
    rest = n - int(counts.sum())
    if rest > 0:
        frac = target - counts
        order = np.lexsort((np.arange(frac.size), -frac))
        counts[order[:rest]] += 1
    return counts


def _arc_masses(grid: CellGrid, radius: float, density: FourierSeries) -> np.ndarray:
    """Mass of each cell for a measure ``density(theta) dtheta`` on a circle."""
    h = grid.h
    cuts = [0.0, 2 * np.pi]
    m = int(np.ceil(radius / h)) + 1
    for k in range(-m, m + 1):
        c = k * h / radius
        if abs(c) <= 1.0:
            a, b = np.arccos(c), np.arcsin(c)
            cuts += [a, -a, b, np.pi - b]
    cuts = np.unique(np.mod(cuts, 2 * np.pi))
    cuts = np.append(cuts, 2 * np.pi) if cuts[-1] < 2 * np.pi else cuts
    k = np.arange(1, density.K + 1)

    t = cuts[:, None]
    P = (
        density.mean * cuts
        + np.sin(k * t) @ (density.cos_coeffs / k)
        - (np.cos(k * t) - 1) @ (density.sin_coeffs / k)
    )
    pieces = np.diff(P)
    mid = 0.5 * (cuts[:-1] + cuts[1:])
    cell = grid.locate(radius * np.cos(mid), radius * np.sin(mid))
    if np.any(cell < 0):
        raise ScrewDiskError("circle leaves the cell grid")
    out = np.zeros(grid.size)
    np.add.at(out, cell, pieces)
    return out


def _chord_integral(s, u, v):
    """``int_u^v sqrt(s^2 - x^2) dx`` for ``-s <= u <= v <= s``."""

    def S(x):
        return 0.5 * (x * np.sqrt(max(s * s - x * x, 0.0)) + s * s * np.arcsin(np.clip(x / s, -1, 1)))

    return S(v) - S(u)


def _square_disk_area(x0, x1, y0, y1, s):
    """Exact area of ``[x0, x1] x [y0, y1]`` intersected with ``B_s(0)``."""
    a, b = max(x0, -s), min(x1, s)
    if a >= b:
        return 0.0
    br = {a, b}
    for yy in (y0, y1):
        if abs(yy) <= s:
            q = np.sqrt(s * s - yy * yy)
            br.update(x for x in (-q, q) if a < x < b)
    br = sorted(br)
    area = 0.0
    for u, v in zip(br[:-1], br[1:]):
        xm = 0.5 * (u + v)
        q = np.sqrt(s * s - xm * xm)
        top_q, bot_q = y1 > q, y0 < -q
        hi = q if top_q else y1
        lo = -q if bot_q else y0
        if hi <= lo:
            continue
        length_const = (0.0 if top_q else y1) - (0.0 if bot_q else y0)
        n_q = int(top_q) + int(bot_q)
        area += length_const * (v - u) + n_q * _chord_integral(s, u, v)
    return area


def _cell_masses(mu: LimitMeasure, grid: CellGrid) -> np.ndarray:
    if mu.kind == "boundary":
        return _arc_masses(grid, 1.0, mu.density)
    if mu.kind == "ring":
        return _arc_masses(grid, mu.radius, FourierSeries.constant(1 / (2 * np.pi)))
    h = grid.h
    ll = grid.lower_left
    if mu.kind == "disk":
        s = mu.radius
        area = np.array([_square_disk_area(x, x + h, y, y + h, s) for x, y in ll])
        return area / (np.pi * s * s)
    # grid onto grid: exact rectangle overlaps
    src = mu.grid
    live = np.nonzero(mu.alpha > 0)[0]
    out = np.zeros(grid.size)
    sl = src.lower_left[live]
    for k, (x, y) in enumerate(ll):
        ox = np.clip(np.minimum(sl[:, 0] + src.h, x + h) - np.maximum(sl[:, 0], x), 0, None)
        oy = np.clip(np.minimum(sl[:, 1] + src.h, y + h) - np.maximum(sl[:, 1], y), 0, None)
        out[k] = float(np.sum(mu.alpha[live] * ox * oy))
    return out


def piecewise_constant_approx(mu: LimitMeasure, h: float) -> LimitMeasure:
    """Cell averages on the ``h``-lattice, boundary-cell mass moved inward.

    The mass of every cell meeting the circle is added to the nearest
    interior cell (centre-to-centre distance, ties to the lowest row-major
    index), so the result is compactly supported in the open disk.
    """
    grid = CellGrid.covering(h)
    if mu.kind == "grid" and np.isclose(mu.grid.h, h, rtol=0, atol=1e-15):
        return mu
    inner = np.nonzero(grid.interior)[0]
    if inner.size == 0:
        raise InfeasibleError(f"cell size {h} leaves no interior cell")
    masses = _cell_masses(mu, grid)
    moved = np.where(grid.interior, masses, 0.0)
    idx = grid.index
    for j in np.nonzero(~grid.interior & (masses > 0))[0]:
        d2 = np.sum((idx[inner] - idx[j]) ** 2, axis=1)
        moved[inner[np.argmin(d2)]] += masses[j]
    return LimitMeasure.on_grid(grid, moved / h**2)


def hminus1_distance(mu1: LimitMeasure, mu2: LimitMeasure, n_radial: int = 64, n_angular: int = 512, box_radius: float = 2.0) -> float:
    """L2 norm over the box disk of the difference of the potentials' gradients."""
    breaks = {0.0, 1.0, box_radius}
    for mu in (mu1, mu2):
        if mu.kind in ("ring", "disk"):
            breaks.add(mu.radius)
    x, y, w = _polar_rule(sorted(breaks), n_radial, n_angular)
    p1, p2 = newtonian_potential(mu1), newtonian_potential(mu2)
    ax, ay = p1.gradient(x, y)
    bx, by = p2.gradient(x, y)
    return float(np.sqrt(np.sum(((ax - bx) ** 2 + (ay - by) ** 2) * w)))
