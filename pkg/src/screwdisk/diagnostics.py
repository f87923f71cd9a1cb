"""Upscaling experiments: boundary concentration, weak-* convergence, energy trends."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .disk import FourierSeries
from .energy import BoundaryDatum, PointConfig, renormalized_energy
from .errors import ScrewDiskError
from .limit import LimitMeasure, limit_energy, limiting_boundary_measure, recovery_sequence
from .optimize import MinimizeOptions, multistart

ATOMS_PER_POINT = 10


def _boundary_quantiles(density: FourierSeries, m: int) -> np.ndarray:
    """Angles at the mid-quantiles ``(k + 1/2) / m`` of ``density d theta``."""
    N = max(8192, 64 * m)
    th = 2 * np.pi * np.arange(N + 1) / N
    k = np.arange(1, density.K + 1)
    t = th[:, None]
    cdf = (
        density.mean * th
        + np.sin(k * t) @ (density.cos_coeffs / k)
        - (np.cos(k * t) - 1) @ (density.sin_coeffs / k)
    )
    cdf = np.maximum.accumulate(cdf / cdf[-1])
    q = (np.arange(m) + 0.5) / m
    ang = np.interp(q, cdf, th)
    # polish with a few Newton steps on the exact primitive
    for _ in range(3):
        kt = ang[:, None] * k
        F = (
            density.mean * ang
            + np.sin(kt) @ (density.cos_coeffs / k)
            - (np.cos(kt) - 1) @ (density.sin_coeffs / k)
        )
        dens = density(ang)
        ok = dens > 1e-12
        ang = np.where(ok, ang - (F - q) / np.where(ok, dens, 1.0), ang)
    return ang


def measure_atoms(mu: LimitMeasure, m: int) -> np.ndarray:
    """``m`` equal-mass atoms approximating ``mu``, shape ``(m, 2)``."""
    if mu.kind == "boundary":
        th = _boundary_quantiles(mu.density, m)
        return np.column_stack([np.cos(th), np.sin(th)])
    if mu.kind == "ring":
        th = 2 * np.pi * np.arange(m) / m
        return mu.radius * np.column_stack([np.cos(th), np.sin(th)])
    if mu.kind == "disk":
        # sunflower: equal-area annuli, golden-angle rotation
        k = np.arange(m)
        r = mu.radius * np.sqrt((k + 0.5) / m)
        th = np.pi * (3 - np.sqrt(5)) * k
        return np.column_stack([r * np.cos(th), r * np.sin(th)])
    return recovery_sequence(mu, m).points


def wasserstein1_to_limit(config: PointConfig, mu: LimitMeasure, atoms_per_point: int = ATOMS_PER_POINT) -> float:
    """W1 between the empirical measure of ``config`` and ``mu``.

    ``mu`` is replaced by ``atoms_per_point * n`` equal-mass atoms; each
    point is split into as many copies, and the resulting uniform transport
    problem is an assignment problem, solved exactly.
    """
    n = config.n
    m = atoms_per_point * n
    atoms = measure_atoms(mu, m)
    src = np.repeat(config.points, atoms_per_point, axis=0)
    cost = np.hypot(src[:, None, 0] - atoms[None, :, 0], src[:, None, 1] - atoms[None, :, 1])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / m)


def _cdf(f: FourierSeries, th):
    """``int_0^th f / (2 pi)``."""
    th = np.asarray(th, dtype=float)
    k = np.arange(1, f.K + 1)
    t = th[..., None] * k
    val = f.mean * th + np.sin(t) @ (f.cos_coeffs / k) - (np.cos(t) - 1) @ (f.sin_coeffs / k)
    return val / (2 * np.pi)


def angular_discrepancy(config: PointConfig, f: FourierSeries) -> float:
    """Sup distance between the angular CDF of the points and that of ``f / 2 pi``.

    Between consecutive point angles the empirical CDF is flat and the
    target CDF is monotone, so the supremum is attained at the jumps.
    """
    limiting_boundary_measure(f)
    ang = np.sort(np.mod(np.arctan2(config.points[:, 1], config.points[:, 0]), 2 * np.pi))
    n = ang.size
    target = _cdf(f, ang)
    before = np.arange(n) / n
    after = np.arange(1, n + 1) / n
    return float(max(np.max(np.abs(target - before)), np.max(np.abs(target - after))))


@dataclass
class UpscaleRecord:
    n: int
    energy: float
    mean_bdist: float
    max_bdist: float
    w1: float
    angular_disc: float


@dataclass
class UpscaleReport:
    records: list = field(default_factory=list)
    configs: list = field(default_factory=list)

    COLUMNS = ("n", "energy", "mean_bdist", "max_bdist", "w1", "angular_disc")

    def column(self, name):
        return [getattr(r, name) for r in self.records]


def upscale_experiment(f: FourierSeries, n_list, opts: MinimizeOptions | None = None) -> UpscaleReport:
    """Minimize for each ``n`` with ``f^n = n f`` and compare with the boundary limit."""
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ScrewDiskError("n_list must be strictly increasing")
    mu = limiting_boundary_measure(f)
    datum = BoundaryDatum(f)
    report = UpscaleReport()
    for n in n_list:
        config, trace = multistart(n, datum, opts)
        bd = 1.0 - config.radii()
        report.records.append(
            UpscaleRecord(
                n=n,
                energy=trace.final_energy,
                mean_bdist=float(bd.mean()),
                max_bdist=float(bd.max()),
                w1=wasserstein1_to_limit(config, mu),
                angular_disc=angular_discrepancy(config, f),
            )
        )
        report.configs.append(config)
    return report


def gamma_limsup_trend(mu: LimitMeasure, f: FourierSeries, n_list) -> list:
    """``|F^n(recovery_sequence(mu, n)) - F_inf(mu)|`` for each ``n``."""
    if mu.kind != "grid":
        raise ScrewDiskError("gamma_limsup_trend needs a grid measure")
    target = limit_energy(mu, f)
    datum = BoundaryDatum(f)
    return [abs(renormalized_energy(recovery_sequence(mu, n), datum).total - target) for n in n_list]
