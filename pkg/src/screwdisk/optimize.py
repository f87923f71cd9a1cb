"""Minimization of the rescaled energy over n-point configurations.

Steepest descent with an Armijo backtracking line search.  The energy is
+inf on the boundary and at collisions, so trial points that leave the open
disk or merge two cores are simply rejected, and each trial displacement is
capped to a fraction of the current distance to those barriers.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import BoundaryDatum, PointConfig, energy_and_gradient, min_separation
from .errors import ScrewDiskError, StallError

log = logging.getLogger(__name__)

ARMIJO_C = 1e-4
WORKERS_ENV = "SCREWDISK_WORKERS"


@dataclass(frozen=True)
class MinimizeOptions:
    max_iters: int = 20000
    grad_tol: float | None = None  # None means 1e-7 * n
    initial_step: float = 1e-2
    shrink_factor: float = 0.5
    restarts: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise ScrewDiskError("grad_tol must be positive")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ScrewDiskError("shrink_factor must lie in (0, 1)")
        if not self.initial_step > 0:
            raise ScrewDiskError("initial_step must be positive")
        if self.max_iters < 0 or self.restarts < 1:
            raise ScrewDiskError("max_iters must be >= 0 and restarts >= 1")

    def tolerance(self, n: int) -> float:
        return 1e-7 * n if self.grad_tol is None else self.grad_tol


@dataclass
class MinimizeTrace:
    total: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    min_bdist: list = field(default_factory=list)
    min_sep: list = field(default_factory=list)
    converged: bool = False
    stalled: bool = False
    seed: int | None = None

    def record(self, config: PointConfig, energy: float, gnorm: float):
        self.total.append(float(energy))
        self.grad_norm.append(float(gnorm))
        self.min_bdist.append(config.min_boundary_distance())
        self.min_sep.append(float(config.min_separation()))

    def rows(self):
        for i, row in enumerate(zip(self.total, self.grad_norm, self.min_bdist, self.min_sep)):
            yield (i, *row)

    @property
    def final_energy(self) -> float:
        return self.total[-1]

    @property
    def final_grad_norm(self) -> float:
        return self.grad_norm[-1]


def _barrier_cap(pts: np.ndarray) -> float:
    bdist = 1.0 - np.hypot(pts[:, 0], pts[:, 1]).max()
    return 0.5 * min(bdist, 0.5 * min_separation(pts))


def _try(pts):
    try:
        return PointConfig(pts)
    except ScrewDiskError:
        return None


def minimize(start: PointConfig, datum: BoundaryDatum, opts: MinimizeOptions | None = None):
    """Descend from ``start``; returns ``(config, trace)``.

    Raises :class:`StallError` (carrying the best iterate and trace) when no
    admissible step gives sufficient decrease before the gradient tolerance
    is met.
    """
    opts = opts or MinimizeOptions()
    tol = opts.tolerance(start.n)
    trace = MinimizeTrace()
    config = start
    energy, grad = energy_and_gradient(config, datum)
    gnorm = float(np.abs(grad).max())
    trace.record(config, energy, gnorm)
    step = opts.initial_step
    prev = None
    floor = np.finfo(float).eps

    for _ in range(opts.max_iters):
        if gnorm <= tol:
            trace.converged = True
            break
        pts = config.points
        g2 = float(np.sum(grad * grad))
        if prev is not None:
            # Barzilai-Borwein guess for the trial step
            s, y = pts - prev[0], grad - prev[1]
            sy = float(np.sum(s * y))
            if sy > 0:
                step = sy / float(np.sum(y * y))
        gmax = float(np.hypot(grad[:, 0], grad[:, 1]).max())
        t = min(step, _barrier_cap(pts) / gmax)
        accepted = None
        while t * gmax > floor * 10:
            trial = _try(pts - t * grad)
            if trial is not None:
                e_new, g_new = energy_and_gradient(trial, datum)
                if e_new < energy and e_new <= energy - ARMIJO_C * t * g2:
                    accepted = (trial, e_new, g_new)
                    break
            t *= opts.shrink_factor
        if accepted is None:
            trace.stalled = True
            raise StallError(
                f"line search failed at gradient norm {gnorm:.3e} (tolerance {tol:.1e})",
                best=config,
                trace=trace,
            )
        prev = (pts, grad)
        config, energy, grad = accepted
        step = t
        gnorm = float(np.abs(grad).max())
        trace.record(config, energy, gnorm)
    else:
        trace.converged = gnorm <= tol
    return config, trace


def random_start(n: int, rng: np.random.Generator, radius: float = 0.9) -> PointConfig:
    """Uniform points in ``B_radius(0)``, resampled until well separated."""
    min_sep = 0.05 / np.sqrt(n)
    while True:
        r = radius * np.sqrt(rng.random(n))
        th = 2 * np.pi * rng.random(n)
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        if n == 1 or min_separation(pts) >= min_sep:
            return PointConfig(pts)


def _one_restart(args):
    n, datum, opts, seed = args
    rng = np.random.default_rng(seed)
    start = random_start(n, rng)
    try:
        config, trace = minimize(start, datum, opts)
    except StallError as exc:
        config, trace = exc.best, exc.trace
    trace.seed = seed
    return config, trace


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def multistart(n: int, datum: BoundaryDatum, opts: MinimizeOptions | None = None, workers: int | None = None):
    """Best of ``opts.restarts`` seeded descents; deterministic given ``opts.seed``.

    Restart ``r`` uses seed ``opts.seed + r``.  Ties are broken by gradient
    norm, then seed.  If the winner stalled, :class:`StallError` is raised
    with it attached.
    """
    if n < 1:
        raise ScrewDiskError("n must be positive")
    opts = opts or MinimizeOptions()
    jobs = [(n, datum, opts, opts.seed + r) for r in range(opts.restarts)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_one_restart, jobs))
    else:
        results = [_one_restart(j) for j in jobs]
    for config, trace in results:
        log.debug("seed %d: energy %.12g grad %.2e", trace.seed, trace.final_energy, trace.final_grad_norm)
    config, trace = min(results, key=lambda r: (r[1].final_energy, r[1].final_grad_norm, r[1].seed))
    if trace.stalled:
        raise StallError(f"best restart (seed {trace.seed}) stalled", best=config, trace=trace)
    return config, trace


def with_seed(opts: MinimizeOptions, seed: int) -> MinimizeOptions:
    return replace(opts, seed=seed)
