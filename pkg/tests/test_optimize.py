import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from conftest import antipodal_energy
from screwdisk.energy import BoundaryDatum, PointConfig, renormalized_energy
from screwdisk.errors import ScrewDiskError, StallError
from screwdisk.optimize import MinimizeOptions, minimize, multistart, random_start, worker_count

FAST = MinimizeOptions(restarts=2)
_U = BoundaryDatum.uniform()


def pair_energy_grid(m=24):
    """Brute-force n = 2, f = 1 energy on a polar 4-D grid, vectorized."""
    r = (np.arange(m) + 0.5) / m * 0.95
    t = 2 * np.pi * np.arange(m) / m
    R1, T1, R2, T2 = np.meshgrid(r, t, r, t, indexing="ij")
    a = R1 * np.exp(1j * T1)
    b = R2 * np.exp(1j * T2)
    with np.errstate(divide="ignore"):
        e = -(np.pi / 4) * (
            np.log(1 - abs(a) ** 2) + np.log(1 - abs(b) ** 2) + 2 * np.log(abs(1 - a * np.conj(b)))
        ) - (np.pi / 2) * np.log(abs(a - b))
    e[~np.isfinite(e)] = np.inf
    i = np.unravel_index(np.argmin(e), e.shape)
    return e[i], (R1[i], T1[i], R2[i], T2[i])


def antipodal_scan():
    """1-D scan of the spectral total along the antipodal family."""
    res = minimize_scalar(
        lambda r: renormalized_energy(PointConfig([[r, 0.0], [-r, 0.0]]), _U).total,
        bounds=(0.3, 0.9),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return res.x, res.fun


def test_options_validation():
    with pytest.raises(ScrewDiskError):
        MinimizeOptions(grad_tol=0)
    with pytest.raises(ScrewDiskError):
        MinimizeOptions(shrink_factor=1.0)
    assert MinimizeOptions().tolerance(8) == pytest.approx(8e-7)


def test_single_point_converges_to_center(uniform):
    cfg, trace = minimize(PointConfig([[0.5, 0.3]]), uniform)
    assert np.hypot(*cfg.points[0]) < 1e-6
    assert trace.converged


def test_trace_is_monotone_and_feasible(cos_datum):
    start = random_start(5, np.random.default_rng(3))
    cfg, trace = minimize(start, cos_datum)
    assert all(b < a for a, b in zip(trace.total, trace.total[1:]))
    assert min(trace.min_bdist) > 0 and min(trace.min_sep) > 0
    assert trace.final_grad_norm <= MinimizeOptions().tolerance(5)


def test_antipodal_oracles_agree():
    r_star = 5 ** -0.25
    r, e = antipodal_scan()
    assert r == pytest.approx(r_star, abs=1e-6)
    assert e == pytest.approx(antipodal_energy(r_star), abs=1e-12)
    e_grid, (r1, t1, r2, t2) = pair_energy_grid()
    # the grid minimum sits near an antipodal pair and above the exact minimum
    assert e_grid >= antipodal_energy(r_star) - 1e-12
    assert abs(np.cos(t1 - t2) + 1) < 1e-9 and abs(r1 - r_star) < 0.05 and abs(r2 - r_star) < 0.05


def test_pair_minimizer(uniform):
    cfg, trace = multistart(2, uniform, FAST)
    r = cfg.radii()
    assert np.allclose(r, 5 ** -0.25, atol=1e-3)
    assert abs(cfg.complex[0] + cfg.complex[1]) < 1e-3
    assert trace.final_energy == pytest.approx(antipodal_energy(5 ** -0.25), abs=1e-8)


def test_pair_seed_independent(uniform):
    energies = [multistart(2, uniform, MinimizeOptions(restarts=1, seed=s))[1].final_energy for s in (1, 2, 3)]
    assert np.ptp(energies) < 1e-6


def test_three_points_equilateral(uniform):
    res = [multistart(3, uniform, MinimizeOptions(restarts=1, seed=s)) for s in (0, 7)]
    assert abs(res[0][1].final_energy - res[1][1].final_energy) < 1e-6
    cfg = res[0][0]
    assert np.ptp(cfg.radii()) < 1e-4
    ring = minimize_scalar(
        lambda r: renormalized_energy(PointConfig.from_complex(r * np.exp(2j * np.pi * np.arange(3) / 3)), uniform).total,
        bounds=(0.2, 0.95),
        method="bounded",
    )
    assert res[0][1].final_energy == pytest.approx(ring.fun, abs=1e-6)


def test_center_any_seed(uniform):
    for seed in (0, 11):
        cfg, trace = multistart(1, uniform, MinimizeOptions(restarts=1, seed=seed))
        assert abs(trace.final_energy) < 1e-8


def test_eight_beats_best_octagon(uniform):
    cfg, trace = multistart(8, uniform, FAST)
    ring = minimize_scalar(
        lambda r: renormalized_energy(PointConfig.from_complex(r * np.exp(2j * np.pi * np.arange(8) / 8)), uniform).total,
        bounds=(0.2, 0.99),
        method="bounded",
    )
    assert trace.final_energy <= ring.fun + 1e-9


def test_multistart_deterministic(cos_datum):
    a = multistart(4, cos_datum, FAST)
    b = multistart(4, cos_datum, FAST)
    assert a[0] == b[0] and a[1].total == b[1].total


def test_parallel_matches_serial(cos_datum):
    a = multistart(3, cos_datum, FAST, workers=1)
    b = multistart(3, cos_datum, FAST, workers=2)
    assert a[0] == b[0]


def test_stall_carries_best_iterate(uniform):
    with pytest.raises(StallError) as info:
        minimize(PointConfig([[0.5, 0.3]]), uniform, MinimizeOptions(grad_tol=1e-300))
    err = info.value
    assert err.kind == "stall" and err.best is not None
    assert err.trace.final_energy == min(err.trace.total)


def test_worker_env(monkeypatch):
    monkeypatch.setenv("SCREWDISK_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SCREWDISK_WORKERS", "junk")
    assert worker_count() == 1
