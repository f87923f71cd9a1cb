import numpy as np
import pytest

from screwdisk.energy import PointConfig, renormalized_energy
from screwdisk.errors import CollisionError, CostGuardError
from screwdisk.oracle import (
    QuadratureGrid,
    identity_check,
    interaction_energy,
    oracle_energy,
    self_energy,
)

COARSE = QuadratureGrid(128, 256)


def test_grid_integrates_quadratics():
    g = QuadratureGrid()
    assert g.integrate_disk(lambda x, y: np.ones_like(x)) == pytest.approx(np.pi, abs=1e-12)
    assert g.integrate_disk(lambda x, y: x * x + 2 * x * y) == pytest.approx(np.pi / 4, abs=1e-12)
    c = (0.2, -0.1)
    area = g.integrate_disk(lambda x, y: (x - c[0]) ** 2 + (y - c[1]) ** 2 + y, c, 0.5)
    assert area == pytest.approx(np.pi * 0.5**4 / 2 + c[1] * np.pi * 0.25, abs=1e-12)


def test_self_energy_center(uniform):
    assert self_energy((0.0, 0.0), uniform, grid=COARSE) == pytest.approx(0, abs=1e-12)


def test_self_energy_single_point_closed_form(uniform):
    assert self_energy((0.6, 0.0), uniform) == pytest.approx(-np.pi * np.log(0.64), abs=1e-6)


def test_self_energy_n_independent(uniform):
    a = self_energy((0.6, 0.0), uniform, n=1, grid=COARSE)
    assert self_energy((0.6, 0.0), uniform, n=2, grid=COARSE) == a
    with pytest.raises(ValueError):
        self_energy((0.6, 0.0), uniform, n=0)


def test_self_energy_rotation_invariant(uniform):
    vals = [self_energy((0.5 * np.cos(t), 0.5 * np.sin(t)), uniform, grid=COARSE) for t in (0.0, 1.0, 2.5)]
    assert np.ptp(vals) < 1e-8


def test_interaction_symmetric(cos_datum):
    a, b = (0.3, 0.1), (-0.2, -0.35)
    assert interaction_energy(a, b, cos_datum, grid=COARSE) == pytest.approx(
        interaction_energy(b, a, cos_datum, grid=COARSE), rel=1e-6
    )


def test_interaction_log_asymptotics(uniform):
    s = 1e-3
    val = interaction_energy((s / 2, 0.0), (-s / 2, 0.0), uniform, grid=COARSE)
    assert val / (-2 * np.pi * np.log(s)) == pytest.approx(1.0, rel=0.1)


def test_interaction_rejects_collision(uniform):
    with pytest.raises(CollisionError):
        interaction_energy((0.1, 0.1), (0.1, 0.1), uniform)


def test_identity_origin(uniform):
    assert identity_check(PointConfig([[0.0, 0.0]]), uniform, COARSE) <= 1e-6


def test_pair_matches_spectral(uniform):
    cfg = PointConfig([[0.25, 0.0], [-0.25, 0.0]])
    assert oracle_energy(cfg, uniform, COARSE) == pytest.approx(renormalized_energy(cfg, uniform).total, abs=1e-4)


def test_identity_converges_with_resolution(cos_datum):
    cfg = PointConfig([[0.5, 0.2], [-0.3, -0.4]])
    errs = [identity_check(cfg, cos_datum, QuadratureGrid(m, 2 * m)) for m in (8, 16, 32)]
    assert errs[2] < errs[1] < errs[0]
    assert np.log2(errs[0] / errs[1]) >= 1


def test_cost_guard(uniform):
    cfg = PointConfig([[0.1 * k, 0.0] for k in range(4)])
    with pytest.raises(CostGuardError):
        identity_check(cfg, uniform)
