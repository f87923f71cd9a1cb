import numpy as np
import pytest

from screwdisk.disk import FourierSeries
from screwdisk.energy import BoundaryDatum


def trapezoid_coeffs(func, K, N=4096):
    """Fourier coefficients of a periodic function by the trapezoid rule.

    Independent of the analytic series: samples the function itself.
    """
    th = 2 * np.pi * np.arange(N) / N
    v = func(th)
    k = np.arange(1, K + 1)[:, None]
    mean = v.mean()
    cos = 2 * (np.cos(k * th) @ v) / N
    sin = 2 * (np.sin(k * th) @ v) / N
    return mean, cos, sin


def antipodal_energy(r):
    """n = 2, f = 1: closed form for the pair at +-(r, 0)."""
    return -(np.pi / 2) * (np.log(1 - r**4) + np.log(2 * r))


@pytest.fixture
def uniform():
    return BoundaryDatum.uniform()


@pytest.fixture
def cos_datum():
    return BoundaryDatum(FourierSeries(1.0, [0.5]))
