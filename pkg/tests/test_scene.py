import configparser
import math

import numpy as np
import pytest

from cohsep import scene as sc
from cohsep.errors import DegenerateSceneError
from cohsep.scene import SourceScene


def test_defaults_and_derived():
    s = SourceScene(d=1.0, sigma=2.0)
    assert s.theta == pytest.approx(math.pi / 4)
    assert s.kappa == 1.0 and s.n_s == 1.0
    assert s.delta == pytest.approx(math.exp(-1.0 / 32.0), rel=1e-15)
    assert s.chi == pytest.approx(1.0)


@pytest.mark.parametrize("kw", [
    dict(d=-0.1), dict(sigma=0.0), dict(sigma=-1.0), dict(theta=-0.01),
    dict(theta=math.pi / 4 + 0.01), dict(kappa=0.0), dict(kappa=1.2),
    dict(n_s=0.0), dict(d=math.inf), dict(phi=math.nan),
])
def test_rejects_bad_parameters(kw):
    base = dict(d=1.0, sigma=1.0)
    base.update(kw)
    with pytest.raises(ValueError):
        SourceScene(**base)


def test_phi_wraps_into_principal_range():
    s = SourceScene(d=1.0, sigma=1.0, phi=-math.pi / 2)
    assert s.phi == pytest.approx(3 * math.pi / 2)
    assert SourceScene(d=1, sigma=1, phi=2 * math.pi).phi == 0.0


def test_chi_range_and_sign():
    # chi = sin(2 theta) cos(phi): max modulus 1 at equal brightness
    assert sc.compute_chi(math.pi / 4, 0.0) == pytest.approx(1.0)
    assert sc.compute_chi(math.pi / 4, math.pi) == pytest.approx(-1.0)
    assert abs(sc.compute_chi(math.pi / 8, 1.0)) < 1.0
    assert sc.compute_chi(0.0, 0.3) == 0.0


def test_one_plus_chi_delta_no_cancellation():
    """The expm1 grouping keeps full precision where 1+chi*delta -> 0.

    [DERIVED] reference: for chi=-1, 1 - exp(-t) evaluated via expm1 in
    extended precision.
    """
    for d in (1e-6, 1e-3, 0.1, 1.0):
        t = np.longdouble(d) ** 2 / 8
        ref = float(-np.expm1(-t))
        got = sc.one_plus_chi_delta(-1.0, d, 1.0)
        assert got == pytest.approx(ref, rel=1e-14)
    # generic point agrees with the naive formula where that one is fine
    naive = 1.0 + 0.5 * math.exp(-0.5 ** 2 / 8)
    assert sc.one_plus_chi_delta(0.5, 0.5, 1.0) == pytest.approx(naive, rel=1e-15)


def test_total_detected_and_derivative():
    s = SourceScene(d=1.3, sigma=0.9, theta=math.pi / 4, phi=math.pi / 3,
                    kappa=0.7, n_s=2.5)
    nd = sc.total_detected(s)
    assert nd == pytest.approx(0.7 * 2.5 * (1 + s.chi * s.delta), rel=1e-14)
    # derivative against central differences of N_D(d)
    eps = 1e-6
    fd = (sc.total_detected(s.with_(d=1.3 + eps)) -
          sc.total_detected(s.with_(d=1.3 - eps))) / (2 * eps)
    assert sc.total_detected_d_deriv(s) == pytest.approx(fd, rel=1e-8)


def test_degenerate_dark_scene_raises():
    s = SourceScene(d=0.0, sigma=1.0, theta=math.pi / 4, phi=math.pi)
    with pytest.raises(DegenerateSceneError):
        sc.total_detected(s)


def test_detected_variance_floor():
    s = SourceScene(d=2.0, sigma=1.0, kappa=1.0, n_s=1.0, theta=0.0)
    # h = -1/n_s with kappa = 1, chi = 0: N_D = n_s, variance exactly 0
    assert sc.detected_variance(s, -1.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        sc.detected_variance(s, -1.5)


def test_config_round_trip(tmp_path):
    s = SourceScene(d=0.37, sigma=1.21, theta=0.41, phi=5.9, kappa=0.63, n_s=3.3)
    cp = sc.scene_to_config(s)
    path = tmp_path / "scene.cfg"
    with open(path, "w") as fh:
        cp.write(fh)
    cp2 = configparser.ConfigParser()
    cp2.read(path)
    s2 = sc.scene_from_config(cp2)
    assert s2 == s


def test_config_errors():
    cp = configparser.ConfigParser()
    with pytest.raises(ValueError, match="missing"):
        sc.scene_from_config(cp)
    cp["scene"] = {"d": "1.0"}
    with pytest.raises(ValueError, match="sigma"):
        sc.scene_from_config(cp)
    cp["scene"] = {"d": "1.0", "sigma": "oops"}
    with pytest.raises(ValueError, match="not a number"):
        sc.scene_from_config(cp)
