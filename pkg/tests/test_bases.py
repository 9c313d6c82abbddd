import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from cohsep import bases
from cohsep.bases import (
    Bucket,
    DirectImagingGrid,
    HermiteGauss,
    auto_mode_count,
    bucket_signal,
    di_intensity,
    di_mode_signal,
    hg_beta,
    hg_beta_deriv,
    hg_mode_signal,
    mode_signal,
    parse_basis,
)
from cohsep.errors import DegenerateSceneError
from cohsep.scene import SourceScene, total_detected

SC = SourceScene(d=1.1, sigma=0.8, theta=math.pi / 4, phi=math.pi / 3,
                 kappa=0.75, n_s=1.4)


def test_beta_is_normalized():
    # beta_m^2 is the Poisson(x0^2) mass function: sums to one
    m = np.arange(80)
    for x0 in (0.0, 0.3, 1.7, 4.0):
        assert np.sum(hg_beta(m, x0) ** 2) == pytest.approx(1.0, rel=1e-12)


def test_beta_deriv_matches_finite_difference():
    m = np.arange(12)
    for x0 in (0.05, 0.9, 2.2):
        eps = 1e-6
        fd = (hg_beta(m, x0 + eps) - hg_beta(m, x0 - eps)) / (2 * eps)
        assert np.allclose(hg_beta_deriv(m, x0), fd, rtol=1e-8, atol=1e-12)
    # x0 = 0 limits: only mode 1 has slope
    assert hg_beta_deriv(np.arange(4), 0.0).tolist() == [0.0, 1.0, 0.0, 0.0]


def test_hg_means_from_field_overlaps():
    """N_m must equal |A_m|^2 n_s with A_m the complex overlap amplitudes."""
    sig = hg_mode_signal(SC, m_max=25)
    a = bases.hg_coefficients(SC, 25)
    assert np.allclose(sig.means, SC.n_s * np.abs(a) ** 2, rtol=1e-12, atol=1e-18)


def test_hg_signal_totals_and_derivs():
    sig = hg_mode_signal(SC, m_max=40)
    assert sig.total == pytest.approx(total_detected(SC), rel=1e-12)
    eps = 1e-6
    up = hg_mode_signal(SC.with_(d=SC.d + eps), m_max=40).means
    dn = hg_mode_signal(SC.with_(d=SC.d - eps), m_max=40).means
    assert np.allclose(sig.d_derivs, (up - dn) / (2 * eps), rtol=2e-7, atol=1e-12)
    assert np.allclose(sig.ns_derivs, sig.means / SC.n_s)


@pytest.mark.parametrize("phi,dark_parity", [(0.0, 1), (math.pi, 0)])
def test_parity_extinction(phi, dark_parity):
    # chi = +1 extinguishes odd modes, chi = -1 the even ones
    sc = SourceScene(d=0.9, sigma=1.0, theta=math.pi / 4, phi=phi)
    sig = hg_mode_signal(sc, m_max=16)
    dark = sig.means[dark_parity::2]
    assert np.all(dark == 0.0)
    lit = sig.means[1 - dark_parity::2]
    assert np.all(lit > 0.0)


def test_auto_cutoff_truncation_is_negligible():
    for d in (0.1, 1.0, 4.0, 8.0):
        sc = SourceScene(d=d, sigma=1.0, theta=math.pi / 4, phi=math.pi / 3)
        sig = hg_mode_signal(sc)   # automatic mode count
        assert sig.truncation_error < 1e-12
        assert len(sig) == auto_mode_count(sc)


def test_retained_drops_dark_modes():
    sc = SourceScene(d=0.9, sigma=1.0, theta=math.pi / 4, phi=0.0)
    sig = hg_mode_signal(sc, m_max=16)
    kept = sig.retained()
    assert len(kept) == 8                      # odd modes are exactly dark
    assert kept.mode_index.tolist() == list(range(0, 16, 2))
    assert kept.total == pytest.approx(float(np.sum(sig.means)), rel=1e-15)


def test_epsilons_sum_to_one():
    sig = hg_mode_signal(SC, m_max=30)
    assert np.sum(sig.epsilons) == pytest.approx(1.0, rel=1e-13)


def test_di_intensity_nonnegative_and_normalized():
    x = np.linspace(-8, 8, 401)
    xx, yy = np.meshgrid(x, x)
    inten = di_intensity(SC, xx, yy)
    assert np.all(inten >= 0.0)
    cell = (x[1] - x[0]) ** 2
    assert float(inten.sum()) * cell == pytest.approx(total_detected(SC), rel=1e-6)


def test_di_pixel_means_match_quadrature():
    """Pixel means from erf differences vs direct 2D numerical integration.

    [DERIVED] oracle: scipy.integrate.quad of the separable x/y factors on a
    handful of pixels.
    """
    grid = DirectImagingGrid(half_width=3.0, pixels_per_axis=9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")   # deliberately undersized grid
        sig = di_mode_signal(SC, grid)
    edges = np.linspace(-3.0, 3.0, 10)
    n = 9

    def x_factor(x):
        c, s = math.cos(SC.theta), math.sin(SC.theta)
        g1 = np.exp(-((x - SC.d / 2) ** 2) / (4 * SC.sigma ** 2))
        g2 = np.exp(-((x + SC.d / 2) ** 2) / (4 * SC.sigma ** 2))
        cross = 2 * s * c * math.cos(SC.phi)
        norm = 1.0 / math.sqrt(2 * math.pi * SC.sigma ** 2)
        return norm * (g1 * g1 * c * c + g2 * g2 * s * s + g1 * g2 * cross)

    def y_factor(y):
        norm = 1.0 / math.sqrt(2 * math.pi * SC.sigma ** 2)
        return norm * np.exp(-y * y / (2 * SC.sigma ** 2))

    for ix, iy in [(4, 4), (2, 6), (0, 0), (7, 3)]:
        xi, _ = quad(x_factor, edges[ix], edges[ix + 1], epsabs=1e-13)
        yi, _ = quad(y_factor, edges[iy], edges[iy + 1], epsabs=1e-13)
        k = ix * n + iy
        assert sig.means[k] == pytest.approx(SC.kappa * SC.n_s * xi * yi, rel=1e-9)


def test_di_derivs_match_finite_difference():
    grid = DirectImagingGrid(half_width=4.5, pixels_per_axis=21)
    sig = di_mode_signal(SC, grid)
    eps = 1e-6
    up = di_mode_signal(SC.with_(d=SC.d + eps), grid).means
    dn = di_mode_signal(SC.with_(d=SC.d - eps), grid).means
    fd = (up - dn) / (2 * eps)
    assert np.allclose(sig.d_derivs, fd, rtol=3e-6, atol=1e-10)


def test_di_default_half_width_tracks_scene():
    sig = di_mode_signal(SC.with_(d=3.0), DirectImagingGrid(pixels_per_axis=31))
    # coverage 4 sigma + d/2 keeps the missed flux tiny
    assert sig.truncation_error < 1e-4
    assert sig.total == pytest.approx(total_detected(SC.with_(d=3.0)), rel=2e-4)


def test_di_narrow_grid_warns():
    with pytest.warns(UserWarning, match="half-width"):
        di_mode_signal(SC, DirectImagingGrid(half_width=1.0, pixels_per_axis=11))


def test_bucket_collapses_everything():
    sig = bucket_signal(SC)
    assert len(sig) == 1
    assert sig.total == pytest.approx(total_detected(SC), rel=1e-14)
    assert sig.epsilons[0] == 1.0


def test_dispatch_and_labels():
    assert mode_signal(SC, HermiteGauss(m_max=6)).label == "hg[6]"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert mode_signal(SC, DirectImagingGrid(half_width=4, pixels_per_axis=15)).label == "di[15x15]"
    assert mode_signal(SC, Bucket()).label == "bucket"


def test_degenerate_scene_rejected_by_signals():
    dark = SourceScene(d=0.0, sigma=1.0, theta=math.pi / 4, phi=math.pi)
    for basis in (HermiteGauss(m_max=8), Bucket()):
        with pytest.raises(DegenerateSceneError):
            mode_signal(dark, basis)


@pytest.mark.parametrize("text,expected", [
    ("hg", HermiteGauss()),
    ("hg[12]", HermiteGauss(m_max=12)),
    ("di", DirectImagingGrid()),
    ("di[33]", DirectImagingGrid(pixels_per_axis=33)),
    ("bucket", Bucket()),
])
def test_parse_basis(text, expected):
    assert parse_basis(text) == expected


def test_parse_basis_rejects_junk():
    for bad in ("hq", "hg[]", "di[0x0]", "pixels"):
        with pytest.raises(ValueError):
            parse_basis(bad)
