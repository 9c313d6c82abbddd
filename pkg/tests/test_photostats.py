import numpy as np
import pytest

from cohsep import photostats as ps
from cohsep.errors import UnsupportedStatisticsError


def test_h_values():
    assert ps.h_param(ps.Fock(1), 1.0) == -1.0
    assert ps.h_param(ps.Fock(4), 4.0) == pytest.approx(-0.25)
    assert ps.h_param(ps.Poisson(), 0.7) == 0.0
    assert ps.h_param(ps.Thermal(), 5.0) == 1.0
    assert ps.h_param(ps.CustomH(0.3), 2.0) == 0.3


def test_fock_requires_matching_brightness():
    with pytest.raises(ValueError, match="incompatible"):
        ps.h_param(ps.Fock(2), 1.5)
    with pytest.raises(ValueError):
        ps.Fock(0)
    with pytest.raises(ValueError):
        ps.Fock(2.5)


def test_custom_h_floor():
    # h >= -1/n_s is the positivity limit of the number variance
    ps.h_param(ps.CustomH(-0.5), 2.0)
    with pytest.raises(ValueError, match="floor"):
        ps.h_param(ps.CustomH(-0.51), 2.0)
    with pytest.raises(UnsupportedStatisticsError):
        ps.sample_emitted(ps.CustomH(0.2), 1.0, np.random.default_rng(0))


def test_emission_moments():
    """Sampled mean/variance match n_s and n_s(1 + h n_s) for each law."""
    rng = np.random.default_rng(42)
    n = 200_000
    for stats, n_s in [(ps.Fock(3), 3.0), (ps.Poisson(), 1.7), (ps.Thermal(), 2.4)]:
        x = ps.sample_emitted(stats, n_s, rng, size=n)
        h = ps.h_param(stats, n_s)
        var_expected = n_s * (1 + h * n_s)
        assert np.mean(x) == pytest.approx(n_s, abs=5 * np.sqrt(max(var_expected, 1e-12) / n))
        assert np.var(x) == pytest.approx(var_expected, rel=0.03, abs=1e-12)


def test_total_equals_sum_of_cycles():
    # the collapsed mu-cycle draw has the same first two moments as summing
    rng = np.random.default_rng(3)
    mu, n_s = 77, 1.9
    for stats in (ps.Poisson(), ps.Thermal()):
        tot = ps.sample_emitted_total(stats, n_s, mu, rng, size=100_000)
        h = ps.h_param(stats, n_s)
        assert np.mean(tot) == pytest.approx(mu * n_s, rel=0.01)
        assert np.var(tot) == pytest.approx(mu * n_s * (1 + h * n_s), rel=0.03)
    assert ps.sample_emitted_total(ps.Fock(2), 2.0, mu, rng) == 2 * mu


def test_mode_counts_conserve_photons():
    rng = np.random.default_rng(11)
    probs = np.array([0.2, 0.1, 0.05])
    counts = ps.sample_mode_counts(probs, 10_000, rng)
    assert counts.shape == (3,)
    assert counts.sum() <= 10_000           # the rest went to the loss channel
    assert counts.sum() == pytest.approx(10_000 * probs.sum(), rel=0.05)


def test_mode_counts_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="negative"):
        ps.sample_mode_counts([-0.1, 0.5], 10, rng)
    with pytest.raises(ValueError, match="> 1"):
        ps.sample_mode_counts([0.7, 0.5], 10, rng)


def test_lossy_fock_warning():
    with pytest.warns(UserWarning, match="linear-loss"):
        ps.check_fock_loss_model(ps.Fock(2), kappa=0.5)
    # no warning in the weak-transmission regime or for other laws
    ps.check_fock_loss_model(ps.Fock(2), kappa=0.2)
    ps.check_fock_loss_model(ps.Thermal(), kappa=0.9)


@pytest.mark.parametrize("text,expected", [
    ("poisson", ps.Poisson()),
    (" Thermal ", ps.Thermal()),
    ("fock[3]", ps.Fock(3)),
    ("custom_h[0.25]", ps.CustomH(0.25)),
    ("custom_h[-1e-1]", ps.CustomH(-0.1)),
])
def test_parse_statistics(text, expected):
    assert ps.parse_statistics(text) == expected


def test_parse_statistics_rejects_junk():
    for bad in ("gauss", "fock", "fock[-1]", "fock[2.5]", "custom_h[]"):
        with pytest.raises(ValueError):
            ps.parse_statistics(bad)
