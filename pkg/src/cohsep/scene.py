"""Two-source imaging scene: geometry, mutual coherence and detected flux.

The model is a pair of point sources at (+d/2, 0) and (-d/2, 0) in the image
plane, both fed coherently from one principal mode.  A beam splitter with
angle ``theta`` sets the brightness ratio tan^2(theta) between the sources and
``phi`` is their mutual phase.  The attenuated Gaussian point-spread function
has 1/e^2 intensity radius 2*sigma; ``kappa`` is the end-to-end transmissivity
and ``n_s`` the mean photon number emitted into the principal mode.

Two derived numbers control everything downstream:

* ``delta``: overlap of the two displaced PSF amplitudes, exp(-d^2/8 sigma^2)
* ``chi``:   interference contrast sin(2 theta) cos(phi)

The mean detected photon number is N_D = kappa * n_s * (1 + chi*delta).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateSceneError

TWO_PI = 2.0 * math.pi

__all__ = [
    "SourceScene",
    "InterferenceParams",
    "psf_amplitude",
    "compute_chi",
    "compute_delta",
    "one_plus_chi_delta",
    "interference",
    "total_detected",
    "total_detected_d_deriv",
    "detected_variance",
    "scene_from_config",
    "scene_to_config",
]


@dataclass(frozen=True)
class SourceScene:
    """Immutable scene description.

    Parameters
    ----------
    d : float
        Source separation, same length unit as ``sigma``.  Non-negative.
    sigma : float
        PSF width parameter (amplitude st.dev. is sqrt(2)*sigma).
    theta : float
        Splitting angle in [0, pi/4]; brightness ratio is tan^2(theta).
    phi : float
        Mutual phase, normalized into [0, 2*pi) on construction.
    kappa : float
        Transmissivity in (0, 1].
    n_s : float
        Mean photon number emitted into the principal mode, > 0.
    """

    d: float
    sigma: float
    theta: float = math.pi / 4
    phi: float = 0.0
    kappa: float = 1.0
    n_s: float = 1.0

    def __post_init__(self):
        if not (self.d >= 0.0 and math.isfinite(self.d)):
            raise ValueError(f"separation d must be finite and >= 0, got {self.d}")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma}")
        if not (0.0 <= self.theta <= math.pi / 4 + 1e-15):
            raise ValueError(
                f"theta must lie in [0, pi/4] (got {self.theta}); "
                "swap the sources and shift phi by pi to reach this range"
            )
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")
        if not (0.0 < self.kappa <= 1.0):
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")
        if not (self.n_s > 0.0 and math.isfinite(self.n_s)):
            raise ValueError(f"n_s must be finite and > 0, got {self.n_s}")
        object.__setattr__(self, "phi", self.phi % TWO_PI)

    # -- convenience accessors -------------------------------------------------

    @property
    def chi(self) -> float:
        return compute_chi(self.theta, self.phi)

    @property
    def delta(self) -> float:
        return compute_delta(self.d, self.sigma)

    def with_(self, **kw) -> "SourceScene":
        """Copy of the scene with some fields replaced."""
        return replace(self, **kw)


@dataclass(frozen=True)
class InterferenceParams:
    """The pair (chi, delta) that the scene reduces to for most formulas."""

    chi: float
    delta: float


def compute_chi(theta: float, phi: float) -> float:
    """Interference contrast chi = sin(2 theta) cos(phi), in [-1, 1]."""
    return math.sin(2.0 * theta) * math.cos(phi)


def compute_delta(d, sigma):
    """PSF amplitude overlap exp(-d^2 / (8 sigma^2)) of sources d apart."""
    d = np.asarray(d, dtype=float)
    out = np.exp(-(d * d) / (8.0 * np.asarray(sigma, dtype=float) ** 2))
    return float(out) if out.ndim == 0 else out


def one_plus_chi_delta(chi: float, d: float, sigma: float) -> float:
    """1 + chi*delta evaluated without cancellation.

    For chi < 0 the naive form loses all precision as d -> 0; writing it as
    (1 + chi) + chi*expm1(-d^2/8sigma^2) keeps both addends non-negative.
    """
    t = (d * d) / (8.0 * sigma * sigma)
    return (1.0 + chi) + chi * math.expm1(-t)


def interference(scene: SourceScene) -> InterferenceParams:
    return InterferenceParams(chi=scene.chi, delta=scene.delta)


def psf_amplitude(x, y, sigma):
    """Normalized PSF amplitude u0(x, y) with unit L2 norm.

    u0(r) = sqrt(1 / (2 pi sigma^2)) * exp(-|r|^2 / (4 sigma^2))
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    norm = np.sqrt(1.0 / (2.0 * np.pi * sigma * sigma))
    return norm * np.exp(-(x * x + y * y) / (4.0 * sigma * sigma))


def total_detected(scene: SourceScene) -> float:
    """Mean detected photon number N_D = kappa * n_s * (1 + chi*delta).

    Raises
    ------
    DegenerateSceneError
        At the fully destructive point (chi = -1 and d = 0) where N_D = 0
        and per-photon quantities are undefined.
    """
    gain = one_plus_chi_delta(scene.chi, scene.d, scene.sigma)
    if gain <= 0.0:
        raise DegenerateSceneError(
            "N_D = 0: anti-phase equal-brightness sources at zero separation"
        )
    return scene.kappa * scene.n_s * gain


def total_detected_d_deriv(scene: SourceScene) -> float:
    """d N_D / dd = kappa * n_s * chi * delta'(d)."""
    dl = scene.delta
    return scene.kappa * scene.n_s * scene.chi * dl * (-scene.d / (4.0 * scene.sigma**2))


def detected_variance(scene: SourceScene, h: float) -> float:
    """Detected photon-number variance Delta N_D^2 = N_D (1 + h N_D).

    ``h`` is the bunching parameter g2 - 1 of the source; see
    :func:`cohsep.photostats.h_param`.  The result is zero exactly for a
    lossless Fock arrangement (1 + h N_D = 0) and an exception is raised if
    the combination would be negative, which signals an inconsistent (h, N_D)
    pair rather than a physical state.
    """
    nd = total_detected(scene)
    v = nd * (1.0 + h * nd)
    if v < 0.0:
        raise ValueError(
            f"negative detected variance: h={h} is below the -1/N_D floor for N_D={nd}"
        )
    return v


# -- flat key-value serialization ---------------------------------------------

_SCENE_KEYS = ("d", "sigma", "theta", "phi", "kappa", "n_s")


def scene_to_config(scene: SourceScene, parser: configparser.ConfigParser | None = None):
    """Write the scene into a ``[scene]`` section of a flat key-value config."""
    cp = parser if parser is not None else configparser.ConfigParser()
    cp["scene"] = {k: repr(getattr(scene, k)) for k in _SCENE_KEYS}
    return cp


def scene_from_config(parser: configparser.ConfigParser, section: str = "scene") -> SourceScene:
    """Read a scene from a ``[scene]`` section; angles are plain radians."""
    if not parser.has_section(section):
        raise ValueError(f"config is missing the [{section}] section")
    sec = parser[section]
    kwargs = {}
    for key in _SCENE_KEYS:
        if key not in sec:
            if key in ("d", "sigma"):
                raise ValueError(f"config section [{section}] is missing key '{key}'")
            continue
        try:
            kwargs[key] = float(sec[key])
        except ValueError as exc:
            raise ValueError(f"config key [{section}] {key} = {sec[key]!r} is not a number") from exc
    return SourceScene(**kwargs)
