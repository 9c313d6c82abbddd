"""Measurement bases and their first-moment signals.

Three measurements are modelled:

* ``HermiteGauss``: spatial-mode demultiplexing onto Hermite-Gauss modes
  matched to the PSF width, aligned with the separation axis.
* ``DirectImagingGrid``: an ideal pixel camera; each pixel integrates the
  intensity over its cell.
* ``Bucket``: a single detector collecting everything (photon number only).

Each basis maps a scene to a :class:`ModeSignal`: per-mode mean counts per
emission cycle together with analytic derivatives with respect to the
separation ``d`` and the source brightness ``n_s``.  Amplitude-level values
(sqrt of the means and their d-derivatives) are carried alongside because
every downstream sensitivity sum is evaluated in amplitude form, which stays
finite where a mode mean crosses zero.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammainc, gammaln, ndtr

from .csvio import write_csv
from .errors import DegenerateSceneError
from .scene import SourceScene, compute_delta, total_detected

__all__ = [
    "HermiteGauss",
    "DirectImagingGrid",
    "Bucket",
    "MeasurementBasis",
    "ModeSignal",
    "hg_beta",
    "hg_beta_deriv",
    "hg_coefficients",
    "auto_mode_count",
    "hg_mode_signal",
    "di_intensity",
    "di_mode_signal",
    "bucket_signal",
    "mode_signal",
    "parse_basis",
    "write_signal_csv",
]

MEAN_FLOOR = 1e-300  # modes below this mean carry no usable counts
AUTO_TAIL = 1e-12
AUTO_GUARD_MODES = 4


@dataclass(frozen=True)
class HermiteGauss:
    """Hermite-Gauss demultiplexer; ``m_max`` modes, or None for automatic."""

    m_max: int | None = None

    def __post_init__(self):
        if self.m_max is not None and self.m_max < 1:
            raise ValueError("m_max must be >= 1 (or None for automatic)")


@dataclass(frozen=True)
class DirectImagingGrid:
    """Square pixel grid over [-half_width, half_width]^2.

    ``half_width=None`` resolves to 4*sigma + d/2 when the signal is built.
    """

    half_width: float | None = None
    pixels_per_axis: int = 257

    def __post_init__(self):
        if self.pixels_per_axis < 2:
            raise ValueError("pixels_per_axis must be >= 2")
        if self.half_width is not None and not self.half_width > 0:
            raise ValueError("half_width must be > 0")


@dataclass(frozen=True)
class Bucket:
    pass


MeasurementBasis = HermiteGauss | DirectImagingGrid | Bucket


@dataclass
class ModeSignal:
    """First moments of the counts a basis produces for one scene.

    Attributes
    ----------
    means : ndarray
        Mean counts N_m per emission cycle.
    d_derivs, ns_derivs : ndarray
        Analytic dN_m/dd and dN_m/dn_s (the latter is N_m / n_s).
    amp_means, amp_d_derivs : ndarray
        sqrt(N_m) and d sqrt(N_m)/dd, finite even where N_m = 0.
    total, d_total : float
        Captured total sum(N_m) and its d-derivative.
    n_s : float
        Source brightness the signal was built at.
    truncation_error : float
        Relative detected flux missed by the finite basis, 1 - total/N_D.
    """

    means: np.ndarray
    d_derivs: np.ndarray
    ns_derivs: np.ndarray
    amp_means: np.ndarray
    amp_d_derivs: np.ndarray
    total: float
    d_total: float
    n_s: float
    truncation_error: float = 0.0
    label: str = ""
    mode_index: np.ndarray = field(default=None)  # original indices after filtering

    def __post_init__(self):
        if self.mode_index is None:
            self.mode_index = np.arange(len(self.means))
        if self.total <= 0.0:
            raise DegenerateSceneError("signal captures no light (total mean is zero)")

    def __len__(self):
        return len(self.means)

    @property
    def epsilons(self) -> np.ndarray:
        """Relative intensities eps_m = N_m / total; sums to one exactly."""
        return self.means / self.total

    def retained(self, floor: float = MEAN_FLOOR) -> "ModeSignal":
        """Signal restricted to modes with mean above ``floor``.

        Totals are recomputed over the kept subset so that the covariance of
        the kept counts keeps the diag + h*N*N^T structure self-consistently.
        """
        keep = self.means > floor
        if keep.all():
            return self
        return replace(
            self,
            means=self.means[keep],
            d_derivs=self.d_derivs[keep],
            ns_derivs=self.ns_derivs[keep],
            amp_means=self.amp_means[keep],
            amp_d_derivs=self.amp_d_derivs[keep],
            total=float(np.sum(self.means[keep])),
            d_total=float(np.sum(self.d_derivs[keep])),
            mode_index=self.mode_index[keep],
        )


# ---------------------------------------------------------------------------
# Hermite-Gauss demultiplexing
# ---------------------------------------------------------------------------

def hg_beta(m, x0):
    """beta_m(x0) = exp(-x0^2/2) x0^m / sqrt(m!), evaluated in log space.

    These are the displacement coefficients of a Gaussian beam onto the HG
    ladder; sum of beta_m^2 over m is one for every x0.
    """
    m = np.asarray(m)
    x0 = float(x0)
    if x0 == 0.0:
        return np.where(m == 0, 1.0, 0.0).astype(float)
    logb = -0.5 * x0 * x0 + m * math.log(x0) - 0.5 * gammaln(m + 1.0)
    return np.exp(logb)


def hg_beta_deriv(m, x0):
    """d beta_m / d x0 = beta_m * (m/x0 - x0), with the x0=0 limit built in."""
    m = np.asarray(m)
    x0 = float(x0)
    if x0 == 0.0:
        # beta_0' = 0, beta_1' = 1, all higher orders flat at the origin
        return np.where(m == 1, 1.0, 0.0).astype(float)
    return hg_beta(m, x0) * (m / x0 - x0)


def hg_coefficients(scene: SourceScene, m_max: int) -> np.ndarray:
    """Complex field overlaps A_m of the principal mode with HG modes 0..m_max-1.

    A_m = sqrt(kappa) * ((-1)^m cos(theta) + e^{i phi} sin(theta)) * beta_m(d/4sigma)
    """
    m = np.arange(m_max)
    x0 = scene.d / (4.0 * scene.sigma)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    pol = sign * math.cos(scene.theta) + np.exp(1j * scene.phi) * math.sin(scene.theta)
    return math.sqrt(scene.kappa) * pol * hg_beta(m, x0)


def auto_mode_count(scene: SourceScene, tail: float = AUTO_TAIL,
                    guard: int = AUTO_GUARD_MODES) -> int:
    """Smallest mode count whose neglected beta^2 mass is below ``tail``.

    beta_m^2 is a Poisson mass with rate (d/4sigma)^2, so the neglected mass
    beyond index M is the regularized lower incomplete gamma gammainc(M+1,
    rate).  ``guard`` extra modes are added on top.
    """
    lam = (scene.d / (4.0 * scene.sigma)) ** 2
    m = 0
    while gammainc(m + 1, lam) >= tail:
        m += 1
        if m > 100000:  # pragma: no cover - unreachable for sane scenes
            raise RuntimeError("mode cutoff search did not terminate")
    return m + 1 + guard


def hg_mode_signal(scene: SourceScene, m_max: int | None = None) -> ModeSignal:
    """Mean HG mode counts and derivatives.

    N_m = kappa n_s (1 + (-1)^m chi) beta_m^2(d/4sigma).  Even modes carry
    the in-phase part of the interference, odd modes the anti-phase part.
    """
    count = auto_mode_count(scene) if m_max is None else int(m_max)
    m = np.arange(count)
    x0 = scene.d / (4.0 * scene.sigma)
    b = hg_beta(m, x0)
    bp = hg_beta_deriv(m, x0) / (4.0 * scene.sigma)  # d beta_m / dd
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    parity = np.maximum(1.0 + sign * scene.chi, 0.0)
    amp_scale = np.sqrt(scene.kappa * scene.n_s * parity)
    amp = amp_scale * b
    damp = amp_scale * bp
    means = amp * amp
    d_derivs = 2.0 * amp * damp
    total = float(np.sum(means))
    nd = total_detected(scene)  # raises on the degenerate scene
    return ModeSignal(
        means=means,
        d_derivs=d_derivs,
        ns_derivs=means / scene.n_s,
        amp_means=amp,
        amp_d_derivs=damp,
        total=total,
        d_total=float(np.sum(d_derivs)),
        n_s=scene.n_s,
        truncation_error=max(1.0 - total / nd, 0.0),
        label=f"hg[{count}]",
    )


# ---------------------------------------------------------------------------
# Direct imaging
# ---------------------------------------------------------------------------

def di_intensity(scene: SourceScene, x, y):
    """Image-plane intensity of the coherently fed source pair.

    I(r) = kappa n_s (u0^2(r-r1) cos^2 + u0^2(r-r2) sin^2
           + u0(r-r1) u0(r-r2) sin(2 theta) cos(phi)),  r_{1,2} = (+-d/2, 0).

    Non-negative everywhere; integrates to N_D over the plane.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s2 = scene.sigma * scene.sigma
    c, s = math.cos(scene.theta), math.sin(scene.theta)
    norm = 1.0 / (2.0 * math.pi * s2)
    g1 = np.exp(-((x - scene.d / 2) ** 2 + y * y) / (4.0 * s2))
    g2 = np.exp(-((x + scene.d / 2) ** 2 + y * y) / (4.0 * s2))
    cross = 2.0 * s * c * math.cos(scene.phi)
    return scene.kappa * scene.n_s * norm * (g1 * g1 * c * c + g2 * g2 * s * s + g1 * g2 * cross)


def _axis_masses(edges, offset, sigma):
    """Per-cell masses of a unit Gaussian N(offset, sigma^2) and their
    derivative with respect to the offset."""
    z = (edges - offset) / sigma
    cdf = ndtr(z)
    pdf = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    mass = np.diff(cdf)
    dmass_doffset = -np.diff(pdf) / sigma
    return mass, dmass_doffset


def di_grid_edges(scene: SourceScene, grid: DirectImagingGrid):
    hw = grid.half_width
    if hw is None:
        hw = 4.0 * scene.sigma + scene.d / 2.0
    return np.linspace(-hw, hw, grid.pixels_per_axis + 1), hw


def di_mode_signal(scene: SourceScene, grid: DirectImagingGrid | None = None) -> ModeSignal:
    """Pixel-integrated intensities and analytic d-derivatives.

    The intensity separates into x and y marginals, so every pixel mean is an
    exact product of per-axis Gaussian masses (no quadrature involved).
    Pixels are flattened x-major: mode k = ix * n + iy.
    """
    if grid is None:
        grid = DirectImagingGrid()
    edges, hw = di_grid_edges(scene, grid)
    needed = 4.0 * scene.sigma + scene.d / 2.0
    c, s = math.cos(scene.theta), math.sin(scene.theta)
    chi, dl = scene.chi, scene.delta
    ddl = dl * (-scene.d / (4.0 * scene.sigma ** 2))

    px_plus, dpx_plus = _axis_masses(edges, +scene.d / 2.0, scene.sigma)
    px_minus, dpx_minus = _axis_masses(edges, -scene.d / 2.0, scene.sigma)
    px_zero, _ = _axis_masses(edges, 0.0, scene.sigma)
    xm = c * c * px_plus + s * s * px_minus + chi * dl * px_zero
    # offsets move as +-d/2, plus the d-dependence of the overlap term
    dxm = 0.5 * c * c * dpx_plus - 0.5 * s * s * dpx_minus + chi * ddl * px_zero
    ym, _ = _axis_masses(edges, 0.0, scene.sigma)

    kn = scene.kappa * scene.n_s
    means = kn * np.outer(xm, ym).ravel()
    d_derivs = kn * np.outer(dxm, ym).ravel()
    means = np.maximum(means, 0.0)  # clip fp negatives from the cross term
    amp = np.sqrt(means)
    with np.errstate(divide="ignore", invalid="ignore"):
        damp = np.where(means > 0.0, d_derivs / (2.0 * amp), 0.0)

    total = float(np.sum(means))
    nd = total_detected(scene)
    trunc = max(1.0 - total / nd, 0.0)
    if hw < needed - 1e-12:
        warnings.warn(
            f"direct-imaging grid half-width {hw:g} is below 4*sigma + d/2 = {needed:g}; "
            f"about {trunc:.3e} of the detected flux falls outside",
            UserWarning,
            stacklevel=2,
        )
    return ModeSignal(
        means=means,
        d_derivs=d_derivs,
        ns_derivs=means / scene.n_s,
        amp_means=amp,
        amp_d_derivs=damp,
        total=total,
        d_total=float(np.sum(d_derivs)),
        n_s=scene.n_s,
        truncation_error=trunc,
        label=f"di[{grid.pixels_per_axis}x{grid.pixels_per_axis}]",
    )


# ---------------------------------------------------------------------------
# Bucket detection
# ---------------------------------------------------------------------------

def bucket_signal(scene: SourceScene) -> ModeSignal:
    """Single-mode signal: everything lands in one detector."""
    nd = total_detected(scene)
    dnd = scene.kappa * scene.n_s * scene.chi * scene.delta * (-scene.d / (4.0 * scene.sigma**2))
    amp = math.sqrt(nd)
    return ModeSignal(
        means=np.array([nd]),
        d_derivs=np.array([dnd]),
        ns_derivs=np.array([nd / scene.n_s]),
        amp_means=np.array([amp]),
        amp_d_derivs=np.array([dnd / (2.0 * amp)]),
        total=nd,
        d_total=dnd,
        n_s=scene.n_s,
        truncation_error=0.0,
        label="bucket",
    )


def mode_signal(scene: SourceScene, basis: MeasurementBasis) -> ModeSignal:
    """Build the signal for any of the three measurement bases."""
    if isinstance(basis, HermiteGauss):
        return hg_mode_signal(scene, basis.m_max)
    if isinstance(basis, DirectImagingGrid):
        return di_mode_signal(scene, basis)
    if isinstance(basis, Bucket):
        return bucket_signal(scene)
    raise TypeError(f"unknown basis {basis!r}")


def parse_basis(text: str) -> MeasurementBasis:
    """Parse 'hg', 'hg[m]', 'di', 'di[n]' or 'bucket' (as in configs).

    'hg' picks the automatic mode cutoff, 'di' the default pixel grid;
    the bracket forms pin the mode count / pixels per axis.
    """
    s = text.strip().lower()
    if s == "hg":
        return HermiteGauss()
    if s == "di":
        return DirectImagingGrid()
    if s == "bucket":
        return Bucket()
    m = re.fullmatch(r"hg\[(\d+)\]", s)
    if m:
        return HermiteGauss(m_max=int(m.group(1)))
    m = re.fullmatch(r"di\[(\d+)\]", s)
    if m:
        return DirectImagingGrid(pixels_per_axis=int(m.group(1)))
    raise ValueError(
        f"unrecognized measurement basis {text!r}; expected hg, hg[m], di, "
        "di[n] or bucket"
    )


def write_signal_csv(signal: ModeSignal, path, seed=None) -> None:
    """Export a signal as CSV: mode_index, mean, epsilon, d_deriv."""
    eps = signal.epsilons
    rows = [
        (int(signal.mode_index[i]), float(signal.means[i]), float(eps[i]),
         float(signal.d_derivs[i]))
        for i in range(len(signal))
    ]
    meta = {"label": signal.label, "n_s": signal.n_s,
            "truncation_error": signal.truncation_error}
    if seed is not None:
        meta["seed"] = seed
    write_csv(path, "cohsep.mode-signal.v1",
              ["mode_index", "mean", "epsilon", "d_deriv"], rows, meta)
