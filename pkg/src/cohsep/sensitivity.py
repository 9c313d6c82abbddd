"""Moment-based sensitivity bounds for the source separation.

Counts X_m measured in any basis have covariance

    Gamma_mn = delta_mn N_m + h N_m N_n

whose inverse is closed-form (rank-one update):  (Gamma^-1)_mn =
delta_mn / N_m - h / (1 + h N_D).  The sensitivity matrix for parameters
q = (d, n_s),

    M_ab = sum_mn (Gamma^-1)_mn dN_m/dq_a dN_n/dq_b,

splits exactly into a shape part (relative intensities eps_m = N_m/N_D) and
a flux part (total detected number N_D):

    M_ab = N_D sum_m (1/eps_m) d_a eps_m d_b eps_m
           + (1 / DeltaN_D^2) d_a N_D d_b N_D.

For the separation alone M_d = N_D * M_eps + M_D.  The per-repetition
moment bound is Var(d_hat) >= 1/M_d with n_s known, and 1/(N_D M_eps) with
n_s estimated jointly.

Every sum here is evaluated in amplitude form, e.g. sum (1/eps)(d eps)^2 =
4 sum (d sqrt(eps))^2, which has no 0/0 at dark modes and no large-term
cancellation near the anti-phase point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .bases import (
    Bucket,
    DirectImagingGrid,
    HermiteGauss,
    MeasurementBasis,
    ModeSignal,
    mode_signal,
)
from .csvio import write_csv
from .errors import (
    DegenerateSceneError,
    QuadratureConvergenceError,
    SingularCovarianceError,
)
from .photostats import SourceStatistics, check_fock_loss_model, h_param
from .scene import (
    SourceScene,
    total_detected,
    total_detected_d_deriv,
)

__all__ = [
    "covariance",
    "covariance_inverse",
    "apply_covariance_inverse",
    "m_eps_from_signal",
    "m_d_from_signal",
    "sensitivity_matrix",
    "sensitivity_matrix_bruteforce",
    "m_eps_closed_hg",
    "m_eps_closed_di",
    "m0_closed",
    "m0_sensitivity",
    "m0_quadrature_di",
    "m_eps_quadrature_di",
    "m_D_explicit",
    "m_D_propagation",
    "normalized_m_eps_closed",
    "normalized_m_D",
    "SensitivityReport",
    "total_report",
    "write_report_csv",
]


# ---------------------------------------------------------------------------
# Covariance of mode counts
# ---------------------------------------------------------------------------

def _variance_terms(signal: ModeSignal, stats: SourceStatistics):
    h = h_param(stats, signal.n_s)
    nd = signal.total
    one_plus = 1.0 + h * nd
    if one_plus < 0.0:
        raise ValueError(
            f"1 + h*N_D = {one_plus} < 0: statistics inconsistent with captured flux"
        )
    return h, nd, one_plus


def covariance(signal: ModeSignal, stats: SourceStatistics) -> np.ndarray:
    """Dense count covariance diag(N) + h * N N^T (for small mode sets)."""
    h, _, _ = _variance_terms(signal, stats)
    n = signal.means
    return np.diag(n) + h * np.outer(n, n)


def covariance_inverse(signal: ModeSignal, stats: SourceStatistics) -> np.ndarray:
    """Dense inverse delta_mn/N_m - h/(1 + h N_D).

    Raises
    ------
    SingularCovarianceError
        If some retained mode mean is zero, or 1 + h*N_D = 0 (a lossless
        Fock arrangement has exactly zero total-number variance).
    """
    h, nd, one_plus = _variance_terms(signal, stats)
    if np.any(signal.means <= 0.0):
        raise SingularCovarianceError(
            "covariance is singular: signal contains zero-mean modes "
            "(drop them via ModeSignal.retained())"
        )
    if one_plus == 0.0:
        raise SingularCovarianceError(
            "1 + h*N_D = 0 (zero photon-number variance); covariance is singular"
        )
    return np.diag(1.0 / signal.means) - h / one_plus


def apply_covariance_inverse(signal: ModeSignal, stats: SourceStatistics, v):
    """Gamma^-1 @ v without materializing the matrix; v is (n,) or (n, k)."""
    h, nd, one_plus = _variance_terms(signal, stats)
    if np.any(signal.means <= 0.0):
        raise SingularCovarianceError("zero-mean modes; filter with retained() first")
    if one_plus == 0.0:
        raise SingularCovarianceError("1 + h*N_D = 0; covariance is singular")
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return v / signal.means - h * v.sum() / one_plus
    return v / signal.means[:, None] - h * v.sum(axis=0)[None, :] / one_plus


# ---------------------------------------------------------------------------
# Sensitivities from a mode signal
# ---------------------------------------------------------------------------

def m_eps_from_signal(signal: ModeSignal) -> float:
    """Shape sensitivity M_eps = sum_m (1/eps_m)(d eps_m/dd)^2.

    Amplitude form: N_D M_eps = 4 sum_m (d sqrt(N_m) - sqrt(eps_m) d sqrt(N_D))^2.
    """
    nd = signal.total
    sqrt_nd = math.sqrt(nd)
    sdot = signal.d_total / (2.0 * sqrt_nd)
    sqrt_eps = signal.amp_means / sqrt_nd
    resid = signal.amp_d_derivs - sqrt_eps * sdot
    return 4.0 * float(np.sum(resid * resid)) / nd


def m_d_from_signal(signal: ModeSignal, stats: SourceStatistics) -> float:
    """Total separation sensitivity N_D*M_eps + M_D for this measurement."""
    h, nd, one_plus = _variance_terms(signal, stats)
    var = nd * one_plus
    if var == 0.0:
        raise SingularCovarianceError("zero photon-number variance; M_D diverges")
    return nd * m_eps_from_signal(signal) + signal.d_total**2 / var


_PARAM_ORDER = ("d", "n_s")


def _amp_derivs(signal: ModeSignal, param: str):
    """(per-mode d sqrt(N_m)/dq, d sqrt(N_D)/dq, dN_D/dq) for q in {d, n_s}."""
    sqrt_nd = math.sqrt(signal.total)
    if param == "d":
        return signal.amp_d_derivs, signal.d_total / (2.0 * sqrt_nd), signal.d_total
    if param == "n_s":
        amp = signal.amp_means / (2.0 * signal.n_s)
        return amp, sqrt_nd / (2.0 * signal.n_s), signal.total / signal.n_s
    raise ValueError(f"unknown parameter {param!r}; expected one of {_PARAM_ORDER}")


def sensitivity_matrix(signal: ModeSignal, stats: SourceStatistics,
                       params=_PARAM_ORDER) -> np.ndarray:
    """Sensitivity matrix over ``params`` (subset of ("d", "n_s")).

    Uses the shape/flux decomposition in amplitude form; agrees with the
    brute-force double sum to ~1e-15 wherever both apply, but also covers
    signals with exactly dark modes.
    """
    h, nd, one_plus = _variance_terms(signal, stats)
    var = nd * one_plus
    if var == 0.0:
        raise SingularCovarianceError("zero photon-number variance; matrix diverges")
    sqrt_nd = math.sqrt(nd)
    sqrt_eps = signal.amp_means / sqrt_nd
    k = len(params)
    out = np.empty((k, k))
    shape_vecs, flux = [], []
    for p in params:
        amp, sdot, g = _amp_derivs(signal, p)
        shape_vecs.append(amp - sqrt_eps * sdot)
        flux.append(g)
    for a in range(k):
        for b in range(a, k):
            val = 4.0 * float(np.dot(shape_vecs[a], shape_vecs[b])) \
                + flux[a] * flux[b] / var
            out[a, b] = out[b, a] = val
    return out


def sensitivity_matrix_bruteforce(signal: ModeSignal, stats: SourceStatistics,
                                  params=_PARAM_ORDER) -> np.ndarray:
    """Direct double sum D^T Gamma^-1 D; needs strictly positive means."""
    deriv_cols = {"d": signal.d_derivs, "n_s": signal.ns_derivs}
    D = np.column_stack([deriv_cols[p] for p in params])
    KD = apply_covariance_inverse(signal, stats, D)
    return D.T @ KD


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _closed_core(d, sigma, chi):
    """(gain, script_m_eps, m0_factor) in extended precision.

    gain    = 1 + chi*delta
    script  = 1 - chi^2 delta^2 + (d^2/4sigma^2) chi delta  (= normalized M_eps)
    m0f     = 1 - chi*delta + (d^2/4sigma^2) chi delta      (M0 * 4sigma^2 / kappa n_s)

    Near chi = -1 and small d both 'script' and the closed M_eps cancel to
    O(t^3), t = d^2/8sigma^2; expm1 grouping plus longdouble keeps ~1e-13
    relative accuracy down to d ~ 0.1 sigma.
    """
    ld = np.longdouble
    d, sigma, chi = ld(d), ld(sigma), ld(chi)
    t = d * d / (8 * sigma * sigma)
    em = np.expm1(-t)                      # delta - 1  (exact for small t)
    delta = ld(1) + em
    gain = (ld(1) + chi) + chi * em
    q = d * d / (4 * sigma * sigma)
    # 1 - chi^2 delta^2 split into non-negative addends
    one_minus_sq = (ld(1) - chi * chi) - chi * chi * np.expm1(-2 * t)
    script = one_minus_sq + q * chi * delta
    one_minus = (ld(1) - chi) - chi * em   # 1 - chi*delta
    m0f = one_minus + q * chi * delta
    return gain, script, m0f


def m_eps_closed_hg(scene: SourceScene) -> float:
    """Closed-form M_eps for the full Hermite-Gauss basis.

    M_eps = [(1 - chi*delta) + (d^2/4sigma^2) chi*delta/(1+chi*delta)]
            / (4 sigma^2 (1 + chi*delta))

    Per detected photon; the infinite-mode limit of the finite sums.
    """
    gain, script, _ = _closed_core(scene.d, scene.sigma, scene.chi)
    if gain <= 0.0:
        raise DegenerateSceneError("N_D = 0 at chi = -1, d = 0")
    return float(script / (4 * np.longdouble(scene.sigma) ** 2 * gain * gain))


def m_eps_closed_di(scene: SourceScene) -> float:
    """Closed-form M_eps for continuous direct imaging.

    Exists only when the image-plane field is real: phi = 0 or pi (mod 2pi),
    or theta = 0; there it coincides with the Hermite-Gauss value.
    """
    if scene.theta > 1e-15 and min(scene.phi, abs(scene.phi - math.pi),
                                   abs(scene.phi - 2 * math.pi)) > 1e-12:
        raise ValueError(
            "direct imaging has no closed form away from phi in {0, pi} or theta = 0; "
            "use m_eps_quadrature_di"
        )
    return m_eps_closed_hg(scene)


def m0_closed(scene: SourceScene) -> float:
    """Closed-form M0 = sum (dN_m/dd)^2 / N_m (basis-independent value).

    M0 = (kappa n_s / 4 sigma^2) (1 - chi*delta + (d^2/4sigma^2) chi*delta);
    equals the HG mode sum, and the direct-imaging integral whenever the
    field is real (or after the contrast-preserving angle remap).
    """
    _, _, m0f = _closed_core(scene.d, scene.sigma, scene.chi)
    return float(scene.kappa * scene.n_s * m0f / (4 * np.longdouble(scene.sigma) ** 2))


def normalized_m_eps_closed(scene: SourceScene) -> float:
    """Dimensionless shape sensitivity (4 sigma^2 / kappa) N_D M_eps / n_s."""
    gain, script, _ = _closed_core(scene.d, scene.sigma, scene.chi)
    if gain <= 0.0:
        raise DegenerateSceneError("N_D = 0 at chi = -1, d = 0")
    return float(script / gain)


def m_D_explicit(scene: SourceScene, stats: SourceStatistics) -> float:
    """Flux sensitivity M_D in explicit closed form.

    M_D = (kappa n_s / 4sigma^2) * delta^2 chi^2 (d/2sigma)^2
          / [(1+chi*delta) + h kappa n_s (1+chi*delta)^2]
    """
    h = h_param(stats, scene.n_s)
    ld = np.longdouble
    gain, _, _ = _closed_core(scene.d, scene.sigma, scene.chi)
    if gain <= 0.0:
        raise DegenerateSceneError("N_D = 0 at chi = -1, d = 0")
    den = gain + ld(h) * ld(scene.kappa) * ld(scene.n_s) * gain * gain
    if den == 0.0:
        raise SingularCovarianceError("zero photon-number variance; M_D diverges")
    if den < 0.0:
        raise ValueError("negative detected variance: inconsistent (h, kappa, n_s)")
    d, sigma, chi = ld(scene.d), ld(scene.sigma), ld(scene.chi)
    delta = np.exp(-d * d / (8 * sigma * sigma))
    num = delta * delta * chi * chi * (d / (2 * sigma)) ** 2
    return float(ld(scene.kappa) * ld(scene.n_s) / (4 * sigma * sigma) * num / den)


def m_D_propagation(scene: SourceScene, stats: SourceStatistics) -> float:
    """M_D by plain error propagation, (dN_D/dd)^2 / DeltaN_D^2."""
    from .scene import detected_variance

    h = h_param(stats, scene.n_s)
    var = detected_variance(scene, h)
    if var == 0.0:
        raise SingularCovarianceError("zero photon-number variance; M_D diverges")
    return total_detected_d_deriv(scene) ** 2 / var


def normalized_m_D(scene: SourceScene, stats: SourceStatistics) -> float:
    """Dimensionless flux sensitivity (4 sigma^2 / kappa) M_D / n_s."""
    return m_D_explicit(scene, stats) * 4.0 * scene.sigma**2 / (scene.kappa * scene.n_s)


# ---------------------------------------------------------------------------
# Continuous direct imaging by quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _leggauss(n: int):
    x, w = roots_legendre(n)
    return x, w


def _di_field_1d(scene: SourceScene, x):
    """Separation-axis field profile E(x) and its d-derivative (complex split).

    The transverse axis integrates out exactly (pure Gaussian factor), so all
    continuous-DI integrals reduce to this 1D profile.
    """
    s2 = scene.sigma * scene.sigma
    norm = math.sqrt(1.0 / (2.0 * math.pi * s2))
    g1 = norm * np.exp(-((x - scene.d / 2) ** 2) / (4.0 * s2))
    g2 = norm * np.exp(-((x + scene.d / 2) ** 2) / (4.0 * s2))
    dg1 = g1 * (x - scene.d / 2) / (4.0 * s2)
    dg2 = -g2 * (x + scene.d / 2) / (4.0 * s2)
    c, s = math.cos(scene.theta), math.sin(scene.theta)
    cp, sp = math.cos(scene.phi), math.sin(scene.phi)
    er, ei = g1 * c + g2 * s * cp, g2 * s * sp
    der, dei = dg1 * c + dg2 * s * cp, dg2 * s * sp
    return er, ei, der, dei


def _di_continuum_once(scene: SourceScene, n: int, half_width_sigmas: float):
    half = scene.d / 2.0 + half_width_sigmas * scene.sigma
    xg, wg = _leggauss(n)
    x = xg * half
    w = wg * half
    er, ei, der, dei = _di_field_1d(scene, x)
    a = np.hypot(er, ei)
    q = er * der + ei * dei
    with np.errstate(invalid="ignore", divide="ignore"):
        damp = np.where(a > 0.0, q / np.where(a > 0.0, a, 1.0), np.hypot(der, dei))
    nd = total_detected(scene)
    rate = total_detected_d_deriv(scene) / nd
    pref = scene.kappa * scene.n_s * math.sqrt(2.0 * math.pi) * scene.sigma
    m0 = pref * 4.0 * float(np.sum(w * damp * damp))
    resid = 2.0 * damp - a * rate
    m_eps = pref / nd * float(np.sum(w * resid * resid))
    return m0, m_eps


def _di_continuum(scene: SourceScene, tol: float = 1e-9,
                  half_width_sigmas: float = 9.0, start_nodes: int = 192,
                  max_nodes: int = 4400):
    """(m0, m_eps, error estimate, nodes used) with node-doubling refinement."""
    n = start_nodes
    prev = _di_continuum_once(scene, n, half_width_sigmas)
    while n < max_nodes:
        n = int(n * 1.5)
        cur = _di_continuum_once(scene, n, half_width_sigmas)
        errs = [abs(c - p) for c, p in zip(cur, prev)]
        ok = all(e <= tol * max(abs(c), 1e-300) for e, c in zip(errs, cur))
        if ok:
            rel = max(e / max(abs(c), 1e-300) for e, c in zip(errs, cur))
            return cur[0], cur[1], rel, n
        prev = cur
    raise QuadratureConvergenceError(
        f"direct-imaging quadrature not converged at {n} nodes: "
        f"m0={cur[0]!r} (delta {errs[0]:.3e}), m_eps={cur[1]!r} (delta {errs[1]:.3e}), "
        f"requested tol {tol:g}"
    )


def m_eps_quadrature_di(scene: SourceScene, tol: float = 1e-9,
                        half_width_sigmas: float = 9.0, with_error: bool = False):
    """M_eps for continuous direct imaging, int (1/i)(di/dd)^2 dr with i = I/N_D.

    Evaluated as a 1D Gauss-Legendre integral of the amplitude-form integrand
    (2 d|E| - |E| dN_D/N_D)^2, after the transverse axis is integrated
    analytically.  Raises QuadratureConvergenceError if refinement stalls.
    """
    m0, m_eps, rel, _ = _di_continuum(scene, tol, half_width_sigmas)
    return (m_eps, rel * m_eps) if with_error else m_eps


def m0_quadrature_di(scene: SourceScene, tol: float = 1e-9,
                     half_width_sigmas: float = 9.0, with_error: bool = False):
    """M0 for continuous direct imaging, int (dI/dd)^2 / I dr."""
    m0, m_eps, rel, _ = _di_continuum(scene, tol, half_width_sigmas)
    return (m0, rel * m0) if with_error else m0


def m0_sensitivity(scene: SourceScene, basis: MeasurementBasis) -> float:
    """M0 = sum_m (dN_m/dd)^2 / N_m for the given measurement.

    The 'uncorrelated' sensitivity: what the counts would deliver if every
    mode fluctuated independently at variance N_m.  The full M_d is
    M0 - h (dN_D/dd)^2 / (1 + h N_D).
    """
    if isinstance(basis, Bucket):
        nd = total_detected(scene)
        return total_detected_d_deriv(scene) ** 2 / nd
    sig = mode_signal(scene, basis).retained()
    return 4.0 * float(np.sum(sig.amp_d_derivs**2))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _stats_label(stats: SourceStatistics) -> str:
    name = type(stats).__name__.lower()
    if name == "fock":
        return f"fock[{stats.n}]"
    if name == "customh":
        return f"custom_h[{stats.h:g}]"
    return name


@dataclass
class SensitivityReport:
    """Everything the moment bound says about one (scene, stats, basis) triple.

    Sensitivities are per detection-cycle repetition (mu = 1); divide the
    bounds by the repetition count for an experiment.  ``bound_unknown_ns``
    is infinite for bucket detection (the shape part vanishes).
    """

    d: float
    sigma: float
    theta: float
    phi: float
    kappa: float
    n_s: float
    stats: str
    h: float
    basis: str
    n_modes: int
    n_d: float
    n_d_variance: float
    m_eps: float
    m_D: float
    m_d: float
    m_dd: float
    m_dns: float
    m_nsns: float
    bound_known_ns: float
    bound_unknown_ns: float
    m_eps_norm: float
    m_D_norm: float
    m_d_norm: float
    truncation_error: float

    CSV_COLUMNS = (
        "d", "sigma", "theta", "phi", "kappa", "n_s", "stats", "h", "basis",
        "n_modes", "n_d", "n_d_variance", "m_eps", "m_D", "m_d",
        "m_dd", "m_dns", "m_nsns", "bound_known_ns", "bound_unknown_ns",
        "m_eps_norm", "m_D_norm", "m_d_norm", "truncation_error",
    )

    def csv_row(self):
        return tuple(getattr(self, c) for c in self.CSV_COLUMNS)


def total_report(scene: SourceScene, stats: SourceStatistics,
                 basis: MeasurementBasis) -> SensitivityReport:
    """Full sensitivity report for one configuration.

    All quantities refer to the actually captured mode set (finite basis),
    so the bound is exactly the one a simulated experiment in that basis
    should saturate.
    """
    check_fock_loss_model(stats, scene.kappa)
    signal = mode_signal(scene, basis).retained()
    h, nd, one_plus = _variance_terms(signal, stats)
    var = nd * one_plus
    if var == 0.0:
        raise SingularCovarianceError(
            "zero photon-number variance (lossless Fock); bounds degenerate"
        )
    m_eps = m_eps_from_signal(signal)
    m_flux = signal.d_total**2 / var
    m_d = nd * m_eps + m_flux
    mat = sensitivity_matrix(signal, stats)
    shape_info = nd * m_eps
    norm = 4.0 * scene.sigma**2 / (scene.kappa * scene.n_s)
    return SensitivityReport(
        d=scene.d, sigma=scene.sigma, theta=scene.theta, phi=scene.phi,
        kappa=scene.kappa, n_s=scene.n_s,
        stats=_stats_label(stats), h=h, basis=signal.label,
        n_modes=len(signal),
        n_d=nd, n_d_variance=var,
        m_eps=m_eps, m_D=m_flux, m_d=m_d,
        m_dd=float(mat[0, 0]), m_dns=float(mat[0, 1]), m_nsns=float(mat[1, 1]),
        bound_known_ns=math.inf if m_d == 0.0 else 1.0 / m_d,
        bound_unknown_ns=math.inf if shape_info == 0.0 else 1.0 / shape_info,
        m_eps_norm=norm * nd * m_eps,
        m_D_norm=norm * m_flux,
        m_d_norm=norm * (nd * m_eps + m_flux),
        truncation_error=signal.truncation_error,
    )


def write_report_csv(reports, path, seed=None) -> None:
    meta = {} if seed is None else {"seed": seed}
    write_csv(path, "cohsep.report.v1", SensitivityReport.CSV_COLUMNS,
              [r.csv_row() for r in reports], meta)
