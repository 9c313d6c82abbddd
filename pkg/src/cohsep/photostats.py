"""Photon statistics of the principal source mode and the counting model.

Every normally ordered moment of the detected counts factorizes through the
principal mode, so the only statistics input the sensitivity formulas need is
the bunching parameter

    h = g2 - 1 = (Var(n) - <n>) / <n>^2

with h = -1/n for an n-photon Fock state, 0 for Poissonian light and +1 for a
thermal state.  ``CustomH`` carries an arbitrary admissible h for analytic
work; it has no sampler.

The sampling model: each emission cycle puts n photons into the principal
mode (n drawn from the source law), and every photon independently lands in
measured mode m with probability p_m = N_m / n_s, or is lost with the
residual probability.  Conditional on n the mode counts are multinomial,
which reproduces the covariance diag(N) + h*N*N^T used throughout.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedStatisticsError

__all__ = [
    "Fock",
    "Poisson",
    "Thermal",
    "CustomH",
    "SourceStatistics",
    "h_param",
    "sample_emitted",
    "sample_emitted_total",
    "sample_mode_counts",
    "check_fock_loss_model",
    "parse_statistics",
]

FOCK_KAPPA_WARN = 0.3


@dataclass(frozen=True)
class Fock:
    """Exactly n photons per emission cycle."""

    n: int

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValueError(f"Fock photon number must be an integer >= 1, got {self.n!r}")


@dataclass(frozen=True)
class Poisson:
    pass


@dataclass(frozen=True)
class Thermal:
    pass


@dataclass(frozen=True)
class CustomH:
    """Source specified only by its bunching parameter h (no sampler)."""

    h: float


SourceStatistics = Fock | Poisson | Thermal | CustomH


def _check_ns(stats, n_s):
    if isinstance(stats, Fock) and abs(n_s - stats.n) > 1e-9:
        raise ValueError(
            f"Fock({stats.n}) is incompatible with mean photon number n_s={n_s}"
        )


def h_param(stats: SourceStatistics, n_s: float) -> float:
    """Bunching parameter h = (Var(n) - n_s) / n_s^2 for the source law."""
    _check_ns(stats, n_s)
    if isinstance(stats, Fock):
        return -1.0 / float(stats.n)
    if isinstance(stats, Poisson):
        return 0.0
    if isinstance(stats, Thermal):
        return 1.0
    if isinstance(stats, CustomH):
        if stats.h < -1.0 / n_s - 1e-12:
            raise ValueError(f"h={stats.h} is below the physical floor -1/n_s={-1.0/n_s}")
        return float(stats.h)
    raise TypeError(f"unknown statistics {stats!r}")


def sample_emitted(stats, n_s, rng, size=None):
    """Photon numbers emitted per cycle, as an int64 array (or scalar).

    Thermal sampling is the exact geometric law on {0, 1, ...} with success
    probability 1/(1 + n_s); numpy's geometric counts trials, hence the -1.
    """
    _check_ns(stats, n_s)
    if isinstance(stats, Fock):
        if size is None:
            return np.int64(stats.n)
        return np.full(size, stats.n, dtype=np.int64)
    if isinstance(stats, Poisson):
        return rng.poisson(n_s, size=size)
    if isinstance(stats, Thermal):
        return rng.geometric(1.0 / (1.0 + n_s), size=size) - 1
    raise UnsupportedStatisticsError(
        f"{type(stats).__name__} defines no sampler; only h is available"
    )


def sample_emitted_total(stats, n_s, mu, rng, size=None):
    """Total photons emitted over ``mu`` independent cycles.

    Distributionally identical to ``sample_emitted(...).sum()`` over mu draws:
    a Fock sum is deterministic, a Poisson sum is Poisson(mu*n_s), and a sum
    of mu geometrics is negative binomial with mu successes.  Drawing the sum
    directly is what makes large-mu experiments affordable.
    """
    _check_ns(stats, n_s)
    if isinstance(stats, Fock):
        val = np.int64(mu) * stats.n
        if size is None:
            return val
        return np.full(size, val, dtype=np.int64)
    if isinstance(stats, Poisson):
        return rng.poisson(float(mu) * n_s, size=size)
    if isinstance(stats, Thermal):
        return rng.negative_binomial(mu, 1.0 / (1.0 + n_s), size=size)
    raise UnsupportedStatisticsError(
        f"{type(stats).__name__} defines no sampler; only h is available"
    )


def sample_mode_counts(probs, emitted, rng):
    """Multinomial mode counts for ``emitted`` photons.

    ``probs`` are per-photon landing probabilities of the retained modes;
    the residual 1 - sum(probs) is the loss channel, drawn but not returned.

    Returns an array with shape ``np.shape(emitted) + (len(probs),)``.
    """
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0.0):
        raise ValueError("negative mode probability")
    s = p.sum()
    if s > 1.0 + 1e-12:
        raise ValueError(f"mode probabilities sum to {s} > 1")
    full = np.append(p, max(1.0 - s, 0.0))
    full /= full.sum()  # exact renormalization against rounding
    counts = rng.multinomial(emitted, full)
    return counts[..., :-1]


def check_fock_loss_model(stats: SourceStatistics, kappa: float) -> None:
    """Warn when Fock input is combined with transmissivity above ~0.3.

    The linear-loss description of a Fock state is a weak-transmission
    approximation; results stay internally consistent at any kappa with
    kappa*(1+chi*delta) <= 1, but their physical interpretation degrades.
    """
    if isinstance(stats, Fock) and kappa > FOCK_KAPPA_WARN:
        warnings.warn(
            f"Fock statistics with kappa={kappa} > {FOCK_KAPPA_WARN}: the linear-loss "
            "source model is only accurate for small transmissivity",
            UserWarning,
            stacklevel=2,
        )


def parse_statistics(text: str) -> SourceStatistics:
    """Parse 'poisson', 'thermal', 'fock[n]' or 'custom_h[x]' (as in configs)."""
    s = text.strip().lower()
    if s == "poisson":
        return Poisson()
    if s == "thermal":
        return Thermal()
    m = re.fullmatch(r"fock\[(\d+)\]", s)
    if m:
        return Fock(int(m.group(1)))
    m = re.fullmatch(r"custom_h\[([-+0-9.eE]+)\]", s)
    if m:
        return CustomH(float(m.group(1)))
    raise ValueError(
        f"unrecognized source statistics {text!r}; expected poisson, thermal, "
        "fock[n] or custom_h[x]"
    )
