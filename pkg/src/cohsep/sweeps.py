"""Separation sweeps of the normalized sensitivities, with bundled presets.

A sweep evaluates, on a grid of d/sigma, the three dimensionless
sensitivities

    m_eps_norm = (4 sigma^2 / kappa n_s) N_D M_eps     (shape)
    m_D_norm   = (4 sigma^2 / kappa n_s) M_D           (flux)
    m_d_norm   = m_eps_norm + m_D_norm                 (total)

for one or more panels (curves) that vary the interference contrast, the
source statistics, or the measurement basis.  The bundled presets under
``cohsep/presets/*.cfg`` cover the standard landscape figures; the
``sensitivity --figure`` CLI option runs them.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .bases import parse_basis
from .csvio import write_csv
from .photostats import SourceStatistics, parse_statistics
from .scene import SourceScene, total_detected
from .sensitivity import (
    m_eps_quadrature_di,
    m_D_explicit,
    normalized_m_D,
    normalized_m_eps_closed,
    total_report,
)
from .svgplot import line_plot

__all__ = ["SweepPanel", "SweepSpec", "available_presets", "load_preset",
           "run_sweep", "write_sweep_csv", "sweep_svg"]

SWEEP_COLUMNS = ("panel", "d_over_sigma", "m_eps_norm", "m_D_norm", "m_d_norm")


@dataclass(frozen=True)
class SweepPanel:
    label: str
    theta: float
    phi: float
    kappa: float
    n_s: float
    stats: SourceStatistics
    basis: str                    # "hg" | "di" | "hg[m]" | "di[n]" | "bucket"


@dataclass(frozen=True)
class SweepSpec:
    name: str
    title: str
    quantity: str                 # which column the figure plots
    xlabel: str
    ylabel: str
    xscale: str
    yscale: str
    d_over_sigma: tuple
    panels: tuple

    def __post_init__(self):
        if self.quantity not in SWEEP_COLUMNS[2:]:
            raise ValueError(f"quantity must be one of {SWEEP_COLUMNS[2:]}, "
                             f"got {self.quantity!r}")


def available_presets():
    root = resources.files("cohsep").joinpath("presets")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_preset(name: str) -> SweepSpec:
    ref = resources.files("cohsep").joinpath("presets", f"{name}.cfg")
    if not ref.is_file():
        raise FileNotFoundError(
            f"no preset named {name!r}; available: {', '.join(available_presets())}"
        )
    cp = configparser.ConfigParser()
    cp.read_string(ref.read_text(encoding="utf-8"), source=f"{name}.cfg")
    p = cp["preset"]
    lo, hi = p.getfloat("d_over_sigma_min"), p.getfloat("d_over_sigma_max")
    n = p.getint("points")
    if p.get("spacing", "log").strip() == "log":
        grid = np.geomspace(lo, hi, n)
    else:
        grid = np.linspace(lo, hi, n)
    panels = []
    for sec in cp.sections():
        if not sec.startswith("panel "):
            continue
        s = cp[sec]
        def pick(key, fallback=None):
            return s.get(key, p.get(key, fallback))
        panels.append(SweepPanel(
            label=sec[len("panel "):].strip(),
            theta=float(pick("theta")),
            phi=float(pick("phi", "0")),
            kappa=float(pick("kappa", "1")),
            n_s=float(pick("n_s", "1")),
            stats=parse_statistics(pick("stats", "poisson")),
            basis=pick("basis", "hg").strip(),
        ))
    if not panels:
        raise ValueError(f"preset {name!r} defines no [panel ...] sections")
    return SweepSpec(
        name=name, title=p.get("title", name),
        quantity=p.get("quantity", "m_d_norm").strip(),
        xlabel=p.get("xlabel", "d / sigma"), ylabel=p.get("ylabel", ""),
        xscale=p.get("xscale", "log"), yscale=p.get("yscale", "linear"),
        d_over_sigma=tuple(float(x) for x in grid), panels=tuple(panels),
    )


def _panel_point(panel: SweepPanel, x: float):
    """(m_eps_norm, m_D_norm, m_d_norm) at d = x * sigma (sigma = 1)."""
    sc = SourceScene(d=x, sigma=1.0, theta=panel.theta, phi=panel.phi,
                     kappa=panel.kappa, n_s=panel.n_s)
    if panel.basis == "hg":
        me = normalized_m_eps_closed(sc)
        md = normalized_m_D(sc, panel.stats)
        return me, md, me + md
    if panel.basis == "di":
        norm = 4.0 * sc.sigma**2 / (sc.kappa * sc.n_s)
        # 3e-7 keeps refinement above the fp noise floor of the integrand
        # at chi ~ -1 with d ~ 1e-3 sigma (pointwise near-cancellation)
        me = norm * total_detected(sc) * m_eps_quadrature_di(sc, tol=3e-7)
        md = norm * m_D_explicit(sc, panel.stats)
        return me, md, me + md
    rep = total_report(sc, panel.stats, parse_basis(panel.basis))
    return rep.m_eps_norm, rep.m_D_norm, rep.m_d_norm


def run_sweep(spec: SweepSpec):
    """Evaluate all panels on the grid; returns CSV-ready rows."""
    rows = []
    for panel in spec.panels:
        for x in spec.d_over_sigma:
            me, md, mt = _panel_point(panel, x)
            rows.append((panel.label, x, me, md, mt))
    return rows


def write_sweep_csv(spec: SweepSpec, rows, path) -> None:
    write_csv(path, "cohsep.sweep.v1", SWEEP_COLUMNS, rows,
              {"preset": spec.name, "quantity": spec.quantity,
               "title": spec.title})


def sweep_svg(spec: SweepSpec, rows, path) -> None:
    col = SWEEP_COLUMNS.index(spec.quantity)
    curves = []
    for panel in spec.panels:
        sel = [r for r in rows if r[0] == panel.label]
        curves.append((panel.label, [r[1] for r in sel], [r[col] for r in sel]))
    line_plot(path, curves, title=spec.title, xlabel=spec.xlabel,
              ylabel=spec.ylabel or spec.quantity,
              xscale=spec.xscale, yscale=spec.yscale)
