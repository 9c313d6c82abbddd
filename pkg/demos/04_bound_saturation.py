#!/usr/bin/env python3
"""Simulated photon counting saturates the moment bound.

Runs seeded counting experiments — each trial estimates the separation
from mu detection cycles with a locally unbiased linear estimator — and
compares the sample variance of d-hat against 1/(mu M).  The ratio
concentrates at 1 with standard error sqrt(2/(trials-1)); nothing is
fitted.

Covers demultiplexing, a pixel grid and bucket detection, Poisson /
thermal / Fock sources, and both the known-brightness and co-estimated
brightness variants.

Usage: python3 demos/04_bound_saturation.py [seed]
"""

import math
import sys

from cohsep.bases import Bucket, DirectImagingGrid, HermiteGauss
from cohsep.montecarlo import (
    KNOWN_NS,
    UNKNOWN_NS,
    ExperimentPlan,
    run_plans,
)
from cohsep.photostats import Fock, Poisson, Thermal
from cohsep.scene import SourceScene

BASE = SourceScene(d=1.0, sigma=1.0, theta=math.pi / 4, phi=math.pi / 3,
                   kappa=0.6, n_s=1.0)   # chi = +0.5


def main(seed=7):
    plans = [
        ExperimentPlan(BASE, Poisson(), HermiteGauss(), mu=5000, trials=600,
                       estimator=KNOWN_NS, label="hg / poisson / known n_s"),
        ExperimentPlan(BASE, Poisson(), HermiteGauss(), mu=5000, trials=600,
                       estimator=UNKNOWN_NS, label="hg / poisson / co-est n_s"),
        ExperimentPlan(BASE, Poisson(), DirectImagingGrid(pixels_per_axis=65),
                       mu=5000, trials=600, label="di[65] / poisson"),
        ExperimentPlan(BASE, Poisson(), Bucket(), mu=5000, trials=600,
                       label="bucket / poisson"),
        ExperimentPlan(BASE, Thermal(), HermiteGauss(), mu=5000, trials=600,
                       label="hg / thermal"),
        ExperimentPlan(BASE.with_(kappa=0.2, n_s=3.0), Fock(3), HermiteGauss(),
                       mu=5000, trials=600, label="hg / fock[3]"),
    ]
    results = run_plans(plans, seed=int(seed))
    se = math.sqrt(2.0 / (plans[0].trials - 1))
    print(f"seed = {seed}; ratio standard error ~ {se:.3f}\n")
    print(f"{'plan':<28}{'bound var':>12}{'sample var':>12}{'ratio':>8}"
          f"{'bias/se':>9}")
    for r in results:
        print(f"{r.label:<28}{r.bound_var:>12.3e}{r.sample_var:>12.3e}"
              f"{r.ratio:>8.3f}{r.bias / r.bias_se:>9.2f}")
    print("\nbucket detection keeps only the flux channel: its bound is far"
          "\nweaker, but the simulation still sits right on it.")


if __name__ == "__main__":
    main(*sys.argv[1:2])
