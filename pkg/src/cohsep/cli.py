"""Command line entry points.

Three subcommands:

* ``sensitivity`` -- moment-bound reports for a configured scene, or one of
  the bundled sweep figures (``--figure 2..7``) as CSV and optionally SVG.
* ``montecarlo`` -- seeded photon-counting simulation of the estimator
  against its bound; plans come from a config file or a built-in demo.
* ``certify`` -- run the internal cross-validation battery.

Exit codes: 0 on success, 1 for usage/config problems, 2 when certification
checks fail.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from pathlib import Path

from . import __version__, certify, montecarlo, sweeps
from .bases import parse_basis
from .errors import DegenerateSceneError
from .photostats import parse_statistics
from .scene import SourceScene, scene_from_config
from .sensitivity import total_report, write_report_csv

DEFAULT_SEED = 20260823


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this CLI reserves 2 for
    failed certification, so remap usage problems to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="cohsep",
                description="Sensitivity bounds and counting simulations for "
                            "resolving two mutually coherent point sources.")
    p.add_argument("--version", action="version", version=f"cohsep {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ps = sub.add_parser("sensitivity", help="moment-bound reports / sweep figures")
    ps.add_argument("--config", type=Path, help="INI file with a [scene] section "
                    "and optional [report] section (stats=..., bases=...)")
    ps.add_argument("--figure", type=int, choices=range(2, 8), metavar="{2..7}",
                    help="run a bundled sweep preset instead of a config")
    ps.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    ps.add_argument("--svg", action="store_true", help="also render the figure as SVG")

    pm = sub.add_parser("montecarlo", help="simulate estimators against their bounds")
    pm.add_argument("--config", type=Path, help="INI file with [scene] and "
                    "[plan ...] sections; omit for a quick built-in demo")
    pm.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    pm.add_argument("--seed", type=int, default=DEFAULT_SEED, help="root RNG seed")
    pm.add_argument("--workers", type=int, default=1,
                    help="worker threads (results are independent of this)")

    pc = sub.add_parser("certify", help="run the internal consistency checks")
    pc.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed for "
                    "the simulated check")
    return p


def _read_config(path: Path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ValueError(f"cannot read config file {path}")
    return cp


def _cmd_sensitivity(args) -> int:
    if (args.config is None) == (args.figure is None):
        raise ValueError("pass exactly one of --config or --figure")
    args.out_dir.mkdir(parents=True, exist_ok=True)

    if args.figure is not None:
        spec = sweeps.load_preset(f"fig{args.figure}")
        rows = sweeps.run_sweep(spec)
        csv_path = args.out_dir / f"{spec.name}.csv"
        sweeps.write_sweep_csv(spec, rows, csv_path)
        print(f"wrote {csv_path}  ({len(rows)} rows, {len(spec.panels)} panels)")
        if args.svg:
            svg_path = args.out_dir / f"{spec.name}.svg"
            sweeps.sweep_svg(spec, rows, svg_path)
            print(f"wrote {svg_path}")
        return 0

    cp = _read_config(args.config)
    scene = scene_from_config(cp)
    stats_text = "poisson"
    bases_text = "hg, di, bucket"
    if cp.has_section("report"):
        stats_text = cp["report"].get("stats", stats_text)
        bases_text = cp["report"].get("bases", bases_text)
    stats = parse_statistics(stats_text)
    reports = [total_report(scene, stats, parse_basis(b))
               for b in bases_text.split(",") if b.strip()]
    csv_path = args.out_dir / "report.csv"
    write_report_csv(reports, csv_path)
    hdr = f"{'basis':<14}{'N_D':>12}{'M_eps':>14}{'M_D':>14}{'M_d':>14}" \
          f"{'var bound (n_s known)':>24}"
    print(f"scene: d={scene.d:g} sigma={scene.sigma:g} theta={scene.theta:g} "
          f"phi={scene.phi:g} kappa={scene.kappa:g} n_s={scene.n_s:g} "
          f"(chi={scene.chi:.4f})  stats: {reports[0].stats}")
    print(hdr)
    for r in reports:
        print(f"{r.basis:<14}{r.n_d:>12.6g}{r.m_eps:>14.6g}{r.m_D:>14.6g}"
              f"{r.m_d:>14.6g}{r.bound_known_ns:>24.6g}")
    print(f"wrote {csv_path}")
    return 0


def _default_plans():
    base = SourceScene(d=1.0, sigma=1.0, theta=math.pi / 4, phi=math.pi / 3,
                       kappa=0.6, n_s=1.0)
    mk = montecarlo.ExperimentPlan
    return [
        mk(base, parse_statistics("poisson"), parse_basis("hg"),
           mu=2000, trials=300, estimator=montecarlo.KNOWN_NS),
        mk(base, parse_statistics("poisson"), parse_basis("hg"),
           mu=2000, trials=300, estimator=montecarlo.UNKNOWN_NS),
        mk(base, parse_statistics("poisson"), parse_basis("di[65]"),
           mu=2000, trials=300, estimator=montecarlo.KNOWN_NS),
        mk(base, parse_statistics("poisson"), parse_basis("bucket"),
           mu=2000, trials=300, estimator=montecarlo.KNOWN_NS),
        mk(base, parse_statistics("thermal"), parse_basis("hg"),
           mu=2000, trials=300, estimator=montecarlo.KNOWN_NS),
        mk(base.with_(kappa=0.25), parse_statistics("fock[1]"), parse_basis("hg"),
           mu=2000, trials=300, estimator=montecarlo.KNOWN_NS),
    ]


def _plans_from_config(cp: configparser.ConfigParser):
    base = scene_from_config(cp)
    plans = []
    for sec in cp.sections():
        if not sec.startswith("plan"):
            continue
        s = cp[sec]
        overrides = {k: float(s[k]) for k in ("d", "sigma", "theta", "phi",
                                              "kappa", "n_s") if k in s}
        scene = base.with_(**overrides) if overrides else base
        plans.append(montecarlo.ExperimentPlan(
            scene=scene,
            stats=parse_statistics(s.get("stats", "poisson")),
            basis=parse_basis(s.get("basis", "hg")),
            mu=s.getint("mu", 1000),
            trials=s.getint("trials", 400),
            estimator=s.get("estimator", montecarlo.KNOWN_NS).strip(),
            label=sec[len("plan"):].strip() or sec,
        ))
    if not plans:
        raise ValueError("config defines no [plan ...] sections")
    return plans


def _cmd_montecarlo(args) -> int:
    if args.workers < 1:
        raise ValueError("--workers must be >= 1")
    plans = _plans_from_config(_read_config(args.config)) if args.config \
        else _default_plans()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    results = montecarlo.run_plans(plans, seed=args.seed, workers=args.workers)
    csv_path = args.out_dir / "montecarlo.csv"
    montecarlo.write_results_csv(results, csv_path, seed=args.seed)
    print(f"{'label':<34}{'trials':>7}{'mu':>7}{'var bound':>13}{'sample var':>13}"
          f"{'ratio':>8}{'bias':>11}")
    for r in results:
        print(f"{r.label:<34}{r.trials:>7}{r.mu:>7}{r.bound_var:>13.4e}"
              f"{r.sample_var:>13.4e}{r.ratio:>8.3f}{r.bias:>11.2e}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_certify(args) -> int:
    results = certify.run_all(seed=args.seed)
    print(certify.format_results(results))
    return 0 if certify.all_passed(results) else 2


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"sensitivity": _cmd_sensitivity,
                "montecarlo": _cmd_montecarlo,
                "certify": _cmd_certify}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, configparser.Error, DegenerateSceneError,
            FileNotFoundError) as exc:
        print(f"cohsep: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
