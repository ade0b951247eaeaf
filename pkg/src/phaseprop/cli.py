"""Command line front end: ``phaseprop simulate | sweep | verify``.

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 failed
verification.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .configfile import from_si, format_config, parse_config, parse_config_text, to_si
from .exceptions import ConfigError, NodeError, SolverError
from .experiment import ExperimentConfig, RunResult, run_double_slit, summarize, sweep_sigma_s
from .fringes import born_discrepancy, fringe_analysis
from .phaseflow import VelocitySampler, velocity

logger = logging.getLogger("phaseprop")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4

DATA_COLUMNS = ("x_m", "rho", "born_reference", "velocity_at_t_final")


def _fmt(value) -> str:
    return format(float(value), ".17g")


def load_config(path) -> ExperimentConfig:
    if path is None:
        return parse_config_text("", source="<defaults>")
    return parse_config(path)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_bundle(result: RunResult, config: ExperimentConfig, out: Path) -> dict:
    """Write data.csv, fringes.csv, config.txt and metadata.json into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    rho = result.rho_final
    x = rho.grid.centers
    sampler = VelocitySampler(config.wave_s, node_epsilon=config.solver.node_epsilon)
    v = velocity(x, config.t_final, sampler)

    with open(out / "data.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DATA_COLUMNS)
        for row in zip(x, rho.values, result.born_reference.values, v):
            writer.writerow([_fmt(c) for c in row])

    report = fringe_analysis(rho)
    with open(out / "fringes.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("kind", "position_m", "height"))
        extrema = [("maximum", p, h) for p, h in report.maxima] + [("minimum", p, h) for p, h in report.minima]
        for kind, p, h in sorted(extrema, key=lambda e: e[1]):
            writer.writerow((kind, _fmt(p), _fmt(h)))

    (out / "config.txt").write_text(format_config(config))
    discrepancy = born_discrepancy(rho, result.born_reference)
    metadata = dict(
        tool="phaseprop",
        version=__version__,
        config=format_config(config).splitlines(),
        grid=dict(x_min=config.grid.x_min, x_max=config.grid.x_max, cells=config.grid.cells,
                  dx=config.grid.dx),
        node_epsilon=config.solver.node_epsilon,
        born_reference_sigma_s=config.sigma_s,
        solver=result.metadata.get("solver", {}),
        initial_mass=result.metadata.get("initial_mass"),
        final_mass=rho.mass_audit,
        mass_drift=result.metadata.get("solver", {}).get("mass_drift"),
        normalization_defect=result.metadata.get("normalization_defect"),
        fringes=report.as_dict(),
        born_discrepancy=discrepancy.as_dict(),
    )
    with open(out / "metadata.json", "w") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return metadata


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    result = run_double_slit(config)
    write_bundle(result, config, Path(args.out))
    s = summarize(result)
    print(f"wrote {args.out}: steps={result.metadata['solver']['steps']} "
          f"mass_drift={result.metadata['solver']['mass_drift']:.3g} "
          f"linf_born={s['linf_born_discrepancy']:.4g} split_depth={s['split_depth']:.4g}")
    return EXIT_OK


def parse_sigma_list(text: str) -> list[float]:
    try:
        values = [to_si(v.strip(), -9) for v in text.split(",") if v.strip()]
    except Exception:
        raise ConfigError(f"--sigma-s-nm: cannot parse {text!r} as a comma separated list of numbers") from None
    if not values:
        raise ConfigError("--sigma-s-nm needs at least one value")
    return values


SUMMARY_COLUMNS = ("sigma_s_nm", "split_depth", "central_is_minimum", "linf_born_discrepancy",
                   "status", "error")


def cmd_sweep(args) -> int:
    base = load_config(args.config)
    values = parse_sigma_list(args.sigma_s_nm) if args.sigma_s_nm is not None else [base.sigma_s]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = sweep_sigma_s(base, values, jobs=args.jobs)
    failed = 0
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for i, entry in enumerate(entries):
            nm = from_si(entry.sigma_s, -9)
            if entry.ok:
                cfg = base.with_sigma_s(entry.sigma_s)
                write_bundle(entry.result, cfg, out / f"run_{i:03d}_sigma_s_{nm}nm")
                s = summarize(entry.result)
                writer.writerow((nm, _fmt(s["split_depth"]), str(s["central_is_minimum"]).lower(),
                                 _fmt(s["linf_born_discrepancy"]), "ok", ""))
            else:
                failed += 1
                writer.writerow((nm, "", "", "", "failed", entry.error))
            print(f"sigma_s={nm} nm: {'ok' if entry.ok else 'FAILED ' + entry.error}")
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_checks

    print(f"{'':6}{'check':<34} {'value':<12} {'threshold':<10} detail")
    results = run_checks(args.level, echo=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseprop",
                                     description="Phase-guided probability propagation through a double slit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log defaulted keys and solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configuration and write an output bundle")
    p.add_argument("--config", help="key = value config file (unset keys take the baseline defaults)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run one bundle per sigma_S value plus summary.csv")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--sigma-s-nm", help="comma separated sigma_S values in nm (default: the config value)")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs (default 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the invariant checks and print a pass/fail table")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, NodeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
