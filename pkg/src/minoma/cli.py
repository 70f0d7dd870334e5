"""Command-line front end.

Three subcommands:

* ``run``      - evaluate one scenario point, write CSV + JSON
* ``sweep``    - evaluate a sweep axis, write CSV + JSON (optional figure)
* ``plotdata`` - evaluate a sweep, write a long-format CSV and a figure

Every scenario field can come from a JSON file (--config) and be overridden
by flags. Output paths derive from --out: <out>.csv, <out>.json, <out>.png.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import (
    MODES,
    SWEEP_AXES,
    ScenarioConfig,
    SweepResult,
    export_csv,
    export_json,
    export_plotdata_csv,
    run_sweep,
)

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minoma",
        description="Link-level Monte-Carlo simulator for downlink "
        "multiuser MIMO with power-domain NOMA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "evaluate a single scenario point"),
        ("sweep", "evaluate a sweep over one axis"),
        ("plotdata", "evaluate a sweep and write figure-ready output"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON scenario file")
        p.add_argument("--out", default="result", help="output path stem")
        p.add_argument("--seed", type=int, dest="master_seed")
        p.add_argument("--trials", type=int)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--inter-site-m", type=float, dest="inter_site_m")
        p.add_argument("--bandwidth-hz", type=float, dest="bandwidth_hz")
        p.add_argument("--n-tx", type=int, dest="n_tx")
        p.add_argument("--cluster-size", type=int, dest="cluster_size")
        p.add_argument("--n-users", type=int, dest="n_users")
        p.add_argument("--per-antenna-dbm", type=float, dest="per_antenna_dbm")
        p.add_argument("--p-tol-dbm", type=float, dest="p_tol_dbm")
        p.add_argument("--alpha", type=float)
        p.add_argument("--noise-dbm-hz", type=float, dest="noise_dbm_hz")
        p.add_argument("--head-radius-m", type=float, dest="head_radius_m")
        p.add_argument("--edge-coverage-m", type=float, dest="edge_coverage_m")
        p.add_argument("--rho", type=float)
        p.add_argument("--rho-threshold", type=float, dest="rho_threshold")
        p.add_argument(
            "--beta", type=float, nargs="+", dest="beta_per_rank",
            help="bandwidth share per non-head rank",
        )
        p.add_argument("--modes", nargs="+", choices=MODES)
        p.add_argument(
            "--clustering", choices=("alg1", "alg2"), dest="clustering_algorithm"
        )
        p.add_argument(
            "--power-overrides-dbm", type=float, nargs="+",
            dest="power_overrides_dbm", help="per-beam budget overrides",
        )
        if name != "run":
            p.add_argument("--sweep-axis", choices=SWEEP_AXES, dest="sweep_axis")
            p.add_argument(
                "--sweep-values", type=float, nargs="+", dest="sweep_values"
            )
        if name == "sweep":
            p.add_argument(
                "--plot", action="store_true", help="also render a figure"
            )
    return parser


_CONFIG_FIELDS = {f for f in ScenarioConfig.__dataclass_fields__}
_TUPLE_FIELDS = ("beta_per_rank", "modes", "power_overrides_dbm", "sweep_values")


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    for key, value in vars(args).items():
        if key in _CONFIG_FIELDS and value is not None:
            data[key] = value
    for key in _TUPLE_FIELDS:
        if data.get(key) is not None:
            data[key] = tuple(data[key])
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise SystemExit(f"unknown config fields: {sorted(unknown)}")
    if getattr(args, "command", None) == "run":
        data["sweep_values"] = None  # a run is the single configured point
    return ScenarioConfig(**data)


def _stem(path: str) -> str:
    root, ext = os.path.splitext(path)
    return root if ext in (".csv", ".json", ".png") else path


def _print_summary(result: SweepResult) -> None:
    print(f"# axis: {result.sweep_axis}   trials/point: {result.trials}   "
          f"seed: {result.master_seed}   config: {result.config_hash}")
    for point in result.points:
        for mode in result.config.modes:
            s = point.stats[mode]
            print(
                f"{result.sweep_axis}={point.value:g} {mode:>12}: "
                f"median SE {s.p50:8.3f} bits/s/Hz, "
                f"feasible {100 * s.feasible_frac:5.1f}%"
            )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    config.validate()

    result = run_sweep(config, workers=args.workers)
    stem = _stem(args.out)

    if args.command == "plotdata":
        export_plotdata_csv(result, stem + ".csv")
        from .plotting import render_sweep_figure

        render_sweep_figure(result, stem + ".png")
        print(f"wrote {stem}.csv and {stem}.png")
    else:
        export_csv(result, stem + ".csv")
        export_json(result, stem + ".json")
        wrote = [stem + ".csv", stem + ".json"]
        if args.command == "sweep" and getattr(args, "plot", False):
            from .plotting import render_sweep_figure

            render_sweep_figure(result, stem + ".png")
            wrote.append(stem + ".png")
        print("wrote " + ", ".join(wrote))
    _print_summary(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
