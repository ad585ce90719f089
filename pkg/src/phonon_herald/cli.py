"""Command-line front end.

    phonon-herald <command> --config run.ini [--out DIR] [--formats csv,json,svg] [--ideal-fock N]

Exit codes: 0 success, 2 config/usage/parameter errors, 3 unstable dynamics,
4 zero heralding probability, 5 numerical-integrity failures, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import (
    PolynomialGaussianWigner,
    Scenario,
    phonon_distribution,
    temperature_sweep,
    wigner_grid,
)
from .config import COMMANDS, RunConfig, load_config, parse_formats
from .errors import ConfigError, PhononHeraldError
from .output import EmittedArtifact, write_bytes, write_csv, write_json

log = logging.getLogger("phonon_herald")

US = 1e-6
MK = 1e-3


def _base_summary(command: str, cfg: RunConfig) -> dict:
    return {"command": command, "version": __version__, "params": dict(cfg.lab_params)}


def _svg(out: Path, name: str, render) -> EmittedArtifact:
    return write_bytes(out / f"{name}.svg", render(), "svg")


def cmd_derive(cfg: RunConfig, out: Path) -> list[EmittedArtifact]:
    from .dynamics import stability_check
    from .params import derive_params

    d = derive_params(cfg.params)
    st = stability_check(d)
    payload = _base_summary("derive", cfg)
    payload["derived"] = d.as_dict()
    payload["stability"] = {"c1": st.c1, "c2": st.c2, "stable": st.stable}
    return [write_json(out / "derive.json", payload)]


def cmd_fidelity_sweep(cfg: RunConfig, out: Path) -> list[EmittedArtifact]:
    scenario = Scenario(cfg.params)
    rows = []
    points = []
    errors: list[PhononHeraldError] = []
    for t_us in cfg.times_us:
        try:
            res = scenario.evaluate(t_us * US)
            err = res.error
        except PhononHeraldError as exc:
            res, err = None, exc
        if err is not None:
            errors.append(err)
            log.error("%s", err)
        point = {
            "t_us": t_us,
            "fidelity": None if res is None else res.fidelity,
            "n_eff": None if res is None else res.n_eff,
            "log_negativity": None if res is None else res.log_negativity,
            "heralding_weight": None if res is None else res.heralding_weight,
            "error": None if err is None else str(err),
        }
        points.append(point)
        rows.append([point[k] for k in ("t_us", "fidelity", "n_eff", "log_negativity", "heralding_weight", "error")])
    if len(errors) == len(points):
        raise errors[0]

    header = ["t_us", "fidelity", "n_eff", "log_negativity", "heralding_weight"]
    if errors:
        header.append("error")
    else:
        rows = [r[:-1] for r in rows]
    arts = []
    if "csv" in cfg.formats:
        arts.append(write_csv(out / "fidelity_sweep.csv", header, rows))
    if "json" in cfg.formats:
        payload = _base_summary("fidelity-sweep", cfg)
        payload.update(points=points, n_failed=len(errors))
        arts.append(write_json(out / "fidelity_sweep.json", payload))
    if "svg" in cfg.formats:
        ok = [p for p in points if p["fidelity"] is not None]
        from .plotting import line_plot

        arts.append(
            _svg(
                out,
                "fidelity_sweep",
                lambda: line_plot([p["t_us"] for p in ok], {"F": [p["fidelity"] for p in ok]}, "t (us)", "F"),
            )
        )
    return arts


def _source(cfg: RunConfig):
    """The Wigner function to analyse: an ideal Fock reference or the conditioned state."""
    if cfg.ideal_fock is not None:
        if cfg.ideal_fock < 0:
            raise ConfigError("ideal_fock must be >= 0")
        return PolynomialGaussianWigner.fock(cfg.ideal_fock), f"ideal_fock_{cfg.ideal_fock}", None
    return Scenario(cfg.params).conditional_wigner(cfg.time_us * US), "conditional", cfg.time_us


def cmd_wigner(cfg: RunConfig, out: Path) -> list[EmittedArtifact]:
    w, source, time_us = _source(cfg)
    grid = wigner_grid(w, cfg.extent, cfg.resolution)
    arts = []
    if "csv" in cfg.formats:
        arts.append(write_csv(out / "wigner.csv", ["delta_r", "delta_i", "W"], grid.rows()))
    if "json" in cfg.formats:
        payload = _base_summary("wigner", cfg)
        payload.update(
            source=source,
            time_us=time_us,
            extent=grid.extent,
            resolution=grid.resolution,
            min_value=grid.min_value,
            min_location=list(grid.min_location),
            normalization=grid.normalization,
            normalization_residual=grid.normalization - 1.0,
        )
        arts.append(write_json(out / "wigner.json", payload))
    if "svg" in cfg.formats:
        from .plotting import heat_map

        arts.append(_svg(out, "wigner", lambda: heat_map(grid.axis, grid.values)))
    return arts


def cmd_phonon_stats(cfg: RunConfig, out: Path) -> list[EmittedArtifact]:
    if cfg.n_max < 1:
        raise ConfigError("n_max must be >= 1")
    w, source, time_us = _source(cfg)
    dist = phonon_distribution(w, cfg.n_max)
    ns = list(range(dist.n_max + 1))
    arts = []
    if "csv" in cfg.formats:
        arts.append(write_csv(out / "phonon_stats.csv", ["n", "probability"], zip(ns, dist.probabilities)))
    if "json" in cfg.formats:
        payload = _base_summary("phonon-stats", cfg)
        payload.update(
            source=source,
            time_us=time_us,
            probabilities=list(dist.probabilities),
            mode=dist.mode,
            clamped=list(dist.clamped),
        )
        arts.append(write_json(out / "phonon_stats.json", payload))
    if "svg" in cfg.formats:
        from .plotting import bar_plot

        arts.append(_svg(out, "phonon_stats", lambda: bar_plot(ns, dist.probabilities)))
    return arts


def cmd_temp_sweep(cfg: RunConfig, out: Path) -> list[EmittedArtifact]:
    sweep = temperature_sweep(
        cfg.params,
        [T * MK for T in cfg.temps_mk],
        [t * US for t in cfg.times_us],
        n_max=cfg.n_max,
        workers=cfg.workers,
    )
    # keep the configured numbers for output rather than round-tripped SI values
    labels = [(T, t) for T in cfg.temps_mk for t in cfg.times_us]
    failed = [r for r in sweep.records if r.error is not None]
    if failed and len(failed) == len(sweep.records):
        raise PhononHeraldError(failed[0].error)
    header = ["T_mK", "t_us", "fidelity", "n_eff", "log_negativity"]
    if failed:
        header.append("error")
    rows = []
    records = []
    for (T, t), rec in zip(labels, sweep.records):
        row = [T, t, rec.fidelity, rec.n_eff, rec.log_negativity]
        if failed:
            row.append(rec.error)
        rows.append(row)
        records.append(
            {
                "T_mK": T,
                "t_us": t,
                "fidelity": rec.fidelity,
                "n_eff": rec.n_eff,
                "log_negativity": rec.log_negativity,
                "phonon": None if rec.phonon is None else list(rec.phonon),
                "error": rec.error,
            }
        )
    arts = []
    if "csv" in cfg.formats:
        arts.append(write_csv(out / "temp_sweep.csv", header, rows))
    if "json" in cfg.formats:
        payload = _base_summary("temp-sweep", cfg)
        payload["records"] = records
        arts.append(write_json(out / "temp_sweep.json", payload))
    if "svg" in cfg.formats:
        from .plotting import fidelity_map

        arts.append(
            _svg(out, "temp_sweep", lambda: fidelity_map([(r["T_mK"], r["t_us"], r["fidelity"]) for r in records]))
        )
    return arts


def cmd_entanglement(cfg: RunConfig, out: Path) -> list[EmittedArtifact]:
    scenario = Scenario(cfg.params)
    points = []
    for t_us in cfg.times_us:
        res = scenario.evaluate(t_us * US, fidelity=False)
        points.append({"t_us": t_us, "log_negativity": res.log_negativity, "n_eff": res.n_eff})
    arts = []
    if "csv" in cfg.formats:
        arts.append(
            write_csv(
                out / "entanglement.csv",
                ["t_us", "log_negativity", "n_eff"],
                ([p["t_us"], p["log_negativity"], p["n_eff"]] for p in points),
            )
        )
    if "json" in cfg.formats:
        payload = _base_summary("entanglement", cfg)
        payload.update(points=points, max_log_negativity=max(p["log_negativity"] for p in points))
        arts.append(write_json(out / "entanglement.json", payload))
    if "svg" in cfg.formats:
        from .plotting import line_plot

        arts.append(
            _svg(
                out,
                "entanglement",
                lambda: line_plot(
                    [p["t_us"] for p in points],
                    {"E_N": [p["log_negativity"] for p in points]},
                    "t (us)",
                    "log negativity",
                ),
            )
        )
    return arts


HANDLERS = {
    "derive": cmd_derive,
    "fidelity-sweep": cmd_fidelity_sweep,
    "wigner": cmd_wigner,
    "phonon-stats": cmd_phonon_stats,
    "temp-sweep": cmd_temp_sweep,
    "entanglement": cmd_entanglement,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonon-herald",
        description="Heralded single-phonon states from photon subtraction in a linearized optomechanical cavity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "derive": "derived constants and stability verdict (JSON)",
        "fidelity-sweep": "single-phonon fidelity versus measurement time",
        "wigner": "conditional Wigner function on a grid",
        "phonon-stats": "phonon-number distribution of the conditioned state",
        "temp-sweep": "fidelity over bath temperature and measurement time",
        "entanglement": "logarithmic negativity and n_eff versus time",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides out_dir)")
        p.add_argument("--formats", default=None, help="comma list from csv,json,svg")
        p.add_argument("--ideal-fock", type=int, default=None, metavar="N",
                       help="analyse the ideal Fock state |N> instead (wigner, phonon-stats)")
    return parser


def run(argv: list[str] | None = None) -> tuple[int, list[EmittedArtifact]]:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.formats is not None:
            overrides["formats"] = parse_formats(args.formats)
        if args.ideal_fock is not None:
            overrides["ideal_fock"] = args.ideal_fock
        cfg = replace(cfg, **overrides)
        cfg.require(args.command)
        out = args.out if args.out is not None else Path(cfg.out_dir)
        arts = HANDLERS[args.command](cfg, out)
    except PhononHeraldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code, []
    for art in arts:
        print(art)
    return 0, arts


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
