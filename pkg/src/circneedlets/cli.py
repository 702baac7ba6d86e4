"""Command-line interface.

Subcommands: eval, frame-check, simulate, reproduce-table1, bounds, rates,
estimate.  Each run writes its outputs plus a ``manifest.json`` holding the
fully resolved configuration and seed; re-running from the manifest
reproduces every CSV/JSON byte-identically.  Report paths also render PNG
figures alongside the delimited output unless ``--no-figures`` is given.
Exit status is 0 iff no cell-level errors occurred; otherwise the error
list is written to ``errors.json`` and the status is 1.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import d2_rhs, theoretical_rate, wasserstein_rhs
from .coefficients import population_moments
from .density import estimate_density, mise, threshold_config
from .fields import builtin_density, derive_rng, sample_iid
from .montecarlo import (
    ExperimentGrid,
    cell_summary,
    empirical_wasserstein_normal,
    histogram,
    rate_regression,
    run_grid,
)
from .needlets import (
    NeedletParams,
    evaluate_needlet,
    frame_constants,
    frame_tightness_ratio,
    frame_window_bounds,
    needlet_spec,
    quadrature_grid,
    TrigPoly,
    weight,
)
from .reporting import read_json, write_csv, write_json

_DEFAULTS = {
    "eval": {
        "B": 1.3, "s": 2, "j": 10, "eta": 1.0, "center": math.pi,
        "grid_points": 4096, "weight_x_max": 10.0,
    },
    "frame-check": {
        "B": 1.3, "s": 3, "eta": 0.25, "t_points": 64,
        "j_min": -30, "j_max": 40, "harmonics": [5],
    },
    "simulate": {
        "B": 1.3, "s": 3, "eta": 1.0, "center": math.pi, "R": 10.0,
        "t_values": [50, 100, 150], "j_values": [10, 20, 30],
        "n_reps": 500, "density": {"name": "uniform"}, "bins": 25,
    },
    "reproduce-table1": {
        "B": 1.3, "s": 3, "eta": 1.0, "center": math.pi, "R": 10.0,
        "t_values": [50, 100, 150], "j_values": [10, 20, 30],
        "n_reps": 500, "bins": 25,
    },
    "bounds": {
        "B": 1.3, "s": 3, "eta": 1.0, "center": math.pi,
        "j_values": [8, 10, 12], "R_values": [100.0, 1000.0],
        "d": 1, "spacing_turns": 1.0, "density": {"name": "uniform"},
    },
    "rates": {
        "B": 1.3, "s": 3, "eta": 1.0, "center": math.pi,
        "j_values": [6, 8, 10, 12, 14], "R_values": [100.0, 1000.0, 10000.0],
        "n_reps": 500, "density": {"name": "uniform"},
    },
    "estimate": {
        "B": 1.3, "s": 3, "eta": 1.0, "n": 2000, "kappa": 2.0, "J0": 0,
        "density": {"name": "von_mises", "kappa": 2.0}, "grid_points": 1024,
    },
}


def _load_config(command: str, path: str | None) -> dict:
    cfg = dict(_DEFAULTS[command])
    if path:
        cfg.update(read_json(path))
    return cfg


def _parse_cell(text: str) -> dict:
    out = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        if not val:
            raise SystemExit(f"bad --cell fragment {part!r}; expected key=value")
        out[key.strip()] = int(val)
    return out


def _density_from(cfg: dict):
    block = cfg.get("density", {"name": "uniform"})
    kwargs = {k: v for k, v in block.items() if k != "name"}
    return builtin_density(block["name"], **kwargs)


def _write_manifest(outdir: Path, command: str, cfg: dict, seed: int) -> None:
    write_json(outdir / "manifest.json", {
        "command": command,
        "config": cfg,
        "seed": seed,
        "version": __version__,
    })


def _cmd_eval(cfg, outdir, seed, threads, figures):
    params = NeedletParams(B=cfg["B"], s=int(cfg["s"]), eta=cfg["eta"])
    spec = needlet_spec(params, int(cfg["j"]), float(cfg["center"]))
    grid = quadrature_grid(int(cfg["grid_points"]))
    psi = evaluate_needlet(spec, grid)
    write_csv(outdir / "needlet.csv", ["theta", "psi"], np.column_stack([grid, psi]))
    xs = np.linspace(0.0, float(cfg["weight_x_max"]), int(cfg["grid_points"]))
    ws = weight(params.s, xs)
    write_csv(outdir / "weight.csv", ["x", "w"], np.column_stack([xs, ws]))
    if figures:
        from . import plots

        plots.save_weight_figure(xs, ws, params.s, outdir / "weight.png")
        plots.save_needlet_figure(grid, psi, spec, outdir / "needlet.png")
    return []


def _cmd_frame_check(cfg, outdir, seed, threads, figures):
    params = NeedletParams(B=cfg["B"], s=int(cfg["s"]), eta=cfg["eta"])
    consts = frame_constants(params)
    t_grid = np.exp(np.linspace(0.0, 2.0 * math.log(params.B), int(cfg["t_points"])))
    m_hat, M_hat = frame_window_bounds(params, t_grid)
    rows = []
    for k in cfg["harmonics"]:
        coeffs = np.zeros(int(k) + 1, dtype=complex)
        coeffs[int(k)] = 1.0
        ratio = frame_tightness_ratio(params, TrigPoly(coeffs), int(cfg["j_min"]), int(cfg["j_max"]))
        rows.append([int(k), ratio, ratio / consts.lambda_Bs])
    write_csv(outdir / "tightness.csv", ["harmonic", "ratio", "ratio_over_lambda"], rows)
    write_json(outdir / "frame.json", {
        "e_s": consts.e_s, "lambda_Bs": consts.lambda_Bs,
        "m_hat": m_hat, "M_hat": M_hat, "window_ratio": M_hat / m_hat,
    })
    return []


def _grid_from_cfg(cfg, seed, density) -> ExperimentGrid:
    return ExperimentGrid(
        t_values=tuple(int(t) for t in cfg["t_values"]),
        j_values=tuple(int(j) for j in cfg["j_values"]),
        R_per_t=float(cfg["R"]),
        B=cfg["B"], s=int(cfg["s"]), eta=cfg["eta"], center=float(cfg["center"]),
        density=density, n_reps=int(cfg["n_reps"]), seed=seed,
    )


def _cmd_simulate(cfg, outdir, seed, threads, figures, table_mode=False):
    density = _density_from(cfg) if not table_mode else builtin_density("uniform")
    grid = _grid_from_cfg(cfg, seed, density)
    result = run_grid(grid, threads=threads)
    rows = []
    for (t, j), samp in sorted(result.cells.items()):
        try:
            summary = cell_summary(samp)
        except Exception as exc:
            result.errors.append({"cell": [t, j], "error": repr(exc)})
            continue
        rows.append([summary[k] for k in ("j", "t", "R_t", "n_reps", "mean", "var", "W", "p", "W1")])
        hist = histogram(samp.column(0), int(cfg.get("bins", 25)))
        write_csv(outdir / f"hist_t{t}_j{j}.csv", ["bin_center", "count"], hist)
        samp.to_csv(outdir / f"sample_t{t}_j{j}.csv")
    header = ["j", "t", "R_t", "n_reps", "mean", "var", "W", "p", "W1"]
    name = "table1.csv" if table_mode else "cells.csv"
    write_csv(outdir / name, header, rows)
    if table_mode:
        passing = sum(1 for r in rows if r[7] > 0.01)
        write_json(outdir / "summary.json", {
            "cells": len(rows), "cells_with_p_above_0.01": passing,
        })
    if figures and result.cells:
        from . import plots

        plots.save_histogram_grid(result.cells, outdir / "histograms.png",
                                  bins=int(cfg.get("bins", 25)))
    return result.errors


def _cmd_bounds(cfg, outdir, seed, threads, figures):
    params = NeedletParams(B=cfg["B"], s=int(cfg["s"]), eta=cfg["eta"])
    density = _density_from(cfg)
    d = int(cfg["d"])
    reports = []
    rows = []
    for j in cfg["j_values"]:
        spacing = float(cfg["spacing_turns"]) * 2.0 * math.pi * params.B ** float(-int(j))
        centers = [float(cfg["center"]) + i * spacing for i in range(d)]
        moments = [population_moments(needlet_spec(params, int(j), c), density) for c in centers]
        for R_t in cfg["R_values"]:
            uni = wasserstein_rhs(moments[0], density, float(R_t))
            rate_uni, rate_multi = theoretical_rate(int(j), float(R_t), params.B, d)
            row = {"j": int(j), "R_t": float(R_t), "wasserstein_rhs": uni,
                   "rate_term": rate_uni}
            if d >= 2:
                rep = d2_rhs(moments, density, float(R_t))
                reports.append(rep)
                row.update({"d2_rhs": rep.d2_rhs,
                            "covariance_hs_term": rep.covariance_hs_term,
                            "triple_term": rep.triple_term,
                            "rate_multivariate": rate_multi})
            else:
                from .bounds import BoundReport

                reports.append(BoundReport(
                    config={"j": int(j), "R_t": float(R_t), "d": 1,
                            "density": density.name},
                    wasserstein_rhs=uni, rate_term=rate_uni,
                ))
            rows.append(row)
    header = sorted({k for r in rows for k in r})
    write_csv(outdir / "bounds.csv", header, [[r.get(k, "") for k in header] for r in rows])
    write_json(outdir / "bounds.json", [r.to_dict() for r in reports])
    if figures:
        from . import plots

        plots.save_bounds_figure(reports, outdir / "bounds.png")
    return []


def _cmd_rates(cfg, outdir, seed, threads, figures):
    from .montecarlo import sample_cell

    params = NeedletParams(B=cfg["B"], s=int(cfg["s"]), eta=cfg["eta"])
    density = _density_from(cfg)
    cells = []
    rows = []
    errors = []
    for j in cfg["j_values"]:
        for R_t in cfg["R_values"]:
            try:
                samp = sample_cell(params, int(j), density, float(R_t),
                                   int(cfg["n_reps"]), seed,
                                   center=float(cfg["center"]), t_key=int(R_t))
                w1 = empirical_wasserstein_normal(samp.column(0))
                cells.append((int(j), float(R_t), w1))
                rows.append([int(j), float(R_t), params.B ** float(-int(j)) * float(R_t), w1])
            except Exception as exc:
                errors.append({"cell": [int(j), float(R_t)], "error": repr(exc)})
    slope, intercept, r2 = rate_regression(cells, params.B)
    write_csv(outdir / "rates.csv", ["j", "R_t", "effective_sample_size", "W1"], rows)
    write_json(outdir / "rates.json", {"slope": slope, "intercept": intercept, "r2": r2})
    if figures:
        from . import plots

        plots.save_rate_figure(cells, slope, intercept, params.B, outdir / "rates.png")
    return errors


def _cmd_estimate(cfg, outdir, seed, threads, figures):
    params = NeedletParams(B=cfg["B"], s=int(cfg["s"]), eta=cfg["eta"])
    density = _density_from(cfg)
    sample = sample_iid(density, int(cfg["n"]), seed, rng=derive_rng(seed, 2, 0))
    tcfg = threshold_config(int(cfg["n"]), params.B, J0=int(cfg["J0"]), kappa=float(cfg["kappa"]))
    est = estimate_density(sample, params, tcfg)
    grid = quadrature_grid(int(cfg["grid_points"]))
    fhat = est(grid)
    truth = density(grid)
    write_csv(outdir / "estimate.csv", ["theta", "fhat", "truth"],
              np.column_stack([grid, fhat, truth]))
    write_json(outdir / "coefficients.json", est.surviving_manifest())
    write_json(outdir / "estimate_summary.json", {
        "mise": mise(est, density),
        "mass": float(np.mean(fhat)),
        "surviving": len(est.coefficients),
        "tau_n": tcfg.tau_n, "Jn": tcfg.Jn, "kappa": tcfg.kappa,
    })
    if figures:
        from . import plots

        plots.save_estimate_figure(grid, fhat, truth, outdir / "estimate.png")
    return []


_COMMANDS = {
    "eval": _cmd_eval,
    "frame-check": _cmd_frame_check,
    "simulate": _cmd_simulate,
    "reproduce-table1": lambda *a: _cmd_simulate(*a, table_mode=True),
    "bounds": _cmd_bounds,
    "rates": _cmd_rates,
    "estimate": _cmd_estimate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="circneedlets",
        description="Mexican needlets on the circle: simulation and verification runs.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="root RNG seed")
    parser.add_argument("--threads", type=int, default=1, help="parallel cell workers")
    parser.add_argument("--cell", help="single-cell override, e.g. j=10,t=50")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    args = parser.parse_args(argv)

    cfg = _load_config(args.command, args.config)
    if args.cell:
        override = _parse_cell(args.cell)
        if "j" in override:
            cfg["j_values"] = [override["j"]]
            cfg["j"] = override["j"]
        if "t" in override:
            cfg["t_values"] = [override["t"]]
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    errors = _COMMANDS[args.command](cfg, outdir, args.seed, args.threads,
                                     not args.no_figures)
    _write_manifest(outdir, args.command, cfg, args.seed)
    if errors:
        write_json(outdir / "errors.json", errors)
        print(f"{len(errors)} cell-level error(s); see errors.json", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
