"""Command-line interface: ``rotorflux <command> [options]``.

Commands
  flux      per-site current and its term breakdown for a given profile
  profile   self-consistent inner temperatures between two end baths
  rectify   forward/reverse currents for one (t_hot, t_cold) pair
  sweep     rectify over a list of pairs
  simulate  Langevin run (optionally self-consistent) with error bars
  units     reduced parameters and the scaling record

Exit status is 0 on success, 1 on a numeric failure, 2 on a config error.
Site labels in output are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .analytic.closed_forms import nnn_flux, quasi_homogeneous_flux
from .analytic.flux import FORMULAS, flux_kernel
from .config import ConfigError, RunConfig
from .model import nondimensionalize
from .selfconsistent import DecoupledChainError, OutsideValidityWarning, rectification, solve_profile, sweep
from .simulate import IntegratorAbort, SCNotConverged, integrate, run_metadata, sc_iterate
from .simulate.core import SCHEMES

log = logging.getLogger("rotorflux")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2
TABLE_SIZES = (16, 32)
TABLE_PAIRS = ((0.2, 0.1), (0.3, 0.1), (0.5, 0.1), (0.4, 0.2))
RECTIFY_COLUMNS = ["N", "T_H", "T_C", "flux_L", "flux_R", "sum", "asymmetry", "max_residual"]


class NumericFailure(RuntimeError):
    pass


# ---------------------------------------------------------------- output


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def emit(columns, rows, args, *, extra: dict | None = None):
    if args.format == "json":
        doc = {"command": args.command, "columns": columns, "rows": [dict(zip(columns, map(_jsonable, r))) for r in rows]}
        if extra:
            doc.update(extra)
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def closed_form_column(spec, temps) -> list[float] | None:
    """Closed-form site currents, or None when the chain has no closed form.

    Needs uniform masses and pinning and bonds of at most two uniform ranges;
    bath couplings may vary from site to site.
    """
    m, M = spec.masses, spec.pinning
    if np.ptp(m) or np.ptp(M) or spec.coupling.max_range > 2:
        return None
    n, lam = spec.n_sites, spec.lam
    nn = np.diagonal(lam, 1)
    nnn = np.diagonal(lam, 2) if n > 2 else np.zeros(1)
    if np.ptp(nn) or (nnn.size and np.ptp(nnn)):
        return None
    l, nu, z, t = nn[0], nnn[0] if nnn.size else 0.0, spec.bath_coupling, np.asarray(temps, dtype=float)
    out = []
    for a in range(n - 1):
        if a + 2 < n:
            out.append(nnn_flux(l, nu, m[0], M[0], z[a:a + 3], t[a:a + 3]))
        else:
            # the last site has no partner two steps ahead
            out.append(quasi_homogeneous_flux(l, m[0], M[0], z[a], z[a + 1], t[a], t[a + 1]))
    return [x / spec.kappa for x in out]


def cmd_flux(cfg: RunConfig, args) -> int:
    spec = cfg.chain()
    temps = cfg.temperature_profile(required=True)
    kernel = flux_kernel(spec, cfg["formula"])
    total = kernel.flux(temps)
    parts = kernel.term_flux(temps)
    rows = [
        [a + 1, total[a], parts["ft"][a], parts["w1"][a], parts["w2"][a], parts["w3"][a]]
        for a in range(spec.n_sites - 1)
    ]
    columns = ["alpha", "flux", "ft", "w1", "w2", "w3"]
    if getattr(args, "explain", False):
        ref = closed_form_column(spec, temps)
        if ref is None:
            print("warning (explain): no closed form for graded masses, graded pinning or longer-range bonds",
                  file=sys.stderr)
            ref = [None] * len(rows)
        columns.append("closed_form")
        for row, x in zip(rows, ref):
            row.append(x)
    emit(columns, rows, args)
    return EXIT_OK


def cmd_profile(cfg: RunConfig, args) -> int:
    spec = cfg.chain()
    sol = solve_profile(spec, cfg["t_hot"], cfg["t_cold"], formula=cfg["formula"], rtol=cfg["tol"])
    if not sol.converged:
        raise NumericFailure(f"residual {sol.max_residual:.3g} above tolerance {sol.tolerance:.3g}")
    t = sol.profile.temperatures
    rows = [[j + 1, t[j], sol.site_fluxes[j] if j < spec.n_sites - 1 else None] for j in range(spec.n_sites)]
    emit(["site", "temperature", "site_flux"], rows, args,
         extra={"flux": sol.flux, "max_residual": sol.max_residual, "condition": sol.condition})
    return EXIT_OK


def _report_row(n, h, c, rep):
    return [n, h, c, rep.flux_left, rep.flux_right, rep.sum, rep.asymmetry, rep.max_residual]


def cmd_rectify(cfg: RunConfig, args) -> int:
    if args.table:
        rows = []
        for n in TABLE_SIZES:
            spec = RunConfig.from_mapping({**_raw(cfg), "n_sites": n}).chain()
            for row in sweep(spec, TABLE_PAIRS, formula=cfg["formula"], rtol=cfg["tol"]):
                if row.error:
                    raise NumericFailure(row.error)
                rows.append(_report_row(n, row.t_hot, row.t_cold, row.report))
        emit(RECTIFY_COLUMNS, rows, args)
        return EXIT_OK
    h, c = cfg.rect_pair()
    spec = cfg.chain()
    rep = rectification(spec, h, c, formula=cfg["formula"], rtol=cfg["tol"])
    emit(RECTIFY_COLUMNS, [_report_row(spec.n_sites, h, c, rep)], args)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    pairs = list(cfg["pairs"] or [])
    spec = cfg.chain()
    rows, failed = [], 0
    for row in sweep(spec, pairs, formula=cfg["formula"], rtol=cfg["tol"], max_workers=cfg["workers"]):
        if row.error:
            failed += 1
            print(f"error: pair ({row.t_hot:g}, {row.t_cold:g}): {row.error}", file=sys.stderr)
            rows.append([spec.n_sites, row.t_hot, row.t_cold] + [None] * 5 + [row.error])
        else:
            rows.append(_report_row(spec.n_sites, row.t_hot, row.t_cold, row.report) + [None])
    emit(RECTIFY_COLUMNS + ["error"], rows, args)
    return EXIT_NUMERIC if failed else EXIT_OK


SIM_COLUMNS = [
    "site", "temperature", "kinetic_temp", "kinetic_temp_se", "q2", "q2_se", "p2", "p2_se",
    "bath_residual", "bath_residual_se", "flux_site", "flux_site_se", "flux_cut", "flux_cut_se", "flux_lowT",
]


def cmd_simulate(cfg: RunConfig, args) -> int:
    spec = cfg.chain()
    temps = cfg.temperature_profile()
    sim = cfg.sim_config()
    try:
        red_spec, red_profile, scaling = nondimensionalize(spec, temps)
        red_t, f = red_profile.temperatures, scaling.factors()
    except ValueError as exc:
        log.warning("simulating in the given units: %s", exc)
        red_spec, red_t, f = spec, temps, None
    t0 = time.perf_counter()
    history = None
    if cfg["sc"]:
        res = sc_iterate(red_spec, float(red_t[0]), float(red_t[-1]), sim, cfg.sc_config())
        obs, red_temps, history = res.observables, res.profile.temperatures, res.residual_history
    else:
        obs = integrate(red_spec, red_t, sim)
        red_temps = np.asarray(red_t)
    wall = time.perf_counter() - t0

    energy = f["energy"] if f else 1.0
    power = energy * f["bath_coupling"] if f else 1.0
    q_sq = f["position"] ** 2 if f else 1.0
    p_sq = f["momentum"] ** 2 if f else 1.0
    n = spec.n_sites
    t_phys = red_temps * energy
    lowT = flux_kernel(spec, cfg["formula"]).flux(t_phys)
    res_est = obs.bath_residuals
    rows = []
    for j in range(n):
        inner = j < n - 1
        rows.append([
            j + 1, t_phys[j],
            obs.kinetic_temps.mean[j] * energy, obs.kinetic_temps.stderr[j] * energy,
            obs.q2.mean[j] * q_sq, obs.q2.stderr[j] * q_sq,
            obs.p2.mean[j] * p_sq, obs.p2.stderr[j] * p_sq,
            res_est.mean[j] * power, res_est.stderr[j] * power,
            obs.flux_site.mean[j] * power if inner else None,
            obs.flux_site.stderr[j] * power if inner else None,
            obs.flux_cut.mean[j] * power if inner else None,
            obs.flux_cut.stderr[j] * power if inner else None,
            lowT[j] if inner else None,
        ])
    emit(SIM_COLUMNS, rows, args)
    meta_path = args.meta or (f"{args.out}.meta.json" if args.out else None)
    if meta_path:
        meta = run_metadata(red_spec, red_temps, sim, wall, self_consistent=cfg["sc"],
                            sc_residual_history=history, scaling=f)
        Path(meta_path).write_text(json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def cmd_units(cfg: RunConfig, args) -> int:
    spec = cfg.chain()
    temps = cfg.temperature_profile()
    if not np.all(spec.pinning == spec.pinning[0]):
        raise ConfigError("units: pinning must be uniform for the reduced description")
    red, red_t, sc = nondimensionalize(spec, temps)
    f = sc.factors()
    rows = [
        ["lambda", cfg["lambda"], cfg["lambda"] / f["coupling"], f["coupling"]],
        ["nu", cfg["nu"], cfg["nu"] / f["coupling"], f["coupling"]],
        ["pinning", spec.pinning[0], red.pinning[0], f["pinning"]],
        ["kappa", spec.kappa, red.kappa, f["kappa"]],
    ]
    for name, phys, redv, fac in (("mass", spec.masses, red.masses, f["mass"]),
                                  ("zeta", spec.bath_coupling, red.bath_coupling, f["bath_coupling"])):
        if np.all(phys == phys[0]):
            rows.append([name, phys[0], redv[0], fac])
        else:
            rows += [[f"{name}_{j + 1}", phys[j], redv[j], fac] for j in range(spec.n_sites)]
    t_hot_hat = cfg["t_hot"] / f["temperature"]
    rows.append(["t_hot", cfg["t_hot"], t_hot_hat, f["temperature"]])
    rows.append(["t_cold", cfg["t_cold"], cfg["t_cold"] / f["temperature"], f["temperature"]])
    if cfg["temperatures"] not in (None, "linear"):
        rows += [[f"T_{j + 1}", temps[j], red_t.temperatures[j], f["temperature"]] for j in range(spec.n_sites)]
    for name in ("energy", "mass", "frequency", "length", "momentum", "time"):
        value = getattr(sc, name)
        rows.append([f"{name}_scale", value, 1.0, value])
    t_max = max(float(np.max(red_t.temperatures)), t_hot_hat)
    if t_max >= 1:
        print(f"warning: reduced temperature {t_max:g} >= 1, outside the low-temperature regime", file=sys.stderr)
    emit(["quantity", "physical", "reduced", "factor"], rows, args)
    return EXIT_OK


COMMANDS = {
    "flux": cmd_flux,
    "profile": cmd_profile,
    "rectify": cmd_rectify,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "units": cmd_units,
}


# ---------------------------------------------------------------- parsing


def _float_list(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _scalar_or_list(text: str):
    vals = _float_list(text)
    return vals[0] if len(vals) == 1 else vals


def _temps_arg(text: str):
    return "linear" if text == "linear" else _float_list(text)


# flag dest -> config key
_OVERRIDES = {
    "n_sites": "n_sites", "mass": "mass", "m1": "m1", "mN": "mN", "pinning": "pinning", "zeta": "zeta",
    "lam": "lambda", "nu": "nu", "kappa": "kappa", "t_hot": "t_hot", "t_cold": "t_cold",
    "temperatures": "temperatures", "pairs": "pairs", "formula": "formula", "tol": "tol",
    "workers": "workers", "dt": "dt", "n_steps": "n_steps", "burn_in": "burn_in",
    "n_trajectories": "n_trajectories", "seed": "seed", "scheme": "scheme", "sc": "sc",
    "sc_max_iters": "sc_max_iters", "sc_damping": "sc_damping", "sc_tol": "sc_tol",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run")
    g.add_argument("--config", help="YAML file of flat key: value pairs")
    g.add_argument("--out", help="write output here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--seed", type=int)
    g.add_argument("--tol", type=float, help="relative residual tolerance of the linear solve")
    g.add_argument("--formula", choices=FORMULAS)
    g.add_argument("-v", "--verbose", action="count", default=0)
    c = common.add_argument_group("chain")
    c.add_argument("--n-sites", type=int)
    c.add_argument("--mass", type=_scalar_or_list, help="one mass or a comma list (overrides m1/mN)")
    c.add_argument("--m1", type=float)
    c.add_argument("--mN", type=float)
    c.add_argument("--pinning", type=_scalar_or_list)
    c.add_argument("--zeta", type=_scalar_or_list)
    c.add_argument("--lambda", dest="lam", type=float)
    c.add_argument("--nu", type=float)
    c.add_argument("--kappa", type=float)
    c.add_argument("--t-hot", type=float)
    c.add_argument("--t-cold", type=float)
    c.add_argument("--temperatures", type=_temps_arg, help="comma list, one per site, or 'linear'")

    p = argparse.ArgumentParser(prog="rotorflux", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    f = sub.add_parser("flux", parents=[common], help="per-site current for a profile")
    f.add_argument("--explain", action="store_true", help="add the closed-form reference column when one exists")
    sub.add_parser("profile", parents=[common], help="self-consistent temperature profile")
    r = sub.add_parser("rectify", parents=[common], help="forward and reverse currents")
    r.add_argument("--table", action="store_true", help="replay the N=16/32 benchmark grid")
    s = sub.add_parser("sweep", parents=[common], help="rectify over several pairs")
    s.add_argument("--pair", dest="pairs", nargs=2, type=float, action="append", metavar=("T_H", "T_C"))
    s.add_argument("--workers", type=int)
    m = sub.add_parser("simulate", parents=[common], help="Langevin simulation")
    m.add_argument("--dt", type=float)
    m.add_argument("--n-steps", type=int)
    m.add_argument("--burn-in", type=int)
    m.add_argument("--trajectories", dest="n_trajectories", type=int)
    m.add_argument("--scheme", choices=tuple(SCHEMES))
    m.add_argument("--workers", type=int)
    m.add_argument("--sc", action="store_const", const=True, help="iterate inner baths to self-consistency")
    m.add_argument("--sc-max-iters", type=int)
    m.add_argument("--sc-damping", type=float)
    m.add_argument("--sc-tol", type=float)
    m.add_argument("--meta", help="run metadata JSON path (default: <out>.meta.json)")
    sub.add_parser("units", parents=[common], help="reduced units and scaling record")
    return p


def _raw(cfg: RunConfig) -> dict:
    return {k: v for k, v in cfg.values.items() if v is not None}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s: %(message)s")
    overrides = {key: getattr(args, dest) for dest, key in _OVERRIDES.items() if hasattr(args, dest)}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            warnings.showwarning = _show_warning
            cfg = RunConfig.from_sources(args.config, overrides)
            return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DecoupledChainError, np.linalg.LinAlgError, IntegratorAbort, SCNotConverged, NumericFailure) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _show_warning(message, category, filename, lineno, file=None, line=None):
    label = "outside model validity" if category is OutsideValidityWarning else category.__name__
    print(f"warning ({label}): {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
