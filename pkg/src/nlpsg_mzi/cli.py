"""Command-line front end: ``nlpsg-mzi {optimize,sweep,tables,manifold,validate}``."""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .detection import CONVENTIONS, SQUARED, DetectorModel
from .mzi import DEFAULT_ALPHA_RATIO_SQ, DEFAULT_PHI_POINTS, ExperimentConfig, InputSpec, default_phi_grid, sweep
from .nlpsg import Branch, Family, OptimizationError, eta_manifold, optimize_beta
from .reporting import RunManifest, atomic_write, csv_text, envelope, json_text, manifest_path
from .validation import reproduce_tables, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_VALIDATION = 0, 1, 2, 3

SWEEP_COLUMNS = ("phi", "P", "P_prime", "three_photon", "AC", "DC")
MANIFOLD_COLUMNS = ("tau", "eta", "tau_sq", "eta_sq")

# config-file keys, by section, with their parsers
CONFIG_KEYS = {
    "gate": {"family": str, "branch": str},
    "interferometer": {"theta": float, "phi_points": int},
    "input": {"input": str, "alpha_ratio_sq": float},
    "detectors": {"xi": lambda v: [float(x) for x in v.replace(",", " ").split()],
                  "convention": str},
    "manifold": {"r_star": float, "tau_points": int},
}
DEFAULTS = {"family": "klm", "branch": "bottom", "theta": math.pi / 2, "phi_points": DEFAULT_PHI_POINTS,
            "input": "wcs", "alpha_ratio_sq": DEFAULT_ALPHA_RATIO_SQ, "xi": [1.0, 1.0, 1.0, 1.0],
            "convention": SQUARED, "r_star": None, "tau_points": 101}


class ConfigError(ValueError):
    pass


def read_config(path: str | Path) -> dict:
    """Parse a sectioned ``key = value`` file into a flat option dict."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    out = {}
    for section in parser.sections():
        known = CONFIG_KEYS.get(section)
        if known is None:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"{path}: [{section}] unknown key {key!r}")
            try:
                out[key] = known[key](raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: [{section}] {key} = {raw!r}: {exc}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=[f.value for f in Family])
    common.add_argument("--branch", choices=[b.value for b in Branch])
    common.add_argument("--theta", type=float, help="final beam-splitter angle in radians")
    common.add_argument("--xi", type=float, nargs=4, metavar="XI", help="efficiencies of modes 1-4")
    common.add_argument("--input", choices=["wcs", "clspdc"])
    common.add_argument("--alpha-ratio-sq", dest="alpha_ratio_sq", type=float,
                        help="|alpha_2 / alpha_0|^2 of both inputs")
    common.add_argument("--phi-points", dest="phi_points", type=int)
    common.add_argument("--convention", choices=list(CONVENTIONS))
    common.add_argument("--config", help="sectioned key = value file; flags override it")
    common.add_argument("--json", action="store_true", help="print {manifest, results} JSON")
    common.add_argument("--out", help="output file; a .manifest.json is written next to it")

    p = argparse.ArgumentParser(prog="nlpsg-mzi", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize", parents=[common], help="optimal gate parameters")
    sub.add_parser("sweep", parents=[common], help="coincidence probability over the phase")
    sub.add_parser("tables", parents=[common], help="recompute the four reference table cells")
    m = sub.add_parser("manifold", parents=[common], help="ring transmission manifold eta(tau)")
    m.add_argument("--r-star", dest="r_star", type=float, help="defaults to the KLM optimum r1")
    m.add_argument("--tau-points", dest="tau_points", type=int)
    v = sub.add_parser("validate", parents=[common], help="run the check suite")
    v.add_argument("--inject-fault", dest="inject_fault", action="store_true",
                   help="skew the gate seen by the analytic oracle")
    return p


@dataclass
class Options:
    command: str
    values: dict
    json: bool
    out: str | None
    inject_fault: bool = False

    def __getitem__(self, key):
        return self.values[key]


def resolve_options(args: argparse.Namespace) -> Options:
    values = dict(DEFAULTS)
    if args.config:
        values.update(read_config(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if len(values["xi"]) != 4:
        raise ConfigError("xi needs exactly four values")
    if any(not 0.0 <= x <= 1.0 for x in values["xi"]):
        raise ConfigError("xi values must lie in [0, 1]")
    if values["phi_points"] < 3:
        raise ConfigError("phi_points must be at least 3")
    for key, enum in (("family", Family), ("branch", Branch)):
        try:
            enum(values[key])
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    if values["input"] not in ("wcs", "clspdc"):
        raise ConfigError(f"input must be wcs or clspdc, got {values['input']!r}")
    if values["convention"] not in CONVENTIONS:
        raise ConfigError(f"convention must be one of {CONVENTIONS}")
    return Options(args.command, values, args.json, args.out, getattr(args, "inject_fault", False))


def experiment_config(opts: Options) -> ExperimentConfig:
    spec = InputSpec.from_ratio(opts["input"], opts["alpha_ratio_sq"])
    return ExperimentConfig(family=opts["family"], branch=opts["branch"], theta=opts["theta"],
                            input1=spec, input4=spec, detectors=DetectorModel(tuple(opts["xi"])),
                            phi_grid=tuple(default_phi_grid(opts["phi_points"])),
                            convention=opts["convention"])


def cmd_optimize(opts: Options) -> tuple[dict, str | None, str]:
    opt = optimize_beta(opts["family"], opts["branch"])
    b = opt.betas
    res = {"family": opt.family.value, "branch": opt.branch.value, "r2": opt.r2, "r1": opt.r1,
           "r2_sq": opt.r2**2, "r1_sq": opt.r1**2, "beta": opt.beta, "beta_sq": opt.beta_sq,
           "betas": [complex(x) for x in b.as_tuple()], "all_conditions": opt.all_conditions,
           "residuals": {"beta0_beta1": b.residual_01, "beta0_beta2": b.residual_02,
                         "beta1_beta2": b.residual_12}}
    lines = [f"family {opt.family.value} ({opt.branch.value})",
             f"r2* = {opt.r2:.6f}   r2*^2 = {opt.r2**2:.6f}",
             f"r1* = {opt.r1:.6f}   r1*^2 = {opt.r1**2:.6f}",
             f"beta*^2 = {opt.beta_sq:.6f}",
             f"|b0-b1| = {b.residual_01:.2e}  |b0-b2| = {b.residual_02:.2e}  |b1-b2| = {b.residual_12:.2e}"]
    if not opt.all_conditions:
        lines.append("warning: the three amplitudes do not coincide on this branch")
    return res, None, "\n".join(lines)


def cmd_sweep(opts: Options):
    res = sweep(experiment_config(opts))
    csv = csv_text(SWEEP_COLUMNS, res.rows())
    a0, a1, a2 = res.fit
    summary = {"prefactor": res.prefactor, "fit": {"a0": a0, "a1": a1, "a2": a2},
               "fit_residual": res.fit_residual, "visibility": res.visibility, "mean_n": res.mean_n,
               "points": len(res.phi)}
    if opts.json:
        summary["rows"] = [dict(zip(SWEEP_COLUMNS, map(float, r))) for r in res.rows()]
    return summary, csv, csv


def _table_line(d: dict) -> str:
    c, p = d["computed"], d["published"]
    return (f"{d['input']:>7} {d['xi']:.2f} | a0 {c['a0']:.3f} ({p['a0']:.3f}) "
            f"a1 {c['a1']:.3f} ({p['a1']:.3f}) a2 {c['a2']:.3f} | "
            f"prefactor {c['prefactor']:.1e} ({p['prefactor']:.1e}) | "
            f"visibility {100 * c['visibility']:.0f}% ({100 * p['visibility']:.0f}%) | "
            f"|da0| {d['abs_diff']['a0']:.3f} |dV| {100 * d['abs_diff']['visibility']:.0f} pts")


def cmd_tables(opts: Options):
    cells = [c.as_dict() for c in reproduce_tables(family=opts["family"], convention=opts["convention"],
                                                   phi_points=opts["phi_points"],
                                                   ratio_sq=opts["alpha_ratio_sq"], theta=opts["theta"])]
    for d in cells:
        d["prefactor_documented_discrepancy"] = d["input"] == "wcs"
    lines = ["computed (published)", *(_table_line(d) for d in cells),
             "w-CS prefactor cells are a documented discrepancy"]
    return {"cells": cells}, None, "\n".join(lines)


def cmd_manifold(opts: Options):
    r_star = opts["r_star"]
    if r_star is None:
        r_star = optimize_beta(Family.KLM).r1
    if abs(r_star) > 1:
        raise ConfigError("|r_star| must not exceed 1")
    taus = np.linspace(0.0, 1.0, opts["tau_points"])
    rows = []
    for t in taus:
        pt = eta_manifold(r_star, float(t))
        rows.append((pt.tau, pt.eta, pt.tau**2, pt.eta**2))
    csv = csv_text(MANIFOLD_COLUMNS, rows)
    res = {"r_star": r_star, "points": len(rows), "eta_sq_at_tau0": rows[0][3]}
    if opts.json:
        res["rows"] = [dict(zip(MANIFOLD_COLUMNS, r)) for r in rows]
    return res, csv, csv


def cmd_validate(opts: Options):
    res = run_suite(convention=opts["convention"], inject_fault=opts.inject_fault,
                    phi_points=opts["phi_points"])
    lines = [f"{'PASS' if c['passed'] else 'FAIL'} [{'hard' if c['hard'] else 'soft'}] {c['name']}"
             for c in res["checks"]]
    lines.append(f"{res['hard_failures']} hard failure(s), {res['soft_failures']} soft, "
                 f"{res['seconds']:.1f} s")
    return res, None, "\n".join(lines)


COMMANDS = {"optimize": cmd_optimize, "sweep": cmd_sweep, "tables": cmd_tables,
            "manifold": cmd_manifold, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = resolve_options(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        results, file_text, text = COMMANDS[opts.command](opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OptimizationError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    manifest = RunManifest(opts.command, dict(opts.values), __version__)
    if opts.out:
        body = file_text if file_text is not None else json_text(results)
        atomic_write(opts.out, body)
        mpath = manifest_path(opts.out)
        manifest.outputs = [str(opts.out), str(mpath)]
        atomic_write(mpath, json_text(envelope(manifest, results)))
    if opts.json:
        sys.stdout.write(json_text(envelope(manifest, results)))
    elif not opts.out or file_text is None:
        print(text)
    else:
        print(f"wrote {opts.out}")
    if opts.command == "validate" and results["hard_failures"]:
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
