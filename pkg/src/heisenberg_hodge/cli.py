"""Command line entry point.

    heisenberg-hodge verify [suite]
    heisenberg-hodge fan
    heisenberg-hodge decompose form.json
    heisenberg-hodge multiplier heat --t 1 form.json
    heisenberg-hodge mh-norm heat --t 1 --tau 2 -J 8
    heisenberg-hodge random-form --degree 1 > form.json

Every command accepts ``--config``, ``--out``, ``--format json|csv``,
``--seed`` and ``--timing``.  The exit status is 1 when any reported check
fails, 2 on usage, configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import decomposition as dc
from . import fan
from . import mh_norms as mh
from . import multipliers as mp
from . import oscillator as osc
from .config import SUITES, RunConfig, config_load
from .oscillator import ConfigError
from .suites import SuiteReport, all_passed, run_suite

REPORT_FIELDS = ("suite", "check", "anchor", "max_error", "tolerance", "pass", "runtime_ms")
AGREEMENT_TOL = 1e-8


class ReportError(OSError):
    """Report could not be written."""


def _rows(reports):
    return [r.to_json() if isinstance(r, SuiteReport) else dict(r) for r in reports]


def render(rows, fmt: str, fields=None) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"format must be json or csv, got {fmt!r}")
    fields = list(fields or (rows[0].keys() if rows else REPORT_FIELDS))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (str(v).lower() if isinstance(v, bool) else v) for k, v in row.items()})
    return buf.getvalue()


def write_text(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc


def report_emit(reports, fmt: str = "json", path=None) -> None:
    """Write SuiteReports as a JSON array or CSV (header always present)."""
    write_text(render(_rows(reports), fmt, REPORT_FIELDS), path)


# -- argument parsing -------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="report format")
    p.add_argument("--seed", type=int, help="seed for random inputs")
    p.add_argument("--timing", action="store_true", help="record runtime_ms (reports are no longer reproducible)")
    return p


def _multiplier_params(p):
    p.add_argument("--t", type=float, help="heat time")
    p.add_argument("--u", type=float, help="imaginary power exponent")
    p.add_argument("--j", type=int, help="dyadic bump index")
    p.add_argument("--r", type=float, help="Riesz ratio exponent")
    p.add_argument("--s0", type=float, help="jump location")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="heisenberg-hodge", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("suite", nargs="?", default=None, choices=SUITES + ("all",))

    sub.add_parser("fan", parents=[common], help="closed-form eigensystem on the fan grid")

    p = sub.add_parser("decompose", parents=[common], help="five-way splitting of a 1-form field")
    p.add_argument("form")

    p = sub.add_parser("multiplier", parents=[common], help="apply m(Delta_1) to a 1-form field")
    p.add_argument("name", choices=sorted(mp.LIBRARY) + ["identity"])
    _multiplier_params(p)
    p.add_argument("form")

    p = sub.add_parser("mh-norm", parents=[common], help="scale-invariant local Sobolev norm of a multiplier")
    p.add_argument("name", choices=sorted(mp.LIBRARY) + ["identity"])
    _multiplier_params(p)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("-J", type=int, default=None)
    p.add_argument("--resolution", type=int, default=None)

    p = sub.add_parser("random-form", parents=[common], help="emit a seeded random form field as JSON")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--max-grade", type=int, default=None)
    return parser


def _load_config(args) -> RunConfig:
    cfg = config_load(args.config) if args.config else RunConfig()
    if args.format:
        cfg.format = args.format
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output = args.out
    return cfg


def _spec_from_args(args) -> mp.MultiplierSpec:
    keys = {"heat": "t", "imaginary_power": "u", "dyadic_bump": "j", "riesz_ratio": "r", "jump": "s0"}
    params = {}
    if args.name in keys:
        key = keys[args.name]
        val = getattr(args, key)
        if val is None:
            if args.name == "jump":
                val = 1.5
            else:
                raise ValueError(f"{args.name} needs --{key}")
        params[key] = val
    return mp.multiplier_library(args.name, **params)


def _load_field(path, cfg: RunConfig, explicit_config: bool):
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ReportError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    if explicit_config:
        mcfg = cfg.model
    else:
        mcfg = osc.ModelConfig(n=obj["n"], M=obj["M"], lambdas=tuple(obj["lambdas"]))
    return osc.FormField.from_json(osc.build_model(mcfg), obj)


# -- commands ---------------------------------------------------------------

def cmd_verify(args, cfg) -> int:
    names = [args.suite] if args.suite else cfg.suites
    if "all" in names:
        names = ["all"]
    reports = []
    for name in names:
        reports += run_suite(name, cfg, timing=args.timing)
    reports = sorted(reports, key=lambda r: (r.suite, r.check))
    report_emit(reports, cfg.format, cfg.output)
    return 0 if all_passed(reports) else 1


def cmd_fan(args, cfg) -> int:
    rows = []
    for pt in fan.fan_grid(cfg.model.n, cfg.fan_lambdas(), cfg.fan["m_max"]):
        rows.append({k: float(v) if k != "m" else int(v) for k, v in fan.fan_eigensystem(pt).to_row().items()})
    write_text(render(rows, cfg.format), cfg.output)
    worst = max(max(r["res_0"], r["res_plus"], r["res_minus"]) for r in rows)
    return 0 if worst < 1e-10 else 1


def cmd_decompose(args, cfg) -> int:
    omega = _load_field(args.form, cfg, bool(args.config))
    res = dc.decompose_1form(omega, cfg.model.tol)
    sym = dc.subspace_symbol_errors(res)
    rows = [{"part": name, "norm": float(part.norm()), "symbol_error": float(sym[name])}
            for name, part in res.parts().items()]
    if cfg.format == "csv":
        write_text(render(rows, "csv"), cfg.output)
    else:
        out = {
            "diagnostics": res.diagnostics,
            "symbol_errors": sym,
            "parts": {name: part.to_json() for name, part in res.parts().items()},
        }
        write_text(json.dumps(out, indent=2) + "\n", cfg.output)
    ok = res.diagnostics["ok"] and max(sym.values()) < cfg.model.tol
    return 0 if ok else 1


def cmd_multiplier(args, cfg) -> int:
    m = _spec_from_args(args)
    omega = _load_field(args.form, cfg, bool(args.config))
    out = mp.m_delta1_product(m, omega)
    oracle = mp.m_delta1_oracle(m, omega)
    err = (out - oracle).norm() / max(omega.norm(), 1e-300)
    summary = {"multiplier": m.label, "oracle_error": err, "tolerance": AGREEMENT_TOL,
               "pass": bool(err < AGREEMENT_TOL)}
    if cfg.format == "csv":
        write_text(render([summary], "csv"), cfg.output)
    else:
        write_text(json.dumps({**summary, "result": out.to_json()}, indent=2) + "\n", cfg.output)
    return 0 if summary["pass"] else 1


def cmd_mh_norm(args, cfg) -> int:
    m = _spec_from_args(args)
    res = args.resolution or cfg.norms["resolution"]
    params = mh.SlocParams(tau=args.tau, J=args.J or cfg.norms["J"], resolution=res)
    rep = mh.mh_sloc_norm(m, params)
    # the same norm at twice the sampling resolution; near 1 for a genuine MH multiplier
    fine = mh.mh_sloc_norm(m, replace(params, resolution=2 * res))
    ratio = fine.sup / rep.sup if rep.sup > 0 else 1.0
    if cfg.format == "csv":
        rows = [{"r": r, "norm": v} for r, v in rep.per_r.items()]
        write_text(render(rows, "csv", ("r", "norm")), cfg.output)
    else:
        out = {"multiplier": m.label, "tau": args.tau, **rep.to_json(), "stability_ratio": ratio}
        write_text(json.dumps(out, indent=2) + "\n", cfg.output)
    return 0 if np.isfinite(rep.sup) else 1


def cmd_random_form(args, cfg) -> int:
    model = osc.build_model(cfg.model)
    rng = np.random.default_rng(cfg.seed)
    grade = model.M - 1 if args.max_grade is None else args.max_grade
    f = osc.random_form(model, args.degree, rng, max_grade=grade)
    write_text(json.dumps(f.to_json()) + "\n", cfg.output)
    return 0


COMMANDS = {
    "verify": cmd_verify, "fan": cmd_fan, "decompose": cmd_decompose,
    "multiplier": cmd_multiplier, "mh-norm": cmd_mh_norm, "random-form": cmd_random_form,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return COMMANDS[args.command](args, cfg)
    except BrokenPipeError:
        sys.stderr.close()  # downstream reader went away (e.g. piped into head)
        return 0
    except (ConfigError, ReportError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
