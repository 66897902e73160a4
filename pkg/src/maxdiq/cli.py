"""Command-line front end (``maxdiq``).

Exit status: 0 on success, 2 when a validation check fails, 1 on a
computational error, 64 on a usage error and 74 on a file I/O failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .coupling import (
    CouplingTable,
    chi_from_coupling,
    coupling_from_im_chi,
    coupling_table,
    delta_coupling,
    dispersion_invariance_check,
    im_chi_from_coupling,
    read_coupling_csv,
)
from .errors import MaxdiqError
from .io import write_csv, write_json
from .kernels import KernelRequest, kernel, ode_residual, residual_grid
from .medium import (
    Linear,
    Lorentz,
    PhysicalConstants,
    PowerLaw,
    Vacuum,
    check_causality_passivity,
    kk_real_from_imag,
    model_from_dict,
    read_susceptibility_csv,
)
from .noise import noise_commutator_coefficient, noise_weight_bundle
from .scenarios import DEFAULT_PARAMS, ScenarioSpec, run_scenario

EXIT_OK, EXIT_ERROR, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 74

UNITS = """\
units:
  Quantities are in natural units (hbar = eps0 = c = 1) unless
  --constants si is given, in which case SI units apply (rad/s, s, F/m, m/s).
  Frequencies (omega, omega0, gamma, beta, ...) are angular frequencies in
  inverse time units; times and box widths (delta) are in time units;
  susceptibilities are dimensionless.
"""

GRID_HELP = "grid as START:STOP:N (inclusive ends, N points)"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_grid(text):
    """``"a:b:n"`` to an array of ``n`` evenly spaced points."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected START:STOP:N") from None
    if n < 2 or not b > a:
        raise UsageError(f"degenerate grid {text!r}")
    return np.linspace(a, b, n)


def parse_model_spec(text, role):
    """``"lorentz:omega0=1,gamma=0.2,omegap=0.5"``, ``"vacuum"`` or ``"file:chi.csv"``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "file":
        return read_susceptibility_csv(rest, role=role)
    params = {"kind": kind, "role": role}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"bad model parameter {item!r}; expected NAME=VALUE")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"parameter {key!r} needs a number, got {val!r}") from None
    return model_from_dict(params)


def _constants(args):
    c = args.constants
    if c in (None, "natural"):
        return PhysicalConstants.natural()
    if c == "si":
        return PhysicalConstants.si()
    if isinstance(c, dict):
        return PhysicalConstants(**c)
    vals = dict(item.split("=", 1) for item in c.split(",") if "=" in item)
    if not vals:
        raise UsageError(f"--constants must be natural, si or hbar=..,eps0=..,c=.., got {c!r}")
    try:
        return PhysicalConstants(**{k: float(v) for k, v in vals.items()})
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def _dispersion(text, constants):
    if text in (None, "linear"):
        return Linear(constants.c)
    kind, _, rest = text.partition(":")
    if kind == "power":
        try:
            a, p = (float(x) for x in rest.split(","))
        except ValueError:
            raise UsageError("power dispersion is power:A,P") from None
        return PowerLaw(a, p)
    raise UsageError(f"unknown dispersion {text!r}")


def _flag_model(args, role):
    """Model from --model and its parameter flags (or --chi-file)."""
    if getattr(args, "chi_file", None):
        return read_susceptibility_csv(args.chi_file, role=role)
    if not args.model:
        return None
    d = {"kind": args.model, "role": role}
    for name in ("omega0", "gamma", "omegap", "chi0", "delta", "beta"):
        v = getattr(args, name)
        if v is not None:
            d[name] = v
    return model_from_dict(d)


def _media(args):
    """Electric and magnetic models from the flags; vacuum where unspecified."""
    e = m = None
    single = _flag_model(args, args.role)
    if single is not None:
        if args.role == "electric":
            e = single
        else:
            m = single
    if getattr(args, "electric", None):
        if e is not None:
            raise UsageError("give the electric medium either with --model or --electric")
        e = parse_model_spec(args.electric, "electric")
    if getattr(args, "magnetic", None):
        if m is not None:
            raise UsageError("give the magnetic medium either with --model or --magnetic")
        m = parse_model_spec(args.magnetic, "magnetic")
    return e or Vacuum(), m or Vacuum(role="magnetic")


def _single_model(args):
    e, m = _media(args)
    chosen = [x for x in (e, m) if not isinstance(x, Vacuum)]
    if len(chosen) > 1:
        raise UsageError("this subcommand takes a single medium")
    if chosen:
        return chosen[0]
    if args.model == "vacuum" or getattr(args, "electric", None) or getattr(args, "magnetic", None):
        return e if args.role == "electric" else m
    raise UsageError("choose a medium with --model, --chi-file, --electric or --magnetic")


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _say(args, text):
    if not args.quiet:
        print(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_transform(args):
    const = _constants(args)
    disp = _dispersion(args.dispersion, const)
    out = _outdir(args)
    if args.coupling_file:
        table = read_coupling_csv(args.coupling_file, disp, const)
        t = parse_grid(args.grid_t)
        chi, info = chi_from_coupling(table, t, tol=args.tol, full_output=True)
        write_csv(os.path.join(out, "chi.csv"), ["t", "chi"], [t, chi])
        write_json(os.path.join(out, "chi.json"),
                   {"role": table.role, "dispersion": disp.to_dict(),
                    "constants": const.to_dict(), "info": info})
        _say(args, f"wrote {os.path.join(out, 'chi.csv')}")
        return EXIT_OK
    model = _single_model(args)
    if isinstance(model, Lorentz) and model.gamma == 0:
        dc = delta_coupling(model, const)
        write_json(os.path.join(out, "coupling_delta.json"), dc.to_dict())
        _say(args, f"lossless resonance: delta weight {dc.weight!r} at omega = {dc.frequency!r}")
        return EXIT_OK
    w = parse_grid(args.grid_omega)
    table = coupling_table(model, w, const, disp)
    path = os.path.join(out, f"{table.column}.csv")
    table.write_csv(path)
    table.write_json(os.path.join(out, f"{table.column}.json"))
    _say(args, f"wrote {path}")
    return EXIT_OK


def cmd_kernel(args):
    const = _constants(args)
    e, m = _media(args)
    t = parse_grid(args.grid_t)
    kinds = ["Z", "zeta", "eta", "Q"] if args.kind == "all" else [args.kind]
    signs = {"+": [1], "-": [-1], "both": [1, -1]}[args.sign]
    out = _outdir(args)
    for sg in signs:
        req = KernelRequest(electric=e, magnetic=m, omega_q=args.omega_q, omega_k=args.omega_k,
                            sign=sg, t=t, constants=const, method=args.method)
        for kind in kinds:
            s = kernel(req, kind)
            stem = f"kernel_{kind}_{'plus' if sg == 1 else 'minus'}"
            s.write_csv(os.path.join(out, stem + ".csv"))
            write_json(os.path.join(out, stem + ".json"),
                       {"request": req.to_dict(), "series": s.to_dict(include_values=False)})
            _say(args, f"{stem}: method={s.method} accuracy={s.accuracy!r}")
    return EXIT_OK


def _check_kk(model, w, tol):
    if not model.decaying or isinstance(model, Vacuum):
        return {"check": "kk", "passed": None,
                "note": f"not applicable to a {model.kind} medium (needs a decaying response)"}
    if isinstance(model, Lorentz):
        w = w[np.abs(w - model.omega0) > model.gamma]
    re = np.array([kk_real_from_imag(model, x) for x in w])
    dev = float(np.max(np.abs(re - np.asarray(model.chi_freq(w)).real), initial=0.0))
    return {"check": "kk", "deviation": dev, "tolerance": tol, "points": int(w.size),
            "passed": dev <= tol}


def _check_dispersion(model, w, const, disp, tol):
    other = PowerLaw(1.0, 2.0) if isinstance(disp, Linear) else Linear(const.c)
    w = w[w > 0]
    dev_im = dispersion_invariance_check(model, disp, other, w, const)
    scale = float(np.max(np.abs(np.asarray(model.chi_freq(w)).imag), initial=0.0)) or 1.0
    direct = np.asarray(noise_commutator_coefficient(model, w, const))
    f2 = coupling_from_im_chi(np.asarray(model.chi_freq(w)).imag, w, disp, const, model.role)
    via = (const.hbar / (np.pi * const.field_constant(model.role))
           * np.asarray(im_chi_from_coupling(f2, w, disp, const, model.role)))
    nscale = float(np.max(np.abs(direct), initial=0.0)) or 1.0
    dev_noise = float(np.max(np.abs(direct - via), initial=0.0)) / nscale
    return [
        {"check": "dispersion-invariance", "deviation": dev_im / scale, "tolerance": tol,
         "measure": "rel", "dispersions": [disp.to_dict(), other.to_dict()],
         "passed": dev_im / scale <= tol},
        {"check": "noise-route", "deviation": dev_noise, "tolerance": tol, "measure": "rel",
         "passed": dev_noise <= tol},
    ]


def cmd_validate(args):
    const = _constants(args)
    checks = args.check or ["all"]
    if "all" in checks:
        checks = ["causality", "passivity", "kk", "dispersion-invariance", "ode-residual"]
    w = parse_grid(args.grid_omega)
    results = []
    e, m = _media(args)
    model = e if not isinstance(e, Vacuum) or isinstance(m, Vacuum) else m
    for check in checks:
        try:
            if check in ("causality", "passivity"):
                rep = check_causality_passivity(model, w)
                bad = [v for v in rep.violations if v["check"] == check]
                results.append({"check": check, "passed": not bad, "violations": bad})
            elif check == "kk":
                results.append(_check_kk(model, w[w > 0], args.tol_kk))
            elif check == "dispersion-invariance":
                results.extend(_check_dispersion(model, w, const,
                                                 _dispersion(args.dispersion, const),
                                                 args.tol_dispersion))
            elif check == "ode-residual":
                t = (parse_grid(args.grid_t) if args.grid_t
                     else residual_grid(args.omega_q, e, m))
                req = KernelRequest(electric=e, magnetic=m, omega_q=args.omega_q, t=t,
                                    constants=const)
                Z = kernel(req, "Z")
                r, info = ode_residual(Z, e, m, args.omega_q, full_output=True)
                tol = args.tol_residual * args.omega_q ** 2
                results.append({"check": check, "deviation": r, "tolerance": tol,
                                "at": info["argmax_t"], "passed": r <= tol})
        except MaxdiqError as exc:
            results.append({"check": check, "passed": False,
                            "error": f"{type(exc).__name__}: {exc}"})
    ok = all(r["passed"] is not False for r in results)
    out = _outdir(args)
    write_json(os.path.join(out, "report.json"),
               {"model": model.to_dict(), "passed": ok, "checks": results})
    for r in results:
        extra = f" deviation={r['deviation']:.3e} tol={r['tolerance']:.1e}" if "deviation" in r else ""
        extra += f" {r['error']}" if "error" in r else ""
        extra += f" ({r['note']})" if "note" in r else ""
        status = {True: "pass", False: "FAIL", None: "skipped"}[r["passed"]]
        _say(args, f"{r['check']}: {status}{extra}")
    return EXIT_OK if ok else EXIT_FAILED


SCENARIO_FLAGS = {"omega_q", "omega_k", "omega0", "gamma", "omegap", "delta", "beta",
                  "chi_e0", "chi_m0"}


def cmd_scenario(args):
    const = _constants(args)
    params = {k: getattr(args, k) for k in SCENARIO_FLAGS
              if getattr(args, k, None) is not None and k in DEFAULT_PARAMS[args.name]}
    extra = {k for k in SCENARIO_FLAGS if getattr(args, k, None) is not None} - set(params)
    if extra:
        raise UsageError(f"scenario {args.name} does not take {sorted(extra)}")
    tols = {}
    for item in args.tol or []:
        key, _, val = item.partition("=")
        try:
            tols[key] = float(val)
        except ValueError:
            raise UsageError(f"bad tolerance {item!r}; expected NAME=VALUE") from None
    omega = None
    if args.grid_omega:
        g = parse_grid(args.grid_omega)
        omega = (g[0], g[-1], g.size)
    spec = ScenarioSpec(args.name, params, outputs=tuple(args.outputs.split(",")),
                        t_max=args.t_max, n_points=args.n_points, omega=omega,
                        tolerances=tols, constants=const)
    report = run_scenario(spec)
    report.write(_outdir(args))
    for c in report.checks:
        status = {True: "pass", False: "FAIL", None: "info"}[c["passed"]]
        dev = f" deviation={c['deviation']:.3e}" if c.get("deviation") is not None else ""
        tol = f" tol={c['tolerance']:.1e}" if c.get("tolerance") is not None else ""
        _say(args, f"{c['name']}: {status}{dev}{tol}")
    _say(args, f"scenario {args.name}: {'passed' if report.passed else 'FAILED'}")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_noise(args):
    const = _constants(args)
    e, m = _media(args)
    w = parse_grid(args.grid_omega)
    disp = _dispersion(args.dispersion, const)
    ft = read_coupling_csv(args.f_table, disp, const) if args.f_table else None
    gt = read_coupling_csv(args.g_table, disp, const) if args.g_table else None
    for table, want in ((ft, "electric"), (gt, "magnetic")):
        if isinstance(table, CouplingTable) and table.role != want:
            raise UsageError(f"the {want} table must have an "
                             f"{'f2' if want == 'electric' else 'g2'} column")
    bundle = noise_weight_bundle(e, m, w, ft, gt, const, disp)
    out = _outdir(args)
    bundle.write_csv(os.path.join(out, "noise.csv"))
    write_json(os.path.join(out, "noise.json"),
               {"electric": e.to_dict(), "magnetic": m.to_dict(), "passive": bundle.passive,
                "mismatch": bundle.mismatch, "passivity": bundle.passivity})
    _say(args, f"wrote {os.path.join(out, 'noise.csv')}; passive={bundle.passive}")
    return EXIT_OK if bundle.passive else EXIT_FAILED


# ---------------------------------------------------------------------------

def _common(p, media=True):
    g = p.add_argument_group("common")
    g.add_argument("--config", metavar="JSON",
                   help="JSON file of option values (keys are option names); overrides flags")
    g.add_argument("--out", default=".", help="output directory (created if missing)")
    g.add_argument("--constants", default="natural",
                   help="natural (hbar = eps0 = c = 1), si, or hbar=..,eps0=..,c=..")
    g.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    if not media:
        return
    m = p.add_argument_group("medium")
    m.add_argument("--model", choices=["vacuum", "box", "step", "lorentz"],
                   help="built-in susceptibility model")
    m.add_argument("--role", choices=["electric", "magnetic"], default="electric",
                   help="response the --model flags describe")
    m.add_argument("--omega0", type=float, help="resonance frequency [1/time]")
    m.add_argument("--gamma", type=float, help="damping rate [1/time]")
    m.add_argument("--omegap", type=float, help="oscillator strength frequency [1/time]")
    m.add_argument("--chi0", type=float, help="box area (dimensionless static susceptibility)")
    m.add_argument("--delta", type=float, help="box width [time]")
    m.add_argument("--beta", type=float, help="step height [1/time]")
    m.add_argument("--chi-file", metavar="CSV",
                   help="tabulated susceptibility, header 'omega,re_chi,im_chi' or 't,chi'")
    m.add_argument("--electric", metavar="SPEC",
                   help="electric medium, e.g. 'lorentz:omega0=1,gamma=0.2,omegap=0.5' or "
                        "'file:chi.csv'")
    m.add_argument("--magnetic", metavar="SPEC", help="magnetic medium, same syntax")
    m.add_argument("--dispersion", default="linear",
                   help="bath dispersion: linear (omega = c k) or power:A,P (omega = A k^P)")


def build_parser():
    parser = _Parser(prog="maxdiq", description="Quantized fields in dispersive, absorbing "
                     "magneto-dielectrics: couplings, kernels and checks.",
                     epilog=UNITS, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"maxdiq {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("transform", help="susceptibility to coupling table or back",
                       epilog=UNITS, formatter_class=fmt)
    _common(p)
    p.add_argument("--grid-omega", default="0.05:10:400",
                   help=f"frequencies [1/time], {GRID_HELP}")
    p.add_argument("--coupling-file", metavar="CSV",
                   help="coupling table 'omega,f2' or 'omega,g2'; reconstructs chi(t)")
    p.add_argument("--grid-t", default="0:20:401", help=f"times [time], {GRID_HELP}")
    p.add_argument("--tol", type=float, default=1e-4,
                   help="tail tolerance of the chi(t) reconstruction")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("kernel", help="kernel series Z, zeta, eta, Q",
                       epilog=UNITS, formatter_class=fmt)
    _common(p)
    p.add_argument("--kind", choices=["Z", "zeta", "eta", "Q", "all"], default="Z")
    p.add_argument("--sign", choices=["+", "-", "both"], default="both",
                   help="forward (+) or backward (-) kernels")
    p.add_argument("--omega-q", type=float, default=1.0, help="mode frequency [1/time]")
    p.add_argument("--omega-k", type=float, default=0.0, help="bath frequency [1/time]")
    p.add_argument("--grid-t", default="0:20:2048", help=f"times [time] from 0, {GRID_HELP}")
    p.add_argument("--method", choices=["auto", "residue", "contour"], default="auto")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("validate", help="causality, passivity, Kramers-Kronig, dispersion "
                       "invariance and mode-equation checks", epilog=UNITS, formatter_class=fmt)
    _common(p)
    p.add_argument("--check", action="append",
                   choices=["causality", "passivity", "kk", "dispersion-invariance",
                            "ode-residual", "all"], help="repeatable; default all")
    p.add_argument("--grid-omega", default="0.05:5:100", help=f"frequencies [1/time], {GRID_HELP}")
    p.add_argument("--grid-t", help=f"times [time] from 0 for the mode-equation residual, "
                   f"{GRID_HELP}; default 80 points per period over 40/omega")
    p.add_argument("--omega-q", type=float, default=1.0, help="mode frequency [1/time]")
    p.add_argument("--tol-kk", type=float, default=1e-4, help="absolute, on Re chi")
    p.add_argument("--tol-dispersion", type=float, default=1e-12, help="relative")
    p.add_argument("--tol-residual", type=float, default=1e-5, help="in units of omega_q^2")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("scenario", help="worked media against their closed forms",
                       epilog=UNITS, formatter_class=fmt)
    _common(p, media=False)
    p.add_argument("--name", required=True, choices=sorted(DEFAULT_PARAMS))
    p.add_argument("--omega-q", type=float, help="mode frequency [1/time]")
    p.add_argument("--omega-k", type=float, help="bath frequency [1/time]")
    p.add_argument("--omega0", type=float, help="resonance frequency [1/time] (lorentz)")
    p.add_argument("--gamma", type=float, help="damping rate [1/time] (lorentz)")
    p.add_argument("--omegap", type=float, help="oscillator strength [1/time] (lorentz)")
    p.add_argument("--beta", type=float, help="step height [1/time] (step)")
    p.add_argument("--delta", type=float, help="box width [time] (box)")
    p.add_argument("--chi-e0", type=float, help="static electric susceptibility (box)")
    p.add_argument("--chi-m0", type=float, help="static magnetic susceptibility (box)")
    p.add_argument("--t-max", type=float, help="kernel grid end [time]")
    p.add_argument("--n-points", type=int, default=2048, help="kernel grid size")
    p.add_argument("--grid-omega", help=f"frequencies [1/time], {GRID_HELP}")
    p.add_argument("--outputs", default="kernels,couplings,noise",
                   help="comma-separated subset of kernels,couplings,noise")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="tolerance override, repeatable (e.g. step_Z=1e-7)")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("noise", help="noise weights and couplings on a frequency grid",
                       epilog=UNITS, formatter_class=fmt)
    _common(p)
    p.add_argument("--grid-omega", default="0.05:5:100",
                   help=f"positive frequencies [1/time], {GRID_HELP}")
    p.add_argument("--f-table", metavar="CSV", help="electric coupling table 'omega,f2'")
    p.add_argument("--g-table", metavar="CSV", help="magnetic coupling table 'omega,g2'")
    p.set_defaults(func=cmd_noise)
    return parser


def _apply_config(parser, args, argv):
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("--config must hold a JSON object")
    known = vars(args)
    for key, val in cfg.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest in ("command", "func", "config") or dest not in known:
            raise UsageError(f"unknown config key {key!r}")
        setattr(args, dest, val)
    return args


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, args, argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MaxdiqError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
