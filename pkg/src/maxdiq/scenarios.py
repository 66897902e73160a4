"""Worked media run end to end against their closed forms.

Four scenarios are available:

``vacuum``
    No medium. Z is a plane wave and the bath kernels vanish.
``box``
    Box-shaped electric and magnetic responses of width ``delta``. As the
    width shrinks, Z tends to the nondispersive form built from the static
    susceptibilities.
``step``
    Step electric response (a damped oscillator for the field).
``lorentz``
    Single-resonance electric response; with ``gamma = 0`` the longitudinal
    kernel Q has a closed form.

Each run computes kernels through the numerical routes, compares them with
:func:`reference_kernel`, and reports deviations against tolerances.
"""
from __future__ import annotations

import cmath
import json
import math
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .coupling import coupling_from_chi, delta_coupling, reference_coupling
from .errors import (
    AccuracyWarning,
    MaxdiqError,
    ParameterError,
    ResolutionError,
    UnsupportedConfigurationError,
)
from .kernels import (
    KernelRequest,
    KernelSeries,
    asymptotic_decay_check,
    energy_invariant,
    kernel,
    ode_residual,
    residual_grid,
    uniform_grid,
)
from .medium import Box, Lorentz, PhysicalConstants, Step, Vacuum, kk_real_from_imag
from .noise import noise_weight_bundle

__all__ = [
    "ScenarioSpec",
    "ScenarioReport",
    "reference_kernel",
    "run_scenario",
    "DEFAULT_PARAMS",
    "SUPPORTED_REFERENCES",
    "box_media",
]

DEFAULT_PARAMS = {
    "vacuum": {"omega_q": 1.0, "omega_k": 0.5},
    "box": {"chi_e0": 3.0, "chi_m0": 1.0, "delta": 1e-2, "omega_q": 1.0, "omega_k": 0.5},
    "step": {"beta": 1.0, "omega_q": 2.0, "omega_k": 1.0},
    "lorentz": {"omega0": 1.0, "gamma": 0.0, "omegap": 0.5, "omega_q": 1.0, "omega_k": 0.3},
}

#: (reference name, kernel kind) pairs with a closed form
SUPPORTED_REFERENCES = (
    ("vacuum", "Z"), ("vacuum", "zeta"), ("vacuum", "eta"), ("vacuum", "Q"),
    ("box-limit", "Z"), ("box-limit", "zeta"), ("box-limit", "eta"),
    ("step", "Z"), ("step", "zeta"),
    ("lorentz", "Q"),
)

ORIGINS = {
    "vacuum": "closed form: free field (plane wave, no bath kernels)",
    "box-limit": "closed form: zero-width limit of the box medium (static susceptibilities)",
    "step": "closed form: step-response medium (damped field oscillator)",
    "lorentz": "closed form: lossless single resonance, longitudinal kernel",
}


def box_media(chi_e0, chi_m0, delta):
    """Electric and magnetic box models for given static susceptibilities.

    The magnetic response that yields a static magnetization
    ``chi_m0 / (mu0 (1 + chi_m0)) B`` has area ``chi_m0 / (1 + chi_m0)``.
    """
    return (Box(chi0=chi_e0, delta=delta),
            Box(chi0=chi_m0 / (1.0 + chi_m0), delta=delta, role="magnetic"))


def _need(params, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise ParameterError(f"missing parameters {missing}")
    return [float(params[n]) for n in names]


def _sinc_t(Om, t):
    """``sin(Om t) / Om`` with its ``Om -> 0`` limit ``t``."""
    if abs(Om) < 1e-12:
        return t.astype(complex)
    return np.sin(Om * t) / Om


def _step_Z(beta, wq, tp, upper):
    """Step-medium Z at signed time ``tp`` for the upper or lower sign."""
    sg = 1 if upper else -1
    Om = cmath.sqrt(wq * wq - beta * beta / 4)
    S = _sinc_t(Om, tp)
    C = np.cos(Om * tp)
    return np.exp(-sg * beta * tp / 2) * (sg * beta / 2 * S + C - 1j * wq * S)


def _step_zeta(beta, wq, wk, tp, upper, f):
    sg = 1 if upper else -1
    Om = cmath.sqrt(wq * wq - beta * beta / 4)
    first = -sg * 1j * wk * np.exp(-1j * wk * tp) / (wq * wq - wk * wk - sg * 1j * beta * wk)

    def g(x):
        return (-beta / 2 + x) * np.exp(sg * x * tp) / (-beta / 2 + x + sg * 1j * wk)

    if abs(Om) < 1e-9 * max(wq, beta):
        # removable singularity: the divided difference becomes g'(0)
        N0, M0 = -beta / 2, -beta / 2 + sg * 1j * wk
        bracket = (1 / M0 + sg * tp * N0 / M0 - N0 / M0 ** 2)
    else:
        x = 1j * Om
        bracket = (g(x) - g(-x)) / (2 * x)
    return f * (first + np.exp(-sg * beta * tp / 2) * bracket)


def _lorentz_Q(w0, wp, wk, tp, upper):
    sg = 1 if upper else -1
    W = math.sqrt(w0 * w0 + wp * wp)
    A = (w0 * w0 - wk * wk) / (W * W - wk * wk)
    B = wp * wp / (2 * W)
    return (A * np.exp(-1j * wk * tp)
            + B * (np.exp(sg * 1j * W * tp) / (W + sg * wk)
                   + np.exp(-sg * 1j * W * tp) / (W - sg * wk)))


def reference_kernel(name, kind, params, t, sign=1, constants=None):
    """Closed-form kernel on the grid ``t`` (same sign convention as the numerics).

    Parameters
    ----------
    name : {"vacuum", "box-limit", "step", "lorentz"}
    kind : {"Z", "zeta", "eta", "Q"}
    params : dict
        ``omega_q``, ``omega_k`` and the medium parameters (``chi_e0``,
        ``chi_m0`` for the box limit, ``beta`` for the step, ``omega0``,
        ``omegap`` and ``gamma == 0`` for the resonance).
    t : array_like
        Times ``>= 0``; backward kernels are evaluated at ``-t``.

    Raises
    ------
    UnsupportedConfigurationError
        For a combination without a closed form.
    """
    constants = constants or PhysicalConstants()
    t = np.asarray(t, dtype=float)
    if (name, kind) not in SUPPORTED_REFERENCES:
        raise UnsupportedConfigurationError(
            f"no closed form for ({name!r}, {kind!r}); supported: "
            + ", ".join(f"({a}, {b})" for a, b in SUPPORTED_REFERENCES))
    if sign not in (1, -1):
        raise ParameterError("sign must be +1 or -1")
    tp = sign * t
    upper = sign == 1
    deriv = None
    zeros = np.zeros(t.shape, dtype=complex)
    if name == "vacuum":
        if kind == "Z":
            (wq,) = _need(params, "omega_q")
            vals = np.exp(-1j * wq * tp)
            deriv = -1j * wq * sign * vals
        elif kind == "Q":
            (wk,) = _need(params, "omega_k")
            vals = np.exp(-1j * wk * tp)
        else:
            vals = zeros
    elif name == "box-limit":
        if kind == "Z":
            wq, ce, cm = _need(params, "omega_q", "chi_e0", "chi_m0")
            wt = wq / math.sqrt((1 + ce) * (1 + cm))
            r = math.sqrt((1 + cm) / (1 + ce))
            vals = np.cos(wt * tp) - 1j * r * np.sin(wt * tp)
            deriv = sign * wt * (-np.sin(wt * tp) - 1j * r * np.cos(wt * tp))
        else:
            vals = zeros
    elif name == "step":
        beta, wq = _need(params, "beta", "omega_q")
        if kind == "Z":
            vals = _step_Z(beta, wq, tp, upper)
        else:
            (wk,) = _need(params, "omega_k")
            f = math.sqrt(float(reference_coupling(Step(beta=beta), wk, constants)))
            vals = _step_zeta(beta, wq, wk, tp, upper, f)
    else:
        w0, wp, wk = _need(params, "omega0", "omegap", "omega_k")
        if float(params.get("gamma", 0.0)) != 0.0:
            raise UnsupportedConfigurationError(
                "the resonance has a closed-form Q only without damping (gamma = 0)")
        vals = _lorentz_Q(w0, wp, wk, tp, upper)
    meta = {"origin": ORIGINS[name], "reference": name, "params": dict(params)}
    return KernelSeries(kind, sign, t, np.asarray(vals, dtype=complex), "closed-form",
                        derivative=deriv, metadata=meta)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioSpec:
    """What to run.

    Attributes
    ----------
    name : {"vacuum", "box", "step", "lorentz"}
    params : dict
        Overrides of :data:`DEFAULT_PARAMS`.
    outputs : tuple
        Any of ``"kernels"``, ``"couplings"``, ``"noise"``.
    t_max, n_points : float, int
        Kernel grid; ``t_max`` defaults to ``20 / max(omega_q, rate)``.
    omega : tuple, optional
        Frequency grid ``(start, stop, n)`` for couplings and noise.
    tolerances : dict
        Overrides of the per-check tolerances.
    signs : tuple
    """

    name: str
    params: dict = field(default_factory=dict)
    outputs: tuple = ("kernels", "couplings", "noise")
    t_max: float | None = None
    n_points: int = 2048
    omega: tuple | None = None
    tolerances: dict = field(default_factory=dict)
    signs: tuple = (1, -1)
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if self.name not in DEFAULT_PARAMS:
            raise ParameterError(
                f"unknown scenario {self.name!r}; choose from {sorted(DEFAULT_PARAMS)}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.name])
        if unknown:
            raise ParameterError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        bad = set(self.outputs) - {"kernels", "couplings", "noise"}
        if bad:
            raise ParameterError(f"unknown outputs {sorted(bad)}")
        if self.n_points < 16:
            raise ParameterError("n_points must be at least 16")
        # the media check their own parameter ranges
        self.media()

    @property
    def merged(self):
        p = dict(DEFAULT_PARAMS[self.name])
        p.update({k: float(v) for k, v in self.params.items()})
        return p

    def media(self):
        p = self.merged
        if self.name == "box":
            return box_media(p["chi_e0"], p["chi_m0"], p["delta"])
        if self.name == "step":
            return Step(beta=p["beta"]), Vacuum(role="magnetic")
        if self.name == "lorentz":
            return (Lorentz(omega0=p["omega0"], gamma=p["gamma"], omegap=p["omegap"]),
                    Vacuum(role="magnetic"))
        return Vacuum(), Vacuum(role="magnetic")

    def rate(self):
        p = self.merged
        if self.name == "step":
            return p["beta"] / 2
        if self.name == "lorentz":
            return p["gamma"] / 2
        return 0.0

    def grid(self):
        p = self.merged
        t_max = self.t_max or 20.0 / max(p["omega_q"], self.rate(), 1e-300)
        return uniform_grid(t_max, self.n_points)

    def omega_grid(self):
        if self.omega is not None:
            a, b, n = self.omega
            return np.linspace(float(a), float(b), int(n))
        if self.name == "step":
            return np.linspace(0.5, 5.0, 19)
        return np.linspace(0.1, 5.0, 50)

    def to_dict(self):
        return {"name": self.name, "params": self.merged, "outputs": list(self.outputs),
                "t_max": float(self.grid()[-1]), "n_points": self.n_points,
                "omega": self.omega_grid(), "tolerances": self.tolerances,
                "signs": list(self.signs), "constants": self.constants.to_dict()}


DEFAULT_TOLERANCES = {
    "vacuum_Z": 1e-8,           # absolute
    "zero_kernels": 1e-14,      # absolute
    "box_limit_factor": 10.0,   # absolute deviation allowed per unit width
    "energy": 1e-10,            # relative drift
    "step_Z": 1e-6,             # relative
    "step_zeta": 1e-6,          # relative
    "decay": 0.1,               # relative error of the fitted rate
    "lorentz_Q": 1e-9,          # absolute
    "cross_check": 1e-7,        # absolute, residue against contour
    "residual": 1e-5,           # times omega_q^2
    "coupling_step": 1e-4,      # relative
    "coupling": 1e-6,           # relative
    "kk": 1e-4,                 # absolute
}


@dataclass
class ScenarioReport:
    """Outcome of :func:`run_scenario`.

    ``checks`` holds one dict per comparison with ``name``, ``passed``
    (``None`` for informational entries), ``deviation``, ``tolerance``,
    ``measure`` and optional ``error`` or ``note``. ``series`` maps output
    names to computed or reference series, written as CSV by :meth:`write`.
    """

    name: str
    spec: dict
    checks: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c["passed"] is not False for c in self.checks)

    def add(self, name, deviation=None, tolerance=None, measure="abs", passed=None, **extra):
        if passed is None and deviation is not None and tolerance is not None:
            passed = bool(deviation <= tolerance)
        entry = {"name": name, "passed": passed, "deviation": deviation,
                 "tolerance": tolerance, "measure": measure}
        entry.update(extra)
        self.checks.append(entry)
        return entry

    def to_dict(self):
        return {"scenario": self.name, "passed": self.passed, "spec": self.spec,
                "checks": self.checks,
                "series": {k: {"kind": s.kind, "sign": s.sign, "method": s.method,
                               "metadata": s.metadata} for k, s in self.series.items()},
                "tables": sorted(self.tables)}

    def write(self, outdir):
        """``report.json`` plus one CSV per series and table in ``outdir``."""
        from .io import to_jsonable, write_csv, write_json
        os.makedirs(outdir, exist_ok=True)
        for key, s in sorted(self.series.items()):
            s.write_csv(os.path.join(outdir, f"{key}.csv"))
        for key, (header, cols) in sorted(self.tables.items()):
            write_csv(os.path.join(outdir, f"{key}.csv"), header, cols)
        write_json(os.path.join(outdir, "report.json"), to_jsonable(self.to_dict()))
        return outdir


def _sign_tag(sign):
    return "plus" if sign == 1 else "minus"


def _deviation(a, b, measure):
    err = float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))
    if measure == "rel":
        scale = float(np.max(np.abs(b), initial=0.0))
        return err / scale if scale > 0 else err
    return err


def _guard(report, name, fn, **extra):
    """Run one check; record a failure entry instead of aborting the scenario."""
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", AccuracyWarning)
            out = fn()
        notes = [str(w.message) for w in caught if issubclass(w.category, AccuracyWarning)]
        if notes and report.checks and report.checks[-1]["name"] == name:
            report.checks[-1]["warnings"] = notes
        return out
    except MaxdiqError as exc:
        report.add(name, passed=False, error=f"{type(exc).__name__}: {exc}", **extra)
        return None


def _compare(report, label, computed, ref, tol, measure):
    report.series[label] = computed
    report.series[label + "_reference"] = ref
    dev = _deviation(computed.values, ref.values, measure)
    return report.add(label, dev, tol, measure, method=computed.method,
                      origin=ref.metadata["origin"])


def _residual(report, label, base, e, m, tol):
    """Mode-equation residual of Z recomputed on a grid of about 80 points per period."""
    wq = base.omega_q
    try:
        tr = residual_grid(wq, e, m, t_max=base.t[-1])
        Z = kernel(replace(base, t=tr), "Z")
        r, info = ode_residual(Z, e, m, wq, full_output=True)
        report.add(label, r, tol * wq * wq, "abs", at=info["argmax_t"], points=int(tr.size))
    except ResolutionError as exc:
        # an unresolvable grid is not a failure of the kernel
        report.add(label, passed=None, note=f"not evaluated: {exc}")


def run_scenario(spec):
    """Run a scenario and collect its checks.

    Returns
    -------
    ScenarioReport
        Deterministic for a given spec.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(spec.tolerances)
    p = spec.merged
    e, m = spec.media()
    t = spec.grid()
    report = ScenarioReport(spec.name, spec.to_dict())
    const = spec.constants
    wq, wk = p["omega_q"], p["omega_k"]

    def req(sign, **kw):
        return KernelRequest(electric=e, magnetic=m, omega_q=wq, omega_k=wk, sign=sign, t=t,
                             constants=const, **kw)

    if "kernels" in spec.outputs:
        for sg in spec.signs:
            tag = _sign_tag(sg)
            if spec.name == "vacuum":
                for kind in ("Z", "zeta", "eta", "Q"):
                    k = _guard(report, f"{kind}_{tag}", lambda: kernel(req(sg), kind))
                    if k is None:
                        continue
                    ref = reference_kernel("vacuum", kind, p, t, sg, const)
                    _compare(report, f"{kind}_{tag}", k, ref,
                             tol["vacuum_Z"] if kind in ("Z", "Q") else tol["zero_kernels"],
                             "abs")
                    if kind == "Z":
                        _residual(report, f"residual_Z_{tag}", req(sg), e, m, tol["residual"])
            elif spec.name == "box":
                Z = _guard(report, f"Z_{tag}", lambda: kernel(req(sg), "Z"))
                ref = reference_kernel("box-limit", "Z", p, t, sg, const)
                if Z is not None:
                    _compare(report, f"Z_{tag}", Z, ref, tol["box_limit_factor"] * p["delta"],
                             "abs")
                    report.checks[-1]["note"] = "deviation from the zero-width limit"
                    _residual(report, f"residual_Z_{tag}", req(sg), e, m, tol["residual"])
                _, dev = energy_invariant(ref, p["chi_e0"], p["chi_m0"], wq)
                report.add(f"energy_limit_{tag}", dev, tol["energy"], "rel")
                for kind in ("zeta", "eta"):
                    k = _guard(report, f"{kind}_{tag}", lambda: kernel(req(sg), kind))
                    if k is not None:
                        report.series[f"{kind}_{tag}"] = k
                        report.add(f"{kind}_{tag}_size", float(np.max(np.abs(k.values))),
                                   passed=None, note="vanishes with the box width")
            elif spec.name == "step":
                Z = _guard(report, f"Z_{tag}", lambda: kernel(req(sg, method="contour"), "Z"))
                if Z is not None:
                    _compare(report, f"Z_{tag}", Z, reference_kernel("step", "Z", p, t, sg, const),
                             tol["step_Z"], "rel")
                    _residual(report, f"residual_Z_{tag}", req(sg), e, m, tol["residual"])
                Zr = _guard(report, f"Z_{tag}_residue", lambda: kernel(req(sg), "Z"))
                if Z is not None and Zr is not None:
                    report.add(f"cross_check_Z_{tag}", _deviation(Z.values, Zr.values, "abs"),
                               tol["cross_check"], "abs")
                zeta = _guard(report, f"zeta_{tag}", lambda: kernel(req(sg), "zeta"))
                if zeta is not None:
                    _compare(report, f"zeta_{tag}", zeta,
                             reference_kernel("step", "zeta", p, t, sg, const),
                             tol["step_zeta"], "rel")
                    f = math.sqrt(float(reference_coupling(e, wk, const)))
                    expect = f * (-sg * 1j * wk) / (wq * wq - wk * wk - sg * 1j * p["beta"] * wk)
                    amp = zeta.persistent[0] if zeta.persistent else 0j
                    report.add(f"zeta_{tag}_persistent", abs(amp - expect) / abs(expect),
                               tol["step_zeta"], "rel")
                _step_decay(report, spec, req(sg), sg, tol)
            else:  # lorentz
                Z = _guard(report, f"Z_{tag}", lambda: kernel(req(sg), "Z"))
                if Z is not None:
                    report.series[f"Z_{tag}"] = Z
                    _residual(report, f"residual_Z_{tag}", req(sg), e, m, tol["residual"])
                    if p["gamma"] > 0:
                        Zc = _guard(report, f"Z_{tag}_contour",
                                    lambda: kernel(req(sg, method="contour"), "Z"))
                        if Zc is not None:
                            report.add(f"cross_check_Z_{tag}",
                                       _deviation(Z.values, Zc.values, "abs"),
                                       tol["cross_check"], "abs")
                Q = _guard(report, f"Q_{tag}", lambda: kernel(req(sg), "Q"))
                if Q is not None:
                    if p["gamma"] == 0:
                        _compare(report, f"Q_{tag}", Q,
                                 reference_kernel("lorentz", "Q", p, t, sg, const),
                                 tol["lorentz_Q"], "abs")
                    else:
                        report.series[f"Q_{tag}"] = Q
    w = spec.omega_grid()
    if "couplings" in spec.outputs:
        _couplings(report, spec, e, m, w, tol)
    if "noise" in spec.outputs:
        def noise():
            ws = w[w > 0]
            if isinstance(e, Lorentz) and e.gamma == 0:
                # the lossless response is singular at its resonance
                ws = ws[np.abs(ws - e.omega0) > 1e-9 * e.omega0]
            b = noise_weight_bundle(e, m, ws, constants=const)
            report.tables["noise"] = (["omega", "w_e", "w_m", "f2", "g2"],
                                      [b.omega, b.w_e, b.w_m, b.f2, b.g2])
            report.add("noise_passive", passed=b.passive,
                       note="noise weights are non-negative wherever absorption is")
        _guard(report, "noise", noise)
    return report


def _step_decay(report, spec, base, sg, tol):
    """Envelope decay of the step kernels.

    With an underdamped field the transients oscillate under ``exp(-beta t/2)``
    and the envelope fit applies. An overdamped field has no envelope peaks;
    its slowest transient decays at ``beta/2 - sqrt(beta^2/4 - omega_q^2)``,
    which is reported from a tail fit without a pass/fail verdict.
    """
    p = spec.merged
    beta, wq = p["beta"], p["omega_q"]
    tag = _sign_tag(sg)
    rate = beta / 2
    disc = beta * beta / 4 - wq * wq
    slowest = rate - math.sqrt(disc) if disc > 0 else rate
    # the check needs t >= 10/rate: use a longer grid of the same size
    tl = uniform_grid(max(spec.grid()[-1], 12.0 / slowest), spec.n_points)
    for kind in ("Z", "zeta"):
        if disc < 0:
            def decay(kind=kind):
                s = kernel(replace(base, t=tl), kind)
                d = asymptotic_decay_check(s, rate, tol["decay"])
                report.add(f"decay_{kind}_{tag}", d.margin, tol["decay"], "rel",
                           passed=d.passed, fitted_rate=d.rate, expected_rate=rate,
                           peaks=d.peaks)
        else:
            def decay(kind=kind):
                s = kernel(replace(base, t=tl), kind)
                y = np.abs(s.values - s.persistent_part())
                sel = (tl >= tl[-1] / 2) & (y > 1e-12 * y.max())
                fitted = -np.polyfit(tl[sel], np.log(y[sel]), 1)[0]
                report.add(f"decay_{kind}_{tag}", passed=None, fitted_rate=float(fitted),
                           slowest_rate=slowest, envelope_rate=rate,
                           note="overdamped: no envelope peaks; tail decays at the slowest rate")
        _guard(report, f"decay_{kind}_{tag}", decay)


def _couplings(report, spec, e, m, w, tol):
    const = spec.constants
    for model, col in ((e, "f2"), (m, "g2")):
        if isinstance(model, Vacuum):
            report.tables[col] = (["omega", col], [w, np.zeros_like(w)])
            continue
        if isinstance(model, Lorentz) and model.gamma == 0:
            dc = delta_coupling(model, const)
            report.add(f"{col}_delta", passed=None, note="lossless resonance couples through "
                       "a delta weight", **dc.to_dict())
            continue

        def run(model=model, col=col):
            num = np.asarray(coupling_from_chi(model, w, const))
            ref = np.asarray(reference_coupling(model, w, const))
            report.tables[col] = (["omega", col], [w, num])
            report.tables[col + "_reference"] = (["omega", col], [w, ref])
            t_ = tol["coupling_step"] if isinstance(model, Step) else tol["coupling"]
            report.add(f"coupling_{col}", _deviation(num, ref, "rel"), t_, "rel")
        _guard(report, f"coupling_{col}", run)
    if isinstance(e, Lorentz) and e.gamma > 0:
        def kk():
            ws = np.linspace(0.05, 5.0, 200)
            ws = ws[np.abs(ws - e.omega0) > e.gamma][::3][:50]
            re = np.array([kk_real_from_imag(e, x) for x in ws])
            dev = _deviation(re, np.asarray(e.chi_freq(ws)).real, "abs")
            report.add("kk_closure", dev, tol["kk"], "abs", points=int(ws.size))
        _guard(report, "kk_closure", kk)


def load_spec(path):
    """Read a scenario spec from JSON (``name``, ``params``, grids, tolerances)."""
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    c = d.pop("constants", None)
    if "omega" in d and d["omega"] is not None:
        d["omega"] = tuple(d["omega"])
    for key in ("outputs", "signs"):
        if key in d:
            d[key] = tuple(d[key])
    if isinstance(c, str):
        d["constants"] = PhysicalConstants.si() if c == "si" else PhysicalConstants.natural()
    elif isinstance(c, dict):
        d["constants"] = PhysicalConstants(**c)
    return ScenarioSpec(**d)
