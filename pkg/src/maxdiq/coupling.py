"""Squared coupling functions |f(omega)|**2 and |g(omega)|**2.

The electric and magnetic relations share one form once the field constant
``K`` (``1/eps0`` electric, ``mu0`` magnetic) is factored out::

    Im chi(w)  = (4 pi^2 K / (3 hbar)) (d|k|^3/dw) |f(w)|^2
    chi(t)     = (8 pi K / (3 hbar)) int_0^inf (d|k|^3/dw) |f(w)|^2 sin(w t) dw

For the linear dispersion ``w = c|k|`` the Jacobian is ``3 w^2 / c^3``.
Only squared magnitudes are stored: the phase of ``f`` never enters.
"""
from __future__ import annotations

import csv
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AccuracyWarning,
    ExtrapolationWarning,
    LosslessCouplingError,
    ParameterError,
    PassivityError,
)
from .medium import (
    Box,
    DispersionRelation,
    Linear,
    Lorentz,
    PhysicalConstants,
    Step,
    Vacuum,
    _check_role,
    dispersion_from_dict,
)
from .quadrature import sine_transform

__all__ = [
    "CouplingTable",
    "DeltaCoupling",
    "coupling_from_chi",
    "chi_from_coupling",
    "coupling_from_im_chi",
    "im_chi_from_coupling",
    "dispersion_invariance_check",
    "delta_coupling",
    "coupling_table",
    "read_coupling_csv",
    "thread_count",
    "reference_coupling",
]

#: relative size below which a negative squared coupling is clamped to zero
NEGATIVE_TOL = 1e-12


def thread_count():
    """Worker cap from ``MAXDIQ_THREADS`` (default 1)."""
    raw = os.environ.get("MAXDIQ_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"MAXDIQ_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _pmap(fn, items):
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _prefactor(role, constants, omega, dispersion):
    """``3 hbar / (4 pi^2 K dk3/dw)``, the map from Im chi to |f|^2."""
    K = constants.field_constant(role)
    return 3 * constants.hbar / (4 * math.pi ** 2 * K * dispersion.dk3_domega(omega))


def coupling_from_im_chi(im_chi, omega, dispersion=None, constants=None, role="electric"):
    """``|f(omega)|**2`` from ``Im chi(omega)`` for a given dispersion.

    Parameters
    ----------
    im_chi : float or array_like
        Absorptive part at ``omega``; must be non-negative.
    omega : float or array_like
        Positive angular frequencies.
    dispersion : DispersionRelation, optional
        Default is the linear dispersion with the speed of light of
        ``constants``.

    Raises
    ------
    UnphysicalDispersionError
        If ``d omega/d|k| <= 0`` at any requested frequency.
    PassivityError
        If ``im_chi`` is negative.
    """
    constants = constants or PhysicalConstants()
    dispersion = dispersion or Linear(constants.c)
    _check_role(role)
    im = np.asarray(im_chi, dtype=float)
    w = np.asarray(omega, dtype=float)
    if np.any(im < 0):
        raise PassivityError("Im chi is negative; the model is not passive")
    if np.any(w <= 0):
        raise ParameterError("coupling_from_im_chi needs omega > 0")
    out = im * _prefactor(role, constants, w, dispersion)
    return out if np.ndim(out) else float(out)


def im_chi_from_coupling(f2, omega, dispersion=None, constants=None, role="electric"):
    """Inverse of :func:`coupling_from_im_chi`."""
    constants = constants or PhysicalConstants()
    dispersion = dispersion or Linear(constants.c)
    w = np.asarray(omega, dtype=float)
    out = np.asarray(f2, dtype=float) / _prefactor(role, constants, w, dispersion)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class DeltaCoupling:
    """``|f(w)|**2 = weight * delta(w - frequency)`` for a lossless resonance."""

    frequency: float
    weight: float
    role: str = "electric"

    def to_dict(self):
        return {"kind": "delta", "role": self.role, "frequency": self.frequency,
                "weight": self.weight}


def delta_coupling(model, constants=None):
    """Delta-weight coupling of an undamped oscillator.

    For ``gamma == 0`` the sine transform of ``omegap**2 sin(w0 t)/w0`` is
    concentrated at ``w0``; matching the susceptibility integral gives the
    weight ``hbar c^3 omegap^2 / (8 pi K w0^3)``.
    """
    constants = constants or PhysicalConstants()
    if not (isinstance(model, Lorentz) and model.gamma == 0):
        raise ParameterError("a delta coupling exists only for the lossless Lorentz model")
    K = constants.field_constant(model.role)
    nu = model.omega0
    w = constants.hbar * constants.c ** 3 * model.omegap ** 2 / (8 * math.pi * K * nu ** 3)
    return DeltaCoupling(frequency=nu, weight=w, role=model.role)


def _sine_transform_model(model, w, tol):
    if isinstance(model, Vacuum):
        return 0.0, {"error_estimate": 0.0}
    f = lambda t: np.asarray(model.chi_time(t), dtype=float)
    return sine_transform(
        f, w,
        breakpoints=model.breakpoints,
        feature_freq=model.characteristic_frequency,
        support=model.support,
        decaying=model.decaying,
        tol=tol,
    )


def coupling_from_chi(model, omega, constants=None, dispersion=None, tol=1e-12,
                      full_output=False):
    """``|f(omega)|**2`` (or ``|g|**2``) from the time-domain susceptibility.

    ``S(w) = int_0^inf chi(t) sin(w t) dt`` is computed numerically (half-period
    panels with epsilon acceleration; Abel limit for the step response) and
    mapped through ``|f|^2 = 3 hbar S / (4 pi^2 K dk3/dw)``, which for the
    linear dispersion is ``hbar c^3 S / (4 pi^2 K w^2)``. At ``omega == 0``
    the result is 0.

    Parameters
    ----------
    model : SusceptibilityModel
        Its ``role`` selects |f|^2 (electric) or |g|^2 (magnetic).
    omega : float or array_like
        Non-negative angular frequencies.
    full_output : bool
        Also return ``{"error_estimate", "clamped", "sine_transform"}``.

    Raises
    ------
    LosslessCouplingError
        For an undamped oscillator, whose coupling is a delta weight
        (use :func:`delta_coupling`).
    PassivityError
        If a value comes out negative beyond round-off.
    """
    constants = constants or PhysicalConstants()
    dispersion = dispersion or Linear(constants.c)
    if isinstance(model, Lorentz) and model.gamma == 0 and model.omegap != 0:
        raise LosslessCouplingError(
            "the lossless oscillator couples through a delta weight at omega0; "
            "use delta_coupling()")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w < 0):
        raise ParameterError("coupling_from_chi needs omega >= 0")
    pos = w > 0
    S = np.zeros(w.shape)
    err = np.zeros(w.shape)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExtrapolationWarning)
        results = _pmap(lambda x: _sine_transform_model(model, float(x), tol), list(w[pos]))
    S[pos] = [r[0] for r in results]
    err[pos] = [r[1]["error_estimate"] for r in results]
    scale = np.max(np.abs(S)) if S.size else 0.0
    clamped = []
    neg = S < 0
    if np.any(neg):
        tiny = np.abs(S) <= NEGATIVE_TOL * max(scale, 1.0) + err
        if np.any(neg & ~tiny):
            bad = w[neg & ~tiny]
            raise PassivityError(
                f"sine transform negative at omega = {bad.tolist()[:5]}: model is not passive")
        clamped = w[neg].tolist()
        S[neg] = 0.0
    f2 = np.zeros(w.shape)
    f2[pos] = S[pos] * _prefactor(model.role, constants, w[pos], dispersion)
    rel_err = np.zeros(w.shape)
    rel_err[pos] = err[pos] * _prefactor(model.role, constants, w[pos], dispersion)
    out = f2 if np.ndim(omega) else float(f2[0])
    if full_output:
        return out, {"error_estimate": rel_err if np.ndim(omega) else float(rel_err[0]),
                     "clamped": clamped, "sine_transform": S if np.ndim(omega) else float(S[0])}
    return out


@dataclass(frozen=True, eq=False)
class CouplingTable:
    """Sampled squared coupling magnitudes.

    Attributes
    ----------
    role : str
        ``"electric"`` (values are |f|^2) or ``"magnetic"`` (|g|^2).
    omega, value : ndarray
        Increasing non-negative frequencies and the squared magnitudes.
    dispersion : DispersionRelation
    constants : PhysicalConstants
    """

    role: str
    omega: np.ndarray
    value: np.ndarray
    dispersion: DispersionRelation = field(default_factory=Linear)
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        _check_role(self.role)
        w = np.asarray(self.omega, dtype=float)
        v = np.asarray(self.value, dtype=float)
        if w.ndim != 1 or w.shape != v.shape or w.size < 2:
            raise ParameterError("coupling table needs matching 1-D omega/value arrays")
        if np.any(np.diff(w) <= 0) or w[0] < 0:
            raise ParameterError("coupling table frequencies must be increasing and >= 0")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ParameterError("squared couplings must be finite and >= 0")
        if w[0] == 0 and v[0] != 0:
            raise ParameterError("the squared coupling vanishes at omega = 0")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "value", v)

    @property
    def column(self):
        return "f2" if self.role == "electric" else "g2"

    def im_chi(self):
        """Absorption implied by each sample."""
        out = np.zeros_like(self.value)
        pos = self.omega > 0
        out[pos] = im_chi_from_coupling(self.value[pos], self.omega[pos], self.dispersion,
                                        self.constants, self.role)
        return out

    def write_csv(self, path):
        from .io import write_csv
        write_csv(path, ["omega", self.column], [self.omega, self.value])

    def to_dict(self):
        return {
            "role": self.role,
            "column": self.column,
            "dispersion": self.dispersion.to_dict(),
            "constants": self.constants.to_dict(),
            "omega": self.omega.tolist(),
            "value": self.value.tolist(),
        }

    def write_json(self, path):
        from .io import write_json
        write_json(path, self.to_dict())

    @classmethod
    def from_dict(cls, d):
        c = d.get("constants", {})
        return cls(role=d["role"], omega=np.asarray(d["omega"], float),
                   value=np.asarray(d["value"], float),
                   dispersion=dispersion_from_dict(d.get("dispersion", {"kind": "linear"})),
                   constants=PhysicalConstants(c.get("hbar", 1.0), c.get("eps0", 1.0), c.get("c", 1.0)))


def read_coupling_csv(path, dispersion=None, constants=None):
    """Read a table with header ``omega,f2`` (electric) or ``omega,g2`` (magnetic)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParameterError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    roles = {("omega", "f2"): "electric", ("omega", "g2"): "magnetic"}
    if tuple(header) not in roles:
        raise ParameterError(f"{path}: header must be 'omega,f2' or 'omega,g2'")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ParameterError(f"{path}: {exc}") from None
    constants = constants or PhysicalConstants()
    return CouplingTable(roles[tuple(header)], data[:, 0], data[:, 1],
                         dispersion or Linear(constants.c), constants)


def coupling_table(model, omega, constants=None, dispersion=None, tol=1e-12):
    """Tabulate :func:`coupling_from_chi` on ``omega`` (``0`` may be included)."""
    constants = constants or PhysicalConstants()
    dispersion = dispersion or Linear(constants.c)
    w = np.asarray(omega, dtype=float)
    vals = coupling_from_chi(model, w, constants, dispersion, tol=tol)
    return CouplingTable(model.role, w, np.asarray(vals), dispersion, constants)


def _sine_integral_sum(omega, g, t, chunk=4_000_000):
    """``int g(w) sin(w t) / w dw`` over ``[0, omega[-1]]`` for piecewise-linear ``g``.

    ``g`` is linear between the samples and on ``[0, omega[0]]`` continues the
    first segment down to zero frequency. Each piece is integrated exactly:
    the constant part through ``Si`` and the slope part through cosines.
    """
    from scipy.special import sici

    if omega[0] > 0:
        if omega.size > 1:
            g0 = g[0] - omega[0] * (g[1] - g[0]) / (omega[1] - omega[0])
        else:
            g0 = g[0]
        omega = np.concatenate([[0.0], omega])
        g = np.concatenate([[g0], g])
    lo, hi = omega[:-1], omega[1:]
    slope = (g[1:] - g[:-1]) / (hi - lo)
    icpt = g[:-1] - slope * lo
    out = np.empty(t.shape)
    step = max(1, chunk // max(omega.size, 1))
    for i in range(0, t.size, step):
        tt = t[i:i + step, None]
        si = sici(omega[None, :] * tt)[0]
        c = np.cos(omega[None, :] * tt)
        out[i:i + step] = (icpt * (si[:, 1:] - si[:, :-1])).sum(axis=1) \
            + (slope * (c[:, :-1] - c[:, 1:])).sum(axis=1) / tt[:, 0]
    return out


def chi_from_coupling(table, t, tol=1e-4, full_output=False):
    """Susceptibility in the time domain from a coupling table.

    ``chi(t) = (2/pi) int Im chi(w) sin(w t) dw``. The product ``w Im chi(w)``
    is interpolated linearly and ``sin(w t)/w`` is integrated exactly, so a
    ``1/w`` absorption edge (the step response) is reproduced without a
    low-frequency loss. The value of ``w Im chi`` at zero frequency is
    extrapolated from the first two positive samples, since a table entry at
    ``w = 0`` cannot carry it. Returns exactly 0 for ``t <= 0``.

    The truncation at the last frequency ``W`` is estimated by the boundary
    term ``(2/pi) |Im chi(W)| / t`` of the neglected tail. Above ``tol``
    (relative to the largest returned value) an :class:`AccuracyWarning` is
    raised and the flag is set in the metadata.
    """
    t = np.asarray(t, dtype=float)
    ta = np.atleast_1d(t)
    out = np.zeros(ta.shape)
    pos = ta > 0
    weight = table.im_chi()
    w = table.omega
    keep = w > 0
    if np.any(pos) and np.any(keep):
        out[pos] = 2 / np.pi * _sine_integral_sum(w[keep], w[keep] * weight[keep], ta[pos])
    tail = np.zeros(ta.shape)
    tail[pos] = 2 / np.pi * abs(weight[-1]) / ta[pos]
    size = max(np.max(np.abs(out)), 1e-300)
    warn = bool(np.any(tail > tol * size))
    if warn:
        warnings.warn(
            f"coupling table ends at omega={table.omega[-1]:.4g}; truncated tail up to "
            f"{tail.max():.3g}", AccuracyWarning, stacklevel=2)
    res = out if t.ndim else float(out[0])
    if full_output:
        return res, {"tail_estimate": tail if t.ndim else float(tail[0]),
                     "accuracy_warning": warn}
    return res


def dispersion_invariance_check(model, disp1, disp2, omega, constants=None):
    """Largest disagreement between Im chi reconstructed through two dispersions.

    For each frequency the coupling is computed from ``Im chi`` under each
    dispersion and mapped back; the two couplings differ, the absorption they
    encode must not.
    """
    constants = constants or PhysicalConstants()
    w = np.asarray(omega, dtype=float)
    im = np.asarray(model.chi_freq(w)).imag
    f1 = coupling_from_im_chi(im, w, disp1, constants, model.role)
    f2 = coupling_from_im_chi(im, w, disp2, constants, model.role)
    r1 = im_chi_from_coupling(f1, w, disp1, constants, model.role)
    r2 = im_chi_from_coupling(f2, w, disp2, constants, model.role)
    return float(np.max(np.abs(np.asarray(r1) - np.asarray(r2)), initial=0.0))


def reference_coupling(model, omega, constants=None):
    """Closed-form |f|^2 (or |g|^2) for the built-in kinds, linear dispersion.

    Box: ``hbar c^3 chi0 sin^2(w D/2) / (4 pi^2 K w^2 (w D/2))``.
    Step: ``hbar c^3 beta / (4 pi^2 K w^3)``.
    Lorentz (gamma > 0): ``hbar c^3 wp^2 / (16 pi^2 K nu0 w^2)``
    times ``gamma/(gamma^2/4 + (nu0 - w)^2) - gamma/(gamma^2/4 + (nu0 + w)^2)``.
    """
    constants = constants or PhysicalConstants()
    K = constants.field_constant(model.role)
    pre = constants.hbar * constants.c ** 3 / (4 * math.pi ** 2 * K)
    w_in = np.asarray(omega, dtype=float)
    if np.any(w_in < 0):
        raise ParameterError("reference_coupling needs omega >= 0")
    # the squared coupling vanishes at omega = 0; evaluate elsewhere
    w = np.where(w_in == 0, 1.0, w_in)
    if isinstance(model, Vacuum):
        out = np.zeros(w.shape)
    elif isinstance(model, Box):
        x = w * model.delta / 2
        out = pre * model.chi0 * np.sin(x) ** 2 / (w ** 2 * x)
    elif isinstance(model, Step):
        out = pre * model.beta / w ** 3
    elif isinstance(model, Lorentz):
        if model.gamma == 0:
            raise LosslessCouplingError("lossless oscillator: use delta_coupling()")
        nu = model.nu0
        g = model.gamma
        out = (pre * model.omegap ** 2 / (4 * nu * w ** 2)
               * (g / (g ** 2 / 4 + (nu - w) ** 2) - g / (g ** 2 / 4 + (nu + w) ** 2)))
        out = out.real
    else:
        raise ParameterError(f"no closed-form coupling for {model.kind!r}")
    out = np.where(w_in == 0, 0.0, out)
    return out if np.ndim(out) else float(out)
