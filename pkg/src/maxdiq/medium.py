"""Causal susceptibility models in the time, frequency and Laplace domains.

Every model carries a ``role`` (``"electric"`` or ``"magnetic"``) and
evaluates

* ``chi(t)``, zero for ``t <= 0``;
* the one-sided Fourier transform ``chi(omega) = int_0^inf chi(t) exp(i omega t) dt``;
* the Laplace image ``chi~(s) = int_0^inf chi(t) exp(-s t) dt``.

The module-level functions :func:`chi_time`, :func:`chi_freq` and
:func:`chi_laplace` simply dispatch to the model methods.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy import integrate

from .errors import (
    AccuracyWarning,
    ExtrapolationWarning,
    ParameterError,
    PoleError,
    RangeError,
    SingularityError,
    UnphysicalDispersionError,
)
from .laplace import RationalImage, laplace_piecewise_linear
from .quadrature import gauss_legendre, richardson_zero

__all__ = [
    "PhysicalConstants",
    "SusceptibilityModel",
    "Vacuum",
    "Box",
    "Step",
    "Lorentz",
    "TabulatedTime",
    "TabulatedFrequency",
    "DispersionRelation",
    "Linear",
    "PowerLaw",
    "ValidationReport",
    "chi_time",
    "chi_freq",
    "chi_laplace",
    "kk_real_from_imag",
    "check_causality_passivity",
    "read_susceptibility_csv",
    "model_from_dict",
]

ROLES = ("electric", "magnetic")


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants; natural units (all equal to one) by default.

    ``mu0`` is derived as ``1/(eps0 c**2)``.
    """

    hbar: float = 1.0
    eps0: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "eps0", "c"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive and finite, got {v!r}")

    @property
    def mu0(self):
        return 1.0 / (self.eps0 * self.c ** 2)

    @classmethod
    def natural(cls):
        return cls()

    @classmethod
    def si(cls):
        """CODATA 2018 values in SI units."""
        return cls(hbar=1.054571817e-34, eps0=8.8541878128e-12, c=299792458.0)

    def field_constant(self, role):
        """``1/eps0`` for the electric role and ``mu0`` for the magnetic role.

        With this constant the electric and magnetic coupling relations take
        one common form.
        """
        _check_role(role)
        return 1.0 / self.eps0 if role == "electric" else self.mu0

    def to_dict(self):
        return {"hbar": self.hbar, "eps0": self.eps0, "c": self.c, "mu0": self.mu0}


def _check_role(role):
    if role not in ROLES:
        raise ParameterError(f"role must be 'electric' or 'magnetic', got {role!r}")


@dataclass(frozen=True)
class SusceptibilityModel:
    """Base class of the susceptibility kinds."""

    role: str = "electric"

    kind: ClassVar[str] = "base"
    #: rate of the fastest structure in chi(t), used to size quadrature panels
    feature_freq: ClassVar[float] = 0.0

    def __post_init__(self):
        _check_role(self.role)

    # -- time domain -----------------------------------------------------
    def chi_time(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        pos = t > 0
        if np.any(pos):
            out[pos] = self._chi_pos(t[pos])
        return out if out.ndim else float(out)

    def _chi_pos(self, t):
        raise NotImplementedError

    # -- frequency domain ------------------------------------------------
    def chi_freq(self, omega):
        raise NotImplementedError

    # -- Laplace domain --------------------------------------------------
    def chi_laplace(self, s):
        raise NotImplementedError

    def rational_image(self):
        """The Laplace image as a :class:`RationalImage`, or ``None``."""
        return None

    # -- descriptors used by the numerical routes ------------------------
    @property
    def breakpoints(self):
        """Times at which chi(t) or a derivative is discontinuous."""
        return ()

    @property
    def support(self):
        """Time beyond which chi(t) vanishes identically, or ``None``."""
        return None

    @property
    def decaying(self):
        """Whether chi(t) decays, so its sine transform converges absolutely."""
        return True

    @property
    def characteristic_frequency(self):
        return float(self.feature_freq)

    @property
    def is_lossless(self):
        """Im chi(omega) vanishes for all omega > 0 except isolated points."""
        return False

    def params(self):
        return {}

    def to_dict(self):
        return {"kind": self.kind, "role": self.role, **self.params()}


@dataclass(frozen=True)
class Vacuum(SusceptibilityModel):
    """No response."""

    kind: ClassVar[str] = "vacuum"

    def _chi_pos(self, t):
        return np.zeros_like(t)

    def chi_freq(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = np.zeros(omega.shape, dtype=complex)
        return out if out.ndim else complex(out)

    def chi_laplace(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        return out if out.ndim else complex(out)

    def rational_image(self):
        return RationalImage([0.0], [1.0])

    @property
    def support(self):
        return 0.0

    @property
    def is_lossless(self):
        return True


@dataclass(frozen=True)
class Box(SusceptibilityModel):
    """``chi(t) = chi0/delta`` for ``0 < t < delta``, zero otherwise."""

    chi0: float = 1.0
    delta: float = 1.0

    kind: ClassVar[str] = "box"

    def __post_init__(self):
        super().__post_init__()
        if not self.chi0 >= 0:
            raise ParameterError(f"box chi0 must be >= 0, got {self.chi0!r}")
        if not self.delta > 0:
            raise ParameterError(f"box delta must be > 0, got {self.delta!r}")

    def _chi_pos(self, t):
        return np.where(t < self.delta, self.chi0 / self.delta, 0.0)

    def chi_freq(self, omega):
        w = np.asarray(omega, dtype=float)
        x = w * self.delta
        small = np.abs(x) < 1e-4
        xs = np.where(small, 1.0, x)
        re = np.where(small, 1 - x ** 2 / 6, np.sin(xs) / xs)
        # 2 sin^2(x/2)/x avoids the cancellation in (1 - cos x)/x
        im = np.where(small, x / 2 - x ** 3 / 24, 2 * np.sin(xs / 2) ** 2 / xs)
        out = self.chi0 * (re + 1j * im)
        return out if out.ndim else complex(out)

    def chi_laplace(self, s):
        s = np.asarray(s, dtype=complex)
        z = s * self.delta
        small = np.abs(z) < 1e-6
        zs = np.where(small, 1.0, z)
        out = self.chi0 * np.where(small, 1 - z / 2, -np.expm1(-zs) / zs)
        return out if out.ndim else complex(out)

    @property
    def breakpoints(self):
        return (self.delta,)

    @property
    def support(self):
        return self.delta

    @property
    def characteristic_frequency(self):
        return 2 * math.pi / self.delta

    def params(self):
        return {"chi0": self.chi0, "delta": self.delta}


@dataclass(frozen=True)
class Step(SusceptibilityModel):
    """``chi(t) = beta`` for ``t > 0`` (a step response)."""

    beta: float = 1.0

    kind: ClassVar[str] = "step"
    #: Abel damping rates relative to omega used by :meth:`chi_freq`
    abel_eps: ClassVar[tuple] = (1e-2, 1e-3, 1e-4)

    def __post_init__(self):
        super().__post_init__()
        if not self.beta >= 0:
            raise ParameterError(f"step beta must be >= 0, got {self.beta!r}")

    def _chi_pos(self, t):
        return np.full_like(t, self.beta)

    def chi_freq(self, omega):
        """Abel-regularised transform ``lim eps->0 beta/(eps - i omega)``.

        The damped transforms at ``eps = omega * abel_eps`` are extrapolated to
        ``eps = 0``.

        Raises
        ------
        SingularityError
            At ``omega == 0``, where the regularised transform diverges.
        """
        w = np.asarray(omega, dtype=float)
        if np.any(w == 0) and self.beta != 0:
            raise SingularityError("step susceptibility is singular at omega = 0")
        wsafe = np.where(w == 0, 1.0, w)
        eps = np.asarray(self.abel_eps) * np.abs(wsafe)[..., None]
        out = richardson_zero(np.asarray(self.abel_eps),
                              np.moveaxis(self.beta / (eps - 1j * wsafe[..., None]), -1, 0))
        out = np.where(w == 0, 0.0, out)
        return out if out.ndim else complex(out)

    def chi_laplace(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(s == 0) and self.beta != 0:
            raise PoleError("step image has a pole at s = 0", pole=0j)
        out = self.beta / np.where(s == 0, 1.0, s)
        return out if out.ndim else complex(out)

    def rational_image(self):
        return RationalImage([self.beta], [1.0, 0.0])

    @property
    def decaying(self):
        return self.beta == 0

    def params(self):
        return {"beta": self.beta}


@dataclass(frozen=True)
class Lorentz(SusceptibilityModel):
    """Damped oscillator: ``chi~(s) = omegap**2 / (s**2 + gamma s + omega0**2)``."""

    omega0: float = 1.0
    gamma: float = 0.0
    omegap: float = 1.0

    kind: ClassVar[str] = "lorentz"

    def __post_init__(self):
        super().__post_init__()
        if not self.omega0 > 0:
            raise ParameterError(f"lorentz omega0 must be > 0, got {self.omega0!r}")
        if not self.gamma >= 0:
            raise ParameterError(f"lorentz gamma must be >= 0, got {self.gamma!r}")
        if not self.omegap >= 0:
            raise ParameterError(f"lorentz omegap must be >= 0, got {self.omegap!r}")

    @property
    def nu0(self):
        """``sqrt(omega0**2 - gamma**2/4)``, imaginary when overdamped."""
        return np.sqrt(complex(self.omega0 ** 2 - self.gamma ** 2 / 4))

    def _chi_pos(self, t):
        nu = self.nu0
        if nu == 0:
            osc = t
        else:
            osc = (np.sin(nu * t) / nu).real
        return self.omegap ** 2 * np.exp(-self.gamma * t / 2) * osc

    def chi_freq(self, omega):
        w = np.asarray(omega, dtype=float)
        den = self.omega0 ** 2 - w ** 2 - 1j * self.gamma * w
        if np.any(den == 0) and self.omegap != 0:
            raise SingularityError(
                f"lossless oscillator response is singular at omega = {self.omega0}")
        out = self.omegap ** 2 / np.where(den == 0, 1.0, den)
        out = np.where(den == 0, 0.0, out)
        return out if out.ndim else complex(out)

    def chi_laplace(self, s):
        s = np.asarray(s, dtype=complex)
        den = s ** 2 + self.gamma * s + self.omega0 ** 2
        if np.any(den == 0) and self.omegap != 0:
            raise PoleError("Lorentz image evaluated at a pole", pole=s[den == 0])
        out = self.omegap ** 2 / np.where(den == 0, 1.0, den)
        return out if out.ndim else complex(out)

    def rational_image(self):
        return RationalImage([self.omegap ** 2], [1.0, self.gamma, self.omega0 ** 2])

    @property
    def characteristic_frequency(self):
        return max(self.omega0, self.gamma)

    @property
    def decaying(self):
        return self.gamma > 0 or self.omegap == 0

    @property
    def is_lossless(self):
        return self.gamma == 0

    def params(self):
        return {"omega0": self.omega0, "gamma": self.gamma, "omegap": self.omegap}


def _interp_or_zero(x, xs, ys, extrapolate, what):
    """Linear interpolation; outside the samples zero (with a warning) or an error."""
    x = np.asarray(x, dtype=float)
    outside = (x < xs[0]) | (x > xs[-1])
    if np.any(outside):
        if not extrapolate:
            raise RangeError(f"{what} evaluated outside the sample range "
                             f"[{xs[0]:.6g}, {xs[-1]:.6g}]")
        warnings.warn(f"{what} evaluated outside its samples; returning 0 there",
                      ExtrapolationWarning, stacklevel=3)
    out = np.interp(x, xs, ys)
    return np.where(outside, 0.0, out)


def _check_samples(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ParameterError(f"{name} needs at least two samples")
    if not np.all(np.isfinite(x)):
        raise ParameterError(f"{name} samples must be finite")
    if np.any(np.diff(x) <= 0):
        raise ParameterError(f"{name} samples must be strictly increasing")
    return x


@dataclass(frozen=True, eq=False)
class TabulatedTime(SusceptibilityModel):
    """chi(t) sampled on increasing times, linear in between.

    Outside ``[t[0], t[-1]]`` (but for ``t > 0``) the response is taken as
    zero with an :class:`ExtrapolationWarning`, or a :class:`RangeError` when
    ``extrapolate`` is false. The transforms integrate the linear interpolant
    exactly.
    """

    t: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))
    chi: np.ndarray = field(default_factory=lambda: np.zeros(2))
    extrapolate: bool = True

    kind: ClassVar[str] = "tabulated-time"

    def __post_init__(self):
        super().__post_init__()
        t = _check_samples(self.t, "tabulated time")
        chi = np.asarray(self.chi, dtype=float)
        if chi.shape != t.shape or not np.all(np.isfinite(chi)):
            raise ParameterError("chi samples must be finite and match the time samples")
        if t[0] < 0:
            keep = t >= 0
            t, chi = t[keep], chi[keep]
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "chi", chi)

    def _chi_pos(self, t):
        return _interp_or_zero(t, self.t, self.chi, self.extrapolate, "tabulated chi(t)")

    def chi_freq(self, omega):
        w = np.asarray(omega, dtype=float)
        out = laplace_piecewise_linear(self.t, self.chi, -1j * w)
        return out if out.ndim else complex(out)

    def chi_laplace(self, s):
        s = np.asarray(s, dtype=complex)
        out = laplace_piecewise_linear(self.t, self.chi, s)
        return out if out.ndim else complex(out)

    @property
    def breakpoints(self):
        return tuple(self.t[[0, -1]])

    @property
    def support(self):
        return float(self.t[-1])

    @property
    def characteristic_frequency(self):
        return math.pi / float(np.min(np.diff(self.t)))

    def params(self):
        return {"t": self.t.tolist(), "chi": self.chi.tolist()}


@dataclass(frozen=True, eq=False)
class TabulatedFrequency(SusceptibilityModel):
    """chi(omega) sampled on increasing positive frequencies.

    ``chi_freq`` interpolates both parts linearly (conjugate symmetric for
    negative frequencies). The time response and the Laplace image are built
    from the imaginary part alone,
    ``chi(t) = (2/pi) int Im chi(w) sin(w t) dw``, which is the causal
    function whose absorption matches the table; the tabulated real part is
    used only by the consistency checks.
    """

    omega: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))
    re: np.ndarray = field(default_factory=lambda: np.zeros(2))
    im: np.ndarray = field(default_factory=lambda: np.zeros(2))
    extrapolate: bool = True

    kind: ClassVar[str] = "tabulated-frequency"

    def __post_init__(self):
        super().__post_init__()
        w = _check_samples(self.omega, "tabulated frequency")
        if w[0] < 0:
            raise ParameterError("tabulated frequencies must be >= 0")
        re = np.asarray(self.re, dtype=float)
        im = np.asarray(self.im, dtype=float)
        if re.shape != w.shape or im.shape != w.shape:
            raise ParameterError("re/im samples must match the frequency samples")
        if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
            raise ParameterError("re/im samples must be finite")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def chi_freq(self, omega):
        w = np.asarray(omega, dtype=float)
        a = np.abs(w)
        re = _interp_or_zero(a, self.omega, self.re, self.extrapolate, "tabulated chi(omega)")
        im = _interp_or_zero(a, self.omega, self.im, self.extrapolate, "tabulated chi(omega)")
        out = re + 1j * np.sign(np.where(w == 0, 1.0, w)) * im
        return out if out.ndim else complex(out)

    def _chi_pos(self, t):
        four = laplace_piecewise_linear(self.omega, self.im, -1j * t)
        return 2 / np.pi * four.imag

    def chi_laplace(self, s):
        """``(2/pi) int Im chi(w) w/(w**2 + s**2) dw`` for the linear interpolant."""
        s = np.asarray(s, dtype=complex)
        if np.any(s.real <= 0):
            raise ParameterError("tabulated Laplace image needs Re(s) > 0")
        w = self.omega
        a_, b_ = w[:-1], w[1:]
        ya, yb = self.im[:-1], self.im[1:]
        slope = (yb - ya) / (b_ - a_)
        icpt = ya - slope * a_
        ss = s[..., None]
        # int w/(w^2+s^2) = log(w^2+s^2)/2 ; int w^2/(w^2+s^2) = w - s^2 int 1/(w^2+s^2)
        # int 1/(w^2+s^2) = [log(w - i s) - log(w + i s)]/(2 i s), branch-continuous
        # for real w because Im(w -+ i s) keeps a fixed sign when Re s > 0
        L1 = 0.5 * (np.log(b_ ** 2 + ss ** 2) - np.log(a_ ** 2 + ss ** 2))
        atan = ((np.log(b_ - 1j * ss) - np.log(b_ + 1j * ss))
                - (np.log(a_ - 1j * ss) - np.log(a_ + 1j * ss))) / (2j * ss)
        L2 = (b_ - a_) - ss ** 2 * atan
        out = 2 / np.pi * np.sum(icpt * L1 + slope * L2, axis=-1)
        return out if out.ndim else complex(out)

    @property
    def breakpoints(self):
        return ()

    @property
    def characteristic_frequency(self):
        return float(self.omega[-1])

    def params(self):
        return {"omega": self.omega.tolist(), "re_chi": self.re.tolist(),
                "im_chi": self.im.tolist()}


def model_from_dict(d):
    """Build a model from ``{"kind": ..., "role": ..., <parameters>}``."""
    d = dict(d)
    kind = d.pop("kind", None)
    role = d.pop("role", "electric")
    try:
        if kind == "vacuum":
            return Vacuum(role=role)
        if kind == "box":
            return Box(role=role, chi0=float(d["chi0"]), delta=float(d["delta"]))
        if kind == "step":
            return Step(role=role, beta=float(d["beta"]))
        if kind == "lorentz":
            return Lorentz(role=role, omega0=float(d["omega0"]), gamma=float(d.get("gamma", 0.0)),
                           omegap=float(d["omegap"]))
        if kind == "tabulated-time":
            return TabulatedTime(role=role, t=np.asarray(d["t"], float),
                                 chi=np.asarray(d["chi"], float))
        if kind == "tabulated-frequency":
            return TabulatedFrequency(role=role, omega=np.asarray(d["omega"], float),
                                      re=np.asarray(d["re_chi"], float),
                                      im=np.asarray(d["im_chi"], float))
    except KeyError as exc:
        raise ParameterError(f"model {kind!r} is missing parameter {exc.args[0]!r}") from None
    raise ParameterError(f"unknown model kind {kind!r}")


def read_susceptibility_csv(path, role="electric", extrapolate=True):
    """Read a tabulated model from CSV.

    The header selects the domain: ``omega,re_chi,im_chi`` or ``t,chi``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParameterError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ParameterError(f"{path}: {exc}") from None
    if header == ["omega", "re_chi", "im_chi"]:
        if data.ndim != 2 or data.shape[1] != 3:
            raise ParameterError(f"{path}: expected three columns")
        return TabulatedFrequency(role=role, omega=data[:, 0], re=data[:, 1], im=data[:, 2],
                                  extrapolate=extrapolate)
    if header == ["t", "chi"]:
        if data.ndim != 2 or data.shape[1] != 2:
            raise ParameterError(f"{path}: expected two columns")
        return TabulatedTime(role=role, t=data[:, 0], chi=data[:, 1], extrapolate=extrapolate)
    raise ParameterError(f"{path}: header must be 'omega,re_chi,im_chi' or 't,chi', "
                         f"got {','.join(header)!r}")


def chi_time(model, t):
    """chi(t); exactly zero for ``t <= 0``."""
    return model.chi_time(t)


def chi_freq(model, omega):
    """One-sided Fourier transform ``int_0^inf chi(t) exp(i omega t) dt``."""
    return model.chi_freq(omega)


def chi_laplace(model, s):
    """Laplace image ``chi~(s)``."""
    return model.chi_laplace(s)


# ---------------------------------------------------------------------------
# dispersion relations

@dataclass(frozen=True)
class DispersionRelation:
    """Strictly increasing bath dispersion ``omega(|k|)``."""

    kind: ClassVar[str] = "base"

    def omega(self, k):
        raise NotImplementedError

    def domega_dk(self, k):
        raise NotImplementedError

    def k_of_omega(self, omega):
        raise NotImplementedError

    def dk3_domega(self, omega):
        """``d|k|**3/d omega = 3 k**2 / (d omega/d k)`` at ``k = k(omega)``.

        Raises
        ------
        UnphysicalDispersionError
            Where ``d omega / d k`` is not positive.
        """
        k = self.k_of_omega(omega)
        g = np.asarray(self.domega_dk(k), dtype=float)
        if np.any(~(g > 0)):
            raise UnphysicalDispersionError(
                "d omega/d|k| must be positive wherever the coupling is needed")
        return 3 * k ** 2 / g

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(DispersionRelation):
    """``omega = c |k|``."""

    c: float = 1.0
    kind: ClassVar[str] = "linear"

    def __post_init__(self):
        if not self.c > 0:
            raise UnphysicalDispersionError("linear dispersion needs c > 0")

    def omega(self, k):
        return self.c * np.asarray(k, dtype=float)

    def domega_dk(self, k):
        return np.full(np.shape(k), self.c)

    def k_of_omega(self, omega):
        return np.asarray(omega, dtype=float) / self.c

    def to_dict(self):
        return {"kind": "linear", "c": self.c}


@dataclass(frozen=True)
class PowerLaw(DispersionRelation):
    """``omega = a |k|**p``."""

    a: float = 1.0
    p: float = 1.0
    kind: ClassVar[str] = "power-law"

    def __post_init__(self):
        if not (self.a > 0 and self.p > 0):
            raise UnphysicalDispersionError(
                "power-law dispersion a|k|^p is increasing only for a > 0 and p > 0")

    def omega(self, k):
        return self.a * np.asarray(k, dtype=float) ** self.p

    def domega_dk(self, k):
        k = np.asarray(k, dtype=float)
        return self.a * self.p * k ** (self.p - 1)

    def k_of_omega(self, omega):
        return (np.asarray(omega, dtype=float) / self.a) ** (1.0 / self.p)

    def to_dict(self):
        return {"kind": "power-law", "a": self.a, "p": self.p}


def dispersion_from_dict(d):
    kind = d.get("kind")
    if kind == "linear":
        return Linear(float(d.get("c", 1.0)))
    if kind == "power-law":
        return PowerLaw(float(d["a"]), float(d["p"]))
    raise ParameterError(f"unknown dispersion kind {kind!r}")


# ---------------------------------------------------------------------------
# Kramers-Kronig reconstruction and admissibility checks

def _pv_half_width(model, omega):
    if isinstance(model, Lorentz) and model.gamma > 0:
        return model.gamma / 10
    if isinstance(model, TabulatedFrequency):
        i = np.searchsorted(model.omega, omega)
        i = min(max(i, 1), len(model.omega) - 1)
        return float(model.omega[i] - model.omega[i - 1])
    return 1e-2 * omega


def kk_real_from_imag(model, omega, omega_max=None, tol=1e-6, full_output=False):
    """Re chi(omega) from Im chi through the principal-value dispersion integral.

    ``Re chi(w) = (2/pi) PV int_0^inf Im chi(w') w'/(w'**2 - w**2) dw'``.
    Around ``w' = w`` a symmetric panel of half-width ``gamma/10`` (grid step
    for tabulated data) is integrated after subtracting the pole term; the
    rest goes to adaptive quadrature up to ``omega_max``. Beyond the cutoff
    the tail is estimated from a power-law fit of the last decade of Im chi;
    for a box its non-oscillating part is added in closed form instead.

    Parameters
    ----------
    omega : float
    omega_max : float, optional
        Default is ``100 * max(omega, characteristic frequency)``, or the last
        sample of a frequency table.
    tol : float
        Tail estimates above ``tol`` raise an :class:`AccuracyWarning`.

    Returns
    -------
    float, or (float, dict) with ``full_output`` (keys ``tail_estimate``,
    ``quad_error``, ``omega_max``, ``accuracy_warning``).
    """
    w = float(omega)
    if not w > 0:
        raise ParameterError("kk_real_from_imag needs omega > 0")
    if omega_max is None:
        if isinstance(model, TabulatedFrequency):
            omega_max = float(model.omega[-1])
        else:
            omega_max = 100.0 * max(w, model.characteristic_frequency, 1.0)
    omega_max = float(omega_max)
    if omega_max <= w:
        raise ParameterError("omega_max must exceed omega")

    def im(x):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExtrapolationWarning)
            return np.asarray(model.chi_freq(np.asarray(x, dtype=float))).imag

    def g(x):
        x = np.asarray(x, dtype=float)
        return im(x) * x / (x + w)

    h = min(_pv_half_width(model, w), 0.5 * w, 0.5 * (omega_max - w))
    x, wt = gauss_legendre(32)
    # symmetric panel: PV int (g(x)-g(w))/(x-w) ; the subtracted term integrates to zero
    left = w - h + h * x
    right = w + h * x
    g0 = float(g(np.array([w]))[0])
    mid = h * (np.sum(wt * (g(left) - g0) / (left - w)) + np.sum(wt * (g(right) - g0) / (right - w)))
    integrand = lambda xx: float(g(np.array([xx]))[0]) / (xx - w)
    pts_l = _quad_points(model, 0.0, w - h)
    pts_r = _quad_points(model, w + h, omega_max)
    v1, e1 = integrate.quad(integrand, 0.0, w - h, points=pts_l, limit=400, epsabs=1e-13, epsrel=1e-12)
    v2, e2 = integrate.quad(integrand, w + h, omega_max, points=pts_r, limit=800,
                            epsabs=1e-13, epsrel=1e-12)
    total = 2 / np.pi * (mid + v1 + v2)
    # tail beyond omega_max: Im chi ~ A w^-p there, integrand ~ A w^-(p+1)
    xs = omega_max * np.array([0.1, 0.3, 1.0])
    ys = np.abs(im(xs))
    tail = 0.0
    if isinstance(model, Box):
        # Im chi = chi0 (1 - cos wD)/(wD): the smooth part of the tail
        # integrates in closed form; the cosine part is bounded by the estimate
        total += 2 / np.pi * model.chi0 / model.delta * math.atanh(w / omega_max) / w
        tail = 2 / np.pi * model.chi0 / (model.delta ** 2 * (omega_max ** 2 - w ** 2))
    elif ys[-1] > 0:
        pos = ys > 0
        p = -np.polyfit(np.log(xs[pos]), np.log(ys[pos]), 1)[0] if pos.sum() >= 2 else 0.0
        p = max(p, 1e-3)
        tail = 2 / np.pi * ys[-1] / p * omega_max ** 2 / (omega_max ** 2 - w ** 2)
    warn = tail > tol
    if warn:
        warnings.warn(f"KK tail beyond omega_max={omega_max:.4g} estimated at {tail:.3g}",
                      AccuracyWarning, stacklevel=2)
    if full_output:
        return total, {"tail_estimate": float(tail), "quad_error": float(e1 + e2),
                       "omega_max": omega_max, "half_width": h, "accuracy_warning": bool(warn)}
    return total


def _quad_points(model, a, b):
    cand = []
    if isinstance(model, Lorentz):
        cand = [model.omega0]
    elif isinstance(model, Box):
        cand = list(np.arange(1, 50) * 2 * math.pi / model.delta)
    elif isinstance(model, TabulatedFrequency):
        cand = list(model.omega[:: max(1, len(model.omega) // 50)])
    pts = [c for c in cand if a < c < b]
    return pts or None


@dataclass
class ValidationReport:
    """Result of :func:`check_causality_passivity`."""

    model: dict
    violations: list

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {"model": self.model, "ok": self.ok, "violations": self.violations}


def check_causality_passivity(model, grid, atol=1e-14):
    """Report grid points violating causality or passivity.

    Causality is checked as ``chi(-x) == 0`` and ``chi(0) == 0`` exactly for
    every ``x`` in the (absolute) grid; passivity as
    ``Im chi(omega) >= -atol * max(1, |chi|)`` for ``omega > 0`` in the grid,
    plus every imaginary sample of a frequency table.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ParameterError("validation grid is empty")
    violations = []
    times = np.concatenate([[0.0], -np.abs(grid)])
    vals = np.atleast_1d(model.chi_time(times))
    for x, v in zip(times, vals):
        if v != 0:
            violations.append({"check": "causality", "t": float(x), "value": float(v)})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExtrapolationWarning)
        ws = grid[grid > 0]
        try:
            chi = np.atleast_1d(model.chi_freq(ws))
        except SingularityError as exc:
            chi = None
            violations.append({"check": "passivity", "omega": None, "value": None,
                               "note": str(exc)})
    if chi is not None:
        bad = chi.imag < -atol * np.maximum(1.0, np.abs(chi))
        for x, c in zip(ws[bad], chi[bad]):
            violations.append({"check": "passivity", "omega": float(x), "value": float(c.imag)})
    if isinstance(model, TabulatedFrequency):
        seen = {v["omega"] for v in violations if v["check"] == "passivity"}
        for x, v in zip(model.omega, model.im):
            if x > 0 and v < 0 and float(x) not in seen:
                violations.append({"check": "passivity", "omega": float(x), "value": float(v),
                                   "note": "tabulated sample"})
    return ValidationReport(model=model.to_dict(), violations=violations)
