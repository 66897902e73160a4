"""Field-evolution kernels Z, zeta, eta, Q and their validators.

With ``D(s) = s^2 (1 + chie~(s)) + wq^2 (1 - chim~(s))`` the Laplace images
are::

    Z     = (s (1 + chie~) -+ i wq) / D
    zeta  = f(wk) s / ((s +- i wk) D)
    eta   = g(wk)   / ((s +- i wk) D)
    Q     = 1 / ((1 + chie~) (s +- i wk))

The upper signs give the forward kernels. The lower signs give the
backward kernels, which are stored on the same grid ``tau >= 0`` and hold
the backward solution evaluated at ``t = -tau``.

Couplings ``f``, ``g`` enter as the non-negative square roots of the
squared magnitudes from :mod:`maxdiq.coupling`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import signal

from .coupling import coupling_from_chi, delta_coupling
from .errors import (
    InconclusiveError,
    LosslessCouplingError,
    ParameterError,
    ResolutionError,
    ResonanceError,
    UnsupportedConfigurationError,
)
from .laplace import (
    ContourParams,
    RationalImage,
    invert_contour,
)
from .medium import Lorentz, PhysicalConstants, SusceptibilityModel, Vacuum
from .quadrature import gauss_legendre

__all__ = [
    "KernelRequest",
    "KernelSeries",
    "DecayCheck",
    "kernel_Z",
    "kernel_zeta",
    "kernel_eta",
    "kernel_Q",
    "kernel",
    "ode_residual",
    "residual_grid",
    "energy_invariant",
    "asymptotic_decay_check",
    "uniform_grid",
]

KINDS = ("Z", "zeta", "eta", "Q")
#: distance (rad/time) within which a bath frequency counts as resonant in Q
RESONANCE_TOL = 1e-6


def uniform_grid(t_max, n):
    """``n`` equally spaced times on ``[0, t_max]``."""
    if not (t_max > 0 and n >= 2):
        raise ParameterError("grid needs t_max > 0 and at least two points")
    return np.linspace(0.0, float(t_max), int(n))


@dataclass(frozen=True, eq=False)
class KernelRequest:
    """Inputs of a kernel evaluation.

    Attributes
    ----------
    electric, magnetic : SusceptibilityModel
    omega_q : float
        Mode frequency (Z, zeta, eta).
    omega_k : float
        Bath frequency (zeta, eta, Q).
    sign : int
        ``+1`` forward, ``-1`` backward.
    t : ndarray
        Uniform grid starting at 0.
    constants : PhysicalConstants
    method : {"auto", "residue", "contour"}
        ``auto`` uses residues when both susceptibilities are rational.
    contour : ContourParams, optional
    coupling : float, optional
        Overrides the squared coupling ``|f(wk)|^2`` or ``|g(wk)|^2``.
    """

    electric: SusceptibilityModel = field(default_factory=Vacuum)
    magnetic: SusceptibilityModel = field(default_factory=lambda: Vacuum(role="magnetic"))
    omega_q: float = 1.0
    omega_k: float = 0.0
    sign: int = 1
    t: np.ndarray = field(default_factory=lambda: uniform_grid(20.0, 2048))
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    method: str = "auto"
    contour: ContourParams | None = None
    coupling: float | None = None

    def __post_init__(self):
        if self.electric.role != "electric" or self.magnetic.role != "magnetic":
            raise ParameterError("electric/magnetic models must carry matching roles")
        if not (self.omega_q >= 0 and self.omega_k >= 0):
            raise ParameterError("omega_q and omega_k must be >= 0")
        if self.sign not in (1, -1):
            raise ParameterError("sign must be +1 or -1")
        if self.method not in ("auto", "residue", "contour"):
            raise ParameterError(f"unknown method {self.method!r}")
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2 or t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ParameterError("time grid must be strictly increasing and start at 0")
        object.__setattr__(self, "t", t)

    def to_dict(self):
        t = self.t
        return {
            "electric": self.electric.to_dict(),
            "magnetic": self.magnetic.to_dict(),
            "omega_q": self.omega_q,
            "omega_k": self.omega_k,
            "sign": self.sign,
            "grid": {"t_min": float(t[0]), "t_max": float(t[-1]), "n": int(t.size)},
            "constants": self.constants.to_dict(),
            "method": self.method,
        }


@dataclass(frozen=True, eq=False)
class KernelSeries:
    """A kernel sampled on a time grid.

    ``derivative`` holds the exact time derivative when the route provides
    one (residues, closed forms). ``persistent`` is the undamped part
    ``amplitude * exp(pole t)`` coming from the bath pole, when present.
    """

    kind: str
    sign: int
    t: np.ndarray
    values: np.ndarray
    method: str
    accuracy: float = 0.0
    derivative: np.ndarray | None = None
    persistent: tuple | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")

    def persistent_part(self):
        if self.persistent is None:
            return np.zeros_like(self.values)
        amp, pole = self.persistent
        return amp * np.exp(pole * self.t)

    def write_csv(self, path):
        from .io import write_csv
        write_csv(path, ["t", "re", "im"], [self.t, self.values.real, self.values.imag])

    def to_dict(self, include_values=True):
        d = {
            "kind": self.kind,
            "sign": self.sign,
            "method": self.method,
            "accuracy": self.accuracy,
            "metadata": self.metadata,
        }
        if self.persistent is not None:
            d["persistent"] = {"amplitude": self.persistent[0], "pole": self.persistent[1]}
        if include_values:
            d["t"] = self.t
            d["re"] = self.values.real
            d["im"] = self.values.imag
        return d


# ---------------------------------------------------------------------------
# image construction

def _rational_parts(model):
    img = model.rational_image()
    if img is None:
        return None
    return np.asarray(img.num, dtype=complex), np.asarray(img.den, dtype=complex)


def _rational_images(req):
    """Images of all kernels as rational functions (without coupling factors)."""
    pe, pm = _rational_parts(req.electric), _rational_parts(req.magnetic)
    if pe is None or pm is None:
        return None
    Ne, De = pe
    Nm, Dm = pm
    wq, wk, sg = req.omega_q, req.omega_k, req.sign
    s = np.array([1.0, 0.0])
    one_e = np.polyadd(De, Ne)
    bottom = np.polyadd(np.polymul(np.polymul([1.0, 0.0, 0.0], one_e), Dm),
                        wq ** 2 * np.polymul(np.polysub(Dm, Nm), De))
    z_top = np.polymul(np.polysub(np.polymul(s, one_e), sg * 1j * wq * De), Dm)
    bath = np.array([1.0, sg * 1j * wk])
    DeDm = np.polymul(De, Dm)
    return {
        "Z": RationalImage(z_top, bottom).reduced(),
        "zeta": RationalImage(np.polymul(s, DeDm), np.polymul(bath, bottom)).reduced(),
        "eta": RationalImage(DeDm, np.polymul(bath, bottom)).reduced(),
        "Q": RationalImage(De, np.polymul(one_e, bath)).reduced(),
        "one_plus_chie": (one_e, De),
    }


def _callable_images(req):
    ce, cm = req.electric.chi_laplace, req.magnetic.chi_laplace
    wq, sg = req.omega_q, req.sign

    def D(s):
        return s * s * (1 + ce(s)) + wq ** 2 * (1 - cm(s))

    return {
        "Z": lambda s: (s * (1 + ce(s)) - sg * 1j * wq) / D(s),
        # bath factor 1/(s +- i wk) is split off; see _invert_with_bath_pole
        "zeta": lambda s: s / D(s),
        "eta": lambda s: 1 / D(s),
        "Q": lambda s: 1 / (1 + ce(s)),
    }


def _coupling_amplitude(req, kind):
    """``sqrt(|f(wk)|^2)`` or ``sqrt(|g(wk)|^2)``; ``None`` for a delta weight."""
    model = req.electric if kind == "zeta" else req.magnetic
    if req.coupling is not None:
        return math.sqrt(req.coupling), {"coupling_source": "request"}
    if isinstance(model, Vacuum):
        return 0.0, {"coupling_source": "vacuum"}
    if req.omega_k == 0:
        return 0.0, {"coupling_source": "boundary value at omega_k = 0"}
    try:
        f2 = coupling_from_chi(model, req.omega_k, req.constants)
    except LosslessCouplingError:
        dc = delta_coupling(model, req.constants)
        return None, {"coupling_source": "delta", "delta_coupling": dc.to_dict(),
                      "note": "coupling is a delta weight at omega0; the series is the bare "
                              "inverse transform and must be integrated against that weight"}
    return math.sqrt(f2), {"coupling_source": "numerical sine transform", "coupling_squared": f2}


def _start_value_scale(req):
    rates = [1.0, req.omega_q, req.omega_k]
    for m in (req.electric, req.magnetic):
        rates.append(m.characteristic_frequency)
    return 1e4 * max(rates)


def _freq_hint(req):
    # only oscillations that survive in the kernel matter here; the box
    # width sets no oscillation frequency of its own
    rates = [req.omega_q, req.omega_k]
    for m in (req.electric, req.magnetic):
        if isinstance(m, Lorentz):
            rates.append(math.hypot(m.omega0, m.omegap))
    return max(rates)


def _check_lossless(req):
    for m in (req.electric, req.magnetic):
        if m.rational_image() is None and m.is_lossless:
            raise UnsupportedConfigurationError(
                f"lossless non-rational {m.kind!r} medium: its kernels have undamped "
                "oscillations and no residue form")


def _resonance_guard(req, one_e=None):
    """Q has a double pole when the bath frequency hits a zero of 1 + chie~."""
    p = -req.sign * 1j * req.omega_k
    if one_e is not None:
        num, _ = one_e
        zeros = np.roots(np.trim_zeros(num, "f")) if len(np.trim_zeros(num, "f")) > 1 else []
        for z in zeros:
            if abs(z - p) <= RESONANCE_TOL:
                raise ResonanceError(
                    f"omega_k = {req.omega_k!r} is within {RESONANCE_TOL} of the longitudinal "
                    f"resonance at {float(abs(z.imag))!r}", frequency=float(abs(z.imag)))
        return
    if p == 0:
        return
    v = 1 + req.electric.chi_laplace(p)
    if abs(v) <= RESONANCE_TOL:
        raise ResonanceError(
            f"1 + chie~ nearly vanishes at omega_k = {req.omega_k!r}", frequency=req.omega_k)


def _invert_residue(image, t):
    pf = image.partial_fractions()
    vals = pf.evaluate(t)
    der = pf.evaluate(t, derivative=1)
    info = {"poles": [[float(p.real), float(p.imag)] for p in pf.poles],
            "multiplicities": [len(a) for a in pf.terms],
            "root_residual": pf.condition}
    return vals, der, pf, info


def _invert_with_bath_pole(G, p, t, params, s0, freq):
    """Inverse of ``G(s)/(s - p)`` for a pole ``p`` on the imaginary axis.

    ``G(p) exp(p t)`` is taken out exactly and the remainder
    ``(G(s) - G(p))/(s - p)`` is regular at ``p`` and goes to the contour.
    """
    Gp = complex(G(np.array([p]))[0]) if callable(G) else complex(G)
    rest = lambda s: (G(s) - Gp) / (s - p)
    vals, info = invert_contour(rest, t[t > 0], params, full_output=True, frequency=freq)
    out = np.empty(t.shape, dtype=complex)
    out[t > 0] = vals
    # rest(s) ~ G(s)/s for large s, so rest's initial value is lim G(s)
    ss = s0 * np.array([1.0, 2.0, 4.0])
    g = np.array([complex(G(np.array([x]))[0]) for x in ss])
    r1 = 2 * g[1] - g[0]
    r2 = 2 * g[2] - g[1]
    out[t == 0] = (4 * r2 - r1) / 3 - Gp
    return out + Gp * np.exp(p * t), Gp, info


def kernel(req, kind):
    """Evaluate kernel ``kind`` (``"Z"``, ``"zeta"``, ``"eta"`` or ``"Q"``)."""
    if kind not in KINDS:
        raise ParameterError(f"unknown kernel kind {kind!r}")
    _check_lossless(req)
    t = req.t
    p = -req.sign * 1j * req.omega_k
    meta = {"request": req.to_dict(), "coupling_phase": "real, non-negative square root"}
    amp = 1.0
    if kind in ("zeta", "eta"):
        amp, cmeta = _coupling_amplitude(req, kind)
        meta.update(cmeta)
    if amp is None:
        amp = 1.0
        meta["delta"] = True
    rational = _rational_images(req)
    method = req.method
    if method == "auto":
        method = "residue" if rational is not None else "contour"
    if kind == "Q":
        _resonance_guard(req, rational["one_plus_chie"] if rational is not None else None)
    if method == "residue":
        if rational is None:
            raise UnsupportedConfigurationError(
                "residue inversion needs rational susceptibilities; "
                f"got {req.electric.kind!r}/{req.magnetic.kind!r}")
        image = rational[kind]
        if amp == 0:
            vals = np.zeros(t.shape, dtype=complex)
            der = np.zeros(t.shape, dtype=complex)
            info, persistent = {"poles": []}, None
        else:
            vals, der, pf, info = _invert_residue(image, t)
            vals, der = amp * vals, amp * der
            persistent = None
            if kind != "Z":
                persistent = (amp * pf.residue_at(p, tol=1e-9), p)
        meta.update(info)
        return KernelSeries(kind, req.sign, t, vals, "residue", accuracy=float(info.get("root_residual", 0.0)),
                            derivative=der, persistent=persistent, metadata=meta)
    # contour route
    params = req.contour or ContourParams()
    s0 = _start_value_scale(req)
    freq = _freq_hint(req)
    if amp == 0:
        vals = np.zeros(t.shape, dtype=complex)
        return KernelSeries(kind, req.sign, t, vals, "contour", metadata=meta,
                            persistent=(0j, p))
    if rational is not None:
        img = rational[kind]
        if kind == "Z":
            vals, info = invert_contour(img, t, params, full_output=True)
            persistent = None
        else:
            # take the bath pole out of the rational image
            G = RationalImage(np.polymul(img.num, [1.0, -p]), img.den).reduced()
            vals, Gp, info = _invert_with_bath_pole(G, p, t, params, s0, freq)
            persistent = (amp * Gp, p)
    else:
        images = _callable_images(req)
        if kind == "Z":
            F = images["Z"]
            vals, info = invert_contour(F, t[t > 0], params, full_output=True, frequency=freq)
            vals = np.concatenate([[1.0 + 0j], vals])
            persistent = None
        else:
            vals, Gp, info = _invert_with_bath_pole(images[kind], p, t, params, s0, freq)
            persistent = (amp * Gp, p)
    vals = amp * np.asarray(vals)
    meta.update({k: v for k, v in info.items()})
    return KernelSeries(kind, req.sign, t, vals, "contour",
                        accuracy=float(info.get("error_estimate", 0.0)),
                        persistent=persistent, metadata=meta)


def kernel_Z(req):
    """Mode kernel Z on the request grid.

    The value at ``t = 0`` is 1 by the initial-value theorem, and the
    contour route sets it exactly.
    """
    return kernel(req, "Z")


def kernel_zeta(req):
    """Electric-bath kernel zeta."""
    return kernel(req, "zeta")


def kernel_eta(req):
    """Magnetic-bath kernel eta."""
    return kernel(req, "eta")


def kernel_Q(req):
    """Longitudinal kernel Q.

    Raises
    ------
    ResonanceError
        If ``omega_k`` lies within ``RESONANCE_TOL`` of a zero of
        ``1 + chie~(s)`` on the imaginary axis.
    """
    return kernel(req, "Q")


# ---------------------------------------------------------------------------
# validators

def _d1(y, h):
    """Fourth-order central first derivative (interior points valid)."""
    d = np.zeros_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    return d


def _d2(y, h):
    d = np.zeros_like(y)
    d[2:-2] = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)
    return d


#: nodes of the local interpolant used by the convolutions (degree + 1)
_NODES = 6


@lru_cache(maxsize=128)
def _interp_matrix(offsets):
    """Rows map samples at ``offsets`` to monomial coefficients in ``u``."""
    x = np.asarray(offsets, dtype=float)
    return np.linalg.inv(np.vander(x, x.size, increasing=True))


def _crosses(lo, hi, kinks):
    return any(lo < k < hi for k in kinks)


def _cell_coeffs(y, kinks, p=_NODES):
    """Local polynomial coefficients per cell from stencils avoiding ``kinks``.

    Returns ``c`` of shape ``(n-1, p)`` in the local variable ``u`` of each
    cell, and a list ``(j, us, cL, cR)`` of cells that contain a kink at
    ``u = us``, with the one-sided polynomials on either side.
    """
    n = y.size
    if n < p + 2:
        raise ResolutionError(f"need at least {p + 2} grid points")
    c = np.empty((n - 1, p), dtype=complex)
    s0 = -(p // 2 - 1)
    j = np.arange(n - 1)
    first = np.clip(j + s0, 0, n - p)
    # rows use stencils shifted into range at both ends
    for shift in np.unique(first - j):
        rows = j[(first - j) == shift]
        o = tuple(range(int(shift), int(shift) + p))
        M = _interp_matrix(o)
        c[rows] = np.stack([y[rows + k] for k in o], axis=1) @ M.T
    splits = []
    near = set()
    for k in kinks:
        near |= set(range(max(0, int(k) - p), min(n - 1, int(k) + p + 1)))
    for j in sorted(near):
        inside = [k for k in kinks if j < k < j + 1]
        if inside:
            left = tuple(range(1 - p, 1))
            right = tuple(range(1, p + 1))
            if j + left[0] < 0 or j + right[-1] >= n:
                continue
            if _crosses(j + left[0], j, kinks) or _crosses(j + 1, j + right[-1], kinks):
                continue
            cL = _interp_matrix(left) @ y[j + np.asarray(left)]
            cR = _interp_matrix(right) @ y[j + np.asarray(right)]
            splits.append((j, inside[0] - j, cL, cR))
            continue
        for start in [s0 + d for d in (0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5)]:
            if start > 0 or start + p - 1 < 1:
                continue
            lo, hi = j + start, j + start + p - 1
            if lo < 0 or hi >= n or _crosses(lo, hi, kinks):
                continue
            o = tuple(range(start, start + p))
            c[j] = _interp_matrix(o) @ y[j + np.asarray(o)]
            break
    return c, splits


def _moments(model, h, n, lo=0.0, hi=1.0, p=_NODES, order=20):
    """``mu_a(m) = int_lo^hi chi(h (m - u)) u^a du`` for lags ``m = 1..n``."""
    x, w = gauss_legendre(order)
    m = np.arange(1, n + 1)[:, None]
    L = hi - lo
    uu = lo + L * x
    pw = np.arange(p)
    vals = np.asarray(model.chi_time(h * (m - uu[None, :])), dtype=float)
    mu = (vals * w[None, :]) @ (uu[:, None] ** pw[None, :]) * L
    # lags whose window contains a jump of chi are redone piecewise
    for b in model.breakpoints:
        mb = int(math.ceil(b / h + lo))
        ub = mb - b / h
        if 1 <= mb <= n and lo + 1e-12 < ub < hi - 1e-12:
            mu[mb - 1] = 0.0
            for a0, a1 in ((lo, ub), (ub, hi)):
                u2 = a0 + (a1 - a0) * x
                v2 = np.asarray(model.chi_time(h * (mb - u2)), dtype=float)
                mu[mb - 1] += (a1 - a0) * ((w * v2) @ (u2[:, None] ** pw))
    return mu


def _nodes_for(kinks):
    """Interpolant size, after checking that one-sided stencils fit between kinks."""
    ks = sorted(kinks)
    gap = min((b - a for a, b in zip(ks, ks[1:])), default=np.inf)
    gap = min(gap, ks[0]) if ks else gap
    if gap >= _NODES + 1:
        return _NODES
    raise ResolutionError(
        f"jump times of the susceptibility are {gap:.2f} grid steps apart; "
        f"need {_NODES + 1}")


def _memory(model, y, h, kinks=()):
    """``int_0^t chi(t - t') y(t') dt'`` on the grid by product integration.

    ``y`` is replaced on each cell by a local quintic interpolant (one-sided
    next to the ``kinks``, split at a kink inside a cell) and integrated
    exactly against ``chi`` with Gauss-Legendre moments, so jumps of ``chi``
    cost no accuracy.
    """
    n = y.size
    if isinstance(model, Vacuum):
        return np.zeros_like(y)
    p = _nodes_for(kinks)
    c, splits = _cell_coeffs(y, kinks, p)
    mu = _moments(model, h, n - 1, p=p)
    out = np.zeros(n, dtype=complex)
    for a in range(c.shape[1]):
        conv = signal.fftconvolve(c[:, a], mu[:, a])
        out[1:] += h * conv[: n - 1]
    for j, us, cL, cR in splits:
        # replace the whole-cell contribution of cell j by its two halves
        lags = np.arange(1, n - j)
        muL = _moments(model, h, lags.size, 0.0, us, p=p)
        muR = _moments(model, h, lags.size, us, 1.0, p=p)
        corr = muL @ cL + muR @ cR - mu[: lags.size] @ c[j]
        out[j + lags] += h * corr
    return out


def _check_uniform(t):
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
        raise ParameterError("the validators need a uniform time grid")
    return float(h)


def _jump(model, b):
    """Size of the jump of chi at ``b``."""
    return abs(float(model.chi_time(b * (1 - 1e-9))) - float(model.chi_time(b * (1 + 1e-9))))


def _kink_times(electric, magnetic, h, t_max, floor=1e-9):
    """Times where Z loses smoothness, and how deep the cascade is followed.

    A jump ``J`` of chi at ``b`` makes the ``(k+1)``-th derivative of Z jump
    at ``k b`` by roughly ``(J h)^k / h`` in units a fourth-order stencil
    feels; multiples are tracked until that falls below ``floor``.
    """
    base = {}
    for m in (electric, magnetic):
        bps = [b for b in m.breakpoints if b > 0]
        if len(bps) > 4:
            # densely tabulated kernels: too many kinks to track, none masked
            return []
        for b in bps:
            base[b] = max(base.get(b, 0.0), _jump(m, b))
    if not base:
        return []
    jh = min(max(base.values()) * h, 0.999)
    depth = max(4, int(math.ceil(math.log(floor * h) / math.log(jh)))) if jh > 0 else 4
    times = {0.0}
    out = set()
    for _ in range(depth):
        times = {a + b for a in times for b in base if a + b <= t_max}
        if not times:
            break
        out |= times
    return sorted(out)


def residual_grid(omega_q, electric=None, magnetic=None, t_max=None, points_per_period=80):
    """Uniform grid suited to :func:`ode_residual`.

    ``points_per_period`` samples per period of the faster of ``omega_q``
    and the media's oscillator frequencies, over ``t_max`` (default: 40
    over that frequency). Finer grids only add amplified inversion error.
    """
    rates = [omega_q] + [m.omega0 for m in (electric, magnetic) if isinstance(m, Lorentz)]
    fastest = max(rates)
    if not fastest > 0:
        raise ParameterError("residual_grid needs a positive frequency")
    t_max = float(t_max) if t_max is not None else 40.0 / fastest
    n = max(64, int(math.ceil(points_per_period * t_max * fastest / (2 * math.pi)))) + 1
    return uniform_grid(t_max, n)


def ode_residual(Z, electric, magnetic, omega_q, min_points_per_period=40, full_output=False):
    """Largest residual of the homogeneous mode equation along a computed Z.

    ``R = Z'' + wq^2 Z + d/dt (chie * Z') - wq^2 chim * Z`` with ``*`` the
    causal convolution. The electric memory term is rewritten as
    ``d^2/dt^2 (chie * Z) - chie'(t) Z(0)``, so only the values of Z are
    used. Derivatives are fourth-order central differences, and the
    convolutions are product integrals of the exact kernel against local
    quintic interpolants of Z.

    When a susceptibility jumps (a box), Z loses one order of smoothness at
    each sum of jump times. Interpolation stencils are then taken one-sided next to
    those times, and grid points whose difference stencil straddles one are
    left out of the maximum. The first and last eight points are left out
    too.

    Returns
    -------
    float
        ``max |R|`` over the evaluated points; with ``full_output`` also a
        dict holding the residual series, the evaluation mask, the
        location of the maximum and ``noise_floor``. The second difference
        turns an error ``e`` in Z into up to ``16 e / (3 h^2)`` of residual;
        the floor applies this to ``Z.accuracy`` (``nan`` when unknown), so
        a grid much finer than the accuracy of Z supports fails for that
        reason alone.

    Raises
    ------
    ResolutionError
        When the grid has fewer than ``min_points_per_period`` points per
        period of the faster of ``omega_q`` and the media's oscillator
        frequencies, when jump times of a box are closer than seven grid
        steps, or when masking leaves under a quarter of the interior.
    """
    t = np.asarray(Z.t)
    h = _check_uniform(t)
    rates = [omega_q]
    for m in (electric, magnetic):
        if isinstance(m, Lorentz):
            rates.append(m.omega0)
    fastest = max(rates)
    if fastest > 0 and 2 * math.pi / (fastest * h) < min_points_per_period:
        raise ResolutionError(
            f"{2 * math.pi / (fastest * h):.1f} points per period; need {min_points_per_period}")
    if t.size < 24:
        raise ResolutionError("ode_residual needs at least 24 grid points")
    kinks = [k / h for k in _kink_times(electric, magnetic, h, t[-1])]
    z = np.asarray(Z.values, dtype=complex)
    idx = np.arange(t.size)
    # chie * Z' = d/dt (chie * Z) - chie(t) Z(0), so only values of Z enter
    Ce = _memory(electric, z, h, kinks)
    Cm = _memory(magnetic, z, h, kinks)
    chi_e = np.asarray(electric.chi_time(np.maximum(t, 1e-300)), dtype=float)
    R = (_d2(z, h) + omega_q ** 2 * z + _d2(Ce, h) - _d1(chi_e, h) * z[0]
         - omega_q ** 2 * Cm)
    mask = np.zeros(t.size, dtype=bool)
    mask[8:t.size - 8] = True
    for k in kinks:
        mask &= np.abs(idx - k) > 2 + 1e-9
    if mask.sum() < 0.25 * (t.size - 16):
        raise ResolutionError(
            "derivative jumps of Z leave too few grid points to evaluate; refine the grid")
    r = np.where(mask, np.abs(R), 0.0)
    k = int(np.argmax(r))
    if full_output:
        acc = float(Z.accuracy) if getattr(Z, "accuracy", None) is not None else float("nan")
        return float(r[k]), {"residual": R, "mask": mask, "argmax_t": float(t[k]),
                             "kink_times": [float(x * h) for x in kinks],
                             "noise_floor": 16 * acc / (3 * h * h)}
    return float(r[k])


def energy_invariant(Z, chie0, chim0, omega_q):
    """``H(t) = (1+chie0)|Z'|^2 + wq^2/(1+chim0)|Z|^2`` and its drift.

    Returns
    -------
    H : ndarray
    deviation : float
        ``max |H - H(0)| / H(0)``. Uses the exact derivative when the series
        carries one, otherwise fourth-order differences (interior points
        only).
    """
    z = np.asarray(Z.values)
    if Z.derivative is not None:
        zd = np.asarray(Z.derivative)
        sl = slice(None)
    else:
        h = _check_uniform(np.asarray(Z.t))
        zd = _d1(z, h)
        sl = slice(2, -2)
    H = (1 + chie0) * np.abs(zd) ** 2 + omega_q ** 2 / (1 + chim0) * np.abs(z) ** 2
    Hs = H[sl]
    dev = float(np.max(np.abs(Hs - Hs[0])) / Hs[0]) if Hs[0] != 0 else float("inf")
    return H, dev


@dataclass(frozen=True)
class DecayCheck:
    passed: bool
    rate: float
    expected: float
    margin: float
    peaks: int

    def to_dict(self):
        return {"passed": self.passed, "fitted_rate": self.rate, "expected_rate": self.expected,
                "relative_margin": self.margin, "peaks": self.peaks}


def _peaks(x):
    return np.flatnonzero((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:])) + 1


def asymptotic_decay_check(series, rate, rel_tol=0.1, floor=1e-11):
    """Fit the decay rate of the transient part of a kernel.

    The persistent bath-pole term (if any) is subtracted, and the log of the
    local maxima of ``|Re|`` of the remainder is fitted by a straight line.
    Peaks below ``floor`` times the largest one are ignored as round-off.
    A fitted envelope that changes by less than ``1e-3`` (relative) across
    the fitted peaks is reported as no decay: sampled maxima jitter by about
    ``(w h)^2 / 8``, so smaller changes are not measurable.

    Returns
    -------
    DecayCheck
        ``passed`` is true when the fitted rate is within ``rel_tol`` of
        ``rate``. A transient that does not decay gives ``rate == 0``.

    Raises
    ------
    ParameterError
        If the series ends before ``10/rate``.
    InconclusiveError
        With fewer than five usable envelope peaks.
    """
    if not rate > 0:
        raise ParameterError("expected rate must be positive")
    t = np.asarray(series.t)
    if t[-1] < 10 / rate * (1 - 1e-9):
        raise ParameterError(f"series ends at t={t[-1]:.4g}; need t >= {10 / rate:.4g}")
    tr = np.asarray(series.values) - series.persistent_part()
    best = None
    for part in (np.abs(tr.real), np.abs(tr.imag)):
        idx = _peaks(part)
        if idx.size:
            idx = idx[part[idx] > floor * part.max()]
        if best is None or idx.size > best[0].size:
            best = (idx, part)
    idx, part = best
    if idx.size < 5:
        raise InconclusiveError(f"only {idx.size} envelope peaks; need 5")
    slope, _ = np.polyfit(t[idx], np.log(part[idx]), 1)
    fitted = max(0.0, float(-slope))
    if fitted * (t[idx[-1]] - t[idx[0]]) < 1e-3:
        fitted = 0.0
    margin = abs(fitted - rate) / rate
    return DecayCheck(passed=bool(margin <= rel_tol), rate=fitted, expected=float(rate),
                      margin=float(margin), peaks=int(idx.size))
