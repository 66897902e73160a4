"""Forward and inverse Laplace transforms.

Two inversion routes are provided:

* :func:`invert_rational` sums pole residues of a strictly proper rational
  image, with repeated poles handled through the Laurent coefficients.
* :func:`invert_contour` is a numerical inversion for arbitrary images,
  an accelerated Fourier-series quadrature along a vertical Bromwich line
  (de Hoog, Knight and Stokes) or a fixed Talbot contour.

Polynomials are stored as coefficient arrays with the highest power first,
the convention of :func:`numpy.polyval` and :func:`numpy.roots`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import (
    AccuracyWarning,
    ContourRefusedError,
    DivergenceError,
    NumericalError,
    ParameterError,
    PoleError,
)
from .quadrature import wynn_epsilon

__all__ = [
    "RationalImage",
    "PartialFractions",
    "ContourParams",
    "polynomial_roots",
    "invert_rational",
    "invert_contour",
    "forward_laplace",
    "laplace_piecewise_linear",
    "initial_value",
]

#: relative distance below which computed roots are merged into one multiple root
MERGE_TOL = 1e-6
#: Talbot node count above which double-precision cancellation dominates
TALBOT_MAX_NODES = 40


def _trim(c):
    c = np.atleast_1d(np.asarray(c))
    if c.dtype.kind not in "fc":
        c = c.astype(float)
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        return c[-1:] * 0
    return c[nz[0]:]


def _taylor(coeffs, p, n):
    """First ``n`` Taylor coefficients of a polynomial about ``p``."""
    c = np.array(coeffs, dtype=complex)
    out = []
    for _ in range(n):
        if c.size == 0:
            out.append(0j)
            continue
        # synthetic division: c(s) = q(s)(s - p) + r
        q = np.empty(c.size - 1, dtype=complex)
        acc = 0j
        for i, ci in enumerate(c):
            acc = acc * p + ci
            if i < c.size - 1:
                q[i] = acc
        out.append(acc)
        c = q
    return np.array(out)


def _series_divide(a, b, n):
    """Power-series quotient a/b truncated to ``n`` terms."""
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        acc = a[k] if k < len(a) else 0j
        for j in range(1, min(k, len(b) - 1) + 1):
            acc -= b[j] * out[k - j]
        out[k] = acc / b[0]
    return out


def _polish(coeffs, root, order=0):
    """One Newton step on the ``order``-th derivative, in extended precision."""
    c = np.asarray(coeffs, dtype=np.clongdouble)
    for _ in range(order):
        c = np.polyder(c)
    dc = np.polyder(c)
    r = np.clongdouble(root)
    f0 = np.polyval(c, r)
    d0 = np.polyval(dc, r)
    if d0 == 0:
        return complex(root)
    r1 = r - f0 / d0
    if abs(np.polyval(c, r1)) <= abs(f0):
        return complex(r1)
    return complex(root)


def polynomial_roots(coeffs, merge_tol=MERGE_TOL):
    """Roots of a polynomial grouped by multiplicity.

    Roots come from the companion-matrix eigenvalues (:func:`numpy.roots`).
    Roots closer than ``merge_tol * max(1, |root|)`` are merged into a single
    multiple root located by a Newton step on the matching derivative.

    Returns
    -------
    roots : ndarray of complex
    multiplicities : ndarray of int
    """
    c = _trim(coeffs)
    if c.size <= 1:
        return np.zeros(0, complex), np.zeros(0, int)
    raw = np.roots(c).astype(complex)
    if not np.all(np.isfinite(raw)):
        raise NumericalError("companion eigenvalues did not converge",
                             condition=np.inf)
    # greedy clustering
    remaining = list(raw)
    roots, mult = [], []
    while remaining:
        r0 = remaining.pop(0)
        cluster = [r0]
        changed = True
        while changed:
            changed = False
            centre = np.mean(cluster)
            for r in list(remaining):
                if abs(r - centre) <= merge_tol * max(1.0, abs(centre)):
                    cluster.append(r)
                    remaining.remove(r)
                    changed = True
        m = len(cluster)
        roots.append(_polish(c, np.mean(cluster), order=m - 1))
        mult.append(m)
    return np.array(roots), np.array(mult, dtype=int)


@dataclass(frozen=True)
class PartialFractions:
    """Laurent expansion of a rational image about each pole.

    ``terms[k][j]`` is the coefficient of ``1/(s - poles[k])**(j+1)``, so the
    time function is ``sum_k exp(poles[k] t) sum_j terms[k][j] t**j / j!``.
    """

    poles: np.ndarray
    terms: tuple
    condition: float = 0.0

    def evaluate(self, t, derivative=0):
        """Inverse transform (or its ``derivative``-th time derivative) at ``t``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for p, a in zip(self.poles, self.terms):
            # d^n/dt^n [t^j e^{pt}/j!] = sum_i C(n,i) p^(n-i) t^(j-i)/(j-i)! e^{pt}
            poly = np.zeros(t.shape, dtype=complex)
            for j, aj in enumerate(a):
                for i in range(0, min(derivative, j) + 1):
                    poly += (aj * math.comb(derivative, i) * p ** (derivative - i)
                             * t ** (j - i) / math.factorial(j - i))
            out += poly * np.exp(p * t)
        return out

    def residue_at(self, pole, tol=1e-9):
        """Simple-pole residue at the pole nearest ``pole`` (0 when absent)."""
        if len(self.poles) == 0:
            return 0j
        k = int(np.argmin(np.abs(self.poles - pole)))
        if abs(self.poles[k] - pole) > tol * max(1.0, abs(pole)):
            return 0j
        return complex(self.terms[k][0])


@dataclass(frozen=True)
class RationalImage:
    """Rational Laplace image ``num(s) / den(s)``."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = _trim(self.num)
        den = _trim(self.den)
        if np.all(den == 0):
            raise ParameterError("denominator is identically zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def is_strictly_proper(self):
        if np.all(self.num == 0):
            return True
        return len(self.den) >= len(self.num) + 1

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        d = np.polyval(self.den, s)
        if np.any(d == 0):
            raise PoleError("image evaluated at a pole", pole=s[d == 0])
        return np.polyval(self.num, s) / d

    def __mul__(self, other):
        if isinstance(other, RationalImage):
            return RationalImage(np.polymul(self.num, other.num),
                                 np.polymul(self.den, other.den))
        return RationalImage(np.asarray(self.num) * other, self.den)

    __rmul__ = __mul__

    def __add__(self, other):
        return RationalImage(
            np.polyadd(np.polymul(self.num, other.den), np.polymul(other.num, self.den)),
            np.polymul(self.den, other.den),
        )

    def poles(self):
        """Poles and multiplicities of the reduced image."""
        return polynomial_roots(self.reduced().den)

    def reduced(self, tol=1e-9):
        """Cancel numerator/denominator roots that coincide within ``tol``."""
        if np.all(self.num == 0) or len(self.den) == 1 or len(self.num) == 1:
            return self
        zr = list(np.roots(self.num))
        pr = list(np.roots(self.den))
        keep_p = []
        for p in pr:
            hit = None
            for i, z in enumerate(zr):
                if abs(z - p) <= tol * max(1.0, abs(p)):
                    hit = i
                    break
            if hit is None:
                keep_p.append(p)
            else:
                zr.pop(hit)
        if len(keep_p) == len(pr):
            return self
        num = self.num[0] * np.poly(zr) if zr else np.array([self.num[0]])
        den = self.den[0] * np.poly(keep_p) if keep_p else np.array([self.den[0]])
        return RationalImage(num, den)

    def partial_fractions(self):
        """Laurent coefficients of the image at every pole."""
        img = self.reduced()
        if not img.is_strictly_proper:
            raise ParameterError(
                "image is not strictly proper: deg(num)=%d, deg(den)=%d"
                % (len(img.num) - 1, len(img.den) - 1))
        if np.all(img.num == 0):
            return PartialFractions(np.zeros(0, complex), ())
        roots, mult = polynomial_roots(img.den)
        lead = img.den[0]
        terms = []
        for k, (p, m) in enumerate(zip(roots, mult)):
            others = np.concatenate([np.repeat(roots[i], mult[i])
                                     for i in range(len(roots)) if i != k]
                                    or [np.zeros(0)])
            rest = lead * np.poly(others) if others.size else np.array([lead])
            a = _taylor(img.num, p, m)
            b = _taylor(rest, p, m)
            g = _series_divide(a, b, m)
            # coefficient of (s-p)^-(j+1) is g[m-1-j]
            terms.append(g[::-1].copy())
        scale = np.sum(np.abs(img.den))
        cond = max((abs(np.polyval(img.den, p)) / scale * max(1.0, abs(p)) ** -(len(img.den) - 1)
                    for p in roots), default=0.0)
        return PartialFractions(roots, tuple(terms), float(cond))


def invert_rational(image, t, derivative=0, full_output=False):
    """Exact inverse Laplace transform of a strictly proper rational image.

    Parameters
    ----------
    image : RationalImage
    t : float or array_like
        Times, ``t >= 0``.
    derivative : int
        Return the ``derivative``-th time derivative instead (valid for t > 0).
    full_output : bool
        Also return a dict with the pole list and a root residual.

    Examples
    --------
    >>> round(invert_rational(RationalImage([1.0], [1.0, 1.0]), 1.0).real, 7)
    0.3678794
    >>> abs(invert_rational(RationalImage([1.0, 0.0], [1.0, 0.0, 4.0]), np.pi / 4)) < 1e-15
    True
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ParameterError("invert_rational needs t >= 0")
    pf = image.partial_fractions()
    out = pf.evaluate(t_arr, derivative=derivative)
    if out.ndim == 0:
        out = complex(out)
    if full_output:
        info = {
            "poles": [[p.real, p.imag] for p in pf.poles],
            "multiplicities": [len(a) for a in pf.terms],
            "root_residual": pf.condition,
        }
        return out, info
    return out


def initial_value(image, s0=1e5):
    """``f(0+) = lim s F(s)`` by Richardson extrapolation in ``1/s``."""
    if isinstance(image, RationalImage):
        img = image.reduced()
        if len(img.den) == len(img.num) + 1:
            return complex(img.num[0] / img.den[0])
        return 0j
    ss = s0 * np.array([1.0, 2.0, 4.0])
    v = np.array([complex(s * image(s)) for s in ss])
    # eliminate 1/s and 1/s^2 terms
    r1 = 2 * v[1] - v[0]
    r2 = 2 * v[2] - v[1]
    return complex((4 * r2 - r1) / 3)


@dataclass(frozen=True)
class ContourParams:
    """Parameters of the numerical inversion contour.

    Attributes
    ----------
    method : {"dehoog", "talbot"}
        ``"dehoog"`` sums the trapezoid rule on a Bromwich line as a Fourier
        series accelerated by the epsilon algorithm; ``"talbot"`` is the fixed
        Talbot contour.
    nodes : int
        Starting series degree M (2M+1 image evaluations per side and window)
        for de Hoog, or quadrature points for Talbot. Talbot sums terms as
        large as ``exp(2M/5)`` and loses digits in double precision above
        about 40 points; 24 to 32 is its sweet spot.
    scale : float
        Half-period of the Fourier series as a multiple of the window's
        largest time (de Hoog), or the contour radius multiplier (Talbot).
    tol : float
        Target size of the aliasing error; sets the line abscissa.
    rtol : float
        Agreement required between successive accelerated estimates before
        the degree stops doubling.
    max_nodes : int
        Degree cap; hitting it raises an :class:`AccuracyWarning`.
    accel_terms : int
        Number of trailing partial sums handed to the epsilon algorithm.
        The table costs O(n^2) per time point, and the last terms carry the
        convergence information.
    window_ratio : float
        Largest ratio ``t_max/t_min`` inside one time window.
    abscissa : float
        Real part to the right of every singularity of the image.
    """

    method: str = "dehoog"
    nodes: int = 32
    scale: float = 1.0
    tol: float = 1e-10
    rtol: float = 1e-9
    max_nodes: int = 2048
    accel_terms: int = 129
    window_ratio: float = 3.0
    abscissa: float = 0.0
    t_range: tuple | None = None

    def __post_init__(self):
        if self.method not in ("dehoog", "talbot"):
            raise ParameterError(f"unknown contour method {self.method!r}")
        if self.nodes < 8:
            raise ParameterError("contour needs at least 8 nodes")
        if not self.scale > 0:
            raise ParameterError("contour scale must be positive")
        if not 0 < self.tol < 1:
            raise ParameterError("contour tol must lie in (0, 1)")
        if not self.window_ratio > 1:
            raise ParameterError("window_ratio must exceed 1")
        if self.accel_terms < 5:
            raise ParameterError("accel_terms must be at least 5")


def _eval_image(image, s):
    s = np.asarray(s, dtype=complex)
    try:
        v = image(s)
        v = np.broadcast_to(np.asarray(v, dtype=complex), s.shape)
    except (TypeError, ValueError):
        v = np.array([complex(image(x)) for x in s.ravel()]).reshape(s.shape)
    if not np.all(np.isfinite(v)):
        raise DivergenceError("image is not finite on the inversion contour")
    return np.array(v)


def _dehoog_window(image, ts, params, sigma0, freq=0.0):
    """Accelerated Fourier-series inversion on one time window.

    The trapezoid sum along ``Re s = gamma`` is a power series in
    ``z = exp(i pi t / T)`` and its conjugate; the partial sums are
    accelerated with the epsilon algorithm. The degree starts at
    ``params.nodes`` (raised to cover ``freq`` when known) and doubles until
    two accelerated estimates agree.
    """
    T = params.scale * float(np.max(ts))
    gamma = sigma0 - math.log(params.tol) / (2 * T)
    M = max(params.nodes, int(math.ceil(1.5 * freq * T / math.pi)) + 16)
    z = np.exp(1j * np.pi * ts / T)
    while True:
        k = np.arange(2 * M + 1)
        up = _eval_image(image, gamma + 1j * np.pi * k / T)
        down = _eval_image(image, gamma - 1j * np.pi * k / T)
        up[0] *= 0.5
        down[0] *= 0.5
        zk = z[None, :] ** k[:, None]
        partial = np.cumsum(up[:, None] * zk + down[:, None] * np.conj(zk), axis=0)
        n_acc = params.accel_terms
        full = wynn_epsilon(partial[-n_acc:])
        short = wynn_epsilon(partial[: max(3, (3 * partial.shape[0]) // 4) | 1][-n_acc:])
        scale = np.exp(gamma * ts) / (2 * T)
        est = scale * full
        err = np.max(np.abs(scale * (full - short)))
        # the series cannot resolve values below its own rounding level
        floor = 1e3 * np.finfo(float).eps * np.max(scale) * np.max(np.abs(partial))
        size = max(np.max(np.abs(est)), 1e-300)
        # a spectral peak near the end of the series means a resonance the
        # sum has not yet passed; the two estimates can then agree falsely
        peak = int(np.argmax(np.abs(up) + np.abs(down)))
        resolved = peak <= (4 * M) // 3
        converged = resolved and err <= max(params.rtol * size, floor)
        if converged or M >= params.max_nodes:
            break
        M = min(2 * M, params.max_nodes)
    return est, {"nodes": M, "error_estimate": float(err), "gamma": gamma, "period": 2 * T,
                 "converged": converged}


def _talbot(image, ts, params, sigma0):
    M = params.nodes
    out = np.empty(len(ts), dtype=complex)
    theta = np.pi * np.arange(-M + 1, M) / M
    with np.errstate(divide="ignore", invalid="ignore"):
        cot = np.where(theta == 0, 0.0, np.cos(theta) / np.sin(theta))
        tc = np.where(theta == 0, 1.0, theta * cot)
        dtc = np.where(theta == 0, 0.0, cot - theta / np.sin(theta) ** 2)
    for i, t in enumerate(ts):
        r = params.scale * 2 * M / (5 * t)
        s = sigma0 + r * (tc + 1j * theta)
        ds = r * (dtc + 1j)
        F = _eval_image(image, s)
        out[i] = np.sum(F * np.exp(s * t) * ds) / (2j * M)
    return out


def _windows(ts, ratio):
    """Group positive times into geometric windows with ``max/min <= ratio``."""
    logs = np.floor(np.log(ts / ts.min()) / math.log(ratio)).astype(int)
    for lo in np.unique(logs):
        yield np.flatnonzero(logs == lo)


def invert_contour(image, t, params=None, full_output=False, frequency=None):
    """Numerical inverse Laplace transform.

    Parameters
    ----------
    image : callable or RationalImage
        Complex image ``F(s)``; called with complex ndarrays when possible.
        All singularities must lie strictly left of ``params.abscissa``.
    t : float or array_like
        Times ``t >= 0``. ``t == 0`` is returned as ``lim s F(s)``.
    params : ContourParams, optional
    full_output : bool
        Also return a dict with the degree used and the error estimate.
    frequency : float, optional
        Largest oscillation frequency expected in the result. Known pole
        locations supply it for rational images; it only sets the starting
        degree.

    Raises
    ------
    ContourRefusedError
        For a rational image with poles on the imaginary axis.
    """
    params = params or ContourParams()
    freq = float(frequency or 0.0)
    sigma0 = params.abscissa
    if isinstance(image, RationalImage):
        poles, _ = image.poles()
        axis = poles[np.abs(poles.real) <= 1e-9 * np.maximum(1.0, np.abs(poles))]
        if axis.size:
            raise ContourRefusedError(
                "image has poles on the imaginary axis at %s; fixed contours cannot "
                "converge for undamped oscillations, use invert_rational" % list(axis))
        if poles.size:
            sigma0 = max(sigma0, float(poles.real.max()))
            freq = max(freq, float(np.abs(poles.imag).max()))
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ParameterError("invert_contour needs t >= 0")
    out = np.zeros(t_arr.shape, dtype=complex)
    zero = t_arr == 0
    if np.any(zero):
        out[zero] = initial_value(image)
    pos = np.flatnonzero(~zero)
    info = {"method": params.method, "nodes": 0, "error_estimate": 0.0}
    if pos.size:
        ts = t_arr[pos]
        if params.method == "dehoog":
            for w in _windows(ts, params.window_ratio):
                val, winfo = _dehoog_window(image, ts[w], params, sigma0, freq)
                out[pos[w]] = val
                info["nodes"] = max(info["nodes"], winfo["nodes"])
                info["error_estimate"] = max(info["error_estimate"], winfo["error_estimate"])
                if not winfo["converged"]:
                    warnings.warn(
                        "contour inversion did not converge on [%.3g, %.3g]: "
                        "error estimate %.3g at degree %d"
                        % (ts[w].min(), ts[w].max(), winfo["error_estimate"], winfo["nodes"]),
                        AccuracyWarning, stacklevel=2)
        else:
            if params.nodes > TALBOT_MAX_NODES:
                warnings.warn(
                    "Talbot with %d points cancels terms near exp(%.0f); expect about %.0e "
                    "relative noise" % (params.nodes, 0.4 * params.nodes,
                                        1e-16 * math.exp(0.4 * params.nodes)),
                    AccuracyWarning, stacklevel=2)
            out[pos] = _talbot(image, ts, params, sigma0)
            info["nodes"] = params.nodes
            info["error_estimate"] = float("nan")
    result = out if np.ndim(t) else complex(out[0])
    if full_output:
        return result, info
    return result


def forward_laplace(f, s, tmax=None, tol=1e-10, breakpoints=(), full_output=False):
    """``int_0^tmax f(t) exp(-s t) dt`` by adaptive quadrature.

    The default cutoff ``tmax = 40/Re(s)`` puts ``exp(-Re(s) t)`` below
    ``4e-18``. The tail estimate is ``|f(tmax)| exp(-Re(s) tmax) / Re(s)``;
    if it exceeds ``tol`` an :class:`AccuracyWarning` is issued.

    >>> round(forward_laplace(lambda t: 1.0, 2.0).real, 12)
    0.5
    """
    s = complex(s)
    if not s.real > 0:
        raise ParameterError("forward_laplace needs Re(s) > 0")
    if tmax is None:
        tmax = 40.0 / s.real
    pts = sorted(b for b in breakpoints if 0 < b < tmax)
    # split into pieces no longer than a few oscillation periods of exp(-s t)
    n_osc = int(np.ceil(abs(s.imag) * tmax / (4 * np.pi))) + 1
    edges = np.unique(np.concatenate([[0.0], pts, np.linspace(0, tmax, n_osc + 1)]))
    val = 0j
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        for part, fn in ((1, np.real), (1j, np.imag)):
            v, e = integrate.quad(lambda x: fn(f(x) * np.exp(-s * x)), a, b,
                                  epsabs=tol * 1e-2, epsrel=1e-13, limit=200)
            val += part * v
            err += e
    tail = abs(complex(f(tmax))) * math.exp(-s.real * tmax) / s.real
    if tail > tol:
        warnings.warn(f"forward Laplace tail estimate {tail:.3g} exceeds {tol:.3g}",
                      AccuracyWarning, stacklevel=2)
    if full_output:
        return val, {"tail_estimate": tail, "quad_error": err, "tmax": tmax}
    return val


def _phi1(z):
    """(exp(z) - 1)/z, stable near 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-2
    out = np.empty_like(z)
    zs = z[small]
    out[small] = 1 + zs / 2 + zs ** 2 / 6 + zs ** 3 / 24 + zs ** 4 / 120
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def _phi2(z):
    """int_0^1 x exp(z x) dx, stable near 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-2
    out = np.empty_like(z)
    zs = z[small]
    out[small] = 0.5 + zs / 3 + zs ** 2 / 8 + zs ** 3 / 30 + zs ** 4 / 144
    zb = z[~small]
    out[~small] = (np.exp(zb) * (zb - 1) + 1) / zb ** 2
    return out


def laplace_piecewise_linear(x, y, s):
    """Exact ``int y(x) exp(-s x) dx`` for the linear interpolant of samples.

    Vectorised over ``s``; with ``s = -1j*w`` this is the one-sided Fourier
    integral ``int y(x) exp(i w x) dx`` over the sample range.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    s = np.asarray(s, dtype=complex)
    h = np.diff(x)
    ya, yb = y[:-1], y[1:]
    flat = s.ravel()
    out = np.empty(flat.shape, dtype=complex)
    # bound the (s, segment) work array to a few million entries
    step = max(1, 2_000_000 // max(h.size, 1))
    for i in range(0, flat.size, step):
        ss = flat[i:i + step, None]
        z = -ss * h
        # segment: exp(-s a) * h * [ya*phi1(z) + (yb-ya)*phi2(z)]
        seg = np.exp(-ss * x[:-1]) * h * (ya * _phi1(z) + (yb - ya) * _phi2(z))
        out[i:i + step] = seg.sum(axis=-1)
    return out.reshape(s.shape)
