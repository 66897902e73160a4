"""Series acceleration and oscillatory quadrature helpers.

The semi-infinite sine transforms needed by the coupling module are summed
panel by panel (half periods of ``sin(omega t)``, refined where the
integrand has faster structure of its own), and the sequence of partial sums
is accelerated with Wynn's epsilon algorithm. Integrands that do not decay
(a step response) are damped by ``exp(-eps t)`` and the damping is removed by
polynomial extrapolation in ``eps``.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = ["wynn_epsilon", "richardson_zero", "sine_transform", "gauss_legendre"]


def wynn_epsilon(partial):
    """Accelerated limit of partial sums stored along axis 0.

    Parameters
    ----------
    partial : ndarray, shape (n, ...)
        Partial sums; trailing axes are independent sequences.

    Returns
    -------
    ndarray
        Entry of the highest even column of the epsilon table reached for each
        sequence. Non-finite table entries (exact convergence, cancellation)
        leave the previous estimate in place.
    """
    S = np.asarray(partial)
    shape = S.shape[1:]
    S = S.reshape(S.shape[0], -1)
    n = S.shape[0]
    e_prev = np.zeros_like(S)
    e = S.copy()
    best = S[-1].copy()
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(1, n):
            d = e[1:] - e[:-1]
            new = e_prev[1:d.shape[0] + 1] + 1.0 / d
            e_prev, e = e, new
            if e.shape[0] == 0:
                break
            if k % 2 == 0:
                ok = np.isfinite(e[-1])
                best[ok] = e[-1][ok]
    return best.reshape(shape)


def richardson_zero(h, values):
    """Value at ``h = 0`` of the polynomial through ``(h[i], values[i])``."""
    h = np.asarray(h, dtype=float)
    values = np.asarray(values)
    out = 0.0
    for i in range(len(h)):
        w = 1.0
        for j in range(len(h)):
            if j != i:
                w *= h[j] / (h[j] - h[i])
        out = out + w * values[i]
    return out


@lru_cache(maxsize=8)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def _panel_edges(omega, t_start, n_panels, feature_freq):
    """Half-period panel edges starting at ``t_start``, refined for fast features."""
    half = math.pi / omega
    sub = int(math.ceil(feature_freq / omega)) + 1 if feature_freq > 0 else 1
    return t_start + half * np.arange(n_panels + 1), sub


def _integrate_pieces(f, edges, sub, order):
    """Integral of ``f`` over each interval ``edges[i]..edges[i+1]``."""
    x, w = gauss_legendre(order)
    a = edges[:-1]
    h = np.diff(edges) / sub
    # nodes: panel x subpanel x gauss point
    starts = a[:, None] + h[:, None] * np.arange(sub)[None, :]
    nodes = starts[..., None] + h[:, None, None] * x[None, None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return np.einsum("psk,k->p", vals, w) * h


def _finite_part(f, omega, breakpoints, t_end, feature_freq, order):
    """Integral of ``f(t) sin(omega t)`` over [0, t_end] split at breakpoints."""
    half = math.pi / omega
    n = max(1, int(math.ceil(t_end / half)))
    edges = np.unique(np.concatenate([np.linspace(0.0, t_end, n + 1),
                                      [b for b in breakpoints if 0 < b < t_end]]))
    sub = int(math.ceil(feature_freq / omega)) + 1 if feature_freq > 0 else 1
    sub = max(sub, 2)
    g = lambda t: f(t) * np.sin(omega * t)
    return float(np.sum(_integrate_pieces(g, edges, sub, order)))


def sine_transform(f, omega, *, breakpoints=(), feature_freq=0.0, support=None,
                   decaying=True, tol=1e-12, order=24, batch=48, max_panels=6144,
                   abel_eps=(1e-2, 1e-3, 1e-4)):
    """``int_0^inf f(t) sin(omega t) dt`` for one ``omega > 0``.

    Parameters
    ----------
    f : callable
        Vectorised real integrand factor.
    omega : float
    breakpoints : sequence of float
        Points where ``f`` or a derivative jumps; panels are split there.
    feature_freq : float
        Fastest oscillation or decay rate of ``f`` itself; half-period
        panels are subdivided so that each piece resolves it.
    support : float, optional
        ``f`` vanishes beyond this time, so the integral is finite.
    decaying : bool
        ``False`` for integrands bounded but not decaying (a step); the
        integral is then the Abel limit, extrapolated from the damped values
        at ``abel_eps`` (scaled by ``omega``).
    tol : float
        Target agreement of successive accelerated estimates.

    Returns
    -------
    value : float
    info : dict
        ``error_estimate``, ``panels`` and, for the Abel route, ``abel_values``.
    """
    omega = float(omega)
    if support is not None:
        val = _finite_part(f, omega, breakpoints, float(support), feature_freq, order)
        return val, {"error_estimate": 0.0, "panels": int(math.ceil(support * omega / math.pi))}
    if not decaying:
        epss = np.asarray(abel_eps) * omega
        vals, errs = [], []
        for eps in epss:
            v, i = sine_transform(lambda t, e=eps: f(t) * np.exp(-e * t), omega,
                                  breakpoints=breakpoints, feature_freq=max(feature_freq, eps),
                                  decaying=True, tol=tol, order=order, batch=batch,
                                  max_panels=max_panels)
            vals.append(v)
            errs.append(i["error_estimate"])
        val = float(richardson_zero(epss, vals))
        # the spread between the two highest-order extrapolants bounds the error
        alt = float(richardson_zero(epss[1:], vals[1:]))
        return val, {"error_estimate": max(abs(val - alt), max(errs)),
                     "abel_values": [float(v) for v in vals], "abel_eps": epss.tolist()}
    # finite part up to the last breakpoint, then accelerated half periods
    half = math.pi / omega
    t0 = 0.0
    bps = [b for b in breakpoints if b > 0]
    if bps:
        t0 = half * math.ceil(max(bps) / half)
    head = _finite_part(f, omega, bps, t0, feature_freq, order) if t0 > 0 else 0.0
    g = lambda t: f(t) * np.sin(omega * t)
    panels = np.zeros(0)
    n = batch
    prev = None
    err = np.inf
    while True:
        edges, sub = _panel_edges(omega, t0 + half * panels.size, n - panels.size, feature_freq)
        panels = np.concatenate([panels, _integrate_pieces(g, edges, sub, order)])
        partial = np.cumsum(panels)
        est = float(wynn_epsilon(partial))
        short = float(wynn_epsilon(partial[: (3 * len(partial)) // 4]))
        scale = max(abs(est), np.max(np.abs(panels)), 1e-300)
        err = abs(est - short)
        if prev is not None:
            err = max(err, abs(est - prev))
        tail = abs(panels[-1])
        if err <= tol * scale or tail <= 1e-3 * tol * scale or panels.size >= max_panels:
            if tail <= 1e-3 * tol * scale:
                # the plain sum has converged; acceleration adds nothing
                est = float(partial[-1])
                err = tail
            break
        prev = est
        n = min(2 * n, max_panels)
    return head + est, {"error_estimate": float(err), "panels": int(panels.size)}
