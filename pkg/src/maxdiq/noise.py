"""Noise-strength coefficients tying fluctuations to absorption.

The noise polarization of a passive medium has commutator coefficient
``(hbar / (pi K)) Im chi(omega)``. ``K`` is ``1/eps0`` for the electric response,
so the coefficient is ``hbar eps0 Im chi / pi``. The magnetic response uses
``K = mu0``.

Delta-function factors of the full commutator are structural and are not
represented.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coupling import im_chi_from_coupling
from .errors import ConsistencyError, ExtrapolationWarning, ParameterError
from .medium import (
    Linear,
    PhysicalConstants,
    Vacuum,
    check_causality_passivity,
)

__all__ = [
    "NoiseWeight",
    "noise_commutator_coefficient",
    "noise_weight_bundle",
    "MISMATCH_TOL",
]

#: largest tolerated relative disagreement between a table and its model
MISMATCH_TOL = 1e-6


def _prefactor(role, constants):
    return constants.hbar / (math.pi * constants.field_constant(role))


def noise_commutator_coefficient(model, omega, constants=None):
    """``(hbar / (pi K)) Im chi(omega)`` for ``omega > 0``.

    Examples
    --------
    >>> from maxdiq.medium import Lorentz
    >>> round(noise_commutator_coefficient(Lorentz(omega0=1.0, gamma=0.2, omegap=0.5), 1.0), 5)
    0.39789
    """
    constants = constants or PhysicalConstants()
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ParameterError("noise coefficient needs omega > 0")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExtrapolationWarning)
        im = np.asarray(model.chi_freq(w)).imag
    out = _prefactor(model.role, constants) * im
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class NoiseWeight:
    """Per-frequency noise weights and squared couplings.

    Attributes
    ----------
    omega : ndarray
    w_e, w_m : ndarray
        Electric and magnetic commutator coefficients.
    f2, g2 : ndarray
        Squared couplings on the same grid.
    mismatch : dict
        Largest relative disagreement between each weight and the one implied
        by its coupling table (absent when no table was supplied).
    passivity : list
        Violations reported by the medium checks (negative absorption).
    """

    omega: np.ndarray
    w_e: np.ndarray
    w_m: np.ndarray
    f2: np.ndarray
    g2: np.ndarray
    mismatch: dict = field(default_factory=dict)
    passivity: list = field(default_factory=list)

    @property
    def passive(self):
        return not self.passivity

    def write_csv(self, path):
        from .io import write_csv
        write_csv(path, ["omega", "w_e", "w_m", "f2", "g2"],
                  [self.omega, self.w_e, self.w_m, self.f2, self.g2])

    def to_dict(self):
        return {"omega": self.omega, "w_e": self.w_e, "w_m": self.w_m, "f2": self.f2,
                "g2": self.g2, "mismatch": self.mismatch, "passivity": self.passivity}


def _table_on_grid(table, omega):
    if table.omega.shape == omega.shape and np.allclose(table.omega, omega, rtol=1e-12, atol=0):
        return table.value
    if omega.min() < table.omega[0] or omega.max() > table.omega[-1]:
        raise ParameterError("noise grid extends beyond the coupling table")
    return np.interp(omega, table.omega, table.value)


def _compare(role, model, table, omega, direct, constants):
    vals = _table_on_grid(table, omega)
    implied = _prefactor(role, table.constants) * np.asarray(
        im_chi_from_coupling(vals, omega, table.dispersion, table.constants, role))
    scale = max(float(np.max(np.abs(direct))), float(np.max(np.abs(implied))))
    mis = float(np.max(np.abs(implied - direct))) / scale if scale > 0 else 0.0
    if mis > MISMATCH_TOL:
        raise ConsistencyError(
            f"{role} coupling table disagrees with the {model.kind} model by {mis:.3g} "
            f"(relative); limit {MISMATCH_TOL}")
    return vals, mis


def _raw_coupling(weight, omega, role, dispersion, constants):
    # no passivity check here: a negative absorption sample is flagged, not raised
    unit = np.asarray(im_chi_from_coupling(np.ones_like(omega), omega, dispersion, constants, role))
    return weight / _prefactor(role, constants) / unit


def noise_weight_bundle(electric=None, magnetic=None, omega=None, f_table=None, g_table=None,
                        constants=None, dispersion=None):
    """Noise weights for a medium on a frequency grid.

    Parameters
    ----------
    electric, magnetic : SusceptibilityModel, optional
        Vacuum when omitted.
    omega : array_like
        Positive frequencies.
    f_table, g_table : CouplingTable, optional
        Coupling tables paired with the models. When given, the weight
        implied by each table (through its own dispersion) must match the
        direct one within ``MISMATCH_TOL`` relative to the largest weight,
        and the tabulated values are reported. Otherwise the couplings are
        derived from the models under ``dispersion``.

    Raises
    ------
    ConsistencyError
        If a table does not belong to its model.
    """
    constants = constants or PhysicalConstants()
    dispersion = dispersion or Linear(constants.c)
    electric = electric or Vacuum()
    magnetic = magnetic or Vacuum(role="magnetic")
    if omega is None:
        raise ParameterError("noise_weight_bundle needs a frequency grid")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if w.ndim != 1 or w.size == 0 or np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise ParameterError("noise grid must be positive and increasing")
    w_e = np.asarray(noise_commutator_coefficient(electric, w, constants), dtype=float)
    w_m = np.asarray(noise_commutator_coefficient(magnetic, w, constants), dtype=float)
    mismatch = {}
    if f_table is not None:
        f2, mismatch["electric"] = _compare("electric", electric, f_table, w, w_e, constants)
    else:
        f2 = _raw_coupling(w_e, w, "electric", dispersion, constants)
    if g_table is not None:
        g2, mismatch["magnetic"] = _compare("magnetic", magnetic, g_table, w, w_m, constants)
    else:
        g2 = _raw_coupling(w_m, w, "magnetic", dispersion, constants)
    passivity = []
    for m in (electric, magnetic):
        passivity += [dict(v, role=m.role) for v in check_causality_passivity(m, w).violations
                      if v["check"] == "passivity"]
    return NoiseWeight(w, w_e, w_m, np.asarray(f2, float), np.asarray(g2, float),
                       mismatch, passivity)
