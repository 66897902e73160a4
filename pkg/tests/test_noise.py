import math

import numpy as np
import pytest

from maxdiq.coupling import coupling_table
from maxdiq.errors import ConsistencyError, ParameterError
from maxdiq.medium import (
    Lorentz,
    PhysicalConstants,
    PowerLaw,
    Step,
    TabulatedFrequency,
    Vacuum,
)
from maxdiq.noise import NoiseWeight, noise_commutator_coefficient, noise_weight_bundle

LOR = Lorentz(omega0=1.0, gamma=0.2, omegap=0.5)


class TestCoefficient:
    def test_vacuum(self):
        assert noise_commutator_coefficient(Vacuum(), 1.3) == 0.0

    def test_lorentz_on_resonance(self):
        assert noise_commutator_coefficient(LOR, 1.0) == pytest.approx(1.25 / math.pi, rel=1e-14)

    def test_step(self):
        assert noise_commutator_coefficient(Step(beta=2.0), 4.0) == pytest.approx(0.5 / math.pi,
                                                                                  rel=1e-8)

    def test_magnetic_uses_mu0(self):
        si = PhysicalConstants.si()
        m = Lorentz(omega0=1.0, gamma=0.2, omegap=0.5, role="magnetic")
        got = noise_commutator_coefficient(m, 1.0, si)
        assert got == pytest.approx(si.hbar / (math.pi * si.mu0) * 1.25, rel=1e-12)

    def test_positive_frequency_required(self):
        with pytest.raises(ParameterError):
            noise_commutator_coefficient(LOR, 0.0)

    def test_vanishes_with_damping(self):
        # away from resonance the weight is linear in gamma
        w = np.array([0.5, 2.0])
        vals = [np.asarray(noise_commutator_coefficient(
            Lorentz(omega0=1.0, gamma=g, omegap=0.5), w)) for g in (1e-1, 1e-2, 1e-3)]
        for a, b in zip(vals, vals[1:]):
            np.testing.assert_allclose(a / b, 10.0, rtol=0.05)


class TestBundle:
    w = np.linspace(0.1, 5, 50)

    def test_own_table(self):
        tab = coupling_table(LOR, self.w)
        nw = noise_weight_bundle(LOR, omega=self.w, f_table=tab)
        assert nw.mismatch["electric"] < 1e-12
        np.testing.assert_array_equal(nw.f2, tab.value)

    def test_table_with_other_dispersion(self):
        # the coupling changes with the dispersion, the weight does not
        tab = coupling_table(LOR, self.w, dispersion=PowerLaw(1.0, 2.0))
        nw = noise_weight_bundle(LOR, omega=self.w, f_table=tab)
        assert nw.mismatch["electric"] < 1e-12
        direct = noise_weight_bundle(LOR, omega=self.w)
        np.testing.assert_allclose(nw.w_e, direct.w_e, rtol=0, atol=1e-12)

    def test_vacuum_zero(self):
        nw = noise_weight_bundle(omega=self.w)
        for col in (nw.w_e, nw.w_m, nw.f2, nw.g2):
            assert np.all(col == 0)
        assert nw.passive

    def test_wrong_table(self):
        tab = coupling_table(Lorentz(omega0=1.2, gamma=0.2, omegap=0.5), self.w)
        with pytest.raises(ConsistencyError):
            noise_weight_bundle(LOR, omega=self.w, f_table=tab)

    def test_negative_sample_flagged(self):
        w = np.linspace(0.5, 2.5, 5)
        im = np.array([0.1, 0.2, -0.05, 0.2, 0.1])
        nw = noise_weight_bundle(TabulatedFrequency(omega=w, re=np.zeros(5), im=im), omega=w)
        assert not nw.passive
        assert [v["omega"] for v in nw.passivity] == [w[2]]
        assert nw.w_e[2] < 0

    def test_magnetic_column(self):
        m = Lorentz(omega0=1.0, gamma=0.2, omegap=0.5, role="magnetic")
        nw = noise_weight_bundle(magnetic=m, omega=self.w)
        assert np.all(nw.w_e == 0) and np.all(nw.w_m > 0)

    def test_bad_grid(self):
        with pytest.raises(ParameterError):
            noise_weight_bundle(LOR, omega=[1.0, 0.5])

    def test_grid_beyond_table(self):
        tab = coupling_table(LOR, np.linspace(0.5, 2.0, 10))
        with pytest.raises(ParameterError):
            noise_weight_bundle(LOR, omega=self.w, f_table=tab)

    def test_csv(self, tmp_path):
        nw = noise_weight_bundle(LOR, omega=self.w[:3])
        nw.write_csv(tmp_path / "noise.csv")
        assert (tmp_path / "noise.csv").read_text().splitlines()[0] == "omega,w_e,w_m,f2,g2"
        assert isinstance(nw, NoiseWeight) and set(nw.to_dict()) >= {"mismatch", "passivity"}
