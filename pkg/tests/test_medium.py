import math

import numpy as np
import pytest
from scipy import integrate

from maxdiq.errors import (
    AccuracyWarning,
    ExtrapolationWarning,
    ParameterError,
    PoleError,
    RangeError,
    SingularityError,
)
from maxdiq.laplace import forward_laplace
from maxdiq.medium import (
    Box,
    Lorentz,
    Step,
    TabulatedFrequency,
    TabulatedTime,
    Vacuum,
    check_causality_passivity,
    kk_real_from_imag,
    model_from_dict,
    read_susceptibility_csv,
)

LOR = Lorentz(omega0=1.0, gamma=0.2, omegap=0.5)

ALL_MODELS = [
    Vacuum(),
    Box(chi0=3.0, delta=0.5),
    Step(beta=2.0),
    LOR,
    Lorentz(omega0=1.0, gamma=0.0, omegap=0.5),
    TabulatedTime(t=np.linspace(0, 2, 21), chi=np.exp(-np.linspace(0, 2, 21))),
]


def lorentz_re(w, w0=1.0, g=0.2, wp=0.5):
    return wp ** 2 * (w0 ** 2 - w ** 2) / ((w0 ** 2 - w ** 2) ** 2 + g ** 2 * w ** 2)


class TestTimeDomain:
    def test_lorentz_vanishes_at_origin(self):
        assert LOR.chi_time(0.0) == 0.0

    def test_step_height(self):
        assert Step(beta=2.0).chi_time(5.0) == pytest.approx(2.0, abs=0)

    def test_box_height_inside(self):
        assert Box(chi0=3.0, delta=0.5).chi_time(0.25) == pytest.approx(6.0, rel=1e-15)

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.kind)
    def test_causal(self, model):
        t = -np.logspace(-6, 3, 50)
        assert np.all(np.asarray(model.chi_time(t)) == 0)
        assert model.chi_time(0.0) == 0

    def test_tabulated_outside_range(self):
        m = TabulatedTime(t=[0.5, 1.0, 2.0], chi=[1.0, 2.0, 1.0], extrapolate=False)
        with pytest.raises(RangeError):
            m.chi_time(3.0)
        m2 = TabulatedTime(t=[0.5, 1.0, 2.0], chi=[1.0, 2.0, 1.0])
        with pytest.warns(ExtrapolationWarning):
            assert m2.chi_time(3.0) == 0.0


class TestFrequencyDomain:
    def test_vacuum_zero(self):
        assert Vacuum().chi_freq(2.3) == 0

    def test_lorentz_on_resonance(self):
        v = LOR.chi_freq(1.0)
        assert v.real == pytest.approx(0.0, abs=1e-15)
        assert v.imag == pytest.approx(1.25, rel=1e-14)

    def test_box_absorption_zero_at_full_period(self):
        # chi0 (1 - cos w D)/(w D) vanishes at w D = 2 pi
        assert Box(chi0=1.0, delta=2.0).chi_freq(math.pi).imag == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("w", [0.3, 1.7, 4.0])
    def test_box_against_quadrature(self, w):
        m = Box(chi0=1.0, delta=2.0)
        re = integrate.quad(lambda t: m.chi_time(t) * math.cos(w * t), 0, 2)[0]
        im = integrate.quad(lambda t: m.chi_time(t) * math.sin(w * t), 0, 2)[0]
        assert m.chi_freq(w) == pytest.approx(complex(re, im), abs=1e-12)

    def test_step_singular_at_zero(self):
        with pytest.raises(SingularityError):
            Step(beta=1.0).chi_freq(0.0)

    def test_step_regularized_value(self):
        # Abel-regularized transform of beta u(t) is i beta / w
        assert Step(beta=2.0).chi_freq(4.0) == pytest.approx(0.5j, abs=1e-9)

    @pytest.mark.parametrize("w", [0.2, 0.9, 1.5, 3.0])
    def test_limit_identity(self, w):
        eps = 1e-6
        assert abs(LOR.chi_freq(w) - LOR.chi_laplace(-1j * w + eps)) < 1e-4

    @pytest.mark.parametrize("model", [m for m in ALL_MODELS if m.kind != "lorentz" or m.gamma > 0],
                             ids=lambda m: m.kind)
    def test_passive(self, model, quiet):
        w = np.linspace(0.01, 20, 400)
        assert np.all(np.asarray(model.chi_freq(w)).imag >= -1e-14)


class TestLaplaceDomain:
    def test_lossless_lorentz(self):
        assert Lorentz(omega0=1.0, gamma=0.0, omegap=0.5).chi_laplace(1.0) == pytest.approx(0.125)

    def test_step(self):
        assert Step(beta=3.0).chi_laplace(2.0) == pytest.approx(1.5)

    def test_vacuum(self):
        assert Vacuum().chi_laplace(7 + 2j) == 0

    def test_pole_reported(self):
        with pytest.raises(PoleError) as exc:
            Lorentz(omega0=1.0, gamma=0.0, omegap=0.5).chi_laplace(1j)
        assert exc.value.pole is not None

    @pytest.mark.parametrize("model", [Step(beta=2.0), LOR, Box(chi0=3.0, delta=0.5)],
                             ids=lambda m: m.kind)
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0])
    def test_matches_forward_transform(self, model, sigma, quiet):
        num = forward_laplace(lambda t: model.chi_time(t), sigma, breakpoints=model.breakpoints)
        assert num == pytest.approx(model.chi_laplace(sigma), rel=1e-6)

    def test_tabulated_time_transform_is_exact(self):
        t = np.array([0.0, 1.0, 3.0])
        m = TabulatedTime(t=t, chi=[0.0, 2.0, 0.0])
        ref = integrate.quad(lambda x: np.interp(x, t, [0.0, 2.0, 0.0]) * math.exp(-1.3 * x), 0, 3,
                             points=[1.0])[0]
        assert m.chi_laplace(1.3) == pytest.approx(ref, rel=1e-12)


class TestKramersKronig:
    def test_vacuum(self):
        assert kk_real_from_imag(Vacuum(), 1.0) == 0.0

    def test_zero_on_resonance(self, quiet):
        assert kk_real_from_imag(LOR, 1.0) == pytest.approx(0.0, abs=1e-4)

    def test_below_resonance(self, quiet):
        assert kk_real_from_imag(LOR, 0.5) == pytest.approx(lorentz_re(0.5), abs=1e-4)
        assert lorentz_re(0.5) == pytest.approx(0.3275, abs=1e-4)

    def test_tail_flag(self):
        with pytest.warns(AccuracyWarning, match="tail"):
            _, info = kk_real_from_imag(Step(beta=1.0), 1.0, omega_max=3.0, full_output=True)
        assert info["accuracy_warning"]

    def test_box_tail(self, quiet):
        b = Box(chi0=3.0, delta=0.5)
        for w in (0.3, 2.0, 7.0):
            assert kk_real_from_imag(b, w) == pytest.approx(b.chi_freq(w).real, abs=1e-6)

    def test_bad_cutoff(self):
        with pytest.raises(ParameterError):
            kk_real_from_imag(LOR, 2.0, omega_max=1.0)


class TestValidation:
    def test_lorentz_clean(self):
        assert check_causality_passivity(LOR, np.linspace(0.01, 10, 200)).ok

    def test_box_clean(self):
        assert check_causality_passivity(Box(chi0=1.0, delta=1.0), np.linspace(0.01, 30, 500)).ok

    def test_negative_sample_flagged(self):
        w = np.linspace(0.1, 2.0, 5)
        im = np.array([0.1, 0.2, -0.05, 0.2, 0.1])
        m = TabulatedFrequency(omega=w, re=np.zeros(5), im=im)
        rep = check_causality_passivity(m, w)
        flagged = {v["omega"] for v in rep.violations if v["check"] == "passivity"}
        assert flagged == {w[2]}


class TestIO:
    def test_frequency_csv(self, tmp_path):
        p = tmp_path / "chi.csv"
        p.write_text("omega,re_chi,im_chi\n0.5,1.0,0.1\n1.0,0.5,0.3\n2.0,0.1,0.2\n")
        m = read_susceptibility_csv(p)
        assert isinstance(m, TabulatedFrequency)
        assert m.chi_freq(1.0) == pytest.approx(0.5 + 0.3j)

    def test_time_csv(self, tmp_path):
        p = tmp_path / "chi.csv"
        p.write_text("t,chi\n0.0,0.0\n1.0,1.0\n2.0,0.0\n")
        m = read_susceptibility_csv(p, role="magnetic")
        assert m.role == "magnetic" and m.chi_time(0.5) == pytest.approx(0.5)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "chi.csv"
        p.write_text("w,chi\n0,0\n1,1\n")
        with pytest.raises(ParameterError):
            read_susceptibility_csv(p)

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.kind)
    def test_dict_round_trip(self, model, quiet):
        again = model_from_dict(model.to_dict())
        t = np.linspace(0.01, 3, 17)
        np.testing.assert_array_equal(again.chi_time(t), model.chi_time(t))

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            Lorentz(omega0=-1.0, gamma=0.1, omegap=0.5)
        with pytest.raises(ParameterError):
            Box(chi0=1.0, delta=0.0)
        with pytest.raises(ParameterError):
            model_from_dict({"kind": "lorentz", "omega0": 1.0})
