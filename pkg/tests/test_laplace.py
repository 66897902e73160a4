import math

import numpy as np
import pytest

from oracles import mp_inverse
from maxdiq.errors import (
    AccuracyWarning,
    ContourRefusedError,
    DivergenceError,
    ParameterError,
)
from maxdiq.laplace import (
    ContourParams,
    RationalImage,
    forward_laplace,
    initial_value,
    invert_contour,
    invert_rational,
    laplace_piecewise_linear,
    polynomial_roots,
)
from maxdiq.medium import Lorentz

W0, WP, WQ = 1.0, 0.5, 2.0
QUARTIC_DEN = [1.0, 0.0, W0 ** 2 + WQ ** 2 + WP ** 2, 0.0, WQ ** 2 * W0 ** 2]
# s (s^2 + w0^2 + wp^2) - i wq (s^2 + w0^2)
QUARTIC_NUM = [1.0, -1j * WQ, W0 ** 2 + WP ** 2, -1j * WQ * W0 ** 2]


class TestResidues:
    def test_first_order(self):
        assert invert_rational(RationalImage([1.0], [1.0, 1.0]), 1.0) == pytest.approx(math.exp(-1))

    def test_cosine_zero(self):
        v = invert_rational(RationalImage([1.0, 0.0], [1.0, 0.0, 4.0]), math.pi / 4)
        assert abs(v) < 1e-15

    def test_quartic_against_mpmath(self):
        img = RationalImage(QUARTIC_NUM, QUARTIC_DEN)
        t = np.array([0.3, 1.0, 7.5, 19.0])
        ref = mp_inverse(QUARTIC_NUM, QUARTIC_DEN, t)
        np.testing.assert_allclose(invert_rational(img, t), ref, rtol=0, atol=1e-13)

    def test_derivative(self):
        img = RationalImage(QUARTIC_NUM, QUARTIC_DEN)
        t = np.linspace(0.5, 5, 7)
        h = 1e-5
        fd = (invert_rational(img, t + h) - invert_rational(img, t - h)) / (2 * h)
        np.testing.assert_allclose(invert_rational(img, t, derivative=1), fd, atol=1e-8)

    def test_double_pole(self):
        # 1/(s+1)^2 -> t e^{-t}
        t = np.linspace(0, 6, 13)
        got = invert_rational(RationalImage([1.0], [1.0, 2.0, 1.0]), t)
        np.testing.assert_allclose(got, t * np.exp(-t), atol=1e-14)

    def test_critically_damped_merge(self):
        # roots a hair apart are merged into one double root
        eps = 1e-9
        den = np.poly([-1 + eps, -1 - eps])
        roots, mult = polynomial_roots(den)
        assert list(mult) == [2] and roots[0] == pytest.approx(-1.0)

    def test_distinct_roots_kept(self):
        roots, mult = polynomial_roots(np.poly([-1.0, -1.001]))
        assert sorted(mult) == [1, 1]

    def test_metadata_json_ready(self):
        _, info = invert_rational(RationalImage([1.0], [1.0, 3.0, 2.0]), 1.0, full_output=True)
        assert sorted(p[0] for p in info["poles"]) == pytest.approx([-2.0, -1.0])
        assert info["multiplicities"] == [1, 1]

    def test_improper_rejected(self):
        with pytest.raises(ParameterError):
            invert_rational(RationalImage([1.0, 0.0], [1.0, 1.0]), 1.0)

    def test_zero_denominator(self):
        with pytest.raises(ParameterError):
            RationalImage([1.0], [0.0, 0.0])

    def test_negative_time(self):
        with pytest.raises(ParameterError):
            invert_rational(RationalImage([1.0], [1.0, 1.0]), -1.0)

    def test_cancellation(self):
        img = RationalImage(np.poly([-2.0]), np.poly([-2.0, -1.0, -3.0]))
        assert len(img.reduced().den) == 3


class TestProperties:
    F = RationalImage([1.0, 2.0], [1.0, 3.0, 5.0, 2.0])
    G = RationalImage([3.0], [1.0, 0.7, 4.0])

    def test_linearity(self):
        t = np.linspace(0, 10, 31)
        lhs = invert_rational(2.5 * self.F + (-1.5) * self.G, t)
        rhs = 2.5 * invert_rational(self.F, t) - 1.5 * invert_rational(self.G, t)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_initial_value(self):
        img = RationalImage([2.0, 1.0], [1.0, 0.4, 3.0])
        assert abs(initial_value(img) - invert_rational(img, 1e-9)) < 1e-6
        assert initial_value(img) == 2.0

    def test_initial_value_callable(self):
        assert initial_value(lambda s: 3.0 / (s + 1.0)) == pytest.approx(3.0, rel=1e-6)

    def test_round_trip(self, quiet):
        s = np.linspace(1, 5, 10)
        f = lambda x: invert_rational(self.F, x).real
        got = np.array([forward_laplace(f, x) for x in s])
        np.testing.assert_allclose(got, self.F(s).real, rtol=1e-6)


class TestContour:
    def test_exponential(self):
        assert abs(invert_contour(lambda s: 1 / (s + 1), 1.0) - math.exp(-1)) < 1e-10

    def test_axis_poles_refused(self):
        with pytest.raises(ContourRefusedError, match="invert_rational"):
            invert_contour(RationalImage([1.0], [1.0, 0.0, 1.0]), math.pi / 2)

    def test_axis_poles_callable(self, quiet):
        # not refused when the image is opaque; accuracy is degraded but usable
        v = invert_contour(lambda s: 1 / (s * s + 1), math.pi / 2)
        assert v == pytest.approx(1.0, abs=1e-3)

    def test_box_integral(self):
        v = invert_contour(lambda s: -np.expm1(-s) / s ** 2, 0.5)
        assert v == pytest.approx(0.5, abs=1e-8)

    def test_box_integral_after_width(self):
        t = np.array([0.25, 1.5, 4.0])
        v = invert_contour(lambda s: -np.expm1(-s) / s ** 2, t)
        np.testing.assert_allclose(v.real, np.minimum(t, 1.0), atol=1e-8)

    def test_quartic_lossy(self):
        img = RationalImage(QUARTIC_NUM, np.polyadd(QUARTIC_DEN, [0.3, 0.0, 0.0, 0.0]))
        t = np.linspace(0.1, 20, 60)
        np.testing.assert_allclose(invert_contour(img, t), invert_rational(img, t), atol=1e-7)

    def test_talbot(self):
        p = ContourParams(method="talbot", nodes=32)
        assert invert_contour(lambda s: 1 / (s + 1), 2.0, p) == pytest.approx(math.exp(-2), abs=1e-10)

    def test_talbot_too_many_nodes(self):
        with pytest.warns(AccuracyWarning, match="Talbot"):
            invert_contour(lambda s: 1 / (s + 1), 2.0, ContourParams(method="talbot", nodes=64))

    def test_zero_time_is_initial_value(self):
        assert invert_contour(lambda s: 2 / (s + 1), 0.0) == pytest.approx(2.0, rel=1e-6)

    def test_metadata(self):
        _, info = invert_contour(lambda s: 1 / (s + 1), [1.0, 2.0], full_output=True)
        assert info["method"] == "dehoog" and info["nodes"] >= 32

    def test_non_finite_image(self):
        with pytest.raises(DivergenceError):
            invert_contour(lambda s: np.full(np.shape(s), np.nan + 0j), 1.0)

    def test_cap_warns(self):
        p = ContourParams(nodes=8, max_nodes=8, rtol=1e-15)
        with pytest.warns(AccuracyWarning):
            invert_contour(lambda s: -np.expm1(-s) / s ** 2, 0.999, p)

    @pytest.mark.parametrize("kw", [{"nodes": 4}, {"scale": 0.0}, {"method": "euler"},
                                    {"accel_terms": 3}])
    def test_params_invariants(self, kw):
        with pytest.raises(ParameterError):
            ContourParams(**kw)


class TestForward:
    def test_unit_step(self):
        assert forward_laplace(lambda t: 1.0, 2.0) == pytest.approx(0.5, rel=1e-10)

    def test_lorentz(self):
        m = Lorentz(omega0=1.0, gamma=0.2, omegap=0.5)
        assert forward_laplace(m.chi_time, 1.0) == pytest.approx(0.25 / 2.2, rel=1e-9)
        assert 0.25 / 2.2 == pytest.approx(0.113636, abs=1e-6)

    def test_damped_cosine(self):
        v = forward_laplace(lambda t: math.exp(-t) * math.cos(t), 1.0)
        assert v == pytest.approx(0.4, rel=1e-10)

    def test_complex_argument(self):
        v = forward_laplace(lambda t: math.exp(-t), 1.0 + 3.0j)
        assert v == pytest.approx(1 / (2 + 3j), rel=1e-9)

    def test_tail_warning(self):
        with pytest.warns(AccuracyWarning):
            _, info = forward_laplace(lambda t: 1.0, 1.0, tmax=2.0, full_output=True)
        assert info["tail_estimate"] == pytest.approx(math.exp(-2))

    def test_left_half_plane(self):
        with pytest.raises(ParameterError):
            forward_laplace(lambda t: 1.0, -0.5)


class TestPiecewiseLinear:
    def test_exact_for_hat(self):
        x = np.array([0.0, 1.0, 2.0])
        y = np.array([0.0, 1.0, 0.0])
        s = 0.7
        ref = (1 - math.exp(-s)) ** 2 / s ** 2
        assert laplace_piecewise_linear(x, y, s) == pytest.approx(ref, rel=1e-13)

    def test_small_argument(self):
        x = np.array([0.0, 1.0])
        y = np.array([1.0, 1.0])
        assert laplace_piecewise_linear(x, y, 1e-9) == pytest.approx(1.0, rel=1e-8)
