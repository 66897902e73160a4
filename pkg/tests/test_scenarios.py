import json
import math

import numpy as np
import pytest

from maxdiq.errors import ParameterError, UnsupportedConfigurationError
from maxdiq.kernels import KernelRequest, kernel_Z, uniform_grid
from maxdiq.scenarios import (
    DEFAULT_PARAMS,
    SUPPORTED_REFERENCES,
    ScenarioSpec,
    box_media,
    load_spec,
    reference_kernel,
    run_scenario,
)


class TestReferences:
    def test_vacuum_half_period(self):
        z = reference_kernel("vacuum", "Z", {"omega_q": 1.0}, [math.pi])
        assert z.values[0] == pytest.approx(-1.0, abs=1e-15)
        assert z.method == "closed-form"

    def test_vacuum_backward(self):
        z = reference_kernel("vacuum", "Z", {"omega_q": 2.0}, [0.3], sign=-1)
        assert z.values[0] == pytest.approx(np.exp(0.6j))

    def test_box_limit(self):
        # chi_e0 = 3, chi_m0 = 1: effective frequency 1/sqrt(8), impedance ratio sqrt(1/2)
        t = np.array([0.0, 1.0, 7.0])
        z = reference_kernel("box-limit", "Z", {"chi_e0": 3.0, "chi_m0": 1.0, "omega_q": 1.0}, t)
        w = 1 / math.sqrt(8)
        np.testing.assert_allclose(z.values, np.cos(w * t) - 1j * math.sqrt(0.5) * np.sin(w * t),
                                   atol=1e-15)

    def test_box_limit_bath_kernels_vanish(self):
        p = {"chi_e0": 3.0, "chi_m0": 1.0, "omega_q": 1.0, "omega_k": 0.5}
        for kind in ("zeta", "eta"):
            assert np.all(reference_kernel("box-limit", kind, p, [0.0, 1.0]).values == 0)

    def test_step_underdamped(self):
        om = math.sqrt(3.75)
        z = reference_kernel("step", "Z", {"beta": 1.0, "omega_q": 2.0}, [1.0])
        ref = math.exp(-0.5) * (math.sin(om) / (2 * om) + math.cos(om) - 2j * math.sin(om) / om)
        assert z.values[0] == pytest.approx(ref, abs=1e-15)

    def test_step_critical_limit(self):
        p = {"beta": 4.0, "omega_q": 2.0}
        near = reference_kernel("step", "Z", {"beta": 4.0 - 1e-7, "omega_q": 2.0}, [1.5])
        assert reference_kernel("step", "Z", p, [1.5]).values[0] == pytest.approx(
            near.values[0], abs=1e-6)

    @pytest.mark.parametrize("name,kind", [("lorentz", "Z"), ("box-limit", "Q"), ("step", "eta")])
    def test_unsupported(self, name, kind):
        with pytest.raises(UnsupportedConfigurationError, match="supported"):
            reference_kernel(name, kind, {}, [0.0])

    def test_lossy_lorentz_has_no_closed_form(self):
        p = {"omega0": 1.0, "omegap": 0.5, "gamma": 0.2, "omega_k": 0.3}
        with pytest.raises(UnsupportedConfigurationError):
            reference_kernel("lorentz", "Q", p, [0.0])

    def test_metadata(self):
        z = reference_kernel("step", "Z", {"beta": 1.0, "omega_q": 2.0}, [0.0])
        assert set(z.metadata) >= {"origin", "reference", "params"}
        assert ("step", "Z") in SUPPORTED_REFERENCES


class TestSpec:
    def test_unknown_name(self):
        with pytest.raises(ParameterError):
            ScenarioSpec("drude")

    def test_unknown_parameter(self):
        with pytest.raises(ParameterError):
            ScenarioSpec("step", {"gamma": 1.0})

    def test_medium_validation(self):
        with pytest.raises(ParameterError):
            ScenarioSpec("box", {"delta": 0.0})

    def test_defaults(self):
        s = ScenarioSpec("step")
        assert s.merged == DEFAULT_PARAMS["step"]
        assert s.grid()[-1] == pytest.approx(10.0)

    def test_magnetic_box_area(self):
        _, m = box_media(3.0, 1.0, 0.1)
        assert m.chi0 == pytest.approx(0.5) and m.role == "magnetic"

    def test_load(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps({"name": "step", "params": {"beta": 5, "omega_q": 1},
                                 "n_points": 512}))
        s = load_spec(p)
        assert s.merged["beta"] == 5.0 and s.n_points == 512


@pytest.fixture(scope="module")
def reports():
    cases = {
        "vacuum": ScenarioSpec("vacuum"),
        "box": ScenarioSpec("box"),
        "step": ScenarioSpec("step"),
        "step_over": ScenarioSpec("step", {"beta": 5.0, "omega_q": 1.0}),
        "lorentz": ScenarioSpec("lorentz"),
        "lorentz_lossy": ScenarioSpec("lorentz", {"gamma": 0.2}),
    }
    return {k: run_scenario(v) for k, v in cases.items()}


class TestRuns:
    @pytest.mark.parametrize("key", ["vacuum", "box", "step", "step_over", "lorentz",
                                     "lorentz_lossy"])
    def test_passes(self, reports, key):
        r = reports[key]
        failed = [c for c in r.checks if c["passed"] is False]
        assert r.passed, failed

    def test_step_checks_present(self, reports):
        names = {c["name"] for c in reports["step"].checks}
        assert {"Z_plus", "Z_minus", "zeta_plus", "decay_Z_plus", "coupling_f2",
                "cross_check_Z_plus", "residual_Z_plus"} <= names

    def test_overdamped_decay_informational(self, reports):
        c = {c["name"]: c for c in reports["step_over"].checks}["decay_Z_plus"]
        assert c["passed"] is None
        assert c["fitted_rate"] == pytest.approx(c["slowest_rate"], rel=1e-3)

    def test_lossless_delta_entry(self, reports):
        c = {c["name"]: c for c in reports["lorentz"].checks}["f2_delta"]
        assert c["passed"] is None and c["frequency"] == 1.0

    def test_kk_in_lossy_run(self, reports):
        c = {c["name"]: c for c in reports["lorentz_lossy"].checks}["kk_closure"]
        assert c["passed"] and c["points"] == 50

    def test_box_bath_kernels_vanish(self, reports, quiet):
        # the squared coupling is linear in the width, the kernels follow its square root
        narrow = run_scenario(ScenarioSpec("box", {"delta": 1e-4}, outputs=("kernels",),
                                           signs=(1,)))

        def sizes(r):
            return {c["name"]: c["deviation"] for c in r.checks if c["name"].endswith("_size")}

        wide = sizes(reports["box"])
        for name, v in sizes(narrow).items():
            assert wide[name] / v == pytest.approx(10.0, rel=0.05)

    def test_deterministic(self, reports):
        again = run_scenario(ScenarioSpec("step"))
        first = reports["step"]
        assert [c["deviation"] for c in again.checks] == [c["deviation"] for c in first.checks]
        for k in first.series:
            np.testing.assert_array_equal(again.series[k].values, first.series[k].values)

    def test_write(self, reports, tmp_path):
        out = reports["step"].write(tmp_path / "step")
        files = {p.name for p in (tmp_path / "step").iterdir()}
        assert {"report.json", "Z_plus.csv", "Z_plus_reference.csv", "f2.csv", "noise.csv"} <= files
        rep = json.loads((tmp_path / "step" / "report.json").read_text())
        assert rep["scenario"] == "step" and rep["passed"] is True
        assert str(out).endswith("step")

    def test_failed_check_recorded(self):
        r = run_scenario(ScenarioSpec("step", tolerances={"step_Z": 1e-30},
                                      outputs=("kernels",), signs=(1,)))
        bad = [c["name"] for c in r.checks if c["passed"] is False]
        assert not r.passed and "Z_plus" in bad


def test_box_width_convergence(quiet):
    t = uniform_grid(20, 401)
    ref = reference_kernel("box-limit", "Z", {"chi_e0": 3.0, "chi_m0": 1.0, "omega_q": 1.0}, t)
    devs = []
    for d in (1e-1, 1e-2, 1e-3):
        e, m = box_media(3.0, 1.0, d)
        z = kernel_Z(KernelRequest(electric=e, magnetic=m, omega_q=1.0, t=t))
        devs.append(float(np.max(np.abs(z.values - ref.values))))
    assert devs[-1] < 1e-2
    for a, b in zip(devs, devs[1:]):
        assert 8 <= a / b <= 12
