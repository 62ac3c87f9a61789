import math

import numpy as np
import pytest

from stablesde.drifts import (
    constant_drift,
    drift_from_config,
    example1_drift,
    holder_seminorm_estimate,
    tanaka_drift,
    zero_drift,
)
from stablesde.errors import DomainError, UnsupportedDimensionError


class TestExample1:
    def test_formula_value(self):
        # r = e^{-4}: r^{0.5} / |log r| = e^{-2} / 4
        d = example1_drift(0.5, 1.0)
        x = math.exp(-4.0)
        assert math.isclose(d.scalar(x), math.exp(-2.0) / 4.0, rel_tol=1e-12)
        assert math.isclose(d.scalar(x), 0.03383, abs_tol=5e-5)

    def test_zero_at_origin(self):
        d = example1_drift(0.5)
        assert d.scalar(0.0) == 0.0

    def test_clamp_at_unit_radius(self):
        d = example1_drift(0.5, scale=2.0)
        assert d.scalar(1.0) == 2.0
        assert d.scalar(-1.0) == 2.0
        assert d.params["at_unit_radius"] == "clamp"

    def test_bounded_by_scale(self):
        d = example1_drift(0.3, scale=1.5)
        x = np.linspace(-50, 50, 10001)
        vals = d(x)
        assert np.all(np.abs(vals) <= 1.5 + 1e-15)
        assert d.sup_bound == 1.5

    def test_multidimensional_direction(self):
        d = example1_drift(0.5, d=2)
        out = d(np.array([[0.3, 0.4]]))
        assert out.shape == (1, 2)
        assert out[0, 1] == 0.0 and out[0, 0] > 0.0
        r = 0.5
        assert math.isclose(out[0, 0], min(1.0, r**0.5 / abs(math.log(r))), rel_tol=1e-12)

    def test_local_seminorm_vanishes(self):
        # small-separation windowed sup tends to 0; below 0.05 for delta < 1e-8
        d = example1_drift(0.5)
        _, profile = holder_seminorm_estimate(d, exponent=0.5, pair_budget=2 * 10**4)
        small = [sup for delta, sup in profile if delta < 1e-8]
        assert small, "profile grid must reach below 1e-8"
        assert max(small) < 0.05


class TestTanaka:
    def test_values(self):
        d = tanaka_drift(0.25)
        assert math.isclose(d.scalar(0.5), 0.5**0.25, rel_tol=1e-12)
        assert math.isclose(d.scalar(0.5), 0.8409, abs_tol=5e-5)
        assert d.scalar(-2.0) == -1.0
        assert d.scalar(0.0) == 0.0

    def test_odd_to_machine_precision(self):
        d = tanaka_drift(0.6)
        x = np.linspace(-3, 3, 1001)
        np.testing.assert_array_equal(d(x), -d(-x))

    def test_bounded_by_one(self):
        d = tanaka_drift(0.75)
        x = np.linspace(-100, 100, 10**6 + 1)
        assert np.max(np.abs(d(x))) <= 1.0
        assert d.sup_bound == 1.0

    def test_dimension_error(self):
        with pytest.raises(UnsupportedDimensionError):
            tanaka_drift(0.25, d=2)

    def test_beta_domain(self):
        for bad in (0.0, 1.0, -0.5):
            with pytest.raises(DomainError):
                tanaka_drift(bad)

    def test_divergent_profile_below_threshold(self):
        # exponent 1-alpha > beta: ratio at pairs (0, delta) is
        # delta^{beta-(1-alpha)}, so the windowed sup blows up as delta -> 0
        d = tanaka_drift(0.25)
        _, profile = holder_seminorm_estimate(d, exponent=0.5, pair_budget=2 * 10**4)
        deltas = np.array([p[0] for p in profile])
        sups = np.array([p[1] for p in profile])
        sel = (deltas < 1e-2) & (deltas > 1e-12)
        # analytic check at the structured pairs: sup >= delta^{-0.25} growth
        expect = deltas[sel] ** (0.25 - 0.5)
        assert np.all(sups[sel] >= 0.9 * expect)


class TestClampedPowerSeminorm:
    def test_global_estimate_near_one(self):
        # b(x) = min(1, |x|^{1-alpha}): concave-power subadditivity makes the
        # global (1-alpha)-seminorm exactly 1, approached at pairs (0, y)
        def evaluator(x):
            x = np.asarray(x, dtype=np.float64)
            return np.minimum(1.0, np.abs(x) ** 0.5)

        from stablesde.drifts import Drift

        d = Drift(name="plain_power", dim=1, evaluator=evaluator, sup_bound=1.0)
        est, _ = holder_seminorm_estimate(d, exponent=0.5, pair_budget=2 * 10**4)
        assert est <= 1.0 + 1e-9
        assert est > 0.98


class TestSeminormEstimator:
    def test_monotone_in_budget(self):
        d = tanaka_drift(0.4)
        e1, _ = holder_seminorm_estimate(d, exponent=0.5, pair_budget=10**4)
        e2, _ = holder_seminorm_estimate(d, exponent=0.5, pair_budget=3 * 10**4)
        assert e2 >= e1

    def test_constant_drift_zero(self):
        est, profile = holder_seminorm_estimate(constant_drift([0.7]), 0.5)
        assert est == 0.0
        assert all(sup == 0.0 for _, sup in profile)

    def test_budget_domain(self):
        with pytest.raises(DomainError):
            holder_seminorm_estimate(tanaka_drift(0.3), 0.5, pair_budget=100)

    def test_exponent_domain(self):
        with pytest.raises(DomainError):
            holder_seminorm_estimate(tanaka_drift(0.3), 0.0)


class TestConfig:
    def test_round_trip_constructors(self):
        d = drift_from_config({"drift": "tanaka", "beta": 0.25})
        assert d.name == "tanaka" and d.params["beta"] == 0.25
        d = drift_from_config({"drift": "example1", "alpha": 0.5, "scale": 2.0})
        assert d.name == "example1" and d.sup_bound == 2.0
        d = drift_from_config({"drift": "constant", "c": [0.3]})
        assert d.scalar(5.0) == 0.3
        d = drift_from_config({"drift": "zero", "d": 2})
        assert np.all(d(np.ones((3, 2))) == 0.0)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            drift_from_config({"drift": "quadratic"})


class TestZeroConstant:
    def test_kernel_ids(self):
        assert zero_drift(1).kernel_id == 0
        assert constant_drift([1.0]).kernel_id == 1
        assert tanaka_drift(0.5).kernel_id == 2
        assert example1_drift(0.5).kernel_id == 3
        assert example1_drift(0.5, d=3).kernel_id is None
