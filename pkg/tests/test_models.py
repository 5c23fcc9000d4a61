import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclog.errors import NotAnEquilibrium
from fraclog.models import (
    INCONCLUSIVE,
    STABLE,
    UNSTABLE,
    Cubic,
    Quadratic,
    QuadraticCapacity,
    classify,
    classify_stability,
    critical_horizon,
    equilibria,
    existence_condition,
    lipschitz_bound,
    model_existence,
    perturbation_samples,
    perturbed_system,
    rhs,
    rhs_derivative,
)
from fraclog.operators import linear_solution
from fraclog.order import FractionalOrder

HALF = FractionalOrder(0.5, 0.5, 1.0)
C1_WORKED = 0.5 / math.gamma(1.5) + 0.5 / math.gamma(2.0)

positive = st.floats(0.05, 5.0)


@st.composite
def models(draw):
    kind = draw(st.sampled_from(["q", "qc", "c"]))
    r = draw(positive)
    if kind == "q":
        return Quadratic(r)
    if kind == "qc":
        return QuadraticCapacity(r, draw(positive))
    k = draw(positive)
    return Cubic(r, k, draw(st.floats(0.01, 0.99)) * k)


class TestRightHandSides:
    def test_examples(self):
        assert rhs(Quadratic(0.5), 0.0) == 0
        assert rhs(QuadraticCapacity(0.5, 2.0), 1.0) == pytest.approx(0.25, rel=1e-15)
        assert rhs(Cubic(1.0, 2.0, 0.5), 2.0) == 0

    def test_derivative_examples(self):
        r, k, m = 1.3, 2.0, 0.5
        assert rhs_derivative(Quadratic(r), 1.0) == -r
        assert rhs_derivative(Cubic(r, k, m), m) == pytest.approx(r * m * (1 - m / k), rel=1e-15)
        assert rhs_derivative(Cubic(r, k, m), k) == pytest.approx(-r * (k - m), rel=1e-15)

    def test_equilibria(self):
        assert equilibria(Quadratic(0.5)) == [0, 1]
        assert equilibria(QuadraticCapacity(0.5, 2.0)) == [0, 2]
        assert equilibria(Cubic(1.0, 2.0, 0.5)) == [0, 0.5, 2]

    def test_cubic_threshold_must_be_below_capacity(self):
        with pytest.raises(ValueError):
            Cubic(1.0, 2.0, 2.0)
        with pytest.raises(ValueError):
            Cubic(1.0, 2.0, 3.0)

    @pytest.mark.parametrize("factory", [lambda: Quadratic(0.0), lambda: QuadraticCapacity(1, -2),
                                         lambda: Cubic(-1, 2, 0.5)])
    def test_parameters_positive(self, factory):
        with pytest.raises(ValueError):
            factory()

    @settings(max_examples=40, deadline=None)
    @given(model=models())
    def test_equilibria_are_roots(self, model):
        for e in equilibria(model):
            assert rhs(model, e) == 0.0

    @settings(max_examples=20, deadline=None)
    @given(model=models(), xs=st.lists(st.floats(-3, 3), min_size=20, max_size=20))
    def test_derivative_matches_finite_differences(self, model, xs):
        step = 1e-5
        for x in xs:
            fd = (rhs(model, x + step) - rhs(model, x - step)) / (2 * step)
            d = rhs_derivative(model, x)
            assert abs(d - fd) <= 1e-8 * max(1.0, abs(d))


class TestStability:
    def test_quadratic(self):
        assert classify_stability(Quadratic(0.5)).as_dict() == {0.0: UNSTABLE, 1.0: STABLE}

    def test_capacity(self):
        assert classify_stability(QuadraticCapacity(0.5, 2.0)).as_dict() == {0.0: UNSTABLE,
                                                                             2.0: STABLE}

    def test_cubic(self):
        report = classify_stability(Cubic(1.0, 2.0, 0.5))
        assert report.as_dict() == {0.0: STABLE, 0.5: UNSTABLE, 2.0: STABLE}
        assert report.stable == [0.0, 2.0]

    def test_classify(self):
        assert classify(-1e-300) == STABLE
        assert classify(2.0) == UNSTABLE
        assert classify(0.0) == INCONCLUSIVE

    @settings(max_examples=40, deadline=None)
    @given(model=models(), c=st.floats(0.01, 100))
    def test_scale_invariance(self, model, c):
        import dataclasses

        scaled = dataclasses.replace(model, r=model.r * c)
        a = [e.classification for e in classify_stability(model)]
        b = [e.classification for e in classify_stability(scaled)]
        assert a == b

    def test_perturbed_system(self):
        assert perturbed_system(Quadratic(0.5), 1.0, 0.3) == (-0.5, pytest.approx(-0.7))
        r, k, m = 1.0, 2.0, 0.5
        assert perturbed_system(Cubic(r, k, m), 0.0, 0.8) == (-r * m, 0.8)
        with pytest.raises(NotAnEquilibrium):
            perturbed_system(Quadratic(0.5), 0.5, 0.3)

    def test_zero_perturbation(self):
        rho, alpha0 = perturbed_system(Quadratic(0.5), 1.0, 1.0)
        assert alpha0 == 0
        assert all(linear_solution(rho, alpha0, HALF, t) == 0 for t in (1, 10))

    def test_stable_quadratic_perturbation_decays(self):
        samples = perturbation_samples(Quadratic(0.5), HALF, 0.5)
        decay = samples[1.0]
        assert all(a > b for a, b in zip(decay, decay[1:]))
        growth = samples[0.0]
        assert all(a < b for a, b in zip(growth, growth[1:]))


class TestExistence:
    def test_lipschitz_examples(self):
        assert lipschitz_bound(Quadratic(0.5), 1.0) == pytest.approx(1.5, rel=1e-15)
        assert lipschitz_bound(Cubic(1.0, 2.0, 0.5), 1.0) == pytest.approx(2.5, rel=1e-15)
        assert lipschitz_bound(Quadratic(0.7), 1e-12) == pytest.approx(0.7, rel=1e-11)
        assert lipschitz_bound(QuadraticCapacity(0.5, 2.0), 1.0) == pytest.approx(1.0)

    def test_zero_lipschitz(self):
        report = existence_condition(HALF, 0.0, 10.0, 0.0)
        assert report.condition_value == 0 and report.satisfied
        assert critical_horizon(HALF, 0.0, 0.0) == math.inf

    def test_worked_example(self):
        report = existence_condition(HALF, 0.0, 1.0, 1.0)
        assert abs(report.condition_value - C1_WORKED) <= 1e-12
        assert report.branch == "mu-ne-1"
        assert not report.satisfied

    def test_mu_equal_one_branch(self):
        # gamma = 1, theta = 0.5, T = 1: (1/2)/Gamma(1) + (1/2)/Gamma(1.5)
        report = existence_condition(HALF, 0.0, 1.0, 1.0, mu_eq_1=True)
        assert report.condition_value == pytest.approx(0.5 + 0.5 / math.gamma(1.5), rel=1e-14)
        assert report.branch == "mu-eq-1" and report.warnings

    def test_critical_horizon_against_bisection(self):
        def c1(T):
            return existence_condition(HALF, 0.0, T, 1.0).condition_value

        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if c1(mid) < 1 else (lo, mid)
        t_star = critical_horizon(HALF, 0.0, 1.0)
        assert t_star == pytest.approx(0.5 * (lo + hi), abs=1e-10)
        assert existence_condition(HALF, 0.0, t_star * 0.999, 1.0).satisfied
        assert not existence_condition(HALF, 0.0, t_star * 1.001, 1.0).satisfied

    def test_shifted_origin(self):
        a = existence_condition(HALF, 0.0, 0.7, 1.3).condition_value
        b = existence_condition(HALF, 5.0, 5.7, 1.3).condition_value
        assert a == pytest.approx(b, rel=1e-13)
        assert critical_horizon(HALF, 5.0, 1.3) == pytest.approx(
            5.0 + critical_horizon(HALF, 0.0, 1.3), rel=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(T1=st.floats(0.01, 5), T2=st.floats(0.01, 5), A1=st.floats(0.01, 5),
           A2=st.floats(0.01, 5), gamma=st.sampled_from([1.0, 2.0, 3.0]))
    def test_monotone_in_T_and_A(self, T1, T2, A1, A2, gamma):
        ord = FractionalOrder(0.5, 0.5, gamma)
        (T1, T2), (A1, A2) = sorted((T1, T2)), sorted((A1, A2))
        c = lambda T, A: existence_condition(ord, 0.0, T, A).condition_value
        if T1 < T2:
            assert c(T1, A1) < c(T2, A1)
        if A1 < A2:
            assert c(T1, A1) < c(T1, A2)

    @settings(max_examples=30, deadline=None)
    @given(T=st.floats(0.01, 5), A=st.floats(0.01, 5))
    def test_satisfied_flag(self, T, A):
        report = existence_condition(HALF, 0.0, T, A)
        assert report.satisfied == (report.condition_value < 1)

    def test_non_integer_gamma(self):
        ord = FractionalOrder(0.5, 0.5, 1.5)
        value = existence_condition(ord, 0.0, 1.0, 1.0).condition_value
        with mpmath.workdps(30):
            terms = float(mpmath.nsum(
                lambda i: mpmath.binomial(1.5, i) * mpmath.mpf(0.5) ** i / mpmath.mpf(0.5) ** (i - 1)
                * mpmath.rgamma(0.5 * i + 1.5), [0, mpmath.inf]))
        assert value == pytest.approx(terms, rel=1e-12)

    def test_negative_cubic_bound_is_flagged(self):
        model = Cubic(1.0, 2.0, 1.5)
        assert lipschitz_bound(model, 0.1) < 0
        report = model_existence(model, HALF, 0.0, 1.0, 0.1)
        assert report.lipschitz_A < 0
        assert report.condition_value == 0 and report.satisfied
        assert any("not a valid bound" in w for w in report.warnings)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            existence_condition(HALF, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            existence_condition(HALF, 0.0, 1.0, -1.0)
        with pytest.raises(ValueError):
            lipschitz_bound(Quadratic(0.5), 0.0)
