import numpy as np
import pytest

from delayprop.regression import (FitError, MissingPredictorError,
                                  PiecewiseRegression, RegressionTerm,
                                  fit_piecewise, predict_mean)


def linear_cases(rng, n, slope=2.0, intercept=0.0, noise=1.0,
                 with_junk=True, lo=0.0, hi=100.0):
    x = rng.uniform(lo, hi, size=n)
    y = intercept + slope * x + rng.normal(0.0, noise, size=n)
    cases = []
    for i in range(n):
        c = {"x": float(x[i]), "y": float(y[i])}
        if with_junk:
            c["junk"] = float(rng.uniform(-1, 1))
        cases.append(c)
    return cases


def hinge_cases(rng, n, breakpoint=40.0, slope_low=0.1, slope_high=1.0,
                noise=1.0):
    x = rng.uniform(0.0, 100.0, size=n)
    y = slope_low * x + (slope_high - slope_low) * np.maximum(x - breakpoint, 0.0)
    y = y + rng.normal(0.0, noise, size=n)
    return [{"x": float(a), "y": float(b)} for a, b in zip(x, y)]


class TestFit:
    def test_constant_response_intercept_only(self):
        cases = [{"y": 3.0, "x": float(i)} for i in range(40)]
        m = fit_piecewise(cases, "y", ["x"])
        assert m.predictors == []
        assert m.intercept == pytest.approx(3.0)
        assert m.sigma == 0.5  # floored
        assert predict_mean(m, {}) == pytest.approx(3.0)

    def test_selects_signal_rejects_junk(self):
        rng = np.random.default_rng(7)
        cases = linear_cases(rng, 400)
        m = fit_piecewise(cases, "y", ["x", "junk"])
        assert m.predictors == ["x"]
        term = m.terms[0]
        assert term.kind in ("linear", "hinge")
        slope = term.slope if term.kind == "linear" else None
        if term.kind == "hinge":
            # A hinge fit of straight-line data keeps both segments near 2.
            assert term.slope == pytest.approx(2.0, abs=0.1)
            assert term.slope + term.hinge_slope == pytest.approx(2.0, abs=0.1)
        else:
            assert slope == pytest.approx(2.0, abs=0.1)

    def test_hinge_breakpoint_recovered(self):
        rng = np.random.default_rng(11)
        cases = hinge_cases(rng, 600, breakpoint=40.0)
        m = fit_piecewise(cases, "y", ["x"])
        assert m.predictors == ["x"]
        term = m.terms[0]
        assert term.kind == "hinge"
        # Decile grid on U(0, 100) has ~10-unit steps.
        assert abs(term.breakpoint - 40.0) <= 12.0
        assert term.slope == pytest.approx(0.1, abs=0.15)
        assert term.slope + term.hinge_slope == pytest.approx(1.0, abs=0.15)

    def test_categorical_predictor(self):
        rng = np.random.default_rng(3)
        cases = []
        for i in range(300):
            lvl = ("red", "blue", "green")[i % 3]
            mean = {"red": 0.0, "blue": 5.0, "green": -4.0}[lvl]
            cases.append({"y": mean + float(rng.normal(0, 0.5)), "c": lvl})
        m = fit_piecewise(cases, "y", ["c"])
        assert m.predictors == ["c"]
        mu_red = predict_mean(m, {"c": "red"})
        mu_blue = predict_mean(m, {"c": "blue"})
        mu_green = predict_mean(m, {"c": "green"})
        assert mu_blue - mu_red == pytest.approx(5.0, abs=0.3)
        assert mu_green - mu_red == pytest.approx(-4.0, abs=0.3)

    def test_too_few_cases(self):
        with pytest.raises(FitError):
            fit_piecewise([{"y": 1.0, "x": 2.0}] * 5, "y", ["x"])

    def test_incomplete_cases_dropped(self):
        rng = np.random.default_rng(5)
        cases = linear_cases(rng, 200, with_junk=False)
        cases += [{"y": 1.0}] * 50  # missing predictor
        m = fit_piecewise(cases, "y", ["x"])
        assert m.predictors == ["x"]

    def test_selection_never_worse_than_intercept(self):
        rng = np.random.default_rng(13)
        for trial in range(5):
            cases = [{"y": float(rng.normal()), "a": float(rng.normal()),
                      "b": float(rng.normal())} for _ in range(120)]
            m = fit_piecewise(cases, "y", ["a", "b"])
            base = fit_piecewise(cases, "y", [])
            assert m.cv_score <= base.cv_score + 1e-9

    def test_permutation_invariance(self):
        rng = np.random.default_rng(17)
        cases = hinge_cases(rng, 300)
        m1 = fit_piecewise(cases, "y", ["x"])
        perm = list(cases)
        rng.shuffle(perm)
        m2 = fit_piecewise(perm, "y", ["x"])
        assert m1.predictors == m2.predictors
        assert m1.intercept == m2.intercept
        assert [t.breakpoint for t in m1.terms] == [t.breakpoint for t in m2.terms]
        assert m1.cv_score == m2.cv_score

    def test_sigma_positive_required(self):
        with pytest.raises(ValueError):
            PiecewiseRegression(response="y", intercept=0.0, terms=(),
                                sigma=0.0, cv_score=1.0)


class TestPredict:
    def test_intercept_only(self):
        m = PiecewiseRegression("y", 4.5, (), sigma=1.0, cv_score=0.0)
        assert predict_mean(m, {"anything": 99}) == 4.5

    def test_linear(self):
        m = PiecewiseRegression(
            "y", 1.0, (RegressionTerm("x", "linear", slope=2.0),),
            sigma=1.0, cv_score=0.0)
        assert predict_mean(m, {"x": 3.0}) == 7.0

    def test_hinge(self):
        m = PiecewiseRegression(
            "y", 2.0,
            (RegressionTerm("x", "hinge", slope=0.0, breakpoint=40.0,
                            hinge_slope=1.0),),
            sigma=1.0, cv_score=0.0)
        assert predict_mean(m, {"x": 50.0}) == 12.0
        assert predict_mean(m, {"x": 30.0}) == 2.0

    def test_missing_predictor_raises(self):
        m = PiecewiseRegression(
            "y", 0.0, (RegressionTerm("x", "linear", slope=1.0),),
            sigma=1.0, cv_score=0.0)
        with pytest.raises(MissingPredictorError):
            predict_mean(m, {"z": 1.0})

    def test_continuity_at_breakpoint(self):
        m = PiecewiseRegression(
            "y", 0.0,
            (RegressionTerm("x", "hinge", slope=0.3, breakpoint=40.0,
                            hinge_slope=0.9),),
            sigma=1.0, cv_score=0.0)
        eps = 1e-9
        below = predict_mean(m, {"x": 40.0 - eps})
        at = predict_mean(m, {"x": 40.0})
        above = predict_mean(m, {"x": 40.0 + eps})
        assert below == pytest.approx(at, abs=1e-6)
        assert above == pytest.approx(at, abs=1e-6)

    def test_piecewise_linear_shape(self):
        rng = np.random.default_rng(23)
        m = fit_piecewise(hinge_cases(rng, 400), "y", ["x"])
        xs = np.linspace(0.0, 100.0, 401)
        ys = np.array([predict_mean(m, {"x": float(x)}) for x in xs])
        # Second differences vanish except around the single kink, which can
        # straddle two grid intervals.
        dd = np.abs(np.diff(ys, 2))
        assert (dd > 1e-6).sum() <= 2

    def test_unseen_categorical_level_is_baseline(self):
        m = PiecewiseRegression(
            "y", 1.0,
            (RegressionTerm("c", "categorical", levels={"blue": 5.0}),),
            sigma=1.0, cv_score=0.0)
        assert predict_mean(m, {"c": "red"}) == 1.0
        assert predict_mean(m, {"c": "blue"}) == 6.0


def test_linear_emission_recovery_within_standard_error():
    # Means recovered from generated linear-emission data sit within two
    # standard errors of the generating line (fixed seed).
    rng = np.random.default_rng(31)
    n, sigma = 5000, 4.0
    cases = linear_cases(rng, n, slope=1.5, intercept=3.0, noise=sigma,
                         with_junk=False)
    m = fit_piecewise(cases, "y", ["x"])
    tol = 2.0 * sigma / np.sqrt(n)
    for x in (30.0, 50.0, 70.0):
        truth = 3.0 + 1.5 * x
        assert abs(predict_mean(m, {"x": x}) - truth) <= tol
