"""Piecewise-linear regression with forward selection under cross-validation.

Each delay phase gets a prior generator fitted here: continuous candidates
are tried both as plain linear terms and as single-breakpoint hinges (the
breakpoint searched over a decile grid), categorical candidates as indicator
sets. A candidate enters the model only if it improves k-fold CV mean squared
error by at least a relative threshold, so the selected model never scores
worse than the intercept-only baseline.

The fitted mean is continuous in every continuous predictor: a hinge adds
``hinge_slope * max(x - breakpoint, 0)`` on top of the base slope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

SIGMA_FLOOR_MIN = 0.5
CV_IMPROVEMENT = 0.01


class FitError(ValueError):
    """Not enough usable data to fit, or a degenerate response."""


class MissingPredictorError(KeyError):
    """predict_mean was called without a value for a model predictor."""


@dataclass(frozen=True)
class RegressionTerm:
    """One predictor's contribution to the fitted mean.

    kind 'linear':      slope * x
    kind 'hinge':       slope * x + hinge_slope * max(x - breakpoint, 0)
    kind 'categorical': levels[value] (absent level contributes 0)
    """

    var: str
    kind: str
    slope: float = 0.0
    breakpoint: Optional[float] = None
    hinge_slope: float = 0.0
    levels: dict[str, float] = field(default_factory=dict)

    def contribution(self, value) -> float:
        if self.kind == "categorical":
            return self.levels.get(str(value), 0.0)
        x = float(value)
        out = self.slope * x
        if self.kind == "hinge":
            out += self.hinge_slope * max(x - self.breakpoint, 0.0)
        return out


@dataclass(frozen=True)
class PiecewiseRegression:
    response: str
    intercept: float
    terms: tuple[RegressionTerm, ...]
    sigma: float
    cv_score: float

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def predictors(self) -> list[str]:
        return [t.var for t in self.terms]

    def breakpoint_of(self, var: str) -> Optional[float]:
        for t in self.terms:
            if t.var == var:
                return t.breakpoint
        return None


def predict_mean(model: PiecewiseRegression, values: Mapping[str, object]) -> float:
    """Deterministic mean of the normal prior at one predictor configuration."""
    total = model.intercept
    for term in model.terms:
        if term.var not in values:
            raise MissingPredictorError(term.var)
        total += term.contribution(values[term.var])
    return total


def fit_piecewise(data: Sequence[Mapping[str, object]], response: str,
                  candidates: Sequence[str], folds: int = 5, *,
                  improvement: float = CV_IMPROVEMENT,
                  sigma_floor: float = SIGMA_FLOOR_MIN,
                  breakpoint_quantiles: Optional[Sequence[float]] = None,
                  max_terms: Optional[int] = None) -> PiecewiseRegression:
    """Forward-select predictors for ``response`` and fit the final model.

    Only cases with the response and every candidate present are used; the
    precondition is at least ``10 * len(candidates)`` such cases. Folds are
    assigned after sorting cases canonically, so refitting a permutation of
    the same data reproduces the selection exactly. Hinge breakpoints are
    searched over ``breakpoint_quantiles`` of each predictor (deciles by
    default).
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    cases = [c for c in data if _complete(c, response, candidates)]
    min_cases = max(10 * len(candidates), folds)
    if len(cases) < min_cases:
        raise FitError(f"need at least {min_cases} complete cases, got {len(cases)}")

    cases = sorted(cases, key=lambda c: _canonical_key(c, response, candidates))
    y = np.array([float(c[response]) for c in cases])
    if np.ptp(y) == 0.0:
        # Constant response: selection is pointless, return the intercept model.
        return _finalize(response, [], cases, y, folds, sigma_floor,
                         cv_score=0.0)

    fold_ids = np.arange(len(cases)) % folds
    quantiles = (np.arange(0.1, 0.91, 0.1) if breakpoint_quantiles is None
                 else np.asarray(list(breakpoint_quantiles), dtype=float))

    selected: list[_CandidateVariant] = []
    current_cv = _cv_mse(cases, y, fold_ids, selected, folds)
    baseline_cv = current_cv
    remaining = list(candidates)
    limit = max_terms if max_terms is not None else len(candidates)

    while remaining and len(selected) < limit:
        best: Optional[tuple[float, int, int, _CandidateVariant]] = None
        for ci, cand in enumerate(remaining):
            for vi, variant in enumerate(_variants(cand, cases, quantiles)):
                cv = _cv_mse(cases, y, fold_ids, selected + [variant], folds)
                key = (cv, ci, vi)
                if best is None or key < (best[0], best[1], best[2]):
                    best = (cv, ci, vi, variant)
        if best is None:
            break
        cv, ci, _, variant = best
        if cv <= current_cv * (1.0 - improvement):
            selected.append(variant)
            current_cv = cv
            remaining.pop(ci)
        else:
            break

    return _finalize(response, selected, cases, y, folds, sigma_floor,
                     cv_score=min(current_cv, baseline_cv))


@dataclass(frozen=True)
class _CandidateVariant:
    """A candidate predictor in one functional form, pre-selection."""

    var: str
    kind: str                      # linear | hinge | categorical
    breakpoint: Optional[float] = None
    levels: tuple[str, ...] = ()

    def columns(self, cases: Sequence[Mapping[str, object]]) -> np.ndarray:
        if self.kind == "categorical":
            vals = [str(c[self.var]) for c in cases]
            return np.array([[1.0 if v == lvl else 0.0 for lvl in self.levels]
                             for v in vals])
        x = np.array([float(c[self.var]) for c in cases])
        if self.kind == "linear":
            return x[:, None]
        return np.column_stack([x, np.maximum(x - self.breakpoint, 0.0)])


def _variants(cand: str, cases: Sequence[Mapping[str, object]],
              quantiles: np.ndarray) -> list[_CandidateVariant]:
    values = [c[cand] for c in cases]
    if any(isinstance(v, str) for v in values):
        levels = sorted({str(v) for v in values})
        # First level is the baseline absorbed by the intercept.
        return [_CandidateVariant(cand, "categorical", levels=tuple(levels[1:]))]
    x = np.array([float(v) for v in values])
    out = [_CandidateVariant(cand, "linear")]
    grid = np.unique(np.quantile(x, quantiles))
    lo, hi = x.min(), x.max()
    for bp in grid:
        if lo < bp < hi:
            out.append(_CandidateVariant(cand, "hinge", breakpoint=float(bp)))
    return out


def _design(cases, variants: Sequence[_CandidateVariant]) -> np.ndarray:
    cols = [np.ones((len(cases), 1))]
    cols += [v.columns(cases) for v in variants]
    return np.hstack(cols)


def _cv_mse(cases, y: np.ndarray, fold_ids: np.ndarray,
            variants: Sequence[_CandidateVariant], folds: int) -> float:
    X = _design(cases, variants)
    sq_errors = np.empty_like(y)
    for f in range(folds):
        test = fold_ids == f
        train = ~test
        beta, *_ = np.linalg.lstsq(X[train], y[train], rcond=None)
        sq_errors[test] = (y[test] - X[test] @ beta) ** 2
    return float(sq_errors.mean())


def _finalize(response: str, variants: list[_CandidateVariant], cases,
              y: np.ndarray, folds: int, sigma_floor: float,
              cv_score: float) -> PiecewiseRegression:
    X = _design(cases, variants)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    dof = max(len(cases) - X.shape[1], 1)
    sigma = max(float(np.sqrt(resid @ resid / dof)), sigma_floor)

    terms = []
    pos = 1
    for v in variants:
        if v.kind == "categorical":
            n = len(v.levels)
            terms.append(RegressionTerm(
                var=v.var, kind="categorical",
                levels={lvl: float(beta[pos + i]) for i, lvl in enumerate(v.levels)}))
            pos += n
        elif v.kind == "linear":
            terms.append(RegressionTerm(var=v.var, kind="linear",
                                        slope=float(beta[pos])))
            pos += 1
        else:
            terms.append(RegressionTerm(var=v.var, kind="hinge",
                                        slope=float(beta[pos]),
                                        breakpoint=v.breakpoint,
                                        hinge_slope=float(beta[pos + 1])))
            pos += 2
    return PiecewiseRegression(response=response, intercept=float(beta[0]),
                               terms=tuple(terms), sigma=sigma,
                               cv_score=cv_score)


def _complete(case: Mapping[str, object], response: str,
              candidates: Sequence[str]) -> bool:
    for key in (response, *candidates):
        if key not in case:
            return False
        v = case[key]
        if v is None:
            return False
        if not isinstance(v, str) and not np.isfinite(float(v)):
            return False
    return True


def _canonical_key(case, response, candidates) -> tuple:
    out = []
    for key in (response, *candidates):
        v = case[key]
        out.append((1, v) if isinstance(v, str) else (0, float(v)))
    return tuple(out)
