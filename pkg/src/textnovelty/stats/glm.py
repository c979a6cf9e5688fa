"""GLM estimation by iteratively reweighted least squares.

Families share canonical links, so the score is X'W(y - mu) with prior
weights W and convergence is declared when its max-norm drops below the
tolerance. Fractional logit is the Papke-Wooldridge quasi-likelihood:
the Bernoulli machinery applied to outcomes in [0, 1].

Standard errors: classical from the inverse expected information, robust
from the HC1 sandwich. Collinear columns are dropped by pivoted QR and
reported. Perfect separation in binary models shows up as a diverging
coefficient and flags the fit instead of failing it. Fixed effects enter
as reference-coded dummy columns, or by within-group demeaning for the
identity family (exact only for a single grouping, so the within mode
demeans on the interaction of the requested effects).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit, gammaln
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

FAMILIES = ("logit", "fractional_logit", "poisson", "identity")

_ETA_CLIP = 500.0
_MU_EPS = 1e-12
SEPARATION_THRESHOLD = 30.0


def _family_mu(family: str, eta: np.ndarray) -> np.ndarray:
    if family in ("logit", "fractional_logit"):
        return expit(eta)
    if family == "poisson":
        return np.exp(np.clip(eta, -_ETA_CLIP, _ETA_CLIP))
    return eta


def _family_variance(family: str, mu: np.ndarray) -> np.ndarray:
    if family in ("logit", "fractional_logit"):
        return np.clip(mu * (1.0 - mu), _MU_EPS, None)
    if family == "poisson":
        return np.clip(mu, _MU_EPS, None)
    return np.ones_like(mu)


def family_loglik(family: str, y: np.ndarray, eta: np.ndarray,
                  weights: Optional[np.ndarray] = None) -> float:
    """Log-likelihood (quasi for fractional logit) at linear predictor eta."""
    w = np.ones_like(y) if weights is None else weights
    mu = _family_mu(family, eta)
    if family in ("logit", "fractional_logit"):
        mu = np.clip(mu, _MU_EPS, 1.0 - _MU_EPS)
        return float(np.sum(w * (y * np.log(mu) + (1.0 - y) * np.log(1.0 - mu))))
    if family == "poisson":
        mu = np.clip(mu, _MU_EPS, None)
        return float(np.sum(w * (y * np.log(mu) - mu - gammaln(y + 1.0))))
    # gaussian with the ML variance estimate
    resid = y - mu
    n = y.size
    sigma2 = float(np.sum(w * resid ** 2) / np.sum(w))
    if sigma2 <= 0.0:
        sigma2 = _MU_EPS
    return -0.5 * n * (math.log(2.0 * math.pi * sigma2) + 1.0)


def family_score(family: str, X: np.ndarray, y: np.ndarray, beta: np.ndarray,
                 weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Analytic score X'W(y - mu) of the canonical-link log-likelihood.

    For the identity family this is the gradient at unit dispersion.
    """
    w = np.ones_like(y) if weights is None else weights
    mu = _family_mu(family, X @ beta)
    return X.T @ (w * (y - mu))


@dataclass
class DesignMatrix:
    """Named covariate columns, an outcome, and optional fixed effects."""

    columns: dict[str, np.ndarray]
    outcome: np.ndarray
    weights: Optional[np.ndarray] = None
    fixed_effects: dict[str, Sequence] = field(default_factory=dict)
    intercept: bool = True

    def __post_init__(self):
        n = self.outcome.shape[0]
        names = list(self.columns)
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        for name, col in self.columns.items():
            col = np.asarray(col, dtype=np.float64)
            if col.shape != (n,):
                raise ValueError(f"column {name!r} has shape {col.shape}, want ({n},)")
            if np.any(~np.isfinite(col)):
                raise ValueError(f"column {name!r} contains NaN/Inf; "
                                 "listwise deletion happens upstream")
            self.columns[name] = col
        self.outcome = np.asarray(self.outcome, dtype=np.float64)
        for name, labels in self.fixed_effects.items():
            if len(labels) != n:
                raise ValueError(f"fixed effect {name!r} length mismatch")

    @property
    def n_obs(self) -> int:
        return self.outcome.shape[0]


def _expand_matrix(design: DesignMatrix, fe_mode: str,
                   family: str) -> tuple[np.ndarray, list[str], np.ndarray]:
    names: list[str] = []
    cols: list[np.ndarray] = []
    y = design.outcome.astype(np.float64).copy()

    within = fe_mode == "within" and family == "identity" and design.fixed_effects
    if design.intercept and not within:
        names.append("const")
        cols.append(np.ones(design.n_obs))
    for name, col in design.columns.items():
        names.append(name)
        cols.append(col.copy())

    if design.fixed_effects and not within:
        for fe_name, labels in design.fixed_effects.items():
            levels = sorted(set(labels), key=repr)
            for level in levels[1:]:  # first level is the reference
                names.append(f"{fe_name}[{level}]")
                cols.append(np.array([1.0 if l == level else 0.0 for l in labels]))
    elif within:
        combined = list(zip(*design.fixed_effects.values()))
        groups: dict = {}
        for i, g in enumerate(combined):
            groups.setdefault(g, []).append(i)
        for idx in groups.values():
            idx = np.array(idx)
            y[idx] -= y[idx].mean()
            for col in cols:
                col[idx] -= col[idx].mean()
    return np.column_stack(cols), names, y


def _drop_collinear(X: np.ndarray, names: list[str], rtol: float = 1e-10
                    ) -> tuple[np.ndarray, list[str], list[str]]:
    """Greedy Gram-Schmidt sweep keeping the earliest independent columns,
    so the intercept and declared covariates win over dummies."""
    if X.shape[1] == 0:
        return X, names, []
    basis: list[np.ndarray] = []
    keep: list[int] = []
    dropped: list[str] = []
    for j in range(X.shape[1]):
        col = X[:, j].astype(np.float64)
        residual = col.copy()
        for _ in range(2):  # re-orthogonalize for stability
            for q in basis:
                residual -= (q @ residual) * q
        norm = np.linalg.norm(residual)
        if norm > rtol * max(np.linalg.norm(col), 1.0):
            basis.append(residual / norm)
            keep.append(j)
        else:
            dropped.append(names[j])
    return X[:, keep], [names[i] for i in keep], dropped


@dataclass
class GlmFit:
    family: str
    coefficients: dict[str, float]
    se_classical: dict[str, float]
    se_robust: dict[str, float]
    loglik: float
    pseudo_r2: Optional[float]
    converged: bool
    iterations: int
    n_obs: int
    dropped: list[str] = field(default_factory=list)
    separated: bool = False
    _names: list[str] = field(default_factory=list, repr=False)
    _beta: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _X: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _y: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def predict(self, X: Optional[np.ndarray] = None) -> np.ndarray:
        X = self._X if X is None else X
        return _family_mu(self.family, X @ self._beta)


def _null_loglik(family: str, y: np.ndarray, weights) -> float:
    w = np.ones_like(y) if weights is None else weights
    mean = float(np.sum(w * y) / np.sum(w))
    if family in ("logit", "fractional_logit"):
        mean = min(max(mean, _MU_EPS), 1.0 - _MU_EPS)
        eta0 = math.log(mean / (1.0 - mean))
    elif family == "poisson":
        eta0 = math.log(max(mean, _MU_EPS))
    else:
        eta0 = mean
    return family_loglik(family, y, np.full_like(y, eta0), weights)


def fit_glm(design: DesignMatrix, family: str, tol: float = 1e-8,
            max_iter: int = 100, fe_mode: str = "dummies") -> GlmFit:
    """IRLS fit with classical and HC1 robust standard errors.

    Convergence means the max-norm of the analytic score is at most `tol`.
    Non-convergence and suspected perfect separation are flags on the
    returned fit, not exceptions; coefficients are reported either way.
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    y = design.outcome
    if family == "logit" and not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("logit outcome must be binary 0/1")
    if family == "fractional_logit" and (y.min() < 0.0 or y.max() > 1.0):
        raise ValueError("fractional logit outcome must lie in [0, 1]")
    if family == "poisson" and y.min() < 0.0:
        raise ValueError("poisson outcome must be non-negative")

    X_full, names, y = _expand_matrix(design, fe_mode, family)
    X, names, dropped = _drop_collinear(X_full, names)
    w = np.ones(design.n_obs) if design.weights is None else \
        np.asarray(design.weights, dtype=np.float64)

    n, k = X.shape
    beta = np.zeros(k)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        eta = np.clip(X @ beta, -_ETA_CLIP, _ETA_CLIP)
        mu = _family_mu(family, eta)
        variance = _family_variance(family, mu)
        score = X.T @ (w * (y - mu))
        if np.max(np.abs(score)) <= tol:
            converged = True
            break
        W = w * variance
        z = eta + (y - mu) / variance
        XtW = X.T * W
        beta_new = np.linalg.solve(XtW @ X, XtW @ z)
        if not np.all(np.isfinite(beta_new)):
            break
        beta = beta_new

    eta = np.clip(X @ beta, -_ETA_CLIP, _ETA_CLIP)
    mu = _family_mu(family, eta)
    variance = _family_variance(family, mu)
    resid = y - mu
    info = (X.T * (w * variance)) @ X
    info_inv = np.linalg.pinv(info)

    if family == "identity":
        dof = max(n - k, 1)
        sigma2 = float(np.sum(w * resid ** 2) / dof)
        cov_classical = sigma2 * np.linalg.pinv((X.T * w) @ X)
    else:
        cov_classical = info_inv
    meat = (X.T * (w * resid) ** 2) @ X
    hc1 = n / max(n - k, 1)
    cov_robust = info_inv @ meat @ info_inv * hc1

    loglik = family_loglik(family, y, eta, design.weights)
    ll0 = _null_loglik(family, y, design.weights)
    pseudo_r2 = None
    if ll0 != 0.0:
        pseudo_r2 = 1.0 - loglik / ll0

    separated = family in ("logit", "fractional_logit") and \
        bool(np.any(np.abs(beta) > SEPARATION_THRESHOLD))

    se_c = np.sqrt(np.clip(np.diag(cov_classical), 0.0, None))
    se_r = np.sqrt(np.clip(np.diag(cov_robust), 0.0, None))
    return GlmFit(
        family=family,
        coefficients=dict(zip(names, beta.tolist())),
        se_classical=dict(zip(names, se_c.tolist())),
        se_robust=dict(zip(names, se_r.tolist())),
        loglik=loglik,
        pseudo_r2=pseudo_r2,
        converged=converged,
        iterations=iterations,
        n_obs=n,
        dropped=dropped,
        separated=separated,
        _names=names,
        _beta=beta,
        _X=X,
        _y=y,
    )


def average_marginal_effects(fit: GlmFit, var: str,
                             delta: Optional[float] = None) -> float:
    """Mean predicted-outcome change for a `delta` shift of `var`, in
    percentage points. `delta` defaults to one standard deviation of the
    fitted column."""
    if var not in fit._names:
        raise ValueError(f"{var!r} is not a fitted column")
    j = fit._names.index(var)
    if delta is None:
        delta = float(np.std(fit._X[:, j], ddof=1))
    eta = fit._X @ fit._beta
    shifted = eta + fit._beta[j] * delta
    effect = np.mean(_family_mu(fit.family, shifted) - _family_mu(fit.family, eta))
    return float(effect) * 100.0


def classification_metrics(scores: Sequence[float], labels: Sequence[int],
                           threshold: float = 0.5) -> dict[str, Optional[float]]:
    """Precision and recall at `threshold`, plus tie-adjusted AUC.

    AUC is the pairwise concordance probability (ties count half), which
    is the Mann-Whitney U statistic rescaled. It is absent unless both
    classes are present; precision is absent with no predicted positives.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    predicted = s >= threshold
    tp = int(np.sum(predicted & (y == 1)))
    fp = int(np.sum(predicted & (y == 0)))
    fn = int(np.sum(~predicted & (y == 1)))
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else None

    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        auc = None
    else:
        order = np.argsort(s, kind="mergesort")
        ranks = np.empty(s.size, dtype=np.float64)
        sorted_s = s[order]
        i = 0
        rank = 1.0
        while i < s.size:
            j = i
            while j < s.size and sorted_s[j] == sorted_s[i]:
                j += 1
            mid = (rank + rank + (j - i) - 1) / 2.0
            ranks[order[i:j]] = mid
            rank += j - i
            i = j
        rank_sum_pos = float(np.sum(ranks[y == 1]))
        auc = (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    return {"precision": precision, "recall": recall, "auc": auc}


class GlmModel(BaseEstimator):
    """Estimator wrapper over fit_glm with an array-style fit/predict."""

    def __init__(self, family: str = "logit", tol: float = 1e-8,
                 max_iter: int = 100, intercept: bool = True):
        self.family = family
        self.tol = tol
        self.max_iter = max_iter
        self.intercept = intercept

    def fit(self, X, y, feature_names: Optional[list[str]] = None) -> "GlmModel":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        names = feature_names or [f"x{i}" for i in range(X.shape[1])]
        design = DesignMatrix(
            columns={name: X[:, i] for i, name in enumerate(names)},
            outcome=np.asarray(y, dtype=np.float64),
            intercept=self.intercept,
        )
        self._feature_names = names
        self.fit_ = fit_glm(design, self.family, self.tol, self.max_iter)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "fit_"):
            raise NotFittedError("GlmModel.fit must run before predict")
        X = np.asarray(X, dtype=np.float64)
        full_names = (["const"] if self.intercept else []) + self._feature_names
        if self.intercept:
            X = np.column_stack([np.ones(X.shape[0]), X])
        keep = [full_names.index(name) for name in self.fit_._names]
        return self.fit_.predict(X[:, keep])
