"""Least squares with rank detection, cluster-robust covariance, and the
event-study coefficient series."""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np
import pandas as pd
import scipy.linalg

from .design import (DesignProblem, EstimationSpec, build_design, conc_label,
                     event_label)
from .panel import Panel

RANK_TOL = 1e-10
Z95 = 1.96


class EstimationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FitResult:
    coefficients: pd.Series
    dropped_columns: list[str]
    residuals: np.ndarray
    n: int
    p_retained: int
    rss: float
    retained_index: np.ndarray
    # upper-triangular factor of the retained columns, X_r = Q R
    r_factor: np.ndarray


def _householder_limited_pivoting(A: np.ndarray, b: np.ndarray, tol: float):
    """Householder QR that moves deficient columns to the end.

    Columns are processed left to right; a column whose norm orthogonal to the
    columns already accepted is at most ``tol`` is set aside instead of being
    factored. Returns the accepted column indices, the triangular factor over
    them, and Q'b restricted to the accepted rank.
    """
    A = np.array(A, dtype=float, order="F")
    b = np.array(b, dtype=float)
    m, p = A.shape
    accepted = []
    k = 0
    for j in range(p):
        if k >= m:
            break
        x = A[k:, j]
        norm = np.linalg.norm(x)
        if norm <= tol:
            continue
        alpha = -norm if x[0] >= 0 else norm
        v = x.copy()
        v[0] -= alpha
        vnorm2 = v @ v
        if vnorm2 > 0:
            tail = A[k:, j + 1:]
            tail -= np.outer(v, (2.0 / vnorm2) * (v @ tail))
            b[k:] -= v * (2.0 / vnorm2) * (v @ b[k:])
        A[k, j] = alpha
        A[k + 1:, j] = 0.0
        accepted.append(j)
        k += 1
    accepted = np.array(accepted, dtype=int)
    return accepted, np.triu(A[:k, accepted]), b[:k]


def fit_least_squares(problem: DesignProblem, rel_tol: float = RANK_TOL) -> FitResult:
    X, y = problem.X, problem.y
    n, p = X.shape
    if n == 0 or p == 0:
        raise EstimationError(f"need n > 0 and p >= 1, got n={n}, p={p}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise EstimationError("design or response contains non-finite values")
    norms = np.linalg.norm(X, axis=0)
    # the leading pivot of a norm-pivoted factorization is the largest column norm
    tol = rel_tol * norms.max() if norms.max() > 0 else 0.0
    live = np.flatnonzero(norms > tol)
    if live.size == 0:
        raise EstimationError("every column is zero")
    Xl = X[:, live]
    if n > live.size:
        # compress to a (p+1)-row triangle; column dependencies are unchanged
        R0 = scipy.linalg.qr(np.column_stack([Xl, y]), mode="r", check_finite=False)[0]
        R0 = R0[: live.size + 1]
        A, rhs = R0[:, :-1], R0[:, -1]
    else:
        A, rhs = Xl, y
    acc, R, qtb = _householder_limited_pivoting(A, rhs, tol)
    retained = live[acc]
    if n < retained.size:
        raise EstimationError(f"fewer rows ({n}) than retained columns ({retained.size})")
    beta = scipy.linalg.solve_triangular(R, qtb, check_finite=False)
    resid = y - X[:, retained] @ beta
    labels = problem.column_labels
    keep = set(retained.tolist())
    dropped = [labels[j] for j in range(p) if j not in keep]
    return FitResult(
        coefficients=pd.Series(beta, index=[labels[j] for j in retained]),
        dropped_columns=dropped,
        residuals=resid,
        n=n,
        p_retained=int(retained.size),
        rss=float(resid @ resid),
        retained_index=retained,
        r_factor=R,
    )


def normal_equations_solve(problem: DesignProblem) -> np.ndarray:
    """Solve (X'X) b = X'y by Gaussian elimination with partial pivoting.

    Kept deliberately independent of the QR path; tests use it as an oracle.
    """
    X, y = problem.X, problem.y
    G = X.T @ X
    rhs = X.T @ y
    p = G.shape[0]
    M = np.column_stack([G, rhs]).astype(float)
    scale = np.abs(G).max() if p else 0.0
    for k in range(p):
        piv = k + int(np.argmax(np.abs(M[k:, k])))
        if abs(M[piv, k]) <= 1e-14 * scale:
            raise EstimationError("singular Gram matrix")
        if piv != k:
            M[[k, piv]] = M[[piv, k]]
        M[k + 1:] -= np.outer(M[k + 1:, k] / M[k, k], M[k])
    b = np.zeros(p)
    for k in range(p - 1, -1, -1):
        b[k] = (M[k, p] - M[k, k + 1:p] @ b[k + 1:]) / M[k, k]
    return b


def cluster_robust_cov(problem: DesignProblem, fit: FitResult) -> pd.DataFrame:
    """Sandwich covariance with scores summed within clusters.

    Small-sample factor G/(G-1) * (n-1)/(n-k), k the number of retained columns.
    """
    Xr = problem.X[:, fit.retained_index]
    e = fit.residuals
    _, codes = np.unique(problem.clusters, return_inverse=True)
    G = codes.max() + 1 if codes.size else 0
    if G < 2:
        raise EstimationError(f"need at least 2 clusters, got {G}")
    n, k = Xr.shape
    scores = np.zeros((G, k))
    np.add.at(scores, codes, Xr * e[:, None])
    meat = scores.T @ scores
    # (X'X)^-1 = R^-1 R^-T
    Rinv = scipy.linalg.solve_triangular(fit.r_factor, np.eye(k), check_finite=False)
    bread = Rinv @ Rinv.T
    factor = G / (G - 1) * (n - 1) / (n - k) if n > k else np.inf
    cov = factor * bread @ meat @ bread
    cov = (cov + cov.T) / 2
    labels = list(fit.coefficients.index)
    return pd.DataFrame(cov, index=labels, columns=labels)


@dataclass(frozen=True, eq=False)
class EventStudyResult:
    """Dynamic coefficients over the event window.

    ``table`` has one row per event time j (the reference included, with zero
    coefficient and standard error) and columns alpha, se, ci_lo, ci_hi, beta,
    beta_se. Coefficients of dropped columns are NaN; beta columns are NaN for
    single-event variants.
    """

    spec: EstimationSpec
    table: pd.DataFrame
    params: pd.Series
    cov: pd.DataFrame
    dropped_columns: list[str]
    n: int
    n_clusters: int
    p_retained: int

    @property
    def alpha(self) -> pd.Series:
        return self.table["alpha"]

    @property
    def se(self) -> pd.Series:
        return self.table["se"]

    def combination(self, weights: dict[str, float]) -> tuple[float, float]:
        """Estimate and standard error of a linear combination of coefficients."""
        w = pd.Series(weights, dtype=float)
        missing = [k for k in w.index if k not in self.params.index]
        if missing:
            raise KeyError(f"coefficients not estimated: {missing}")
        est = float(self.params[w.index] @ w)
        var = float(w @ self.cov.loc[w.index, w.index] @ w)
        return est, float(np.sqrt(max(var, 0.0)))

    def mean_alpha(self, lo: int, hi: int) -> tuple[float, float]:
        """Average alpha over event times lo..hi (reference counted as zero)."""
        js = [j for j in range(lo, hi + 1)]
        w = {event_label(j): 1.0 / len(js) for j in js if j != self.spec.reference_event_time}
        return self.combination(w)


def estimate(panel: Panel, spec: EstimationSpec) -> EventStudyResult:
    problem = build_design(panel, spec)
    return estimate_problem(problem, spec)


def estimate_problem(problem: DesignProblem, spec: EstimationSpec) -> EventStudyResult:
    fit = fit_least_squares(problem)
    cov = cluster_robust_cov(problem, fit)
    se_all = pd.Series(np.sqrt(np.clip(np.diag(cov.to_numpy()), 0.0, None)), index=cov.index)
    params = fit.coefficients

    def lookup(series: pd.Series, label: str) -> float:
        return float(series[label]) if label in series.index else np.nan

    rows = []
    for j in spec.window:
        if j == spec.reference_event_time:
            a, s = 0.0, 0.0
        else:
            a, s = lookup(params, event_label(j)), lookup(se_all, event_label(j))
        if spec.variant.multi:
            b, bs = lookup(params, conc_label(j)), lookup(se_all, conc_label(j))
        else:
            b, bs = np.nan, np.nan
        rows.append((j, a, s, a - Z95 * s, a + Z95 * s, b, bs))
    table = pd.DataFrame(rows, columns=["j", "alpha", "se", "ci_lo", "ci_hi", "beta", "beta_se"])
    table = table.set_index("j")
    return EventStudyResult(
        spec=spec,
        table=table,
        params=params,
        cov=cov,
        dropped_columns=fit.dropped_columns,
        n=fit.n,
        n_clusters=int(np.unique(problem.clusters).size),
        p_retained=fit.p_retained,
    )

