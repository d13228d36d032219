"""Loss functions and scoring rules for point and density volatility forecasts.

Point forecasts of the conditional variance are scored against a volatility
proxy with RMSFE and QLIKE.  Density forecasts of returns are scored with the
quantile-based continuous ranked probability score (qCRPS) averaged over a
19-level quantile grid, optionally weighted toward the center or the tails.
Equal predictive ability is tested with a Diebold-Mariano statistic using a
Bartlett long-run variance at bandwidth floor(sqrt(P)) and a Student-t
fixed-smoothing reference distribution, which keeps the test honest at the
small evaluation samples used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import AlignmentError, ConfigurationError, DegeneracyError, DomainError, ValidityError

# Proxy values of exactly zero (possible for illiquid metals with all-zero
# returns in a month) are floored before QLIKE, which needs h > 0.
QLIKE_PROXY_FLOOR = 1e-8


def default_alpha_grid(levels: int = 20) -> np.ndarray:
    """Quantile levels j/J for j = 1..J-1 (J=20 gives 0.05, 0.10, ..., 0.95)."""
    return np.arange(1, levels) / levels


def _aligned(proxy, forecasts):
    h = np.asarray(proxy, dtype=float)
    s = np.asarray(forecasts, dtype=float)
    if h.shape != s.shape:
        raise AlignmentError(f"proxy length {h.shape} != forecast length {s.shape}")
    if h.size == 0:
        raise DomainError("empty evaluation sample")
    return h, s


def squared_errors(proxy, forecasts) -> np.ndarray:
    h, s = _aligned(proxy, forecasts)
    return (h - s) ** 2


def rmsfe(proxy, forecasts) -> float:
    """Root mean squared forecast error between proxy and variance forecasts."""
    return float(np.sqrt(squared_errors(proxy, forecasts).mean()))


def qlike_terms(proxy, forecasts) -> np.ndarray:
    """Per-period QLIKE losses h/s - log(h/s) - 1, with the zero-proxy floor."""
    h, s = _aligned(proxy, forecasts)
    h = np.where(h == 0.0, QLIKE_PROXY_FLOOR, h)
    if np.any(h <= 0) or np.any(s <= 0):
        raise DomainError("QLIKE requires positive proxy and forecast values")
    ratio = h / s
    return ratio - np.log(ratio) - 1.0


def qlike(proxy, forecasts) -> float:
    """Average QLIKE loss; penalizes underforecasts more than overforecasts."""
    return float(qlike_terms(proxy, forecasts).mean())


def _check_quantiles(alphas, quantiles):
    a = np.asarray(alphas, dtype=float)
    q = np.asarray(quantiles, dtype=float)
    if a.shape != q.shape:
        raise AlignmentError("alpha grid and quantiles differ in length")
    if np.any(a <= 0) or np.any(a >= 1) or np.any(np.diff(a) <= 0):
        raise ValidityError("alpha grid must be strictly increasing inside (0,1)")
    if np.any(np.diff(q) < 0):
        raise ValidityError("quantile forecasts must be monotone nondecreasing")
    return a, q


def qcrps_terms(alphas, quantiles, realized: float) -> np.ndarray:
    """Per-level quantile scores 2[I(r <= q_a) - a](q_a - r)."""
    a, q = _check_quantiles(alphas, quantiles)
    ind = (realized <= q).astype(float)
    return 2.0 * (ind - a) * (q - realized)


def qcrps(alphas, quantiles, realized: float) -> float:
    """Quantile-based CRPS: the quantile scores averaged over the grid."""
    return float(qcrps_terms(alphas, quantiles, realized).mean())


def qcrps_weights(alphas, weight_kind: str) -> np.ndarray:
    """Weights emphasizing the center, a(1-a), or the tails, (2a-1)^2."""
    a = np.asarray(alphas, dtype=float)
    if weight_kind == "center":
        return a * (1.0 - a)
    if weight_kind == "tails":
        return (2.0 * a - 1.0) ** 2
    if weight_kind == "uniform":
        return np.ones_like(a)
    raise ConfigurationError(f"unknown qCRPS weight kind: {weight_kind!r}")


def weighted_qcrps(alphas, quantiles, realized: float, weight_kind: str) -> float:
    """Weighted qCRPS; weights are applied as printed, not renormalized."""
    terms = qcrps_terms(alphas, quantiles, realized)
    w = qcrps_weights(alphas, weight_kind)
    return float((w * terms).mean())


def relative_loss(loss_model: float, loss_benchmark: float) -> float:
    """loss_model / loss_benchmark - 1; negative means the model beats the benchmark."""
    if loss_benchmark == 0:
        raise DomainError("benchmark loss is zero; relative loss undefined")
    return loss_model / loss_benchmark - 1.0


@dataclass(frozen=True)
class DmResult:
    """Equal-predictive-ability test with a fixed-smoothing small-sample reference."""

    statistic: float
    p_value: float
    bandwidth: int
    sample_size: int
    dof: int

    @property
    def degenerate(self) -> bool:
        return not np.isfinite(self.statistic)

    def stars(self, five_pct: float = 0.05, ten_pct: float = 0.10) -> str:
        if self.degenerate:
            return ""
        if self.p_value < five_pct:
            return "**"
        if self.p_value < ten_pct:
            return "*"
        return ""


def dm_test(loss_diff) -> DmResult:
    """Diebold-Mariano test on a loss differential series.

    The statistic is sqrt(P) * mean(d) / sqrt(LRV) with a Bartlett-kernel
    long-run variance at bandwidth M = floor(sqrt(P)); the two-sided p-value
    uses a Student-t reference with floor(P/M) degrees of freedom.
    """
    d = np.asarray(loss_diff, dtype=float)
    P = d.size
    if P < 20:
        raise DomainError(f"need at least 20 loss differentials, got {P}")
    M = int(np.floor(np.sqrt(P)))
    dof = int(np.floor(P / M))
    dbar = d.mean()
    lrv = _bartlett_lrv(d, M)
    if lrv <= 1e-12 * max(float(np.mean(d**2)), 1e-300):
        # Constant differential: statistic undefined; only a zero mean keeps the null.
        p = 1.0 if dbar == 0.0 else 0.0
        return DmResult(statistic=float("nan"), p_value=p, bandwidth=M, sample_size=P, dof=dof)
    stat = np.sqrt(P) * dbar / np.sqrt(lrv)
    p = 2.0 * stats.t.sf(abs(stat), df=dof)
    return DmResult(statistic=float(stat), p_value=float(p), bandwidth=M, sample_size=P, dof=dof)


def _bartlett_lrv(d: np.ndarray, bandwidth: int) -> float:
    x = d - d.mean()
    P = x.size
    gamma0 = float(x @ x) / P
    acc = gamma0
    for k in range(1, bandwidth):
        gk = float(x[k:] @ x[:-k]) / P
        acc += 2.0 * (1.0 - k / bandwidth) * gk
    return acc


def loss_minimizing_constant(losses_at, grid) -> float:
    """Grid-search the constant forecast minimizing the average of a loss function."""
    grid = np.asarray(grid, dtype=float)
    values = np.array([losses_at(g) for g in grid])
    return float(grid[np.argmin(values)])


def check_nondegenerate(values, what: str) -> None:
    v = np.asarray(values, dtype=float)
    if v.size == 0 or np.all(v == v.flat[0]):
        raise DegeneracyError(f"{what} is degenerate (constant)")
