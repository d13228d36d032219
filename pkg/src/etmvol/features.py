"""Realized-volatility features, normalization, and the PCA instance space.

Eight features summarize each metal's RV series: first-order autocorrelation
(F1), the sum of squared autocorrelations at lags 1-10 (F2), the Hurst
rescaled-range exponent (F3), skewness and kurtosis of RV (F4, F5), the share
of exactly-zero daily returns (F6), normalized Shannon spectral entropy (F7),
and spikiness, the variance of leave-one-out variances of the detrended
remainder (F8).  After an absolute value on F1 the features are min-max
normalized across metals and projected onto their first two principal
components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from statsmodels.nonparametric.smoothers_lowess import lowess

from .errors import DegeneracyError, DomainError
from .ingest import MonthlySeries, ReturnSeries

FEATURE_NAMES = ("F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8")

ZERO_RETURN_TOL = 1e-12  # on percent returns
SPIKINESS_TREND_SPAN = 0.75
SPECTRAL_SMOOTHING = 3  # Daniell-type moving average width


@dataclass(frozen=True)
class FeatureVector:
    acf1: float
    sum_sq_acf10: float
    hurst: float
    skewness: float
    kurtosis: float
    pct_zero_returns: float
    spectral_entropy: float
    spikiness: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.acf1,
                self.sum_sq_acf10,
                self.hurst,
                self.skewness,
                self.kurtosis,
                self.pct_zero_returns,
                self.spectral_entropy,
                self.spikiness,
            ]
        )


@dataclass(frozen=True)
class FeatureMatrix:
    metal_ids: tuple[str, ...]
    raw: np.ndarray         # n_metals x 8
    normalized: np.ndarray | None = None

    def __post_init__(self):
        if self.raw.shape != (len(self.metal_ids), len(FEATURE_NAMES)):
            raise DomainError("feature matrix must be n_metals x 8")


@dataclass(frozen=True)
class InstanceSpace:
    loadings: np.ndarray            # 2 x 8, rows unit norm
    scores: np.ndarray              # n_metals x 2
    variance_explained: np.ndarray  # top-2 eigenvalue shares
    eigenvalue_shares: np.ndarray   # all 8 shares
    r2_table: np.ndarray            # 8 x 2


def sample_acf(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocorrelations with the biased (full-sample variance) denominator."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise DegeneracyError("zero-variance series has no autocorrelation")
    return np.array([float(xc[k:] @ xc[:-k]) / denom for k in range(1, max_lag + 1)])


def acf_features(rv: np.ndarray) -> tuple[float, float]:
    """F1 = ACF(1), F2 = sum of squared ACF(1..10)."""
    rv = np.asarray(rv, dtype=float)
    if rv.size < 12:
        raise DomainError("need at least 12 observations for ACF features")
    acf = sample_acf(rv, 10)
    return float(acf[0]), float(np.sum(acf**2))


def hurst(rv: np.ndarray) -> float:
    """Rescaled-range Hurst exponent, clamped to [0, 1].

    Block sizes run over powers of two from 8 up to n/2; R/S is averaged over
    the non-overlapping blocks of each size and the exponent is the slope of
    log(R/S) on log(n).
    """
    x = np.asarray(rv, dtype=float)
    n = x.size
    if n < 32:
        raise DomainError("need at least 32 observations for the Hurst exponent")
    if np.all(x == x[0]):
        raise DegeneracyError("constant series has no Hurst exponent")
    sizes = []
    size = 8
    while size <= n // 2:
        sizes.append(size)
        size *= 2
    log_rs = []
    for m in sizes:
        ratios = []
        for start in range(0, n - m + 1, m):
            block = x[start : start + m]
            s = block.std()
            if s == 0.0:
                continue
            dev = np.cumsum(block - block.mean())
            ratios.append((dev.max() - dev.min()) / s)
        if ratios:
            log_rs.append((np.log(m), np.log(np.mean(ratios))))
    if len(log_rs) < 2:
        raise DegeneracyError("not enough usable block sizes for the Hurst exponent")
    ln_n, ln_rs = np.array(log_rs).T
    slope = np.polyfit(ln_n, ln_rs, 1)[0]
    return float(min(max(slope, 0.0), 1.0))


def distribution_features(rv: np.ndarray, daily_returns: np.ndarray) -> tuple[float, float, float]:
    """F4 skewness and F5 kurtosis (non-excess) of RV; F6 share of zero returns."""
    rv = np.asarray(rv, dtype=float)
    r = np.asarray(daily_returns, dtype=float)
    if rv.size == 0 or r.size == 0:
        raise DomainError("empty input")
    m = rv - rv.mean()
    m2 = float(np.mean(m**2))
    if m2 == 0.0:
        raise DegeneracyError("zero-variance RV has no skewness/kurtosis")
    skew = float(np.mean(m**3)) / m2**1.5
    kurt = float(np.mean(m**4)) / m2**2
    zero_share = float(np.mean(np.abs(r) <= ZERO_RETURN_TOL))
    return skew, kurt, zero_share


def spectral_entropy(rv: np.ndarray) -> float:
    """Normalized Shannon entropy of the smoothed periodogram, in [0, 1]."""
    x = np.asarray(rv, dtype=float)
    n = x.size
    if n < 16:
        raise DomainError("need at least 16 observations for spectral entropy")
    if np.all(x == x[0]):
        raise DegeneracyError("constant series has no spectrum")
    xc = x - x.mean()
    fx = np.fft.rfft(xc)
    pgram = (fx.real**2 + fx.imag**2)[1:]  # drop the zero frequency
    if pgram.sum() == 0.0:
        raise DegeneracyError("degenerate spectrum")
    smoothed = np.convolve(pgram, np.ones(SPECTRAL_SMOOTHING) / SPECTRAL_SMOOTHING, mode="same")
    p = smoothed / smoothed.sum()
    nz = p[p > 0]
    entropy = -float(np.sum(nz * np.log(nz)))
    return float(min(max(entropy / np.log(p.size), 0.0), 1.0))


def trend_remainder(rv: np.ndarray) -> np.ndarray:
    """Remainder after removing a local-regression trend (no seasonal term)."""
    x = np.asarray(rv, dtype=float)
    idx = np.arange(x.size, dtype=float)
    trend = lowess(x, idx, frac=SPIKINESS_TREND_SPAN, it=0, return_sorted=False)
    return x - trend


def spikiness(rv: np.ndarray) -> float:
    """Variance of the leave-one-out variances of the detrended remainder."""
    x = np.asarray(rv, dtype=float)
    n = x.size
    if n < 24:
        raise DomainError("need at least 24 observations for spikiness")
    rem = trend_remainder(x)
    loo = _leave_one_out_variances(rem)
    return float(np.var(loo, ddof=1))


def _leave_one_out_variances(x: np.ndarray) -> np.ndarray:
    n = x.size
    s1 = x.sum()
    s2 = float(x @ x)
    means = (s1 - x) / (n - 1)
    return ((s2 - x**2) - (n - 1) * means**2) / (n - 2)


def compute_features(rv: MonthlySeries, daily_returns: ReturnSeries) -> FeatureVector:
    """Compute the eight features for one metal from its RV and daily returns."""
    v = rv.values
    f1, f2 = acf_features(v)
    f4, f5, f6 = distribution_features(v, daily_returns.returns)
    return FeatureVector(
        acf1=f1,
        sum_sq_acf10=f2,
        hurst=hurst(v),
        skewness=f4,
        kurtosis=f5,
        pct_zero_returns=f6,
        spectral_entropy=spectral_entropy(v),
        spikiness=spikiness(v),
    )


def normalize_features(raw: FeatureMatrix) -> FeatureMatrix:
    """Min-max normalize each feature column to [0, 1], after |F1|.

    Strictly speaking min-max attains the endpoints, so the normalized range
    is the closed interval.
    """
    x = raw.raw.copy()
    if x.shape[0] < 2:
        raise DomainError("need at least 2 metals to normalize")
    x[:, 0] = np.abs(x[:, 0])
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    span = hi - lo
    for j, s in enumerate(span):
        if s == 0.0:
            raise DegeneracyError(f"feature column {FEATURE_NAMES[j]} is constant across metals")
    return FeatureMatrix(raw.metal_ids, raw.raw, normalized=(x - lo) / span)


def pca_instance_space(normalized: FeatureMatrix) -> InstanceSpace:
    """Project the normalized feature matrix onto its first two principal components.

    Columns are centered but not rescaled; the sign of each component is fixed
    so its largest-magnitude loading is positive.
    """
    if normalized.normalized is None:
        raise DomainError("normalize_features must run first")
    x = normalized.normalized
    if x.shape[0] < 3:
        raise DomainError("need at least 3 metals for a 2-component projection")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]
    total = eigvals.sum()
    if total == 0.0:
        raise DegeneracyError("feature matrix has no variance; projection undefined")
    loadings = eigvecs[:, :2].T.copy()
    for i in range(2):
        j = np.argmax(np.abs(loadings[i]))
        if loadings[i, j] < 0:
            loadings[i] = -loadings[i]
    scores = centered @ loadings.T
    shares = eigvals / total
    return InstanceSpace(
        loadings=loadings,
        scores=scores,
        variance_explained=shares[:2],
        eigenvalue_shares=shares,
        r2_table=r2_attribution(x, scores),
    )


def r2_attribution(normalized: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Simple-regression R-squared of each feature column on each PC score column."""
    out = np.zeros((normalized.shape[1], scores.shape[1]))
    for j in range(normalized.shape[1]):
        fj = normalized[:, j]
        for k in range(scores.shape[1]):
            out[j, k] = _r_squared(fj, scores[:, k])
    return out


def _r_squared(y: np.ndarray, x: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    return float(xc @ yc) ** 2 / (sxx * syy)
