"""Price ingestion: CPI deflation, monthly aggregation, returns and volatility proxies.

Daily nominal prices are deflated by a linearly interpolated CPI (anchored to
the 15th of each month), averaged into monthly real prices, and turned into
daily percent log-returns.  Two monthly volatility proxies are derived from
the daily data: annualized realized volatility (252 x mean squared percent
return) and the adjusted squared range (1200 x (range / 2 sqrt(log 2))^2 on
natural-log prices).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import AlignmentError, CoverageError, DataGapError, DomainError

DAY = "datetime64[D]"
MONTH = "datetime64[M]"

# Day of month the monthly CPI level is anchored to before interpolation.
CPI_ANCHOR_DAY = 15


def _as_days(dates) -> np.ndarray:
    return np.asarray(dates, dtype=DAY)


def _as_months(months) -> np.ndarray:
    return np.asarray(months, dtype=MONTH)


@dataclass(frozen=True)
class PriceSeries:
    """Daily prices for one metal."""

    metal_id: str
    dates: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _as_days(self.dates))
        object.__setattr__(self, "prices", np.asarray(self.prices, dtype=float))
        if self.dates.shape != self.prices.shape:
            raise AlignmentError(f"{self.metal_id}: dates and prices differ in length")
        if np.any(np.diff(self.dates).astype(int) <= 0):
            raise DomainError(f"{self.metal_id}: dates must be strictly increasing")
        if np.any(self.prices <= 0) or not np.all(np.isfinite(self.prices)):
            raise DomainError(f"{self.metal_id}: prices must be strictly positive and finite")

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def months(self) -> np.ndarray:
        return self.dates.astype(MONTH)


@dataclass(frozen=True)
class CpiSeries:
    """Monthly consumer price index levels."""

    months: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "months", _as_months(self.months))
        object.__setattr__(self, "levels", np.asarray(self.levels, dtype=float))
        if self.months.shape != self.levels.shape:
            raise AlignmentError("CPI months and levels differ in length")
        if np.any(np.diff(self.months).astype(int) != 1):
            raise DomainError("CPI months must be contiguous")
        if np.any(self.levels <= 0):
            raise DomainError("CPI levels must be strictly positive")


@dataclass(frozen=True)
class ReturnSeries:
    """Daily percent log-returns, each tagged with its own month."""

    metal_id: str
    dates: np.ndarray
    returns: np.ndarray
    months: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dates", _as_days(self.dates))
        object.__setattr__(self, "returns", np.asarray(self.returns, dtype=float))
        object.__setattr__(self, "months", self.dates.astype(MONTH))

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class MonthlySeries:
    """One value per calendar month; ``kind`` tags what the value measures."""

    metal_id: str
    months: np.ndarray
    values: np.ndarray
    kind: str  # real-price | monthly-return | rv | rg2star

    def __post_init__(self):
        object.__setattr__(self, "months", _as_months(self.months))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.months.shape != self.values.shape:
            raise AlignmentError(f"{self.metal_id}: months and values differ in length")
        if len(self.months) > 1 and np.any(np.diff(self.months).astype(int) != 1):
            raise DataGapError(f"{self.metal_id}: monthly series has gaps")
        if self.kind in ("rv", "rg2star") and np.any(self.values < 0):
            raise DomainError(f"{self.metal_id}: {self.kind} values must be nonnegative")

    def __len__(self) -> int:
        return len(self.months)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"month": self.months.astype(str), "value": self.values})


def interpolate_cpi(cpi: CpiSeries, dates) -> np.ndarray:
    """Interpolate monthly CPI levels to calendar days.

    Levels are anchored to the 15th of each month and joined piecewise
    linearly; days before the first anchor (or after the last) inside the
    covered month range take the nearest anchor value.
    """
    dates = _as_days(dates)
    first_day = cpi.months[0].astype(DAY)
    last_day = (cpi.months[-1] + 1).astype(DAY) - 1
    out_of_range = (dates < first_day) | (dates > last_day)
    if np.any(out_of_range):
        bad = dates[out_of_range][0]
        raise CoverageError(f"date {bad} outside CPI coverage [{first_day}, {last_day}]")
    anchors = cpi.months.astype(DAY) + (CPI_ANCHOR_DAY - 1)
    return np.interp(
        dates.astype("int64"), anchors.astype("int64"), cpi.levels
    )


def deflate(prices: PriceSeries, cpi_daily: np.ndarray, base_index: float | None = None) -> PriceSeries:
    """Deflate nominal prices by a daily CPI path.

    ``base_index`` defaults to the CPI level on the first price date, so the
    real series starts on the nominal scale.
    """
    cpi_daily = np.asarray(cpi_daily, dtype=float)
    if cpi_daily.shape != prices.prices.shape:
        raise CoverageError(f"{prices.metal_id}: CPI path does not cover every price date")
    if np.any(cpi_daily <= 0):
        raise DomainError("interpolated CPI must be strictly positive")
    base = float(cpi_daily[0]) if base_index is None else float(base_index)
    real = prices.prices / (cpi_daily / base)
    return PriceSeries(prices.metal_id, prices.dates, real)


def monthly_real_price(real: PriceSeries) -> MonthlySeries:
    """Average the daily real prices within each calendar month."""
    months, values = _monthly_mean(real.months, real.prices, real.metal_id)
    return MonthlySeries(real.metal_id, months, values, kind="real-price")


def monthly_returns(monthly_price: MonthlySeries) -> MonthlySeries:
    """Percent log-returns of the monthly real price (first month dropped)."""
    if len(monthly_price) < 2:
        raise DomainError(f"{monthly_price.metal_id}: need at least two months for returns")
    r = 100.0 * np.diff(np.log(monthly_price.values))
    return MonthlySeries(monthly_price.metal_id, monthly_price.months[1:], r, kind="monthly-return")


def daily_log_returns(real: PriceSeries) -> ReturnSeries:
    """Daily percent log-returns of the real price.

    Gaps in the trading calendar are not imputed: each return is computed
    against the previous available trading day and dated (and month-tagged)
    by its own date.
    """
    if len(real) < 2:
        raise DomainError(f"{real.metal_id}: need at least two prices for returns")
    r = 100.0 * np.diff(np.log(real.prices))
    return ReturnSeries(real.metal_id, real.dates[1:], r)


def realized_volatility(returns: ReturnSeries) -> MonthlySeries:
    """Annualized realized volatility: 252 x mean squared percent return per month."""
    months, mean_sq = _monthly_mean(returns.months, returns.returns**2, returns.metal_id)
    return MonthlySeries(returns.metal_id, months, 252.0 * mean_sq, kind="rv")


def adjusted_squared_range(real: PriceSeries) -> MonthlySeries:
    """Adjusted squared range proxy from the month's log-price range.

    Uses natural-log prices (not x100): 1200 x (range / (2 sqrt(log 2)))^2.
    """
    logp = np.log(real.prices)
    month_of = real.months
    months = np.arange(month_of[0], month_of[-1] + 1)
    values = np.empty(len(months))
    for i, m in enumerate(months):
        mask = month_of == m
        if not mask.any():
            raise DataGapError(f"{real.metal_id}: no prices in month {m}")
        block = logp[mask]
        rg = float(block.max() - block.min())
        values[i] = 1200.0 * (rg / (2.0 * np.sqrt(np.log(2.0)))) ** 2
    return MonthlySeries(real.metal_id, months, values, kind="rg2star")


def _monthly_mean(month_of: np.ndarray, values: np.ndarray, metal_id: str):
    months = np.arange(month_of[0], month_of[-1] + 1)
    out = np.empty(len(months))
    for i, m in enumerate(months):
        mask = month_of == m
        if not mask.any():
            raise DataGapError(f"{metal_id}: no observations in month {m}")
        out[i] = values[mask].mean()
    return months, out


# ---------------------------------------------------------------------------
# CSV interfaces
# ---------------------------------------------------------------------------

def read_price_csv(path, metal_id: str | None = None) -> PriceSeries:
    """Read a daily price file with header ``date,price`` (ISO-8601 dates)."""
    df = pd.read_csv(path)
    if list(df.columns[:2]) != ["date", "price"]:
        raise DomainError(f"{path}: expected header 'date,price'")
    name = metal_id if metal_id is not None else _stem(path)
    return PriceSeries(name, df["date"].to_numpy(dtype=DAY), df["price"].to_numpy(dtype=float))


def read_cpi_csv(path) -> CpiSeries:
    """Read a CPI file with header ``month,index`` (months as YYYY-MM)."""
    df = pd.read_csv(path)
    if list(df.columns[:2]) != ["month", "index"]:
        raise DomainError(f"{path}: expected header 'month,index'")
    return CpiSeries(df["month"].to_numpy(dtype=MONTH), df["index"].to_numpy(dtype=float))


def write_monthly_csv(series: MonthlySeries, path) -> None:
    """Write a monthly series with header ``month,value``."""
    series.to_frame().to_csv(path, index=False)


def read_monthly_csv(path, metal_id: str, kind: str) -> MonthlySeries:
    df = pd.read_csv(path)
    return MonthlySeries(metal_id, df["month"].to_numpy(dtype=MONTH), df["value"].to_numpy(dtype=float), kind=kind)


def _stem(path) -> str:
    import os

    return os.path.splitext(os.path.basename(str(path)))[0]


@dataclass(frozen=True)
class MetalData:
    """Everything the models and features need for one metal."""

    metal_id: str
    category: str
    real_prices: PriceSeries
    monthly_price: MonthlySeries
    monthly_return: MonthlySeries
    daily_returns: ReturnSeries
    rv: MonthlySeries
    rg2star: MonthlySeries


def prepare_metal(
    prices: PriceSeries, cpi: CpiSeries, category: str = "other", base_index: float | None = None
) -> MetalData:
    """Run the whole ingest pipeline for one metal's nominal daily prices."""
    cpi_daily = interpolate_cpi(cpi, prices.dates)
    real = deflate(prices, cpi_daily, base_index=base_index)
    mp = monthly_real_price(real)
    return MetalData(
        metal_id=prices.metal_id,
        category=category,
        real_prices=real,
        monthly_price=mp,
        monthly_return=monthly_returns(mp),
        daily_returns=daily_log_returns(real),
        rv=realized_volatility(daily_log_returns(real)),
        rg2star=adjusted_squared_range(real),
    )
