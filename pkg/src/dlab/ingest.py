"""Reading, fetching and date-aligning price bars and macro series."""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
import math
import os
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyPanelError,
    LeadingGapError,
    ParseError,
    ProviderError,
    RateLimitError,
    TransportError,
    UnknownSeriesError,
    ValidationError,
)

logger = logging.getLogger(__name__)

OHLCV_HEADER = ("date", "open", "high", "low", "close", "adjusted_close", "volume")
MACRO_HEADER = ("date", "value")
PRICE_FIELDS = ("open", "high", "low", "close", "adjusted_close", "volume")
MACRO_SERIES = frozenset(
    {
        "consumer_sentiment",
        "cpi",
        "durable_goods",
        "fed_funds",
        "gdp",
        "inflation",
        "retail_sales",
        "yield_10y",
        "yield_5y",
        "yield_30y",
        "unemployment",
        "market_value",
    }
)
API_KEY_ENV = "DLAB_API_KEY"


@dataclass(frozen=True)
class Bar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    adjusted_close: float
    volume: float

    def problems(self) -> list[str]:
        out = []
        for name in ("open", "high", "low", "close", "adjusted_close"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                out.append(f"{name} not strictly positive")
        if not math.isfinite(self.volume):
            out.append("volume not finite")
        elif self.volume < 0:
            out.append("volume negative")
        if not out:
            if self.low > min(self.open, self.close):
                out.append("low above min(open, close)")
            if self.high < max(self.open, self.close):
                out.append("high below max(open, close)")
        return out


@dataclass(frozen=True)
class TickerSeries:
    ticker: str
    bars: tuple[Bar, ...]

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(self.bars))
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise ValidationError(
                    f"{self.ticker}: bars not strictly increasing by date ({prev.date} -> {cur.date})"
                )

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def dates(self) -> np.ndarray:
        return np.array([b.date for b in self.bars], dtype="datetime64[D]")

    def column(self, name: str) -> np.ndarray:
        if name not in PRICE_FIELDS:
            raise KeyError(name)
        return np.array([getattr(b, name) for b in self.bars], dtype=np.float64)


@dataclass(frozen=True)
class MacroSeries:
    name: str
    dates: tuple[dt.date, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in MACRO_SERIES:
            raise UnknownSeriesError(f"unknown macro series {self.name!r}")
        if len(self.dates) != len(self.values):
            raise ValidationError(f"{self.name}: dates and values differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise ValidationError(f"{self.name}: dates not strictly increasing ({a} -> {b})")
        for d, v in zip(self.dates, self.values):
            if not math.isfinite(v):
                raise ValidationError(f"{self.name}: non-finite value on {d}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class FundamentalsRecord:
    date: dt.date
    eps: float
    dividends_per_share: float
    book_value_per_share: float
    net_income: float
    earnings_growth_rate: float


@dataclass(frozen=True)
class ColumnMeta:
    ticker: str | None
    feature: str
    frequency: str


@dataclass
class AlignedPanel:
    """Date-keyed feature table.

    ``columns`` maps ``{ticker}.{feature}`` (or a bare macro name) to a float
    vector with one entry per date. Undefined cells are NaN.
    """

    dates: np.ndarray
    columns: dict[str, np.ndarray]
    meta: dict[str, ColumnMeta] = field(default_factory=dict)

    def __post_init__(self):
        self.dates = np.asarray(self.dates, dtype="datetime64[D]")
        n = len(self.dates)
        if n and np.any(np.diff(self.dates).astype(np.int64) <= 0):
            raise ValidationError("panel dates must be strictly increasing")
        cols = {}
        for name, values in self.columns.items():
            arr = np.asarray(values, dtype=np.float64)
            if arr.shape != (n,):
                raise ValidationError(f"column {name!r} has length {arr.shape} but the panel has {n} dates")
            cols[name] = arr
            if name not in self.meta:
                self.meta[name] = _guess_meta(name)
        self.columns = cols

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def tickers(self) -> list[str]:
        return sorted({m.ticker for m in self.meta.values() if m.ticker})

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def with_columns(self, new: Mapping[str, np.ndarray], meta: Mapping[str, ColumnMeta] | None = None) -> "AlignedPanel":
        cols = dict(self.columns)
        cols.update(new)
        m = dict(self.meta)
        if meta:
            m.update(meta)
        return AlignedPanel(self.dates.copy(), cols, m)

    def select_rows(self, mask: np.ndarray) -> "AlignedPanel":
        mask = np.asarray(mask)
        return AlignedPanel(
            self.dates[mask],
            {k: v[mask] for k, v in self.columns.items()},
            dict(self.meta),
        )

    def ticker_columns(self, ticker: str) -> list[str]:
        return [k for k, m in self.meta.items() if m.ticker == ticker]


def _guess_meta(name: str) -> ColumnMeta:
    if "." in name:
        ticker, feature = name.split(".", 1)
        return ColumnMeta(ticker, feature, "daily")
    return ColumnMeta(None, name, "unknown")


def _parse_date(text: str, row: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"malformed date {text!r}", row) from None


def _parse_float(text: str, what: str, row: int) -> float:
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"malformed {what} {text!r}", row) from None
    if text.lower() in {"nan", "inf", "+inf", "-inf", "infinity", "-infinity"}:
        raise ParseError(f"non-finite {what}", row)
    return value


def _read_rows(text: str, header: Sequence[str]) -> list[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or [c.strip() for c in rows[0]] != list(header):
        got = ",".join(rows[0]) if rows else "<empty>"
        raise ParseError(f"expected header {','.join(header)!r}, got {got!r}", 1)
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", i)
        out.append((i, row))
    return out


def parse_ohlcv_csv(text: str, ticker: str = "") -> TickerSeries:
    """Parse an OHLCV document into a date-ascending :class:`TickerSeries`.

    Row numbers in errors are 1-based physical lines, header included.
    """
    bars = []
    seen: dict[dt.date, int] = {}
    for rownum, row in _read_rows(text, OHLCV_HEADER):
        date = _parse_date(row[0], rownum)
        values = [_parse_float(v, name, rownum) for v, name in zip(row[1:], PRICE_FIELDS)]
        bar = Bar(date, *values)
        problems = bar.problems()
        if problems:
            raise ValidationError(problems[0], rownum)
        if date in seen:
            raise ValidationError(f"duplicate date {date} (first seen at row {seen[date]})", rownum)
        seen[date] = rownum
        bars.append(bar)
    bars.sort(key=lambda b: b.date)
    return TickerSeries(ticker, tuple(bars))


def format_ohlcv_csv(series: TickerSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(OHLCV_HEADER)
    for b in series.bars:
        w.writerow([b.date.isoformat()] + [_fmt(getattr(b, f)) for f in PRICE_FIELDS])
    return buf.getvalue()


def _fmt(v: float) -> str:
    if math.isnan(v):
        return ""
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def parse_macro_csv(name: str, text: str) -> MacroSeries:
    if name not in MACRO_SERIES:
        raise UnknownSeriesError(f"unknown macro series {name!r}")
    obs: dict[dt.date, float] = {}
    for rownum, row in _read_rows(text, MACRO_HEADER):
        date = _parse_date(row[0], rownum)
        raw = row[1].strip()
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(f"malformed value {raw!r}", rownum) from None
        if not math.isfinite(value):
            raise ValidationError("non-finite value", rownum)
        if date in obs:
            raise ValidationError(f"duplicate date {date}", rownum)
        obs[date] = value
    dates = sorted(obs)
    return MacroSeries(name, tuple(dates), tuple(obs[d] for d in dates))


def format_macro_csv(series: MacroSeries) -> str:
    lines = ["date,value"]
    lines += [f"{d.isoformat()},{_fmt(v)}" for d, v in zip(series.dates, series.values)]
    return "\n".join(lines) + "\n"


def load_ticker_csv(path: str | Path, ticker: str | None = None) -> TickerSeries:
    path = Path(path)
    return parse_ohlcv_csv(path.read_text(), ticker or path.stem)


def load_macro_csv(path: str | Path, name: str | None = None) -> MacroSeries:
    path = Path(path)
    return parse_macro_csv(name or path.stem, path.read_text())


# ---------------------------------------------------------------- provider


@dataclass
class ProviderConfig:
    base_url: str = "https://www.alphavantage.co"
    api_key: str | None = None
    requests_per_minute: float = 5.0
    max_retries: int = 3
    timeout: float = 30.0
    cache_dir: Path | None = None

    def resolved_key(self) -> str:
        key = self.api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise ProviderError(f"no API key: set {API_KEY_ENV} or provider api_key")
        return key


class RateLimiter:
    """Spaces request starts at least ``60 / per_minute`` seconds apart."""

    def __init__(self, per_minute: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if per_minute <= 0:
            raise ValueError("per_minute must be positive")
        self.interval = 60.0 / per_minute
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next = None

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            if self._next is not None and now < self._next:
                self._sleep(self._next - now)
                now = self._next
            self._next = now + self.interval


class ProviderClient:
    """Daily-adjusted bar client for an Alpha-Vantage-compatible endpoint.

    One client (and its limiter) may be shared by several threads.
    """

    def __init__(self, config: ProviderConfig, opener=urllib.request.urlopen,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self.limiter = RateLimiter(config.requests_per_minute, clock, sleep)
        self._opener = opener
        self._sleep = sleep

    def url_for(self, ticker: str) -> str:
        query = urllib.parse.urlencode(
            {
                "function": "TIME_SERIES_DAILY_ADJUSTED",
                "symbol": ticker,
                "outputsize": "full",
                "apikey": self.config.resolved_key(),
            }
        )
        return f"{self.config.base_url.rstrip('/')}/query?{query}"

    def _get(self, url: str) -> bytes:
        attempts = 0
        while True:
            self.limiter.acquire()
            try:
                with self._opener(url, timeout=self.config.timeout) as resp:
                    status = getattr(resp, "status", 200)
                    body = resp.read()
            except urllib.error.HTTPError as exc:
                status, body = exc.code, b""
            except urllib.error.URLError as exc:
                raise TransportError(f"request failed: {exc.reason}") from None
            if status == 200:
                return body
            if status == 429:
                attempts += 1
                if attempts > self.config.max_retries:
                    raise RateLimitError(
                        f"HTTP 429 after {self.config.max_retries} retries", status=429
                    )
                self._sleep(self.limiter.interval * attempts)
                continue
            raise TransportError(f"HTTP {status}", status=status)

    def daily_adjusted(self, ticker: str) -> TickerSeries:
        body = self._get(self.url_for(ticker))
        try:
            payload = json.loads(body)
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise ParseError("provider payload is not JSON") from None
        return parse_daily_adjusted_payload(payload, ticker)


_AV_FIELDS = {
    "open": "1. open",
    "high": "2. high",
    "low": "3. low",
    "close": "4. close",
    "adjusted_close": "5. adjusted close",
    "volume": "6. volume",
}


def parse_daily_adjusted_payload(payload, ticker: str) -> TickerSeries:
    if not isinstance(payload, dict):
        raise ParseError("provider payload is not a JSON object")
    for key in ("Error Message", "Note", "Information"):
        if key in payload:
            raise ProviderError(str(payload[key]))
    table = payload.get("Time Series (Daily)")
    if not isinstance(table, dict):
        raise ParseError("payload lacks a 'Time Series (Daily)' object")
    bars = []
    for date_text, entry in table.items():
        try:
            date = dt.date.fromisoformat(date_text)
            values = {f: float(entry[k]) for f, k in _AV_FIELDS.items()}
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"malformed daily entry for {date_text!r}") from None
        bar = Bar(date, **values)
        problems = bar.problems()
        if problems:
            raise ValidationError(f"{ticker} {date_text}: {problems[0]}")
        bars.append(bar)
    bars.sort(key=lambda b: b.date)
    return TickerSeries(ticker, tuple(bars))


def fetch_remote_daily(ticker: str, config: ProviderConfig,
                       client: ProviderClient | None = None) -> TickerSeries:
    """Fetch daily-adjusted bars, reading and writing the CSV cache when configured."""
    cache = Path(config.cache_dir) / f"{ticker}.csv" if config.cache_dir else None
    if cache is not None and cache.exists():
        logger.info("using cached %s", cache)
        return load_ticker_csv(cache, ticker)
    client = client or ProviderClient(config)
    series = client.daily_adjusted(ticker)
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        cache.write_text(format_ohlcv_csv(series))
    return series


# ---------------------------------------------------------------- alignment


def _frequency(dates: Sequence[dt.date]) -> str:
    if len(dates) < 2:
        return "unknown"
    gaps = sorted((b - a).days for a, b in zip(dates, dates[1:]))
    median = gaps[len(gaps) // 2]
    if median <= 4:
        return "daily"
    if median <= 10:
        return "weekly"
    if median <= 45:
        return "monthly"
    if median <= 120:
        return "quarterly"
    return "annual"


def align_and_merge(tickers: Sequence[TickerSeries], macros: Sequence[MacroSeries] = ()) -> AlignedPanel:
    """Inner-join tickers on trading date and forward-fill macro series onto that axis."""
    if not tickers:
        raise EmptyPanelError("at least one ticker series is required")
    names = [t.ticker for t in tickers]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate ticker in {names}")
    macro_names = [m.name for m in macros]
    if len(set(macro_names)) != len(macro_names):
        raise ValidationError(f"duplicate macro series in {macro_names}")

    common = None
    for t in tickers:
        ds = set(t.dates.tolist())
        common = ds if common is None else common & ds
    if not common:
        raise EmptyPanelError("tickers share no trading dates")
    axis = np.array(sorted(common), dtype="datetime64[D]")

    columns: dict[str, np.ndarray] = {}
    meta: dict[str, ColumnMeta] = {}
    for t in sorted(tickers, key=lambda s: s.ticker):
        keep = np.isin(t.dates, axis)
        for f in PRICE_FIELDS:
            name = f"{t.ticker}.{f}"
            columns[name] = t.column(f)[keep]
            meta[name] = ColumnMeta(t.ticker, f, "daily")
    for m in sorted(macros, key=lambda s: s.name):
        columns[m.name] = forward_fill(m, axis)
        meta[m.name] = ColumnMeta(None, m.name, _frequency(m.dates))
    return AlignedPanel(axis, columns, meta)


def forward_fill(series: MacroSeries, axis: np.ndarray) -> np.ndarray:
    """Last observation dated on or before each axis date."""
    obs = np.array(series.dates, dtype="datetime64[D]")
    if len(obs) == 0 or obs[0] > axis[0]:
        first = str(obs[0]) if len(obs) else "never"
        raise LeadingGapError(
            series.name,
            f"macro series {series.name} starts {first}, after panel start {axis[0]}",
        )
    idx = np.searchsorted(obs, axis, side="right") - 1
    return np.asarray(series.values, dtype=np.float64)[idx]


def _minus_years(day: np.datetime64, years: int) -> np.datetime64:
    d = day.astype(object)
    try:
        back = d.replace(year=d.year - years)
    except ValueError:  # 29 February
        back = d.replace(year=d.year - years, day=28)
    return np.datetime64(back, "D")


def restrict_common_range(panel: AlignedPanel, tickers: Iterable[str] | None = None,
                          trailing_years: int | None = 40) -> AlignedPanel:
    """Keep dates on which every ticker has data, optionally only the last N years.

    A ticker's range runs from its first to its last finite ``adjusted_close``.
    """
    if len(panel) == 0:
        raise EmptyPanelError("panel is empty")
    tickers = list(tickers) if tickers is not None else panel.tickers
    start, end = panel.dates[0], panel.dates[-1]
    for t in tickers:
        col = f"{t}.adjusted_close"
        if col not in panel:
            raise ValidationError(f"panel has no column {col}")
        ok = np.flatnonzero(np.isfinite(panel[col]))
        if ok.size == 0:
            raise EmptyPanelError(f"{t} has no data in the panel")
        start = max(start, panel.dates[ok[0]])
        end = min(end, panel.dates[ok[-1]])
    mask = (panel.dates >= start) & (panel.dates <= end)
    if trailing_years is not None and mask.any():
        cutoff = _minus_years(panel.dates[mask][-1], int(trailing_years))
        mask &= panel.dates > cutoff
    if not mask.any():
        raise EmptyPanelError("tickers share no common date range")
    return panel.select_rows(mask)


# ---------------------------------------------------------------- panel CSV


def format_panel_csv(panel: AlignedPanel, columns: Sequence[str] | None = None) -> str:
    names = list(columns) if columns is not None else list(panel.columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date"] + names)
    for i, d in enumerate(panel.dates):
        w.writerow([str(d)] + [_fmt(panel.columns[c][i]) for c in names])
    return buf.getvalue()


def parse_panel_csv(text: str) -> AlignedPanel:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "date":
        raise ParseError("panel CSV must start with a date column", 1)
    names = header[1:]
    dates, rows = [], []
    for i, row in enumerate(reader, start=2):
        if not row:
            continue
        dates.append(_parse_date(row[0], i))
        rows.append([float(v) if v.strip() else math.nan for v in row[1:]])
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return AlignedPanel(
        np.array(dates, dtype="datetime64[D]"),
        {n: data[:, j] for j, n in enumerate(names)},
    )
