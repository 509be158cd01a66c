"""Order-book and OHLC ingestion, and the observables the model is fitted to.

File formats
------------
Book CSV, one row per price level, snapshots grouped by timestamp::

    timestamp,side,level,price,size
    t0,B,1,27.83,100
    t0,A,1,27.87,100

``side`` is ``B`` (bid) or ``A`` (ask); level 1 is the best level.

OHLC CSV::

    date,open,high,low,close

Observable series CSV (written by :meth:`ObservableSeries.to_csv`)::

    index,mid,rel_spread,pop_bid

``pop_bid`` is left empty when the series came from OHLC ticks.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySeriesError, InvalidInputError, ParseError

__all__ = [
    "BookSnapshot",
    "OhlcTick",
    "ObservableSeries",
    "load_book_series",
    "write_book_series",
    "load_ohlc",
    "load_observables",
    "load_any",
    "effective_levels",
    "extract_observables",
    "population_from_sizes",
    "parse_mode",
]

BOOK_HEADER = ["timestamp", "side", "level", "price", "size"]
OHLC_HEADER = ["date", "open", "high", "low", "close"]
OBS_HEADER = ["index", "mid", "rel_spread", "pop_bid"]
TRAJ_HEADER = ["step", "time", "mid", "spread", "pop_ask"]


@dataclass(frozen=True)
class BookSnapshot:
    """Order book at one timestamp.

    ``bids`` are (price, size) pairs from best (highest) down, ``asks`` from
    best (lowest) up.
    """

    timestamp: str
    bids: tuple
    asks: tuple

    def __post_init__(self):
        bids = tuple((float(p), float(s)) for p, s in self.bids)
        asks = tuple((float(p), float(s)) for p, s in self.asks)
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "asks", asks)
        if not bids or not asks:
            raise InvalidInputError(f"snapshot {self.timestamp}: both sides need at least one level")
        for side, levels in (("bid", bids), ("ask", asks)):
            if any(not s > 0 for _, s in levels):
                raise InvalidInputError(f"snapshot {self.timestamp}: nonpositive {side} size")
        if any(b[0] < a[0] for b, a in zip(bids, bids[1:])):
            raise InvalidInputError(f"snapshot {self.timestamp}: bids not in descending price order")
        if any(b[0] < a[0] for a, b in zip(asks, asks[1:])):
            raise InvalidInputError(f"snapshot {self.timestamp}: asks not in ascending price order")
        if not bids[0][0] < asks[0][0]:
            raise InvalidInputError(
                f"snapshot {self.timestamp}: crossed book (bid {bids[0][0]} >= ask {asks[0][0]})")

    @property
    def best_bid(self):
        return self.bids[0][0]

    @property
    def best_ask(self):
        return self.asks[0][0]

    @property
    def depth(self) -> int:
        return min(len(self.bids), len(self.asks))


@dataclass(frozen=True)
class OhlcTick:
    date: str
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self):
        if not (self.high >= self.low and self.low <= min(self.open, self.close)
                and self.high >= max(self.open, self.close)):
            raise InvalidInputError(f"tick {self.date}: inconsistent OHLC values")


@dataclass(frozen=True)
class ObservableSeries:
    """Relative spreads, mid prices and (for book data) bid populations."""

    spreads: np.ndarray
    mids: np.ndarray
    populations: np.ndarray | None = None
    source: str = field(default="book", compare=False)

    def __post_init__(self):
        spreads = np.asarray(self.spreads, dtype=float)
        mids = np.asarray(self.mids, dtype=float)
        object.__setattr__(self, "spreads", spreads)
        object.__setattr__(self, "mids", mids)
        if spreads.shape != mids.shape:
            raise InvalidInputError("spreads and mids must have equal length")
        if np.any(spreads < 0) or not np.all(np.isfinite(spreads)):
            raise InvalidInputError("spreads must be finite and >= 0")
        if self.populations is not None:
            pops = np.asarray(self.populations, dtype=float)
            object.__setattr__(self, "populations", pops)
            if pops.shape != spreads.shape:
                raise InvalidInputError("populations must match spreads in length")
            if np.any(pops < 0) or np.any(pops > 1):
                raise InvalidInputError("populations must lie in [0, 1]")

    def __len__(self):
        return len(self.spreads)

    def to_csv(self, fh=None):
        out = io.StringIO() if fh is None else fh
        out.write(",".join(OBS_HEADER) + "\n")
        for i in range(len(self)):
            pop = "" if self.populations is None else f"{self.populations[i]:.17g}"
            out.write(f"{i},{self.mids[i]:.17g},{self.spreads[i]:.17g},{pop}\n")
        if fh is None:
            return out.getvalue()


def _open(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline=""), True
    return source, False


def _read_rows(source, expected):
    fh, close = _open(source)
    try:
        rows = list(csv.reader(fh))
    finally:
        if close:
            fh.close()
    rows = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptySeriesError("input is empty")
    lineno, header = rows[0]
    if [h.strip() for h in header] != expected:
        raise ParseError(f"expected header {','.join(expected)!r}, got {','.join(header)!r}", lineno)
    if len(rows) == 1:
        raise EmptySeriesError("input has a header but no data rows")
    for lineno, r in rows[1:]:
        if len(r) != len(expected):
            raise ParseError(f"expected {len(expected)} fields, got {len(r)}", lineno)
    return rows[1:]


def _number(text, what, lineno):
    try:
        val = float(text)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not a number", lineno) from None
    if not np.isfinite(val):
        raise ParseError(f"{what} is not finite", lineno)
    return val


def _sort_key(stamps):
    try:
        keys = {t: float(t) for t in stamps}
    except ValueError:
        keys = {t: t for t in stamps}
    return keys.__getitem__


def load_book_series(source) -> list[BookSnapshot]:
    """Read a book CSV into validated snapshots ordered by timestamp.

    Raises :class:`ParseError` (with the line number) on schema problems,
    nonpositive sizes, out-of-order levels or a crossed book, and
    :class:`EmptySeriesError` when there are no rows.
    """
    rows = _read_rows(source, BOOK_HEADER)
    books: dict[str, dict] = {}
    for lineno, (ts, side, level, price, size) in rows:
        ts, side = ts.strip(), side.strip().upper()
        if side not in ("B", "A"):
            raise ParseError(f"side must be B or A, got {side!r}", lineno)
        try:
            lvl = int(level)
        except ValueError:
            raise ParseError(f"level {level!r} is not an integer", lineno) from None
        if lvl < 1:
            raise ParseError("level must be >= 1", lineno)
        px = _number(price, "price", lineno)
        sz = _number(size, "size", lineno)
        if sz <= 0:
            raise ParseError(f"nonpositive size {sz}", lineno)
        book = books.setdefault(ts, {"B": {}, "A": {}})
        if lvl in book[side]:
            raise ParseError(f"duplicate level {lvl} on side {side} at {ts}", lineno)
        book[side][lvl] = (px, sz, lineno)

    snaps = []
    for ts in sorted(books, key=_sort_key(books)):
        sides = {}
        for side in ("B", "A"):
            levels = [books[ts][side][k] for k in sorted(books[ts][side])]
            if not levels:
                raise ParseError(f"snapshot {ts} has no {'bid' if side == 'B' else 'ask'} levels")
            sign = -1.0 if side == "B" else 1.0
            for prev, cur in zip(levels, levels[1:]):
                if sign * (cur[0] - prev[0]) < 0:
                    raise ParseError(f"snapshot {ts}: level prices out of order on side {side}", cur[2])
            sides[side] = levels
        if sides["B"][0][0] >= sides["A"][0][0]:
            raise ParseError(f"crossed book at {ts}: best bid {sides['B'][0][0]} >= "
                             f"best ask {sides['A'][0][0]}", sides["A"][0][2])
        snaps.append(BookSnapshot(ts, tuple(l[:2] for l in sides["B"]),
                                  tuple(l[:2] for l in sides["A"])))
    return snaps


def write_book_series(snapshots, fh=None):
    out = io.StringIO() if fh is None else fh
    out.write(",".join(BOOK_HEADER) + "\n")
    for s in snapshots:
        for side, levels in (("B", s.bids), ("A", s.asks)):
            for k, (p, sz) in enumerate(levels, start=1):
                out.write(f"{s.timestamp},{side},{k},{p!r},{sz!r}\n")
    if fh is None:
        return out.getvalue()


def load_ohlc(source) -> list[OhlcTick]:
    rows = _read_rows(source, OHLC_HEADER)
    ticks = []
    for lineno, (date, *vals) in rows:
        o, h, l, c = (_number(v, name, lineno) for v, name in zip(vals, OHLC_HEADER[1:]))
        try:
            ticks.append(OhlcTick(date.strip(), o, h, l, c))
        except InvalidInputError as exc:
            raise ParseError(str(exc), lineno) from None
    return ticks


def load_observables(source) -> ObservableSeries:
    rows = _read_rows(source, OBS_HEADER)
    mids, spreads, pops = [], [], []
    for lineno, (_, mid, spr, pop) in rows:
        mids.append(_number(mid, "mid", lineno))
        spreads.append(_number(spr, "rel_spread", lineno))
        pops.append(None if pop.strip() == "" else _number(pop, "pop_bid", lineno))
    if all(p is None for p in pops):
        populations, source_kind = None, "ohlc"
    elif any(p is None for p in pops):
        raise ParseError("pop_bid must be given on every row or on none")
    else:
        populations, source_kind = np.array(pops), "book"
    try:
        return ObservableSeries(np.array(spreads), np.array(mids), populations, source=source_kind)
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from None


def _header_of(path):
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row and any(c.strip() for c in row):
                return [c.strip() for c in row]
    return None


def load_any(path):
    """Load a file by sniffing its header.

    Returns ``(kind, data)`` where ``kind`` is one of ``"book"``, ``"ohlc"``,
    ``"observables"`` or ``"trajectory"``. Trajectory files yield a dict of
    numpy columns.
    """
    header = _header_of(path)
    if header is None:
        raise EmptySeriesError(f"{path} is empty")
    if header == BOOK_HEADER:
        return "book", load_book_series(path)
    if header == OHLC_HEADER:
        return "ohlc", load_ohlc(path)
    if header == OBS_HEADER:
        return "observables", load_observables(path)
    if header == TRAJ_HEADER:
        rows = _read_rows(path, TRAJ_HEADER)
        cols = np.array([[_number(v, TRAJ_HEADER[j], ln) for j, v in enumerate(r)] for ln, r in rows])
        return "trajectory", {name: cols[:, j] for j, name in enumerate(TRAJ_HEADER)}
    raise ParseError(f"unrecognized header {','.join(header)!r}", 1)


def effective_levels(snap: BookSnapshot, n_levels: int):
    """Size-weighted average bid and ask over the top ``n_levels`` levels."""
    if n_levels < 1:
        raise InvalidInputError("n_levels must be >= 1")
    if n_levels > len(snap.bids) or n_levels > len(snap.asks):
        raise InvalidInputError(f"book depth {snap.depth} is less than {n_levels} levels")
    out = []
    for levels in (snap.bids[:n_levels], snap.asks[:n_levels]):
        px = np.array([p for p, _ in levels])
        sz = np.array([s for _, s in levels])
        out.append(float(np.dot(px, sz) / sz.sum()))
    return out[0], out[1]


def population_from_sizes(n_bid, n_ask):
    """Bid and ask populations estimated from resting sizes.

    ``pop_bid = n_bid / (n_bid + n_ask)``; likewise for the ask.
    """
    if n_bid < 0 or n_ask < 0:
        raise InvalidInputError("sizes must be >= 0")
    total = n_bid + n_ask
    if total == 0:
        raise InvalidInputError("at least one size must be positive")
    return n_bid / total, n_ask / total


def parse_mode(mode, n_levels=None):
    """Normalize a mode spec to ``("best", 1)``, ``("effective", n)`` or ``("ohlc", None)``.

    Accepts ``"effective(5)"`` as well as ``mode="effective", n_levels=5``.
    """
    m = str(mode).strip().lower()
    if m.startswith("effective(") and m.endswith(")"):
        n_levels = int(m[len("effective("):-1])
        m = "effective"
    if m == "best":
        return "best", 1
    if m == "effective":
        if n_levels is None or int(n_levels) < 1:
            raise InvalidInputError("effective mode needs n_levels >= 1")
        return "effective", int(n_levels)
    if m == "ohlc":
        return "ohlc", None
    raise InvalidInputError(f"unknown mode {mode!r}")


def extract_observables(series, mode="best", n_levels=None) -> ObservableSeries:
    """Relative spreads, mids and populations for the chosen observable.

    ``best`` uses best bid/ask and best-level sizes; ``effective`` uses the
    size-weighted prices and cumulative sizes of the top ``n_levels``;
    ``ohlc`` uses high/low as ask/bid and yields no populations.
    """
    kind, n = parse_mode(mode, n_levels)
    series = list(series)
    if not series:
        raise InvalidInputError("series is empty")
    is_ohlc = all(isinstance(x, OhlcTick) for x in series)
    is_book = all(isinstance(x, BookSnapshot) for x in series)
    if kind == "ohlc" and not is_ohlc:
        raise InvalidInputError("ohlc mode needs OHLC ticks")
    if kind != "ohlc" and not is_book:
        got = "OHLC ticks" if is_ohlc else "other records"
        raise InvalidInputError(f"{kind} mode needs order-book snapshots, got {got}")

    if kind == "ohlc":
        hi = np.array([t.high for t in series])
        lo = np.array([t.low for t in series])
        mids = 0.5 * (hi + lo)
        return ObservableSeries((hi - lo) / mids, mids, None, source="ohlc")

    bids, asks, pops = [], [], []
    for s in series:
        if kind == "best":
            b, a = s.best_bid, s.best_ask
            nb, na = s.bids[0][1], s.asks[0][1]
        else:
            b, a = effective_levels(s, n)
            nb = sum(sz for _, sz in s.bids[:n])
            na = sum(sz for _, sz in s.asks[:n])
        bids.append(b)
        asks.append(a)
        pops.append(population_from_sizes(nb, na)[0])
    bids, asks = np.array(bids), np.array(asks)
    mids = 0.5 * (asks + bids)
    return ObservableSeries((asks - bids) / mids, mids, np.array(pops), source="book")
