"""UTC instants, duration arithmetic, and collection-frequency buckets.

All timestamps are timezone-aware UTC at second precision and travel in
the wire/file format ``YYYY-MM-DDThh:mm:ssZ``. Month arithmetic is
calendar-based with end-of-month clamping (one month before March 31 is
February 28/29), matching human reporting periods.
"""

from __future__ import annotations

from calendar import monthrange
from datetime import date, datetime, timedelta, timezone

from .model import CollectionFrequency, Duration

UTC_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def parse_utc(text: str) -> datetime:
    """Parse a `YYYY-MM-DDThh:mm:ssZ` instant. Raises ValueError otherwise."""
    dt = datetime.strptime(text, UTC_FORMAT)
    return dt.replace(tzinfo=timezone.utc)


def format_utc(dt: datetime) -> str:
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    return dt.strftime(UTC_FORMAT)


def utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def add_months(dt: datetime, months: int) -> datetime:
    total = dt.year * 12 + (dt.month - 1) + months
    year, month0 = divmod(total, 12)
    day = min(dt.day, monthrange(year, month0 + 1)[1])
    return dt.replace(year=year, month=month0 + 1, day=day)


def add_duration(dt: datetime, duration: Duration, times: int = 1) -> datetime:
    """dt + times * duration. Month steps are applied in one jump so a
    stepped series does not drift through short months."""
    n = duration.count * times
    if duration.unit == "d":
        return dt + timedelta(days=n)
    if duration.unit == "w":
        return dt + timedelta(weeks=n)
    if duration.unit == "m":
        return add_months(dt, n)
    raise ValueError(f"unknown duration unit {duration.unit!r}")


def subtract_duration(dt: datetime, duration: Duration) -> datetime:
    return add_duration(dt, duration, times=-1)


def parse_duration(text: str) -> Duration:
    """Parse `<count><unit>` like `30d`, `4w`, `1m`."""
    if len(text) < 2 or text[-1] not in "dwm" or not text[:-1].isdigit():
        raise ValueError(f"bad duration {text!r}: expected e.g. 30d, 4w or 1m")
    count = int(text[:-1])
    if count < 1:
        raise ValueError(f"bad duration {text!r}: count must be >= 1")
    return Duration(count=count, unit=text[-1])


# --- frequency buckets -------------------------------------------------------
#
# Coverage reporting partitions a period into the buckets implied by a
# measure's collection frequency. Labels are stable strings:
#   daily      2026-08-10
#   weekly     2026-W32            (ISO week)
#   monthly    2026-08
#   quarterly  2026-Q3


def bucket_label(ts: datetime, frequency: CollectionFrequency) -> str:
    if frequency is CollectionFrequency.DAILY:
        return ts.date().isoformat()
    if frequency is CollectionFrequency.WEEKLY:
        iso = ts.isocalendar()
        return f"{iso.year}-W{iso.week:02d}"
    if frequency is CollectionFrequency.MONTHLY:
        return f"{ts.year}-{ts.month:02d}"
    if frequency is CollectionFrequency.QUARTERLY:
        return f"{ts.year}-Q{(ts.month - 1) // 3 + 1}"
    raise ValueError(f"{frequency.value} measures have no buckets")


def bucket_labels(start: datetime, end: datetime, frequency: CollectionFrequency) -> list[str]:
    """All bucket labels overlapping the closed period [start, end], in order."""
    if end < start:
        raise ValueError("period end precedes start")
    labels: list[str] = []
    if frequency is CollectionFrequency.DAILY:
        day = start.date()
        while day <= end.date():
            labels.append(day.isoformat())
            day += timedelta(days=1)
    elif frequency is CollectionFrequency.WEEKLY:
        # Step Mondays from the ISO week containing start.
        day = start.date() - timedelta(days=start.date().isoweekday() - 1)
        while day <= end.date():
            iso = day.isocalendar()
            labels.append(f"{iso.year}-W{iso.week:02d}")
            day += timedelta(days=7)
    elif frequency is CollectionFrequency.MONTHLY:
        year, month = start.year, start.month
        while (year, month) <= (end.year, end.month):
            labels.append(f"{year}-{month:02d}")
            year, month = (year + 1, 1) if month == 12 else (year, month + 1)
    elif frequency is CollectionFrequency.QUARTERLY:
        year, quarter = start.year, (start.month - 1) // 3 + 1
        end_key = (end.year, (end.month - 1) // 3 + 1)
        while (year, quarter) <= end_key:
            labels.append(f"{year}-Q{quarter}")
            year, quarter = (year + 1, 1) if quarter == 4 else (year, quarter + 1)
    else:
        raise ValueError(f"{frequency.value} measures have no buckets")
    return labels
