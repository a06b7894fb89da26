"""Regenerate the bundled synthetic FX fixings.

Produces business-day CHF-EUR and CHF-SGD series over three years as a
seeded geometric random walk bridged between hand-picked endpoints. The
output is illustrative data for demos and tests, not market history.

Run from the repository root:

    python3 scripts/gen_sample_fx.py
"""

from __future__ import annotations

import datetime
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "src" / "swapcost" / "data" / "sample_fx.csv"

START = datetime.date(2021, 7, 1)
END = datetime.date(2024, 6, 30)

# (first fixing, last fixing, daily log-vol)
CHF_EUR = (0.915, 1.058, 0.0028)
CHF_SGD = (1.465, 1.502, 0.0030)

SEED = 20210701


def business_days(start: datetime.date, end: datetime.date) -> list[datetime.date]:
    days = []
    cursor = start
    one = datetime.timedelta(days=1)
    while cursor <= end:
        if cursor.weekday() < 5:
            days.append(cursor)
        cursor += one
    return days


def bridged_walk(rng: np.random.Generator, n: int, first: float, last: float, vol: float) -> np.ndarray:
    noise = rng.normal(0.0, vol, size=n - 1)
    noise -= noise.mean()  # random bridge: endpoints hit exactly
    drift = (np.log(last) - np.log(first)) / (n - 1)
    log_path = np.log(first) + np.concatenate(([0.0], np.cumsum(drift + noise)))
    return np.exp(log_path)


def main() -> None:
    days = business_days(START, END)
    rng = np.random.default_rng(SEED)
    eur = bridged_walk(rng, len(days), *CHF_EUR)
    sgd = bridged_walk(rng, len(days), *CHF_SGD)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w") as handle:
        handle.write("# synthetic sample fixings, see scripts/gen_sample_fx.py\n")
        handle.write("date,chf_eur,chf_sgd\n")
        for day, e, s in zip(days, eur, sgd):
            handle.write(f"{day.isoformat()},{e:.6f},{s:.6f}\n")
    print(f"wrote {len(days)} rows to {OUT}")


if __name__ == "__main__":
    main()
