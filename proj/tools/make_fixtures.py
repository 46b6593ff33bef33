#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures under tests/fixtures/.

toy/     six sectors, eleven budget events (2015-2024, with an interim and a
         full budget in 2019), two-label segments, prices for every event.
         Segment vectors sit on their gold sectors' name directions, so
         base-STS classification at tau=0.5 is exact.
oracle/  ten sectors, twenty yearly events (2005-2024), one segment per
         (event, sector). Coordinate 0 of each segment vector is the
         sector's realized return for that event.

Output is deterministic: fixed seeds and repr() float formatting.
"""

import argparse
import datetime as dt
import json
import math
import random
from pathlib import Path

TOY_SECTORS = ["Banks", "Steel", "Textiles", "Pharmaceuticals", "Automobile", "Power Generation & Distribution"]

TOY_EVENTS = [
    "2015-02-28", "2016-02-29", "2017-02-01", "2018-02-01", "2019-02-01", "2019-07-05",
    "2020-02-01", "2021-02-01", "2022-02-01", "2023-02-01", "2024-07-23",
]

ORACLE_SECTORS = [
    "Banks", "Cement", "Chemicals", "Construction", "FMCG",
    "IT - Software", "Pharmaceuticals", "Refineries", "Steel", "Textiles",
]


def fmt(x):
    return repr(float(x))


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def embv1(dim, rows):
    lines = [f"EMBV1 {dim}"]
    for key, vec in rows:
        lines.append(key + "\t" + " ".join(fmt(x) for x in vec))
    return "\n".join(lines) + "\n"


def trading_days(start, count):
    days, d = [], start
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def taxonomy_csv(sectors, per_sector):
    rows = ["sector,company"]
    for i, s in enumerate(sectors):
        name = f'"{s}"' if "," in s else s
        for c in range(per_sector):
            rows.append(f"{name},C{i:02d}{c}")
    return "\n".join(rows) + "\n"


def make_toy(out):
    rng = random.Random(7)
    dim = 8
    k = len(TOY_SECTORS)
    write(out / "taxonomy.csv", taxonomy_csv(TOY_SECTORS, 2))

    segments, vectors = [], []
    for e, date in enumerate(TOY_EVENTS):
        year = int(date[:4])
        for j in range(6):
            first = (e + j) % k
            gold = [first] if j % 3 else sorted({first, (first + 2) % k})
            v = [0.0] * dim
            for g in gold:
                v[g] = 1.0
            v = unit([x + rng.gauss(0.0, 0.02) for x in v])
            seg_id = f"{date}-{j}"
            segments.append({
                "id": seg_id,
                "year": year,
                "date": date,
                "text": f"Budget {date} excerpt {j} on " + " and ".join(TOY_SECTORS[g] for g in gold),
                "sectors": [TOY_SECTORS[g] for g in gold],
            })
            vectors.append((seg_id, v))
    write(out / "segments.jsonl",
          "".join(json.dumps(s, ensure_ascii=False, separators=(",", ":")) + "\n" for s in segments))

    names = []
    for i, s in enumerate(TOY_SECTORS):
        v = [0.0] * dim
        v[i] = 1.0
        v[6 + i % 2] = 0.6
        names.append(("sector::" + s, unit(v)))
    write(out / "embeddings.embv1", embv1(dim, vectors + names))

    rows = ["company,date,open"]
    for i in range(k):
        for c in range(2):
            company = f"C{i:02d}{c}"
            price = 100.0 + 10 * i + c
            for date in TOY_EVENTS:
                start = dt.date.fromisoformat(date) - dt.timedelta(days=3)
                for day in trading_days(start, 6):
                    price = round(price * (1.0 + rng.uniform(-0.03, 0.03)), 2)
                    rows.append(f"{company},{day.isoformat()},{price}")
    write(out / "prices.csv", "\n".join(rows) + "\n")


def make_oracle(out):
    rng = random.Random(11)
    k = len(ORACLE_SECTORS)
    dim = 2 + k
    write(out / "taxonomy.csv", taxonomy_csv(ORACLE_SECTORS, 1))

    segments, vectors, prices = [], [], ["company,date,open"]
    for year in range(2005, 2025):
        date = dt.date(year, 2, 1)
        while date.weekday() >= 5:
            date += dt.timedelta(days=1)
        after = date + dt.timedelta(days=1)
        while after.weekday() >= 5:
            after += dt.timedelta(days=1)
        returns = rng.sample(range(-40, 41), k)
        for i, s in enumerate(ORACLE_SECTORS):
            r = returns[i] / 1000.0
            seg_id = f"{year}-{i:02d}"
            segments.append({"id": seg_id, "year": year, "date": date.isoformat(),
                             "text": f"{year} allocation for {s}", "sectors": [s]})
            v = [0.0] * dim
            v[0] = r
            v[1] = 1.0
            v[2 + i] = 0.5
            vectors.append((seg_id, v))
            prices.append(f"C{i:02d}0,{date.isoformat()},100.0")
            prices.append(f"C{i:02d}0,{after.isoformat()},{fmt(100.0 * (1.0 + r))}")
    write(out / "segments.jsonl",
          "".join(json.dumps(s, separators=(",", ":")) + "\n" for s in segments))
    names = []
    for i, s in enumerate(ORACLE_SECTORS):
        v = [0.0] * dim
        v[2 + i] = 1.0
        names.append(("sector::" + s, v))
    write(out / "embeddings.embv1", embv1(dim, vectors + names))
    write(out / "prices.csv", "\n".join([prices[0]] + sorted(prices[1:])) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    args = ap.parse_args()
    make_toy(args.out / "toy")
    make_oracle(args.out / "oracle")


if __name__ == "__main__":
    main()
