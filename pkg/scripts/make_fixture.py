"""Generate the bundled synthetic check-in fixture (midtown).

The city, its users, and their sessions are produced deterministically from
a fixed seed.  Sessions are planned first as POI sequences, so the expected
route set is known by construction; the script then renders them into raw
visit rows (including deliberate repeat check-ins and too-short sessions),
re-extracts routes through the library, and asserts the result matches the
plan exactly before freezing the counts into manifest.json.

Run from the repository root:

    python3 scripts/make_fixture.py
"""
from __future__ import annotations

import json
import math
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from alttrip.dataset import (  # noqa: E402
    POI,
    POICatalog,
    Visit,
    build_routes,
    catalog_hash,
    dataset_counts,
    save_catalog,
)

SEED = 20240817
GAP_HOURS = 8.0
OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "midtown"

CATEGORIES = {
    0: "museum", 1: "museum", 2: "museum", 3: "museum",
    4: "park", 5: "park", 6: "park", 7: "park",
    8: "food", 9: "food", 10: "food", 11: "food",
    12: "viewpoint", 13: "viewpoint", 14: "viewpoint",
}

# common walk endpoints give repeated (s, d) pairs for ground truth
STARTS = [0, 0, 0, 4, 4, 1, 12]
ENDS = [9, 9, 14, 14, 9, 11, 8]


def make_catalog(rng: random.Random) -> POICatalog:
    pois = []
    for poi_id, category in CATEGORIES.items():
        angle = 2 * math.pi * poi_id / len(CATEGORIES)
        radius = 0.008 + 0.010 * rng.random()
        lat = 40.7500 + radius * math.sin(angle)
        lon = -73.9800 + radius * math.cos(angle)
        pois.append(POI(poi_id, round(lat, 6), round(lon, 6), category))
    return POICatalog(pois)


def _weights(catalog: POICatalog, current: int, pool: list[int]) -> list[float]:
    cur = catalog.get(current)
    out = []
    for poi_id in pool:
        p = catalog.get(poi_id)
        dist = math.hypot(p.lat - cur.lat, p.lon - cur.lon)
        popularity = 1.5 if poi_id in (2, 5, 7, 9) else 1.0
        out.append(popularity * math.exp(-120.0 * dist))
    return out


def plan_session(rng: random.Random, catalog: POICatalog) -> list[int]:
    """One intended walk: endpoints from the common pools, nearby interiors."""
    s = rng.choice(STARTS)
    d = rng.choice([e for e in ENDS if e != s])
    n_interior = rng.choice([1, 2, 2, 3, 3, 4])
    pool = [p for p in CATEGORIES if p not in (s, d)]
    seq = [s]
    for _ in range(n_interior):
        weights = _weights(catalog, seq[-1], pool)
        pick = rng.choices(pool, weights=weights, k=1)[0]
        seq.append(pick)
        pool.remove(pick)
    seq.append(d)
    return seq


def main() -> None:
    rng = random.Random(SEED)
    catalog = make_catalog(rng)

    planned_routes: list[tuple[int, ...]] = []
    visits: list[Visit] = []
    clock_base = 1_700_000_000

    for user_n in range(48):
        user_id = f"user{user_n:03d}"
        clock = clock_base + user_n * 97_000
        n_sessions = rng.choice([2, 2, 3, 3, 4])
        for session_n in range(n_sessions):
            degenerate = rng.random() < 0.12
            if degenerate:
                # too few distinct POIs: must be dropped by extraction
                a = rng.choice(list(CATEGORIES))
                b = rng.choice([p for p in CATEGORIES if p != a])
                seq = [a, b, a]
            else:
                seq = plan_session(rng, catalog)
                planned_routes.append(tuple(seq))

            emitted = list(seq)
            if not degenerate and rng.random() < 0.3:
                # repeat check-in at an already visited POI; extraction
                # keeps the first occurrence only
                repeat_of = rng.randrange(len(seq) - 1)
                emitted.insert(rng.randrange(repeat_of + 1, len(emitted)), seq[repeat_of])
            for poi_id in emitted:
                visits.append(Visit(user_id, poi_id, clock))
                clock += rng.randrange(600, 5400)  # 10..90 minutes
            clock += rng.randrange(int(9.5 * 3600), 30 * 3600)  # well past the gap

    order = list(range(len(visits)))
    rng.shuffle(order)  # the loader must not rely on input order
    shuffled = [visits[i] for i in order]

    extracted = build_routes(visits, catalog, gap_hours=GAP_HOURS)
    extracted_shuffled = build_routes(shuffled, catalog, gap_hours=GAP_HOURS)
    got = sorted(r.poi_ids for r in extracted)
    assert got == sorted(r.poi_ids for r in extracted_shuffled), "order dependence"
    assert got == sorted(planned_routes), "extraction does not match the plan"

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    save_catalog(catalog, OUT_DIR / "pois.csv")
    with open(OUT_DIR / "visits.csv", "w") as fh:
        fh.write("user_id,poi_id,ts\n")
        for v in shuffled:
            fh.write(f"{v.user_id},{v.poi_id},{v.ts}\n")

    manifest = {
        **dataset_counts(catalog, extracted),
        "gap_hours": GAP_HOURS,
        "generator_seed": SEED,
        "catalog_hash": catalog_hash(catalog),
    }
    with open(OUT_DIR / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    print(json.dumps(manifest, indent=1))


if __name__ == "__main__":
    main()
