"""Reading constraint documents and pair matrices.

The JSON shape is::

    {
      "must_see": [poi_id, ...],
      "budget": {"limit": 12.5, "cost_matrix_ref": "costs.csv"},
      "time": {
        "start": 32400, "limit": 28800,
        "open": {"3": 36000}, "close": {"3": 61200}, "stay": {"3": 1800},
        "stay_default": 900,
        "travel_matrix_ref": "travel.csv", "walk_speed_kmh": 5.0
      }
    }

Pair matrices come from a CSV keyed by poi id on both axes
(``*_matrix_ref``, resolved relative to the document), from an inline
list-of-lists aligned with the catalog's ascending id order
(``*_matrix``), or as a fallback from catalog geometry: trip costs default
to straight-line km, travel times to walking those km at ``walk_speed_kmh``.
All times are seconds.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .dataset import POICatalog
from .errors import ParseError, UnknownPOI
from .poigraph import pairwise_distances_km
from .sampler import ConstraintSet, TimeWindows

PairTable = dict[int, dict[int, float]]


def load_matrix_csv(path: str | Path) -> PairTable:
    """Read a pair matrix CSV; both header and first column are poi ids."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "poi_id":
            raise ParseError(f"{path}: first header cell must be poi_id")
        try:
            col_ids = [int(c) for c in header[1:]]
        except ValueError:
            raise ParseError(f"{path}: non-integer poi id in header") from None
        table: PairTable = {}
        for n, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(col_ids) + 1:
                raise ParseError(f"{path} row {n}: expected {len(col_ids) + 1} cells")
            try:
                row_id = int(row[0])
            except ValueError:
                raise ParseError(f"{path} row {n}: non-integer poi id") from None
            entries = {}
            for col_id, cell in zip(col_ids, row[1:]):
                cell = cell.strip()
                if cell == "":
                    continue  # absent pair
                try:
                    entries[col_id] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path} row {n}: bad value {cell!r} for column {col_id}"
                    ) from None
            table[row_id] = entries
    return table


def save_matrix_csv(table: PairTable, path: str | Path) -> None:
    ids = sorted(set(table) | {c for row in table.values() for c in row})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["poi_id", *ids])
        for rid in ids:
            row = table.get(rid, {})
            writer.writerow([rid, *[row.get(cid, "") for cid in ids]])


def matrix_from_lists(catalog: POICatalog, rows: list[list[float]]) -> PairTable:
    """Inline matrix aligned with the catalog's ascending poi id order."""
    n = len(catalog)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ParseError(f"inline matrix must be {n}x{n} for this catalog")
    ids = catalog.ids
    return {
        ids[i]: {ids[j]: float(rows[i][j]) for j in range(n)} for i in range(n)
    }


def distance_cost_table(catalog: POICatalog) -> PairTable:
    """Straight-line km between every POI pair."""
    dist = pairwise_distances_km(catalog)
    ids = catalog.ids
    return {
        ids[i]: {ids[j]: float(dist[i, j]) for j in range(len(ids))}
        for i in range(len(ids))
    }


def walking_travel_table(catalog: POICatalog, speed_kmh: float = 5.0) -> PairTable:
    """Travel seconds between POIs at a constant walking speed."""
    if speed_kmh <= 0:
        raise ParseError(f"walk speed must be positive, got {speed_kmh}")
    factor = 3600.0 / speed_kmh
    return {
        a: {b: v * factor for b, v in row.items()}
        for a, row in distance_cost_table(catalog).items()
    }


def _poi_seconds_map(doc: dict, key: str, catalog: POICatalog) -> dict[int, float]:
    raw = doc.get(key, {})
    if not isinstance(raw, dict):
        raise ParseError(f"time.{key} must be an object of poi_id -> seconds")
    out = {}
    for k, v in raw.items():
        try:
            poi = int(k)
            val = float(v)
        except (TypeError, ValueError):
            raise ParseError(f"time.{key}: bad entry {k!r}: {v!r}") from None
        if poi not in catalog:
            raise UnknownPOI(f"time.{key} references poi_id {poi} not in catalog")
        out[poi] = val
    return out


def _pair_table(
    doc: dict, prefix: str, catalog: POICatalog, base_dir: Path | None,
    fallback,
) -> PairTable:
    ref = doc.get(f"{prefix}_ref")
    inline = doc.get(prefix)
    if ref is not None and inline is not None:
        raise ParseError(f"give either {prefix} or {prefix}_ref, not both")
    if ref is not None:
        path = Path(ref)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return load_matrix_csv(path)
    if inline is not None:
        if not isinstance(inline, list):
            raise ParseError(f"{prefix} must be a list of rows")
        return matrix_from_lists(catalog, inline)
    return fallback()


def parse_constraints(
    doc: dict, catalog: POICatalog, base_dir: Path | None = None
) -> ConstraintSet:
    """Build a ConstraintSet from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ParseError("constraints document must be a JSON object")
    unknown = set(doc) - {"must_see", "budget", "time"}
    if unknown:
        raise ParseError(f"unknown constraint sections: {sorted(unknown)}")

    must_see = frozenset()
    if "must_see" in doc:
        raw = doc["must_see"]
        if not isinstance(raw, list):
            raise ParseError("must_see must be a list of poi ids")
        ids = set()
        for item in raw:
            try:
                poi = int(item)
            except (TypeError, ValueError):
                raise ParseError(f"must_see: bad poi id {item!r}") from None
            if poi not in catalog:
                raise UnknownPOI(f"must_see references poi_id {poi} not in catalog")
            ids.add(poi)
        must_see = frozenset(ids)

    budget_limit = None
    cost = None
    if "budget" in doc:
        b = doc["budget"]
        if not isinstance(b, dict) or "limit" not in b:
            raise ParseError("budget must be an object with a limit")
        try:
            budget_limit = float(b["limit"])
        except (TypeError, ValueError):
            raise ParseError(f"budget.limit: bad value {b.get('limit')!r}") from None
        cost = _pair_table(
            b, "cost_matrix", catalog, base_dir, lambda: distance_cost_table(catalog)
        )

    time_windows = None
    if "time" in doc:
        tdoc = doc["time"]
        if not isinstance(tdoc, dict):
            raise ParseError("time must be an object")
        speed = float(tdoc.get("walk_speed_kmh", 5.0))
        travel = _pair_table(
            tdoc, "travel_matrix", catalog, base_dir,
            lambda: walking_travel_table(catalog, speed),
        )
        stay = _poi_seconds_map(tdoc, "stay", catalog)
        if "stay_default" in tdoc:
            default = float(tdoc["stay_default"])
            stay = {p.poi_id: stay.get(p.poi_id, default) for p in catalog}
        limit = tdoc.get("limit")
        time_windows = TimeWindows(
            travel=travel,
            start=float(tdoc.get("start", 0.0)),
            limit=None if limit is None else float(limit),
            open_at=_poi_seconds_map(tdoc, "open", catalog),
            close_at=_poi_seconds_map(tdoc, "close", catalog),
            stay=stay,
        )

    return ConstraintSet(
        must_see=must_see, budget_limit=budget_limit, cost=cost, time=time_windows
    )


def load_constraints(path: str | Path, catalog: POICatalog) -> ConstraintSet:
    """Read a constraints JSON file; matrix refs resolve relative to it."""
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return parse_constraints(doc, catalog, base_dir=path.parent)
