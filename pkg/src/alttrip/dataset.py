"""POI catalogs, visit logs, route extraction, and fold splits.

A catalog is the set of POIs for one city.  Visit logs are (user, poi, ts)
check-in triples; consecutive check-ins of one user belong to the same
trajectory unless separated by more than ``gap_hours``.  Trajectories are
de-duplicated (first occurrence of a POI wins) and kept only if they still
contain at least three distinct POIs.
"""
from __future__ import annotations

import csv
import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import (
    DuplicateId,
    EmptyCatalog,
    ParseError,
    TooFewRoutes,
    UnknownPOI,
)

POIS_HEADER = ["poi_id", "lat", "lon", "category"]
VISITS_HEADER = ["user_id", "poi_id", "ts"]
ROUTES_HEADER = ["route_id", "user_id", "poi_ids"]


@dataclass(frozen=True)
class POI:
    poi_id: int
    lat: float
    lon: float
    category: str


class Visit(NamedTuple):
    user_id: str
    poi_id: int
    ts: int


@dataclass(frozen=True)
class Route:
    """An ordered, duplicate-free POI sequence extracted from one user session."""

    poi_ids: tuple[int, ...]
    user_id: str | None = None

    def __len__(self) -> int:
        return len(self.poi_ids)

    @property
    def s(self) -> int:
        return self.poi_ids[0]

    @property
    def d(self) -> int:
        return self.poi_ids[-1]


class POICatalog:
    """POIs of one city, ordered by ascending id.

    All dense vectors and matrices elsewhere in the package are aligned to
    this order; ``index_of`` translates a POI id to its row.
    """

    def __init__(self, pois: Iterable[POI]):
        items = sorted(pois, key=lambda p: p.poi_id)
        if not items:
            raise EmptyCatalog("catalog contains no POIs")
        seen: dict[int, POI] = {}
        for p in items:
            if p.poi_id in seen:
                raise DuplicateId(f"poi_id {p.poi_id} appears more than once")
            seen[p.poi_id] = p
        self.pois: tuple[POI, ...] = tuple(items)
        self._index = {p.poi_id: i for i, p in enumerate(items)}

    def __len__(self) -> int:
        return len(self.pois)

    def __iter__(self):
        return iter(self.pois)

    def __contains__(self, poi_id: int) -> bool:
        return poi_id in self._index

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(p.poi_id for p in self.pois)

    def index_of(self, poi_id: int) -> int:
        try:
            return self._index[poi_id]
        except KeyError:
            raise UnknownPOI(f"poi_id {poi_id} not in catalog") from None

    def id_at(self, index: int) -> int:
        return self.pois[index].poi_id

    def get(self, poi_id: int) -> POI:
        return self.pois[self.index_of(poi_id)]


@dataclass(frozen=True)
class FoldAssignment:
    """Route-index to fold-id mapping for cross-validation."""

    seed: int
    n_folds: int
    assignment: tuple[int, ...]

    def train_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f != fold]

    def test_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f == fold]


@dataclass
class GroundTruthIndex:
    """All historical routes grouped by their (source, destination) pair."""

    by_pair: dict[tuple[int, int], list[Route]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.by_pair)

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.by_pair)

    def routes_for(self, s: int, d: int) -> list[Route]:
        return self.by_pair.get((s, d), [])


def _parse_int(text: str, what: str, row: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"row {row}: {what} {text!r} is not an integer") from None


def _parse_float(text: str, what: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}: {what} {text!r} is not a number") from None
    if value != value:
        raise ParseError(f"row {row}: {what} is NaN")
    return value


def load_catalog(path: str | Path) -> POICatalog:
    """Read a POI catalog CSV with columns poi_id, lat, lon, category."""
    pois = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != POIS_HEADER:
            raise ParseError(f"{path}: expected header {','.join(POIS_HEADER)}")
        for n, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise ParseError(f"{path} row {n}: expected 4 fields, got {len(row)}")
            poi_id = _parse_int(row[0], "poi_id", n)
            if poi_id < 0:
                raise ParseError(f"{path} row {n}: poi_id must be non-negative")
            lat = _parse_float(row[1], "lat", n)
            lon = _parse_float(row[2], "lon", n)
            if not -90.0 <= lat <= 90.0:
                raise ParseError(f"{path} row {n}: lat {lat} out of range")
            if not -180.0 <= lon <= 180.0:
                raise ParseError(f"{path} row {n}: lon {lon} out of range")
            category = row[3].strip()
            if not category:
                raise ParseError(f"{path} row {n}: empty category")
            pois.append(POI(poi_id, lat, lon, category))
    return POICatalog(pois)


def save_catalog(catalog: POICatalog, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POIS_HEADER)
        for p in catalog:
            writer.writerow([p.poi_id, repr(p.lat), repr(p.lon), p.category])


def load_visits(path: str | Path) -> list[Visit]:
    """Read a visit log CSV with columns user_id, poi_id, ts (Unix seconds)."""
    visits = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != VISITS_HEADER:
            raise ParseError(f"{path}: expected header {','.join(VISITS_HEADER)}")
        for n, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ParseError(f"{path} row {n}: expected 3 fields, got {len(row)}")
            user_id = row[0].strip()
            if not user_id:
                raise ParseError(f"{path} row {n}: empty user_id")
            poi_id = _parse_int(row[1], "poi_id", n)
            ts = _parse_int(row[2], "ts", n)
            visits.append(Visit(user_id, poi_id, ts))
    return visits


def build_routes(
    visits: Sequence[Visit],
    catalog: POICatalog,
    gap_hours: float = 8.0,
) -> list[Route]:
    """Extract routes from a visit log.

    Per user, visits are time-ordered and cut into sessions wherever the gap
    between consecutive check-ins strictly exceeds ``gap_hours``.  Within a
    session only the first occurrence of each POI is kept, and sessions with
    fewer than three distinct POIs are dropped.  Output order follows the
    first appearance of each user in the log, then session start time.
    """
    gap_seconds = gap_hours * 3600.0
    by_user: dict[str, list[Visit]] = {}
    for v in visits:
        if v.poi_id not in catalog:
            raise UnknownPOI(f"visit references poi_id {v.poi_id} not in catalog")
        by_user.setdefault(v.user_id, []).append(v)

    routes = []
    for user_id, user_visits in by_user.items():
        ordered = sorted(user_visits, key=lambda v: v.ts)  # stable for ties
        sessions: list[list[Visit]] = [[ordered[0]]]
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.ts - prev.ts > gap_seconds:
                sessions.append([cur])
            else:
                sessions[-1].append(cur)
        for session in sessions:
            seen: dict[int, None] = {}
            for v in session:
                if v.poi_id not in seen:
                    seen[v.poi_id] = None
            if len(seen) >= 3:
                routes.append(Route(tuple(seen), user_id=user_id))
    return routes


def split_folds(routes: Sequence[Route], n_folds: int = 5, seed: int = 0) -> FoldAssignment:
    """Assign routes to folds by seeded shuffle plus round robin.

    Fold sizes differ by at most one and the assignment is a pure function
    of (len(routes), n_folds, seed).
    """
    if n_folds < 2:
        raise ValueError(f"n_folds must be >= 2, got {n_folds}")
    if len(routes) < n_folds:
        raise TooFewRoutes(f"{len(routes)} routes cannot fill {n_folds} folds")
    order = list(range(len(routes)))
    random.Random(seed).shuffle(order)
    assignment = [0] * len(routes)
    for position, route_index in enumerate(order):
        assignment[route_index] = position % n_folds
    return FoldAssignment(seed=seed, n_folds=n_folds, assignment=tuple(assignment))


def ground_truth_index(routes: Sequence[Route]) -> GroundTruthIndex:
    """Group routes by (source, destination).  Multiplicity is preserved."""
    index = GroundTruthIndex()
    for r in routes:
        index.by_pair.setdefault((r.s, r.d), []).append(r)
    return index


# ------------------------------------------------------------ file formats --

def save_routes(routes: Sequence[Route], path: str | Path) -> None:
    """Write routes as CSV; poi_ids is a space-separated id list."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROUTES_HEADER)
        for i, r in enumerate(routes):
            writer.writerow([i, r.user_id or "", " ".join(map(str, r.poi_ids))])


def load_routes(path: str | Path) -> list[Route]:
    routes = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ROUTES_HEADER:
            raise ParseError(f"{path}: expected header {','.join(ROUTES_HEADER)}")
        for n, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ParseError(f"{path} row {n}: expected 3 fields, got {len(row)}")
            ids = tuple(_parse_int(t, "poi_id", n) for t in row[2].split())
            if len(ids) < 3:
                raise ParseError(f"{path} row {n}: route has fewer than 3 POIs")
            routes.append(Route(ids, user_id=row[1] or None))
    return routes


def save_folds(folds: FoldAssignment, path: str | Path) -> None:
    payload = {
        "seed": folds.seed,
        "n_folds": folds.n_folds,
        "assignment": list(folds.assignment),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_folds(path: str | Path) -> FoldAssignment:
    try:
        with open(path) as fh:
            payload = json.load(fh)
        return FoldAssignment(
            seed=int(payload["seed"]),
            n_folds=int(payload.get("n_folds", max(payload["assignment"]) + 1)),
            assignment=tuple(int(f) for f in payload["assignment"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed fold file ({exc})") from None


def catalog_hash(catalog: POICatalog) -> str:
    """Content hash of a catalog, used to chain downstream artifacts to it."""
    h = hashlib.sha256()
    for p in catalog:
        h.update(f"{p.poi_id},{p.lat!r},{p.lon!r},{p.category}\n".encode("utf-8"))
    return h.hexdigest()


def dataset_counts(
    catalog: POICatalog, routes: Sequence[Route]
) -> dict[str, int]:
    """Summary counts used in manifests: POIs, routes, distinct (s, d) pairs."""
    return {
        "n_pois": len(catalog),
        "n_routes": len(routes),
        "n_pairs": len(ground_truth_index(routes)),
    }
