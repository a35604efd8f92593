"""Recommendation quality metrics and the cross-validation harness.

Popularity is agreement with how people actually toured: the mean F1 (on
POI sets) or ordered-pair F1 between every recommended itinerary and every
historical route with the same endpoints.  Diversity is one minus the mean
pairwise interior overlap across the k recommended itineraries.  A combined
score trades the two off through a weight alpha.
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
import warnings
import zlib
from dataclasses import dataclass, field, replace, asdict
from pathlib import Path
from typing import Callable, Sequence

from .dataset import FoldAssignment, POICatalog, Route, ground_truth_index
from .errors import AltTripError, EmptyGroundTruth, SingletonSet
from .itrnet import ITRConfig, train_itrnet
from .planner import Itinerary, Query, recommend_topk
from .poigraph import EmbeddingTable


class AlphaOutOfRangeWarning(UserWarning):
    """alpha outside [0, 1] still computes, but is almost surely a mistake."""


def f1_score(
    a: Sequence[int], b: Sequence[int], include_endpoints: bool = True
) -> float:
    """Set-overlap F1 between two POI sequences.

    With ``include_endpoints=False`` both sequences are stripped to their
    interiors first; two empty interiors count as identical (1.0) and an
    empty interior against a non-empty one scores 0.0.
    """
    sa = set(a if include_endpoints else a[1:-1])
    sb = set(b if include_endpoints else b[1:-1])
    if not sa and not sb:
        return 1.0
    if not sa or not sb:
        return 0.0
    inter = len(sa & sb)
    precision = inter / len(sa)
    recall = inter / len(sb)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ordered_pairs(seq: Sequence[int]) -> set[tuple[int, int]]:
    return {(seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq))}


def pairs_f1_score(a: Sequence[int], b: Sequence[int]) -> float:
    """F1 over ordered visit pairs (u before v, adjacency not required)."""
    pa = _ordered_pairs(a)
    pb = _ordered_pairs(b)
    if not pa and not pb:
        return 1.0
    if not pa or not pb:
        return 0.0
    inter = len(pa & pb)
    precision = inter / len(pa)
    recall = inter / len(pb)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def popularity_score(
    recommended: Sequence[Itinerary],
    ground_truth: Sequence[Route],
    scorer: Callable[[Sequence[int], Sequence[int]], float] = f1_score,
) -> float:
    """Mean pairwise score between every recommendation and every true route."""
    if not recommended:
        raise ValueError("no recommended itineraries to score")
    if not ground_truth:
        raise EmptyGroundTruth("no historical routes for this query")
    total = 0.0
    for itin in recommended:
        for route in ground_truth:
            total += scorer(itin.poi_ids, route.poi_ids)
    return total / (len(recommended) * len(ground_truth))


def diversity_score(itineraries: Sequence[Itinerary]) -> float:
    """Mean pairwise interior dissimilarity across a recommendation set.

    1 means no two itineraries share an interior POI; 0 means all interiors
    coincide.  Undefined for fewer than two itineraries.
    """
    k = len(itineraries)
    if k < 2:
        raise SingletonSet("diversity needs at least two itineraries")
    total = 0.0
    for i in range(k):
        for j in range(k):
            if i != j:
                total += 1.0 - f1_score(
                    itineraries[i].poi_ids, itineraries[j].poi_ids,
                    include_endpoints=False,
                )
    return total / (k * (k - 1))


def combined_score(popularity: float, diversity: float, alpha: float) -> float:
    """alpha-weighted blend of popularity and diversity."""
    if not 0.0 <= alpha <= 1.0:
        warnings.warn(
            f"alpha {alpha} outside [0, 1]", AlphaOutOfRangeWarning, stacklevel=2
        )
    return alpha * popularity + (1.0 - alpha) * diversity


# ------------------------------------------------------------------ harness --

@dataclass
class QueryResult:
    fold: int
    s: int
    d: int
    k: int
    L: int | None
    method: str
    n_ground_truth: int
    seed: int
    f1: float | None = None
    pairs_f1: float | None = None
    diversity: float | None = None
    combined: dict[str, float] = field(default_factory=dict)
    seconds: float = 0.0
    error: str | None = None


@dataclass
class EvaluationReport:
    config: dict
    rows: list[QueryResult]
    fold_means: dict[int, dict[str, float]]
    overall: dict[str, float]

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.config, sort_keys=True).encode("utf-8")
        ).hexdigest()

    def write_csv(self, path: str | Path) -> None:
        alphas = self.config.get("alphas", [])
        columns = [
            "fold", "s", "d", "k", "L", "method", "n_ground_truth", "seed",
            "f1", "pairs_f1", "diversity",
            *[f"combined@{a:g}" for a in alphas],
            "seconds", "error",
        ]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for r in self.rows:
                writer.writerow([
                    r.fold, r.s, r.d, r.k,
                    "" if r.L is None else r.L,
                    r.method, r.n_ground_truth, r.seed,
                    _cell(r.f1), _cell(r.pairs_f1), _cell(r.diversity),
                    *[_cell(r.combined.get(f"{a:g}")) for a in alphas],
                    f"{r.seconds:.6f}", r.error or "",
                ])

    def write_json(self, path: str | Path) -> None:
        payload = {
            "config": self.config,
            "config_hash": self.config_hash,
            "overall": self.overall,
            "fold_means": {str(k): v for k, v in self.fold_means.items()},
            "rows": [asdict(r) for r in self.rows],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")


def _cell(value: float | None) -> str:
    return "--" if value is None else f"{value:.6f}"


def _query_seed(master: int, fold: int, s: int, d: int) -> int:
    return zlib.crc32(f"{master}:{fold}:{s}:{d}".encode("utf-8"))


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def evaluate_folds(
    catalog: POICatalog,
    routes: Sequence[Route],
    folds: FoldAssignment,
    embeddings: EmbeddingTable,
    *,
    k: int = 3,
    L: int | None = 5,
    method: str = "lstm",
    alphas: Sequence[float] = (0.5,),
    itr_config: ITRConfig = ITRConfig(),
    sampler_config=None,
    seed: int = 0,
    max_queries_per_fold: int | None = None,
    progress: Callable[[str], None] | None = None,
) -> EvaluationReport:
    """Train per fold, answer every test-fold query, and score the answers.

    A query is each distinct (s, d) pair among a fold's test routes; its
    ground truth is every route in the whole dataset with those endpoints.
    Per-query failures are recorded in their row rather than aborting the
    run.  Deterministic for fixed inputs and seed.
    """
    say = progress or (lambda _msg: None)
    gt_index = ground_truth_index(routes)
    rows: list[QueryResult] = []

    for fold in range(folds.n_folds):
        train = [routes[i] for i in folds.train_indices(fold)]
        say(f"fold {fold}: training on {len(train)} routes")
        model = train_itrnet(
            train, embeddings, catalog, replace(itr_config, seed=itr_config.seed + fold)
        )
        test = [routes[i] for i in folds.test_indices(fold)]
        queries = sorted({(r.s, r.d) for r in test})
        if max_queries_per_fold is not None:
            queries = queries[:max_queries_per_fold]
        say(f"fold {fold}: {len(queries)} queries")
        for s, d in queries:
            truth = gt_index.routes_for(s, d)
            qseed = _query_seed(seed, fold, s, d)
            row = QueryResult(
                fold=fold, s=s, d=d, k=k, L=L, method=method,
                n_ground_truth=len(truth), seed=qseed,
            )
            t0 = time.perf_counter()
            try:
                recset = recommend_topk(
                    model, Query(s, d, k, L), method=method,
                    seed=qseed, sampler_config=sampler_config,
                )
                row.f1 = popularity_score(recset.itineraries, truth)
                row.pairs_f1 = popularity_score(
                    recset.itineraries, truth, scorer=pairs_f1_score
                )
                if k >= 2:
                    row.diversity = diversity_score(recset.itineraries)
                    row.combined = {
                        f"{a:g}": combined_score(row.f1, row.diversity, a)
                        for a in alphas
                    }
            except AltTripError as exc:
                row.error = f"{type(exc).__name__}: {exc}"
            row.seconds = time.perf_counter() - t0
            rows.append(row)

    fold_means = {
        fold: _summarize([r for r in rows if r.fold == fold], alphas)
        for fold in range(folds.n_folds)
    }
    overall = _summarize(rows, alphas)
    config = {
        "k": k,
        "L": L,
        "method": method,
        "alphas": [float(a) for a in alphas],
        "seed": seed,
        "n_folds": folds.n_folds,
        "fold_seed": folds.seed,
        "n_routes": len(routes),
        "n_pois": len(catalog),
        "itr_config": asdict(itr_config),
    }
    return EvaluationReport(config=config, rows=rows, fold_means=fold_means, overall=overall)


def _summarize(rows: list[QueryResult], alphas: Sequence[float]) -> dict[str, float]:
    good = [r for r in rows if r.error is None]
    out = {
        "n_queries": len(rows),
        "n_failed": len(rows) - len(good),
        "f1": _mean([r.f1 for r in good if r.f1 is not None]),
        "pairs_f1": _mean([r.pairs_f1 for r in good if r.pairs_f1 is not None]),
        "diversity": _mean([r.diversity for r in good if r.diversity is not None]),
        "seconds": _mean([r.seconds for r in good]),
    }
    for a in alphas:
        key = f"{a:g}"
        out[f"combined@{key}"] = _mean(
            [r.combined[key] for r in good if key in r.combined]
        )
    return out
