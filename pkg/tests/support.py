"""Shared test helpers: tiny catalogs and independent brute-force oracles.

Every oracle here is written from the definitions, in a deliberately
different style from the library code, so agreement is evidence rather
than tautology.
"""
from __future__ import annotations

import math
from itertools import combinations

from alttrip.dataset import POI, POICatalog, Visit


def grid_catalog(n: int, categories: tuple[str, ...] = ("a", "b", "c")) -> POICatalog:
    """n POIs laid out deterministically on a small ring near (40.75, -73.98)."""
    pois = []
    for i in range(n):
        angle = 2 * math.pi * i / n
        # irregular radius so no two pairwise distances coincide
        r = 0.006 + 0.0021 * i
        pois.append(
            POI(i, 40.75 + r * math.sin(angle), -73.98 + r * math.cos(angle),
                categories[i % len(categories)])
        )
    return POICatalog(pois)


# -------------------------------------------------------------- metric oracles

def oracle_f1(a, b, include_endpoints=True) -> float:
    if not include_endpoints:
        a, b = list(a)[1:-1], list(b)[1:-1]
    sa, sb = set(a), set(b)
    if len(sa) == 0 and len(sb) == 0:
        return 1.0
    if len(sa) == 0 or len(sb) == 0:
        return 0.0
    tp = len(sa & sb)
    if tp == 0:
        return 0.0
    p = tp / len(sa)
    r = tp / len(sb)
    return 2 * p * r / (p + r)


def oracle_pairs_f1(a, b) -> float:
    pa = set(combinations(a, 2))
    pb = set(combinations(b, 2))
    if len(pa) == 0 and len(pb) == 0:
        return 1.0
    if len(pa) == 0 or len(pb) == 0:
        return 0.0
    tp = len(pa & pb)
    if tp == 0:
        return 0.0
    p = tp / len(pa)
    r = tp / len(pb)
    return 2 * p * r / (p + r)


def oracle_popularity(rec_seqs, gt_seqs, pair_fn=oracle_f1) -> float:
    scores = [pair_fn(r, g) for r in rec_seqs for g in gt_seqs]
    return sum(scores) / len(scores)


def oracle_diversity(seqs) -> float:
    k = len(seqs)
    acc = 0.0
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            acc += 1.0 - oracle_f1(seqs[i], seqs[j], include_endpoints=False)
    return acc / (k * (k - 1))


def oracle_combined(pop, div, alpha) -> float:
    return alpha * pop + (1 - alpha) * div


# ------------------------------------------------------------- trace replay

def replay_sampler_trace(trace):
    """Re-derive every acceptance decision in a sampler trace.

    Returns (problems, best_series, escapes): rule violations found, the
    running best-accepted perplexity after each accepted step, and the
    accepted moves that went through on the stall escape rather than on an
    improvement.
    """
    problems = []
    cur = trace[0].perplexity
    stall = 0
    best = cur
    best_series = [best]
    escapes = []
    for e in trace[1:]:
        if e.stall_before != stall:
            problems.append(f"iter {e.iteration}: stall {e.stall_before} != {stall}")
        if e.candidate is None:
            if e.accepted:
                problems.append(f"iter {e.iteration}: accepted without a candidate")
            stall += 1
            continue
        should = e.constraints_ok and (e.perplexity < cur or stall >= 2)
        if e.accepted != should:
            problems.append(
                f"iter {e.iteration}: accepted={e.accepted}, rule says {should}"
            )
        if e.accepted:
            if not e.perplexity < cur:
                escapes.append(e)
            cur = e.perplexity
            stall = 0
            best = min(best, e.perplexity)
            best_series.append(best)
        else:
            stall += 1
    return problems, best_series, escapes


# --------------------------------------------------------- extraction oracle

def oracle_sessions(visits: list[Visit], gap_hours: float) -> list[tuple[int, ...]]:
    """Reference route extraction: split, dedupe, filter, in user order."""
    users: list[str] = []
    for v in visits:
        if v.user_id not in users:
            users.append(v.user_id)
    out = []
    for user in users:
        mine = sorted([v for v in visits if v.user_id == user], key=lambda v: v.ts)
        groups: list[list[Visit]] = []
        for v in mine:
            if groups and v.ts - groups[-1][-1].ts <= gap_hours * 3600.0:
                groups[-1].append(v)
            else:
                groups.append([v])
        for g in groups:
            deduped = []
            for v in g:
                if v.poi_id not in deduped:
                    deduped.append(v.poi_id)
            if len(deduped) >= 3:
                out.append(tuple(deduped))
    return out
