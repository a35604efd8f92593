"""Query planning: prominence selection and anchored itinerary generation.

A query (s, d, k) asks for k itineraries from s to d.  Each itinerary is
anchored on a prominent POI chosen to be relevant to the endpoints and not
yet overused by earlier answers to the same query; generation then grows
both itinerary halves outward from that anchor with greedy decoding.

Two construction orders are tried (backward half first, then forward given
that half, and vice versa); the candidate with lower perplexity wins.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ExhaustedCandidates, ConstraintUnsupported, NoEligiblePOI
from .itrnet import (
    BACKWARD,
    FORWARD,
    ITRNetModel,
    backward_step_probs,
    forward_step_probs,
    route_perplexity,
)


@dataclass(frozen=True)
class Query:
    """An itinerary request: from s to d, k alternatives, optional length."""

    s: int
    d: int
    k: int = 3
    L: int | None = None

    def __post_init__(self):
        if self.s == self.d:
            raise ValueError("source and destination must differ")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.L is not None and self.L < 3:
            raise ValueError(f"itinerary length must be >= 3, got {self.L}")


@dataclass(frozen=True)
class Itinerary:
    poi_ids: tuple[int, ...]
    prominent: int
    perplexity: float
    method: str

    def __len__(self) -> int:
        return len(self.poi_ids)


@dataclass
class RecommendationSet:
    query: Query
    itineraries: list[Itinerary]
    method: str
    seed: int | None = None


def relevancy_scores(model: ITRNetModel, s: int, d: int) -> np.ndarray:
    """How plausible each POI is as the lone stop between s and d.

    Scores average the forward and backward step distributions on the
    three-slot template (s, x, d); s and d themselves are masked to zero.
    Aligned with ``model.ids``.
    """
    pf = forward_step_probs(model, [s], s, d, mask=(s, d))
    pb = backward_step_probs(model, [d], s, d, mask=(s, d))
    return 0.5 * (pf + pb)


def pick_prominent(
    model: ITRNetModel, scores: np.ndarray, occurrence: np.ndarray, s: int, d: int
) -> int:
    """Most relevant POI among those recommended the fewest times so far.

    Restricting to the least-occurring POIs first forces distinct anchors
    across the k itineraries of one query while unused POIs remain.  Ties
    break toward the lowest POI id.
    """
    s_row, d_row = model.index_of(s), model.index_of(d)
    eligible = [r for r in range(model.n) if r not in (s_row, d_row)]
    if not eligible:
        raise NoEligiblePOI("catalog holds only the two endpoints")
    if not np.isfinite(scores[eligible]).all():
        raise ValueError("relevancy scores must be finite")
    min_occ = min(occurrence[r] for r in eligible)
    pool = [r for r in eligible if occurrence[r] == min_occ]
    best = pool[int(np.argmax(scores[pool]))]
    return model.id_at(best)


def generate_half(
    model: ITRNetModel,
    s: int,
    d: int,
    direction: str,
    l_max: int,
    context: Sequence[int],
    mask: Sequence[int] = (),
    forced_len: int | None = None,
    slot_hi: int | None = None,
) -> tuple[list[int], int]:
    """Grow one itinerary half outward from an anchored partial sequence.

    Slots are numbered 1..2*l_max with the anchor fixed at slot l_max.
    For the backward direction ``context`` starts at slot l_max and the half
    grows leftward, returning (fragment, slot of s) where the fragment runs
    from s through the context.  For the forward direction ``context`` ends
    at slot l_max and the half grows rightward, returning (fragment, slot of
    d).  Interior slots are filled greedily with the highest-probability
    unused POI; the endpoint lands on its highest-probability slot unless
    ``forced_len`` pins how many POIs (endpoint included) to add.

    The endpoint's per-slot probability is read from the same distribution
    that scores the fillers, before the slot's filler is committed, so the
    kept fragment is exactly the sequence the model saw while scoring it.
    """
    if l_max < 2:
        raise ValueError(f"l_max must be >= 2, got {l_max}")
    if not context:
        raise ValueError("context must contain at least the anchor")
    s_row, d_row = model.index_of(s), model.index_of(d)
    visited = {model.index_of(p) for p in context} | {model.index_of(p) for p in mask}
    seq = list(context)
    fillers: dict[int, int] = {}

    def eligible_rows() -> list[int]:
        return [
            r for r in range(model.n) if r not in visited and r not in (s_row, d_row)
        ]

    def pick_filler(pv: np.ndarray) -> int | None:
        rows = eligible_rows()
        if not rows:
            return None
        return rows[int(np.argmax(pv[rows]))]

    if direction == BACKWARD:
        endpoint_row = s_row
        if forced_len is not None:
            if forced_len < 1 or forced_len > l_max - 1:
                raise ExhaustedCandidates(
                    f"cannot fit {forced_len} POIs before slot {l_max}"
                )
            slots = range(l_max - 1, l_max - forced_len, -1)
        else:
            slots = range(l_max - 1, 0, -1)
    else:
        endpoint_row = d_row
        hi = slot_hi if slot_hi is not None else 2 * l_max
        if forced_len is not None:
            if forced_len < 1 or forced_len > l_max:
                raise ExhaustedCandidates(
                    f"cannot fit {forced_len} POIs after slot {l_max}"
                )
            slots = range(l_max + 1, l_max + forced_len)
        else:
            if hi <= l_max:
                raise ValueError(f"slot_hi {hi} leaves no room after slot {l_max}")
            slots = range(l_max + 1, hi + 1)

    endpoint_score: dict[int, float] = {}
    slots = list(slots)
    for i, slot in enumerate(slots):
        if direction == BACKWARD:
            pv = backward_step_probs(
                model, list(reversed(seq)), s, d, mask=[model.id_at(r) for r in visited]
            )
        else:
            pv = forward_step_probs(
                model, seq, s, d, mask=[model.id_at(r) for r in visited]
            )
        if forced_len is None:
            endpoint_score[slot] = float(pv[endpoint_row])
            if i == len(slots) - 1:
                break  # last scanned slot needs no filler
        filler = pick_filler(pv)
        if filler is None:
            if forced_len is not None:
                raise ExhaustedCandidates("no unvisited POI left for a forced slot")
            break  # scores up to this slot still let the endpoint land
        fillers[slot] = model.id_at(filler)
        visited.add(filler)
        if direction == BACKWARD:
            seq.insert(0, model.id_at(filler))
        else:
            seq.append(model.id_at(filler))

    if direction == BACKWARD:
        if forced_len is not None:
            t_s = l_max - forced_len
        else:
            t_s = max(sorted(endpoint_score), key=lambda t: endpoint_score[t])
        fragment = [s] + [fillers[x] for x in range(t_s + 1, l_max)] + list(context)
        return fragment, t_s
    else:
        if forced_len is not None:
            t_d = l_max + forced_len
        else:
            t_d = max(sorted(endpoint_score), key=lambda t: endpoint_score[t])
        fragment = list(context) + [fillers[x] for x in range(l_max + 1, t_d)] + [d]
        return fragment, t_d


def generate_itinerary_lstm(
    model: ITRNetModel, prominent: int, s: int, d: int, L: int | None = None
) -> Itinerary:
    """Greedy bidirectional decoding anchored on the prominent POI.

    Both construction orders are evaluated: backward half first (source
    placement free, destination side sized to fit), and forward half first
    (destination placement free).  With a fixed length L the anchor sits at
    slot L-1 and the second half is sized so the total comes out to exactly
    L POIs.  The lower-perplexity candidate is returned; ties keep the
    backward-first construction.
    """
    for poi in (prominent, s, d):
        model.index_of(poi)
    if s == d or prominent in (s, d):
        raise ValueError("prominent, s, and d must be three distinct POIs")
    if L is not None:
        if L < 3:
            raise ValueError(f"itinerary length must be >= 3, got {L}")
        if L > model.n:
            raise ExhaustedCandidates(f"length {L} exceeds catalog size {model.n}")
        l_max = L - 1
    else:
        l_max = max(model.l_max, 2)

    half1, _ = generate_half(model, s, d, BACKWARD, l_max, context=[prominent])
    full1, _ = generate_half(
        model, s, d, FORWARD, l_max, context=half1,
        forced_len=(L - len(half1)) if L is not None else None,
    )

    half2, _ = generate_half(
        model, s, d, FORWARD, l_max, context=[prominent],
        slot_hi=(2 * l_max - 1) if L is not None else 2 * l_max,
    )
    full2, _ = generate_half(
        model, s, d, BACKWARD, l_max, context=half2,
        forced_len=(L - len(half2)) if L is not None else None,
    )

    perp1 = route_perplexity(model, full1)
    perp2 = route_perplexity(model, full2)
    if perp1 <= perp2:
        return Itinerary(tuple(full1), prominent, perp1, "lstm")
    return Itinerary(tuple(full2), prominent, perp2, "lstm")


def recommend_topk(
    model: ITRNetModel,
    query: Query,
    method: str = "lstm",
    constraints=None,
    seed: int | None = None,
    sampler_config=None,
) -> RecommendationSet:
    """Answer a query with k itineraries anchored on rotating prominent POIs.

    Occurrence counts start at zero and every POI of every returned
    itinerary increments its count, so later picks avoid POIs already
    shown.  The greedy decoder cannot honor constraints; pass
    ``method="sampler"`` for constrained queries.
    """
    from .sampler import SamplerConfig, sample_itinerary  # deferred, sampler imports us

    if method not in ("lstm", "sampler"):
        raise ValueError(f"unknown method {method!r}")
    has_constraints = constraints is not None and not constraints.is_empty()
    if method == "lstm" and has_constraints:
        raise ConstraintUnsupported("greedy decoding cannot honor constraints")

    rel = relevancy_scores(model, query.s, query.d)
    occurrence = np.zeros(model.n, dtype=np.int64)
    master_seed = seed
    if master_seed is None and sampler_config is not None and sampler_config.seed is not None:
        master_seed = sampler_config.seed
    rng = random.Random(master_seed)

    itineraries: list[Itinerary] = []
    for _ in range(query.k):
        prominent = pick_prominent(model, rel, occurrence, query.s, query.d)
        if method == "lstm":
            itin = generate_itinerary_lstm(model, prominent, query.s, query.d, L=query.L)
        else:
            config = replace(
                sampler_config or SamplerConfig(), seed=rng.getrandbits(32)
            )
            itin = sample_itinerary(
                model, prominent, query.s, query.d, L=query.L,
                constraints=constraints, config=config,
            )
        itineraries.append(itin)
        for poi in itin.poi_ids:
            occurrence[model.index_of(poi)] += 1
    return RecommendationSet(query=query, itineraries=itineraries, method=method, seed=master_seed)
