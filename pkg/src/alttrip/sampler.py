"""Constraint-capable itinerary search by stochastic sequence editing.

Starting from a cheap seed containing the prominent POI, the sampler
repeatedly perturbs the current itinerary (insert / delete / replace /
swap-then-replace at a random interior position), scores each candidate by
forward perplexity, and accepts it when it improves on the current one.
After two consecutive rejections the next constraint-satisfying candidate
is accepted even if worse, which lets the walk escape local minima; the
best accepted itinerary overall is returned.

Constraints (trip budget, must-see POIs, opening-hour windows) are enforced
on every accepted candidate, so the search never walks out of the feasible
region once seeded inside it.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ExhaustedCandidates,
    IllegalMove,
    InfeasibleConstraints,
    InvalidId,
    MissingTableEntry,
)
from .itrnet import (
    ITRNetModel,
    backward_step_probs,
    combined_step_probs,
    forward_step_probs,
    route_perplexity,
)
from .planner import Itinerary

INSERT = "insert"
DELETE = "delete"
REPLACE = "replace"
SWAP_REPLACE = "swap_replace"


@dataclass(frozen=True)
class TimeWindows:
    """Opening-hour simulation inputs; all values in seconds.

    ``travel[a][b]`` is the travel time from a to b.  POIs missing from
    ``open_at``/``close_at``/``stay`` default to always-open, never-closing,
    zero-stay.  Arriving before opening means waiting; arriving after
    closing is a violation.  ``limit`` bounds total elapsed time from
    ``start`` to departure from the final POI.
    """

    travel: Mapping[int, Mapping[int, float]]
    start: float = 0.0
    limit: float | None = None
    open_at: Mapping[int, float] = field(default_factory=dict)
    close_at: Mapping[int, float] = field(default_factory=dict)
    stay: Mapping[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ConstraintSet:
    must_see: frozenset[int] = frozenset()
    budget_limit: float | None = None
    cost: Mapping[int, Mapping[int, float]] | None = None
    time: TimeWindows | None = None

    def __post_init__(self):
        if self.budget_limit is not None and self.cost is None:
            raise ValueError("a budget limit needs a cost table")

    def is_empty(self) -> bool:
        return not self.must_see and self.budget_limit is None and self.time is None


EMPTY = ConstraintSet()


def _lookup(table: Mapping[int, Mapping[int, float]], a: int, b: int) -> float:
    try:
        return float(table[a][b])
    except KeyError:
        raise MissingTableEntry(f"no table entry for POI pair ({a}, {b})") from None


def check_constraints(
    poi_ids: Sequence[int], constraints: ConstraintSet | None
) -> tuple[bool, list[str]]:
    """Evaluate every constraint; returns (all satisfied, violation details)."""
    cs = constraints or EMPTY
    violations: list[str] = []

    missing = sorted(cs.must_see - set(poi_ids))
    if missing:
        violations.append(f"must-see POIs absent: {missing}")

    if cs.budget_limit is not None:
        total = sum(_lookup(cs.cost, a, b) for a, b in zip(poi_ids, poi_ids[1:]))
        if total > cs.budget_limit:
            violations.append(f"trip cost {total:.6g} exceeds limit {cs.budget_limit:.6g}")

    if cs.time is not None:
        tw = cs.time
        clock = tw.start
        for i, poi in enumerate(poi_ids):
            if i > 0:
                clock += _lookup(tw.travel, poi_ids[i - 1], poi)
            arrival = clock
            close = tw.close_at.get(poi, math.inf)
            if arrival > close:
                violations.append(
                    f"POI {poi}: arrival {arrival:.6g} after closing {close:.6g}"
                )
            clock = max(arrival, tw.open_at.get(poi, 0.0)) + tw.stay.get(poi, 0.0)
        elapsed = clock - tw.start
        if tw.limit is not None and elapsed > tw.limit:
            violations.append(f"elapsed time {elapsed:.6g} exceeds limit {tw.limit:.6g}")

    return (not violations, violations)


# ------------------------------------------------------------------- seeding --

def _sample_row(pv: np.ndarray, eligible: list[int], rng: random.Random) -> int:
    """Draw one row from ``eligible`` proportionally to ``pv``; uniform if flat zero."""
    weights = [float(pv[r]) for r in eligible]
    total = sum(weights)
    if total <= 0.0:
        return eligible[rng.randrange(len(eligible))]
    pick = rng.random() * total
    acc = 0.0
    for r, w in zip(eligible, weights):
        acc += w
        if pick <= acc:
            return r
    return eligible[-1]


def _fill_slots(
    model: ITRNetModel, slots: list[int | None], s: int, d: int
) -> list[int]:
    """Complete a fixed-length skeleton greedily with blended-probability argmax.

    Empty interior slots are filled left to right; the backward context at
    each step is the ordered list of already-placed POIs to the right.
    """
    out = list(slots)
    placed = {p for p in out if p is not None}
    length = len(out)
    for idx in range(1, length - 1):
        if out[idx] is not None:
            continue
        prefix = [p for p in out[:idx]]
        future = [p for p in out[idx + 1 :] if p is not None]
        pf = forward_step_probs(model, prefix, s, d, mask=placed)
        pb = backward_step_probs(model, list(reversed(future)), s, d, mask=placed)
        pc = combined_step_probs(pf, pb, idx + 1, length)
        s_row, d_row = model.index_of(s), model.index_of(d)
        eligible = [
            r
            for r in range(model.n)
            if model.id_at(r) not in placed and r not in (s_row, d_row)
        ]
        if not eligible:
            raise ExhaustedCandidates("no unvisited POI left for a fixed slot")
        pick = eligible[int(np.argmax(pc[eligible]))]
        out[idx] = model.id_at(pick)
        placed.add(out[idx])
    return out  # type: ignore[return-value]


def seed_itinerary(
    model: ITRNetModel,
    prominent: int,
    s: int,
    d: int,
    L: int | None = None,
    constraints: ConstraintSet | None = None,
    rng: random.Random | None = None,
    max_restarts: int = 100,
) -> list[int]:
    """Build the starting itinerary for the sampler.

    Unconstrained: (s, prominent, d), or for fixed L the prominent POI at a
    random interior slot with the rest filled greedily.  With constraints,
    must-see POIs are placed first and random restarts search for a feasible
    arrangement; ``InfeasibleConstraints`` after ``max_restarts`` failures.
    """
    rng = rng or random.Random(0)
    cs = constraints or EMPTY
    if L is not None and L > model.n:
        raise ExhaustedCandidates(f"length {L} exceeds catalog size {model.n}")

    if cs.is_empty():
        if L is None:
            return [s, prominent, d]
        slots: list[int | None] = [None] * L
        slots[0], slots[-1] = s, d
        slots[rng.randrange(1, L - 1)] = prominent
        return _fill_slots(model, slots, s, d)

    for poi in cs.must_see:
        model.index_of(poi)
    if cs.must_see & {s, d}:
        raise ValueError("must_see may not include the query endpoints")
    needed = [prominent] + sorted(cs.must_see - {prominent})

    if L is not None:
        if len(needed) > L - 2:
            raise InfeasibleConstraints(
                f"{len(needed)} required POIs cannot fit {L - 2} interior slots"
            )
        for _ in range(max_restarts):
            order = needed[:]
            rng.shuffle(order)
            slots = [None] * L
            slots[0], slots[-1] = s, d
            for idx, poi in zip(rng.sample(range(1, L - 1), len(order)), order):
                slots[idx] = poi
            candidate = _fill_slots(model, slots, s, d)
            if check_constraints(candidate, cs)[0]:
                return candidate
        raise InfeasibleConstraints(f"no feasible seed within {max_restarts} attempts")

    pool_all = [p for p in model.ids if p not in set(needed) | {s, d}]
    for attempt in range(max_restarts):
        interior = needed[:]
        rng.shuffle(interior)
        # widen the search with a few extra random POIs on later attempts
        pool = pool_all[:]
        for _ in range(attempt % 3):
            if not pool:
                break
            poi = pool.pop(rng.randrange(len(pool)))
            interior.insert(rng.randrange(len(interior) + 1), poi)
        candidate = [s] + interior + [d]
        if check_constraints(candidate, cs)[0]:
            return candidate
    raise InfeasibleConstraints(f"no feasible seed within {max_restarts} attempts")


# --------------------------------------------------------------------- moves --

def choose_move(
    rng: random.Random, protected_at_t: bool, fixed_length: bool
) -> str | None:
    """Pick a move type for this iteration; None means deliberately do nothing.

    With a fixed length only replace and swap-replace are available (each
    probability 0.5); on a protected POI the swap-replace happens with
    probability 0.5, otherwise the iteration is a no-op.  Without a length
    cap all applicable moves are equally likely.
    """
    if fixed_length:
        if protected_at_t:
            return SWAP_REPLACE if rng.random() < 0.5 else None
        return REPLACE if rng.random() < 0.5 else SWAP_REPLACE
    if protected_at_t:
        return rng.choice([INSERT, SWAP_REPLACE])
    return rng.choice([INSERT, DELETE, REPLACE, SWAP_REPLACE])


def _resample_at(
    model: ITRNetModel, seq: list[int], t: int, rng: random.Random
) -> list[int]:
    """Redraw the POI at 1-based position t from the blended distribution."""
    s, d = seq[0], seq[-1]
    r_t = seq[t - 1]
    mask = set(seq) - {r_t}
    pf = forward_step_probs(model, seq[: t - 1], s, d, mask=mask)
    pb = backward_step_probs(model, list(reversed(seq[t:])), s, d, mask=mask)
    pc = combined_step_probs(pf, pb, t, len(seq))
    s_row, d_row = model.index_of(s), model.index_of(d)
    banned = {model.index_of(p) for p in mask} | {s_row, d_row}
    eligible = [r for r in range(model.n) if r not in banned]
    if not eligible:
        raise ExhaustedCandidates("no POI available for replacement")
    new = model.id_at(_sample_row(pc, eligible, rng))
    out = seq[:]
    out[t - 1] = new
    return out


def apply_move(
    model: ITRNetModel,
    current: Sequence[int],
    move: str,
    t: int,
    rng: random.Random,
    protected: frozenset[int] = frozenset(),
    fixed_length: bool = False,
) -> list[int]:
    """Produce the candidate itinerary for one move at interior position t.

    Position t is 1-based and must satisfy 2 <= t <= len(current) - 1.
    Deleting or replacing a protected POI is illegal, as are length-changing
    moves in fixed-length mode.  Inserted/replacement POIs are drawn from
    the blended step distribution restricted to POIs not already present
    (except that a replacement may redraw the same POI).
    """
    cur = list(current)
    n_cur = len(cur)
    if not 2 <= t <= n_cur - 1:
        raise IllegalMove(f"position {t} not interior to a length-{n_cur} itinerary")
    s, d = cur[0], cur[-1]
    r_t = cur[t - 1]

    if move == INSERT:
        if fixed_length:
            raise IllegalMove("insert is disabled in fixed-length mode")
        pf = forward_step_probs(model, cur[:t], s, d, mask=set(cur))
        pb = backward_step_probs(model, list(reversed(cur[t:])), s, d, mask=set(cur))
        pc = combined_step_probs(pf, pb, t + 1, n_cur + 1)
        present = {model.index_of(p) for p in cur}
        eligible = [r for r in range(model.n) if r not in present]
        if not eligible:
            raise ExhaustedCandidates("every catalog POI is already in the itinerary")
        new = model.id_at(_sample_row(pc, eligible, rng))
        return cur[:t] + [new] + cur[t:]

    if move == DELETE:
        if fixed_length:
            raise IllegalMove("delete is disabled in fixed-length mode")
        if r_t in protected:
            raise IllegalMove(f"POI {r_t} is protected from deletion")
        return cur[: t - 1] + cur[t:]

    if move == REPLACE:
        if r_t in protected:
            raise IllegalMove(f"POI {r_t} is protected from replacement")
        return _resample_at(model, cur, t, rng)

    if move == SWAP_REPLACE:
        t_rand = rng.randrange(2, n_cur)
        out = cur[:]
        out[t - 1], out[t_rand - 1] = out[t_rand - 1], out[t - 1]
        if out[t - 1] not in protected:
            out = _resample_at(model, out, t, rng)
        return out

    raise IllegalMove(f"unknown move {move!r}")


# -------------------------------------------------------------------- search --

@dataclass(frozen=True)
class SamplerConfig:
    iterations: int | None = None  # None derives 5 * (len(seed) - 2)
    seed: int | None = None
    max_restarts: int = 100


@dataclass(frozen=True)
class MoveOutcome:
    """One iteration of the search, for diagnostics and tests."""

    iteration: int
    move: str | None
    position: int | None
    accepted: bool
    constraints_ok: bool
    perplexity: float
    stall_before: int
    candidate: tuple[int, ...] | None


def sample_itinerary(
    model: ITRNetModel,
    prominent: int,
    s: int,
    d: int,
    L: int | None = None,
    constraints: ConstraintSet | None = None,
    config: SamplerConfig = SamplerConfig(),
    return_trace: bool = False,
):
    """Search for a low-perplexity itinerary through the prominent POI.

    The seed itinerary counts as accepted at iteration zero.  A candidate is
    accepted when it satisfies the constraints and either lowers the current
    perplexity or follows at least two consecutive rejections (the stall
    escape).  Returns the best accepted itinerary; with ``return_trace`` the
    full per-iteration log is returned alongside it.
    """
    for poi in (prominent, s, d):
        model.index_of(poi)
    if s == d or prominent in (s, d):
        raise ValueError("prominent, s, and d must be three distinct POIs")
    if L is not None and L < 3:
        raise ValueError(f"itinerary length must be >= 3, got {L}")
    cs = constraints or EMPTY
    rng = random.Random(config.seed)
    fixed = L is not None

    current = seed_itinerary(
        model, prominent, s, d, L=L, constraints=cs, rng=rng,
        max_restarts=config.max_restarts,
    )
    protected = frozenset({prominent} | cs.must_see)
    cur_perp = route_perplexity(model, current)
    best, best_perp = list(current), cur_perp
    iterations = config.iterations
    if iterations is None:
        iterations = 5 * max(1, len(current) - 2)

    trace = [
        MoveOutcome(0, "seed", None, True, True, cur_perp, 0, tuple(current))
    ]
    stall = 0
    for j in range(1, iterations + 1):
        t = rng.randrange(2, len(current))
        move = choose_move(rng, current[t - 1] in protected, fixed)
        if move is None:
            trace.append(MoveOutcome(j, None, t, False, True, cur_perp, stall, None))
            stall += 1
            continue
        try:
            cand = apply_move(model, current, move, t, rng, protected, fixed)
        except ExhaustedCandidates:
            trace.append(MoveOutcome(j, move, t, False, True, cur_perp, stall, None))
            stall += 1
            continue
        ok, _ = check_constraints(cand, cs)
        perp = route_perplexity(model, cand)
        accept = ok and (perp < cur_perp or stall >= 2)
        trace.append(MoveOutcome(j, move, t, accept, ok, perp, stall, tuple(cand)))
        if accept:
            current, cur_perp = cand, perp
            stall = 0
            if perp < best_perp:
                best, best_perp = list(cand), perp
        else:
            stall += 1

    itin = Itinerary(tuple(best), prominent, best_perp, "sampler")
    return (itin, trace) if return_trace else itin
