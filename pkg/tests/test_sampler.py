"""Constraint checking, seeding, edit moves, and the acceptance rule."""
import math
import random

import pytest

from alttrip.errors import (
    ExhaustedCandidates,
    IllegalMove,
    InfeasibleConstraints,
    InvalidId,
    MissingTableEntry,
)
from alttrip.sampler import (
    DELETE,
    INSERT,
    REPLACE,
    SWAP_REPLACE,
    ConstraintSet,
    SamplerConfig,
    TimeWindows,
    apply_move,
    check_constraints,
    choose_move,
    sample_itinerary,
    seed_itinerary,
)
from support import replay_sampler_trace


def _chain_table(pairs):
    table: dict[int, dict[int, float]] = {}
    for a, b, v in pairs:
        table.setdefault(a, {})[b] = v
    return table


# -------------------------------------------------------------- constraints --

def test_budget_is_strict():
    cs = ConstraintSet(
        budget_limit=5.5, cost=_chain_table([(0, 1, 2.5), (1, 2, 3.0)])
    )
    assert check_constraints([0, 1, 2], cs) == (True, [])
    tight = ConstraintSet(
        budget_limit=5.4, cost=_chain_table([(0, 1, 2.5), (1, 2, 3.0)])
    )
    ok, violations = check_constraints([0, 1, 2], tight)
    assert not ok and "5.4" in violations[0]


def test_budget_requires_cost_table():
    with pytest.raises(ValueError):
        ConstraintSet(budget_limit=1.0)


def test_missing_cost_entry():
    cs = ConstraintSet(budget_limit=9.0, cost=_chain_table([(0, 1, 1.0)]))
    with pytest.raises(MissingTableEntry):
        check_constraints([0, 1, 2], cs)


def test_must_see():
    cs = ConstraintSet(must_see=frozenset({7, 2}))
    assert check_constraints([0, 2, 7, 9], cs)[0]
    ok, violations = check_constraints([0, 2, 9], cs)
    assert not ok and "7" in violations[0]


def test_time_simulation_waits_at_opening():
    tw = TimeWindows(
        travel=_chain_table([(0, 1, 600.0), (1, 2, 300.0)]),
        open_at={1: 1000.0},
        stay={1: 200.0},
        limit=1500.0,
    )
    # arrive at 1 at t=600, wait until 1000, stay 200, reach 2 at 1500 sharp
    assert check_constraints([0, 1, 2], ConstraintSet(time=tw))[0]
    shorter = TimeWindows(
        travel=tw.travel, open_at=tw.open_at, stay=tw.stay, limit=1499.0
    )
    ok, violations = check_constraints([0, 1, 2], ConstraintSet(time=shorter))
    assert not ok and "elapsed" in violations[0]


def test_time_closing_violation():
    tw = TimeWindows(
        travel=_chain_table([(0, 1, 600.0), (1, 2, 300.0)]),
        open_at={1: 1000.0},
        stay={1: 200.0},
        close_at={2: 1400.0},
    )
    ok, violations = check_constraints([0, 1, 2], ConstraintSet(time=tw))
    assert not ok
    assert "closing" in violations[0]


def test_violations_are_collected():
    cs = ConstraintSet(
        must_see=frozenset({5}),
        budget_limit=0.5,
        cost=_chain_table([(0, 1, 1.0), (1, 2, 1.0)]),
        time=TimeWindows(
            travel=_chain_table([(0, 1, 10.0), (1, 2, 10.0)]), limit=5.0
        ),
    )
    ok, violations = check_constraints([0, 1, 2], cs)
    assert not ok and len(violations) == 3


def test_empty_constraints_pass():
    assert check_constraints([0, 1, 2], None) == (True, [])
    assert ConstraintSet().is_empty()
    assert not ConstraintSet(must_see=frozenset({1})).is_empty()


# ------------------------------------------------------------------ seeding --

def test_seed_unconstrained(midtown_model):
    assert seed_itinerary(midtown_model, 5, 0, 9) == [0, 5, 9]


def test_seed_fixed_length(midtown_model):
    rng = random.Random(3)
    seq = seed_itinerary(midtown_model, 5, 0, 9, L=6, rng=rng)
    assert len(seq) == 6
    assert seq[0] == 0 and seq[-1] == 9
    assert 5 in seq[1:-1]
    assert len(set(seq)) == 6


def test_seed_rejects_endpoint_must_see(midtown_model):
    with pytest.raises(ValueError):
        seed_itinerary(
            midtown_model, 5, 0, 9,
            constraints=ConstraintSet(must_see=frozenset({0})),
        )
    with pytest.raises(InvalidId):
        seed_itinerary(
            midtown_model, 5, 0, 9,
            constraints=ConstraintSet(must_see=frozenset({404})),
        )


def _unit_cost_table(model):
    # every leg costs something, so budget 0 can never be met
    return {a: {b: 1.0 for b in model.ids} for a in model.ids}


def test_seed_infeasible(midtown_model):
    impossible = ConstraintSet(budget_limit=0.0, cost=_unit_cost_table(midtown_model))
    with pytest.raises(InfeasibleConstraints):
        seed_itinerary(midtown_model, 5, 0, 9, constraints=impossible, max_restarts=5)
    crowded = ConstraintSet(must_see=frozenset({1, 2, 3, 4}))
    with pytest.raises(InfeasibleConstraints):
        seed_itinerary(midtown_model, 5, 0, 9, L=4, constraints=crowded)


def test_seed_satisfies_constraints(midtown_model):
    cs = ConstraintSet(must_see=frozenset({3, 7}))
    seq = seed_itinerary(midtown_model, 5, 0, 9, constraints=cs, rng=random.Random(1))
    assert check_constraints(seq, cs)[0]
    assert 5 in seq and seq[0] == 0 and seq[-1] == 9


def test_seed_length_exceeds_catalog(midtown_model):
    with pytest.raises(ExhaustedCandidates):
        seed_itinerary(midtown_model, 5, 0, 9, L=midtown_model.n + 1)


# -------------------------------------------------------------------- moves --

def test_choose_move_menus():
    rng = random.Random(0)
    draws = {
        (False, False): set(),
        (False, True): set(),
        (True, False): set(),
        (True, True): set(),
    }
    for _ in range(400):
        for protected in (False, True):
            for fixed in (False, True):
                draws[(protected, fixed)].add(choose_move(rng, protected, fixed))
    assert draws[(False, False)] == {INSERT, DELETE, REPLACE, SWAP_REPLACE}
    assert draws[(True, False)] == {INSERT, SWAP_REPLACE}
    assert draws[(False, True)] == {REPLACE, SWAP_REPLACE}
    assert draws[(True, True)] == {SWAP_REPLACE, None}


def test_apply_insert(midtown_model):
    cur = [0, 3, 5, 9]
    out = apply_move(midtown_model, cur, INSERT, 2, random.Random(4))
    assert len(out) == 5
    assert out[:2] == [0, 3] and out[3:] == [5, 9]
    assert out[2] not in cur


def test_apply_delete(midtown_model):
    assert apply_move(midtown_model, [0, 3, 5, 9], DELETE, 3, random.Random(0)) == [0, 3, 9]
    with pytest.raises(IllegalMove):
        apply_move(
            midtown_model, [0, 3, 5, 9], DELETE, 3, random.Random(0),
            protected=frozenset({5}),
        )
    with pytest.raises(IllegalMove):
        apply_move(midtown_model, [0, 3, 5, 9], DELETE, 3, random.Random(0), fixed_length=True)


def test_apply_replace(midtown_model):
    cur = [0, 3, 5, 7, 9]
    out = apply_move(midtown_model, cur, REPLACE, 3, random.Random(8))
    assert len(out) == 5
    assert out[:2] == [0, 3] and out[3:] == [7, 9]
    assert out[2] not in {0, 3, 7, 9}
    with pytest.raises(IllegalMove):
        apply_move(midtown_model, cur, REPLACE, 3, random.Random(0), protected=frozenset({5}))


def test_apply_swap_replace(midtown_model):
    cur = [0, 3, 5, 7, 9]
    out = apply_move(midtown_model, cur, SWAP_REPLACE, 2, random.Random(5))
    assert len(out) == 5
    assert out[0] == 0 and out[-1] == 9
    assert len(set(out)) == 5


def test_apply_move_guards(midtown_model):
    cur = [0, 3, 5, 9]
    for bad_t in (0, 1, 4, 9):
        with pytest.raises(IllegalMove):
            apply_move(midtown_model, cur, REPLACE, bad_t, random.Random(0))
    with pytest.raises(IllegalMove):
        apply_move(midtown_model, cur, INSERT, 2, random.Random(0), fixed_length=True)
    with pytest.raises(IllegalMove):
        apply_move(midtown_model, cur, "teleport", 2, random.Random(0))


# ------------------------------------------------------------------- search --

def test_sample_guards(midtown_model):
    with pytest.raises(ValueError):
        sample_itinerary(midtown_model, 0, 0, 9)
    with pytest.raises(ValueError):
        sample_itinerary(midtown_model, 5, 0, 9, L=2)
    with pytest.raises(InvalidId):
        sample_itinerary(midtown_model, 404, 0, 9)


def test_sample_trace_obeys_acceptance_rule(midtown_model):
    itin, trace = sample_itinerary(
        midtown_model, 5, 0, 9, config=SamplerConfig(iterations=40, seed=13),
        return_trace=True,
    )
    assert len(trace) == 41
    assert trace[0].move == "seed" and trace[0].accepted
    assert trace[0].candidate == (0, 5, 9)
    problems, best_series, _escapes = replay_sampler_trace(trace)
    assert problems == []
    assert all(a >= b for a, b in zip(best_series, best_series[1:]))
    assert itin.perplexity == best_series[-1]
    accepted = [e for e in trace if e.accepted and e.perplexity == itin.perplexity]
    assert itin.poi_ids in {e.candidate for e in accepted}


def test_sample_default_budget_and_determinism(midtown_model):
    a, trace_a = sample_itinerary(
        midtown_model, 5, 0, 9, config=SamplerConfig(seed=2), return_trace=True
    )
    b, trace_b = sample_itinerary(
        midtown_model, 5, 0, 9, config=SamplerConfig(seed=2), return_trace=True
    )
    assert len(trace_a) == 5 * (3 - 2) + 1  # seed itinerary has 3 POIs
    assert a.poi_ids == b.poi_ids and a.perplexity == b.perplexity
    assert trace_a == trace_b


def test_sample_keeps_protected_and_constraints(midtown_model):
    cs = ConstraintSet(must_see=frozenset({3}))
    itin = sample_itinerary(
        midtown_model, 5, 0, 9, constraints=cs,
        config=SamplerConfig(iterations=30, seed=9),
    )
    assert 5 in itin.poi_ids and 3 in itin.poi_ids
    assert itin.poi_ids[0] == 0 and itin.poi_ids[-1] == 9
    assert check_constraints(itin.poi_ids, cs)[0]
    assert math.isfinite(itin.perplexity)


def test_sample_fixed_length_stays_fixed(midtown_model):
    itin, trace = sample_itinerary(
        midtown_model, 5, 0, 9, L=5,
        config=SamplerConfig(iterations=25, seed=21), return_trace=True,
    )
    assert len(itin.poi_ids) == 5
    for e in trace:
        if e.candidate is not None:
            assert len(e.candidate) == 5
