"""Prominence selection, anchored greedy decoding, and top-k assembly."""
import numpy as np
import pytest
import torch

from alttrip.errors import ConstraintUnsupported, ExhaustedCandidates, NoEligiblePOI
from alttrip.itrnet import (
    BACKWARD,
    FORWARD,
    ITRConfig,
    ITRNetModel,
    backward_step_probs,
    forward_step_probs,
)
from alttrip.planner import (
    Query,
    generate_half,
    generate_itinerary_lstm,
    pick_prominent,
    recommend_topk,
    relevancy_scores,
)
from alttrip.sampler import ConstraintSet


def _tiny_model(n, l_max=3, seed=0):
    torch.manual_seed(seed)
    vectors = np.random.default_rng(seed).normal(size=(n, 36)).astype(np.float32)
    return ITRNetModel(list(range(n)), vectors, ITRConfig(), l_max)


# -------------------------------------------------------------------- query --

def test_query_validation():
    Query(0, 9, k=1, L=3)
    with pytest.raises(ValueError):
        Query(4, 4)
    with pytest.raises(ValueError):
        Query(0, 9, k=0)
    with pytest.raises(ValueError):
        Query(0, 9, L=2)


# ---------------------------------------------------------------- relevancy --

def test_relevancy_masks_endpoints(midtown_model):
    m = midtown_model
    rel = relevancy_scores(m, 0, 9)
    assert rel[m.index_of(0)] == 0.0
    assert rel[m.index_of(9)] == 0.0
    pf = forward_step_probs(m, [0], 0, 9, mask=(0, 9))
    pb = backward_step_probs(m, [9], 0, 9, mask=(0, 9))
    np.testing.assert_allclose(rel, 0.5 * (pf + pb), atol=0)


def test_pick_prominent_least_occurrence_pool():
    model = _tiny_model(5)
    scores = np.array([0.0, 0.9, 0.3, 0.3, 0.0])
    occ = np.array([9, 1, 0, 0, 9])
    # rows 2 and 3 are the least used; the score tie breaks to the lower id
    assert pick_prominent(model, scores, occ, 0, 4) == 2
    assert pick_prominent(model, scores, np.zeros(5, dtype=int), 0, 4) == 1


def test_pick_prominent_guards():
    two = _tiny_model(2)
    with pytest.raises(NoEligiblePOI):
        pick_prominent(two, np.zeros(2), np.zeros(2, dtype=int), 0, 1)
    model = _tiny_model(4)
    bad = np.array([0.1, np.nan, 0.2, 0.1])
    with pytest.raises(ValueError):
        pick_prominent(model, bad, np.zeros(4, dtype=int), 0, 3)


# ------------------------------------------------------------------- halves --

def test_generate_half_backward_structure(midtown_model):
    frag, t_s = generate_half(midtown_model, 0, 9, BACKWARD, 4, context=[5])
    assert frag[0] == 0 and frag[-1] == 5
    assert 1 <= t_s <= 3
    assert len(frag) == 4 - t_s + 1
    assert len(set(frag)) == len(frag)
    assert 9 not in frag


def test_generate_half_forward_structure(midtown_model):
    frag, t_d = generate_half(midtown_model, 0, 9, FORWARD, 4, context=[0, 5])
    assert frag[:2] == [0, 5] and frag[-1] == 9
    assert 5 <= t_d <= 8
    assert len(frag) == 2 + (t_d - 4)
    assert len(set(frag)) == len(frag)


def test_generate_half_forced_lengths(midtown_model):
    frag, t_s = generate_half(
        midtown_model, 0, 9, BACKWARD, 4, context=[5], forced_len=2
    )
    assert len(frag) == 3 and frag[0] == 0 and t_s == 2
    frag, t_d = generate_half(
        midtown_model, 0, 9, FORWARD, 4, context=[0, 5], forced_len=1
    )
    assert frag == [0, 5, 9] and t_d == 5
    with pytest.raises(ExhaustedCandidates):
        generate_half(midtown_model, 0, 9, BACKWARD, 4, context=[5], forced_len=4)
    with pytest.raises(ExhaustedCandidates):
        generate_half(midtown_model, 0, 9, FORWARD, 4, context=[5], forced_len=5)


def test_generate_half_runs_out_of_pois():
    model = _tiny_model(4, l_max=3)
    with pytest.raises(ExhaustedCandidates):
        # both interiors already used: nothing left for the forced slot
        generate_half(model, 0, 3, BACKWARD, 3, context=[1, 2], forced_len=2)


# ------------------------------------------------------------- full decoding --

def test_generate_itinerary_fixed_length(midtown_model):
    itin = generate_itinerary_lstm(midtown_model, 5, 0, 9, L=5)
    assert itin.poi_ids[0] == 0 and itin.poi_ids[-1] == 9
    assert len(itin.poi_ids) == 5
    assert len(set(itin.poi_ids)) == 5
    assert 5 in itin.poi_ids
    assert itin.method == "lstm"
    again = generate_itinerary_lstm(midtown_model, 5, 0, 9, L=5)
    assert again.poi_ids == itin.poi_ids and again.perplexity == itin.perplexity


def test_generate_itinerary_minimal_length(midtown_model):
    itin = generate_itinerary_lstm(midtown_model, 5, 0, 9, L=3)
    assert itin.poi_ids == (0, 5, 9)


def test_generate_itinerary_free_length(midtown_model):
    itin = generate_itinerary_lstm(midtown_model, 5, 0, 9)
    assert itin.poi_ids[0] == 0 and itin.poi_ids[-1] == 9
    assert 3 <= len(itin.poi_ids) <= 2 * midtown_model.l_max
    assert len(set(itin.poi_ids)) == len(itin.poi_ids)


def test_generate_itinerary_guards(midtown_model):
    with pytest.raises(ValueError):
        generate_itinerary_lstm(midtown_model, 0, 0, 9)
    with pytest.raises(ValueError):
        generate_itinerary_lstm(midtown_model, 5, 0, 9, L=2)
    with pytest.raises(ExhaustedCandidates):
        generate_itinerary_lstm(midtown_model, 5, 0, 9, L=midtown_model.n + 1)


# -------------------------------------------------------------------- top-k --

def test_recommend_topk_follows_occurrence_rule(midtown_model):
    m = midtown_model
    recset = recommend_topk(m, Query(0, 9, k=3, L=5))
    assert len(recset.itineraries) == 3
    rel = relevancy_scores(m, 0, 9)
    occ = np.zeros(m.n, dtype=np.int64)
    prominents = []
    for itin in recset.itineraries:
        assert itin.poi_ids[0] == 0 and itin.poi_ids[-1] == 9
        assert itin.prominent == pick_prominent(m, rel, occ, 0, 9)
        prominents.append(itin.prominent)
        for poi in itin.poi_ids:
            occ[m.index_of(poi)] += 1
    assert len(set(prominents)) == 3


def test_recommend_topk_rejects_constrained_greedy(midtown_model):
    with pytest.raises(ConstraintUnsupported):
        recommend_topk(
            midtown_model, Query(0, 9, k=1), constraints=ConstraintSet(must_see=frozenset({5}))
        )
    # an empty constraint set is no constraint at all
    recommend_topk(midtown_model, Query(0, 9, k=1, L=3), constraints=ConstraintSet())
    with pytest.raises(ValueError):
        recommend_topk(midtown_model, Query(0, 9), method="annealer")


def test_recommend_topk_sampler_seeded(midtown_model):
    a = recommend_topk(midtown_model, Query(0, 9, k=2, L=4), method="sampler", seed=77)
    b = recommend_topk(midtown_model, Query(0, 9, k=2, L=4), method="sampler", seed=77)
    assert [i.poi_ids for i in a.itineraries] == [i.poi_ids for i in b.itineraries]
    assert a.seed == 77 and a.method == "sampler"
    for itin in a.itineraries:
        assert itin.poi_ids[0] == 0 and itin.poi_ids[-1] == 9
        assert len(itin.poi_ids) == 4
        assert itin.method == "sampler"
