"""Sequence-model contracts: step distributions, perplexity, training."""
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alttrip.dataset import Route
from alttrip.errors import (
    EmptyPrefix,
    EmptyTrainingSet,
    BadPosition,
    InvalidId,
    ShapeMismatch,
)
from alttrip.itrnet import (
    ITRConfig,
    backward_step_probs,
    combined_step_probs,
    forward_step_probs,
    model_from_state,
    model_state_arrays,
    route_perplexity,
    train_itrnet,
)


def _simplex_ok(pv, n, masked_rows):
    assert pv.shape == (n,)
    assert np.all(pv >= 0.0)
    assert abs(pv.sum() - 1.0) <= 1e-12
    for r in masked_rows:
        assert pv[r] == 0.0


# ------------------------------------------------------------- distributions --

def test_step_probs_are_masked_simplex(midtown_model):
    m = midtown_model
    pf = forward_step_probs(m, [0, 2], 0, 9, mask=(0, 9, 5))
    _simplex_ok(pf, m.n, [m.index_of(0), m.index_of(9), m.index_of(5)])
    pb = backward_step_probs(m, [9, 7], 0, 9, mask=(0, 9))
    _simplex_ok(pb, m.n, [m.index_of(0), m.index_of(9)])


def test_step_probs_reject_bad_input(midtown_model):
    with pytest.raises(EmptyPrefix):
        forward_step_probs(midtown_model, [], 0, 9)
    with pytest.raises(EmptyPrefix):
        backward_step_probs(midtown_model, [], 0, 9)
    with pytest.raises(InvalidId):
        forward_step_probs(midtown_model, [0], 0, 999)
    with pytest.raises(ValueError):
        forward_step_probs(midtown_model, [0], 0, 9, mask=midtown_model.ids)


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_step_probs_simplex_property(midtown_model, data):
    m = midtown_model
    ids = list(m.ids)
    prefix = data.draw(st.lists(st.sampled_from(ids), min_size=1, max_size=5))
    mask = data.draw(st.sets(st.sampled_from(ids), max_size=m.n - 1))
    s, d = data.draw(st.sampled_from(ids)), data.draw(st.sampled_from(ids))
    pv = forward_step_probs(m, prefix, s, d, mask=mask)
    _simplex_ok(pv, m.n, [m.index_of(p) for p in mask])


def test_combined_blend_matches_formula():
    pf = np.array([0.2, 0.5, 0.3])
    pb = np.array([0.6, 0.1, 0.3])
    for t, T in ((1, 5), (2, 5), (4, 5), (1, 2)):
        beta = t / (T - 1)
        np.testing.assert_allclose(
            combined_step_probs(pf, pb, t, T), beta * pf + (1 - beta) * pb, atol=1e-15
        )
    # the last interior position is scored by the forward model alone
    np.testing.assert_allclose(combined_step_probs(pf, pb, 4, 5), pf, atol=1e-15)


def test_combined_rejects_bad_positions():
    pv = np.ones(3) / 3
    for t, T in ((0, 5), (5, 5), (-1, 5), (2, 1)):
        with pytest.raises(BadPosition):
            combined_step_probs(pv, pv, t, T)
    with pytest.raises(ShapeMismatch):
        combined_step_probs(pv, np.ones(4) / 4, 1, 3)


# ---------------------------------------------------------------- perplexity --

def test_perplexity_matches_stepwise_chain(midtown_model):
    m = midtown_model
    rng = random.Random(11)
    for _ in range(8):
        length = rng.randrange(3, 7)
        ids = rng.sample(list(m.ids), length)
        expected = 0.0
        for t in range(1, length):
            pv = forward_step_probs(m, ids[:t], ids[0], ids[-1])
            expected -= math.log(pv[m.index_of(ids[t])])
        # batched scoring reorders float32 sums relative to the stepwise path,
        # so agreement is to matmul noise, not bit-exact
        assert route_perplexity(m, ids) == pytest.approx(expected, abs=1e-6)


def test_perplexity_edge_cases(midtown_model):
    assert route_perplexity(midtown_model, [0, 5, 0]) == math.inf
    with pytest.raises(ValueError):
        route_perplexity(midtown_model, [0])
    assert math.isfinite(route_perplexity(midtown_model, [0, 9]))


# ------------------------------------------------------------------ training --

def test_train_deterministic(midtown_catalog, midtown_routes, midtown_emb, midtown_model):
    again = train_itrnet(
        midtown_routes, midtown_emb, midtown_catalog, ITRConfig(epochs=60, seed=0)
    )
    for name, arr in model_state_arrays(midtown_model).items():
        np.testing.assert_array_equal(arr, model_state_arrays(again)[name])
    assert again.l_max == max(len(r) for r in midtown_routes)


def test_train_rejects_bad_input(midtown_catalog, midtown_emb):
    with pytest.raises(EmptyTrainingSet):
        train_itrnet([], midtown_emb, midtown_catalog, ITRConfig(epochs=1))
    from alttrip.poigraph import EmbeddingTable

    short = EmbeddingTable(midtown_emb.vectors[:-1], midtown_emb.kind)
    with pytest.raises(ShapeMismatch):
        train_itrnet(
            [Route((0, 1, 2))], short, midtown_catalog, ITRConfig(epochs=1)
        )


def test_state_roundtrip(midtown_model):
    m = midtown_model
    arrays = model_state_arrays(m)
    clone = model_from_state(list(m.ids), m.config, m.l_max, arrays)
    probe = forward_step_probs(m, [0, 2, 5], 0, 9, mask=(0, 9))
    np.testing.assert_array_equal(
        probe, forward_step_probs(clone, [0, 2, 5], 0, 9, mask=(0, 9))
    )
    route = [0, 2, 5, 9]
    assert route_perplexity(clone, route) == route_perplexity(m, route)
