"""Bidirectional next-POI sequence model.

Two independent LSTMs score partial itineraries conditioned on the query
endpoints (s, d): the forward model extends a prefix rooted at s, the
backward model extends a suffix rooted at d (consumed from the end toward
the start).  Each direction has its own two-layer MLP scorer that rates
every catalog POI against the current hidden state; a masked softmax over
those scores yields the step distribution.

At position t of a length-T sequence the two directions are blended as

    P_c = beta * P_f + (1 - beta) * P_b,   beta = t / (T - 1)

so predictions near the start lean on the backward model and predictions
near the destination lean on the forward model.
"""
from __future__ import annotations

import copy
import math
import random
from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from .dataset import POICatalog, Route
from .poigraph import EmbeddingTable
from .errors import (
    BadPosition,
    EmptyPrefix,
    EmptyTrainingSet,
    InvalidId,
    NonFiniteLoss,
    ShapeMismatch,
)

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class ITRConfig:
    hidden_size: int = 32
    scorer_hidden: int = 30
    lr: float = 0.001
    batch_size: int = 32
    epochs: int = 100
    patience: int = 10
    val_fraction: float = 0.1
    seed: int = 0


class ITRNetModel(nn.Module):
    """Frozen POI embeddings plus trained forward/backward sequence heads."""

    def __init__(self, ids: Sequence[int], vectors: np.ndarray, config: ITRConfig, l_max: int):
        super().__init__()
        self.ids: tuple[int, ...] = tuple(int(i) for i in ids)
        self._row = {poi_id: i for i, poi_id in enumerate(self.ids)}
        if len(self._row) != len(self.ids):
            raise InvalidId("duplicate ids in model catalog")
        if vectors.shape[0] != len(self.ids):
            raise ShapeMismatch(
                f"{vectors.shape[0]} embedding rows for {len(self.ids)} ids"
            )
        self.config = config
        self.l_max = int(l_max)
        emb = torch.from_numpy(np.ascontiguousarray(vectors, dtype=np.float32))
        self.register_buffer("emb", emb)
        e = emb.shape[1]
        h = config.hidden_size
        self.lstm_f = nn.LSTM(3 * e, h, batch_first=True)
        self.lstm_b = nn.LSTM(3 * e, h, batch_first=True)
        self.scorer_f = _make_scorer(e + h, config.scorer_hidden)
        self.scorer_b = _make_scorer(e + h, config.scorer_hidden)
        self.eval()

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def embed_dim(self) -> int:
        return int(self.emb.shape[1])

    def index_of(self, poi_id: int) -> int:
        try:
            return self._row[poi_id]
        except KeyError:
            raise InvalidId(f"poi_id {poi_id} unknown to this model") from None

    def id_at(self, row: int) -> int:
        return self.ids[row]

    def rows(self, poi_ids: Iterable[int]) -> list[int]:
        return [self.index_of(p) for p in poi_ids]


def _make_scorer(in_dim: int, hidden: int) -> nn.Sequential:
    return nn.Sequential(nn.Linear(in_dim, hidden), nn.ReLU(), nn.Linear(hidden, 1))


def _score_all(scorer: nn.Module, emb: torch.Tensor, h: torch.Tensor) -> torch.Tensor:
    """Score every POI against hidden state(s) h of shape (..., H) -> (..., N)."""
    lead = h.shape[:-1]
    n, e = emb.shape
    emb_e = emb.reshape(*([1] * len(lead)), n, e).expand(*lead, n, e)
    h_e = h.unsqueeze(-2).expand(*lead, n, h.shape[-1])
    return scorer(torch.cat([emb_e, h_e], dim=-1)).squeeze(-1)


def _endpoint_context(model: ITRNetModel, s_row: int, d_row: int) -> torch.Tensor:
    return torch.cat([model.emb[s_row], model.emb[d_row]])


@torch.no_grad()
def _step_scores(
    model: ITRNetModel, direction: str, context_rows: Sequence[int], s_row: int, d_row: int
) -> torch.Tensor:
    if not context_rows:
        raise EmptyPrefix("need at least one conditioning POI")
    lstm, scorer = (
        (model.lstm_f, model.scorer_f) if direction == FORWARD else (model.lstm_b, model.scorer_b)
    )
    sd = _endpoint_context(model, s_row, d_row)
    x = torch.cat(
        [model.emb[list(context_rows)], sd.expand(len(context_rows), -1)], dim=1
    ).unsqueeze(0)
    out, _ = lstm(x)
    return _score_all(scorer, model.emb, out[0, -1])


def _masked_probs(model: ITRNetModel, scores: torch.Tensor, mask: Iterable[int]) -> np.ndarray:
    mask_rows = sorted({model.index_of(p) for p in mask})
    logits = scores.double()
    if mask_rows:
        if len(mask_rows) >= model.n:
            raise ValueError("every POI is masked")
        logits = logits.clone()
        logits[mask_rows] = -math.inf
    probs = torch.softmax(logits, dim=0).numpy()
    return probs / probs.sum()


def forward_step_probs(
    model: ITRNetModel,
    prefix: Sequence[int],
    s: int,
    d: int,
    mask: Iterable[int] = (),
) -> np.ndarray:
    """Distribution over the POI that follows ``prefix``, given endpoints.

    The returned vector is aligned with ``model.ids``; masked ids carry
    exactly zero probability and the rest sum to one.
    """
    scores = _step_scores(model, FORWARD, model.rows(prefix), model.index_of(s), model.index_of(d))
    return _masked_probs(model, scores, mask)


def backward_step_probs(
    model: ITRNetModel,
    suffix_rev: Sequence[int],
    s: int,
    d: int,
    mask: Iterable[int] = (),
) -> np.ndarray:
    """Distribution over the POI that precedes a suffix.

    ``suffix_rev`` lists the known tail from the end of the itinerary toward
    the start (its first element is the last POI), matching the order in
    which the backward model consumes it.
    """
    scores = _step_scores(
        model, BACKWARD, model.rows(suffix_rev), model.index_of(s), model.index_of(d)
    )
    return _masked_probs(model, scores, mask)


def combined_step_probs(pf: np.ndarray, pb: np.ndarray, t: int, T: int) -> np.ndarray:
    """Blend forward and backward distributions for position t of T."""
    if pf.shape != pb.shape:
        raise ShapeMismatch(f"vector shapes differ: {pf.shape} vs {pb.shape}")
    if T < 2:
        raise BadPosition(f"sequence length {T} has no interior")
    if not 1 <= t <= T - 1:
        raise BadPosition(f"position {t} outside [1, {T - 1}]")
    beta = t / (T - 1)
    return beta * pf + (1.0 - beta) * pb


@torch.no_grad()
def route_perplexity(model: ITRNetModel, poi_ids: Sequence[int]) -> float:
    """Negative forward log-likelihood of an itinerary, summed from position 2.

    Endpoints are read off the itinerary itself.  A sequence that revisits a
    POI gets +inf (repeat visits are never generated), as does any step whose
    probability underflows to zero.
    """
    if len(poi_ids) < 2:
        raise ValueError("perplexity needs at least two POIs")
    if len(set(poi_ids)) != len(poi_ids):
        return math.inf
    rows = model.rows(poi_ids)
    s_row, d_row = rows[0], rows[-1]
    sd = _endpoint_context(model, s_row, d_row)
    steps = len(rows) - 1
    x = torch.cat([model.emb[rows[:-1]], sd.expand(steps, -1)], dim=1).unsqueeze(0)
    out, _ = model.lstm_f(x)
    scores = _score_all(model.scorer_f, model.emb, out[0]).double()
    logp = F.log_softmax(scores, dim=1)
    picked = logp[torch.arange(steps), torch.tensor(rows[1:])]
    total = float(-picked.sum())
    return math.inf if not math.isfinite(total) else total


# ------------------------------------------------------------------ training --

def _route_rows(routes: Sequence[Route], catalog: POICatalog) -> list[tuple[int, ...]]:
    out = []
    for r in routes:
        if len(r.poi_ids) < 3:
            raise ValueError(f"training route shorter than 3 POIs: {r.poi_ids}")
        out.append(tuple(catalog.index_of(p) for p in r.poi_ids))
    return out


def _batch_tensors(rows_batch: list[tuple[int, ...]]):
    """Teacher-forcing tensors for one batch, both directions, padded."""
    b = len(rows_batch)
    steps = max(len(r) for r in rows_batch) - 1
    fwd_in = torch.zeros(b, steps, dtype=torch.long)
    fwd_tgt = torch.full((b, steps), -100, dtype=torch.long)
    bwd_in = torch.zeros(b, steps, dtype=torch.long)
    bwd_tgt = torch.full((b, steps), -100, dtype=torch.long)
    s_rows = torch.zeros(b, dtype=torch.long)
    d_rows = torch.zeros(b, dtype=torch.long)
    for i, r in enumerate(rows_batch):
        t = len(r) - 1
        fwd_in[i, :t] = torch.tensor(r[:-1])
        fwd_tgt[i, :t] = torch.tensor(r[1:])
        rev = r[::-1]
        bwd_in[i, :t] = torch.tensor(rev[:-1])
        bwd_tgt[i, :t] = torch.tensor(rev[1:])
        s_rows[i] = r[0]
        d_rows[i] = r[-1]
    return fwd_in, fwd_tgt, bwd_in, bwd_tgt, s_rows, d_rows


def _direction_loss(model, lstm, scorer, in_rows, targets, s_rows, d_rows):
    """Summed cross-entropy and token count for one direction of one batch."""
    b, steps = in_rows.shape
    sd = torch.cat([model.emb[s_rows], model.emb[d_rows]], dim=1)
    x = torch.cat([model.emb[in_rows], sd.unsqueeze(1).expand(b, steps, -1)], dim=2)
    out, _ = lstm(x)
    scores = _score_all(scorer, model.emb, out)
    loss = F.cross_entropy(
        scores.reshape(-1, model.n), targets.reshape(-1), ignore_index=-100, reduction="sum"
    )
    return loss, int((targets != -100).sum())


def _epoch_loss(model, rows, batch_size, optimizer=None):
    total, tokens = 0.0, 0
    for start in range(0, len(rows), batch_size):
        batch = rows[start : start + batch_size]
        fwd_in, fwd_tgt, bwd_in, bwd_tgt, s_rows, d_rows = _batch_tensors(batch)
        loss_f, tok_f = _direction_loss(
            model, model.lstm_f, model.scorer_f, fwd_in, fwd_tgt, s_rows, d_rows
        )
        loss_b, tok_b = _direction_loss(
            model, model.lstm_b, model.scorer_b, bwd_in, bwd_tgt, s_rows, d_rows
        )
        loss = (loss_f + loss_b) / max(1, tok_f + tok_b)
        if optimizer is not None:
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        total += (loss_f + loss_b).item()
        tokens += tok_f + tok_b
    return total / max(1, tokens)


def train_itrnet(
    routes: Sequence[Route],
    embeddings: EmbeddingTable,
    catalog: POICatalog,
    config: ITRConfig = ITRConfig(),
) -> ITRNetModel:
    """Train the bidirectional model with teacher forcing.

    Every route conditions on its own endpoints.  Training runs on all
    routes; a fixed 10% slice is monitored for early stopping (patience
    ``config.patience``), and the best-slice weights are restored at the
    end.  Deterministic for fixed (routes, embeddings, config).
    """
    if not routes:
        raise EmptyTrainingSet("no routes to train on")
    if embeddings.n != len(catalog):
        raise ShapeMismatch(
            f"{embeddings.n} embedding rows for catalog of {len(catalog)}"
        )
    rows = _route_rows(routes, catalog)
    l_max = max(len(r) for r in rows)

    torch.manual_seed(config.seed)
    model = ITRNetModel(catalog.ids, embeddings.vectors, config, l_max)
    rng = random.Random(config.seed)
    monitor = sorted(rng.sample(range(len(rows)), max(1, round(config.val_fraction * len(rows)))))
    monitor_rows = [rows[i] for i in monitor]

    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    best_val = math.inf
    best_state = copy.deepcopy(model.state_dict())
    flat = 0
    order = list(range(len(rows)))
    model.train()
    for _epoch in range(config.epochs):
        rng.shuffle(order)
        train_loss = _epoch_loss(model, [rows[i] for i in order], config.batch_size, optimizer)
        if not math.isfinite(train_loss):
            raise NonFiniteLoss(f"training loss became {train_loss}")
        model.eval()
        with torch.no_grad():
            val_loss = _epoch_loss(model, monitor_rows, config.batch_size)
        model.train()
        if val_loss < best_val:
            best_val = val_loss
            best_state = copy.deepcopy(model.state_dict())
            flat = 0
        else:
            flat += 1
            if flat >= config.patience:
                break
    model.load_state_dict(best_state)
    model.eval()
    return model


def model_state_arrays(model: ITRNetModel) -> dict[str, np.ndarray]:
    """State dict as plain numpy arrays, for checkpointing."""
    return {k: v.detach().cpu().numpy() for k, v in model.state_dict().items()}


def model_from_state(
    ids: Sequence[int],
    config: ITRConfig,
    l_max: int,
    arrays: dict[str, np.ndarray],
) -> ITRNetModel:
    """Rebuild a model from checkpoint arrays (inverse of model_state_arrays)."""
    vectors = arrays["emb"]
    model = ITRNetModel(ids, vectors, config, l_max)
    state = {k: torch.from_numpy(np.ascontiguousarray(v)) for k, v in arrays.items()}
    model.load_state_dict(state, strict=True)
    model.eval()
    return model


def config_from_dict(d: dict) -> ITRConfig:
    return ITRConfig(**{k: d[k] for k in asdict(ITRConfig()) if k in d})
