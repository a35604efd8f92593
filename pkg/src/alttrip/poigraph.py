"""POI graph construction and graph-autoencoder embeddings.

Two views of the catalog are embedded separately and then fused:

* a category graph, where two POIs are adjacent iff they share a category;
* a distance graph, whose edge weights decay exponentially from 1 at the
  closest catalog pair to 0 at the farthest.

Each view is encoded by a two-layer graph convolutional encoder trained to
reconstruct its adjacency matrix (binary cross-entropy for the category
view, mean squared error for the distance view).  The final node embedding
is the concatenation of both views.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ._store import digest_of, read_archive, write_archive
from .dataset import POICatalog
from .errors import (
    ConfigMismatch,
    DegenerateGeometry,
    HashMismatch,
    NonFiniteLoss,
    ShapeMismatch,
)

EARTH_RADIUS_KM = 6371.0088

CATEGORY = "category"
DISTANCE = "distance"
FUSED = "fused"


def pairwise_distances_km(catalog: POICatalog) -> np.ndarray:
    """Pairwise equirectangular distances between catalog POIs, in km."""
    lat = np.radians(np.array([p.lat for p in catalog], dtype=np.float64))
    lon = np.radians(np.array([p.lon for p in catalog], dtype=np.float64))
    mean_lat = 0.5 * (lat[:, None] + lat[None, :])
    dx = EARTH_RADIUS_KM * (lon[:, None] - lon[None, :]) * np.cos(mean_lat)
    dy = EARTH_RADIUS_KM * (lat[:, None] - lat[None, :])
    return np.hypot(dx, dy)


@dataclass(frozen=True)
class AdjacencyMatrix:
    matrix: np.ndarray
    kind: str


def build_category_adjacency(catalog: POICatalog) -> AdjacencyMatrix:
    """1 where two POIs share a category, 0 elsewhere; the diagonal is 1."""
    cats = [p.category for p in catalog]
    n = len(cats)
    m = np.zeros((n, n), dtype=np.float32)
    for i in range(n):
        for j in range(n):
            if cats[i] == cats[j]:
                m[i, j] = 1.0
    return AdjacencyMatrix(m, CATEGORY)


def build_distance_adjacency(catalog: POICatalog) -> AdjacencyMatrix:
    """Exponential proximity weights in [0, 1].

    With dmin and dmax the extreme off-diagonal distances, a pair at distance
    dist gets weight (exp(dmin - dist) - exp(dmin - dmax)) / (1 - exp(dmin - dmax)):
    1 at the closest pair, 0 at the farthest, strictly decreasing in between.
    Every exponent is non-positive, so the expression cannot overflow.
    The diagonal is fixed at 1.
    """
    if len(catalog) < 2:
        raise DegenerateGeometry("need at least two POIs for distance weights")
    dist = pairwise_distances_km(catalog)
    off = ~np.eye(len(catalog), dtype=bool)
    d_min = float(dist[off].min())
    d_max = float(dist[off].max())
    span = d_max - d_min
    if span <= 0.0:
        raise DegenerateGeometry("all pairwise distances are equal")
    e_span = math.exp(-span)
    w = (np.exp(-(dist - d_min)) - e_span) / (1.0 - e_span)
    np.fill_diagonal(w, 1.0)
    return AdjacencyMatrix(np.clip(w, 0.0, 1.0).astype(np.float32), DISTANCE)


# ------------------------------------------------------------------ encoder --

@dataclass(frozen=True)
class GAEConfig:
    embed_dim: int
    lr: float
    hidden_dim: int = 32
    epochs: int = 300
    seed: int = 0
    loss: str | None = None  # None picks by graph kind
    stop_tol: float = 1e-5
    stop_patience: int = 20


def category_config(embed_dim: int = 12, lr: float = 0.05, **kw) -> GAEConfig:
    return GAEConfig(embed_dim=embed_dim, lr=lr, **kw)


def distance_config(embed_dim: int = 24, lr: float = 0.01, **kw) -> GAEConfig:
    return GAEConfig(embed_dim=embed_dim, lr=lr, **kw)


@dataclass
class EmbeddingTable:
    """Frozen per-POI vectors, row-aligned with the source catalog."""

    vectors: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


class _GCNEncoder(nn.Module):
    """Two graph convolutions over identity node features."""

    def __init__(self, n: int, hidden: int, out: int):
        super().__init__()
        self.lin1 = nn.Linear(n, hidden)
        self.lin2 = nn.Linear(hidden, out)

    def forward(self, a_norm: torch.Tensor) -> torch.Tensor:
        # X = I, so the first propagation is a_norm @ W1
        h = torch.relu(self.lin1(a_norm))
        return self.lin2(a_norm @ h)


def _normalize_adjacency(a: torch.Tensor) -> torch.Tensor:
    deg = a.sum(dim=1)
    inv_sqrt = deg.clamp(min=1e-12).pow(-0.5)
    return inv_sqrt[:, None] * a * inv_sqrt[None, :]


_LOSS_FOR_KIND = {CATEGORY: "cross_entropy", DISTANCE: "mse"}


def _reconstruction_loss(z: torch.Tensor, a: torch.Tensor, loss_kind: str) -> torch.Tensor:
    rec = torch.relu(z @ z.T)
    if loss_kind == "cross_entropy":
        # the decoder is not bounded above by 1, so clamp before the log
        rec = rec.clamp(1e-7, 1.0 - 1e-7)
        return -(a * rec.log() + (1.0 - a) * (1.0 - rec).log()).mean()
    if loss_kind == "mse":
        return ((rec - a) ** 2).mean()
    raise ConfigMismatch(f"unknown loss kind {loss_kind!r}")


def train_gae(adjacency: AdjacencyMatrix, config: GAEConfig) -> EmbeddingTable:
    """Train a graph autoencoder on one adjacency view.

    Deterministic for a fixed (adjacency, config).  Training stops early once
    the loss has improved by less than ``stop_tol`` for ``stop_patience``
    consecutive epochs.
    """
    loss_kind = config.loss or _LOSS_FOR_KIND.get(adjacency.kind)
    if loss_kind is None:
        raise ConfigMismatch(f"no default loss for graph kind {adjacency.kind!r}")
    if adjacency.kind in _LOSS_FOR_KIND and loss_kind != _LOSS_FOR_KIND[adjacency.kind]:
        raise ConfigMismatch(
            f"loss {loss_kind!r} does not match graph kind {adjacency.kind!r}"
        )
    n = adjacency.matrix.shape[0]
    if adjacency.matrix.shape != (n, n):
        raise ShapeMismatch(f"adjacency must be square, got {adjacency.matrix.shape}")

    torch.manual_seed(config.seed)
    a = torch.from_numpy(np.asarray(adjacency.matrix, dtype=np.float32))
    a_norm = _normalize_adjacency(a)
    encoder = _GCNEncoder(n, config.hidden_dim, config.embed_dim)
    opt = torch.optim.Adam(encoder.parameters(), lr=config.lr)

    best = math.inf
    flat_epochs = 0
    epochs_run = 0
    last = math.nan
    for epoch in range(config.epochs):
        opt.zero_grad()
        z = encoder(a_norm)
        loss = _reconstruction_loss(z, a, loss_kind)
        value = loss.item()
        if not math.isfinite(value):
            raise NonFiniteLoss(f"epoch {epoch}: loss {value}")
        loss.backward()
        opt.step()
        epochs_run = epoch + 1
        last = value
        if best - value < config.stop_tol:
            flat_epochs += 1
            if flat_epochs >= config.stop_patience:
                break
        else:
            flat_epochs = 0
        best = min(best, value)

    with torch.no_grad():
        z = encoder(_normalize_adjacency(a))
    meta = {"config": asdict(config), "loss_kind": loss_kind,
            "final_loss": last, "epochs_run": epochs_run}
    return EmbeddingTable(z.numpy().astype(np.float32), adjacency.kind, meta)


def fuse_embeddings(*tables: EmbeddingTable) -> EmbeddingTable:
    """Concatenate embedding tables row-wise into one fused table."""
    if not tables:
        raise ShapeMismatch("nothing to fuse")
    parts = [t for t in tables if t.dim > 0]
    if not parts:
        raise ShapeMismatch("all tables are zero-dimensional")
    n = parts[0].n
    for t in parts:
        if t.n != n:
            raise ShapeMismatch(f"row counts differ: {t.n} vs {n}")
    vectors = np.concatenate([t.vectors for t in parts], axis=1).astype(np.float32)
    meta = {"components": [{"kind": t.kind, "dim": t.dim, **t.meta} for t in tables]}
    return EmbeddingTable(vectors, FUSED, meta)


def embed_catalog(
    catalog: POICatalog,
    cat_config: GAEConfig | None = None,
    dist_config: GAEConfig | None = None,
) -> EmbeddingTable:
    """Full embedding pipeline: both views trained and fused."""
    z_c = train_gae(build_category_adjacency(catalog), cat_config or category_config())
    z_d = train_gae(build_distance_adjacency(catalog), dist_config or distance_config())
    return fuse_embeddings(z_c, z_d)


# -------------------------------------------------------------- persistence --

def embedding_content_hash(table: EmbeddingTable) -> str:
    return digest_of({"vectors": np.ascontiguousarray(table.vectors)}, extra=table.kind)


def save_embeddings(table: EmbeddingTable, path: str | Path, catalog_hash: str) -> str:
    meta = {
        "table_kind": table.kind,
        "n": table.n,
        "dim": table.dim,
        "meta": table.meta,
        "catalog_hash": catalog_hash,
        "content_hash": embedding_content_hash(table),
    }
    return write_archive(path, "embeddings", meta, {"vectors": table.vectors})


def load_embeddings(path: str | Path) -> tuple[EmbeddingTable, str]:
    """Load an embedding checkpoint; returns (table, catalog_hash)."""
    meta, arrays = read_archive(path, "embeddings")
    table = EmbeddingTable(
        arrays["vectors"].astype(np.float32), meta["table_kind"], meta.get("meta", {})
    )
    if embedding_content_hash(table) != meta.get("content_hash"):
        raise HashMismatch(f"{path}: embedding content hash differs from manifest")
    return table, meta["catalog_hash"]
