"""Self-contained engine artifact: catalog + embeddings + sequence model.

A bundle is one integrity-checked archive holding everything the query
planner and HTTP service need.  Content hashes chain the stages together:
the catalog hash is recomputed from the stored catalog on load and the
embedding hash from the stored vectors, so a bundle assembled from
mismatched artifacts (or with doctored metadata) refuses to load.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from ._store import read_archive, write_archive
from .dataset import POI, POICatalog, catalog_hash
from .errors import HashMismatch
from .itrnet import ITRNetModel, config_from_dict, model_from_state, model_state_arrays
from .poigraph import FUSED, EmbeddingTable, embedding_content_hash


@dataclass
class EngineBundle:
    catalog: POICatalog
    embeddings: EmbeddingTable
    model: ITRNetModel
    meta: dict

    @property
    def dataset_name(self) -> str:
        return self.meta.get("dataset_name", "unnamed")


def build_bundle(
    catalog: POICatalog,
    embeddings: EmbeddingTable,
    model: ITRNetModel,
    dataset_name: str = "unnamed",
    extra_meta: dict | None = None,
) -> EngineBundle:
    meta = {
        "dataset_name": dataset_name,
        "catalog_hash": catalog_hash(catalog),
        "embedding_hash": embedding_content_hash(embeddings),
        "embedding_meta": embeddings.meta,
        "itr_config": asdict(model.config),
        "l_max": model.l_max,
        "ids": list(model.ids),
        **(extra_meta or {}),
    }
    return EngineBundle(catalog, embeddings, model, meta)


def save_bundle(bundle: EngineBundle, path: str | Path) -> str:
    meta = dict(bundle.meta)
    meta["catalog"] = [
        [p.poi_id, repr(p.lat), repr(p.lon), p.category] for p in bundle.catalog
    ]
    arrays = model_state_arrays(bundle.model)
    return write_archive(path, "bundle", meta, arrays)


def load_bundle(path: str | Path) -> EngineBundle:
    meta, arrays = read_archive(path, "bundle")
    catalog = POICatalog(
        POI(int(row[0]), float(row[1]), float(row[2]), str(row[3]))
        for row in meta["catalog"]
    )
    if catalog_hash(catalog) != meta.get("catalog_hash"):
        raise HashMismatch(f"{path}: stored catalog does not match its recorded hash")

    config = config_from_dict(meta["itr_config"])
    model = model_from_state(meta["ids"], config, int(meta["l_max"]), arrays)
    if list(catalog.ids) != list(model.ids):
        raise HashMismatch(f"{path}: catalog ids do not match model ids")

    embeddings = EmbeddingTable(
        np.asarray(arrays["emb"], dtype=np.float32), FUSED, meta.get("embedding_meta", {})
    )
    if embedding_content_hash(embeddings) != meta.get("embedding_hash"):
        raise HashMismatch(f"{path}: embedding vectors do not match their recorded hash")

    bundle_meta = {k: v for k, v in meta.items() if k != "catalog"}
    return EngineBundle(catalog, embeddings, model, bundle_meta)
