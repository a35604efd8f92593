"""Command-line interface.

Pipeline: ``ingest`` turns raw CSVs into a canonical data directory,
``train-embeddings`` fits the POI graph embeddings, ``train-itrnet`` fits
the sequence model and writes a self-contained bundle, and ``recommend`` /
``evaluate`` / ``serve`` consume that bundle or data directory.

Exit codes: 0 success, 2 usage error, 3 data/artifact error, 4 training
divergence.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import dataset as ds
from .bundle import build_bundle, load_bundle, save_bundle
from .constraints_io import load_constraints
from .errors import AltTripError, BindFailure, NonFiniteLoss
from .itrnet import ITRConfig, train_itrnet
from .metrics import evaluate_folds
from .planner import Query, recommend_topk
from .poigraph import (
    category_config,
    distance_config,
    embed_catalog,
    load_embeddings,
    save_embeddings,
)
from .sampler import SamplerConfig

DATA_FILES = ("pois.csv", "routes.csv", "folds.json", "manifest.json")


def _engine_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NonFiniteLoss as exc:
            click.echo(f"error: training diverged: {exc}", err=True)
            sys.exit(4)
        except (AltTripError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)

    return wrapper


@click.group()
def main():
    """Itinerary recommendation engine."""


@main.command()
@click.option("--pois", "pois_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--visits", "visits_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--gap-hours", default=8.0, show_default=True)
@click.option("--folds", "n_folds", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@_engine_errors
def ingest(pois_path, visits_path, out_dir, gap_hours, n_folds, seed):
    """Build the canonical data directory from raw POI and visit CSVs."""
    catalog = ds.load_catalog(pois_path)
    visits = ds.load_visits(visits_path)
    routes = ds.build_routes(visits, catalog, gap_hours=gap_hours)
    folds = ds.split_folds(routes, n_folds=n_folds, seed=seed)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds.save_catalog(catalog, out / "pois.csv")
    ds.save_routes(routes, out / "routes.csv")
    ds.save_folds(folds, out / "folds.json")
    counts = ds.dataset_counts(catalog, routes)
    manifest = {
        **counts,
        "gap_hours": gap_hours,
        "n_folds": n_folds,
        "seed": seed,
        "catalog_hash": ds.catalog_hash(catalog),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    click.echo(
        f"ingested {counts['n_pois']} POIs, {counts['n_routes']} routes, "
        f"{counts['n_pairs']} endpoint pairs -> {out}"
    )


def _load_data_dir(data_dir: Path):
    catalog = ds.load_catalog(data_dir / "pois.csv")
    routes = ds.load_routes(data_dir / "routes.csv")
    folds = ds.load_folds(data_dir / "folds.json")
    return catalog, routes, folds


@main.command("train-embeddings")
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--cat-dim", default=12, show_default=True)
@click.option("--cat-lr", default=0.05, show_default=True)
@click.option("--dist-dim", default=24, show_default=True)
@click.option("--dist-lr", default=0.01, show_default=True)
@click.option("--epochs", default=300, show_default=True)
@click.option("--seed", default=0, show_default=True)
@_engine_errors
def train_embeddings(data_dir, out_path, cat_dim, cat_lr, dist_dim, dist_lr, epochs, seed):
    """Fit category and distance graph embeddings and fuse them."""
    catalog = ds.load_catalog(Path(data_dir) / "pois.csv")
    fused = embed_catalog(
        catalog,
        category_config(embed_dim=cat_dim, lr=cat_lr, epochs=epochs, seed=seed),
        distance_config(embed_dim=dist_dim, lr=dist_lr, epochs=epochs, seed=seed),
    )
    digest = save_embeddings(fused, out_path, ds.catalog_hash(catalog))
    click.echo(f"embeddings {fused.n}x{fused.dim} -> {out_path} ({digest[:12]})")


@main.command("train-itrnet")
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--emb", "emb_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--hidden", default=32, show_default=True)
@click.option("--epochs", default=100, show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--lr", default=0.001, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--name", default=None, help="Dataset name stored in the bundle.")
@_engine_errors
def train_itrnet_cmd(data_dir, emb_path, out_path, hidden, epochs, batch_size, lr, seed, name):
    """Train the sequence model and write a self-contained bundle."""
    data_dir = Path(data_dir)
    catalog, routes, _folds = _load_data_dir(data_dir)
    embeddings, emb_catalog_hash = load_embeddings(emb_path)
    if emb_catalog_hash != ds.catalog_hash(catalog):
        from .errors import HashMismatch

        raise HashMismatch(
            f"{emb_path} was trained on a different catalog than {data_dir}"
        )
    config = ITRConfig(
        hidden_size=hidden, epochs=epochs, batch_size=batch_size, lr=lr, seed=seed
    )
    model = train_itrnet(routes, embeddings, catalog, config)
    bundle = build_bundle(
        catalog, embeddings, model, dataset_name=name or data_dir.name
    )
    digest = save_bundle(bundle, out_path)
    click.echo(
        f"model over {model.n} POIs (l_max {model.l_max}) -> {out_path} ({digest[:12]})"
    )


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--s", "s", required=True, type=int, help="Source POI id.")
@click.option("--d", "d", required=True, type=int, help="Destination POI id.")
@click.option("--k", default=3, show_default=True)
@click.option("-L", "--length", "length", default=None, type=int, help="Fixed itinerary length.")
@click.option("--method", type=click.Choice(["lstm", "sampler"]), default="lstm", show_default=True)
@click.option("--constraints", "constraints_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=None, type=int)
@click.option("--iterations", default=None, type=int, help="Sampler iteration budget.")
@click.option("--plot", "plot_path", default=None, type=click.Path(dir_okay=False))
@click.option("--json", "json_out", is_flag=True, help="Print the result as JSON.")
@_engine_errors
def recommend(bundle_path, s, d, k, length, method, constraints_path, seed, iterations, plot_path, json_out):
    """Answer one query from a trained bundle."""
    bundle = load_bundle(bundle_path)
    constraints = None
    if constraints_path is not None:
        constraints = load_constraints(constraints_path, bundle.catalog)
    recset = recommend_topk(
        bundle.model,
        Query(s=s, d=d, k=k, L=length),
        method=method,
        constraints=constraints,
        seed=seed,
        sampler_config=SamplerConfig(iterations=iterations),
    )
    if json_out:
        click.echo(json.dumps({
            "seed": recset.seed,
            "method": method,
            "itineraries": [
                {"pois": list(it.poi_ids), "perplexity": it.perplexity,
                 "prominent": it.prominent}
                for it in recset.itineraries
            ],
        }, indent=1))
    else:
        for i, it in enumerate(recset.itineraries, start=1):
            path_str = " -> ".join(str(p) for p in it.poi_ids)
            click.echo(
                f"#{i} [{path_str}] prominent={it.prominent} "
                f"perplexity={it.perplexity:.4f}"
            )
        if recset.seed is not None:
            click.echo(f"seed: {recset.seed}")
    if plot_path is not None:
        from .figures import plot_itineraries

        plot_itineraries(bundle.catalog, recset.itineraries, plot_path)
        click.echo(f"map -> {plot_path}")


def _parse_alphas(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise click.UsageError("--alphas range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise click.UsageError("--alphas step must be positive")
        out = []
        a = start
        while a <= stop + 1e-9:
            out.append(round(a, 10))
            a += step
        return out
    return [float(p) for p in text.split(",") if p.strip()]


@main.command()
@click.option("--bundle-dir", "bundle_dir", default=None, type=click.Path(exists=True, file_okay=False),
              help="Directory holding the ingested data files (and emb.bin, trained on demand).")
@click.option("--data", "data_dir", default=None, type=click.Path(exists=True, file_okay=False))
@click.option("--emb", "emb_path", default=None, type=click.Path(dir_okay=False))
@click.option("--k", default=3, show_default=True)
@click.option("-L", "--length", "length", default=5, show_default=True, type=int)
@click.option("--method", type=click.Choice(["lstm", "sampler"]), default="lstm", show_default=True)
@click.option("--alphas", default="0.5", show_default=True,
              help="Comma list or start:stop:step range of popularity weights.")
@click.option("--epochs", default=100, show_default=True, help="Sequence-model epochs per fold.")
@click.option("--seed", default=0, show_default=True)
@click.option("--max-queries", default=None, type=int, help="Cap queries per fold (smoke runs).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--figures/--no-figures", "render_figures", default=True, show_default=True)
@_engine_errors
def evaluate(bundle_dir, data_dir, emb_path, k, length, method, alphas, epochs, seed,
             max_queries, out_path, render_figures):
    """Cross-validated evaluation; writes CSV + JSON and renders figures."""
    if bundle_dir is None and data_dir is None:
        raise click.UsageError("pass --bundle-dir or --data")
    data = Path(data_dir) if data_dir else Path(bundle_dir)
    catalog, routes, folds = _load_data_dir(data)

    emb_file = Path(emb_path) if emb_path else (Path(bundle_dir or data) / "emb.bin")
    if emb_file.exists():
        embeddings, emb_catalog_hash = load_embeddings(emb_file)
        if emb_catalog_hash != ds.catalog_hash(catalog):
            from .errors import HashMismatch

            raise HashMismatch(f"{emb_file} was trained on a different catalog")
    else:
        click.echo(f"no embeddings at {emb_file}, training them now")
        embeddings = embed_catalog(catalog)
        save_embeddings(embeddings, emb_file, ds.catalog_hash(catalog))

    report = evaluate_folds(
        catalog, routes, folds, embeddings,
        k=k, L=length, method=method, alphas=_parse_alphas(alphas),
        itr_config=ITRConfig(epochs=epochs, seed=seed),
        seed=seed, max_queries_per_fold=max_queries,
        progress=lambda msg: click.echo(msg, err=True),
    )
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    report.write_csv(out)
    json_path = out.with_suffix(".json")
    report.write_json(json_path)
    click.echo(f"report -> {out} and {json_path}")
    if render_figures:
        from .figures import render_report_figures

        for fig_path in render_report_figures(report, out.parent, stem=out.stem):
            click.echo(f"figure -> {fig_path}")
    overall = report.overall
    summary = ", ".join(
        f"{key}={overall[key]:.4f}"
        for key in ("f1", "pairs_f1", "diversity")
        if overall.get(key) is not None
    )
    click.echo(f"overall: {summary}")


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--bind", default="127.0.0.1:8080", show_default=True)
@_engine_errors
def serve(bundle_path, bind):
    """Serve the HTTP API for a trained bundle."""
    import uvicorn

    from .service import create_app

    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.UsageError(f"--bind must look like HOST:PORT, got {bind!r}")
    app = create_app(load_bundle(bundle_path))
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    except OSError as exc:
        raise BindFailure(f"cannot bind {bind}: {exc}") from None


if __name__ == "__main__":
    main()
