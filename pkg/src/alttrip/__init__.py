"""Popularity- and diversity-aware itinerary recommendation engine."""

from .dataset import (
    POI,
    FoldAssignment,
    GroundTruthIndex,
    POICatalog,
    Route,
    Visit,
    build_routes,
    catalog_hash,
    dataset_counts,
    ground_truth_index,
    load_catalog,
    load_visits,
    split_folds,
)
from .poigraph import (
    AdjacencyMatrix,
    EmbeddingTable,
    GAEConfig,
    build_category_adjacency,
    build_distance_adjacency,
    category_config,
    distance_config,
    embed_catalog,
    fuse_embeddings,
    train_gae,
)
from .itrnet import (
    ITRConfig,
    ITRNetModel,
    backward_step_probs,
    combined_step_probs,
    forward_step_probs,
    route_perplexity,
    train_itrnet,
)
from .planner import (
    Itinerary,
    Query,
    RecommendationSet,
    generate_half,
    generate_itinerary_lstm,
    pick_prominent,
    recommend_topk,
    relevancy_scores,
)
from .sampler import (
    ConstraintSet,
    MoveOutcome,
    SamplerConfig,
    TimeWindows,
    apply_move,
    check_constraints,
    sample_itinerary,
    seed_itinerary,
)
from .metrics import (
    EvaluationReport,
    combined_score,
    diversity_score,
    evaluate_folds,
    f1_score,
    pairs_f1_score,
    popularity_score,
)
from .bundle import EngineBundle, build_bundle, load_bundle, save_bundle

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
