"""RaBAB reasoning engine: predicates, knowledge graph, embeddings, linear
resources, framebuffer intents, and path canonicalization."""

from .engine import (
    EMBEDDING_DIM,
    GRAPH_LEARNING_RATE,
    KnowledgeGraph,
    LinearResource,
    Predicate,
    RababEngine,
    cosine_similarity,
    embed,
)
from .paths import (
    BLACK,
    RED,
    DrawPixel,
    Framebuffer,
    Identity,
    PathOp,
    Translate,
    apply_path,
    canonicalize_path,
    interpret_intent,
    parse_intent,
    paths_equivalent,
)

__all__ = [
    "BLACK",
    "DrawPixel",
    "EMBEDDING_DIM",
    "Framebuffer",
    "GRAPH_LEARNING_RATE",
    "Identity",
    "KnowledgeGraph",
    "LinearResource",
    "PathOp",
    "Predicate",
    "RED",
    "RababEngine",
    "Translate",
    "apply_path",
    "canonicalize_path",
    "cosine_similarity",
    "embed",
    "interpret_intent",
    "parse_intent",
    "paths_equivalent",
]
