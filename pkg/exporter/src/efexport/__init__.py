"""Embedding exporter for the effeval engine.

Turns segments files into the engine's wire artifacts: EFEV embedding
containers (from locally built, deterministically seeded transformer
encoders in two size tiers), IDF statistics, unigram LM fluency penalties,
and pass-through remap matrices.
"""

from .encoders import TIERS, EncoderTier, SeededTransformerEncoder, TokenizationError
from .exporter import (
    ExportJob,
    export_embeddings,
    export_identity_remap,
    export_idf,
    export_lm_penalties,
)

__version__ = "0.1.0"

__all__ = [
    "ExportJob",
    "EncoderTier",
    "SeededTransformerEncoder",
    "TIERS",
    "TokenizationError",
    "export_embeddings",
    "export_identity_remap",
    "export_idf",
    "export_lm_penalties",
]
