"""Export jobs: segments file in, engine-ready artifacts out."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone

from . import formats
from .encoders import (
    LAYER_AGGREGATION,
    TOKENIZER_ID,
    SeededTransformerEncoder,
    TokenizationError,
    tokenize,
)

logger = logging.getLogger(__name__)

SIDES = ("source", "hypothesis", "reference")


@dataclass(frozen=True)
class ExportJob:
    """One container export: which encoder, which text side, where to."""

    encoder: str
    segments_path: str
    side: str
    out_path: str
    manifest_path: str | None = None
    seed: int = 0
    batch_size: int = 16
    created_at: str | None = None  # None: stamp with the current UTC time

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")


def _timestamp(job: ExportJob) -> str:
    if job.created_at is not None:
        return job.created_at
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def export_embeddings(job: ExportJob) -> None:
    """Encode one side of the segments file into an EFEV container.

    Segments with zero tokens are flagged by index and abort the job; a
    container with silently missing rows would misalign every downstream
    score.
    """
    records = formats.read_segments(job.segments_path)
    token_lists = []
    for idx, rec in enumerate(records):
        toks = tokenize(rec[job.side])
        if not toks:
            raise TokenizationError(
                f"{job.segments_path} segment {idx}: {job.side} text has zero tokens"
            )
        token_lists.append(toks)

    encoder = SeededTransformerEncoder(job.encoder, seed=job.seed)
    matrices = []
    for start in range(0, len(token_lists), job.batch_size):
        matrices.extend(encoder.encode_batch(token_lists[start : start + job.batch_size]))
    formats.write_container(matrices, token_lists, encoder.dim, job.out_path)
    logger.info("wrote %s: %d segments, dim %d", job.out_path, len(matrices), encoder.dim)

    if job.manifest_path:
        formats.write_manifest(
            encoder=f"seeded-transformer/{job.encoder}",
            layer_aggregation=LAYER_AGGREGATION,
            tokenizer=TOKENIZER_ID,
            created_at=_timestamp(job),
            alignment=range(len(records)),
            path=job.manifest_path,
        )


def export_idf(segments_path, side: str, out_path) -> dict:
    """Document frequencies for one side: df(t) = number of segments whose
    text contains t at least once; N = segment count."""
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    records = formats.read_segments(segments_path)
    df = Counter()
    for rec in records:
        df.update(set(tokenize(rec[side])))
    formats.write_idf(len(records), dict(df), out_path)
    return {"N": len(records), "df": dict(df)}


def export_lm_penalties(segments_path, out_path) -> dict:
    """Fluency score per hypothesis from an add-one-smoothed unigram model
    fit on the hypothesis corpus itself.

    The score is the mean log-probability per token (the negative log of
    the perplexity), so higher means more fluent. Hypotheses with zero
    tokens are skipped with a warning; their keys are absent from the
    output and surface as hard errors downstream if scored.
    """
    records = formats.read_segments(segments_path)
    counts = Counter()
    total = 0
    for rec in records:
        toks = tokenize(rec["hypothesis"])
        counts.update(toks)
        total += len(toks)
    vocab = len(counts) + 1  # one slot for unseen tokens

    scores = {}
    for idx, rec in enumerate(records):
        toks = tokenize(rec["hypothesis"])
        if not toks:
            logger.warning("%s segment %d: empty hypothesis, no penalty emitted", segments_path, idx)
            continue
        logp = sum(math.log((counts[t] + 1) / (total + vocab)) for t in toks)
        scores[str(idx)] = logp / len(toks)
    formats.write_lm_penalties(scores, out_path)
    return scores


def export_identity_remap(dim: int, out_path) -> None:
    """Pass-through remap: projects every vector to itself."""
    formats.write_identity_remap(dim, out_path)
    logger.info("wrote identity remap dim %d to %s", dim, out_path)
