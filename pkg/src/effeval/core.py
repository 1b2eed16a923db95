"""Shared domain types: embeddings, weighted documents, segments, scores.

All types are immutable after construction and safe to share across workers.
Validation happens eagerly so that downstream numerics never see NaN, shape
mismatches or zero-mass documents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyDocumentError,
    NonFiniteValueError,
)

_LANG_PAIR_RE = re.compile(r"^[a-z]{2,3}-[a-z]{2,3}$")

#: Normalized weights must sum to 1 within this tolerance.
WEIGHT_SUM_TOL = 1e-12


def _as_float_matrix(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{what}: expected a 2-D matrix, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise NonFiniteValueError(f"{what}: contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Per-segment token embeddings: one row per token, `dim` columns.

    Values are stored as a read-only float64 array. All entries are finite;
    construction rejects NaN/Inf.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = _as_float_matrix(self.values, "EmbeddingMatrix")
        if arr.shape[0] > 0 and arr.shape[1] < 1:
            raise DimensionMismatchError("EmbeddingMatrix: dim must be >= 1")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def take_rows(self, index: np.ndarray) -> "EmbeddingMatrix":
        return EmbeddingMatrix(self.values[index])


@dataclass(frozen=True)
class WeightedDocument:
    """Tokens plus a nonnegative mass per token and their embedding rows.

    Use :func:`validate_document` to obtain the canonical form consumed by
    the transport distances: zero-weight tokens dropped, weights summing
    to one.
    """

    tokens: tuple
    weights: np.ndarray
    embedding: EmbeddingMatrix

    def __post_init__(self):
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if w.size and not np.isfinite(w).all():
            raise NonFiniteValueError("WeightedDocument: weights contain NaN or Inf")
        if (w < 0).any():
            raise NonFiniteValueError("WeightedDocument: weights must be nonnegative")
        w = np.ascontiguousarray(w)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if len(tokens) != w.size:
            raise DimensionMismatchError(
                f"WeightedDocument: {len(tokens)} tokens but {w.size} weights"
            )
        if self.embedding.rows != len(tokens):
            raise DimensionMismatchError(
                f"WeightedDocument: {len(tokens)} tokens but "
                f"{self.embedding.rows} embedding rows"
            )

    def __len__(self) -> int:
        return len(self.tokens)


def validate_document(doc: WeightedDocument) -> WeightedDocument:
    """Return the canonical form of `doc`: positive-mass tokens, weights sum 1.

    Zero-weight tokens and their embedding rows are removed before any
    transport computation; transport from zero mass contributes zero cost, so
    distances are preserved exactly. Idempotent: validating a validated
    document returns an equal document.

    Raises EmptyDocumentError if nothing with positive weight remains.
    """
    tokens = doc.tokens
    weights = doc.weights
    embedding = doc.embedding
    changed = False
    # renormalizing can underflow subnormal weights to zero, so drop and
    # renormalize until every surviving weight is strictly positive
    for _ in range(len(doc.tokens) + 4):
        keep = weights > 0.0
        if not keep.any():
            raise EmptyDocumentError("document has no token with positive weight")
        if not keep.all():
            idx = np.flatnonzero(keep)
            tokens = tuple(tokens[i] for i in idx)
            weights = weights[idx]
            embedding = embedding.take_rows(idx)
            changed = True
        total = float(weights.sum())
        if abs(total - 1.0) <= WEIGHT_SUM_TOL:
            return WeightedDocument(tokens, weights, embedding) if changed else doc
        weights = weights / total
        changed = True
    raise NonFiniteValueError("weight normalization did not converge")


def document(tokens: Sequence[str], weights, embedding) -> WeightedDocument:
    """Build and validate a WeightedDocument in one step."""
    emb = embedding if isinstance(embedding, EmbeddingMatrix) else EmbeddingMatrix(np.asarray(embedding, dtype=np.float64))
    return validate_document(WeightedDocument(tuple(tokens), weights, emb))


def uniform_document(tokens: Sequence[str], embedding) -> WeightedDocument:
    """Document with equal mass on every token."""
    n = len(tokens)
    if n == 0:
        raise EmptyDocumentError("document has no tokens")
    return document(tokens, np.full(n, 1.0 / n), embedding)


@dataclass(frozen=True)
class SegmentRecord:
    """One evaluation unit: source, hypothesis and optional reference/score."""

    lang_pair: str
    system_id: str
    source: str
    hypothesis: str
    reference: str | None = None
    human_score: float | None = None

    def __post_init__(self):
        if not _LANG_PAIR_RE.match(self.lang_pair):
            raise ValueError(
                f"lang_pair {self.lang_pair!r} is not two lowercase ISO codes joined by '-'"
            )
        if self.human_score is not None and not np.isfinite(self.human_score):
            raise NonFiniteValueError("human_score must be finite")


@dataclass(frozen=True)
class MetricScore:
    """A named metric value with optional named sub-values (P/R/F1 etc.)."""

    metric_id: str
    value: float
    subvalues: Mapping[str, float] | None = field(default=None)

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise NonFiniteValueError(f"{self.metric_id}: metric value is not finite")
