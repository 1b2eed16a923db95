"""Metric compositions over token embeddings.

Four families, all encoder-agnostic:

* greedy matching: precision/recall/F1 from each token's best cosine
  similarity on the other side;
* mover distance scoring: negated exact or approximate transport distance
  with IDF token masses;
* cross-lingual mover scoring: hypothesis against source, with an optional
  linear remapping of the source embedding space and an optional fluency
  penalty from a language model;
* sentence+word combination: mean of a sentence-level cosine and a word
  level score.

Scores are oriented so that larger means better. Correlation with human
judgments is invariant under positive affine maps, so negating a distance
is as good as any squashing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import EmbeddingMatrix, MetricScore, WeightedDocument, validate_document
from .errors import (
    DimensionMismatchError,
    NonFiniteValueError,
    ZeroVectorError,
)
from . import transport


@dataclass(frozen=True)
class IdfTable:
    """Inverse document frequencies with plus-one smoothing.

    idf(t) = ln((N + 1) / (df(t) + 1)); unknown tokens have df = 0 and get
    the maximal weight ln(N + 1).
    """

    doc_count: int
    df: Mapping[str, int]

    def __post_init__(self):
        if self.doc_count < 1:
            raise ValueError("IdfTable needs doc_count >= 1")
        for tok, c in self.df.items():
            if c < 0:
                raise ValueError(f"negative document frequency for {tok!r}")

    def idf(self, token: str) -> float:
        return math.log((self.doc_count + 1) / (self.df.get(token, 0) + 1))


def idf_weights(table: IdfTable, tokens: Sequence[str]) -> np.ndarray:
    """Per-token IDF masses; uniform fallback when every weight is zero."""
    w = np.array([table.idf(t) for t in tokens], dtype=np.float64)
    if w.size and not w.any():
        w = np.full(len(tokens), 1.0 / len(tokens))
    return w


def _reweight(doc: WeightedDocument, table: IdfTable) -> WeightedDocument:
    w = idf_weights(table, doc.tokens)
    return validate_document(WeightedDocument(doc.tokens, w, doc.embedding))


def greedy_match_score(hyp: WeightedDocument, ref: WeightedDocument) -> MetricScore:
    """Weighted greedy matching on cosine similarity.

    Recall averages, over reference tokens, the best similarity against any
    hypothesis token; precision mirrors it from the hypothesis side; F1 is
    their harmonic mean (0 when P + R == 0).
    """
    hyp = validate_document(hyp)
    ref = validate_document(ref)
    if hyp.embedding.dim != ref.embedding.dim:
        raise DimensionMismatchError(
            f"embedding dims differ: {hyp.embedding.dim} vs {ref.embedding.dim}"
        )
    nh = np.linalg.norm(hyp.embedding.values, axis=1)
    nr = np.linalg.norm(ref.embedding.values, axis=1)
    if (nh == 0.0).any() or (nr == 0.0).any():
        raise ZeroVectorError("greedy matching undefined for an all-zero embedding row")
    sim = (hyp.embedding.values / nh[:, None]) @ (ref.embedding.values / nr[:, None]).T
    precision = float(hyp.weights @ sim.max(axis=1))
    recall = float(ref.weights @ sim.max(axis=0))
    f1 = 0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
    return MetricScore(
        "greedy_match",
        f1,
        {"precision": precision, "recall": recall, "f1": f1},
    )


_DISTANCES = {
    "wmd": lambda a, b, measure: transport.wmd(a, b, measure)[0],
    "rwmd": transport.rwmd,
    "wcd": lambda a, b, measure: transport.wcd(a, b),
}


def moverscore_variant(
    hyp: WeightedDocument,
    ref: WeightedDocument,
    idf: IdfTable,
    approx: str = "wmd",
    measure: str = "euclidean",
) -> MetricScore:
    """Negated transport distance between IDF-weighted documents.

    `approx` selects the distance: exact ("wmd"), relaxed ("rwmd") or
    centroid ("wcd"). The chosen variant is recorded in the metric id.
    """
    if approx not in _DISTANCES:
        raise ValueError(f"unknown variant {approx!r}; expected wmd, rwmd or wcd")
    h = _reweight(hyp, idf)
    r = _reweight(ref, idf)
    dist = float(_DISTANCES[approx](h, r, measure))
    return MetricScore(f"moverscore[{approx}]", -dist, {"distance": dist})


def moverscore(hyp: WeightedDocument, ref: WeightedDocument, idf: IdfTable) -> MetricScore:
    """Exact-distance mover score: moverscore_variant with approx="wmd"."""
    return moverscore_variant(hyp, ref, idf, approx="wmd")


@dataclass(frozen=True)
class RemapMatrix:
    """Square linear projection (plus optional bias) realigning an
    embedding space; applied to the source side of cross-lingual scoring."""

    projection: np.ndarray
    bias: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.projection, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DimensionMismatchError(f"remap projection must be square, got {p.shape}")
        if not np.isfinite(p).all():
            raise NonFiniteValueError("remap projection contains NaN or Inf")
        object.__setattr__(self, "projection", p)
        if self.bias is not None:
            bv = np.asarray(self.bias, dtype=np.float64).reshape(-1)
            if bv.size != p.shape[0]:
                raise DimensionMismatchError(
                    f"remap bias length {bv.size} does not match dim {p.shape[0]}"
                )
            if not np.isfinite(bv).all():
                raise NonFiniteValueError("remap bias contains NaN or Inf")
            object.__setattr__(self, "bias", bv)

    @property
    def dim(self) -> int:
        return self.projection.shape[0]

    def apply(self, emb: EmbeddingMatrix) -> EmbeddingMatrix:
        if emb.dim != self.dim:
            raise DimensionMismatchError(
                f"remap dim {self.dim} does not match embedding dim {emb.dim}"
            )
        out = emb.values @ self.projection.T
        if self.bias is not None:
            out = out + self.bias
        return EmbeddingMatrix(out)


@dataclass(frozen=True)
class LmPenalty:
    """Precomputed language-model fluency score for one segment
    (higher = more fluent; scale unconstrained)."""

    score: float

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise NonFiniteValueError("LM penalty must be finite")


def xmoverscore(
    src: WeightedDocument,
    hyp: WeightedDocument,
    remap: RemapMatrix | None = None,
    lm: LmPenalty | None = None,
    w_dist: float = 1.0,
    w_lm: float = 0.1,
    approx: str = "wmd",
    measure: str = "euclidean",
) -> MetricScore:
    """Reference-free score of a hypothesis against the source text.

    value = w_dist * (-distance(remap(src), hyp)) + w_lm * lm. Without a
    remap this is direct mode; the remap, when present, projects the source
    embeddings only. The term weights are configurable and default to
    w_dist=1.0, w_lm=0.1.
    """
    if approx not in _DISTANCES:
        raise ValueError(f"unknown variant {approx!r}; expected wmd, rwmd or wcd")
    src = validate_document(src)
    hyp = validate_document(hyp)
    mode = "direct"
    if remap is not None:
        src = WeightedDocument(src.tokens, src.weights, remap.apply(src.embedding))
        mode = "remap"
    dist = float(_DISTANCES[approx](src, hyp, measure))
    lm_term = lm.score if lm is not None else 0.0
    value = w_dist * (-dist) + w_lm * lm_term
    return MetricScore(
        f"xmoverscore[{approx},{mode}]",
        value,
        {"distance": dist, "lm": lm_term},
    )


def sentsim(
    src_sent: np.ndarray,
    hyp_sent: np.ndarray,
    word_score: float,
    combine: str = "mean",
) -> MetricScore:
    """Mean of sentence-embedding cosine similarity and a word-level score."""
    if combine != "mean":
        raise ValueError(f"unknown combination rule {combine!r}")
    a = np.asarray(src_sent, dtype=np.float64).reshape(-1)
    b = np.asarray(hyp_sent, dtype=np.float64).reshape(-1)
    if a.size != b.size:
        raise DimensionMismatchError(f"sentence vector dims differ: {a.size} vs {b.size}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise NonFiniteValueError("sentence vectors contain NaN or Inf")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("sentence cosine undefined for a zero vector")
    cos = float(a @ b) / (na * nb)
    if not np.isfinite(word_score):
        raise NonFiniteValueError("word_score must be finite")
    value = (cos + float(word_score)) / 2.0
    return MetricScore("sentsim", value, {"sentence_cos": cos, "word": float(word_score)})
