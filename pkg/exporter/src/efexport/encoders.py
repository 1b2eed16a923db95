"""Local transformer encoders in two size tiers.

The engine downstream is encoder-agnostic, so the exporter owns all encoder
choices. Tiers are real transformer architectures built locally with
deterministically seeded weights; no checkpoint download is required, and
the same job always produces the same bytes. Tokenization is whitespace
splitting with a stable hash into the embedding vocabulary, recorded in the
sidecar manifest.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

TOKENIZER_ID = "whitespace-hash-v1"
LAYER_AGGREGATION = "last-hidden-layer"

_VOCAB_SIZE = 8192
_MAX_TOKENS = 256
_PAD_ID = 0


@dataclass(frozen=True)
class EncoderTier:
    name: str
    hidden_size: int
    layers: int
    heads: int
    intermediate: int


TIERS = {
    "small": EncoderTier("small", hidden_size=128, layers=2, heads=2, intermediate=256),
    "base": EncoderTier("base", hidden_size=512, layers=8, heads=8, intermediate=1024),
}


class EncoderUnavailableError(RuntimeError):
    """Requested encoder is not in the local registry."""


class TokenizationError(RuntimeError):
    """A segment produced no tokens; the export job aborts."""


def tokenize(text: str) -> list[str]:
    return text.split()


def _token_id(token: str) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return 1 + int.from_bytes(digest[:8], "little") % (_VOCAB_SIZE - 1)


class SeededTransformerEncoder:
    """BERT-style encoder with seeded random weights.

    Contextual in the architectural sense (full self-attention over the
    segment); the weights are deterministic functions of (tier, seed), so
    repeated exports are byte-identical.
    """

    def __init__(self, tier: str, seed: int = 0):
        if tier not in TIERS:
            raise EncoderUnavailableError(
                f"unknown encoder tier {tier!r}; available: {sorted(TIERS)}"
            )
        import torch
        from transformers import BertConfig, BertModel

        spec = TIERS[tier]
        config = BertConfig(
            vocab_size=_VOCAB_SIZE,
            hidden_size=spec.hidden_size,
            num_hidden_layers=spec.layers,
            num_attention_heads=spec.heads,
            intermediate_size=spec.intermediate,
            max_position_embeddings=_MAX_TOKENS,
        )
        torch.manual_seed(seed)
        self._torch = torch
        self.tier = spec
        self.model = BertModel(config)
        self.model.eval()

    @property
    def dim(self) -> int:
        return self.tier.hidden_size

    def encode_batch(self, token_lists: list[list[str]]) -> list[np.ndarray]:
        """Last-hidden-layer vectors for each token list, float32 rows."""
        torch = self._torch
        for idx, toks in enumerate(token_lists):
            if len(toks) == 0:
                raise TokenizationError(f"segment {idx} in batch has zero tokens")
            if len(toks) > _MAX_TOKENS:
                raise TokenizationError(
                    f"segment {idx} has {len(toks)} tokens; encoder limit is {_MAX_TOKENS}"
                )
        width = max(len(t) for t in token_lists)
        ids = torch.full((len(token_lists), width), _PAD_ID, dtype=torch.long)
        mask = torch.zeros((len(token_lists), width), dtype=torch.long)
        for row, toks in enumerate(token_lists):
            for col, tok in enumerate(toks):
                ids[row, col] = _token_id(tok)
                mask[row, col] = 1
        with torch.no_grad():
            hidden = self.model(input_ids=ids, attention_mask=mask).last_hidden_state
        out = []
        for row, toks in enumerate(token_lists):
            out.append(hidden[row, : len(toks)].numpy().astype(np.float32))
        return out
