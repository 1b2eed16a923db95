"""Producer-side serializers for the engine's wire formats.

Implements the byte layouts independently of the consumer package; the
interop tests validate every artifact through the consumer's own readers
and CLI. All integers little-endian, floats float32 little-endian, text
UTF-8, payloads CRC32-trailed.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

_CONTAINER_HEADER = struct.Struct("<4sHHII")
_REMAP_HEADER = struct.Struct("<4sHHI")
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")


def write_container(matrices, token_lists, dim: int, path) -> None:
    """EFEV container: header, per-segment token table + float32 rows, CRC."""
    if dim < 1:
        raise ValueError("container dim must be >= 1")
    if len(matrices) != len(token_lists):
        raise ValueError("one token list per matrix required")
    payload = bytearray()
    for mat, tokens in zip(matrices, token_lists):
        arr = np.ascontiguousarray(np.asarray(mat, dtype=np.float32))
        if arr.ndim != 2 or arr.shape != (len(tokens), dim):
            raise ValueError(f"matrix shape {arr.shape} does not match ({len(tokens)}, {dim})")
        payload += _U32.pack(len(tokens))
        for tok in tokens:
            raw = tok.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise ValueError("token longer than 65535 UTF-8 bytes")
            payload += _U16.pack(len(raw)) + raw
        payload += arr.tobytes(order="C")
    blob = (
        _CONTAINER_HEADER.pack(b"EFEV", 1, 0, dim, len(matrices))
        + bytes(payload)
        + _U32.pack(zlib.crc32(bytes(payload)))
    )
    Path(path).write_bytes(blob)


def write_remap(projection, bias, path) -> None:
    """EFRM remap: square float32 projection, optional bias, CRC."""
    proj = np.ascontiguousarray(np.asarray(projection, dtype=np.float32))
    if proj.ndim != 2 or proj.shape[0] != proj.shape[1]:
        raise ValueError(f"projection must be square, got {proj.shape}")
    flags = 0
    payload = proj.tobytes(order="C")
    if bias is not None:
        b = np.ascontiguousarray(np.asarray(bias, dtype=np.float32)).reshape(-1)
        if b.size != proj.shape[0]:
            raise ValueError("bias length must equal the projection dim")
        flags |= 1
        payload += b.tobytes()
    blob = (
        _REMAP_HEADER.pack(b"EFRM", 1, flags, proj.shape[0])
        + payload
        + _U32.pack(zlib.crc32(payload))
    )
    Path(path).write_bytes(blob)


def write_identity_remap(dim: int, path) -> None:
    write_remap(np.eye(dim), None, path)


def write_idf(doc_count: int, df: dict, path) -> None:
    obj = {"N": int(doc_count), "df": {k: int(v) for k, v in sorted(df.items())}}
    Path(path).write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def write_lm_penalties(scores: dict, path) -> None:
    lines = [f"{key}\t{repr(float(value))}" for key, value in scores.items()]
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def write_manifest(encoder, layer_aggregation, tokenizer, created_at, alignment, path) -> None:
    obj = {
        "alignment": [int(i) for i in alignment],
        "created_at": created_at,
        "encoder": encoder,
        "layer_aggregation": layer_aggregation,
        "tokenizer": tokenizer,
    }
    Path(path).write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def read_segments(path) -> list[dict]:
    """The 6-column segments TSV; comment lines start with '#'."""
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 6:
            raise ValueError(f"{path}:{lineno}: expected 6 columns, got {len(cols)}")
        records.append(
            {
                "lang_pair": cols[0],
                "system_id": cols[1],
                "source": cols[2],
                "hypothesis": cols[3],
                "reference": cols[4],
                "human_score": cols[5],
            }
        )
    return records
