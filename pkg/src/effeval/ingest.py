"""Bit-exact file formats binding the engine to exported artifacts.

Embedding container ("EFEV", version 1), all integers little-endian:

    header   magic 4s = b"EFEV" | version u16 | flags u16 (reserved, 0)
             | dim u32 | segment_count u32
    payload  per segment:
               token_count u32
               per token: byte_length u16, UTF-8 bytes
               matrix: token_count * dim float32 little-endian, row-major
    trailer  crc32 u32 of the payload bytes (IEEE polynomial, zlib.crc32)

Remap matrix ("EFRM", version 1):

    header   magic 4s = b"EFRM" | version u16 | flags u16 (bit 0: has bias)
             | dim u32
    payload  dim * dim float32 LE row-major projection,
             then dim float32 LE bias when flagged
    trailer  crc32 u32 of the payload bytes

Text sidecars: segments are 6-column TSV (lang_pair, system_id, source,
hypothesis, reference, human_score; empty field = absent; '#' lines are
comments), IDF statistics are a JSON object {"N": int, "df": {token: df}},
language-model penalties are 2-column TSV (segment_key, score), and the
manifest is a JSON object tying a container to its segments file.

Writers emit canonical bytes: writing what a reader produced reproduces the
file byte for byte.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .core import EmbeddingMatrix, SegmentRecord
from .errors import (
    AlignmentError,
    BadMagicError,
    BadScoreError,
    ColumnCountError,
    CrcMismatchError,
    DimensionMismatchError,
    IdfFormatError,
    LmFormatError,
    RemapFormatError,
    TruncatedPayloadError,
    VersionUnsupportedError,
)
from .metrics import IdfTable, LmPenalty, RemapMatrix

CONTAINER_MAGIC = b"EFEV"
REMAP_MAGIC = b"EFRM"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHHII")
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")


@dataclass(frozen=True)
class ContainerSegment:
    """Tokens and their embedding rows for one segment."""

    tokens: tuple
    embedding: EmbeddingMatrix


# ---------------------------------------------------------------------------
# EFEV embedding containers
# ---------------------------------------------------------------------------


class _PayloadReader:
    """Sequential reader that tracks a CRC over everything it returns."""

    def __init__(self, fh):
        self._fh = fh
        self.crc = 0

    def read(self, n: int) -> bytes:
        buf = self._fh.read(n)
        if len(buf) != n:
            raise TruncatedPayloadError(
                f"expected {n} payload bytes, got {len(buf)}"
            )
        self.crc = zlib.crc32(buf, self.crc)
        return buf


def iter_container(path) -> Iterator[ContainerSegment]:
    """Yield segments one at a time; the CRC is verified once the final
    segment has been consumed, so exhaust the iterator to fully validate."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise TruncatedPayloadError("file shorter than the container header")
        magic, version, flags, dim, seg_count = _HEADER.unpack(head)
        if magic != CONTAINER_MAGIC:
            raise BadMagicError(f"expected {CONTAINER_MAGIC!r}, found {magic!r}")
        if version != FORMAT_VERSION:
            raise VersionUnsupportedError(f"container version {version} not supported")
        if flags != 0:
            raise VersionUnsupportedError(f"reserved container flags set: {flags:#06x}")
        if dim < 1:
            raise DimensionMismatchError("container declares dim < 1")
        payload = _PayloadReader(fh)
        for _ in range(seg_count):
            (token_count,) = _U32.unpack(payload.read(_U32.size))
            tokens = []
            for _ in range(token_count):
                (blen,) = _U16.unpack(payload.read(_U16.size))
                tokens.append(payload.read(blen).decode("utf-8"))
            raw = payload.read(token_count * dim * 4)
            matrix = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(token_count, dim)
            yield ContainerSegment(tuple(tokens), EmbeddingMatrix(matrix))
        tail = fh.read(4)
        if len(tail) != 4:
            raise TruncatedPayloadError("container is missing its trailing CRC32")
        (stored,) = _U32.unpack(tail)
        if stored != payload.crc:
            raise CrcMismatchError(
                f"payload CRC32 {payload.crc:#010x} does not match stored {stored:#010x}"
            )
        if fh.read(1):
            raise TruncatedPayloadError("trailing bytes after the container CRC")


def read_container(path) -> list[EmbeddingMatrix]:
    """All embedding matrices of a container, fully validated (incl. CRC)."""
    return [seg.embedding for seg in iter_container(path)]


def read_container_segments(path) -> list[ContainerSegment]:
    """All (tokens, embedding) segments of a container, fully validated."""
    return list(iter_container(path))


def container_dim(path) -> int:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise TruncatedPayloadError("file shorter than the container header")
    magic, version, _, dim, _ = _HEADER.unpack(head)
    if magic != CONTAINER_MAGIC:
        raise BadMagicError(f"expected {CONTAINER_MAGIC!r}, found {magic!r}")
    if version != FORMAT_VERSION:
        raise VersionUnsupportedError(f"container version {version} not supported")
    return dim


def write_container(matrices: Sequence, tokens: Sequence[Sequence[str]], dim: int, path) -> None:
    """Serialize segments to an EFEV container; deterministic bytes."""
    if dim < 1:
        raise DimensionMismatchError("container dim must be >= 1")
    if len(matrices) != len(tokens):
        raise DimensionMismatchError(
            f"{len(matrices)} matrices but {len(tokens)} token lists"
        )
    payload = bytearray()
    for mat, toks in zip(matrices, tokens):
        arr = mat.values if isinstance(mat, EmbeddingMatrix) else np.asarray(mat, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != dim:
            if not (arr.size == 0 and len(toks) == 0):
                raise DimensionMismatchError(
                    f"segment matrix shape {arr.shape} does not match dim {dim}"
                )
            arr = arr.reshape(0, dim)
        if arr.shape[0] != len(toks):
            raise DimensionMismatchError(
                f"segment has {len(toks)} tokens but {arr.shape[0]} embedding rows"
            )
        payload += _U32.pack(arr.shape[0])
        for tok in toks:
            raw = tok.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise ValueError(f"token longer than 65535 UTF-8 bytes: {tok[:32]!r}...")
            payload += _U16.pack(len(raw))
            payload += raw
        payload += arr.astype("<f4").tobytes(order="C")
    blob = (
        _HEADER.pack(CONTAINER_MAGIC, FORMAT_VERSION, 0, dim, len(matrices))
        + bytes(payload)
        + _U32.pack(zlib.crc32(bytes(payload)))
    )
    Path(path).write_bytes(blob)


def write_container_segments(segments: Sequence[ContainerSegment], dim: int, path) -> None:
    write_container([s.embedding for s in segments], [s.tokens for s in segments], dim, path)


# ---------------------------------------------------------------------------
# EFRM remap matrices
# ---------------------------------------------------------------------------


def read_remap(path) -> RemapMatrix:
    data = Path(path).read_bytes()
    head = struct.Struct("<4sHHI")
    if len(data) < head.size:
        raise TruncatedPayloadError("file shorter than the remap header")
    magic, version, flags, dim = head.unpack_from(data, 0)
    if magic != REMAP_MAGIC:
        raise BadMagicError(f"expected {REMAP_MAGIC!r}, found {magic!r}")
    if version != FORMAT_VERSION:
        raise VersionUnsupportedError(f"remap version {version} not supported")
    if dim < 1:
        raise RemapFormatError("remap declares dim < 1")
    has_bias = bool(flags & 1)
    if flags & ~1:
        raise VersionUnsupportedError(f"reserved remap flags set: {flags:#06x}")
    need = dim * dim * 4 + (dim * 4 if has_bias else 0)
    payload = data[head.size : head.size + need]
    if len(payload) != need:
        raise TruncatedPayloadError(f"expected {need} remap payload bytes, got {len(payload)}")
    tail = data[head.size + need :]
    if len(tail) != 4:
        raise TruncatedPayloadError("remap file is missing its trailing CRC32")
    (stored,) = _U32.unpack(tail)
    actual = zlib.crc32(payload)
    if stored != actual:
        raise CrcMismatchError(
            f"payload CRC32 {actual:#010x} does not match stored {stored:#010x}"
        )
    proj = np.frombuffer(payload[: dim * dim * 4], dtype="<f4").astype(np.float64).reshape(dim, dim)
    bias = None
    if has_bias:
        bias = np.frombuffer(payload[dim * dim * 4 :], dtype="<f4").astype(np.float64)
    return RemapMatrix(proj, bias)


def write_remap(remap: RemapMatrix, path) -> None:
    dim = remap.dim
    payload = remap.projection.astype("<f4").tobytes(order="C")
    flags = 0
    if remap.bias is not None:
        flags |= 1
        payload += remap.bias.astype("<f4").tobytes()
    blob = (
        struct.pack("<4sHHI", REMAP_MAGIC, FORMAT_VERSION, flags, dim)
        + payload
        + _U32.pack(zlib.crc32(payload))
    )
    Path(path).write_bytes(blob)


# ---------------------------------------------------------------------------
# segments files
# ---------------------------------------------------------------------------


def read_segments(path) -> list[SegmentRecord]:
    records = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 6:
            raise ColumnCountError(f"{path}:{lineno}: expected 6 columns, got {len(cols)}")
        lang_pair, system_id, source, hypothesis, reference, score = cols
        if score == "":
            human = None
        else:
            try:
                human = float(score)
            except ValueError:
                raise BadScoreError(f"{path}:{lineno}: bad human score {score!r}") from None
        records.append(
            SegmentRecord(
                lang_pair=lang_pair,
                system_id=system_id,
                source=source,
                hypothesis=hypothesis,
                reference=reference if reference != "" else None,
                human_score=human,
            )
        )
    return records


def write_segments(records: Sequence[SegmentRecord], path) -> None:
    lines = []
    for rec in records:
        fields = [
            rec.lang_pair,
            rec.system_id,
            rec.source,
            rec.hypothesis,
            rec.reference or "",
            "" if rec.human_score is None else repr(float(rec.human_score)),
        ]
        for f in fields:
            if "\t" in f or "\n" in f:
                raise ValueError("segment fields must not contain tabs or newlines")
        lines.append("\t".join(fields))
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


# ---------------------------------------------------------------------------
# IDF tables, LM penalties, manifests
# ---------------------------------------------------------------------------


def read_idf(path) -> IdfTable:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IdfFormatError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or set(obj) != {"N", "df"}:
        raise IdfFormatError(f"{path}: expected a JSON object with keys N and df")
    n = obj["N"]
    df = obj["df"]
    if not isinstance(n, int) or n < 1:
        raise IdfFormatError(f"{path}: N must be a positive integer")
    if not isinstance(df, dict) or not all(
        isinstance(k, str) and isinstance(v, int) and v >= 0 for k, v in df.items()
    ):
        raise IdfFormatError(f"{path}: df must map tokens to nonnegative integers")
    return IdfTable(n, df)


def write_idf(table: IdfTable, path) -> None:
    obj = {"N": table.doc_count, "df": dict(sorted(table.df.items()))}
    Path(path).write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def read_lm_penalties(path) -> dict[str, LmPenalty]:
    out: dict[str, LmPenalty] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise LmFormatError(f"{path}:{lineno}: expected 2 columns, got {len(cols)}")
        key, score = cols
        try:
            out[key] = LmPenalty(float(score))
        except ValueError:
            raise LmFormatError(f"{path}:{lineno}: bad score {score!r}") from None
    return out


def write_lm_penalties(penalties: Mapping[str, LmPenalty], path) -> None:
    lines = []
    for key, pen in penalties.items():
        if "\t" in key or "\n" in key:
            raise ValueError("penalty keys must not contain tabs or newlines")
        lines.append(f"{key}\t{repr(float(pen.score))}")
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


@dataclass(frozen=True)
class SidecarManifest:
    """Provenance sidecar linking a container to its segments file."""

    encoder: str
    layer_aggregation: str
    tokenizer: str
    created_at: str
    alignment: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "alignment", tuple(int(i) for i in self.alignment))


def read_manifest(path) -> SidecarManifest:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    required = {"encoder", "layer_aggregation", "tokenizer", "created_at", "alignment"}
    if not isinstance(obj, dict) or not required.issubset(obj):
        raise IdfFormatError(f"{path}: manifest must be a JSON object with keys {sorted(required)}")
    return SidecarManifest(
        encoder=obj["encoder"],
        layer_aggregation=obj["layer_aggregation"],
        tokenizer=obj["tokenizer"],
        created_at=obj["created_at"],
        alignment=obj["alignment"],
    )


def write_manifest(manifest: SidecarManifest, path) -> None:
    obj = {
        "alignment": list(manifest.alignment),
        "created_at": manifest.created_at,
        "encoder": manifest.encoder,
        "layer_aggregation": manifest.layer_aggregation,
        "tokenizer": manifest.tokenizer,
    }
    Path(path).write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def check_alignment(container_segments: int, segment_records: int, manifest: SidecarManifest | None = None) -> None:
    """Refuse to score misaligned inputs; truncation would corrupt pairing."""
    if container_segments != segment_records:
        raise AlignmentError(
            f"container has {container_segments} segments but segments file has {segment_records}"
        )
    if manifest is not None and len(manifest.alignment) not in (0, container_segments):
        raise AlignmentError(
            f"manifest aligns {len(manifest.alignment)} segments but container has {container_segments}"
        )
