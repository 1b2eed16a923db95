"""Writing and reading the binary embedding containers.

The container format is the wire contract with embedding exporters:
little-endian, float32 rows, CRC-checked payload. This script writes a
container, reads it back, and shows what corruption detection looks like.
"""

import tempfile
from pathlib import Path

import numpy as np

from effeval import ingest
from effeval.errors import CrcMismatchError

rng = np.random.default_rng(0)
workdir = Path(tempfile.mkdtemp(prefix="effeval-demo-"))

tokens = [("hello", "world"), ("compact", "binary", "formats")]
matrices = [rng.standard_normal((len(t), 8)) for t in tokens]

path = workdir / "demo.efev"
ingest.write_container(matrices, tokens, 8, path)
print(f"wrote {path} ({path.stat().st_size} bytes)")

for seg in ingest.read_container_segments(path):
    print(f"  segment: tokens={seg.tokens} rows={seg.embedding.rows} dim={seg.embedding.dim}")

# flip one payload byte: the trailing CRC32 catches it
blob = bytearray(path.read_bytes())
blob[-6] ^= 0x40
bad = workdir / "corrupt.efev"
bad.write_bytes(bytes(blob))
try:
    ingest.read_container(bad)
except CrcMismatchError as exc:
    print(f"corruption detected: {exc}")

# sidecar manifest ties the container to its segments file
manifest = ingest.SidecarManifest(
    encoder="demo-encoder",
    layer_aggregation="last-layer",
    tokenizer="whitespace",
    created_at="2026-01-01T00:00:00Z",
    alignment=(0, 1),
)
ingest.write_manifest(manifest, workdir / "demo.manifest.json")
print(f"manifest: {ingest.read_manifest(workdir / 'demo.manifest.json')}")
