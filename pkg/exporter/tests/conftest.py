import subprocess
import sys
from pathlib import Path

import pytest

VOCAB = [
    "the", "a", "report", "council", "vote", "city", "river", "market",
    "growth", "minister", "said", "on", "friday", "people", "new", "old",
    "plan", "budget", "school", "train", "strike", "talks", "border",
    "energy", "price", "health", "law", "court", "union", "game", "team",
    "storm", "coast", "farm", "wheat", "oil", "bank", "rate", "debt",
    "poll", "party", "leader", "summit", "treaty", "trade", "port",
    "bridge", "road", "power", "water", "food", "aid", "camp", "peace",
    "war", "truce", "deal", "offer", "visit", "crowd",
]


def make_corpus(path: Path, n_segments: int = 100, sentence_len: int = 9) -> Path:
    """Graded toy corpus: hypothesis i has (i mod (len+1)) words replaced,
    human score is the negated replacement count."""
    lines = ["# synthetic graded corpus"]
    for i in range(n_segments):
        ref_words = [VOCAB[(i * 7 + j * 3) % len(VOCAB)] for j in range(sentence_len)]
        k = i % (sentence_len + 1)
        hyp_words = list(ref_words)
        for j in range(k):
            hyp_words[j] = VOCAB[(i * 11 + j * 5 + 17) % len(VOCAB)]
        src_words = [VOCAB[(i * 13 + j * 2 + 29) % len(VOCAB)] for j in range(sentence_len)]
        lines.append(
            "\t".join(
                [
                    "de-en",
                    "sysA",
                    " ".join(src_words),
                    " ".join(hyp_words),
                    " ".join(ref_words),
                    repr(float(-k)),
                ]
            )
        )
    out = path / "segments.tsv"
    out.write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    return out


def run_engine(*args: str) -> subprocess.CompletedProcess:
    """Invoke the consumer engine through its public CLI."""
    return subprocess.run(
        [sys.executable, "-m", "effeval.cli", *args],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("corpus")
    make_corpus(path)
    return path


@pytest.fixture(scope="session")
def exported(corpus_dir) -> dict:
    """Containers for both tiers and both sides, exported once per session."""
    from efexport import ExportJob, export_embeddings

    paths = {"segments": corpus_dir / "segments.tsv"}
    for tier in ("small", "base"):
        for side in ("hypothesis", "reference"):
            out = corpus_dir / f"{side}.{tier}.efev"
            manifest = corpus_dir / f"{side}.{tier}.manifest.json"
            export_embeddings(
                ExportJob(
                    encoder=tier,
                    segments_path=str(paths["segments"]),
                    side=side,
                    out_path=str(out),
                    manifest_path=str(manifest),
                    created_at="2026-01-01T00:00:00Z",
                )
            )
            paths[f"{side}.{tier}"] = out
            paths[f"{side}.{tier}.manifest"] = manifest
    return paths
