"""The four metric families on a toy segment.

All metrics consume pre-computed token embeddings; no encoder is involved.
"""

import numpy as np

from effeval import (
    IdfTable,
    LmPenalty,
    RemapMatrix,
    greedy_match_score,
    moverscore_variant,
    sentsim,
    uniform_document,
    xmoverscore,
)

rng = np.random.default_rng(7)
dim = 12

ref = uniform_document(["the", "report", "was", "published"], rng.standard_normal((4, dim)))
# hypothesis shares two embedding rows with the reference and perturbs the rest
hyp_rows = ref.embedding.values.copy()[:3]
hyp_rows[2] += 0.8 * rng.standard_normal(dim)
hyp = uniform_document(["the", "report", "appeared"], hyp_rows)

print("greedy matching (cosine precision/recall/F1):")
score = greedy_match_score(hyp, ref)
for key, value in score.subvalues.items():
    print(f"  {key:9} = {value:.4f}")

idf = IdfTable(100, {"the": 90, "was": 80, "report": 12, "published": 4})
print("\nmover scores (negated transport distance, idf masses):")
for variant in ("wmd", "rwmd", "wcd"):
    s = moverscore_variant(hyp, ref, idf, approx=variant)
    print(f"  {s.metric_id:18} = {s.value:.4f}")

src = uniform_document(["le", "rapport", "parut"], rng.standard_normal((3, dim)))
remap = RemapMatrix(np.eye(dim))  # identity: "direct" and "remap" agree
x = xmoverscore(src, hyp, remap=remap, lm=LmPenalty(-1.7), w_dist=1.0, w_lm=0.1)
print(f"\ncross-lingual score {x.metric_id} = {x.value:.4f}")
print(f"  distance term {x.subvalues['distance']:.4f}, fluency term {x.subvalues['lm']:.2f}")

sent = sentsim(
    src.weights @ src.embedding.values,
    hyp.weights @ hyp.embedding.values,
    word_score=score.value,
)
print(f"\nsentence+word combination = {sent.value:.4f}")
