"""Command-line entry point wiring ingest, metrics, stats and bench together.

Exit codes: 0 success, 1 metric or data error, 2 usage error. Set the
environment variable EFFEVAL_NO_COLOR to disable ANSI colors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import adapterlab, bench, ingest, metrics, stats, transport
from .core import EmbeddingMatrix, SegmentRecord, WeightedDocument, validate_document
from .errors import EffevalError, ZeroVarianceError


def _color_enabled() -> bool:
    return "EFFEVAL_NO_COLOR" not in os.environ and sys.stdout.isatty()


def _paint(text: str, code: str) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if _color_enabled() else text


def _emit(data: bytes, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


# ---------------------------------------------------------------------------
# scoring pipeline shared by score / correlate / bench / sweep
# ---------------------------------------------------------------------------

METRICS = ("greedy", "mover", "xmover", "sentsim")

_NEEDS = {
    "greedy": ("hyp_emb", "ref_emb"),
    "mover": ("hyp_emb", "ref_emb"),
    "xmover": ("src_emb", "hyp_emb"),
    "sentsim": ("src_emb", "hyp_emb"),
}


def _require_files(parser, args) -> None:
    for attr in _NEEDS[args.metric] + ("segments",):
        if getattr(args, attr, None) is None:
            parser.error(f"--{attr.replace('_', '-')} is required for --metric {args.metric}")
    for attr in ("segments", "hyp_emb", "ref_emb", "src_emb", "idf", "remap", "lm"):
        path = getattr(args, attr, None)
        if path is not None and not Path(path).exists():
            parser.error(f"--{attr.replace('_', '-')}: no such file: {path}")


class _ScoringData:
    """Containers and sidecars loaded once, segments built lazily per run."""

    def __init__(self, args, segments):
        self.metric = args.metric
        self.variant = getattr(args, "variant", "wmd")
        self.measure = getattr(args, "measure", "euclidean")
        self.segments = segments
        self.paths = {
            side: getattr(args, side)
            for side in ("hyp_emb", "ref_emb", "src_emb")
            if getattr(args, side, None)
        }
        # without idf statistics every token gets the same weight, which
        # normalizes to uniform masses
        self.idf = ingest.read_idf(args.idf) if getattr(args, "idf", None) else metrics.IdfTable(1, {})
        self.remap = ingest.read_remap(args.remap) if getattr(args, "remap", None) else None
        self.lm = ingest.read_lm_penalties(args.lm) if getattr(args, "lm", None) else None

    def load(self, stages: bench.StageTimer):
        """Read containers from disk and build per-side documents."""
        with stages.stage("load_embeddings"):
            sides = {}
            for side, path in self.paths.items():
                segs = ingest.read_container_segments(path)
                ingest.check_alignment(len(segs), len(self.segments))
                sides[side] = segs
            docs = {}
            for side, segs in sides.items():
                built = []
                for i, seg in enumerate(segs):
                    try:
                        n = len(seg.tokens)
                        doc = validate_document(
                            WeightedDocument(seg.tokens, np.full(n, 1.0 / n) if n else np.empty(0), seg.embedding)
                        )
                    except EffevalError as exc:
                        raise type(exc)(f"{self.paths[side]} segment {i}: {exc}") from exc
                    built.append(doc)
                docs[side] = built
            if self.metric == "xmover" and self.remap is not None:
                docs["src_emb"] = [
                    WeightedDocument(d.tokens, d.weights, self.remap.apply(d.embedding))
                    for d in docs["src_emb"]
                ]
        return docs

    def score_segment(self, docs, i: int, stages: bench.StageTimer) -> float:
        if self.metric == "greedy":
            with stages.stage("distance"):
                score = metrics.greedy_match_score(docs["hyp_emb"][i], docs["ref_emb"][i])
            return score.value
        if self.metric == "mover":
            hyp = self._idf_doc(docs["hyp_emb"][i])
            ref = self._idf_doc(docs["ref_emb"][i])
            return -self._distance(hyp, ref, stages)
        if self.metric == "xmover":
            src, hyp = docs["src_emb"][i], docs["hyp_emb"][i]
            dist = self._distance(src, hyp, stages)
            lm_term = 0.0
            if self.lm is not None:
                key = str(i)
                if key not in self.lm:
                    from .errors import MissingPenaltyError

                    raise MissingPenaltyError(f"no language-model penalty for segment key {key!r}")
                lm_term = self.lm[key].score
            return 1.0 * (-dist) + 0.1 * lm_term
        if self.metric == "sentsim":
            src, hyp = docs["src_emb"][i], docs["hyp_emb"][i]
            with stages.stage("distance"):
                word = metrics.greedy_match_score(hyp, src).value
                sent = metrics.sentsim(
                    src.weights @ src.embedding.values,
                    hyp.weights @ hyp.embedding.values,
                    word,
                )
            return sent.value
        raise ValueError(self.metric)

    def _idf_doc(self, doc: WeightedDocument) -> WeightedDocument:
        w = metrics.idf_weights(self.idf, doc.tokens)
        return validate_document(WeightedDocument(doc.tokens, w, doc.embedding))

    def _distance(self, a: WeightedDocument, b: WeightedDocument, stages: bench.StageTimer) -> float:
        if self.variant == "wcd":
            with stages.stage("distance"):
                return transport.wcd(a, b)
        with stages.stage("cost_matrix"):
            cost = transport.cost_matrix(a.embedding, b.embedding, self.measure)
        with stages.stage("distance"):
            if self.variant == "wmd":
                return transport.solve_transport(a.weights, b.weights, cost)[0]
            return transport.relaxed_from_cost(a.weights, b.weights, cost)

    def runner(self, jobs: int = 1) -> bench.MetricRunner:
        def run(segments, batch_size, stages):
            docs = self.load(stages)
            values = [0.0] * len(segments)
            indices = list(range(len(segments)))
            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    for i, v in zip(
                        indices, pool.map(lambda k: self.score_segment(docs, k, stages), indices)
                    ):
                        values[i] = v
            else:
                for start in range(0, len(indices), max(1, batch_size)):
                    for i in indices[start : start + max(1, batch_size)]:
                        values[i] = self.score_segment(docs, i, stages)
            with stages.stage("aggregate"):
                out = [float(v) for v in values]
            return out

        return run


def _compute_values(args, parser) -> tuple[list[SegmentRecord], list[float]]:
    _require_files(parser, args)
    segments = ingest.read_segments(args.segments)
    if not segments:
        raise EffevalError(f"{args.segments}: no segment records")
    data = _ScoringData(args, segments)
    run = data.runner(jobs=getattr(args, "jobs", 1))
    values = run(segments, getattr(args, "batch", 1), bench.StageTimer())
    return segments, values


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_score(args, parser) -> int:
    _, values = _compute_values(args, parser)
    lines = [f"{i}\t{repr(v)}" for i, v in enumerate(values)]
    _emit(("\n".join(lines) + "\n").encode("utf-8"), args.out)
    return 0


def _correlation_rows(segments, values, agg: str):
    scored = [(seg, v) for seg, v in zip(segments, values) if seg.human_score is not None]
    if agg == "pooled":
        groups = {"all": scored}
    else:
        groups = {}
        for seg, v in scored:
            groups.setdefault(seg.lang_pair, []).append((seg, v))
    rows = []
    ok = 0
    for name in sorted(groups):
        pairs = groups[name]
        try:
            sample = stats.PairedSample(
                [v for _, v in pairs], [seg.human_score for seg, _ in pairs]
            )
            r = repr(stats.pearson_r(sample))
            try:
                tau = repr(stats.kendall_tau(sample))
            except ZeroVarianceError:
                tau = "error:zero-variance"
            ok += 1
        except (ValueError, ZeroVarianceError) as exc:
            r = tau = f"error:{'zero-variance' if isinstance(exc, ZeroVarianceError) else 'too-few-segments'}"
        rows.append((name, len(pairs), r, tau))
    return rows, ok


def cmd_correlate(args, parser) -> int:
    segments, values = _compute_values(args, parser)
    rows, ok = _correlation_rows(segments, values, args.agg)
    if not rows:
        raise EffevalError("no segments with human scores to correlate")
    header = ["group", "n", "pearson_r", "kendall_tau"]
    if args.format == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += [f"| {n} | {c} | {r} | {t} |" for n, c, r, t in rows]
    else:
        lines = [",".join(header)] + [f"{n},{c},{r},{t}" for n, c, r, t in rows]
    _emit(("\n".join(lines) + "\n").encode("utf-8"), args.out)
    return 0 if ok else 1


def _synthetic_corpus(spec: str, seed: int, parser) -> dict:
    """Generate a deterministic corpus (segments + containers) for
    self-contained benchmarking: SEGMENTS:TOKENS:DIM."""
    try:
        n_seg, n_tok, dim = (int(x) for x in spec.split(":"))
        if n_seg < 1 or n_tok < 1 or dim < 1:
            raise ValueError
    except ValueError:
        parser.error("--synthetic expects SEGMENTS:TOKENS:DIM with positive integers")
    rng = np.random.default_rng(seed)
    tmp = Path(tempfile.mkdtemp(prefix="effeval-bench-"))
    records = []
    sides: dict[str, list] = {"hyp": [], "ref": [], "src": []}
    for i in range(n_seg):
        toks = tuple(f"t{i}_{j}" for j in range(n_tok))
        base = rng.standard_normal((n_tok, dim))
        sides["ref"].append(ingest.ContainerSegment(toks, EmbeddingMatrix(base)))
        sides["hyp"].append(
            ingest.ContainerSegment(toks, EmbeddingMatrix(base + 0.1 * rng.standard_normal((n_tok, dim))))
        )
        sides["src"].append(ingest.ContainerSegment(toks, EmbeddingMatrix(rng.standard_normal((n_tok, dim)))))
        records.append(
            SegmentRecord("xx-yy", "synthetic", f"src {i}", f"hyp {i}", f"ref {i}", float(rng.normal()))
        )
    paths = {"segments": tmp / "segments.tsv"}
    ingest.write_segments(records, paths["segments"])
    for side, segs in sides.items():
        paths[side] = tmp / f"{side}.efev"
        ingest.write_container_segments(segs, dim, paths[side])
    return paths


def _prepare_bench_args(args, parser):
    if args.synthetic:
        paths = _synthetic_corpus(args.synthetic, args.seed, parser)
        args.segments = str(paths["segments"])
        args.hyp_emb = str(paths["hyp"])
        args.ref_emb = str(paths["ref"])
        args.src_emb = str(paths["src"])
    _require_files(parser, args)
    segments = ingest.read_segments(args.segments)
    if not segments:
        raise EffevalError(f"{args.segments}: no segment records")
    data = _ScoringData(args, segments)
    # measurement is single-worker by contract
    return segments, data.runner(jobs=1)


def cmd_bench(args, parser) -> int:
    segments, run = _prepare_bench_args(args, parser)
    metric_id = f"{args.metric}[{args.variant}]" if args.metric in ("mover", "xmover") else args.metric
    record = bench.time_metric(
        run,
        segments,
        runs=args.runs,
        batch_size=args.batch,
        metric_id=metric_id,
        dataset_id=Path(args.segments).name,
    )
    correlations = None
    if args.format == "plotdata":
        # frontier point: per-segment runtime against pooled correlation
        values = run(segments, args.batch, bench.StageTimer())
        scored = [(v, seg.human_score) for v, seg in zip(values, segments) if seg.human_score is not None]
        if len(scored) < 2:
            raise EffevalError("plotdata needs at least two segments with human scores")
        sample = stats.PairedSample([v for v, _ in scored], [h for _, h in scored])
        correlations = {metric_id: stats.pearson_r(sample)}
    _emit(bench.emit_report([record], correlations=correlations, format=args.format), args.out)
    return 0


def cmd_sweep(args, parser) -> int:
    segments, run = _prepare_bench_args(args, parser)
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else [1, 4, 16, 64]
    records = bench.sweep_batch_size(
        run,
        segments,
        sizes=sizes,
        runs=args.runs,
        metric_id=f"{args.metric}[{args.variant}]" if args.metric in ("mover", "xmover") else args.metric,
        dataset_id=Path(args.segments).name,
    )
    _emit(bench.emit_report(records, format=args.format), args.out)
    return 0


def cmd_carbon(args, parser) -> int:
    kg = bench.carbon_estimate(
        args.hours,
        bench.CarbonAssumptions(power_watts=args.watts, grid_intensity_kg_per_kwh=args.intensity),
    )
    text = f"{kg:.2f}\n"
    _emit(text.encode("utf-8"), args.out)
    return 0


def cmd_adapterlab(args, parser) -> int:
    families = adapterlab.FAMILIES if args.family == "all" else (args.family,)
    header = ["family", "hidden_dim", "bottleneck_dim", "layers", "adapter_params", "baseline_params", "fraction"]
    rows = []
    for family in families:
        spec = adapterlab.AdapterSpec(
            family=family,
            hidden_dim=args.hidden_dim,
            bottleneck_dim=None if family == "ia3" else args.bottleneck_dim,
            layer_count=args.layers,
            ia3_vectors_per_layer=args.ia3_vectors,
            learned_residual=args.learned_residual,
            phm_n=args.phm_n,
        )
        counts = adapterlab.trainable_param_count(spec)
        rows.append(
            [
                family,
                str(args.hidden_dim),
                "" if family == "ia3" else str(args.bottleneck_dim),
                str(args.layers),
                str(counts["adapter_params"]),
                str(counts["baseline_params"]),
                repr(counts["fraction_of_dense"]),
            ]
        )
    if args.format == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
    else:
        lines = [",".join(header)] + [",".join(r) for r in rows]
    _emit(("\n".join(lines) + "\n").encode("utf-8"), args.out)
    return 0


def cmd_fmt_check(args, parser) -> int:
    failures = 0
    lines = []
    for path in args.container:
        try:
            with open(path, "rb") as fh:
                magic = fh.read(4)
            if magic == ingest.REMAP_MAGIC:
                remap = ingest.read_remap(path)
                lines.append(_paint(f"OK   {path} remap dim={remap.dim} bias={remap.bias is not None}", "32"))
                continue
            segs = ingest.read_container_segments(path)
            dim = ingest.container_dim(path)
            empty = sum(1 for s in segs if len(s.tokens) == 0)
            tokens = sum(len(s.tokens) for s in segs)
            lines.append(_paint(f"OK   {path} segments={len(segs)} dim={dim} tokens={tokens}", "32"))
            if empty:
                lines.append(_paint(f"WARN {path} has {empty} zero-token segments", "33"))
            if args.segments:
                ingest.check_alignment(len(segs), len(ingest.read_segments(args.segments)))
        except (EffevalError, OSError) as exc:
            failures += 1
            lines.append(_paint(f"FAIL {path} {type(exc).__name__}: {exc}", "31"))
    print("\n".join(lines))
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def _add_scoring_flags(p: argparse.ArgumentParser, with_metric: bool = True):
    p.add_argument("--segments", help="6-column TSV of evaluation segments")
    p.add_argument("--hyp-emb", dest="hyp_emb", help="EFEV container for hypotheses")
    p.add_argument("--ref-emb", dest="ref_emb", help="EFEV container for references")
    p.add_argument("--src-emb", dest="src_emb", help="EFEV container for source texts")
    p.add_argument("--idf", help="IDF statistics JSON (mover weighting)")
    p.add_argument("--remap", help="EFRM remap matrix applied to the source side")
    p.add_argument("--lm", help="TSV of language-model penalties per segment key")
    if with_metric:
        p.add_argument("--metric", required=True, choices=METRICS, help="metric family to compute")
    p.add_argument("--variant", default="wmd", choices=("wmd", "rwmd", "wcd"), help="transport distance variant")
    p.add_argument("--measure", default="euclidean", choices=("euclidean", "cosine"), help="ground cost between token embeddings")
    p.add_argument("--batch", type=int, default=1, help="segments per processing chunk")
    p.add_argument("--seed", type=int, default=42, help="seed for synthetic data generation")
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="effeval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score each segment with a metric")
    _add_scoring_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel scoring workers")

    p = sub.add_parser("correlate", help="correlate metric scores with human judgments")
    _add_scoring_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel scoring workers")
    p.add_argument("--agg", default="pooled", choices=("pooled", "perlang"), help="pool all segments or correlate per language pair")
    p.add_argument("--format", default="csv", choices=("csv", "markdown"), help="report format")

    p = sub.add_parser("bench", help="measure metric runtime and memory")
    _add_scoring_flags(p)
    p.add_argument("--runs", type=int, default=3, help="measured runs (minimum 3)")
    p.add_argument("--format", default="csv", choices=("csv", "markdown", "plotdata"), help="report format")
    p.add_argument("--synthetic", help="generate a corpus SEGMENTS:TOKENS:DIM instead of reading files")

    p = sub.add_parser("sweep", help="benchmark across batch sizes")
    _add_scoring_flags(p)
    p.add_argument("--runs", type=int, default=3, help="measured runs per size (minimum 3)")
    p.add_argument("--sizes", help="comma-separated batch sizes (default 1,4,16,64)")
    p.add_argument("--format", default="csv", choices=("csv", "markdown"), help="report format")
    p.add_argument("--synthetic", help="generate a corpus SEGMENTS:TOKENS:DIM instead of reading files")

    p = sub.add_parser("carbon", help="carbon footprint from runtime and power assumptions")
    p.add_argument("--hours", type=float, required=True, help="total runtime in hours")
    p.add_argument("--watts", type=float, required=True, help="power draw under load")
    p.add_argument("--intensity", type=float, required=True, help="grid carbon intensity in kg CO2-eq per kWh")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("adapterlab", help="adapter trainable-parameter accounting")
    p.add_argument("--family", default="all", choices=adapterlab.FAMILIES + ("all",), help="adapter family")
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int, default=768, help="transformer hidden size")
    p.add_argument("--bottleneck-dim", dest="bottleneck_dim", type=int, default=48, help="adapter bottleneck size")
    p.add_argument("--layers", type=int, default=12, help="transformer layer count")
    p.add_argument("--ia3-vectors", dest="ia3_vectors", type=int, default=3, help="learned scaling vectors per layer")
    p.add_argument("--phm-n", dest="phm_n", type=int, default=4, help="hypercomplex factor count for compacter accounting")
    p.add_argument("--learned-residual", dest="learned_residual", action="store_true", help="count the bottleneck residual as a learned bias")
    p.add_argument("--format", default="csv", choices=("csv", "markdown"), help="report format")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("fmt-check", help="validate container and remap files")
    p.add_argument("--container", action="append", required=True, help="EFEV or EFRM file to validate (repeatable)")
    p.add_argument("--segments", help="segments TSV to check alignment against")

    return parser


_DISPATCH = {
    "score": cmd_score,
    "correlate": cmd_correlate,
    "bench": cmd_bench,
    "sweep": cmd_sweep,
    "carbon": cmd_carbon,
    "adapterlab": cmd_adapterlab,
    "fmt-check": cmd_fmt_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "runs", 3) < 3:
        parser.error("--runs must be at least 3")
    if getattr(args, "batch", 1) < 1:
        parser.error("--batch must be at least 1")
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return _DISPATCH[args.command](args, parser)
    except (EffevalError, OSError, ValueError) as exc:
        print(_paint(f"error: {exc}", "31"), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
