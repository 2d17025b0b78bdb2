"""Command-line surface: normalize, count, lm-build, lm-ppl, sim, profile,
rank, correlate.

Every output artifact is written atomically (temp file + rename) and gets a
``<output>.manifest.json`` recording the tool version, resolved flags, input
digests, seed, and wall-clock duration. Given identical argv and input
bytes, every data artifact is byte-identical across runs; the seed only ever
affects sampling, never measure arithmetic.

Exit codes: 0 success, 1 data/configuration errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
import time

from . import __version__
from .analysis import (
    DIRECTION_RAW,
    DIRECTION_SIMILARITY,
    RANK_KEYS,
    attach_similarities,
    compute_deltas,
    correlation_matrix,
    rank_sources,
    read_results_csv,
    read_similarity_csv,
)
from .corpus import TokenizerConfig, normalize_tweet, read_corpus, tokenize_documents
from .errors import CorpusAffinityError
from .lm import load_arpa, perplexity, sidecar_dict, train_kn, write_arpa_stream
from .metrics import ContentWordLexicon, jsd, measure_value, ttr, tvc
from .ngram import (
    BOUNDARY_MARKERS,
    BOUNDARY_NONE,
    POOLED,
    count_ngrams,
    read_counts,
    to_distribution,
    write_counts_stream,
)
from .protocol import (
    MODE_DISJOINT,
    MODE_INDEPENDENT,
    SamplingPlan,
    SimilarityProfile,
    similarity_profile,
)

THREADS_ENV_VAR = "CORPUS_AFFINITY_THREADS"

_POOLING_CHOICES = {"1": 1, "2": 2, "3": 3, "pooled": POOLED}
_BOUNDARY_CHOICES = {"none": BOUNDARY_NONE, "markers": BOUNDARY_MARKERS}


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_tokenizer_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("tokenizer")
    group.add_argument(
        "--lowercase", action=argparse.BooleanOptionalAction, default=True,
        help="lowercase tokens (special tokens keep their case)",
    )
    group.add_argument(
        "--normalize", choices=["none", "twitter"], default="none",
        help="text normalization applied before tokenizing",
    )
    group.add_argument(
        "--keep-punct", action=argparse.BooleanOptionalAction, default=True,
        help="keep punctuation characters as their own tokens",
    )
    group.add_argument(
        "--format", choices=["text", "jsonl"], default="text",
        help="input corpus format (one document per line)",
    )


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--threads", type=int, default=None,
        help=f"worker count (or ${THREADS_ENV_VAR}); results never depend on it",
    )


def _tokenizer_config(args) -> TokenizerConfig:
    return TokenizerConfig(
        lowercase=args.lowercase,
        normalization=args.normalize,
        keep_punctuation=args.keep_punct,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corpus-affinity",
        description="Corpus similarity measures and pretraining-data nomination.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("normalize", help="apply social-media normalization to a text file")
    p.add_argument("--mode", choices=["none", "twitter"], default="twitter")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_common_flags(p)

    p = sub.add_parser("count", help="count 1..N-grams into a count artifact")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--order", type=int, default=3, help="maximum n-gram order (1..3)")
    p.add_argument("--boundary", choices=sorted(_BOUNDARY_CHOICES), default="none")
    _add_tokenizer_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("lm-build", help="train a Kneser-Ney 3-gram model (ARPA output)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="training corpus (text/jsonl)")
    src.add_argument("--counts", help="sentence-markers count artifact from `count`")
    p.add_argument("--output", required=True, help="ARPA path; sidecar written at <output>.json")
    p.add_argument("--discounts", default="auto", help="'auto' or 'fixed:D' with 0 <= D < 1")
    p.add_argument("--min-count", type=int, default=1)
    _add_tokenizer_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("lm-ppl", help="perplexity of a corpus under a trained model")
    p.add_argument("--model", required=True, help="ARPA file from lm-build")
    p.add_argument("--input", required=True, help="corpus to score")
    p.add_argument("--output", required=True, help="JSON result path")
    _add_tokenizer_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("sim", help="one similarity/diversity measure for a corpus pair")
    p.add_argument("measure", choices=["jsd", "tvc", "ttr"])
    p.add_argument("--source", required=True)
    p.add_argument("--target", help="required for jsd and tvc")
    p.add_argument("--output", required=True, help="JSON result path")
    p.add_argument("--pooling", choices=sorted(_POOLING_CHOICES), default="pooled")
    p.add_argument("--lexicon", help="word<TAB>tag file overriding the bundled lexicon")
    _add_tokenizer_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("profile", help="full similarity profile over sampled sub-corpora")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--output", required=True, help="profile JSON path")
    p.add_argument("--output-csv", help="also write flattened per-sub-corpus CSV")
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--sample-tokens", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[MODE_DISJOINT, MODE_INDEPENDENT], default=MODE_DISJOINT)
    p.add_argument("--sample-target", action="store_true", help="sample one budget from the target too")
    p.add_argument("--discounts", default="auto")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--lexicon")
    p.add_argument("--source-id", help="source corpus id (defaults to the file name)")
    p.add_argument("--target-id", help="target corpus id (defaults to the file name)")
    _add_tokenizer_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("rank", help="order candidate sources for one target")
    p.add_argument("--profiles", nargs="+", required=True, help="profile JSON files")
    p.add_argument("--key", choices=list(RANK_KEYS), default="composite")
    p.add_argument("--output", required=True, help="ranking JSON path")
    _add_common_flags(p)

    p = sub.add_parser("correlate", help="improvement deltas and their correlation with similarity")
    p.add_argument("--results", required=True, help="task,model,repeat,score CSV")
    p.add_argument("--baseline", required=True, help="baseline model name")
    p.add_argument("--similarities", help="source,target,measure,value CSV to attach")
    p.add_argument("--direction", choices=[DIRECTION_RAW, DIRECTION_SIMILARITY],
                   default=DIRECTION_SIMILARITY)
    p.add_argument("--output-deltas", required=True, help="delta CSV path")
    p.add_argument("--output-report", help="correlation JSON path")
    p.add_argument("--output-report-csv", help="long-form var_a,var_b,r,n CSV path")
    _add_common_flags(p)

    return parser


def _validate(parser: argparse.ArgumentParser, args) -> None:
    """Flag validation beyond argparse types, before any file is touched."""
    threads = args.threads if args.threads is not None else _default_threads()
    if threads < 1:
        parser.error(f"--threads must be >= 1, got {threads}")
    args.threads = threads
    sub = args.subcommand
    if sub == "count" and not 1 <= args.order <= 3:
        parser.error(f"--order must be in 1..3, got {args.order}")
    if sub in ("lm-build", "profile"):
        if args.min_count < 1:
            parser.error(f"--min-count must be >= 1, got {args.min_count}")
        args.discount = _parse_discount(parser, args.discounts)
    if sub == "profile":
        if args.samples < 1:
            parser.error(f"--samples must be >= 1, got {args.samples}")
        if args.sample_tokens < 1:
            parser.error(f"--sample-tokens must be >= 1, got {args.sample_tokens}")
    if sub == "sim" and args.measure in ("jsd", "tvc") and not args.target:
        parser.error(f"sim {args.measure} requires --target")


def _parse_discount(parser, spec: str):
    if spec == "auto":
        return None
    if spec.startswith("fixed:"):
        try:
            value = float(spec[6:])
        except ValueError:
            parser.error(f"--discounts fixed:D needs a number, got {spec!r}")
        if not 0.0 <= value < 1.0:
            parser.error(f"--discounts fixed discount must lie in [0, 1), got {value}")
        return value
    parser.error(f"--discounts must be 'auto' or 'fixed:D', got {spec!r}")


# ---------------------------------------------------------------------------
# Output helpers


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _atomic_write_stream(path, write_fn) -> None:
    """Write via temp file + rename so failures leave no partial artifact."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write(path, text: str) -> None:
    _atomic_write_stream(path, lambda fh: fh.write(text))


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


class _Run:
    """Collects inputs/outputs of one subcommand and emits manifests."""

    def __init__(self, args):
        self.args = args
        self.started = time.monotonic()
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []

    def add_input(self, path) -> None:
        if path:
            self.inputs[str(path)] = _sha256(path)

    def write(self, path, text: str) -> None:
        _atomic_write(path, text)
        self.outputs.append(str(path))

    def write_stream(self, path, write_fn) -> None:
        _atomic_write_stream(path, write_fn)
        self.outputs.append(str(path))

    def finish(self) -> None:
        flags = {
            k: v for k, v in sorted(vars(self.args).items())
            if k not in ("subcommand",) and not k.startswith("_")
        }
        manifest = {
            "tool": "corpus-affinity",
            "version": __version__,
            "subcommand": self.args.subcommand,
            "flags": flags,
            "inputs": dict(sorted(self.inputs.items())),
            "seed": getattr(self.args, "seed", None),
            "duration_seconds": round(time.monotonic() - self.started, 6),
        }
        for path in self.outputs:
            manifest_obj = dict(manifest)
            manifest_obj["artifact"] = os.path.basename(path)
            _atomic_write(f"{path}.manifest.json", _json_text(manifest_obj))


def _read_token_lists(run: _Run, path, config: TokenizerConfig) -> list[list[str]]:
    run.add_input(path)
    return list(tokenize_documents(read_corpus(path, run.args.format), config))


def _load_lexicon(run: _Run, path) -> ContentWordLexicon:
    if path:
        run.add_input(path)
        return ContentWordLexicon.load(path)
    return ContentWordLexicon.bundled()


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_normalize(run: _Run, args) -> int:
    run.add_input(args.input)
    out_lines = []
    with open(args.input, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\r\n")
            out_lines.append(normalize_tweet(line) if args.mode == "twitter" else line)
    run.write(args.output, "\n".join(out_lines) + ("\n" if out_lines else ""))
    return 0


def _cmd_count(run: _Run, args) -> int:
    config = _tokenizer_config(args)
    run.add_input(args.input)
    docs = tokenize_documents(read_corpus(args.input, args.format), config)
    table = count_ngrams(docs, args.order, _BOUNDARY_CHOICES[args.boundary])
    run.write_stream(args.output, lambda fh: write_counts_stream(table, fh))
    print(f"counted {table.totals[1]} tokens, "
          f"{sum(len(table.counts[k]) for k in range(1, table.max_order + 1))} distinct n-grams")
    return 0


def _cmd_lm_build(run: _Run, args) -> int:
    config = _tokenizer_config(args)
    if args.counts:
        run.add_input(args.counts)
        table = read_counts(args.counts)
        fingerprint = None  # count artifacts do not record tokenizer settings
    else:
        run.add_input(args.input)
        docs = tokenize_documents(read_corpus(args.input, args.format), config)
        table = count_ngrams(docs, 3, BOUNDARY_MARKERS)
        fingerprint = config.fingerprint
    model = train_kn(table, discount=args.discount, min_count=args.min_count,
                     fingerprint=fingerprint)
    run.write_stream(args.output, lambda fh: write_arpa_stream(model, fh))
    run.write(f"{args.output}.json", _json_text(sidecar_dict(model)))
    print(f"trained on {table.totals[1]} tokens, vocabulary {len(model.vocab)}")
    return 0


def _cmd_lm_ppl(run: _Run, args) -> int:
    config = _tokenizer_config(args)
    run.add_input(args.model)
    sidecar = f"{args.model}.json"
    if os.path.exists(sidecar):
        run.add_input(sidecar)
    model = load_arpa(args.model)
    docs = _read_token_lists(run, args.input, config)
    result = perplexity(model, docs, fingerprint=config.fingerprint)
    run.write(args.output, _json_text({
        "perplexity": result.perplexity,
        "scored_token_count": result.scored_token_count,
        "oov_count": result.oov_count,
        "total_log_prob": result.total_log_prob,
    }))
    print(f"perplexity {result.perplexity:.4f} over {result.scored_token_count} tokens "
          f"({result.oov_count} OOV)")
    return 0


def _cmd_sim(run: _Run, args) -> int:
    config = _tokenizer_config(args)
    source_docs = _read_token_lists(run, args.source, config)
    if args.measure == "ttr":
        tokens = [t for doc in source_docs for t in doc]
        mv = measure_value("ttr", ttr(tokens))
    elif args.measure == "tvc":
        lexicon = _load_lexicon(run, args.lexicon)
        target_docs = _read_token_lists(run, args.target, config)
        mv = measure_value("tvc", tvc(
            (t for doc in target_docs for t in doc),
            (t for doc in source_docs for t in doc),
            lexicon,
        ))
    else:
        pooling = _POOLING_CHOICES[args.pooling]
        target_docs = _read_token_lists(run, args.target, config)
        source_dist = to_distribution(count_ngrams(source_docs, 3, BOUNDARY_NONE), pooling)
        target_dist = to_distribution(count_ngrams(target_docs, 3, BOUNDARY_NONE), pooling)
        name = "jsd_pooled" if pooling == POOLED else f"jsd_{pooling}"
        mv = measure_value(name, jsd(source_dist, target_dist))
    run.write(args.output, _json_text({
        "measure": mv.measure,
        "value": mv.value,
        "direction": mv.direction,
        "source": args.source,
        "target": args.target,
    }))
    print(f"{mv.measure} = {mv.value:.6f}")
    return 0


def _cmd_profile(run: _Run, args) -> int:
    config = _tokenizer_config(args)
    source_docs = _read_token_lists(run, args.source, config)
    target_docs = _read_token_lists(run, args.target, config)
    plan = SamplingPlan(args.samples, args.sample_tokens, args.seed, args.mode)
    lexicon = _load_lexicon(run, args.lexicon)
    profile = similarity_profile(
        source_docs,
        target_docs,
        plan,
        lexicon=lexicon,
        discount=args.discount,
        min_count=args.min_count,
        fingerprint=config.fingerprint,
        source_id=args.source_id or os.path.basename(args.source),
        target_id=args.target_id or os.path.basename(args.target),
        sample_target=args.sample_target,
    )
    run.write(args.output, _json_text(profile.to_json_dict()))
    if args.output_csv:
        run.write(args.output_csv, _csv_text(
            ("source", "target", "measure", "subcorpus_index", "value"),
            profile.to_csv_rows(),
        ))
    for name, st in profile.measures.items():
        print(f"{name}: mean={st.mean:.6f} std={st.std:.6f}")
    return 0


def _cmd_rank(run: _Run, args) -> int:
    profiles = []
    for path in args.profiles:
        run.add_input(path)
        with open(path, encoding="utf-8") as fh:
            profiles.append(SimilarityProfile.from_json_dict(json.load(fh)))
    order = rank_sources(profiles, key=args.key)
    by_id = {p.source_id: p for p in profiles}
    ranking = []
    for sid in order:
        entry = {"source": sid}
        for name, st in by_id[sid].measures.items():
            entry[name] = st.mean
        ranking.append(entry)
    run.write(args.output, _json_text({
        "target": profiles[0].target_id,
        "key": args.key,
        "ranking": ranking,
    }))
    print(" > ".join(order))
    return 0


def _cmd_correlate(run: _Run, args) -> int:
    run.add_input(args.results)
    results = read_results_csv(args.results)
    points = compute_deltas(results, args.baseline)
    run.write(args.output_deltas, _csv_text(
        ("task", "model", "repeat", "delta"),
        [(p.task, p.model, p.repeat, repr(p.delta)) for p in points],
    ))
    print(f"{len(points)} delta points against baseline {args.baseline!r}")
    if args.similarities:
        run.add_input(args.similarities)
        attach_similarities(points, read_similarity_csv(args.similarities), results)
        report = correlation_matrix(points, directionality=args.direction)
        if args.output_report:
            run.write(args.output_report, _json_text(report.to_json_dict()))
        if args.output_report_csv:
            run.write(args.output_report_csv, _csv_text(
                ("var_a", "var_b", "r", "n"),
                [(a, b, "" if r is None else repr(r), n) for a, b, r, n in report.to_long_rows()],
            ))
        delta_row = report.matrix[0]
        for name, r in zip(report.variables, delta_row):
            if name != "delta" and r is not None:
                print(f"r(delta, {name}) = {r:.4f}")
    elif args.output_report or args.output_report_csv:
        raise CorpusAffinityError("correlation report requested without --similarities")
    return 0


_COMMANDS = {
    "normalize": _cmd_normalize,
    "count": _cmd_count,
    "lm-build": _cmd_lm_build,
    "lm-ppl": _cmd_lm_ppl,
    "sim": _cmd_sim,
    "profile": _cmd_profile,
    "rank": _cmd_rank,
    "correlate": _cmd_correlate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(parser, args)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    run = _Run(args)
    try:
        code = _COMMANDS[args.subcommand](run, args)
    except (CorpusAffinityError, OSError, ValueError) as exc:
        print(f"corpus-affinity: error: {exc}", file=sys.stderr)
        return 1
    if code == 0:
        run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
