"""Command line front end: label, evaluate, bench, easy-stats, inspect, generate."""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from pathlib import Path
from typing import Dict, List, Optional

from .corpus import (
    ACSA,
    CorpusError,
    enumerate_aspect_units,
    load_corpus,
    load_embeddings,
    save_corpus,
)
from .easy import NoEvidenceError
from .engine import (
    EngineConfig,
    RunResult,
    UnitRecord,
    bench_csv,
    bench_scaling,
    evaluate,
    prepare,
    run,
)
from .evidence import UncertaintyParams, conflict_rank_key, evidential_support
from .features import FeatureStats
from .graph import FactorGraph, POLARITY_VALUE
from .inference import InferenceConfig
from .lexicon import LexiconError, load_connectives, load_lexicon, save_lexicon
from .support import certainty_masses, support_masses
from .synth import generate_synthetic, synthetic_lexicon


class UsageError(Exception):
    """Bad flags, bad files, bad config values; exits with status 2."""


ENGINE_INT_KEYS = (
    "m", "k", "seed", "kgram_max", "negation_window",
    "subgraph_hops", "subgraph_cap", "threads",
)
ENGINE_FLOAT_KEYS = (
    "sim_threshold", "word_init_weight", "similar_init_weight", "opposite_init_weight",
)
INFERENCE_INT_KEYS = ("burn_in_sweeps", "sample_sweeps", "learning_epochs")
INFERENCE_FLOAT_KEYS = ("step_size", "l2", "weight_clamp")
UNCERTAINTY_KEYS = ("df", "dfp", "df_rank", "dfp_rank")

CONFIG_TYPES: Dict[str, type] = {}
for _k in ENGINE_INT_KEYS + INFERENCE_INT_KEYS:
    CONFIG_TYPES[_k] = int
for _k in ENGINE_FLOAT_KEYS + INFERENCE_FLOAT_KEYS + UNCERTAINTY_KEYS:
    CONFIG_TYPES[_k] = float


def parse_config_file(path: str) -> Dict[str, object]:
    """Flat key=value lines; # starts a comment; unknown keys are errors."""
    values: Dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, val = key.strip(), val.strip()
            caster = CONFIG_TYPES.get(key)
            if caster is None:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = caster(val)
            except ValueError:
                raise UsageError(
                    f"{path}:{lineno}: {key} expects {caster.__name__}, got {val!r}"
                )
    return values


def build_config(args: argparse.Namespace) -> EngineConfig:
    """Defaults, then the config file, then explicit flags."""
    values: Dict[str, object] = {}
    if getattr(args, "config", None):
        _require_file(args.config, "--config")
        values.update(parse_config_file(args.config))
    for key in CONFIG_TYPES:
        override = getattr(args, key, None)
        if override is not None:
            values[key] = override
    engine_kw = {}
    inference_kw = {}
    unc: Dict[str, float] = {}
    for key, val in values.items():
        if key in ENGINE_INT_KEYS or key in ENGINE_FLOAT_KEYS:
            engine_kw[key] = val
        elif key in INFERENCE_INT_KEYS or key in INFERENCE_FLOAT_KEYS:
            inference_kw[key] = val
        else:
            unc[key] = val
    word_u = unc.get("df", 0.4)
    rel_u = unc.get("dfp", 0.1)
    config = EngineConfig(
        uncertainty=UncertaintyParams(
            word_uncertainty=word_u,
            relation_uncertainty=rel_u,
            word_rank_uncertainty=unc.get("df_rank", word_u),
            relation_rank_uncertainty=unc.get("dfp_rank", rel_u),
        ),
        inference=InferenceConfig(**inference_kw),
        **engine_kw,
    )
    config.validate()
    return config


def _require_file(path: Optional[str], flag: str) -> None:
    if path is not None and not os.path.isfile(path):
        raise UsageError(f"{flag}: no such file: {path}")


def _load_inputs(args: argparse.Namespace):
    _require_file(args.corpus, "--corpus")
    _require_file(args.lexicon, "--lexicon")
    _require_file(getattr(args, "connectives", None), "--connectives")
    _require_file(getattr(args, "embeddings", None), "--embeddings")
    corpus = load_corpus(args.corpus)
    lexicon = load_lexicon(
        args.lexicon, normalize=args.normalize_lexicon, min_strength=args.min_strength
    )
    connectives = load_connectives(getattr(args, "connectives", None))
    embeddings = None
    if getattr(args, "embeddings", None):
        embeddings = load_embeddings(args.embeddings)
    if embeddings is None and any(
        u.mode == ACSA for u in enumerate_aspect_units(corpus)
    ):
        raise UsageError(
            "corpus contains category-level (ACSA) units; "
            "pass --embeddings so their clauses can be resolved"
        )
    return corpus, lexicon, connectives, embeddings


def cmd_label(args: argparse.Namespace) -> int:
    corpus, lexicon, connectives, embeddings = _load_inputs(args)
    config = build_config(args)
    result = run(corpus, lexicon, connectives, embeddings, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "predictions.jsonl").write_text(result.to_jsonl(), encoding="utf-8")
    metrics = evaluate(result, corpus)
    metrics["timing"] = {"total_seconds": result.total_seconds}
    (out / "metrics.json").write_text(
        json.dumps(metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"labeled {len(result.records)} units in {result.iterations} iterations -> {out}")
    return 0


def _read_predictions(path: str) -> List[UnitRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(
                    UnitRecord(
                        int(obj["unit_id"]),
                        obj["predicted"],
                        obj.get("probability"),
                        obj.get("entropy"),
                        obj.get("method", "unknown"),
                        obj.get("iteration"),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise UsageError(f"{path}:{lineno}: bad prediction record: {exc}")
    return records


def cmd_evaluate(args: argparse.Namespace) -> int:
    _require_file(args.predictions, "--predictions")
    _require_file(args.corpus, "--corpus")
    corpus = load_corpus(args.corpus)
    records = _read_predictions(args.predictions)
    corpus_ids = {u.unit_id for u in enumerate_aspect_units(corpus)}
    pred_ids = {r.unit_id for r in records}
    if corpus_ids != pred_ids:
        missing = sorted(corpus_ids - pred_ids)[:10]
        extra = sorted(pred_ids - corpus_ids)[:10]
        raise UsageError(
            f"unit ids disagree; first missing from predictions: {missing}, "
            f"first not in corpus: {extra}"
        )
    iterations = max((r.iteration for r in records if r.iteration is not None), default=0)
    result = RunResult(records, iterations, None, 0.0)
    print(json.dumps(evaluate(result, corpus), indent=2, sort_keys=True))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes expects comma-separated integers, got {args.sizes!r}")
    if not sizes:
        raise UsageError("--sizes is empty")
    config = build_config(args)
    rows = bench_scaling(
        sizes,
        config=config,
        easy_fraction=args.easy_fraction,
        relation_density=args.relation_density,
        noise=args.noise,
        seed=config.seed,
    )
    csv = bench_csv(rows)
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(csv, end="")
    return 0


def cmd_easy_stats(args: argparse.Namespace) -> int:
    corpus, lexicon, connectives, embeddings = _load_inputs(args)
    config = build_config(args)
    prep = prepare(corpus, lexicon, connectives, embeddings, config)
    print(json.dumps(prep.easy_stats.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    corpus, lexicon, connectives, embeddings = _load_inputs(args)
    config = build_config(args)
    prep = prepare(corpus, lexicon, connectives, embeddings, config)
    uid = args.unit
    if not 0 <= uid < len(prep.units):
        raise UsageError(f"--unit {uid} out of range; corpus has {len(prep.units)} units")
    unit = prep.units[uid]
    labels = {u: POLARITY_VALUE[p] for u, p in prep.evidence.labels.items()}
    stats = FeatureStats(prep.index)
    stats.rebuild(labels)
    decision = prep.decisions[uid]
    span = prep.spans[uid]
    masses = support_masses(uid, prep.index, stats, labels, config.uncertainty)
    support = evidential_support(masses)
    certainty = certainty_masses(uid, prep.index, stats, labels, config.uncertainty)
    rank = conflict_rank_key(certainty, uid)
    report = {
        "unit_id": uid,
        "review_id": unit.review_id,
        "sentence_id": unit.sentence_id,
        "aspect_id": unit.aspect_id,
        "mode": unit.mode,
        "tokens": prep.tokens_of[uid],
        "opinion_span": {"start": span.start, "end": span.end, "association": span.association},
        "easy": {
            "easy": decision.easy,
            "polarity": decision.polarity,
            "reasons": sorted(decision.reasons),
        },
        "sentiment_hits": [
            {
                "token_index": h.token_index,
                "word": h.word,
                "score": h.score,
                "negated": h.negated,
            }
            for h in prep.hits_of[uid]
        ],
        "word_features": [
            {
                "feature_id": f.feature_id,
                "surface": list(f.surface),
                "negated": f.negated,
                "weight": f.weight,
                "bearers": len(f.bearers),
                "labeled_bearers": stats.labeled_bearers(f),
                "positive_fraction": stats.positive_fraction(f),
            }
            for f in prep.index.word_features_of(uid)
        ],
        "relations": [
            {
                "feature_id": r.feature_id,
                "kind": r.kind,
                "rule": r.rule,
                "other_unit": r.other(uid),
                "other_labeled": r.other(uid) in labels,
                "weight": r.weight,
                "accuracy": stats.relation_accuracy(r.kind),
            }
            for r in prep.index.relations_of(uid)
        ],
        "support": {
            "score": support.score,
            "conflict": support.conflict,
            "total_conflict": support.total_conflict,
            "n_sources": support.n_sources,
        },
        "certainty": {
            "mass_first": certainty.m_a,
            "mass_second": certainty.m_b,
            "mass_frame": certainty.m_both,
            "conflict": certainty.conflict,
            "rank_entropy": rank[1],
        },
    }
    if uid not in labels:
        graph = FactorGraph(
            prep.units, prep.evidence, prep.index,
            hops=config.subgraph_hops, bearer_cap=config.subgraph_cap, seed=config.seed,
        )
        sub = graph.extract_subgraph(uid)
        report["subgraph"] = {
            "n_variables": len(sub.unit_ids),
            "n_labeled": len(sub.clamped),
            "n_word_factors": len(sub.word_factors),
            "n_relation_factors": len(sub.relation_factors),
        }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    corpus = generate_synthetic(
        args.units,
        easy_fraction=args.easy_fraction,
        relation_density=args.relation_density,
        noise=args.noise,
        seed=args.seed if args.seed is not None else 0,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, out / "corpus.json")
    save_lexicon(synthetic_lexicon(), out / "lexicon.tsv")
    n = sum(len(s.aspects) for r in corpus.reviews for s in r.sentences)
    print(f"wrote {n} units to {out}")
    return 0


def _add_config_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="key=value config file")
    sp.add_argument("--seed", type=int, help="run seed")
    sp.add_argument("--m", type=int, help="support candidate pool size")
    sp.add_argument("--k", type=int, help="subgraphs evaluated per pass")
    sp.add_argument("--df", type=float, help="word evidence uncertainty in (0, 1]")
    sp.add_argument("--dfp", type=float, help="relation evidence uncertainty in (0, 1]")
    sp.add_argument("--threads", type=int, help="worker threads (default GML_THREADS or 1)")


def _add_input_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--corpus", required=True, help="corpus JSON file")
    sp.add_argument("--lexicon", required=True, help="sentiment lexicon TSV file")
    sp.add_argument("--connectives", help="connective lists INI (default: packaged)")
    sp.add_argument("--embeddings", help="word embedding text file")
    sp.add_argument(
        "--normalize-lexicon", action="store_true",
        help="rescale lexicon scores so the largest magnitude is 4",
    )
    sp.add_argument(
        "--min-strength", type=float, default=1.0,
        help="minimum |score| for a lexicon word to count (default 1.0)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmlsa",
        description="Gradual machine learning for aspect-level sentiment analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("label", help="label every aspect unit of a corpus")
    _add_input_flags(p)
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("evaluate", help="score a predictions file against gold labels")
    p.add_argument("--predictions", required=True, help="predictions JSONL file")
    p.add_argument("--corpus", required=True, help="corpus JSON file with gold labels")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="runtime scaling on synthetic corpora")
    p.add_argument("--sizes", required=True, help="comma-separated unit counts")
    p.add_argument("--easy-fraction", type=float, default=0.5)
    p.add_argument("--relation-density", type=float, default=0.6)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--out", help="write CSV here instead of stdout")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("easy-stats", help="easy labeling proportion and accuracy")
    _add_input_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_easy_stats)

    p = sub.add_parser("inspect", help="dump one unit's features and evidence state")
    _add_input_flags(p)
    _add_config_flags(p)
    p.add_argument("--unit", type=int, required=True, help="unit id to inspect")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("generate", help="write a synthetic corpus and its lexicon")
    p.add_argument("--units", type=int, required=True, help="number of aspect units")
    p.add_argument("--easy-fraction", type=float, default=0.5)
    p.add_argument("--relation-density", type=float, default=0.6)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CorpusError, LexiconError, NoEvidenceError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
