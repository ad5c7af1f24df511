"""Command-line entry point: train, check, evaluate, baseline,
validate-config.

Exit codes: 0 success / policy complete (possibly with warnings),
3 violations found, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import corpus as corpus_io
from .classifiers import (
    AnnotatedCorpus,
    KeywordIndex,
    TrainingError,
    build_similarity_model,
    load_keyword_index,
    predict_keywords,
    train_binary,
)
from .criteria import Criterion, check_all, parse_criteria
from .embeddings import load_vectors
from .evaluation import (
    ConfusionCounts,
    baseline_identify_records,
    build_rows,
    count_issues,
    count_manifestations,
    gold_indices_for,
    render_table,
    render_table_delimited,
)
from .nlp import (
    PipelineConfig,
    ProcessedSentence,
    RawDocument,
    Sentence,
    load_gazetteers,
    load_lemma_exceptions,
    load_stopwords,
    split_sentences,
)
from .prediction import (
    ModelBundle,
    PolicyMetadataPresence,
    SentencePrediction,
    build_context,
    build_oracle_context,
    dump_predictions,
    identify_metadata,
    predict_document,
)
from .report import build_report, render_structured, render_text
from .resources import default_text
from .taxonomy import TaxonomyRegistry, load_taxonomy

CONFIG_ENV_VAR = "POLICYCHECK_CONFIG"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATIONS = 3


class CliError(Exception):
    """Configuration or usage error; maps to exit code 2."""


@dataclass
class RunConfig:
    taxonomy: str | None = None
    stopwords: str | None = None
    gazetteers: str | None = None
    lemma_lexicon: str | None = None
    keywords: str | None = None
    vectors: str | None = None
    models: str | None = None
    criteria: str | None = None
    theta: float = 0.9
    seed: int = 42
    outdir: str = "."

    def __post_init__(self) -> None:
        if not 0.0 < self.theta <= 1.0:
            raise CliError(f"theta must be in (0, 1]: {self.theta}")


_CONFIG_PATH_KEYS = (
    "taxonomy",
    "stopwords",
    "gazetteers",
    "lemma_lexicon",
    "keywords",
    "vectors",
    "models",
    "criteria",
)


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"{path}:{lineno}: expected key=value")
        values[key.strip()] = value.strip()
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        values = _read_config_file(config_path)
        for key, value in values.items():
            if key in _CONFIG_PATH_KEYS:
                config = replace(config, **{key: value})
            elif key == "theta":
                config = replace(config, theta=float(value))
            elif key == "seed":
                config = replace(config, seed=int(value))
            elif key == "outdir":
                config = replace(config, outdir=value)
            else:
                raise CliError(f"{config_path}: unknown config key {key!r}")
    for key in _CONFIG_PATH_KEYS + ("outdir",):
        value = getattr(args, key, None)
        if value is not None:
            config = replace(config, **{key: value})
    if getattr(args, "theta", None) is not None:
        config = replace(config, theta=args.theta)
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    return config


@dataclass
class Environment:
    registry: TaxonomyRegistry
    pipeline: PipelineConfig
    criteria: list[Criterion]
    keywords: KeywordIndex


def _read(path: str | None, default_name: str) -> str:
    if path is None:
        return default_text(default_name)
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def load_environment(config: RunConfig) -> Environment:
    try:
        registry = load_taxonomy(_read(config.taxonomy, "taxonomy.txt"))
        pipeline = PipelineConfig(
            stopwords=load_stopwords(_read(config.stopwords, "stopwords.txt")),
            gazetteers=load_gazetteers(_read(config.gazetteers, "gazetteers.txt")),
            lemma_exceptions=load_lemma_exceptions(
                _read(config.lemma_lexicon, "lemma_exceptions.tsv")
            ),
        )
        criteria = parse_criteria(_read(config.criteria, "criteria.txt"), registry)
        keywords = load_keyword_index(
            _read(config.keywords, "keywords.tsv"), registry, pipeline
        )
    except CliError:
        raise
    except Exception as exc:
        raise CliError(str(exc)) from exc
    return Environment(registry, pipeline, criteria, keywords)


def _load_store(config: RunConfig):
    if not config.vectors:
        raise CliError("word-vector file is required (--vectors)")
    try:
        return load_vectors(config.vectors)
    except OSError as exc:
        raise CliError(f"cannot read vectors {config.vectors}: {exc}") from exc
    except Exception as exc:
        raise CliError(str(exc)) from exc


def _records_as_processed(records) -> list[ProcessedSentence]:
    return [
        ProcessedSentence(
            sentence=Sentence(
                index=r.index, raw_text=r.raw_text, start=0, end=len(r.raw_text)
            ),
            tokens=tuple(r.tokens),
        )
        for r in records
    ]


def _gold_presence(records, registry) -> PolicyMetadataPresence:
    predictions = [
        SentencePrediction(index=r.index, labels=frozenset(r.labels)) for r in records
    ]
    return PolicyMetadataPresence.from_predictions(predictions, registry)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_train(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    env = load_environment(config)
    store = _load_store(config)
    try:
        corpus = corpus_io.load_corpus(args.corpus, env.registry, env.pipeline)
    except OSError as exc:
        raise CliError(f"cannot read corpus: {exc}") from exc
    except corpus_io.CorpusError as exc:
        raise CliError(str(exc)) from exc

    targets = env.registry.at_level(1) + env.registry.at_level(2)
    linear = {}
    trained_types = []
    skipped: list[tuple[str, str]] = []
    print(f"{'type':<55}{'positives':>10}{'negatives':>10}")
    for t in targets:
        positives = corpus.positives(t)
        if not positives:
            skipped.append((str(t), "no positives"))
            continue
        try:
            model = train_binary(corpus, t, store, config.seed)
        except TrainingError as exc:
            skipped.append((str(t), str(exc)))
            continue
        linear[t] = model
        sampled = min(len(corpus.negatives(t)), len(positives))
        trained_types.append(t)
        print(f"{str(t):<55}{len(positives):>10}{sampled:>10}")
    similarity = build_similarity_model(corpus, trained_types, store, config.theta)
    if not config.models:
        raise CliError("model output path is required (--models)")
    corpus_io.save_models(config.models, linear, similarity, config.seed, store.dimension)
    if skipped:
        print("\nskipped types:")
        for name, reason in skipped:
            print(f"  {name}: {reason}")
    print(f"\nsaved {len(linear)} classifiers to {config.models}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    env = load_environment(config)
    store = _load_store(config)
    policy_path = Path(args.policy)
    try:
        text = policy_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read policy: {exc}") from exc
    policy_id = args.policy_id or policy_path.stem
    try:
        answers = corpus_io.load_answers(args.answers)
    except OSError as exc:
        raise CliError(f"cannot read answers: {exc}") from exc
    except corpus_io.CorpusError as exc:
        raise CliError(str(exc)) from exc
    if policy_id not in answers:
        raise CliError(f"answers file has no [{policy_id}] section")
    policy_answers = answers[policy_id]

    if not config.models:
        raise CliError("trained models are required (--models)")
    try:
        linear, similarity, _, _ = corpus_io.load_models(config.models, env.registry)
    except OSError as exc:
        raise CliError(f"cannot read models: {exc}") from exc
    except corpus_io.CorpusError as exc:
        raise CliError(str(exc)) from exc
    bundle = ModelBundle(linear=linear, similarity=similarity, keywords=env.keywords)

    doc = RawDocument(id=policy_id, text=text, source=str(policy_path))
    presence = identify_metadata(
        doc,
        bundle,
        store,
        env.pipeline,
        env.registry,
        c_id=policy_answers.q1_controller_identity,
        cr_id=policy_answers.q5_representative_identity,
    )
    findings = check_all(presence, policy_answers, env.criteria, env.registry)
    sentence_texts = [s.raw_text for s in split_sentences(doc)]
    report = build_report(policy_id, sentence_texts, findings)

    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / f"{policy_id}.report.txt").write_text(render_text(report), encoding="utf-8")
    (outdir / f"{policy_id}.report.json").write_text(
        render_structured(report), encoding="utf-8"
    )
    print(render_text(report), end="")
    if report.violations:
        return EXIT_VIOLATIONS
    if report.warnings:
        print(f"notice: {report.warnings} warnings need expert review")
    return EXIT_OK


def _load_eval_inputs(args, config, env) -> tuple[AnnotatedCorpus, dict]:
    try:
        corpus = corpus_io.load_corpus(args.corpus, env.registry, env.pipeline)
        answers = corpus_io.load_answers(args.answers)
    except OSError as exc:
        raise CliError(str(exc)) from exc
    except corpus_io.CorpusError as exc:
        raise CliError(str(exc)) from exc
    if not corpus.records:
        raise CliError("empty test corpus")
    return corpus, answers


def _predicted_presences(args, config, env, corpus, answers, mode):
    """Per-policy (answers, gold presence, predicted presence, prediction
    dump). Policies are independent, so they run on a bounded worker pool and
    results are merged back in corpus order."""
    bundle = None
    store = None
    if mode == "models":
        store = _load_store(config)
        if not config.models:
            raise CliError("trained models are required (--models)")
        try:
            linear, similarity, _, _ = corpus_io.load_models(config.models, env.registry)
        except corpus_io.CorpusError as exc:
            raise CliError(str(exc)) from exc
        except OSError as exc:
            raise CliError(str(exc)) from exc
        bundle = ModelBundle(linear=linear, similarity=similarity, keywords=env.keywords)

    by_policy = corpus.by_policy()
    for policy_id in by_policy:
        if policy_id not in answers:
            raise CliError(f"answers file has no [{policy_id}] section")

    def evaluate_policy(policy_id):
        records = by_policy[policy_id]
        a = answers[policy_id]
        gold = _gold_presence(records, env.registry)
        if mode == "baseline":
            predictions = [
                SentencePrediction(
                    index=ps.sentence.index,
                    labels=frozenset(predict_keywords(env.keywords, ps)),
                )
                for ps in _records_as_processed(records)
            ]
        else:
            if mode == "oracle":
                ctx = build_oracle_context(
                    records,
                    env.registry,
                    c_id=a.q1_controller_identity,
                    cr_id=a.q5_representative_identity,
                )
            else:
                ctx = build_context(
                    _records_as_processed(records),
                    bundle,
                    store,
                    env.registry,
                    c_id=a.q1_controller_identity,
                    cr_id=a.q5_representative_identity,
                )
            predictions = predict_document(ctx, env.registry)
        predicted = PolicyMetadataPresence.from_predictions(predictions, env.registry)
        return a, gold, predicted, dump_predictions(policy_id, predictions)

    policy_ids = list(by_policy)
    with ThreadPoolExecutor(max_workers=min(8, max(1, len(policy_ids)))) as pool:
        results = list(pool.map(evaluate_policy, policy_ids))
    return dict(zip(policy_ids, results))


def _run_evaluation(args, mode: str) -> int:
    config = resolve_config(args)
    env = load_environment(config)
    if getattr(args, "counts_replay", None):
        return _counts_replay(args.counts_replay, config)
    corpus, answers = _load_eval_inputs(args, config, env)
    per_policy = _predicted_presences(args, config, env, corpus, answers, mode)

    types = list(env.registry)
    type_counts = {t: ConfusionCounts() for t in types}
    criterion_counts = {c.id: ConfusionCounts() for c in env.criteria}
    dumps = []
    for policy_id, (a, gold, predicted, dump) in per_policy.items():
        dumps.append(dump)
        records = corpus.by_policy()[policy_id]
        for t in types:
            type_counts[t] = type_counts[t] + count_manifestations(
                predicted.supporting(t), gold_indices_for(records, t)
            )
        gold_findings = check_all(gold, a, env.criteria, env.registry)
        predicted_findings = check_all(predicted, a, env.criteria, env.registry)
        by_id = {c.id: c for c in env.criteria}
        for pf, gf in zip(predicted_findings, gold_findings):
            criterion = by_id[pf.criterion_id]
            criterion_counts[pf.criterion_id] = criterion_counts[
                pf.criterion_id
            ] + count_issues(pf, gf, criterion)

    type_rows = build_rows([(str(t), c) for t, c in type_counts.items()])
    criterion_rows = build_rows(list(criterion_counts.items()))
    label = {"models": "trained models", "oracle": "oracle verdicts", "baseline": "keyword baseline"}[mode]
    text = render_table(type_rows, f"Metadata identification ({label})")
    text += "\n" + render_table(criterion_rows, f"Completeness checking ({label})")
    print(text, end="")
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    prefix = "baseline" if mode == "baseline" else "evaluation"
    (outdir / f"{prefix}_types.tsv").write_text(
        render_table_delimited(type_rows), encoding="utf-8"
    )
    (outdir / f"{prefix}_criteria.tsv").write_text(
        render_table_delimited(criterion_rows), encoding="utf-8"
    )
    (outdir / f"{prefix}_predictions.tsv").write_text("".join(dumps), encoding="utf-8")
    return EXIT_OK


def _counts_replay(path: str, config: RunConfig) -> int:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read counts table: {exc}") from exc
    named = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise CliError(f"{path}:{lineno}: expected name<TAB>tp<TAB>fp<TAB>fn<TAB>tn")
        try:
            counts = ConfusionCounts(*(int(p) for p in parts[1:]))
        except ValueError as exc:
            raise CliError(f"{path}:{lineno}: {exc}") from exc
        named.append((parts[0], counts))
    if not named:
        raise CliError(f"{path}: no rows")
    rows = build_rows(named)
    print(render_table(rows, "Replayed counts"), end="")
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "replay.tsv").write_text(render_table_delimited(rows), encoding="utf-8")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    mode = "oracle" if args.oracle else "models"
    return _run_evaluation(args, mode)


def cmd_baseline(args: argparse.Namespace) -> int:
    return _run_evaluation(args, "baseline")


def cmd_validate_config(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    env = load_environment(config)
    print(f"taxonomy: {len(env.registry)} types")
    print(f"criteria: {len(env.criteria)}")
    print(f"keyword index: {sum(len(p) for p in env.keywords.phrases.values())} phrases "
          f"for {len(env.keywords.phrases)} types")
    print(f"stopwords: {len(env.pipeline.stopwords)}")
    if config.vectors:
        store = _load_store(config)
        print(f"vectors: {len(store)} entries, dimension {store.dimension}")
    print("configuration OK")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help=f"config file (or ${CONFIG_ENV_VAR})")
    parser.add_argument("--taxonomy")
    parser.add_argument("--stopwords")
    parser.add_argument("--gazetteers")
    parser.add_argument("--lemma-lexicon", dest="lemma_lexicon")
    parser.add_argument("--keywords")
    parser.add_argument("--vectors")
    parser.add_argument("--models")
    parser.add_argument("--criteria")
    parser.add_argument("--theta", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--outdir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policycheck",
        description="Identify regulation-relevant metadata in privacy policies "
        "and check them against completeness criteria.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train classifiers from an annotated corpus")
    p.add_argument("corpus")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("check", help="check one policy document for completeness")
    p.add_argument("policy")
    p.add_argument("answers")
    p.add_argument("--policy-id", dest="policy_id")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("evaluate", help="score predictions against a gold corpus")
    p.add_argument("corpus", nargs="?")
    p.add_argument("answers", nargs="?")
    p.add_argument("--oracle", action="store_true",
                   help="inject classifier verdicts from gold labels")
    p.add_argument("--counts-replay", dest="counts_replay",
                   help="emit metrics for a TSV of tp/fp/fn/tn rows")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="keyword-only identification, same tables")
    p.add_argument("corpus")
    p.add_argument("answers")
    _add_common(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("validate-config", help="load all config files and report")
    _add_common(p)
    p.set_defaults(func=cmd_validate_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "evaluate" and not args.counts_replay:
        if not args.corpus or not args.answers:
            parser.error("evaluate requires corpus and answers (or --counts-replay)")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
