"""End-to-end experiment runner.

Reads a flat key=value config, then for every topic: preprocess captions,
vectorize them against each embedding, stratified-split, balance the training
side, sweep the classifier suite on the three-class and binary tasks, and
collect evaluation reports plus top-T embedding scores. All randomness is
derived from the master seed per cell, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifiers import ALGORITHMS, DEFAULT_HYPERPARAMS, DUMMY, AlgorithmSpec, train
from .corpus import (
    Exclusion,
    Topic,
    filter_corpus,
    load_corpus,
    load_manifest,
    load_stopwords,
)
from .embeddings import EmbeddingTable, parse_embedding_file, vectorize_caption
from .metrics import (
    REPORT_CSV_HEADER,
    TASK_BINARY,
    TASK_THREE_CLASS,
    EmbeddingScore,
    EvaluationReport,
    embedding_performance,
    evaluate_predictions,
    rank_models,
    report_csv_row,
)
from .smote import SmoteParams, smote

TASK_BOTH = "both"
_TASK_ALIASES = {
    "three": TASK_THREE_CLASS,
    "three_class": TASK_THREE_CLASS,
    "binary": TASK_BINARY,
    "both": TASK_BOTH,
}

DEFAULT_TEST_FRACTION = 0.15
DEFAULT_SMOTE_K = 5
DEFAULT_T_VALUES = (5, 10, 15)
MAX_EMBEDDINGS = 4

EMBEDDING_SCORES_HEADER = ("topic", "task", "embedding", "T", "mu")

_VALID_TOPICS = tuple(t.value for t in Topic)
_NON_DUMMY = tuple(a for a in ALGORITHMS if a != DUMMY)


class ConfigError(Exception):
    """Invalid experiment configuration (file syntax or field values)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment settings.

    ``topics`` empty means "every topic present in the manifest".
    ``captions_root`` None means caption paths resolve against the manifest's
    directory. ``hyperparams`` maps algorithm name to override values; any
    parameter not listed keeps its default.
    """

    manifest: Path
    embeddings: tuple[tuple[str, Path], ...]
    captions_root: Path | None = None
    topics: tuple[str, ...] = ()
    task: str = TASK_BOTH
    test_fraction: float = DEFAULT_TEST_FRACTION
    smote_k: int = DEFAULT_SMOTE_K
    algorithms: tuple[str, ...] = _NON_DUMMY
    hyperparams: dict = field(default_factory=dict)
    t_values: tuple[int, ...] = DEFAULT_T_VALUES
    seed: int = 0
    out_dir: Path = Path("capsift-out")

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if not 1 <= len(self.embeddings) <= MAX_EMBEDDINGS:
            raise ConfigError(f"need 1..{MAX_EMBEDDINGS} embeddings, got {len(self.embeddings)}")
        names = [name for name, _ in self.embeddings]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate embedding names")
        if not self.algorithms:
            raise ConfigError("need at least one algorithm")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algo!r}; valid: {', '.join(ALGORITHMS)}")
        for topic in self.topics:
            if topic not in _VALID_TOPICS:
                raise ConfigError(f"unknown topic {topic!r}; valid: {', '.join(_VALID_TOPICS)}")
        if self.task not in (TASK_THREE_CLASS, TASK_BINARY, TASK_BOTH):
            raise ConfigError(f"task must be three|binary|both, got {self.task!r}")
        if self.smote_k < 1:
            raise ConfigError("smote_k must be >= 1")
        if not self.t_values or any(t < 1 for t in self.t_values):
            raise ConfigError("t_values must be positive integers")
        for algo in self.hyperparams:
            if algo not in ALGORITHMS:
                raise ConfigError(f"hyperparameter override for unknown algorithm {algo!r}")

    def tasks(self) -> tuple[str, ...]:
        if self.task == TASK_BOTH:
            return (TASK_THREE_CLASS, TASK_BINARY)
        return (self.task,)

    def sweep_algorithms(self) -> tuple[str, ...]:
        """Configured algorithms with the dummy baseline appended last."""
        return tuple(a for a in self.algorithms if a != DUMMY) + (DUMMY,)


def normalize_task(word: str) -> str:
    task = _TASK_ALIASES.get(word.strip().lower())
    if task is None:
        raise ConfigError(f"task must be three|binary|both, got {word!r}")
    return task


def _parse_int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _parse_number(value: str, key: str) -> float | int:
    try:
        return int(value)
    except ValueError:
        return _parse_float(value, key)


def _split_list(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a flat ``key = value`` config file.

    Blank lines and lines starting with ``#`` are ignored. Relative paths
    resolve against the config file's directory, so configs are relocatable.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    base = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base / candidate

    fields: dict = {}
    embeddings: list[tuple[str, Path]] = []
    hyperparams: dict[str, dict[str, float | int]] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "manifest":
            fields["manifest"] = resolve(value)
        elif key == "captions_root":
            fields["captions_root"] = resolve(value)
        elif key.startswith("embedding."):
            embeddings.append((key[len("embedding."):], resolve(value)))
        elif key == "topics":
            fields["topics"] = tuple(_split_list(value))
        elif key == "task":
            fields["task"] = normalize_task(value)
        elif key == "test_fraction":
            fields["test_fraction"] = _parse_float(value, key)
        elif key == "smote_k":
            fields["smote_k"] = _parse_int(value, key)
        elif key == "algorithms":
            fields["algorithms"] = tuple(_split_list(value))
        elif key == "t_values":
            seen: list[int] = []
            for part in _split_list(value):
                t = _parse_int(part, key)
                if t not in seen:
                    seen.append(t)
            fields["t_values"] = tuple(seen)
        elif key == "seed":
            fields["seed"] = _parse_int(value, key)
        elif key == "out":
            fields["out_dir"] = resolve(value)
        elif "." in key:
            algo, _, param = key.partition(".")
            if algo not in ALGORITHMS:
                raise ConfigError(f"{path}: line {line_no}: unknown key {key!r}")
            if param not in DEFAULT_HYPERPARAMS[algo]:
                raise ConfigError(
                    f"{path}: line {line_no}: unknown hyperparameter {param!r} for {algo}"
                )
            hyperparams.setdefault(algo, {})[param] = _parse_number(value, key)
        else:
            raise ConfigError(f"{path}: line {line_no}: unknown key {key!r}")
    if "manifest" not in fields:
        raise ConfigError(f"{path}: missing required key 'manifest'")
    if not embeddings:
        raise ConfigError(f"{path}: need at least one 'embedding.<name> = <path>' entry")
    return ExperimentConfig(embeddings=tuple(embeddings), hyperparams=hyperparams, **fields)


def render_config(config: ExperimentConfig, topics: tuple[str, ...], include_out: bool = True) -> str:
    """Canonical text form of a resolved config (echoed to the output
    directory; the fingerprint hashes this text minus the output path)."""

    def fmt(v) -> str:
        return repr(float(v)) if isinstance(v, float) else str(v)

    lines = [f"manifest = {config.manifest}"]
    if config.captions_root is not None:
        lines.append(f"captions_root = {config.captions_root}")
    for name, p in config.embeddings:
        lines.append(f"embedding.{name} = {p}")
    lines.append(f"topics = {','.join(topics)}")
    lines.append(f"task = {config.task}")
    lines.append(f"test_fraction = {repr(config.test_fraction)}")
    lines.append(f"smote_k = {config.smote_k}")
    lines.append(f"algorithms = {','.join(config.sweep_algorithms())}")
    lines.append(f"t_values = {','.join(str(t) for t in config.t_values)}")
    lines.append(f"seed = {config.seed}")
    for algo in sorted(set(config.sweep_algorithms())):
        effective = dict(DEFAULT_HYPERPARAMS[algo])
        effective.update(config.hyperparams.get(algo, {}))
        for param in sorted(effective):
            lines.append(f"{algo}.{param} = {fmt(effective[param])}")
    if include_out:
        lines.append(f"out = {config.out_dir}")
    return "\n".join(lines) + "\n"


def config_fingerprint(config: ExperimentConfig, topics: tuple[str, ...]) -> str:
    rendered = render_config(config, topics, include_out=False)
    return hashlib.sha256(rendered.encode("utf-8")).hexdigest()


def derive_seed(master: int, *parts: str) -> int:
    """Deterministic 64-bit seed for one pipeline cell.

    Hashing (master, topic, task, embedding, model) makes any single cell
    reproducible in isolation, independent of sweep order.
    """
    message = "|".join([str(master), *parts]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(message).digest()[:8], "big")


def binarize_labels(labels) -> np.ndarray:
    """Collapse {-1, 0, 1} to misinformation-vs-others: 1 -> 1, else 0."""
    arr = np.asarray(labels)
    if arr.size and not np.isin(arr, (-1, 0, 1)).all():
        bad = arr[~np.isin(arr, (-1, 0, 1))][0]
        raise ValueError(f"labels must be in {{-1, 0, 1}}, got {bad}")
    return np.where(arr == 1, 1, 0).astype(np.int64)


def stratified_split(labels, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded per-class split into (train_indices, test_indices).

    Per class the test share is round(n_k * fraction) (half rounds up),
    clamped to [1, n_k - 1] so both sides keep every class. Indices come back
    sorted. A class with fewer than 2 members cannot be split and is an
    error.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    y = np.asarray(labels)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("labels must be a 1-D array with at least 2 entries")
    rng = np.random.Generator(np.random.PCG64(seed))
    train_parts, test_parts = [], []
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        n_k = len(members)
        if n_k < 2:
            raise ValueError(f"class {cls} has only {n_k} sample(s); cannot split")
        n_test = int(math.floor(n_k * test_fraction + 0.5))
        n_test = min(max(n_test, 1), n_k - 1)
        perm = rng.permutation(n_k)
        test_parts.append(members[perm[:n_test]])
        train_parts.append(members[perm[n_test:]])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return train_idx, test_idx


@dataclass(frozen=True)
class SkippedCell:
    """A pipeline cell that could not run; '*' marks a whole-group skip."""

    topic: str
    task: str
    embedding: str
    model: str
    reason: str


@dataclass(frozen=True)
class ScoreRow:
    topic: str
    task: str
    score: EmbeddingScore


@dataclass(frozen=True)
class SplitAudit:
    """Train/test video-id membership for one (topic, embedding) split,
    shared by both tasks."""

    topic: str
    embedding: str
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


@dataclass
class RunResult:
    fingerprint: str
    config: ExperimentConfig
    topics: tuple[str, ...]
    reports: list[EvaluationReport]
    embedding_scores: list[ScoreRow]
    best_models: list[EvaluationReport]
    exclusions: list[Exclusion]
    skipped: list[SkippedCell]
    split_audits: list[SplitAudit]


def _effective_topics(config: ExperimentConfig, records) -> tuple[str, ...]:
    if config.topics:
        return config.topics
    return tuple(sorted({r.topic.value for r in records}))


def _vectorize_topic(documents, name: str, table: EmbeddingTable, exclusions):
    rows, labels, ids = [], [], []
    for doc in documents:
        cv = vectorize_caption(table, doc.tokens)
        if cv.vector is None:
            exclusions.append(Exclusion(
                video_id=doc.record.video_id,
                stage="coverage",
                reason=f"no in-vocabulary tokens for embedding {name}",
            ))
            continue
        rows.append(cv.vector)
        labels.append(int(doc.record.label))
        ids.append(doc.record.video_id)
    if not rows:
        return None, None, ()
    return np.vstack(rows), np.array(labels, dtype=np.int64), tuple(ids)


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Run the full sweep described by the config.

    Degenerate cells (a topic/class too small to split or balance, or a
    single-class binary task) are skipped with a logged reason and the run
    continues; a model that throws during training is likewise logged.
    """
    stopwords = load_stopwords()
    records = load_manifest(config.manifest)
    captions_root = config.captions_root or config.manifest.parent
    topics = _effective_topics(config, records)
    fingerprint = config_fingerprint(config, topics)
    tables = [
        (name, parse_embedding_file(path, name=name, lowercase_keys=True))
        for name, path in config.embeddings
    ]
    tasks = config.tasks()
    algorithms = config.sweep_algorithms()

    reports: list[EvaluationReport] = []
    score_rows: list[ScoreRow] = []
    best_models: list[EvaluationReport] = []
    exclusions: list[Exclusion] = []
    skipped: list[SkippedCell] = []
    split_audits: list[SplitAudit] = []

    for topic in topics:
        topic_records = [r for r in records if r.topic.value == topic]
        if not topic_records:
            skipped.append(SkippedCell(topic, "*", "*", "*", "no manifest rows for topic"))
            continue
        documents, load_skips = load_corpus(topic_records, captions_root, stopwords)
        exclusions.extend(load_skips)
        kept, rejections = filter_corpus(documents)
        exclusions.extend(rejections)
        if not kept:
            skipped.append(SkippedCell(topic, "*", "*", "*", "no captions left after filtering"))
            continue

        pools: dict[str, list[EvaluationReport]] = {task: [] for task in tasks}
        for name, table in tables:
            X, y3, ids = _vectorize_topic(kept, name, table, exclusions)
            if X is None:
                skipped.append(SkippedCell(
                    topic, "*", name, "*", "no caption had embedding coverage"))
                continue
            classes3, counts3 = np.unique(y3, return_counts=True)
            if len(classes3) < 2 or counts3.min() < 2:
                skipped.append(SkippedCell(
                    topic, "*", name, "*",
                    f"class counts {dict(zip(classes3.tolist(), counts3.tolist()))} "
                    "too small to split"))
                continue
            split_seed = derive_seed(config.seed, topic, "split", name)
            train_idx, test_idx = stratified_split(y3, config.test_fraction, split_seed)
            split_audits.append(SplitAudit(
                topic=topic, embedding=name,
                train_ids=tuple(ids[i] for i in train_idx),
                test_ids=tuple(ids[i] for i in test_idx),
            ))

            for task in tasks:
                y = y3 if task == TASK_THREE_CLASS else binarize_labels(y3)
                y_train, y_test = y[train_idx], y[test_idx]
                train_classes, train_counts = np.unique(y_train, return_counts=True)
                if len(train_classes) < 2:
                    skipped.append(SkippedCell(
                        topic, task, name, "*", "training split has a single class"))
                    continue
                if train_counts.min() < 2:
                    skipped.append(SkippedCell(
                        topic, task, name, "*",
                        "a training class has fewer than 2 samples; cannot balance"))
                    continue
                smote_seed = derive_seed(config.seed, topic, task, name, "__smote__")
                balanced = smote(X[train_idx], y_train,
                                 SmoteParams(k_neighbors=config.smote_k, seed=smote_seed))
                eval_classes = np.unique(y)
                cell_reports: list[EvaluationReport] = []
                for algo in algorithms:
                    model_seed = derive_seed(config.seed, topic, task, name, algo)
                    spec = AlgorithmSpec(
                        algorithm=algo,
                        hyperparams=config.hyperparams.get(algo, {}),
                        seed=model_seed,
                    )
                    try:
                        model = train(spec, balanced.features, balanced.labels)
                        y_pred = model.predict(X[test_idx])
                        positive = None
                        if task == TASK_BINARY:
                            col = int(np.flatnonzero(model.classes == 1)[0])
                            positive = model.predict_scores(X[test_idx])[:, col]
                        report = evaluate_predictions(
                            algo, name, task, y_test, y_pred, eval_classes,
                            positive_scores=positive, topic=topic, seed=model_seed,
                        )
                    except Exception as exc:  # keep the sweep alive, log the cell
                        skipped.append(SkippedCell(topic, task, name, algo, f"failed: {exc}"))
                        continue
                    cell_reports.append(report)
                if cell_reports:
                    ranked = rank_models(cell_reports)
                    reports.extend(ranked)
                    pools[task].extend(r for r in ranked if r.model != DUMMY)

        for task in tasks:
            pool = pools[task]
            if not pool:
                continue
            for t in config.t_values:
                for score in embedding_performance(pool, t):
                    score_rows.append(ScoreRow(topic=topic, task=task, score=score))
            best = min(pool, key=lambda r: (-r.f1_weighted, r.model, r.embedding))
            best_models.append(best)

    reports.sort(key=lambda r: (r.topic or "", r.task, r.embedding, r.model))
    score_rows.sort(key=lambda s: (s.topic, s.task, s.score.embedding, s.score.top_t))
    best_models.sort(key=lambda r: (r.task, r.topic or ""))
    return RunResult(
        fingerprint=fingerprint,
        config=config,
        topics=topics,
        reports=reports,
        embedding_scores=score_rows,
        best_models=best_models,
        exclusions=exclusions,
        skipped=skipped,
        split_audits=split_audits,
    )


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _best_models_markdown(result: RunResult) -> str:
    lines = ["# Best models by weighted F1", ""]
    for task in (TASK_THREE_CLASS, TASK_BINARY):
        rows = [r for r in result.best_models if r.task == task]
        if not rows:
            continue
        lines.append(f"## {task}")
        lines.append("")
        header = ["topic", "model", "embedding", "F1", "precision", "recall", "accuracy"]
        if task == TASK_BINARY:
            header.append("AUC")
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for r in rows:
            cells = [
                r.topic or "",
                r.model,
                r.embedding,
                f"{r.metrics.f1_weighted:.2f}",
                f"{r.metrics.precision_weighted:.2f}",
                f"{r.metrics.recall_weighted:.2f}",
                f"{r.metrics.accuracy:.2f}",
            ]
            if task == TASK_BINARY:
                cells.append(f"{r.auc_roc:.2f}")
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
    return "\n".join(lines) + "\n"


def emit_report(result: RunResult, out_dir: str | Path | None = None,
                formats: tuple[str, ...] = ("csv", "markdown")) -> list[Path]:
    """Write run artifacts into the output directory and return their paths.

    csv format: reports.csv (full float precision) and embedding_scores.csv
    (mu to 2 decimals). markdown format: best_models.md (2 decimals).
    exclusions.log and the resolved config echo are always written.
    """
    out = Path(out_dir) if out_dir is not None else result.config.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    written: list[Path] = []

    if "csv" in formats:
        reports_path = out / "reports.csv"
        _write_csv(reports_path, REPORT_CSV_HEADER,
                   [report_csv_row(r) for r in result.reports])
        written.append(reports_path)
        scores_path = out / "embedding_scores.csv"
        _write_csv(scores_path, EMBEDDING_SCORES_HEADER, [
            (s.topic, s.task, s.score.embedding, str(s.score.top_t), f"{s.score.mu:.2f}")
            for s in result.embedding_scores
        ])
        written.append(scores_path)

    if "markdown" in formats:
        best_path = out / "best_models.md"
        best_path.write_text(_best_models_markdown(result), encoding="utf-8")
        written.append(best_path)

    log_path = out / "exclusions.log"
    log_lines = [
        f"exclusion\t{e.stage}\t{e.video_id}\t{e.reason}" for e in result.exclusions
    ] + [
        f"skipped\t{s.topic}\t{s.task}\t{s.embedding}\t{s.model}\t{s.reason}"
        for s in result.skipped
    ]
    log_path.write_text("".join(line + "\n" for line in log_lines), encoding="utf-8")
    written.append(log_path)

    config_path = out / "config_resolved.txt"
    config_path.write_text(
        f"# fingerprint: {result.fingerprint}\n"
        + render_config(result.config, result.topics),
        encoding="utf-8",
    )
    written.append(config_path)
    return written
