"""Manifest ingestion, split protocol, dataset statistics, synthetic corpora.

A manifest is a UTF-8 CSV with a leading class-list comment::

    # classes: kitchen;office
    # tz_offset: 0
    id,timestamp,label,image_ref
    img-0001,1262304000.0,kitchen,frames/0001.png
    img-0002,1262304020.0,,hist:3,0,5

``label`` is a class name or empty for unlabeled; ``image_ref`` is a file
path or an inline count vector (``hist:`` prefix).  The ``tz_offset``
comment (seconds east of UTC, default 0) only affects calendar statistics.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import (
    InsufficientClassData,
    InvalidSpec,
    MissingField,
    NoLabeledRecords,
    ParseError,
    UnknownLabel,
)
from .util import atomic_write, subseed

SYNTH_EPOCH = 1262304000.0  # 2010-01-01 00:00:00 UTC
SYNTH_SPACING_S = 20.0  # average snapshot interval of the target cameras

TIMEOFDAY_BINS = ("morning", "afternoon", "evening", "night")
# Local-hour boundaries: [05,12) morning, [12,17) afternoon,
# [17,22) evening, [22,05) night.
_TOD_EDGES = (5, 12, 17, 22)


@dataclass(frozen=True)
class ImageRecord:
    """One image: unique id, UTC timestamp, optional class label."""

    id: str
    timestamp: float
    label: int | None = None
    image_ref: str = ""


@dataclass
class Manifest:
    """Timestamp-ordered image records plus the class name list."""

    records: list[ImageRecord]
    class_names: list[str]
    tz_offset: int = 0

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def labeled(self) -> list[ImageRecord]:
        return [r for r in self.records if r.label is not None]

    def validate(self) -> None:
        if len(self.class_names) < 1:
            raise ParseError("manifest declares no classes")
        seen: set[str] = set()
        prev = -np.inf
        for rec in self.records:
            if rec.id in seen:
                raise ParseError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if rec.timestamp < 0:
                raise ParseError(f"negative timestamp on record {rec.id!r}")
            if rec.timestamp < prev:
                raise ParseError("records not sorted by timestamp")
            prev = rec.timestamp
            if rec.label is not None and not 0 <= rec.label < len(self.class_names):
                raise UnknownLabel(f"record {rec.id!r}: label {rec.label} out of range")


@dataclass
class Split:
    """Disjoint per-class train/test id lists for one repeat."""

    train: dict[int, list[str]]
    test: dict[int, list[str]]
    seed: int


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the synthetic ground-truth corpus generator.

    ``class_sharpness`` is the symmetric Dirichlet concentration used to
    draw each class's word distribution: smaller values give sparser, more
    distinctive classes; large values make classes nearly uniform and hard
    to tell apart.
    """

    n_classes: int
    vocab_size: int
    n_frames: int
    self_prob: float
    words_per_image: int
    class_sharpness: float = 0.5

    def validate(self) -> None:
        if min(self.n_classes, self.vocab_size, self.n_frames, self.words_per_image) < 1:
            raise InvalidSpec("all counts must be positive")
        if not 0.0 < self.self_prob < 1.0:
            raise InvalidSpec("self_prob must lie in (0, 1)")
        if self.class_sharpness <= 0.0:
            raise InvalidSpec("class_sharpness must be positive")


@dataclass
class GroundTruth:
    """What the synthetic generator actually sampled."""

    labels: np.ndarray  # (T,) int
    transition: np.ndarray  # (K, K) row-stochastic
    word_dists: np.ndarray  # (K, Z) per-class word distributions


@dataclass
class StatsReport:
    """Per-class day coverage and time-of-day histogram."""

    class_names: list[str]
    days_seen: list[int]
    timeofday_hist: list[tuple[int, int, int, int]]


# --- manifest I/O ---------------------------------------------------------


def _parse_hist_ref(ref: str) -> np.ndarray:
    body = ref[len("hist:"):]
    try:
        counts = np.array([int(tok) for tok in body.split(",")], dtype=np.int64)
    except ValueError as exc:
        raise ParseError(f"bad inline histogram: {ref!r}") from exc
    if counts.size == 0 or (counts < 0).any():
        raise ParseError(f"bad inline histogram: {ref!r}")
    return counts


def inline_histogram(record: ImageRecord) -> np.ndarray | None:
    """Decode a ``hist:`` image_ref, or None if the ref is a path."""
    if record.image_ref.startswith("hist:"):
        return _parse_hist_ref(record.image_ref)
    return None


def format_hist_ref(counts: np.ndarray) -> str:
    return "hist:" + ",".join(str(int(c)) for c in counts)


def load_manifest(path: str | os.PathLike) -> Manifest:
    """Parse and validate a manifest file.

    Raises :class:`MissingField` on rows without id/timestamp,
    :class:`UnknownLabel` on labels outside the class list, and
    :class:`ParseError` on anything else malformed.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    return _parse_manifest_text(text)


def _parse_manifest_text(text: str) -> Manifest:
    lines = text.splitlines()
    class_names: list[str] | None = None
    tz_offset = 0
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        content = line[1:].strip()
        if content.startswith("classes:"):
            names = content[len("classes:"):].strip()
            class_names = [n.strip() for n in names.split(";") if n.strip()]
        elif content.startswith("tz_offset:"):
            try:
                tz_offset = int(content[len("tz_offset:"):].strip())
            except ValueError as exc:
                raise ParseError(f"bad tz_offset comment: {line!r}") from exc
    else:
        body_start = len(lines)

    if class_names is None or not class_names:
        raise ParseError("missing '# classes:' comment line")

    reader = csv.reader(io.StringIO("\n".join(lines[body_start:])))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing header row") from None
    if header != ["id", "timestamp", "label", "image_ref"]:
        raise ParseError(f"unexpected header {header!r}")

    label_index = {name: k for k, name in enumerate(class_names)}
    records = []
    for row in reader:
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}: {row!r}")
        rid, ts_str, label_str, ref = row
        if not rid:
            raise MissingField(f"row without id: {row!r}")
        if not ts_str:
            raise MissingField(f"row {rid!r} without timestamp")
        try:
            ts = float(ts_str)
        except ValueError as exc:
            raise ParseError(f"row {rid!r}: bad timestamp {ts_str!r}") from exc
        label: int | None = None
        if label_str:
            if label_str not in label_index:
                raise UnknownLabel(f"row {rid!r}: unknown label {label_str!r}")
            label = label_index[label_str]
        if ref.startswith("hist:"):
            _parse_hist_ref(ref)  # validate eagerly
        records.append(ImageRecord(id=rid, timestamp=ts, label=label, image_ref=ref))

    records.sort(key=lambda r: r.timestamp)
    manifest = Manifest(records=records, class_names=class_names, tz_offset=tz_offset)
    manifest.validate()
    return manifest


def save_manifest(manifest: Manifest, path: str | os.PathLike) -> None:
    manifest.validate()
    with atomic_write(path) as fh:
        fh.write("# classes: " + ";".join(manifest.class_names) + "\n")
        if manifest.tz_offset:
            fh.write(f"# tz_offset: {manifest.tz_offset}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "timestamp", "label", "image_ref"])
        for rec in manifest.records:
            label = manifest.class_names[rec.label] if rec.label is not None else ""
            writer.writerow([rec.id, repr(rec.timestamp), label, rec.image_ref])


# --- split protocol --------------------------------------------------------


def split_protocol(
    manifest: Manifest,
    n_train: int,
    n_test_max: int,
    repeats: int,
    seed: int,
) -> list[Split]:
    """Per-class train/test splits, repeated with fresh sampling.

    Each repeat samples ``n_train`` train images per class uniformly
    without replacement, then up to ``n_test_max`` of the leftovers as
    test; classes with fewer leftovers contribute them all.  Deterministic
    in ``seed``.
    """
    if repeats < 1:
        raise InvalidSpec("repeats must be >= 1")
    by_class: dict[int, list[str]] = {k: [] for k in range(manifest.n_classes)}
    for rec in manifest.labeled():
        by_class[rec.label].append(rec.id)
    for k, ids in by_class.items():
        if len(ids) <= n_train:
            raise InsufficientClassData(
                f"class {k} ({manifest.class_names[k]!r}) has {len(ids)} labeled "
                f"images, needs more than {n_train}"
            )

    splits = []
    for r in range(repeats):
        rng = np.random.default_rng(subseed(seed, f"split/{r}"))
        train: dict[int, list[str]] = {}
        test: dict[int, list[str]] = {}
        for k in range(manifest.n_classes):
            ids = by_class[k]
            order = rng.permutation(len(ids))
            shuffled = [ids[i] for i in order]
            train[k] = shuffled[:n_train]
            test[k] = shuffled[n_train : n_train + n_test_max]
        splits.append(Split(train=train, test=test, seed=seed))
    return splits


# --- statistics ------------------------------------------------------------


def _local_datetime(ts: float, tz_offset: int) -> datetime:
    return datetime.fromtimestamp(ts, tz=timezone.utc) + timedelta(seconds=tz_offset)


def _timeofday_bin(hour: int) -> int:
    if _TOD_EDGES[0] <= hour < _TOD_EDGES[1]:
        return 0
    if _TOD_EDGES[1] <= hour < _TOD_EDGES[2]:
        return 1
    if _TOD_EDGES[2] <= hour < _TOD_EDGES[3]:
        return 2
    return 3


def corpus_stats(manifest: Manifest) -> StatsReport:
    """Distinct calendar days and time-of-day histogram per class."""
    labeled = manifest.labeled()
    if not labeled:
        raise NoLabeledRecords("manifest has no labeled records")

    k_total = manifest.n_classes
    days: list[set] = [set() for _ in range(k_total)]
    tod = np.zeros((k_total, 4), dtype=np.int64)
    for rec in labeled:
        local = _local_datetime(rec.timestamp, manifest.tz_offset)
        days[rec.label].add(local.date())
        tod[rec.label, _timeofday_bin(local.hour)] += 1

    return StatsReport(
        class_names=list(manifest.class_names),
        days_seen=[len(d) for d in days],
        timeofday_hist=[tuple(int(v) for v in row) for row in tod],
    )


def stats_to_csv(report: StatsReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["class", "days_seen", *TIMEOFDAY_BINS])
    for name, days_seen, hist in zip(
        report.class_names, report.days_seen, report.timeofday_hist
    ):
        writer.writerow([name, days_seen, *hist])
    return out.getvalue()


# --- synthetic corpora -------------------------------------------------------


def _sticky_transition(k: int, self_prob: float) -> np.ndarray:
    if k == 1:
        return np.ones((1, 1))
    transition = np.full((k, k), (1.0 - self_prob) / (k - 1))
    np.fill_diagonal(transition, self_prob)
    return transition


def generate_synthetic(spec: SyntheticSpec, seed: int) -> tuple[Manifest, GroundTruth]:
    """Sample a labeled day-like sequence from a sticky Markov chain.

    Class word distributions come from a symmetric Dirichlet
    (``class_sharpness``), the label sequence from a chain with diagonal
    ``self_prob`` (initial state uniform), and each image's histogram from
    ``words_per_image`` multinomial draws.  Timestamps are spaced 20 s.
    Fully deterministic in ``seed``.
    """
    spec.validate()
    rng = np.random.default_rng(subseed(seed, "synth"))
    k, z, t_len = spec.n_classes, spec.vocab_size, spec.n_frames

    word_dists = rng.dirichlet(np.full(z, spec.class_sharpness), size=k)
    transition = _sticky_transition(k, spec.self_prob)

    labels = np.empty(t_len, dtype=np.int64)
    labels[0] = rng.integers(k)
    for t in range(1, t_len):
        labels[t] = rng.choice(k, p=transition[labels[t - 1]])

    records = []
    class_names = [f"place{j:02d}" for j in range(k)]
    for t in range(t_len):
        counts = rng.multinomial(spec.words_per_image, word_dists[labels[t]])
        records.append(
            ImageRecord(
                id=f"synth-{t:05d}",
                timestamp=SYNTH_EPOCH + SYNTH_SPACING_S * t,
                label=int(labels[t]),
                image_ref=format_hist_ref(counts),
            )
        )
    manifest = Manifest(records=records, class_names=class_names)
    truth = GroundTruth(labels=labels, transition=transition, word_dists=word_dists)
    return manifest, truth


def synthesize_iid_training(
    word_dists: np.ndarray,
    per_class: int,
    words_per_image: int,
    seed: int,
    class_names: list[str] | None = None,
) -> Manifest:
    """Sample a labeled iid training manifest from known class distributions.

    Companion to :func:`generate_synthetic`: draws ``per_class`` fresh
    histograms per class so a model bank can be trained on data disjoint
    from any chain-sampled day sequence.
    """
    k, _ = word_dists.shape
    if per_class < 1 or words_per_image < 1:
        raise InvalidSpec("per_class and words_per_image must be positive")
    if class_names is None:
        class_names = [f"place{j:02d}" for j in range(k)]
    rng = np.random.default_rng(subseed(seed, "synth/train"))
    records = []
    i = 0
    for j in range(k):
        for _ in range(per_class):
            counts = rng.multinomial(words_per_image, word_dists[j])
            records.append(
                ImageRecord(
                    id=f"train-{i:05d}",
                    timestamp=SYNTH_EPOCH + SYNTH_SPACING_S * i,
                    label=j,
                    image_ref=format_hist_ref(counts),
                )
            )
            i += 1
    return Manifest(records=records, class_names=list(class_names))
