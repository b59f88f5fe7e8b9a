"""File-backed annotation store: append-only JSON-lines logs with a
periodic snapshot, plus versioned model files.

Layout under the store root:

  candidates.jsonl    one candidate window per line, append-only
  annotations.jsonl   full annotation history, append-only, latest wins
  versions.jsonl      model version records, append-only
  models/             model_v<N>.mvnn parameter files
  snapshot.json       optional compaction: state + consumed log line counts

Replaying the logs reconstructs store state exactly; the snapshot only
short-circuits the replay.
"""

import datetime
import json
import os
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .corpus import TokenWindow
from .metrics import MetricsRecord
from .network import Network, load_model_file, save_model_file

ANNOTATION_SOURCES = ("human", "model_approved")


class UnknownCandidateError(KeyError):
    pass


@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    tokens: tuple[str, ...]       # 11-slot window, center at index 5
    violent_word: str = ""
    network: str = ""
    source_id: str = ""

    def __post_init__(self):
        TokenWindow(tuple(self.tokens))  # validates shape and center

    def window(self) -> TokenWindow:
        return TokenWindow(tuple(self.tokens))


@dataclass(frozen=True)
class Annotation:
    annotation_id: str
    candidate_id: str
    label: int
    annotator: str
    source: str = "human"
    subject: str | None = None
    object: str | None = None
    timestamp: str = ""

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if self.source not in ANNOTATION_SOURCES:
            raise ValueError(f"source must be one of {ANNOTATION_SOURCES}")


@dataclass(frozen=True)
class ModelVersion:
    version: int
    training_size: int
    metrics: MetricsRecord
    created: str
    seed: int
    model_file: str
    group_metrics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["metrics"] = self.metrics.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelVersion":
        d = dict(d)
        d["metrics"] = MetricsRecord.from_dict(d["metrics"])
        return cls(**d)


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class AnnotationStore:
    """Single-writer store; appends are serialized through one lock and
    fsynced before being acknowledged."""

    def __init__(self, root, snapshot_every: int = 100):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "models").mkdir(exist_ok=True)
        self._lock = threading.Lock()
        self.snapshot_every = snapshot_every

        self.candidates: dict[str, Candidate] = {}
        self.history: list[Annotation] = []
        self.latest: dict[str, Annotation] = {}
        self.versions: list[ModelVersion] = []
        self._writes_since_snapshot = 0
        self._load()

    # paths

    @property
    def candidates_path(self) -> Path:
        return self.root / "candidates.jsonl"

    @property
    def annotations_path(self) -> Path:
        return self.root / "annotations.jsonl"

    @property
    def versions_path(self) -> Path:
        return self.root / "versions.jsonl"

    @property
    def snapshot_path(self) -> Path:
        return self.root / "snapshot.json"

    # loading

    def _load(self) -> None:
        cand_skip = ann_skip = 0
        if self.snapshot_path.exists():
            snap = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
            cand_skip = snap["candidate_lines"]
            ann_skip = snap["annotation_lines"]
            for c in snap["candidates"]:
                cand = Candidate(**{**c, "tokens": tuple(c["tokens"])})
                self.candidates[cand.candidate_id] = cand
            for a in snap["annotations"]:
                ann = Annotation(**a)
                self.history.append(ann)
                self.latest[ann.candidate_id] = ann
        for line in self._read_lines(self.candidates_path, skip=cand_skip):
            cand = Candidate(**{**line, "tokens": tuple(line["tokens"])})
            self.candidates[cand.candidate_id] = cand
        for line in self._read_lines(self.annotations_path, skip=ann_skip):
            ann = Annotation(**line)
            self.history.append(ann)
            self.latest[ann.candidate_id] = ann
        for line in self._read_lines(self.versions_path):
            self.versions.append(ModelVersion.from_dict(line))

    @staticmethod
    def _read_lines(path: Path, skip: int = 0):
        if not path.exists():
            return
        with open(path, encoding="utf-8") as f:
            for i, line in enumerate(f):
                if i < skip or not line.strip():
                    continue
                yield json.loads(line)

    def _append(self, path: Path, record: dict) -> None:
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")
            f.flush()
            os.fsync(f.fileno())

    # candidates

    def add_candidate(self, candidate: Candidate) -> bool:
        """Append a candidate; returns False if the id is already present."""
        with self._lock:
            if candidate.candidate_id in self.candidates:
                return False
            self._append(self.candidates_path, asdict(candidate))
            self.candidates[candidate.candidate_id] = candidate
            return True

    def get_candidate(self, candidate_id: str) -> Candidate:
        try:
            return self.candidates[candidate_id]
        except KeyError:
            raise UnknownCandidateError(candidate_id) from None

    def pending(self) -> list[Candidate]:
        """Candidates without any annotation, in insertion order."""
        return [c for cid, c in self.candidates.items() if cid not in self.latest]

    # annotations

    def record_annotation(self, candidate_id: str, label: int, annotator: str,
                          source: str = "human", subject: str | None = None,
                          object: str | None = None,
                          timestamp: str | None = None) -> Annotation:
        """Durably append an annotation; the latest one per candidate wins."""
        with self._lock:
            if candidate_id not in self.candidates:
                raise UnknownCandidateError(candidate_id)
            ann = Annotation(
                annotation_id=f"a{len(self.history) + 1:08d}",
                candidate_id=candidate_id,
                label=label,
                annotator=annotator,
                source=source,
                subject=subject,
                object=object,
                timestamp=timestamp if timestamp is not None else _now(),
            )
            self._append(self.annotations_path, asdict(ann))
            self.history.append(ann)
            self.latest[candidate_id] = ann
            self._writes_since_snapshot += 1
            if self.snapshot_every and self._writes_since_snapshot >= self.snapshot_every:
                self._write_snapshot()
        return ann

    def annotation_history(self, candidate_id: str) -> list[Annotation]:
        return [a for a in self.history if a.candidate_id == candidate_id]

    def labeled(self) -> list[tuple[Candidate, Annotation]]:
        """Candidates joined with their latest annotation, insertion order."""
        return [(self.candidates[cid], ann) for cid, ann in self.latest.items()
                if cid in self.candidates]

    # snapshot

    def snapshot(self) -> None:
        with self._lock:
            self._write_snapshot()

    def _write_snapshot(self) -> None:
        state = {
            "candidate_lines": sum(1 for _ in self._read_lines(self.candidates_path)),
            "annotation_lines": sum(1 for _ in self._read_lines(self.annotations_path)),
            "candidates": [asdict(c) for c in self.candidates.values()],
            "annotations": [asdict(a) for a in self.history],
        }
        tmp = self.snapshot_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(state), encoding="utf-8")
        os.replace(tmp, self.snapshot_path)
        self._writes_since_snapshot = 0

    # model versions

    def next_version(self) -> int:
        return self.versions[-1].version + 1 if self.versions else 1

    def add_model_version(self, net: Network, training_size: int,
                          metrics: MetricsRecord, group_metrics: dict,
                          seed: int, created: str | None = None) -> ModelVersion:
        """Persist the model file, then append the version record."""
        with self._lock:
            version = self.next_version()
            model_file = f"models/model_v{version}.mvnn"
            save_model_file(net, self.root / model_file)
            record = ModelVersion(
                version=version,
                training_size=training_size,
                metrics=metrics,
                created=created if created is not None else _now(),
                seed=seed,
                model_file=model_file,
                group_metrics=group_metrics,
            )
            self._append(self.versions_path, record.to_dict())
            self.versions.append(record)
        return record

    def active_version(self) -> ModelVersion | None:
        return self.versions[-1] if self.versions else None

    def load_network(self, record: ModelVersion) -> Network:
        net, _ = load_model_file(self.root / record.model_file)
        return net
