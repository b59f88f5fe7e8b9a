import json
import threading

import numpy as np
import pytest

from mvnet.metrics import MetricsRecord
from mvnet.network import ModelConfig, init_network, predict
from mvnet.store import (
    Annotation,
    AnnotationStore,
    Candidate,
    ModelVersion,
    UnknownCandidateError,
)


def make_candidate(i, word="hit"):
    tokens = ["the", "debate", "got", "ugly", "when", word,
              "came", "up", "again", "last", "night"]
    return Candidate(
        candidate_id=f"c{i:03d}",
        tokens=tuple(tokens),
        violent_word=word,
        network="CNN",
        source_id=f"src{i}",
    )


def test_candidate_validates_window_shape():
    with pytest.raises(ValueError):
        Candidate(candidate_id="bad", tokens=("only", "four", "tokens", "here"))
    with pytest.raises(ValueError):
        Candidate(candidate_id="bad", tokens=("a",) * 5 + ("",) + ("a",) * 5)


def test_annotation_validation():
    with pytest.raises(ValueError, match="label"):
        Annotation("a1", "c1", label=2, annotator="x")
    with pytest.raises(ValueError, match="source"):
        Annotation("a1", "c1", label=1, annotator="x", source="robot")


def test_add_candidate_and_duplicate(tmp_path):
    store = AnnotationStore(tmp_path)
    cand = make_candidate(1)
    assert store.add_candidate(cand) is True
    assert store.add_candidate(cand) is False
    assert store.get_candidate("c001") == cand
    with pytest.raises(UnknownCandidateError):
        store.get_candidate("missing")


def test_candidates_file_is_append_only_jsonl(tmp_path):
    store = AnnotationStore(tmp_path)
    store.add_candidate(make_candidate(1))
    store.add_candidate(make_candidate(2))
    lines = (tmp_path / "candidates.jsonl").read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["candidate_id"] == "c001"


def test_pending_insertion_order_and_decrement(tmp_path):
    store = AnnotationStore(tmp_path)
    for i in (3, 1, 2):
        store.add_candidate(make_candidate(i))
    assert [c.candidate_id for c in store.pending()] == ["c003", "c001", "c002"]
    store.record_annotation("c001", label=1, annotator="alice")
    assert [c.candidate_id for c in store.pending()] == ["c003", "c002"]


def test_annotation_unknown_candidate(tmp_path):
    store = AnnotationStore(tmp_path)
    with pytest.raises(UnknownCandidateError):
        store.record_annotation("ghost", label=0, annotator="alice")


def test_latest_annotation_wins_history_kept(tmp_path):
    store = AnnotationStore(tmp_path)
    store.add_candidate(make_candidate(1))
    first = store.record_annotation("c001", label=1, annotator="alice")
    second = store.record_annotation("c001", label=0, annotator="bob",
                                     source="model_approved")
    assert store.latest["c001"] == second
    assert store.annotation_history("c001") == [first, second]
    ((cand, ann),) = store.labeled()
    assert ann.label == 0 and ann.source == "model_approved"
    # full history survives on disk
    lines = (tmp_path / "annotations.jsonl").read_text().splitlines()
    assert len(lines) == 2


def test_reload_replays_logs(tmp_path):
    store = AnnotationStore(tmp_path)
    for i in range(4):
        store.add_candidate(make_candidate(i))
    store.record_annotation("c001", label=1, annotator="alice")
    store.record_annotation("c002", label=0, annotator="alice")
    store.record_annotation("c001", label=0, annotator="bob")

    reloaded = AnnotationStore(tmp_path)
    assert reloaded.candidates == store.candidates
    assert reloaded.history == store.history
    assert reloaded.latest == store.latest
    assert [c.candidate_id for c in reloaded.pending()] == ["c000", "c003"]


def test_snapshot_short_circuits_replay(tmp_path):
    store = AnnotationStore(tmp_path, snapshot_every=2)
    for i in range(3):
        store.add_candidate(make_candidate(i))
    store.record_annotation("c000", label=1, annotator="a")
    store.record_annotation("c001", label=0, annotator="a")  # triggers snapshot
    assert (tmp_path / "snapshot.json").exists()
    snap = json.loads((tmp_path / "snapshot.json").read_text())
    assert snap["candidate_lines"] == 3
    assert snap["annotation_lines"] == 2

    # appends after the snapshot still replay on top of it
    store.record_annotation("c002", label=1, annotator="b")
    reloaded = AnnotationStore(tmp_path)
    assert reloaded.latest.keys() == {"c000", "c001", "c002"}
    assert len(reloaded.history) == 3
    assert reloaded.pending() == []


def test_explicit_snapshot_roundtrip(tmp_path):
    store = AnnotationStore(tmp_path, snapshot_every=0)
    store.add_candidate(make_candidate(9, word="attack"))
    store.record_annotation("c009", label=1, annotator="a", subject="he",
                            object="plan", timestamp="2026-01-01T00:00:00+00:00")
    store.snapshot()
    reloaded = AnnotationStore(tmp_path)
    assert reloaded.history == store.history
    ann = reloaded.latest["c009"]
    assert (ann.subject, ann.object) == ("he", "plan")
    assert ann.timestamp == "2026-01-01T00:00:00+00:00"


def test_annotation_ids_sequential(tmp_path):
    store = AnnotationStore(tmp_path)
    store.add_candidate(make_candidate(1))
    ids = [store.record_annotation("c001", label=1, annotator="a").annotation_id
           for _ in range(3)]
    assert ids == ["a00000001", "a00000002", "a00000003"]


def test_concurrent_annotations_all_recorded(tmp_path):
    store = AnnotationStore(tmp_path)
    for i in range(8):
        store.add_candidate(make_candidate(i))

    def annotate(i):
        store.record_annotation(f"c{i:03d}", label=i % 2, annotator=f"t{i}")

    threads = [threading.Thread(target=annotate, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(store.history) == 8
    assert len({a.annotation_id for a in store.history}) == 8
    reloaded = AnnotationStore(tmp_path)
    assert len(reloaded.history) == 8


def test_model_versions(tmp_path):
    store = AnnotationStore(tmp_path)
    assert store.active_version() is None
    assert store.next_version() == 1

    config = ModelConfig(input_dim=6, hidden_layers=1, hidden_width=3,
                         dropout_rate=0.0, init_seed=1)
    net = init_network(config)
    rec = store.add_model_version(
        net, training_size=10,
        metrics=MetricsRecord(auc=0.9, accuracy=0.8),
        group_metrics={"violent_word": {"hit": MetricsRecord(auc=0.7).to_dict()}},
        seed=5, created="2026-01-02T00:00:00+00:00",
    )
    assert rec.version == 1
    assert store.next_version() == 2
    assert (tmp_path / "models" / "model_v1.mvnn").exists()

    rec2 = store.add_model_version(net, 12, MetricsRecord(auc=0.95), {}, seed=6)
    assert store.active_version() == rec2

    reloaded = AnnotationStore(tmp_path)
    assert [v.version for v in reloaded.versions] == [1, 2]
    assert reloaded.active_version().metrics.auc == 0.95
    assert reloaded.versions[0].group_metrics["violent_word"]["hit"]["auc"] == 0.7

    # stored model file reproduces the saved parameters
    loaded = reloaded.load_network(reloaded.versions[0])
    X = np.random.default_rng(0).normal(size=(4, 6))
    assert np.array_equal(predict(loaded, X), predict(net, X))


def test_model_version_dict_roundtrip():
    rec = ModelVersion(
        version=3, training_size=50,
        metrics=MetricsRecord(sensitivity=0.5, auc=None),
        created="2026-01-01T00:00:00+00:00", seed=9,
        model_file="models/model_v3.mvnn",
        group_metrics={"network": {"CNN": MetricsRecord(auc=0.6).to_dict()}},
    )
    assert ModelVersion.from_dict(json.loads(json.dumps(rec.to_dict()))) == rec
