"""Suggestion/annotation HTTP service.

The loop: the model suggests labels for pending candidate windows when
confident; annotators approve or correct; accepted annotations become
training data for the next model version. Retraining is operator
triggered and swaps the active model atomically; suggestion calls never
mutate the store.
"""

import threading
from dataclasses import asdict, dataclass, replace

from fastapi import Body, FastAPI, HTTPException, Query
from pydantic import BaseModel

from .corpus import TokenWindow
from .embeddings import DEFAULT_POLICY, EmbeddingTable, LookupPolicy
from .features import (
    LabeledExample,
    balance_by_resampling,
    featurize,
    split_dataset,
    to_arrays,
)
from .metrics import evaluate_subsets, full_metrics
from .network import (
    STOP_DIVERGED,
    ModelConfig,
    Network,
    TrainConfig,
    init_network,
    predict,
    train,
)
from .store import AnnotationStore, Candidate, ModelVersion, UnknownCandidateError

DEFAULT_OFFER_THRESHOLD = 0.9


@dataclass(frozen=True)
class Suggestion:
    candidate_id: str | None
    label: int
    confidence: float             # max class probability, in [0.5, 1]
    offered: bool                 # confidence >= threshold
    model_version: int


class RetrainError(RuntimeError):
    pass


class TrainingDiverged(RetrainError):
    pass


def suggest(net: Network, version: int, window: TokenWindow,
            table: EmbeddingTable, policy: LookupPolicy = DEFAULT_POLICY,
            threshold: float = DEFAULT_OFFER_THRESHOLD,
            candidate_id: str | None = None) -> Suggestion:
    """Label = argmax class, confidence = max probability, offered per threshold."""
    p1 = predict(net, featurize(window, table, policy))
    label = 1 if p1 > 0.5 else 0
    confidence = float(p1 if label == 1 else 1.0 - p1)
    return Suggestion(
        candidate_id=candidate_id,
        label=label,
        confidence=confidence,
        offered=confidence >= threshold,
        model_version=version,
    )


def examples_from_store(store: AnnotationStore, table: EmbeddingTable,
                        policy: LookupPolicy = DEFAULT_POLICY) -> list[LabeledExample]:
    """Rebuild labeled examples from candidates joined with latest annotations."""
    out = []
    for candidate, annotation in store.labeled():
        out.append(LabeledExample(
            features=featurize(candidate.window(), table, policy),
            label=annotation.label,
            provenance=candidate.candidate_id,
            violent_word=candidate.violent_word,
            network=candidate.network,
        ))
    return out


def retrain(store: AnnotationStore, table: EmbeddingTable,
            mc: ModelConfig, tc: TrainConfig, seed: int,
            policy: LookupPolicy = DEFAULT_POLICY,
            threshold: float = 0.5) -> tuple[ModelVersion, Network]:
    """Train a new model version from the store's latest annotations.

    Re-splits with the given seed, balances the training split, trains,
    evaluates on the held-out test split (overall and grouped by violent
    word and network), persists the model, and appends the version
    record. Raises without side effects if the store is unusable or
    training diverges; the previously active version stays in place.
    """
    examples = examples_from_store(store, table, policy)
    labels = {ex.label for ex in examples}
    if len(examples) < 5 or labels != {0, 1}:
        raise RetrainError(
            "store must hold at least 5 labeled candidates covering both classes"
        )
    mc = replace(mc, input_dim=TokenWindow.SIZE * table.dim, init_seed=seed)
    tc = replace(tc, train_seed=seed)
    splits = split_dataset(examples, seed)
    try:
        balanced = balance_by_resampling(splits.train, seed)
    except ValueError as exc:
        raise RetrainError(str(exc)) from None
    X_train, y_train = to_arrays(balanced)
    X_val, y_val = to_arrays(splits.validation)
    best, history = train(init_network(mc), X_train, y_train, X_val, y_val, tc)
    if history.stop_reason == STOP_DIVERGED:
        raise TrainingDiverged("training diverged; keeping the active model")

    X_test, y_test = to_arrays(splits.test)
    scores = predict(best, X_test)
    overall = full_metrics(scores, y_test, threshold)
    group_metrics = {}
    for group_by in ("violent_word", "network"):
        keys = [getattr(ex, group_by) for ex in splits.test]
        grouped = evaluate_subsets(scores, y_test, keys, threshold)
        group_metrics[group_by] = {k: m.to_dict() for k, m in grouped.items()}
    record = store.add_model_version(
        best, training_size=len(balanced), metrics=overall,
        group_metrics=group_metrics, seed=seed,
    )
    return record, best


class SuggestRequest(BaseModel):
    tokens: list[str]


class AnnotationRequest(BaseModel):
    candidate_id: str
    label: int
    annotator: str
    subject: str | None = None
    object: str | None = None
    source: str = "human"


class ServiceState:
    """Read-mostly model handle; swapped atomically at retrain completion."""

    def __init__(self, store: AnnotationStore, table: EmbeddingTable,
                 policy: LookupPolicy = DEFAULT_POLICY,
                 offer_threshold: float = DEFAULT_OFFER_THRESHOLD,
                 mc_base: ModelConfig = ModelConfig(),
                 tc_base: TrainConfig = TrainConfig()):
        self.store = store
        self.table = table
        self.policy = policy
        self.offer_threshold = offer_threshold
        self.mc_base = mc_base
        self.tc_base = tc_base
        self._active: tuple[ModelVersion, Network] | None = None
        self._swap_lock = threading.Lock()
        self._retrain_lock = threading.Lock()
        record = store.active_version()
        if record is not None:
            self._active = (record, store.load_network(record))

    def active(self) -> tuple[ModelVersion, Network] | None:
        with self._swap_lock:
            return self._active

    def swap(self, record: ModelVersion, net: Network) -> None:
        with self._swap_lock:
            self._active = (record, net)


def _parse_window(tokens: list[str]) -> TokenWindow:
    if len(tokens) != TokenWindow.SIZE:
        raise HTTPException(400, f"tokens must have exactly {TokenWindow.SIZE} entries")
    if not all(isinstance(t, str) for t in tokens):
        raise HTTPException(400, "tokens must be strings")
    if not tokens[TokenWindow.CENTER]:
        raise HTTPException(400, "center token (index 5) must be non-empty")
    return TokenWindow(tuple(tokens))


def create_app(store: AnnotationStore, table: EmbeddingTable,
               policy: LookupPolicy = DEFAULT_POLICY,
               offer_threshold: float = DEFAULT_OFFER_THRESHOLD,
               mc_base: ModelConfig = ModelConfig(),
               tc_base: TrainConfig = TrainConfig(),
               static_dir=None) -> FastAPI:
    app = FastAPI(title="mvnet annotation service")
    state = ServiceState(store, table, policy, offer_threshold, mc_base, tc_base)
    app.state.service = state

    def suggestion_for(candidate: Candidate) -> dict | None:
        active = state.active()
        if active is None:
            return None
        record, net = active
        s = suggest(net, record.version, candidate.window(), state.table,
                    state.policy, state.offer_threshold, candidate.candidate_id)
        return asdict(s)

    @app.get("/api/candidates")
    def list_candidates(status: str = Query("pending"), limit: int = Query(50, ge=1)):
        if status == "pending":
            candidates = store.pending()
        elif status == "all":
            candidates = list(store.candidates.values())
        else:
            raise HTTPException(400, f"unknown status {status!r}")
        items = []
        for c in candidates[:limit]:
            items.append({
                "candidate_id": c.candidate_id,
                "tokens": list(c.tokens),
                "center_index": TokenWindow.CENTER,
                "violent_word": c.violent_word,
                "network": c.network,
                "suggestion": suggestion_for(c),
            })
        return {"candidates": items, "pending_total": len(store.pending())}

    @app.post("/api/suggest")
    def suggest_window(req: SuggestRequest):
        active = state.active()
        if active is None:
            raise HTTPException(409, "cold start: no trained model is active yet")
        window = _parse_window(req.tokens)
        record, net = active
        return asdict(suggest(net, record.version, window, state.table,
                              state.policy, state.offer_threshold))

    @app.post("/api/annotations")
    def post_annotation(req: AnnotationRequest):
        if req.label not in (0, 1):
            raise HTTPException(400, "label must be 0 or 1")
        if not req.annotator.strip():
            raise HTTPException(400, "annotator must be non-empty")
        if req.source not in ("human", "model_approved"):
            raise HTTPException(400, f"unknown source {req.source!r}")
        try:
            ann = store.record_annotation(
                req.candidate_id, req.label, req.annotator,
                source=req.source, subject=req.subject, object=req.object,
            )
        except UnknownCandidateError:
            raise HTTPException(404, f"unknown candidate {req.candidate_id!r}") from None
        return {"id": ann.annotation_id, "candidate_id": ann.candidate_id,
                "label": ann.label, "source": ann.source}

    @app.post("/api/retrain")
    def post_retrain(body: dict | None = Body(default=None)):
        if not state._retrain_lock.acquire(blocking=False):
            raise HTTPException(503, "retrain already in progress")
        try:
            seed = None
            if body:
                seed = body.get("seed")
                if seed is not None and not isinstance(seed, int):
                    raise HTTPException(400, "seed must be an integer")
            if seed is None:
                seed = store.next_version() * 1000
            try:
                record, net = retrain(store, state.table, state.mc_base,
                                      state.tc_base, seed, state.policy)
            except TrainingDiverged as exc:
                raise HTTPException(500, str(exc)) from None
            except RetrainError as exc:
                raise HTTPException(409, str(exc)) from None
            state.swap(record, net)
            return record.to_dict()
        finally:
            state._retrain_lock.release()

    @app.get("/api/model")
    def get_model():
        active = state.active()
        if active is None:
            raise HTTPException(409, "cold start: no trained model is active yet")
        return active[0].to_dict()

    @app.get("/api/metrics")
    def get_metrics(group_by: str | None = Query(default=None)):
        active = state.active()
        if active is None:
            raise HTTPException(409, "cold start: no trained model is active yet")
        record = active[0]
        if group_by is None:
            return {"overall": record.metrics.to_dict()}
        if group_by not in record.group_metrics:
            raise HTTPException(
                400, f"group_by must be one of {sorted(record.group_metrics)}")
        return {"group_by": group_by, "groups": record.group_metrics[group_by]}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
