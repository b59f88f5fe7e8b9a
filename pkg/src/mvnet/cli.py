"""Command-line interface.

Subcommands share --embeddings/--gold/--seed. Report-producing commands
write delimited output plus matplotlib figures next to it (disable with
--no-figures).
"""

import json
import sys
from pathlib import Path

import click

from .corpus import build_window, extract_candidates, parse_gold_csv_file, read_transcript, tokenize
from .embeddings import load_word2vec_file
from .experiment import SweepGrid, aggregate, emit_report, run_sweep
from .features import (
    balance_by_resampling,
    examples_from_gold,
    split_dataset,
    to_arrays,
)
from .metrics import evaluate_subsets, full_metrics
from .network import (
    ModelConfig,
    TrainConfig,
    init_network,
    load_model_file,
    predict,
    save_model_file,
    train,
)
from .store import AnnotationStore, Candidate


@click.group()
def main():
    """Metaphorical-violence classification toolkit."""


gold_opt = click.option("--gold", type=click.Path(exists=True, dir_okay=False),
                        required=True, help="gold-standard CSV")
emb_opt = click.option("--embeddings", type=click.Path(exists=True, dir_okay=False),
                       required=True, help="word2vec binary embeddings")
seed_opt = click.option("--seed", type=int, default=0, show_default=True)
max_words_opt = click.option("--max-words", type=int, default=None,
                             help="cap on embedding vocabulary size")
figures_opt = click.option("--figures/--no-figures", default=True, show_default=True,
                           help="render figures next to the output file")


def _load_splits(gold, embeddings, seed, max_words):
    records = parse_gold_csv_file(gold)
    table = load_word2vec_file(embeddings, max_words=max_words)
    examples = examples_from_gold(records, table)
    return table, examples, split_dataset(examples, seed)


def _report_format(path: Path) -> str:
    return "markdown" if path.suffix in (".md", ".markdown") else "csv"


@main.command()
@gold_opt
@emb_opt
@seed_opt
@max_words_opt
@figures_opt
@click.option("--layers", default="1,2,4", show_default=True,
              help="comma-separated hidden layer counts")
@click.option("--lrs", default="0.01,0.1", show_default=True,
              help="comma-separated learning rates")
@click.option("--trials", type=int, default=5, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--hidden-width", type=int, default=500, show_default=True)
@click.option("--max-epochs", type=int, default=500, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--dropout", type=float, default=0.5, show_default=True)
@click.option("--out", type=click.Path(), required=True,
              help="report file (.md for markdown, anything else CSV)")
def sweep(gold, embeddings, seed, max_words, figures, layers, lrs, trials,
          workers, hidden_width, max_epochs, batch_size, dropout, out):
    """Sweep (hidden layers x learning rate), average trials, write a report."""
    table, _, splits = _load_splits(gold, embeddings, seed, max_words)
    grid = SweepGrid(
        layer_options=tuple(int(x) for x in layers.split(",")),
        learning_rates=tuple(float(x) for x in lrs.split(",")),
        trials=trials,
        base_seed=seed,
    )
    mc = ModelConfig(input_dim=11 * table.dim, hidden_width=hidden_width,
                     dropout_rate=dropout)
    tc = TrainConfig(max_epochs=max_epochs, batch_size=batch_size)
    result = run_sweep(splits, grid, mc, tc, workers=workers)
    rows = aggregate(result)

    out_path = Path(out)
    with open(out_path, "wb") as f:
        emit_report(rows, _report_format(out_path), f)
    click.echo(f"wrote {out_path}")
    for cell in result.cells():
        note = f" ({cell.diverged} diverged)" if cell.diverged else ""
        auc = cell.mean_metrics.auc
        click.echo(f"  layers={cell.layers} lr={cell.learning_rate:g} "
                   f"auc={'n/a' if auc is None else f'{auc:.3f}'}{note}")
    if figures:
        from .plots import save_sweep_heatmap
        fig_path = out_path.with_name(out_path.stem + "_auc_heatmap.png")
        save_sweep_heatmap(result, fig_path)
        click.echo(f"wrote {fig_path}")


@main.command(name="train")
@gold_opt
@emb_opt
@seed_opt
@max_words_opt
@figures_opt
@click.option("--layers", type=int, default=1, show_default=True)
@click.option("--lr", type=float, default=0.01, show_default=True)
@click.option("--hidden-width", type=int, default=500, show_default=True)
@click.option("--max-epochs", type=int, default=500, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--dropout", type=float, default=0.5, show_default=True)
@click.option("--out", type=click.Path(), required=True, help="model file")
def train_cmd(gold, embeddings, seed, max_words, figures, layers, lr,
              hidden_width, max_epochs, batch_size, dropout, out):
    """Train one model on the gold data and save it."""
    table, _, splits = _load_splits(gold, embeddings, seed, max_words)
    balanced = balance_by_resampling(splits.train, seed)
    X_train, y_train = to_arrays(balanced)
    X_val, y_val = to_arrays(splits.validation)
    mc = ModelConfig(input_dim=11 * table.dim, hidden_layers=layers,
                     hidden_width=hidden_width, dropout_rate=dropout,
                     init_seed=seed)
    tc = TrainConfig(learning_rate=lr, max_epochs=max_epochs,
                     batch_size=batch_size, train_seed=seed)
    best, history = train(init_network(mc), X_train, y_train, X_val, y_val, tc)
    if history.stop_reason == "diverged":
        raise click.ClickException("training diverged; nothing saved")

    out_path = Path(out)
    save_model_file(best, out_path)
    X_test, y_test = to_arrays(splits.test)
    record = full_metrics(predict(best, X_test), y_test)
    click.echo(f"wrote {out_path} (stopped: {history.stop_reason}, "
               f"best epoch {history.best_epoch}/{history.epochs})")
    click.echo("test metrics: " + json.dumps(record.to_dict()))
    if figures:
        from .plots import save_training_curves
        fig_path = out_path.with_name(out_path.stem + "_training.png")
        save_training_curves(history, fig_path)
        click.echo(f"wrote {fig_path}")


@main.command(name="eval")
@gold_opt
@emb_opt
@seed_opt
@max_words_opt
@figures_opt
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--group-by", type=click.Choice(["violent_word", "network"]),
              default=None)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="metrics JSON file")
def eval_cmd(gold, embeddings, seed, max_words, figures, model_path, group_by,
             threshold, out):
    """Evaluate a saved model on the held-out test split."""
    table, _, splits = _load_splits(gold, embeddings, seed, max_words)
    net, _ = load_model_file(model_path)
    X_test, y_test = to_arrays(splits.test)
    scores = predict(net, X_test)

    payload = {"overall": full_metrics(scores, y_test, threshold).to_dict()}
    if group_by:
        keys = [getattr(ex, group_by) for ex in splits.test]
        grouped = evaluate_subsets(scores, y_test, keys, threshold)
        payload["group_by"] = group_by
        payload["groups"] = {k: m.to_dict() for k, m in grouped.items()}
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
        if figures:
            from .plots import save_roc_curve
            fig_path = Path(out).with_name(Path(out).stem + "_roc.png")
            save_roc_curve(scores, y_test, fig_path)
            click.echo(f"wrote {fig_path}")
    else:
        click.echo(text)


@main.command()
@emb_opt
@max_words_opt
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--text", required=True, help="utterance to scan for candidates")
@click.option("--threshold", type=float, default=0.9, show_default=True,
              help="confidence needed to offer a suggestion")
def suggest(embeddings, max_words, model_path, text, threshold):
    """Suggest labels for every violent-word candidate in TEXT."""
    from .service import suggest as make_suggestion

    table = load_word2vec_file(embeddings, max_words=max_words)
    net, _ = load_model_file(model_path)
    tokens = tokenize(text)
    candidates = extract_candidates(tokens)
    if not candidates:
        click.echo("no candidates found", err=True)
        sys.exit(1)
    for c in candidates:
        window = build_window(list(c.tokens), c.index)
        s = make_suggestion(net, 0, window, table, threshold=threshold)
        click.echo(json.dumps({
            "token_index": c.index,
            "lemma": c.lemma,
            "window": list(window.tokens),
            "label": s.label,
            "confidence": round(s.confidence, 4),
            "offered": s.offered,
        }))


@main.command()
@click.option("--store", "store_dir", type=click.Path(file_okay=False),
              required=True, help="annotation store directory")
@click.option("--transcripts", type=click.Path(exists=True, file_okay=False),
              default=None, help="directory of <network>_<show>_<date>.txt files")
@click.option("--gold", type=click.Path(exists=True, dir_okay=False), default=None,
              help="gold CSV imported as candidates + human annotations")
def ingest(store_dir, transcripts, gold):
    """Load candidates (and optional gold annotations) into a store."""
    if not transcripts and not gold:
        raise click.UsageError("provide --transcripts and/or --gold")
    store = AnnotationStore(store_dir)
    added_candidates = added_annotations = 0

    if transcripts:
        for path in sorted(Path(transcripts).glob("*.txt")):
            transcript = read_transcript(path)
            for line_no, utterance in enumerate(transcript.utterances):
                tokens = tokenize(utterance)
                for c in extract_candidates(tokens, source_id=path.stem):
                    window = build_window(tokens, c.index)
                    candidate = Candidate(
                        candidate_id=f"{path.stem}:{line_no}:{c.index}",
                        tokens=window.tokens,
                        violent_word=c.lemma,
                        network=transcript.network,
                        source_id=path.stem,
                    )
                    added_candidates += store.add_candidate(candidate)

    if gold:
        for record in parse_gold_csv_file(gold):
            tokens = tokenize(record.text)
            match = next(c for c in extract_candidates(tokens)
                         if c.lemma == record.violent_word)
            window = build_window(tokens, match.index)
            candidate = Candidate(
                candidate_id=record.id,
                tokens=window.tokens,
                violent_word=record.violent_word,
                network=record.network,
                source_id=record.id,
            )
            added_candidates += store.add_candidate(candidate)
            if record.id not in store.latest:
                store.record_annotation(
                    record.id, int(record.label), annotator="gold-import",
                    source="human", subject=record.subject, object=record.object,
                )
                added_annotations += 1

    click.echo(f"store {store_dir}: +{added_candidates} candidates, "
               f"+{added_annotations} annotations, "
               f"{len(store.pending())} pending")


@main.command()
@emb_opt
@max_words_opt
@click.option("--store", "store_dir", type=click.Path(file_okay=False), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--threshold", type=float, default=0.9, show_default=True,
              help="confidence needed to offer suggestions")
@click.option("--layers", type=int, default=1, show_default=True)
@click.option("--hidden-width", type=int, default=500, show_default=True)
@click.option("--lr", type=float, default=0.01, show_default=True)
@click.option("--max-epochs", type=int, default=500, show_default=True)
@click.option("--dropout", type=float, default=0.5, show_default=True)
@click.option("--static", "static_dir", type=click.Path(exists=True, file_okay=False),
              default=None, help="serve an annotator UI build from this directory")
def serve(embeddings, max_words, store_dir, host, port, threshold, layers,
          hidden_width, lr, max_epochs, dropout, static_dir):
    """Run the suggestion/annotation HTTP service."""
    import uvicorn

    from .service import create_app

    table = load_word2vec_file(embeddings, max_words=max_words)
    store = AnnotationStore(store_dir)
    mc = ModelConfig(input_dim=11 * table.dim, hidden_layers=layers,
                     hidden_width=hidden_width, dropout_rate=dropout)
    tc = TrainConfig(learning_rate=lr, max_epochs=max_epochs)
    app = create_app(store, table, offer_threshold=threshold,
                     mc_base=mc, tc_base=tc, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
