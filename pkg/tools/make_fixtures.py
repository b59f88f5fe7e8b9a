#!/usr/bin/env python3
"""Generate the bundled desk-scale fixtures: a 300-row gold CSV, a
50-word dim-300 embedding table, and three transcript files.

Metaphorical rows use election vocabulary around the violent word;
literal rows use crime/disaster vocabulary, so a classifier trained on
the fixtures has real signal to find. Deterministic for a fixed seed;
outputs are committed, rerun only to regenerate them.
"""

import argparse
import datetime
from pathlib import Path

import numpy as np

from mvnet.corpus import GoldRecord, write_gold_csv
from mvnet.embeddings import EmbeddingTable, write_word2vec_file

VIOLENT_FORMS = {
    "hit": ["hit", "hits", "hitting"],
    "beat": ["beat", "beats", "beating"],
    "attack": ["attack", "attacks", "attacked", "attacking"],
}

METAPHOR_VOCAB = ["debate", "candidate", "poll", "rival", "campaign",
                  "senator", "speech", "policy", "argument", "critics"]
LITERAL_VOCAB = ["police", "storm", "victims", "soldiers", "border",
                 "crime", "suspect", "riot", "flooding", "gunman"]
FILLER_VOCAB = ["the", "a", "on", "in", "of", "to", "and", "last", "night",
                "President", "Obama", "Romney", "says", "again", "over",
                "new", "report", "early", "votes", "tonight"]

NETWORKS = ["MSNBC", "CNN", "FOXNEWS"]
SHOWS = {
    "MSNBC": ["maddow", "hardball"],
    "CNN": ["situationroom", "acooper"],
    "FOXNEWS": ["oreilly", "hannity"],
}

METAPHOR_TEMPLATES = [
    "{subj} {verb} {obj} in the debate last night",
    "the {subj} {verb} {obj} over the new policy",
    "critics say the campaign {verb} the senator again",
    "the poll shows {subj} {verb} {obj} on policy tonight",
    "{subj} says the argument {verb} the rival campaign",
]
METAPHOR_SUBJECTS = ["Obama", "Romney", "candidate", "senator", "critics"]
METAPHOR_OBJECTS = ["Romney", "Obama", "the rival", "the campaign", "the policy"]

LITERAL_TEMPLATES = [
    "police say the suspect {verb} victims near the border",
    "soldiers {verb} the gunman in the riot last night",
    "the storm {verb} the border early and flooding follows",
    "report says crime {verb} victims again tonight",
    "the gunman {verb} police in the early riot",
]


def build_embeddings(rng: np.random.Generator, dim: int = 300) -> EmbeddingTable:
    words = ([f for forms in VIOLENT_FORMS.values() for f in forms]
             + METAPHOR_VOCAB + LITERAL_VOCAB + FILLER_VOCAB)
    assert len(words) == len(set(words)) == 50
    matrix = rng.normal(0.0, 0.4, size=(len(words), dim)).astype(np.float32)
    return EmbeddingTable(dim, {w: i for i, w in enumerate(words)}, matrix)


def build_gold(rng: np.random.Generator, n_rows: int = 300,
               n_metaphor: int = 93) -> list:
    labels = np.zeros(n_rows, dtype=int)
    labels[:n_metaphor] = 1
    rng.shuffle(labels)

    start = datetime.date(2012, 9, 1)
    records = []
    for i, label in enumerate(labels):
        lemma = ["hit", "beat", "attack"][int(rng.integers(3))]
        form = VIOLENT_FORMS[lemma][int(rng.integers(len(VIOLENT_FORMS[lemma])))]
        network = NETWORKS[i % 3]
        show = SHOWS[network][int(rng.integers(2))]
        date = start + datetime.timedelta(days=int(rng.integers(91)))
        if label == 1:
            template = METAPHOR_TEMPLATES[int(rng.integers(len(METAPHOR_TEMPLATES)))]
            subject = METAPHOR_SUBJECTS[int(rng.integers(len(METAPHOR_SUBJECTS)))]
            obj = METAPHOR_OBJECTS[int(rng.integers(len(METAPHOR_OBJECTS)))]
            text = template.format(subj=subject, verb=form, obj=obj)
        else:
            template = LITERAL_TEMPLATES[int(rng.integers(len(LITERAL_TEMPLATES)))]
            subject, obj = None, None
            text = template.format(verb=form)
        text = text[0].upper() + text[1:] + "."
        records.append(GoldRecord(
            id=f"fx{i:04d}",
            network=network,
            show=show,
            airing_date=date,
            violent_word=lemma,
            text=text,
            label=bool(label),
            subject=subject if label == 1 else None,
            object=obj if label == 1 else None,
        ))
    return records


def build_transcripts(rng: np.random.Generator, out_dir: Path) -> None:
    specs = [
        ("msnbc", "maddow", "2012-09-14"),
        ("cnn", "situationroom", "2012-10-02"),
        ("foxnews", "oreilly", "2012-11-01"),
    ]
    for network, show, date in specs:
        lines = []
        for j in range(8):
            if j % 2 == 0:
                lemma = ["hit", "beat", "attack"][int(rng.integers(3))]
                form = VIOLENT_FORMS[lemma][int(rng.integers(len(VIOLENT_FORMS[lemma])))]
                pool = METAPHOR_TEMPLATES if rng.random() < 0.5 else LITERAL_TEMPLATES
                template = pool[int(rng.integers(len(pool)))]
                text = template.format(subj="Obama", verb=form, obj="Romney")
            else:
                text = "the early report says votes and new polls arrive tonight"
            lines.append(text[0].upper() + text[1:] + ".")
        path = out_dir / f"{network}_{show}_{date}.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures", help="output directory")
    parser.add_argument("--seed", type=int, default=20120906)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "transcripts").mkdir(exist_ok=True)
    rng = np.random.default_rng(args.seed)

    table = build_embeddings(rng)
    write_word2vec_file(table, out / "embeddings_50x300.bin")

    records = build_gold(rng)
    with open(out / "gold_300.csv", "w", newline="", encoding="utf-8") as f:
        write_gold_csv(records, f)

    build_transcripts(rng, out / "transcripts")
    print(f"wrote fixtures to {out}/ "
          f"({len(records)} gold rows, {len(table)} embedding words)")


if __name__ == "__main__":
    main()
