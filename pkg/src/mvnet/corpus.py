"""Gold-standard CSV ingestion, tokenization, and candidate search.

The gold CSV is UTF-8, comma-separated with double-quote escaping, and
carries the header:

  id,network,show,airing_date,violent_word,text,label,subject,object

Transcript fixtures are plain UTF-8 text files, one utterance per line,
named <network>_<show>_<date>.txt.
"""

import csv
import datetime
import string
from dataclasses import dataclass, field
from pathlib import Path

NETWORKS = ("MSNBC", "CNN", "FOXNEWS")
VIOLENT_WORDS = ("hit", "beat", "attack")

GOLD_CSV_COLUMNS = [
    "id", "network", "show", "airing_date", "violent_word",
    "text", "label", "subject", "object",
]

# Inflections searched for each configured lemma; broadcast text rarely
# uses the bare form.
DEFAULT_SURFACE_FORMS: dict[str, tuple[str, ...]] = {
    "hit": ("hit", "hits", "hitting"),
    "beat": ("beat", "beats", "beating"),
    "attack": ("attack", "attacks", "attacked", "attacking"),
}

_TRUE_LABELS = {"1", "true"}
_FALSE_LABELS = {"0", "false"}

# ASCII punctuation plus the typographic marks common in captions.
_STRIP_CHARS = string.punctuation + "‘’“”–—…"


class GoldCsvError(ValueError):
    """Schema or value violation in the gold CSV; names the row."""


@dataclass(frozen=True)
class GoldRecord:
    id: str
    network: str
    show: str
    airing_date: datetime.date
    violent_word: str
    text: str
    label: bool
    subject: str | None = None
    object: str | None = None


@dataclass(frozen=True)
class CandidateInstance:
    source_id: str
    tokens: tuple[str, ...]
    index: int
    lemma: str


@dataclass(frozen=True)
class TokenWindow:
    """Exactly 11 token slots; empty string = padding; center at slot 5."""

    tokens: tuple[str, ...]

    SIZE = 11
    CENTER = 5

    def __post_init__(self):
        if len(self.tokens) != self.SIZE:
            raise ValueError(f"window must have {self.SIZE} slots, got {len(self.tokens)}")
        if not self.tokens[self.CENTER]:
            raise ValueError("window center slot must be non-empty")

    @property
    def center_token(self) -> str:
        return self.tokens[self.CENTER]


def tokenize(text: str) -> list[str]:
    """Whitespace split, then strip punctuation off each token's ends.

    Intra-word characters (apostrophes, hyphens, anything else) survive
    because only the ends are stripped; case is preserved. Tokens that
    strip to nothing are dropped.
    """
    tokens = []
    for chunk in text.split():
        token = chunk.strip(_STRIP_CHARS)
        if token:
            tokens.append(token)
    return tokens


def extract_candidates(
    tokens: list[str] | tuple[str, ...],
    surface_forms: dict[str, tuple[str, ...]] | None = None,
    source_id: str = "",
) -> list[CandidateInstance]:
    """One candidate per token position matching a surface form (case-insensitive)."""
    if surface_forms is None:
        surface_forms = DEFAULT_SURFACE_FORMS
    if not surface_forms:
        raise ValueError("surface_forms must be non-empty")
    form_to_lemma = {
        form.lower(): lemma
        for lemma, forms in surface_forms.items()
        for form in forms
    }
    toks = tuple(tokens)
    out = []
    for i, token in enumerate(toks):
        lemma = form_to_lemma.get(token.lower())
        if lemma is not None:
            out.append(CandidateInstance(source_id, toks, i, lemma))
    return out


def build_window(tokens: list[str] | tuple[str, ...], index: int) -> TokenWindow:
    """11-token window centered on `index`, padded with empty slots at the edges."""
    n = len(tokens)
    if not 0 <= index < n:
        raise IndexError(f"index {index} out of range for {n} tokens")
    half = TokenWindow.CENTER
    slots = []
    for j in range(index - half, index + half + 1):
        slots.append(tokens[j] if 0 <= j < n else "")
    return TokenWindow(tuple(slots))


def _parse_label(raw: str, row_num: int) -> bool:
    value = raw.strip().lower()
    if value in _TRUE_LABELS:
        return True
    if value in _FALSE_LABELS:
        return False
    if not value:
        raise GoldCsvError(f"row {row_num}: missing label")
    raise GoldCsvError(f"row {row_num}: label must be one of 0/1/true/false, got {raw!r}")


def parse_gold_csv(stream) -> list[GoldRecord]:
    """Parse the gold CSV into records, validating every field.

    Errors name the offending data row (1 = first row after the header).
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise GoldCsvError("empty file: header row required") from None
    if header != GOLD_CSV_COLUMNS:
        raise GoldCsvError(
            f"bad header: expected {GOLD_CSV_COLUMNS}, got {header}"
        )

    records = []
    for row_num, row in enumerate(reader, start=1):
        if len(row) != len(GOLD_CSV_COLUMNS):
            raise GoldCsvError(
                f"row {row_num}: expected {len(GOLD_CSV_COLUMNS)} fields, got {len(row)}"
            )
        rec_id, network, show, date_raw, violent_word, text, label_raw, subj, obj = row
        if network not in NETWORKS:
            raise GoldCsvError(
                f"row {row_num}: unknown network {network!r} (expected one of {NETWORKS})"
            )
        if violent_word not in VIOLENT_WORDS:
            raise GoldCsvError(
                f"row {row_num}: unknown violent_word {violent_word!r}"
            )
        try:
            airing_date = datetime.date.fromisoformat(date_raw)
        except ValueError:
            raise GoldCsvError(
                f"row {row_num}: airing_date must be YYYY-MM-DD, got {date_raw!r}"
            ) from None
        label = _parse_label(label_raw, row_num)
        if not extract_candidates(tokenize(text), {violent_word: DEFAULT_SURFACE_FORMS[violent_word]}):
            raise GoldCsvError(
                f"row {row_num}: violent_word {violent_word!r} does not occur in text"
            )
        records.append(GoldRecord(
            id=rec_id,
            network=network,
            show=show,
            airing_date=airing_date,
            violent_word=violent_word,
            text=text,
            label=label,
            subject=subj or None,
            object=obj or None,
        ))
    return records


def write_gold_csv(records: list[GoldRecord], stream) -> None:
    """Inverse of parse_gold_csv; round-trips records exactly."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(GOLD_CSV_COLUMNS)
    for r in records:
        writer.writerow([
            r.id, r.network, r.show, r.airing_date.isoformat(), r.violent_word,
            r.text, "1" if r.label else "0", r.subject or "", r.object or "",
        ])


def parse_gold_csv_file(path) -> list[GoldRecord]:
    with open(path, newline="", encoding="utf-8") as f:
        return parse_gold_csv(f)


@dataclass
class Transcript:
    network: str
    show: str
    airing_date: datetime.date
    utterances: list[str] = field(default_factory=list)
    source: str = ""


def read_transcript(path) -> Transcript:
    """Read a fixture transcript named <network>_<show>_<date>.txt."""
    path = Path(path)
    parts = path.stem.split("_")
    if len(parts) != 3:
        raise ValueError(
            f"transcript file name must be <network>_<show>_<date>.txt, got {path.name!r}"
        )
    network, show, date_raw = parts
    network = network.upper()
    if network not in NETWORKS:
        raise ValueError(f"unknown network {network!r} in transcript name {path.name!r}")
    date = datetime.date.fromisoformat(date_raw)
    with open(path, encoding="utf-8") as f:
        utterances = [line.rstrip("\n") for line in f if line.strip()]
    return Transcript(network, show, date, utterances, source=path.name)
