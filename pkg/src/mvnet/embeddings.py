"""Word-embedding tables stored in the word2vec binary format.

File layout (all little-endian):

  Header: ASCII "<vocab_size> <dim>\\n"
  Body, per entry:
    token bytes (UTF-8) -> one 0x20 separator -> dim * float32
    -> optional trailing 0x0A

The trailing newline after each vector is tolerated on read and always
emitted on write. Vectors are stored unnormalized, exactly as read.
"""

import io

import numpy as np


class Word2VecFormatError(ValueError):
    """Malformed header, truncated payload, or duplicate token."""


class _OffsetReader:
    """Buffered byte reader that tracks the absolute stream offset."""

    def __init__(self, stream, chunk_size: int = 1 << 20):
        self._stream = stream
        self._chunk = chunk_size
        self._buf = b""
        self._pos = 0          # cursor within _buf
        self.offset = 0        # absolute offset of the cursor

    def _fill(self) -> bool:
        data = self._stream.read(self._chunk)
        if not data:
            return False
        self._buf = self._buf[self._pos:] + data
        self._pos = 0
        return True

    def read_exact(self, n: int) -> bytes:
        while len(self._buf) - self._pos < n:
            if not self._fill():
                raise Word2VecFormatError(
                    f"truncated payload: needed {n} bytes at offset {self.offset}, "
                    f"got {len(self._buf) - self._pos}"
                )
        out = self._buf[self._pos:self._pos + n]
        self._pos += n
        self.offset += n
        return out

    def read_until(self, sep: bytes) -> bytes:
        """Read up to and including `sep`; returned bytes exclude it."""
        while True:
            idx = self._buf.find(sep, self._pos)
            if idx >= 0:
                out = self._buf[self._pos:idx]
                self.offset += idx + 1 - self._pos
                self._pos = idx + 1
                return out
            if not self._fill():
                raise Word2VecFormatError(
                    f"truncated payload: unterminated field at offset {self.offset}"
                )

    def peek(self, n: int = 1) -> bytes:
        if len(self._buf) - self._pos < n:
            self._fill()
        return self._buf[self._pos:self._pos + n]

    def skip(self, n: int) -> None:
        self._pos += n
        self.offset += n

    def at_eof(self) -> bool:
        return self.peek(1) == b""


class EmbeddingTable:
    """Immutable vocabulary -> vector map.

    `vocab` maps token to row index into `matrix` (vocab_size x dim,
    float32). Tokens are unique; row order is file order.
    """

    def __init__(self, dim: int, vocab: dict[str, int], matrix: np.ndarray,
                 skipped_tokens: int = 0):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        if matrix.shape != (len(vocab), dim):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match "
                f"({len(vocab)}, {dim})"
            )
        self.dim = dim
        self.vocab = vocab
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        self.skipped_tokens = skipped_tokens
        self.bytes_consumed = 0   # set by load_word2vec

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return (self.dim == other.dim and self.vocab == other.vocab
                and self.matrix.tobytes() == other.matrix.tobytes())


class LookupPolicy:
    """Deterministic fallback chain: exact -> lowercase -> zero vector."""

    def __init__(self, lowercase_fallback: bool = True):
        self.lowercase_fallback = lowercase_fallback


DEFAULT_POLICY = LookupPolicy()


def lookup(table: EmbeddingTable, token: str,
           policy: LookupPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Return the vector for `token` under the fallback chain.

    Out-of-vocabulary tokens (including the empty padding token) map to
    the all-zeros vector of length `table.dim`; this is a defined result,
    not an error.
    """
    idx = table.vocab.get(token)
    if idx is None and policy.lowercase_fallback:
        idx = table.vocab.get(token.lower())
    if idx is None:
        return np.zeros(table.dim, dtype=np.float32)
    return table.matrix[idx]


def load_word2vec(stream, max_words: int | None = None) -> EmbeddingTable:
    """Parse a word2vec binary stream into an EmbeddingTable.

    Reads at most `max_words` entries when given (the rest of the stream
    is ignored), so tests never need a production-scale file. Tokens that
    do not decode as UTF-8 are skipped and counted in
    `table.skipped_tokens`; their vectors are consumed to stay aligned.
    """
    reader = _OffsetReader(stream)
    header = reader.read_until(b"\n")
    parts = header.split()
    if len(parts) != 2:
        raise Word2VecFormatError(f"malformed header: {header!r}")
    try:
        vocab_size, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise Word2VecFormatError(f"malformed header: {header!r}") from None
    if vocab_size < 0 or dim <= 0:
        raise Word2VecFormatError(
            f"malformed header: vocab_size={vocab_size}, dim={dim}"
        )

    n_target = vocab_size if max_words is None else min(vocab_size, max_words)
    vec_bytes = dim * 4
    vocab: dict[str, int] = {}
    rows = []
    skipped = 0

    for i in range(vocab_size):
        if len(rows) >= n_target:
            break
        token_bytes = reader.read_until(b" ")
        # Some writers put the entry separator before the token rather
        # than after the vector; tolerate leading newlines either way.
        token_bytes = token_bytes.lstrip(b"\n")
        payload = reader.read_exact(vec_bytes)
        if reader.peek(1) == b"\n":
            reader.skip(1)
        try:
            token = token_bytes.decode("utf-8")
        except UnicodeDecodeError:
            skipped += 1
            continue
        if token in vocab:
            raise Word2VecFormatError(
                f"duplicate token {token!r} at entry {i} "
                f"(first seen at row {vocab[token]})"
            )
        vocab[token] = len(rows)
        rows.append(np.frombuffer(payload, dtype="<f4"))

    if rows:
        matrix = np.vstack(rows)
    else:
        matrix = np.zeros((0, dim), dtype=np.float32)
    table = EmbeddingTable(dim, vocab, matrix, skipped_tokens=skipped)
    table.bytes_consumed = reader.offset
    return table


def load_word2vec_file(path, max_words: int | None = None) -> EmbeddingTable:
    with open(path, "rb") as f:
        return load_word2vec(io.BufferedReader(f), max_words=max_words)


def write_word2vec(table: EmbeddingTable, stream) -> int:
    """Emit `table` in word2vec binary form; returns the byte count.

    Output re-parses via load_word2vec into a bit-identical table.
    """
    written = 0
    header = f"{len(table)} {table.dim}\n".encode("ascii")
    stream.write(header)
    written += len(header)
    # vocab dict preserves insertion order == row order
    for token, idx in table.vocab.items():
        chunk = token.encode("utf-8") + b" " + table.matrix[idx].tobytes() + b"\n"
        stream.write(chunk)
        written += len(chunk)
    return written


def write_word2vec_file(table: EmbeddingTable, path) -> int:
    with open(path, "wb") as f:
        return write_word2vec(table, f)
