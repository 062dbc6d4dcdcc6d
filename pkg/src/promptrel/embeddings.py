"""Pretrained word vectors, learned word weights and sentence-level IDF tables."""

from __future__ import annotations

import math
from collections import Counter
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import SegmentedCorpus


class EmbeddingFormatError(ValueError):
    pass


class DimensionMismatchError(EmbeddingFormatError):
    pass


class TruncatedFileError(EmbeddingFormatError):
    pass


class WeightFormatError(ValueError):
    pass


class EmbeddingTable:
    """Frozen word vectors, kept in file order.

    ``vectors`` is a read-only ``(vocab_size, dim)`` float64 array; row ``i``
    belongs to ``words[i]``.
    """

    def __init__(self, words: Iterable[str], vectors, dim: int | None = None):
        self.words = tuple(words)
        vectors = np.array(vectors, dtype=np.float64)
        if dim is None:
            dim = vectors.shape[1] if vectors.ndim == 2 else 0
        if vectors.size == 0:
            vectors = vectors.reshape(len(self.words), dim)
        if vectors.shape != (len(self.words), dim) or dim <= 0:
            raise ValueError(f"vectors of shape {vectors.shape} do not match {len(self.words)} words x dim {dim}")
        if not np.isfinite(vectors).all():
            raise ValueError("embedding vectors must be finite")
        vectors.setflags(write=False)
        self.vectors = vectors
        self.dim = dim
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            dup = next(w for w, c in Counter(self.words).items() if c > 1)
            raise ValueError(f"duplicate word {dup!r} in embedding table")

    @property
    def vocab_size(self) -> int:
        return len(self.words)

    @property
    def n_parameters(self) -> int:
        return self.vocab_size * self.dim

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self.index

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]

    def __repr__(self):
        return f"EmbeddingTable(vocab_size={self.vocab_size}, dim={self.dim})"

    def resolve(self, token: str) -> int | None:
        """Row index for ``token``: exact match, then lowercase, else None."""
        i = self.index.get(token)
        if i is None:
            i = self.index.get(token.lower())
        return i

    def lookup(self, token: str) -> np.ndarray | None:
        i = self.resolve(token)
        return None if i is None else self.vectors[i]

    def indices(self, tokens: Iterable[str]) -> np.ndarray:
        """Row indices of all in-vocabulary tokens, repeats kept, OOV dropped."""
        hits = [i for i in map(self.resolve, tokens) if i is not None]
        return np.array(hits, dtype=np.intp)


def lookup(table: EmbeddingTable, token: str) -> np.ndarray | None:
    return table.lookup(token)


def _keep(word: str) -> bool:
    return "_" not in word


def load_embeddings_text(path) -> EmbeddingTable:
    """Read the word2vec text layout, dropping words that contain ``_``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        try:
            _, dim = int(header[0]), int(header[1])
        except (IndexError, ValueError) as exc:
            raise EmbeddingFormatError(f"{path}: bad header {header!r}") from exc
        words, rows = [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if not parts or parts == [""]:
                continue
            word, values = parts[0], parts[1:]
            if len(values) != dim:
                raise DimensionMismatchError(
                    f"{path}:{lineno}: word {word!r} has {len(values)} components, expected {dim}"
                )
            try:
                vec = [float(v) for v in values]
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric component for {word!r}") from exc
            if _keep(word):
                words.append(word)
                rows.append(vec)
    return EmbeddingTable(words, rows, dim)


def load_embeddings_binary(path) -> EmbeddingTable:
    """Read the word2vec binary layout (little-endian float32 rows)."""
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    try:
        vocab_size, dim = (int(x) for x in data[:nl].split())
    except ValueError as exc:
        raise EmbeddingFormatError(f"{path}: bad header {data[:nl][:80]!r}") from exc
    row_bytes = 4 * dim
    pos = nl + 1
    words, rows = [], []
    for n in range(vocab_size):
        while pos < len(data) and data[pos:pos + 1] == b"\n":
            pos += 1
        sp = data.find(b" ", pos)
        if sp < 0 or sp + 1 + row_bytes > len(data):
            start = len(data) if sp < 0 else sp + 1
            raise TruncatedFileError(
                f"{path}: truncated at word {n} of {vocab_size}: expected {row_bytes} bytes "
                f"of vector data, {max(len(data) - start, 0)} available"
            )
        word = data[pos:sp].decode("utf-8")
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=sp + 1)
        pos = sp + 1 + row_bytes
        if _keep(word):
            words.append(word)
            rows.append(vec)
    vectors = np.vstack(rows).astype(np.float64) if rows else np.empty((0, dim))
    return EmbeddingTable(words, vectors, dim)


def write_embeddings_binary(table: EmbeddingTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"{table.vocab_size} {table.dim}\n".encode("ascii"))
        vecs = table.vectors.astype("<f4")
        for word, row in zip(table.words, vecs):
            fh.write(word.encode("utf-8") + b" ")
            fh.write(row.tobytes())


def write_embeddings_text(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{table.vocab_size} {table.dim}\n")
        for word, row in zip(table.words, table.vectors):
            fh.write(word + " " + " ".join(repr(float(x)) for x in row) + "\n")


def load_embeddings(path, fmt: str = "auto") -> EmbeddingTable:
    if fmt == "auto":
        fmt = "binary" if Path(path).suffix == ".bin" else "text"
    if fmt == "binary":
        return load_embeddings_binary(path)
    if fmt == "text":
        return load_embeddings_text(path)
    raise ValueError(f"unknown embedding format {fmt!r}")


class WeightTable:
    """One learned scalar per word, stored in a fixed word order."""

    def __init__(self, words: Iterable[str], values):
        self.words = tuple(words)
        self.values = np.array(values, dtype=np.float64).reshape(len(self.words))
        if not np.isfinite(self.values).all():
            raise ValueError("weights must be finite")
        self.index = {w: i for i, w in enumerate(self.words)}

    @classmethod
    def ones(cls, table: EmbeddingTable) -> "WeightTable":
        return cls(table.words, np.ones(table.vocab_size))

    @classmethod
    def from_dict(cls, entries: Mapping[str, float]) -> "WeightTable":
        return cls(entries.keys(), list(entries.values()))

    @property
    def n_parameters(self) -> int:
        return len(self.words)

    def __len__(self):
        return len(self.words)

    def __getitem__(self, word: str) -> float:
        return float(self.values[self.index[word]])

    def __eq__(self, other):
        if not isinstance(other, WeightTable):
            return NotImplemented
        return self.words == other.words and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"WeightTable(n_words={len(self.words)})"

    def to_dict(self) -> dict[str, float]:
        return {w: float(v) for w, v in zip(self.words, self.values)}

    def aligned(self, table: EmbeddingTable) -> np.ndarray:
        """Weights reordered to ``table``'s rows."""
        if self.words == table.words:
            return self.values
        missing = [w for w in table.words if w not in self.index]
        if missing:
            raise ValueError(f"weight table lacks {len(missing)} embedding words, e.g. {missing[0]!r}")
        return self.values[[self.index[w] for w in table.words]]


def _write_scalar_tsv(fh, words, values):
    for w, v in zip(words, values):
        fh.write(f"{w}\t{float(v)!r}\n")


def save_weights(weights: WeightTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        _write_scalar_tsv(fh, weights.words, weights.values)


def _read_scalar_tsv(path, allow_header: bool = False):
    header = None
    words, values, seen = [], [], set()
    with open(path, encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if allow_header and lineno == 1 and line.startswith("#"):
                header = line
                continue
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise WeightFormatError(f"{path}:{lineno}: expected word<TAB>value")
            word, raw = parts
            try:
                value = float(raw)
            except ValueError as exc:
                raise WeightFormatError(f"{path}:{lineno}: unparseable value {raw!r}") from exc
            if word in seen:
                raise WeightFormatError(f"{path}:{lineno}: duplicate word {word!r}")
            seen.add(word)
            words.append(word)
            values.append(value)
    return header, words, values


def load_weights(path) -> WeightTable:
    _, words, values = _read_scalar_tsv(path)
    return WeightTable(words, values)


class IdfTable:
    """``log(N / (1 + n_w))`` per word, N counted in sentences, natural log."""

    def __init__(self, entries: Mapping[str, float], n_sentences: int):
        if n_sentences < 1:
            raise ValueError("n_sentences must be >= 1")
        self.entries = dict(entries)
        self.n_sentences = int(n_sentences)
        self.unseen = math.log(self.n_sentences)

    @classmethod
    def from_frequencies(cls, frequencies: Mapping[str, int], n_sentences: int) -> "IdfTable":
        return cls(
            {w: math.log(n_sentences / (1 + n)) for w, n in frequencies.items()}, n_sentences
        )

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries

    def __getitem__(self, word: str) -> float:
        return self.entries[word]

    def __repr__(self):
        return f"IdfTable(n_words={len(self.entries)}, n_sentences={self.n_sentences})"

    def value(self, token: str) -> float:
        """IDF for a token, falling back to lowercase, then to the unseen-word value."""
        v = self.entries.get(token)
        if v is None:
            v = self.entries.get(token.lower(), self.unseen)
        return v


def build_idf(corpus: SegmentedCorpus) -> IdfTable:
    n = corpus.sentence_count
    if n < 1:
        raise ValueError("cannot build IDF from an empty corpus")
    df: Counter = Counter()
    for sentence in corpus.sentences:
        df.update(set(sentence.tokens))
    return IdfTable.from_frequencies(df, n)


def save_idf(idf: IdfTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#N={idf.n_sentences}\n")
        _write_scalar_tsv(fh, idf.entries.keys(), idf.entries.values())


def load_idf(path) -> IdfTable:
    header, words, values = _read_scalar_tsv(path, allow_header=True)
    if header is None or not header.startswith("#N="):
        raise WeightFormatError(f"{path}: missing '#N=<sentence_count>' header")
    try:
        n = int(header[3:])
    except ValueError as exc:
        raise WeightFormatError(f"{path}: bad header {header!r}") from exc
    return IdfTable(dict(zip(words, values)), n)
