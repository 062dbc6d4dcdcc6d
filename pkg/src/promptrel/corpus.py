"""Tokenization and loading of plain-text corpora and labeled essay datasets."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

PUNCTUATION = frozenset('.,;:!?"\'()[]')

_PROMPT_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")


class CorpusError(ValueError):
    """Raised for malformed corpus or dataset files."""


def tokenize(text: str) -> list[str]:
    """Split on whitespace and detach leading/trailing punctuation.

    Case is preserved, as are hyphens and apostrophes inside a word.

    >>> tokenize("the cat.")
    ['the', 'cat', '.']
    """
    tokens: list[str] = []
    for chunk in text.split():
        start, end = 0, len(chunk)
        while start < end and chunk[start] in PUNCTUATION:
            start += 1
        while end > start and chunk[end - 1] in PUNCTUATION:
            end -= 1
        tokens.extend(chunk[:start])
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(chunk[end:])
    return tokens


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    doc_index: int = 0
    sent_index: int = 0

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.doc_index < 0 or self.sent_index < 0:
            raise ValueError("doc_index and sent_index must be non-negative")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    @classmethod
    def from_text(cls, text: str, doc_index: int = 0, sent_index: int = 0) -> "Sentence":
        return cls(tuple(tokenize(text)), doc_index, sent_index)


@dataclass(frozen=True)
class SegmentedCorpus:
    """Documents, each an ordered tuple of sentences.

    Sentence positions are re-derived from the document structure, so
    ``doc_index``/``sent_index`` are always contiguous.
    """

    documents: tuple[tuple[Sentence, ...], ...]
    _flat: tuple[Sentence, ...] = field(init=False, repr=False, compare=False)
    _offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        docs = []
        flat: list[Sentence] = []
        offsets = []
        for d, doc in enumerate(self.documents):
            doc = tuple(
                Sentence(tuple(s.tokens if isinstance(s, Sentence) else s), d, i)
                for i, s in enumerate(doc)
            )
            if not doc:
                raise ValueError(f"document {d} is empty")
            offsets.append(len(flat))
            flat.extend(doc)
            docs.append(doc)
        object.__setattr__(self, "documents", tuple(docs))
        object.__setattr__(self, "_flat", tuple(flat))
        object.__setattr__(self, "_offsets", tuple(offsets))

    @classmethod
    def from_token_lists(cls, documents: Sequence[Sequence[Sequence[str]]]) -> "SegmentedCorpus":
        return cls(tuple(tuple(Sentence(tuple(s)) for s in doc) for doc in documents if doc))

    @property
    def sentence_count(self) -> int:
        return len(self._flat)

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self._flat)

    @property
    def sentences(self) -> tuple[Sentence, ...]:
        return self._flat

    def flat_index(self, sentence: Sentence) -> int:
        return self._offsets[sentence.doc_index] + sentence.sent_index

    def document_of(self, sentence: Sentence) -> tuple[Sentence, ...]:
        return self.documents[sentence.doc_index]

    def to_plain(self) -> str:
        """Serialize in the one-sentence-per-line, blank-line-separated format."""
        return "\n".join(
            "".join(" ".join(s.tokens) + "\n" for s in doc) for doc in self.documents
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_plain(), encoding="utf-8", newline="\n")


def _decode(data: bytes, path) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from exc


def parse_plain_corpus(text: str) -> SegmentedCorpus:
    documents: list[list[Sentence]] = []
    current: list[Sentence] = []
    for line in text.split("\n"):
        tokens = tokenize(line)
        if tokens:
            current.append(Sentence(tuple(tokens)))
        else:
            if current:
                documents.append(current)
            current = []
    if current:
        documents.append(current)
    return SegmentedCorpus(tuple(tuple(doc) for doc in documents))


def load_plain_corpus(path) -> SegmentedCorpus:
    """Load a UTF-8 corpus: one sentence per line, blank line between documents."""
    return parse_plain_corpus(_decode(Path(path).read_bytes(), path))


def split_prompt_sentences(text: str) -> list[str]:
    return [part for part in _PROMPT_SENTENCE_BREAK.split(text.strip()) if part]


@dataclass(frozen=True)
class LabeledSample:
    prompt_id: str
    essay_id: str
    sentence: Sentence


@dataclass(frozen=True)
class LabeledDataset:
    prompts: dict[str, tuple[Sentence, ...]]
    samples: tuple[LabeledSample, ...]

    def __post_init__(self):
        for pid, sents in self.prompts.items():
            if not sents:
                raise CorpusError(f"prompt {pid!r} has no sentences")
        for i, sample in enumerate(self.samples):
            if sample.prompt_id not in self.prompts:
                raise CorpusError(f"sample {i}: unknown prompt_id {sample.prompt_id!r}")

    @property
    def prompt_ids(self) -> list[str]:
        return list(self.prompts)

    def counts(self) -> Counter:
        return Counter(s.prompt_id for s in self.samples)

    @classmethod
    def from_texts(cls, prompts: dict[str, str], samples: Sequence[tuple[str, str, str]]):
        """Build a dataset in memory from raw prompt and sentence strings."""
        parsed = {pid: _prompt_sentences(text, i) for i, (pid, text) in enumerate(prompts.items())}
        return cls(parsed, tuple(
            LabeledSample(pid, eid, Sentence.from_text(text, doc_index=i))
            for i, (pid, eid, text) in enumerate(samples)
        ))


def _prompt_sentences(text: str, doc_index: int) -> tuple[Sentence, ...]:
    sents = (tokenize(s) for s in split_prompt_sentences(text))
    return tuple(Sentence(tuple(t), doc_index, i) for i, t in enumerate(s for s in sents if s))


def _tsv_rows(path, n_fields: int):
    text = _decode(Path(path).read_bytes(), path)
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        fields = line.rstrip("\r").split("\t")
        if len(fields) != n_fields:
            raise CorpusError(
                f"{path}:{lineno}: expected {n_fields} tab-separated fields, got {len(fields)}"
            )
        yield lineno, fields


def load_prompts(path) -> dict[str, tuple[Sentence, ...]]:
    """Read ``prompt_id<TAB>prompt_text`` rows."""
    prompts: dict[str, tuple[Sentence, ...]] = {}
    for lineno, (pid, text) in _tsv_rows(path, 2):
        if pid in prompts:
            raise CorpusError(f"{path}:{lineno}: duplicate prompt_id {pid!r}")
        sents = _prompt_sentences(text, len(prompts))
        if not sents:
            raise CorpusError(f"{path}:{lineno}: prompt {pid!r} has no tokens")
        prompts[pid] = sents
    return prompts


def load_labeled_dataset(prompts_path, sentences_path) -> LabeledDataset:
    prompts = load_prompts(prompts_path)
    samples = []
    for lineno, (pid, eid, text) in _tsv_rows(sentences_path, 3):
        if pid not in prompts:
            raise CorpusError(f"{sentences_path}:{lineno}: unknown prompt_id {pid!r}")
        samples.append(LabeledSample(pid, eid, Sentence.from_text(text, doc_index=len(samples))))
    return LabeledDataset(prompts, tuple(samples))
