"""Sentence vectors for the four table-driven methods, plus cosine similarity."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Sentence
from .embeddings import EmbeddingTable, IdfTable, WeightTable


@dataclass(frozen=True)
class SentenceVec:
    """A sentence representation.

    ``components`` is a dense ndarray for embedding methods and a
    ``{word: value}`` dict for TF-IDF, whose feature space is open-ended.
    """

    components: np.ndarray | dict
    n_contributing_tokens: int = 0

    @property
    def is_sparse(self) -> bool:
        return isinstance(self.components, dict)

    @property
    def dim(self) -> int | None:
        return None if self.is_sparse else len(self.components)

    def norm(self) -> float:
        if self.is_sparse:
            return float(np.sqrt(sum(v * v for v in self.components.values())))
        return float(np.linalg.norm(self.components))


class MethodKind(str, enum.Enum):
    TFIDF = "tfidf"
    SUM = "sum"
    IDF_EMB = "idf-emb"
    WEIGHTED = "weighted"


def _tokens(sentence) -> tuple[str, ...]:
    if isinstance(sentence, Sentence):
        return sentence.tokens
    return tuple(sentence)


def vec_tfidf(sentence, idf: IdfTable) -> SentenceVec:
    counts = Counter(_tokens(sentence))
    comps = {w: tf * idf.value(w) for w, tf in counts.items()}
    return SentenceVec(comps, sum(counts.values()))


def _embed(sentence, emb: EmbeddingTable, coef=None) -> SentenceVec:
    """Sum of (optionally scaled) embedding rows over in-vocabulary tokens.

    ``coef`` maps a token and its row index to a scalar. All dense methods
    share this path so the all-ones cases are bit-identical to a plain sum.
    """
    toks = _tokens(sentence)
    idx = [emb.resolve(t) for t in toks]
    hits = [(t, i) for t, i in zip(toks, idx) if i is not None]
    if not hits:
        return SentenceVec(np.zeros(emb.dim), 0)
    rows = emb.vectors[[i for _, i in hits]]
    if coef is not None:
        rows = rows * np.array([coef(t, i) for t, i in hits])[:, None]
    return SentenceVec(rows.sum(axis=0), len(hits))


def vec_sum(sentence, emb: EmbeddingTable) -> SentenceVec:
    return _embed(sentence, emb)


def vec_idf_emb(sentence, emb: EmbeddingTable, idf: IdfTable) -> SentenceVec:
    return _embed(sentence, emb, lambda tok, _: idf.value(tok))


def vec_weighted(sentence, emb: EmbeddingTable, weights: WeightTable | np.ndarray) -> SentenceVec:
    g = weights if isinstance(weights, np.ndarray) else weights.aligned(emb)
    return _embed(sentence, emb, lambda _, i: g[i])


def cosine(x: SentenceVec, y: SentenceVec) -> float:
    """Cosine similarity; 0 when either vector has zero norm."""
    if x.is_sparse != y.is_sparse:
        raise TypeError("cannot compare sparse and dense sentence vectors")
    if x.is_sparse:
        a, b = x.components, y.components
        if len(b) < len(a):
            a, b = b, a
        dot = sum(v * b.get(w, 0.0) for w, v in a.items())
    else:
        if x.dim != y.dim:
            raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
        dot = float(np.dot(x.components, y.components))
    nx, ny = x.norm(), y.norm()
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return max(-1.0, min(1.0, dot / (nx * ny)))


class Method:
    """A vectorization method bound to the tables it needs."""

    def __init__(self, kind, emb: EmbeddingTable | None = None, idf: IdfTable | None = None,
                 weights: WeightTable | None = None):
        self.kind = MethodKind(kind)
        self.emb, self.idf, self.weights = emb, idf, weights
        needs = {
            MethodKind.TFIDF: ("idf",),
            MethodKind.SUM: ("emb",),
            MethodKind.IDF_EMB: ("emb", "idf"),
            MethodKind.WEIGHTED: ("emb", "weights"),
        }[self.kind]
        missing = [n for n in needs if getattr(self, n) is None]
        if missing:
            raise ValueError(f"method {self.kind.value!r} requires tables: {', '.join(missing)}")
        self._g = weights.aligned(emb) if self.kind is MethodKind.WEIGHTED else None

    def __repr__(self):
        return f"Method({self.kind.value!r})"

    @property
    def name(self) -> str:
        return self.kind.value

    def vectorize(self, sentence) -> SentenceVec:
        if self.kind is MethodKind.TFIDF:
            return vec_tfidf(sentence, self.idf)
        if self.kind is MethodKind.SUM:
            return vec_sum(sentence, self.emb)
        if self.kind is MethodKind.IDF_EMB:
            return vec_idf_emb(sentence, self.emb, self.idf)
        return vec_weighted(sentence, self.emb, self._g)


def mean_vec(vectors: Sequence[SentenceVec]) -> SentenceVec:
    if not vectors:
        raise ValueError("cannot average zero vectors")
    n = len(vectors)
    contributing = sum(v.n_contributing_tokens for v in vectors)
    if vectors[0].is_sparse:
        acc: dict = {}
        for v in vectors:
            for w, x in v.components.items():
                acc[w] = acc.get(w, 0.0) + x
        return SentenceVec({w: x / n for w, x in acc.items()}, contributing)
    return SentenceVec(np.mean([v.components for v in vectors], axis=0), contributing)


def prompt_vec(prompt_sentences: Iterable, method: Method) -> SentenceVec:
    """Mean of per-sentence vectors; zero vectors still count in the denominator."""
    vecs = [method.vectorize(s) for s in prompt_sentences]
    if not vecs:
        raise ValueError("prompt has no sentences")
    return mean_vec(vecs)
