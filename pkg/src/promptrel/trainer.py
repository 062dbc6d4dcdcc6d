"""Unsupervised learning of per-word weights over frozen embeddings.

Each anchor sentence ``u`` is paired with a nearby sentence ``v`` from the
same document and a random sentence ``z`` from the corpus. With every
sentence vector a weighted sum of word vectors normalized to unit length,
the hinge ``max(u.z - u.v, 0)`` is minimized by plain gradient descent on
the word weights only.

Randomness comes from numpy's PCG64 bit generator seeded with
``TrainerConfig.seed``: one ``permutation`` per epoch for the anchor order,
then per anchor a sequence of ``normal`` draws for the positive offset and
``integers`` draws for the negative.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .corpus import SegmentedCorpus, Sentence
from .embeddings import EmbeddingTable, WeightTable

logger = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainerConfig:
    learning_rate: float = 0.1
    neighbor_stddev: float = 2.5
    epochs: int = 5
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not self.neighbor_stddev > 0:
            raise ValueError("neighbor_stddev must be > 0")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError("epochs must be an integer >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def margin_floor(self) -> float:
        return 0.0


@dataclass
class TrainReport:
    epoch_costs: list[float] = field(default_factory=list)
    triples_processed: int = 0
    triples_skipped: int = 0

    def to_json(self, config: TrainerConfig | None = None, **extra) -> str:
        record = asdict(self)
        if config is not None:
            record["config"] = asdict(config)
        record.update(extra)
        return json.dumps(record, sort_keys=True)


@dataclass(frozen=True)
class TrainingTriple:
    u: Sentence
    v: Sentence
    z: Sentence


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_positive(corpus: SegmentedCorpus, u: Sentence, rng: np.random.Generator,
                    stddev: float = 2.5) -> Sentence | None:
    """Nearby sentence at a rounded Normal(0, stddev) offset within u's document.

    Offsets of 0 or outside the document are redrawn. Returns None when the
    document has a single sentence.
    """
    doc = corpus.document_of(u)
    n, pos = len(doc), u.sent_index
    if n < 2:
        return None
    while True:
        offset = int(np.rint(rng.normal(0.0, stddev)))
        if offset != 0 and 0 <= pos + offset < n:
            return doc[pos + offset]


def sample_negative(corpus: SegmentedCorpus, u: Sentence, rng: np.random.Generator) -> Sentence:
    """Uniform draw over the corpus excluding ``u`` itself."""
    n = corpus.sentence_count
    if n < 2:
        raise ValueError("need at least two sentences to draw a negative")
    own = corpus.flat_index(u)
    while True:
        k = int(rng.integers(n))
        if k != own:
            return corpus.sentences[k]


def sample_triple(corpus: SegmentedCorpus, u: Sentence, rng: np.random.Generator,
                  stddev: float = 2.5) -> TrainingTriple | None:
    v = sample_positive(corpus, u, rng, stddev)
    if v is None:
        return None
    return TrainingTriple(u, v, sample_negative(corpus, u, rng))


class DegenerateTripleError(ValueError):
    """A sentence in the triple has a zero weighted vector."""


def _forward(idx_u, idx_v, idx_z, vectors, g):
    sums, norms = [], []
    for idx in (idx_u, idx_v, idx_z):
        s = g[idx] @ vectors[idx] if len(idx) else np.zeros(vectors.shape[1])
        n = float(np.linalg.norm(s))
        if n == 0.0:
            raise DegenerateTripleError("zero-norm sentence vector")
        sums.append(s)
        norms.append(n)
    hu, hv, hz = (s / n for s, n in zip(sums, norms))
    cost = max(float(hu @ hz - hu @ hv), 0.0)
    return cost, (hu, hv, hz), norms


def _backward(idx_u, idx_v, idx_z, vectors, units, norms):
    """Gradient w.r.t. the weights of each token occurrence in u, v, z."""
    hu, hv, hz = units
    grads = []
    for idx, h, n, outer in (
        (idx_u, hu, norms[0], hz - hv),
        (idx_v, hv, norms[1], -hu),
        (idx_z, hz, norms[2], hu),
    ):
        # d(s/|s|)/ds = (I - h h^T) / |s|
        ds = (outer - h * (h @ outer)) / n
        grads.append(vectors[idx] @ ds)
    return np.concatenate([idx_u, idx_v, idx_z]), np.concatenate(grads)


def _cost_and_grad(idx_u, idx_v, idx_z, vectors, g):
    cost, units, norms = _forward(idx_u, idx_v, idx_z, vectors, g)
    if cost == 0.0:
        return cost, np.empty(0, dtype=np.intp), np.empty(0)
    idx, contrib = _backward(idx_u, idx_v, idx_z, vectors, units, norms)
    uniq, inv = np.unique(idx, return_inverse=True)
    grad = np.zeros(len(uniq))
    np.add.at(grad, inv, contrib)
    return cost, uniq, grad


def _weights_array(emb: EmbeddingTable, weights) -> np.ndarray:
    if weights is None:
        return np.ones(emb.vocab_size)
    if isinstance(weights, np.ndarray):
        return weights
    return weights.aligned(emb)


def triple_cost(u, v, z, emb: EmbeddingTable, weights=None) -> float:
    """Hinge cost of a triple; raises DegenerateTripleError on a zero vector."""
    g = _weights_array(emb, weights)
    cost, _, _ = _forward(*(emb.indices(s) for s in (u, v, z)), emb.vectors, g)
    return cost


def triple_gradient(u, v, z, emb: EmbeddingTable, weights=None) -> dict[str, float]:
    """Partial derivatives of :func:`triple_cost` for every word in u, v or z."""
    g = _weights_array(emb, weights)
    idx = [emb.indices(s) for s in (u, v, z)]
    _, uniq, grad = _cost_and_grad(*idx, emb.vectors, g)
    out = {emb.words[i]: 0.0 for i in np.unique(np.concatenate(idx))}
    out.update({emb.words[i]: float(d) for i, d in zip(uniq, grad)})
    return out


def initial_weights(emb: EmbeddingTable) -> WeightTable:
    return WeightTable.ones(emb)


def _has_trainable_triple(corpus: SegmentedCorpus, indices) -> bool:
    """Some document holds two sentences with in-vocabulary tokens."""
    usable = [len(i) > 0 for i in indices]
    for doc in corpus.documents:
        if sum(usable[corpus.flat_index(s)] for s in doc) >= 2:
            return True
    return False


def train(corpus: SegmentedCorpus, emb: EmbeddingTable, config: TrainerConfig | None = None,
          checkpoint: Callable[[int, WeightTable], None] | None = None,
          ) -> tuple[WeightTable, TrainReport]:
    """Learn a weight per embedding word from ``corpus``.

    ``checkpoint(epoch, weights)`` is called after each epoch when given.
    """
    config = config or TrainerConfig()
    if corpus.sentence_count == 0:
        raise TrainingError("corpus is empty")
    if emb.vocab_size == 0:
        raise TrainingError("embedding table is empty")

    rng = make_rng(config.seed)
    vectors = emb.vectors
    g = np.ones(emb.vocab_size)
    sentences = corpus.sentences
    indices = [emb.indices(s) for s in sentences]
    doc_sizes = [len(corpus.documents[s.doc_index]) for s in sentences]
    if not _has_trainable_triple(corpus, indices):
        raise TrainingError("corpus yields no trainable triple")
    report = TrainReport()

    for epoch in range(1, config.epochs + 1):
        total, processed = 0.0, 0
        for k in rng.permutation(len(sentences)):
            u = sentences[k]
            if doc_sizes[k] < 2 or len(indices[k]) == 0:
                report.triples_skipped += 1
                continue
            triple = sample_triple(corpus, u, rng, config.neighbor_stddev)
            try:
                cost, uniq, grad = _cost_and_grad(
                    indices[k], indices[corpus.flat_index(triple.v)],
                    indices[corpus.flat_index(triple.z)], vectors, g,
                )
            except DegenerateTripleError:
                report.triples_skipped += 1
                continue
            if cost > 0.0:
                g[uniq] -= config.learning_rate * grad
            total += cost
            processed += 1
        mean = total / processed if processed else 0.0
        report.triples_processed += processed
        report.epoch_costs.append(mean)
        logger.info("epoch %d: mean cost %.6f over %d triples", epoch, mean, processed)
        if checkpoint is not None:
            checkpoint(epoch, WeightTable(emb.words, g.copy()))

    return WeightTable(emb.words, g), report
