"""Prompt identification: score matrices, baselines, combination and metrics."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import LabeledDataset
from .embeddings import EmbeddingTable, WeightTable
from .vectorizers import Method, SentenceVec, cosine, prompt_vec


@dataclass
class ScoreMatrix:
    values: np.ndarray
    prompt_ids: list[str]
    true_ids: list[str]
    essay_ids: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.true_ids), len(self.prompt_ids)):
            raise ValueError(
                f"values of shape {self.values.shape} do not match "
                f"{len(self.true_ids)} rows x {len(self.prompt_ids)} prompts"
            )
        if len(self.essay_ids) != len(self.true_ids):
            raise ValueError("essay_ids and true_ids differ in length")
        if not np.isfinite(self.values).all():
            raise ValueError("scores must be finite")

    @property
    def shape(self):
        return self.values.shape

    def same_structure(self, other: "ScoreMatrix") -> bool:
        return (self.prompt_ids == other.prompt_ids and self.true_ids == other.true_ids
                and self.essay_ids == other.essay_ids)

    def to_tsv(self) -> str:
        lines = ["\t".join(["prompt_id", "essay_id", *self.prompt_ids])]
        for t, e, row in zip(self.true_ids, self.essay_ids, self.values):
            lines.append("\t".join([t, e, *(repr(float(x)) for x in row)]))
        return "\n".join(lines) + "\n"


def _empty_matrix(dataset: LabeledDataset, values) -> ScoreMatrix:
    return ScoreMatrix(
        values,
        dataset.prompt_ids,
        [s.prompt_id for s in dataset.samples],
        [s.essay_id for s in dataset.samples],
    )


def score_all(dataset: LabeledDataset, method: Method) -> ScoreMatrix:
    """Cosine between each sample sentence and each averaged prompt vector."""
    prompts = [prompt_vec(sents, method) for sents in dataset.prompts.values()]
    rows = [method.vectorize(s.sentence) for s in dataset.samples]
    if prompts and not prompts[0].is_sparse:
        values = _dense_cosines(rows, prompts)
    else:
        values = [[cosine(r, p) for p in prompts] for r in rows]
    return _empty_matrix(dataset, np.array(values, dtype=np.float64).reshape(len(rows), len(prompts)))


def _unit_rows(vecs: Sequence[SentenceVec]) -> np.ndarray:
    m = np.array([v.components for v in vecs], dtype=np.float64)
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return np.divide(m, norms, out=np.zeros_like(m), where=norms > 0)


def _dense_cosines(rows, prompts) -> np.ndarray:
    if not rows:
        return np.empty((0, len(prompts)))
    return np.clip(_unit_rows(rows) @ _unit_rows(prompts).T, -1.0, 1.0)


def score_random(dataset: LabeledDataset, rng: np.random.Generator | int | None = None) -> ScoreMatrix:
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return _empty_matrix(dataset, rng.random((len(dataset.samples), len(dataset.prompts))))


def majority_prompt(dataset: LabeledDataset) -> str:
    counts = dataset.counts()
    return min(dataset.prompt_ids, key=lambda p: (-counts.get(p, 0), p))


def score_majority(dataset: LabeledDataset) -> ScoreMatrix:
    winner = dataset.prompt_ids.index(majority_prompt(dataset))
    values = np.zeros((len(dataset.samples), len(dataset.prompts)))
    values[:, winner] = 1.0
    return _empty_matrix(dataset, values)


def _row_minmax(values: np.ndarray) -> np.ndarray:
    lo = values.min(axis=1, keepdims=True)
    span = values.max(axis=1, keepdims=True) - lo
    return np.divide(values - lo, span, out=np.full_like(values, 0.5), where=span > 0)


def score_combination(m1: ScoreMatrix, m2: ScoreMatrix, alpha: float = 0.5) -> ScoreMatrix:
    """``alpha * m1 + (1 - alpha) * m2`` after per-row min-max scaling."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not m1.same_structure(m2):
        raise ValueError("score matrices differ in row or column structure")
    if m1.values.size == 0:
        return ScoreMatrix(m1.values.copy(), m1.prompt_ids, m1.true_ids, m1.essay_ids)
    values = alpha * _row_minmax(m1.values) + (1.0 - alpha) * _row_minmax(m2.values)
    return ScoreMatrix(values, list(m1.prompt_ids), list(m1.true_ids), list(m1.essay_ids))


def true_ranks(matrix: ScoreMatrix) -> np.ndarray:
    """Rank of the true prompt per row; tied blocks share their average rank."""
    col = {p: j for j, p in enumerate(matrix.prompt_ids)}
    cols = np.array([col[t] for t in matrix.true_ids], dtype=np.intp)
    true_scores = matrix.values[np.arange(len(cols)), cols][:, None]
    higher = (matrix.values > true_scores).sum(axis=1)
    tied = (matrix.values == true_scores).sum(axis=1)
    return 1.0 + higher + (tied - 1) / 2.0


@dataclass
class EvalReport:
    method: str
    accuracy: float
    mrr: float
    n_sentences: int
    per_prompt_accuracy: dict[str, float] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "method": self.method,
            "accuracy": round(self.accuracy, 4),
            "mrr": round(self.mrr, 4),
            "n_sentences": self.n_sentences,
            "per_prompt_accuracy": {k: round(v, 4) for k, v in self.per_prompt_accuracy.items()},
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    def summary(self) -> str:
        return (f"method={self.method}\taccuracy={self.accuracy:.4f}\t"
                f"mrr={self.mrr:.4f}\tn_sentences={self.n_sentences}")


def metrics(matrix: ScoreMatrix, method: str = "") -> EvalReport:
    """Accuracy (unique argmax on the true prompt) and mean reciprocal rank."""
    if matrix.values.shape[0] == 0:
        raise ValueError("cannot evaluate an empty score matrix")
    ranks = true_ranks(matrix)
    hits = ranks == 1.0
    per_prompt = {}
    totals = Counter(matrix.true_ids)
    correct = Counter(t for t, h in zip(matrix.true_ids, hits) if h)
    for p in matrix.prompt_ids:
        if totals[p]:
            per_prompt[p] = correct[p] / totals[p]
    return EvalReport(
        method=method,
        accuracy=float(hits.mean()),
        mrr=float((1.0 / ranks).mean()),
        n_sentences=len(ranks),
        per_prompt_accuracy=per_prompt,
    )


def top_words_for_prompt(prompt_id: str, dataset: LabeledDataset | dict, emb: EmbeddingTable,
                         weights: WeightTable, k: int = 10) -> list[tuple[str, float, float]]:
    """Vocabulary words ranked by cosine of their scaled vector with the prompt.

    Returns ``(word, score, weight)`` triples, best first.
    """
    prompts = dataset.prompts if isinstance(dataset, LabeledDataset) else dataset
    if prompt_id not in prompts:
        raise KeyError(f"unknown prompt_id {prompt_id!r}")
    if k <= 0:
        return []
    g = weights.aligned(emb)
    p = prompt_vec(prompts[prompt_id], Method("weighted", emb=emb, weights=weights)).components
    pn = np.linalg.norm(p)
    wn = np.linalg.norm(emb.vectors, axis=1)
    denom = wn * pn
    scores = np.divide(emb.vectors @ p, denom, out=np.zeros(len(g)), where=denom > 0) * np.sign(g)
    order = sorted(range(len(g)), key=lambda i: (-scores[i], emb.words[i]))[:k]
    return [(emb.words[i], float(scores[i]), float(g[i])) for i in order]


def inspect_weights(weights: WeightTable, k: int) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    """Lowest ``k`` and highest ``k`` weights; the top list is highest first."""
    if k <= 0:
        return [], []
    ranked = sorted(zip(weights.words, weights.values.tolist()), key=lambda wv: (wv[1], wv[0]))
    return ranked[:k], ranked[::-1][:k]
