"""scikit-learn compatible wrappers around the vectorizers, trainer and scorer."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_corpus, check_prompts, check_sentences
from .embeddings import build_idf
from .evaluation import ScoreMatrix, metrics
from .trainer import TrainerConfig, train
from .vectorizers import Method, MethodKind, cosine, prompt_vec


class WeightedEmbeddings(BaseEstimator, TransformerMixin):
    """Learn per-word weights from raw documents, then embed sentences with them.

    ``fit`` takes a SegmentedCorpus or an iterable of documents, each a list
    of sentences (strings or token lists). ``transform`` returns the
    ``(n_sentences, dim)`` weighted-sum vectors.
    """

    def __init__(self, embeddings=None, learning_rate=0.1, neighbor_stddev=2.5, epochs=5, seed=0):
        self.embeddings = embeddings
        self.learning_rate = learning_rate
        self.neighbor_stddev = neighbor_stddev
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y=None):
        if self.embeddings is None:
            raise ValueError("WeightedEmbeddings requires an embeddings table")
        config = TrainerConfig(self.learning_rate, self.neighbor_stddev, self.epochs, self.seed)
        self.weights_, self.report_ = train(check_corpus(X), self.embeddings, config)
        self.n_features_out_ = self.embeddings.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "weights_")
        method = Method("weighted", emb=self.embeddings, weights=self.weights_)
        return np.array([method.vectorize(s).components for s in check_sentences(X)])


class SentenceVectorizer(BaseEstimator, TransformerMixin):
    """Dense sentence vectors under ``sum``, ``idf-emb`` or ``weighted``.

    For ``idf-emb`` without an ``idf`` table, ``fit`` builds one from ``X``
    treating every item as a sentence.
    """

    def __init__(self, method="sum", embeddings=None, idf=None, weights=None):
        self.method = method
        self.embeddings = embeddings
        self.idf = idf
        self.weights = weights

    def fit(self, X=None, y=None):
        kind = MethodKind(self.method)
        if kind is MethodKind.TFIDF:
            raise ValueError("tfidf vectors are sparse; use PromptRelevanceClassifier instead")
        idf = self.idf
        if idf is None and kind is MethodKind.IDF_EMB:
            if X is None:
                raise ValueError("idf-emb needs an idf table or training sentences")
            idf = build_idf(check_corpus([check_sentences(X)]))
        self.idf_ = idf
        self.method_ = Method(kind, emb=self.embeddings, idf=idf, weights=self.weights)
        self.n_features_out_ = self.embeddings.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "method_")
        sents = check_sentences(X)
        if not sents:
            return np.empty((0, self.n_features_out_))
        return np.array([self.method_.vectorize(s).components for s in sents])


class PromptRelevanceClassifier(BaseEstimator, ClassifierMixin):
    """Assign each sentence to the most similar prompt by cosine similarity.

    ``fit(prompts, prompt_ids)`` stores one averaged vector per prompt; a
    prompt is raw text (split at ``.!?`` + whitespace) or a list of
    sentences. ``decision_function`` returns the sentence-by-prompt cosine
    matrix with columns in ``classes_`` order.
    """

    def __init__(self, method="weighted", embeddings=None, idf=None, weights=None):
        self.method = method
        self.embeddings = embeddings
        self.idf = idf
        self.weights = weights

    def fit(self, X, y=None):
        prompts = check_prompts(X)
        y = list(range(len(prompts))) if y is None else list(y)
        if len(y) != len(prompts):
            raise ValueError(f"got {len(prompts)} prompts but {len(y)} labels")
        if len(set(y)) != len(y):
            raise ValueError("prompt labels must be unique")
        self.method_ = Method(self.method, emb=self.embeddings, idf=self.idf, weights=self.weights)
        self.classes_ = np.array(y)
        self.prompt_vectors_ = [prompt_vec(p, self.method_) for p in prompts]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "prompt_vectors_")
        rows = [self.method_.vectorize(s) for s in check_sentences(X)]
        return np.array(
            [[cosine(r, p) for p in self.prompt_vectors_] for r in rows], dtype=np.float64
        ).reshape(len(rows), len(self.prompt_vectors_))

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def score(self, X, y, sample_weight=None):
        """Accuracy where a tie for the top score counts as a miss."""
        scores = self.decision_function(X)
        labels = [str(c) for c in self.classes_]
        matrix = ScoreMatrix(scores, labels, [str(t) for t in y], [""] * len(scores))
        return metrics(matrix).accuracy
