"""Sentence-level prompt relevance scoring with learned word-weighted embeddings."""

from .corpus import (
    LabeledDataset, LabeledSample, SegmentedCorpus, Sentence, load_labeled_dataset,
    load_plain_corpus, load_prompts, tokenize,
)
from .embeddings import (
    EmbeddingTable, IdfTable, WeightTable, build_idf, load_embeddings, load_embeddings_binary,
    load_embeddings_text, load_idf, load_weights, lookup, save_idf, save_weights,
    write_embeddings_binary, write_embeddings_text,
)
from .estimators import PromptRelevanceClassifier, SentenceVectorizer, WeightedEmbeddings
from .evaluation import (
    EvalReport, ScoreMatrix, inspect_weights, metrics, score_all, score_combination,
    score_majority, score_random, top_words_for_prompt,
)
from .trainer import (
    TrainerConfig, TrainingTriple, TrainReport, sample_negative, sample_positive, sample_triple,
    train, triple_cost, triple_gradient,
)
from .vectorizers import (
    Method, SentenceVec, cosine, prompt_vec, vec_idf_emb, vec_sum, vec_tfidf, vec_weighted,
)

__version__ = "0.1.0"

__all__ = [
    "EmbeddingTable",
    "EvalReport",
    "IdfTable",
    "LabeledDataset",
    "LabeledSample",
    "Method",
    "PromptRelevanceClassifier",
    "ScoreMatrix",
    "SegmentedCorpus",
    "Sentence",
    "SentenceVec",
    "SentenceVectorizer",
    "TrainReport",
    "TrainerConfig",
    "TrainingTriple",
    "WeightTable",
    "WeightedEmbeddings",
    "build_idf",
    "cosine",
    "inspect_weights",
    "load_embeddings",
    "load_embeddings_binary",
    "load_embeddings_text",
    "load_idf",
    "load_labeled_dataset",
    "load_plain_corpus",
    "load_prompts",
    "load_weights",
    "lookup",
    "metrics",
    "prompt_vec",
    "sample_negative",
    "sample_positive",
    "sample_triple",
    "save_idf",
    "save_weights",
    "score_all",
    "score_combination",
    "score_majority",
    "score_random",
    "tokenize",
    "top_words_for_prompt",
    "train",
    "triple_cost",
    "triple_gradient",
    "vec_idf_emb",
    "vec_sum",
    "vec_tfidf",
    "vec_weighted",
    "write_embeddings_binary",
    "write_embeddings_text",
]
