"""Input coercion shared by the estimator wrappers."""

from __future__ import annotations

from collections.abc import Sequence

from .corpus import SegmentedCorpus, Sentence, split_prompt_sentences, tokenize


def check_sentence(x) -> Sentence:
    """Coerce a string, Sentence or token sequence into a Sentence."""
    if isinstance(x, Sentence):
        return x
    if isinstance(x, str):
        return Sentence.from_text(x)
    if isinstance(x, Sequence) and all(isinstance(t, str) for t in x):
        return Sentence(tuple(x))
    raise TypeError(f"expected a string or a sequence of tokens, got {type(x).__name__}")


def check_sentences(X) -> list[Sentence]:
    if isinstance(X, (str, Sentence)):
        raise TypeError("expected a collection of sentences, got a single sentence")
    return [check_sentence(x) for x in X]


def check_prompt(x) -> tuple[Sentence, ...]:
    """A prompt is raw text (split into sentences) or a sequence of sentences."""
    if isinstance(x, str):
        sents = tuple(Sentence.from_text(s) for s in split_prompt_sentences(x))
        sents = tuple(s for s in sents if s.tokens)
    elif isinstance(x, Sentence):
        sents = (x,)
    else:
        sents = tuple(check_sentence(s) for s in x)
    if not sents:
        raise ValueError("prompt has no sentences")
    return sents


def check_prompts(X) -> list[tuple[Sentence, ...]]:
    if isinstance(X, str):
        raise TypeError("expected a collection of prompts, got a single string")
    prompts = [check_prompt(x) for x in X]
    if not prompts:
        raise ValueError("need at least one prompt")
    return prompts


def check_corpus(X) -> SegmentedCorpus:
    """Accept a SegmentedCorpus or documents given as lists of sentences."""
    if isinstance(X, SegmentedCorpus):
        return X
    docs = []
    for doc in X:
        if isinstance(doc, str):
            doc = [s for s in doc.split("\n") if tokenize(s)]
        sents = [check_sentence(s).tokens for s in doc]
        if sents:
            docs.append(sents)
    return SegmentedCorpus.from_token_lists(docs)
