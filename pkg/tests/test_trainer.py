import numpy as np
import pytest
from scipy import stats

from promptrel.corpus import SegmentedCorpus
from promptrel.embeddings import EmbeddingTable, WeightTable
from promptrel.trainer import (
    DegenerateTripleError, TrainerConfig, TrainingError, initial_weights, make_rng,
    sample_negative, sample_positive, train, triple_cost, triple_gradient,
)


def reference_cost(u, v, z, vectors: dict, weights: dict) -> float:
    """Plain re-statement of the hinge objective, token by token."""
    def unit(tokens):
        s = sum(weights[t] * np.asarray(vectors[t]) for t in tokens)
        return s / np.sqrt(sum(x * x for x in s))
    hu, hv, hz = unit(u), unit(v), unit(z)
    return max(-float(np.dot(hu, hv)) + float(np.dot(hu, hz)), 0.0)


def finite_difference_gradient(u, v, z, vectors, weights, h=1e-5):
    grad = {}
    for w in set(u) | set(v) | set(z):
        plus, minus = dict(weights), dict(weights)
        plus[w] += h
        minus[w] -= h
        grad[w] = (reference_cost(u, v, z, vectors, plus)
                   - reference_cost(u, v, z, vectors, minus)) / (2 * h)
    return grad


def random_instance(rng, vocab=20, dim=5):
    words = [f"w{i}" for i in range(vocab)]
    emb = EmbeddingTable(words, rng.standard_normal((vocab, dim)))
    weights = WeightTable(words, rng.uniform(0.5, 1.5, vocab))
    return emb, weights


def max_relative_error(analytic, numeric):
    worst = 0.0
    for w, d in numeric.items():
        scale = max(abs(d), abs(analytic[w]), 1e-6)
        worst = max(worst, abs(analytic[w] - d) / scale)
    return worst


def test_hinge_examples():
    # unit vectors with u.v and u.z set directly
    for uv, uz, expected in ((0.9, 0.2, 0.0), (0.1, 0.5, 0.4)):
        e = EmbeddingTable(["u", "v", "z"], [
            [1.0, 0.0, 0.0], [uv, np.sqrt(1 - uv**2), 0.0], [uz, 0.0, np.sqrt(1 - uz**2)]])
        assert triple_cost(["u"], ["v"], ["z"], e) == pytest.approx(expected, abs=1e-12)
    emb = EmbeddingTable(["u", "v", "z"], np.eye(3))
    assert triple_cost(["u"], ["v", "z"], ["z", "v"], emb) == 0.0


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    emb, weights = random_instance(rng)
    vectors = {w: emb[w] for w in emb.words}
    checked = 0
    while checked < 20:
        u, v, z = ([str(w) for w in rng.choice(emb.words, size=3)] for _ in range(3))
        wd = weights.to_dict()
        if reference_cost(u, v, z, vectors, wd) == 0.0:
            continue
        analytic = triple_gradient(u, v, z, emb, weights)
        assert max_relative_error(analytic, finite_difference_gradient(u, v, z, vectors, wd)) < 1e-4
        checked += 1


def test_gradient_zero_in_hinge_region():
    emb = EmbeddingTable(["a", "b", "c"], [[1.0, 0.0], [0.9, 0.1], [-1.0, 0.2]])
    grad = triple_gradient(["a"], ["b"], ["c"], emb)
    assert grad == {"a": 0.0, "b": 0.0, "c": 0.0}


def test_gradient_shared_word_accumulates():
    rng = np.random.default_rng(5)
    emb, weights = random_instance(rng, vocab=6, dim=4)
    vectors = {w: emb[w] for w in emb.words}
    for _ in range(50):
        u, v, z = ["w0", "w1", "w0"], ["w0", "w2"], ["w3", "w0", "w4"]
        if reference_cost(u, v, z, vectors, weights.to_dict()) > 0:
            break
        weights = WeightTable(emb.words, rng.uniform(0.2, 2.0, 6))
    analytic = triple_gradient(u, v, z, emb, weights)
    numeric = finite_difference_gradient(u, v, z, vectors, weights.to_dict())
    assert max_relative_error(analytic, numeric) < 1e-4


def test_gradient_sign_for_orthogonal_anchor_word():
    # "x" occurs only in u and its vector is orthogonal to every other word
    emb = EmbeddingTable(
        ["x", "p", "q", "r"],
        [[0, 0, 0, 1.0], [1.0, 0, 0, 0], [0.6, 0.8, 0, 0], [0, 0.3, 1.0, 0]],
    )
    weights = WeightTable(emb.words, [0.5, 1.0, 1.0, 1.0])
    u, v, z = ["x", "r"], ["p"], ["q", "r"]
    vectors = {w: emb[w] for w in emb.words}
    assert reference_cost(u, v, z, vectors, weights.to_dict()) > 0
    numeric = finite_difference_gradient(u, v, z, vectors, weights.to_dict())
    analytic = triple_gradient(u, v, z, emb, weights)
    assert np.sign(analytic["x"]) == np.sign(numeric["x"]) != 0


def test_degenerate_triple():
    emb = EmbeddingTable(["a"], [[1.0, 0.0]])
    with pytest.raises(DegenerateTripleError):
        triple_cost(["a"], ["oov"], ["a"], emb)
    with pytest.raises(DegenerateTripleError):
        triple_cost(["a"], ["a"], ["a"], emb, WeightTable(["a"], [0.0]))


def corpus_of(lengths):
    return SegmentedCorpus.from_token_lists(
        [[[f"d{d}s{i}"] for i in range(n)] for d, n in enumerate(lengths)])


def test_positive_forced_in_two_sentence_document():
    corpus = corpus_of([2, 5])
    rng = make_rng(0)
    u = corpus.documents[0][0]
    assert all(sample_positive(corpus, u, rng) == corpus.documents[0][1] for _ in range(200))


def test_positive_single_sentence_document():
    corpus = corpus_of([1, 3])
    assert sample_positive(corpus, corpus.documents[0][0], make_rng(0)) is None


def rounded_normal_probs(offsets, sd):
    """Exact probabilities of a rounded N(0, sd) restricted to ``offsets``."""
    p = np.array([stats.norm.cdf((k + 0.5) / sd) - stats.norm.cdf((k - 0.5) / sd) for k in offsets])
    return p / p.sum()


def pooled_chisquare_p(observed, expected):
    """Chi-square p-value with cells of expected count < 5 pooled into one."""
    keep = expected >= 5
    obs, exp = observed[keep], expected[keep]
    if (~keep).any():
        obs = np.append(obs, observed[~keep].sum())
        exp = np.append(exp, expected[~keep].sum())
    return stats.chisquare(obs, exp).pvalue


def test_positive_offset_distribution():
    n_draws = 100_000
    corpus = corpus_of([61])
    u = corpus.documents[0][30]
    rng = make_rng(2024)
    offsets = np.array([sample_positive(corpus, u, rng).sent_index - 30 for _ in range(n_draws)])
    support = [k for k in range(-30, 31) if k != 0]
    observed = np.array([(offsets == k).sum() for k in support])
    expected = rounded_normal_probs(support, 2.5) * n_draws
    assert pooled_chisquare_p(observed, expected) > 0.01

    freq = {k: (np.abs(offsets) == k).sum() for k in range(1, 12)}
    assert sorted(freq, key=freq.get, reverse=True)[:2] == [1, 2]
    assert all(freq[k] >= freq[k + 1] for k in range(1, 11))
    for k in range(1, 8):
        plus, minus = (offsets == k).sum(), (offsets == -k).sum()
        p = (plus + minus) / n_draws / 2
        assert abs(plus - minus) <= 3 * np.sqrt(2 * n_draws * p * (1 - p))


def test_positive_truncated_at_document_start():
    corpus = corpus_of([10])
    rng = make_rng(1)
    u = corpus.documents[0][0]
    offsets = np.array([sample_positive(corpus, u, rng).sent_index for _ in range(20_000)])
    support = list(range(1, 10))
    observed = np.array([(offsets == k).sum() for k in support])
    expected = rounded_normal_probs(support, 2.5) * len(offsets)
    assert pooled_chisquare_p(observed, expected) > 0.01


def test_negative_forced():
    corpus = corpus_of([1, 1])
    rng = make_rng(0)
    assert all(sample_negative(corpus, corpus.sentences[0], rng) == corpus.sentences[1]
               for _ in range(100))


def test_negative_uniform_excluding_anchor():
    corpus = corpus_of([4, 6])
    u = corpus.sentences[2]
    rng = make_rng(99)
    draws = [corpus.flat_index(sample_negative(corpus, u, rng)) for _ in range(10_000)]
    counts = np.bincount(draws, minlength=10)
    assert counts[2] == 0
    others = np.delete(counts, 2)
    assert stats.chisquare(others).pvalue > 0.01
    # same-document negatives are allowed
    assert counts[:4].sum() > 0


def tiny_setup():
    rng = np.random.default_rng(0)
    words = [f"w{i}" for i in range(8)]
    emb = EmbeddingTable(words, rng.standard_normal((8, 4)))
    docs = [[list(rng.choice(words[:6], size=3)) for _ in range(5)] for _ in range(6)]
    return SegmentedCorpus.from_token_lists(docs), emb


def test_train_deterministic_and_untouched_words():
    corpus, emb = tiny_setup()
    before = emb.vectors.copy()
    w1, r1 = train(corpus, emb, TrainerConfig(seed=42, epochs=3))
    w2, r2 = train(corpus, emb, TrainerConfig(seed=42, epochs=3))
    assert w1 == w2 and r1 == r2
    assert w1["w6"] == 1.0 and w1["w7"] == 1.0
    assert any(w1[w] != 1.0 for w in emb.words[:6])
    np.testing.assert_array_equal(emb.vectors, before)
    assert len(r1.epoch_costs) == 3 and all(c >= 0 for c in r1.epoch_costs)
    w3, _ = train(corpus, emb, TrainerConfig(seed=43, epochs=3))
    assert w3 != w1


def test_train_step_locality(monkeypatch):
    """A single update moves only the weights of words in u, v, z."""
    import promptrel.trainer as trainer_mod

    corpus, emb = tiny_setup()
    seen = []
    original = trainer_mod._cost_and_grad

    def spy(iu, iv, iz, vectors, g):
        before = g.copy()
        out = original(iu, iv, iz, vectors, g)
        seen.append((set(np.concatenate([iu, iv, iz]).tolist()), before, g))
        return out

    monkeypatch.setattr(trainer_mod, "_cost_and_grad", spy)
    train(corpus, emb, TrainerConfig(epochs=1))
    for (words, before, g), (_, after, _) in zip(seen, seen[1:]):
        changed = set(np.flatnonzero(after != before).tolist())
        assert changed <= words


def test_train_skips_unusable_anchors():
    emb = EmbeddingTable(["a", "b"], [[1.0, 0.0], [0.0, 1.0]])
    corpus = SegmentedCorpus.from_token_lists([[["a"]], [["a"], ["b"], ["oov"]]])
    _, report = train(corpus, emb, TrainerConfig(epochs=2))
    # the single-sentence document and the all-OOV sentence are skipped every epoch
    assert report.triples_skipped >= 4
    assert report.triples_processed + report.triples_skipped == 2 * corpus.sentence_count


def test_train_no_trainable_triple():
    emb = EmbeddingTable(["a"], [[1.0]])
    corpus = SegmentedCorpus.from_token_lists([[["a"]], [["a"]]])
    with pytest.raises(TrainingError):
        train(corpus, emb)


def test_initial_weights_are_one():
    _, emb = tiny_setup()
    assert np.all(initial_weights(emb).values == 1.0)


def test_config_validation():
    assert TrainerConfig() == TrainerConfig(0.1, 2.5, 5, 0)
    assert TrainerConfig().margin_floor == 0.0
    for bad in ({"epochs": 0}, {"learning_rate": 0}, {"neighbor_stddev": -1}, {"seed": -1}):
        with pytest.raises(ValueError):
            TrainerConfig(**bad)


def test_checkpoint_called_each_epoch():
    corpus, emb = tiny_setup()
    calls = []
    final, _ = train(corpus, emb, TrainerConfig(epochs=2), lambda e, w: calls.append((e, w)))
    assert [e for e, _ in calls] == [1, 2]
    assert calls[-1][1] == final
