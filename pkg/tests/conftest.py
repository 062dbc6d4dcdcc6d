import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

from promptrel.embeddings import EmbeddingTable, write_embeddings_text


@pytest.fixture
def cli_files(tmp_path):
    """A tiny corpus, embeddings and prompt/sentence TSVs on disk."""
    words = ["cats", "purr", "dogs", "bark", "the", "loud", "soft", "fur"]
    rng = np.random.default_rng(0)
    emb = EmbeddingTable(words, rng.standard_normal((len(words), 6)))
    write_embeddings_text(emb, tmp_path / "vec.txt")
    corpus = "\n\n".join(
        "\n".join(lines) for lines in [
            ["the cats purr", "soft fur", "the cats purr soft", "fur cats"],
            ["the dogs bark", "loud dogs", "the loud bark", "dogs bark loud"],
            ["cats purr", "purr soft fur"],
            ["dogs bark", "loud bark the dogs"],
        ]
    ) + "\n"
    (tmp_path / "corpus.txt").write_text(corpus)
    (tmp_path / "prompts.tsv").write_text("cat\tThe cats purr. Soft fur!\ndog\tThe dogs bark loud.\n")
    (tmp_path / "self.tsv").write_text(
        "cat\te1\tThe cats purr. Soft fur!\ndog\te2\tThe dogs bark loud.\n")
    (tmp_path / "sentences.tsv").write_text(
        "cat\te1\tcats purr\ncat\te1\tsoft fur\ndog\te2\tloud dogs\ndog\te2\tthe bark\n")
    return tmp_path


_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        _criteria[item.nodeid] = (marker.args[0], marker.args[1], status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n, text, status in sorted(_criteria.values(), key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {n}: {status}  {text}")
