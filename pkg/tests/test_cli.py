import json
import subprocess
import sys

import pytest

from promptrel.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def usage(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        main([str(a) for a in argv])
    return exc.value.code, capsys.readouterr().err


@pytest.fixture
def trained(cli_files, capsys):
    d = cli_files
    assert run(capsys, "idf", "--corpus", d / "corpus.txt", "--out", d / "idf.tsv")[0] == 0
    assert run(capsys, "train", "--corpus", d / "corpus.txt", "--embeddings", d / "vec.txt",
               "--out", d / "w.tsv", "--epochs", 2, "--seed", 3)[0] == 0
    return d


def test_idf(cli_files, capsys):
    d = cli_files
    code, out, _ = run(capsys, "idf", "--corpus", d / "corpus.txt", "--out", d / "idf.tsv")
    assert code == 0
    record = json.loads(out)
    assert record["n_sentences"] == 12 and record["vocab_size"] == 8
    assert (d / "idf.tsv").read_text().startswith("#N=12\n")


def test_idf_missing_corpus(tmp_path, capsys):
    code, _, err = run(capsys, "idf", "--corpus", tmp_path / "nope.txt", "--out", tmp_path / "x")
    assert code == 1 and "nope.txt" in err


def test_idf_empty_corpus(tmp_path, capsys):
    (tmp_path / "empty.txt").write_text("")
    code, _, err = run(capsys, "idf", "--corpus", tmp_path / "empty.txt", "--out", tmp_path / "x")
    assert code == 1 and "empty" in err


def test_train_defaults_echoed(cli_files, capsys):
    d = cli_files
    code, out, _ = run(capsys, "train", "--corpus", d / "corpus.txt", "--embeddings", d / "vec.txt",
                       "--out", d / "w.tsv", "--checkpoint")
    assert code == 0
    record = json.loads(out)
    assert record["config"] == {"learning_rate": 0.1, "neighbor_stddev": 2.5, "epochs": 5, "seed": 0}
    assert record["run"]["lr"] == 0.1 and record["run"]["std"] == 2.5
    assert len(record["epoch_costs"]) == 5
    assert json.loads((d / "w.tsv.report.jsonl").read_text()) == record
    assert sorted(p.name for p in d.glob("w.epoch*.tsv")) == [f"w.epoch{k}.tsv" for k in range(1, 6)]
    assert (d / "w.epoch5.tsv").read_bytes() == (d / "w.tsv").read_bytes()


def test_train_epochs_zero_is_usage_error(cli_files, capsys):
    d = cli_files
    code, err = usage(capsys, "train", "--corpus", d / "corpus.txt", "--embeddings", d / "vec.txt",
                      "--out", d / "w.tsv", "--epochs", 0)
    assert code == 2 and "--epochs" in err


def test_evaluate_self_retrieval_tfidf(trained, capsys):
    d = trained
    code, out, _ = run(capsys, "evaluate", "--method", "tfidf", "--prompts", d / "prompts.tsv",
                       "--sentences", d / "self.tsv", "--idf", d / "idf.tsv", "--out", d / "r.json")
    assert code == 0
    assert "accuracy=1.0000" in out
    record = json.loads((d / "r.json").read_text())
    assert record["accuracy"] == 1.0 and record["config"]["alpha"] == 0.5


def test_evaluate_weighted_requires_weights(trained, capsys):
    d = trained
    code, err = usage(capsys, "evaluate", "--method", "weighted", "--prompts", d / "prompts.tsv",
                      "--sentences", d / "sentences.tsv", "--embeddings", d / "vec.txt")
    assert code == 2 and "--weights" in err


@pytest.mark.parametrize("method", ["sum", "idf-emb", "weighted", "combo", "majority"])
def test_evaluate_methods_run(trained, capsys, method):
    d = trained
    code, out, _ = run(capsys, "evaluate", "--method", method, "--prompts", d / "prompts.tsv",
                       "--sentences", d / "sentences.tsv", "--idf", d / "idf.tsv",
                       "--embeddings", d / "vec.txt", "--weights", d / "w.tsv",
                       "--scores-out", d / "scores.tsv")
    assert code == 0
    record = json.loads(out.splitlines()[1])
    assert record["method"] == method and record["n_sentences"] == 4
    assert record["mrr"] >= record["accuracy"]
    header = (d / "scores.tsv").read_text().splitlines()[0]
    assert header == "prompt_id\tessay_id\tcat\tdog"


def test_evaluate_random_deterministic(trained, capsys):
    d = trained
    args = ["evaluate", "--method", "random", "--seed", 7, "--prompts", d / "prompts.tsv",
            "--sentences", d / "sentences.tsv"]
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second and first[0] == 0


def test_evaluate_bad_dataset(trained, capsys):
    d = trained
    (d / "bad.tsv").write_text("zzz\te1\tcats\n")
    code, _, err = run(capsys, "evaluate", "--method", "majority", "--prompts", d / "prompts.tsv",
                       "--sentences", d / "bad.tsv")
    assert code == 1 and "zzz" in err


def test_report_table(trained, capsys):
    d = trained
    code, out, _ = run(capsys, "report", "--prompts", d / "prompts.tsv",
                       "--sentences", d / "sentences.tsv", "--idf", d / "idf.tsv",
                       "--embeddings", d / "vec.txt", "--weights", d / "w.tsv")
    assert code == 0
    labels = [line.split()[0] for line in out.splitlines()[1:-1]]
    assert labels == ["Random", "Majority", "TF-IDF", "Word2Vec", "IDF-Embeddings",
                      "Weighted-Embeddings", "Combination"]


def test_inspect_weights(tmp_path, capsys):
    (tmp_path / "w.tsv").write_text("two\t-1.31\ncos\t3.32\nthe\t-0.73\n")
    code, out, _ = run(capsys, "inspect", "weights", "--weights", tmp_path / "w.tsv",
                       "--top", 1, "--bottom", 1)
    assert code == 0
    assert out.splitlines() == ["two\t-1.31", "cos\t3.32"]


def test_inspect_prompt_words(trained, capsys):
    d = trained
    base = ["inspect", "prompt-words", "--prompts", d / "prompts.tsv", "--embeddings",
            d / "vec.txt", "--weights", d / "w.tsv"]
    code, out, _ = run(capsys, *base, "--prompt-id", "cat", "--k", 3)
    assert code == 0 and len(out.splitlines()) == 3
    code, out, _ = run(capsys, *base, "--prompt-id", "cat", "--k", 0)
    assert code == 0 and out == ""
    code, _, err = run(capsys, *base, "--prompt-id", "nope", "--k", 3)
    assert code == 1 and "nope" in err


def test_console_entry_point(cli_files):
    proc = subprocess.run([sys.executable, "-m", "promptrel.cli", "idf", "--corpus",
                           str(cli_files / "missing"), "--out", str(cli_files / "o")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
