import json

import pytest

from tokencore.cli import main


def run_pipeline(tmp_path, monkeypatch, docs=60, extra_score=()):
    """Drive the full five-stage pipeline in a temp dir, return the paths."""
    monkeypatch.delenv("TOKENCORE_THREADS", raising=False)
    corpus = tmp_path / "corpus.jsonl"
    arch = tmp_path / "arch"
    bank = tmp_path / "bank.tkbk"
    scores = tmp_path / "scores.jsonl"
    report = tmp_path / "report.json"
    assert main(["inject", "--generate", "--docs", str(docs),
                 "--out", str(corpus), "--seed", "3"]) == 0
    assert main(["embed", "--in", str(corpus), "--out", str(arch),
                 "--dim", "32"]) == 0
    assert main(["bank", "--in", str(arch), "--out", str(bank),
                 "--train-frac", "0.5", "--split-seed", "0"]) == 0
    assert main(["score", "--bank", str(bank), "--in", str(arch),
                 "--out", str(scores), *extra_score]) == 0
    assert main(["eval", "--scores", str(scores), "--corpus", str(corpus),
                 "--train-frac", "0.5", "--split-seed", "0",
                 "--out", str(report)]) == 0
    return corpus, arch, bank, scores, report


class TestPipeline:
    def test_end_to_end_exit_codes_and_report(self, tmp_path, monkeypatch,
                                              capsys):
        paths = run_pipeline(tmp_path, monkeypatch)
        report = json.loads(paths[4].read_text())
        for key in ("token_auroc", "token_auprc", "doc_auroc", "doc_auprc"):
            assert 0.0 <= report[key] <= 1.0
        counts = report["counts"]
        # 54 normals split in half plus 6 corrupted docs on the test side
        assert counts["doc_positives"] + counts["doc_negatives"] == 33
        out = capsys.readouterr().out
        assert "auroc" in out and "token" in out and "doc" in out

    def test_detects_planted_gibberish(self, tmp_path, monkeypatch):
        paths = run_pipeline(tmp_path, monkeypatch, docs=150)
        report = json.loads(paths[4].read_text())
        assert report["token_auroc"] > 0.8
        assert report["doc_auroc"] > 0.7

    def test_inject_rerun_is_byte_identical(self, tmp_path, monkeypatch):
        monkeypatch.delenv("TOKENCORE_THREADS", raising=False)
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        args = ["inject", "--generate", "--docs", "40", "--seed", "9"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_score_rerun_is_byte_identical(self, tmp_path, monkeypatch):
        _, arch, bank, scores, _ = run_pipeline(tmp_path, monkeypatch)
        again = tmp_path / "again.jsonl"
        assert main(["score", "--bank", str(bank), "--in", str(arch),
                     "--out", str(again)]) == 0
        assert again.read_bytes() == scores.read_bytes()

    def test_thread_count_does_not_change_output(self, tmp_path, monkeypatch):
        _, arch, bank, scores, _ = run_pipeline(tmp_path, monkeypatch)
        monkeypatch.setenv("TOKENCORE_THREADS", "4")
        threaded = tmp_path / "threaded.jsonl"
        assert main(["score", "--bank", str(bank), "--in", str(arch),
                     "--out", str(threaded)]) == 0
        assert threaded.read_bytes() == scores.read_bytes()

    def test_sidecar_meta_written(self, tmp_path, monkeypatch):
        _, _, bank, scores, _ = run_pipeline(tmp_path, monkeypatch)
        meta = json.loads((tmp_path / "scores.jsonl.meta.json").read_text())
        assert meta["detector"] == "tokencore"
        assert meta["bank"] == bank.name


class TestExitCodes:
    def test_missing_required_flag_exits_2(self, capsys):
        assert main(["embed", "--in", "x.jsonl"]) == 2
        assert "--out" in capsys.readouterr().err

    def test_unknown_subcommand_exits_2(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_missing_input_file_exits_1(self, tmp_path):
        assert main(["embed", "--in", str(tmp_path / "nope.jsonl"),
                     "--out", str(tmp_path / "arch")]) == 1

    def test_bad_bank_file_exits_1(self, tmp_path, monkeypatch):
        _, arch, _, _, _ = run_pipeline(tmp_path, monkeypatch, docs=30)
        bad = tmp_path / "bad.tkbk"
        bad.write_bytes(b"NOTB" + b"\x00" * 40)
        assert main(["score", "--bank", str(bad), "--in", str(arch),
                     "--out", str(tmp_path / "s.jsonl")]) == 1

    def test_single_class_eval_exits_3(self, tmp_path, monkeypatch):
        monkeypatch.delenv("TOKENCORE_THREADS", raising=False)
        corpus = tmp_path / "corpus.jsonl"
        arch = tmp_path / "arch"
        bank = tmp_path / "bank.tkbk"
        scores = tmp_path / "scores.jsonl"
        rows = [{"doc_id": f"d{i}", "words": ["aa", "bb"], "label": 0,
                 "word_labels": [0, 0]} for i in range(6)]
        corpus.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        assert main(["embed", "--in", str(corpus), "--out", str(arch),
                     "--dim", "32"]) == 0
        assert main(["bank", "--in", str(arch), "--out", str(bank)]) == 0
        assert main(["score", "--bank", str(bank), "--in", str(arch),
                     "--out", str(scores)]) == 0
        assert main(["eval", "--scores", str(scores),
                     "--corpus", str(corpus)]) == 3

    def test_unlabeled_corpus_eval_exits_2(self, tmp_path, monkeypatch):
        monkeypatch.delenv("TOKENCORE_THREADS", raising=False)
        corpus = tmp_path / "corpus.jsonl"
        arch = tmp_path / "arch"
        bank = tmp_path / "bank.tkbk"
        scores = tmp_path / "scores.jsonl"
        rows = [{"doc_id": f"d{i}", "words": ["aa", "bb"]} for i in range(6)]
        corpus.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        assert main(["embed", "--in", str(corpus), "--out", str(arch),
                     "--dim", "32"]) == 0
        assert main(["bank", "--in", str(arch), "--out", str(bank)]) == 0
        assert main(["score", "--bank", str(bank), "--in", str(arch),
                     "--out", str(scores)]) == 0
        assert main(["eval", "--scores", str(scores),
                     "--corpus", str(corpus)]) == 2

    def test_invalid_thread_env_exits_2(self, tmp_path, monkeypatch):
        _, arch, bank, _, _ = run_pipeline(tmp_path, monkeypatch, docs=30)
        monkeypatch.setenv("TOKENCORE_THREADS", "banana")
        assert main(["score", "--bank", str(bank), "--in", str(arch),
                     "--out", str(tmp_path / "s2.jsonl")]) == 2
        monkeypatch.setenv("TOKENCORE_THREADS", "0")
        assert main(["score", "--bank", str(bank), "--in", str(arch),
                     "--out", str(tmp_path / "s3.jsonl")]) == 2

    def test_bad_param_values_exit_2(self, tmp_path):
        assert main(["inject", "--generate", "--docs", "0",
                     "--out", str(tmp_path / "c.jsonl")]) == 2
        assert main(["inject", "--out", str(tmp_path / "c.jsonl")]) == 2

    def test_help_exits_0_for_every_subcommand(self, capsys):
        assert main(["--help"]) == 0
        for sub in ("inject", "embed", "bank", "score", "eval"):
            assert main([sub, "--help"]) == 0
            assert sub in capsys.readouterr().out


class TestScoreOptions:
    def test_every_detector_runs(self, tmp_path, monkeypatch):
        _, arch, bank, _, _ = run_pipeline(tmp_path, monkeypatch)
        for det in ("tokencore", "lof", "iforest", "ecod"):
            out = tmp_path / f"{det}.jsonl"
            assert main(["score", "--bank", str(bank), "--in", str(arch),
                         "--out", str(out), "--detector", det]) == 0
            rows = [json.loads(line) for line in out.read_text().splitlines()]
            assert all("doc_score" in r and "token_scores" in r for r in rows)

    def test_ann_flag_on_small_bank_matches_exact(self, tmp_path, monkeypatch):
        _, arch, bank, scores, _ = run_pipeline(tmp_path, monkeypatch)
        ann_out = tmp_path / "ann.jsonl"
        assert main(["score", "--bank", str(bank), "--in", str(arch),
                     "--out", str(ann_out), "--ann"]) == 0
        # a bank this small degenerates to the exact scan
        assert ann_out.read_bytes() == scores.read_bytes()

    def test_ann_with_baseline_detector_exits_2(self, tmp_path, monkeypatch):
        _, arch, bank, _, _ = run_pipeline(tmp_path, monkeypatch)
        assert main(["score", "--bank", str(bank), "--in", str(arch),
                     "--out", str(tmp_path / "x.jsonl"),
                     "--detector", "lof", "--ann"]) == 2

    def test_aggregator_changes_doc_scores(self, tmp_path, monkeypatch):
        _, arch, bank, _, _ = run_pipeline(tmp_path, monkeypatch)
        outs = {}
        for agg in ("mean", "max", "topk:2"):
            path = tmp_path / f"agg-{agg.replace(':', '-')}.jsonl"
            assert main(["score", "--bank", str(bank), "--in", str(arch),
                         "--out", str(path), "--aggregator", agg]) == 0
            rows = [json.loads(line) for line in path.read_text().splitlines()]
            outs[agg] = [r["doc_score"] for r in rows]
            for r in rows:
                if agg == "max" and r["token_scores"]:
                    assert r["doc_score"] == max(r["token_scores"])
        assert outs["mean"] != outs["max"]


class TestEvalOutputs:
    def test_csv_holds_raw_label_score_pairs(self, tmp_path, monkeypatch):
        _, _, _, scores, _ = run_pipeline(tmp_path, monkeypatch)
        corpus = tmp_path / "corpus.jsonl"
        csv_path = tmp_path / "pairs.csv"
        assert main(["eval", "--scores", str(scores), "--corpus", str(corpus),
                     "--train-frac", "0.5", "--split-seed", "0",
                     "--csv", str(csv_path)]) == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "level,label,score"
        levels = {line.split(",")[0] for line in lines[1:]}
        assert levels == {"token", "doc"}
        for line in lines[1:]:
            level, label, score = line.split(",")
            assert label in ("0", "1")
            float(score)

    def test_eval_without_split_uses_all_docs(self, tmp_path, monkeypatch):
        corpus, _, _, scores, _ = run_pipeline(tmp_path, monkeypatch)
        report = tmp_path / "full.json"
        assert main(["eval", "--scores", str(scores), "--corpus", str(corpus),
                     "--out", str(report)]) == 0
        counts = json.loads(report.read_text())["counts"]
        assert counts["doc_positives"] + counts["doc_negatives"] == 60

    def test_missing_scored_doc_exits_2(self, tmp_path, monkeypatch):
        corpus, _, _, scores, _ = run_pipeline(tmp_path, monkeypatch)
        kept = scores.read_text().splitlines()[:-1]
        scores.write_text("\n".join(kept) + "\n")
        assert main(["eval", "--scores", str(scores),
                     "--corpus", str(corpus)]) == 2
