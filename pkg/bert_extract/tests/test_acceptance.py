"""Release acceptance checks for the encoder sidecar.

Continues the numbering of the scoring pipeline's acceptance suite;
each test prints one PASS/FAIL summary line.
"""

import json

import pytest

from bert_extract.cli import main as extract_main

from tokencore.archive import read_archive
from tokencore.cli import main as tokencore_main


def _verdict(num, ok, detail):
    print(f"acceptance {num}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"acceptance check {num} failed: {detail}"


@pytest.fixture(scope="module")
def extracted(corpus_path, model_dir, tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    first = root / "first"
    second = root / "second"
    for out in (first, second):
        code = extract_main(["extract", "--corpus", corpus_path,
                             "--out", str(out), "--model", model_dir])
        assert code == 0, f"extract exited {code}"
    return first, second


def test_09_archive_conformance(extracted):
    first, second = extracted
    archive = read_archive(first)

    dim_ok = archive.matrix.shape[1] == 768
    offset = 0
    multi_spans = 0
    dominance_ok = True
    for spans in archive.spans:
        for span in spans:
            if span.end - span.start >= 2:
                multi_spans += 1
                rows = archive.matrix[offset + span.start:offset + span.end]
                dominance_ok &= bool((rows.max(axis=0) >= rows).all())
        offset += spans[-1].end if spans else 0

    rerun_ok = all((first / name).read_bytes() == (second / name).read_bytes()
                   for name in ("header.json", "meta.jsonl", "emb.bin"))
    _verdict(9, dim_ok and multi_spans > 0 and dominance_ok and rerun_ok,
             f"reader=ok dim={archive.matrix.shape[1]} "
             f"multi_subword_spans={multi_spans} "
             f"max_dominance={'ok' if dominance_ok else 'violated'} "
             f"rerun_identical={rerun_ok}")


def test_10_scoring_pipeline_runs_on_encoder_archive(extracted, corpus_path,
                                                     tmp_path):
    first, _ = extracted
    bank = tmp_path / "bank.tkbk"
    scores = tmp_path / "scores.jsonl"
    report_path = tmp_path / "report.json"
    steps = [
        ["bank", "--in", str(first), "--out", str(bank),
         "--train-frac", "0.5", "--split-seed", "0"],
        ["score", "--bank", str(bank), "--in", str(first),
         "--out", str(scores)],
        ["eval", "--scores", str(scores), "--corpus", corpus_path,
         "--train-frac", "0.5", "--split-seed", "0",
         "--out", str(report_path)],
    ]
    codes = [tokencore_main(step) for step in steps]
    report = json.loads(report_path.read_text()) if report_path.exists() else {}
    metric_keys = ("token_auroc", "token_auprc", "doc_auroc", "doc_auprc")
    count_keys = ("token_positives", "token_negatives",
                  "doc_positives", "doc_negatives")
    complete = (all(isinstance(report.get(k), float) for k in metric_keys)
                and all(isinstance(report.get("counts", {}).get(k), int)
                        for k in count_keys))
    _verdict(10, codes == [0, 0, 0] and complete,
             f"exit_codes={codes} report_complete={complete} "
             + " ".join(f"{k}={report.get(k, float('nan')):.3f}"
                        for k in metric_keys))
